"""Time-ordered exponentials of linear field observables, at finite cutoff.

The observable is the dual pairing X = <nu, phi> of a source coefficient
field nu with the operator field.  Splitting X = C + A into raising and
lowering parts gives the chain of identities this module implements and the
test suite cross-checks:

    T(X^n)    = sum_k p(n, k) (-i Q)^k :X^(n-2k):
    T exp(iX) = :exp(iX): exp(i Q / 2) = exp(iC) exp(iA) exp(i Q / 2)

where p(n, k) = n! / (k! (n-2k)! 2^k) counts the ways to pick k disjoint
pairs out of n slots and Q is the causal quadratic form of nu.

On the truncated Fock space both exponential factors are polynomials (pure
raising and pure lowering operators are nilpotent), so exp(iC) exp(iA) is
an exact evaluation of the normal-ordered exponential, not an
approximation.  What the truncation does cost is the top-shell defect of
the commutation relations; the partial T-exponential therefore differs
from the closed form by the dropped terms only, and

    || partial(N) - closed ||_2  <=  sum_{m + 2k > N} B^m/m! q^k/k!

with B = ||C||_2 + ||A||_2 and q = |Q|/2.  ``exp_identity_tail_bound``
evaluates a rigorous upper bound for that double tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import SizeLimit, UnknownLabel, ValidationError
from .fockspace import (
    FockContext,
    FockOperator,
    KernelVector,
    OrbitSpec,
    ParticleLabel,
    field_coefficient,
    kernel_operator,
    wick_power,
)
from .modes import ROOT_4PI, CoefficientField, sobolev_norm

__all__ = [
    "pairing_count",
    "pairing_count_bruteforce",
    "verify_recursions",
    "RecursionReport",
    "build_kernels",
    "field_pairing_operator",
    "time_ordered_monomial",
    "time_ordered_partial",
    "time_ordered_closed",
    "vacuum_characteristic",
    "characteristic_modulus_bound",
    "exp_identity_tail_bound",
]

BRUTE_FORCE_LIMIT = 14


def pairing_count(n: int, k: int) -> int:
    """Number of ways to choose k disjoint pairs from n labelled slots."""
    if n < 0 or k < 0:
        raise ValidationError("pairing counts need nonnegative arguments")
    if 2 * k > n:
        return 0
    return math.factorial(n) // (
        math.factorial(k) * math.factorial(n - 2 * k) * 2**k
    )


def pairing_count_bruteforce(n: int, k: int) -> int:
    """Count k-pair partial matchings by walking the full decision tree.

    Every matching is enumerated exactly once: the smallest unresolved slot
    is either left single or paired with each larger unresolved slot.  This
    is deliberately independent of the factorial formula.
    """
    if n < 0 or k < 0:
        raise ValidationError("pairing counts need nonnegative arguments")
    if n > BRUTE_FORCE_LIMIT:
        raise SizeLimit(
            f"brute-force matching enumeration capped at n = {BRUTE_FORCE_LIMIT}"
        )
    if 2 * k > n:
        return 0

    def walk(free: tuple[int, ...], pairs_left: int) -> int:
        if pairs_left == 0:
            return 1
        if len(free) < 2 * pairs_left:
            return 0
        first, rest = free[0], free[1:]
        total = walk(rest, pairs_left)  # first stays single
        for pos in range(len(rest)):
            partner_removed = rest[:pos] + rest[pos + 1 :]
            total += walk(partner_removed, pairs_left - 1)
        return total

    return walk(tuple(range(n)), k)


@dataclass(frozen=True)
class RecursionReport:
    """Outcome of checking the two recurrences for the pairing counts."""

    shift_holds: bool
    product_raw_holds: bool
    product_corrected_holds: bool
    counterexample: tuple[int, int] | None
    raw_counterexample: tuple[int, int] | None


def verify_recursions(n_max: int, count=pairing_count) -> RecursionReport:
    """Check the shift recurrence and both readings of the product recurrence.

    Shift:              p(n+1, k) = p(n, k) + n p(n-1, k-1)
    Product, raw:       p(n, k+1) = p(n-2k, 1) / (k+1)
    Product, corrected: p(n, k+1) = p(n, k) p(n-2k, 1) / (k+1)

    The raw reading drops the p(n, k) factor.  ``counterexample`` records
    the first (n, k) where the shift or corrected reading fails (expected:
    never); ``raw_counterexample`` does the same for the raw reading.
    """
    shift = True
    raw = True
    corrected = True
    counterexample = None
    raw_counterexample = None
    for n in range(0, n_max + 1):
        for k in range(0, n // 2 + 2):
            if n >= 1 and k >= 1:
                lhs = count(n + 1, k)
                rhs = count(n, k) + n * count(n - 1, k - 1)
                if lhs != rhs:
                    shift = False
                    counterexample = counterexample or (n, k)
            if n - 2 * k >= 2:
                if count(n, k + 1) * (k + 1) != count(n, k) * count(n - 2 * k, 1):
                    corrected = False
                    counterexample = counterexample or (n, k)
                if count(n, k + 1) * (k + 1) != count(n - 2 * k, 1):
                    raw = False
                    raw_counterexample = raw_counterexample or (n, k)
    return RecursionReport(
        shift_holds=shift,
        product_raw_holds=raw,
        product_corrected_holds=corrected,
        counterexample=counterexample,
        raw_counterexample=raw_counterexample,
    )


def build_kernels(
    spec: OrbitSpec, nu: CoefficientField
) -> tuple[KernelVector, KernelVector]:
    """Ladder kernels of the pairing <nu, phi>.

    Expanding the field display inside the dual pairing collapses the
    (2l+1) weights and leaves, for the label (canonical mode, s),

        kappa01 = sqrt(4 pi) sum_m Tr[nu(m) u_s(m)]
        kappa10 = sqrt(4 pi) sum_m Tr[nu(m) conj(J u_s(refl m) J)]

    with m running over the support modes in the label's orbit and J the
    index reflection (both axes reversed).  Every support mode of nu must
    belong to a stored orbit; otherwise part of the source would silently
    decouple and the quadratic-form identities would fail.
    """
    k01: dict[ParticleLabel, complex] = {}
    k10: dict[ParticleLabel, complex] = {}
    for m in nu.support():
        can = m.canonical()
        if can not in spec.systems:
            raise UnknownLabel(
                f"source mode {m} has no orbit in the system spec"
            )
        block = nu.block(m)
        u_here = spec.system(m)
        u_refl = spec.system(m.reflected())
        for s in range(spec.n_systems(m)):
            lbl = ParticleLabel(can, s)
            down = ROOT_4PI * np.trace(block @ u_here[s])
            up = ROOT_4PI * np.trace(block @ np.conj(u_refl[s][::-1, ::-1]))
            k01[lbl] = k01.get(lbl, 0.0) + down
            k10[lbl] = k10.get(lbl, 0.0) + up
    return KernelVector(k01), KernelVector(k10)


def field_pairing_operator(
    ctx: FockContext, spec: OrbitSpec, nu: CoefficientField
) -> FockOperator:
    """The operator <nu, phi> assembled entry by entry from field coefficients.

    Independent of build_kernels on purpose: this route goes through the
    per-entry field operators and the (2l+1)-weighted trace, so agreement
    with kernel_operator(build_kernels(...)) is a genuine consistency check.
    """
    mat = np.zeros((ctx.dim, ctx.dim), dtype=complex)
    for m in nu.support():
        if m.canonical() not in spec.systems:
            raise UnknownLabel(f"source mode {m} has no orbit in the system spec")
        block = nu.block(m)
        vals = m.two_i_values()
        for r, two_i in enumerate(vals):
            for c, two_j in enumerate(vals):
                if block[r, c] == 0.0:
                    continue
                phi = field_coefficient(ctx, spec, m, two_j, two_i)
                mat += m.weight * block[r, c] * phi.mat
    return FockOperator(ctx, mat)


def time_ordered_monomial(
    ctx: FockContext,
    kappa01: KernelVector,
    kappa10: KernelVector,
    q_form: complex,
    n: int,
) -> FockOperator:
    """T(X^n) = sum_k p(n, k) (-i Q)^k :X^(n-2k):."""
    mat = np.zeros((ctx.dim, ctx.dim), dtype=complex)
    for k in range(n // 2 + 1):
        coeff = pairing_count(n, k) * (-1j * q_form) ** k
        mat += coeff * wick_power(ctx, kappa01, kappa10, n - 2 * k).mat
    return FockOperator(ctx, mat)


def time_ordered_partial(
    ctx: FockContext,
    kappa01: KernelVector,
    kappa10: KernelVector,
    q_form: complex,
    order: int,
) -> FockOperator:
    """Partial sum sum_{n <= order} i^n / n! T(X^n) of the T-exponential."""
    mat = np.zeros((ctx.dim, ctx.dim), dtype=complex)
    for n in range(order + 1):
        term = time_ordered_monomial(ctx, kappa01, kappa10, q_form, n)
        mat += (1j) ** n / math.factorial(n) * term.mat
    return FockOperator(ctx, mat)


def time_ordered_closed(
    ctx: FockContext,
    kappa01: KernelVector,
    kappa10: KernelVector,
    q_form: complex,
) -> FockOperator:
    """Closed form exp(iC) exp(iA) exp(i Q / 2) of the T-exponential."""
    lower = kernel_operator(ctx, kappa01, KernelVector.zero()).mat
    raise_ = kernel_operator(ctx, KernelVector.zero(), kappa10).mat
    mat = expm(1j * raise_) @ expm(1j * lower) * np.exp(0.5j * q_form)
    return FockOperator(ctx, mat)


def vacuum_characteristic(q_form: complex) -> complex:
    """Vacuum expectation of the time-ordered exponential, exp(i Q / 2)."""
    return complex(np.exp(0.5j * q_form))


def characteristic_modulus_bound(nu: CoefficientField) -> float:
    """Uniform modulus bound exp(sqrt(pi) |nu|_1^2) on the characteristic value."""
    return math.exp(math.sqrt(math.pi) * sobolev_norm(nu, 1) ** 2)


def _exp_tail(x: float, start: int) -> float:
    """Upper bound on sum_{m >= start} x^m / m! for x >= 0."""
    if start <= 0:
        return math.exp(x)
    lead = x**start / math.factorial(start)
    if x < start + 1:
        return lead / (1.0 - x / (start + 1))
    return math.exp(x)


def exp_identity_tail_bound(bound_b: float, q_form: complex, order: int) -> float:
    """Rigorous bound on sum over m + 2k > order of B^m/m! q^k/k!, q = |Q|/2.

    Terms with k <= order/2 need m > order - 2k; the remaining k values are
    bounded by a full exponential tail in k.
    """
    if bound_b < 0:
        raise ValidationError("operator norm bound must be nonnegative")
    q = abs(q_form) / 2.0
    k_split = order // 2
    total = 0.0
    for k in range(k_split + 1):
        total += q**k / math.factorial(k) * _exp_tail(bound_b, order + 1 - 2 * k)
    total += _exp_tail(q, k_split + 1) * math.exp(bound_b)
    return total
