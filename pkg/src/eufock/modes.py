"""Mode bookkeeping on the compactified Einstein universe.

A mode ``m = (n, l)`` labels one matrix block of the joint Fourier
decomposition over the circle of circumference 4*pi and SU(2).  ``l`` may be
half-integer, so it is stored as the integer ``two_l = 2l``; a mode block is a
square matrix of size ``two_l + 1`` whose row/column positions ``r, c``
correspond to the half-integer indices ``i = (2r - two_l)/2`` and
``j = (2c - two_l)/2`` (ascending order).

Conventions used throughout the package:

* eigenvalue of the reference operator: ``omega(m) = n**2 + 1 + l(l+1)``,
* Sobolev k-norm: ``|f|_k**2 = sum_m (2l+1) * omega(m)**(2k) * |f(m)_ij|**2``,
* dual pairing (bilinear, no conjugation):
  ``<nu, phi> = sum_m (2l+1) * Tr[phi(m) nu(m)]``,
* a field flagged real satisfies ``conj(f(n,l)_ij) = f(-n,l)_{-i,-j}``
  entrywise.

The causal quadratic form pairs a coefficient field with the diagonal causal
propagator: ``<nu, T nu*> = sum_m (2l+1) Tr[nu(m) T(m) nu(m)^dagger]`` with
``T(m)_jj = sqrt(4 pi) * delta(m)_jj``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .errors import AdmissibilityViolation, MissingPropagator, ValidationError

__all__ = [
    "Mode",
    "CoefficientField",
    "PropagatorSpec",
    "AdmissibleSupport",
    "eigenvalue",
    "sobolev_norm",
    "dual_pairing",
    "causal_quadratic_form",
    "propagator_window_ok",
    "upper_bound_check",
    "lower_bound_check",
    "ensure_admissible",
    "BoundCheck",
]

ROOT_4PI = math.sqrt(4.0 * math.pi)


@dataclass(frozen=True, order=True)
class Mode:
    """Fourier mode label (n, l) with l stored as two_l = 2l."""

    n: int
    two_l: int

    def __post_init__(self) -> None:
        if self.two_l < 0:
            raise ValidationError(f"two_l must be >= 0, got {self.two_l}")

    @property
    def dim(self) -> int:
        return self.two_l + 1

    @property
    def l(self) -> float:
        return self.two_l / 2.0

    @property
    def weight(self) -> int:
        """Multiplicity factor 2l + 1."""
        return self.two_l + 1

    def reflected(self) -> "Mode":
        """Parity partner (-n, l)."""
        return Mode(-self.n, self.two_l)

    def canonical(self) -> "Mode":
        """Representative of the pair {m, reflected(m)} with n >= 0."""
        return Mode(abs(self.n), self.two_l)

    def two_i_values(self) -> range:
        return range(-self.two_l, self.two_l + 1, 2)

    def index_of(self, two_i: int) -> int:
        """Row/column position of the half-integer index i = two_i / 2."""
        if (two_i + self.two_l) % 2 != 0 or abs(two_i) > self.two_l:
            raise ValidationError(
                f"index two_i={two_i} invalid for two_l={self.two_l}"
            )
        return (two_i + self.two_l) // 2


def eigenvalue(m: Mode) -> float:
    """omega(m) = n^2 + 1 + l(l+1); always >= 1."""
    return m.n**2 + 1.0 + m.two_l * (m.two_l + 2) / 4.0


def _as_block(m: Mode, values: np.ndarray) -> np.ndarray:
    block = np.asarray(values, dtype=complex)
    if block.shape != (m.dim, m.dim):
        raise ValidationError(
            f"mode {m} expects a {m.dim}x{m.dim} block, got shape {block.shape}"
        )
    return block


@dataclass
class CoefficientField:
    """Matrix-valued Fourier coefficients, one block per mode.

    ``real=True`` asserts the reality constraint
    ``conj(f(n,l)_ij) = f(-n,l)_{-i,-j}``; it is validated on construction.
    """

    entries: dict[Mode, np.ndarray] = field(default_factory=dict)
    real: bool = False

    def __post_init__(self) -> None:
        self.entries = {m: _as_block(m, v) for m, v in self.entries.items()}
        if self.real:
            self.validate_reality()

    @classmethod
    def from_rows(
        cls, rows: Iterable[tuple[int, int, int, int, float, float]], real: bool = False
    ) -> "CoefficientField":
        """Build from rows (n, two_l, two_i, two_j, re, im)."""
        entries: dict[Mode, np.ndarray] = {}
        for n, two_l, two_i, two_j, re, im in rows:
            m = Mode(int(n), int(two_l))
            block = entries.setdefault(m, np.zeros((m.dim, m.dim), dtype=complex))
            block[m.index_of(int(two_i)), m.index_of(int(two_j))] += complex(re, im)
        return cls(entries=entries, real=real)

    def support(self) -> set[Mode]:
        return {m for m, v in self.entries.items() if np.any(v != 0)}

    def block(self, m: Mode) -> np.ndarray:
        """Coefficient block of ``m``; zeros if absent."""
        if m in self.entries:
            return self.entries[m]
        return np.zeros((m.dim, m.dim), dtype=complex)

    def entry(self, m: Mode, two_i: int, two_j: int) -> complex:
        return complex(self.block(m)[m.index_of(two_i), m.index_of(two_j)])

    def reality_defect(self) -> float:
        """Max deviation from conj(f(n,l)_ij) == f(-n,l)_{-i,-j}."""
        worst = 0.0
        for m in set(self.entries) | {m.reflected() for m in self.entries}:
            a = self.block(m)
            b = self.block(m.reflected())
            # reflected indices reverse both axes
            worst = max(worst, float(np.max(np.abs(np.conj(a) - b[::-1, ::-1]))))
        return worst

    def validate_reality(self, tol: float = 1e-12) -> None:
        defect = self.reality_defect()
        if defect > tol:
            raise ValidationError(
                f"field flagged real violates the reality constraint by {defect:.3e}"
            )

    def scaled(self, factor: complex) -> "CoefficientField":
        return CoefficientField(
            entries={m: factor * v for m, v in self.entries.items()},
            real=self.real and float(np.imag(factor)) == 0.0,
        )


@dataclass
class PropagatorSpec:
    """Diagonal causal propagator values delta(m)_jj, one real vector per mode.

    The domain must be closed under n -> -n and satisfy the parity symmetry
    ``delta(n,l)_jj = delta(-n,l)_{-j,-j}``.
    """

    diag: dict[Mode, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean: dict[Mode, np.ndarray] = {}
        for m, v in self.diag.items():
            vec = np.asarray(v, dtype=float)
            if vec.shape != (m.dim,):
                raise ValidationError(
                    f"propagator for {m} must have {m.dim} diagonal values"
                )
            clean[m] = vec
        self.diag = clean
        for m, vec in self.diag.items():
            partner = m.reflected()
            if partner not in self.diag:
                raise ValidationError(
                    f"propagator domain not reflection-closed: {partner} missing"
                )
            if not np.allclose(vec, self.diag[partner][::-1], rtol=0, atol=1e-12):
                raise ValidationError(
                    f"propagator parity delta(n)_jj == delta(-n)_{{-j,-j}} fails at {m}"
                )

    def domain(self) -> set[Mode]:
        return set(self.diag)

    def values(self, m: Mode) -> np.ndarray:
        try:
            return self.diag[m]
        except KeyError:
            raise MissingPropagator(f"no propagator entry for mode {m}") from None

    def value(self, m: Mode, two_j: int) -> float:
        return float(self.values(m)[m.index_of(two_j)])

    def tc_diagonal(self, m: Mode) -> np.ndarray:
        """Diagonal of sqrt(4 pi) * delta(m)."""
        return ROOT_4PI * self.values(m)


def sobolev_norm(f: CoefficientField, k: float) -> float:
    """Weighted coefficient norm |f|_k (see module docstring)."""
    total = 0.0
    for m, block in f.entries.items():
        w = m.weight * eigenvalue(m) ** (2.0 * k)
        total += w * float(np.sum(np.abs(block) ** 2))
    return math.sqrt(total)


def dual_pairing(nu: CoefficientField, phi: CoefficientField) -> complex:
    """Bilinear pairing sum_m (2l+1) Tr[phi(m) nu(m)]; no conjugation."""
    total = 0.0 + 0.0j
    for m in nu.support() & phi.support():
        total += m.weight * complex(np.trace(phi.entries[m] @ nu.entries[m]))
    return total


def causal_quadratic_form(nu: CoefficientField, dc: PropagatorSpec) -> complex:
    """sum_m (2l+1) Tr[nu(m) T(m) nu(m)^dagger] with T(m) = sqrt(4 pi) diag(delta(m)).

    Real-valued whenever the propagator is real (the form pairs |nu(m)_ij|^2
    with delta(m)_jj); returned as complex for uniformity downstream.
    """
    total = 0.0 + 0.0j
    for m in sorted(nu.support()):
        block = nu.entries[m]
        tc = dc.tc_diagonal(m)
        total += m.weight * complex(np.sum((np.abs(block) ** 2) @ tc))
    return total


def propagator_window_ok(dc: PropagatorSpec, m: Mode, side: str = "both") -> bool:
    """Check the two-sided window omega^-4 <= delta(m)_jj <= omega^2 per entry.

    ``side`` selects "lower", "upper" or "both"; every diagonal entry must
    satisfy the selected inequalities.
    """
    vals = dc.values(m)
    w = eigenvalue(m)
    ok = True
    if side in ("lower", "both"):
        ok = ok and bool(np.all(vals >= w**-4))
    if side in ("upper", "both"):
        ok = ok and bool(np.all(vals <= w**2))
    if side not in ("lower", "upper", "both"):
        raise ValueError(f"side must be lower/upper/both, got {side!r}")
    return ok


def ensure_admissible(
    nu: CoefficientField, dc: PropagatorSpec, side: str = "both"
) -> None:
    """Raise AdmissibilityViolation unless every support mode passes the window."""
    for m in sorted(nu.support()):
        if not propagator_window_ok(dc, m, side=side):
            raise AdmissibilityViolation(
                f"mode {m} violates the propagator window ({side} side)"
            )


class BoundCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def upper_bound_check(
    nu: CoefficientField, dc: PropagatorSpec, tol: float = 1e-12
) -> BoundCheck:
    """|<nu, T nu*>| <= sqrt(4 pi) |nu|_1^2, valid under the full window."""
    ensure_admissible(nu, dc, side="both")
    lhs = abs(causal_quadratic_form(nu, dc))
    rhs = ROOT_4PI * sobolev_norm(nu, 1.0) ** 2
    return BoundCheck(lhs, rhs, lhs <= rhs + tol * max(1.0, rhs))


def lower_bound_check(
    nu: CoefficientField, dc: PropagatorSpec, tol: float = 1e-12
) -> BoundCheck:
    """sqrt(4 pi) |nu|_{-2}^2 <= |<nu, T nu*>|, needs only the lower window side."""
    ensure_admissible(nu, dc, side="lower")
    lhs = ROOT_4PI * sobolev_norm(nu, -2.0) ** 2
    rhs = abs(causal_quadratic_form(nu, dc))
    return BoundCheck(lhs, rhs, lhs <= rhs + tol * max(1.0, rhs))


@dataclass(frozen=True)
class AdmissibleSupport:
    """Finite mode set carrying the cut radius and asymptotic threshold.

    ``cut_radius`` (R) bounds the eigenvalue of retained orbit modes;
    ``asymptotic_threshold`` (R') marks where the propagator window becomes
    mandatory for members.
    """

    modes: frozenset[Mode]
    cut_radius: float
    asymptotic_threshold: float

    @classmethod
    def from_cut(
        cls, pool: Iterable[Mode], cut_radius: float, asymptotic_threshold: float
    ) -> "AdmissibleSupport":
        kept = frozenset(m for m in pool if eigenvalue(m) < cut_radius)
        return cls(kept, cut_radius, asymptotic_threshold)

    def validate(self, dc: PropagatorSpec, orbit_modes: Iterable[Mode] = ()) -> None:
        """Check the defining rule and the window above the threshold."""
        orbit = set(orbit_modes)
        for m in sorted(orbit):
            if eigenvalue(m) < self.cut_radius and m not in self.modes:
                raise AdmissibilityViolation(
                    f"orbit mode {m} below the cut radius is missing from the support"
                )
            if eigenvalue(m) > self.cut_radius and m in self.modes:
                raise AdmissibilityViolation(
                    f"orbit mode {m} above the cut radius must not be in the support"
                )
        for m in sorted(self.modes):
            if eigenvalue(m) > self.asymptotic_threshold:
                if not propagator_window_ok(dc, m, side="both"):
                    raise AdmissibilityViolation(
                        f"support mode {m} above the threshold fails the window"
                    )

    def __contains__(self, m: Mode) -> bool:
        return m in self.modes
