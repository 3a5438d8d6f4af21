"""Truncated symmetric Fock space over a finite single-particle label set.

Single-particle labels pair a canonical mode (the n >= 0 member of a
reflection orbit) with a system index s.  The occupation basis is graded
lexicographic: all multi-indices with total degree <= cutoff, grade by
grade, so the vacuum always sits at index 0 and the space has dimension
binomial(L + cutoff, cutoff) for L labels.

Ladder matrices act by

    a(label) |k> = sqrt(k_label) |k - e_label>,

and creation is the transpose, which silently truncates at the top grade.
The canonical commutation relations therefore hold exactly on every state
of grade <= cutoff - 1 and fail (by design) on the top shell; tests and
error bounds account for that.

Field coefficient operators follow the convention

    phi(m)_{i j} = (sqrt(4 pi) / (2l+1)) * sum_s [ u_s(m)_{i j} a_s
                   + conj(u_s(refl m)_{-i,-j}) a_s^+ ],

with the ladder labels attached to the canonical representative of m's
orbit.  The creation term uses the reflected mode and reflected indices
(no transpose), which makes phi(refl m)_{-i,-j} the operator adjoint of
phi(m)_{i j} for every choice of system u, not only the default one.

Pairings of coherent data are bilinear throughout: no complex conjugation
in vector pairings or in the kernel-vector dot product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import SizeLimit, UnknownLabel, ValidationError
from .modes import ROOT_4PI, Mode, eigenvalue

__all__ = [
    "ParticleLabel",
    "OrbitSpec",
    "FockContext",
    "FockOperator",
    "KernelVector",
    "field_coefficient",
    "kernel_operator",
    "wick_power",
    "coherent_vector",
    "bilinear_pairing",
    "vacuum_expectation",
]

MAX_DIMENSION = 200_000


@dataclass(frozen=True, order=True)
class ParticleLabel:
    """One ladder-operator slot: canonical mode plus system index."""

    mode: Mode
    s: int

    def __post_init__(self) -> None:
        if self.mode.n < 0:
            raise ValidationError(f"labels live on canonical modes, got {self.mode}")
        if self.s < 0:
            raise ValidationError("system index must be nonnegative")


def _elementary_system(dim: int) -> np.ndarray:
    out = np.zeros((dim * dim, dim, dim), dtype=complex)
    for s in range(dim * dim):
        out[s, s // dim, s % dim] = 1.0 / math.sqrt(dim)
    return out


@dataclass
class OrbitSpec:
    """System matrices u_s(m) for every signed mode of the participating orbits.

    ``systems[m]`` has shape (n_s, dim, dim); a mode and its reflection must
    both be present with matching system count.  The default system is the
    rescaled elementary-matrix basis E_s / sqrt(2l+1), identical on both
    members of the orbit, which satisfies the completeness condition

        sum_s u_s(m)_{i j} conj(u_s(m)_{k q}) = delta_{i k} delta_{j q} / (2l+1).
    """

    systems: dict[Mode, np.ndarray]

    def __post_init__(self) -> None:
        for m, arr in self.systems.items():
            arr = np.asarray(arr, dtype=complex)
            self.systems[m] = arr
            if arr.ndim != 3 or arr.shape[1:] != (m.dim, m.dim):
                raise ValidationError(
                    f"system for {m} needs shape (n_s, {m.dim}, {m.dim}), got {arr.shape}"
                )
            partner = m.reflected()
            if partner not in self.systems:
                raise ValidationError(f"orbit of {m} missing its reflection {partner}")
            if self.systems[partner].shape[0] != arr.shape[0]:
                raise ValidationError(f"system counts differ across the orbit of {m}")

    @classmethod
    def default(cls, canonical_modes: list[Mode]) -> "OrbitSpec":
        systems: dict[Mode, np.ndarray] = {}
        for m in canonical_modes:
            can = m.canonical()
            arr = _elementary_system(can.dim)
            systems[can] = arr
            systems[can.reflected()] = arr
        return cls(systems=systems)

    def canonical_modes(self) -> list[Mode]:
        return sorted({m.canonical() for m in self.systems})

    def n_systems(self, m: Mode) -> int:
        return self.systems[m.canonical()].shape[0]

    def system(self, m: Mode) -> np.ndarray:
        if m not in self.systems:
            raise UnknownLabel(f"no system stored for mode {m}")
        return self.systems[m]

    def labels(self) -> list[ParticleLabel]:
        out = []
        for m in self.canonical_modes():
            out.extend(ParticleLabel(m, s) for s in range(self.n_systems(m)))
        return sorted(out)

    def completeness_defect(self, m: Mode) -> float:
        """Deviation of sum_s u_s (x) conj(u_s) from the normalized identity."""
        u = self.system(m)
        dim = m.dim
        gram = np.einsum("sij,skq->ijkq", u, np.conj(u))
        target = np.einsum(
            "ik,jq->ijkq", np.eye(dim), np.eye(dim)
        ) / dim
        return float(np.max(np.abs(gram - target)))


def _multiindices(n_labels: int, total: int) -> Iterator[tuple[int, ...]]:
    if n_labels == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _multiindices(n_labels - 1, total - head):
            yield (head,) + rest


@dataclass
class FockContext:
    """Occupation basis and cached ladder matrices for a fixed label set."""

    labels: tuple[ParticleLabel, ...]
    cutoff: int
    basis: list[tuple[int, ...]] = field(init=False, repr=False)
    index: dict[tuple[int, ...], int] = field(init=False, repr=False)
    grades: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if len(set(self.labels)) != len(self.labels):
            raise ValidationError("duplicate single-particle labels")
        if self.cutoff < 0:
            raise ValidationError("cutoff must be nonnegative")
        n = len(self.labels)
        dim = math.comb(n + self.cutoff, self.cutoff)
        if dim > MAX_DIMENSION:
            raise SizeLimit(
                f"Fock basis would have {dim} states (limit {MAX_DIMENSION}); "
                "reduce the cutoff or the label set"
            )
        self.basis = [
            k for g in range(self.cutoff + 1) for k in _multiindices(n, g)
        ]
        self.index = {k: pos for pos, k in enumerate(self.basis)}
        self.grades = np.array([sum(k) for k in self.basis])
        self._ladder_cache: dict[ParticleLabel, np.ndarray] = {}

    @classmethod
    def build(cls, labels, cutoff: int) -> "FockContext":
        return cls(labels=tuple(sorted(labels)), cutoff=cutoff)

    @classmethod
    def from_orbits(cls, spec: OrbitSpec, cutoff: int) -> "FockContext":
        return cls.build(spec.labels(), cutoff)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def label_position(self, label: ParticleLabel) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabel(f"{label} is not in this context") from None

    def compatible(self, other: "FockContext") -> bool:
        return self.labels == other.labels and self.cutoff == other.cutoff

    def annihilator(self, label: ParticleLabel) -> np.ndarray:
        if label not in self._ladder_cache:
            pos = self.label_position(label)
            mat = np.zeros((self.dim, self.dim))
            for row, k in enumerate(self.basis):
                if k[pos] > 0:
                    lower = k[:pos] + (k[pos] - 1,) + k[pos + 1 :]
                    mat[self.index[lower], row] = math.sqrt(k[pos])
            self._ladder_cache[label] = mat
        return self._ladder_cache[label]

    def creator(self, label: ParticleLabel) -> np.ndarray:
        return self.annihilator(label).T

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim)
        v[0] = 1.0
        return v

    def identity_op(self) -> "FockOperator":
        return FockOperator(self, np.eye(self.dim, dtype=complex))

    def zero_op(self) -> "FockOperator":
        return FockOperator(self, np.zeros((self.dim, self.dim), dtype=complex))

    def annihilation_op(self, label: ParticleLabel) -> "FockOperator":
        return FockOperator(self, self.annihilator(label).astype(complex))

    def creation_op(self, label: ParticleLabel) -> "FockOperator":
        return FockOperator(self, self.creator(label).astype(complex))


@dataclass
class FockOperator:
    ctx: FockContext
    mat: np.ndarray

    def __post_init__(self) -> None:
        self.mat = np.asarray(self.mat, dtype=complex)
        if self.mat.shape != (self.ctx.dim, self.ctx.dim):
            raise ValidationError("operator matrix does not match the context")

    def _check(self, other: "FockOperator") -> None:
        if self.ctx is not other.ctx and not self.ctx.compatible(other.ctx):
            raise ValidationError("operators live on different contexts")

    def __add__(self, other: "FockOperator") -> "FockOperator":
        self._check(other)
        return FockOperator(self.ctx, self.mat + other.mat)

    def __sub__(self, other: "FockOperator") -> "FockOperator":
        self._check(other)
        return FockOperator(self.ctx, self.mat - other.mat)

    def __mul__(self, scalar) -> "FockOperator":
        return FockOperator(self.ctx, self.mat * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other: "FockOperator") -> "FockOperator":
        self._check(other)
        return FockOperator(self.ctx, self.mat @ other.mat)

    def adjoint(self) -> "FockOperator":
        return FockOperator(self.ctx, np.conj(self.mat).T)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.mat @ vec

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.mat - np.conj(self.mat).T)))

    def spectral_norm(self) -> float:
        return float(np.linalg.norm(self.mat, 2))


@dataclass
class KernelVector:
    """Sparse vector over particle labels with bilinear pairing and weighted norms."""

    entries: dict[ParticleLabel, complex]

    def __post_init__(self) -> None:
        self.entries = {
            lbl: complex(v) for lbl, v in self.entries.items() if v != 0.0
        }

    @classmethod
    def zero(cls) -> "KernelVector":
        return cls(entries={})

    def __getitem__(self, label: ParticleLabel) -> complex:
        return self.entries.get(label, 0.0 + 0.0j)

    def labels(self) -> list[ParticleLabel]:
        return sorted(self.entries)

    def pairing(self, other: "KernelVector") -> complex:
        """Bilinear dot product sum_l self[l] * other[l] (no conjugation)."""
        small, big = (
            (self.entries, other.entries)
            if len(self.entries) <= len(other.entries)
            else (other.entries, self.entries)
        )
        return complex(sum(v * big.get(lbl, 0.0) for lbl, v in small.items()))

    def norm(self, k: float = 0.0) -> float:
        """Weighted norm sqrt(sum_l omega(mode_l)^(2k) |self[l]|^2)."""
        return math.sqrt(
            sum(
                eigenvalue(lbl.mode) ** (2 * k) * abs(v) ** 2
                for lbl, v in self.entries.items()
            )
        )

    def conjugated(self) -> "KernelVector":
        return KernelVector({lbl: np.conj(v) for lbl, v in self.entries.items()})

    def scaled(self, factor: complex) -> "KernelVector":
        return KernelVector({lbl: factor * v for lbl, v in self.entries.items()})

    def __add__(self, other: "KernelVector") -> "KernelVector":
        out = dict(self.entries)
        for lbl, v in other.entries.items():
            out[lbl] = out.get(lbl, 0.0) + v
        return KernelVector(out)


def field_coefficient(
    ctx: FockContext, spec: OrbitSpec, m: Mode, two_i: int, two_j: int
) -> FockOperator:
    """Operator-valued Fourier coefficient phi(m)_{i j} (see module docstring)."""
    can = m.canonical()
    if can not in spec.systems:
        return ctx.zero_op()
    row = m.index_of(two_i)
    col = m.index_of(two_j)
    u_here = spec.system(m)
    u_refl = spec.system(m.reflected())
    pref = ROOT_4PI / m.weight
    mat = np.zeros((ctx.dim, ctx.dim), dtype=complex)
    for s in range(spec.n_systems(m)):
        label = ParticleLabel(can, s)
        down = u_here[s, row, col]
        up = np.conj(u_refl[s, m.dim - 1 - row, m.dim - 1 - col])
        if down != 0.0:
            mat += down * ctx.annihilator(label)
        if up != 0.0:
            mat += up * ctx.creator(label)
    return FockOperator(ctx, pref * mat)


def kernel_operator(
    ctx: FockContext, kappa01: KernelVector, kappa10: KernelVector
) -> FockOperator:
    """Linear field operator sum_l kappa01[l] a_l + kappa10[l] a_l^+."""
    mat = np.zeros((ctx.dim, ctx.dim), dtype=complex)
    for lbl, v in kappa01.entries.items():
        mat += v * ctx.annihilator(lbl)
    for lbl, v in kappa10.entries.items():
        mat += v * ctx.creator(lbl)
    return FockOperator(ctx, mat)


def wick_power(
    ctx: FockContext, kappa01: KernelVector, kappa10: KernelVector, power: int
) -> FockOperator:
    """Normal-ordered power :X^n: = sum_r binom(n, r) C^r A^(n-r).

    C and A are the raising and lowering parts of X = kernel_operator(...).
    """
    if power < 0:
        raise ValidationError("power must be nonnegative")
    lower = kernel_operator(ctx, kappa01, KernelVector.zero()).mat
    raise_ = kernel_operator(ctx, KernelVector.zero(), kappa10).mat
    out = np.zeros((ctx.dim, ctx.dim), dtype=complex)
    c_pow = np.eye(ctx.dim, dtype=complex)
    a_pows = [np.eye(ctx.dim, dtype=complex)]
    for _ in range(power):
        a_pows.append(a_pows[-1] @ lower)
    for r in range(power + 1):
        out += math.comb(power, r) * c_pow @ a_pows[power - r]
        c_pow = raise_ @ c_pow
    return FockOperator(ctx, out)


def coherent_vector(ctx: FockContext, xi: KernelVector) -> np.ndarray:
    """Truncated exponential vector exp(sum_l xi[l] a_l^+) |0>.

    Component at occupation k is prod_l xi[l]^{k_l} / sqrt(k_l!); the vector
    is not normalized.
    """
    for lbl in xi.entries:
        if lbl not in ctx.labels:
            raise UnknownLabel(f"{lbl} is not in this context")
    amps = np.array([xi[lbl] for lbl in ctx.labels])
    vec = np.zeros(ctx.dim, dtype=complex)
    for pos, k in enumerate(ctx.basis):
        term = 1.0 + 0.0j
        for amp, occ in zip(amps, k):
            if occ:
                term *= amp**occ / math.sqrt(math.factorial(occ))
            if term == 0.0:
                break
        vec[pos] = term
    return vec


def bilinear_pairing(u: np.ndarray, v: np.ndarray) -> complex:
    """Plain (conjugation-free) dot product of two Fock vectors."""
    return complex(np.dot(u, v))


def vacuum_expectation(op: FockOperator) -> complex:
    """Bilinear vacuum matrix element <<vac, Op vac>>, the (0, 0) entry."""
    return complex(op.mat[0, 0])
