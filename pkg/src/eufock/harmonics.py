"""Harmonic analysis on G = (R mod 4 pi) x SU(2).

Group points are stored as (t, alpha, beta, gamma) with t in [0, 4 pi) on the
circle factor and z-y-z Euler angles alpha in [0, 2 pi), beta in [0, pi],
gamma in [0, 4 pi) covering SU(2) once (gamma runs over the double cover).

Matrix conventions
------------------
* Irreducible SU(2) blocks use ascending index order: row r of a weight-l
  block corresponds to i = (2r - two_l)/2.
* ``wigner_matrix`` returns D^l(alpha, beta, gamma)_{i j} =
  exp(-i*i*alpha) d^l_{i j}(beta) exp(-i*j*gamma) with the standard real
  little-d matrix.
* The joint character of mode m = (n, l) is n_hat(t) * D^l(w) with
  n_hat(t) = exp(i n t / 2).

Transform conventions
---------------------
The invariant measure is normalized to total mass 4 pi (circle mass 4 pi,
SU(2) mass 1).  The forward transform stores, in row j and column i,

    f_tilde(m)_{j i} = (4 pi)^(-1/2) Integral f(g) conj(n_hat(t))
                                              conj(D^l(w)_{i j}) dg,

i.e. the kernel index pair is transposed relative to the storage slot.  The
matching resynthesis is

    f(g) = (4 pi)^(-1/2) sum_m (2l+1) n_hat(t) Tr[f_tilde(m) D^l(w)].

With these choices a constant c transforms to c * sqrt(4 pi) at mode (0, 0)
and each character entry has L2 self-inner-product 4 pi / (2l + 1).

Quadrature uses uniform (periodic) grids in t, alpha, gamma and
Gauss-Legendre nodes in cos(beta); for band-limited integrands the rule is
exact up to roundoff once the grid resolves the band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BandLimitExceeded, ValidationError
from .modes import CoefficientField, Mode, dual_pairing

__all__ = [
    "GroupPoint",
    "GroupGrid",
    "SampledFunction",
    "wigner_d",
    "wigner_matrix",
    "character",
    "su2_from_euler",
    "euler_from_su2",
    "compose",
    "forward_fourier",
    "synthesize",
    "plancherel_check",
    "save_samples",
    "load_samples",
]

TWO_PI = 2.0 * math.pi
FOUR_PI = 4.0 * math.pi
ROOT_4PI = math.sqrt(FOUR_PI)


@dataclass(frozen=True)
class GroupPoint:
    t: float
    alpha: float
    beta: float
    gamma: float


def _little_d_entry(two_l: int, two_mp: int, two_m: int, beta: float) -> float:
    """Wigner little-d matrix element d^l_{m' m}(beta), factorial sum form."""
    jpmp = (two_l + two_mp) // 2
    jmmp = (two_l - two_mp) // 2
    jpm = (two_l + two_m) // 2
    jmm = (two_l - two_m) // 2
    pref = math.sqrt(
        math.factorial(jpmp)
        * math.factorial(jmmp)
        * math.factorial(jpm)
        * math.factorial(jmm)
    )
    c = math.cos(beta / 2.0)
    s = math.sin(beta / 2.0)
    mp_minus_m = (two_mp - two_m) // 2
    s_min = max(0, -mp_minus_m)
    s_max = min(jpm, jmmp)
    acc = 0.0
    for k in range(s_min, s_max + 1):
        num = (-1.0) ** (mp_minus_m + k)
        den = (
            math.factorial(jpm - k)
            * math.factorial(k)
            * math.factorial(mp_minus_m + k)
            * math.factorial(jmmp - k)
        )
        acc += num / den * c ** (two_l + (two_m - two_mp) // 2 - 2 * k) * s ** (
            mp_minus_m + 2 * k
        )
    return pref * acc


def wigner_d(two_l: int, beta: float) -> np.ndarray:
    """Real little-d matrix d^l(beta) in ascending index order."""
    dim = two_l + 1
    out = np.empty((dim, dim))
    for r, two_mp in enumerate(range(-two_l, two_l + 1, 2)):
        for c, two_m in enumerate(range(-two_l, two_l + 1, 2)):
            out[r, c] = _little_d_entry(two_l, two_mp, two_m, beta)
    return out


def wigner_matrix(two_l: int, alpha: float, beta: float, gamma: float) -> np.ndarray:
    """Full Wigner matrix D^l(alpha, beta, gamma), unitary of size two_l + 1."""
    half = np.arange(-two_l, two_l + 1, 2) / 2.0
    d = wigner_d(two_l, beta)
    return np.exp(-1j * half[:, None] * alpha) * d * np.exp(-1j * half[None, :] * gamma)


def character(m: Mode, g: GroupPoint) -> np.ndarray:
    """Matrix-valued character of mode m at g: exp(i n t / 2) * D^l(w)."""
    return np.exp(0.5j * m.n * g.t) * wigner_matrix(m.two_l, g.alpha, g.beta, g.gamma)


def su2_from_euler(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """SU(2) matrix exp(-i alpha sz/2) exp(-i beta sy/2) exp(-i gamma sz/2)."""
    c = math.cos(beta / 2.0)
    s = math.sin(beta / 2.0)
    return np.array(
        [
            [np.exp(-0.5j * (alpha + gamma)) * c, -np.exp(-0.5j * (alpha - gamma)) * s],
            [np.exp(0.5j * (alpha - gamma)) * s, np.exp(0.5j * (alpha + gamma)) * c],
        ]
    )


def euler_from_su2(mat: np.ndarray) -> tuple[float, float, float]:
    """Euler angles (alpha in [0,2pi), beta in [0,pi], gamma in [0,4pi)) of an SU(2) matrix.

    gamma covers the double cover, so the returned triple reproduces the
    matrix exactly (not just up to sign).
    """
    c = min(1.0, abs(mat[0, 0]))
    s = min(1.0, abs(mat[1, 0]))
    beta = 2.0 * math.atan2(s, c)
    if s < 1e-12:
        half_sum = -np.angle(mat[0, 0])
        half_diff = 0.0
    elif c < 1e-12:
        half_sum = 0.0
        half_diff = np.angle(mat[1, 0])
    else:
        half_sum = -np.angle(mat[0, 0])
        half_diff = np.angle(mat[1, 0])
    alpha = (half_sum + half_diff) % TWO_PI
    gamma = (half_sum - half_diff) % TWO_PI
    if not np.allclose(su2_from_euler(alpha, beta, gamma), mat, atol=1e-9):
        gamma += TWO_PI
    return alpha, beta, gamma % FOUR_PI


def compose(g1: GroupPoint, g2: GroupPoint) -> GroupPoint:
    """Group product: t adds mod 4 pi, the SU(2) parts multiply."""
    m = su2_from_euler(g1.alpha, g1.beta, g1.gamma) @ su2_from_euler(
        g2.alpha, g2.beta, g2.gamma
    )
    alpha, beta, gamma = euler_from_su2(m)
    return GroupPoint((g1.t + g2.t) % FOUR_PI, alpha, beta, gamma)


@dataclass
class GroupGrid:
    """Product quadrature grid resolving characters up to (n_max, two_l_max)."""

    t_nodes: np.ndarray
    alpha_nodes: np.ndarray
    beta_nodes: np.ndarray
    beta_weights: np.ndarray
    gamma_nodes: np.ndarray
    n_max: int
    two_l_max: int

    @classmethod
    def from_band(cls, n_max: int, two_l_max: int) -> "GroupGrid":
        n_t = 2 * n_max + 4
        n_alpha = 2 * two_l_max + 4
        n_gamma = 4 * two_l_max + 8
        n_beta = two_l_max + 2
        x, w = np.polynomial.legendre.leggauss(n_beta)
        return cls(
            t_nodes=np.arange(n_t) * FOUR_PI / n_t,
            alpha_nodes=np.arange(n_alpha) * TWO_PI / n_alpha,
            beta_nodes=np.arccos(x),
            beta_weights=w,
            gamma_nodes=np.arange(n_gamma) * FOUR_PI / n_gamma,
            n_max=n_max,
            two_l_max=two_l_max,
        )

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (
            len(self.t_nodes),
            len(self.alpha_nodes),
            len(self.beta_nodes),
            len(self.gamma_nodes),
        )

    def weights(self) -> np.ndarray:
        """Haar weights on the product grid; they sum to 4 pi."""
        n_t, n_a, _, n_g = self.shape
        w_t = np.full(n_t, FOUR_PI / n_t)
        w_su2 = (
            (TWO_PI / n_a)
            * (FOUR_PI / n_g)
            * self.beta_weights
            / (16.0 * math.pi**2)
        )
        return (
            w_t[:, None, None, None]
            * np.ones((1, n_a, 1, 1))
            * w_su2[None, None, :, None]
            * np.ones((1, 1, 1, n_g))
        )

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return np.meshgrid(
            self.t_nodes, self.alpha_nodes, self.beta_nodes, self.gamma_nodes,
            indexing="ij",
        )

    def resolves(self, m: Mode) -> bool:
        return abs(m.n) <= self.n_max and m.two_l <= self.two_l_max

    def band_modes(self) -> list[Mode]:
        return [
            Mode(n, two_l)
            for two_l in range(self.two_l_max + 1)
            for n in range(-self.n_max, self.n_max + 1)
        ]


@dataclass
class SampledFunction:
    """Complex samples on a GroupGrid, indexed (t, alpha, beta, gamma)."""

    grid: GroupGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.grid.shape:
            raise ValidationError(
                f"samples have shape {self.values.shape}, grid needs {self.grid.shape}"
            )

    @classmethod
    def from_function(
        cls, grid: GroupGrid, fn: Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    ) -> "SampledFunction":
        t, a, b, c = grid.meshgrid()
        return cls(grid=grid, values=np.asarray(fn(t, a, b, c), dtype=complex))

    def integral(self) -> complex:
        return complex(np.sum(self.grid.weights() * self.values))


def _character_tables(grid: GroupGrid, m: Mode):
    """Phase and little-d tables needed to evaluate mode-m characters on the grid."""
    half = np.arange(-m.two_l, m.two_l + 1, 2) / 2.0
    phase_t = np.exp(0.5j * m.n * grid.t_nodes)
    phase_a = np.exp(-1j * np.outer(half, grid.alpha_nodes))  # (dim, n_a)
    phase_g = np.exp(-1j * np.outer(half, grid.gamma_nodes))  # (dim, n_g)
    dmats = np.stack([wigner_d(m.two_l, b) for b in grid.beta_nodes])  # (n_b, dim, dim)
    return phase_t, phase_a, phase_g, dmats


def forward_fourier(f: SampledFunction, m: Mode) -> np.ndarray:
    """Forward coefficient block of mode m (see module docstring for the layout)."""
    grid = f.grid
    if not grid.resolves(m):
        raise BandLimitExceeded(f"mode {m} outside grid band (n_max={grid.n_max}, two_l_max={grid.two_l_max})")
    phase_t, phase_a, phase_g, dmats = _character_tables(grid, m)
    n_t = len(grid.t_nodes)
    w_su2 = (
        (TWO_PI / len(grid.alpha_nodes))
        * (FOUR_PI / len(grid.gamma_nodes))
        * grid.beta_weights
        / (16.0 * math.pi**2)
    )
    # integrate the circle factor first
    g_abc = np.einsum("tabc,t->abc", f.values, np.conj(phase_t) * (FOUR_PI / n_t))
    # conj(D)_{i j} carries conj(phase_a)_i, d_{i j}, conj(phase_g)_j
    tmp = np.einsum("abc,ia->ibc", g_abc, np.conj(phase_a))
    tmp = np.einsum("ibc,b,bij->ijc", tmp, w_su2, dmats)
    block_ij = np.einsum("ijc,jc->ij", tmp, np.conj(phase_g))
    # storage slot (j, i) holds the integral against conj(D_{i j})
    return block_ij.T / ROOT_4PI


def transform_band(f: SampledFunction) -> CoefficientField:
    """Forward transform on every mode the grid resolves."""
    return CoefficientField(
        entries={m: forward_fourier(f, m) for m in f.grid.band_modes()}
    )


def synthesize(coeffs: CoefficientField, grid: GroupGrid) -> SampledFunction:
    """Character-series resynthesis of a band-limited coefficient field."""
    total = np.zeros(grid.shape, dtype=complex)
    for m, block in coeffs.entries.items():
        if not grid.resolves(m):
            raise BandLimitExceeded(f"mode {m} outside grid band")
        phase_t, phase_a, phase_g, dmats = _character_tables(grid, m)
        # Tr[f_tilde D] = sum_{j i} f_tilde[j, i] D[i, j]
        tr = np.einsum("ji,ia,bij,jc->abc", block, phase_a, dmats, phase_g)
        total += m.weight * phase_t[:, None, None, None] * tr[None, :, :, :]
    return SampledFunction(grid=grid, values=total / ROOT_4PI)


def plancherel_check(
    f: SampledFunction, g: SampledFunction
) -> tuple[complex, complex, float]:
    """Position-space L2 pairing against the coefficient-space pairing.

    lhs integrates f * conj(g) with the grid weights; rhs feeds the forward
    transforms through dual_pairing after taking the per-mode adjoint of the
    second factor, which turns the bilinear trace pairing into the Hermitian
    coefficient sum sum_m (2l+1) sum_{jk} f(m)_{jk} conj(g(m)_{jk}).
    """
    if f.grid is not g.grid and f.grid.shape != g.grid.shape:
        raise ValidationError("plancherel_check needs a shared grid")
    lhs = complex(np.sum(f.grid.weights() * f.values * np.conj(g.values)))
    ft = transform_band(f)
    gt = transform_band(g)
    gt_adj = CoefficientField(
        entries={m: np.conj(block).T for m, block in gt.entries.items()}
    )
    rhs = dual_pairing(ft, gt_adj)
    return lhs, rhs, abs(lhs - rhs)


def save_samples(f: SampledFunction, path: str) -> None:
    """Write samples as columns (t, alpha, beta, gamma, re, im), node-major order."""
    t, a, b, c = f.grid.meshgrid()
    cols = np.column_stack(
        [
            t.ravel(),
            a.ravel(),
            b.ravel(),
            c.ravel(),
            f.values.ravel().real,
            f.values.ravel().imag,
        ]
    )
    np.savetxt(path, cols, fmt="%.17g", header="t alpha beta gamma re im")


def load_samples(path: str, grid: GroupGrid) -> SampledFunction:
    """Read a columnar sample file back onto ``grid``, validating coordinates."""
    try:
        cols = np.loadtxt(path)
    except (OSError, ValueError) as exc:
        raise ValidationError(f"cannot read sample file {path}: {exc}") from None
    cols = np.atleast_2d(cols)
    if cols.shape[1] != 6:
        raise ValidationError(f"sample file {path} needs 6 columns, found {cols.shape[1]}")
    expected = np.prod(grid.shape)
    if cols.shape[0] != expected:
        raise ValidationError(
            f"sample file {path} has {cols.shape[0]} rows, grid needs {expected}"
        )
    t, a, b, c = grid.meshgrid()
    ref = np.column_stack([t.ravel(), a.ravel(), b.ravel(), c.ravel()])
    if not np.allclose(cols[:, :4], ref, atol=1e-9):
        raise ValidationError(f"sample file {path} coordinates do not match the grid")
    values = (cols[:, 4] + 1j * cols[:, 5]).reshape(grid.shape)
    return SampledFunction(grid=grid, values=values)
