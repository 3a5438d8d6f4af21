"""Finite-dimensional oscillatory measures and their characteristic functions.

Every reflection orbit of matrix entries contributes one complex plane of
integration.  The canonical coordinate of the orbit of (m, j, i) is the
field entry phi(m)_{j i} = x + i y at the canonical representative
(m.n >= 0); for n = 0 the orbit pairs (j, i) with (-j, -i) inside the same
block, and the center entry of an integer-weight block is self-conjugate:
the reality constraint forces y = 0 there and the coordinate is a single
real line.

Per coordinate the measure carries the Gaussian-like density

    2D:  (i a / pi) exp(-i a (x^2 + y^2)),      a = (2l+1)/(sqrt(4 pi) D),
    1D:  sqrt(i a / (2 pi)) exp(-(i a / 2) x^2)  (self-conjugate case),

with D the causal propagator entry attached to the coordinate's row index.
D may be negative (the phase flips half-plane; `a` is tracked signed) but
not zero.  All integrals are regularized by exp(-(eps/2) r^2), evaluated
in closed form or by truncated-trapezoid quadrature, and extrapolated to
eps -> 0 with a ratio-2 Richardson table.

The closed form of the regularized 2D integral with couplings
exp(i lambda x + mu y) is

    I(eps) = (2 i a / alpha) exp((mu^2 - lambda^2)/(2 alpha)),
    alpha = eps + 2 i a,

which involves no square root, hence no branch tracking; its eps -> 0
limit is exp(i (lambda^2 - mu^2)/(4 a)).  The 1D analogue does carry a
square root, but its argument stays in the right half-plane for every
signed a, so the principal branch is safe.

Quadrature uses a plain trapezoid rule on a truncated symmetric interval.
(A Gauss-Hermite rule matched to the eps-Gaussian looks natural here but
diverges: the leftover oscillatory factor exp(-i a x^2) has quadratic
growth rate 2|a|/eps >> 1 in the scaled variable, outside the Hermite
convergence region.)  For integrands of this shape the trapezoid rule is
spectrally accurate once the step resolves the bandwidth |alpha| sqrt(2T/eps)
and the interval covers the Gaussian envelope; both are precomputed from
the requested tolerance and then node-doubled until two successive
refinements agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .errors import GridTooSmall, NonpositivePropagator, ValidationError
from .modes import (
    ROOT_4PI,
    CoefficientField,
    Mode,
    PropagatorSpec,
    causal_quadratic_form,
    ensure_admissible,
)

__all__ = [
    "FresnelParams",
    "ModeMeasure",
    "Coordinate",
    "FiniteProjection",
    "fresnel_2d_analytic",
    "fresnel_2d_limit",
    "fresnel_1d_analytic",
    "fresnel_2d_quadrature",
    "fresnel_1d_quadrature",
    "richardson",
    "mode_measure",
    "canonical_coordinates",
    "product_characteristic",
    "phase_coefficients",
    "projection_density",
    "projection_closed_product",
    "projection_characteristic_check",
    "mc_characteristic",
]


@dataclass(frozen=True)
class FresnelParams:
    """Parameters of one regularized two-dimensional Fresnel factor.

    `a` is signed (negative causal-propagator entries flip the phase's
    half-plane); zero is rejected because the density is undefined there.
    """

    a: float
    lam: complex
    mu: complex
    epsilon: float

    def __post_init__(self) -> None:
        if self.a == 0.0:
            raise ValidationError("Fresnel parameter a must be nonzero")
        if self.epsilon <= 0.0:
            raise ValidationError("regularization epsilon must be positive")


def fresnel_2d_analytic(p: FresnelParams) -> complex:
    """Closed form (2ia/alpha) exp((mu^2 - lambda^2)/(2 alpha)), alpha = eps + 2ia."""
    alpha = p.epsilon + 2j * p.a
    return complex(2j * p.a / alpha * np.exp((p.mu**2 - p.lam**2) / (2.0 * alpha)))


def fresnel_2d_limit(a: float, lam: complex, mu: complex) -> complex:
    """The eps -> 0 limit exp(i (lambda^2 - mu^2) / (4 a))."""
    if a == 0.0:
        raise ValidationError("Fresnel parameter a must be nonzero")
    return complex(np.exp(1j * (lam**2 - mu**2) / (4.0 * a)))


def fresnel_1d_analytic(a: float, u: complex, epsilon: float) -> complex:
    """Regularized self-conjugate factor sqrt(ia/(ia+eps)) exp(-u^2/(2(ia+eps)))."""
    if a == 0.0:
        raise ValidationError("Fresnel parameter a must be nonzero")
    if epsilon <= 0.0:
        raise ValidationError("regularization epsilon must be positive")
    beta = epsilon + 1j * a
    # 1j*a/beta has positive real part for either sign of a: principal sqrt safe
    return complex(np.sqrt(1j * a / beta) * np.exp(-(u**2) / (2.0 * beta)))


def _trapezoid_line(alpha: complex, c: complex, tol: float) -> tuple[complex, float]:
    """Truncated trapezoid value of Integral exp(-(alpha/2) x^2 + c x) dx.

    Step and interval are sized from the target tolerance: the integrand's
    Fourier transform decays like exp(-eps w^2 / (2 |alpha|^2)), so aliasing
    dies once the grid resolves |alpha| sqrt(2T/eps); the envelope
    exp(-(eps/2) x^2 + Re(c) x) fixes the truncation length.  Nodes double
    until two refinements agree to tol/4.  Returns (value, tail estimate).
    """
    eps = alpha.real
    if eps <= 0.0:
        raise ValidationError("trapezoid line needs a positive regularization")
    big_t = math.log(1.0 / tol) + 4.0
    shift = abs(c.real)
    # the envelope exp(-(eps/2)x^2 + shift*x) peaks at exp(shift^2/(2 eps));
    # past this bound float64 cancellation noise exceeds the tolerance and
    # no node count can help (couplings this far off the real axis need a
    # rotated contour, i.e. the closed form itself)
    if shift**2 / (2.0 * eps) > math.log(tol) + 34.0:
        raise GridTooSmall(
            f"integrand peak exp({shift ** 2 / (2.0 * eps):.1f}) swamps "
            f"tolerance {tol:.1e} in double precision"
        )
    # the cutoff sits sqrt(2 T_eff / eps) beyond the envelope peak, where
    # T_eff also absorbs the peak height exp(shift^2 / (2 eps))
    t_eff = big_t + shift**2 / (2.0 * eps)
    length = shift / eps + math.sqrt(2.0 * t_eff / eps) + 1.0
    bandwidth = abs(alpha) * math.sqrt(2.0 * big_t / eps) + 2.0 * abs(c) + 4.0
    h = math.pi / bandwidth
    n = int(math.ceil(length / h))

    def evaluate(n_nodes: int) -> tuple[complex, float]:
        x = np.linspace(-length, length, 2 * n_nodes + 1)
        vals = np.exp(-(alpha / 2.0) * x * x + c * x)
        dx = x[1] - x[0]
        return complex(np.trapezoid(vals, dx=dx)), float(
            np.sum(np.abs(vals)) * dx
        )

    # envelope tail beyond the truncation point, via the complementary
    # error function of the shifted Gaussian
    peak = shift / eps
    tail = (
        2.0
        * math.exp(shift**2 / (2.0 * eps))
        * math.sqrt(math.pi / (2.0 * eps))
        * float(erfc(math.sqrt(eps / 2.0) * (length - peak)))
    )
    if tail > tol:
        raise GridTooSmall(
            f"trapezoid tail estimate {tail:.3e} exceeds tolerance {tol:.3e}"
        )
    prev, absmass = evaluate(n)
    # exp() of an argument of magnitude z carries relative error ~ z ulp, so
    # the achievable accuracy is floored by the largest quadratic phase on
    # the grid; refinements below the floor differ by noise, not aliasing
    max_arg = 0.5 * abs(alpha) * length**2 + abs(c) * length
    floor = 2.3e-16 * (max_arg + 1.0) * absmass
    for _ in range(6):
        n *= 2
        curr, absmass = evaluate(n)
        if abs(curr - prev) <= max(tol / 4.0, 4.0 * floor):
            return curr, tail + floor
        prev = curr
    raise GridTooSmall(
        f"trapezoid failed to converge to {tol:.3e} after node doubling"
    )


def fresnel_2d_quadrature(
    p: FresnelParams, tol: float = 1e-10
) -> tuple[complex, float]:
    """Numeric value of the regularized 2D integral, with a tail estimate.

    The weight separates over the two axes, so the tensor-product rule
    factorizes exactly into two line quadratures; `fresnel_2d_quadrature_full`
    evaluates the same rule as a genuine double sum for cross-validation.
    """
    alpha = p.epsilon + 2j * p.a
    jx, tx = _trapezoid_line(alpha, 1j * p.lam, tol)
    jy, ty = _trapezoid_line(alpha, p.mu, tol)
    value = 1j * p.a / math.pi * jx * jy
    tail = abs(1j * p.a / math.pi) * (abs(jx) * ty + abs(jy) * tx + tx * ty)
    return complex(value), float(tail)


def fresnel_2d_quadrature_full(p: FresnelParams, tol: float = 1e-8) -> complex:
    """The same tensor-product rule accumulated as an explicit double sum."""
    alpha = p.epsilon + 2j * p.a
    eps = p.epsilon
    big_t = math.log(1.0 / tol) + 4.0
    cx, cy = 1j * p.lam, p.mu
    shift = max(abs(cx.real), abs(cy.real))
    length = math.sqrt(2.0 * big_t / eps) + shift / eps + 1.0
    bandwidth = abs(alpha) * math.sqrt(2.0 * big_t / eps) + 2.0 * max(
        abs(cx), abs(cy)
    ) + 4.0
    n = int(math.ceil(length * bandwidth / math.pi))
    x = np.linspace(-length, length, 2 * n + 1)
    dx = x[1] - x[0]
    xs, ys = np.meshgrid(x, x, indexing="ij")
    vals = np.exp(-(alpha / 2.0) * (xs * xs + ys * ys) + cx * xs + cy * ys)
    inner = np.trapezoid(vals, dx=dx, axis=1)
    outer = np.trapezoid(inner, dx=dx)
    return complex(1j * p.a / math.pi * outer)


def fresnel_1d_quadrature(
    a: float, u: complex, epsilon: float, tol: float = 1e-10
) -> tuple[complex, float]:
    """Numeric value of the regularized self-conjugate (1D) factor."""
    if a == 0.0:
        raise ValidationError("Fresnel parameter a must be nonzero")
    beta = epsilon + 1j * a
    j, t = _trapezoid_line(beta, 1j * u, tol)
    norm = np.sqrt(1j * a / (2.0 * math.pi))
    return complex(norm * j), float(abs(norm) * t)


def richardson(values: list[complex]) -> complex:
    """Ratio-2 Richardson extrapolation of values at eps, eps/2, eps/4, ...

    Assumes an error expansion analytic in eps, which holds for every
    regularized integral in this module.
    """
    if not values:
        raise ValidationError("richardson needs at least one value")
    table = [list(values)]
    for j in range(1, len(values)):
        prev = table[-1]
        table.append(
            [
                prev[i] + (prev[i] - prev[i - 1]) / (2.0**j - 1.0)
                for i in range(1, len(prev))
            ]
        )
    return table[-1][-1]


# ---------------------------------------------------------------------------
# Per-mode measures and canonical coordinates


@dataclass(frozen=True)
class ModeMeasure:
    """Measure parameters of the coordinate phi(mode)_{j i}."""

    mode: Mode
    two_j: int
    two_i: int
    a: float

    def lam_mu(self, nu: CoefficientField) -> tuple[complex, complex]:
        """Source couplings lambda = (v + v_r)(2l+1), mu = (v - v_r)(2l+1).

        v is the source entry nu(m)_{i j} paired with this coordinate by the
        trace, v_r its reflection-partner entry nu(refl m)_{-i,-j}.
        """
        v = nu.entry(self.mode, self.two_i, self.two_j)
        v_r = nu.entry(self.mode.reflected(), -self.two_i, -self.two_j)
        w = self.mode.weight
        return w * (v + v_r), w * (v - v_r)


def mode_measure(dc: PropagatorSpec, mode: Mode, two_j: int, two_i: int) -> ModeMeasure:
    """Package a = (2l+1)/(sqrt(4 pi) D_jj) for the coordinate phi(mode)_{j i}."""
    val = dc.value(mode, two_j)
    if val == 0.0:
        raise NonpositivePropagator(
            f"causal propagator vanishes at {mode}, row {two_j}: a is undefined"
        )
    mode.index_of(two_i)  # validates the column index as well
    return ModeMeasure(mode=mode, two_j=two_j, two_i=two_i, a=mode.weight / (ROOT_4PI * val))


@dataclass(frozen=True)
class Coordinate:
    """One canonical integration coordinate: the orbit of (mode, j, i)."""

    mode: Mode
    two_j: int
    two_i: int
    self_conjugate: bool


@dataclass(frozen=True)
class FiniteProjection:
    """Ordered, distinct canonical coordinates of a finite projection."""

    coords: tuple[Coordinate, ...]

    def __post_init__(self) -> None:
        seen = set()
        for c in self.coords:
            if c.mode.n < 0:
                raise ValidationError(
                    f"projection coordinates use canonical modes, got {c.mode}"
                )
            key = (c.mode, c.two_j, c.two_i)
            mirror = (c.mode, -c.two_j, -c.two_i)
            if key in seen or (c.mode.n == 0 and mirror in seen):
                raise ValidationError(f"duplicate coordinate {key}")
            seen.add(key)
            if c.self_conjugate != (
                c.mode.n == 0 and c.two_j == 0 and c.two_i == 0
            ):
                raise ValidationError(f"wrong self-conjugacy flag on {key}")

    @property
    def k(self) -> int:
        return len(self.coords)


def canonical_coordinates(modes) -> FiniteProjection:
    """All canonical coordinates of the reflection orbits of ``modes``.

    Positive-n blocks contribute every (j, i); n = 0 blocks contribute one
    representative per orbit of (j, i) -> (-j, -i), the lexicographically
    positive one, plus the self-conjugate center when the weight is odd.
    """
    coords = []
    for m in sorted({mm.canonical() for mm in modes}):
        vals = m.two_i_values()
        for two_j in vals:
            for two_i in vals:
                if m.n == 0:
                    if (two_j, two_i) < (-two_j, -two_i):
                        continue
                    self_conj = two_j == 0 and two_i == 0
                else:
                    self_conj = False
                coords.append(
                    Coordinate(
                        mode=m, two_j=two_j, two_i=two_i, self_conjugate=self_conj
                    )
                )
    return FiniteProjection(coords=tuple(coords))


def product_characteristic(nu: CoefficientField, dc: PropagatorSpec) -> complex:
    """Product of the eps -> 0 Fresnel limits over the canonical coordinates.

    Requires a real-flagged source.  Self-conjugate coordinates contribute
    the one-dimensional limit exp(i U^2 / (2a)) with U = (2l+1) * center
    entry; paired coordinates contribute exp(i (lambda^2 - mu^2)/(4a)).
    Coordinate by coordinate this reproduces the causal quadratic form, so
    the product must equal the vacuum characteristic value exp(i Q / 2).
    """
    if not nu.real:
        raise ValidationError("product characteristic needs a real-flagged source")
    ensure_admissible(nu, dc, side="upper")
    proj = canonical_coordinates(nu.support())
    exponent = 0.0 + 0.0j
    for c in proj.coords:
        mm = mode_measure(dc, c.mode, c.two_j, c.two_i)
        if c.self_conjugate:
            u = c.mode.weight * nu.entry(c.mode, 0, 0)
            exponent += u**2 / (2.0 * mm.a)
        else:
            lam, mu = mm.lam_mu(nu)
            exponent += (lam**2 - mu**2) / (4.0 * mm.a)
    return complex(np.exp(1j * exponent))


def phase_coefficients(
    proj: FiniteProjection, nu: CoefficientField
) -> np.ndarray:
    """Real phase couplings (U, W) per coordinate: <nu, phi> = sum U x + W y.

    For a paired coordinate with source entry p + i q the pair contributes
    2(2l+1)(p x - q y); the self-conjugate center contributes (2l+1) p x.
    """
    if not nu.real:
        raise ValidationError("phase coefficients need a real-flagged source")
    out = np.zeros((proj.k, 2))
    for pos, c in enumerate(proj.coords):
        v = nu.entry(c.mode, c.two_i, c.two_j)
        if c.self_conjugate:
            out[pos] = (c.mode.weight * v.real, 0.0)
        else:
            out[pos] = (
                2.0 * c.mode.weight * v.real,
                -2.0 * c.mode.weight * v.imag,
            )
    return out


# ---------------------------------------------------------------------------
# finite-projection density and its Fourier transform


def projection_density(
    proj: FiniteProjection, dc: PropagatorSpec, point: np.ndarray
) -> complex:
    """The printed image density at a point of R^(2k).

    ``point`` has shape (k, 2); self-conjugate coordinates must carry a
    zero second component.  Each paired coordinate contributes
    (i a / pi) exp(-i a (x^2 + y^2)); the self-conjugate one contributes
    sqrt(i a / (2 pi)) exp(-(i a / 2) x^2).
    """
    point = np.asarray(point, dtype=float)
    if point.shape != (proj.k, 2):
        raise ValidationError(f"point needs shape ({proj.k}, 2), got {point.shape}")
    value = 1.0 + 0.0j
    for c, (x, y) in zip(proj.coords, point):
        a = mode_measure(dc, c.mode, c.two_j, c.two_i).a
        if c.self_conjugate:
            if y != 0.0:
                raise ValidationError(
                    "self-conjugate coordinates have no second component"
                )
            value *= np.sqrt(0.5j * a / math.pi) * np.exp(-0.5j * a * x * x)
        else:
            value *= 1j * a / math.pi * np.exp(-1j * a * (x * x + y * y))
    return complex(value)


def projection_closed_product(
    proj: FiniteProjection, dc: PropagatorSpec, u: np.ndarray, w: np.ndarray
) -> complex:
    """Closed-form transform: prod_c exp((i/2)(sqrt(4 pi) D / (2l+1))(u^2 + w^2))."""
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    if u.shape != (proj.k,) or w.shape != (proj.k,):
        raise ValidationError("u and w must be real vectors of length k")
    value = 1.0 + 0.0j
    for c, uc, wc in zip(proj.coords, u, w):
        if c.self_conjugate and wc != 0.0:
            raise ValidationError("self-conjugate coordinates need w = 0")
        d = dc.value(c.mode, c.two_j)
        value *= np.exp(0.5j * ROOT_4PI * d / c.mode.weight * (uc * uc + wc * wc))
    return complex(value)


def projection_characteristic_check(
    proj: FiniteProjection,
    dc: PropagatorSpec,
    u: np.ndarray,
    w: np.ndarray,
    epsilon0: float = 0.1,
    levels: int = 6,
    tol: float = 1e-10,
) -> tuple[complex, complex, float]:
    """Quadrature transform of the density against the closed product.

    The left side integrates exp(i sum_c sqrt(2)(u_c x + w_c y)) against the
    regularized density by trapezoid quadrature and extrapolates eps -> 0;
    the sqrt(2) reflects that (u, w) are coefficients on basis functionals
    of squared norm 1/(2l+1) while (x, y) are raw entry parts, and it is
    absent on self-conjugate coordinates, which have no reflection partner.
    The right side is the closed-form product.  Returns (lhs, rhs, err).

    Each regularized factor is analytic in eps within radius 2|a| (|a| for
    self-conjugate coordinates), so the extrapolation ladder starts at
    epsilon0 scaled down to the smallest radius present.
    """
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    if u.shape != (proj.k,) or w.shape != (proj.k,):
        raise ValidationError("u and w must be real vectors of length k")
    if proj.k == 0:
        return 1.0 + 0.0j, 1.0 + 0.0j, 0.0
    measures = [mode_measure(dc, c.mode, c.two_j, c.two_i) for c in proj.coords]
    radius = min(
        abs(mm.a) * (1.0 if c.self_conjugate else 2.0)
        for c, mm in zip(proj.coords, measures)
    )
    eps_base = epsilon0 * min(1.0, radius)

    def at_eps(eps: float) -> complex:
        value = 1.0 + 0.0j
        for c, mm, uc, wc in zip(proj.coords, measures, u, w):
            if c.self_conjugate:
                if wc != 0.0:
                    raise ValidationError("self-conjugate coordinates need w = 0")
                factor, _ = fresnel_1d_quadrature(mm.a, uc, eps, tol)
            else:
                params = FresnelParams(
                    a=mm.a,
                    lam=math.sqrt(2.0) * uc,
                    mu=1j * math.sqrt(2.0) * wc,
                    epsilon=eps,
                )
                factor, _ = fresnel_2d_quadrature(params, tol)
            value *= factor
        return value

    values = [at_eps(eps_base / 2**i) for i in range(levels)]
    lhs = richardson(values)
    rhs = projection_closed_product(proj, dc, u, w)
    return lhs, rhs, abs(lhs - rhs)


def mc_characteristic(
    proj: FiniteProjection,
    dc: PropagatorSpec,
    nu_coords: np.ndarray,
    samples: int,
    epsilon: float,
    seed: int,
) -> tuple[complex, float]:
    """Monte Carlo estimate of the regularized characteristic value.

    Coordinates are drawn from the Gaussian |density| envelope N(0, 1/eps)
    per axis and reweighted by the oscillatory part: a paired coordinate
    carries weight (2ia/eps) exp(-i a r^2), the self-conjugate one
    sqrt(ia/eps) exp(-i a x^2 / 2).  The phase is exp(i sum U x + W y) with
    ``nu_coords`` of shape (k, 2).  Returns (estimate, standard error); the
    estimator is deterministic in the seed.  Variance grows quickly with a
    and 1/eps, so this is a loose cross-check, not a precision oracle.
    """
    nu_coords = np.asarray(nu_coords, dtype=float)
    if nu_coords.shape != (proj.k, 2):
        raise ValidationError(f"nu_coords needs shape ({proj.k}, 2)")
    if epsilon <= 0.0:
        raise ValidationError("regularization epsilon must be positive")
    rng = np.random.default_rng(seed)
    draws = rng.standard_normal((samples, proj.k, 2)) / math.sqrt(epsilon)
    weights = np.ones(samples, dtype=complex)
    for pos, c in enumerate(proj.coords):
        a = mode_measure(dc, c.mode, c.two_j, c.two_i).a
        x = draws[:, pos, 0]
        y = draws[:, pos, 1]
        uc, wc = nu_coords[pos]
        if c.self_conjugate:
            weights *= np.sqrt(1j * a / epsilon) * np.exp(
                -0.5j * a * x * x + 1j * uc * x
            )
        else:
            weights *= (
                2j
                * a
                / epsilon
                * np.exp(-1j * a * (x * x + y * y) + 1j * (uc * x + wc * y))
            )
    estimate = complex(np.mean(weights))
    stderr = float(np.std(weights) / math.sqrt(samples))
    return estimate, stderr
