"""Named check batteries over a fixture, one report row per verified identity.

This is the engine behind the command line driver.  ``run_suite`` loads a
fixture, dispatches the requested battery (or all of them, in a fixed
order), and returns a Report whose CSV serialization is byte-stable for a
given (fixture, flags, seed) triple.  To keep that promise, randomized
checks never share a generator: each derives its stream from the run seed
plus its own check id, so adding or reordering checks cannot shift the
draws of another check.

Every row's ``check_id`` is a slug naming the identity being exercised;
the CSV carries it verbatim, which is what makes a FAIL line actionable
without rerunning anything.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .chrono import (
    build_kernels,
    characteristic_modulus_bound,
    exp_identity_tail_bound,
    pairing_count,
    pairing_count_bruteforce,
    time_ordered_closed,
    time_ordered_monomial,
    vacuum_characteristic,
    verify_recursions,
)
from .errors import ToolkitError, ValidationError
from .fixtures import Fixture, load_fixture
from .fockspace import FockContext, KernelVector, kernel_operator, vacuum_expectation
from .harmonics import (
    GroupGrid,
    GroupPoint,
    character,
    compose,
    plancherel_check,
    synthesize,
    transform_band,
    wigner_matrix,
)
from .measure import (
    FiniteProjection,
    FresnelParams,
    canonical_coordinates,
    fresnel_1d_analytic,
    fresnel_2d_analytic,
    fresnel_2d_limit,
    fresnel_2d_quadrature,
    mc_characteristic,
    mode_measure,
    product_characteristic,
    projection_characteristic_check,
    richardson,
)
from .modes import (
    CoefficientField,
    Mode,
    PropagatorSpec,
    causal_quadratic_form,
    eigenvalue,
    lower_bound_check,
    upper_bound_check,
)
from .reporting import (
    CheckRow,
    Report,
    save_convergence_figure,
    save_extrapolation_figure,
    save_residual_figure,
)
from .symbolcalc import _sample_pairs, growth_bound_fit, symbol_discrepancy

__all__ = ["RunFlags", "run_suite", "SUITE_NAMES", "DIMENSION_WARNING"]

SUITE_NAMES = ("pairings", "support", "harmonics", "chrono", "symbols", "measure")

# Past this Fock dimension the dense chrono/symbols batteries stop being
# interactive; the run proceeds but the report carries a warning.
DIMENSION_WARNING = 20_000


@dataclass(frozen=True)
class RunFlags:
    """Knobs shared by every suite; defaults match the command line."""

    seed: int = 0
    tol_scale: float = 1.0
    max_order: int = 12
    cutoff: int | None = None
    epsilon_levels: int = 6
    csv_path: str | Path | None = None
    quiet: bool = False

    def __post_init__(self) -> None:
        if self.seed < 0:
            raise ValidationError("seed must be nonnegative")
        if self.tol_scale <= 0:
            raise ValidationError("tolerance scale must be positive")
        if self.max_order < 2:
            raise ValidationError("max order must be at least 2")
        if self.epsilon_levels < 2:
            raise ValidationError("need at least two extrapolation levels")

    def describe(self) -> str:
        cutoff = "fixture" if self.cutoff is None else str(self.cutoff)
        return (
            f"tol-scale={self.tol_scale:g} max-order={self.max_order} "
            f"cutoff={cutoff} epsilon-levels={self.epsilon_levels}"
        )


def _rng(flags: RunFlags, check_id: str) -> np.random.Generator:
    """Private stream per check: run seed entangled with the check id."""
    tag = zlib.crc32(check_id.encode())
    return np.random.default_rng(np.random.SeedSequence([flags.seed, tag]))


def _flag_row(check_id: str, fx: Fixture, ok: bool, source: str = "") -> CheckRow:
    return CheckRow(
        check_id=check_id,
        fixture=fx.name,
        source=source,
        lhs=1.0 if ok else 0.0,
        rhs=1.0,
        err=0.0 if ok else 1.0,
        tolerance=0.0,
    )


def _orbit_closure(modes) -> list[Mode]:
    return sorted(set(modes) | {m.reflected() for m in modes})


def _random_source_field(rng, modes, real: bool, scale: float) -> CoefficientField:
    closure = _orbit_closure(modes)
    entries = {
        m: scale
        * (rng.standard_normal((m.dim, m.dim)) + 1j * rng.standard_normal((m.dim, m.dim)))
        for m in closure
    }
    if real:
        for m in closure:
            if m.n > 0:
                entries[m.reflected()] = np.conj(entries[m])[::-1, ::-1]
            elif m.n == 0:
                entries[m] = 0.5 * (entries[m] + np.conj(entries[m])[::-1, ::-1])
    return CoefficientField(entries=entries, real=real)


def _random_window_propagator(rng, modes) -> PropagatorSpec:
    diag = {}
    for m in _orbit_closure(modes):
        if m in diag:
            continue
        w = eigenvalue(m)
        v = np.exp(rng.uniform(np.log(w**-4), np.log(w**2), size=m.dim))
        if m.n == 0:
            v = np.minimum(v, v[::-1])
        diag[m] = v
        diag[m.reflected()] = v[::-1]
    return PropagatorSpec(diag=diag)


def _random_group_point(rng) -> GroupPoint:
    return GroupPoint(
        t=rng.uniform(0.0, 4.0 * math.pi),
        alpha=rng.uniform(0.0, 2.0 * math.pi),
        beta=rng.uniform(0.0, math.pi),
        gamma=rng.uniform(0.0, 4.0 * math.pi),
    )


# ---------------------------------------------------------------------------
# individual suites
# ---------------------------------------------------------------------------


def _suite_pairings(fx: Fixture, flags: RunFlags, ctx, report: Report):
    # integer identities: every tolerance here is exactly zero on purpose,
    # so --tol cannot widen them
    worst = 0
    at = (12, 6)
    for n in range(13):
        for k in range(7):
            d = abs(pairing_count(n, k) - pairing_count_bruteforce(n, k))
            if d > worst:
                worst, at = d, (n, k)
    report.rows.append(
        CheckRow(
            check_id="pairing-count-bruteforce",
            fixture=fx.name,
            source="",
            lhs=float(pairing_count(*at)),
            rhs=float(pairing_count_bruteforce(*at)),
            err=float(worst),
            tolerance=0.0,
        )
    )

    rec = verify_recursions(40)
    report.rows.append(_flag_row("pairing-shift-recursion", fx, rec.shift_holds))
    report.rows.append(
        _flag_row("pairing-product-recursion", fx, rec.product_corrected_holds)
    )
    if not rec.product_raw_holds:
        n, k = rec.raw_counterexample
        report.warnings.append(
            "the product recursion without its p(n, k) prefactor first fails at "
            f"(n, k) = ({n}, {k}); the suite checks the corrected reading"
        )
    return []


def _suite_support(fx: Fixture, flags: RunFlags, ctx, report: Report):
    s = flags.tol_scale
    report.rows.append(_flag_row("support-window-upper", fx, fx.upper_window_ok))
    report.rows.append(_flag_row("support-window-lower", fx, fx.lower_window_ok))
    try:
        fx.support.validate(fx.propagator, orbit_modes=set(fx.orbit.systems))
        cut_ok = True
    except ToolkitError:
        cut_ok = False
    report.rows.append(_flag_row("support-cut-rule", fx, cut_ok))

    modes = fx.orbit.canonical_modes()
    for check_id, checker in (
        ("support-upper-bound", upper_bound_check),
        ("support-lower-bound", lower_bound_check),
    ):
        rng = _rng(flags, check_id)
        worst = 0.0
        pair = (0.0, 0.0)
        for _ in range(100):
            nu = _random_source_field(rng, modes, real=False, scale=rng.uniform(0.1, 2.0))
            dc = _random_window_propagator(rng, modes)
            bc = checker(nu, dc)
            viol = max(0.0, bc.lhs - bc.rhs)
            if viol >= worst:
                worst, pair = viol, (bc.lhs, bc.rhs)
        report.rows.append(
            CheckRow(
                check_id=check_id,
                fixture=fx.name,
                source="",
                lhs=pair[0],
                rhs=pair[1],
                err=worst,
                tolerance=s * 1e-9,
            )
        )

    if fx.upper_window_ok and fx.lower_window_ok:
        for name, nu in fx.sources:
            for check_id, checker in (
                ("support-source-upper-bound", upper_bound_check),
                ("support-source-lower-bound", lower_bound_check),
            ):
                bc = checker(nu, fx.propagator)
                report.rows.append(
                    CheckRow(
                        check_id=check_id,
                        fixture=fx.name,
                        source=name,
                        lhs=bc.lhs,
                        rhs=bc.rhs,
                        err=max(0.0, bc.lhs - bc.rhs),
                        tolerance=s * 1e-9,
                    )
                )
    else:
        report.warnings.append(
            "propagator leaves the admissibility window; per-source bound checks skipped"
        )
    return []


def _suite_harmonics(fx: Fixture, flags: RunFlags, ctx, report: Report):
    s = flags.tol_scale

    rng = _rng(flags, "harmonics-wigner-unitarity")
    worst = 0.0
    for two_l in range(9):
        for _ in range(2):
            d = wigner_matrix(
                two_l,
                rng.uniform(0, 2 * math.pi),
                rng.uniform(0, math.pi),
                rng.uniform(0, 4 * math.pi),
            )
            defect = np.abs(d @ np.conj(d).T - np.eye(two_l + 1)).max()
            worst = max(worst, float(defect))
    report.rows.append(
        CheckRow("harmonics-wigner-unitarity", fx.name, "", worst, 0.0, worst, s * 1e-10)
    )

    rng = _rng(flags, "harmonics-character-homomorphism")
    worst = 0.0
    for m in fx.orbit.canonical_modes():
        for _ in range(3):
            g1, g2 = _random_group_point(rng), _random_group_point(rng)
            lhs = character(m, compose(g1, g2))
            rhs = character(m, g1) @ character(m, g2)
            worst = max(worst, float(np.abs(lhs - rhs).max()))
    report.rows.append(
        CheckRow(
            "harmonics-character-homomorphism", fx.name, "", worst, 0.0, worst, s * 1e-10
        )
    )

    closure = _orbit_closure(fx.orbit.canonical_modes())
    grid = GroupGrid.from_band(
        max(abs(m.n) for m in closure), max(m.two_l for m in closure)
    )
    rng = _rng(flags, "harmonics-plancherel")
    coeffs_f = CoefficientField(
        entries={
            m: rng.standard_normal((m.dim, m.dim))
            + 1j * rng.standard_normal((m.dim, m.dim))
            for m in grid.band_modes()
        }
    )
    coeffs_g = CoefficientField(
        entries={
            m: rng.standard_normal((m.dim, m.dim))
            + 1j * rng.standard_normal((m.dim, m.dim))
            for m in grid.band_modes()
        }
    )
    f = synthesize(coeffs_f, grid)
    g = synthesize(coeffs_g, grid)
    lhs, rhs, err = plancherel_check(f, g)
    report.rows.append(
        CheckRow("harmonics-plancherel", fx.name, "", lhs, rhs, err, s * 1e-8)
    )

    back = transform_band(f)
    worst = max(
        float(np.abs(back.block(m) - coeffs_f.block(m)).max()) for m in grid.band_modes()
    )
    report.rows.append(
        CheckRow("harmonics-fourier-roundtrip", fx.name, "", worst, 0.0, worst, s * 1e-8)
    )
    return []


def _suite_chrono(fx: Fixture, flags: RunFlags, ctx: FockContext, report: Report):
    s = flags.tol_scale
    figure_payload = None
    for idx, (name, nu) in enumerate(fx.sources):
        q = causal_quadratic_form(nu, fx.propagator)
        k01, k10 = build_kernels(fx.orbit, nu)

        mono2 = time_ordered_monomial(ctx, k01, k10, q, 2)
        val = vacuum_expectation(mono2)
        target = -1j * q
        report.rows.append(
            CheckRow(
                "chrono-quadratic-vacuum", fx.name, name, val, target,
                abs(val - target), s * 1e-12,
            )
        )

        closed = time_ordered_closed(ctx, k01, k10, q)
        lower = kernel_operator(ctx, k01, KernelVector.zero())
        upper = kernel_operator(ctx, KernelVector.zero(), k10)
        bound_b = lower.spectral_norm() + upper.spectral_norm()

        partial = np.zeros((ctx.dim, ctx.dim), dtype=complex)
        orders, errors, bounds = [], [], []
        for n in range(flags.max_order + 1):
            mono = time_ordered_monomial(ctx, k01, k10, q, n)
            partial += (1j) ** n / math.factorial(n) * mono.mat
            orders.append(n)
            errors.append(float(np.abs(partial - closed.mat).max()))
            bounds.append(exp_identity_tail_bound(bound_b, q, n))
        report.rows.append(
            CheckRow(
                "chrono-exponential-tail", fx.name, name,
                errors[-1], bounds[-1], errors[-1], s * bounds[-1],
            )
        )
        if idx == 0:
            figure_payload = (orders, errors, bounds)

        vac = vacuum_expectation(closed)
        target = vacuum_characteristic(q)
        report.rows.append(
            CheckRow(
                "chrono-exponential-vacuum", fx.name, name, vac, target,
                abs(vac - target), s * 1e-10,
            )
        )

        modulus_bound = characteristic_modulus_bound(nu)
        report.rows.append(
            CheckRow(
                "chrono-characteristic-modulus", fx.name, name,
                abs(target), modulus_bound,
                max(0.0, abs(target) - modulus_bound), s * 1e-12,
            )
        )

    figs = []
    if figure_payload is not None:
        figs.append(
            (
                "chrono-convergence",
                lambda path, d=figure_payload: save_convergence_figure(path, *d),
            )
        )
    return figs


def _suite_symbols(fx: Fixture, flags: RunFlags, ctx: FockContext, report: Report):
    s = flags.tol_scale
    residuals, bounds_seen = [], []
    for name, nu in fx.sources:
        pair_seed = int(
            np.random.SeedSequence(
                [flags.seed, zlib.crc32(b"symbol-direct-vs-closed")]
            ).generate_state(1)[0]
        )
        pairs = _sample_pairs(fx.orbit, 8, pair_seed)
        worst = 0.0
        worst_pair = (0.0, 0.0)
        for xi, eta in pairs:
            sample, bound = symbol_discrepancy(ctx, fx.orbit, nu, fx.propagator, xi, eta)
            excess = max(0.0, sample.err - bound)
            residuals.append(max(sample.err, 1e-17))
            bounds_seen.append(max(bound, 1e-17))
            if excess >= worst:
                worst, worst_pair = excess, (sample.direct, sample.closed)
        report.rows.append(
            CheckRow(
                "symbol-direct-vs-closed", fx.name, name,
                worst_pair[0], worst_pair[1], worst, s * 1e-9,
            )
        )

        fits_ok = True
        witness = (0.0, 0.0)
        for p in (0.0, 1.0):
            for epsilon in (0.5, 1.0):
                fit = growth_bound_fit(
                    nu, fx.propagator, fx.orbit, p, epsilon, 24, seed=flags.seed
                )
                if not (math.isfinite(fit.c) and math.isfinite(fit.q)):
                    fits_ok = False
                else:
                    witness = (fit.c, fit.q)
        report.rows.append(
            CheckRow(
                "symbol-growth-fit", fx.name, name,
                witness[0], witness[1], 0.0 if fits_ok else 1.0, 0.0,
            )
        )

    figs = []
    if residuals:
        figs.append(
            (
                "symbols-residuals",
                lambda path, e=residuals, b=bounds_seen: save_residual_figure(path, e, b),
            )
        )
    return figs


def _conditioned_fresnel(rng) -> FresnelParams:
    """Random parameters inside the quadrature's well-conditioned domain."""
    epsilon = 10.0 ** rng.uniform(-2, 0)
    a = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 3.0)
    # lam wants to be real and mu imaginary (the physical coupling regime);
    # the off-axis drift must stay under the conditioning guard.
    drift = 0.5 * math.sqrt(epsilon)
    lam = rng.uniform(-2, 2) + 1j * drift * rng.uniform(-1, 1)
    mu = 1j * rng.uniform(-2, 2) + drift * rng.uniform(-1, 1)
    return FresnelParams(a=a, lam=lam, mu=mu, epsilon=epsilon)


def _suite_measure(fx: Fixture, flags: RunFlags, ctx, report: Report):
    s = flags.tol_scale
    figs = []

    rng = _rng(flags, "measure-fresnel-quadrature")
    worst = 0.0
    pair = (0.0, 0.0)
    for _ in range(50):
        p = _conditioned_fresnel(rng)
        val, _tail = fresnel_2d_quadrature(p, tol=1e-10)
        ref = fresnel_2d_analytic(p)
        d = abs(val - ref)
        if d >= worst:
            worst, pair = d, (val, ref)
    report.rows.append(
        CheckRow(
            "measure-fresnel-quadrature", fx.name, "", pair[0], pair[1], worst, s * 1e-8
        )
    )

    rng = _rng(flags, "measure-fresnel-extrapolation")
    worst = 0.0
    pair = (0.0, 0.0)
    figure_payload = None
    for _ in range(8):
        a = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 3.0))
        lam = float(rng.uniform(-2, 2))
        mu = 1j * float(rng.uniform(-2, 2))
        eps0 = 0.1 * min(1.0, 2.0 * abs(a))
        ladder = [eps0 / 2.0**j for j in range(flags.epsilon_levels)]
        vals = [
            fresnel_2d_quadrature(FresnelParams(a, lam, mu, e), tol=1e-10)[0]
            for e in ladder
        ]
        ext = richardson(vals)
        ref = fresnel_2d_limit(a, lam, mu)
        d = abs(ext - ref)
        if d >= worst:
            worst, pair = d, (ext, ref)
            figure_payload = (ladder, [abs(v - ref) for v in vals], d)
    report.rows.append(
        CheckRow(
            "measure-fresnel-extrapolation", fx.name, "", pair[0], pair[1], worst,
            s * 1e-6,
        )
    )
    if figure_payload is not None:
        figs.append(
            (
                "measure-extrapolation",
                lambda path, d=figure_payload: save_extrapolation_figure(path, *d),
            )
        )

    for name, nu in fx.sources:
        prod = product_characteristic(nu, fx.propagator)
        vac = vacuum_characteristic(causal_quadratic_form(nu, fx.propagator))
        report.rows.append(
            CheckRow(
                "measure-product-vs-vacuum", fx.name, name, prod, vac,
                abs(prod - vac), s * 1e-10,
            )
        )

    proj = canonical_coordinates(fx.orbit.canonical_modes())
    rng = _rng(flags, "measure-projection-transform")
    for k in (1, 2):
        if proj.k < k:
            continue
        sub = FiniteProjection(proj.coords[:k])
        u = rng.uniform(-1.0, 1.0, size=k)
        w = rng.uniform(-1.0, 1.0, size=k)
        for pos, coord in enumerate(sub.coords):
            if coord.self_conjugate:
                w[pos] = 0.0
        lhs, rhs, err = projection_characteristic_check(
            sub, fx.propagator, u, w, levels=flags.epsilon_levels
        )
        report.rows.append(
            CheckRow(f"measure-projection-k{k}", fx.name, "", lhs, rhs, err, s * 1e-6)
        )

    # Monte Carlo sanity check at fixed regulator; the best-conditioned
    # coordinate (smallest |a|) keeps the importance weights bounded.
    coord = min(
        proj.coords,
        key=lambda c: abs(mode_measure(fx.propagator, c.mode, c.two_j, c.two_i).a),
    )
    mm = mode_measure(fx.propagator, coord.mode, coord.two_j, coord.two_i)
    rng = _rng(flags, "measure-mc-consistency")
    uw = np.zeros((1, 2))
    uw[0, 0] = rng.uniform(-0.8, 0.8)
    uw[0, 1] = 0.0 if coord.self_conjugate else rng.uniform(-0.8, 0.8)
    mc_seed = int(
        np.random.SeedSequence(
            [flags.seed, zlib.crc32(b"measure-mc-consistency")]
        ).generate_state(1)[0]
    )
    est, stderr = mc_characteristic(
        FiniteProjection((coord,)), fx.propagator, uw,
        samples=40_000, epsilon=1.0, seed=mc_seed,
    )
    if coord.self_conjugate:
        oracle = fresnel_1d_analytic(mm.a, uw[0, 0], 1.0)
    else:
        oracle = fresnel_2d_analytic(
            FresnelParams(a=mm.a, lam=uw[0, 0], mu=1j * uw[0, 1], epsilon=1.0)
        )
    ratio = abs(est - oracle) / stderr
    report.rows.append(
        CheckRow("measure-mc-consistency", fx.name, "", est, oracle, ratio, s * 3.0)
    )
    return figs


_DISPATCH = {
    "pairings": _suite_pairings,
    "support": _suite_support,
    "harmonics": _suite_harmonics,
    "chrono": _suite_chrono,
    "symbols": _suite_symbols,
    "measure": _suite_measure,
}


def run_suite(fixture, suite: str, flags: RunFlags | None = None) -> Report:
    """Run one named battery (or ``all``) and return the populated report.

    ``fixture`` is a path to a fixture file or an already-loaded Fixture.
    A fixture with no sources yields an empty, trivially passing report.
    When ``flags.csv_path`` is set the CSV is written there and the
    diagnostic figures land next to it, named after the CSV stem.
    """
    if flags is None:
        flags = RunFlags()
    if suite != "all" and suite not in SUITE_NAMES:
        raise ValidationError(
            f"unknown suite {suite!r}; choose from {', '.join(SUITE_NAMES + ('all',))}"
        )
    fx = fixture if isinstance(fixture, Fixture) else load_fixture(fixture)
    names = SUITE_NAMES if suite == "all" else (suite,)

    report = Report(
        fixture_name=fx.name,
        suite=suite,
        seed=flags.seed,
        config_sha256=fx.sha256,
        flags_text=flags.describe(),
    )
    if not fx.sources:
        report.warnings.append("fixture has no sources; nothing to check")
        if flags.csv_path is not None:
            report.write_csv(flags.csv_path)
        return report

    ctx = None
    if "chrono" in names or "symbols" in names:
        ctx = fx.fock_context(flags.cutoff)
        if ctx.dim > DIMENSION_WARNING:
            report.warnings.append(
                f"Fock dimension {ctx.dim} exceeds {DIMENSION_WARNING}; "
                "dense batteries will be slow"
            )

    figures = []
    for name in names:
        figures.extend(_DISPATCH[name](fx, flags, ctx, report))

    if flags.csv_path is not None:
        path = report.write_csv(flags.csv_path)
        for suffix, draw in figures:
            draw(path.with_name(f"{path.stem}-{suffix}.png"))
    return report
