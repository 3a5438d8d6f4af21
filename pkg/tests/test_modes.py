import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eufock.errors import AdmissibilityViolation, MissingPropagator, ValidationError
from eufock.modes import (
    AdmissibleSupport,
    CoefficientField,
    Mode,
    PropagatorSpec,
    causal_quadratic_form,
    dual_pairing,
    eigenvalue,
    lower_bound_check,
    propagator_window_ok,
    sobolev_norm,
    upper_bound_check,
)

ROOT_4PI = math.sqrt(4 * math.pi)


def random_field(rng, modes, real=False, scale=1.0):
    entries = {}
    for m in modes:
        entries[m] = scale * (
            rng.standard_normal((m.dim, m.dim)) + 1j * rng.standard_normal((m.dim, m.dim))
        )
    if real:
        # overwrite the negative-n half (and symmetrize n = 0) from the rest
        for m in list(entries):
            r = m.reflected()
            if m.n > 0:
                entries[r] = np.conj(entries[m])[::-1, ::-1]
            elif m.n == 0:
                entries[m] = 0.5 * (entries[m] + np.conj(entries[m])[::-1, ::-1])
    return CoefficientField(entries=entries, real=real)


def random_window_propagator(rng, modes):
    """Diagonals drawn log-uniformly inside [omega^-4, omega^2], parity-symmetric."""
    diag = {}
    for m in sorted(modes):
        if m.n < 0:
            continue
        w = eigenvalue(m)
        lo, hi = math.log(w**-4), math.log(w**2)
        v = np.exp(rng.uniform(lo, hi, size=m.dim))
        diag[m] = v
        diag[m.reflected()] = v[::-1]
    return PropagatorSpec(diag=diag)


SMALL_MODES = [Mode(0, 0), Mode(1, 0), Mode(-1, 0), Mode(2, 2), Mode(-2, 2)]


class TestMode:
    def test_eigenvalue_examples(self):
        assert eigenvalue(Mode(0, 0)) == 1.0
        assert eigenvalue(Mode(2, 2)) == 4 + 1 + 2  # l = 1
        assert eigenvalue(Mode(1, 1)) == pytest.approx(1 + 1 + 0.75)  # l = 1/2
        assert eigenvalue(Mode(-3, 0)) == eigenvalue(Mode(3, 0))

    def test_index_mapping(self):
        m = Mode(0, 2)
        assert [m.index_of(t) for t in (-2, 0, 2)] == [0, 1, 2]
        with pytest.raises(ValidationError):
            m.index_of(1)
        with pytest.raises(ValidationError):
            m.index_of(4)

    def test_validation(self):
        with pytest.raises(ValidationError):
            Mode(0, -1)


class TestCoefficientField:
    def test_from_rows_and_entry(self):
        f = CoefficientField.from_rows([(2, 2, 0, 2, 0.5, -1.0)])
        m = Mode(2, 2)
        assert f.entry(m, 0, 2) == 0.5 - 1.0j
        assert f.entry(m, 0, 0) == 0.0
        assert f.support() == {m}

    def test_reality_flag_enforced(self):
        # conj(f(1,0)) must equal f(-1,0)
        good = CoefficientField.from_rows(
            [(1, 0, 0, 0, 1.0, 2.0), (-1, 0, 0, 0, 1.0, -2.0)], real=True
        )
        assert good.reality_defect() == 0.0
        with pytest.raises(ValidationError):
            CoefficientField.from_rows(
                [(1, 0, 0, 0, 1.0, 2.0), (-1, 0, 0, 0, 1.0, 2.0)], real=True
            )

    def test_real_flag_even_odd_decomposition(self):
        # real/imag parts of a real-flagged field are even/odd under
        # (n, i, j) -> (-n, -i, -j)
        rng = np.random.default_rng(7)
        f = random_field(rng, SMALL_MODES, real=True)
        for m in f.support():
            a = f.block(m)
            b = f.block(m.reflected())[::-1, ::-1]
            assert np.allclose(a.real, b.real, atol=1e-14)
            assert np.allclose(a.imag, -b.imag, atol=1e-14)

    def test_block_shape_validation(self):
        with pytest.raises(ValidationError):
            CoefficientField(entries={Mode(0, 2): np.zeros((2, 2))})


class TestSobolevNorm:
    def test_single_entry_frozen_value(self):
        # one unit entry on (n=2, l=1): |f|_1 = sqrt((2l+1) * omega^2) = sqrt(3 * 49)
        f = CoefficientField.from_rows([(2, 2, 0, 0, 1.0, 0.0)])
        assert sobolev_norm(f, 1) == pytest.approx(math.sqrt(147.0), rel=1e-15)
        assert sobolev_norm(f, 0) == pytest.approx(math.sqrt(3.0), rel=1e-15)
        assert sobolev_norm(f, -2) == pytest.approx(math.sqrt(3.0) / 49.0, rel=1e-15)

    def test_bruteforce_oracle(self):
        rng = np.random.default_rng(11)
        f = random_field(rng, SMALL_MODES)
        for k in (-2.0, 0.0, 1.0, 2.5):
            acc = 0.0
            for m, block in f.entries.items():
                w = eigenvalue(m)
                for r in range(m.dim):
                    for c in range(m.dim):
                        acc += (m.two_l + 1) * w ** (2 * k) * abs(block[r, c]) ** 2
            assert sobolev_norm(f, k) == pytest.approx(math.sqrt(acc), rel=1e-12)

    @given(st.integers(-2, 3), st.integers(-2, 3))
    @settings(max_examples=25, deadline=None)
    def test_monotone_in_k(self, k1, k2):
        rng = np.random.default_rng(5)
        f = random_field(rng, SMALL_MODES)
        lo, hi = sorted((k1, k2))
        assert sobolev_norm(f, lo) <= sobolev_norm(f, hi) * (1 + 1e-12)


class TestDualPairing:
    def test_bruteforce_oracle(self):
        rng = np.random.default_rng(3)
        nu = random_field(rng, SMALL_MODES)
        phi = random_field(rng, SMALL_MODES)
        acc = 0.0 + 0.0j
        for m in SMALL_MODES:
            a, b = nu.block(m), phi.block(m)
            for r in range(m.dim):
                for c in range(m.dim):
                    acc += (m.two_l + 1) * b[r, c] * a[c, r]
        assert dual_pairing(nu, phi) == pytest.approx(acc, rel=1e-12)

    def test_symmetry_and_disjoint_support(self):
        rng = np.random.default_rng(4)
        nu = random_field(rng, SMALL_MODES)
        phi = random_field(rng, SMALL_MODES)
        assert dual_pairing(nu, phi) == pytest.approx(dual_pairing(phi, nu), rel=1e-12)
        other = random_field(rng, [Mode(5, 0)])
        assert dual_pairing(nu, other) == 0


class TestCausalQuadraticForm:
    def test_single_mode_frozen_value(self):
        # nu(0,0) = [1], delta = [1]: Q = 1 * sqrt(4 pi) * 1
        nu = CoefficientField.from_rows([(0, 0, 0, 0, 1.0, 0.0)], real=True)
        dc = PropagatorSpec(diag={Mode(0, 0): [1.0]})
        assert causal_quadratic_form(nu, dc) == pytest.approx(ROOT_4PI, rel=1e-15)

    def test_componentwise_oracle(self):
        # independent accumulation of nu(n)_ij * sqrt(4pi) delta(n)_jj * nu(-n)_{-i,-j}
        rng = np.random.default_rng(9)
        nu = random_field(rng, SMALL_MODES, real=True)
        dc = random_window_propagator(rng, SMALL_MODES)
        acc = 0.0 + 0.0j
        for m in SMALL_MODES:
            block = nu.block(m)
            refl = nu.block(m.reflected())
            for r in range(m.dim):
                for c in range(m.dim):
                    acc += (
                        (m.two_l + 1)
                        * block[r, c]
                        * ROOT_4PI
                        * dc.values(m)[c]
                        * refl[m.dim - 1 - r, m.dim - 1 - c]
                    )
        got = causal_quadratic_form(nu, dc)
        assert got == pytest.approx(acc, rel=1e-12)
        assert abs(got.imag) < 1e-12 * max(1.0, abs(got))

    def test_real_on_real_fields(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            nu = random_field(rng, SMALL_MODES, real=True)
            dc = random_window_propagator(rng, SMALL_MODES)
            q = causal_quadratic_form(nu, dc)
            assert abs(q.imag) <= 1e-12 * max(1.0, abs(q))

    def test_missing_propagator(self):
        nu = CoefficientField.from_rows([(3, 0, 0, 0, 1.0, 0.0)])
        dc = PropagatorSpec(diag={Mode(0, 0): [1.0]})
        with pytest.raises(MissingPropagator):
            causal_quadratic_form(nu, dc)


class TestPropagatorSpec:
    def test_parity_validation(self):
        with pytest.raises(ValidationError):
            PropagatorSpec(diag={Mode(1, 0): [1.0]})  # partner missing
        with pytest.raises(ValidationError):
            PropagatorSpec(diag={Mode(1, 2): [1.0, 2.0, 3.0], Mode(-1, 2): [1.0, 2.0, 3.0]})
        ok = PropagatorSpec(diag={Mode(1, 2): [1.0, 2.0, 3.0], Mode(-1, 2): [3.0, 2.0, 1.0]})
        assert ok.value(Mode(1, 2), -2) == 1.0
        assert ok.value(Mode(-1, 2), 2) == 1.0

    def test_window_check(self):
        m = Mode(1, 0)
        w = eigenvalue(m)
        dc = PropagatorSpec(diag={m: [w**2], m.reflected(): [w**2]})
        assert propagator_window_ok(dc, m, side="both")
        dc_hi = PropagatorSpec(diag={m: [w**2 * 1.01], m.reflected(): [w**2 * 1.01]})
        assert not propagator_window_ok(dc_hi, m, side="both")
        assert propagator_window_ok(dc_hi, m, side="lower")
        dc_lo = PropagatorSpec(diag={m: [0.9 * w**-4], m.reflected(): [0.9 * w**-4]})
        assert not propagator_window_ok(dc_lo, m, side="lower")
        assert propagator_window_ok(dc_lo, m, side="upper")


class TestBounds:
    def test_equality_case(self):
        # on (0,0) with delta = 1 = omega^2 = omega^-4 both bounds are tight
        nu = CoefficientField.from_rows([(0, 0, 0, 0, 1.0, 0.0)], real=True)
        dc = PropagatorSpec(diag={Mode(0, 0): [1.0]})
        up = upper_bound_check(nu, dc)
        lo = lower_bound_check(nu, dc)
        assert up.holds and lo.holds
        assert up.lhs == pytest.approx(up.rhs, rel=1e-12)
        assert lo.lhs == pytest.approx(lo.rhs, rel=1e-12)

    def test_random_battery(self):
        rng = np.random.default_rng(2024)
        for _ in range(100):
            nu = random_field(rng, SMALL_MODES, real=True, scale=rng.uniform(0.1, 3.0))
            dc = random_window_propagator(rng, SMALL_MODES)
            assert upper_bound_check(nu, dc).holds
            assert lower_bound_check(nu, dc).holds

    def test_admissibility_enforced(self):
        nu = CoefficientField.from_rows([(1, 0, 0, 0, 1.0, 0.0), (-1, 0, 0, 0, 1.0, 0.0)], real=True)
        m = Mode(1, 0)
        bad = PropagatorSpec(
            diag={m: [eigenvalue(m) ** 2 * 2], m.reflected(): [eigenvalue(m) ** 2 * 2]}
        )
        with pytest.raises(AdmissibilityViolation):
            upper_bound_check(nu, bad)
        # the lower bound only needs the lower window side, so it still runs
        assert lower_bound_check(nu, bad).holds


class TestAdmissibleSupport:
    def test_from_cut_and_validate(self):
        pool = [Mode(0, 0), Mode(1, 0), Mode(-1, 0), Mode(5, 0), Mode(-5, 0)]
        dc = PropagatorSpec(
            diag={m: np.ones(m.dim) / eigenvalue(m) for m in pool}
        )
        sup = AdmissibleSupport.from_cut(pool, cut_radius=10.0, asymptotic_threshold=1.0)
        assert Mode(1, 0) in sup
        assert Mode(5, 0) not in sup
        sup.validate(dc, orbit_modes=pool)

    def test_validate_rejects_window_failure(self):
        m = Mode(1, 0)
        pool = [m, m.reflected()]
        dc = PropagatorSpec(
            diag={m: [eigenvalue(m) ** 2 * 3], m.reflected(): [eigenvalue(m) ** 2 * 3]}
        )
        sup = AdmissibleSupport.from_cut(pool, cut_radius=10.0, asymptotic_threshold=1.0)
        with pytest.raises(AdmissibilityViolation):
            sup.validate(dc, orbit_modes=pool)

    def test_validate_rejects_rule_breaks(self):
        m = Mode(1, 0)
        pool = [m, m.reflected()]
        dc = PropagatorSpec(diag={m: [1.0], m.reflected(): [1.0]})
        missing = AdmissibleSupport(frozenset(), cut_radius=10.0, asymptotic_threshold=1.0)
        with pytest.raises(AdmissibilityViolation):
            missing.validate(dc, orbit_modes=pool)
        extra = AdmissibleSupport(frozenset(pool), cut_radius=1.5, asymptotic_threshold=1.0)
        with pytest.raises(AdmissibilityViolation):
            extra.validate(dc, orbit_modes=pool)
