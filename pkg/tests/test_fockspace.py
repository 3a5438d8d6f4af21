"""Tests for the truncated Fock space and field coefficient operators."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eufock.errors import SizeLimit, UnknownLabel, ValidationError
from eufock.fockspace import (
    FockContext,
    FockOperator,
    KernelVector,
    OrbitSpec,
    ParticleLabel,
    bilinear_pairing,
    coherent_vector,
    field_coefficient,
    kernel_operator,
    vacuum_expectation,
    wick_power,
)
from eufock.modes import ROOT_4PI, Mode, eigenvalue


def small_context(cutoff=4):
    spec = OrbitSpec.default([Mode(1, 0)])
    return FockContext.from_orbits(spec, cutoff), spec


def random_orbit_spec(rng, canonical_modes, n_systems=None):
    """Systems with independent random matrices on each signed mode."""
    systems = {}
    for m in canonical_modes:
        can = m.canonical()
        count = n_systems or can.dim**2
        for mm in {can, can.reflected()}:
            systems[mm] = rng.standard_normal(
                (count, can.dim, can.dim)
            ) + 1j * rng.standard_normal((count, can.dim, can.dim))
    return OrbitSpec(systems=systems)


# ---------------------------------------------------------------------------
# Basis and ladder matrices


def test_basis_dimension_and_vacuum():
    labels = [ParticleLabel(Mode(0, 0), 0), ParticleLabel(Mode(1, 0), 0)]
    for cutoff in range(5):
        ctx = FockContext.build(labels, cutoff)
        assert ctx.dim == math.comb(len(labels) + cutoff, cutoff)
        assert ctx.basis[0] == (0, 0)
        assert np.argmax(np.abs(ctx.vacuum())) == 0


def test_basis_graded_order():
    ctx = FockContext.build([ParticleLabel(Mode(0, 0), s) for s in range(3)], 3)
    grades = [sum(k) for k in ctx.basis]
    assert grades == sorted(grades)


def test_size_limit():
    labels = [ParticleLabel(Mode(0, 0), s) for s in range(40)]
    with pytest.raises(SizeLimit):
        FockContext.build(labels, 12)


def test_ccr_below_top_shell():
    ctx, _ = small_context(cutoff=5)
    lbl = ctx.labels[0]
    a = ctx.annihilator(lbl)
    comm = a @ a.T - a.T @ a
    interior = ctx.grades <= ctx.cutoff - 1
    defect = comm - np.eye(ctx.dim)
    assert np.max(np.abs(defect[np.ix_(interior, interior)])) < 1e-14
    # the commutator necessarily fails on the top shell
    assert np.max(np.abs(defect)) > 0.5


def test_ccr_mixed_labels():
    labels = [ParticleLabel(Mode(0, 0), 0), ParticleLabel(Mode(1, 0), 0)]
    ctx = FockContext.build(labels, 4)
    a0, a1 = ctx.annihilator(labels[0]), ctx.annihilator(labels[1])
    assert np.max(np.abs(a0 @ a1 - a1 @ a0)) < 1e-14
    interior = ctx.grades <= ctx.cutoff - 1
    cross = a0 @ a1.T - a1.T @ a0
    assert np.max(np.abs(cross[np.ix_(interior, interior)])) < 1e-14


def test_creator_is_transpose():
    ctx, _ = small_context()
    lbl = ctx.labels[0]
    assert np.array_equal(ctx.creator(lbl), ctx.annihilator(lbl).T)


def test_unknown_label():
    ctx, _ = small_context()
    with pytest.raises(UnknownLabel):
        ctx.annihilator(ParticleLabel(Mode(7, 0), 0))


def test_operator_context_mismatch():
    ctx1, _ = small_context(cutoff=2)
    ctx2, _ = small_context(cutoff=3)
    with pytest.raises(ValidationError):
        _ = ctx1.identity_op() + ctx2.identity_op()


# ---------------------------------------------------------------------------
# Orbit systems and field coefficients


def test_default_system_complete():
    spec = OrbitSpec.default([Mode(2, 3)])
    for m in (Mode(2, 3), Mode(-2, 3)):
        assert spec.completeness_defect(m) < 1e-14


def test_orbit_spec_requires_reflection():
    with pytest.raises(ValidationError):
        OrbitSpec(systems={Mode(1, 0): np.zeros((1, 1, 1))})


def test_field_hermiticity_any_system():
    # phi(refl m)_{-i,-j} must be the adjoint of phi(m)_{i j} for
    # arbitrary systems, not only the default one
    rng = np.random.default_rng(31)
    spec = random_orbit_spec(rng, [Mode(1, 1)], n_systems=3)
    ctx = FockContext.from_orbits(spec, 3)
    m = Mode(1, 1)
    for two_i in m.two_i_values():
        for two_j in m.two_i_values():
            op = field_coefficient(ctx, spec, m, two_i, two_j)
            refl = field_coefficient(ctx, spec, m.reflected(), -two_i, -two_j)
            assert np.max(np.abs(refl.mat - np.conj(op.mat).T)) < 1e-12


def test_field_unsupported_mode_is_zero():
    ctx, spec = small_context()
    op = field_coefficient(ctx, spec, Mode(3, 2), 0, 2)
    assert np.max(np.abs(op.mat)) == 0.0


def test_two_point_function_contraction():
    # vacuum expectation of phi(m)_{i j} phi(m')_{i' j'} reduces, by one
    # CCR contraction, to the system overlap
    #   pref * pref' * sum_s u_s(m)_{i j} conj(u_s(refl m')_{-i',-j'})
    # whenever the orbits agree, and vanishes otherwise.
    rng = np.random.default_rng(8)
    spec = random_orbit_spec(rng, [Mode(1, 1), Mode(2, 0)], n_systems=2)
    ctx = FockContext.from_orbits(spec, 2)
    modes = [Mode(1, 1), Mode(-1, 1), Mode(2, 0), Mode(-2, 0)]
    for m in modes:
        for mp in modes:
            for two_i in m.two_i_values():
                for two_ip in mp.two_i_values():
                    op1 = field_coefficient(ctx, spec, m, two_i, m.two_l)
                    op2 = field_coefficient(ctx, spec, mp, two_ip, -mp.two_l)
                    got = vacuum_expectation(op1 @ op2)
                    if m.canonical() != mp.canonical():
                        assert abs(got) < 1e-14
                        continue
                    u_m = spec.system(m)
                    u_r = spec.system(mp.reflected())
                    row_m = m.index_of(two_i)
                    col_m = m.index_of(m.two_l)
                    row_r = mp.dim - 1 - mp.index_of(two_ip)
                    col_r = mp.dim - 1 - mp.index_of(-mp.two_l)
                    overlap = np.sum(
                        u_m[:, row_m, col_m] * np.conj(u_r[:, row_r, col_r])
                    )
                    pref = (ROOT_4PI / m.weight) * (ROOT_4PI / mp.weight)
                    assert abs(got - pref * overlap) < 1e-12


def test_default_two_point_diagonal():
    # with the default system the contraction collapses to
    # 4 pi / (2l+1)^3 at matching indices
    m = Mode(1, 1)
    spec = OrbitSpec.default([m])
    ctx = FockContext.from_orbits(spec, 2)
    op1 = field_coefficient(ctx, spec, m, -1, 1)
    op2 = field_coefficient(ctx, spec, m.reflected(), 1, -1)
    got = vacuum_expectation(op1 @ op2)
    assert abs(got - 4.0 * math.pi / m.weight**3) < 1e-14
    op3 = field_coefficient(ctx, spec, m.reflected(), -1, -1)
    assert abs(vacuum_expectation(op1 @ op3)) < 1e-14


# ---------------------------------------------------------------------------
# Kernel vectors, Wick powers, coherent vectors


def test_kernel_vector_norms_and_pairing():
    lbl1 = ParticleLabel(Mode(0, 0), 0)
    lbl2 = ParticleLabel(Mode(2, 2), 3)
    xi = KernelVector({lbl1: 2.0, lbl2: 1.0 - 1.0j})
    eta = KernelVector({lbl2: 0.5j})
    assert xi.pairing(eta) == (1.0 - 1.0j) * 0.5j
    assert eta.pairing(xi) == xi.pairing(eta)
    w = eigenvalue(Mode(2, 2))
    assert abs(xi.norm(0) ** 2 - (4.0 + 2.0)) < 1e-14
    assert abs(xi.norm(1) ** 2 - (4.0 * eigenvalue(Mode(0, 0)) ** 2 + 2.0 * w**2)) < 1e-12
    assert abs(xi.norm(-1) ** 2 - (4.0 / eigenvalue(Mode(0, 0)) ** 2 + 2.0 / w**2)) < 1e-14


def test_kernel_operator_hermitian_iff_conjugate():
    ctx, _ = small_context(cutoff=3)
    lbl = ctx.labels[0]
    kappa01 = KernelVector({lbl: 1.5 - 0.5j})
    op = kernel_operator(ctx, kappa01, kappa01.conjugated())
    assert op.hermiticity_defect() < 1e-14
    skew = kernel_operator(ctx, kappa01, kappa01.scaled(2.0))
    assert skew.hermiticity_defect() > 0.1


def test_wick_power_low_orders():
    ctx, _ = small_context(cutoff=5)
    lbl = ctx.labels[0]
    kappa01 = KernelVector({lbl: 0.7 + 0.2j})
    kappa10 = KernelVector({lbl: -0.3 + 1.1j})
    lower = kernel_operator(ctx, kappa01, KernelVector.zero()).mat
    upper = kernel_operator(ctx, KernelVector.zero(), kappa10).mat
    assert np.max(np.abs(wick_power(ctx, kappa01, kappa10, 0).mat - np.eye(ctx.dim))) < 1e-14
    w1 = wick_power(ctx, kappa01, kappa10, 1).mat
    assert np.max(np.abs(w1 - (lower + upper))) < 1e-14
    w2 = wick_power(ctx, kappa01, kappa10, 2).mat
    expect = upper @ upper + 2.0 * upper @ lower + lower @ lower
    assert np.max(np.abs(w2 - expect)) < 1e-13


def test_wick_power_vacuum_moments():
    # <0| :X^n: |0> = 0 for n >= 1 by normal ordering
    ctx, _ = small_context(cutoff=6)
    lbl = ctx.labels[0]
    kappa01 = KernelVector({lbl: 0.9 - 0.4j})
    kappa10 = KernelVector({lbl: 0.25 + 0.6j})
    for n in range(1, 5):
        assert abs(vacuum_expectation(wick_power(ctx, kappa01, kappa10, n))) < 1e-14


def test_coherent_pairing_matches_truncated_exponential():
    labels = [ParticleLabel(Mode(0, 0), 0), ParticleLabel(Mode(1, 0), 0)]
    ctx = FockContext.build(labels, 9)
    xi = KernelVector({labels[0]: 0.4 + 0.3j, labels[1]: -0.2j})
    eta = KernelVector({labels[0]: 1.1, labels[1]: 0.5 - 0.1j})
    got = bilinear_pairing(coherent_vector(ctx, xi), coherent_vector(ctx, eta))
    z = xi.pairing(eta)
    truncated = sum(z**k / math.factorial(k) for k in range(ctx.cutoff + 1))
    assert abs(got - truncated) < 1e-14
    tail = abs(z) ** (ctx.cutoff + 1) / math.factorial(ctx.cutoff + 1) * math.exp(abs(z))
    assert abs(got - np.exp(z)) <= tail + 1e-15


@settings(max_examples=25, deadline=None)
@given(
    re=st.floats(min_value=-1.0, max_value=1.0),
    im=st.floats(min_value=-1.0, max_value=1.0),
)
def test_coherent_vector_is_truncated_eigenvector(re, im):
    ctx, _ = small_context(cutoff=7)
    lbl = ctx.labels[0]
    xi = KernelVector({lbl: re + 1j * im})
    vec = coherent_vector(ctx, xi)
    diff = ctx.annihilator(lbl) @ vec - (re + 1j * im) * vec
    interior = ctx.grades <= ctx.cutoff - 1
    assert np.max(np.abs(diff[interior])) < 1e-12


def test_coherent_vector_unknown_label():
    ctx, _ = small_context()
    with pytest.raises(UnknownLabel):
        coherent_vector(ctx, KernelVector({ParticleLabel(Mode(9, 0), 0): 1.0}))


def test_vacuum_expectation_is_corner_entry():
    ctx, _ = small_context(cutoff=3)
    mat = np.arange(ctx.dim * ctx.dim, dtype=float).reshape(ctx.dim, ctx.dim)
    assert vacuum_expectation(FockOperator(ctx, mat)) == mat[0, 0]
