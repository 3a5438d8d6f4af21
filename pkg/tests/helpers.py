"""Shared random-fixture builders for the test modules."""

import numpy as np

from eufock.modes import CoefficientField, Mode, PropagatorSpec, eigenvalue


def orbit_closure(modes) -> list[Mode]:
    return sorted(set(modes) | {m.reflected() for m in modes})


def random_source_field(rng, modes, real=True, scale=1.0) -> CoefficientField:
    """Random coefficient field on the reflection closure of ``modes``.

    With real=True the negative-n blocks are overwritten by the reality
    constraint and n = 0 blocks are symmetrized.
    """
    closure = orbit_closure(modes)
    entries = {}
    for m in closure:
        entries[m] = scale * (
            rng.standard_normal((m.dim, m.dim))
            + 1j * rng.standard_normal((m.dim, m.dim))
        )
    if real:
        for m in closure:
            if m.n > 0:
                entries[m.reflected()] = np.conj(entries[m])[::-1, ::-1]
            elif m.n == 0:
                entries[m] = 0.5 * (entries[m] + np.conj(entries[m])[::-1, ::-1])
    return CoefficientField(entries=entries, real=real)


def random_window_propagator(rng, modes) -> PropagatorSpec:
    """Positive diagonal propagator inside the admissibility window.

    Values are drawn log-uniformly from [omega^-4, omega^2] per entry and
    mirrored onto the reflected mode so the parity constraint holds.
    """
    diag = {}
    for m in orbit_closure(modes):
        if m in diag:
            continue
        w = eigenvalue(m)
        v = np.exp(rng.uniform(np.log(w**-4), np.log(w**2), size=m.dim))
        if m.n == 0:
            v = np.minimum(v, v[::-1])  # palindromic, still inside the window
        diag[m] = v
        diag[m.reflected()] = v[::-1]
    return PropagatorSpec(diag=diag)
