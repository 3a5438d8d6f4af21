"""Fixture format: templates, loader validation, and diagnostics."""

import hashlib

import numpy as np
import pytest

from eufock.errors import ParseError, ValidationError
from eufock.fixtures import (
    SCHEMA,
    emit_fixture,
    load_fixture,
    loads_fixture,
    template_names,
)
from eufock.modes import Mode


MINIMAL = """\
schema: eufock-fixture/1
name: tiny
orbit:
  modes:
    - {n: 1, two_l: 1}
propagator:
  - {n: 1, two_l: 1, values: [0.25, 0.2]}
support:
  cut_radius: 30.0
  asymptotic_threshold: 1.0
fock:
  cutoff: 2
sources:
  - name: poke
    blocks:
      - n: 1
        two_l: 1
        re: [[0.1, 0.0], [0.0, -0.05]]
        im: [[0.0, 0.02], [-0.02, 0.0]]
"""


def test_template_names_are_the_documented_three():
    assert template_names() == ["halfinteger-l", "massive-scalar-small", "two-mode"]


@pytest.mark.parametrize("template", template_names())
def test_templates_load_and_are_admissible(template, tmp_path):
    path = tmp_path / f"{template}.yaml"
    emit_fixture(template, path)
    fx = load_fixture(path)
    assert fx.name == template
    assert fx.sources
    assert fx.upper_window_ok and fx.lower_window_ok
    for m in fx.orbit.canonical_modes():
        assert m in fx.support
    # the recorded hash is the hash of the exact bytes on disk
    assert fx.sha256 == hashlib.sha256(path.read_bytes()).hexdigest()


def test_emit_is_deterministic(tmp_path):
    a = tmp_path / "a.yaml"
    b = tmp_path / "b.yaml"
    emit_fixture("two-mode", a)
    emit_fixture("two-mode", b)
    assert a.read_bytes() == b.read_bytes()


def test_two_mode_round_trips_through_loader(tmp_path):
    path = tmp_path / "fx.yaml"
    emit_fixture("two-mode", path)
    first = load_fixture(path)
    second = loads_fixture(path.read_text(), origin=str(path))
    assert first.sha256 == second.sha256
    assert [n for n, _ in first.sources] == [n for n, _ in second.sources]
    for (_, f1), (_, f2) in zip(first.sources, second.sources):
        for m in f1.support():
            np.testing.assert_array_equal(f1.block(m), f2.block(m))


def test_unknown_template_lists_choices(tmp_path):
    with pytest.raises(ValidationError, match="massive-scalar-small"):
        emit_fixture("nope", tmp_path / "x.yaml")


def test_minimal_fixture_loads():
    fx = loads_fixture(MINIMAL)
    assert fx.name == "tiny"
    assert fx.cutoff == 2
    assert [n for n, _ in fx.sources] == ["poke"]
    nu = fx.sources[0][1]
    assert nu.real
    # the loader mirrors the canonical block onto the reflected mode
    m = Mode(1, 1)
    np.testing.assert_allclose(
        nu.block(m.reflected()), np.conj(nu.block(m))[::-1, ::-1]
    )


def test_sources_are_optional():
    text = MINIMAL.split("sources:")[0]
    fx = loads_fixture(text)
    assert fx.sources == []


def test_invalid_yaml_reports_position():
    with pytest.raises(ParseError, match="line"):
        loads_fixture("schema: [unclosed")


def test_wrong_schema_rejected():
    with pytest.raises(ParseError, match="unsupported schema"):
        loads_fixture(MINIMAL.replace(SCHEMA, "eufock-fixture/9"))


def test_missing_propagator_key_is_named():
    broken = MINIMAL.replace("propagator:", "propagator_oops:")
    with pytest.raises(ValidationError, match="propagator"):
        loads_fixture(broken)


def test_block_shape_mismatch_names_the_path():
    broken = MINIMAL.replace(
        "re: [[0.1, 0.0], [0.0, -0.05]]", "re: [[0.1, 0.0]]"
    )
    with pytest.raises(ValidationError, match=r"sources\[0\].blocks\[0\]"):
        loads_fixture(broken)


def test_reality_violation_detected():
    # an n = 0 block must be mirror symmetric once flagged real
    text = """\
schema: eufock-fixture/1
name: bad-reality
orbit:
  modes:
    - {n: 0, two_l: 2}
propagator:
  - {n: 0, two_l: 2, values: [0.3, 0.25, 0.3]}
support:
  cut_radius: 30.0
  asymptotic_threshold: 1.0
fock:
  cutoff: 1
sources:
  - name: crooked
    blocks:
      - n: 0
        two_l: 2
        re: [[0.1, 0, 0], [0, 0, 0], [0, 0, 0.2]]
        im: [[0, 0, 0], [0, 0, 0], [0, 0, 0]]
"""
    with pytest.raises(ValidationError, match="reality"):
        loads_fixture(text)


def test_source_mode_outside_support_rejected():
    # cut radius below the mode eigenvalue (2.75) evicts the orbit mode
    broken = MINIMAL.replace("cut_radius: 30.0", "cut_radius: 2.0")
    with pytest.raises(ValidationError):
        loads_fixture(broken)


def test_source_mode_without_propagator_rejected():
    text = MINIMAL.replace(
        "      - n: 1\n        two_l: 1\n",
        "      - n: 2\n        two_l: 0\n",
    ).replace(
        "re: [[0.1, 0.0], [0.0, -0.05]]\n        im: [[0.0, 0.02], [-0.02, 0.0]]",
        "re: [[0.1]]\n        im: [[0.0]]",
    )
    with pytest.raises(ValidationError):
        loads_fixture(text)


def test_negative_cutoff_rejected():
    with pytest.raises(ValidationError, match="cutoff"):
        loads_fixture(MINIMAL.replace("cutoff: 2", "cutoff: -1"))


def test_label_subset_selection():
    text = MINIMAL.replace(
        "fock:\n  cutoff: 2",
        "fock:\n  cutoff: 2\n  labels:\n    - {n: 1, two_l: 1, s: 0}\n"
        "    - {n: 1, two_l: 1, s: 3}",
    )
    fx = loads_fixture(text)
    assert len(fx.labels) == 2
    assert fx.fock_context().dim == 6  # two labels, cutoff 2


def test_unknown_label_rejected():
    text = MINIMAL.replace(
        "fock:\n  cutoff: 2",
        "fock:\n  cutoff: 2\n  labels:\n    - {n: 1, two_l: 1, s: 9}",
    )
    with pytest.raises(ValidationError, match="labels"):
        loads_fixture(text)


def test_template_context_dimensions(tmp_path):
    path = tmp_path / "fx.yaml"
    emit_fixture("massive-scalar-small", path)
    fx = load_fixture(path)
    # five labels (4 + 1 systems) at cutoff 4
    assert len(fx.labels) == 5
    assert fx.fock_context().dim == 126
    assert fx.fock_context(cutoff=1).dim == 6
