"""Fixture files: one structured text file per verification scenario.

A fixture bundles everything a suite run needs: the orbit (modes plus
ladder-weight systems), the causal propagator diagonal, the admissible
support, a Fock cutoff, and a list of real source fields.  The format is
YAML with a versioned ``schema`` marker; the file's SHA-256 is recorded in
reports so a result row can be traced to exact input bytes.

Only canonical (n >= 0) blocks are stored.  The loader mirrors the
propagator by parity and real sources by the reality constraint, then
validates every cross-reference: block shapes, support closure, propagator
coverage, reality defects.  Admissibility against the propagator window is
evaluated here too, but recorded rather than enforced; individual checks
decide which window side they require.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .errors import ParseError, ToolkitError, ValidationError
from .fockspace import FockContext, OrbitSpec, ParticleLabel
from .modes import (
    AdmissibleSupport,
    CoefficientField,
    Mode,
    PropagatorSpec,
    propagator_window_ok,
)

SCHEMA = "eufock-fixture/1"

__all__ = [
    "SCHEMA",
    "Fixture",
    "load_fixture",
    "loads_fixture",
    "emit_fixture",
    "template_names",
]


@dataclass
class Fixture:
    name: str
    orbit: OrbitSpec
    propagator: PropagatorSpec
    support: AdmissibleSupport
    sources: list[tuple[str, CoefficientField]]
    cutoff: int
    labels: list[ParticleLabel]
    sha256: str
    upper_window_ok: bool
    lower_window_ok: bool

    def fock_context(self, cutoff: int | None = None) -> FockContext:
        return FockContext.build(self.labels, self.cutoff if cutoff is None else cutoff)


def _need(mapping, key, path):
    if not isinstance(mapping, dict) or key not in mapping:
        raise ValidationError(f"fixture.{path}: missing required key '{key}'")
    return mapping[key]


def _mode_of(entry, path) -> Mode:
    n = _need(entry, "n", path)
    two_l = _need(entry, "two_l", path)
    if not isinstance(n, int) or not isinstance(two_l, int):
        raise ValidationError(f"fixture.{path}: n and two_l must be integers")
    try:
        return Mode(n, two_l)
    except ValidationError as exc:
        raise ValidationError(f"fixture.{path}: {exc}") from exc


def _matrix_of(entry, mode, path) -> np.ndarray:
    re = np.asarray(_need(entry, "re", path), dtype=float)
    im = np.asarray(_need(entry, "im", path), dtype=float)
    if re.shape != (mode.dim, mode.dim) or im.shape != (mode.dim, mode.dim):
        raise ValidationError(
            f"fixture.{path}: block for {mode} needs shape "
            f"({mode.dim}, {mode.dim}), got {re.shape} / {im.shape}"
        )
    return re + 1j * im


def loads_fixture(text: str, origin: str = "<string>") -> Fixture:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ParseError(f"{origin}: invalid YAML{where}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{origin}: fixture document must be a mapping")
    if doc.get("schema") != SCHEMA:
        raise ParseError(
            f"{origin}: unsupported schema {doc.get('schema')!r}, expected {SCHEMA!r}"
        )
    name = _need(doc, "name", "name")

    orbit_doc = _need(doc, "orbit", "orbit")
    mode_entries = _need(orbit_doc, "modes", "orbit.modes")
    canonical = []
    for pos, entry in enumerate(mode_entries):
        m = _mode_of(entry, f"orbit.modes[{pos}]")
        if m.n < 0:
            raise ValidationError(
                f"fixture.orbit.modes[{pos}]: store canonical modes only, got {m}"
            )
        canonical.append(m)
    if len(set(canonical)) != len(canonical):
        raise ValidationError("fixture.orbit.modes: duplicate mode")

    systems_doc = orbit_doc.get("systems", "default")
    if systems_doc == "default":
        orbit = OrbitSpec.default(canonical)
    else:
        systems = {}
        for pos, entry in enumerate(systems_doc):
            path = f"orbit.systems[{pos}]"
            m = _mode_of(entry, path)
            mats = [
                _matrix_of(md, m, f"{path}.matrices[{j}]")
                for j, md in enumerate(_need(entry, "matrices", path))
            ]
            stack = np.stack(mats)
            systems[m] = stack
            systems[m.reflected()] = stack
        missing = set(canonical) - {m for m in systems if m.n >= 0}
        if missing:
            raise ValidationError(
                f"fixture.orbit.systems: no system for {sorted(missing)}"
            )
        orbit = OrbitSpec(systems=systems)

    diag = {}
    for pos, entry in enumerate(_need(doc, "propagator", "propagator")):
        path = f"propagator[{pos}]"
        m = _mode_of(entry, path)
        if m.n < 0:
            raise ValidationError(f"fixture.{path}: store canonical modes only")
        values = np.asarray(_need(entry, "values", path), dtype=float)
        if values.shape != (m.dim,):
            raise ValidationError(
                f"fixture.{path}: {m} needs {m.dim} diagonal values"
            )
        diag[m] = values
        diag[m.reflected()] = values[::-1]
    try:
        propagator = PropagatorSpec(diag=diag)
    except ValidationError as exc:
        raise ValidationError(f"fixture.propagator: {exc}") from exc

    sources = []
    for pos, entry in enumerate(doc.get("sources", [])):
        path = f"sources[{pos}]"
        src_name = _need(entry, "name", path)
        real = bool(entry.get("real", True))
        entries = {}
        for j, block in enumerate(_need(entry, "blocks", path)):
            bpath = f"{path}.blocks[{j}]"
            m = _mode_of(block, bpath)
            if real and m.n < 0:
                raise ValidationError(
                    f"fixture.{bpath}: real sources store canonical blocks only"
                )
            if m in entries:
                raise ValidationError(f"fixture.{bpath}: duplicate block for {m}")
            entries[m] = _matrix_of(block, m, bpath)
        if real:
            for m in list(entries):
                if m.n > 0:
                    entries[m.reflected()] = np.conj(entries[m])[::-1, ::-1]
        field = CoefficientField(entries=entries, real=real)
        if real:
            try:
                field.validate_reality(tol=1e-9)
            except ValidationError as exc:
                raise ValidationError(f"fixture.{path}: {exc}") from exc
        sources.append((src_name, field))

    support_doc = _need(doc, "support", "support")
    pool = set(orbit.systems) | {
        m for _, f in sources for m in f.support()
    }
    support = AdmissibleSupport.from_cut(
        pool,
        float(_need(support_doc, "cut_radius", "support.cut_radius")),
        float(
            _need(support_doc, "asymptotic_threshold", "support.asymptotic_threshold")
        ),
    )
    try:
        support.validate(propagator, orbit_modes=set(orbit.systems))
    except ValidationError:
        raise
    except ToolkitError as exc:
        raise ValidationError(f"fixture.support: {exc}") from exc
    for src_name, field in sources:
        stray = [m for m in sorted(field.support()) if m not in support]
        if stray:
            raise ValidationError(
                f"fixture.sources[{src_name}]: modes {stray} outside the support"
            )
        uncovered = [
            m for m in sorted(field.support()) if m not in propagator.domain()
        ]
        if uncovered:
            raise ValidationError(
                f"fixture.sources[{src_name}]: no propagator values for {uncovered}"
            )

    fock_doc = _need(doc, "fock", "fock")
    cutoff = _need(fock_doc, "cutoff", "fock.cutoff")
    if not isinstance(cutoff, int) or cutoff < 0:
        raise ValidationError("fixture.fock.cutoff: need a nonnegative integer")
    if "labels" in fock_doc:
        labels = []
        for pos, entry in enumerate(fock_doc["labels"]):
            path = f"fock.labels[{pos}]"
            m = _mode_of(entry, path)
            s = _need(entry, "s", path)
            label = ParticleLabel(mode=m, s=s)
            if label not in orbit.labels():
                raise ValidationError(f"fixture.{path}: {label} not in the orbit")
            labels.append(label)
    else:
        labels = orbit.labels()

    support_modes = sorted(support.modes)
    return Fixture(
        name=name,
        orbit=orbit,
        propagator=propagator,
        support=support,
        sources=sources,
        cutoff=cutoff,
        labels=labels,
        sha256=hashlib.sha256(text.encode()).hexdigest(),
        upper_window_ok=all(
            propagator_window_ok(propagator, m, side="upper") for m in support_modes
        ),
        lower_window_ok=all(
            propagator_window_ok(propagator, m, side="lower") for m in support_modes
        ),
    )


def load_fixture(path) -> Fixture:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read fixture {p}: {exc}") from exc
    return loads_fixture(text, origin=str(p))


_MASSIVE_SCALAR_SMALL = """\
# Small massive-scalar verification fixture: two canonical modes with the
# default ladder-weight systems.  Propagator diagonal is 1/(2 omega),
# inside the two-sided window [omega^-4, omega^2] on every mode:
#   (n=1, two_l=1): omega = 2.75, value 0.1818181818
#   (n=2, two_l=0): omega = 5,    value 0.1
schema: eufock-fixture/1
name: massive-scalar-small
fock:
  cutoff: 4
orbit:
  modes:
    - {n: 1, two_l: 1}
    - {n: 2, two_l: 0}
  systems: default
propagator:
  - {n: 1, two_l: 1, values: [0.1818181818, 0.1818181818]}
  - {n: 2, two_l: 0, values: [0.1]}
support:
  cut_radius: 30.0
  asymptotic_threshold: 1.0
sources:
  - name: pulse-a
    real: true
    blocks:
      - n: 1
        two_l: 1
        re:
          - [-0.0431783727, 0.0482008366]
          - [-0.0824231408, -0.0166045906]
        im:
          - [-0.021864692, -0.0864259353]
          - [-0.00551694435, 0.0821727538]
      - n: 2
        two_l: 0
        re:
          - [-0.0170063669]
        im:
          - [-0.060380167]
  - name: pulse-b
    real: true
    blocks:
      - n: 1
        two_l: 1
        re:
          - [-0.105130362, 0.0277656847]
          - [0.0247428243, -0.0684417815]
        im:
          - [0.0428678271, 0.117766003]
          - [-0.0426650704, 0.0155744693]
      - n: 2
        two_l: 0
        re:
          - [0.0275394675]
        im:
          - [0.0388654936]
"""

_TWO_MODE = """\
# Two-mode fixture exercising an n = 0 block (reflection acts inside the
# block, so its propagator diagonal is palindromic and source blocks obey
# the internal reality constraint).
#   (n=0, two_l=1): omega = 1.75, value 0.2857142857
#   (n=1, two_l=0): omega = 2,    value 0.25
schema: eufock-fixture/1
name: two-mode
fock:
  cutoff: 4
orbit:
  modes:
    - {n: 0, two_l: 1}
    - {n: 1, two_l: 0}
  systems: default
propagator:
  - {n: 0, two_l: 1, values: [0.2857142857, 0.2857142857]}
  - {n: 1, two_l: 0, values: [0.25]}
support:
  cut_radius: 20.0
  asymptotic_threshold: 1.0
sources:
  - name: blend-a
    real: true
    blocks:
      - n: 0
        two_l: 1
        re:
          - [0.0224941781, -0.0132412231]
          - [-0.0132412231, 0.0224941781]
        im:
          - [-0.0435065239, 0.00922090014]
          - [-0.00922090014, 0.0435065239]
      - n: 1
        two_l: 0
        re:
          - [-0.0698681806]
        im:
          - [0.0640187395]
  - name: blend-b
    real: true
    blocks:
      - n: 0
        two_l: 1
        re:
          - [0.0215767939, 0.0596194911]
          - [0.0596194911, 0.0215767939]
        im:
          - [-0.0677782201, 0.141254953]
          - [-0.141254953, 0.0677782201]
      - n: 1
        two_l: 0
        re:
          - [-0.0502165857]
        im:
          - [-0.0267481365]
"""

_HALFINTEGER_L = """\
# Half-integer weight fixture: two_l odd on both modes, including a
# four-dimensional n = 0 block.  The low cutoff keeps the Fock dimension
# small: the twenty default ladder labels already span a large basis.
#   (n=1, two_l=1): l = 1/2, omega = 2.75, value 0.1818181818
#   (n=0, two_l=3): l = 3/2, omega = 4.75, value 0.1052631579
schema: eufock-fixture/1
name: halfinteger-l
fock:
  cutoff: 2
orbit:
  modes:
    - {n: 0, two_l: 3}
    - {n: 1, two_l: 1}
  systems: default
propagator:
  - n: 0
    two_l: 3
    values: [0.1052631579, 0.1052631579, 0.1052631579, 0.1052631579]
  - n: 1
    two_l: 1
    values: [0.1818181818, 0.1818181818]
support:
  cut_radius: 25.0
  asymptotic_threshold: 1.0
sources:
  - name: spinor-a
    real: true
    blocks:
      - n: 0
        two_l: 3
        re:
          - [0.0569172491, 0.00173102739, -0.00658307855, -0.0557119812]
          - [0.0641899691, -0.0356132351, 0.0214600485, -0.042021222]
          - [-0.042021222, 0.0214600485, -0.0356132351, 0.0641899691]
          - [-0.0557119812, -0.00658307855, 0.00173102739, 0.0569172491]
        im:
          - [-0.0239081995, -0.0414335309, -0.0041834118, 0.0165966259]
          - [0.0476613195, 0.0477823732, -0.048006626, -0.00176952408]
          - [0.00176952408, 0.048006626, -0.0477823732, -0.0476613195]
          - [-0.0165966259, 0.0041834118, 0.0414335309, 0.0239081995]
      - n: 1
        two_l: 1
        re:
          - [0.0494464838, -0.0406167292]
          - [0.0351597432, -0.0750131719]
        im:
          - [-0.0375847307, -0.115040013]
          - [0.0127344721, -0.0116460114]
"""

_TEMPLATES = {
    "massive-scalar-small": _MASSIVE_SCALAR_SMALL,
    "two-mode": _TWO_MODE,
    "halfinteger-l": _HALFINTEGER_L,
}


def template_names() -> list[str]:
    return sorted(_TEMPLATES)


def emit_fixture(template: str, path) -> Path:
    """Write the named bundled template; returns the path written."""
    if template not in _TEMPLATES:
        raise ValidationError(
            f"unknown template {template!r}; available: {', '.join(template_names())}"
        )
    p = Path(path)
    p.write_text(_TEMPLATES[template])
    return p
