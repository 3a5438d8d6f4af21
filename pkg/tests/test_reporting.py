"""Report rows, CSV stability, and the diagnostic figure writers."""

import numpy as np

from eufock.reporting import (
    CheckRow,
    Report,
    VERSION,
    save_convergence_figure,
    save_extrapolation_figure,
    save_residual_figure,
)


def make_report(rows):
    return Report(
        fixture_name="fx",
        suite="demo",
        seed=11,
        config_sha256="ab" * 32,
        flags_text="tol-scale=1",
        rows=rows,
    )


def test_row_pass_boundary_is_inclusive():
    assert CheckRow("c", "f", "", 0, 0, 1e-9, 1e-9).passed
    assert not CheckRow("c", "f", "", 0, 0, 1.0000001e-9, 1e-9).passed


def test_csv_carries_provenance_and_status():
    rows = [
        CheckRow("alpha-check", "fx", "src", 1 + 2j, 1 + 2j, 0.0, 1e-10),
        CheckRow("beta-check", "fx", "", 3.0, 2.0, 1.0, 1e-10),
    ]
    text = make_report(rows).to_csv()
    lines = text.splitlines()
    assert lines[0] == f"# eufock-version: {VERSION}"
    assert "# seed: 11" in lines
    assert lines[6] == "check_id,fixture,source,lhs,rhs,err,tolerance,status"
    assert lines[7].startswith("alpha-check,fx,src,1+2j,")
    assert lines[7].endswith(",pass")
    assert lines[8].endswith(",FAIL")
    assert text.endswith("\n")


def test_csv_is_repr_faithful():
    val = 0.1 + 0.2  # not exactly 0.3
    row = CheckRow("c", "f", "", val, 0.3, abs(val - 0.3), 1e-12)
    text = make_report([row]).to_csv()
    assert "0.30000000000000004" in text


def test_counts_and_summary():
    rows = [
        CheckRow("a", "f", "", 0, 0, 0.0, 0.0),
        CheckRow("b", "f", "", 0, 0, 2.0, 1.0),
    ]
    rep = make_report(rows)
    assert rep.n_pass == 1 and rep.n_fail == 1 and not rep.all_pass
    lines = rep.summary_lines()
    assert any(line.startswith("FAIL") for line in lines)
    assert lines[-1] == "demo: 1/2 checks passed, 1 FAILED"


def test_figure_writers_produce_png(tmp_path):
    orders = list(range(7))
    errors = [10.0 ** (-n) for n in orders]
    bounds = [5 * 10.0 ** (-n) for n in orders]
    eps = [0.1 / 2**j for j in range(5)]
    p1 = tmp_path / "conv.png"
    p2 = tmp_path / "extra.png"
    p3 = tmp_path / "resid.png"
    save_convergence_figure(p1, orders, errors, bounds)
    save_extrapolation_figure(p2, eps, errors[:5], 1e-9)
    save_residual_figure(p3, np.array(errors), np.array(bounds))
    for p in (p1, p2, p3):
        assert p.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
