"""Report rows, deterministic CSV serialization, and diagnostic figures.

A report is a flat list of check rows plus provenance (seed, tool version,
fixture hash, flags).  Serialization is deliberately boring: fixed column
order, floats through repr-faithful %.17g, no timestamps, so identical
inputs produce byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

VERSION = "0.1.0"

__all__ = ["VERSION", "CheckRow", "Report"]


def _f(x: float) -> str:
    return f"{float(x):.17g}"


def _c(z: complex) -> str:
    z = complex(z)
    return f"{z.real:.17g}{z.imag:+.17g}j"


@dataclass(frozen=True)
class CheckRow:
    """One verified identity: measured discrepancy against its tolerance.

    ``lhs`` and ``rhs`` are the two routes' values (or the measured error
    and its certificate bound, for checks whose tolerance is itself
    computed); ``err`` <= ``tolerance`` is the pass criterion.
    """

    check_id: str
    fixture: str
    source: str
    lhs: complex
    rhs: complex
    err: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.err <= self.tolerance


@dataclass
class Report:
    fixture_name: str
    suite: str
    seed: int
    config_sha256: str
    flags_text: str
    rows: list[CheckRow] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def n_pass(self) -> int:
        return sum(r.passed for r in self.rows)

    @property
    def n_fail(self) -> int:
        return len(self.rows) - self.n_pass

    @property
    def all_pass(self) -> bool:
        return self.n_fail == 0

    def to_csv(self) -> str:
        lines = [
            f"# eufock-version: {VERSION}",
            f"# fixture: {self.fixture_name}",
            f"# suite: {self.suite}",
            f"# seed: {self.seed}",
            f"# config-sha256: {self.config_sha256}",
            f"# flags: {self.flags_text}",
            "check_id,fixture,source,lhs,rhs,err,tolerance,status",
        ]
        for r in self.rows:
            lines.append(
                ",".join(
                    [
                        r.check_id,
                        r.fixture,
                        r.source,
                        _c(r.lhs),
                        _c(r.rhs),
                        _f(r.err),
                        _f(r.tolerance),
                        "pass" if r.passed else "FAIL",
                    ]
                )
            )
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> Path:
        p = Path(path)
        p.write_text(self.to_csv())
        return p

    def summary_lines(self) -> list[str]:
        width = max((len(r.check_id) for r in self.rows), default=10)
        out = []
        for r in self.rows:
            tag = "pass" if r.passed else "FAIL"
            src = f" [{r.source}]" if r.source else ""
            out.append(
                f"{tag}  {r.check_id:<{width}}  err={r.err:.3e}  "
                f"tol={r.tolerance:.3e}{src}"
            )
        for w in self.warnings:
            out.append(f"warning: {w}")
        out.append(
            f"{self.suite}: {self.n_pass}/{len(self.rows)} checks passed"
            + ("" if self.all_pass else f", {self.n_fail} FAILED")
        )
        return out


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_convergence_figure(path, orders, errors, bounds) -> Path:
    """Partial-sum error and its tail certificate against expansion order."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(orders, [max(e, 1e-18) for e in errors], "o-", label="measured error")
    ax.semilogy(orders, [max(b, 1e-18) for b in bounds], "s--", label="tail bound")
    ax.set_xlabel("expansion order")
    ax.set_ylabel("max-entry deviation from closed form")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def save_extrapolation_figure(path, epsilons, errors, extrapolated_error) -> Path:
    """Regularized-integral error per level and after extrapolation."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(epsilons, [max(e, 1e-18) for e in errors], "o-", label="|value(eps) - limit|")
    ax.axhline(
        max(extrapolated_error, 1e-18),
        color="tab:red",
        linestyle="--",
        label="after extrapolation",
    )
    ax.set_xlabel("regularization epsilon")
    ax.set_ylabel("error")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def save_residual_figure(path, errors, bounds) -> Path:
    """Per-sample symbol discrepancies against their truncation certificates."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    xs = range(len(errors))
    ax.semilogy(xs, [max(e, 1e-18) for e in errors], "o", label="|direct - closed|")
    ax.semilogy(xs, [max(b, 1e-18) for b in bounds], "_", markersize=12, label="remainder bound")
    ax.set_xlabel("sample index")
    ax.set_ylabel("discrepancy")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
