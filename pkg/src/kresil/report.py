"""Figure rendering for the reporting commands.

Every report command writes delimited data; these helpers render the matching
figure next to it.  The Agg backend keeps everything headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

from matplotlib import pyplot as plt  # noqa: E402  (backend must be set first)

from .risk import RiskTable  # noqa: E402
from .scaling import ScalingRecord  # noqa: E402
from .simulate import SimulationReport  # noqa: E402


def render_risk_figure(table: RiskTable, path: str | Path) -> Path:
    """Both failure probabilities against the tolerance level, log scale."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    ks = list(table.ks)
    ax.semilogy(ks, [max(p, 1e-300) for p in table.total], "o-", label="k total failures")
    ax.semilogy(ks, [max(p, 1e-300) for p in table.dense], "s--", label="k dense failures")
    ax.set_xlabel("tolerated failures k")
    ax.set_ylabel("mission failure probability")
    ax.set_xticks(ks)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    p = table.profile
    ax.set_title(
        f"{p.mission_hours:g} h mission, {p.mtbf_hours:g} h MTBF, "
        f"{p.repair_seconds:g} s repair"
    )
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_scaling_figure(records: list[ScalingRecord], path: str | Path) -> Path:
    """Solve time against system size, one line per failure budget."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    for k in sorted({r.k for r in records}):
        pts = sorted((r.edges, r.seconds) for r in records if r.k == k)
        ax.loglog([e for e, _ in pts], [s for _, s in pts], "o-", label=f"k = {k}")
    ax.set_xlabel("edges")
    ax.set_ylabel("solve seconds")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    ax.set_title("block-survival solve time on escalation chains")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_simulation_figure(report: SimulationReport, path: str | Path) -> Path:
    """Distribution of recovery-block lengths observed during the plays."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    if report.recovery_lengths:
        bins = min(50, max(report.recovery_lengths))
        ax.hist(report.recovery_lengths, bins=max(bins, 1), color="#4878a8")
    ax.set_xlabel("moves from first failure of a block back to the resilient set")
    ax.set_ylabel("blocks")
    ax.set_title(
        f"{report.plays} plays, {report.antagonist} attacker: "
        f"{report.errors} errors, {report.resets_total} resets"
    )
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
