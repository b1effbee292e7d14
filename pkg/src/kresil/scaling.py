"""Wall-clock scaling probes for the solver.

The block-survival computation is built from linear passes, so doubling the
system size or the failure budget should roughly double the time.  These
helpers measure that on escalation chains, whose size is easy to dial, and
back the ``scaling`` report command and the scaling regression test.
"""

from __future__ import annotations

import gc
import time
from dataclasses import dataclass

from .benchmarks import chain
from .engine import safe_k


@dataclass(frozen=True)
class ScalingRecord:
    edges: int
    states: int
    k: int
    seconds: float


def chain_length_for_edges(edges: int) -> int:
    """Chain length whose system has roughly the requested edge count.

    A chain of length ``ell`` has ``3 * ell + 5`` edges (self-loops, back
    steps, failure steps).
    """
    return max(0, (edges - 5) // 3)


def measure_chain_scaling(
    edge_targets: list[int],
    ks: list[int],
    repeats: int = 2,
) -> list[ScalingRecord]:
    """Time ``safe_k`` on chains near each target edge count.

    Only the solve is timed (best of ``repeats``, garbage collector paused);
    construction cost is excluded.
    """
    records = []
    for edges in edge_targets:
        system = chain(chain_length_for_edges(edges), with_labels=False)
        goal = system.non_error
        for k in ks:
            best = float("inf")
            for _ in range(repeats):
                gc_was_enabled = gc.isenabled()
                gc.disable()
                try:
                    start = time.perf_counter()
                    safe_k(system, goal, k, with_moves=False)
                    best = min(best, time.perf_counter() - start)
                finally:
                    if gc_was_enabled:
                        gc.enable()
            records.append(
                ScalingRecord(edges=system.size, states=system.num_states, k=k, seconds=best)
            )
    return records


def format_csv(records: list[ScalingRecord]) -> str:
    lines = ["edges,states,k,seconds"]
    for r in records:
        lines.append(f"{r.edges},{r.states},{r.k},{r.seconds:.6f}")
    return "\n".join(lines) + "\n"
