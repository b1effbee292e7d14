"""Ground-truth solver for the resilience game on small systems.

The engine computes winning sets through chained attractor constructions; this
module solves the same game directly on its position graph, one layer per
remaining failure budget, by plain iterate-until-stable sweeps.  Nothing is
shared with the engine beyond the system structure, which is the point: the
two paths must agree exactly, and disagreement on any instance is a bug.

Positions are (state, phase, budget) with at most ``|S| * (k+1) * 2`` of
them, so the solution is exact, never sampled.  Sizes are capped because the
sweeps are quadratic in the worst case; raise the caps explicitly for larger
cross-checks.
"""

from __future__ import annotations

from typing import Iterable

from .engine import Mode, _check_mode
from .tsf import TransitionSystem

DEFAULT_STATE_CAP = 12
DEFAULT_K_CAP = 4


class OracleCapExceeded(Exception):
    """Instance too large for exhaustive solving under the configured caps."""


def _check_caps(system: TransitionSystem, k: int, max_states: int, max_k: int) -> None:
    if system.num_states > max_states:
        raise OracleCapExceeded(
            f"{system.num_states} states exceeds the cap of {max_states}"
        )
    if k > max_k:
        raise OracleCapExceeded(f"k={k} exceeds the cap of {max_k}")


def _offer_ok(
    suc_c: list[int],
    suc_r: list[int],
    win: set[int] | frozenset[int],
    mode: str,
) -> bool:
    # The controller proposes a set of successors.  In repair mode it must
    # contain every repair target; the environment picks any element, so all
    # offered states have to be winning.  The smallest useful offer is either
    # the repair targets alone or one controlled move (plus the repairs).
    if mode == "base":
        return any(t in win for t in suc_c)
    if any(t not in win for t in suc_r):
        return False
    if suc_r:
        return True
    return any(t in win for t in suc_c)


def brute_force_safe_k(
    system: TransitionSystem,
    goal: Iterable[int],
    k: int,
    mode: Mode = "base",
    max_states: int = DEFAULT_STATE_CAP,
    max_k: int = DEFAULT_K_CAP,
) -> frozenset[int]:
    """Exact winning set of the two-phase game for one failure block.

    Safety positions are won when the controller can stay inside the goal
    forever while every failure interruption leads to a recovery position won
    with the remaining budget; recovery positions are won when the goal is
    reachable before the budget and the play run out.  Solved bottom-up per
    budget layer with naive fixed-point sweeps.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    _check_mode(mode)
    _check_caps(system, k, max_states, max_k)
    goal_set = frozenset(goal)
    if goal_set - system.non_error:
        raise ValueError("goal must contain only non-error states")

    suc_c = system.suc_lists("controlled")
    suc_u = system.suc_lists("uncontrolled")
    suc_r = system.suc_lists("repair") if mode == "repair" else [[] for _ in suc_c]
    non_error = system.non_error

    # recovery layers: layer b = positions won with b further failures allowed
    prev: frozenset[int] = frozenset()
    for b in range(k):
        win = set(goal_set)
        changed = True
        while changed:
            changed = False
            for s in non_error:
                if s in win:
                    continue
                if b > 0 and not all(u in prev for u in suc_u[s]):
                    continue
                if _offer_ok(suc_c[s], suc_r[s], win, mode):
                    win.add(s)
                    changed = True
        prev = frozenset(win)

    # safety phase: greatest set closed under offers, with every failure
    # interruption (budget k-1 afterwards) recoverable
    safe = set(goal_set)
    changed = True
    while changed:
        changed = False
        for s in list(safe):
            ok = _offer_ok(suc_c[s], suc_r[s], safe, mode)
            if ok and k > 0:
                ok = all(u in prev for u in suc_u[s])
            if not ok:
                safe.remove(s)
                changed = True
    return frozenset(safe)


def brute_force_res_k(
    system: TransitionSystem,
    k: int,
    mode: Mode = "base",
    max_states: int = DEFAULT_STATE_CAP,
    max_k: int = DEFAULT_K_CAP,
) -> frozenset[int]:
    """Greatest fixed point of the block-survival operator, solved exactly."""
    current = system.non_error
    while True:
        nxt = brute_force_safe_k(
            system, current, k, mode, max_states=max_states, max_k=max_k
        )
        if nxt == current:
            return current
        current = nxt
