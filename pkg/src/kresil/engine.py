"""Fixed-point solvers for dense-failure resilience games.

The controller and the failure environment play over a
:class:`~kresil.tsf.TransitionSystem`.  Within a good region ``G`` the
controller plays a pure safety game; the first failure switches the play to a
recovery race back to ``G`` against a bounded number ``k`` of further
failures.  A state surviving that combined objective is *k-sfrch* for ``G``;
the greatest fixed point of that operator is the set of k-resilient states,
from which blocks of up to ``k`` dense failures can be survived forever.

Plain building blocks:

* :func:`frag` - states with at least one failure edge into a given set.
* :func:`cla` - controlled limited attractor: backward reachability of a goal
  through controlled moves whose intermediate states stay inside a limit
  region.  In ``repair`` mode a state also needs every repair successor inside
  the attractor, because repair moves cannot be blocked, and a state may make
  progress by waiting for repairs alone.
* :func:`safe0` - greatest subset of a region in which the controller can stay
  forever (safety kernel).
* :func:`safe_k` - the combined safety/recovery winning set, built from a
  descending chain of attractors ``A_0 .. A_{k-1}`` and allowed regions
  ``L_0 .. L_k``.
* :func:`res_k` - greatest fixed point of ``safe_k`` plus a memoryless control
  strategy extracted from the final iteration.
* :func:`k_max` - largest ``k`` for which a state stays resilient, found by
  doubling and binary search.

Two game modes exist.  ``base`` ignores repair edges entirely.  ``repair``
uses the offer semantics: each controller move is a set of successors that
must include every enabled repair target, and the environment picks from the
offer unless it spends a failure.  All functions are deterministic and the
inputs are never mutated, so concurrent solves over a shared system are safe.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal

from .tsf import TransitionSystem

Mode = Literal["base", "repair"]

UNRANKED = -1


def _check_mode(mode: str) -> None:
    if mode not in ("base", "repair"):
        raise ValueError(f"mode must be 'base' or 'repair', got {mode!r}")


def _check_subset(name: str, states: Iterable[int], allowed: frozenset[int]) -> frozenset[int]:
    out = frozenset(states)
    extra = out - allowed
    if extra:
        raise ValueError(f"{name} contains non-allowed states {sorted(extra)[:5]}")
    return out


def frag(system: TransitionSystem, targets: Iterable[int]) -> frozenset[int]:
    """States with at least one uncontrolled (failure) edge into ``targets``."""
    pred_u = system.pred_lists("uncontrolled")
    fragile: set[int] = set()
    for t in targets:
        fragile.update(pred_u[t])
    return frozenset(fragile)


@dataclass(frozen=True)
class AttractorResult:
    """Output of :func:`cla`.

    ``rank[s]`` is the wave at which ``s`` entered the attractor (0 for goal
    members, -1 outside).  ``move[s]`` is one witness controlled move toward a
    strictly lower rank for every non-goal member; ``None`` means "wait", used
    in repair mode when progress is guaranteed by repair moves alone.
    """

    states: frozenset[int]
    rank: list[int]
    move: dict[int, int | None]


def cla(
    system: TransitionSystem,
    limit: Iterable[int],
    goal: Iterable[int],
    mode: Mode = "base",
) -> AttractorResult:
    """Controlled limited attractor of ``goal`` through ``limit``.

    Least set ``A`` containing the goal such that a limit state enters ``A``
    when it has a controlled move into ``A`` (base mode), or, in repair mode,
    when some controlled-or-repair move enters ``A`` and *all* repair moves
    do.  Computed as breadth-first waves over reversed edges, one pass per
    edge, so the whole run is linear in the system size.
    """
    _check_mode(mode)
    non_error = system.non_error
    goal_set = _check_subset("goal", goal, non_error)
    limit_set = _check_subset("limit", limit, non_error)

    n = system.num_states
    in_a = bytearray(n)
    in_l = bytearray(n)
    for s in limit_set:
        in_l[s] = 1
    rank = [UNRANKED] * n
    move: dict[int, int | None] = {}

    suc_c = system.suc_lists("controlled")
    pred_c = system.pred_lists("controlled")
    frontier: list[int] = []
    for s in goal_set:
        in_a[s] = 1
        rank[s] = 0
        frontier.append(s)

    if mode == "repair":
        suc_r = system.suc_lists("repair")
        pred_r = system.pred_lists("repair")
        missing_r = [len(suc_r[s]) for s in range(n)]
        has_entry = bytearray(n)  # some controlled or repair successor in A
    else:
        suc_r = pred_r = None
        missing_r = None
        has_entry = None

    wave = 0
    while frontier:
        wave += 1
        candidates: set[int] = set()
        if mode == "base":
            for t in frontier:
                for p in pred_c[t]:
                    if in_l[p] and not in_a[p]:
                        candidates.add(p)
        else:
            for t in frontier:
                for p in pred_c[t]:
                    if not in_a[p]:
                        has_entry[p] = 1
                        if in_l[p]:
                            candidates.add(p)
                for p in pred_r[t]:
                    if not in_a[p]:
                        has_entry[p] = 1
                        missing_r[p] -= 1
                        if in_l[p]:
                            candidates.add(p)
        frontier = []
        for p in sorted(candidates):
            if mode == "repair" and (missing_r[p] > 0 or not has_entry[p]):
                continue
            in_a[p] = 1
            rank[p] = wave
            # witness: lowest-numbered controlled target of minimal rank
            best: tuple[int, int] | None = None
            for t in suc_c[p]:
                if in_a[t] and rank[t] < wave:
                    key = (rank[t], t)
                    if best is None or key < best:
                        best = key
            move[p] = best[1] if best is not None else None
            frontier.append(p)

    states = frozenset(s for s in range(n) if in_a[s])
    return AttractorResult(states=states, rank=rank, move=move)


def safe0(
    system: TransitionSystem,
    goal: Iterable[int],
    mode: Mode = "base",
    with_moves: bool = True,
) -> tuple[frozenset[int], dict[int, tuple[int, ...]]]:
    """Safety kernel: the greatest subset of ``goal`` the controller can never
    be forced to leave.

    Base mode keeps a state when some controlled move stays inside the kernel.
    Repair mode additionally requires every repair successor to stay inside
    (they fire whether the controller likes it or not) and accepts repair
    moves as the mandatory inside move.  Returns the kernel plus, per member,
    the controlled moves that remain inside it.
    """
    _check_mode(mode)
    non_error = system.non_error
    goal_set = _check_subset("goal", goal, non_error)

    n = system.num_states
    in_x = bytearray(n)
    for s in goal_set:
        in_x[s] = 1

    suc_c = system.suc_lists("controlled")
    pred_c = system.pred_lists("controlled")
    if mode == "repair":
        suc_r = system.suc_lists("repair")
        pred_r = system.pred_lists("repair")
    else:
        suc_r = pred_r = None

    support = [0] * n
    doomed: list[int] = []
    for s in goal_set:
        cnt = sum(1 for t in suc_c[s] if in_x[t])
        bad = False
        if mode == "repair":
            for t in suc_r[s]:
                if in_x[t]:
                    cnt += 1
                else:
                    bad = True
        support[s] = cnt
        if cnt == 0 or bad:
            doomed.append(s)

    removed = bytearray(n)
    while doomed:
        s = doomed.pop()
        if not in_x[s] or removed[s]:
            continue
        removed[s] = 1
        in_x[s] = 0
        for p in pred_c[s]:
            if in_x[p]:
                support[p] -= 1
                if support[p] == 0:
                    doomed.append(p)
        if mode == "repair":
            for p in pred_r[s]:
                if in_x[p]:
                    # a repair successor left the kernel: p cannot stay
                    doomed.append(p)
                    support[p] = 0

    kernel = frozenset(s for s in goal_set if in_x[s])
    moves: dict[int, tuple[int, ...]] = {}
    if with_moves:
        for s in sorted(kernel):
            moves[s] = tuple(sorted(t for t in set(suc_c[s]) if in_x[t]))
    return kernel, moves


@dataclass(frozen=True)
class SafeKResult:
    """Winning set of the combined safety/recovery game for a budget ``k``.

    ``attractors`` is the descending chain ``A_0 .. A_{k-1}``, ``limits`` the
    chain ``L_0 .. L_k`` of allowed regions; ``safe_set`` equals the safety
    kernel of ``goal & L_k``.  ``runs`` keeps the attractor witnesses, which
    :func:`res_k` turns into recovery moves.
    """

    k: int
    mode: Mode
    safe_set: frozenset[int]
    attractors: tuple[frozenset[int], ...]
    limits: tuple[frozenset[int], ...]
    safety_moves: dict[int, tuple[int, ...]]
    runs: tuple[AttractorResult, ...] = field(repr=False, default=())


def safe_k(
    system: TransitionSystem,
    goal: Iterable[int],
    k: int,
    mode: Mode = "base",
    with_moves: bool = True,
) -> SafeKResult:
    """States from which the controller survives one block of at most ``k``
    dense failures: stay inside ``goal`` until the first failure, then recover
    to ``goal`` against up to ``k-1`` further ones.

    ``L_0`` is every non-error state.  Round ``i`` computes the attractor
    ``A_i`` of the goal through ``L_i`` and shrinks the allowed region to the
    states all of whose failure edges land in ``A_i``.  The result is the
    safety kernel of ``goal & L_k``; ``k = 0`` degenerates to :func:`safe0`.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    _check_mode(mode)
    non_error = system.non_error
    goal_set = _check_subset("goal", goal, non_error)

    all_states = frozenset(range(system.num_states))
    limit = non_error
    limits = [limit]
    attractors: list[frozenset[int]] = []
    runs: list[AttractorResult] = []
    for _ in range(k):
        run = cla(system, limit, goal_set, mode)
        runs.append(run)
        attractors.append(run.states)
        limit = non_error - frag(system, all_states - run.states)
        limits.append(limit)

    kernel, moves = safe0(system, goal_set & limit, mode, with_moves=with_moves)
    return SafeKResult(
        k=k,
        mode=mode,
        safe_set=kernel,
        attractors=tuple(attractors),
        limits=tuple(limits),
        safety_moves=moves,
        runs=tuple(runs),
    )


@dataclass(frozen=True)
class RecoveryMove:
    """Per-state recovery directive outside the resilient set.

    ``rank`` is the deepest attractor index ``i`` with the state in ``A_i``
    (the number of further failures the controller can still absorb).
    ``move`` is the controlled move to play; ``None`` means wait for repairs.
    """

    rank: int
    move: int | None


@dataclass
class ResilienceStrategy:
    """Memoryless controller for one resilience level.

    Inside ``resilient`` any move from ``safety_moves`` keeps the play
    resilient; the set form lets a permissive controller merely prune choices,
    while a determinized controller picks the first entry.  Outside,
    ``recovery_moves`` follows the attractor of the deepest chain level that
    still contains the current state.
    """

    k: int
    mode: Mode
    num_states: int
    resilient: frozenset[int]
    safety_moves: dict[int, tuple[int, ...]]
    recovery_moves: dict[int, RecoveryMove]

    def to_json_dict(self) -> dict:
        return {
            "k": self.k,
            "mode": self.mode,
            "num_states": self.num_states,
            "resilient": sorted(self.resilient),
            "safety_moves": {str(s): list(ts) for s, ts in sorted(self.safety_moves.items())},
            "recovery_moves": {
                str(s): {"rank": rm.rank, "move": "wait" if rm.move is None else rm.move}
                for s, rm in sorted(self.recovery_moves.items())
            },
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ResilienceStrategy":
        try:
            recovery = {}
            for s, entry in doc.get("recovery_moves", {}).items():
                mv = entry["move"]
                recovery[int(s)] = RecoveryMove(
                    rank=int(entry["rank"]),
                    move=None if mv == "wait" else int(mv),
                )
            return cls(
                k=int(doc["k"]),
                mode=doc.get("mode", "base"),
                num_states=int(doc.get("num_states", 0)),
                resilient=frozenset(int(s) for s in doc["resilient"]),
                safety_moves={
                    int(s): tuple(int(t) for t in ts)
                    for s, ts in doc.get("safety_moves", {}).items()
                },
                recovery_moves=recovery,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed strategy document: {exc}") from exc


def save_strategy(strategy: ResilienceStrategy, path: str | Path) -> None:
    Path(path).write_text(json.dumps(strategy.to_json_dict(), indent=2, sort_keys=True) + "\n")


def load_strategy(path: str | Path) -> ResilienceStrategy:
    return ResilienceStrategy.from_json_dict(json.loads(Path(path).read_text()))


def _assemble_strategy(system: TransitionSystem, result: SafeKResult) -> ResilienceStrategy:
    resilient = result.safe_set
    recovery: dict[int, RecoveryMove] = {}
    # deepest chain level first; shallower levels only fill the remainder
    for i in range(len(result.runs) - 1, -1, -1):
        run = result.runs[i]
        for s in run.states:
            if s in resilient or s in recovery:
                continue
            recovery[s] = RecoveryMove(rank=i, move=run.move[s])
    return ResilienceStrategy(
        k=result.k,
        mode=result.mode,
        num_states=system.num_states,
        resilient=resilient,
        safety_moves=dict(result.safety_moves),
        recovery_moves=recovery,
    )


def res_k(
    system: TransitionSystem,
    k: int,
    mode: Mode = "base",
    goal: Iterable[int] | None = None,
) -> ResilienceStrategy:
    """k-resilient states and a memoryless strategy witnessing them.

    Iterates ``G <- safe_k(G)`` from ``goal`` (every non-error state unless
    given) down to the greatest fixed point.  The strategy comes from the
    final iteration, the one mapping the fixed point to itself; an empty
    resilient set is a legal outcome.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    _check_mode(mode)
    current = frozenset(goal) if goal is not None else system.non_error
    _check_subset("goal", current, system.non_error)

    while True:
        result = safe_k(system, current, k, mode)
        if result.safe_set == current:
            return _assemble_strategy(system, result)
        current = result.safe_set


@dataclass
class KMaxResult:
    """Outcome of the resilience-level search.

    ``value`` is the largest surviving ``k`` (-1 when the state is not even
    0-resilient).  ``unbounded`` marks systems that stay resilient at
    ``k = num_states``; budgets beyond the state count add no attacker power,
    so the level is reported as infinite with ``value`` pinned at the cap.
    ``evaluations`` counts distinct res_k computations (grows with
    ``log(value)``).
    """

    value: int
    unbounded: bool
    strategy: ResilienceStrategy | None
    evaluations: int

    def describe(self) -> str:
        if self.value < 0:
            return "-1"
        if self.unbounded:
            return f"unbounded (>= {self.value})"
        return str(self.value)


def k_max(
    system: TransitionSystem,
    mode: Mode = "base",
    state: int | None = None,
) -> KMaxResult:
    """Largest ``k`` for which ``state`` (default: the initial state) is
    k-resilient, via exponential doubling followed by binary search.

    Resilient sets shrink as ``k`` grows, so membership is monotone and the
    search needs O(log k_max) res_k evaluations.  Once the state survives
    ``k = num_states`` it survives every budget and the sentinel is returned.
    """
    _check_mode(mode)
    if state is None:
        state = system.initial
    if not (0 <= state < system.num_states):
        raise ValueError(f"state {state} out of range [0,{system.num_states})")

    cap = system.num_states
    cache: dict[int, ResilienceStrategy] = {}
    evaluations = 0

    def member(k: int) -> bool:
        nonlocal evaluations
        if k not in cache:
            cache[k] = res_k(system, k, mode)
            evaluations += 1
        return state in cache[k].resilient

    if not member(0):
        return KMaxResult(value=-1, unbounded=False, strategy=None, evaluations=evaluations)

    k = 1
    while k < cap and member(k):
        k = min(k * 2, cap)
    if member(min(k, cap)):
        return KMaxResult(
            value=cap,
            unbounded=True,
            strategy=cache[min(k, cap)],
            evaluations=evaluations,
        )

    lo = 0
    for probed in sorted(cache):
        if probed < k and state in cache[probed].resilient:
            lo = max(lo, probed)
    hi = k
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if member(mid):
            lo = mid
        else:
            hi = mid
    return KMaxResult(value=lo, unbounded=False, strategy=cache[lo], evaluations=evaluations)
