"""Adversarial play harness for validating control strategies.

Plays a claimed resilience strategy against seeded fault injectors and checks
that no play ever reaches an error state.  The harness trusts nothing but the
strategy document and the system: budgets reset exactly when the play
re-enters the claimed resilient set, so an unsound resilient set hands the
attacker extra failures and is exposed as an error trace.

Repair edges (in repair mode) are appended to every controller offer; the
attacker may delay taking them, but an enabled repair fires within
``num_states`` consecutive offers, a bounded stand-in for fairness that is
enough for finite plays.

Every play owns its own deterministic generator derived from the run seed, so
results are reproducible and plays could be distributed across workers without
changing any outcome.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

from .engine import ResilienceStrategy
from .tsf import TransitionSystem

Antagonist = Literal["random", "greedy"]

MAX_HORIZON = 10**7

PROTAGONIST = "protagonist"
ANTAGONIST = "antagonist"
REPAIR = "repair"

OUTCOME_ERROR = "error_reached"
OUTCOME_SURVIVED = "survived_horizon"
OUTCOME_STUCK = "stuck"


@dataclass(frozen=True)
class TraceStep:
    """One move: the position before it, who moved, and the target.

    ``target`` None records a delay round (the attacker postponing an offered
    repair); the pebble stays put.
    """

    state: int
    phase: str
    budget: int
    mover: str
    target: int | None


@dataclass
class PlayTrace:
    play_index: int
    seed: int
    steps: list[TraceStep]
    outcome: str
    resets: int

    def to_json_dict(self) -> dict:
        return {
            "play_index": self.play_index,
            "seed": self.seed,
            "outcome": self.outcome,
            "resets": self.resets,
            "steps": [
                [st.state, st.phase, st.budget, st.mover, st.target] for st in self.steps
            ],
        }


def save_trace(trace: PlayTrace, path: str | Path) -> None:
    Path(path).write_text(json.dumps(trace.to_json_dict(), indent=2) + "\n")


@dataclass
class SimulationReport:
    plays: int
    horizon: int
    antagonist: str
    seed: int
    errors: int = 0
    survived: int = 0
    stuck: int = 0
    resets_total: int = 0
    recovery_blocks: int = 0
    recovery_steps_total: int = 0
    budget_violations: int = 0
    undefined_strategy_states: set[int] = field(default_factory=set)
    recovery_lengths: list[int] = field(default_factory=list)
    first_error_trace: PlayTrace | None = None
    traces: list[PlayTrace] = field(default_factory=list)

    @property
    def mean_recovery_length(self) -> float:
        if not self.recovery_blocks:
            return 0.0
        return self.recovery_steps_total / self.recovery_blocks

    def to_json_dict(self) -> dict:
        return {
            "plays": self.plays,
            "horizon": self.horizon,
            "antagonist": self.antagonist,
            "seed": self.seed,
            "errors": self.errors,
            "survived": self.survived,
            "stuck": self.stuck,
            "resets_total": self.resets_total,
            "recovery_blocks": self.recovery_blocks,
            "mean_recovery_length": self.mean_recovery_length,
            "budget_violations": self.budget_violations,
            "undefined_strategy_states": sorted(self.undefined_strategy_states),
        }


class _Tables:
    """Flattened lookup tables so the inner play loop stays allocation-free."""

    def __init__(self, system: TransitionSystem, strategy: ResilienceStrategy):
        n = system.num_states
        self.n = n
        self.k = strategy.k
        self.initial = system.initial
        self.repair_mode = strategy.mode == "repair"
        self.is_error = bytearray(n)
        for e in system.errors:
            self.is_error[e] = 1
        self.resilient = bytearray(n)
        for s in strategy.resilient:
            self.resilient[s] = 1
        self.safety: list[tuple[int, ...]] = [()] * n
        for s, moves in strategy.safety_moves.items():
            self.safety[s] = tuple(moves)
        self.recovery: list[tuple[int, int | None] | None] = [None] * n
        for s, rm in strategy.recovery_moves.items():
            self.recovery[s] = (rm.rank, rm.move)
        self.suc_u = [tuple(ts) for ts in system.suc_lists("uncontrolled")]
        self.suc_r = (
            [tuple(sorted(set(ts))) for ts in system.suc_lists("repair")]
            if self.repair_mode
            else [()] * n
        )
        self.suc_c = [tuple(sorted(set(ts))) for ts in system.suc_lists("controlled")]

        # attacker's view of how much slack a state leaves the controller:
        # error < unknown < attractor rank < resilient
        def headroom(t: int) -> int:
            if self.is_error[t]:
                return -2
            if self.resilient[t]:
                return n + 1
            rec = self.recovery[t]
            return rec[0] if rec is not None else -1

        self.headroom = [headroom(t) for t in range(n)]
        self.best_fail: list[int | None] = [None] * n
        for s in range(n):
            if self.suc_u[s]:
                self.best_fail[s] = min(self.suc_u[s], key=lambda t: (headroom(t), t))


def _run_play(
    tables: _Tables,
    rng: random.Random,
    horizon: int,
    antagonist: str,
    record: bool,
    report: SimulationReport,
    play_index: int,
    seed: int,
) -> PlayTrace | None:
    k = tables.k
    n = tables.n
    greedy = antagonist == "greedy"
    state = tables.initial
    phase = "safety"
    budget = k
    failures_in_block = 0
    block_start: int | None = None
    resets = 0
    repair_streak = 0
    steps: list[TraceStep] = [] if record else None
    outcome = OUTCOME_SURVIVED

    for step in range(horizon):
        # controller proposal
        if tables.resilient[state]:
            moves = tables.safety[state]
            proposal = moves[rng.randrange(len(moves))] if moves else None
        else:
            rec = tables.recovery[state]
            if rec is not None:
                proposal = rec[1]
            else:
                report.undefined_strategy_states.add(state)
                cands = tables.suc_c[state]
                proposal = cands[0] if cands else None

        repairs = tables.suc_r[state]
        offer = repairs if proposal is None else (proposal,) + tuple(
            t for t in repairs if t != proposal
        )

        # attacker resolution: fail, delay a pending repair, or accept
        mover = PROTAGONIST
        target: int | None = None
        budget_before = budget
        can_fail = budget > 0 and tables.best_fail[state] is not None
        if can_fail and (greedy or rng.random() < 0.5):
            if greedy:
                target = tables.best_fail[state]
            else:
                target = tables.suc_u[state][rng.randrange(len(tables.suc_u[state]))]
            mover = ANTAGONIST
            budget -= 1
            failures_in_block += 1
            if failures_in_block > k:
                report.budget_violations += 1
            if block_start is None:
                block_start = step
            repair_streak = 0
        elif not offer:
            outcome = OUTCOME_STUCK
            if record:
                steps.append(TraceStep(state, phase, budget, PROTAGONIST, None))
            break
        else:
            offered_repairs = [t for t in offer if t in repairs]
            must_repair = bool(offered_repairs) and repair_streak >= n
            may_delay = bool(offered_repairs) and not must_repair and proposal is None
            if must_repair:
                target = min(offered_repairs)
            elif greedy:
                if may_delay:
                    target = None
                elif len(offer) == 1:
                    target = offer[0]
                else:
                    hr = tables.headroom
                    target = min(offer, key=lambda t: (hr[t], t))
            else:
                options: list[int | None] = list(offer)
                if may_delay:
                    options.append(None)
                target = options[rng.randrange(len(options))]
            if target is None:
                repair_streak += 1
                if record:
                    steps.append(TraceStep(state, phase, budget, ANTAGONIST, None))
                continue
            if target in repairs and (proposal is None or target != proposal):
                mover = REPAIR
                repair_streak = 0
            elif offered_repairs:
                repair_streak += 1

        if record:
            steps.append(TraceStep(state, phase, budget_before, mover, target))
        state = target

        if tables.is_error[state]:
            outcome = OUTCOME_ERROR
            break

        if tables.resilient[state]:
            if failures_in_block > 0:
                resets += 1
                if block_start is not None:
                    length = step - block_start + 1
                    report.recovery_blocks += 1
                    report.recovery_steps_total += length
                    if len(report.recovery_lengths) < 10_000:
                        report.recovery_lengths.append(length)
            phase = "safety"
            budget = k
            failures_in_block = 0
            block_start = None
        else:
            phase = "recovery"

    report.resets_total += resets
    if outcome == OUTCOME_ERROR:
        report.errors += 1
    elif outcome == OUTCOME_STUCK:
        report.stuck += 1
    else:
        report.survived += 1
    if record:
        return PlayTrace(
            play_index=play_index, seed=seed, steps=steps, outcome=outcome, resets=resets
        )
    return outcome


def simulate(
    system: TransitionSystem,
    strategy: ResilienceStrategy,
    antagonist: Antagonist = "greedy",
    plays: int = 1000,
    horizon: int = 1000,
    seed: int | None = None,
    keep_traces: int = 0,
) -> SimulationReport:
    """Play ``plays`` independent games and report the outcomes.

    Requires a seed: unseeded nondeterminism is forbidden, and the same seed
    always reproduces the same report.  The first erroring play is re-run with
    recording on and attached as ``first_error_trace``; ``keep_traces`` keeps
    the leading plays recorded as well (for audits of budget accounting).
    """
    if seed is None:
        raise ValueError("simulate requires an explicit seed")
    if antagonist not in ("random", "greedy"):
        raise ValueError(f"unknown antagonist policy {antagonist!r}")
    if not (0 < horizon <= MAX_HORIZON):
        raise ValueError(f"horizon must be in 1..{MAX_HORIZON}")
    if not strategy.resilient:
        raise ValueError("strategy has an empty resilient set; nothing to defend")
    if system.initial not in strategy.resilient:
        raise ValueError("initial state is not in the strategy's resilient set")
    if strategy.num_states and strategy.num_states != system.num_states:
        raise ValueError("strategy was extracted for a system of a different size")

    tables = _Tables(system, strategy)
    tables.initial = system.initial
    report = SimulationReport(plays=plays, horizon=horizon, antagonist=antagonist, seed=seed)

    for i in range(plays):
        play_seed = seed * 1_000_003 + i
        record = i < keep_traces
        result = _run_play(
            tables, random.Random(play_seed), horizon, antagonist, record, report, i, play_seed
        )
        if record:
            report.traces.append(result)
            outcome = result.outcome
        else:
            outcome = result
        if outcome == OUTCOME_ERROR and report.first_error_trace is None:
            if record:
                report.first_error_trace = result
            else:
                # replay deterministically with recording on
                shadow = SimulationReport(
                    plays=1, horizon=horizon, antagonist=antagonist, seed=seed
                )
                trace = _run_play(
                    tables,
                    random.Random(play_seed),
                    horizon,
                    antagonist,
                    True,
                    shadow,
                    i,
                    play_seed,
                )
                report.first_error_trace = trace
    return report


def check_trace_budget(trace: PlayTrace, k: int, resilient: frozenset[int]) -> list[str]:
    """Replay a trace's bookkeeping and report accounting violations.

    Checks that the budget drops exactly on attacker failure moves, never goes
    negative, and resets to ``k`` exactly when the play enters the resilient
    set; the number of failures per block must stay within ``k``.
    """
    problems: list[str] = []
    budget = k
    failures = 0
    for idx, st in enumerate(trace.steps):
        if st.budget != budget:
            problems.append(f"step {idx}: recorded budget {st.budget}, expected {budget}")
        if st.mover == ANTAGONIST and st.target is not None:
            budget -= 1
            failures += 1
            if failures > k:
                problems.append(f"step {idx}: {failures} failures in one block exceeds k={k}")
            if budget < 0:
                problems.append(f"step {idx}: budget went negative")
        if st.target is not None and st.target in resilient:
            budget = k
            failures = 0
    return problems
