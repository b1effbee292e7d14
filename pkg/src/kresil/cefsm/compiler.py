"""Compilation of CEFSM models to explicit transition systems.

Replicas of a template are symmetric, so the default compilation tracks only
*how many* instances sit in each location (counter abstraction); a global
configuration is one occupancy vector per template plus the shared variable
values.  :func:`compile_explicit` instead gives every replica an identity and
exists (for small replica counts) to cross-check that the abstraction
preserves the resilience level.

Semantics of one step:

* a local transition fires when its source location is occupied, its guard
  holds on the current configuration, and its updates keep every variable in
  bounds (an out-of-bounds update disables the transition rather than
  saturating);
* a send and a matching receive fire atomically as one edge; both guards are
  read on the pre-state, updates apply sender first;
* a configuration satisfying the error predicate is an unrecoverable sink:
  it is never expanded, and controlled edges into it are dropped (the
  controller would never elect to break the system, and the game graph format
  forbids controlled edges into error states).  A *repair* edge into an error
  configuration is a modeling bug and aborts compilation, as does a reachable
  non-error configuration that offers the controller no move at all.

Compilation is deterministic: transitions fire in declaration order and
states are numbered in breadth-first discovery order, so the same model text
always yields the same numbering.
"""

from __future__ import annotations

from collections import deque
from typing import Iterator

from ..tsf import TransitionSystem
from .model import CefsmError, CefsmModel, Template, build_eval_env

DEFAULT_CONFIG_CAP = 5_000_000


class CompileError(CefsmError):
    """The model cannot be compiled into a valid transition system."""


class StateSpaceCapExceeded(CompileError):
    def __init__(self, cap: int):
        super().__init__(f"state space exceeds the configured cap of {cap} configurations")


_KIND_NAME = {"C": "controlled", "U": "uncontrolled", "R": "repair"}


def _apply_updates(updates, var_values: dict, bounds: dict) -> dict | None:
    """Apply updates in order; None when any intermediate value leaves its
    bounds (the transition is disabled)."""
    if not updates:
        return var_values
    out = dict(var_values)
    for up in updates:
        val = up.apply(out[up.var])
        low, high = bounds[up.var]
        if not (low <= val <= high):
            return None
        out[up.var] = val
    return out


class _CounterExpander:
    """Successor enumeration over occupancy-count configurations."""

    def __init__(self, model: CefsmModel):
        self.model = model
        self.bounds = {v.name: (v.low, v.high) for v in model.shared_vars}
        self.var_names = model.var_names()
        self.loc_index = {
            tpl.name: {loc: i for i, loc in enumerate(tpl.locations)} for tpl in model.templates
        }
        self.sync_pairs = self._build_sync_pairs()

    def _build_sync_pairs(self):
        pairs = []
        for chan in self.model.channels:
            for si, (stpl, str_) in enumerate(self.model.senders(chan)):
                for rtpl, rtr in self.model.receivers(chan):
                    pairs.append((stpl, str_, rtpl, rtr))
        return pairs

    def initial(self):
        counts = []
        for tpl in self.model.templates:
            vec = [0] * len(tpl.locations)
            vec[self.loc_index[tpl.name][tpl.initial]] = tpl.count
            counts.append(tuple(vec))
        var_values = tuple(v.initial for v in self.model.shared_vars)
        return (tuple(counts), var_values)

    def _env(self, config):
        counts, var_values = config
        loc_counts = {
            tpl.name: dict(zip(tpl.locations, counts[ti]))
            for ti, tpl in enumerate(self.model.templates)
        }
        return build_eval_env(self.model, dict(zip(self.var_names, var_values)), loc_counts)

    def is_error(self, config) -> bool:
        pred = self.model.error_predicate
        return bool(pred is not None and pred.evaluate(self._env(config)))

    def _vars_dict(self, config) -> dict:
        return dict(zip(self.var_names, config[1]))

    def moves(self, config) -> Iterator[tuple[str, tuple, str]]:
        counts, _ = config
        env = self._env(config)
        vars_now = self._vars_dict(config)
        for ti, tpl in enumerate(self.model.templates):
            idx = self.loc_index[tpl.name]
            for tr in tpl.transitions:
                if tr.sync is not None:
                    continue
                if counts[ti][idx[tr.source]] == 0:
                    continue
                if tr.guard is not None and not tr.guard.evaluate(env):
                    continue
                new_vars = _apply_updates(tr.updates, vars_now, self.bounds)
                if new_vars is None:
                    continue
                new_counts = self._move(counts, ti, idx[tr.source], idx[tr.target])
                yield (
                    tr.kind,
                    (new_counts, tuple(new_vars[n] for n in self.var_names)),
                    f"{tpl.name}: {tr.describe()}",
                )
        for stpl, str_, rtpl, rtr in self.sync_pairs:
            si = self._tpl_index(stpl)
            ri = self._tpl_index(rtpl)
            s_src = self.loc_index[stpl.name][str_.source]
            r_src = self.loc_index[rtpl.name][rtr.source]
            if si == ri and s_src == r_src:
                if counts[si][s_src] < 2:
                    continue
            elif counts[si][s_src] < 1 or counts[ri][r_src] < 1:
                continue
            if str_.guard is not None and not str_.guard.evaluate(env):
                continue
            if rtr.guard is not None and not rtr.guard.evaluate(env):
                continue
            new_vars = _apply_updates(str_.updates, vars_now, self.bounds)
            if new_vars is None:
                continue
            new_vars = _apply_updates(rtr.updates, new_vars, self.bounds)
            if new_vars is None:
                continue
            new_counts = self._move(counts, si, s_src, self.loc_index[stpl.name][str_.target])
            new_counts = self._move(new_counts, ri, r_src, self.loc_index[rtpl.name][rtr.target])
            yield (
                str_.kind,
                (new_counts, tuple(new_vars[n] for n in self.var_names)),
                f"{stpl.name}: {str_.describe()} with {rtpl.name}: {rtr.describe()}",
            )

    def _tpl_index(self, tpl: Template) -> int:
        return self.model.templates.index(tpl)

    @staticmethod
    def _move(counts, ti: int, src: int, dst: int):
        vec = list(counts[ti])
        vec[src] -= 1
        vec[dst] += 1
        out = list(counts)
        out[ti] = tuple(vec)
        return tuple(out)

    def describe(self, config) -> dict:
        counts, var_values = config
        return {
            "templates": {
                tpl.name: dict(zip(tpl.locations, counts[ti]))
                for ti, tpl in enumerate(self.model.templates)
            },
            "vars": dict(zip(self.var_names, var_values)),
        }

    def label(self, config) -> str:
        counts, var_values = config
        parts = []
        for ti, tpl in enumerate(self.model.templates):
            for loc, c in zip(tpl.locations, counts[ti]):
                if c:
                    parts.append(f"{loc}x{c}")
        parts.extend(f"{n}={v}" for n, v in zip(self.var_names, var_values))
        return " ".join(parts)


class _ExplicitExpander(_CounterExpander):
    """Successor enumeration with per-replica identities (debug mode)."""

    def initial(self):
        locs = tuple(
            tuple(self.loc_index[tpl.name][tpl.initial] for _ in range(tpl.count))
            for tpl in self.model.templates
        )
        var_values = tuple(v.initial for v in self.model.shared_vars)
        return (locs, var_values)

    def _counts_of(self, locs):
        out = []
        for ti, tpl in enumerate(self.model.templates):
            vec = [0] * len(tpl.locations)
            for li in locs[ti]:
                vec[li] += 1
            out.append(tuple(vec))
        return tuple(out)

    def _env(self, config):
        locs, var_values = config
        counts = self._counts_of(locs)
        loc_counts = {
            tpl.name: dict(zip(tpl.locations, counts[ti]))
            for ti, tpl in enumerate(self.model.templates)
        }
        return build_eval_env(self.model, dict(zip(self.var_names, var_values)), loc_counts)

    def moves(self, config) -> Iterator[tuple[str, tuple, str]]:
        locs, _ = config
        env = self._env(config)
        vars_now = self._vars_dict(config)
        for ti, tpl in enumerate(self.model.templates):
            idx = self.loc_index[tpl.name]
            for tr in tpl.transitions:
                if tr.sync is not None:
                    continue
                if tr.guard is not None and not tr.guard.evaluate(env):
                    continue
                new_vars = _apply_updates(tr.updates, vars_now, self.bounds)
                if new_vars is None:
                    continue
                src = idx[tr.source]
                for j, li in enumerate(locs[ti]):
                    if li != src:
                        continue
                    new_locs = self._move_instance(locs, ti, j, idx[tr.target])
                    yield (
                        tr.kind,
                        (new_locs, tuple(new_vars[n] for n in self.var_names)),
                        f"{tpl.name}[{j}]: {tr.describe()}",
                    )
        for stpl, str_, rtpl, rtr in self.sync_pairs:
            si = self._tpl_index(stpl)
            ri = self._tpl_index(rtpl)
            if str_.guard is not None and not str_.guard.evaluate(env):
                continue
            if rtr.guard is not None and not rtr.guard.evaluate(env):
                continue
            new_vars = _apply_updates(str_.updates, vars_now, self.bounds)
            if new_vars is None:
                continue
            new_vars = _apply_updates(rtr.updates, new_vars, self.bounds)
            if new_vars is None:
                continue
            s_src = self.loc_index[stpl.name][str_.source]
            r_src = self.loc_index[rtpl.name][rtr.source]
            final_vars = tuple(new_vars[n] for n in self.var_names)
            for j, lj in enumerate(locs[si]):
                if lj != s_src:
                    continue
                for l, ll in enumerate(locs[ri]):
                    if ll != r_src:
                        continue
                    if si == ri and j == l:
                        continue  # a replica cannot rendezvous with itself
                    new_locs = self._move_instance(
                        locs, si, j, self.loc_index[stpl.name][str_.target]
                    )
                    new_locs = self._move_instance(
                        new_locs, ri, l, self.loc_index[rtpl.name][rtr.target]
                    )
                    yield (
                        str_.kind,
                        (new_locs, final_vars),
                        f"{stpl.name}[{j}]: {str_.describe()} with {rtpl.name}[{l}]: {rtr.describe()}",
                    )

    @staticmethod
    def _move_instance(locs, ti: int, j: int, dst: int):
        vec = list(locs[ti])
        vec[j] = dst
        out = list(locs)
        out[ti] = tuple(vec)
        return tuple(out)

    def describe(self, config) -> dict:
        locs, var_values = config
        return {
            "instances": {
                tpl.name: [tpl.locations[li] for li in locs[ti]]
                for ti, tpl in enumerate(self.model.templates)
            },
            "vars": dict(zip(self.var_names, var_values)),
        }

    def label(self, config) -> str:
        locs, var_values = config
        parts = []
        for ti, tpl in enumerate(self.model.templates):
            for j, li in enumerate(locs[ti]):
                parts.append(f"{tpl.name}{j}:{tpl.locations[li]}")
        parts.extend(f"{n}={v}" for n, v in zip(self.var_names, var_values))
        return " ".join(parts)


def _compile(expander, max_configs: int, with_labels: bool):
    init = expander.initial()
    ids: dict = {init: 0}
    configs = [init]
    is_error = [expander.is_error(init)]
    queue = deque([0])
    edges = {"controlled": [], "uncontrolled": [], "repair": []}

    error_cache: dict = {init: is_error[0]}

    def error_of(cfg) -> bool:
        flag = error_cache.get(cfg)
        if flag is None:
            flag = expander.is_error(cfg)
            error_cache[cfg] = flag
        return flag

    while queue:
        sid = queue.popleft()
        if is_error[sid]:
            continue  # error configurations are sinks
        seen: dict[tuple, str] = {}
        for kind, target_cfg, what in expander.moves(configs[sid]):
            target_error = error_of(target_cfg)
            if target_error and kind == "C":
                continue  # the controller never elects to enter an error state
            if target_error and kind == "R":
                raise CompileError(
                    f"repair move reaches an error configuration: {what} from "
                    f"{expander.describe(configs[sid])}"
                )
            tid = ids.get(target_cfg)
            if tid is None:
                if len(configs) >= max_configs:
                    raise StateSpaceCapExceeded(max_configs)
                tid = len(configs)
                ids[target_cfg] = tid
                configs.append(target_cfg)
                is_error.append(target_error)
                queue.append(tid)
            prior = seen.get((tid,))
            if prior == kind:
                continue  # same effect reached twice; one edge is enough
            if prior is not None and prior != kind:
                raise CompileError(
                    f"moves of kinds {prior} and {kind} have the same effect from "
                    f"{expander.describe(configs[sid])} to {expander.describe(target_cfg)}; "
                    "the game graph needs the kinds to stay disjoint"
                )
            seen[(tid,)] = kind
            edges[_KIND_NAME[kind]].append((sid, tid))

    labels = None
    if with_labels:
        labels = {i: expander.label(cfg) for i, cfg in enumerate(configs)}
    system = TransitionSystem(
        num_states=len(configs),
        initial=0,
        errors=[i for i, flag in enumerate(is_error) if flag],
        controlled=edges["controlled"],
        uncontrolled=edges["uncontrolled"],
        repair=edges["repair"],
        labels=labels,
    )

    suc_c = system.suc_lists("controlled")
    for s in sorted(system.non_error):
        if not suc_c[s]:
            raise CompileError(
                "reachable non-error configuration offers the controller no move: "
                f"{expander.describe(configs[s])} (state {s}); give the model an "
                "always-enabled controlled transition or extend the error predicate"
            )

    state_dict = {i: expander.describe(cfg) for i, cfg in enumerate(configs)}
    return system, state_dict


def compile_model(
    model: CefsmModel,
    max_configs: int = DEFAULT_CONFIG_CAP,
    with_labels: bool = False,
) -> tuple[TransitionSystem, dict[int, dict]]:
    """Compile with counter abstraction.  Returns the reachable system and a
    dictionary mapping every state id to its configuration."""
    return _compile(_CounterExpander(model), max_configs, with_labels)


def compile_explicit(
    model: CefsmModel,
    max_configs: int = DEFAULT_CONFIG_CAP,
    with_labels: bool = False,
) -> tuple[TransitionSystem, dict[int, dict]]:
    """Compile with per-replica identities; replica counts are capped at 3
    because the product blows up.  Exists to validate the counter
    abstraction."""
    for tpl in model.templates:
        if tpl.count > 3:
            raise CompileError(
                f"template {tpl.name}: identity-tracking compilation is limited to "
                f"3 replicas, got {tpl.count}"
            )
    return _compile(_ExplicitExpander(model), max_configs, with_labels)
