"""Finite transition systems with failure, recovery, and repair moves.

A system is a directed graph over dense integer states ``0 .. num_states-1``
with three disjoint edge kinds:

* ``controlled`` moves the controller may propose (recovery decisions),
* ``uncontrolled`` moves the environment may force (failures),
* ``repair`` moves that happen on their own once enabled (completions of
  component recovery).

Error states are unrecoverable sinks.  Controlled and repair edges never touch
an error state; uncontrolled edges may lead into one.  Every non-error state
must offer at least one controlled move, so the controller is never stuck.

Systems are immutable after construction and safe to share between concurrent
solver runs.  Semantic rules are checked by :func:`validate`, which reports
violations as data instead of raising, so callers can show all problems at
once.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

KINDS = ("controlled", "uncontrolled", "repair")

Edge = tuple[int, int]


class TsfError(Exception):
    """Base class for transition-system errors."""


class TsfFormatError(TsfError):
    """A file or JSON document does not match the TSF format."""


class TsfValidationError(TsfError):
    """A system violates the structural rules; carries the violation list."""

    def __init__(self, violations: list["Violation"]):
        self.violations = violations
        lines = "; ".join(str(v) for v in violations[:8])
        more = "" if len(violations) <= 8 else f" (+{len(violations) - 8} more)"
        super().__init__(f"{len(violations)} violation(s): {lines}{more}")


@dataclass(frozen=True)
class Violation:
    """One broken rule, naming the rule and the offending state or edge."""

    rule: str
    subject: tuple
    message: str

    def __str__(self) -> str:
        return f"[{self.rule}] {self.message}"


def _as_edges(raw: Iterable, kind: str, num_states: int) -> tuple[Edge, ...]:
    edges = []
    for item in raw:
        pair = tuple(item)
        if len(pair) != 2 or not all(isinstance(x, int) for x in pair):
            raise ValueError(f"{kind} edge {item!r} is not a pair of ints")
        s, t = pair
        if not (0 <= s < num_states and 0 <= t < num_states):
            raise ValueError(f"{kind} edge ({s},{t}) out of range [0,{num_states})")
        edges.append((s, t))
    # canonical order; duplicates are kept so validate() can report them
    return tuple(sorted(edges))


class TransitionSystem:
    """Immutable game graph with an initial state and sink error states.

    States are dense integers; optional ``labels`` attach human-readable names
    for reporting only.  Edge lists are stored sorted by source and exposed as
    adjacency lists so all fixed-point passes stay linear in the edge count.
    """

    __slots__ = (
        "num_states",
        "initial",
        "errors",
        "controlled",
        "uncontrolled",
        "repair",
        "labels",
        "allow_overlap",
        "_suc",
        "_pred",
        "_non_error",
    )

    def __init__(
        self,
        num_states: int,
        initial: int,
        errors: Iterable[int],
        controlled: Iterable,
        uncontrolled: Iterable,
        repair: Iterable = (),
        labels: Mapping[int, str] | None = None,
        allow_overlap: bool = False,
    ):
        if num_states < 1:
            raise ValueError("num_states must be positive")
        if not (0 <= initial < num_states):
            raise ValueError(f"initial state {initial} out of range [0,{num_states})")
        errs = frozenset(errors)
        for e in errs:
            if not (0 <= e < num_states):
                raise ValueError(f"error state {e} out of range [0,{num_states})")
        self.num_states = num_states
        self.initial = initial
        self.errors = errs
        self.controlled = _as_edges(controlled, "controlled", num_states)
        self.uncontrolled = _as_edges(uncontrolled, "uncontrolled", num_states)
        self.repair = _as_edges(repair, "repair", num_states)
        lbl = {}
        if labels:
            for s, name in labels.items():
                s = int(s)
                if not (0 <= s < num_states):
                    raise ValueError(f"label for out-of-range state {s}")
                lbl[s] = str(name)
        self.labels = lbl
        self.allow_overlap = allow_overlap

        suc: dict[str, list[list[int]]] = {}
        pred: dict[str, list[list[int]]] = {}
        for kind in KINDS:
            fwd: list[list[int]] = [[] for _ in range(num_states)]
            bwd: list[list[int]] = [[] for _ in range(num_states)]
            for s, t in self.edges(kind):
                fwd[s].append(t)
                bwd[t].append(s)
            suc[kind] = fwd
            pred[kind] = bwd
        self._suc = suc
        self._pred = pred
        self._non_error = frozenset(range(num_states)) - errs

    # -- structure access ---------------------------------------------------

    def edges(self, kind: str) -> tuple[Edge, ...]:
        if kind == "controlled":
            return self.controlled
        if kind == "uncontrolled":
            return self.uncontrolled
        if kind == "repair":
            return self.repair
        raise ValueError(f"unknown edge kind {kind!r}")

    def successors(self, s: int, kind: str) -> frozenset[int]:
        """Targets of edges of the given kind from ``s``."""
        if not (0 <= s < self.num_states):
            raise ValueError(f"state {s} out of range [0,{self.num_states})")
        if kind not in KINDS:
            raise ValueError(f"unknown edge kind {kind!r}")
        return frozenset(self._suc[kind][s])

    def suc_lists(self, kind: str) -> list[list[int]]:
        """Adjacency lists by source state.  Treat as read-only."""
        return self._suc[kind]

    def pred_lists(self, kind: str) -> list[list[int]]:
        """Reverse adjacency lists by target state.  Treat as read-only."""
        return self._pred[kind]

    @property
    def non_error(self) -> frozenset[int]:
        return self._non_error

    @property
    def size(self) -> int:
        """max(|states|, |edges|), the conventional size measure."""
        n_edges = len(self.controlled) + len(self.uncontrolled) + len(self.repair)
        return max(self.num_states, n_edges)

    def label(self, s: int) -> str:
        return self.labels.get(s, str(s))

    # -- equality is structural (flags are not part of the structure) -------

    def __eq__(self, other) -> bool:
        if not isinstance(other, TransitionSystem):
            return NotImplemented
        return (
            self.num_states == other.num_states
            and self.initial == other.initial
            and self.errors == other.errors
            and self.controlled == other.controlled
            and self.uncontrolled == other.uncontrolled
            and self.repair == other.repair
            and self.labels == other.labels
        )

    __hash__ = None  # mutable labels dict; compare structurally only

    def __repr__(self) -> str:
        return (
            f"TransitionSystem(states={self.num_states}, "
            f"c={len(self.controlled)}, u={len(self.uncontrolled)}, "
            f"r={len(self.repair)}, errors={len(self.errors)})"
        )


# -- validation ---------------------------------------------------------------


def validate(system: TransitionSystem) -> list[Violation]:
    """Check all structural rules; an empty report means the system is valid.

    Violations are data, not exceptions: each names the broken rule and the
    offending state or edge.
    """
    out: list[Violation] = []
    errs = system.errors

    for kind in KINDS:
        for s, t in system.edges(kind):
            if s in errs:
                out.append(
                    Violation(
                        "error-sink",
                        (s, t),
                        f"error state {s} has an outgoing {kind} edge ({s},{t}); "
                        "error states must be sinks",
                    )
                )
            elif kind in ("controlled", "repair") and t in errs:
                out.append(
                    Violation(
                        f"{kind}-into-error",
                        (s, t),
                        f"{kind} edge ({s},{t}) enters error state {t}; "
                        f"{kind} edges must connect non-error states",
                    )
                )

    for kind in KINDS:
        edges = system.edges(kind)
        for i in range(1, len(edges)):
            if edges[i] == edges[i - 1]:
                out.append(
                    Violation(
                        "duplicate-edge",
                        edges[i],
                        f"duplicate {kind} edge {edges[i]}",
                    )
                )

    if not system.allow_overlap:
        seen: dict[Edge, str] = {}
        for kind in KINDS:
            for e in set(system.edges(kind)):
                if e in seen:
                    out.append(
                        Violation(
                            "overlapping-kinds",
                            e,
                            f"edge {e} appears as both {seen[e]} and {kind}",
                        )
                    )
                else:
                    seen[e] = kind

    suc_c = system.suc_lists("controlled")
    for s in sorted(system.non_error):
        if not suc_c[s]:
            out.append(
                Violation(
                    "controlled-successor",
                    (s,),
                    f"non-error state {s} ({system.label(s)}) has no controlled successor",
                )
            )

    return out


# -- JSON format --------------------------------------------------------------
#
# {
#   "num_states": N, "initial": i, "errors": [..],
#   "controlled": [[s,t],..], "uncontrolled": [[s,t],..], "repair": [[s,t],..],
#   "labels": {"0": "name", ...}
# }


def to_json_dict(system: TransitionSystem) -> dict:
    return {
        "num_states": system.num_states,
        "initial": system.initial,
        "errors": sorted(system.errors),
        "controlled": [list(e) for e in system.controlled],
        "uncontrolled": [list(e) for e in system.uncontrolled],
        "repair": [list(e) for e in system.repair],
        "labels": {str(s): name for s, name in sorted(system.labels.items())},
    }


def from_json_dict(doc: dict, allow_overlap: bool = False) -> TransitionSystem:
    if not isinstance(doc, dict):
        raise TsfFormatError("top-level JSON value must be an object")
    for field in ("num_states", "initial", "controlled", "uncontrolled"):
        if field not in doc:
            raise TsfFormatError(f"missing required field {field!r}")
    try:
        return TransitionSystem(
            num_states=doc["num_states"],
            initial=doc["initial"],
            errors=doc.get("errors", []),
            controlled=doc["controlled"],
            uncontrolled=doc["uncontrolled"],
            repair=doc.get("repair", []),
            labels=doc.get("labels") or {},
            allow_overlap=allow_overlap,
        )
    except (TypeError, ValueError) as exc:
        raise TsfFormatError(str(exc)) from exc


def dumps(system: TransitionSystem) -> str:
    return json.dumps(to_json_dict(system), indent=2, sort_keys=True) + "\n"


def load(path: str | Path, allow_overlap: bool = False) -> TransitionSystem:
    """Parse and validate a TSF JSON file.

    Raises :class:`TsfFormatError` on malformed documents (with line/field
    diagnostics) and :class:`TsfValidationError` when the parsed system breaks
    a structural rule.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise TsfFormatError(f"{path}: line {exc.lineno}, col {exc.colno}: {exc.msg}") from exc
    system = from_json_dict(doc, allow_overlap=allow_overlap)
    violations = validate(system)
    if violations:
        raise TsfValidationError(violations)
    return system


def save(system: TransitionSystem, path: str | Path) -> None:
    """Validate and write a system; refuses to persist an invalid one."""
    violations = validate(system)
    if violations:
        raise TsfValidationError(violations)
    Path(path).write_text(dumps(system))


# -- DOT export ---------------------------------------------------------------


def to_dot(system: TransitionSystem, name: str = "tsf") -> str:
    """Render the system as GraphViz DOT.

    Controlled edges are solid, uncontrolled dashed, repair dotted; error
    states are double-circled and the initial state is marked with an
    incoming arrow.
    """

    def q(text: str) -> str:
        return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'

    lines = [f"digraph {name} {{", "  rankdir=LR;", "  node [shape=circle];"]
    lines.append("  __init [shape=point, label=\"\"];")
    for s in range(system.num_states):
        shape = "doublecircle" if s in system.errors else "circle"
        lines.append(f"  {s} [label={q(system.label(s))}, shape={shape}];")
    lines.append(f"  __init -> {system.initial};")
    styles = {"controlled": "solid", "uncontrolled": "dashed", "repair": "dotted"}
    for kind in KINDS:
        for s, t in system.edges(kind):
            lines.append(f"  {s} -> {t} [style={styles[kind]}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
