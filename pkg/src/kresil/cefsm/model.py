"""Data model for CEFSM specifications.

A model is a set of finite-state machine *templates*, each instantiated a
fixed number of times, communicating through bounded shared counters and
rendezvous channels.  Transitions carry a move kind (``U`` uncontrollable
failure, ``C`` controllable, ``R`` repair), an optional guard, an optional
synchronization action (``!ch`` send / ``?ch`` receive), and counter updates.

Guards and the error predicate are boolean expressions over shared variables
and location occupancy counts written ``Template.Location``.  They are parsed
through the ``ast`` module against a strict node whitelist, so a model file
can never execute arbitrary code.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass
from types import SimpleNamespace
from typing import Iterator


class CefsmError(Exception):
    """Base class for modeling-language problems."""


class CefsmSyntaxError(CefsmError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class CefsmStaticError(CefsmError):
    """The model parsed but fails a consistency rule."""


_ALLOWED_NODES = (
    ast.Expression,
    ast.BoolOp,
    ast.And,
    ast.Or,
    ast.UnaryOp,
    ast.Not,
    ast.USub,
    ast.Compare,
    ast.Eq,
    ast.NotEq,
    ast.Lt,
    ast.LtE,
    ast.Gt,
    ast.GtE,
    ast.BinOp,
    ast.Add,
    ast.Sub,
    ast.Mult,
    ast.Name,
    ast.Load,
    ast.Constant,
    ast.Attribute,
)


class Expr:
    """A validated integer/boolean expression over counters.

    ``names`` are the shared variables referenced; ``counts`` the
    (template, location) occupancy counts referenced.
    """

    __slots__ = ("text", "names", "counts", "_code")

    def __init__(self, text: str, line: int = 0):
        text = text.strip()
        if not text:
            raise CefsmSyntaxError(line, "empty expression")
        try:
            tree = ast.parse(text, mode="eval")
        except SyntaxError as exc:
            raise CefsmSyntaxError(line, f"bad expression {text!r}: {exc.msg}") from exc
        names: set[str] = set()
        counts: set[tuple[str, str]] = set()
        for node in ast.walk(tree):
            if not isinstance(node, _ALLOWED_NODES):
                raise CefsmSyntaxError(
                    line, f"unsupported construct {type(node).__name__} in {text!r}"
                )
            if isinstance(node, ast.Constant) and not isinstance(node.value, int):
                raise CefsmSyntaxError(line, f"only integer literals allowed in {text!r}")
            if isinstance(node, ast.Attribute):
                if not isinstance(node.value, ast.Name):
                    raise CefsmSyntaxError(line, f"bad occupancy reference in {text!r}")
                counts.add((node.value.id, node.attr))
            elif isinstance(node, ast.Name):
                names.add(node.id)
        # attribute bases are templates, not shared variables
        names -= {t for t, _ in counts}
        self.text = text
        self.names = frozenset(names)
        self.counts = frozenset(counts)
        self._code = compile(tree, "<cefsm-expr>", "eval")

    def evaluate(self, env: dict) -> int:
        return eval(self._code, {"__builtins__": {}}, env)

    def __repr__(self) -> str:
        return f"Expr({self.text!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Expr) and self.text == other.text

    def __hash__(self) -> int:
        return hash(self.text)


@dataclass(frozen=True)
class SharedVar:
    name: str
    low: int
    high: int
    initial: int


@dataclass(frozen=True)
class Update:
    """One counter update: ``var++``, ``var--`` or ``var = const``."""

    var: str
    op: str  # "inc" | "dec" | "set"
    value: int | None = None

    def apply(self, current: int) -> int:
        if self.op == "inc":
            return current + 1
        if self.op == "dec":
            return current - 1
        return self.value


@dataclass(frozen=True)
class LocalTransition:
    kind: str  # "U" | "C" | "R"
    source: str
    target: str
    guard: Expr | None = None
    sync: tuple[str, str] | None = None  # ("!" | "?", channel)
    updates: tuple[Update, ...] = ()
    line: int = 0

    def describe(self) -> str:
        parts = [f"{self.kind} {self.source} -> {self.target}"]
        if self.guard is not None:
            parts.append(f"[{self.guard.text}]")
        if self.sync is not None:
            parts.append(f"{self.sync[0]}{self.sync[1]}")
        return " ".join(parts)


@dataclass(frozen=True)
class Template:
    name: str
    count: int
    locations: tuple[str, ...]
    initial: str
    transitions: tuple[LocalTransition, ...]


@dataclass(frozen=True)
class CefsmModel:
    templates: tuple[Template, ...]
    shared_vars: tuple[SharedVar, ...]
    channels: tuple[str, ...]
    error_predicate: Expr | None = None

    def template(self, name: str) -> Template:
        for t in self.templates:
            if t.name == name:
                return t
        raise KeyError(name)

    def var_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.shared_vars)

    def senders(self, channel: str) -> Iterator[tuple[Template, LocalTransition]]:
        for tpl in self.templates:
            for tr in tpl.transitions:
                if tr.sync == ("!", channel):
                    yield tpl, tr

    def receivers(self, channel: str) -> Iterator[tuple[Template, LocalTransition]]:
        for tpl in self.templates:
            for tr in tpl.transitions:
                if tr.sync == ("?", channel):
                    yield tpl, tr


def build_eval_env(
    model: CefsmModel,
    var_values: dict[str, int],
    location_counts: dict[str, dict[str, int]],
) -> dict:
    """Environment for :meth:`Expr.evaluate`: shared variables by name plus
    one namespace per template exposing location counts as attributes."""
    env: dict = dict(var_values)
    for tpl in model.templates:
        env[tpl.name] = SimpleNamespace(**location_counts[tpl.name])
    return env
