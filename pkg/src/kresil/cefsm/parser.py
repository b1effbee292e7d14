"""Line-oriented parser for ``.cefsm`` model files.

The format is deliberately diff-friendly: one declaration per line, grouped
under explicit section headers.  ``#`` starts a comment; indentation is not
significant.

::

    vars
      crp 0..3 = 3            # name  low..high = initial

    channels
      fd rs

    template Processor 3      # name, replica count
      locations Run Free Down
      init Run
      U Run -> Down : crp--, cfp++
      C Run -> Free [crp > 1] : crp--
      C Free -> Repairing !fd
      R Repairing -> Free !rs

    errors
      cfp >= crp              # several lines are OR-ed together

Transitions are ``KIND SRC -> DST [guard] !chan|?chan : updates`` where the
guard, sync action, and update list are each optional.  Updates are ``var++``,
``var--`` or ``var = const``, comma-separated.
"""

from __future__ import annotations

import re

from .model import (
    CefsmModel,
    CefsmStaticError,
    CefsmSyntaxError,
    Expr,
    LocalTransition,
    SharedVar,
    Template,
    Update,
)

_SECTION_WORDS = {"vars", "channels", "template", "errors"}

_VAR_RE = re.compile(
    r"^(?P<name>[A-Za-z_]\w*)\s+(?P<low>-?\d+)\s*\.\.\s*(?P<high>-?\d+)\s*=\s*(?P<init>-?\d+)$"
)
_TEMPLATE_RE = re.compile(r"^template\s+(?P<name>[A-Za-z_]\w*)\s+(?P<count>\d+)$")
_TRANS_RE = re.compile(
    r"^(?P<kind>[UCR])\s+(?P<src>[A-Za-z_]\w*)\s*->\s*(?P<dst>[A-Za-z_]\w*)"
    r"(?:\s*\[(?P<guard>[^\]]*)\])?"
    r"(?:\s*(?P<dir>[!?])(?P<chan>[A-Za-z_]\w*))?"
    r"(?:\s*:\s*(?P<updates>.*))?$"
)
_UPDATE_RE = re.compile(
    r"^(?P<var>[A-Za-z_]\w*)\s*(?:(?P<inc>\+\+)|(?P<dec>--)|=\s*(?P<value>-?\d+))$"
)

_IDENT_RE = re.compile(r"^[A-Za-z_]\w*$")


def _strip(line: str) -> str:
    if "#" in line:
        line = line[: line.index("#")]
    return line.strip()


def _parse_updates(text: str, line_no: int) -> tuple[Update, ...]:
    updates = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            raise CefsmSyntaxError(line_no, "empty update in update list")
        m = _UPDATE_RE.match(part)
        if not m:
            raise CefsmSyntaxError(
                line_no, f"bad update {part!r} (expected var++, var-- or var = const)"
            )
        if m.group("inc"):
            updates.append(Update(m.group("var"), "inc"))
        elif m.group("dec"):
            updates.append(Update(m.group("var"), "dec"))
        else:
            updates.append(Update(m.group("var"), "set", int(m.group("value"))))
    return tuple(updates)


class _TemplateBuilder:
    def __init__(self, name: str, count: int, line: int):
        self.name = name
        self.count = count
        self.line = line
        self.locations: list[str] = []
        self.initial: str | None = None
        self.transitions: list[LocalTransition] = []

    def build(self) -> Template:
        if not self.locations:
            raise CefsmStaticError(f"template {self.name}: no locations declared")
        if self.initial is None:
            raise CefsmStaticError(f"template {self.name}: missing init line")
        return Template(
            name=self.name,
            count=self.count,
            locations=tuple(self.locations),
            initial=self.initial,
            transitions=tuple(self.transitions),
        )


def parse(text: str) -> CefsmModel:
    """Parse model text into a statically checked :class:`CefsmModel`.

    Raises :class:`CefsmSyntaxError` with a line number for malformed lines
    and :class:`CefsmStaticError` for consistency problems (undeclared names,
    dangling channels, kind mismatches across a synchronization, ...).
    """
    shared_vars: list[SharedVar] = []
    channels: list[str] = []
    builders: list[_TemplateBuilder] = []
    error_exprs: list[tuple[Expr, int]] = []

    section: str | None = None
    current: _TemplateBuilder | None = None
    saw_anything = False

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        saw_anything = True
        head = line.split(None, 1)[0]

        if head in _SECTION_WORDS:
            if head == "template":
                m = _TEMPLATE_RE.match(line)
                if not m:
                    raise CefsmSyntaxError(
                        line_no, "expected: template <Name> <replica count>"
                    )
                current = _TemplateBuilder(m.group("name"), int(m.group("count")), line_no)
                builders.append(current)
                section = "template"
            else:
                section = head
                current = None
            continue

        if section == "vars":
            m = _VAR_RE.match(line)
            if not m:
                raise CefsmSyntaxError(line_no, "expected: <name> <low>..<high> = <initial>")
            shared_vars.append(
                SharedVar(
                    m.group("name"),
                    int(m.group("low")),
                    int(m.group("high")),
                    int(m.group("init")),
                )
            )
        elif section == "channels":
            for name in line.split():
                if not _IDENT_RE.match(name):
                    raise CefsmSyntaxError(line_no, f"bad channel name {name!r}")
                channels.append(name)
        elif section == "template":
            assert current is not None
            if head == "locations":
                names = line.split()[1:]
                if not names:
                    raise CefsmSyntaxError(line_no, "locations line names no locations")
                current.locations.extend(names)
            elif head == "init":
                parts = line.split()
                if len(parts) != 2:
                    raise CefsmSyntaxError(line_no, "expected: init <location>")
                current.initial = parts[1]
            else:
                m = _TRANS_RE.match(line)
                if not m:
                    raise CefsmSyntaxError(
                        line_no,
                        "expected transition: U|C|R SRC -> DST [guard] !ch|?ch : updates",
                    )
                guard = Expr(m.group("guard"), line_no) if m.group("guard") else None
                sync = (m.group("dir"), m.group("chan")) if m.group("dir") else None
                updates = (
                    _parse_updates(m.group("updates"), line_no) if m.group("updates") else ()
                )
                current.transitions.append(
                    LocalTransition(
                        kind=m.group("kind"),
                        source=m.group("src"),
                        target=m.group("dst"),
                        guard=guard,
                        sync=sync,
                        updates=updates,
                        line=line_no,
                    )
                )
        elif section == "errors":
            error_exprs.append((Expr(line, line_no), line_no))
        else:
            raise CefsmSyntaxError(
                line_no, f"statement outside any section: {line!r}"
            )

    if not saw_anything:
        raise CefsmSyntaxError(1, "empty model")
    if not builders:
        raise CefsmStaticError("model declares no templates")

    predicate: Expr | None = None
    if error_exprs:
        if len(error_exprs) == 1:
            predicate = error_exprs[0][0]
        else:
            joined = " or ".join(f"({e.text})" for e, _ in error_exprs)
            predicate = Expr(joined, error_exprs[0][1])

    model = CefsmModel(
        templates=tuple(b.build() for b in builders),
        shared_vars=tuple(shared_vars),
        channels=tuple(channels),
        error_predicate=predicate,
    )
    _static_check(model)
    return model


def _static_check(model: CefsmModel) -> None:
    var_names = set()
    for v in model.shared_vars:
        if v.name in var_names:
            raise CefsmStaticError(f"shared variable {v.name} declared twice")
        var_names.add(v.name)
        if v.low > v.high:
            raise CefsmStaticError(f"variable {v.name}: empty range {v.low}..{v.high}")
        if not (v.low <= v.initial <= v.high):
            raise CefsmStaticError(
                f"variable {v.name}: initial {v.initial} outside {v.low}..{v.high}"
            )

    chan_names = set()
    for c in model.channels:
        if c in chan_names:
            raise CefsmStaticError(f"channel {c} declared twice")
        chan_names.add(c)

    tpl_names = set()
    for tpl in model.templates:
        if tpl.name in tpl_names:
            raise CefsmStaticError(f"template {tpl.name} declared twice")
        tpl_names.add(tpl.name)
        if tpl.count < 1:
            raise CefsmStaticError(f"template {tpl.name}: replica count must be >= 1")
        if len(set(tpl.locations)) != len(tpl.locations):
            raise CefsmStaticError(f"template {tpl.name}: duplicate location names")
        if tpl.initial not in tpl.locations:
            raise CefsmStaticError(
                f"template {tpl.name}: init location {tpl.initial} not declared"
            )
        if tpl.name in var_names:
            raise CefsmStaticError(f"name {tpl.name} used as both template and variable")

    locations = {t.name: set(t.locations) for t in model.templates}

    def check_expr(expr: Expr, where: str) -> None:
        for name in expr.names:
            if name not in var_names:
                raise CefsmStaticError(f"{where}: undeclared variable {name!r}")
        for tpl_name, loc in expr.counts:
            if tpl_name not in locations:
                raise CefsmStaticError(f"{where}: unknown template {tpl_name!r}")
            if loc not in locations[tpl_name]:
                raise CefsmStaticError(
                    f"{where}: template {tpl_name} has no location {loc!r}"
                )

    for tpl in model.templates:
        for tr in tpl.transitions:
            where = f"template {tpl.name}, line {tr.line}"
            if tr.source not in locations[tpl.name]:
                raise CefsmStaticError(f"{where}: undeclared source location {tr.source!r}")
            if tr.target not in locations[tpl.name]:
                raise CefsmStaticError(f"{where}: undeclared target location {tr.target!r}")
            if tr.guard is not None:
                check_expr(tr.guard, where)
            for up in tr.updates:
                if up.var not in var_names:
                    raise CefsmStaticError(f"{where}: update of undeclared variable {up.var!r}")
            if tr.sync is not None and tr.sync[1] not in chan_names:
                raise CefsmStaticError(f"{where}: undeclared channel {tr.sync[1]!r}")

    for chan in model.channels:
        senders = list(model.senders(chan))
        receivers = list(model.receivers(chan))
        if senders and not receivers:
            raise CefsmStaticError(f"channel {chan}: !{chan} has no ?{chan} partner")
        if receivers and not senders:
            raise CefsmStaticError(f"channel {chan}: ?{chan} has no !{chan} partner")
        kinds = {tr.kind for _, tr in senders} | {tr.kind for _, tr in receivers}
        if len(kinds) > 1:
            raise CefsmStaticError(
                f"channel {chan}: mixed transition kinds {sorted(kinds)} across a "
                "synchronization; both endpoints must declare the same kind"
            )

    if model.error_predicate is not None:
        check_expr(model.error_predicate, "error predicate")
