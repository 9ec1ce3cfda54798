"""AST node types for NYoSh scripts.

Every node is a frozen dataclass; trees are immutable after construction and
safe to share between threads.  Children are stored in tuples.  Source
locations never participate in structural equality, so two parses of the same
text compare equal regardless of layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union


PLUGIN_KINDS = ("ALIGNER", "ALIGNMENT_ANALYSIS", "RESOURCE", "ARTIFACT_INSTALL", "TASK")

DECLARED_TYPES = ("string", "int", "boolean", "string[]")

BUILTIN_METHODS = (
    "toUpperCase",
    "split",
    "equals",
    "format",
    "getBaseName",
    "getFullPath",
    "length",
    "index",
)

DEFAULT_ERROR_MANAGEMENT = "GobyWebDefaultErrorManagement"

INDENT = "  "


@dataclass(frozen=True)
class SourceLocation:
    file: str
    line: int  # 1-based
    column: int  # 1-based

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


def _loc_field():
    return field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------------------
# GString components
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Literal:
    """A plain text span inside a GString."""

    text: str
    loc: Optional[SourceLocation] = _loc_field()


@dataclass(frozen=True)
class VarReference:
    """``${name}`` resolving to a script variable that is lexically in scope."""

    name: str
    loc: Optional[SourceLocation] = _loc_field()


@dataclass(frozen=True)
class EnvVarReader:
    """``${name}`` resolving to a variable provided by a loaded environment source."""

    name: str
    loc: Optional[SourceLocation] = _loc_field()


GStringComponent = Union[Literal, VarReference, EnvVarReader]


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StringLiteral:
    text: str
    loc: Optional[SourceLocation] = _loc_field()


@dataclass(frozen=True)
class IntLiteral:
    value: int
    loc: Optional[SourceLocation] = _loc_field()


@dataclass(frozen=True)
class BoolLiteral:
    value: bool
    loc: Optional[SourceLocation] = _loc_field()


@dataclass(frozen=True)
class VarRef:
    name: str
    loc: Optional[SourceLocation] = _loc_field()


@dataclass(frozen=True)
class GString:
    """An interpolated string: literal spans mixed with variable references.

    ``raw_text`` is the staging slot used by the micro-parsing intentions: a
    pasted fragment is stored there verbatim until an intention converts it
    into components and clears the slot.  When ``raw_text`` is empty the
    components fully determine the value.
    """

    components: tuple = ()
    raw_text: Optional[str] = None
    loc: Optional[SourceLocation] = _loc_field()


@dataclass(frozen=True)
class PathPattern:
    """A filename pattern expanded against the filesystem at evaluation time."""

    pattern: GString
    loc: Optional[SourceLocation] = _loc_field()


@dataclass(frozen=True)
class Ternary:
    condition: "Expression"
    then: "Expression"
    otherwise: "Expression"
    loc: Optional[SourceLocation] = _loc_field()


@dataclass(frozen=True)
class MethodCall:
    receiver: "Expression"
    method: str  # one of BUILTIN_METHODS
    args: tuple = ()
    loc: Optional[SourceLocation] = _loc_field()


@dataclass(frozen=True)
class ArrayIndex:
    array: "Expression"
    index: "Expression"
    loc: Optional[SourceLocation] = _loc_field()


Expression = Union[
    StringLiteral,
    IntLiteral,
    BoolLiteral,
    VarRef,
    GString,
    PathPattern,
    Ternary,
    MethodCall,
    ArrayIndex,
]


# ---------------------------------------------------------------------------
# Command elements
# ---------------------------------------------------------------------------

class OperatorKind(Enum):
    PIPE = "|"
    AND = "&&"
    OR = "||"
    SEQ = ";"
    BACKGROUND = "&"


@dataclass(frozen=True)
class Command:
    text: GString
    loc: Optional[SourceLocation] = _loc_field()


@dataclass(frozen=True)
class Operator:
    kind: OperatorKind
    loc: Optional[SourceLocation] = _loc_field()


@dataclass(frozen=True)
class RedirectToFile:
    target: GString
    loc: Optional[SourceLocation] = _loc_field()


@dataclass(frozen=True)
class FetchCommand:
    slot: str
    loc: Optional[SourceLocation] = _loc_field()


@dataclass(frozen=True)
class PushCommand:
    slot: str
    loc: Optional[SourceLocation] = _loc_field()


CommandElement = Union[Command, Operator, RedirectToFile, FetchCommand, PushCommand]


# ---------------------------------------------------------------------------
# Environment source specs (syntactic form, resolved by envsource)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProcessEnvSource:
    """The ``Java Environment`` source: variables of the host process."""

    loc: Optional[SourceLocation] = _loc_field()


@dataclass(frozen=True)
class PluginSource:
    """The ``GobyWebSource`` source: variables derived from the plugin config."""

    loc: Optional[SourceLocation] = _loc_field()


@dataclass(frozen=True)
class MapFileSource:
    """``MapFile: <path>`` source: KEY=VALUE definitions read from a file."""

    path: GString
    loc: Optional[SourceLocation] = _loc_field()


EnvironmentSourceSpec = Union[ProcessEnvSource, PluginSource, MapFileSource]


# ---------------------------------------------------------------------------
# Statements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VarDecl:
    name: str
    decl_type: str  # one of DECLARED_TYPES
    initializer: Expression
    loc: Optional[SourceLocation] = _loc_field()


@dataclass(frozen=True)
class Assignment:
    target: str
    value: Expression
    loc: Optional[SourceLocation] = _loc_field()


@dataclass(frozen=True)
class If:
    condition: Expression
    then_body: tuple = ()
    else_body: Optional[tuple] = None
    loc: Optional[SourceLocation] = _loc_field()


@dataclass(frozen=True)
class Println:
    value: Expression
    loc: Optional[SourceLocation] = _loc_field()


@dataclass(frozen=True)
class ExpressionStatement:
    expression: Expression
    loc: Optional[SourceLocation] = _loc_field()


@dataclass(frozen=True)
class ExecuteCommand:
    """A command pipeline statement.

    ``raw_text`` is the micro-parsing staging slot; elements may be empty only
    while a raw fragment is staged.
    """

    elements: tuple = ()
    raw_text: Optional[str] = None
    loc: Optional[SourceLocation] = _loc_field()


@dataclass(frozen=True)
class LoadEnvironmentSources:
    sources: tuple = ()
    loc: Optional[SourceLocation] = _loc_field()


@dataclass(frozen=True)
class StepBlock:
    description: str
    body: tuple = ()
    loc: Optional[SourceLocation] = _loc_field()


@dataclass(frozen=True)
class Fail:
    message: GString
    status_code: int = 1
    loc: Optional[SourceLocation] = _loc_field()


Statement = Union[
    VarDecl,
    Assignment,
    If,
    Println,
    ExpressionStatement,
    ExecuteCommand,
    LoadEnvironmentSources,
    StepBlock,
    Fail,
]


# ---------------------------------------------------------------------------
# Script structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PluginHeader:
    id: str
    kind: str  # one of PLUGIN_KINDS
    location: str
    loc: Optional[SourceLocation] = _loc_field()


@dataclass(frozen=True)
class Param:
    name: str
    decl_type: str
    loc: Optional[SourceLocation] = _loc_field()


@dataclass(frozen=True)
class EntryPoint:
    name: str
    params: tuple = ()
    body: tuple = ()
    designation: Optional[str] = None  # kind word, e.g. "aligner"
    loc: Optional[SourceLocation] = _loc_field()

    @property
    def is_designated(self) -> bool:
        return self.designation is not None


@dataclass(frozen=True)
class Script:
    name: str
    header: Optional[PluginHeader] = None
    error_management: str = DEFAULT_ERROR_MANAGEMENT
    entry_points: tuple = ()
    loc: Optional[SourceLocation] = _loc_field()


# ---------------------------------------------------------------------------
# GString normalization
# ---------------------------------------------------------------------------

def normalize_gstring(g: GString) -> GString:
    """Merge adjacent literal components and drop empty ones.

    The result is value-equivalent to the input.  Normalization is idempotent;
    a GString that would otherwise end up without any component keeps a single
    empty literal.
    """
    out = []
    for comp in g.components:
        if isinstance(comp, Literal):
            if comp.text == "":
                continue
            if out and isinstance(out[-1], Literal):
                out[-1] = Literal(out[-1].text + comp.text, loc=out[-1].loc)
                continue
        out.append(comp)
    if not out:
        out.append(Literal(""))
    return GString(components=tuple(out), raw_text=g.raw_text, loc=g.loc)


def gstring_of_text(text: str) -> GString:
    """A single-literal GString holding ``text`` verbatim."""
    return GString(components=(Literal(text),))


# ---------------------------------------------------------------------------
# ExecuteCommand element placement
# ---------------------------------------------------------------------------

def _is_command_like(el) -> bool:
    return isinstance(el, (Command, FetchCommand, PushCommand, RedirectToFile))


def placement_faults(elements) -> list:
    """Scan an element list for placement problems.

    Returns ``(index, fault)`` pairs where fault is one of
    ``leading_operator``, ``consecutive_operators``, ``trailing_operator``,
    ``redirect_not_terminal``, ``missing_operator``, ``empty``.  A redirect may
    directly follow a command; anything other than ``;`` / ``&`` after a
    redirect is a fault.
    """
    faults = []
    if not elements:
        return [(0, "empty")]
    if isinstance(elements[0], Operator):
        faults.append((0, "leading_operator"))
    for i in range(1, len(elements)):
        prev, cur = elements[i - 1], elements[i]
        if isinstance(prev, Operator) and isinstance(cur, Operator):
            faults.append((i, "consecutive_operators"))
        elif isinstance(prev, RedirectToFile):
            if isinstance(cur, Operator) and cur.kind in (OperatorKind.SEQ, OperatorKind.BACKGROUND):
                continue
            faults.append((i, "redirect_not_terminal"))
        elif _is_command_like(prev) and _is_command_like(cur) and not isinstance(cur, RedirectToFile):
            faults.append((i, "missing_operator"))
    last = elements[-1]
    if isinstance(last, Operator) and last.kind in (
        OperatorKind.PIPE,
        OperatorKind.AND,
        OperatorKind.OR,
    ):
        faults.append((len(elements) - 1, "trailing_operator"))
    return faults


def alternation_ok(elements) -> bool:
    """True when an element list satisfies the execute-statement invariants."""
    return not placement_faults(elements)


# ---------------------------------------------------------------------------
# Pretty printing (the canonical concrete syntax)
# ---------------------------------------------------------------------------

def escape_string_literal(text: str) -> str:
    out = ['"']
    for ch in text:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def escape_gstring_text(text: str) -> str:
    """Escape a literal span for the bare GString notation.

    ``$`` always becomes ``\\$`` so it can never open a reference; a backslash
    is doubled only where the unescaping scan would otherwise eat it (before
    ``$`` or ``\\`` or at end of text, where it would read as a line
    continuation).
    """
    out = []
    n = len(text)
    for i, ch in enumerate(text):
        if ch == "\\":
            if i + 1 >= n or text[i + 1] in ("$", "\\"):
                out.append("\\\\")
            else:
                out.append("\\")
        elif ch == "$":
            out.append("\\$")
        else:
            out.append(ch)
    return "".join(out)


def gstring_bare_text(g: GString) -> str:
    """Render a GString in the bare interpolated notation (``a ${b} c``)."""
    if g.raw_text is not None:
        return g.raw_text
    out = []
    for comp in g.components:
        if isinstance(comp, Literal):
            out.append(escape_gstring_text(comp.text))
        else:
            out.append("${" + comp.name + "}")
    return "".join(out)


def gstring_concat_text(g: GString) -> str:
    """Render a GString in the quoted concatenation notation used by ``fail``
    messages and expression arguments (``"a " + ${b}``)."""
    parts = []
    for comp in g.components:
        if isinstance(comp, Literal):
            parts.append(escape_string_literal(comp.text))
        else:
            parts.append("${" + comp.name + "}")
    if not parts:
        parts.append('""')
    return " + ".join(parts)


def _gstring_top_text(g: GString) -> str:
    """Bare notation unless that text would re-parse as a structured
    expression, in which case fall back to the quoted form."""
    norm = normalize_gstring(g)
    comps = norm.components
    if len(comps) == 1 and isinstance(comps[0], Literal):
        from . import parser as _parser  # local import: parser depends on ast

        text = gstring_bare_text(norm)
        if text == "" or _parser.structured_parses(text):
            return escape_string_literal(comps[0].text)
        return text
    return gstring_bare_text(norm)


def expr_text(e: Expression, top: bool = False) -> str:
    """Canonical text for an expression.

    ``top`` marks statement-level positions (declaration initializers and
    println arguments) where GStrings use the bare interpolated notation.
    Nested positions use the quoted concatenation form so the text stays
    unambiguous inside argument lists.
    """
    if isinstance(e, StringLiteral):
        return escape_string_literal(e.text)
    if isinstance(e, IntLiteral):
        return str(e.value)
    if isinstance(e, BoolLiteral):
        return "true" if e.value else "false"
    if isinstance(e, VarRef):
        return e.name
    if isinstance(e, GString):
        if top:
            return _gstring_top_text(e)
        return gstring_concat_text(normalize_gstring(e))
    if isinstance(e, PathPattern):
        return gstring_bare_text(normalize_gstring(e.pattern))
    if isinstance(e, Ternary):
        return (
            expr_text(e.condition)
            + " ? "
            + expr_text(e.then)
            + " : "
            + expr_text(e.otherwise)
        )
    if isinstance(e, ArrayIndex):
        return expr_text(e.array) + "[" + expr_text(e.index) + "]"
    if isinstance(e, MethodCall):
        recv = expr_text(e.receiver)
        args = ", ".join(expr_text(a) for a in e.args)
        if e.method == "length":
            return recv + ".length"
        if e.method == "format":
            return "String.format(" + ", ".join([recv] + [expr_text(a) for a in e.args]) + ")"
        if e.method in ("getBaseName", "getFullPath"):
            return f"FilenameUtils.{e.method}({recv})"
        return f"{recv}.{e.method}({args})"
    raise TypeError(f"not an expression node: {e!r}")


def _source_spec_text(spec) -> str:
    if isinstance(spec, ProcessEnvSource):
        return "Java Environment"
    if isinstance(spec, PluginSource):
        return "GobyWebSource"
    if isinstance(spec, MapFileSource):
        return "MapFile: " + gstring_bare_text(normalize_gstring(spec.path))
    raise TypeError(f"not an environment source spec: {spec!r}")


def _element_text(el) -> str:
    if isinstance(el, Command):
        return gstring_bare_text(normalize_gstring(el.text))
    if isinstance(el, Operator):
        return el.kind.value
    if isinstance(el, RedirectToFile):
        return "redirect to file " + gstring_bare_text(normalize_gstring(el.target))
    if isinstance(el, FetchCommand):
        return "fetch " + el.slot
    if isinstance(el, PushCommand):
        return "push " + el.slot
    raise TypeError(f"not a command element: {el!r}")


def _statement_lines(stmt: Statement, depth: int) -> list:
    pad = INDENT * depth
    if isinstance(stmt, VarDecl):
        return [f"{pad}{stmt.decl_type} {stmt.name} = {expr_text(stmt.initializer, top=True)};"]
    if isinstance(stmt, Assignment):
        return [f"{pad}{stmt.target} = {expr_text(stmt.value, top=True)};"]
    if isinstance(stmt, Println):
        return [f"{pad}System.out.println({expr_text(stmt.value, top=True)});"]
    if isinstance(stmt, ExpressionStatement):
        return [f"{pad}{expr_text(stmt.expression)};"]
    if isinstance(stmt, Fail):
        msg = gstring_concat_text(normalize_gstring(stmt.message))
        return [f"{pad}fail {msg} {stmt.status_code}"]
    if isinstance(stmt, ExecuteCommand):
        if stmt.raw_text is not None:
            return [f"{pad}execute: {stmt.raw_text}"]
        return [f"{pad}execute: " + " ".join(_element_text(el) for el in stmt.elements)]
    if isinstance(stmt, LoadEnvironmentSources):
        inner = ", ".join(_source_spec_text(s) for s in stmt.sources)
        return [f"{pad}load environment sources {{ {inner} }}"]
    if isinstance(stmt, StepBlock):
        lines = [f"{pad}step {stmt.description} {{"]
        for s in stmt.body:
            lines.extend(_statement_lines(s, depth + 1))
        lines.append(f"{pad}}}")
        return lines
    if isinstance(stmt, If):
        lines = [f"{pad}if ({expr_text(stmt.condition)}) {{"]
        for s in stmt.then_body:
            lines.extend(_statement_lines(s, depth + 1))
        if stmt.else_body is not None:
            lines.append(f"{pad}}} else {{")
            for s in stmt.else_body:
                lines.extend(_statement_lines(s, depth + 1))
        lines.append(f"{pad}}}")
        return lines
    raise TypeError(f"not a statement node: {stmt!r}")


def _entry_point_lines(ep: EntryPoint, depth: int) -> list:
    pad = INDENT * depth
    prefix = (ep.designation + " ") if ep.designation else ""
    if ep.params:
        params = " " + ", ".join(f"{p.decl_type} {p.name}" for p in ep.params) + " "
    else:
        params = " "
    lines = [f"{pad}{prefix}entry point {ep.name}({params}) {{"]
    for s in ep.body:
        lines.extend(_statement_lines(s, depth + 1))
    lines.append(f"{pad}}}")
    return lines


def pretty_print(node) -> str:
    """Render a node in the canonical concrete syntax.

    For scripts the output is a complete source text whose re-parse is
    structurally equal to the input tree.
    """
    if isinstance(node, Script):
        lines = []
        if node.header is not None:
            lines.append("plugin system:")
            lines.append(f"id: {node.header.id}")
            lines.append(f"kind: {node.header.kind}")
            lines.append(f"location: {node.header.location}")
            lines.append("")
        lines.append(f"!script {node.name} error management: {node.error_management} {{")
        for ep in node.entry_points:
            lines.extend(_entry_point_lines(ep, 1))
        lines.append("}")
        return "\n".join(lines) + "\n"
    if isinstance(node, EntryPoint):
        return "\n".join(_entry_point_lines(node, 0)) + "\n"
    if isinstance(
        node,
        (
            VarDecl,
            Assignment,
            If,
            Println,
            ExpressionStatement,
            ExecuteCommand,
            LoadEnvironmentSources,
            StepBlock,
            Fail,
        ),
    ):
        return "\n".join(_statement_lines(node, 0)) + "\n"
    if isinstance(node, PluginHeader):
        return f"plugin system:\nid: {node.id}\nkind: {node.kind}\nlocation: {node.location}\n"
    if isinstance(node, GString):
        return gstring_bare_text(normalize_gstring(node))
    if isinstance(node, (Command, Operator, RedirectToFile, FetchCommand, PushCommand)):
        return _element_text(node)
    if isinstance(node, (ProcessEnvSource, PluginSource, MapFileSource)):
        return _source_spec_text(node)
    return expr_text(node)
