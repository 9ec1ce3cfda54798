"""Recursive-descent parser for the NYoSh concrete syntax.

The syntax mirrors the workbench renderings: one statement per line, blocks
delimited by ``{`` and ``}``, ``execute:`` lines holding command pipelines, and
``${name}`` interpolation inside GStrings.  A line whose trailing backslash
count is odd continues on the next line (the continuation line is joined with
its leading whitespace removed).

Parsing is total: every failure is reported as a :class:`ParseError` value and
the parser resynchronizes at the next statement.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from . import ast
from .textscan import IDENT_RE, ScanError, find_unquoted, split_on_operators

ENTRY_DESIGNATIONS = (
    "aligner",
    "alignment_analysis",
    "resource",
    "artifact_install",
    "task",
)

_HEADER_ID_RE = re.compile(r"[A-Z0-9_]+")
_SCRIPT_RE = re.compile(
    r"!script\s+([A-Za-z_]\w*)(?:\s+error management:\s*([A-Za-z_]\w*))?\s*\{"
)
_ENTRY_RE = re.compile(
    r"(?:([a-z_]+)\s+)?entry point\s+([A-Za-z_]\w*)\s*\(\s*(.*?)\s*\)\s*(\{)?$"
)
_DECL_RE = re.compile(r"(string\[\]|string|int|boolean)\s+([A-Za-z_]\w*)\s*=(?!=)\s*(.*)$", re.S)
_ASSIGN_RE = re.compile(r"([A-Za-z_]\w*)\s*=(?!=)\s*(.*)$", re.S)
_IF_RE = re.compile(r"if\s*\((.*)\)\s*\{$", re.S)
_PRINTLN_RE = re.compile(r"System\.out\.println\((.*)\);?$", re.S)
_STEP_RE = re.compile(r"step\s+(.*?)\s*\{$", re.S)
_FETCH_RE = re.compile(r"fetch\s+([A-Za-z_]\w*)$")
_PUSH_RE = re.compile(r"push\s+([A-Za-z_]\w*)$")
_INT_RE = re.compile(r"-?\d+")

_REDIRECT_MARKER = "redirect to file"


@dataclass(frozen=True)
class ParseError:
    location: ast.SourceLocation
    message: str
    expected: Optional[str] = None

    def __str__(self) -> str:
        tail = f" (expected {self.expected})" if self.expected else ""
        return f"{self.location}: {self.message}{tail}"


class _StatementError(Exception):
    """Internal signal carrying a ParseError; never escapes parse_script."""

    def __init__(self, error: ParseError):
        super().__init__(str(error))
        self.error = error


class _ExprError(Exception):
    """A text span that is not a structured expression (may still be a GString)."""


def _err(loc: ast.SourceLocation, message: str, expected: Optional[str] = None):
    return _StatementError(ParseError(loc, message, expected))


# ---------------------------------------------------------------------------
# Logical lines
# ---------------------------------------------------------------------------

@dataclass
class _Line:
    text: str
    line: int
    column: int


def _trailing_backslashes(s: str) -> int:
    n = 0
    for ch in reversed(s):
        if ch == "\\":
            n += 1
        else:
            break
    return n


def logical_lines(text: str, file: str) -> list:
    """Physical lines joined on backslash continuations, blanks dropped."""
    out = []
    physical = text.split("\n")
    i = 0
    while i < len(physical):
        raw = physical[i].rstrip("\r")
        start = i + 1
        while _trailing_backslashes(raw) % 2 == 1 and i + 1 < len(physical):
            i += 1
            raw = raw[:-1] + physical[i].rstrip("\r").lstrip()
        stripped = raw.strip()
        if stripped:
            col = len(raw) - len(raw.lstrip()) + 1
            out.append(_Line(stripped, start, col))
        i += 1
    return out


# ---------------------------------------------------------------------------
# GStrings in concrete syntax
# ---------------------------------------------------------------------------

def _make_ref(name: str, scope: frozenset, loc: ast.SourceLocation):
    if name in scope:
        return ast.VarReference(name, loc=loc)
    return ast.EnvVarReader(name, loc=loc)


def parse_gstring_text(text: str, scope: frozenset, loc: ast.SourceLocation) -> ast.GString:
    """Parse the bare interpolated notation into GString components.

    ``\\$`` and ``\\\\`` unescape; other backslashes are kept verbatim.  ``${``
    always opens a reference and must be ``${identifier}``; references inside
    references are rejected.
    """
    comps = []
    lit = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\\" and i + 1 < n and text[i + 1] in ("$", "\\"):
            lit.append(text[i + 1])
            i += 2
            continue
        if ch == "$" and i + 1 < n and text[i + 1] == "{":
            m = IDENT_RE.match(text, i + 2)
            if not m or m.end() >= n or text[m.end()] != "}":
                raise _err(
                    ast.SourceLocation(loc.file, loc.line, loc.column + i),
                    "malformed ${...} reference",
                    "${identifier}",
                )
            if lit:
                comps.append(ast.Literal("".join(lit), loc=loc))
                lit = []
            ref_loc = ast.SourceLocation(loc.file, loc.line, loc.column + i)
            comps.append(_make_ref(m.group(0), scope, ref_loc))
            i = m.end() + 1
            continue
        lit.append(ch)
        i += 1
    if lit:
        comps.append(ast.Literal("".join(lit), loc=loc))
    if not comps:
        comps.append(ast.Literal("", loc=loc))
    return ast.normalize_gstring(ast.GString(tuple(comps), loc=loc))


def _quotes_balanced(text: str) -> bool:
    quote = None
    i = 0
    while i < len(text):
        ch = text[i]
        if quote:
            if ch == quote:
                quote = None
        elif ch == "\\":
            i += 1
        elif ch in ("'", '"'):
            quote = ch
        i += 1
    return quote is None


def _has_unquoted_glob(text: str) -> bool:
    i = 0
    n = len(text)
    quote = None
    while i < n:
        ch = text[i]
        if quote:
            if ch == quote:
                quote = None
        elif ch == "\\":
            i += 1
        elif ch in ("'", '"'):
            quote = ch
        elif ch in "*?[":
            return True
        i += 1
    return False


# ---------------------------------------------------------------------------
# Structured expressions
# ---------------------------------------------------------------------------

class _ExprScanner:
    def __init__(self, text: str, scope: frozenset, loc: ast.SourceLocation):
        self.text = text
        self.scope = scope
        self.loc = loc
        self.i = 0

    def _ws(self):
        while self.i < len(self.text) and self.text[self.i].isspace():
            self.i += 1

    def _at(self, s: str) -> bool:
        self._ws()
        return self.text.startswith(s, self.i)

    def _eat(self, s: str) -> bool:
        if self._at(s):
            self.i += len(s)
            return True
        return False

    def _expect(self, s: str):
        if not self._eat(s):
            raise _ExprError(f"expected {s!r}")

    def at_end(self) -> bool:
        self._ws()
        return self.i >= len(self.text)

    def parse_full(self):
        e = self.expr()
        if not self.at_end():
            raise _ExprError("trailing text after expression")
        return e

    def expr(self):
        return self.ternary()

    def ternary(self):
        cond = self.equality()
        if self._eat("?"):
            then = self.expr()
            self._expect(":")
            otherwise = self.expr()
            return ast.Ternary(cond, then, otherwise, loc=self.loc)
        return cond

    def equality(self):
        left = self.additive()
        if self._eat("=="):
            right = self.additive()
            return ast.MethodCall(left, "equals", (right,), loc=self.loc)
        return left

    def additive(self):
        parts = [self.postfix()]
        while self._eat("+"):
            parts.append(self.postfix())
        if len(parts) == 1:
            return parts[0]
        comps = []
        for p in parts:
            if isinstance(p, ast.StringLiteral):
                comps.append(ast.Literal(p.text, loc=p.loc))
            elif isinstance(p, ast.GString):
                if p.raw_text is not None:
                    raise _ExprError("staged GString in concatenation")
                comps.extend(p.components)
            elif isinstance(p, ast.VarRef):
                comps.append(ast.VarReference(p.name, loc=p.loc))
            else:
                raise _ExprError("only text values concatenate with +")
        return ast.normalize_gstring(ast.GString(tuple(comps), loc=self.loc))

    def postfix(self):
        e = self.primary()
        while True:
            save = self.i
            if self._eat("."):
                m = IDENT_RE.match(self.text, self.i)
                if not m:
                    raise _ExprError("method name expected after '.'")
                method = m.group(0)
                self.i = m.end()
                if method == "length" and not self._at("("):
                    e = ast.MethodCall(e, "length", (), loc=self.loc)
                    continue
                if method not in ast.BUILTIN_METHODS:
                    raise _ExprError(f"unknown method {method}")
                self._expect("(")
                args = self._args()
                e = ast.MethodCall(e, method, tuple(args), loc=self.loc)
                continue
            if self._eat("["):
                idx = self.expr()
                self._expect("]")
                e = ast.ArrayIndex(e, idx, loc=self.loc)
                continue
            self.i = save
            return e

    def _args(self):
        args = []
        if self._eat(")"):
            return args
        while True:
            args.append(self.expr())
            if self._eat(")"):
                return args
            self._expect(",")

    def _quoted_string(self):
        # positioned at opening double quote
        assert self.text[self.i] == '"'
        self.i += 1
        out = []
        while self.i < len(self.text):
            ch = self.text[self.i]
            if ch == '"':
                self.i += 1
                return ast.StringLiteral("".join(out), loc=self.loc)
            if ch == "\\" and self.i + 1 < len(self.text):
                nxt = self.text[self.i + 1]
                out.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(nxt, nxt))
                self.i += 2
                continue
            out.append(ch)
            self.i += 1
        raise _ExprError("unterminated string literal")

    def _word_at(self, word: str) -> bool:
        if not self._at(word):
            return False
        end = self.i + len(word)
        return end >= len(self.text) or not (self.text[end].isalnum() or self.text[end] == "_")

    def primary(self):
        self._ws()
        if self.i >= len(self.text):
            raise _ExprError("expression expected")
        ch = self.text[self.i]
        if ch == '"':
            return self._quoted_string()
        m = _INT_RE.match(self.text, self.i)
        if m and (ch.isdigit() or ch == "-"):
            self.i = m.end()
            return ast.IntLiteral(int(m.group(0)), loc=self.loc)
        if self._word_at("true"):
            self.i += 4
            return ast.BoolLiteral(True, loc=self.loc)
        if self._word_at("false"):
            self.i += 5
            return ast.BoolLiteral(False, loc=self.loc)
        if ch == "$" and self.text.startswith("${", self.i):
            m = IDENT_RE.match(self.text, self.i + 2)
            if not m or m.end() >= len(self.text) or self.text[m.end()] != "}":
                raise _ExprError("malformed ${...} reference")
            name = m.group(0)
            self.i = m.end() + 1
            return ast.GString((_make_ref(name, self.scope, self.loc),), loc=self.loc)
        if self._eat("("):
            e = self.expr()
            self._expect(")")
            return e
        # class-prefixed built-ins rendered the Java way
        if self._word_at("String") and self.text.startswith("String.format(", self.i):
            self.i += len("String.format(")
            args = self._args()
            if not args:
                raise _ExprError("String.format needs a format argument")
            return ast.MethodCall(args[0], "format", tuple(args[1:]), loc=self.loc)
        if self._word_at("FilenameUtils"):
            for name in ("getBaseName", "getFullPath"):
                prefix = f"FilenameUtils.{name}("
                if self.text.startswith(prefix, self.i):
                    self.i += len(prefix)
                    args = self._args()
                    if len(args) != 1:
                        raise _ExprError(f"{name} takes one argument")
                    return ast.MethodCall(args[0], name, (), loc=self.loc)
            raise _ExprError("unknown FilenameUtils call")
        m = IDENT_RE.match(self.text, self.i)
        if m:
            name = m.group(0)
            if name in self.scope:
                self.i = m.end()
                return ast.VarRef(name, loc=self.loc)
            raise _ExprError(f"unknown name {name}")
        raise _ExprError(f"unexpected character {ch!r}")


def parse_structured_expression(text: str, scope: frozenset, loc: ast.SourceLocation):
    """Parse text that must be a structured expression (no GString fallback)."""
    return _ExprScanner(text, scope, loc).parse_full()


def structured_parses(text: str) -> bool:
    """True when the text is a complete scope-free structured expression.

    Used by the pretty printer to decide when a single-literal GString needs
    the quoted form to survive a re-parse.
    """
    try:
        _ExprScanner(text, frozenset(), ast.SourceLocation("<pp>", 1, 1)).parse_full()
        return True
    except _ExprError:
        return False


def parse_expression(text: str, scope: frozenset, loc: ast.SourceLocation, allow_bare=True):
    """Structured expression with fallback to the bare GString notation."""
    text = text.strip()
    if not text:
        raise _err(loc, "expression expected")
    try:
        return parse_structured_expression(text, scope, loc)
    except _ExprError as exc:
        if not allow_bare:
            raise _err(loc, f"invalid expression: {exc}") from exc
        return parse_gstring_text(text, scope, loc)


# ---------------------------------------------------------------------------
# Execute statements
# ---------------------------------------------------------------------------

def _parse_segment(seg: str, offset: int, scope: frozenset, loc: ast.SourceLocation):
    """One operator-free span: a command, optionally closed by a redirect."""
    elements = []
    base = ast.SourceLocation(loc.file, loc.line, loc.column + offset)
    pos = find_unquoted(seg, _REDIRECT_MARKER)
    cmd_text, redirect_text = seg, None
    if pos >= 0 and (pos == 0 or seg[pos - 1].isspace()):
        cmd_text = seg[:pos]
        redirect_text = seg[pos + len(_REDIRECT_MARKER):].strip()
        if not redirect_text:
            raise _err(base, "redirect target expected")
        if find_unquoted(redirect_text, _REDIRECT_MARKER) >= 0:
            raise _err(base, "multiple redirects in one command")
    cmd_text = cmd_text.strip()
    if cmd_text:
        m = _FETCH_RE.fullmatch(cmd_text)
        if m:
            elements.append(ast.FetchCommand(m.group(1), loc=base))
        else:
            m = _PUSH_RE.fullmatch(cmd_text)
            if m:
                elements.append(ast.PushCommand(m.group(1), loc=base))
            elif re.match(r"(fetch|push)\s", cmd_text):
                raise _err(base, "slot name expected after fetch/push")
            else:
                elements.append(ast.Command(parse_gstring_text(cmd_text, scope, base), loc=base))
    if redirect_text is not None:
        elements.append(
            ast.RedirectToFile(parse_gstring_text(redirect_text, scope, base), loc=base)
        )
    return elements


_OP_BY_TOKEN = {op.value: op for op in ast.OperatorKind}


def parse_execute_elements(rest: str, scope: frozenset, loc: ast.SourceLocation):
    if not rest.strip():
        raise _err(loc, "empty execute statement")
    try:
        parts = split_on_operators(rest)
    except ScanError as exc:
        raise _err(
            ast.SourceLocation(loc.file, loc.line, loc.column + exc.offset), exc.message
        ) from exc
    elements = []
    for kind, text, offset in parts:
        if kind == "op":
            op_loc = ast.SourceLocation(loc.file, loc.line, loc.column + offset)
            elements.append(ast.Operator(_OP_BY_TOKEN[text], loc=op_loc))
        else:
            elements.extend(_parse_segment(text, offset, scope, loc))
    if not elements:
        raise _err(loc, "empty execute statement")
    return tuple(elements)


def parse_execute_line(
    text: str, scope: frozenset = frozenset(), file: str = "<execute>"
) -> Union[ast.ExecuteCommand, ParseError]:
    """Parse a single ``execute:`` line.  Placement problems (leading or
    doubled operators and the like) parse fine and are the checker's job."""
    loc = ast.SourceLocation(file, 1, 1)
    if not text.startswith("execute:"):
        return ParseError(loc, "execute statement must start with 'execute:'")
    rest = text[len("execute:"):]
    inner_loc = ast.SourceLocation(file, 1, len("execute:") + 1)
    try:
        elements = parse_execute_elements(rest, scope, inner_loc)
    except _StatementError as exc:
        return exc.error
    return ast.ExecuteCommand(elements, loc=loc)


# ---------------------------------------------------------------------------
# Statements and blocks
# ---------------------------------------------------------------------------

class _ScriptParser:
    def __init__(self, text: str, file: str):
        self.file = file
        self.lines = logical_lines(text, file)
        self.pos = 0
        self.errors: list = []
        self.scopes: list = [set()]

    # scope helpers ---------------------------------------------------------

    def _scope_set(self) -> frozenset:
        names = set()
        for s in self.scopes:
            names.update(s)
        return frozenset(names)

    def _declare(self, name: str):
        self.scopes[-1].add(name)

    # line helpers ----------------------------------------------------------

    def _peek(self) -> Optional[_Line]:
        if self.pos < len(self.lines):
            return self.lines[self.pos]
        return None

    def _next(self) -> Optional[_Line]:
        line = self._peek()
        if line is not None:
            self.pos += 1
        return line

    def _loc(self, line: _Line, col_offset: int = 0) -> ast.SourceLocation:
        return ast.SourceLocation(self.file, line.line, line.column + col_offset)

    def _record(self, error: ParseError):
        self.errors.append(error)

    def _skip_block(self, opened: int = 1):
        """Resynchronize after an error inside a block: drop lines until the
        open braces are balanced again."""
        depth = opened
        while depth > 0:
            line = self._next()
            if line is None:
                return
            depth += line.text.count("{") - line.text.count("}")

    # statement parsing -----------------------------------------------------

    def _strip_terminator(self, text: str, loc: ast.SourceLocation) -> str:
        semi = find_unquoted(text, ";")
        if semi >= 0:
            if text[semi + 1 :].strip():
                raise _err(loc, "one statement per line")
            return text[:semi]
        if text.endswith(";"):
            # unbalanced quotes hid the terminator from the quote-aware scan
            return text[:-1]
        return text

    def _parse_fail(self, rest: str, loc: ast.SourceLocation) -> ast.Fail:
        rest = rest.strip()
        status = 1
        m = re.fullmatch(r"(.*\S)\s+(\d+)", rest, re.S)
        if m and _quotes_balanced(m.group(1)):
            message_text, status = m.group(1), int(m.group(2))
        else:
            message_text = rest
        if not message_text:
            raise _err(loc, "fail needs a message")
        expr = parse_expression(message_text, self._scope_set(), loc)
        if isinstance(expr, ast.StringLiteral):
            g = ast.GString((ast.Literal(expr.text, loc=loc),), loc=loc)
        elif isinstance(expr, ast.VarRef):
            g = ast.GString((ast.VarReference(expr.name, loc=loc),), loc=loc)
        elif isinstance(expr, ast.GString):
            g = expr
        else:
            raise _err(loc, "fail message must be text")
        return ast.Fail(ast.normalize_gstring(g), status, loc=loc)

    def _parse_load(self, line: _Line) -> ast.LoadEnvironmentSources:
        loc = self._loc(line)
        m = re.fullmatch(r"load environment sources\s*\{(.*)\}", line.text, re.S)
        if not m:
            raise _err(loc, "malformed load environment sources statement")
        specs = []
        inner = m.group(1).strip()
        if not inner:
            raise _err(loc, "at least one environment source expected")
        for part in inner.split(","):
            part = part.strip()
            if part == "Java Environment":
                specs.append(ast.ProcessEnvSource(loc=loc))
            elif part == "GobyWebSource":
                specs.append(ast.PluginSource(loc=loc))
            elif part.startswith("MapFile:"):
                path_text = part[len("MapFile:"):].strip()
                if not path_text:
                    raise _err(loc, "MapFile source needs a path")
                specs.append(
                    ast.MapFileSource(parse_gstring_text(path_text, self._scope_set(), loc), loc=loc)
                )
            else:
                raise _err(loc, f"unknown environment source: {part}")
        return ast.LoadEnvironmentSources(tuple(specs), loc=loc)

    def _parse_statement(self, line: _Line) -> ast.Statement:
        text = line.text
        loc = self._loc(line)
        scope = self._scope_set()

        if text.startswith("execute:"):
            rest = text[len("execute:"):]
            elements = parse_execute_elements(rest, scope, self._loc(line, len("execute:")))
            return ast.ExecuteCommand(elements, loc=loc)

        if text.startswith("load environment sources"):
            return self._parse_load(line)

        m = _STEP_RE.fullmatch(text)
        if m:
            self.scopes.append(set())
            try:
                body = self._parse_block_body()
            finally:
                self.scopes.pop()
            return ast.StepBlock(m.group(1), tuple(body), loc=loc)

        m = _IF_RE.fullmatch(text)
        if m:
            condition = parse_expression(m.group(1), scope, loc, allow_bare=False)
            self.scopes.append(set())
            try:
                then_body, saw_else = self._parse_block_body(allow_else=True)
            finally:
                self.scopes.pop()
            else_body = None
            if saw_else:
                self.scopes.append(set())
                try:
                    else_body = tuple(self._parse_block_body())
                finally:
                    self.scopes.pop()
            return ast.If(condition, tuple(then_body), else_body, loc=loc)

        if text.startswith("fail ") or text == "fail":
            return self._parse_fail(text[4:], loc)

        m = _PRINTLN_RE.fullmatch(text)
        if m:
            value = parse_expression(m.group(1), scope, loc)
            return ast.Println(value, loc=loc)

        m = _DECL_RE.fullmatch(text)
        if m:
            decl_type, name, init_text = m.group(1), m.group(2), m.group(3)
            init_text = self._strip_terminator(init_text, loc).strip()
            initializer = parse_expression(init_text, scope, loc)
            if (
                decl_type == "string[]"
                and isinstance(initializer, ast.GString)
                and _has_unquoted_glob(init_text)
            ):
                initializer = ast.PathPattern(initializer, loc=loc)
            self._declare(name)
            return ast.VarDecl(name, decl_type, initializer, loc=loc)

        m = _ASSIGN_RE.fullmatch(text)
        if m:
            name, value_text = m.group(1), m.group(2)
            value_text = self._strip_terminator(value_text, loc).strip()
            value = parse_expression(value_text, scope, loc)
            return ast.Assignment(name, value, loc=loc)

        if text.endswith(";"):
            expr = parse_expression(text[:-1], scope, loc, allow_bare=False)
            return ast.ExpressionStatement(expr, loc=loc)

        raise _err(loc, f"unknown statement: {text.split(' ')[0]!r}", "a NYoSh statement")

    def _parse_block_body(self, allow_else: bool = False):
        """Statements until the closing ``}`` of the current block."""
        body = []
        while True:
            line = self._next()
            if line is None:
                self._record(
                    ParseError(
                        ast.SourceLocation(self.file, self.lines[-1].line if self.lines else 1, 1),
                        "unterminated block",
                        "}",
                    )
                )
                return (body, False) if allow_else else body
            if line.text == "}":
                return (body, False) if allow_else else body
            if line.text == "} else {":
                if allow_else:
                    return body, True
                self._record(self._loc_error(line, "unexpected '} else {'"))
                continue
            try:
                body.append(self._parse_statement(line))
            except _StatementError as exc:
                self._record(exc.error)
                opened = line.text.count("{") - line.text.count("}")
                if opened > 0:
                    self._skip_block(opened)

    def _loc_error(self, line: _Line, message: str, expected: Optional[str] = None):
        return ParseError(self._loc(line), message, expected)

    # entry points and script ----------------------------------------------

    def _parse_params(self, text: str, loc: ast.SourceLocation):
        params = []
        if not text.strip():
            return tuple(params)
        for part in text.split(","):
            m = re.fullmatch(r"\s*(string\[\]|string|int|boolean)\s+([A-Za-z_]\w*)\s*", part)
            if not m:
                raise _err(loc, f"malformed parameter: {part.strip()!r}", "type name")
            params.append(ast.Param(m.group(2), m.group(1), loc=loc))
        return tuple(params)

    def _parse_entry_point(self, line: _Line) -> ast.EntryPoint:
        loc = self._loc(line)
        m = _ENTRY_RE.fullmatch(line.text)
        if not m:
            raise _err(loc, f"expected an entry point, got: {line.text!r}")
        designation, name, params_text, brace = m.groups()
        if designation is not None and designation not in ENTRY_DESIGNATIONS:
            raise _err(loc, f"unknown entry point designation {designation!r}")
        params = self._parse_params(params_text, loc)
        if brace is None:
            nxt = self._next()
            if nxt is None or nxt.text != "{":
                raise _err(loc, "entry point body must open with '{'")
        self.scopes.append({p.name for p in params})
        try:
            body = self._parse_block_body()
        finally:
            self.scopes.pop()
        return ast.EntryPoint(name, params, tuple(body), designation, loc=loc)

    def _parse_header(self) -> ast.PluginHeader:
        opener = self._next()
        loc = self._loc(opener)
        fields = {}
        for key in ("id", "kind", "location"):
            line = self._next()
            if line is None or not line.text.startswith(key + ":"):
                raise _err(
                    self._loc(line) if line else loc,
                    f"plugin header field {key!r} expected",
                    f"{key}: <value>",
                )
            fields[key] = line.text[len(key) + 1 :].strip()
        if not _HEADER_ID_RE.fullmatch(fields["id"] or ""):
            raise _err(loc, f"invalid plugin id {fields['id']!r}", "uppercase letters, digits, _")
        if fields["kind"] not in ast.PLUGIN_KINDS:
            raise _err(
                loc,
                f"invalid plugin kind {fields['kind']!r}",
                "one of " + ", ".join(ast.PLUGIN_KINDS),
            )
        return ast.PluginHeader(fields["id"], fields["kind"], fields["location"], loc=loc)

    def _default_name(self) -> str:
        stem = Path(self.file).stem
        name = re.sub(r"[^A-Za-z0-9_]", "_", stem)
        if not name or not re.match(r"[A-Za-z_]", name):
            name = "script"
        return name

    def parse(self) -> Union[ast.Script, list]:
        header = None
        line = self._peek()
        if line is not None and line.text == "plugin system:":
            try:
                header = self._parse_header()
            except _StatementError as exc:
                self._record(exc.error)

        line = self._peek()
        if line is None:
            if self.errors:
                return self.errors
            return ast.Script(self._default_name(), header=header)

        m = _SCRIPT_RE.fullmatch(line.text)
        if m:
            self._next()
            name = m.group(1)
            error_management = m.group(2) or ast.DEFAULT_ERROR_MANAGEMENT
            entry_points = []
            while True:
                inner = self._next()
                if inner is None:
                    self._record(
                        ParseError(self._loc(line), "unterminated script block", "}")
                    )
                    break
                if inner.text == "}":
                    break
                try:
                    entry_points.append(self._parse_entry_point(inner))
                except _StatementError as exc:
                    self._record(exc.error)
                    opened = inner.text.count("{") - inner.text.count("}")
                    if opened > 0:
                        self._skip_block(opened)
            trailing = self._next()
            if trailing is not None:
                self._record(self._loc_error(trailing, "content after script block"))
            script = ast.Script(
                name,
                header=header,
                error_management=error_management,
                entry_points=tuple(entry_points),
                loc=self._loc(line),
            )
        else:
            # Bare statements form an implicit main entry point.
            body = []
            self.scopes.append(set())
            while True:
                stmt_line = self._next()
                if stmt_line is None:
                    break
                if stmt_line.text in ("}", "} else {"):
                    self._record(self._loc_error(stmt_line, "unmatched '}'"))
                    continue
                try:
                    body.append(self._parse_statement(stmt_line))
                except _StatementError as exc:
                    self._record(exc.error)
                    opened = stmt_line.text.count("{") - stmt_line.text.count("}")
                    if opened > 0:
                        self._skip_block(opened)
            self.scopes.pop()
            entry = ast.EntryPoint("main", (), tuple(body), None, loc=self._loc(line))
            script = ast.Script(
                self._default_name(), header=header, entry_points=(entry,), loc=self._loc(line)
            )

        if self.errors:
            return self.errors
        return script


def parse_script(text: str, file: str = "<string>") -> Union[ast.Script, list]:
    """Parse a complete script.

    Returns the Script on success, otherwise the non-empty list of ParseErrors.
    Never raises for malformed input.
    """
    try:
        return _ScriptParser(text, file).parse()
    except _StatementError as exc:  # defensive: statement errors are collected above
        return [exc.error]
    except RecursionError:
        return [ParseError(ast.SourceLocation(file, 1, 1), "input nests too deeply")]


def parse_script_file(path) -> Union[ast.Script, list]:
    p = Path(path)
    return parse_script(p.read_text(encoding="utf-8"), str(p))
