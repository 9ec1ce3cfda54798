"""Micro-parsing intentions: turning pasted raw BASH text into AST structure.

Raw text sits untouched in a staging slot (``GString.raw_text`` or
``ExecuteCommand.raw_text``) until an intention parses it.  On success the
produced fragment replaces the staged text and the slot is cleared; on any
error the tree is left exactly as it was.

Two intentions exist, matching the two kinds of pasted text:

* ``extract_vars`` converts ``${name}`` occurrences into variable reference
  components and declares each new name as an empty string immediately before
  the containing statement.
* ``parse_commands`` splits a command line on unquoted ``|`` ``||`` ``&&``
  ``;`` ``&`` into command and operator elements, leaving each command's text
  staged so ``extract_vars`` can process it afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import ast
from .textscan import ScanError, scan_interpolation, split_on_operators

EXTRACT_VARS = "extract_vars"
PARSE_COMMANDS = "parse_commands"


class MicroParseError(Exception):
    """Raised by apply_intention when the staged text cannot be parsed."""


@dataclass(frozen=True)
class MicroParseResult:
    replacement: Optional[object]  # GString | tuple of CommandElement
    new_declarations: tuple = ()
    consumed: bool = False
    error: Optional[str] = None
    warnings: tuple = ()


def _failed(message: str) -> MicroParseResult:
    return MicroParseResult(None, (), consumed=False, error=message)


def extract_variables(
    raw: str,
    scope: frozenset = frozenset(),
    env_names: frozenset = frozenset(),
) -> MicroParseResult:
    """Convert ``${name}`` patterns in raw text into a component GString.

    Literal spans keep their bytes verbatim, so rendering the result with each
    reference bound back to its ``${name}`` spelling reproduces the input
    exactly.  Every distinct referenced name not already in scope yields a
    ``string NAME = "";`` declaration, in first-appearance order.
    """
    try:
        parts = scan_interpolation(raw)
    except ScanError as exc:
        return _failed(exc.message)
    comps = []
    decls = []
    seen = set()
    warnings = []
    for kind, value in parts:
        if kind == "lit":
            comps.append(ast.Literal(value))
            continue
        comps.append(ast.VarReference(value))
        if value in scope or value in seen:
            continue
        seen.add(value)
        decls.append(ast.VarDecl(value, "string", ast.StringLiteral("")))
        if value in env_names:
            warnings.append(
                f"local declaration of {value} shadows a loaded environment variable"
            )
    if not comps:
        comps.append(ast.Literal(""))
    replacement = ast.normalize_gstring(ast.GString(tuple(comps)))
    return MicroParseResult(replacement, tuple(decls), consumed=True, warnings=tuple(warnings))


_OP_BY_TOKEN = {op.value: op for op in ast.OperatorKind}


def parse_command_literal(raw: str) -> MicroParseResult:
    """Split one BASH command line into Command and Operator elements.

    Quoted spans protect operators.  Each command keeps its text staged in the
    GString raw slot (still holding any ``${...}`` patterns) so the variable
    extraction intention can run on it next.  Ill-placed operators make the
    intention refuse: it never emits a fragment the checker would reject.
    """
    try:
        parts = split_on_operators(raw)
    except ScanError as exc:
        return _failed(exc.message)
    elements = []
    for kind, text, _offset in parts:
        if kind == "op":
            elements.append(ast.Operator(_OP_BY_TOKEN[text]))
        else:
            elements.append(ast.Command(ast.GString(raw_text=text.strip())))
    if not elements:
        return _failed("no command found")
    faults = ast.placement_faults(elements)
    if faults:
        return _failed(faults[0][1].replace("_", " "))
    return MicroParseResult(tuple(elements), (), consumed=True)


# ---------------------------------------------------------------------------
# Applying intentions to a statement list
# ---------------------------------------------------------------------------

def _scope_before(statements, index: int, outer: frozenset) -> frozenset:
    names = set(outer)
    for stmt in statements[:index]:
        if isinstance(stmt, ast.VarDecl):
            names.add(stmt.name)
    return frozenset(names)


def _staged_gstrings(stmt):
    """The staged GStrings of a statement, with rebuild functions."""
    if isinstance(stmt, ast.VarDecl):
        init = stmt.initializer
        if isinstance(init, ast.GString) and init.raw_text is not None:
            return [(init, lambda g: ast.VarDecl(stmt.name, stmt.decl_type, g, loc=stmt.loc))]
    if isinstance(stmt, ast.Assignment):
        if isinstance(stmt.value, ast.GString) and stmt.value.raw_text is not None:
            return [(stmt.value, lambda g: ast.Assignment(stmt.target, g, loc=stmt.loc))]
    if isinstance(stmt, ast.Println):
        if isinstance(stmt.value, ast.GString) and stmt.value.raw_text is not None:
            return [(stmt.value, lambda g: ast.Println(g, loc=stmt.loc))]
    if isinstance(stmt, ast.Fail):
        if stmt.message.raw_text is not None:
            return [(stmt.message, lambda g: ast.Fail(g, stmt.status_code, loc=stmt.loc))]
    return []


def _extract_in_execute(stmt: ast.ExecuteCommand, scope, env_names):
    new_elements = []
    all_decls = []
    declared = set(scope)
    warnings = []
    changed = False
    for el in stmt.elements:
        if isinstance(el, ast.Command) and el.text.raw_text is not None:
            result = extract_variables(el.text.raw_text, frozenset(declared), env_names)
            if not result.consumed:
                raise MicroParseError(result.error)
            changed = True
            warnings.extend(result.warnings)
            for decl in result.new_declarations:
                all_decls.append(decl)
                declared.add(decl.name)
            new_elements.append(ast.Command(result.replacement, loc=el.loc))
        else:
            new_elements.append(el)
    if not changed:
        return None
    return ast.ExecuteCommand(tuple(new_elements), loc=stmt.loc), tuple(all_decls), tuple(warnings)


def apply_intention(
    statements,
    index: int,
    which: str,
    scope: frozenset = frozenset(),
    env_names: frozenset = frozenset(),
):
    """Apply a micro-parsing intention to ``statements[index]``.

    Returns the updated statement tuple; new declarations are inserted
    immediately before the containing statement.  When nothing is staged the
    input tuple is returned unchanged (the intention is idempotent).  A parse
    failure raises :class:`MicroParseError` and, trees being immutable, the
    caller's AST is untouched.
    """
    statements = tuple(statements)
    stmt = statements[index]
    full_scope = _scope_before(statements, index, scope)

    if which == PARSE_COMMANDS:
        if not isinstance(stmt, ast.ExecuteCommand) or stmt.raw_text is None:
            return statements
        result = parse_command_literal(stmt.raw_text)
        if not result.consumed:
            raise MicroParseError(result.error)
        updated = ast.ExecuteCommand(result.replacement, raw_text=None, loc=stmt.loc)
        return statements[:index] + (updated,) + statements[index + 1 :]

    if which != EXTRACT_VARS:
        raise ValueError(f"unknown intention {which!r}")

    if isinstance(stmt, ast.ExecuteCommand):
        outcome = _extract_in_execute(stmt, full_scope, env_names)
        if outcome is None:
            return statements
        updated, decls, _warnings = outcome
        return statements[:index] + decls + (updated,) + statements[index + 1 :]

    staged = _staged_gstrings(stmt)
    if not staged:
        return statements
    gstring, rebuild = staged[0]
    result = extract_variables(gstring.raw_text, full_scope, env_names)
    if not result.consumed:
        raise MicroParseError(result.error)
    updated = rebuild(result.replacement)
    return statements[:index] + result.new_declarations + (updated,) + statements[index + 1 :]
