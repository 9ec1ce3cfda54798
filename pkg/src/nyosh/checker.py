"""Static checks: operator placement, environment access, entry-point
contracts, scope and declared-type consistency.

The design environment is built by simulating load statements top to bottom in
document order; a load inside a branch counts as loaded for everything after
it, mirroring what an editor can know without evaluating conditions.  Sources
whose names cannot be enumerated at design time (a map file behind a computed
path, a plugin config that is not configured) downgrade later unknown
references from errors to warnings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Optional

from . import ast, envsource

SEVERITY_ERROR = "error"
SEVERITY_WARNING = "warning"

#: The closed set of diagnostic codes.
DIAGNOSTIC_CODES = {
    "E_CONSECUTIVE_OPERATORS": "two adjacent binary operators",
    "E_LEADING_OPERATOR": "command expected before operator",
    "E_TRAILING_OPERATOR": "command expected after operator",
    "E_REDIRECT_NOT_TERMINAL": "redirect must close its pipeline",
    "E_MISSING_OPERATOR": "operator expected between commands",
    "E_EMPTY_EXECUTE": "execute statement has no elements",
    "E_UNPARSED_RAW": "raw text still staged for micro-parsing",
    "E_UNAUTHORIZED_ENV_ACCESS": "environment variable not provided by any loaded source",
    "W_RUNTIME_ONLY_SOURCE": "name may come from a source known only at run time",
    "E_UNDEFINED_VARIABLE": "name is not declared in lexical scope",
    "E_DUPLICATE_VARIABLE": "name already declared in this scope",
    "E_DUPLICATE_ENTRY_POINT": "entry point name already used",
    "E_DUPLICATE_PARAM": "parameter name already used",
    "E_CONTRACT_VIOLATION": "script does not satisfy its plugin kind contract",
    "E_TYPE_MISMATCH": "declared type and value kind disagree",
    "W_SHADOWS_ENVIRONMENT": "local declaration shadows an environment variable",
}

DEFAULT_CONTRACTS = {
    "ALIGNER": (("plugin_align", ("string", "string")),),
    "TASK": (("plugin_task", ()),),
    "RESOURCE": (),
    "ARTIFACT_INSTALL": (("plugin_install_artifact", ("string", "string")),),
    "ALIGNMENT_ANALYSIS": (("plugin_alignment_analysis", ()),),
}


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    code: str
    location: ast.SourceLocation
    message: str

    def line_format(self) -> str:
        return (
            f"{self.location.file}:{self.location.line}:{self.location.column}: "
            f"{self.severity} {self.code}: {self.message}"
        )


def diagnostics_json(diags) -> str:
    return json.dumps(
        [
            {
                "file": d.location.file,
                "line": d.location.line,
                "col": d.location.column,
                "severity": d.severity,
                "code": d.code,
                "message": d.message,
            }
            for d in diags
        ],
        indent=2,
    )


@dataclass
class CheckConfig:
    """Design-time source configuration for the checker."""

    plugin_config: Optional[envsource.PluginConfig] = None
    process_env: Optional[Mapping] = None
    contracts: Optional[dict] = None


@dataclass
class DesignEnvironment:
    """Names available at design time, each with its provenance."""

    available: dict = field(default_factory=dict)  # name -> provenance string
    runtime_only_loaded: bool = False


def _kind_of(expr, lookup) -> Optional[str]:
    """Best-effort value kind of an expression; None when unknown."""
    if isinstance(expr, ast.StringLiteral):
        return "string"
    if isinstance(expr, ast.IntLiteral):
        return "int"
    if isinstance(expr, ast.BoolLiteral):
        return "boolean"
    if isinstance(expr, ast.GString):
        return "string"
    if isinstance(expr, ast.PathPattern):
        return "string[]"
    if isinstance(expr, ast.VarRef):
        return lookup(expr.name)
    if isinstance(expr, ast.Ternary):
        a = _kind_of(expr.then, lookup)
        b = _kind_of(expr.otherwise, lookup)
        return a if a == b else None
    if isinstance(expr, ast.ArrayIndex):
        return "string"
    if isinstance(expr, ast.MethodCall):
        return {
            "toUpperCase": "string",
            "split": "string[]",
            "equals": "boolean",
            "format": "string",
            "getBaseName": "string",
            "getFullPath": "string",
            "length": "int",
            "index": "string",
        }.get(expr.method)
    return None


_PLACEMENT_CODES = {
    "leading_operator": "E_LEADING_OPERATOR",
    "consecutive_operators": "E_CONSECUTIVE_OPERATORS",
    "trailing_operator": "E_TRAILING_OPERATOR",
    "redirect_not_terminal": "E_REDIRECT_NOT_TERMINAL",
    "missing_operator": "E_MISSING_OPERATOR",
    "empty": "E_EMPTY_EXECUTE",
}


def rule_operator_placement(exec_stmt: ast.ExecuteCommand) -> list:
    """Flag ill-placed operators and non-terminal redirects in one statement."""
    diags = []
    fallback = exec_stmt.loc or ast.SourceLocation("<ast>", 1, 1)
    for index, fault in ast.placement_faults(exec_stmt.elements):
        el = exec_stmt.elements[index] if index < len(exec_stmt.elements) else None
        loc = (el.loc if el is not None and el.loc is not None else None) or fallback
        code = _PLACEMENT_CODES[fault]
        diags.append(Diagnostic(SEVERITY_ERROR, code, loc, DIAGNOSTIC_CODES[code]))
    return diags


class _Stop(Exception):
    pass


class _Walker:
    def __init__(self, script: ast.Script, config: Optional[CheckConfig], stop_line=None):
        self.script = script
        self.config = config or CheckConfig()
        self.diags = []
        self.design = DesignEnvironment()
        self.scopes = [{}]  # name -> declared type
        self.stop_line = stop_line
        self.stopped_scopes = None
        self.param_names = set()

    # -- scope helpers ------------------------------------------------------

    def _declared_kind(self, name) -> Optional[str]:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None

    def _in_scope(self, name) -> bool:
        return any(name in scope for scope in self.scopes)

    def _diag(self, severity, code, loc, message):
        self.diags.append(
            Diagnostic(severity, code, loc or ast.SourceLocation("<ast>", 1, 1), message)
        )

    # -- environment sources --------------------------------------------------

    def _resolved_source(self, spec):
        if isinstance(spec, ast.ProcessEnvSource):
            return envsource.ProcessEnv(self.config.process_env), "Java Environment"
        if isinstance(spec, ast.PluginSource):
            return self.config.plugin_config, "GobyWebSource"
        if isinstance(spec, ast.MapFileSource):
            text = ast.gstring_bare_text(ast.normalize_gstring(spec.path))
            return envsource.MapFile(spec.path), f"MapFile {text}"
        return None, "?"

    def _load(self, stmt: ast.LoadEnvironmentSources):
        for spec in stmt.sources:
            resolved, label = self._resolved_source(spec)
            if resolved is None:
                self.design.runtime_only_loaded = True
                continue
            if isinstance(resolved, envsource.PluginConfig):
                try:
                    model = envsource.load_plugin_config(resolved.plugin_dir)
                except envsource.EnvironmentLoadError:
                    self.design.runtime_only_loaded = True
                    continue
                for name, prov in envsource.plugin_design_entries(model, resolved.runtime_values):
                    self.design.available[name] = prov
                continue
            names = envsource.list_design_time_names(resolved)
            if names is envsource.UNAVAILABLE:
                self.design.runtime_only_loaded = True
                continue
            for name in names:
                self.design.available[name] = label

    # -- expressions ----------------------------------------------------------

    def _check_env_reader(self, comp: ast.EnvVarReader):
        if comp.name in self.design.available or self._in_scope(comp.name):
            return
        if self.design.runtime_only_loaded:
            self._diag(
                SEVERITY_WARNING,
                "W_RUNTIME_ONLY_SOURCE",
                comp.loc,
                f"{comp.name} is not known at design time; a runtime-only source may provide it",
            )
        else:
            self._diag(
                SEVERITY_ERROR,
                "E_UNAUTHORIZED_ENV_ACCESS",
                comp.loc,
                f"{comp.name} is not provided by any loaded environment source",
            )

    def _walk_gstring(self, g: ast.GString, loc):
        if g.raw_text is not None:
            self._diag(
                SEVERITY_ERROR,
                "E_UNPARSED_RAW",
                g.loc or loc,
                "raw text is still staged; apply the import intention",
            )
            return
        for comp in g.components:
            if isinstance(comp, ast.VarReference):
                if not self._in_scope(comp.name):
                    self._diag(
                        SEVERITY_ERROR,
                        "E_UNDEFINED_VARIABLE",
                        comp.loc or loc,
                        f"{comp.name} is not declared",
                    )
            elif isinstance(comp, ast.EnvVarReader):
                self._check_env_reader(comp)

    def _walk_expr(self, expr, loc):
        if isinstance(expr, ast.GString):
            self._walk_gstring(expr, loc)
        elif isinstance(expr, ast.PathPattern):
            self._walk_gstring(expr.pattern, loc)
        elif isinstance(expr, ast.VarRef):
            if not self._in_scope(expr.name):
                self._diag(
                    SEVERITY_ERROR,
                    "E_UNDEFINED_VARIABLE",
                    expr.loc or loc,
                    f"{expr.name} is not declared",
                )
        elif isinstance(expr, ast.Ternary):
            self._walk_expr(expr.condition, loc)
            self._walk_expr(expr.then, loc)
            self._walk_expr(expr.otherwise, loc)
        elif isinstance(expr, ast.MethodCall):
            self._walk_expr(expr.receiver, loc)
            for a in expr.args:
                self._walk_expr(a, loc)
        elif isinstance(expr, ast.ArrayIndex):
            self._walk_expr(expr.array, loc)
            self._walk_expr(expr.index, loc)

    # -- statements -----------------------------------------------------------

    def _maybe_stop(self, stmt):
        if (
            self.stop_line is not None
            and stmt.loc is not None
            and stmt.loc.line >= self.stop_line
        ):
            self.stopped_scopes = [dict(s) for s in self.scopes]
            raise _Stop()

    def _walk_statement(self, stmt):
        self._maybe_stop(stmt)
        if isinstance(stmt, ast.VarDecl):
            self._walk_expr(stmt.initializer, stmt.loc)
            if stmt.name in self.scopes[-1]:
                self._diag(
                    SEVERITY_ERROR,
                    "E_DUPLICATE_VARIABLE",
                    stmt.loc,
                    f"{stmt.name} is already declared in this scope",
                )
            else:
                self.scopes[-1][stmt.name] = stmt.decl_type
            kind = _kind_of(stmt.initializer, self._declared_kind)
            if kind is not None and kind != stmt.decl_type:
                self._diag(
                    SEVERITY_ERROR,
                    "E_TYPE_MISMATCH",
                    stmt.loc,
                    f"{stmt.name} is declared {stmt.decl_type} but initialized with {kind}",
                )
            if stmt.name in self.design.available:
                self._diag(
                    SEVERITY_WARNING,
                    "W_SHADOWS_ENVIRONMENT",
                    stmt.loc,
                    f"{stmt.name} shadows an environment variable "
                    f"({self.design.available[stmt.name]})",
                )
        elif isinstance(stmt, ast.Assignment):
            self._walk_expr(stmt.value, stmt.loc)
            declared = self._declared_kind(stmt.target)
            if declared is None:
                self._diag(
                    SEVERITY_ERROR,
                    "E_UNDEFINED_VARIABLE",
                    stmt.loc,
                    f"{stmt.target} is not declared",
                )
            else:
                kind = _kind_of(stmt.value, self._declared_kind)
                if kind is not None and kind != declared:
                    self._diag(
                        SEVERITY_ERROR,
                        "E_TYPE_MISMATCH",
                        stmt.loc,
                        f"{stmt.target} is {declared} but assigned {kind}",
                    )
        elif isinstance(stmt, ast.If):
            self._walk_expr(stmt.condition, stmt.loc)
            kind = _kind_of(stmt.condition, self._declared_kind)
            if kind is not None and kind != "boolean":
                self._diag(
                    SEVERITY_ERROR,
                    "E_TYPE_MISMATCH",
                    stmt.loc,
                    f"condition must be boolean, got {kind}",
                )
            self._walk_block(stmt.then_body)
            if stmt.else_body is not None:
                self._walk_block(stmt.else_body)
        elif isinstance(stmt, (ast.Println, ast.ExpressionStatement)):
            expr = stmt.value if isinstance(stmt, ast.Println) else stmt.expression
            self._walk_expr(expr, stmt.loc)
        elif isinstance(stmt, ast.Fail):
            self._walk_gstring(stmt.message, stmt.loc)
        elif isinstance(stmt, ast.ExecuteCommand):
            if stmt.raw_text is not None:
                self._diag(
                    SEVERITY_ERROR,
                    "E_UNPARSED_RAW",
                    stmt.loc,
                    "execute statement still holds unparsed raw text",
                )
                return
            self.diags.extend(rule_operator_placement(stmt))
            for el in stmt.elements:
                if isinstance(el, ast.Command):
                    self._walk_gstring(el.text, stmt.loc)
                elif isinstance(el, ast.RedirectToFile):
                    self._walk_gstring(el.target, stmt.loc)
        elif isinstance(stmt, ast.LoadEnvironmentSources):
            for spec in stmt.sources:
                if isinstance(spec, ast.MapFileSource):
                    self._walk_gstring(spec.path, stmt.loc)
            self._load(stmt)
        elif isinstance(stmt, ast.StepBlock):
            self._walk_block(stmt.body)

    def _walk_block(self, body):
        self.scopes.append({})
        try:
            for stmt in body:
                self._walk_statement(stmt)
        finally:
            self.scopes.pop()

    # -- script level -----------------------------------------------------------

    def _contract_table(self):
        if self.config.contracts:
            return self.config.contracts
        return DEFAULT_CONTRACTS

    def _check_contract(self):
        header = self.script.header
        if header is None:
            return
        required = self._contract_table().get(header.kind, ())
        by_name = {ep.name: ep for ep in self.script.entry_points}
        for name, param_types in required:
            ep = by_name.get(name)
            loc = header.loc or self.script.loc
            if ep is None:
                self._diag(
                    SEVERITY_ERROR,
                    "E_CONTRACT_VIOLATION",
                    loc,
                    f"{header.kind} plugin requires entry point "
                    f"{name}({', '.join(param_types)})",
                )
                continue
            actual = tuple(p.decl_type for p in ep.params)
            if actual != tuple(param_types):
                self._diag(
                    SEVERITY_ERROR,
                    "E_CONTRACT_VIOLATION",
                    ep.loc or loc,
                    f"{name} must take ({', '.join(param_types)}), "
                    f"got ({', '.join(actual)})",
                )

    def run(self):
        seen = set()
        for ep in self.script.entry_points:
            if ep.name in seen:
                self._diag(
                    SEVERITY_ERROR,
                    "E_DUPLICATE_ENTRY_POINT",
                    ep.loc,
                    f"entry point {ep.name} is already defined",
                )
            seen.add(ep.name)
        self._check_contract()
        for ep in self.script.entry_points:
            param_names = set()
            scope = {}
            for p in ep.params:
                if p.name in param_names:
                    self._diag(
                        SEVERITY_ERROR,
                        "E_DUPLICATE_PARAM",
                        p.loc or ep.loc,
                        f"parameter {p.name} is already defined",
                    )
                param_names.add(p.name)
                scope[p.name] = p.decl_type
            self.param_names.update(param_names)
            self.scopes.append(scope)
            try:
                for stmt in ep.body:
                    self._walk_statement(stmt)
            finally:
                self.scopes.pop()
        return self.diags

    def lexical_names(self):
        out = {}
        scopes = self.stopped_scopes if self.stopped_scopes is not None else self.scopes
        for scope in scopes:
            for name in scope:
                out[name] = "parameter" if name in self.param_names else "local variable"
        return out


def check(script: ast.Script, config: Optional[CheckConfig] = None) -> list:
    """Run every rule over a script; diagnostics come back sorted by location."""
    walker = _Walker(script, config)
    diags = walker.run()
    return sorted(diags, key=lambda d: (d.location.line, d.location.column, d.code))


def rule_env_access(script: ast.Script, config: Optional[CheckConfig] = None) -> list:
    codes = {"E_UNAUTHORIZED_ENV_ACCESS", "W_RUNTIME_ONLY_SOURCE"}
    return [d for d in check(script, config) if d.code in codes]


def rule_entry_point_contract(script: ast.Script, config: Optional[CheckConfig] = None) -> list:
    return [d for d in check(script, config) if d.code == "E_CONTRACT_VIOLATION"]


def list_completions(script: ast.Script, line: int, config: Optional[CheckConfig] = None) -> list:
    """Names available for ``${...}`` completion just before ``line``.

    Returns sorted (name, provenance) pairs: lexical variables in scope plus
    every design-environment name loaded earlier in the document.
    """
    walker = _Walker(script, config, stop_line=line)
    try:
        walker.run()
    except _Stop:
        pass
    entries = dict(walker.design.available)
    entries.update(walker.lexical_names())
    return sorted(entries.items())
