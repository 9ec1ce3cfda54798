"""Script runtime: command assembly, pipeline execution with BASH-equivalent
operator semantics, step logging, error management and entry-point dispatch.

Pipelines spawn their stages concurrently with stdout piped to stdin; ``&&``
and ``||`` short-circuit on the previous exit status; ``;`` and ``&`` delimit
and-or lists, with ``&`` detaching its pipeline (no wait, no exit-code
contribution).  ``exit <n>`` is handled as the shell builtin: alone in a
foreground pipeline it stops the whole plan with status ``n``; inside a larger
pipeline it only supplies that stage's exit code.
"""

from __future__ import annotations

import os
import re
import subprocess
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Optional

from . import ast, envsource
from .textscan import ScanError, split_words

DEFAULT_FETCH_TEMPLATE = "plugin-sdk fetch {slot}"
DEFAULT_PUSH_TEMPLATE = "plugin-sdk push {slot}"

CONNECTOR_START = "start"
CONNECTOR_AND = "and"
CONNECTOR_OR = "or"


class AssembleError(Exception):
    pass


class RuntimeScriptError(Exception):
    pass


class ScriptExit(Exception):
    """Controlled script termination carrying the process exit status."""

    def __init__(self, status: int):
        super().__init__(f"script exit {status}")
        self.status = status


@dataclass
class RunConfig:
    plugin_config: Optional[envsource.PluginConfig] = None
    fetch_template: str = DEFAULT_FETCH_TEMPLATE
    push_template: str = DEFAULT_PUSH_TEMPLATE
    job_dir: str = "."


# ---------------------------------------------------------------------------
# Execution plan
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimpleCommand:
    argv: tuple
    env_exports: frozenset = frozenset()


@dataclass(frozen=True)
class Pipeline:
    commands: tuple
    redirect_to: Optional[str] = None
    background: bool = False


@dataclass(frozen=True)
class AndOrItem:
    connector: str  # start | and | or
    pipeline: Pipeline


@dataclass(frozen=True)
class ExecutionPlan:
    sequence: tuple  # of tuples of AndOrItem
    assembled_text: str = ""
    env_snapshot: Mapping = field(default_factory=dict)
    base_env: Optional[Mapping] = None


@dataclass(frozen=True)
class RunResult:
    last_exit_code: int
    executed_completely: bool
    assembled_text: str
    stop_requested: bool = False


# ---------------------------------------------------------------------------
# Steps logging and error management
# ---------------------------------------------------------------------------

STATUS_DONE = "DONE"
STATUS_ERROR = "ERROR"


@dataclass(frozen=True)
class StepRecord:
    timestamp: str
    status: str
    description: str
    code: int


class FileStepsLogger:
    """Appends one tab-separated record per step event to <job_dir>/steps.log.

    The file is created on the first record, so an execution that records
    nothing leaves no log behind.
    """

    def __init__(self, job_dir: str = "."):
        self.path = Path(job_dir) / "steps.log"
        self.records = []
        self._fh = None
        self._closed = False

    def _write(self, status: str, code: int, description: str):
        if self._closed:
            raise IOError("steps logger is closed")
        timestamp = datetime.now(timezone.utc).isoformat()
        record = StepRecord(timestamp, status, description, code)
        self.records.append(record)
        if self._fh is None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = open(self.path, "a", encoding="utf-8")
        self._fh.write(f"{timestamp}\t{status}\t{code}\t{description}\n")
        self._fh.flush()

    def step(self, description: str, code: int = 0):
        self._write(STATUS_DONE, code, description)

    def error(self, description: str, code: int = 1):
        self._write(STATUS_ERROR, code, description)

    def close(self):
        self._closed = True
        if self._fh is not None:
            fh, self._fh = self._fh, None
            fh.close()


class GobyWebDefaultErrorManagement:
    """Default policy: every step outcome becomes a steps-log record."""

    def __init__(self, logger: FileStepsLogger):
        self.logger = logger

    def record_step_done(self, description: str):
        self.logger.step(description, 0)

    def exception(self, description: str, status_code: int, error):
        self.logger.error(description, status_code)


ERROR_MANAGEMENT_POLICIES = {
    ast.DEFAULT_ERROR_MANAGEMENT: GobyWebDefaultErrorManagement,
}


def run_step_block(description: str, body, policy, logger=None, is_final: bool = False):
    """Run a step body, recording DONE or ERROR through the policy.

    A :class:`ScriptExit` (the ``fail`` statement) passes straight through:
    like a process exit it bypasses step accounting.  When ``is_final`` is set
    the logger is closed afterwards, tolerating a close failure with a note.
    """
    success = False
    error = None
    try:
        body()
        success = True
    except ScriptExit:
        raise
    except Exception as exc:
        error = exc
    if success:
        policy.record_step_done(description)
    else:
        policy.exception(f"step {description} failed.", 0, error)
    if is_final and logger is not None:
        try:
            logger.close()
        except Exception as exc:
            print(f"note: error closing steps logger: {exc}", file=sys.stderr)


def fail(must_be_true: bool, reason: str, status_code: int = 1, logger=None):
    """Record an ERROR and terminate the script unless the condition holds."""
    if must_be_true:
        return
    if logger is not None:
        logger.error(reason, status_code)
        try:
            logger.close()
        except Exception:
            pass  # we tried; giving up on the logger
    raise ScriptExit(status_code)


# ---------------------------------------------------------------------------
# Scope
# ---------------------------------------------------------------------------

class Scope:
    """Chained variable frames.  Values may be str, int, bool, list of str, or
    a GString stored unevaluated (the lazy case)."""

    def __init__(self, parent: Optional["Scope"] = None):
        self.vars = {}
        self.parent = parent

    def declare(self, name: str, value):
        self.vars[name] = value

    def assign(self, name: str, value):
        frame = self
        while frame is not None:
            if name in frame.vars:
                frame.vars[name] = value
                return
            frame = frame.parent
        raise RuntimeScriptError(f"assignment to undeclared variable {name}")

    def __contains__(self, name) -> bool:
        frame = self
        while frame is not None:
            if name in frame.vars:
                return True
            frame = frame.parent
        return False

    def __getitem__(self, name):
        frame = self
        while frame is not None:
            if name in frame.vars:
                return frame.vars[name]
            frame = frame.parent
        raise KeyError(name)

    def get(self, name, default=None):
        try:
            return self[name]
        except KeyError:
            return default


# ---------------------------------------------------------------------------
# Expression evaluation
# ---------------------------------------------------------------------------

def as_string(value, scope=None, env=None) -> str:
    if isinstance(value, ast.GString):
        return envsource.eval_gstring(value, scope, env)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return " ".join(str(v) for v in value)
    return str(value)


def _java_split(s: str, pattern: str) -> list:
    try:
        parts = re.split(pattern, s)
    except re.error as exc:
        raise RuntimeScriptError(f"bad split pattern {pattern!r}: {exc}") from exc
    while parts and parts[-1] == "":
        parts.pop()
    return parts


def _base_name(path: str) -> str:
    name = path.rsplit("/", 1)[-1]
    dot = name.rfind(".")
    return name[:dot] if dot > 0 else name


def _full_path(path: str) -> str:
    slash = path.rfind("/")
    return path[: slash + 1] if slash >= 0 else ""


def eval_expr(expr, scope: Scope, env, base_dir: str = "."):
    if isinstance(expr, ast.StringLiteral):
        return expr.text
    if isinstance(expr, ast.IntLiteral):
        return expr.value
    if isinstance(expr, ast.BoolLiteral):
        return expr.value
    if isinstance(expr, ast.VarRef):
        try:
            value = scope[expr.name]
        except KeyError:
            raise RuntimeScriptError(f"undefined variable {expr.name}") from None
        if isinstance(value, ast.GString):
            return envsource.eval_gstring(value, scope, env)
        return value
    if isinstance(expr, ast.GString):
        return envsource.eval_gstring(expr, scope, env)
    if isinstance(expr, ast.PathPattern):
        pattern = envsource.eval_gstring(expr.pattern, scope, env)
        return envsource.expand_path_pattern(pattern, base_dir)
    if isinstance(expr, ast.Ternary):
        cond = eval_expr(expr.condition, scope, env, base_dir)
        if not isinstance(cond, bool):
            raise RuntimeScriptError("ternary condition must be boolean")
        branch = expr.then if cond else expr.otherwise
        return eval_expr(branch, scope, env, base_dir)
    if isinstance(expr, ast.ArrayIndex):
        arr = eval_expr(expr.array, scope, env, base_dir)
        idx = eval_expr(expr.index, scope, env, base_dir)
        if not isinstance(arr, (list, tuple)) or isinstance(idx, bool) or not isinstance(idx, int):
            raise RuntimeScriptError("array indexing needs an array and an int index")
        if idx < 0 or idx >= len(arr):
            raise RuntimeScriptError(f"array index {idx} out of bounds (length {len(arr)})")
        return arr[idx]
    if isinstance(expr, ast.MethodCall):
        return _eval_method(expr, scope, env, base_dir)
    raise RuntimeScriptError(f"cannot evaluate {type(expr).__name__}")


def _eval_method(expr: ast.MethodCall, scope, env, base_dir):
    recv = eval_expr(expr.receiver, scope, env, base_dir)
    args = [eval_expr(a, scope, env, base_dir) for a in expr.args]
    method = expr.method
    if method == "toUpperCase":
        return as_string(recv, scope, env).upper()
    if method == "split":
        if len(args) != 1:
            raise RuntimeScriptError("split takes one pattern argument")
        return _java_split(as_string(recv, scope, env), as_string(args[0], scope, env))
    if method == "equals":
        if len(args) != 1:
            raise RuntimeScriptError("equals takes one argument")
        other = args[0]
        if isinstance(recv, bool) or isinstance(other, bool):
            return recv is other
        if isinstance(recv, int) and isinstance(other, int):
            return recv == other
        return as_string(recv, scope, env) == as_string(other, scope, env)
    if method == "format":
        fmt = as_string(recv, scope, env)
        try:
            return fmt % tuple(
                a if isinstance(a, int) and not isinstance(a, bool) else as_string(a, scope, env)
                for a in args
            )
        except (TypeError, ValueError) as exc:
            raise RuntimeScriptError(f"bad format {fmt!r}: {exc}") from exc
    if method == "getBaseName":
        return _base_name(as_string(recv, scope, env))
    if method == "getFullPath":
        return _full_path(as_string(recv, scope, env))
    if method == "length":
        if isinstance(recv, (list, tuple, str)):
            return len(recv)
        raise RuntimeScriptError("length needs a string or array")
    if method == "index":
        if len(args) != 1:
            raise RuntimeScriptError("index takes one argument")
        return _index(recv, args[0])
    raise RuntimeScriptError(f"unknown method {method}")


def _index(arr, idx):
    if not isinstance(arr, (list, tuple)) or isinstance(idx, bool) or not isinstance(idx, int):
        raise RuntimeScriptError("index needs an array and an int")
    if idx < 0 or idx >= len(arr):
        raise RuntimeScriptError(f"array index {idx} out of bounds (length {len(arr)})")
    return arr[idx]


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------

def _referenced_lexicals(g: ast.GString, scope: Scope) -> list:
    names = []
    for comp in g.components:
        if isinstance(comp, (ast.VarReference, ast.EnvVarReader)) and comp.name in scope:
            names.append(comp.name)
    return names


def _words_to_argv(text: str, base_dir: str) -> list:
    try:
        words = split_words(text)
    except ScanError as exc:
        raise AssembleError(f"bad quoting in command: {exc.message}") from exc
    argv = []
    for word in words:
        if word.glob_eligible:
            matches = envsource.expand_path_pattern(word.text, base_dir)
            if matches:
                argv.extend(matches)
            else:
                print(f"nyosh: warning: no matches for pattern: {word.text}", file=sys.stderr)
        else:
            argv.append(word.text)
    return argv


def assemble(
    elements,
    scope: Optional[Scope] = None,
    env: Optional[envsource.RuntimeEnvironment] = None,
    config: Optional[RunConfig] = None,
    base_dir: str = ".",
) -> ExecutionPlan:
    """Evaluate GStrings against the current environment and fold the element
    list into the sequence / and-or / pipeline hierarchy.

    Pipe binds tightest; ``&&``/``||`` chain left to right; ``;`` and ``&``
    close an and-or list.  Fetch and push elements expand through the
    configured SDK command templates.
    """
    scope = scope if scope is not None else Scope()
    config = config or RunConfig()
    faults = ast.placement_faults(tuple(elements))
    if faults:
        raise AssembleError(f"ill-formed element list: {faults[0][1].replace('_', ' ')}")

    snapshot = dict(env.exported_values()) if env is not None else {}
    exported_names = frozenset(snapshot)

    sequence = []
    current_list = []
    current_cmds = []
    current_redirect = None
    pending_connector = CONNECTOR_START
    text_parts = []

    def close_pipeline(background=False):
        nonlocal current_cmds, current_redirect, pending_connector
        if not current_cmds:
            if current_redirect is not None:
                raise AssembleError("redirect without a command")
            return
        pipeline = Pipeline(tuple(current_cmds), current_redirect, background)
        current_list.append(AndOrItem(pending_connector, pipeline))
        current_cmds = []
        current_redirect = None

    def close_list():
        nonlocal current_list, pending_connector
        if current_list:
            sequence.append(tuple(current_list))
        current_list = []
        pending_connector = CONNECTOR_START

    def add_command(text: str, extra_exports):
        argv = _words_to_argv(text, base_dir)
        if not argv:
            raise AssembleError(f"command is empty after expansion: {text!r}")
        exports = exported_names | frozenset(extra_exports)
        current_cmds.append(SimpleCommand(tuple(argv), exports))
        text_parts.append(text)

    for el in elements:
        if isinstance(el, ast.Command):
            if el.text.raw_text is not None:
                raise AssembleError("command text is still staged for micro-parsing")
            text = envsource.eval_gstring(el.text, scope, env)
            refs = _referenced_lexicals(el.text, scope)
            for name in refs:
                snapshot[name] = as_string(scope[name], scope, env)
            add_command(text, refs)
        elif isinstance(el, ast.FetchCommand):
            text = config.fetch_template.replace("{slot}", el.slot)
            add_command(text, ())
        elif isinstance(el, ast.PushCommand):
            text = config.push_template.replace("{slot}", el.slot)
            add_command(text, ())
        elif isinstance(el, ast.RedirectToFile):
            target = envsource.eval_gstring(el.target, scope, env)
            current_redirect = target
            text_parts.append(f"redirect to file {target}")
        elif isinstance(el, ast.Operator):
            text_parts.append(el.kind.value)
            if el.kind is ast.OperatorKind.PIPE:
                continue  # stays within the current pipeline
            if el.kind is ast.OperatorKind.AND:
                close_pipeline()
                pending_connector = CONNECTOR_AND
            elif el.kind is ast.OperatorKind.OR:
                close_pipeline()
                pending_connector = CONNECTOR_OR
            elif el.kind is ast.OperatorKind.SEQ:
                close_pipeline()
                close_list()
            elif el.kind is ast.OperatorKind.BACKGROUND:
                close_pipeline(background=True)
                close_list()
        else:
            raise AssembleError(f"unknown element {el!r}")
    close_pipeline()
    close_list()
    if not sequence:
        raise AssembleError("nothing to execute")

    base_env = dict(env.base_env) if env is not None else None
    return ExecutionPlan(
        tuple(sequence),
        assembled_text=" ".join(text_parts),
        env_snapshot=snapshot,
        base_env=base_env,
    )


# ---------------------------------------------------------------------------
# Running a plan
# ---------------------------------------------------------------------------

_background_children = []  # keep references; never reaped by design


def _child_env(plan: ExecutionPlan, cmd: SimpleCommand):
    if plan.base_env is None and not cmd.env_exports:
        return None  # plain inheritance
    env = dict(os.environ if plan.base_env is None else plan.base_env)
    for name in sorted(cmd.env_exports):
        if name in plan.env_snapshot:
            env[name] = plan.env_snapshot[name]
    return env


def _exit_builtin_code(argv) -> int:
    if len(argv) < 2:
        return 0
    try:
        return int(argv[1]) & 0xFF
    except ValueError:
        return 2


def _run_pipeline(plan: ExecutionPlan, pipeline: Pipeline, stdin, stdout):
    """Spawn every stage, wait, and return (exit_code, spawn_failed, stop).

    ``stop`` is set when the pipeline was a lone foreground ``exit`` builtin,
    which terminates the whole plan the way the shell builtin does.
    """
    n = len(pipeline.commands)
    stages = []  # ("proc", Popen) | ("code", int)
    prev_read = None  # file object or fd feeding the next stage
    spawn_failed = False

    def close_prev():
        nonlocal prev_read
        if prev_read is None:
            return
        if isinstance(prev_read, int):
            os.close(prev_read)
        else:
            prev_read.close()
        prev_read = None

    redirect_fh = None
    if pipeline.redirect_to is not None:
        try:
            redirect_fh = open(pipeline.redirect_to, "wb")
        except OSError as exc:
            print(f"nyosh: cannot create {pipeline.redirect_to}: {exc.strerror}", file=sys.stderr)
            return 2, True, False

    for i, cmd in enumerate(pipeline.commands):
        last = i == n - 1
        if cmd.argv and cmd.argv[0] == "exit":
            code = _exit_builtin_code(cmd.argv)
            if n == 1 and not pipeline.background:
                if redirect_fh:
                    redirect_fh.close()
                return code, False, True
            close_prev()  # upstream writers see EPIPE, as with a real exit
            stages.append(("code", code))
            if not last:
                r, w = os.pipe()
                os.close(w)  # next stage reads EOF immediately
                prev_read = r
            continue
        stage_stdin = prev_read if prev_read is not None else stdin
        if last:
            stage_stdout = redirect_fh if redirect_fh is not None else stdout
        else:
            stage_stdout = subprocess.PIPE
        try:
            proc = subprocess.Popen(
                list(cmd.argv),
                stdin=stage_stdin,
                stdout=stage_stdout,
                env=_child_env(plan, cmd),
            )
        except (OSError, ValueError) as exc:
            reason = getattr(exc, "strerror", None) or str(exc)
            print(f"nyosh: {cmd.argv[0]}: {reason}", file=sys.stderr)
            spawn_failed = True
            close_prev()
            stages.append(("code", 127))
            if not last:
                r, w = os.pipe()
                os.close(w)
                prev_read = r
            continue
        close_prev()
        stages.append(("proc", proc))
        if not last:
            prev_read = proc.stdout
    close_prev()
    if redirect_fh is not None:
        redirect_fh.close()

    if pipeline.background:
        for kind, stage in stages:
            if kind == "proc":
                _background_children.append(stage)
        return 0, spawn_failed, False

    exit_code = 0
    for kind, stage in stages:
        if kind == "code":
            exit_code = stage
        else:
            rc = stage.wait()
            exit_code = 128 - rc if rc < 0 else rc
    return exit_code, spawn_failed, False


def run(plan: ExecutionPlan, policy=None, stdin=None, stdout=None) -> RunResult:
    """Execute a plan.

    The final exit status is that of the last non-background pipeline that
    actually ran; skipped pipelines propagate the status that decided them.
    On any spawn failure the policy's exception handler is invoked exactly
    once with the assembled command text.
    """
    last_exit = 0
    any_spawn_failure = False
    stop = False
    for and_or in plan.sequence:
        if stop:
            break
        for item in and_or:
            if stop:
                break
            if item.connector == CONNECTOR_AND and last_exit != 0:
                continue
            if item.connector == CONNECTOR_OR and last_exit == 0:
                continue
            code, failed, stop_req = _run_pipeline(plan, item.pipeline, stdin, stdout)
            any_spawn_failure = any_spawn_failure or failed
            if item.pipeline.background:
                continue
            last_exit = code
            if stop_req:
                stop = True
    executed_completely = not any_spawn_failure
    if not executed_completely and policy is not None:
        policy.exception(f"failed executing: {plan.assembled_text}", 0, None)
    return RunResult(last_exit, executed_completely, plan.assembled_text, stop)


# ---------------------------------------------------------------------------
# Interpreter
# ---------------------------------------------------------------------------

def _resolve_source_spec(spec, config: RunConfig):
    if isinstance(spec, ast.ProcessEnvSource):
        return envsource.ProcessEnv()
    if isinstance(spec, ast.PluginSource):
        if config.plugin_config is None:
            raise RuntimeScriptError("GobyWebSource is not configured (no plugin config)")
        return config.plugin_config
    if isinstance(spec, ast.MapFileSource):
        return envsource.MapFile(spec.path)
    raise RuntimeScriptError(f"unknown environment source {spec!r}")


class _Interpreter:
    def __init__(self, script: ast.Script, config: Optional[RunConfig], host_env=None):
        self.script = script
        self.config = config or RunConfig()
        self.env = envsource.RuntimeEnvironment(host_env)
        self.logger = FileStepsLogger(self.config.job_dir)
        policy_class = ERROR_MANAGEMENT_POLICIES.get(
            script.error_management, GobyWebDefaultErrorManagement
        )
        self.policy = policy_class(self.logger)
        self.last_exit_code = 0

    def _exec_block(self, statements, scope: Scope):
        for stmt in statements:
            self._exec_statement(stmt, scope)

    def _value_of(self, expr, scope: Scope):
        if isinstance(expr, ast.GString):
            return expr  # stored lazily; evaluated at each use
        return eval_expr(expr, scope, self.env, self.config.job_dir)

    def _exec_statement(self, stmt, scope: Scope):
        if isinstance(stmt, ast.VarDecl):
            scope.declare(stmt.name, self._value_of(stmt.initializer, scope))
        elif isinstance(stmt, ast.Assignment):
            scope.assign(stmt.target, self._value_of(stmt.value, scope))
        elif isinstance(stmt, ast.If):
            cond = eval_expr(stmt.condition, scope, self.env, self.config.job_dir)
            if not isinstance(cond, bool):
                raise RuntimeScriptError("if condition must be boolean")
            branch = stmt.then_body if cond else (stmt.else_body or ())
            self._exec_block(branch, Scope(scope))
        elif isinstance(stmt, ast.Println):
            text = as_string(
                eval_expr(stmt.value, scope, self.env, self.config.job_dir), scope, self.env
            )
            print(text, file=sys.stdout)
        elif isinstance(stmt, ast.ExpressionStatement):
            eval_expr(stmt.expression, scope, self.env, self.config.job_dir)
        elif isinstance(stmt, ast.LoadEnvironmentSources):
            for spec in stmt.sources:
                resolved = _resolve_source_spec(spec, self.config)
                try:
                    self.env.load(resolved, scope)
                except envsource.EnvironmentLoadError as exc:
                    raise RuntimeScriptError(str(exc)) from exc
        elif isinstance(stmt, ast.StepBlock):
            child = Scope(scope)
            run_step_block(
                stmt.description,
                lambda: self._exec_block(stmt.body, child),
                self.policy,
                self.logger,
            )
        elif isinstance(stmt, ast.Fail):
            message = envsource.eval_gstring(stmt.message, scope, self.env)
            fail(False, message, stmt.status_code, self.logger)
        elif isinstance(stmt, ast.ExecuteCommand):
            if stmt.raw_text is not None:
                raise RuntimeScriptError("execute statement still holds unparsed raw text")
            plan = assemble(stmt.elements, scope, self.env, self.config, self.config.job_dir)
            result = run(plan, policy=self.policy)
            self.last_exit_code = result.last_exit_code
            if result.stop_requested:
                raise ScriptExit(result.last_exit_code)
        else:
            raise RuntimeScriptError(f"cannot execute statement {type(stmt).__name__}")

    def _bind_args(self, entry: ast.EntryPoint, args) -> Scope:
        scope = Scope()
        for param, arg in zip(entry.params, args):
            if param.decl_type == "int":
                try:
                    value = int(arg)
                except ValueError:
                    raise RuntimeScriptError(f"parameter {param.name} needs an int") from None
            elif param.decl_type == "boolean":
                value = arg == "true"
            else:
                value = arg
            scope.declare(param.name, value)
        return scope

    def run_entry(self, entry: ast.EntryPoint, args) -> int:
        try:
            scope = self._bind_args(entry, args)
            self._exec_block(entry.body, scope)
        except (RuntimeScriptError, envsource.ResolutionError, AssembleError,
                envsource.PatternError) as exc:
            self.logger.error(f"script error: {exc}", 1)
            return 1
        return 0

    def finish(self):
        try:
            self.logger.close()
        except Exception as exc:
            print(f"note: error closing steps logger: {exc}", file=sys.stderr)


def dispatch_entry(
    script: ast.Script,
    args,
    config: Optional[RunConfig] = None,
    host_env=None,
) -> int:
    """Select and run an entry point by name; returns the process exit status.

    No arguments means ``main``.  A matched entry with the wrong argument
    count reports "Invalid number of arguments" on stderr yet still finishes
    with status 0, faithfully reproducing the reference runtime; an unknown
    entry name reports on stderr and exits 1.
    """
    args = list(args)
    if not args:
        args = ["main"]
    name = args[0]
    interp = _Interpreter(script, config, host_env)
    for entry in script.entry_points:
        if entry.name == name:
            try:
                if len(args) - 1 == len(entry.params):
                    status = interp.run_entry(entry, args[1:])
                else:
                    print("Invalid number of arguments", file=sys.stderr)
                    status = 0
            except ScriptExit as exc:
                interp.finish()
                return exc.status
            interp.finish()
            return status
    sys.stderr.write(f"The entry point {name} name was not recognized")
    sys.stderr.flush()
    interp.finish()
    return 1


def interpret(
    script: ast.Script,
    args,
    host_env=None,
    config: Optional[RunConfig] = None,
) -> int:
    """Run a script: dispatch the selected entry point and execute its
    statements sequentially against ``host_env``."""
    return dispatch_entry(script, args, config=config, host_env=host_env)
