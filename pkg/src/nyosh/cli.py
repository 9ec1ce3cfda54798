"""Command-line front end: check, run, import-bash, env, build, dump-plan.

Exit statuses: 0 success, 1 semantic or runtime failure, 2 parse failure,
3 missing file.  Stdout carries machine-consumable output only; human
messages go to stderr.  Configuration comes from ./nyosh.toml, the
NYOSH_CONFIG environment variable, or --config.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import ast, checker, codegen, envsource, executor, microparse, parser

CONFIG_FILENAME = "nyosh.toml"


class ConfigError(Exception):
    pass


@dataclass
class CliConfig:
    plugin_config_path: Optional[str] = None
    runtime_values: dict = field(default_factory=dict)
    fetch_template: str = executor.DEFAULT_FETCH_TEMPLATE
    push_template: str = executor.DEFAULT_PUSH_TEMPLATE
    job_dir: str = "."
    contracts: Optional[dict] = None

    def plugin_source(self) -> Optional[envsource.PluginConfig]:
        if self.plugin_config_path is None:
            return None
        return envsource.PluginConfig(self.plugin_config_path, dict(self.runtime_values))

    def check_config(self) -> checker.CheckConfig:
        return checker.CheckConfig(plugin_config=self.plugin_source(), contracts=self.contracts)

    def run_config(self) -> executor.RunConfig:
        return executor.RunConfig(
            plugin_config=self.plugin_source(),
            fetch_template=self.fetch_template,
            push_template=self.push_template,
            job_dir=self.job_dir,
        )


def _parse_contract(text: str):
    import re

    m = re.fullmatch(r"\s*([A-Za-z_]\w*)\s*\(([^)]*)\)\s*", text)
    if not m:
        raise ConfigError(f"malformed contract entry {text!r}; expected name(type, ...)")
    types = tuple(t.strip() for t in m.group(2).split(",") if t.strip())
    return m.group(1), types


def load_config(explicit_path: Optional[str] = None, cwd: str = ".") -> CliConfig:
    """Load CLI configuration; every key is optional."""
    path = explicit_path or os.environ.get("NYOSH_CONFIG")
    if path is None:
        candidate = Path(cwd) / CONFIG_FILENAME
        if candidate.exists():
            path = str(candidate)
    config = CliConfig()
    if path is None:
        return config
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    base = Path(path).parent
    if "plugin_config" in data:
        pc = Path(str(data["plugin_config"]))
        config.plugin_config_path = str(pc if pc.is_absolute() else base / pc)
    config.runtime_values = {str(k): str(v) for k, v in data.get("runtime_values", {}).items()}
    if "job_dir" in data:
        jd = Path(str(data["job_dir"]))
        config.job_dir = str(jd if jd.is_absolute() else base / jd)
    sdk = data.get("sdk", {})
    config.fetch_template = str(sdk.get("fetch_template", config.fetch_template))
    config.push_template = str(sdk.get("push_template", config.push_template))
    for template in (config.fetch_template, config.push_template):
        if "{slot}" not in template:
            raise ConfigError(f"SDK template must contain {{slot}}: {template!r}")
    if "contracts" in data:
        contracts = {}
        for kind, value in data["contracts"].items():
            if kind not in ast.PLUGIN_KINDS:
                raise ConfigError(f"unknown plugin kind in contracts: {kind}")
            entries = value if isinstance(value, list) else [value]
            contracts[kind] = tuple(_parse_contract(str(v)) for v in entries)
        config.contracts = {**checker.DEFAULT_CONTRACTS, **contracts}
    return config


def _read_script(path: str):
    """Returns (script, None) or (None, exit_status) after reporting."""
    p = Path(path)
    if not p.is_file():
        print(f"nyosh: no such file: {path}", file=sys.stderr)
        return None, 3
    result = parser.parse_script_file(p)
    if isinstance(result, list):
        for error in result:
            print(str(error), file=sys.stderr)
        return None, 2
    return result, None


def cmd_check(args, config: CliConfig) -> int:
    script, status = _read_script(args.file)
    if script is None:
        return status
    diagnostics = checker.check(script, config.check_config())
    if args.json:
        print(checker.diagnostics_json(diagnostics))
    else:
        for diag in diagnostics:
            print(diag.line_format())
    has_errors = any(d.severity == checker.SEVERITY_ERROR for d in diagnostics)
    return 1 if has_errors else 0


def cmd_run(args, config: CliConfig) -> int:
    script, status = _read_script(args.file)
    if script is None:
        return status
    diagnostics = checker.check(script, config.check_config())
    errors = [d for d in diagnostics if d.severity == checker.SEVERITY_ERROR]
    if errors:
        for diag in errors:
            print(diag.line_format(), file=sys.stderr)
        print("nyosh: check failed; not running", file=sys.stderr)
        return 1
    return executor.interpret(script, args.entry_args, config=config.run_config())


def cmd_import_bash(args, config: CliConfig) -> int:
    raw = sys.stdin.read()
    raw = raw[:-1] if raw.endswith("\n") else raw
    if not raw.strip():
        print("nyosh: empty input", file=sys.stderr)
        return 1
    if "\n" in raw:
        print("nyosh: import-bash expects a single command line", file=sys.stderr)
        print(raw, file=sys.stderr)
        return 1
    if args.mode == "vars":
        result = microparse.extract_variables(raw)
        if not result.consumed:
            print(f"nyosh: {result.error}", file=sys.stderr)
            print(raw, file=sys.stderr)
            return 1
        for warning in result.warnings:
            print(f"nyosh: warning: {warning}", file=sys.stderr)
        for decl in result.new_declarations:
            sys.stdout.write(ast.pretty_print(decl))
        statement = ast.VarDecl("bashCommand", "string", result.replacement)
        sys.stdout.write(ast.pretty_print(statement))
        return 0
    result = microparse.parse_command_literal(raw)
    if not result.consumed:
        print(f"nyosh: {result.error}", file=sys.stderr)
        print(raw, file=sys.stderr)
        return 1
    statement = ast.ExecuteCommand(result.replacement)
    sys.stdout.write(ast.pretty_print(statement))
    return 0


def cmd_env(args, config: CliConfig) -> int:
    script, status = _read_script(args.file)
    if script is None:
        return status
    entries = checker.list_completions(script, line=10**9, config=config.check_config())
    for name, provenance in entries:
        print(f"{name}\t{provenance}")
    return 0


def cmd_build(args, config: CliConfig) -> int:
    script, status = _read_script(args.file)
    if script is None:
        return status
    if script.header is None:
        print("nyosh: cannot build a package without a plugin header", file=sys.stderr)
        return 1
    diagnostics = checker.check(script, config.check_config())
    errors = [d for d in diagnostics if d.severity == checker.SEVERITY_ERROR]
    if errors:
        for diag in errors:
            print(diag.line_format(), file=sys.stderr)
        return 1
    try:
        package = codegen.build_package(
            script,
            args.out_dir,
            runner_path=args.runner,
            contracts=config.contracts or checker.DEFAULT_CONTRACTS,
            deploy=not args.no_deploy,
        )
    except codegen.BuildError as exc:
        print(f"nyosh: {exc}", file=sys.stderr)
        return 1
    for rel in sorted(package.files):
        print(rel)
    return 0


def cmd_dump_plan(args, config: CliConfig) -> int:
    result = parser.parse_execute_line(args.statement)
    if isinstance(result, parser.ParseError):
        print(str(result), file=sys.stderr)
        return 2
    try:
        print(codegen.dump_plan(result, config=config.run_config()))
    except (executor.AssembleError, envsource.ResolutionError) as exc:
        print(f"nyosh: {exc}", file=sys.stderr)
        return 1
    return 0


def build_arg_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nyosh", description="NYoSh script workbench")
    p.add_argument("--config", help=f"config file (default: ./{CONFIG_FILENAME})")
    p.add_argument("--job-dir", help="directory for steps.log and relative paths")
    p.add_argument("--json", action="store_true", help="machine-readable diagnostics")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="parse and statically check a script")
    c.add_argument("file")
    c.set_defaults(func=cmd_check)

    r = sub.add_parser("run", help="check and run a script")
    r.add_argument("file")
    r.add_argument("entry_args", nargs="*", help="entry point name and its arguments")
    r.set_defaults(func=cmd_run)

    i = sub.add_parser("import-bash", help="convert raw BASH text from stdin")
    i.add_argument("mode", choices=["vars", "commands"])
    i.set_defaults(func=cmd_import_bash)

    e = sub.add_parser("env", help="list design-time environment variables")
    e.add_argument("file")
    e.set_defaults(func=cmd_env)

    b = sub.add_parser("build", help="emit a deployable plugin package")
    b.add_argument("file")
    b.add_argument("out_dir")
    b.add_argument("--runner", default="nyosh", help="runner command placed in wrappers")
    b.add_argument("--no-deploy", action="store_true", help="skip the copy to the plugin location")
    b.set_defaults(func=cmd_build)

    d = sub.add_parser("dump-plan", help="show the execution plan of one execute: line")
    d.add_argument("statement", help="an execute: statement")
    d.set_defaults(func=cmd_dump_plan)
    return p


def main(argv=None) -> int:
    args = build_arg_parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"nyosh: {exc}", file=sys.stderr)
        return 1
    if args.job_dir:
        config.job_dir = args.job_dir
    return args.func(args, config)


if __name__ == "__main__":
    sys.exit(main())
