"""Plugin package emission: wrapper scripts, runner stub, manifest and the
canonical script source, plus the copy into the plugin location.

The wrapper layout mirrors the deployed shape of a GobyWeb plugin: script.sh
defines one function per contract entry point, each delegating through
run_model.sh to the script runner.  Output is deterministic: identical inputs
produce byte-identical packages.
"""

from __future__ import annotations

import json
import shutil
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import ast, checker, envsource, executor


class BuildError(Exception):
    pass


@dataclass(frozen=True)
class PluginPackage:
    root_dir: str
    files: dict  # relative path -> bytes
    manifest: envsource.PluginConfigModel


def _wrapper_function(name: str, params) -> str:
    lines = [f"function {name} {{"]
    forwards = []
    for i, param in enumerate(params, 1):
        var = param.name.upper()
        lines.append(f"    {var}=${i}")
        forwards.append("${" + var + "}")
    call = " ".join([". ${JOB_DIR}/run_model.sh", name] + forwards)
    lines.append(f"    {call}")
    lines.append("}")
    return "\n".join(lines)


def _script_sh(script: ast.Script, contracts) -> str:
    header = script.header
    required = contracts.get(header.kind, ())
    by_name = {ep.name: ep for ep in script.entry_points}
    parts = [
        "#!/bin/bash",
        f"# Plugin wrapper for {header.id}; each function forwards to run_model.sh.",
        "",
    ]
    for name, param_types in required:
        entry = by_name.get(name)
        if entry is not None:
            params = entry.params
        else:
            params = tuple(
                ast.Param(f"arg{i}", t) for i, t in enumerate(param_types, 1)
            )
        parts.append(_wrapper_function(name, params))
        parts.append("")
    return "\n".join(parts)


def _run_model_sh(script_filename: str, runner_path: str) -> str:
    return "\n".join(
        [
            "#!/bin/bash",
            "# Invokes the script runner; NYOSH_RUNNER overrides the configured one.",
            "",
            f'NYOSH_RUNNER="${{NYOSH_RUNNER:-{runner_path}}}"',
            f'${{NYOSH_RUNNER}} run "${{JOB_DIR}}/{script_filename}" "$@"',
            "",
        ]
    )


def _manifest_xml(header: ast.PluginHeader) -> str:
    return "\n".join(
        [
            "<plugin>",
            f"  <id>{header.id}</id>",
            f"  <kind>{header.kind}</kind>",
            "</plugin>",
            "",
        ]
    )


def deploy_dir(header: ast.PluginHeader) -> Path:
    return Path(header.location) / "plugins" / header.kind.lower() / header.id


def build_package(
    script: ast.Script,
    out_dir,
    runner_path: str = "nyosh",
    contracts: Optional[dict] = None,
    deploy: bool = True,
) -> PluginPackage:
    """Emit the deployable package for a plugin script.

    Writes script.sh (wrapper functions), run_model.sh (runner invocation),
    manifest.xml and the canonical script source into ``out_dir``; when
    ``deploy`` is set the same files are copied under
    ``<header.location>/plugins/<kind>/<id>/``.
    """
    if script.header is None:
        raise BuildError("plugin packages need a plugin header")
    contracts = contracts or checker.DEFAULT_CONTRACTS
    script_filename = f"{script.name}.nyosh"
    files = {
        "script.sh": _script_sh(script, contracts).encode("utf-8"),
        "run_model.sh": _run_model_sh(script_filename, runner_path).encode("utf-8"),
        "manifest.xml": _manifest_xml(script.header).encode("utf-8"),
        script_filename: ast.pretty_print(script).encode("utf-8"),
    }
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        for rel, content in files.items():
            (out / rel).write_bytes(content)
        for rel in ("script.sh", "run_model.sh"):
            (out / rel).chmod(0o755)
        if deploy:
            dest = deploy_dir(script.header)
            dest.mkdir(parents=True, exist_ok=True)
            for rel in files:
                shutil.copyfile(out / rel, dest / rel)
    except OSError as exc:
        raise BuildError(f"cannot write package: {exc}") from exc
    manifest = envsource.PluginConfigModel(script.header.id, script.header.kind)
    return PluginPackage(str(out), files, manifest)


def plan_as_dict(plan: executor.ExecutionPlan) -> dict:
    return {
        "sequence": [
            {
                "pipelines": [
                    {
                        "connector": item.connector,
                        "commands": [list(cmd.argv) for cmd in item.pipeline.commands],
                        "redirect": item.pipeline.redirect_to,
                        "background": item.pipeline.background,
                    }
                    for item in and_or
                ]
            }
            for and_or in plan.sequence
        ]
    }


def dump_plan(
    statement: ast.ExecuteCommand,
    scope: Optional[executor.Scope] = None,
    env: Optional[envsource.RuntimeEnvironment] = None,
    config: Optional[executor.RunConfig] = None,
) -> str:
    """Assemble an execute statement and render the plan hierarchy as JSON."""
    plan = executor.assemble(statement.elements, scope, env, config)
    return json.dumps(plan_as_dict(plan), indent=2)
