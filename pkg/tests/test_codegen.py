import dataclasses
import json
import os
import stat
import subprocess

import pytest

from nyosh import codegen, executor, parser
from nyosh.codegen import BuildError, build_package, dump_plan

from conftest import FIXTURES, parse_fixture


def relocated_fig8(tmp_path):
    script = parse_fixture(FIXTURES / "fig8.nyosh")
    header = dataclasses.replace(script.header, location=str(tmp_path / "plugins-root"))
    return dataclasses.replace(script, header=header)


class TestBuildPackage:
    def test_package_contents(self, tmp_path):
        script = relocated_fig8(tmp_path)
        package = build_package(script, tmp_path / "out", runner_path="nyosh")
        assert set(package.files) == {
            "script.sh",
            "run_model.sh",
            "manifest.xml",
            "BWAGobyArtifactScript.nyosh",
        }
        wrapper = package.files["script.sh"].decode()
        assert "function plugin_align {" in wrapper
        assert ". ${JOB_DIR}/run_model.sh plugin_align ${OUTPUT} ${BASENAME}" in wrapper

    def test_deterministic_rebuild(self, tmp_path):
        script = relocated_fig8(tmp_path)
        first = build_package(script, tmp_path / "out", runner_path="nyosh")
        second = build_package(script, tmp_path / "out", runner_path="nyosh")
        assert first.files == second.files
        for rel, content in first.files.items():
            assert (tmp_path / "out" / rel).read_bytes() == content

    def test_deploy_layout(self, tmp_path):
        script = relocated_fig8(tmp_path)
        build_package(script, tmp_path / "out", runner_path="nyosh")
        deployed = (
            tmp_path / "plugins-root" / "plugins" / "aligner" / "BWA_GOBY_ARTIFACT_NYOSH"
        )
        assert (deployed / "script.sh").exists()
        assert (deployed / "manifest.xml").read_bytes() == (tmp_path / "out" / "manifest.xml").read_bytes()

    def test_resource_kind_has_manifest_but_no_wrappers(self, tmp_path):
        script = parse_fixture(FIXTURES / "corpus" / "resource_plugin.nyosh")
        header = dataclasses.replace(script.header, location=str(tmp_path / "loc"))
        script = dataclasses.replace(script, header=header)
        package = build_package(script, tmp_path / "out")
        assert "manifest.xml" in package.files
        wrapper_lines = package.files["script.sh"].decode().splitlines()
        assert not any(line.startswith("function ") for line in wrapper_lines)

    def test_headerless_script_rejected(self, tmp_path):
        script = parser.parse_script("!script X {\n}\n", "x.nyosh")
        with pytest.raises(BuildError):
            build_package(script, tmp_path / "out")

    def test_manifest_echoes_header(self, tmp_path):
        script = relocated_fig8(tmp_path)
        package = build_package(script, tmp_path / "out")
        manifest = package.files["manifest.xml"].decode()
        assert "<id>BWA_GOBY_ARTIFACT_NYOSH</id>" in manifest
        assert "<kind>ALIGNER</kind>" in manifest

    def test_scripts_are_executable(self, tmp_path):
        script = relocated_fig8(tmp_path)
        build_package(script, tmp_path / "out")
        mode = os.stat(tmp_path / "out" / "script.sh").st_mode
        assert mode & stat.S_IXUSR


class TestWrapperFidelity:
    def test_wrapper_forwards_entry_and_args(self, tmp_path):
        stub = tmp_path / "stub-runner"
        capture = tmp_path / "capture.txt"
        stub.write_text('#!/bin/sh\nprintf \'%s\\n\' "$@" > "$CAPTURE"\n')
        stub.chmod(0o755)
        script = relocated_fig8(tmp_path)
        out_dir = tmp_path / "out"
        build_package(script, out_dir, runner_path=str(stub))
        proc = subprocess.run(
            ["bash", "-c", "source ./script.sh && plugin_align out base"],
            cwd=out_dir,
            env={
                "PATH": os.environ.get("PATH", "/usr/bin:/bin"),
                "JOB_DIR": str(out_dir),
                "CAPTURE": str(capture),
            },
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert capture.read_text().splitlines() == [
            "run",
            str(out_dir / "BWAGobyArtifactScript.nyosh"),
            "plugin_align",
            "out",
            "base",
        ]


class TestDumpPlan:
    def test_single_true(self):
        stmt = parser.parse_execute_line("execute: true")
        payload = json.loads(dump_plan(stmt))
        assert payload == {
            "sequence": [
                {
                    "pipelines": [
                        {
                            "connector": "start",
                            "commands": [["true"]],
                            "redirect": None,
                            "background": False,
                        }
                    ]
                }
            ]
        }

    def test_fig6_redirect_field(self, tmp_path):
        (tmp_path / "genome.fa").write_text(">x\n")
        scope = executor.Scope()
        scope.declare("SAMTOOLS", "samtools")
        scope.declare("samInputFile", "in.sam")
        scope.declare("JOB_DIR", str(tmp_path))
        stmt = parser.parse_execute_line(
            "execute: ${SAMTOOLS} view -Sbu ${samInputFile} | ${SAMTOOLS} sort -o - output | "
            "${SAMTOOLS} calmd - ${JOB_DIR}/*.fa redirect to file md-alignment.sam"
        )
        payload = json.loads(dump_plan(stmt, scope))
        (and_or,) = payload["sequence"]
        (pipeline,) = and_or["pipelines"]
        assert len(pipeline["commands"]) == 3
        assert pipeline["redirect"] == "md-alignment.sam"

    def test_seq_makes_two_lists(self):
        stmt = parser.parse_execute_line("execute: a ; b")
        payload = json.loads(dump_plan(stmt))
        assert len(payload["sequence"]) == 2
