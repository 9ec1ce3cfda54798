"""Cross-module properties: oracle comparisons and corpus-wide invariants."""

import os
import random
import string
import subprocess
import sys

import pytest

from nyosh import ast, checker, codegen, envsource, executor, microparse, parser

from conftest import CORPUS, FIXTURES, parse_fixture

SH_ENV = {"PATH": os.environ.get("PATH", "/usr/bin:/bin"), "LC_ALL": "C"}


class TestGlobOracle:
    """Wildcard expansion against the shell glob on randomized directories.

    Empty matches are excluded: the shell falls back to the literal pattern
    where this implementation deliberately returns an empty list.
    """

    def shell_glob(self, pattern, cwd):
        out = subprocess.run(
            ["sh", "-c", f'for f in {pattern}; do printf "%s\\n" "$f"; done'],
            capture_output=True,
            text=True,
            cwd=cwd,
            env=SH_ENV,
        )
        return out.stdout.splitlines()

    def test_hundred_random_directories(self, tmp_path):
        rng = random.Random(314159)
        alphabet = string.ascii_lowercase[:6]
        extensions = [".fa", ".txt", ".sam"]
        for case in range(100):
            root = tmp_path / f"case{case}"
            root.mkdir()
            for _ in range(rng.randint(1, 7)):
                name = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 3)))
                (root / (name + rng.choice(extensions))).write_text("x")
            pattern = rng.choice(
                [
                    "*" + rng.choice(extensions),
                    rng.choice(alphabet) + "*",
                    "?" + rng.choice(extensions),
                    "[" + "".join(sorted(set(rng.choice(alphabet) for _ in range(2)))) + "]*",
                    "*",
                ]
            )
            expected = self.shell_glob(pattern, str(root))
            if expected == [pattern]:
                continue  # empty shell match: excluded by design
            assert envsource.expand_path_pattern(pattern, str(root)) == expected, (
                case,
                pattern,
            )


class TestCommandSplitSoundness:
    """Rejoining parse_command_literal output must still be valid shell."""

    LINES = [
        "cat output-with-vep-info.vcf | vcf-annotate -f nonSynonymousFilter.pl",
        "true",
        'echo "a|b" | wc -c',
        "a && b || c ; d",
        "grep -v '^#' file.conf | sort | uniq -c",
        "make -j4 && echo done || echo failed",
        "tar czf out.tgz dir ; ls -l",
    ]

    @pytest.mark.parametrize("line", LINES)
    def test_rejoined_text_passes_shell_syntax_check(self, line):
        result = microparse.parse_command_literal(line)
        assert result.consumed, result.error
        parts = []
        for el in result.replacement:
            if isinstance(el, ast.Command):
                parts.append(el.text.raw_text)
            else:
                parts.append(el.kind.value)
        rejoined = " ".join(parts)
        proc = subprocess.run(["sh", "-n", "-c", rejoined], capture_output=True, env=SH_ENV)
        assert proc.returncode == 0, (rejoined, proc.stderr)


class TestAlternationOnParserOutput:
    def test_corpus_execute_statements_satisfy_invariant(self):
        def walk(stmts):
            for stmt in stmts:
                if isinstance(stmt, ast.ExecuteCommand):
                    assert ast.alternation_ok(stmt.elements)
                elif isinstance(stmt, ast.StepBlock):
                    walk(stmt.body)
                elif isinstance(stmt, ast.If):
                    walk(stmt.then_body)
                    if stmt.else_body:
                        walk(stmt.else_body)

        for path in list(FIXTURES.glob("*.nyosh")) + list(CORPUS.glob("*.nyosh")):
            script = parse_fixture(path)
            for ep in script.entry_points:
                walk(ep.body)

    def test_random_wellformed_lines_satisfy_invariant(self):
        rng = random.Random(11)
        for _ in range(100):
            parts = ["cmd0"]
            for i in range(rng.randint(0, 4)):
                parts.append(rng.choice(["|", "&&", "||", ";"]))
                parts.append(f"cmd{i + 1}")
            stmt = parser.parse_execute_line("execute: " + " ".join(parts))
            assert isinstance(stmt, ast.ExecuteCommand)
            assert ast.alternation_ok(stmt.elements)

    def test_microparse_output_satisfies_invariant(self):
        result = microparse.parse_command_literal("a | b && c ; d")
        assert result.consumed
        assert ast.alternation_ok(result.replacement)


class TestRunnableCorpusSoundness:
    """Scripts that run end-to-end must carry zero error diagnostics."""

    def run_case(self, tmp_path, monkeypatch, fixture, args, host_env=None, setup=None):
        monkeypatch.chdir(tmp_path)
        if setup:
            setup(tmp_path)
        script = parse_fixture(fixture)
        diags = checker.check(
            script, checker.CheckConfig(process_env=dict(host_env or {"USER": "u"}))
        )
        errors = [d for d in diags if d.severity == checker.SEVERITY_ERROR]
        assert errors == [], (fixture.name, errors)
        env = dict(SH_ENV)
        env.update(host_env or {})
        return executor.interpret(
            script, args, host_env=env, config=executor.RunConfig(job_dir=str(tmp_path))
        )

    def test_fig4b(self, tmp_path, monkeypatch, capfd):
        status = self.run_case(
            tmp_path, monkeypatch, FIXTURES / "fig4b.nyosh", [], host_env={"USER": "u"}
        )
        capfd.readouterr()
        assert status == 0

    def test_steps(self, tmp_path, monkeypatch, capfd):
        status = self.run_case(tmp_path, monkeypatch, CORPUS / "steps.nyosh", [])
        capfd.readouterr()
        assert status == 0

    def test_fail_demo(self, tmp_path, monkeypatch, capfd):
        status = self.run_case(tmp_path, monkeypatch, CORPUS / "fail_demo.nyosh", [])
        capfd.readouterr()
        assert status == 7

    def test_ifelse(self, tmp_path, monkeypatch, capfd):
        status = self.run_case(tmp_path, monkeypatch, CORPUS / "ifelse.nyosh", [])
        out, _ = capfd.readouterr()
        assert status == 0 and out == "still two\n"

    def test_implicit(self, tmp_path, monkeypatch, capfd):
        status = self.run_case(tmp_path, monkeypatch, CORPUS / "implicit.nyosh", [])
        out, _ = capfd.readouterr()
        assert status == 0 and out == "Hello NYoSh workbench\n"

    def test_quotes(self, tmp_path, monkeypatch, capfd):
        status = self.run_case(tmp_path, monkeypatch, CORPUS / "quotes.nyosh", [])
        out, _ = capfd.readouterr()
        assert status == 0
        assert out == "4\nhello world\n"

    def test_background(self, tmp_path, monkeypatch, capfd):
        status = self.run_case(tmp_path, monkeypatch, CORPUS / "background.nyosh", [])
        out, _ = capfd.readouterr()
        assert status == 0 and out == "one\ntwo\n"

    def test_escapes(self, tmp_path, monkeypatch, capfd):
        status = self.run_case(tmp_path, monkeypatch, CORPUS / "escapes.nyosh", [])
        out, _ = capfd.readouterr()
        assert status == 0
        assert out == "cost is $5 and path \\ ok\n$HOME stays literal\n"

    def test_methods(self, tmp_path, monkeypatch, capfd):
        status = self.run_case(tmp_path, monkeypatch, CORPUS / "methods.nyosh", ["work", "a-b"])
        out, _ = capfd.readouterr()
        assert status == 0 and out == "a has 2 parts\n"

    def test_mapfile(self, tmp_path, monkeypatch, capfd):
        def setup(root):
            (root / "setup-env.map").write_text("JOB_TAG=tag-7\n")

        status = self.run_case(tmp_path, monkeypatch, CORPUS / "mapfile.nyosh", [], setup=setup)
        out, _ = capfd.readouterr()
        assert status == 0 and out == "JOB_TAG is tag-7\n"


class TestWrapperBehaviorFidelity:
    """The generated wrapper must behave like dispatch_entry for the same args."""

    def build(self, tmp_path, fixture):
        import dataclasses

        script = parse_fixture(fixture)
        header = dataclasses.replace(script.header, location=str(tmp_path / "loc"))
        script = dataclasses.replace(script, header=header)
        out_dir = tmp_path / "pkg"
        runner = f"{sys.executable} -m nyosh.cli"
        codegen.build_package(script, out_dir, runner_path=runner)
        return script, out_dir

    def invoke_wrapper(self, out_dir, function, args, job_dir):
        cli_env = {
            "PATH": os.environ.get("PATH", "/usr/bin:/bin"),
            "JOB_DIR": str(job_dir),
            "PYTHONPATH": os.pathsep.join(p for p in sys.path if p),
        }
        call = " ".join(["source ./script.sh &&", function, *args])
        return subprocess.run(
            ["bash", "-c", call], cwd=out_dir, env=cli_env, capture_output=True, text=True
        )

    def dispatch_directly(self, script, args, tmp_path, capfd):
        status = executor.dispatch_entry(
            script, args, config=executor.RunConfig(job_dir=str(tmp_path))
        )
        out, err = capfd.readouterr()
        return status, out, err

    def test_task_plugin_matches(self, tmp_path, capfd):
        script, out_dir = self.build(tmp_path, CORPUS / "task_plugin.nyosh")
        job_dir = out_dir
        wrapper = self.invoke_wrapper(out_dir, "plugin_task", [], job_dir)
        direct = self.dispatch_directly(script, ["plugin_task"], tmp_path, capfd)
        assert wrapper.returncode == direct[0] == 0
        assert wrapper.stdout == direct[1] == "task running\n"
        assert wrapper.stderr == direct[2] == ""

    def test_missing_argument_matches(self, tmp_path, capfd):
        fixture = tmp_path / "aligner.nyosh"
        fixture.write_text(
            "plugin system:\nid: WRAPPER_DEMO\nkind: ALIGNER\nlocation: /tmp/p\n\n"
            "!script WrapperDemo error management: GobyWebDefaultErrorManagement {\n"
            "  aligner entry point plugin_align( string output, string basename ) {\n"
            "    System.out.println(ran);\n"
            "  }\n}\n"
        )
        script, out_dir = self.build(tmp_path, fixture)
        wrapper = self.invoke_wrapper(out_dir, "plugin_align", ["only-one"], out_dir)
        direct_status = executor.dispatch_entry(
            script, ["plugin_align", "only-one"], config=executor.RunConfig(job_dir=str(tmp_path))
        )
        _out, direct_err = capfd.readouterr()
        assert wrapper.returncode == direct_status == 0
        assert wrapper.stderr == direct_err == "Invalid number of arguments\n"
