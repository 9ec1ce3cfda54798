import os
import subprocess

import pytest

from nyosh import ast, envsource
from nyosh.envsource import (
    UNAVAILABLE,
    EnvironmentLoadError,
    MapFile,
    PatternError,
    PluginConfig,
    ProcessEnv,
    ResolutionError,
    RuntimeEnvironment,
    ScriptVariable,
    eval_gstring,
    expand_path_pattern,
    list_design_time_names,
    parse_at_run_time,
    parse_map_text,
    resolve,
)

from conftest import FIXTURES


def shell_source_env(path):
    """Oracle: source a map file in the POSIX shell and report the variables
    it introduced."""
    probe = subprocess.run(
        ["sh", "-c", f'set -a; . "{path}"; env'],
        capture_output=True,
        text=True,
        env={"PATH": os.environ.get("PATH", "/usr/bin:/bin")},
        check=True,
    )
    baseline = subprocess.run(
        ["sh", "-c", "env"],
        capture_output=True,
        text=True,
        env={"PATH": os.environ.get("PATH", "/usr/bin:/bin")},
        check=True,
    )
    before = dict(line.split("=", 1) for line in baseline.stdout.splitlines() if "=" in line)
    after = dict(line.split("=", 1) for line in probe.stdout.splitlines() if "=" in line)
    return {k: v for k, v in after.items() if before.get(k) != v}


class TestMapFiles:
    def test_export_line_matches_shell_oracle(self, tmp_path):
        path = tmp_path / "setup.sh"
        path.write_text("export JOB_DIR=/tmp/j\n")
        variables = envsource.parse_map_file(str(path))
        assert variables == (ScriptVariable("JOB_DIR", "/tmp/j"),)
        assert shell_source_env(path) == {"JOB_DIR": "/tmp/j"}

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.map"
        path.write_text("")
        assert envsource.parse_map_file(str(path)) == ()

    def test_comments_blanks_and_quotes(self):
        text = "# comment\n\nA=1\nexport B='two words'\nC=\"x\"\n"
        variables = parse_map_text(text)
        assert variables == (
            ScriptVariable("A", "1"),
            ScriptVariable("B", "two words"),
            ScriptVariable("C", "x"),
        )

    def test_later_line_wins(self):
        variables = parse_map_text("K=a\nK=b\n")
        assert variables == (ScriptVariable("K", "b"),)

    def test_malformed_line_reports_line_number(self):
        with pytest.raises(EnvironmentLoadError) as exc:
            parse_map_text("A=1\nnot a line\n")
        assert exc.value.line == 2

    def test_missing_file(self):
        with pytest.raises(EnvironmentLoadError) as exc:
            envsource.parse_map_file("/nonexistent-nyosh/setup.sh")
        assert exc.value.path

    def test_sorted_and_unique(self, tmp_path):
        path = tmp_path / "m.map"
        path.write_text("B=2\nA=1\nC=3\n")
        names = [v.name for v in envsource.parse_map_file(str(path))]
        assert names == sorted(names) == ["A", "B", "C"]


class TestProcessEnv:
    def test_harness_env_exact(self):
        variables = parse_at_run_time(ProcessEnv({"A": "1"}))
        assert variables == (ScriptVariable("A", "1"),)

    def test_host_env_superset(self, monkeypatch):
        monkeypatch.setenv("NYOSH_MARKER_XYZ", "42")
        names = {v.name for v in parse_at_run_time(ProcessEnv())}
        assert "NYOSH_MARKER_XYZ" in names
        assert names.issuperset({"NYOSH_MARKER_XYZ"})


class TestPluginConfig:
    def test_option_naming_convention(self):
        spec = PluginConfig(str(FIXTURES / "plugin"))
        names = list_design_time_names(spec)
        assert "PLUGINS_ALIGNER_BWA_GOBY_ARTIFACT_NYOSH_SAMPE_SAMSE_OPTIONS" in names
        assert "PLUGINS_ALIGNER_BWA_GOBY_ARTIFACT_NYOSH_ALL_OTHER_OPTIONS" in names

    def test_resource_naming_convention(self):
        spec = PluginConfig(str(FIXTURES / "plugin"))
        variables = dict(
            (v.name, v.value) for v in parse_at_run_time(spec)
        )
        assert variables["RESOURCES_ARTIFACTS_BWA_WITH_GOBY_ARTIFACT_EXECUTABLE"] == "/opt/bwa-goby"

    def test_runtime_values_overlay(self):
        spec = PluginConfig(str(FIXTURES / "plugin"), {"COLOR_SPACE": "true"})
        variables = {v.name: v.value for v in parse_at_run_time(spec)}
        assert variables["COLOR_SPACE"] == "true"

    def test_slots_listed_at_design_time(self):
        spec = PluginConfig(str(FIXTURES / "plugin"))
        names = list_design_time_names(spec)
        assert "READS" in names and "ALIGNMENT" in names


class TestDesignTimeNames:
    def test_mapfile_literal_path(self, tmp_path):
        path = tmp_path / "s.map"
        path.write_text("X=1\n")
        assert list_design_time_names(MapFile(str(path))) == ["X"]

    def test_mapfile_runtime_path_unavailable(self):
        path = ast.GString((ast.EnvVarReader("X"), ast.Literal("/setup.sh")))
        assert list_design_time_names(MapFile(path)) is UNAVAILABLE

    def test_design_matches_runtime_for_static_sources(self, tmp_path):
        path = tmp_path / "s.map"
        path.write_text("B=2\nA=1\n")
        for spec in (ProcessEnv({"H": "1"}), MapFile(str(path))):
            design = list_design_time_names(spec)
            runtime = [v.name for v in parse_at_run_time(spec)]
            assert design == runtime


class TestResolution:
    def test_lexical_beats_environment(self, tmp_path):
        path = tmp_path / "m.map"
        path.write_text("name=from-env\n")
        env = RuntimeEnvironment({})
        env.load(MapFile(str(path)))
        assert resolve("name", {"name": "lexical"}, env) == "lexical"

    def test_later_layer_wins(self, tmp_path):
        first = tmp_path / "first.map"
        second = tmp_path / "second.map"
        first.write_text("KEY=one\n")
        second.write_text("KEY=two\n")
        env = RuntimeEnvironment({})
        env.load(MapFile(str(first)))
        env.load(MapFile(str(second)))
        assert resolve("KEY", {}, env) == "two"

    def test_unbound_name_errors(self):
        with pytest.raises(ResolutionError):
            resolve("NOPE", {}, RuntimeEnvironment({}))

    def test_mapfile_names_are_exported(self, tmp_path):
        path = tmp_path / "m.map"
        path.write_text("K=v\n")
        env = RuntimeEnvironment({})
        env.load(MapFile(str(path)))
        assert env.exported == {"K"}
        assert env.exported_values() == {"K": "v"}

    def test_process_env_not_exported(self):
        env = RuntimeEnvironment({"H": "1"})
        env.load(ProcessEnv())
        assert env.exported == set()


class TestGStringEvaluation:
    def test_lazy_reevaluation(self):
        scope = {"b": "1"}
        g = ast.GString((ast.VarReference("b"),))
        assert eval_gstring(g, scope, None) == "1"
        scope["b"] = "2"
        assert eval_gstring(g, scope, None) == "2"

    def test_empty_literal_only(self):
        assert eval_gstring(ast.GString((ast.Literal(""),)), {}, None) == ""

    def test_nested_gstring_value(self):
        inner = ast.GString((ast.Literal("deep "), ast.VarReference("x")))
        scope = {"x": "end", "mid": inner}
        outer = ast.GString((ast.Literal("via "), ast.VarReference("mid")))
        assert eval_gstring(outer, scope, None) == "via deep end"

    def test_circular_reference_detected(self):
        scope = {
            "a": ast.GString((ast.VarReference("b"),)),
            "b": ast.GString((ast.VarReference("a"),)),
        }
        with pytest.raises(ResolutionError):
            eval_gstring(ast.GString((ast.VarReference("a"),)), scope, None)

    def test_staged_raw_text_rejected(self):
        with pytest.raises(ResolutionError):
            eval_gstring(ast.GString(raw_text="pending"), {}, None)

    def test_int_and_bool_values_stringify(self):
        g = ast.GString((ast.VarReference("n"), ast.Literal(" "), ast.VarReference("f")))
        assert eval_gstring(g, {"n": 4, "f": False}, None) == "4 false"


def shell_glob(pattern, cwd):
    out = subprocess.run(
        ["sh", "-c", f'for f in {pattern}; do printf "%s\\n" "$f"; done'],
        capture_output=True,
        text=True,
        cwd=cwd,
        env={"PATH": os.environ.get("PATH", "/usr/bin:/bin"), "LC_ALL": "C"},
    )
    return out.stdout.splitlines()


class TestPathPatterns:
    def make_tree(self, tmp_path):
        for name in ("a.fa", "b.fa", "c.txt", ".hidden.fa"):
            (tmp_path / name).write_text("x")
        (tmp_path / "sub").mkdir()
        (tmp_path / "sub" / "d.fa").write_text("x")
        return tmp_path

    def test_star_matches_shell(self, tmp_path):
        root = self.make_tree(tmp_path)
        mine = expand_path_pattern("*.fa", str(root))
        assert mine == ["a.fa", "b.fa"]
        assert mine == shell_glob("*.fa", str(root))

    def test_question_and_class(self, tmp_path):
        root = self.make_tree(tmp_path)
        assert expand_path_pattern("?.fa", str(root)) == shell_glob("?.fa", str(root))
        assert expand_path_pattern("[ab].fa", str(root)) == shell_glob("[ab].fa", str(root))

    def test_directory_pattern(self, tmp_path):
        root = self.make_tree(tmp_path)
        assert expand_path_pattern("sub/*.fa", str(root)) == ["sub/d.fa"]

    def test_absolute_pattern(self, tmp_path):
        root = self.make_tree(tmp_path)
        expected = [str(root / "a.fa"), str(root / "b.fa")]
        assert expand_path_pattern(str(root) + "/*.fa") == expected

    def test_no_metachar_existing_file(self, tmp_path):
        root = self.make_tree(tmp_path)
        assert expand_path_pattern("a.fa", str(root)) == ["a.fa"]

    def test_empty_match_is_empty_list(self, tmp_path):
        assert expand_path_pattern("*.nope", str(tmp_path)) == []

    def test_regex_form(self, tmp_path):
        root = self.make_tree(tmp_path)
        assert expand_path_pattern(r"re:[ab]\.fa", str(root)) == ["a.fa", "b.fa"]

    def test_invalid_regex(self, tmp_path):
        with pytest.raises(PatternError):
            expand_path_pattern("re:[broken", str(tmp_path))

    def test_hidden_entries_need_explicit_dot(self, tmp_path):
        root = self.make_tree(tmp_path)
        assert ".hidden.fa" not in expand_path_pattern("*.fa", str(root))
        assert expand_path_pattern(".*.fa", str(root)) == [".hidden.fa"]
