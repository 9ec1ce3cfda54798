import random
import re
import string

import pytest

from conftest import CORPUS, FIXTURES, parse_fixture

from nyosh import ast, parser


class TestHeader:
    def test_fig8_header_fields(self, fig8_script):
        header = fig8_script.header
        assert header.id == "BWA_GOBY_ARTIFACT_NYOSH"
        assert header.kind == "ALIGNER"
        assert header.location == "/tmp/gobyweb2-plugins"

    def test_header_only_script(self):
        text = "plugin system:\nid: X1\nkind: ALIGNER\nlocation: /p\n"
        script = parser.parse_script(text, "h.nyosh")
        assert isinstance(script, ast.Script)
        assert script.header.id == "X1"
        assert script.entry_points == ()

    def test_bad_kind_is_error(self):
        text = "plugin system:\nid: X\nkind: NOPE\nlocation: /p\n"
        errors = parser.parse_script(text, "h.nyosh")
        assert isinstance(errors, list) and errors


class TestStatements:
    def test_string_decl(self):
        script = parser.parse_script('string name = "NYoSh workbench";\n', "d.nyosh")
        (entry,) = script.entry_points
        (decl,) = entry.body
        assert decl == ast.VarDecl("name", "string", ast.StringLiteral("NYoSh workbench"))

    def test_empty_input(self):
        script = parser.parse_script("", "e.nyosh")
        assert script.entry_points == ()
        assert script.header is None

    def test_statement_errors_have_locations(self):
        errors = parser.parse_script("!script X {\n  entry point main( ) {\n    ???\n  }\n}\n", "x.nyosh")
        assert isinstance(errors, list)
        assert all(e.location.line >= 1 for e in errors)

    def test_unterminated_block(self):
        errors = parser.parse_script("!script X {\n  entry point main( ) {\n", "x.nyosh")
        assert isinstance(errors, list)
        assert any("unterminated" in e.message for e in errors)

    def test_one_statement_per_line_rejected(self):
        errors = parser.parse_script('int a = 1; int b = 2;\n', "x.nyosh")
        assert isinstance(errors, list)

    def test_nested_reference_rejected(self):
        errors = parser.parse_script("System.out.println(${a${b}});\n", "x.nyosh")
        assert isinstance(errors, list)


class TestExecuteLine:
    def test_fig6_pipeline(self):
        text = (
            "execute: ${RESOURCES_SAMTOOLS_EXEC_PATH} view -Sbu ${samInputFile} | "
            "${RESOURCES_SAMTOOLS_EXEC_PATH} sort -o - output | "
            "${RESOURCES_SAMTOOLS_EXEC_PATH} calmd - ${JOB_DIR}/*.fa redirect to file md-alignment.sam"
        )
        result = parser.parse_execute_line(text)
        kinds = [type(e).__name__ for e in result.elements]
        assert kinds == ["Command", "Operator", "Command", "Operator", "Command", "RedirectToFile"]
        redirect = result.elements[-1]
        assert redirect.target.components == (ast.Literal("md-alignment.sam"),)

    def test_single_command(self):
        result = parser.parse_execute_line("execute: true")
        assert [type(e).__name__ for e in result.elements] == ["Command"]

    def test_operator_mix_against_token_oracle(self):
        # independent oracle: split on operator tokens with a regex
        line = "a && b || c ; d"
        oracle_ops = re.findall(r"\|\||&&|[|;&]", line)
        result = parser.parse_execute_line("execute: " + line)
        ops = [e.kind.value for e in result.elements if isinstance(e, ast.Operator)]
        assert ops == oracle_ops == ["&&", "||", ";"]
        cmds = [e for e in result.elements if isinstance(e, ast.Command)]
        assert len(cmds) == 4

    def test_quoted_operator_protected(self):
        result = parser.parse_execute_line('execute: echo "a|b" | wc -c')
        cmds = [e for e in result.elements if isinstance(e, ast.Command)]
        ops = [e for e in result.elements if isinstance(e, ast.Operator)]
        assert len(cmds) == 2 and len(ops) == 1

    def test_placement_left_to_checker(self):
        result = parser.parse_execute_line("execute: a | | b")
        assert isinstance(result, ast.ExecuteCommand)
        kinds = [type(e).__name__ for e in result.elements]
        assert kinds == ["Command", "Operator", "Operator", "Command"]

    def test_empty_execute_is_error(self):
        result = parser.parse_execute_line("execute: ")
        assert isinstance(result, parser.ParseError)

    def test_unterminated_quote_is_error(self):
        result = parser.parse_execute_line("execute: echo 'oops")
        assert isinstance(result, parser.ParseError)

    def test_fetch_and_push(self):
        result = parser.parse_execute_line("execute: fetch READS | push ALIGNMENT")
        assert isinstance(result.elements[0], ast.FetchCommand)
        assert result.elements[0].slot == "READS"
        assert isinstance(result.elements[2], ast.PushCommand)


def iter_corpus_paths():
    return sorted(FIXTURES.glob("*.nyosh")) + sorted(CORPUS.glob("*.nyosh"))


class TestRoundTrip:
    @pytest.mark.parametrize("path", iter_corpus_paths(), ids=lambda p: p.name)
    def test_parse_pretty_parse_is_identity(self, path):
        script = parse_fixture(path)
        text = ast.pretty_print(script)
        again = parser.parse_script(text, str(path))
        assert not isinstance(again, list), again
        assert again == script

    def test_fig8_matches_golden(self, fig8_script):
        golden = (FIXTURES / "fig8_golden.nyosh").read_text()
        assert ast.pretty_print(fig8_script) == golden
        assert parser.parse_script(golden, "golden") == fig8_script


class TestLocations:
    def test_statement_lines_increase(self, fig8_script):
        lines = []

        def collect(stmts):
            for s in stmts:
                lines.append(s.loc.line)
                if isinstance(s, ast.StepBlock):
                    collect(s.body)
                elif isinstance(s, ast.If):
                    collect(s.then_body)
                    if s.else_body:
                        collect(s.else_body)

        for ep in fig8_script.entry_points:
            collect(ep.body)
        assert lines == sorted(lines)
        assert all(loc >= 1 for loc in lines)


class TestFuzzTotality:
    def test_random_text_never_raises(self):
        rng = random.Random(2024)
        pool = string.ascii_letters + string.digits + " \n{}()$;|&\"'=.,:![]\\-_"
        for _ in range(300):
            text = "".join(rng.choice(pool) for _ in range(rng.randint(0, 120)))
            result = parser.parse_script(text, "fuzz.nyosh")
            assert isinstance(result, (ast.Script, list))
            if isinstance(result, list):
                assert result, "error list must be non-empty"
                assert all(isinstance(e, parser.ParseError) for e in result)

    def test_accepted_fuzz_scripts_round_trip(self):
        rng = random.Random(777)
        pool = "{}$();|&\"'\\= \n\tabcXYZ01:![]*?.,execute:stringiffailstep"
        accepted = 0
        for _ in range(2000):
            text = "".join(rng.choice(pool) for _ in range(rng.randint(0, 160)))
            result = parser.parse_script(text, "fuzz.nyosh")
            if isinstance(result, ast.Script):
                accepted += 1
                again = parser.parse_script(ast.pretty_print(result), "fuzz.nyosh")
                assert again == result, repr(text)
        assert accepted >= 10  # the pool is chosen to accept a fair share
