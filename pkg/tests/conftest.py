import os
from pathlib import Path

import pytest

from nyosh import checker, envsource, parser

FIXTURES = Path(__file__).parent / "fixtures"
CORPUS = FIXTURES / "corpus"

# Platform values the GobyWeb system would inject for the aligner fixture.
RUNTIME_VALUES = {
    "COLOR_SPACE": "false",
    "ORGANISM": "homo_sapiens",
    "GENOME_REFERENCE_ID": "HG19.44",
    "READS_FILE": "/data/reads/sample.compact-reads",
    "READS_PLATFORM": "Illumina",
    "INPUT_READ_LENGTH": "100",
    "START_POSITION": "0",
    "END_POSITION": "100",
}

BASE_PROCESS_ENV = {
    "PATH": os.environ.get("PATH", "/usr/bin:/bin"),
    "HOME": os.environ.get("HOME", "/root"),
    "USER": "testuser",
}


def parse_fixture(path):
    result = parser.parse_script_file(path)
    assert not isinstance(result, list), f"fixture {path} failed to parse: {result}"
    return result


@pytest.fixture
def fig8_script():
    return parse_fixture(FIXTURES / "fig8.nyosh")


@pytest.fixture
def plugin_source():
    return envsource.PluginConfig(str(FIXTURES / "plugin"), dict(RUNTIME_VALUES))


@pytest.fixture
def fig8_check_config(plugin_source):
    return checker.CheckConfig(plugin_config=plugin_source, process_env=dict(BASE_PROCESS_ENV))
