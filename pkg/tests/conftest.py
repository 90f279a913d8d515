import functools
import pathlib
import re

import pytest

from depsess.program import check_program, load

CORPUS = pathlib.Path(__file__).resolve().parents[1] / "src" / "depsess" / "corpus"
PROGRAMS = ["equal", "counter", "array", "queue", "cloud"]
ALL_PROGRAMS = PROGRAMS + ["queue_branch"]
MUTANTS = sorted(p.name for p in (CORPUS / "negative").glob("*.sess"))


def corpus_file(name: str) -> pathlib.Path:
    return CORPUS / f"{name}.sess"


@functools.lru_cache(maxsize=None)
def checked(name: str):
    return check_program(load(str(corpus_file(name))))


def expected_rejection(path: pathlib.Path) -> tuple[str, str]:
    m = re.search(r"; expect: (\S+) (\S+)", path.read_text())
    assert m, f"{path.name} has no expect header"
    return m.group(1), m.group(2)


@pytest.fixture(params=ALL_PROGRAMS)
def program(request):
    return request.param, checked(request.param)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod and mod.LINES:
        terminalreporter.section("acceptance")
        for line in sorted(mod.LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
