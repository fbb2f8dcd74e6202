import textwrap
from pathlib import Path

import pytest

TOY_SCHEMA = """\
format: simmf-schema
version: 1
entity_types:
  - {name: U}
  - {name: M}
  - {name: G}
  - {name: T}
relations:
  - {name: gender, source: U, target: G, file: user_gender.tsv}
  - {name: genre, source: M, target: T, file: movie_genre.tsv}
rating: {name: rating, source: U, target: M, file: ratings.tsv, scale: [1, 5]}
"""


def write_toy(root: Path, ratings: str | None = None, gender: str | None = None, genre: str | None = None,
              schema: str = TOY_SCHEMA) -> Path:
    """3 users (u1..u3), 2 movies (m1, m2), 4 ratings."""
    root.mkdir(parents=True, exist_ok=True)
    (root / "schema.yaml").write_text(schema)
    files = {
        "ratings.tsv": ratings if ratings is not None else "# user movie rating\nu1\tm1\t4\nu1\tm2\t3\nu2\tm2\t5\nu3\tm1\t1\n",
        "user_gender.tsv": gender if gender is not None else "u1\tF\nu2\tM\nu3\tF\n",
        "movie_genre.tsv": genre if genre is not None else "m1\tDrama\nm1\tComedy\nm2\tDrama\n",
    }
    for name, text in files.items():
        if text is not False:
            (root / name).write_text(textwrap.dedent(text))
    return root


@pytest.fixture
def toy_dir(tmp_path):
    return write_toy(tmp_path / "toy")


# -- acceptance reporting --------------------------------------------------------
# Tests marked ``acceptance(n, title)`` get one PASS/FAIL line in the terminal summary.

_ACCEPTANCE: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.fixture
def detail(request):
    """Record a one-line measurement shown next to the criterion's verdict."""
    mark = request.node.get_closest_marker("acceptance")
    entry = _ACCEPTANCE.setdefault(mark.args[0], {"title": mark.args[1]})

    def note(text: str):
        entry["detail"] = text
        print(f"criterion {mark.args[0]}: {text}")

    return note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or (rep.when != "call" and not rep.failed):
        return
    entry = _ACCEPTANCE.setdefault(mark.args[0], {"title": mark.args[1]})
    entry["passed"] = rep.passed
    if rep.failed and "detail" not in entry:
        entry["detail"] = str(call.excinfo.value).splitlines()[0] if call.excinfo else "error"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        e = _ACCEPTANCE[n]
        verdict = "PASS" if e.get("passed") else "FAIL"
        line = f"[{verdict}] {n}. {e['title']}"
        if e.get("detail"):
            line += f" -- {e['detail']}"
        terminalreporter.write_line(line)
