import csv

import pytest

from attitude.sentiment import load_lexicon

ACCEPTANCE_LINES: list[str] = []

LEXICON_TSV = """\
# test lexicon
good\t0.8
great\t1.0
bad\t-0.6
awful\t-1.0
ban\t-0.3
not\t0\tNEG
never\t0\tNEG
"""


@pytest.fixture
def lexicon_path(tmp_path):
    p = tmp_path / "lex.tsv"
    p.write_text(LEXICON_TSV, encoding="utf-8")
    return p


@pytest.fixture
def lexicon(lexicon_path):
    return load_lexicon(lexicon_path)


@pytest.fixture
def write_corpus(tmp_path):
    """Write rows (datetime, topic, post, comment, pos, neg) to a corpus CSV."""

    def _write(rows, name="corpus.csv", header=("Datetime", "Topic", "Post", "Comment", "Positive", "Negative")):
        path = tmp_path / name
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
        return path

    return _write


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
