import json

import pytest

from fairrank.bm25 import build_index
from fairrank.corpus import AuthorRecord, PaperDoc
from fairrank.reranker import RankingContext
from fairrank.synthetic import make_corpus


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write((row if isinstance(row, str) else json.dumps(row)) + "\n")
    return path


@pytest.fixture
def jsonl(tmp_path):
    def _write(name, rows):
        return write_jsonl(tmp_path / name, rows)
    return _write


def make_context(docs, labels):
    """Context from ``{doc_id: text}`` plus ``{doc_id: [(gender, economy), ...]}``."""
    corpus, authors = {}, {}
    for doc_id, text in docs.items():
        ids = []
        for j, (g, e) in enumerate(labels.get(doc_id, [])):
            aid = f"{doc_id}_a{j}"
            authors[aid] = AuthorRecord(aid, name=aid, gender=g, economy=e)
            ids.append(aid)
        corpus[doc_id] = PaperDoc(doc_id, title=text, author_ids=tuple(ids))
    return RankingContext(build_index(corpus), corpus, authors)


@pytest.fixture(scope="session")
def synthetic():
    return make_corpus(n_docs=200, n_topics=10, seed=0)


@pytest.fixture(scope="session")
def synthetic_context(synthetic):
    return RankingContext(build_index(synthetic.corpus), synthetic.corpus, synthetic.authors)


# one summary line per acceptance criterion
_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        _acceptance[report.nodeid] = report.outcome
    elif "test_acceptance.py" in report.nodeid and report.failed:
        _acceptance[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, outcome in _acceptance.items():
        name = nodeid.split("::")[-1]
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
