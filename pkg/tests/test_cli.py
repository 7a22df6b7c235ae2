import csv
import json
import subprocess
import sys

import pytest

from conftest import write_jsonl
from fairrank.bm25 import build_index, rank_by_score
from fairrank.cli import main
from fairrank.corpus import load_authors, load_corpus, write_authors, write_corpus, write_queries
from fairrank.synthetic import make_corpus
from fairrank.textprep import tokenize


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    data = make_corpus(n_docs=60, n_topics=4, n_authors=80, unknown_rate=0.2, seed=1)
    paths = {"corpus": root / "corpus.jsonl", "authors": root / "authors.jsonl",
             "queries": root / "queries.jsonl"}
    write_corpus(data.corpus, paths["corpus"])
    write_authors(data.authors, paths["authors"])
    write_queries(data.queries, paths["queries"])
    return root, paths, data


def inputs(paths):
    return ["--corpus", str(paths["corpus"]), "--authors", str(paths["authors"]),
            "--queries", str(paths["queries"])]


def read_run(path):
    with open(path) as fh:
        return [json.loads(line) for line in fh]


def test_index_reports_documents(tmp_path, capsys):
    path = write_jsonl(tmp_path / "c.jsonl", [{"id": f"d{i}", "title": "paper title words"}
                                              for i in range(3)])
    assert main(["index", "--corpus", str(path), "--out", str(tmp_path / "i.jsonl")]) == 0
    first = capsys.readouterr().out
    assert "documents: 3" in first
    assert main(["index", "--corpus", str(path)]) == 0
    assert capsys.readouterr().out == first


def test_missing_file_is_input_error(tmp_path, capsys):
    missing = tmp_path / "nope.jsonl"
    assert main(["index", "--corpus", str(missing)]) == 3
    assert str(missing) in capsys.readouterr().err


def test_malformed_corpus_is_input_error(tmp_path, capsys):
    path = write_jsonl(tmp_path / "c.jsonl", [{"id": "a"}, "{oops"])
    assert main(["index", "--corpus", str(path)]) == 3
    assert "line 2" in capsys.readouterr().err


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as err:
        main(["rerank", "--weights", "0.5,0.5,0.5"])
    assert err.value.code == 2


def test_rerank_relevance_only_is_bm25_order(files, tmp_path):
    _, paths, data = files
    out = tmp_path / "run.jsonl"
    assert main(["rerank", *inputs(paths), "--weights", "1,0,0", "--out", str(out)]) == 0
    rows = read_run(out)
    assert [r["qid"] for r in rows] == [q.query_id for q in data.queries]
    index = build_index(data.corpus)
    for row, q in zip(rows, data.queries):
        assert set(row["ranking"]) <= set(q.doc_ids)
        expected = [d for d, _ in rank_by_score(index, tokenize(q.query_text), q.known_doc_ids)]
        assert row["ranking"] == expected
        assert row["weights"] == [1.0, 0.0, 0.0] and row["seed"] == 0


def test_retrieve_uses_top_k(files, tmp_path):
    _, paths, _ = files
    out = tmp_path / "run.jsonl"
    assert main(["retrieve", *inputs(paths), "--weights", "0.5,0.25,0.25", "--k", "7",
                 "--l", "5", "--out", str(out)]) == 0
    assert all(len(r["ranking"]) == 5 for r in read_run(out))


def test_rerank_replay_is_byte_identical(files, tmp_path):
    _, paths, _ = files
    outs = []
    for i, jobs in enumerate(("1", "1", "4")):
        out = tmp_path / f"run{i}.jsonl"
        assert main(["rerank", *inputs(paths), "--weights", "0.25,0.5,0.25", "--seed", "3",
                     "--jobs", jobs, "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_sweep_writes_all_rows(files, tmp_path):
    _, paths, _ = files
    out = tmp_path / "sweep.csv"
    assert main(["sweep", *inputs(paths), "--out", str(out)]) == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 17
    assert [r["label"] for r in rows[-2:]] == ["bm25", "random"]
    assert rows[0]["utility"] == rows[-2]["utility"]


def test_custom_grid_and_config(files, tmp_path):
    _, paths, _ = files
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"grid": "1,0,0;0,0.5,0.5", "depth": 5, "seed": 2}))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", *inputs(paths), "--config", str(config), "--out", str(a)]) == 0
    assert main(["sweep", *inputs(paths), "--grid", "1,0,0;0,0.5,0.5", "--depth", "5",
                 "--seed", "2", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 1 + 4


def test_config_weights_list_and_flag_override(files, tmp_path):
    _, paths, _ = files
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"weights": [0, 0.5, 0.5], "l": 3}))
    out = tmp_path / "run.jsonl"
    assert main(["rerank", *inputs(paths), "--config", str(config), "--l", "4",
                 "--out", str(out)]) == 0
    row = read_run(out)[0]
    assert row["weights"] == [0.0, 0.5, 0.5] and len(row["ranking"]) == 4


def test_bad_config_is_input_error(files, tmp_path):
    _, paths, _ = files
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"no_such_option": 1}))
    assert main(["rerank", *inputs(paths), "--config", str(config)]) == 3
    config.write_text(json.dumps({"weights": "1,1,1"}))
    assert main(["rerank", *inputs(paths), "--config", str(config)]) == 3


def test_eval_round_trip(files, tmp_path):
    _, paths, data = files
    run, out = tmp_path / "run.jsonl", tmp_path / "eval.csv"
    assert main(["rerank", *inputs(paths), "--out", str(run)]) == 0
    assert main(["eval", *inputs(paths), "--run", str(run), "--out", str(out)]) == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert [r["qid"] for r in rows] == [q.query_id for q in data.queries]
    assert all(0.0 <= float(r["utility"]) <= 1.0 for r in rows)


def test_total_failure_is_runtime_error(files, tmp_path):
    _, paths, _ = files
    queries = write_jsonl(tmp_path / "q.jsonl",
                          [{"qid": "x", "query": "anything", "documents": [{"doc_id": "ghost"}]}])
    assert main(["rerank", "--corpus", str(paths["corpus"]), "--authors", str(paths["authors"]),
                 "--queries", str(queries), "--out", str(tmp_path / "r.jsonl")]) == 4


def test_infer_groups(tmp_path, capsys):
    rows = [{"corpus_author_id": str(i), "name": n}
            for i, n in enumerate(["John Smith", "Maria Lopez", "Zzyzx Q", "Anna B"])]
    authors = write_jsonl(tmp_path / "a.jsonl", rows)
    contacts = write_jsonl(tmp_path / "c.jsonl", [{"author_id": "0", "email": "j@ox.ac.uk"},
                                                  {"author_id": "1",
                                                   "affiliation": "University of Toronto"}])
    outs = []
    for i in range(2):
        out = tmp_path / f"out{i}.jsonl"
        assert main(["infer-groups", "--authors", str(authors), "--contacts", str(contacts),
                     "--seed", "5", "--out", str(out)]) == 0
        outs.append((out.read_bytes(), (tmp_path / f"out{i}.jsonl.coverage.csv").read_bytes()))
    assert outs[0] == outs[1]
    with open(tmp_path / "out0.jsonl.coverage.csv") as fh:
        cov = {(r["variable"], r["value"]): int(r["count"]) for r in csv.DictReader(fh)}
    assert cov[("gender", "Unknown")] == 1
    assert cov[("country", "Advanced")] == 2 and cov[("country", "Unknown")] == 2
    imputed = load_authors(tmp_path / "out0.jsonl")
    assert imputed["0"].economy == "Advanced" and imputed["1"].gender == "Female"
    assert all(a.gender != "Unknown" and a.economy != "Unknown" for a in imputed.values())
    assert "gender" in capsys.readouterr().out


def test_infer_groups_table_one_fractions(tmp_path, capsys):
    labels = ["Male"] * 18810 + ["Female"] * 6235 + ["Unknown"] * 6930
    authors = {str(i): g for i, g in enumerate(labels)}
    rows = [{"corpus_author_id": k, "name": "", "gender": g, "economy": "Advanced"}
            for k, g in authors.items()]
    path = write_jsonl(tmp_path / "a.jsonl", rows)
    assert main(["infer-groups", "--authors", str(path), "--out", str(tmp_path / "o.jsonl"),
                 "--coverage", str(tmp_path / "cov.csv")]) == 0
    with open(tmp_path / "cov.csv") as fh:
        frac = {r["value"]: float(r["fraction"]) for r in csv.DictReader(fh)
                if r["variable"] == "gender"}
    assert frac["Male"] == pytest.approx(0.588, abs=5e-4)
    assert frac["Female"] == pytest.approx(0.195, abs=5e-4)
    assert frac["Unknown"] == pytest.approx(0.217, abs=5e-4)


def test_module_entry_point(files, tmp_path):
    _, paths, _ = files
    proc = subprocess.run([sys.executable, "-m", "fairrank", "index", "--corpus",
                           str(paths["corpus"])], capture_output=True, text=True)
    assert proc.returncode == 0 and "documents: 60" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "fairrank", "sweep", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "default: 0.5" in proc.stdout


def test_loaded_fixture_matches(files):
    _, paths, data = files
    assert load_corpus(paths["corpus"]) == data.corpus
