"""Command-line entry point: ``fairrank <command> [options]``.

Exit codes: 0 success, 2 bad usage, 3 invalid input (missing/malformed
files, bad weights), 4 runtime failure (no query could be processed).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import attribution, bm25, corpus, evaluation, groups, reranker

EXIT_OK = 0
EXIT_INPUT = 3
EXIT_RUNTIME = 4

log = logging.getLogger("fairrank")


class InputError(Exception):
    """Raised for problems with the command's inputs (maps to exit code 3)."""


class RuntimeFailure(Exception):
    """Raised when a command produced nothing usable (maps to exit code 4)."""


def _weights(text):
    try:
        return reranker.WeightVector.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _seed(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"seed must be nonnegative, got {text}")
    return value


def _gamma(text):
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"gamma must lie in (0, 1), got {text}")
    return value


def _add_inputs(p, *, queries=True):
    p.add_argument("--corpus", required=True, help="corpus.jsonl")
    p.add_argument("--authors", required=True,
                   help="authors.jsonl; remaining Unknown labels are imputed with --seed")
    if queries:
        p.add_argument("--queries", required=True, help="queries.jsonl")
    p.add_argument("--index", help="saved index from `fairrank index`; built in memory when omitted")


def _add_ranking(p, task_flag=True):
    if task_flag:
        p.add_argument("--task", choices=("rerank", "retrieve"), default="rerank",
                       help="candidate pool: the query's own list, or top-k of the corpus")
    p.add_argument("--k", type=_positive_int, default=reranker.DEFAULT_K,
                   help="pool size for retrieval")
    p.add_argument("--l", type=_positive_int, default=None,
                   help="ranking length; None means the whole pool")
    p.add_argument("--jobs", type=_positive_int, default=1, help="worker threads across queries")


def _add_common(p):
    p.add_argument("--seed", type=_seed, default=0, help="seed for imputation and baselines")
    p.add_argument("--out", help="output path; stdout when omitted")
    p.add_argument("--config", help="JSON file of option defaults; explicit flags win")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="fairrank", formatter_class=fmt,
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    parser.subcommands = sub.choices

    p = sub.add_parser("index", formatter_class=fmt, help="build and save a BM25 index")
    p.add_argument("--corpus", required=True, help="corpus.jsonl")
    _add_common(p)

    p = sub.add_parser("infer-groups", formatter_class=fmt,
                       help="attribute gender/economy labels, then impute the rest")
    p.add_argument("--authors", required=True, help="authors.jsonl")
    p.add_argument("--name-table", help="name_gender.tsv; the bundled demo table when omitted")
    p.add_argument("--geo-tables", help="geo_tables.json; the bundled tables when omitted")
    p.add_argument("--contacts", help="contacts.jsonl with email/affiliation per author")
    p.add_argument("--coverage", help="coverage CSV path; <out>.coverage.csv when omitted")
    _add_common(p)

    for name, task, text in (("retrieve", "retrieve", "rank the whole corpus per query"),
                             ("rerank", "rerank", "re-rank each query's candidate list")):
        p = sub.add_parser(name, formatter_class=fmt, help=text)
        _add_inputs(p)
        p.add_argument("--weights", type=_weights, default="1,0,0",
                       help="w_r,w_g,w_c (nonnegative, summing to 1)")
        _add_ranking(p, task_flag=False)
        p.set_defaults(task=task)
        _add_common(p)

    p = sub.add_parser("sweep", formatter_class=fmt,
                       help="utility/unfairness over a weight grid plus baselines")
    _add_inputs(p)
    p.add_argument("--grid", help="weight vectors 'r,g,c;r,g,c;...'; the simplex lattice when omitted")
    p.add_argument("--grid-step", type=float, default=0.25, help="lattice step for the default grid")
    p.add_argument("--depth", type=_positive_int, default=evaluation.DEFAULT_DEPTH,
                   help="NDCG cutoff")
    p.add_argument("--gamma", type=_gamma, default=evaluation.DEFAULT_GAMMA,
                   help="position exposure decay for unfairness")
    _add_ranking(p)
    _add_common(p)

    p = sub.add_parser("eval", formatter_class=fmt, help="per-query metrics for a run file")
    _add_inputs(p)
    p.add_argument("--run", required=True, help="run.jsonl to evaluate")
    p.add_argument("--depth", type=_positive_int, default=evaluation.DEFAULT_DEPTH,
                   help="NDCG cutoff")
    p.add_argument("--gamma", type=_gamma, default=evaluation.DEFAULT_GAMMA,
                   help="position exposure decay for unfairness")
    _add_ranking(p)
    _add_common(p)
    return parser


def _parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                overrides = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from None
        sub = parser.subcommands[args.command]
        known = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, value in overrides.items():
            dest = key.replace("-", "_")
            if dest not in known:
                raise InputError(f"{args.config}: unknown option {key!r}")
            action = known[dest]
            if isinstance(value, list):
                value = ",".join(str(v) for v in value)
            try:
                defaults[dest] = action.type(str(value)) if action.type else value
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise InputError(f"{args.config}: {key}: {exc}") from None
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _check_paths(args, names):
    for name in names:
        path = getattr(args, name, None)
        if path is not None and not os.path.exists(path):
            raise InputError(f"--{name.replace('_', '-')}: no such file: {path}")


def _open_out(args):
    if args.out:
        return open(args.out, "w", encoding="utf-8", newline="")
    return _Stdout()


class _Stdout:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        sys.stdout.flush()


def _context(args):
    _check_paths(args, ["corpus", "authors", "queries", "index", "run"])
    docs = corpus.load_corpus(args.corpus)
    authors = corpus.load_authors(args.authors)
    if groups.needs_imputation(authors):
        log.info("imputing Unknown author labels with seed %d", args.seed)
        authors = groups.impute(authors, groups.ImputationPolicy(args.seed))
    if args.index:
        index = bm25.load_index(args.index)
        missing = set(docs) ^ set(index.doc_len)
        if missing:
            raise InputError(f"index {args.index} does not match corpus {args.corpus}")
    else:
        index = bm25.build_index(docs)
    context = reranker.RankingContext(index, docs, authors)
    queries = corpus.load_queries(args.queries, docs) if getattr(args, "queries", None) else []
    return context, queries


def cmd_index(args) -> int:
    _check_paths(args, ["corpus"])
    index = bm25.build_index(corpus.load_corpus(args.corpus))
    if args.out:
        bm25.save_index(index, args.out)
    summary = bm25.index_summary(index)
    print(f"documents: {summary['documents']}")
    print(f"terms: {summary['terms']}")
    print(f"avg_doc_len: {summary['avg_doc_len']!r}")
    return EXIT_OK


def cmd_infer_groups(args) -> int:
    _check_paths(args, ["authors", "name_table", "geo_tables", "contacts"])
    if not args.out:
        raise InputError("infer-groups needs --out for the attributed author table")
    authors = corpus.load_authors(args.authors)
    names = attribution.load_name_table(args.name_table)
    geo = attribution.load_geo_tables(args.geo_tables)
    contacts = attribution.load_contacts(args.contacts) if args.contacts else {}
    attributed, report = attribution.attribute_all(authors, names, geo, contacts)
    for aid, message in report.failures:
        log.warning("author %s: %s", aid, message)
    coverage = args.coverage or args.out + ".coverage.csv"
    report.write_csv(coverage)
    try:
        imputed = groups.impute(attributed, groups.ImputationPolicy(args.seed))
    except ValueError as exc:
        raise InputError(str(exc)) from None
    corpus.write_authors(imputed, args.out)
    for variable, value, count, fraction in report.rows():
        print(f"{variable}\t{value}\t{count}\t{fraction:.3f}")
    return EXIT_OK


def _map_queries(fn, queries, jobs):
    def guarded(q):
        try:
            return fn(q)
        except (ValueError, KeyError) as exc:
            return exc
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(guarded, queries))
    return [guarded(q) for q in queries]


def cmd_rank(args) -> int:
    context, queries = _context(args)
    outcomes = _map_queries(
        lambda q: reranker.run_query(q, context, args.weights, task=args.task, k=args.k, l=args.l,
                                     seed=args.seed),
        queries, args.jobs)
    ok = 0
    with _open_out(args) as fh:
        for q, out in zip(queries, outcomes):
            if isinstance(out, Exception):
                log.warning("skipped query %s: %s", q.query_id, out)
                continue
            fh.write(json.dumps(out.to_json_obj(), ensure_ascii=False) + "\n")
            ok += 1
    if queries and ok == 0:
        raise RuntimeFailure("every query failed")
    return EXIT_OK


def _grid(args):
    if args.grid:
        try:
            return [reranker.WeightVector.parse(part) for part in args.grid.split(";") if part]
        except ValueError as exc:
            raise InputError(f"--grid: {exc}") from None
    try:
        return reranker.simplex_grid(args.grid_step)
    except ValueError as exc:
        raise InputError(f"--grid-step: {exc}") from None


def cmd_sweep(args) -> int:
    grid = _grid(args)
    context, queries = _context(args)
    result = evaluation.sweep(grid, queries, context, depth=args.depth, gamma=args.gamma,
                              seed=args.seed, task=args.task, k=args.k, l=args.l, jobs=args.jobs)
    for qid, reason in result.skipped:
        log.warning("skipped query %s: %s", qid, reason)
    with _open_out(args) as fh:
        evaluation.write_sweep_csv(result.points, fh)
    if queries and not result.points[0].n_queries:
        raise RuntimeFailure("no query could be evaluated")
    return EXIT_OK


def _load_run(path):
    rankings = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                rankings[str(obj["qid"])] = [str(d) for d in obj["ranking"]]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise InputError(f"{path}:{lineno}: bad run line ({exc})") from None
    return rankings


def cmd_eval(args) -> int:
    context, queries = _context(args)
    rankings = _load_run(args.run)
    rows = evaluation.evaluate_rankings(rankings, queries, context, depth=args.depth,
                                        gamma=args.gamma, task=args.task, k=args.k)
    with _open_out(args) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["qid", "utility", "unfairness_gender", "unfairness_country"])
        for row in rows:
            writer.writerow([row["qid"], *("" if row[c] is None else repr(row[c])
                                           for c in ("utility", "unfairness_gender",
                                                     "unfairness_country"))])
    if rankings and not rows:
        raise RuntimeFailure("no run entry matched a query")
    return EXIT_OK


COMMANDS = {
    "index": cmd_index,
    "infer-groups": cmd_infer_groups,
    "retrieve": cmd_rank,
    "rerank": cmd_rank,
    "sweep": cmd_sweep,
    "eval": cmd_eval,
}


def main(argv=None) -> int:
    try:
        args = _parse(argv)
    except InputError as exc:
        print(f"fairrank: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (InputError, corpus.DataError, FileNotFoundError) as exc:
        print(f"fairrank: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RuntimeFailure as exc:
        print(f"fairrank: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as exc:
        print(f"fairrank: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
