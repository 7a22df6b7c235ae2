"""Loading and validating the paper corpus, author table and query files.

All three inputs are line-delimited JSON (one object per line) using the
Semantic Scholar style field names.  Loaders return plain dicts keyed by
identifier (or a list for queries); treat them as read-only once built.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Iterator, Mapping, Optional, Sequence

log = logging.getLogger(__name__)

MALE = "Male"
FEMALE = "Female"
ADVANCED = "Advanced"
DEVELOPING = "Developing"
UNKNOWN = "Unknown"

GENDER_VALUES = (MALE, FEMALE)
ECONOMY_VALUES = (ADVANCED, DEVELOPING)

# file key -> AuthorRecord counter attribute
_COUNTER_KEYS = {
    "num_citations": "num_citations",
    "h_index": "h_index",
    "i10": "i10_index",
    "num_papers": "num_papers",
}
_PAPER_KEYS = ("id", "title", "paperAbstract", "authors", "inCitations",
               "outCitations", "year", "venue")


class DataError(ValueError):
    """Base class for input problems; carries the file line and offending key."""

    def __init__(self, message: str, *, path=None, line: int | None = None,
                 key: str | None = None):
        self.path = None if path is None else os.fspath(path)
        self.line = line
        self.key = key
        where = []
        if self.path:
            where.append(self.path)
        if line is not None:
            where.append(f"line {line}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class ParseError(DataError):
    """A line is not a well-formed JSON object."""


class IntegrityError(DataError):
    """Duplicate or missing keys."""


class ValidationError(DataError):
    """A field holds a value outside its allowed range."""


@dataclass(frozen=True)
class PaperDoc:
    doc_id: str
    title: str = ""
    abstract: str = ""
    author_ids: tuple[str, ...] = ()
    year: Optional[int] = None
    venue: Optional[str] = None
    in_citations: tuple[str, ...] = ()
    out_citations: tuple[str, ...] = ()
    # unrecognised fields from the input line, kept for round-tripping
    extra: Mapping[str, Any] = field(default_factory=dict, compare=False, repr=False)


@dataclass(frozen=True)
class AuthorRecord:
    author_id: str
    name: str = ""
    num_citations: int = 0
    h_index: int = 0
    i10_index: int = 0
    num_papers: int = 0
    gender: str = UNKNOWN
    economy: str = UNKNOWN


@dataclass(frozen=True)
class QueryRecord:
    query_id: str
    query_text: str
    frequency: int = 0
    # (doc_id, relevance) in file order; relevance is None in evaluation files
    documents: tuple[tuple[str, Optional[int]], ...] = ()
    # ids listed in the file but absent from the corpus
    unknown_doc_ids: tuple[str, ...] = ()

    @property
    def doc_ids(self) -> list[str]:
        return [d for d, _ in self.documents]

    @property
    def known_doc_ids(self) -> list[str]:
        unknown = set(self.unknown_doc_ids)
        return [d for d, _ in self.documents if d not in unknown]

    @property
    def relevant(self) -> set[str]:
        return {d for d, rel in self.documents if rel == 1}

    @property
    def has_judgments(self) -> bool:
        return any(rel is not None for _, rel in self.documents)


@dataclass(frozen=True)
class GroupStats:
    """Per-variable label counts and fractions for an author table."""

    counts: Mapping[str, Mapping[str, int]]
    fractions: Mapping[str, Mapping[str, float]]
    total: int

    def rows(self) -> Iterator[tuple[str, str, int, float]]:
        for variable, counts in self.counts.items():
            for value, n in counts.items():
                yield variable, value, n, self.fractions[variable][value]


def _read_jsonl(path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"malformed JSON ({exc.msg})", path=path, line=lineno) from None
            if not isinstance(obj, dict):
                raise ParseError("expected a JSON object", path=path, line=lineno)
            yield lineno, obj


def _key(value, *, path, line, name) -> str:
    if value is None or (isinstance(value, str) and not value.strip()):
        raise IntegrityError(f"missing or empty {name!r}", path=path, line=line, key=name)
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise ValidationError(f"{name!r} must be a string or integer", path=path, line=line,
                              key=name)
    return str(value)


def _str_list(value, *, path, line, name) -> tuple[str, ...]:
    if value is None:
        return ()
    if not isinstance(value, list):
        raise ValidationError(f"{name!r} must be a list", path=path, line=line, key=name)
    return tuple(str(v) for v in value)


def _nonneg_int(value, *, path, line, name) -> int:
    if value is None:
        return 0
    if isinstance(value, bool):
        raise ValidationError(f"{name!r} must be an integer", path=path, line=line, key=name)
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if not isinstance(value, int):
        raise ValidationError(f"{name!r} must be an integer, got {value!r}", path=path,
                              line=line, key=name)
    if value < 0:
        raise ValidationError(f"{name!r} must be nonnegative, got {value}", path=path,
                              line=line, key=name)
    return value


def _label(value, allowed: Sequence[str], *, path, line, name) -> str:
    if value is None or value == "":
        return UNKNOWN
    if isinstance(value, str):
        for candidate in (*allowed, UNKNOWN):
            if value.strip().lower() == candidate.lower():
                return candidate
    raise ValidationError(f"{name!r} must be one of {[*allowed, UNKNOWN]}, got {value!r}",
                          path=path, line=line, key=name)


def _paper_from_obj(obj: dict, *, path=None, line=None) -> PaperDoc:
    doc_id = _key(obj.get("id"), path=path, line=line, name="id")
    author_ids: list[str] = []
    authors = obj.get("authors") or []
    if not isinstance(authors, list):
        raise ValidationError("'authors' must be a list", path=path, line=line, key=doc_id)
    for entry in authors:
        ids = entry.get("ids") if isinstance(entry, dict) else None
        if not ids:
            continue
        aid = str(ids[0])
        if aid not in author_ids:
            author_ids.append(aid)
    year = obj.get("year")
    if year is not None:
        if isinstance(year, bool) or not isinstance(year, (int, float)) or int(year) != year:
            raise ValidationError(f"'year' must be an integer, got {year!r}", path=path,
                                  line=line, key=doc_id)
        year = int(year)
    venue = obj.get("venue")
    return PaperDoc(
        doc_id=doc_id,
        title=obj.get("title") or "",
        abstract=obj.get("paperAbstract") or "",
        author_ids=tuple(author_ids),
        year=year,
        venue=None if venue is None else str(venue),
        in_citations=_str_list(obj.get("inCitations"), path=path, line=line, name="inCitations"),
        out_citations=_str_list(obj.get("outCitations"), path=path, line=line,
                                name="outCitations"),
        extra={k: v for k, v in obj.items() if k not in _PAPER_KEYS},
    )


def load_corpus(path) -> dict[str, PaperDoc]:
    """Read ``corpus.jsonl`` into a dict keyed by ``doc_id``.

    Raises ParseError on a malformed line and IntegrityError on a repeated id.
    """
    docs: dict[str, PaperDoc] = {}
    for lineno, obj in _read_jsonl(path):
        doc = _paper_from_obj(obj, path=path, line=lineno)
        if doc.doc_id in docs:
            raise IntegrityError(f"duplicate doc id {doc.doc_id!r}", path=path, line=lineno,
                                 key=doc.doc_id)
        docs[doc.doc_id] = doc
    return docs


def paper_to_obj(doc: PaperDoc) -> dict:
    obj: dict[str, Any] = {"id": doc.doc_id}
    if doc.title:
        obj["title"] = doc.title
    if doc.abstract:
        obj["paperAbstract"] = doc.abstract
    obj["authors"] = [{"ids": [a]} for a in doc.author_ids]
    obj["inCitations"] = list(doc.in_citations)
    obj["outCitations"] = list(doc.out_citations)
    if doc.year is not None:
        obj["year"] = doc.year
    if doc.venue is not None:
        obj["venue"] = doc.venue
    obj.update(doc.extra)
    return obj


def write_corpus(docs: Mapping[str, PaperDoc], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs.values():
            fh.write(json.dumps(paper_to_obj(doc), ensure_ascii=False) + "\n")


def author_from_obj(obj: dict, *, path=None, line=None) -> AuthorRecord:
    aid = _key(obj.get("corpus_author_id"), path=path, line=line, name="corpus_author_id")
    kwargs: dict[str, Any] = {}
    for file_key, attr in _COUNTER_KEYS.items():
        kwargs[attr] = _nonneg_int(obj.get(file_key), path=path, line=line, name=file_key)
    name = obj.get("name")
    kwargs["name"] = "" if name is None else str(name)
    kwargs["gender"] = _label(obj.get("gender"), GENDER_VALUES, path=path, line=line,
                              name="gender")
    kwargs["economy"] = _label(obj.get("economy"), ECONOMY_VALUES, path=path, line=line,
                               name="economy")
    return AuthorRecord(author_id=aid, **kwargs)


def author_to_obj(rec: AuthorRecord) -> dict:
    return {
        "corpus_author_id": rec.author_id,
        "name": rec.name,
        "num_citations": rec.num_citations,
        "h_index": rec.h_index,
        "i10": rec.i10_index,
        "num_papers": rec.num_papers,
        "gender": rec.gender,
        "economy": rec.economy,
    }


def load_authors(path) -> dict[str, AuthorRecord]:
    """Read ``authors.jsonl``; absent gender/economy fields become ``Unknown``."""
    authors: dict[str, AuthorRecord] = {}
    for lineno, obj in _read_jsonl(path):
        rec = author_from_obj(obj, path=path, line=lineno)
        if rec.author_id in authors:
            raise IntegrityError(f"duplicate author id {rec.author_id!r}", path=path,
                                 line=lineno, key=rec.author_id)
        authors[rec.author_id] = rec
    return authors


def write_authors(authors: Mapping[str, AuthorRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in authors.values():
            fh.write(json.dumps(author_to_obj(rec), ensure_ascii=False) + "\n")


def _relevance(value, *, path, line, key) -> Optional[int]:
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value not in (0, 1):
        raise ValidationError(f"relevance must be 0 or 1, got {value!r}", path=path, line=line,
                              key=key)
    return int(value)


def load_queries(path, corpus: Mapping[str, PaperDoc]) -> list[QueryRecord]:
    """Read ``queries.jsonl`` in file order.

    Document ids missing from ``corpus`` are kept in ``documents`` and listed in
    ``unknown_doc_ids``; each occurrence is also logged as a warning.
    """
    queries = []
    for lineno, obj in _read_jsonl(path):
        qid = _key(obj.get("qid"), path=path, line=lineno, name="qid")
        docs = obj.get("documents") or []
        if not isinstance(docs, list):
            raise ValidationError("'documents' must be a list", path=path, line=lineno, key=qid)
        entries = []
        unknown = []
        for entry in docs:
            if isinstance(entry, dict):
                did = _key(entry.get("doc_id"), path=path, line=lineno, name="doc_id")
                rel = _relevance(entry.get("relevance"), path=path, line=lineno, key=did)
            else:
                did, rel = _key(entry, path=path, line=lineno, name="doc_id"), None
            entries.append((did, rel))
            if did not in corpus:
                unknown.append(did)
        if unknown:
            log.warning("%s:%d: query %s references %d unknown doc id(s): %s", path, lineno, qid,
                        len(unknown), ", ".join(unknown))
        queries.append(QueryRecord(
            query_id=qid,
            query_text=str(obj.get("query") or ""),
            frequency=_nonneg_int(obj.get("frequency"), path=path, line=lineno, name="frequency"),
            documents=tuple(entries),
            unknown_doc_ids=tuple(unknown),
        ))
    return queries


def query_to_obj(q: QueryRecord) -> dict:
    docs = []
    for did, rel in q.documents:
        entry: dict[str, Any] = {"doc_id": did}
        if rel is not None:
            entry["relevance"] = rel
        docs.append(entry)
    return {"qid": q.query_id, "query": q.query_text, "frequency": q.frequency,
            "documents": docs}


def write_queries(queries: Sequence[QueryRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for q in queries:
            fh.write(json.dumps(query_to_obj(q), ensure_ascii=False) + "\n")


def group_stats(authors: Mapping[str, AuthorRecord]) -> GroupStats:
    """Count gender and country/economy labels, ``Unknown`` included."""
    if not authors:
        raise ValueError("group statistics are undefined for an empty author table")
    total = len(authors)
    counts = {
        "gender": {v: 0 for v in (*GENDER_VALUES, UNKNOWN)},
        "country": {v: 0 for v in (*ECONOMY_VALUES, UNKNOWN)},
    }
    for rec in authors.values():
        counts["gender"][rec.gender] += 1
        counts["country"][rec.economy] += 1
    fractions = {var: {v: n / total for v, n in c.items()} for var, c in counts.items()}
    return GroupStats(counts=counts, fractions=fractions, total=total)
