"""Offline gender and country/economy attribution for authors.

Gender comes from a first-name frequency table.  Country is resolved by a
chain that stops at the first hit: email country-code TLD, then a university
name in the affiliation, then a city name in the affiliation, then an
optional pluggable provider (web search, place lookup, ...).  The default
build ships no provider, so the chain ends at the city step.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Callable, Mapping, Optional

from .corpus import (ECONOMY_VALUES, FEMALE, MALE, UNKNOWN, AuthorRecord, GroupStats,
                     _read_jsonl, group_stats)

log = logging.getLogger(__name__)

# (name, email, affiliation) -> ISO country code or None
CountryProvider = Callable[[str, Optional[str], Optional[str]], Optional[str]]


def no_provider(name: str, email: Optional[str], affiliation: Optional[str]) -> Optional[str]:
    return None


@dataclass(frozen=True)
class GeoTables:
    tld_to_country: Mapping[str, str]
    university_to_country: Mapping[str, str]
    city_to_country: Mapping[str, str]
    country_to_economy: Mapping[str, str]

    def __post_init__(self):
        for table in (self.tld_to_country, self.university_to_country, self.city_to_country):
            missing = {c for c in table.values() if c not in self.country_to_economy}
            if missing:
                raise ValueError(f"country codes without an economy label: {sorted(missing)}")
        bad = {v for v in self.country_to_economy.values() if v not in ECONOMY_VALUES}
        if bad:
            raise ValueError(f"economy labels must be Advanced/Developing, got {sorted(bad)}")


def load_name_table(path=None) -> dict[str, tuple[int, int]]:
    """Read a ``name<TAB>male_count<TAB>female_count`` file; the bundled table by default."""
    if path is None:
        text = resources.files("fairrank").joinpath("data/name_gender.tsv").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    table: dict[str, tuple[int, int]] = {}
    for lineno, row in enumerate(csv.reader(text.splitlines(), delimiter="\t"), start=1):
        if not row or row[0].startswith("#"):
            continue
        if len(row) != 3:
            raise ValueError(f"{path or 'name_gender.tsv'}:{lineno}: expected 3 columns")
        name, m, f = row[0].strip().casefold(), int(row[1]), int(row[2])
        if m < 0 or f < 0 or m + f == 0:
            raise ValueError(f"{path or 'name_gender.tsv'}:{lineno}: invalid counts for {name!r}")
        table[name] = (m, f)
    return table


def load_geo_tables(path=None) -> GeoTables:
    """Read ``geo_tables.json`` (four maps); the bundled tables by default.

    Table keys are lowercased on load.
    """
    if path is None:
        raw = json.loads(resources.files("fairrank").joinpath("data/geo_tables.json")
                         .read_text("utf-8"))
    else:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    return GeoTables(
        tld_to_country={k.lower().lstrip("."): v.upper() for k, v in raw["tld_to_country"].items()},
        university_to_country={k.lower(): v.upper()
                               for k, v in raw["university_to_country"].items()},
        city_to_country={k.lower(): v.upper() for k, v in raw["city_to_country"].items()},
        country_to_economy={k.upper(): v for k, v in raw["country_to_economy"].items()},
    )


def load_contacts(path) -> dict[str, tuple[Optional[str], Optional[str]]]:
    """Read ``contacts.jsonl``: ``{author_id, email?, affiliation?}`` per line."""
    contacts = {}
    for lineno, obj in _read_jsonl(path):
        aid = obj.get("author_id")
        if aid is None or str(aid) == "":
            raise ValueError(f"{path}:{lineno}: missing author_id")
        contacts[str(aid)] = (obj.get("email") or None, obj.get("affiliation") or None)
    return contacts


def infer_gender(full_name: str, table: Mapping[str, tuple[int, int]]) -> str:
    """Majority gender of the first name; equal counts resolve to Female."""
    tokens = (full_name or "").split()
    if not tokens:
        return UNKNOWN
    entry = table.get(tokens[0].casefold())
    if entry is None:
        return UNKNOWN
    male, female = entry
    return MALE if male > female else FEMALE


def _email_tld(email: str) -> str:
    domain = email.rsplit("@", 1)[-1].strip().rstrip(".").lower()
    return domain.rsplit(".", 1)[-1] if "." in domain else ""


def longest_match(text: str, table: Mapping[str, str]) -> Optional[str]:
    """Value for the longest table key found in ``text`` on word boundaries."""
    haystack = text.lower()
    best = None
    for key in table:
        needle = key.lower()
        if not needle or len(needle) <= (len(best.lower()) if best else 0):
            continue
        start = haystack.find(needle)
        while start != -1:
            end = start + len(needle)
            if ((start == 0 or not haystack[start - 1].isalnum())
                    and (end == len(haystack) or not haystack[end].isalnum())):
                best = key
                break
            start = haystack.find(needle, start + 1)
    return None if best is None else table[best]


def infer_country(email: Optional[str], affiliation: Optional[str], tables: GeoTables, *,
                  name: str = "", provider: CountryProvider = no_provider) -> str:
    """Country code from the first successful chain step, else ``Unknown``."""
    if email:
        country = tables.tld_to_country.get(_email_tld(email))
        if country:
            return country
    if affiliation:
        for table in (tables.university_to_country, tables.city_to_country):
            country = longest_match(affiliation, table)
            if country:
                return country
    try:
        country = provider(name, email, affiliation)
    except Exception as exc:  # a flaky external backend must not break the chain
        log.warning("country provider failed for %r: %s", name, exc)
        country = None
    return country.upper() if country else UNKNOWN


def economy_of(country: str, tables: GeoTables) -> str:
    try:
        return tables.country_to_economy[country.upper()]
    except KeyError:
        raise KeyError(f"no economy classification for country code {country!r}") from None


@dataclass
class CoverageReport:
    stats: GroupStats
    failures: list[tuple[str, str]] = field(default_factory=list)  # (author_id, message)
    countries: dict[str, str] = field(default_factory=dict)  # author_id -> inferred code

    def rows(self):
        return list(self.stats.rows())

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["variable", "value", "count", "fraction"])
            for variable, value, count, fraction in self.rows():
                writer.writerow([variable, value, count, repr(fraction)])


def attribute_all(authors: Mapping[str, AuthorRecord], name_table: Mapping[str, tuple[int, int]],
                  geo: GeoTables,
                  contact: Mapping[str, tuple[Optional[str], Optional[str]]] | None = None, *,
                  provider: CountryProvider = no_provider
                  ) -> tuple[dict[str, AuthorRecord], CoverageReport]:
    """Fill Unknown gender/economy labels where inference succeeds.

    Labels already present are kept as they are.  Returns the updated table
    and a coverage report with per-label counts and per-author failures.
    """
    contact = contact or {}
    out: dict[str, AuthorRecord] = {}
    failures: list[tuple[str, str]] = []
    countries: dict[str, str] = {}
    for aid in sorted(authors):
        rec = authors[aid]
        changes = {}
        if rec.gender == UNKNOWN:
            gender = infer_gender(rec.name, name_table)
            if gender != UNKNOWN:
                changes["gender"] = gender
        if rec.economy == UNKNOWN:
            email, affiliation = contact.get(aid, (None, None))
            country = infer_country(email, affiliation, geo, name=rec.name, provider=provider)
            if country != UNKNOWN:
                countries[aid] = country
                try:
                    changes["economy"] = economy_of(country, geo)
                except KeyError as exc:
                    failures.append((aid, str(exc.args[0])))
        out[aid] = replace(rec, **changes) if changes else rec
    # keep caller's ordering
    table = {aid: out[aid] for aid in authors}
    report = CoverageReport(group_stats(table) if table else GroupStats({}, {}, 0),
                            failures, countries)
    return table, report

