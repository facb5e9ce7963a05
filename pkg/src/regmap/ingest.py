"""Registry harvesting, normalization, and DOI-deduplicated corpus assembly.

Two scholarly registries are queried per target sector. Raw response
bodies are cached to disk (one file per request, keyed by request hash)
before any normalization, so the corpus can be rebuilt offline and every
normalized record traces back to a cached raw record.
"""

from __future__ import annotations

import hashlib
import json
import re
import time
from dataclasses import dataclass, field
from pathlib import Path

import requests

from .vocab import SECTORS

YEAR_UNKNOWN = "unknown"

_DOI_PREFIX_RE = re.compile(r"^(https?://(dx\.)?doi\.org/|doi:)", re.IGNORECASE)


def normalize_doi(raw: str) -> str:
    """Strip URL prefixes, lowercase, and trim a DOI string."""
    return _DOI_PREFIX_RE.sub("", raw.strip()).lower()


@dataclass(frozen=True)
class SourceRecord:
    doi: str
    title: str
    abstract: str
    venue: str
    keywords: tuple
    year: int | str  # 4-digit int or the YEAR_UNKNOWN sentinel
    registry: str
    searched_sector: str

    def __post_init__(self):
        if isinstance(self.year, int) and not 1000 <= self.year <= 9999:
            raise ValueError(f"year must be a 4-digit integer, got {self.year}")
        if self.searched_sector not in SECTORS:
            raise ValueError(f"unknown query sector {self.searched_sector!r}")

    @property
    def has_abstract(self) -> bool:
        return bool(self.abstract.strip())


@dataclass(frozen=True)
class CorpusStrata:
    counts: dict  # registry tag -> N_h

    @property
    def total(self) -> int:
        return sum(self.counts.values())


@dataclass
class RegistryConfig:
    name: str
    base_url: str
    page_size: int = 100
    rate_per_sec: float = 10.0
    max_retries: int = 3
    # Payload key names, so differently-shaped registries share one client.
    items_key: str = "items"
    cursor_key: str = "next_cursor"
    field_map: dict = field(
        default_factory=lambda: {
            "doi": "doi",
            "title": "title",
            "abstract": "abstract",
            "venue": "venue",
            "keywords": "keywords",
            "year": "year",
        }
    )


def _request_key(url: str, params: dict) -> str:
    canon = url + "?" + "&".join(f"{k}={params[k]}" for k in sorted(params))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


class RegistryClient:
    """Paged fetcher for one registry with raw-response caching.

    Network failures retry with exponential backoff up to the configured
    budget; malformed individual records are quarantined (with a reason)
    while the page continues.
    """

    def __init__(self, config: RegistryConfig, cache_dir: str | Path,
                 session: requests.Session | None = None):
        self.config = config
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self.session = session or requests.Session()
        self.quarantine: list[dict] = []
        self._last_request = 0.0

    def _throttle(self):
        if self.config.rate_per_sec <= 0:
            return
        wait = (1.0 / self.config.rate_per_sec) - (time.monotonic() - self._last_request)
        if wait > 0:
            time.sleep(wait)
        self._last_request = time.monotonic()

    def _get_raw(self, params: dict) -> str:
        key = _request_key(self.config.base_url, params)
        cache_file = self.cache_dir / f"{self.config.name}-{key}.json"
        if cache_file.exists():
            return cache_file.read_text(encoding="utf-8")
        delay = 0.5
        for attempt in range(self.config.max_retries + 1):
            try:
                self._throttle()
                resp = self.session.get(self.config.base_url, params=params, timeout=30)
                resp.raise_for_status()
                body = resp.text
                cache_file.write_text(body, encoding="utf-8")
                return body
            except requests.RequestException:
                if attempt == self.config.max_retries:
                    raise
                time.sleep(delay)
                delay *= 2

    def fetch_page(self, sector: str, cursor: str | None = None):
        """Fetch one page for a sector. Returns (records, next_cursor)."""
        if sector not in SECTORS:
            raise ValueError(f"sector {sector!r} not in the query vocabulary")
        params = {"sector": sector, "rows": self.config.page_size}
        if cursor is not None:
            params["cursor"] = cursor
        body = self._get_raw(params)
        payload = json.loads(body)
        records = []
        for item in payload.get(self.config.items_key, []):
            try:
                records.append(self._normalize(item, sector))
            except (KeyError, TypeError, ValueError) as exc:
                self.quarantine.append({"item": item, "reason": str(exc), "sector": sector})
        return records, payload.get(self.config.cursor_key)

    def fetch_all(self, sector: str) -> list[SourceRecord]:
        records: list[SourceRecord] = []
        cursor = None
        while True:
            page, cursor = self.fetch_page(sector, cursor)
            records.extend(page)
            if cursor is None:
                break
        return records

    def _normalize(self, item: dict, sector: str) -> SourceRecord:
        fm = self.config.field_map
        doi = normalize_doi(str(item[fm["doi"]]))
        if not doi:
            raise ValueError("record missing DOI")
        year_raw = item.get(fm["year"])
        try:
            year: int | str = int(year_raw)
        except (TypeError, ValueError):
            year = YEAR_UNKNOWN
        return SourceRecord(
            doi=doi,
            title=str(item.get(fm["title"], "") or ""),
            abstract=str(item.get(fm["abstract"], "") or ""),
            venue=str(item.get(fm["venue"], "") or ""),
            keywords=tuple(item.get(fm["keywords"], ()) or ()),
            year=year,
            registry=self.config.name,
            searched_sector=sector,
        )


def merge_dedup(records, registry_order=None):
    """Deduplicate normalized records by DOI.

    Precedence when one DOI appears in several registries: keep the record
    with the longer abstract; ties go to the registry listed first in
    ``registry_order`` (default: first-seen order). Records without a DOI
    are quarantined. Returns (corpus, strata, quarantined).
    """
    order = list(registry_order) if registry_order else []
    best: dict[str, SourceRecord] = {}
    quarantined = []
    for rec in records:
        if not rec.doi:
            quarantined.append({"record": rec, "reason": "missing DOI"})
            continue
        if rec.registry not in order:
            order.append(rec.registry)
        cur = best.get(rec.doi)
        if cur is None:
            best[rec.doi] = rec
            continue
        if len(rec.abstract) > len(cur.abstract):
            best[rec.doi] = rec
        elif len(rec.abstract) == len(cur.abstract) \
                and order.index(rec.registry) < order.index(cur.registry):
            best[rec.doi] = rec
    corpus = [best[doi] for doi in sorted(best)]
    counts: dict[str, int] = {}
    for rec in corpus:
        counts[rec.registry] = counts.get(rec.registry, 0) + 1
    return corpus, CorpusStrata(counts=counts), quarantined


def dump_corpus_jsonl(corpus, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in corpus:
            fh.write(
                json.dumps(
                    {
                        "doi": rec.doi,
                        "title": rec.title,
                        "abstract": rec.abstract,
                        "venue": rec.venue,
                        "keywords": list(rec.keywords),
                        "year": rec.year,
                        "registry": rec.registry,
                        "searched_sector": rec.searched_sector,
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
                + "\n"
            )


def load_corpus_jsonl(path) -> list[SourceRecord]:
    corpus = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            row = json.loads(line)
            row["keywords"] = tuple(row["keywords"])
            corpus.append(SourceRecord(**row))
    return corpus
