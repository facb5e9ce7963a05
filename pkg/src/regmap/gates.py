"""Strict parsers for the five sequential gate contracts.

Each parser consumes one verbatim model reply and either returns a value
from the stage's closed vocabulary or raises :class:`ContractViolation`.
Nothing is ever repaired: trailing/leading whitespace is trimmed and that
is the only normalization applied. Parsers are pure functions so replaying
a cache of raw outputs reproduces every gate count exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .vocab import (
    PREDICTOR_VALIDATION_TOKENS,
    RDC_CLASSES,
    RELEVANCE_TOKENS,
    SECTOR_LABELS,
)


class ContractViolation(ValueError):
    """Model output that does not satisfy a gate's fixed output contract."""

    def __init__(self, stage: str, reason: str, raw: str):
        super().__init__(f"{stage}: {reason}")
        self.stage = stage
        self.reason = reason
        self.raw = raw


@dataclass(frozen=True)
class GateDecision:
    doi: str
    stage: str
    verdict: str
    raw_output: str
    prompt_version: str = "v1"
    model_meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class PredictorMention:
    doi: str
    name: str
    evidence: str
    rdc: str | None = None
    rationale: str = ""


@dataclass(frozen=True)
class SectorLabel:
    doi: str
    assigned: str


def parse_relevance(raw: str) -> str:
    """Parse the relevance gate reply: exactly 'Relevant' or 'Not relevant'."""
    token = raw.strip()
    if token not in RELEVANCE_TOKENS:
        raise ContractViolation("relevance", "not one of the two relevance tokens", raw)
    return token


def parse_sector(raw: str, doi: str = "") -> SectorLabel:
    """Parse the sector gate reply: one of the 13 sector strings.

    Out-of-vocabulary tokens (the released run contains at least one,
    'manufacturing_industry') raise ContractViolation; callers quarantine
    the record rather than extend the vocabulary.
    """
    token = raw.strip()
    if token not in SECTOR_LABELS:
        raise ContractViolation("sector", "sector token outside the 13-string list", raw)
    return SectorLabel(doi=doi, assigned=token)


def apply_sector_match_filter(labels, corpus_records):
    """Retain records whose assigned sector equals the sector searched at query time.

    ``labels`` maps doi -> SectorLabel; records without a label (quarantined
    at parse) are excluded. Returns (included records, per-sector counts).
    """
    by_doi = {lab.doi: lab.assigned for lab in labels}
    included = []
    counts: dict[str, int] = {}
    for rec in corpus_records:
        assigned = by_doi.get(rec.doi)
        if assigned is None or assigned != rec.searched_sector:
            continue
        included.append(rec)
        counts[assigned] = counts.get(assigned, 0) + 1
    return included, counts


_PREDICTOR_KEYS = {"name", "evidence"}


def parse_predictors(raw: str, abstract: str, doi: str = "") -> list[PredictorMention]:
    """Parse the predictor-extraction reply into validated mentions.

    The payload must be exactly ``{"predictors": [{"name", "evidence"}, ...]}``
    (strict schema, no extra keys). Mentions failing the containment checks
    (evidence in abstract, name in evidence, both case-insensitive for the
    name and verbatim for the evidence) are dropped individually; a malformed
    payload fails the whole reply.
    """
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError:
        raise ContractViolation("predictors", "payload is not valid JSON", raw)
    if not isinstance(payload, dict) or set(payload) != {"predictors"}:
        raise ContractViolation("predictors", "payload keys must be exactly {'predictors'}", raw)
    items = payload["predictors"]
    if not isinstance(items, list):
        raise ContractViolation("predictors", "'predictors' must be a list", raw)

    mentions: list[PredictorMention] = []
    seen_names: set[str] = set()
    for item in items:
        if not isinstance(item, dict) or set(item) != _PREDICTOR_KEYS:
            raise ContractViolation(
                "predictors", "each mention must have exactly keys {'name', 'evidence'}", raw
            )
        name, evidence = item["name"], item["evidence"]
        if not isinstance(name, str) or not isinstance(evidence, str) or not name:
            raise ContractViolation("predictors", "mention fields must be non-empty strings", raw)
        # Containment checks; failures drop the mention, not the reply.
        if evidence not in abstract:
            continue
        if name.lower() not in evidence.lower():
            continue
        # Duplicate names within one DOI collapse case-insensitively; first
        # evidence wins.
        key = name.lower()
        if key in seen_names:
            continue
        seen_names.add(key)
        mentions.append(PredictorMention(doi=doi, name=name, evidence=evidence))
    return mentions


def parse_predictor_validation(raw: str) -> str:
    """Parse the all-or-nothing predictor-validation reply: 'Valid' or 'Not valid'."""
    token = raw.strip()
    if token not in PREDICTOR_VALIDATION_TOKENS:
        raise ContractViolation("predictor-validation", "not one of the two verdict tokens", raw)
    return token


def parse_rdc(raw: str) -> tuple[str, str]:
    """Parse the predictor -> RDC mapping reply.

    Expects ``{"class": <one of 13>, "rationale": <= 15 words}`` and nothing
    else. Returns (rdc token, rationale).
    """
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError:
        raise ContractViolation("rdc", "payload is not valid JSON", raw)
    if not isinstance(payload, dict) or set(payload) != {"class", "rationale"}:
        raise ContractViolation("rdc", "payload keys must be exactly {'class', 'rationale'}", raw)
    rdc, rationale = payload["class"], payload["rationale"]
    if rdc not in RDC_CLASSES:
        raise ContractViolation("rdc", f"class {rdc!r} outside the 13-class vocabulary", raw)
    if not isinstance(rationale, str) or len(rationale.split()) > 15:
        raise ContractViolation("rdc", "rationale must be a string of at most 15 words", raw)
    return rdc, rationale
