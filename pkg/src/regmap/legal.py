"""Regulatory fragment catalog: segmentation, tagging, and reference years.

Official regulation texts (plain text, one document per framework) are cut
into passages at legal headings ("Article N", "§ N", "Recital N"). A
passage enters the catalog only when the tagging step marks it regulated
with at least one RDC. The catalog is the sole legal evidence used by the
pairing stage; every downstream reference must resolve here.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field

from .gates import ContractViolation
from .vocab import EU_REGULATIONS, RDC_CLASSES, REGULATIONS

# Reference year E_r per framework, used for every timing analysis.
REFERENCE_YEARS = {
    "HIPAA": 1996,
    "HITECH": 2009,
    "CCPA": 2018,
    "CPRA": 2020,
    "GDPR": 2018,
    "ePrivacy Directive": 2002,
    "NIS2": 2023,
    "PSD2": 2016,
    "EU eHealth Network": 2011,
    "GLBA": 1999,
    "COPPA": 1998,
    "FERPA": 1974,
    "ECPA": 1986,
}

# Heading grammar: "Article 9", "Article 9(1)", "§ 1232g", "Recital 30".
_HEADING_RE = re.compile(
    r"^(Article\s+\d+[a-z]?(?:\(\d+\))*|§+\s*[\w.\-]+|Recital\s+\d+)(?=\s|$)",
    re.MULTILINE,
)


@dataclass(frozen=True)
class LegalPassage:
    regulation: str
    article_ref: str
    text: str
    rdc_tags: frozenset = frozenset()
    clause_label: str | None = None

    @property
    def checksum(self) -> str:
        return hashlib.sha256(self.text.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class RegulationMeta:
    regulation: str
    jurisdiction: str
    reference_year: int


def reference_year(regulation: str) -> int:
    """Return the canonical reference year E_r for one of the 13 frameworks."""
    try:
        return REFERENCE_YEARS[regulation]
    except KeyError:
        raise KeyError(f"unknown regulation {regulation!r}; not in the 13-framework catalog")


def regulation_meta(regulation: str) -> RegulationMeta:
    jurisdiction = "EU" if regulation in EU_REGULATIONS else "US"
    return RegulationMeta(regulation, jurisdiction, reference_year(regulation))


def segment_passages(document: str, regulation: str) -> list[tuple[str, str]]:
    """Cut a framework document into (article_ref, text) spans at headings.

    Spans run heading-to-next-heading so every character belongs to at most
    one passage. Text before the first heading is preamble and is not
    returned. A document with zero recognized headings yields [] (callers
    should warn); it never becomes a whole-document pseudo-passage.
    """
    if regulation not in REGULATIONS:
        raise KeyError(f"unknown regulation {regulation!r}")
    matches = list(_HEADING_RE.finditer(document))
    passages = []
    for i, m in enumerate(matches):
        start = m.start()
        end = matches[i + 1].start() if i + 1 < len(matches) else len(document)
        ref = re.sub(r"\s+", " ", m.group(1)).strip()
        passages.append((ref, document[start:end].strip()))
    return passages


def parse_passage_tags(raw: str) -> tuple[bool, list[str], str]:
    """Parse the passage-tagging reply {regulated, classes, rationale}.

    Returns (regulated, classes, rationale). Classes outside the 13-token
    vocabulary or a malformed payload raise ContractViolation.
    """
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError:
        raise ContractViolation("passage-tag", "payload is not valid JSON", raw)
    if not isinstance(payload, dict) or set(payload) != {"regulated", "classes", "rationale"}:
        raise ContractViolation(
            "passage-tag", "payload keys must be exactly {'regulated', 'classes', 'rationale'}", raw
        )
    regulated, classes, rationale = payload["regulated"], payload["classes"], payload["rationale"]
    if not isinstance(regulated, bool) or not isinstance(classes, list):
        raise ContractViolation("passage-tag", "bad field types", raw)
    for cls in classes:
        if cls not in RDC_CLASSES:
            raise ContractViolation("passage-tag", f"class {cls!r} outside vocabulary", raw)
    if not isinstance(rationale, str) or len(rationale.split()) > 15:
        raise ContractViolation("passage-tag", "rationale must be at most 15 words", raw)
    if regulated and not classes:
        raise ContractViolation("passage-tag", "regulated passage must carry >= 1 class", raw)
    return regulated, classes, rationale


def tag_passage(raw: str, regulation: str, article_ref: str, text: str) -> LegalPassage | None:
    """Apply a tagging reply to one segmented passage.

    Returns the tagged LegalPassage for retained (regulated) passages, or
    None when the reply marks the passage unregulated (dropped from the
    catalog). Contract violations propagate to the caller for quarantine.
    """
    regulated, classes, _ = parse_passage_tags(raw)
    if not regulated:
        return None
    return LegalPassage(
        regulation=regulation,
        article_ref=article_ref,
        text=text,
        rdc_tags=frozenset(classes),
    )


@dataclass
class Catalog:
    """Write-once store of retained legal passages, indexed for the join."""

    passages: list[LegalPassage] = field(default_factory=list)

    def add(self, passage: LegalPassage) -> None:
        if not passage.article_ref:
            raise ValueError("retained passages must carry a nonempty article_ref")
        self.passages.append(passage)

    def by_regulation(self, regulation: str) -> list[LegalPassage]:
        return [p for p in self.passages if p.regulation == regulation]

    def regulations_with_rdc(self, rdc: str) -> list[str]:
        """Regulations holding >= 1 passage tagged with ``rdc``, catalog order."""
        seen = []
        for p in self.passages:
            if rdc in p.rdc_tags and p.regulation not in seen:
                seen.append(p.regulation)
        return seen

    def resolve(self, regulation: str, article_ref: str) -> LegalPassage | None:
        for p in self.passages:
            if p.regulation == regulation and p.article_ref == article_ref:
                return p
        return None

    def dump_jsonl(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for p in self.passages:
                fh.write(
                    json.dumps(
                        {
                            "regulation": p.regulation,
                            "article_ref": p.article_ref,
                            "clause_label": p.clause_label,
                            "text": p.text,
                            "rdc_tags": sorted(p.rdc_tags),
                            "checksum": p.checksum,
                        },
                        ensure_ascii=False,
                        sort_keys=True,
                    )
                    + "\n"
                )

    @classmethod
    def load_jsonl(cls, path) -> "Catalog":
        cat = cls()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                row = json.loads(line)
                cat.add(
                    LegalPassage(
                        regulation=row["regulation"],
                        article_ref=row["article_ref"],
                        clause_label=row.get("clause_label"),
                        text=row["text"],
                        rdc_tags=frozenset(row["rdc_tags"]),
                    )
                )
        return cat
