"""Deterministic release-scale fixture: corpus, documents, and model cache.

The released model-output cache behind the published corpus is not part of
this package, so the replay path is exercised against a synthetic stand-in
generated here: a fully deterministic registry + model cache whose replay
reproduces the published stage totals exactly (19,405 -> 8,386 -> 4,686 ->
596 records; 9,256 candidate pairs -> 2,713 Regulated -> 2,329
Regulated+High), including the one out-of-vocabulary sector label and the
three malformed relevance replies observed in the released run.

Everything is generated from fixed tables and a fixed shuffle seed: two
invocations produce byte-identical caches.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

from .ingest import _request_key
from .legal import Catalog, LegalPassage
from .model_client import write_cache_entry
from .pairing import assemble_context, build_candidate_pairs
from .gates import PredictorMention
from .vocab import REGULATIONS, SECTORS

# Published per-stage distributions (assigned-sector counts over the
# relevant set, matched counts after the sector filter, and Valid counts).
SECTOR_ASSIGNED = {
    "banking_finance": 689,
    "cybersecurity_intrusion_detection": 863,
    "ecommerce_retail": 431,
    "education_learning_analytics": 992,
    "government_public_admin": 399,
    "healthcare_pharma": 1714,
    "hr_recruitment": 157,
    "insurance": 184,
    "iot_smart_systems": 804,
    "social_media": 635,
    "telecom_network_security": 233,
    "transportation_logistics": 625,
    "none_of_the_above": 659,
}
SECTOR_MATCHED = {
    "banking_finance": 405,
    "cybersecurity_intrusion_detection": 364,
    "ecommerce_retail": 301,
    "education_learning_analytics": 631,
    "government_public_admin": 237,
    "healthcare_pharma": 747,
    "hr_recruitment": 107,
    "insurance": 163,
    "iot_smart_systems": 540,
    "social_media": 542,
    "telecom_network_security": 159,
    "transportation_logistics": 490,
}
VALID_BY_SECTOR = {
    "banking_finance": 30,
    "cybersecurity_intrusion_detection": 6,
    "ecommerce_retail": 52,
    "education_learning_analytics": 118,
    "government_public_admin": 42,
    "healthcare_pharma": 127,
    "hr_recruitment": 15,
    "insurance": 19,
    "iot_smart_systems": 56,
    "social_media": 38,
    "telecom_network_security": 7,
    "transportation_logistics": 86,
}

OUT_OF_VOCAB_SECTOR = "manufacturing_industry"  # one occurrence, quarantined
N_NOT_RELEVANT = 11016
N_RELEVANCE_ERRORS = 3
N_CROSSREF = 10023
N_OPENALEX = 9382

N_UNIQUE_NAMES = 1749
N_REUSED_NAMES = 422  # appear in a second DOI -> 2,171 per-DOI instances
N_INSTANCES = N_UNIQUE_NAMES + N_REUSED_NAMES

# Catalog membership: Identifier_PII spans five frameworks, the other used
# classes four each, so instance-level joins total 572*5 + 1599*4 = 9,256.
CLASS_REGULATIONS = {
    "Identifier_PII": ["GDPR", "CCPA", "CPRA", "HIPAA", "ECPA"],
    "Health_Clinical": ["GDPR", "HIPAA", "HITECH", "EU eHealth Network"],
    "Financial": ["GLBA", "PSD2", "GDPR", "CCPA"],
    "Location_IoT": ["GDPR", "ePrivacy Directive", "NIS2", "CCPA"],
    "Demographic": ["GDPR", "CCPA", "CPRA", "FERPA"],
    "Behavioural": ["GDPR", "ePrivacy Directive", "CCPA", "COPPA"],
    "Contact_Info": ["GDPR", "CCPA", "ePrivacy Directive", "ECPA"],
}
_COVERAGE_FOUR = [c for c in CLASS_REGULATIONS if c != "Identifier_PII"]

N_REGULATED_HIGH = 2329
N_REGULATED_MEDIUM = 384
N_NOT_REGULATED = 6543
SHUFFLE_SEED = 20240901

YEARS = list(range(2013, 2026))

PUBLISHED_PRECISIONS = {
    "relevance": 0.940875,
    "sector": 0.923450,
    "predictor": 0.760005,
    "rdc": 0.800000,
    "pair-status": 0.785714,
}


def _predictor_name(i: int) -> str:
    return f"pf{i:04d}"


def _name_rdc(i: int) -> str:
    """RDC of the i-th (1-based) unique predictor name."""
    if 423 <= i <= 994:  # 572 singleton names carry the five-framework class
        return "Identifier_PII"
    return _COVERAGE_FOUR[i % len(_COVERAGE_FOUR)]


def _abstract(sector: str, names: list[str]) -> str:
    parts = [f"We study decision tree models for the {sector} domain."]
    parts += [f"The model uses {n} as an input feature." for n in names]
    parts.append("Classification performance is reported on held-out data.")
    return " ".join(parts)


def build_plan() -> list[dict]:
    """Enumerate all 19,405 records with their per-stage outcomes.

    Pure construction from the published tables; no randomness. Each entry
    carries doi/title/abstract/year, searched and assigned sector, the
    relevance reply, and (where applicable) predictor names and validity.
    """
    # Predictor name tokens in global instance order: every unique name
    # once, then the reused names a second time (landing in later DOIs).
    tokens = [_predictor_name(i) for i in range(1, N_UNIQUE_NAMES + 1)]
    tokens += [_predictor_name(i) for i in range(1, N_REUSED_NAMES + 1)]
    # 383 DOIs with four predictors + 213 with three = 2,171 instances.
    slot_counts = [4] * 383 + [3] * 213
    assert sum(slot_counts) == N_INSTANCES

    plan: list[dict] = []
    other = {s: [t for t in SECTORS if t != s] for s in SECTORS}
    valid_seen = 0
    pos = 0

    def add(assigned, searched, relevance_reply, predictors=None, valid=None):
        idx = len(plan)
        plan.append({
            "doi": f"10.9999/syn{idx:05d}",
            "title": f"Decision tree study {idx}",
            "venue": f"Venue {idx % 37}",
            "keywords": ["decision tree", searched],
            "year": YEARS[idx % len(YEARS)],
            "searched": searched,
            "assigned": assigned,
            "relevance_reply": relevance_reply,
            "predictors": predictors or [],
            "valid": valid,
        })

    for sector in sorted(SECTOR_ASSIGNED):
        if sector == "none_of_the_above":
            for j in range(SECTOR_ASSIGNED[sector]):
                add(sector, SECTORS[j % len(SECTORS)], "Relevant")
            continue
        matched = SECTOR_MATCHED[sector]
        n_valid = VALID_BY_SECTOR[sector]
        for j in range(SECTOR_ASSIGNED[sector]):
            if j < matched:
                searched = sector
                if j < n_valid:
                    names = tokens[pos:pos + slot_counts[valid_seen]]
                    pos += slot_counts[valid_seen]
                    valid_seen += 1
                    add(sector, searched, "Relevant", predictors=names, valid=True)
                else:
                    aux = [f"aux{len(plan):05d}"]
                    add(sector, searched, "Relevant", predictors=aux, valid=False)
            else:
                searched = other[sector][j % (len(SECTORS) - 1)]
                add(sector, searched, "Relevant")
    # The single out-of-vocabulary sector assignment seen in the release.
    add(OUT_OF_VOCAB_SECTOR, SECTORS[0], "Relevant")
    for j in range(N_NOT_RELEVANT):
        add(None, SECTORS[j % len(SECTORS)], "Not relevant")
    for j in range(N_RELEVANCE_ERRORS):
        add(None, SECTORS[j % len(SECTORS)], "Possibly relevant")

    assert valid_seen == 596 and pos == N_INSTANCES
    assert len(plan) == N_CROSSREF + N_OPENALEX

    # Registry assignment: alternate until one quota is exhausted.
    used = {"crossref": 0, "openalex": 0}
    quota = {"crossref": N_CROSSREF, "openalex": N_OPENALEX}
    for idx, rec in enumerate(plan):
        pick = "crossref" if idx % 2 == 0 else "openalex"
        if used[pick] >= quota[pick]:
            pick = "openalex" if pick == "crossref" else "crossref"
        used[pick] += 1
        rec["registry"] = pick
        rec["abstract"] = _abstract(rec["searched"], rec["predictors"])
    return plan


def build_documents() -> dict[str, str]:
    """One synthetic consolidated text per framework, cut at Article headings."""
    per_reg: dict[str, list[str]] = {r: [] for r in REGULATIONS}
    for cls, regs in CLASS_REGULATIONS.items():
        for r in regs:
            per_reg[r].append(cls)
    docs = {}
    for reg, classes in per_reg.items():
        lines = [f"{reg} consolidated synthetic text. Preamble material.", ""]
        lines.append(f"Article 1 Scope and definitions for {reg}; no data "
                     "categories are addressed here.")
        for k, cls in enumerate(classes, start=2):
            lines.append(
                f"Article {k} Processing of {cls.replace('_', ' ').lower()} data "
                f"is restricted under {reg} and requires a lawful basis."
            )
        docs[reg] = "\n".join(lines) + "\n"
    return docs


def build_catalog() -> Catalog:
    """The catalog the pipeline will reconstruct from documents + tag replies."""
    per_reg: dict[str, list[str]] = {r: [] for r in REGULATIONS}
    for cls, regs in CLASS_REGULATIONS.items():
        for r in regs:
            per_reg[r].append(cls)
    cat = Catalog()
    for reg in REGULATIONS:
        for k, cls in enumerate(per_reg[reg], start=2):
            text = (f"Article {k} Processing of {cls.replace('_', ' ').lower()} data "
                    f"is restricted under {reg} and requires a lawful basis.")
            cat.add(LegalPassage(regulation=reg, article_ref=f"Article {k}",
                                 text=text, rdc_tags=frozenset({cls})))
    return cat


def plan_mentions(plan) -> list[PredictorMention]:
    """Valid-DOI predictor mentions with their RDC, in pipeline order."""
    name_index = {}
    mentions = []
    for rec in sorted((r for r in plan if r.get("valid")), key=lambda r: r["doi"]):
        for name in rec["predictors"]:
            if name not in name_index:
                name_index[name] = int(name[2:])
            mentions.append(PredictorMention(
                doi=rec["doi"], name=name,
                evidence=f"The model uses {name} as an input feature.",
                rdc=_name_rdc(name_index[name]),
            ))
    return mentions


def pair_labels(n_pairs: int) -> list[str]:
    labels = (["RegulatedHigh"] * N_REGULATED_HIGH
              + ["RegulatedMedium"] * N_REGULATED_MEDIUM
              + ["NotRegulated"] * N_NOT_REGULATED)
    assert len(labels) == n_pairs
    random.Random(SHUFFLE_SEED).shuffle(labels)
    return labels


def _registry_pages(plan, registry: str, page_size: int):
    """Group one registry's records into paged payloads per searched sector."""
    by_sector: dict[str, list[dict]] = {}
    for rec in plan:
        if rec["registry"] == registry:
            by_sector.setdefault(rec["searched"], []).append(rec)
    pages = {}
    for sector, records in by_sector.items():
        chunks = [records[i:i + page_size] for i in range(0, len(records), page_size)]
        pages[sector] = [
            {
                "items": [
                    {
                        "doi": r["doi"], "title": r["title"], "abstract": r["abstract"],
                        "venue": r["venue"], "keywords": r["keywords"], "year": r["year"],
                    }
                    for r in chunk
                ],
                "next_cursor": f"p{i + 1}" if i + 1 < len(chunks) else None,
            }
            for i, chunk in enumerate(chunks)
        ]
    return pages


REGISTRY_URLS = {
    "crossref": "https://registry.invalid/crossref/works",
    "openalex": "https://registry.invalid/openalex/works",
}
PAGE_SIZE = 500


def generate_release_fixture(root) -> dict:
    """Write the full synthetic release under ``root``.

    Layout: cache/registry/ (raw page bodies), cache/model/<stage>/ (one
    file per key), docs/<regulation>.txt, config.json. Returns a summary of
    generated counts.
    """
    root = Path(root)
    cache = root / "cache"
    (cache / "registry").mkdir(parents=True, exist_ok=True)
    docs_dir = root / "docs"
    docs_dir.mkdir(parents=True, exist_ok=True)

    plan = build_plan()

    # Raw registry pages.
    for registry, base_url in REGISTRY_URLS.items():
        for sector, pages in _registry_pages(plan, registry, PAGE_SIZE).items():
            for i, page in enumerate(pages):
                params = {"sector": sector, "rows": PAGE_SIZE}
                if i > 0:
                    params["cursor"] = f"p{i}"
                key = _request_key(base_url, params)
                (cache / "registry" / f"{registry}-{key}.json").write_text(
                    json.dumps(page, ensure_ascii=False, sort_keys=True),
                    encoding="utf-8",
                )

    # Relevance replies for every record; sector replies for the relevant.
    for rec in plan:
        write_cache_entry(cache, "relevance", rec["doi"], rec["relevance_reply"])
        if rec["assigned"] is not None:
            write_cache_entry(cache, "sector", rec["doi"], rec["assigned"])

    # Extraction + validation replies for the included (sector-matched) set.
    included = [r for r in plan if r["assigned"] == r["searched"]]
    for rec in included:
        reply = json.dumps({
            "predictors": [
                {"name": n, "evidence": f"The model uses {n} as an input feature."}
                for n in rec["predictors"]
            ]
        })
        write_cache_entry(cache, "extract", rec["doi"], reply)
        write_cache_entry(cache, "validate", rec["doi"],
                          "Valid" if rec["valid"] else "Not valid")

    # RDC replies per globally-unique predictor name.
    for i in range(1, N_UNIQUE_NAMES + 1):
        name = _predictor_name(i)
        reply = json.dumps({"class": _name_rdc(i),
                            "rationale": "Synthetic category assignment for replay."})
        write_cache_entry(cache, "rdc", name, reply)

    # Documents + passage-tagging replies.
    docs = build_documents()
    for reg, text in docs.items():
        (docs_dir / f"{reg}.txt").write_text(text, encoding="utf-8")
        for line in text.splitlines():
            if line.startswith("Article 1 "):
                write_cache_entry(cache, "passage", f"{reg}::Article 1", json.dumps(
                    {"regulated": False, "classes": [], "rationale": "Scope only."}))
            elif line.startswith("Article "):
                k = line.split()[1]
                cls = next(c for c in CLASS_REGULATIONS
                           if c.replace("_", " ").lower() in line)
                write_cache_entry(cache, "passage", f"{reg}::Article {k}", json.dumps(
                    {"regulated": True, "classes": [cls],
                     "rationale": "Synthetic restricted category."}))

    # Pair verdicts over the exact join the pipeline will form.
    catalog = build_catalog()
    mentions = plan_mentions(plan)
    pairs = build_candidate_pairs(mentions, catalog)
    labels = pair_labels(len(pairs))
    for pair, label in zip(pairs, labels):
        if label == "NotRegulated":
            reply = ("STATUS: Not Regulated\nCONFIDENCE: High\n"
                     "RATIONALE: No covered obligation applies. refs: none")
        else:
            ref = assemble_context(pair, catalog)[0].article_ref
            confidence = "High" if label == "RegulatedHigh" else "Medium"
            reply = (f"STATUS: Regulated\nCONFIDENCE: {confidence}\n"
                     f"RATIONALE: Category is restricted by this framework. "
                     f"refs: {ref}")
        write_cache_entry(cache, "pair", pair.pair_id, reply)

    config = {
        "registries": [
            {"name": name, "base_url": REGISTRY_URLS[name], "page_size": PAGE_SIZE}
            for name in ("crossref", "openalex")
        ],
        "sectors": list(SECTORS),
        "documents": {reg: str(docs_dir / f"{reg}.txt") for reg in REGULATIONS},
        "violation_budget": 10,
        "audit_sample_size": 1000,
        "precisions": PUBLISHED_PRECISIONS,
    }
    (root / "config.json").write_text(
        json.dumps(config, ensure_ascii=False, indent=2, sort_keys=True),
        encoding="utf-8",
    )

    return {
        "records": len(plan),
        "relevant": sum(1 for r in plan if r["relevance_reply"] == "Relevant"),
        "included": len(included),
        "valid": sum(1 for r in included if r["valid"]),
        "instances": sum(len(r["predictors"]) for r in plan if r.get("valid")),
        "pairs": len(pairs),
    }
