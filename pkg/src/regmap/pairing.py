"""Predictor-regulation candidate pairs and the final Regulated+High set.

Pairs come from an RDC join: a predictor meets every regulation holding at
least one catalog passage tagged with the predictor's RDC. The validator's
three-line verdict is parsed strictly; structural deviations downgrade to
NotRegulated/Low with a parse flag (counted apart from model-asserted
NotRegulated) and can never enter the final set.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .legal import Catalog, LegalPassage
from .vocab import PAIR_CONFIDENCE_TOKENS, PAIR_STATUS_TOKENS


@dataclass(frozen=True)
class CandidatePair:
    doi: str
    predictor: str
    rdc: str
    regulation: str

    @property
    def pair_id(self) -> str:
        return f"{self.doi}::{self.predictor}::{self.regulation}"


@dataclass(frozen=True)
class PairVerdict:
    status: str
    confidence: str
    rationale: str
    refs: tuple
    parse_flags: frozenset = frozenset()

    @property
    def downgraded(self) -> bool:
        return bool(self.parse_flags)


def build_candidate_pairs(predictors, catalog: Catalog) -> list[CandidatePair]:
    """Join predictors to regulations through shared RDC tags.

    ``predictors`` are mentions with an assigned rdc; a pair exists iff the
    regulation has >= 1 catalog passage tagged with that rdc. No duplicates:
    one pair per (doi, predictor, regulation).
    """
    coverage = {}
    pairs = []
    seen = set()
    for p in predictors:
        if p.rdc is None:
            raise ValueError(f"predictor {p.name!r} of {p.doi} has no RDC assigned")
        if p.rdc not in coverage:
            coverage[p.rdc] = catalog.regulations_with_rdc(p.rdc)
        for regulation in coverage[p.rdc]:
            key = (p.doi, p.name, regulation)
            if key in seen:
                continue
            seen.add(key)
            pairs.append(CandidatePair(p.doi, p.name, p.rdc, regulation))
    return pairs


_WORD_RE_CACHE: dict[str, re.Pattern] = {}


def _names_passage(passage: LegalPassage, predictor: str) -> bool:
    # Whole-word, case-insensitive match of the predictor name in the text.
    pat = _WORD_RE_CACHE.get(predictor)
    if pat is None:
        pat = re.compile(r"(?<!\w)" + re.escape(predictor) + r"(?!\w)", re.IGNORECASE)
        _WORD_RE_CACHE[predictor] = pat
    return bool(pat.search(passage.text))


def assemble_context(pair: CandidatePair, catalog: Catalog) -> list[LegalPassage]:
    """Collect the regulatory context shown to the validator for one pair.

    Union of (a) all passages of the pair's regulation tagged with its RDC
    and (b) passages of that regulation whose text names the predictor,
    ordered lexicographically by article_ref for determinism.
    """
    chosen = {}
    for passage in catalog.by_regulation(pair.regulation):
        if pair.rdc in passage.rdc_tags or _names_passage(passage, pair.predictor):
            chosen[passage.article_ref] = passage
    if not chosen:
        raise ValueError(f"empty context for pair {pair.pair_id}; join precondition violated")
    return [chosen[ref] for ref in sorted(chosen)]


def _downgrade(rationale: str, flag: str) -> PairVerdict:
    return PairVerdict(
        status="Not Regulated",
        confidence="Low",
        rationale=rationale,
        refs=(),
        parse_flags=frozenset({flag}),
    )


def _normalize_ref(ref: str, regulation: str) -> str:
    """Reduce a rationale ref like 'GDPR Art.9(1)' toward an article_ref."""
    r = ref.strip()
    if r.lower().startswith(regulation.lower()):
        r = r[len(regulation):].strip()
    r = re.sub(r"^Art\.?\s*", "Article ", r)
    r = re.sub(r"\s+", " ", r)
    return r


def ref_resolves(ref: str, regulation: str, context: list[LegalPassage]) -> bool:
    wanted = _normalize_ref(ref, regulation)
    return any(p.article_ref == wanted or p.article_ref == ref.strip() for p in context)


def parse_verdict(raw: str, regulation: str | None = None,
                  context: list[LegalPassage] | None = None) -> PairVerdict:
    """Parse the validator's exactly-three-line reply.

    Lines: ``STATUS: ...``, ``CONFIDENCE: ...``, ``RATIONALE: ... refs: ...``.
    Any structural deviation, a Regulated verdict without refs, or (when a
    context is supplied) an unresolvable ref yields a downgraded
    NotRegulated/Low verdict carrying a parse flag. NotRegulated requires
    the literal suffix ``refs: none``.
    """
    lines = [ln for ln in (l.strip() for l in raw.strip().splitlines()) if ln]
    if len(lines) < 3:
        return _downgrade(raw.strip(), "structure")
    if not lines[0].startswith("STATUS:") or not lines[1].startswith("CONFIDENCE:") \
            or not lines[2].startswith("RATIONALE:"):
        return _downgrade(raw.strip(), "structure")
    status = lines[0][len("STATUS:"):].strip()
    confidence = lines[1][len("CONFIDENCE:"):].strip()
    rationale = " ".join([lines[2][len("RATIONALE:"):].strip()] + lines[3:]).strip()
    if status not in PAIR_STATUS_TOKENS or confidence not in PAIR_CONFIDENCE_TOKENS:
        return _downgrade(rationale, "vocabulary")

    m = re.search(r"refs:\s*(.+)$", rationale, re.IGNORECASE | re.DOTALL)
    if m is None:
        return _downgrade(rationale, "missing-refs-suffix")
    refs_text = m.group(1).strip()

    if status == "Not Regulated":
        if refs_text.lower() != "none":
            return _downgrade(rationale, "refs-on-notregulated")
        return PairVerdict(status, confidence, rationale, refs=())

    refs = tuple(r.strip() for r in refs_text.split(",") if r.strip())
    if not refs or refs_text.lower() == "none":
        return _downgrade(rationale, "regulated-without-refs")
    if context is not None and regulation is not None:
        for ref in refs:
            if not ref_resolves(ref, regulation, context):
                return _downgrade(rationale, "unresolvable-ref")
    return PairVerdict(status, confidence, rationale, refs=refs)


@dataclass
class VerdictCounts:
    formed: int = 0
    regulated: int = 0
    not_regulated: int = 0
    downgraded: int = 0
    by_confidence: dict = field(default_factory=dict)


def retain_final(verdicts: dict[str, PairVerdict]) -> tuple[list[str], VerdictCounts]:
    """Filter to the Regulated+High final set and tally status x confidence.

    Downgraded (parse-failure) verdicts are excluded from the
    'Labeled Regulated' tally; only model-asserted labels count there.
    """
    counts = VerdictCounts(formed=len(verdicts))
    final = []
    for pair_id in sorted(verdicts):
        v = verdicts[pair_id]
        if v.downgraded:
            counts.downgraded += 1
            continue
        if v.status == "Regulated":
            counts.regulated += 1
            counts.by_confidence[v.confidence] = counts.by_confidence.get(v.confidence, 0) + 1
            if v.confidence == "High":
                final.append(pair_id)
        else:
            counts.not_regulated += 1
    return final, counts
