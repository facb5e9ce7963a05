"""Stratified audit design, blinded task packaging, and correction multipliers.

The audit draws a proportional stratified sample of records, shows a human
reviewer blinded evidence (never the AI labels), and compares human and AI
labels with design weights w_h = N_h / n_h. Stage-wise weighted precisions
chain into a single compound multiplier S applied to automated
Regulated+High pair tallies at reporting time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .vocab import AUDIT_STAGES

Z_975 = 1.96


def moe_fpc(p: float, n: int, N: int, fpc: bool = True) -> float:
    """95% margin of error for a proportion under SRS, with optional FPC.

    MOE = 1.96 * sqrt(p(1-p)/n) * sqrt((N-n)/(N-1)). The finite-population
    correction is on by default; ``fpc=False`` gives the plain SRS margin.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if not 1 <= n <= N:
        raise ValueError(f"need 1 <= n <= N, got n={n}, N={N}")
    moe = Z_975 * math.sqrt(p * (1.0 - p) / n)
    if fpc:
        moe *= math.sqrt((N - n) / (N - 1))
    return moe


def sample_size_for_moe(moe: float, p: float, N: int) -> tuple[float, float]:
    """SRS target n0 and its FPC-adjusted companion for a desired margin.

    n0 = z^2 p(1-p) / MOE^2 and n = n0 N / (n0 + N - 1).
    """
    if moe <= 0:
        raise ValueError("target margin must be positive")
    n0 = Z_975**2 * p * (1.0 - p) / moe**2
    return n0, n0 * N / (n0 + N - 1)


@dataclass(frozen=True)
class SamplePlan:
    strata: dict  # tag -> N_h
    allocations: dict  # tag -> n_h
    weights: dict  # tag -> w_h = N_h / n_h

    @property
    def total(self) -> int:
        return sum(self.allocations.values())


def plan_sample(strata: dict, n: int) -> SamplePlan:
    """Proportional allocation with largest-remainder rounding.

    ``strata`` maps stratum tag -> population size N_h. Every stratum with
    N_h >= 1 receives n_h >= 1 (an empty stratum cannot be allocated).
    """
    N = sum(strata.values())
    if n > N:
        raise ValueError(f"sample size {n} exceeds population {N}")
    if any(N_h < 0 for N_h in strata.values()):
        raise ValueError("stratum sizes must be nonnegative")
    shares = {h: n * N_h / N for h, N_h in strata.items() if N_h > 0}
    if n < len(shares):
        raise ValueError("sample too small to cover every nonempty stratum")
    alloc = {h: max(1, math.floor(s)) for h, s in shares.items()}
    remainders = sorted(shares, key=lambda h: (shares[h] - math.floor(shares[h]), h), reverse=True)
    i = 0
    while sum(alloc.values()) < n:
        h = remainders[i % len(remainders)]
        alloc[h] += 1
        i += 1
    while sum(alloc.values()) > n:
        h = min(remainders, key=lambda h: (shares[h] - alloc[h], h))
        if alloc[h] > 1:
            alloc[h] -= 1
    weights = {h: strata[h] / alloc[h] for h in alloc}
    return SamplePlan(strata=dict(strata), allocations=alloc, weights=weights)


# --- Blinded task packaging -------------------------------------------------

# Key fragments that must never appear in a payload handed to the reviewer.
AI_NAMESPACE = (
    "ai_", "verdict", "status", "confidence", "rationale",
    "raw_output", "model", "prompt",
)

# Evidence fields shown per stage; anything else is withheld.
STAGE_EVIDENCE_FIELDS = {
    "relevance": ("title", "abstract", "venue"),
    "sector": ("title", "abstract", "keywords", "venue"),
    "predictor": ("title", "abstract", "predictors"),
    "rdc": ("predictor",),
    "pair-status": ("predictor", "rdc", "fragments"),
}


class BlindingError(ValueError):
    pass


def _scan_keys(obj, path=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            lk = str(k).lower()
            for frag in AI_NAMESPACE:
                if frag in lk:
                    raise BlindingError(f"AI-namespace key {path + str(k)!r} in blinded payload")
            _scan_keys(v, path + str(k) + ".")
    elif isinstance(obj, (list, tuple)):
        for v in obj:
            _scan_keys(v, path)


@dataclass(frozen=True)
class AuditTask:
    task_id: str
    stage: str
    stratum: str
    payload: dict

    def __post_init__(self):
        if self.stage not in AUDIT_STAGES:
            raise ValueError(f"unknown audit stage {self.stage!r}")
        _scan_keys(self.payload)


def blind_view(item: dict, stage: str, task_id: str, stratum: str) -> AuditTask:
    """Package one audited item into a blinded task.

    ``item`` may carry AI labels internally; only the stage's evidence
    fields are copied out, and the resulting payload must pass the
    AI-namespace key scan.
    """
    fields_ = STAGE_EVIDENCE_FIELDS.get(stage)
    if fields_ is None:
        raise ValueError(f"unknown audit stage {stage!r}")
    payload = {}
    for f in fields_:
        if f not in item:
            raise BlindingError(f"item missing required evidence field {f!r} for stage {stage}")
        payload[f] = item[f]
    # rdc is evidence at pair-status stage (the reviewer sees the class the
    # pair was formed on) even though its name overlaps nothing in the AI
    # namespace list.
    return AuditTask(task_id=task_id, stage=stage, stratum=stratum, payload=payload)


# --- Weighted agreement metrics --------------------------------------------


@dataclass(frozen=True)
class WeightedConfusion:
    tp: float
    fp: float
    fn: float
    tn: float

    @property
    def total(self) -> float:
        return self.tp + self.fp + self.fn + self.tn

    def as_matrix(self):
        return [[self.tp, self.fp], [self.fn, self.tn]]


@dataclass(frozen=True)
class ConfusionMetrics:
    confusion: WeightedConfusion
    precision: float | None
    recall: float | None
    miss_rate: float | None
    flags: tuple = ()


def weighted_confusion(labels, positive_label) -> ConfusionMetrics:
    """Weighted 2x2 confusion from (ai_label, human_label, weight) triples.

    Masses are weight sums; AI is the row rater, the human the column
    rater. Empty denominators flag the metric as undefined (None), never a
    silent zero.
    """
    tp = fp = fn = tn = 0.0
    for ai, human, w in labels:
        if w <= 0:
            raise ValueError("weights must be positive")
        if ai == positive_label and human == positive_label:
            tp += w
        elif ai == positive_label:
            fp += w
        elif human == positive_label:
            fn += w
        else:
            tn += w
    cm = WeightedConfusion(tp, fp, fn, tn)
    flags = []

    def ratio(num, den, name):
        if den == 0:
            flags.append(f"{name}-undefined")
            return None
        return num / den

    precision = ratio(tp, tp + fp, "precision")
    recall = ratio(tp, tp + fn, "recall")
    miss = ratio(fn, fn + tn, "miss_rate")
    return ConfusionMetrics(cm, precision, recall, miss, tuple(flags))


@dataclass(frozen=True)
class KappaResult:
    kappa: float | None
    p_o: float
    p_e: float
    flags: tuple = ()


def cohen_kappa(labels) -> KappaResult:
    """Weighted Cohen's kappa from (ai_label, human_label, weight) triples.

    Multi-class: categories are the union of both raters' labels, marginals
    are weighted. When both raters are constant (P_e = 1) kappa is
    undefined and flagged; when P_o = P_e with P_e < 1 kappa is exactly 0.
    """
    cats: list = []
    for ai, human, _ in labels:
        if ai not in cats:
            cats.append(ai)
        if human not in cats:
            cats.append(human)
    if len(cats) < 2:
        return KappaResult(None, 1.0, 1.0, ("kappa-undefined-single-category",))
    total = 0.0
    agree = 0.0
    ai_marg = {c: 0.0 for c in cats}
    hu_marg = {c: 0.0 for c in cats}
    for ai, human, w in labels:
        if w <= 0:
            raise ValueError("weights must be positive")
        total += w
        if ai == human:
            agree += w
        ai_marg[ai] += w
        hu_marg[human] += w
    p_o = agree / total
    p_e = sum(ai_marg[c] * hu_marg[c] for c in cats) / total**2
    if p_e == 1.0:
        return KappaResult(None, p_o, p_e, ("kappa-undefined-pe-one",))
    return KappaResult((p_o - p_e) / (1.0 - p_e), p_o, p_e)


def kappa_from_confusion(cm: WeightedConfusion) -> KappaResult:
    """Binary kappa straight from a weighted 2x2 confusion matrix."""
    labels = [
        ("pos", "pos", cm.tp) if cm.tp else None,
        ("pos", "neg", cm.fp) if cm.fp else None,
        ("neg", "pos", cm.fn) if cm.fn else None,
        ("neg", "neg", cm.tn) if cm.tn else None,
    ]
    return cohen_kappa([t for t in labels if t])


# --- Compound correction multiplier ----------------------------------------


@dataclass(frozen=True)
class MultiplierSet:
    prec_relevance: float
    prec_domain: float
    prec_predictor: float
    match_rdc: float
    prec_status: float
    per_regulation_phi: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("prec_relevance", "prec_domain", "prec_predictor",
                     "match_rdc", "prec_status"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")

    @property
    def m_other(self) -> float:
        return self.prec_relevance * self.prec_domain * self.prec_predictor * self.match_rdc

    @property
    def compound(self) -> float:
        return self.m_other * self.prec_status

    def s_r(self, regulation: str) -> float:
        """Per-regulation multiplier; falls back to S when phi_r is unknown."""
        phi = self.per_regulation_phi.get(regulation)
        if phi is None:
            return self.compound
        return self.m_other * phi


def compound_multiplier(prec_relevance, prec_domain, prec_predictor,
                        match_rdc, prec_status, per_regulation_phi=None) -> MultiplierSet:
    return MultiplierSet(
        prec_relevance, prec_domain, prec_predictor, match_rdc, prec_status,
        per_regulation_phi=dict(per_regulation_phi or {}),
    )


@dataclass(frozen=True)
class AdjustedCount:
    value: float
    scaled: bool
    note: str = ""


def adjust_counts(count: float, multipliers: MultiplierSet, kind: str,
                  regulation: str | None = None) -> AdjustedCount:
    """Scale a pair-level tally by S (or S_r); never scale unique-paper metrics.

    ``kind`` is 'pairs' or 'unique-papers'. Unique-paper metrics come back
    unchanged with an explicit 'unscaled' marker.
    """
    if count < 0:
        raise ValueError("counts must be nonnegative")
    if kind == "pairs":
        s = multipliers.s_r(regulation) if regulation is not None else multipliers.compound
        return AdjustedCount(count * s, scaled=True)
    if kind == "unique-papers":
        return AdjustedCount(
            float(count), scaled=False,
            note="unscaled: metric is defined over unique papers",
        )
    raise ValueError(f"unknown metric kind {kind!r}; scaling refused")
