"""Acceptance suite: one test and one printed PASS/FAIL line per criterion.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
lines. Tolerances are pinned in the assertions below.
"""

import json
import random
import string
import time
from contextlib import contextmanager

import numpy as np
import pytest

from regmap.audit import (
    AuditTask,
    BlindingError,
    WeightedConfusion,
    adjust_counts,
    blind_view,
    cohen_kappa,
    compound_multiplier,
    kappa_from_confusion,
    moe_fpc,
    sample_size_for_moe,
    weighted_confusion,
)
from regmap.gates import (
    ContractViolation,
    parse_predictor_validation,
    parse_predictors,
    parse_rdc,
    parse_relevance,
    parse_sector,
)
from regmap.pairing import parse_verdict
from regmap.stats import chi2_suite, bh_fdr, fit_poisson_its, fit_gee_ar1_panel
from regmap.stats.panel import PanelCell
from regmap.vocab import (
    PAIR_CONFIDENCE_TOKENS,
    PAIR_STATUS_TOKENS,
    PREDICTOR_VALIDATION_TOKENS,
    RDC_CLASSES,
    RELEVANCE_TOKENS,
    SECTOR_LABELS,
)

from conftest import run_replay
from test_glm import direct_ml_oracle, simulate_panel, synth_panel
from test_gee import simulate_ar1_panel
from test_contingency import brute_force_bh


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"FAIL: {name}")
        raise
    print(f"PASS: {name}")


def test_moe_fpc_criterion():
    with criterion("MOE/FPC published values and <1ms runtime"):
        assert moe_fpc(0.5, 1000, 19405) == pytest.approx(0.03018, abs=1e-4)
        n0, n_fpc = sample_size_for_moe(0.03, 0.5, 19405)
        assert n0 == pytest.approx(1067.11, abs=0.01)
        assert n_fpc == pytest.approx(1011.54, abs=0.01)
        best = min(
            _timed(lambda: moe_fpc(0.5, 1000, 19405)) for _ in range(20)
        )
        assert best < 1e-3  # seconds


def _timed(fn):
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


RELEVANCE_CM = WeightedConfusion(tp=7639.846, fp=480.093, fn=96.158, tn=11166.809)
PREDICTOR_CM = WeightedConfusion(tp=375.675, fp=118.631, fn=139.771, tn=4027.922)


def _labels(cm):
    return [("pos", "pos", cm.tp), ("pos", "neg", cm.fp),
            ("neg", "pos", cm.fn), ("neg", "neg", cm.tn)]


def test_weighted_kappa_relevance_criterion():
    with criterion("Weighted kappa, relevance stage"):
        k = kappa_from_confusion(RELEVANCE_CM)
        assert k.kappa == pytest.approx(0.938529, abs=1e-5)
        assert k.p_o == pytest.approx(0.970270, abs=1e-5)
        assert k.p_e == pytest.approx(0.516359, abs=1e-5)
        m = weighted_confusion(_labels(RELEVANCE_CM), positive_label="pos")
        assert m.precision == pytest.approx(0.940875, abs=1e-5)
        assert m.miss_rate == pytest.approx(0.008538, abs=1e-5)


def test_weighted_kappa_predictor_criterion():
    with criterion("Weighted kappa, predictor stage"):
        k = kappa_from_confusion(PREDICTOR_CM)
        assert k.kappa == pytest.approx(0.713029, abs=1e-5)
        m = weighted_confusion(_labels(PREDICTOR_CM), positive_label="pos")
        assert m.precision == pytest.approx(0.760005, abs=1e-5)
        assert m.recall == pytest.approx(0.728834, abs=1e-5)


def test_multiplier_chain_criterion():
    with criterion("Multiplier chain m_other / S / corrected total"):
        ms = compound_multiplier(0.940875, 0.923450, 0.760005, 0.800000, 0.785714)
        assert ms.m_other == pytest.approx(0.528265, abs=1e-5)
        assert ms.compound == pytest.approx(0.415065, abs=1e-5)
        adj = adjust_counts(2329, ms, kind="pairs")
        assert adj.value == pytest.approx(966.687, abs=0.01)


def test_its_invariances_criterion():
    with criterion("ITS invariances (a)-(d)"):
        # (a) constant-rate panel -> zero slopes.
        fit = fit_poisson_its(synth_panel(c=0.5))
        idx = {n: i for i, n in enumerate(fit.names)}
        for name in ("rel", "post", "rel_post"):
            assert abs(fit.coef[idx[name]]) < 1e-8
        # (b) scaling Y by S moves intercepts by ln S only.
        rng = np.random.default_rng(42)
        panel = simulate_panel(rng, (-0.01, 0.05, -0.03))
        s = 0.415065
        scaled = [PanelCell(c.regulation, c.year, c.adjusted_count * s,
                            c.raw_distinct, c.exposure, c.rel, c.post)
                  for c in panel]
        f1, f2 = fit_poisson_its(panel), fit_poisson_its(scaled)
        for name, b1, b2 in zip(f1.names, f1.coef, f2.coef):
            if name.startswith("alpha["):
                assert b2 - b1 == pytest.approx(np.log(s), abs=1e-8)
            else:
                assert abs(b2 - b1) < 1e-8
        # (c) IRLS matches a direct likelihood maximizer on 20 seeded panels.
        for seed in range(20):
            rng = np.random.default_rng(1000 + seed)
            p = simulate_panel(rng, (-0.01, 0.05, -0.03), n_regs=3,
                               years=range(2000, 2020))
            fit = fit_poisson_its(p)
            oracle, names = direct_ml_oracle(p)
            assert names == fit.names
            assert np.max(np.abs(fit.coef - oracle)) < 1e-6
        # (d) five-year post-slope implication.
        assert np.exp(5 * np.log(0.958)) == pytest.approx(0.807, abs=0.002)
        assert abs(np.exp(5 * np.log(0.958)) - 0.808) < 0.002


def test_gee_consistency_criterion():
    with criterion("GEE independence identity and AR(1) recovery"):
        rng = np.random.default_rng(21)
        panel = simulate_panel(rng, (-0.01, 0.05, -0.03))
        glm = fit_poisson_its(panel)
        gee = fit_gee_ar1_panel(panel, corr="independence")
        assert np.max(np.abs(glm.coef - gee.coef)) < 1e-6
        betas = (-0.01, 0.06, -0.04)
        for seed in (100, 102, 103):
            rng = np.random.default_rng(seed)
            p = simulate_ar1_panel(rng, betas, n_regs=12)
            fit = fit_gee_ar1_panel(p, corr="ar1")
            idx = {n: i for i, n in enumerate(fit.names)}
            se = fit.se(robust=True)
            for name, true in zip(("rel", "post", "rel_post"), betas):
                assert abs(fit.coef[idx[name]] - true) <= 3 * se[idx[name]]


def test_contingency_suite_criterion():
    with criterion("Contingency suite: exact table, independence, BH, E>=5"):
        res = chi2_suite([[10, 0], [0, 10]])
        assert res.chi2 == pytest.approx(20.0)
        assert res.cramers_v == pytest.approx(1.0)
        assert np.allclose(np.abs(res.residuals), 2.2360, atol=1e-4)
        rows, cols = np.array([2.0, 3.0, 5.0]), np.array([1.0, 4.0, 2.0, 3.0])
        assert chi2_suite(np.outer(rows, cols)).chi2 < 1e-9
        rng = np.random.default_rng(12)
        for _ in range(1000):
            p = rng.uniform(size=rng.integers(1, 20)).tolist()
            adj, _ = bh_fdr(p)
            assert np.allclose(adj, brute_force_bh(p))
        small = chi2_suite(np.array([[50.0, 1.0, 40.0], [45.0, 2.0, 55.0]]))
        assert not small.tested_mask[:, 1].any()


def test_pipeline_determinism_criterion(replay_run, tmp_path):
    with criterion("Pipeline determinism: released-scale counts, byte-identical, <5min"):
        out = replay_run["out"]
        strata = json.loads((out / "strata.json").read_text())
        screen = json.loads((out / "screen.json").read_text())
        sectors = json.loads((out / "sectors.json").read_text())
        validation = json.loads((out / "validation.json").read_text())
        pairs = json.loads((out / "pair_counts.json").read_text())
        assert strata["total"] == 19405
        assert screen["relevant"] == 8386
        assert sectors["included"] == 4686
        assert validation["valid"] == 596
        assert pairs["formed"] == 9256
        assert pairs["regulated"] == 2713
        assert pairs["by_confidence"]["High"] == 2329
        assert replay_run["elapsed"] < 300  # seconds, offline
        out2 = run_replay(replay_run["root"], tmp_path / "accept-run2", seed=7)
        from test_pipeline import tree_bytes
        assert tree_bytes(out) == tree_bytes(out2)


def _mutate(rng, token: str) -> str:
    ops = rng.randint(0, 6)
    if ops == 0:
        return token + rng.choice([".", "!", "?", ",", ";"])
    if ops == 1:
        return token.upper() if token.upper() != token else token.lower()
    if ops == 2:
        return rng.choice(["The answer is ", "Label: ", ">> "]) + token
    if ops == 3:
        return token + rng.choice([" indeed", " (final)", " label"])
    if ops == 4:
        i = rng.randrange(len(token))
        return token[:i] + rng.choice(string.ascii_letters) + token[i + 1:]
    if ops == 5:
        return "".join(rng.sample(token, len(token)))
    return rng.choice(["", " ", "null", "N/A", "unknown"])


def test_parser_strictness_criterion():
    with criterion("Parser strictness: 10^4 mutations per contract, zero coercions"):
        rng = random.Random(77)
        token_parsers = [
            (parse_relevance, RELEVANCE_TOKENS, lambda v: v),
            (lambda raw: parse_sector(raw, doi="d"), SECTOR_LABELS,
             lambda v: v.assigned),
            (parse_predictor_validation, PREDICTOR_VALIDATION_TOKENS, lambda v: v),
        ]
        for parser, vocab, extract in token_parsers:
            for _ in range(10_000):
                raw = _mutate(rng, rng.choice(vocab))
                try:
                    value = extract(parser(raw))
                except ContractViolation:
                    continue
                # Accepted replies must be exactly a vocabulary token after
                # whitespace trimming: nothing was repaired into a label.
                assert raw.strip() == value and value in vocab
        for _ in range(10_000):
            payload = {"class": rng.choice(RDC_CLASSES),
                       "rationale": "short reason"}
            raw = _mutate(rng, json.dumps(payload))
            try:
                rdc, rationale = parse_rdc(raw)
            except ContractViolation:
                continue
            assert rdc in RDC_CLASSES and len(rationale.split()) <= 15
        abstract = "The model uses age as an input. Accuracy is high."
        for _ in range(10_000):
            payload = {"predictors": [{"name": "age",
                                       "evidence": "The model uses age as an input."}]}
            raw = _mutate(rng, json.dumps(payload))
            try:
                mentions = parse_predictors(raw, abstract, doi="d")
            except ContractViolation:
                continue
            for m in mentions:
                assert m.evidence in abstract
                assert m.name.lower() in m.evidence.lower()
        for _ in range(10_000):
            status = rng.choice(PAIR_STATUS_TOKENS)
            conf = rng.choice(PAIR_CONFIDENCE_TOKENS)
            refs = "none" if status == "Not Regulated" else "Article 9"
            raw = _mutate(rng, f"STATUS: {status}\nCONFIDENCE: {conf}\n"
                               f"RATIONALE: Because. refs: {refs}")
            v = parse_verdict(raw)
            if not v.downgraded:
                assert v.status in PAIR_STATUS_TOKENS
                assert v.confidence in PAIR_CONFIDENCE_TOKENS
                assert (v.status == "Regulated") == bool(v.refs)


def test_blinding_criterion():
    with criterion("Blinding: 10^4 serialized tasks free of AI-namespace fields"):
        item = {
            "title": "Paper", "abstract": "We trained a tree.", "venue": "J",
            "keywords": ["k"], "predictor": "heart rate", "rdc": "Health_Clinical",
            "fragments": [{"regulation": "HIPAA", "article_ref": "§ 164.502",
                           "text": "health information"}],
            "predictors": [{"name": "heart rate", "evidence": "..."}],
            "ai_verdict": "Relevant", "model_meta": {"name": "x"},
            "raw_output": "Relevant", "confidence_score": 0.9,
        }
        rng = random.Random(5)
        stages = ["relevance", "sector", "predictor", "rdc", "pair-status"]
        for i in range(10_000):
            task = blind_view(item, rng.choice(stages), f"t{i}", "crossref")
            flat = json.dumps(task.payload).lower()
            for frag in ("ai_", "verdict", "raw_output", "model", "prompt",
                         "confidence", "rationale"):
                assert f'"{frag}' not in flat
        with pytest.raises(BlindingError):
            AuditTask("t", "relevance", "s", {"title": "x", "ai_label": "y"})
