"""Stage orchestration: resumable runs, manifests, and deterministic replay.

A run owns an output directory (guarded by a lock file) and records every
completed stage in ``manifest.json`` with input/output checksums. All
artifacts are written atomically (temp file + rename), so a run killed
mid-stage leaves no partial outputs and a rerun converges to the same
bytes. Replay mode serves every model call and registry page from the
cache and treats any miss as a hard error; no timestamps enter artifacts,
so two replays of the same cache are byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import random
from pathlib import Path

import requests

from . import audit as audit_mod
from .gates import (
    ContractViolation,
    PredictorMention,
    apply_sector_match_filter,
    parse_predictor_validation,
    parse_predictors,
    parse_rdc,
    parse_relevance,
    parse_sector,
)
from .ingest import (
    RegistryClient,
    RegistryConfig,
    dump_corpus_jsonl,
    load_corpus_jsonl,
    merge_dedup,
)
from .legal import Catalog, segment_passages, tag_passage
from .model_client import CacheMiss, LiveModelClient, ReplayModelClient
from .pairing import (
    assemble_context,
    build_candidate_pairs,
    parse_verdict,
    retain_final,
)
from .stats import (
    derived_effects,
    fit_gee_ar1_panel,
    build_panel,
    fit_poisson_its,
    report_tables,
)
from .vocab import REGULATIONS, SECTORS

PROMPT_VERSION = "v1"

STAGE_ORDER = (
    "ingest", "screen", "sectors", "extract", "validate-predictors",
    "map-rdc", "catalog", "pairs", "audit-plan", "audit-metrics",
    "correct", "stats", "report",
)

# Stages whose artifacts each stage consumes (DAG edges).
STAGE_DEPS = {
    "ingest": (),
    "screen": ("ingest",),
    "sectors": ("screen",),
    "extract": ("sectors",),
    "validate-predictors": ("extract",),
    "map-rdc": ("validate-predictors",),
    "catalog": (),
    "pairs": ("map-rdc", "catalog"),
    "audit-plan": ("ingest",),
    "audit-metrics": ("audit-plan",),
    "correct": ("pairs",),
    "stats": ("pairs", "correct"),
    "report": ("pairs", "correct"),
}


class PipelineError(Exception):
    exit_code = 1


class ViolationBudgetError(PipelineError):
    exit_code = 2


class CacheMissError(PipelineError):
    exit_code = 3


class ConfigError(PipelineError):
    exit_code = 4


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def write_json(path: Path, obj) -> None:
    atomic_write_text(path, json.dumps(obj, ensure_ascii=False, indent=1, sort_keys=True))


def write_jsonl(path: Path, rows) -> None:
    text = "".join(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n" for r in rows)
    atomic_write_text(path, text)


def read_jsonl(path: Path) -> list:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh]


class RunManifest:
    """Per-run ledger of stage statuses, versions, and artifact checksums."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.data = {"mode": None, "seed": None, "stages": {}}
        if self.path.exists():
            self.data = json.loads(self.path.read_text(encoding="utf-8"))

    def save(self) -> None:
        write_json(self.path, self.data)

    def complete(self, stage: str, inputs: dict, outputs: list[Path],
                 counts=None, model_meta=None) -> None:
        self.data["stages"][stage] = {
            "status": "completed",
            "prompt_version": PROMPT_VERSION,
            "inputs": inputs,
            "outputs": {p.name: sha256_file(p) for p in outputs},
            "counts": counts or {},
            "model_meta": model_meta or {},
        }
        self.save()

    def is_complete(self, stage: str, out_dir: Path) -> bool:
        entry = self.data["stages"].get(stage)
        if not entry or entry.get("status") != "completed":
            return False
        for name, digest in entry["outputs"].items():
            path = out_dir / name
            if not path.exists() or sha256_file(path) != digest:
                return False
        return True


class _NoNetworkSession(requests.Session):
    """Session that refuses all traffic; used to enforce replay isolation."""

    def request(self, *args, **kwargs):
        raise requests.RequestException("network access is forbidden in replay mode")


class RunLock:
    """Exclusive ownership of an output directory for one pipeline run."""

    def __init__(self, out_dir: Path):
        self.path = Path(out_dir) / ".lock"

    def __enter__(self):
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise ConfigError(f"output directory is locked by another run ({self.path})")
        os.close(fd)
        return self

    def __exit__(self, *exc):
        self.path.unlink(missing_ok=True)


def load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        config = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    for key in ("registries", "documents"):
        if key not in config:
            raise ConfigError(f"config missing required key {key!r}")
    return config


class Pipeline:
    """One run over a fixed (config, mode, cache, out, seed) tuple."""

    def __init__(self, config: dict, mode: str, cache_dir, out_dir, seed: int = 0):
        if mode not in ("live", "replay"):
            raise ConfigError(f"mode must be 'live' or 'replay', got {mode!r}")
        self.config = config
        self.mode = mode
        self.cache_dir = Path(cache_dir)
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.seed = seed
        self.manifest = RunManifest(self.out / "manifest.json")
        self.manifest.data["mode"] = mode
        self.manifest.data["seed"] = seed
        if mode == "replay":
            self.model = ReplayModelClient(self.cache_dir)
        else:
            self.model = LiveModelClient(
                self.cache_dir,
                base_url=config.get("model_base_url", ""),
                model=config.get("model_name", ""),
            )
        self.budget = int(config.get("violation_budget", 1000))

    # -- plumbing -----------------------------------------------------------

    def _complete_reply(self, stage: str, item_id: str, prompt: str = "") -> str:
        try:
            reply, _ = self.model.complete(stage, item_id, prompt, PROMPT_VERSION)
        except CacheMiss as exc:
            raise CacheMissError(str(exc))
        return reply

    def _check_budget(self, stage: str, violations: int) -> None:
        if violations > self.budget:
            raise ViolationBudgetError(
                f"{stage}: {violations} contract violations exceed budget {self.budget}"
            )

    def _require(self, stage: str) -> None:
        for dep in STAGE_DEPS[stage]:
            if self.manifest.data["stages"].get(dep, {}).get("status") != "completed":
                raise ConfigError(f"stage {stage!r} requires completed stage {dep!r}")

    def _inputs(self, *paths: Path) -> dict:
        return {p.name: sha256_file(p) for p in paths if p.exists()}

    def run_stage(self, stage: str) -> None:
        if stage not in STAGE_ORDER:
            raise ConfigError(f"unknown stage {stage!r}")
        self._require(stage)
        getattr(self, "_stage_" + stage.replace("-", "_"))()

    def run_all(self, stages=None) -> None:
        for stage in stages or [s for s in STAGE_ORDER if s != "audit-metrics"
                                or self.config.get("audit_ledger")]:
            if self.manifest.is_complete(stage, self.out):
                continue
            self.run_stage(stage)

    # -- stages -------------------------------------------------------------

    def _stage_ingest(self) -> None:
        records = []
        quarantined = []
        registry_names = []
        for reg_cfg in self.config["registries"]:
            config = RegistryConfig(
                name=reg_cfg["name"], base_url=reg_cfg["base_url"],
                page_size=reg_cfg.get("page_size", 100),
                rate_per_sec=0 if self.mode == "replay" else reg_cfg.get("rate_per_sec", 10),
            )
            registry_names.append(config.name)
            session = _NoNetworkSession() if self.mode == "replay" else None
            client = RegistryClient(config, self.cache_dir / "registry", session=session)
            for sector in self.config.get("sectors", SECTORS):
                try:
                    records.extend(client.fetch_all(sector))
                except requests.RequestException as exc:
                    if self.mode == "replay":
                        raise CacheMissError(
                            f"registry page missing from cache: {config.name}/{sector}: {exc}"
                        )
                    raise
            quarantined.extend(client.quarantine)
        corpus, strata, merge_quarantine = merge_dedup(records, registry_names)
        dump_corpus_jsonl(corpus, self.out / "corpus.jsonl.tmp")
        os.replace(self.out / "corpus.jsonl.tmp", self.out / "corpus.jsonl")
        write_json(self.out / "strata.json",
                   {"counts": strata.counts, "total": strata.total,
                    "quarantined": len(quarantined) + len(merge_quarantine)})
        self.manifest.complete(
            "ingest", inputs={}, outputs=[self.out / "corpus.jsonl", self.out / "strata.json"],
            counts={"records": strata.total},
        )

    def _stage_screen(self) -> None:
        corpus = load_corpus_jsonl(self.out / "corpus.jsonl")
        relevant, not_relevant, violations = [], 0, 0
        for rec in sorted(corpus, key=lambda r: r.doi):
            if not rec.has_abstract:
                not_relevant += 1  # abstract-only screening: no text, no pass
                continue
            try:
                verdict = parse_relevance(self._complete_reply("relevance", rec.doi))
            except ContractViolation:
                violations += 1
                continue
            if verdict == "Relevant":
                relevant.append(rec.doi)
            else:
                not_relevant += 1
        self._check_budget("screen", violations)
        counts = {"relevant": len(relevant), "not_relevant": not_relevant,
                  "violations": violations}
        write_json(self.out / "relevant_dois.json", relevant)
        write_json(self.out / "screen.json", counts)
        self.manifest.complete(
            "screen", inputs=self._inputs(self.out / "corpus.jsonl"),
            outputs=[self.out / "relevant_dois.json", self.out / "screen.json"],
            counts=counts,
        )

    def _stage_sectors(self) -> None:
        corpus = {r.doi: r for r in load_corpus_jsonl(self.out / "corpus.jsonl")}
        relevant = json.loads((self.out / "relevant_dois.json").read_text())
        labels, assigned_counts, quarantined = [], {}, []
        for doi in relevant:
            raw = self._complete_reply("sector", doi)
            try:
                label = parse_sector(raw, doi=doi)
            except ContractViolation as exc:
                quarantined.append({"doi": doi, "raw": exc.raw})
                continue
            labels.append(label)
            assigned_counts[label.assigned] = assigned_counts.get(label.assigned, 0) + 1
        included, matched_counts = apply_sector_match_filter(
            labels, [corpus[d] for d in relevant]
        )
        counts = {"assigned": assigned_counts, "quarantined": len(quarantined),
                  "included": len(included), "matched": matched_counts}
        write_json(self.out / "included_dois.json", sorted(r.doi for r in included))
        write_json(self.out / "sectors.json", counts)
        self.manifest.complete(
            "sectors", inputs=self._inputs(self.out / "relevant_dois.json"),
            outputs=[self.out / "included_dois.json", self.out / "sectors.json"],
            counts={"included": len(included), "quarantined": len(quarantined)},
        )

    def _stage_extract(self) -> None:
        corpus = {r.doi: r for r in load_corpus_jsonl(self.out / "corpus.jsonl")}
        included = json.loads((self.out / "included_dois.json").read_text())
        rows, violations = [], 0
        for doi in included:
            raw = self._complete_reply("extract", doi)
            try:
                mentions = parse_predictors(raw, corpus[doi].abstract, doi=doi)
            except ContractViolation:
                violations += 1
                continue
            rows.extend({"doi": m.doi, "name": m.name, "evidence": m.evidence}
                        for m in mentions)
        self._check_budget("extract", violations)
        write_jsonl(self.out / "predictors.jsonl", rows)
        self.manifest.complete(
            "extract", inputs=self._inputs(self.out / "included_dois.json"),
            outputs=[self.out / "predictors.jsonl"],
            counts={"mentions": len(rows), "violations": violations},
        )

    def _stage_validate_predictors(self) -> None:
        included = json.loads((self.out / "included_dois.json").read_text())
        valid, not_valid, violations = [], 0, 0
        for doi in included:
            raw = self._complete_reply("validate", doi)
            try:
                verdict = parse_predictor_validation(raw)
            except ContractViolation:
                # Conservative gate: violation counts as Not valid but is
                # tallied separately so the violation rate stays observable.
                violations += 1
                not_valid += 1
                continue
            if verdict == "Valid":
                valid.append(doi)
            else:
                not_valid += 1
        self._check_budget("validate-predictors", violations)
        counts = {"valid": len(valid), "not_valid": not_valid, "violations": violations}
        write_json(self.out / "valid_dois.json", valid)
        write_json(self.out / "validation.json", counts)
        self.manifest.complete(
            "validate-predictors", inputs=self._inputs(self.out / "predictors.jsonl"),
            outputs=[self.out / "valid_dois.json", self.out / "validation.json"],
            counts=counts,
        )

    def _stage_map_rdc(self) -> None:
        valid = set(json.loads((self.out / "valid_dois.json").read_text()))
        mentions = [r for r in read_jsonl(self.out / "predictors.jsonl")
                    if r["doi"] in valid]
        unique_names = sorted({m["name"] for m in mentions})
        mapping, violations = {}, 0
        for name in unique_names:
            raw = self._complete_reply("rdc", name)
            try:
                rdc, rationale = parse_rdc(raw)
            except ContractViolation:
                violations += 1
                continue
            mapping[name] = {"rdc": rdc, "rationale": rationale}
        self._check_budget("map-rdc", violations)
        # Both deduplication scopes are reported: per-DOI instances and
        # globally unique names (they differ when a name recurs across DOIs).
        accounting = {"instances": len(mentions), "unique_names": len(unique_names),
                      "violations": violations}
        write_json(self.out / "rdc_map.json", mapping)
        write_json(self.out / "rdc_accounting.json", accounting)
        self.manifest.complete(
            "map-rdc", inputs=self._inputs(self.out / "valid_dois.json",
                                           self.out / "predictors.jsonl"),
            outputs=[self.out / "rdc_map.json", self.out / "rdc_accounting.json"],
            counts=accounting,
        )

    def _stage_catalog(self) -> None:
        catalog = Catalog()
        dropped, violations = 0, 0
        inputs = {}
        for reg in REGULATIONS:
            doc_path = self.config["documents"].get(reg)
            if doc_path is None or not Path(doc_path).exists():
                raise ConfigError(f"no document configured for regulation {reg!r}")
            document = Path(doc_path).read_text(encoding="utf-8")
            inputs[Path(doc_path).name] = sha256_file(doc_path)
            for ref, text in segment_passages(document, reg):
                raw = self._complete_reply("passage", f"{reg}::{ref}")
                try:
                    passage = tag_passage(raw, reg, ref, text)
                except ContractViolation:
                    violations += 1
                    continue
                if passage is None:
                    dropped += 1
                else:
                    catalog.add(passage)
        self._check_budget("catalog", violations)
        catalog.dump_jsonl(self.out / "catalog.jsonl.tmp")
        os.replace(self.out / "catalog.jsonl.tmp", self.out / "catalog.jsonl")
        self.manifest.complete(
            "catalog", inputs=inputs, outputs=[self.out / "catalog.jsonl"],
            counts={"passages": len(catalog.passages), "dropped": dropped,
                    "violations": violations},
        )

    def _load_mentions_with_rdc(self) -> list[PredictorMention]:
        valid = set(json.loads((self.out / "valid_dois.json").read_text()))
        mapping = json.loads((self.out / "rdc_map.json").read_text())
        mentions = []
        for row in sorted(read_jsonl(self.out / "predictors.jsonl"),
                          key=lambda r: r["doi"]):
            if row["doi"] in valid and row["name"] in mapping:
                mentions.append(PredictorMention(
                    doi=row["doi"], name=row["name"], evidence=row["evidence"],
                    rdc=mapping[row["name"]]["rdc"],
                ))
        return mentions

    def _stage_pairs(self) -> None:
        corpus = {r.doi: r for r in load_corpus_jsonl(self.out / "corpus.jsonl")}
        catalog = Catalog.load_jsonl(self.out / "catalog.jsonl")
        mentions = self._load_mentions_with_rdc()
        pairs = build_candidate_pairs(mentions, catalog)
        verdict_rows, verdicts = [], {}
        for pair in pairs:
            context = assemble_context(pair, catalog)
            raw = self._complete_reply("pair", pair.pair_id)
            v = parse_verdict(raw, regulation=pair.regulation, context=context)
            verdicts[pair.pair_id] = v
            verdict_rows.append({
                "pair_id": pair.pair_id, "doi": pair.doi, "predictor": pair.predictor,
                "rdc": pair.rdc, "regulation": pair.regulation, "status": v.status,
                "confidence": v.confidence, "downgraded": v.downgraded,
                "parse_flags": sorted(v.parse_flags),
            })
        final_ids, counts = retain_final(verdicts)
        by_id = {r["pair_id"]: r for r in verdict_rows}
        final_rows = []
        for pair_id in final_ids:
            row = by_id[pair_id]
            rec = corpus[row["doi"]]
            final_rows.append({
                "doi": row["doi"], "predictor": row["predictor"], "rdc": row["rdc"],
                "regulation": row["regulation"], "year": rec.year,
                "sector": rec.searched_sector,
            })
        write_jsonl(self.out / "verdicts.jsonl", verdict_rows)
        write_jsonl(self.out / "final_pairs.jsonl", final_rows)
        pair_counts = {
            "formed": counts.formed, "regulated": counts.regulated,
            "not_regulated": counts.not_regulated, "downgraded": counts.downgraded,
            "by_confidence": counts.by_confidence, "final": len(final_rows),
        }
        write_json(self.out / "pair_counts.json", pair_counts)
        self.manifest.complete(
            "pairs", inputs=self._inputs(self.out / "rdc_map.json",
                                         self.out / "catalog.jsonl"),
            outputs=[self.out / "verdicts.jsonl", self.out / "final_pairs.jsonl",
                     self.out / "pair_counts.json"],
            counts=pair_counts,
        )

    def _stage_audit_plan(self) -> None:
        strata = json.loads((self.out / "strata.json").read_text())["counts"]
        n = int(self.config.get("audit_sample_size", 1000))
        plan = audit_mod.plan_sample(strata, n)
        write_json(self.out / "audit_plan.json", {
            "strata": strata, "allocations": plan.allocations,
            "weights": plan.weights, "total": plan.total,
        })
        outputs = [self.out / "audit_plan.json"]
        outputs += self._export_audit_tasks(plan)
        self.manifest.complete(
            "audit-plan", inputs=self._inputs(self.out / "strata.json"),
            outputs=outputs, counts={"total": plan.total},
        )

    def _export_audit_tasks(self, plan) -> list[Path]:
        """Blinded task CSVs per stage for offline labeling."""
        corpus = load_corpus_jsonl(self.out / "corpus.jsonl")
        rng = random.Random(self.seed)
        by_stratum: dict[str, list] = {}
        for rec in sorted(corpus, key=lambda r: r.doi):
            by_stratum.setdefault(rec.registry, []).append(rec)
        sampled = []
        for stratum in sorted(plan.allocations):
            pool = by_stratum.get(stratum, [])
            take = min(plan.allocations[stratum], len(pool))
            sampled.extend((stratum, rec) for rec in rng.sample(pool, take))

        paths = []
        path = self.out / "audit_tasks_relevance.csv"
        with open(path.with_name(path.name + ".tmp"), "w", newline="",
                  encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["task_id", "stage", "stratum", "payload", "label"])
            for i, (stratum, rec) in enumerate(sampled):
                task = audit_mod.blind_view(
                    {"title": rec.title, "abstract": rec.abstract, "venue": rec.venue},
                    "relevance", f"rel-{i:04d}", stratum,
                )
                writer.writerow([task.task_id, task.stage, task.stratum,
                                 json.dumps(task.payload, sort_keys=True), ""])
        os.replace(path.with_name(path.name + ".tmp"), path)
        paths.append(path)
        return paths

    def _stage_audit_metrics(self) -> None:
        ledger_path = self.config.get("audit_ledger")
        if not ledger_path or not Path(ledger_path).exists():
            raise ConfigError("audit-metrics requires config key 'audit_ledger' "
                              "pointing at the label ledger JSONL")
        ai_path = self.config.get("audit_ai_labels")
        if not ai_path or not Path(ai_path).exists():
            raise ConfigError("audit-metrics requires config key 'audit_ai_labels' "
                              "mapping task ids to AI labels and weights")
        ledger = read_jsonl(Path(ledger_path))
        ai = json.loads(Path(ai_path).read_text(encoding="utf-8"))
        per_stage: dict[str, list] = {}
        for row in ledger:
            meta = ai.get(row["task_id"])
            if meta is None:
                continue
            per_stage.setdefault(row["stage"], []).append(
                (meta["ai_label"], row["label"], float(meta.get("weight", 1.0)))
            )
        metrics = {}
        for stage, labels in sorted(per_stage.items()):
            positive = {"relevance": "Relevant", "predictor": "Valid",
                        "pair-status": "Regulated"}.get(stage)
            kappa = audit_mod.cohen_kappa(labels)
            entry = {"n": len(labels), "kappa": kappa.kappa,
                     "p_o": kappa.p_o, "p_e": kappa.p_e, "flags": sorted(kappa.flags)}
            if positive:
                m = audit_mod.weighted_confusion(labels, positive_label=positive)
                entry.update(precision=m.precision, recall=m.recall,
                             miss_rate=m.miss_rate)
            metrics[stage] = entry
        write_json(self.out / "audit_metrics.json", metrics)
        self.manifest.complete(
            "audit-metrics", inputs=self._inputs(Path(ledger_path)),
            outputs=[self.out / "audit_metrics.json"],
            counts={s: m["n"] for s, m in metrics.items()},
        )

    def _precisions(self) -> dict:
        metrics_path = self.out / "audit_metrics.json"
        if metrics_path.exists():
            metrics = json.loads(metrics_path.read_text(encoding="utf-8"))
            if all(s in metrics and metrics[s].get("precision") is not None
                   for s in ("relevance", "sector", "predictor", "rdc", "pair-status")):
                return {s: metrics[s]["precision"] for s in metrics}
        precisions = self.config.get("precisions")
        if not precisions:
            raise ConfigError("correct stage needs audit metrics or config "
                              "key 'precisions' with the five stage precisions")
        return precisions

    def _stage_correct(self) -> None:
        p = self._precisions()
        ms = audit_mod.compound_multiplier(
            p["relevance"], p["sector"], p["predictor"], p["rdc"], p["pair-status"],
        )
        pair_counts = json.loads((self.out / "pair_counts.json").read_text())
        high = pair_counts["by_confidence"].get("High", 0)
        adjusted = audit_mod.adjust_counts(high, ms, kind="pairs")
        write_json(self.out / "multipliers.json", {
            "precisions": p, "m_other": ms.m_other, "S": ms.compound,
            "regulated_high": high, "adjusted_regulated_high": adjusted.value,
        })
        self.manifest.complete(
            "correct", inputs=self._inputs(self.out / "pair_counts.json"),
            outputs=[self.out / "multipliers.json"],
            counts={"regulated_high": high},
        )

    def _multiplier_set(self) -> audit_mod.MultiplierSet:
        m = json.loads((self.out / "multipliers.json").read_text())
        p = m["precisions"]
        return audit_mod.compound_multiplier(
            p["relevance"], p["sector"], p["predictor"], p["rdc"], p["pair-status"],
        )

    def _stage_stats(self) -> None:
        corpus = load_corpus_jsonl(self.out / "corpus.jsonl")
        final_pairs = read_jsonl(self.out / "final_pairs.jsonl")
        ms = self._multiplier_set()
        panel = build_panel(final_pairs, corpus, ms)
        glm = fit_poisson_its(panel)
        gee = fit_gee_ar1_panel(panel, corr="ar1")
        out = {
            "panel_cells": len(panel),
            "glm": {
                "names": glm.names, "coef": [float(b) for b in glm.coef],
                "robust_se": [float(s) for s in glm.se(robust=True)],
                "deviance": glm.deviance, "dispersion": glm.dispersion,
                "n_clusters": glm.n_clusters,
                "effects": derived_effects(glm),
            },
            "gee_ar1": {
                "names": gee.names, "coef": [float(b) for b in gee.coef],
                "robust_se": [float(s) for s in gee.se(robust=True)],
            },
        }
        write_json(self.out / "stats.json", out)
        self.manifest.complete(
            "stats", inputs=self._inputs(self.out / "final_pairs.jsonl",
                                         self.out / "multipliers.json"),
            outputs=[self.out / "stats.json"], counts={"panel_cells": len(panel)},
        )

    def _stage_report(self) -> None:
        corpus = load_corpus_jsonl(self.out / "corpus.jsonl")
        final_pairs = read_jsonl(self.out / "final_pairs.jsonl")
        ms = self._multiplier_set()
        tables = report_tables(final_pairs, ms, corpus=corpus)
        report_dir = self.out / "report"
        report_dir.mkdir(exist_ok=True)
        outputs = []
        for name, frame in sorted(tables.items()):
            path = report_dir / f"{name}.csv"
            atomic_write_text(path, frame.to_csv())
            outputs.append(path)
        self.manifest.complete(
            "report", inputs=self._inputs(self.out / "final_pairs.jsonl",
                                          self.out / "multipliers.json"),
            outputs=outputs, counts={"tables": len(outputs)},
        )


def emit_report(out_dir, selection) -> list[Path]:
    """Copy selected stats artifacts into a versioned bundle directory.

    An empty selection writes nothing and succeeds; a selection whose
    upstream table is absent raises naming the missing dependency.
    """
    out = Path(out_dir)
    bundle = out / "bundle"
    written = []
    sources = {"multipliers": out / "multipliers.json", "stats": out / "stats.json"}
    for name in selection:
        src = sources.get(name, out / "report" / f"{name}.csv")
        if not src.exists():
            raise PipelineError(f"report bundle needs missing upstream artifact: {src.name}")
        bundle.mkdir(exist_ok=True)
        dest = bundle / src.name
        atomic_write_text(dest, src.read_text(encoding="utf-8"))
        written.append(dest)
    return written
