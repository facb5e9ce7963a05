"""HTTP service for blind human labeling, plus CSV export/import.

Serves blinded audit tasks one at a time per stage with atomic claim
semantics (a claimed task is not re-served to concurrent sessions until
its claim times out), appends submitted labels to an append-only JSONL
ledger exactly once, and reports per-stage/per-stratum progress with the
remaining design-weight mass. Endpoints are versioned under /api/v1/.
"""

from __future__ import annotations

import csv
import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .audit import AuditTask
from .vocab import AUDIT_STAGES, STAGE_VOCABULARY

CLAIM_TIMEOUT_SEC = 300.0


@dataclass
class TaskStore:
    """In-memory task queue with claims and an append-only label ledger."""

    ledger_path: Path
    claim_timeout: float = CLAIM_TIMEOUT_SEC
    tasks: dict[str, AuditTask] = field(default_factory=dict)
    weights: dict[str, float] = field(default_factory=dict)  # task_id -> w_h
    order: list[str] = field(default_factory=list)
    _claims: dict[str, float] = field(default_factory=dict)
    _labeled: dict[str, dict] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def __post_init__(self):
        self.ledger_path = Path(self.ledger_path)
        if self.ledger_path.exists():
            with open(self.ledger_path, encoding="utf-8") as fh:
                for line in fh:
                    row = json.loads(line)
                    self._labeled[row["task_id"]] = row

    def add_task(self, task: AuditTask, weight: float = 1.0) -> None:
        self.tasks[task.task_id] = task
        self.weights[task.task_id] = weight
        self.order.append(task.task_id)

    def fetch_next(self, stage: str) -> AuditTask | None:
        """Atomically claim the next unlabeled, unclaimed task of a stage."""
        now = time.monotonic()
        with self._lock:
            for task_id in self.order:
                task = self.tasks[task_id]
                if task.stage != stage or task_id in self._labeled:
                    continue
                claimed_at = self._claims.get(task_id)
                if claimed_at is not None and now - claimed_at < self.claim_timeout:
                    continue
                self._claims[task_id] = now
                return task
        return None

    def release(self, task_id: str) -> None:
        with self._lock:
            self._claims.pop(task_id, None)

    def submit(self, task_id: str, label: str, reviewer: str, note: str = "") -> dict:
        """Append one label exactly once; a duplicate raises KeyError."""
        with self._lock:
            task = self.tasks.get(task_id)
            if task is None:
                raise LookupError(task_id)
            if task_id in self._labeled:
                raise KeyError(task_id)
            if label not in STAGE_VOCABULARY[task.stage]:
                raise ValueError(label)
            row = {
                "task_id": task_id,
                "stage": task.stage,
                "label": label,
                "reviewer": reviewer,
                "note": note,
                "timestamp": time.time(),
            }
            with open(self.ledger_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")
            self._labeled[task_id] = row
            self._claims.pop(task_id, None)
            return row

    def progress(self) -> dict:
        """Per-stage, per-stratum done/total and remaining weight mass."""
        out: dict[str, dict] = {}
        with self._lock:
            for task_id in self.order:
                task = self.tasks[task_id]
                stage = out.setdefault(task.stage, {})
                cell = stage.setdefault(task.stratum, {
                    "done": 0, "total": 0, "remaining_weight": 0.0,
                })
                cell["total"] += 1
                if task_id in self._labeled:
                    cell["done"] += 1
                else:
                    cell["remaining_weight"] += self.weights[task_id]
        return out


class FetchRequest(BaseModel):
    stage: str
    reviewer: str = ""


class SubmitRequest(BaseModel):
    task_id: str
    label: str
    reviewer: str = ""
    note: str = ""


def create_app(store: TaskStore) -> FastAPI:
    app = FastAPI(title="audit service")

    @app.post("/api/v1/fetch-next-task")
    def fetch_next_task(req: FetchRequest):
        if req.stage not in AUDIT_STAGES:
            raise HTTPException(status_code=400, detail=f"unknown stage {req.stage!r}")
        task = store.fetch_next(req.stage)
        if task is None:
            return {"done": True}
        return {
            "done": False,
            "task_id": task.task_id,
            "stage": task.stage,
            "stratum": task.stratum,
            "payload": task.payload,
            "options": list(STAGE_VOCABULARY[task.stage]),
        }

    @app.post("/api/v1/submit-label")
    def submit_label(req: SubmitRequest):
        try:
            row = store.submit(req.task_id, req.label, req.reviewer, req.note)
        except LookupError as exc:
            if isinstance(exc, KeyError):
                raise HTTPException(status_code=409, detail="task already labeled")
            raise HTTPException(status_code=404, detail="unknown task id")
        except ValueError:
            raise HTTPException(status_code=400, detail="label outside stage vocabulary")
        return {"ok": True, "task_id": row["task_id"], "label": row["label"]}

    @app.get("/api/v1/progress")
    def progress():
        return store.progress()

    return app


# -- CSV offline path --------------------------------------------------------

def export_tasks_csv(store: TaskStore, stage: str, path) -> int:
    """Write one stage's blinded tasks for offline labeling."""
    n = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["task_id", "stage", "stratum", "payload", "label"])
        for task_id in store.order:
            task = store.tasks[task_id]
            if task.stage != stage:
                continue
            writer.writerow([task.task_id, task.stage, task.stratum,
                             json.dumps(task.payload, sort_keys=True), ""])
            n += 1
    return n


def import_labels_csv(store: TaskStore, path, reviewer: str = "csv-import") -> int:
    """Replay offline labels into the ledger; skips rows without a label."""
    n = 0
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if not row.get("label"):
                continue
            store.submit(row["task_id"], row["label"], reviewer)
            n += 1
    return n


def load_tasks_from_plan(out_dir, ledger_path) -> TaskStore:
    """Build a TaskStore from the pipeline's exported audit artifacts."""
    out_dir = Path(out_dir)
    plan = json.loads((out_dir / "audit_plan.json").read_text(encoding="utf-8"))
    store = TaskStore(ledger_path=Path(ledger_path))
    csv_path = out_dir / "audit_tasks_relevance.csv"
    if csv_path.exists():
        with open(csv_path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                task = AuditTask(row["task_id"], row["stage"], row["stratum"],
                                 json.loads(row["payload"]))
                store.add_task(task, plan["weights"].get(row["stratum"], 1.0))
    return store
