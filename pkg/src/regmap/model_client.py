"""Model completion clients with a verbatim request/response cache.

Every model call is keyed by (item id, stage, prompt version) and stored as
one JSON file holding the request and the verbatim reply. Replay mode reads
only from this cache and never touches the network; a missing key is a hard
error naming the key. The live client pins temperature to 0 and takes its
API key from the environment only — never from configuration files.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

import requests

API_KEY_ENV = "REGMAP_API_KEY"


class CacheMiss(KeyError):
    """Replay requested a (item, stage, prompt_version) key not in the cache."""

    def __init__(self, item_id: str, stage: str, prompt_version: str):
        super().__init__(f"cache miss: item={item_id!r} stage={stage!r} "
                         f"prompt_version={prompt_version!r}")
        self.item_id = item_id
        self.stage = stage
        self.prompt_version = prompt_version


def cache_path(cache_dir, stage: str, item_id: str, prompt_version: str = "v1") -> Path:
    digest = hashlib.sha256(
        f"{item_id}\n{stage}\n{prompt_version}".encode("utf-8")
    ).hexdigest()[:32]
    return Path(cache_dir) / "model" / stage / f"{digest}.json"


def write_cache_entry(cache_dir, stage: str, item_id: str, reply: str,
                      prompt_version: str = "v1", request=None, model_meta=None) -> Path:
    path = cache_path(cache_dir, stage, item_id, prompt_version)
    path.parent.mkdir(parents=True, exist_ok=True)
    entry = {
        "item_id": item_id,
        "stage": stage,
        "prompt_version": prompt_version,
        "request": request or {},
        "reply": reply,
        "model_meta": model_meta or {},
    }
    path.write_text(json.dumps(entry, ensure_ascii=False, sort_keys=True), encoding="utf-8")
    return path


class ReplayModelClient:
    """Serves completions exclusively from the on-disk cache."""

    def __init__(self, cache_dir):
        self.cache_dir = Path(cache_dir)

    def complete(self, stage: str, item_id: str, prompt: str = "",
                 prompt_version: str = "v1") -> tuple[str, dict]:
        path = cache_path(self.cache_dir, stage, item_id, prompt_version)
        if not path.exists():
            raise CacheMiss(item_id, stage, prompt_version)
        entry = json.loads(path.read_text(encoding="utf-8"))
        return entry["reply"], entry.get("model_meta", {})


class LiveModelClient:
    """Chat-style completion client; caches every exchange for later replay."""

    def __init__(self, cache_dir, base_url: str, model: str,
                 session: requests.Session | None = None):
        self.cache_dir = Path(cache_dir)
        self.base_url = base_url
        self.model = model
        self.session = session or requests.Session()
        key = os.environ.get(API_KEY_ENV)
        if not key:
            raise EnvironmentError(
                f"live mode requires the {API_KEY_ENV} environment variable; "
                "API keys are never read from configuration files"
            )
        self._headers = {"Authorization": f"Bearer {key}"}

    def complete(self, stage: str, item_id: str, prompt: str,
                 prompt_version: str = "v1") -> tuple[str, dict]:
        cached = cache_path(self.cache_dir, stage, item_id, prompt_version)
        if cached.exists():
            entry = json.loads(cached.read_text(encoding="utf-8"))
            return entry["reply"], entry.get("model_meta", {})
        request = {
            "model": self.model,
            "temperature": 0,
            "messages": [{"role": "user", "content": prompt}],
        }
        resp = self.session.post(self.base_url, json=request,
                                 headers=self._headers, timeout=120)
        resp.raise_for_status()
        payload = resp.json()
        reply = payload["choices"][0]["message"]["content"]
        meta = {
            "model": payload.get("model", self.model),
            "created": payload.get("created"),
        }
        write_cache_entry(self.cache_dir, stage, item_id, reply,
                          prompt_version=prompt_version, request=request, model_meta=meta)
        return reply, meta
