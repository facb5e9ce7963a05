import time
from pathlib import Path

import pytest

from regmap.pipeline import Pipeline, load_config
from regmap.synthetic import generate_release_fixture


@pytest.fixture(scope="session")
def release_fixture(tmp_path_factory) -> Path:
    """Deterministic release-scale registry + model cache."""
    root = tmp_path_factory.mktemp("release")
    generate_release_fixture(root)
    return root


@pytest.fixture(scope="session")
def replay_run(release_fixture, tmp_path_factory):
    """One full replay over the fixture cache, with its wall time."""
    out = tmp_path_factory.mktemp("run-primary")
    config = load_config(release_fixture / "config.json")
    t0 = time.monotonic()
    Pipeline(config, "replay", release_fixture / "cache", out, seed=7).run_all()
    elapsed = time.monotonic() - t0
    return {"root": release_fixture, "out": out, "elapsed": elapsed,
            "config": config}


def run_replay(release_root: Path, out: Path, seed: int = 7) -> Path:
    config = load_config(release_root / "config.json")
    Pipeline(config, "replay", release_root / "cache", out, seed=seed).run_all()
    return out
