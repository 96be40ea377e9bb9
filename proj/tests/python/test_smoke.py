import json
import math
import os
from pathlib import Path

import pytest

import semag

ROOT = Path(os.environ.get("SEMAG_SOURCE_DIR", Path(__file__).resolve().parents[2]))
DATA = ROOT / "data"


def test_similarity_conventions():
    a = [(1, "x", "1"), (2, "y", "2")]
    assert semag.similarity(a, a) == 1.0
    assert semag.similarity([], []) == 1.0
    assert semag.similarity(a, []) == 0.0
    assert semag.similarity(a, [(1, "x", "1")]) == pytest.approx(0.5)
    assert semag.edit_distance(a, [(1, "x", "1")]) == 1


def test_threshold_closed_form():
    assert semag.threshold(4, 1.0) == pytest.approx(0.85 * math.exp(-0.5), abs=1e-12)
    assert semag.threshold(2, 0.0) == 0.85
    with pytest.raises(semag.SemagError):
        semag.threshold(1, 1.0, t_max=0)


def test_softmax_and_vote():
    w = semag.softmax_weights([0.2, 0.5, 0.9], 0.5)
    assert sum(w) == pytest.approx(1.0)
    assert w[2] > w[1] > w[0]
    assert semag.vote([("b", 0.5), ("a", 0.5)]) == "a"
    assert semag.vote([("b", 0.9), ("a", 0.5)]) == "b"
    with pytest.raises(semag.PreconditionError):
        semag.softmax_weights([], 1.0)


def test_load_dataset_and_config():
    tasks = semag.load_dataset(DATA / "toy" / "humaneval_sample.jsonl", "humaneval")
    assert len(tasks) == 3
    assert all(t["visible_examples"] for t in tasks)
    cfg = semag.load_config(ROOT / "config" / "default.json")
    assert cfg == semag.load_config()
    assert cfg["controller"]["m_try"] == 5


def test_solve_mock(tmp_path):
    out = semag.solve(DATA / "toy" / "tasks.jsonl", seed=1, out_dir=tmp_path / "run")
    metrics = out["metrics"]
    assert metrics["pass_at_1"] == 1.0
    assert out["manifest"]["run_id"].startswith("run-")
    on_disk = json.loads((tmp_path / "run" / "metrics.json").read_text())
    assert on_disk == metrics
    assert "Pass@1" in semag.report(str(tmp_path / "run"))


def test_solve_rejects_unknown_backend():
    with pytest.raises(semag.ValidationError):
        semag.solve(DATA / "toy" / "tasks.jsonl", backend="no-such-model")


def test_select_backbone_fixture():
    sel = DATA / "selection"
    rep = semag.select_backbone(sel / "profile.txt", sel / "registry.json", sel / "corpus.json",
                                sample=sel / "sample_tasks.jsonl", seed=1)
    assert rep["model_id"] == "gamma-coder"
