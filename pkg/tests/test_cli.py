import json
import subprocess
import sys
from pathlib import Path

import pytest

from kimatch.textproc import Post, write_corpus


def _run(args, cwd, env_extra=None):
    import os

    env = dict(os.environ)
    env.update(env_extra or {})
    return subprocess.run(
        [sys.executable, "-m", "kimatch.gateway.cli", *args],
        cwd=cwd, env=env, capture_output=True, text=True, timeout=300,
    )


@pytest.fixture()
def corpus_file(tmp_path):
    posts = [
        Post(id="a", user_id="u1", timestamp=1.0, text="lockdown makes my anxiety spike"),
        Post(id="b", user_id="u2", timestamp=2.0, text="schools closed and i am depressed"),
        Post(id="c", user_id="u3", timestamp=3.0, text="nice weather today"),
    ]
    path = tmp_path / "corpus.jsonl"
    write_corpus(posts, path)
    return path


def test_ingest_and_tag_pipeline(tmp_path, corpus_file):
    data = tmp_path / "data"
    r = _run(["ingest", "--corpus", str(corpus_file), "--data-dir", str(data)], tmp_path)
    assert r.returncode == 0, r.stderr
    r = _run(["tag", "--corpus", str(data / "corpus.jsonl"), "--data-dir", str(data)], tmp_path)
    assert r.returncode == 0, r.stderr
    tagged = [json.loads(l) for l in (data / "tagged.jsonl").read_text().splitlines()]
    by_id = {p["id"]: p for p in tagged}
    assert "Anxiety" in by_id["a"]["tags"]["conditions"]
    assert "Lockdown" in by_id["a"]["tags"]["events"]
    assert "tags" not in by_id["c"] or not by_id["c"]["tags"]["conditions"]


def test_tag_filter_flag(tmp_path, corpus_file):
    data = tmp_path / "data"
    r = _run(["tag", "--corpus", str(corpus_file), "--data-dir", str(data), "--filter"], tmp_path)
    assert r.returncode == 0, r.stderr
    tagged = [json.loads(l) for l in (data / "tagged.jsonl").read_text().splitlines()]
    assert {p["id"] for p in tagged} == {"a", "b"}


def test_features_command(tmp_path, corpus_file):
    data = tmp_path / "data"
    _run(["tag", "--corpus", str(corpus_file), "--data-dir", str(data)], tmp_path)
    r = _run(["features", "--corpus", str(data / "tagged.jsonl"), "--data-dir", str(data)], tmp_path)
    assert r.returncode == 0, r.stderr
    fv = json.loads((data / "features.json").read_text())
    assert set(fv) == {"a", "b", "c"}
    assert len(fv["a"]["psy"]) == 6 and len(fv["a"]["covid"]) == 3


def test_simulate_command_writes_metrics(tmp_path):
    data = tmp_path / "data"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"sim": {"n_ss": 30, "n_sp": 6, "max_matches": 5, "arrival_rate": 2.0}}))
    r = _run(["simulate", "--strategy", "KI", "--seed", "1", "--data-dir", str(data), "--config", str(cfg)], tmp_path)
    assert r.returncode == 0, r.stderr
    payload = json.loads((data / "simulation.json").read_text())
    assert payload["config"]["strategy"] == "KI"
    assert "stability" in payload["metrics"]


def test_compare_command_csv(tmp_path):
    data = tmp_path / "data"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"sim": {"n_ss": 30, "n_sp": 6, "max_matches": 5, "arrival_rate": 2.0}}))
    r = _run(["compare", "--seeds", "0,1", "--data-dir", str(data), "--config", str(cfg)], tmp_path)
    assert r.returncode == 0, r.stderr
    lines = (data / "sim_report.csv").read_text().splitlines()
    assert lines[0] == "strategy,seed,stability,idle_pct,tgm_mean,tgm_gtK_fraction"
    assert len(lines) == 1 + 3 * 2


def test_label_command(tmp_path):
    pairs = tmp_path / "pairs.jsonl"
    pairs.write_text(
        json.dumps({"premise": "my anxiety is high and i can not sleep",
                    "hypothesis": "i hear you, my anxiety keeps me up too"}) + "\n"
    )
    data = tmp_path / "data"
    r = _run(["label", "--pairs", str(pairs), "--data-dir", str(data)], tmp_path)
    assert r.returncode == 0, r.stderr
    row = json.loads((data / "labels.jsonl").read_text().splitlines()[0])
    assert row["label"] in ("Similar", "Supportive", "Informative")
    assert row["verdict"] in ("entailment", "contradiction", "neutral")


def test_env_var_config_and_data_dir(tmp_path, corpus_file):
    data = tmp_path / "envdata"
    r = _run(["tag", "--corpus", str(corpus_file)], tmp_path, env_extra={"KIMATCH_DATA_DIR": str(data)})
    assert r.returncode == 0, r.stderr
    assert (data / "tagged.jsonl").exists()


def test_toml_config_accepted(tmp_path):
    data = tmp_path / "data"
    cfg = tmp_path / "cfg.toml"
    cfg.write_text("[sim]\nn_ss = 20\nn_sp = 4\nmax_matches = 4\narrival_rate = 2.0\n")
    r = _run(["simulate", "--config", str(cfg), "--data-dir", str(data)], tmp_path)
    assert r.returncode == 0, r.stderr
    assert json.loads((data / "simulation.json").read_text())["config"]["n_ss"] == 20
