"""Command-line entrypoints for the pipeline.

Every subcommand reads one TOML or JSON config file (``--config``, or the
``KIMATCH_CONFIG`` env var) and accepts flag overrides. Outputs land in
``--data-dir`` (``KIMATCH_DATA_DIR``, default ``./kimatch-data``). Runs are
deterministic for a fixed config + seed: rerunning a command overwrites
its outputs with byte-identical content.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click


def _load_config(path: str | None) -> dict:
    path = path or os.environ.get("KIMATCH_CONFIG")
    if not path:
        return {}
    raw = Path(path).read_bytes()
    if path.endswith(".json"):
        return json.loads(raw)
    try:
        import tomllib  # py311+
    except ModuleNotFoundError:
        import tomli as tomllib
    return tomllib.loads(raw.decode("utf-8"))


def _data_dir(opt: str | None) -> Path:
    d = Path(opt or os.environ.get("KIMATCH_DATA_DIR", "kimatch-data"))
    d.mkdir(parents=True, exist_ok=True)
    return d


@click.group()
def main():
    """Knowledge-infused support matching pipeline."""


_common = [
    click.option("--config", "config_path", default=None, help="TOML/JSON config file"),
    click.option("--data-dir", default=None, help="artifact output directory"),
]


def common_options(fn):
    for opt in reversed(_common):
        fn = opt(fn)
    return fn


@main.command()
@common_options
@click.option("--corpus", required=True, type=click.Path(exists=True), help="JSONL corpus")
@click.option("--out", default="corpus.jsonl")
def ingest(config_path, data_dir, corpus, out):
    """Validate and normalize a JSONL corpus into the data directory."""
    from ..textproc import read_corpus, write_corpus

    posts = read_corpus(corpus)
    dest = _data_dir(data_dir) / out
    write_corpus(posts, dest)
    click.echo(f"ingested {len(posts)} posts -> {dest}")


@main.command()
@common_options
@click.option("--corpus", required=True, type=click.Path(exists=True))
@click.option("--out", default="tagged.jsonl")
@click.option("--threshold", default=None, type=float, help="event soft-match cosine threshold")
@click.option("--filter/--no-filter", "apply_filter", default=False, help="keep only posts with both tag kinds")
def tag(config_path, data_dir, corpus, out, threshold, apply_filter):
    """Tag conditions (negation-aware) and pandemic events."""
    from ..embed import make_provider
    from ..knowledge import load_default_lexicons
    from ..textproc import EventCatalog, FilterConfig, filter_corpus, read_corpus, tag_corpus, write_corpus

    cfg = _load_config(config_path)
    threshold = threshold if threshold is not None else cfg.get("tag", {}).get("threshold", 0.8)
    lexicons = load_default_lexicons()
    catalog = EventCatalog.load()
    embedder = make_provider(cfg.get("embedder", "hashed-v1"), lexicons=list(catalog.lexicons.values()))
    posts = read_corpus(corpus)
    tagged = tag_corpus(posts, lexicons["anxiety"], lexicons["depression"], catalog, embedder, threshold)
    if apply_filter:
        tagged = filter_corpus(tagged, FilterConfig())
    dest = _data_dir(data_dir) / out
    write_corpus(tagged, dest)
    click.echo(f"tagged {len(tagged)} posts -> {dest}")


@main.command()
@common_options
@click.option("--corpus", required=True, type=click.Path(exists=True), help="tagged JSONL corpus")
@click.option("--out", default="features.json")
@click.option("--correlations", default="correlations.csv")
def features(config_path, data_dir, corpus, out, correlations):
    """Per-post feature vectors and the feature-condition correlation table."""
    from ..features import compute_features, correlate
    from ..knowledge import load_default_categories, load_default_emotion_scale
    from ..textproc import read_corpus

    posts = read_corpus(corpus)
    categories = load_default_categories()
    scale = load_default_emotion_scale()
    fvs = {p.id: compute_features(p, categories, scale) for p in posts}
    d = _data_dir(data_dir)
    (d / out).write_text(
        json.dumps({pid: fv.to_json() for pid, fv in sorted(fvs.items())}, indent=2, sort_keys=True),
        encoding="utf-8",
    )
    try:
        table = correlate(posts, fvs)
        (d / correlations).write_text(table.to_csv(), encoding="utf-8")
        click.echo(f"features -> {d / out}; correlations ({table.n_tests} tests) -> {d / correlations}")
    except ValueError as e:
        click.echo(f"features -> {d / out}; correlations skipped: {e}")


@main.command("train-roles")
@common_options
@click.option("--seed", default=0, type=int)
@click.option("--out", default="role_model.json")
def train_roles_cmd(config_path, data_dir, seed, out):
    """Train the seeker/provider role classifier on the synthetic corpus."""
    from ..roles import RoleHyperparams, evaluate_roles, train_roles
    from ..synth import make_role_corpus

    cfg = _load_config(config_path).get("roles", {})
    X, y, _posts = make_role_corpus(
        n_ss=int(cfg.get("n_ss", 300)), n_sp=int(cfg.get("n_sp", 30)), seed=seed
    )
    hyper = RoleHyperparams(
        learning_rate=float(cfg.get("learning_rate", 0.5)),
        epochs=int(cfg.get("epochs", 300)),
        l2=float(cfg.get("l2", 0.0)),
    )
    model = train_roles(X, y, hyper, seed=seed)
    metrics = evaluate_roles(model, X, y)
    dest = _data_dir(data_dir) / out
    model.save(dest)
    click.echo(f"role model -> {dest}  train F1 ss={metrics['SS']['f1']:.3f} sp={metrics['SP']['f1']:.3f}")


@main.command("train-matcher")
@common_options
@click.option("--seed", default=0, type=int)
@click.option("--out", default="match_model.json")
def train_matcher_cmd(config_path, data_dir, seed, out):
    """Train the siamese match model on the knowledge-planted dataset."""
    from ..matcher import MatcherConfig, match_f1, train_matcher
    from ..synth import make_match_dataset

    cfg = _load_config(config_path).get("matcher", {})
    config = MatcherConfig(**{**cfg, "seed": seed})
    ds = make_match_dataset(config, seed=seed)
    model = train_matcher(ds.train, config, validation=ds.test)
    dest = _data_dir(data_dir) / out
    model.save(dest)
    click.echo(f"match model -> {dest}  held-out F1={match_f1(model, ds.test):.3f}")


@main.command()
@common_options
@click.option("--seeds", default="0,1,2,3,4", help="comma-separated seeds")
@click.option("--out", default="ablation.csv")
def ablate(config_path, data_dir, seeds, out):
    """Run the input-block ablation grid and write the report CSV."""
    from ..matcher import ABLATION_CONFIGS, MatcherConfig, ablation_report_csv, evaluate_matcher, train_matcher
    from ..synth import make_match_dataset

    cfg = _load_config(config_path).get("matcher", {})
    seed_list = [int(s) for s in seeds.split(",") if s.strip()]
    rows = []
    for name, flags in ABLATION_CONFIGS:
        agg: dict[str, float] = {}
        for seed in seed_list:
            config = MatcherConfig(**{**cfg, **flags, "seed": seed})
            ds = make_match_dataset(config, seed=seed)
            model = train_matcher(ds.train, config, validation=ds.test)
            for key, val in evaluate_matcher(model, ds.test).items():
                agg[key] = agg.get(key, 0.0) + val / len(seed_list)
        rows.append((name, agg))
        click.echo(f"{name}: f1_ss={agg['f1_ss']:.3f}")
    dest = _data_dir(data_dir) / out
    dest.write_text(ablation_report_csv(rows), encoding="utf-8")
    click.echo(f"ablation report -> {dest}")


@main.command()
@common_options
@click.option("--strategy", default="KI", type=click.Choice(["Random", "PG", "KI"]))
@click.option("--seed", default=0, type=int)
@click.option("--out", default="simulation.json")
def simulate(config_path, data_dir, strategy, seed, out):
    """One simulation run; writes the metric summary."""
    from ..sim import SimConfig, run, run_metrics

    cfg = _load_config(config_path).get("sim", {})
    config = SimConfig(**{**cfg, "strategy": strategy, "seed": seed})
    trace = run(config)
    metrics = run_metrics(trace)
    payload = {"config": config.to_json(), "events": trace.n_events, "metrics": metrics}
    dest = _data_dir(data_dir) / out
    dest.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
    click.echo(json.dumps(metrics, sort_keys=True))


@main.command()
@common_options
@click.option("--seeds", default="0,1,2,3,4,5,6,7,8,9")
@click.option("--strategies", default="Random,PG,KI")
@click.option("--out", default="sim_report.csv")
def compare(config_path, data_dir, seeds, strategies, out):
    """Strategy sweep across seeds; writes the per-run metric CSV."""
    from ..sim import SimConfig, compare as sim_compare

    cfg = _load_config(config_path).get("sim", {})
    config = SimConfig(**cfg)
    report = sim_compare(
        config,
        strategies=[s.strip() for s in strategies.split(",") if s.strip()],
        seeds=[int(s) for s in seeds.split(",") if s.strip()],
    )
    dest = _data_dir(data_dir) / out
    dest.write_text(report.to_csv(), encoding="utf-8")
    for strategy, m in sorted(report.mean_by_strategy().items()):
        click.echo(
            f"{strategy:7s} stability={m['stability']:8.2f} idle%={m['idle_pct']:6.2f} "
            f"tgm={m['tgm_mean']:.2f} gtK={m['tgm_gt_k_fraction']:.3f}"
        )
    click.echo(f"report -> {dest}")


@main.command()
@common_options
@click.option("--pairs", required=True, type=click.Path(exists=True), help="JSONL of {premise, hypothesis}")
@click.option("--out", default="labels.jsonl")
def label(config_path, data_dir, pairs, out):
    """NLI-label premise/hypothesis pairs with the configured backend."""
    from ..labeler import HeuristicNLIBackend, ExternalNLIBackend, nli, to_support_label

    cfg = _load_config(config_path).get("labeler", {})
    backend_spec = cfg.get("backend", "heuristic-v1")
    backend = (
        ExternalNLIBackend(backend_spec.split(":", 1)[1])
        if backend_spec.startswith("external:")
        else HeuristicNLIBackend()
    )
    dest = _data_dir(data_dir) / out
    n = 0
    with open(dest, "w", encoding="utf-8") as fh:
        for line in Path(pairs).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            obj = json.loads(line)
            verdict = nli(obj["premise"], obj["hypothesis"], backend)
            fh.write(
                json.dumps(
                    {
                        **obj,
                        "verdict": verdict.verdict.value,
                        "confidence": round(verdict.confidence, 6),
                        "label": to_support_label(verdict).value,
                    },
                    sort_keys=True,
                )
                + "\n"
            )
            n += 1
    click.echo(f"labeled {n} pairs -> {dest}")


@main.command()
@common_options
@click.option("--port", default=None, type=int)
@click.option("--host", default="127.0.0.1")
@click.option("--demo/--no-demo", default=True, help="seed with a synthetic roster and models")
@click.option("--seed", default=0, type=int)
@click.option("--sp-ttl", default=None, type=float, help="auto-release busy providers after this many seconds")
def serve(config_path, data_dir, port, host, demo, seed, sp_ttl):
    """Start the moderator gateway HTTP service."""
    import uvicorn

    from .bootstrap import build_demo_service
    from .service import create_app

    if not demo:
        click.echo("only --demo mode ships with the package; external rosters via config TBD", err=True)
        sys.exit(2)
    d = _data_dir(data_dir)
    service = build_demo_service(seed=seed, log_path=d / "events.jsonl")
    service.sp_ttl_seconds = sp_ttl
    app = create_app(service)
    port = port or int(os.environ.get("KIMATCH_PORT", "8321"))
    click.echo(f"gateway on http://{host}:{port} (log: {d / 'events.jsonl'})")
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
