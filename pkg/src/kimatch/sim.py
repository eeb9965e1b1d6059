"""Discrete matching-market simulation of seekers, providers, and strategies.

Agents
    Each seeker (SS) draws binary conditions ``C1..Cp`` (at least one set);
    each provider (SP) draws per-condition recoveries ``R1..Rp ~ U(0,1)``.
    The quality of a pairing is the recovery mass on the seeker's active
    conditions::

        rating = sum_p(Cp * Rp) / sum_p(Cp)

Market dynamics (one step = one clock tick)
    * Seekers enter the market at ``arrival_rate`` per step and carry a
      budget of ``max_matches`` interactions.
    * An SP serves at most one SS per step. An exploratory interaction
      occupies the SP for that single step; afterwards the seeker waits
      ``think_time`` steps before trying again, and walks away discouraged
      if the rating fell below ``continue_threshold``.
    * The knowledge strategy (KI) trusts its estimate: it picks the best
      idle SP by knowledge and stays engaged with it, interacting every
      step (SP continuously busy) until the budget runs out. Random and PG
      have no grounds to commit, so they re-select every time.
    * Observed ratings carry ``rating_noise`` jitter (interaction quality
      varies); selection strategies see their own signals only.

Selection strategies
    Random  uniform over idle SPs.
    PG      probabilistic greedy: softmax (temperature ``pg_temperature``)
            over the market-wide running mean of observed ratings per SP,
            prior 0.5 when unobserved.
    KI      argmax over idle SPs of rating(C, R) + U(-ki_noise, +ki_noise).

Metrics (means over seekers / steps)
    * rating stability: log of the per-seeker rating variance over the last
      ``stability_window`` matches, variance floored at 1e-20.
    * idle percentage: time-average of idle SP share.
    * TGM (time to good match): first match index from which all ratings
      stay within ``tgm_delta`` of the seeker's best rating; seekers who
      leave early or never stabilize report ">K".

Every run is single-threaded and deterministic for a given config + seed.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

STRATEGIES = ("Random", "PG", "KI")

VARIANCE_FLOOR = 1e-20


class NoConditions(ValueError):
    """A seeker must have at least one active condition."""


class NoIdleSP(RuntimeError):
    """No provider available this step; the seeker waits."""


def rating(conditions: Sequence[float], recoveries: Sequence[float]) -> float:
    """Recovery mass on active conditions: sum(C*R) / sum(C)."""
    c = np.asarray(conditions, dtype=np.float64)
    r = np.asarray(recoveries, dtype=np.float64)
    total = c.sum()
    if total < 1:
        raise NoConditions("seeker has no active conditions")
    return float((c * r).sum() / total)


@dataclass
class SimConfig:
    n_ss: int = 10000
    n_sp: int = 108
    max_matches: int = 20
    n_conditions: int = 2
    seed: int = 0
    strategy: str = "KI"
    stability_window: int = 20
    pg_temperature: float = 0.15
    ki_noise: float = 0.05
    arrival_rate: float = 3.5
    think_time: int = 3
    continue_threshold: float = 0.8
    rating_noise: float = 0.01
    tgm_delta: float = 0.05

    def __post_init__(self):
        if min(self.n_ss, self.n_sp, self.max_matches, self.n_conditions) < 1:
            raise ValueError("n_ss, n_sp, max_matches, n_conditions must be >= 1")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class SimState:
    """Mutable market state visible to the selection strategies."""

    conditions: np.ndarray  # (N, p) in {0,1}
    recoveries: np.ndarray  # (M, p) in [0,1)
    sp_busy: np.ndarray  # (M,) bool; engaged or already serving this step
    obs_sum: np.ndarray  # (M,) sum of observed ratings
    obs_count: np.ndarray  # (M,)
    rng: np.random.Generator
    config: SimConfig

    def idle(self) -> np.ndarray:
        return np.flatnonzero(~self.sp_busy)

    def true_ratings(self, ss: int, sps: np.ndarray) -> np.ndarray:
        c = self.conditions[ss]
        return (self.recoveries[sps] @ c) / c.sum()


def init_state(config: SimConfig, rng: np.random.Generator | None = None) -> SimState:
    rng = rng or np.random.default_rng(config.seed)
    conditions = rng.integers(0, 2, size=(config.n_ss, config.n_conditions)).astype(np.float64)
    empty = np.flatnonzero(conditions.sum(axis=1) == 0)
    if empty.size:
        picks = rng.integers(0, config.n_conditions, size=empty.size)
        conditions[empty, picks] = 1.0
    recoveries = rng.uniform(0.0, 1.0, size=(config.n_sp, config.n_conditions))
    return SimState(
        conditions=conditions,
        recoveries=recoveries,
        sp_busy=np.zeros(config.n_sp, dtype=bool),
        obs_sum=np.zeros(config.n_sp),
        obs_count=np.zeros(config.n_sp),
        rng=rng,
        config=config,
    )


def select(strategy: str, state: SimState, ss: int) -> int:
    """Pick an idle SP for ``ss`` under the given strategy."""
    idle = state.idle()
    if idle.size == 0:
        raise NoIdleSP(f"no idle SP for seeker {ss}")
    rng = state.rng
    if strategy == "Random":
        return int(idle[rng.integers(idle.size)])
    if strategy == "PG":
        est = np.where(state.obs_count[idle] > 0, state.obs_sum[idle] / np.maximum(state.obs_count[idle], 1), 0.5)
        tau = max(state.config.pg_temperature, 1e-12)
        logits = (est - est.max()) / tau
        weights = np.exp(logits)
        probs = weights / weights.sum()
        return int(idle[rng.choice(idle.size, p=probs)])
    if strategy == "KI":
        base = state.true_ratings(ss, idle)
        eta = state.config.ki_noise
        noisy = base + (rng.uniform(-eta, eta, size=idle.size) if eta > 0 else 0.0)
        return int(idle[int(np.argmax(noisy))])
    raise ValueError(f"unknown strategy {strategy!r}")


@dataclass
class SimTrace:
    """Chronological match events plus per-step idle counts."""

    steps: np.ndarray
    ss: np.ndarray
    sp: np.ndarray
    ratings: np.ndarray
    idle_counts: np.ndarray
    config: SimConfig

    @property
    def n_events(self) -> int:
        return len(self.steps)

    def ratings_by_ss(self) -> dict[int, np.ndarray]:
        """Per-seeker rating history in chronological order."""
        out: dict[int, np.ndarray] = {}
        order = np.argsort(self.ss, kind="stable")
        ss_sorted = self.ss[order]
        bounds = np.flatnonzero(np.diff(ss_sorted)) + 1
        for chunk_ids, chunk in zip(np.split(ss_sorted, bounds), np.split(order, bounds)):
            out[int(chunk_ids[0])] = self.ratings[chunk]
        return out


# statuses in the run loop
_UNARRIVED, _EXPLORING, _ENGAGED, _DONE = 0, 1, 2, 3


def run(config: SimConfig, rating_fn: Callable[[int, int], float] | None = None) -> SimTrace:
    """Simulate one market under ``config``; deterministic per seed.

    ``rating_fn`` optionally replaces the synthetic rating formula (bridge
    mode: plug in match-model scores); it must return values in [0, 1].
    """
    state = init_state(config)
    rng = state.rng
    n, m, k = config.n_ss, config.n_sp, config.max_matches

    def base_rating(ss: int, sp: int) -> float:
        if rating_fn is not None:
            return float(rating_fn(ss, sp))
        return rating(state.conditions[ss], state.recoveries[sp])

    status = np.full(n, _UNARRIVED, dtype=np.int8)
    budget = np.full(n, k, dtype=np.int64)
    next_action = np.zeros(n, dtype=np.int64)
    engaged_sp = np.full(n, -1, dtype=np.int64)
    engaged_base = np.zeros(n, dtype=np.float64)

    cap = n * k
    ev_step = np.empty(cap, dtype=np.int64)
    ev_ss = np.empty(cap, dtype=np.int64)
    ev_sp = np.empty(cap, dtype=np.int64)
    ev_rating = np.empty(cap, dtype=np.float64)
    n_events = 0
    idle_counts: list[int] = []

    arrived = 0
    t = 0
    max_steps = int(n / max(config.arrival_rate, 1e-9)) + n * (k + config.think_time + 1) + 10
    noise = config.rating_noise

    while True:
        due_arrivals = min(n, int(np.floor((t + 1) * config.arrival_rate)))
        if arrived < due_arrivals:
            newly = np.arange(arrived, due_arrivals)
            status[newly] = _EXPLORING
            next_action[newly] = t
            arrived = due_arrivals

        served = 0
        release_at_step_end: list[int] = []

        # engaged pairs interact every step
        engaged = np.flatnonzero(status == _ENGAGED)
        if engaged.size:
            jitter = rng.normal(0.0, noise, size=engaged.size) if noise > 0 else np.zeros(engaged.size)
            obs = np.clip(engaged_base[engaged] + jitter, 0.0, 1.0)
            sl = slice(n_events, n_events + engaged.size)
            ev_step[sl] = t
            ev_ss[sl] = engaged
            ev_sp[sl] = engaged_sp[engaged]
            ev_rating[sl] = obs
            n_events += engaged.size
            np.add.at(state.obs_sum, engaged_sp[engaged], obs)
            np.add.at(state.obs_count, engaged_sp[engaged], 1)
            served += engaged.size
            budget[engaged] -= 1
            finished = engaged[budget[engaged] == 0]
            if finished.size:
                # still busy for the rest of this step; back in the pool next step
                release_at_step_end.extend(int(x) for x in engaged_sp[finished])
                status[finished] = _DONE

        # explorers pick from whatever is still idle this step
        for ss_idx in np.flatnonzero((status == _EXPLORING) & (next_action <= t)):
            ss_idx = int(ss_idx)
            try:
                sp_idx = select(config.strategy, state, ss_idx)
            except NoIdleSP:
                continue  # waits; budget not consumed
            base = base_rating(ss_idx, sp_idx)
            obs = float(np.clip(base + (rng.normal(0.0, noise) if noise > 0 else 0.0), 0.0, 1.0))
            ev_step[n_events] = t
            ev_ss[n_events] = ss_idx
            ev_sp[n_events] = sp_idx
            ev_rating[n_events] = obs
            n_events += 1
            state.obs_sum[sp_idx] += obs
            state.obs_count[sp_idx] += 1
            budget[ss_idx] -= 1
            served += 1
            state.sp_busy[sp_idx] = True  # occupied for this step
            if config.strategy == "KI" and budget[ss_idx] > 0:
                status[ss_idx] = _ENGAGED  # stays busy across steps
                engaged_sp[ss_idx] = sp_idx
                engaged_base[ss_idx] = base
            else:
                release_at_step_end.append(sp_idx)
                if budget[ss_idx] == 0 or obs < config.continue_threshold:
                    status[ss_idx] = _DONE
                else:
                    next_action[ss_idx] = t + 1 + config.think_time

        idle_counts.append(m - served)
        if release_at_step_end:
            state.sp_busy[release_at_step_end] = False

        t += 1
        if arrived == n and not np.any((status == _EXPLORING) | (status == _ENGAGED)):
            break
        if t > max_steps:
            raise RuntimeError("simulation failed to terminate")

    return SimTrace(
        steps=ev_step[:n_events].copy(),
        ss=ev_ss[:n_events].copy(),
        sp=ev_sp[:n_events].copy(),
        ratings=ev_rating[:n_events].copy(),
        idle_counts=np.asarray(idle_counts, dtype=np.int64),
        config=config,
    )


# --- metrics -----------------------------------------------------------------


def rating_stability(trace: SimTrace, window: int | None = None) -> float:
    """Mean over seekers of log variance of the last ``window`` ratings.

    Variance is the sample variance (ddof=1; a single rating counts as
    zero variance) floored at 1e-20 before the log. Seekers without any
    match are skipped.
    """
    if trace.n_events == 0:
        raise ValueError("empty trace")
    window = window or trace.config.stability_window
    logs = []
    for _ss, ratings in trace.ratings_by_ss().items():
        tail = ratings[-window:]
        var = float(np.var(tail, ddof=1)) if tail.size > 1 else 0.0
        logs.append(np.log(max(var, VARIANCE_FLOOR)))
    return float(np.mean(logs))


def idle_sps(trace: SimTrace) -> float:
    """Time-averaged idle-provider percentage."""
    if trace.n_events == 0:
        raise ValueError("empty trace")
    return float(np.mean(trace.idle_counts / trace.config.n_sp) * 100.0)


def tgm_per_ss(ratings: np.ndarray, k: int, delta: float) -> int | None:
    """First index (1-based) from which ratings stay within ``delta`` of the
    best rating; ``None`` when the seeker never stabilizes or left early."""
    nmatches = len(ratings)
    if nmatches < k:
        return None  # walked away before identifying a relevant provider
    best = float(ratings.max())
    ok = ratings >= best - delta
    # last position where stability is broken; TGM starts right after
    broken = np.flatnonzero(~ok)
    t = int(broken[-1]) + 2 if broken.size else 1
    return t if t <= nmatches else None


@dataclass(frozen=True)
class TgmResult:
    mean: float  # mean index among seekers that stabilized (nan if none)
    gt_k_fraction: float
    k: int

    @property
    def display(self) -> str:
        if np.isnan(self.mean):
            return f">{self.k}"
        return f"{self.mean:.1f}/{self.k}"


def tgm(trace: SimTrace) -> TgmResult:
    if trace.n_events == 0:
        raise ValueError("empty trace")
    cfg = trace.config
    by_ss = trace.ratings_by_ss()
    values = []
    gt = 0
    total = cfg.n_ss
    for ss_idx in range(cfg.n_ss):
        ratings = by_ss.get(ss_idx)
        if ratings is None:
            gt += 1  # never matched at all
            continue
        t = tgm_per_ss(ratings, cfg.max_matches, cfg.tgm_delta)
        if t is None:
            gt += 1
        else:
            values.append(t)
    mean = float(np.mean(values)) if values else float("nan")
    return TgmResult(mean=mean, gt_k_fraction=gt / total, k=cfg.max_matches)


# --- sweep report ------------------------------------------------------------


@dataclass(frozen=True)
class SimRow:
    strategy: str
    seed: int
    stability: float
    idle_pct: float
    tgm_mean: float
    tgm_gt_k_fraction: float


@dataclass(frozen=True)
class SimReport:
    rows: tuple[SimRow, ...]

    def mean_by_strategy(self) -> dict[str, dict[str, float]]:
        out: dict[str, dict[str, float]] = {}
        for strategy in {r.strategy for r in self.rows}:
            group = [r for r in self.rows if r.strategy == strategy]
            tgms = [r.tgm_mean for r in group if not np.isnan(r.tgm_mean)]
            out[strategy] = {
                "stability": float(np.mean([r.stability for r in group])),
                "idle_pct": float(np.mean([r.idle_pct for r in group])),
                "tgm_mean": float(np.mean(tgms)) if tgms else float("nan"),
                "tgm_gt_k_fraction": float(np.mean([r.tgm_gt_k_fraction for r in group])),
            }
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["strategy", "seed", "stability", "idle_pct", "tgm_mean", "tgm_gtK_fraction"])
        for r in self.rows:
            writer.writerow(
                [r.strategy, r.seed, f"{r.stability:.4f}", f"{r.idle_pct:.4f}", f"{r.tgm_mean:.4f}", f"{r.tgm_gt_k_fraction:.6f}"]
            )
        return buf.getvalue()


def run_metrics(trace: SimTrace) -> dict[str, float]:
    t = tgm(trace)
    return {
        "stability": rating_stability(trace),
        "idle_pct": idle_sps(trace),
        "tgm_mean": t.mean,
        "tgm_gt_k_fraction": t.gt_k_fraction,
    }


def compare(
    config: SimConfig,
    strategies: Sequence[str] = STRATEGIES,
    seeds: Sequence[int] = (0,),
    rating_fn: Callable[[int, int], float] | None = None,
) -> SimReport:
    """Per-strategy, per-seed metric rows; merged in (strategy, seed) order."""
    if not seeds:
        raise ValueError("need at least one seed")
    rows = []
    for strategy in strategies:
        for seed in seeds:
            trace = run(replace(config, strategy=strategy, seed=seed), rating_fn=rating_fn)
            metrics = run_metrics(trace)
            rows.append(
                SimRow(
                    strategy=strategy,
                    seed=seed,
                    stability=metrics["stability"],
                    idle_pct=metrics["idle_pct"],
                    tgm_mean=metrics["tgm_mean"],
                    tgm_gt_k_fraction=metrics["tgm_gt_k_fraction"],
                )
            )
    return SimReport(rows=tuple(rows))
