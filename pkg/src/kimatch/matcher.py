"""Siamese convolutional match predictor with a margin-based objective.

Both inputs of a candidate (seeker, provider) pair go through one shared
block — 1-D convolution, ReLU, two dense layers, L2 normalization — giving
unit-norm representations whose cosine similarity scores the match.
Supervision is binary: with ``s = cosine(rep_a, rep_b)`` and margin ``a``,

* label 1 (good match):  loss = (1 - s)^2
* label 0 (bad match):   loss = max(0, s - (1 - a))^2

so matched pairs are pulled to s = 1 and mismatched pairs pushed below
1 - a. The margin fraction satisfied on (seeker, provider, other-provider)
triples is the companion evaluation metric.

Everything is float64 numpy with analytic gradients, checked against
central finite differences (:func:`grad_check`).

Inputs are concatenations of up to four blocks in a fixed order —
[content embedding | psy(6) | role_prob(1) | covid(3)] — with blocks
included or dropped by the ablation flags in :class:`MatcherConfig`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .features import FeatureVector

PSY_DIM, ROLE_DIM, COVID_DIM = 6, 1, 3


class MissingComponent(ValueError):
    """An ablation flag requires a component that was not supplied."""


class DimensionMismatch(ValueError):
    pass


class SingleClass(ValueError):
    pass


class Divergence(RuntimeError):
    """Training loss became NaN."""


@dataclass(frozen=True)
class MatcherConfig:
    use_content: bool = True
    use_psy: bool = True
    use_role_prob: bool = True
    use_covid: bool = True
    content_dim: int = 256
    margin: float = 0.2
    rep_dim: int = 32
    conv_filters: int = 8
    conv_kernel: int = 5
    conv_stride: int = 2
    dense_units: int = 64
    learning_rate: float = 0.1
    momentum: float = 0.9
    epochs: int = 60
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if not (self.use_content or self.use_psy or self.use_role_prob or self.use_covid):
            raise ValueError("at least one input block must be enabled")
        if self.margin <= 0:
            raise ValueError("margin must be positive")
        for name in ("rep_dim", "conv_filters", "conv_kernel", "conv_stride", "dense_units", "batch_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    @property
    def input_dim(self) -> int:
        return (
            (self.content_dim if self.use_content else 0)
            + (PSY_DIM if self.use_psy else 0)
            + (ROLE_DIM if self.use_role_prob else 0)
            + (COVID_DIM if self.use_covid else 0)
        )

    @property
    def flag_label(self) -> str:
        parts = []
        if self.use_content:
            parts.append("content")
        if self.use_psy:
            parts.append("psy")
        if self.use_role_prob:
            parts.append("prob")
        if self.use_covid:
            parts.append("covid")
        return "+".join(parts)


def build_input(
    config: MatcherConfig,
    content: np.ndarray | None = None,
    features: FeatureVector | None = None,
    p_ss: float | None = None,
) -> np.ndarray:
    """Concatenate the enabled blocks in their fixed order."""
    parts: list[np.ndarray] = []
    if config.use_content:
        if content is None:
            raise MissingComponent("content embedding required by config")
        content = np.asarray(content, dtype=np.float64)
        if content.shape != (config.content_dim,):
            raise DimensionMismatch(f"content {content.shape} != ({config.content_dim},)")
        parts.append(content)
    if config.use_psy:
        if features is None:
            raise MissingComponent("feature vector required by config (psy)")
        parts.append(np.asarray(features.psy, dtype=np.float64))
    if config.use_role_prob:
        if p_ss is None and features is None:
            raise MissingComponent("role probability required by config")
        parts.append(np.array([features.role_prob if p_ss is None else p_ss], dtype=np.float64))
    if config.use_covid:
        if features is None:
            raise MissingComponent("feature vector required by config (covid)")
        parts.append(np.asarray(features.covid, dtype=np.float64))
    return np.concatenate(parts)


@dataclass(frozen=True)
class MatchExample:
    ss: np.ndarray
    sp: np.ndarray
    label: int  # 1 = good match, 0 = bad match


@dataclass
class MatchModel:
    """Shared-branch parameters; a single copy serves both inputs.

    ``input_center`` / ``input_scale`` are frozen standardization stats
    (identity when None) fitted on the training set; they are data
    preprocessing, not trained parameters.
    """

    config: MatcherConfig
    conv_w: np.ndarray  # (filters, kernel)
    conv_b: np.ndarray  # (filters,)
    w1: np.ndarray  # (flat, dense_units)
    b1: np.ndarray
    w2: np.ndarray  # (dense_units, rep_dim)
    b2: np.ndarray
    decision_threshold: float = 0.5
    input_center: np.ndarray | None = None
    input_scale: np.ndarray | None = None
    history: list[float] = field(default_factory=list)

    @property
    def conv_out_len(self) -> int:
        c = self.config
        return (c.input_dim - c.conv_kernel) // c.conv_stride + 1

    def params(self) -> list[np.ndarray]:
        return [self.conv_w, self.conv_b, self.w1, self.b1, self.w2, self.b2]

    def to_json(self) -> dict:
        return {
            "config": asdict(self.config),
            "conv_w": self.conv_w.tolist(),
            "conv_b": self.conv_b.tolist(),
            "w1": self.w1.tolist(),
            "b1": self.b1.tolist(),
            "w2": self.w2.tolist(),
            "b2": self.b2.tolist(),
            "decision_threshold": self.decision_threshold,
            "input_center": None if self.input_center is None else self.input_center.tolist(),
            "input_scale": None if self.input_scale is None else self.input_scale.tolist(),
            "history": self.history,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MatchModel":
        def arr(key):
            val = obj.get(key)
            return None if val is None else np.asarray(val, dtype=np.float64)

        return cls(
            config=MatcherConfig(**obj["config"]),
            conv_w=np.asarray(obj["conv_w"], dtype=np.float64),
            conv_b=np.asarray(obj["conv_b"], dtype=np.float64),
            w1=np.asarray(obj["w1"], dtype=np.float64),
            b1=np.asarray(obj["b1"], dtype=np.float64),
            w2=np.asarray(obj["w2"], dtype=np.float64),
            b2=np.asarray(obj["b2"], dtype=np.float64),
            decision_threshold=float(obj.get("decision_threshold", 0.5)),
            input_center=arr("input_center"),
            input_scale=arr("input_scale"),
            history=list(obj.get("history", [])),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "MatchModel":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def init_model(config: MatcherConfig) -> MatchModel:
    """Symmetric uniform fan-in initialization, fully seeded."""
    rng = np.random.default_rng(config.seed)
    c = config
    if c.input_dim < c.conv_kernel:
        raise ValueError(f"input dim {c.input_dim} smaller than conv kernel {c.conv_kernel}")
    conv_out = (c.input_dim - c.conv_kernel) // c.conv_stride + 1
    flat = c.conv_filters * conv_out

    def unif(fan_in, shape):
        lim = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-lim, lim, size=shape)

    return MatchModel(
        config=config,
        conv_w=unif(c.conv_kernel, (c.conv_filters, c.conv_kernel)),
        conv_b=np.zeros(c.conv_filters),
        w1=unif(flat, (flat, c.dense_units)),
        b1=np.zeros(c.dense_units),
        w2=unif(c.dense_units, (c.dense_units, c.rep_dim)),
        b2=np.zeros(c.rep_dim),
    )


# --- forward / backward ------------------------------------------------------


def _conv_windows(x: np.ndarray, kernel: int, stride: int) -> np.ndarray:
    """(batch, out_len, kernel) sliding windows of a (batch, dim) input."""
    batch, dim = x.shape
    out_len = (dim - kernel) // stride + 1
    idx = (np.arange(out_len) * stride)[:, None] + np.arange(kernel)[None, :]
    return x[:, idx]


def _forward_batch(model: MatchModel, x: np.ndarray, cache: bool = False):
    c = model.config
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != c.input_dim:
        raise DimensionMismatch(f"input dim {x.shape[1]} != configured {c.input_dim}")
    if model.input_center is not None:
        x = (x - model.input_center) * model.input_scale
    win = _conv_windows(x, c.conv_kernel, c.conv_stride)  # (B, L, k)
    z1 = np.einsum("blk,fk->bfl", win, model.conv_w) + model.conv_b[None, :, None]
    a1 = np.maximum(z1, 0.0)
    flat = a1.reshape(x.shape[0], -1)
    z2 = flat @ model.w1 + model.b1
    a2 = np.maximum(z2, 0.0)
    z3 = a2 @ model.w2 + model.b2
    norm = np.linalg.norm(z3, axis=1, keepdims=True)
    safe = np.where(norm > 0.0, norm, 1.0)
    rep = z3 / safe
    if not cache:
        return rep
    return rep, {"x": x, "win": win, "z1": z1, "a1": a1, "flat": flat, "z2": z2, "a2": a2, "z3": z3, "norm": safe, "rep": rep}


def forward(model: MatchModel, x: np.ndarray) -> np.ndarray:
    """Unit-norm representation of one input vector."""
    return _forward_batch(model, x)[0]


def _backward_batch(model: MatchModel, cache: dict, grad_rep: np.ndarray) -> list[np.ndarray]:
    """Gradients of sum(loss) for a batch that produced ``cache``."""
    c = model.config
    rep, norm = cache["rep"], cache["norm"]
    # through y = z/||z||: g_z = (g - (g.y) y) / ||z||
    dot = np.sum(grad_rep * rep, axis=1, keepdims=True)
    g_z3 = (grad_rep - dot * rep) / norm
    g_w2 = cache["a2"].T @ g_z3
    g_b2 = g_z3.sum(axis=0)
    g_a2 = g_z3 @ model.w2.T
    g_z2 = g_a2 * (cache["z2"] > 0.0)
    g_w1 = cache["flat"].T @ g_z2
    g_b1 = g_z2.sum(axis=0)
    g_flat = g_z2 @ model.w1.T
    g_a1 = g_flat.reshape(cache["a1"].shape)
    g_z1 = g_a1 * (cache["z1"] > 0.0)
    g_conv_w = np.einsum("bfl,blk->fk", g_z1, cache["win"])
    g_conv_b = g_z1.sum(axis=(0, 2))
    return [g_conv_w, g_conv_b, g_w1, g_b1, g_w2, g_b2]


def pair_loss(model: MatchModel, example: MatchExample, margin: float | None = None) -> float:
    """Contrastive loss of one example; zero on the satisfied regions."""
    margin = model.config.margin if margin is None else margin
    ra = forward(model, example.ss)
    rb = forward(model, example.sp)
    s = float(ra @ rb)
    if example.label == 1:
        return (1.0 - s) ** 2
    return max(0.0, s - (1.0 - margin)) ** 2


def batch_loss_and_grads(model: MatchModel, batch: list[MatchExample], margin: float | None = None):
    """Mean loss over the batch and matching analytic parameter gradients."""
    margin = model.config.margin if margin is None else margin
    if not batch:
        return 0.0, [np.zeros_like(p) for p in model.params()]
    xa = np.stack([ex.ss for ex in batch])
    xb = np.stack([ex.sp for ex in batch])
    labels = np.array([ex.label for ex in batch], dtype=np.float64)
    ra, ca = _forward_batch(model, xa, cache=True)
    rb, cb = _forward_batch(model, xb, cache=True)
    s = np.sum(ra * rb, axis=1)
    hinge = np.maximum(0.0, s - (1.0 - margin))
    losses = np.where(labels == 1.0, (1.0 - s) ** 2, hinge**2)
    n = len(batch)
    dL_ds = np.where(labels == 1.0, -2.0 * (1.0 - s), 2.0 * hinge) / n
    grads_a = _backward_batch(model, ca, dL_ds[:, None] * rb)
    grads_b = _backward_batch(model, cb, dL_ds[:, None] * ra)
    return float(losses.mean()), [ga + gb for ga, gb in zip(grads_a, grads_b)]


def grad_check(model: MatchModel, batch: list[MatchExample], eps: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients."""
    if not 1e-6 <= eps <= 1e-3:
        raise ValueError("eps must be in [1e-6, 1e-3]")
    _, grads = batch_loss_and_grads(model, batch)
    worst = 0.0
    for p, g in zip(model.params(), grads):
        flat_p = p.ravel()
        flat_g = g.ravel()
        for i in range(flat_p.size):
            orig = flat_p[i]
            flat_p[i] = orig + eps
            hi, _ = batch_loss_and_grads(model, batch)
            flat_p[i] = orig - eps
            lo, _ = batch_loss_and_grads(model, batch)
            flat_p[i] = orig
            num = (hi - lo) / (2.0 * eps)
            denom = max(abs(num), abs(flat_g[i]), 1e-8)
            worst = max(worst, abs(num - flat_g[i]) / denom)
    return worst


# --- training ----------------------------------------------------------------


def train_matcher(dataset: list[MatchExample], config: MatcherConfig, validation: list[MatchExample] | None = None) -> MatchModel:
    """Minibatch gradient descent with momentum; deterministic per seed.

    The decision threshold stored on the model is the score cut maximizing
    F1 on ``validation`` (or the training set when absent).
    """
    labels = {ex.label for ex in dataset}
    if labels != {0, 1}:
        raise SingleClass(f"need both labels, got {sorted(labels)}")
    model = init_model(config)
    stacked = np.vstack([np.stack([ex.ss for ex in dataset]), np.stack([ex.sp for ex in dataset])])
    model.input_center = stacked.mean(axis=0)
    model.input_scale = 1.0 / (stacked.std(axis=0) + 1e-2)
    rng = np.random.default_rng(config.seed + 1)
    velocity = [np.zeros_like(p) for p in model.params()]
    order = np.arange(len(dataset))
    for _epoch in range(config.epochs):
        rng.shuffle(order)
        epoch_losses = []
        for start in range(0, len(order), config.batch_size):
            batch = [dataset[i] for i in order[start : start + config.batch_size]]
            loss, grads = batch_loss_and_grads(model, batch)
            if np.isnan(loss):
                raise Divergence("training loss is NaN")
            epoch_losses.append(loss)
            for p, v, g in zip(model.params(), velocity, grads):
                v *= config.momentum
                v -= config.learning_rate * g
                p += v
        model.history.append(float(np.mean(epoch_losses)))
    model.decision_threshold = _best_threshold(model, validation or dataset)
    return model


def predict_match(model: MatchModel, ss: np.ndarray, sp: np.ndarray) -> float:
    """Match score in [0, 1]: cosine of the two representations, rescaled."""
    ra = forward(model, ss)
    rb = forward(model, sp)
    return float((ra @ rb + 1.0) / 2.0)


def _scores(model: MatchModel, dataset: list[MatchExample]) -> np.ndarray:
    xa = np.stack([ex.ss for ex in dataset])
    xb = np.stack([ex.sp for ex in dataset])
    ra = _forward_batch(model, xa)
    rb = _forward_batch(model, xb)
    return (np.sum(ra * rb, axis=1) + 1.0) / 2.0


def _best_threshold(model: MatchModel, dataset: list[MatchExample]) -> float:
    scores = _scores(model, dataset)
    labels = np.array([ex.label for ex in dataset])
    best_t, best_f1 = 0.5, -1.0
    for t in np.unique(np.round(scores, 6)):
        f1 = _f1(labels, scores >= t)
        if f1 > best_f1:
            best_f1, best_t = f1, float(t)
    return best_t


def _f1(labels: np.ndarray, preds: np.ndarray) -> float:
    tp = int(np.sum(preds & (labels == 1)))
    fp = int(np.sum(preds & (labels == 0)))
    fn = int(np.sum(~preds & (labels == 1)))
    if 2 * tp + fp + fn == 0:
        return 0.0
    return 2 * tp / (2 * tp + fp + fn)


def evaluate_matcher(model: MatchModel, dataset: list[MatchExample]) -> dict[str, float]:
    """Precision/recall/F1 of the thresholded match decision, per class.

    The match (label 1) class fills the ``*_ss`` report columns and the
    non-match class the ``*_sp`` columns.
    """
    scores = _scores(model, dataset)
    labels = np.array([ex.label for ex in dataset])
    preds = scores >= model.decision_threshold
    out = {}
    for suffix, positive in (("ss", 1), ("sp", 0)):
        p = preds if positive == 1 else ~preds
        y = labels == positive
        tp = int(np.sum(p & y))
        fp = int(np.sum(p & ~y))
        fn = int(np.sum(~p & y))
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        out[f"precision_{suffix}"] = precision
        out[f"recall_{suffix}"] = recall
        out[f"f1_{suffix}"] = f1
    return out


def match_f1(model: MatchModel, dataset: list[MatchExample]) -> float:
    return evaluate_matcher(model, dataset)["f1_ss"]


def triplet_satisfaction(model: MatchModel, triples: list[tuple[np.ndarray, np.ndarray, np.ndarray]], margin: float | None = None) -> float:
    """Fraction of (ss, sp, other_sp) triples separated by the margin."""
    margin = model.config.margin if margin is None else margin
    if not triples:
        return 0.0
    ok = 0
    for ss, sp, sp_neg in triples:
        r = forward(model, ss)
        pos = float(r @ forward(model, sp))
        neg = float(r @ forward(model, sp_neg))
        if pos >= neg + margin:
            ok += 1
    return ok / len(triples)


# --- ablation report ---------------------------------------------------------

ABLATION_CONFIGS: tuple[tuple[str, dict], ...] = (
    ("content", {"use_content": True, "use_psy": False, "use_role_prob": False, "use_covid": False}),
    ("psy+prob", {"use_content": False, "use_psy": True, "use_role_prob": True, "use_covid": False}),
    ("psy+prob+covid", {"use_content": False, "use_psy": True, "use_role_prob": True, "use_covid": True}),
    ("content+psy+prob+covid", {"use_content": True, "use_psy": True, "use_role_prob": True, "use_covid": True}),
)

ABLATION_CSV_HEADER = "config,precision_ss,precision_sp,recall_ss,recall_sp,f1_ss,f1_sp"


def ablation_report_csv(rows: list[tuple[str, dict[str, float]]]) -> str:
    lines = [ABLATION_CSV_HEADER]
    for name, metrics in rows:
        lines.append(
            f"{name},{metrics['precision_ss']:.4f},{metrics['precision_sp']:.4f},"
            f"{metrics['recall_ss']:.4f},{metrics['recall_sp']:.4f},"
            f"{metrics['f1_ss']:.4f},{metrics['f1_sp']:.4f}"
        )
    return "\n".join(lines) + "\n"
