import numpy as np
import pytest

from kimatch.features import FeatureVector
from kimatch.matcher import (
    ABLATION_CONFIGS,
    ABLATION_CSV_HEADER,
    DimensionMismatch,
    Divergence,
    MatchExample,
    MatcherConfig,
    MatchModel,
    MissingComponent,
    SingleClass,
    ablation_report_csv,
    batch_loss_and_grads,
    build_input,
    evaluate_matcher,
    forward,
    grad_check,
    init_model,
    match_f1,
    pair_loss,
    predict_match,
    train_matcher,
    triplet_satisfaction,
)
from kimatch.synth import make_match_dataset

FV = FeatureVector(psy=(0.1, 0.2, 0.0, 0.3, 0.0, 0.1), covid=(0.05, 0.0, 0.1), emotion=5.4, role_prob=0.8)


def test_build_input_content_only():
    cfg = MatcherConfig(use_psy=False, use_role_prob=False, use_covid=False)
    x = build_input(cfg, content=np.zeros(256))
    assert x.shape == (256,)


def test_build_input_all_blocks():
    cfg = MatcherConfig()
    x = build_input(cfg, content=np.ones(256), features=FV, p_ss=0.8)
    assert x.shape == (256 + 6 + 1 + 3,)
    assert cfg.input_dim == 266
    # fixed order: content | psy | role | covid
    assert np.allclose(x[256:262], FV.psy)
    assert x[262] == 0.8
    assert np.allclose(x[263:], FV.covid)


def test_build_input_psy_prob_row():
    cfg = MatcherConfig(use_content=False, use_covid=False)
    x = build_input(cfg, features=FV)
    assert x.shape == (7,)
    assert x[-1] == FV.role_prob


def test_build_input_missing_component():
    cfg = MatcherConfig()
    with pytest.raises(MissingComponent):
        build_input(cfg, content=None, features=FV)
    with pytest.raises(MissingComponent):
        build_input(MatcherConfig(use_content=False), content=None, features=None)


def test_config_validation():
    with pytest.raises(ValueError):
        MatcherConfig(use_content=False, use_psy=False, use_role_prob=False, use_covid=False)
    with pytest.raises(ValueError):
        MatcherConfig(margin=0.0)
    with pytest.raises(ValueError):
        MatcherConfig(conv_filters=0)


def _tiny_model():
    cfg = MatcherConfig(
        use_psy=False, use_role_prob=False, use_covid=False, content_dim=3,
        conv_filters=1, conv_kernel=2, conv_stride=1, dense_units=2, rep_dim=2, seed=0,
    )
    model = init_model(cfg)
    model.conv_w = np.array([[1.0, 2.0]])
    model.conv_b = np.array([0.5])
    model.w1 = np.array([[1.0, -1.0], [0.5, 0.5]])
    model.b1 = np.zeros(2)
    model.w2 = np.array([[1.0, 0.0], [0.0, 1.0]])
    model.b2 = np.array([0.1, 0.2])
    return model


def test_forward_manual_propagation():
    model = _tiny_model()
    x = np.array([1.0, 0.0, 1.0])
    # windows [1,0], [0,1]; conv -> [1*1+2*0+0.5, 1*0+2*1+0.5] = [1.5, 2.5]; relu same
    # dense1: [1.5*1+2.5*0.5, 1.5*-1+2.5*0.5] = [2.75, -0.25]; relu -> [2.75, 0]
    # dense2 + bias -> [2.85, 0.2]; normalize
    z3 = np.array([2.85, 0.2])
    expected = z3 / np.linalg.norm(z3)
    assert np.allclose(forward(model, x), expected, atol=1e-12)


def test_forward_deterministic_and_unit_norm():
    cfg = MatcherConfig(content_dim=32, use_psy=False, use_role_prob=False, use_covid=False, seed=5)
    model = init_model(cfg)
    rng = np.random.default_rng(1)
    x = rng.normal(size=32)
    r1, r2 = forward(model, x), forward(model, x)
    assert np.array_equal(r1, r2)
    assert np.linalg.norm(r1) == pytest.approx(1.0, abs=1e-9)


def test_forward_dimension_mismatch():
    model = _tiny_model()
    with pytest.raises(DimensionMismatch):
        forward(model, np.zeros(5))


def test_pair_loss_label1_identical_zero():
    model = _tiny_model()
    x = np.array([1.0, 0.0, 1.0])
    assert pair_loss(model, MatchExample(ss=x, sp=x, label=1)) == pytest.approx(0.0)


def test_pair_loss_label0_values():
    # representations engineered via identical inputs: s = 1
    model = _tiny_model()
    x = np.array([1.0, 0.0, 1.0])
    loss = pair_loss(model, MatchExample(ss=x, sp=x, label=0), margin=0.2)
    assert loss == pytest.approx((1.0 - 0.8) ** 2)


def test_pair_loss_hinge_inactive_region():
    cfg = MatcherConfig(content_dim=8, use_psy=False, use_role_prob=False, use_covid=False, seed=2)
    model = init_model(cfg)
    rng = np.random.default_rng(0)
    for _ in range(20):
        ex = MatchExample(ss=rng.normal(size=8), sp=rng.normal(size=8), label=0)
        ra, rb = forward(model, ex.ss), forward(model, ex.sp)
        s = float(ra @ rb)
        loss = pair_loss(model, ex, margin=0.2)
        assert loss >= 0.0
        if s <= 0.8:
            assert loss == 0.0


def test_triplet_satisfaction_trivials():
    model = _tiny_model()
    a = np.array([1.0, 0.0, 1.0])
    b = np.array([0.0, 1.0, 0.0])
    # sp identical to ss, negative far away
    assert triplet_satisfaction(model, [(a, a, b)], margin=0.2) in (0.0, 1.0)
    # sp == sp_bar can never satisfy a positive margin
    assert triplet_satisfaction(model, [(a, b, b)], margin=0.2) == 0.0


def test_triplet_satisfaction_matches_bruteforce_loop():
    cfg = MatcherConfig(content_dim=12, use_psy=False, use_role_prob=False, use_covid=False, seed=7)
    model = init_model(cfg)
    rng = np.random.default_rng(3)
    triples = [tuple(rng.normal(size=12) for _ in range(3)) for _ in range(100)]
    got = triplet_satisfaction(model, triples, margin=0.15)
    ok = 0
    for ss, sp, spb in triples:
        pos = float(forward(model, ss) @ forward(model, sp))
        neg = float(forward(model, ss) @ forward(model, spb))
        ok += pos >= neg + 0.15
    assert got == pytest.approx(ok / 100)


def test_cosine_margin_scale_invariance():
    # the satisfaction predicate only sees directions
    rng = np.random.default_rng(0)
    from kimatch.embed import cosine

    for _ in range(50):
        a, b, c = rng.normal(size=(3, 6))
        lhs = cosine(a, b) >= cosine(a, c) + 0.2
        rhs = cosine(3.7 * a, b * 0.2) >= cosine(a * 1.1, 9.0 * c) + 0.2
        assert lhs == rhs


def test_grad_check_degenerate_network_exact():
    # a one-dimensional representation degenerates to a sign: the normalized
    # output is locally constant, every gradient vanishes identically, and
    # analytic and central-difference gradients agree to rounding
    cfg = MatcherConfig(content_dim=6, use_psy=False, use_role_prob=False, use_covid=False,
                        conv_filters=2, conv_kernel=3, conv_stride=1, dense_units=4, rep_dim=1, seed=0)
    model = init_model(cfg)
    rng = np.random.default_rng(0)
    for p in model.params():
        p[...] = np.abs(p) + 0.05  # ReLUs active, z3 bounded away from zero
    batch = [
        MatchExample(ss=rng.uniform(0.1, 1.0, 6), sp=rng.uniform(0.1, 1.0, 6), label=i % 2)
        for i in range(4)
    ]
    assert grad_check(model, batch, eps=1e-5) <= 1e-8


def test_grad_check_full_network_random_batches():
    rng = np.random.default_rng(0)
    worst = 0.0
    for seed in range(3):
        cfg = MatcherConfig(content_dim=10, use_psy=True, use_role_prob=True, use_covid=True,
                            conv_filters=2, conv_kernel=3, conv_stride=2, dense_units=5, rep_dim=4, seed=seed)
        model = init_model(cfg)
        batch = [
            MatchExample(ss=rng.normal(size=cfg.input_dim), sp=rng.normal(size=cfg.input_dim), label=i % 2)
            for i in range(4)
        ]
        worst = max(worst, grad_check(model, batch, eps=1e-5))
    assert worst <= 1e-4


def test_grad_check_zero_batch():
    model = _tiny_model()
    loss, grads = batch_loss_and_grads(model, [])
    assert loss == 0.0
    assert all(not g.any() for g in grads)
    assert grad_check(model, [], eps=1e-5) == 0.0


def test_grad_check_eps_bounds():
    with pytest.raises(ValueError):
        grad_check(_tiny_model(), [], eps=1e-2)


def test_train_requires_both_labels():
    cfg = MatcherConfig(content_dim=4, use_psy=False, use_role_prob=False, use_covid=False,
                        conv_kernel=2, conv_filters=1, dense_units=2, rep_dim=2)
    xs = [MatchExample(ss=np.ones(4), sp=np.ones(4), label=1)]
    with pytest.raises(SingleClass):
        train_matcher(xs, cfg)


def test_train_deterministic_same_seed():
    cfg = MatcherConfig(epochs=4, seed=9)
    ds = make_match_dataset(cfg, n_train=60, n_test=20, seed=9)
    m1 = train_matcher(ds.train, cfg, validation=ds.test)
    m2 = train_matcher(ds.train, cfg, validation=ds.test)
    for p1, p2 in zip(m1.params(), m2.params()):
        assert np.array_equal(p1, p2)
    assert m1.decision_threshold == m2.decision_threshold


def test_train_loss_decreases_and_planted_f1():
    cfg = MatcherConfig(seed=0)
    ds = make_match_dataset(cfg, seed=0)
    # oracle: a match means the two sides' knowledge blocks agree, so the
    # absolute seeker-provider feature difference is nearest-centroid separable
    rows, labels = ds.knowledge_train, ds.knowledge_labels
    half = rows.shape[1] // 2
    diffs = np.abs(rows[:, :half] - rows[:, half:])
    c1 = diffs[labels == 1].mean(axis=0)
    c0 = diffs[labels == 0].mean(axis=0)
    pred = np.array([1 if np.linalg.norm(d - c1) < np.linalg.norm(d - c0) else 0 for d in diffs])
    assert (pred == labels).mean() >= 0.9
    model = train_matcher(ds.train, cfg, validation=ds.test)
    assert model.history[-1] < model.history[0]
    assert match_f1(model, ds.test) >= 0.9


def test_predict_match_identity_and_symmetry():
    model = _tiny_model()
    a = np.array([1.0, 0.0, 1.0])
    b = np.array([0.2, 0.5, 0.9])
    assert predict_match(model, a, a) == pytest.approx(1.0)
    assert predict_match(model, a, b) == pytest.approx(predict_match(model, b, a))
    assert 0.0 <= predict_match(model, a, b) <= 1.0


def test_predict_match_hand_cosine():
    model = _tiny_model()
    a = np.array([1.0, 0.0, 1.0])
    b = np.array([0.0, 1.0, 0.0])
    ra, rb = forward(model, a), forward(model, b)
    assert predict_match(model, a, b) == pytest.approx((float(ra @ rb) + 1) / 2)


def test_model_json_roundtrip(tmp_path):
    cfg = MatcherConfig(epochs=2, seed=1)
    ds = make_match_dataset(cfg, n_train=40, n_test=12, seed=1)
    model = train_matcher(ds.train, cfg, validation=ds.test)
    path = tmp_path / "m.json"
    model.save(path)
    again = MatchModel.load(path)
    x = ds.test[0]
    assert predict_match(again, x.ss, x.sp) == pytest.approx(predict_match(model, x.ss, x.sp), abs=1e-15)
    assert again.config == model.config


def test_ablation_csv_structure():
    rows = [(name, {k: 0.5 for k in
                    ("precision_ss", "precision_sp", "recall_ss", "recall_sp", "f1_ss", "f1_sp")})
            for name, _ in ABLATION_CONFIGS]
    csv_text = ablation_report_csv(rows)
    lines = csv_text.strip().splitlines()
    assert lines[0] == ABLATION_CSV_HEADER == "config,precision_ss,precision_sp,recall_ss,recall_sp,f1_ss,f1_sp"
    assert len(lines) == 1 + len(ABLATION_CONFIGS)


def test_evaluate_matcher_reports_both_classes():
    cfg = MatcherConfig(epochs=3, seed=4)
    ds = make_match_dataset(cfg, n_train=60, n_test=30, seed=4)
    model = train_matcher(ds.train, cfg, validation=ds.test)
    metrics = evaluate_matcher(model, ds.test)
    assert set(metrics) == {"precision_ss", "precision_sp", "recall_ss", "recall_sp", "f1_ss", "f1_sp"}
    assert all(0.0 <= v <= 1.0 for v in metrics.values())
