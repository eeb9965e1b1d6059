import numpy as np
import pytest

from kimatch.roles import (
    DimensionMismatch,
    RoleHyperparams,
    RoleModel,
    SingleClass,
    build_role_input,
    evaluate_roles,
    log_loss,
    log_loss_grad,
    predict_role,
    predict_user_role,
    train_roles,
)


def _separable_2d(n=60, seed=0):
    rng = np.random.default_rng(seed)
    X0 = rng.normal(loc=[-2.0, -2.0], scale=0.4, size=(n // 2, 2))
    X1 = rng.normal(loc=[2.0, 2.0], scale=0.4, size=(n // 2, 2))
    X = np.vstack([X0, X1])
    y = np.array([0] * (n // 2) + [1] * (n // 2), dtype=np.float64)
    return X, y


def test_separable_set_reaches_full_accuracy():
    X, y = _separable_2d()
    # brute-force check the set really is linearly separable by w=(1,1)
    assert all((x.sum() > 0) == bool(label) for x, label in zip(X, y))
    model = train_roles(X, y, RoleHyperparams(epochs=200, learning_rate=0.5), seed=0)
    preds = np.array([predict_role(model, x).label for x in X])
    assert (preds == y).mean() == 1.0


def test_identical_inputs_converge_to_class_prior():
    X = np.ones((20, 3))
    y = np.array([1.0] * 15 + [0.0] * 5)
    model = train_roles(X, y, RoleHyperparams(epochs=3000, learning_rate=0.3, balance_classes=False), seed=0)
    p = predict_role(model, X[0]).p_ss
    assert p == pytest.approx(0.75, abs=0.01)


def test_training_deterministic_bitwise():
    X, y = _separable_2d(seed=3)
    m1 = train_roles(X, y, seed=42)
    m2 = train_roles(X, y, seed=42)
    assert np.array_equal(m1.weights, m2.weights)
    assert m1.bias == m2.bias


def test_final_loss_below_initial():
    X, y = _separable_2d(seed=5)
    m = train_roles(X, y, seed=1)
    assert m.meta["final_loss"] < m.meta["initial_loss"]


def test_single_class_rejected():
    X = np.ones((4, 2))
    with pytest.raises(SingleClass):
        train_roles(X, np.ones(4), seed=0)


def test_predict_zero_model_gives_half():
    model = RoleModel(weights=np.zeros(3), bias=0.0)
    assert predict_role(model, np.array([1.0, 2.0, 3.0])).p_ss == 0.5


def test_predict_large_margin_saturates():
    model = RoleModel(weights=np.array([100.0]), bias=0.0)
    assert predict_role(model, np.array([10.0])).p_ss == pytest.approx(1.0)
    assert predict_role(model, np.array([-10.0])).p_ss == pytest.approx(0.0)


def test_predict_hand_logistic():
    model = RoleModel(weights=np.array([0.5, -1.0]), bias=0.25)
    x = np.array([2.0, 1.0])
    z = 0.5 * 2.0 - 1.0 * 1.0 + 0.25
    assert predict_role(model, x).p_ss == pytest.approx(1.0 / (1.0 + np.exp(-z)))


def test_probabilities_sum_to_one():
    model = RoleModel(weights=np.array([0.3, 0.7]), bias=-0.2)
    pred = predict_role(model, np.array([1.0, -1.0]))
    assert pred.p_ss + pred.p_sp == pytest.approx(1.0)


def test_predict_dimension_mismatch():
    model = RoleModel(weights=np.zeros(3), bias=0.0)
    with pytest.raises(DimensionMismatch):
        predict_role(model, np.zeros(4))


def test_evaluate_all_correct_and_all_wrong():
    X, y = _separable_2d(seed=7)
    model = train_roles(X, y, RoleHyperparams(epochs=300), seed=0)
    metrics = evaluate_roles(model, X, y)
    assert metrics["SS"]["f1"] == 1.0 and metrics["SP"]["f1"] == 1.0
    flipped = evaluate_roles(model, X, 1 - y)
    assert flipped["SS"]["f1"] == 0.0 and flipped["SP"]["f1"] == 0.0


def test_evaluate_confusion_fixture():
    # TP=8, FP=2, FN=4 for the SS class, built explicitly
    model = RoleModel(weights=np.array([10.0]), bias=0.0)
    X = np.array([[1.0]] * 10 + [[-1.0]] * 10)  # 10 predicted SS, 10 predicted SP
    y = np.array([1] * 8 + [0] * 2 + [1] * 4 + [0] * 6, dtype=float)
    m = evaluate_roles(model, X, y)["SS"]
    assert m["precision"] == pytest.approx(0.8)
    assert m["recall"] == pytest.approx(2 / 3)
    assert m["f1"] == pytest.approx(2 * 0.8 * (2 / 3) / (0.8 + 2 / 3))


def test_gradient_matches_central_differences():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(12, 4))
    y = (rng.random(12) > 0.5).astype(np.float64)
    w = rng.normal(size=4) * 0.5
    b = 0.3
    sw = rng.uniform(0.5, 2.0, size=12)
    gw, gb = log_loss_grad(w, b, X, y, sw, l2=0.1)
    eps = 1e-6
    for i in range(4):
        wp, wm = w.copy(), w.copy()
        wp[i] += eps
        wm[i] -= eps
        num = (log_loss(wp, b, X, y, sw, 0.1) - log_loss(wm, b, X, y, sw, 0.1)) / (2 * eps)
        assert abs(num - gw[i]) / max(abs(num), 1e-10) < 1e-6
    num_b = (log_loss(w, b + eps, X, y, sw, 0.1) - log_loss(w, b - eps, X, y, sw, 0.1)) / (2 * eps)
    assert abs(num_b - gb) / max(abs(num_b), 1e-10) < 1e-6


def test_imbalanced_planted_roles_recovered():
    # ~100:1 imbalance, separable by construction
    rng = np.random.default_rng(9)
    n_ss, n_sp = 2000, 20
    X_ss = rng.normal(loc=1.2, scale=0.3, size=(n_ss, 3))
    X_sp = rng.normal(loc=-1.2, scale=0.3, size=(n_sp, 3))
    X = np.vstack([X_ss, X_sp])
    y = np.array([1.0] * n_ss + [0.0] * n_sp)
    model = train_roles(X, y, RoleHyperparams(epochs=300, learning_rate=0.5, balance_classes=True), seed=0)
    metrics = evaluate_roles(model, X, y)
    assert metrics["SS"]["f1"] >= 0.9
    assert metrics["SP"]["f1"] >= 0.9


def test_user_level_mean_probability():
    model = RoleModel(weights=np.array([1.0]), bias=0.0)
    inputs = [np.array([2.0]), np.array([-2.0])]
    expected = np.mean([predict_role(model, x).p_ss for x in inputs])
    assert predict_user_role(model, inputs).p_ss == pytest.approx(expected)


def test_model_json_roundtrip(tmp_path):
    X, y = _separable_2d(seed=11)
    m = train_roles(X, y, seed=2)
    path = tmp_path / "role.json"
    m.save(path)
    again = RoleModel.load(path)
    assert np.array_equal(again.weights, m.weights)
    assert again.meta["seed"] == 2


def test_build_role_input_excludes_role_prob(categories, emotion_scale):
    from kimatch.features import FeatureVector

    fv = FeatureVector(psy=(0.1,) * 6, covid=(0.2,) * 3, emotion=5.0, role_prob=0.9)
    x = build_role_input(np.zeros(4), fv)
    assert x.shape == (4 + 10,)
    assert 0.9 not in x[4:]
