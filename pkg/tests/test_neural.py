"""MLP scorer, LSTM regressor, gradient checks, and weight files."""

import numpy as np
import pytest

from seamesh.channel import CqiTrace, TraceParams, generate_cqi_trace
from seamesh.neural.common import (TrainConfig, clip_gradients, sigmoid,
                                   xavier_uniform)
from seamesh.neural.gradcheck import grad_check
from seamesh.neural.lstm import (CQI_SCALE, cqi_from_tensors, cqi_tensors,
                                 init_cqi_predictor, lstm_loss_and_grad,
                                 lstm_step, make_windows, predict_window,
                                 run_sequence, train_cqi)
from seamesh.neural.mlp import (init_pruner, mlp_forward, mlp_loss_and_grad,
                                pruner_from_tensors, pruner_tensors,
                                train_pruner)
from seamesh.neural.weights_io import MAGIC, load_weights, save_weights


class Dataset:
    def __init__(self, X, y):
        self.X = X
        self.y = y


def trace_from(cqi):
    cqi = np.asarray(cqi, dtype=np.int64)
    return CqiTrace(cqi.astype(float), cqi, 1e-3)


# ---- feedforward scorer ----

def test_mlp_zero_weights_scores_half():
    model = init_pruner((4, 5, 1), seed=0)
    for W, b in model.layers:
        W[:] = 0.0
        b[:] = 0.0
    assert mlp_forward(model, np.zeros(4)) == 0.5
    out = mlp_forward(model, np.random.default_rng(0).normal(size=(7, 4)))
    assert np.all(out == 0.5)


def test_mlp_forward_matches_scalar_recompute():
    model = init_pruner((3, 4, 1), seed=2)
    x = np.array([0.3, -1.2, 0.7])
    (W1, b1), (W2, b2) = model.layers
    hidden = np.tanh(W1 @ x + b1)
    z = (W2 @ hidden)[0] + b2[0]
    want = 1.0 / (1.0 + np.exp(-z))
    assert mlp_forward(model, x) == pytest.approx(want, rel=1e-12)


def test_mlp_learns_separable_data():
    rng = np.random.default_rng(5)
    X = rng.uniform(0, 1, size=(400, 2))
    y = (X[:, 0] > X[:, 1]).astype(float)
    model = train_pruner(Dataset(X, y), TrainConfig(lr=0.5, epochs=120, seed=0))
    pred = (mlp_forward(model, X) >= 0.5).astype(float)
    assert (pred == y).mean() >= 0.95
    assert model.train_losses[-1] < model.train_losses[0]


def test_train_pruner_rejects_degenerate_datasets():
    X = np.random.default_rng(0).normal(size=(10, 3))
    cfg = TrainConfig(lr=0.1, epochs=1)
    with pytest.raises(ValueError):
        train_pruner(Dataset(X, np.ones(10)), cfg)
    with pytest.raises(ValueError):
        train_pruner(Dataset(np.empty((0, 3)), np.empty(0)), cfg)


def test_train_pruner_deterministic():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(60, 4))
    y = (X[:, 0] + X[:, 1] > 0).astype(float)
    cfg = TrainConfig(lr=0.2, epochs=5, seed=9)
    a = train_pruner(Dataset(X, y), cfg)
    b = train_pruner(Dataset(X, y), cfg)
    for (Wa, ba), (Wb, bb) in zip(a.layers, b.layers):
        assert Wa.tobytes() == Wb.tobytes()
        assert ba.tobytes() == bb.tobytes()


@pytest.mark.parametrize("loss", ["bce", "mse"])
def test_mlp_gradients_match_finite_differences(loss):
    rng = np.random.default_rng(11)
    model = init_pruner((3, 4, 1), seed=4)
    X = rng.normal(size=(6, 3))
    y = rng.integers(0, 2, size=6).astype(float)
    params = pruner_tensors(model)
    err = grad_check(params,
                     lambda: mlp_loss_and_grad(model, X, y, loss))
    assert err < 1e-6


# ---- recurrent regressor ----

def test_lstm_zero_weights_is_persistence():
    model = init_cqi_predictor(hidden=3, seed=0)
    for t in cqi_tensors(model):
        t[...] = 0.0
    xs = np.array([0.1, 0.9, 0.4, 0.4, 0.0])
    assert np.array_equal(run_sequence(model, xs), xs)


def test_lstm_step_matches_hand_recompute():
    model = init_cqi_predictor(hidden=2, seed=7)
    rng = np.random.default_rng(0)
    h = rng.normal(size=2)
    c = rng.normal(size=2)
    x = 0.63

    def sig(v):
        return 1.0 / (1.0 + np.exp(-v))

    i = sig(model.Wi[:, 0] * x + model.Ui @ h + model.bi)
    f = sig(model.Wf[:, 0] * x + model.Uf @ h + model.bf)
    o = sig(model.Wo[:, 0] * x + model.Uo @ h + model.bo)
    g = np.tanh(model.Wg[:, 0] * x + model.Ug @ h + model.bg)
    c2 = f * c + i * g
    h2 = o * np.tanh(c2)
    y_want = x + float(model.w_out @ h2 + model.b_out)

    y, (h_new, c_new) = lstm_step(model, x, (h, c))
    assert y == pytest.approx(y_want, rel=1e-12)
    assert np.allclose(h_new, h2, atol=1e-12)
    assert np.allclose(c_new, c2, atol=1e-12)


def test_lstm_step_rejects_state_mismatch():
    model = init_cqi_predictor(hidden=3, seed=0)
    with pytest.raises(ValueError):
        lstm_step(model, 0.5, (np.zeros(2), np.zeros(2)))


def test_state_threading_matches_full_pass():
    model = init_cqi_predictor(hidden=4, seed=3)
    xs = np.random.default_rng(2).uniform(0, 1, size=12)
    full = run_sequence(model, xs)
    h, c = np.zeros(4), np.zeros(4)
    ys = []
    for x in xs:
        y, (h, c) = lstm_step(model, float(x), (h, c))
        ys.append(y)
    assert np.allclose(full, ys, atol=1e-12)


def test_make_windows_shapes_and_horizon():
    z = np.arange(30)
    tr = trace_from(np.clip(z, 0, 15))
    xs, zs = make_windows([tr], window=8, stride=4, horizon=3)
    raw = np.clip(z, 0, 15) / CQI_SCALE
    assert xs.shape == zs.shape
    assert np.array_equal(xs[0], raw[0:8])
    assert np.array_equal(zs[0], raw[3:11])
    assert np.array_equal(xs[1], raw[4:12])
    xs1, zs1 = make_windows([tr], window=8, stride=4)
    assert np.array_equal(zs1[0], raw[1:9])
    with pytest.raises(ValueError):
        make_windows([tr], window=8, horizon=0)
    with pytest.raises(ValueError):
        make_windows([trace_from([1, 2, 3])], window=8)


def test_train_cqi_deterministic_and_learns():
    traces = [generate_cqi_trace(400, TraceParams(), seed=s) for s in (0, 1)]
    cfg = TrainConfig(lr=0.3, epochs=6, seed=0, loss="mse", momentum=0.9,
                      clip_norm=1.0)
    a = train_cqi(traces, window=12, cfg=cfg, hidden=6)
    b = train_cqi(traces, window=12, cfg=cfg, hidden=6)
    for ta, tb in zip(cqi_tensors(a), cqi_tensors(b)):
        assert ta.tobytes() == tb.tobytes()
    assert a.train_mse[-1] < a.train_mse[0]
    assert len(a.val_mse) == cfg.epochs


def test_predict_window_validates_and_clamps():
    model = init_cqi_predictor(hidden=4, seed=0, window=6)
    with pytest.raises(ValueError):
        predict_window(model, np.zeros(5))
    out = predict_window(model, np.full(6, 15.0))
    assert isinstance(out, int) and 0 <= out <= 15


def test_lstm_gradients_match_finite_differences():
    rng = np.random.default_rng(21)
    model = init_cqi_predictor(hidden=3, seed=13)
    xs = rng.uniform(0, 1, size=(2, 5))
    zs = rng.uniform(0, 1, size=(2, 5))
    params = cqi_tensors(model)
    err = grad_check(params, lambda: lstm_loss_and_grad(model, xs, zs))
    assert err < 1e-4


def test_cqi_tensor_round_trip_and_validation():
    model = init_cqi_predictor(hidden=4, seed=5, window=9, horizon=3)
    tensors = cqi_tensors(model)
    clone = cqi_from_tensors([t.copy() for t in tensors], window=9, horizon=3)
    xs = np.random.default_rng(3).uniform(0, 1, size=7)
    assert np.array_equal(run_sequence(model, xs), run_sequence(clone, xs))
    assert clone.window == 9 and clone.horizon == 3
    with pytest.raises(ValueError):
        cqi_from_tensors(tensors[:13])
    bad = [t.copy() for t in tensors]
    bad[1] = np.zeros((4, 3))
    with pytest.raises(ValueError):
        cqi_from_tensors(bad)


# ---- shared pieces ----

def test_sigmoid_is_stable_at_extremes():
    with np.errstate(over="raise"):
        out = sigmoid(np.array([-500.0, -30.0, 0.0, 30.0, 500.0]))
    assert np.all((out >= 0.0) & (out <= 1.0))
    assert out[2] == 0.5


def test_clip_gradients_caps_global_norm():
    grads = [np.array([3.0, 4.0]), np.array([0.0])]
    clipped = clip_gradients(grads, 1.0)
    total = np.sqrt(sum(np.sum(g * g) for g in clipped))
    assert total == pytest.approx(1.0, rel=1e-12)
    same = clip_gradients(grads, 100.0)
    assert same[0] is grads[0]
    off = clip_gradients(grads, 0.0)
    assert off is grads


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(lr=0.0, epochs=1)
    with pytest.raises(ValueError):
        TrainConfig(lr=0.1, epochs=0)
    with pytest.raises(ValueError):
        TrainConfig(lr=0.1, epochs=1, loss="hinge")
    with pytest.raises(ValueError):
        TrainConfig(lr=0.1, epochs=1, momentum=1.0)
    with pytest.raises(ValueError):
        TrainConfig(lr=0.1, epochs=1, clip_norm=-0.5)


def test_xavier_uniform_bounds():
    rng = np.random.default_rng(0)
    W = xavier_uniform(rng, 8, 4, (4, 8))
    limit = np.sqrt(6.0 / 12.0)
    assert np.all(np.abs(W) <= limit)


# ---- weight files ----

def test_weight_file_round_trip(tmp_path):
    tensors = [np.array(1.5), np.arange(4.0), np.arange(6.0).reshape(2, 3)]
    path = tmp_path / "w.bin"
    save_weights(path, tensors)
    loaded = load_weights(path)
    assert len(loaded) == 3
    for a, b in zip(tensors, loaded):
        assert a.shape == b.shape
        assert np.array_equal(a, b)
    save_weights(tmp_path / "w2.bin", loaded)
    assert (tmp_path / "w.bin").read_bytes() == (tmp_path / "w2.bin").read_bytes()


def test_weight_file_rejects_corruption(tmp_path):
    path = tmp_path / "w.bin"
    save_weights(path, [np.arange(4.0)])
    blob = path.read_bytes()

    bad_magic = tmp_path / "m.bin"
    bad_magic.write_bytes(b"XXXX" + blob[4:])
    with pytest.raises(ValueError, match="magic"):
        load_weights(bad_magic)

    bad_version = tmp_path / "v.bin"
    bad_version.write_bytes(MAGIC + b"\x63\x00" + blob[6:])
    with pytest.raises(ValueError, match="version"):
        load_weights(bad_version)

    truncated = tmp_path / "t.bin"
    truncated.write_bytes(blob[:-8])
    with pytest.raises(ValueError, match="truncated"):
        load_weights(truncated)


def test_pruner_weights_round_trip(tmp_path):
    model = init_pruner((5, 6, 1), seed=8)
    path = tmp_path / "pruner.bin"
    save_weights(path, pruner_tensors(model))
    clone = pruner_from_tensors(load_weights(path))
    X = np.random.default_rng(1).normal(size=(10, 5))
    assert np.array_equal(mlp_forward(model, X), mlp_forward(clone, X))
    with pytest.raises(ValueError):
        pruner_from_tensors(load_weights(path)[:3])


def test_cqi_weights_round_trip(tmp_path):
    model = init_cqi_predictor(hidden=5, seed=2, window=8, horizon=4)
    path = tmp_path / "cqi.bin"
    save_weights(path, cqi_tensors(model))
    clone = cqi_from_tensors(load_weights(path), window=8, horizon=4)
    xs = np.random.default_rng(4).uniform(0, 1, size=10)
    assert np.array_equal(run_sequence(model, xs), run_sequence(clone, xs))
