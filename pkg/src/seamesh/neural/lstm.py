"""Single-cell LSTM regressor for CQI sequences.

One recurrent layer (scalar input, hidden size H) with a residual linear
readout: the prediction is the current value plus a learned correction,
y_t = x_t + w.h_t + b. Quantized CQI is persistent from slot to slot, so
persistence is the right zero point and training only has to model the
deviation. Trained by truncated backpropagation through time over fixed
windows with one-step-ahead targets. CQI values are normalized to [0, 1]
(divide by 15) for training; predict_window denormalizes, rounds, clamps.
"""

from dataclasses import dataclass, field

import numpy as np

from .common import (MSE, TrainConfig, assert_finite, clip_gradients, sigmoid,
                     xavier_uniform)

CQI_SCALE = 15.0

GATE_NAMES = ("i", "f", "o", "g")


@dataclass
class CqiPredictor:
    Wi: np.ndarray
    Ui: np.ndarray
    bi: np.ndarray
    Wf: np.ndarray
    Uf: np.ndarray
    bf: np.ndarray
    Wo: np.ndarray
    Uo: np.ndarray
    bo: np.ndarray
    Wg: np.ndarray
    Ug: np.ndarray
    bg: np.ndarray
    w_out: np.ndarray
    b_out: np.ndarray  # 0-d array so updates stay in place
    window: int = 16
    horizon: int = 1  # slots between the last input and the predicted value
    train_mse: list = field(default_factory=list)
    val_mse: list = field(default_factory=list)

    @property
    def hidden(self):
        return self.Ui.shape[0]


def init_cqi_predictor(hidden=16, seed=0, window=16, horizon=1):
    rng = np.random.default_rng(seed)
    H = hidden

    def gate():
        W = xavier_uniform(rng, 1, H, (H, 1))
        U = xavier_uniform(rng, H, H, (H, H))
        return W, U

    Wi, Ui = gate()
    Wf, Uf = gate()
    Wo, Uo = gate()
    Wg, Ug = gate()
    # Small readout init keeps the initial model close to plain persistence.
    w_out = 0.1 * xavier_uniform(rng, H, 1, (H,))
    # Forget bias +1 keeps early memory open, standard recurrent practice.
    return CqiPredictor(Wi, Ui, np.zeros(H), Wf, Uf, np.ones(H),
                        Wo, Uo, np.zeros(H), Wg, Ug, np.zeros(H),
                        w_out, np.array(0.0), window, horizon)


def lstm_step(model, x_t, state):
    """One recurrence step. state = (h, c), both shape (H,)."""
    h, c = state
    if h.shape != (model.hidden,) or c.shape != (model.hidden,):
        raise ValueError("state dimension mismatch")
    a_i = model.Wi[:, 0] * x_t + model.Ui @ h + model.bi
    a_f = model.Wf[:, 0] * x_t + model.Uf @ h + model.bf
    a_o = model.Wo[:, 0] * x_t + model.Uo @ h + model.bo
    a_g = model.Wg[:, 0] * x_t + model.Ug @ h + model.bg
    i = sigmoid(a_i)
    f = sigmoid(a_f)
    o = sigmoid(a_o)
    g = np.tanh(a_g)
    c2 = f * c + i * g
    h2 = o * np.tanh(c2)
    y = float(x_t + model.w_out @ h2 + model.b_out)
    return y, (h2, c2)


def run_sequence(model, xs):
    """Outputs for a whole scalar sequence from a zero initial state."""
    h = np.zeros(model.hidden)
    c = np.zeros(model.hidden)
    ys = []
    for x in xs:
        y, (h, c) = lstm_step(model, float(x), (h, c))
        ys.append(y)
    return np.array(ys)


def _forward_windows(model, xs):
    """Batched forward over windows. xs is (B, T); returns outputs (B, T)
    and the per-step cache used by the backward pass."""
    B, T = xs.shape
    H = model.hidden
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    ys = np.zeros((B, T))
    cache = []
    for t in range(T):
        x = xs[:, t:t + 1]
        a_i = x @ model.Wi.T + h @ model.Ui.T + model.bi
        a_f = x @ model.Wf.T + h @ model.Uf.T + model.bf
        a_o = x @ model.Wo.T + h @ model.Uo.T + model.bo
        a_g = x @ model.Wg.T + h @ model.Ug.T + model.bg
        i = sigmoid(a_i)
        f = sigmoid(a_f)
        o = sigmoid(a_o)
        g = np.tanh(a_g)
        c_new = f * c + i * g
        tc = np.tanh(c_new)
        h_new = o * tc
        cache.append((x, h, c, i, f, o, g, c_new, tc, h_new))
        h, c = h_new, c_new
        ys[:, t] = xs[:, t] + h @ model.w_out + float(model.b_out)
    return ys, cache


def lstm_loss_and_grad(model, xs, zs):
    """Window MSE and gradients in canonical tensor order (see
    cqi_tensors). xs and zs are (B, T)."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    zs = np.atleast_2d(np.asarray(zs, dtype=float))
    B, T = xs.shape
    ys, cache = _forward_windows(model, xs)
    err = ys - zs
    loss = float(np.mean(err ** 2))
    dy = 2.0 * err / (B * T)

    H = model.hidden
    dWi, dUi, dbi = np.zeros((H, 1)), np.zeros((H, H)), np.zeros(H)
    dWf, dUf, dbf = np.zeros((H, 1)), np.zeros((H, H)), np.zeros(H)
    dWo, dUo, dbo = np.zeros((H, 1)), np.zeros((H, H)), np.zeros(H)
    dWg, dUg, dbg = np.zeros((H, 1)), np.zeros((H, H)), np.zeros(H)
    dw_out = np.zeros(H)
    db_out = 0.0
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))

    for t in range(T - 1, -1, -1):
        x, h_prev, c_prev, i, f, o, g, c_new, tc, h_new = cache[t]
        dyt = dy[:, t]
        dw_out += dyt @ h_new
        db_out += float(dyt.sum())
        dh = dyt[:, None] * model.w_out[None, :] + dh_next
        do = dh * tc
        da_o = do * o * (1.0 - o)
        dc = dh * o * (1.0 - tc ** 2) + dc_next
        di = dc * g
        da_i = di * i * (1.0 - i)
        df = dc * c_prev
        da_f = df * f * (1.0 - f)
        dg = dc * i
        da_g = dg * (1.0 - g ** 2)

        dWi += da_i.T @ x
        dUi += da_i.T @ h_prev
        dbi += da_i.sum(axis=0)
        dWf += da_f.T @ x
        dUf += da_f.T @ h_prev
        dbf += da_f.sum(axis=0)
        dWo += da_o.T @ x
        dUo += da_o.T @ h_prev
        dbo += da_o.sum(axis=0)
        dWg += da_g.T @ x
        dUg += da_g.T @ h_prev
        dbg += da_g.sum(axis=0)

        dh_next = da_i @ model.Ui + da_f @ model.Uf + da_o @ model.Uo + da_g @ model.Ug
        dc_next = dc * f

    grads = [dWi, dUi, dbi, dWf, dUf, dbf, dWo, dUo, dbo, dWg, dUg, dbg,
             dw_out, np.array(db_out)]
    return loss, grads


def make_windows(traces, window, stride=None, horizon=1):
    """Normalized (inputs, targets) windows. The target at step t is the
    value ``horizon`` slots past the input at step t, so horizon=1 trains a
    one-step-ahead model and horizon=D trains a model that looks straight
    across a D-slot reporting delay."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    stride = stride or max(window // 2, 1)
    xs, zs = [], []
    for tr in traces:
        z = np.asarray(tr.cqi, dtype=float) / CQI_SCALE
        for t0 in range(0, len(z) - window - horizon + 1, stride):
            xs.append(z[t0:t0 + window])
            zs.append(z[t0 + horizon:t0 + window + horizon])
    if not xs:
        raise ValueError("traces too short for the requested window")
    return np.array(xs), np.array(zs)


def train_cqi(traces, window=16, cfg=None, hidden=16, horizon=1):
    """Truncated BPTT over fixed windows; 90/10 train/validation split.
    Deterministic per cfg.seed; epoch MSE lands in model.train_mse and
    model.val_mse. horizon sets how many slots past the last input the
    model predicts (1 for next-slot, D to bridge a D-slot report delay)."""
    if not traces or all(len(t) == 0 for t in traces):
        raise ValueError("no trace data")
    cfg = cfg or TrainConfig(lr=0.3, epochs=40, seed=0, loss=MSE,
                             momentum=0.9, clip_norm=1.0)
    xs, zs = make_windows(traces, window, horizon=horizon)
    rng = np.random.default_rng(cfg.seed)
    perm = rng.permutation(len(xs))
    n_val = max(len(xs) // 10, 1) if len(xs) >= 2 else 0
    val_idx = perm[:n_val]
    train_idx = perm[n_val:]
    if len(train_idx) == 0:
        train_idx = perm

    model = init_cqi_predictor(hidden, cfg.seed, window, horizon)
    tensors = cqi_tensors(model)
    velocity = [np.zeros_like(t) for t in tensors]
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(train_idx))
        for lo in range(0, len(order), cfg.batch_size):
            idx = train_idx[order[lo:lo + cfg.batch_size]]
            _, grads = lstm_loss_and_grad(model, xs[idx], zs[idx])
            grads = clip_gradients(grads, cfg.clip_norm)
            for tns, vel, g in zip(tensors, velocity, grads):
                vel *= cfg.momentum
                vel -= cfg.lr * g
                tns += vel
        tr_loss, _ = lstm_loss_and_grad(model, xs[train_idx], zs[train_idx])
        model.train_mse.append(tr_loss)
        if n_val:
            va_loss, _ = lstm_loss_and_grad(model, xs[val_idx], zs[val_idx])
            model.val_mse.append(va_loss)
        assert_finite(tensors, f"epoch {epoch}")
    return model


def predict_window(model, history):
    """Next-slot CQI from the last `window` raw CQI values."""
    history = np.asarray(history, dtype=float)
    if history.shape != (model.window,):
        raise ValueError(
            f"history must have length {model.window}, got {history.shape}")
    ys = run_sequence(model, history / CQI_SCALE)
    return int(np.clip(np.rint(ys[-1] * CQI_SCALE), 0, 15))


def cqi_tensors(model):
    """Canonical order: per gate (i, f, o, g) the W, U, b triple, then the
    readout weight and bias."""
    return [model.Wi, model.Ui, model.bi, model.Wf, model.Uf, model.bf,
            model.Wo, model.Uo, model.bo, model.Wg, model.Ug, model.bg,
            model.w_out, model.b_out]


def cqi_from_tensors(tensors, window=16, horizon=1):
    if len(tensors) != 14:
        raise ValueError(f"expected 14 tensors, got {len(tensors)}")
    t = [np.asarray(a, dtype=float) for a in tensors]
    H = t[1].shape[0]
    for k in range(4):
        if t[3 * k].shape != (H, 1) or t[3 * k + 1].shape != (H, H) \
                or t[3 * k + 2].shape != (H,):
            raise ValueError("gate tensor shapes inconsistent")
    if t[12].shape != (H,) or t[13].shape != ():
        raise ValueError("readout tensor shapes inconsistent")
    return CqiPredictor(*t, window=window, horizon=horizon)
