"""A 1-H-1 dense network with ReLU or degree-(3,2) rational activation.

The rational activation is ``p(u) / q(u)`` with ``p``, ``q`` written in
Chebyshev coefficients (4 and 3 of them) and evaluated by recurrence, so it
is defined for any real pre-activation ``u``, not just ``[-1, 1]``.

Parameters travel as one flat vector during training, laid out as::

    [W1 (H), b1 (H), W2 (H), b2 (1), num (4), den (3)]

Gradients use the same layout; the coefficient slots are zero unless the
activation is learnable.
"""
from __future__ import annotations

import enum
import functools
import time
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial import chebyshev as cheb

from .basis import POLE_THRESHOLD, chebyshev_table
from .data import SampleSet
from .errors import PoleError

N_NUM = 4
N_DEN = 3
ROOT_WINDOW = 10.0
BETA1 = 0.9
BETA2 = 0.999
EPS = 1e-8


class Activation(str, enum.Enum):
    RELU = "relu"
    FIXED = "rat-fixed"
    LEARNABLE = "rat-learn"


class LossKind(str, enum.Enum):
    MSE = "mse"
    UNIFORM = "uniform"


class Optimizer(str, enum.Enum):
    ADAM = "adam"
    ADAMAX = "adamax"


class Mode(str, enum.Enum):
    STANDARD = "standard"
    SPLIT = "split"


@functools.lru_cache(maxsize=1)
def relu_rational_coeffs():
    """Chebyshev coefficients of the best (3,2) uniform approximation to ReLU on [-1,1]."""
    from .diffcorr import fit_relu_rational

    r, rep = fit_relu_rational()
    return tuple(r.num_coeffs), tuple(r.den_coeffs), rep.error


@dataclass(frozen=True, eq=False)
class ActivationSpec:
    kind: Activation = Activation.RELU
    num: np.ndarray | None = None
    den: np.ndarray | None = None

    def __post_init__(self):
        kind = Activation(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is Activation.RELU:
            object.__setattr__(self, "num", None)
            object.__setattr__(self, "den", None)
            return
        if self.num is None or self.den is None:
            a, b, _ = relu_rational_coeffs()
        num = np.array(a if self.num is None else self.num, dtype=float).ravel()
        den = np.array(b if self.den is None else self.den, dtype=float).ravel()
        if num.size != N_NUM or den.size != N_DEN:
            raise ValueError(f"rational activation needs {N_NUM} numerator and {N_DEN} "
                             f"denominator coefficients, got {num.size} and {den.size}")
        if not (np.isfinite(num).all() and np.isfinite(den).all()):
            raise ValueError("activation coefficients must be finite")
        check_denominator(den)
        num.setflags(write=False)
        den.setflags(write=False)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @property
    def rational(self):
        return self.kind is not Activation.RELU

    @property
    def learnable(self):
        return self.kind is Activation.LEARNABLE


def check_denominator(den, window=ROOT_WINDOW):
    """Reject a Chebyshev denominator with a real root in ``[-window, window]``."""
    den = np.trim_zeros(np.asarray(den, dtype=float), "b")
    if den.size == 0:
        raise ValueError("denominator is identically zero")
    roots = cheb.chebroots(den)
    real = roots[np.abs(np.imag(roots)) <= 1e-10 * np.maximum(1.0, np.abs(roots))].real
    inside = real[np.abs(real) <= window]
    if inside.size:
        raise ValueError(f"denominator has a real root at {inside[0]:.6g}, "
                         f"inside [-{window:g}, {window:g}]")


@dataclass(frozen=True, eq=False)
class MlpParams:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: float
    activation: ActivationSpec = field(default_factory=ActivationSpec)

    def __post_init__(self):
        W1 = np.array(self.W1, dtype=float).ravel()
        b1 = np.array(self.b1, dtype=float).ravel()
        W2 = np.array(self.W2, dtype=float).ravel()
        b2 = float(self.b2)
        if not (W1.size == b1.size == W2.size) or W1.size < 1:
            raise ValueError("W1, b1 and W2 need the same length H >= 1")
        if not (np.isfinite(W1).all() and np.isfinite(b1).all()
                and np.isfinite(W2).all() and np.isfinite(b2)):
            raise ValueError("network parameters must be finite")
        for name, v in (("W1", W1), ("b1", b1), ("W2", W2)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)
        object.__setattr__(self, "b2", b2)

    @property
    def hidden(self):
        return self.W1.size

    def to_vector(self):
        act = self.activation
        num = act.num if act.rational else np.zeros(N_NUM)
        den = act.den if act.rational else np.zeros(N_DEN)
        return np.concatenate([self.W1, self.b1, self.W2, [self.b2], num, den])

    def with_vector(self, v, check=False):
        """New params from a flat vector; the activation kind is kept.

        Denominator roots are only checked when ``check`` is set: during
        training the coefficients may drift and poles are caught at evaluation.
        """
        H = self.hidden
        v = np.asarray(v, dtype=float)
        if v.size != n_params(H):
            raise ValueError(f"expected {n_params(H)} entries, got {v.size}")
        act = self.activation
        if act.rational:
            num, den = v[3 * H + 1:3 * H + 1 + N_NUM], v[3 * H + 1 + N_NUM:]
            if check:
                act = ActivationSpec(act.kind, num, den)
            else:
                act = _unchecked_activation(act.kind, num, den)
        return MlpParams(v[:H], v[H:2 * H], v[2 * H:3 * H], v[3 * H], act)

    def to_dict(self):
        act = self.activation
        return {"W1": self.W1.tolist(), "b1": self.b1.tolist(), "W2": self.W2.tolist(),
                "b2": self.b2, "activation": act.kind.value,
                "num": None if act.num is None else act.num.tolist(),
                "den": None if act.den is None else act.den.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["W1"], d["b1"], d["W2"], d["b2"],
                   ActivationSpec(d["activation"], d.get("num"), d.get("den")))


def _unchecked_activation(kind, num, den):
    act = object.__new__(ActivationSpec)
    num = np.array(num, dtype=float)
    den = np.array(den, dtype=float)
    num.setflags(write=False)
    den.setflags(write=False)
    object.__setattr__(act, "kind", Activation(kind))
    object.__setattr__(act, "num", num)
    object.__setattr__(act, "den", den)
    return act


def n_params(H):
    return 3 * H + 1 + N_NUM + N_DEN


def block_slices(H):
    """Index ranges of the three split-training blocks: input layer, output layer, activation."""
    return (slice(0, 2 * H), slice(2 * H, 3 * H + 1), slice(3 * H + 1, n_params(H)))


def init_params(hidden: int, activation: ActivationSpec | None = None, seed: int = 0) -> MlpParams:
    """Uniform on ``[-1/sqrt(fan_in), 1/sqrt(fan_in)]`` for every weight and bias."""
    if hidden < 1:
        raise ValueError("hidden must be >= 1")
    rng = np.random.default_rng(seed)
    W1 = rng.uniform(-1.0, 1.0, hidden)
    b1 = rng.uniform(-1.0, 1.0, hidden)
    bound = 1.0 / np.sqrt(hidden)
    W2 = rng.uniform(-bound, bound, hidden)
    b2 = rng.uniform(-bound, bound)
    return MlpParams(W1, b1, W2, b2, activation or ActivationSpec())


# -- forward / backward --------------------------------------------------------

def _activate(u, act: ActivationSpec, need_grad=False):
    """``sigma(u)`` and, on request, ``sigma'(u)`` and the coefficient Jacobians."""
    if not act.rational:
        s = np.maximum(u, 0.0)
        if not need_grad:
            return s, None, None, None
        return s, (u > 0.0).astype(float), None, None
    TP = chebyshev_table(u, N_NUM - 1)
    TQ = TP[..., :N_DEN]
    p = TP @ act.num
    q = TQ @ act.den
    small = np.abs(q) < POLE_THRESHOLD
    if small.any():
        k = np.unravel_index(np.argmax(small), q.shape)
        raise PoleError(f"activation denominator {q[k]:.3e} at pre-activation {u[k]!r}",
                        point=float(u[k]))
    s = p / q
    if not need_grad:
        return s, None, None, None
    dp = cheb.chebval(u, cheb.chebder(act.num))
    dq = cheb.chebval(u, cheb.chebder(act.den))
    ds = (dp * q - p * dq) / q ** 2
    d_num = TP / q[..., None]
    d_den = -(s / q)[..., None] * TQ
    return s, ds, d_num, d_den


def forward(params: MlpParams, x):
    """``W2 . sigma(W1 x + b1) + b2`` for scalar or array ``x``."""
    x = np.asarray(x, dtype=float)
    u = x[..., None] * params.W1 + params.b1
    s, _, _, _ = _activate(u, params.activation)
    return s @ params.W2 + params.b2


def _inputs(samples):
    if isinstance(samples, SampleSet):
        return samples.x, samples.values
    x, y = samples
    return np.asarray(x, dtype=float).ravel(), np.asarray(y, dtype=float).ravel()


def loss(params: MlpParams, samples, kind=LossKind.UNIFORM) -> float:
    """Mean squared (``MSE``) or maximum absolute (``UNIFORM``) residual.

    ``samples`` is a univariate :class:`SampleSet` or an ``(x, y)`` pair.
    """
    x, y = _inputs(samples)
    return _loss_from_residual(forward(params, x) - y, LossKind(kind))


def _loss_from_residual(r, kind):
    if kind is LossKind.MSE:
        return float(np.mean(r ** 2))
    return float(np.max(np.abs(r)))


def backward(params: MlpParams, samples, kind=LossKind.UNIFORM):
    """Flat gradient of :func:`loss` (a subgradient for ``UNIFORM``).

    The uniform subgradient is taken at the sample of largest ``|residual|``,
    lowest index on ties.  Returns ``(loss_value, gradient)``.
    """
    kind = LossKind(kind)
    x, y = _inputs(samples)
    act = params.activation
    u = x[:, None] * params.W1 + params.b1
    s, ds, d_num, d_den = _activate(u, act, need_grad=True)
    r = s @ params.W2 + params.b2 - y
    if kind is LossKind.MSE:
        value = float(np.mean(r ** 2))
        sel = slice(None)
        wts = 2.0 * r / r.size
    else:
        i = int(np.argmax(np.abs(r)))
        value = float(abs(r[i]))
        sel = slice(i, i + 1)
        wts = np.sign(r[sel])
    H = params.hidden
    g = np.zeros(n_params(H))
    dz = wts[:, None] * ds[sel] * params.W2  # d loss / d u, per selected sample
    g[:H] = dz.T @ x[sel]
    g[H:2 * H] = dz.sum(axis=0)
    g[2 * H:3 * H] = wts @ s[sel]
    g[3 * H] = wts.sum()
    if act.learnable:
        g[3 * H + 1:3 * H + 1 + N_NUM] = np.einsum("n,nhk,h->k", wts, d_num[sel], params.W2)
        g[3 * H + 1 + N_NUM:] = np.einsum("n,nhk,h->k", wts, d_den[sel], params.W2)
    return value, g


# -- optimizers ----------------------------------------------------------------

@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros(n), np.zeros(n))


def adam_step(state: AdamState, params, grad, lr, t):
    """One bias-corrected Adam update; returns ``(state, params)``."""
    if t < 1:
        raise ValueError("t must be >= 1")
    m = BETA1 * state.m + (1.0 - BETA1) * grad
    v = BETA2 * state.v + (1.0 - BETA2) * grad ** 2
    mhat = m / (1.0 - BETA1 ** t)
    vhat = v / (1.0 - BETA2 ** t)
    return AdamState(m, v), params - lr * mhat / (np.sqrt(vhat) + EPS)


def adamax_step(state: AdamState, params, grad, lr, t):
    """One Adamax update (infinity-norm second moment); returns ``(state, params)``."""
    if t < 1:
        raise ValueError("t must be >= 1")
    m = BETA1 * state.m + (1.0 - BETA1) * grad
    v = np.maximum(BETA2 * state.v, np.abs(grad))
    return AdamState(m, v), params - (lr / (1.0 - BETA1 ** t)) * m / (v + EPS)


_STEPS = {Optimizer.ADAM: adam_step, Optimizer.ADAMAX: adamax_step}


# -- training ----------------------------------------------------------------

@dataclass(frozen=True)
class TrainConfig:
    loss: LossKind = LossKind.UNIFORM
    optimizer: Optimizer | None = None  # None: Adamax for uniform loss, Adam for MSE
    epochs: int = 200
    learning_rate: float = 1e-2
    seed: int = 0
    mode: Mode = Mode.STANDARD
    block_lr: tuple | None = None  # split mode: per-block rates, default all learning_rate

    def __post_init__(self):
        object.__setattr__(self, "loss", LossKind(self.loss))
        object.__setattr__(self, "mode", Mode(self.mode))
        opt = self.optimizer
        if opt is None:
            opt = Optimizer.ADAMAX if self.loss is LossKind.UNIFORM else Optimizer.ADAM
        object.__setattr__(self, "optimizer", Optimizer(opt))
        if int(self.epochs) != self.epochs or self.epochs < 0:
            raise ValueError("epochs must be a non-negative integer")
        if not self.learning_rate >= 0:
            raise ValueError("learning_rate must be non-negative")
        if self.block_lr is not None:
            lrs = tuple(float(v) for v in self.block_lr)
            if len(lrs) != 3 or min(lrs) < 0:
                raise ValueError("block_lr needs three non-negative rates")
            object.__setattr__(self, "block_lr", lrs)

    def to_dict(self):
        return {"loss": self.loss.value, "optimizer": self.optimizer.value,
                "epochs": int(self.epochs), "learning_rate": self.learning_rate,
                "seed": self.seed, "mode": self.mode.value,
                "block_lr": None if self.block_lr is None else list(self.block_lr)}


@dataclass
class TrainReport:
    final_loss: float
    min_loss: float
    min_loss_epoch: int  # 1-based; 0 when no epoch ran
    per_epoch_loss: list
    wall_time_per_epoch: float
    initial_loss: float
    params: MlpParams
    config: TrainConfig
    pole_error: str | None = None  # message of the pole that aborted training

    @property
    def epochs_run(self):
        return len(self.per_epoch_loss)

    def to_dict(self):
        return {"final_loss": self.final_loss, "min_loss": self.min_loss,
                "min_loss_epoch": self.min_loss_epoch, "initial_loss": self.initial_loss,
                "wall_time_per_epoch": self.wall_time_per_epoch,
                "epochs_run": self.epochs_run, "pole_error": self.pole_error,
                "per_epoch_loss": list(self.per_epoch_loss),
                "config": self.config.to_dict(), "params": self.params.to_dict()}


def _run(params, samples, config, blocks, rates):
    kind = config.loss
    step = _STEPS[config.optimizer]
    x, y = _inputs(samples)
    data = (x, y)
    v = params.to_vector()
    states = [AdamState.zeros(v[b].size) for b in blocks]
    initial = loss(params, data, kind)
    history = []
    pole = None
    t0 = time.perf_counter()
    for epoch in range(1, int(config.epochs) + 1):
        trial = v.copy()
        new_states = list(states)
        try:
            for k, blk in enumerate(blocks):
                _, g = backward(params.with_vector(trial), data, kind)
                new_states[k], trial[blk] = step(states[k], trial[blk], g[blk], rates[k], epoch)
            value = loss(params.with_vector(trial), data, kind)
        except PoleError as exc:
            pole = f"epoch {epoch}: {exc}"
            break
        if not np.isfinite(trial).all() or not np.isfinite(value):
            pole = f"epoch {epoch}: non-finite parameters or loss"
            break
        v, states = trial, new_states
        history.append(value)
    elapsed = time.perf_counter() - t0
    final = params.with_vector(v)
    if history:
        i = int(np.argmin(history))
        report = TrainReport(history[-1], history[i], i + 1, history,
                             elapsed / len(history), initial, final, config, pole)
    else:
        report = TrainReport(initial, initial, 0, [], 0.0, initial, final, config, pole)
    return report


def train(params: MlpParams, samples, config: TrainConfig | None = None) -> TrainReport:
    """Full-batch training; the activation coefficients move only if learnable.

    A pole met during an epoch discards that epoch, stops training and sets
    ``TrainReport.pole_error``.
    """
    config = config or TrainConfig()
    if config.mode is Mode.SPLIT:
        return train_split(params, samples, config)
    H = params.hidden
    n = 3 * H + 1 + (N_NUM + N_DEN if params.activation.learnable else 0)
    return _run(params, samples, config, [slice(0, n)], [config.learning_rate])


def train_split(params: MlpParams, samples, config: TrainConfig | None = None) -> TrainReport:
    """Block-coordinate training: each epoch updates (W1, b1), then (W2, b2), then the
    activation coefficients, each block with its own optimizer state."""
    config = config or TrainConfig(mode=Mode.SPLIT)
    if not params.activation.learnable:
        raise ValueError("split training needs a learnable rational activation")
    if config.mode is not Mode.SPLIT:
        config = replace(config, mode=Mode.SPLIT)
    rates = config.block_lr or (config.learning_rate,) * 3
    return _run(params, samples, config, list(block_slices(params.hidden)), list(rates))
