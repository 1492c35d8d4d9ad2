"""Flat-vector optimizers: five gradient methods, SPSA, L-BFGS, and a hybrid.

Update rules are the canonical published forms; shared constants follow the
TF-era convention (epsilon 1e-7 rather than 1e-8). Everything here operates
on plain float vectors against callable losses; nothing knows about circuits.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DivergenceError

GRADIENT_KINDS = ("sgd", "rmsprop", "adam", "nadam", "adadelta")
OPTIMIZER_KINDS = GRADIENT_KINDS + ("spsa", "lbfgs")

WOLFE_C1 = 1e-4
WOLFE_C2 = 0.9
GRAD_TOL = 1e-8
STEP_TOL = 1e-10


def _checked_gradient(gradient, iteration):
    g = np.asarray(gradient, dtype=float)
    if not np.all(np.isfinite(g)):
        raise DivergenceError("non-finite gradient", iteration=iteration)
    return g


class SGD:
    """Plain gradient descent, no momentum."""

    def __init__(self, learning_rate: float):
        self.learning_rate = learning_rate
        self.iteration = 0

    def step(self, params, gradient):
        self.iteration += 1
        g = _checked_gradient(gradient, self.iteration)
        return params - self.learning_rate * g


class RMSProp:
    """Running squared-gradient average; divides by its root."""

    def __init__(self, learning_rate: float, rho: float = 0.9, epsilon: float = 1e-7):
        self.learning_rate = learning_rate
        self.rho = rho
        self.epsilon = epsilon
        self.acc = None
        self.iteration = 0

    def step(self, params, gradient):
        self.iteration += 1
        g = _checked_gradient(gradient, self.iteration)
        if self.acc is None:
            self.acc = np.zeros_like(g)
        self.acc = self.rho * self.acc + (1.0 - self.rho) * g**2
        return params - self.learning_rate * g / (np.sqrt(self.acc) + self.epsilon)


class Adam:
    """Bias-corrected first/second moments."""

    def __init__(
        self,
        learning_rate: float,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-7,
    ):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.m = None
        self.v = None
        self.iteration = 0

    def step(self, params, gradient):
        self.iteration += 1
        g = _checked_gradient(gradient, self.iteration)
        if self.m is None:
            self.m = np.zeros_like(g)
            self.v = np.zeros_like(g)
        t = self.iteration
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * g
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * g**2
        m_hat = self.m / (1.0 - self.beta1**t)
        v_hat = self.v / (1.0 - self.beta2**t)
        return params - self.learning_rate * m_hat / (np.sqrt(v_hat) + self.epsilon)


class Nadam(Adam):
    """Adam with a Nesterov look-ahead on the first moment."""

    def step(self, params, gradient):
        self.iteration += 1
        g = _checked_gradient(gradient, self.iteration)
        if self.m is None:
            self.m = np.zeros_like(g)
            self.v = np.zeros_like(g)
        t = self.iteration
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * g
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * g**2
        m_hat = self.m / (1.0 - self.beta1**t)
        v_hat = self.v / (1.0 - self.beta2**t)
        lookahead = self.beta1 * m_hat + (1.0 - self.beta1) * g / (1.0 - self.beta1**t)
        return params - self.learning_rate * lookahead / (np.sqrt(v_hat) + self.epsilon)


class Adadelta:
    """Unit-correcting method: step scale from a running average of past steps.

    learning_rate multiplies the computed step (canonical value 1.0).
    """

    def __init__(self, learning_rate: float = 1.0, rho: float = 0.95, epsilon: float = 1e-7):
        self.learning_rate = learning_rate
        self.rho = rho
        self.epsilon = epsilon
        self.acc_grad = None
        self.acc_step = None
        self.iteration = 0

    def step(self, params, gradient):
        self.iteration += 1
        g = _checked_gradient(gradient, self.iteration)
        if self.acc_grad is None:
            self.acc_grad = np.zeros_like(g)
            self.acc_step = np.zeros_like(g)
        self.acc_grad = self.rho * self.acc_grad + (1.0 - self.rho) * g**2
        delta = -np.sqrt(self.acc_step + self.epsilon) / np.sqrt(self.acc_grad + self.epsilon) * g
        self.acc_step = self.rho * self.acc_step + (1.0 - self.rho) * delta**2
        return params + self.learning_rate * delta


class SPSA:
    """Simultaneous perturbation: two loss probes estimate the full gradient.

    Gain schedules follow the classical recipe a_k = a/(k+1+A)^0.602 and
    c_k = c/(k+1)^0.101; `a` comes from calibrate(), which sizes the first
    step to roughly learning_rate per coordinate.
    """

    def __init__(
        self,
        learning_rate: float,
        total_iterations: int,
        rng,
        c: float = 0.05,
        alpha: float = 0.602,
        gamma: float = 0.101,
        stability: float | None = None,
    ):
        self.learning_rate = learning_rate
        self.c = c
        self.alpha = alpha
        self.gamma = gamma
        # Spall's guidance: stability offset A at 10% of the step budget.
        self.stability = 0.1 * total_iterations if stability is None else stability
        self.rng = rng
        self.a = None
        self.iteration = 0

    def _gain_a(self, k):
        return self.a / (k + 1.0 + self.stability) ** self.alpha

    def _gain_c(self, k):
        return self.c / (k + 1.0) ** self.gamma

    def _estimate_gradient(self, params, loss_fn, c_k):
        delta = self.rng.integers(0, 2, size=params.size) * 2.0 - 1.0
        loss_plus = float(loss_fn(params + c_k * delta))
        loss_minus = float(loss_fn(params - c_k * delta))
        if not (math.isfinite(loss_plus) and math.isfinite(loss_minus)):
            raise DivergenceError("non-finite loss in SPSA probe", iteration=self.iteration)
        return (loss_plus - loss_minus) / (2.0 * c_k * delta)

    def calibrate(self, params, loss_fn, probes: int = 5):
        """Set `a` so the first update has per-coordinate size ~ learning_rate.

        Averages |g_hat| over a few probe pairs at the initial perturbation
        scale; costs 2 * probes loss evaluations, run once before stepping.
        """
        c0 = self._gain_c(0)
        mags = [
            float(np.mean(np.abs(self._estimate_gradient(params, loss_fn, c0))))
            for _ in range(probes)
        ]
        mean_mag = float(np.mean(mags))
        if mean_mag == 0.0:
            # Flat loss: any finite a gives zero steps, so the scale is moot.
            self.a = self.learning_rate
        else:
            self.a = self.learning_rate * (1.0 + self.stability) ** self.alpha / mean_mag

    def step(self, params, loss_fn):
        """One update: exactly two loss evaluations."""
        if self.a is None:
            raise RuntimeError("call calibrate() before step()")
        k = self.iteration
        self.iteration += 1
        g_hat = self._estimate_gradient(params, loss_fn, self._gain_c(k))
        return params - self._gain_a(k) * g_hat


def make_optimizer(kind: str, learning_rate: float, total_iterations: int = 0, rng=None):
    """Instantiate a step-based optimizer by kind name."""
    if kind == "sgd":
        return SGD(learning_rate)
    if kind == "rmsprop":
        return RMSProp(learning_rate)
    if kind == "adam":
        return Adam(learning_rate)
    if kind == "nadam":
        return Nadam(learning_rate)
    if kind == "adadelta":
        return Adadelta(learning_rate)
    if kind == "spsa":
        if rng is None:
            raise ValueError("spsa needs an rng")
        return SPSA(learning_rate, total_iterations, rng)
    raise ValueError(f"unknown optimizer kind {kind!r}")


def two_loop_direction(gradient, s_history, y_history, h0_scale=None):
    """L-BFGS search direction -H g from the stored curvature pairs.

    With no history this is steepest descent scaled by h0_scale. The default
    h0_scale is the standard s.y/y.y of the most recent pair.
    """
    q = np.array(gradient, dtype=float)
    alphas = []
    rhos = [1.0 / float(np.dot(y, s)) for s, y in zip(s_history, y_history)]
    for s, y, rho in zip(reversed(s_history), reversed(y_history), reversed(rhos)):
        a = rho * float(np.dot(s, q))
        alphas.append(a)
        q -= a * y
    if h0_scale is None:
        if s_history:
            s, y = s_history[-1], y_history[-1]
            h0_scale = float(np.dot(s, y)) / float(np.dot(y, y))
        else:
            h0_scale = 1.0
    r = h0_scale * q
    for s, y, rho, a in zip(s_history, y_history, rhos, reversed(alphas)):
        b = rho * float(np.dot(y, r))
        r += (a - b) * s
    return -r


def _wolfe_ok(f_trial, f0, dphi0, alpha, c1):
    return math.isfinite(f_trial) and f_trial <= f0 + c1 * alpha * dphi0


def _zoom(fg, x, d, f0, dphi0, a_lo, f_lo, g_lo, a_hi, max_steps=30):
    """Strong-Wolfe interval refinement by bisection.

    a_lo always satisfies sufficient decrease with the lowest f seen; a_hi
    brackets it. Returns (alpha, f, g, ok); non-finite trials shrink the
    interval rather than propagating.
    """
    for _ in range(max_steps):
        a = 0.5 * (a_lo + a_hi)
        f_a, g_a = fg(x + a * d)
        if not _wolfe_ok(f_a, f0, dphi0, a, WOLFE_C1) or f_a >= f_lo:
            a_hi = a
        else:
            dphi = float(np.dot(g_a, d))
            if abs(dphi) <= -WOLFE_C2 * dphi0:
                return a, f_a, g_a, True
            if dphi * (a_hi - a_lo) >= 0:
                a_hi = a_lo
            a_lo, f_lo, g_lo = a, f_a, g_a
        if abs(a_hi - a_lo) < 1e-14:
            break
    return a_lo, f_lo, g_lo, False


def _line_search(fg, x, d, f0, g0, max_steps=25):
    """Strong-Wolfe line search (c1=1e-4, c2=0.9), unit initial step.

    Returns (alpha, f, g, ok); alpha = 0 means no acceptable point was found.
    """
    dphi0 = float(np.dot(g0, d))
    a_prev, f_prev, g_prev = 0.0, f0, g0
    alpha = 1.0
    for i in range(max_steps):
        f_a, g_a = fg(x + alpha * d)
        if not _wolfe_ok(f_a, f0, dphi0, alpha, WOLFE_C1) or (i > 0 and f_a >= f_prev):
            return _zoom(fg, x, d, f0, dphi0, a_prev, f_prev, g_prev, alpha)
        dphi = float(np.dot(g_a, d))
        if abs(dphi) <= -WOLFE_C2 * dphi0:
            return alpha, f_a, g_a, True
        if dphi >= 0:
            return _zoom(fg, x, d, f0, dphi0, alpha, f_a, g_a, a_prev)
        a_prev, f_prev, g_prev = alpha, f_a, g_a
        alpha *= 2.0
    return a_prev, f_prev, g_prev, False


def _as_float_pair(loss_and_grad):
    """Adapt a loss-and-grad callable to the (float, array) pair the search expects."""

    def fg(x):
        f, g = loss_and_grad(x)
        return float(f), np.asarray(g, dtype=float)

    return fg


@dataclass
class LbfgsResult:
    """Outcome of minimize_lbfgs; path/losses hold one entry per iteration."""

    params: np.ndarray
    final_loss: float
    losses: list = field(default_factory=list)
    path: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    line_search_failed: bool = False


def minimize_lbfgs(loss_and_grad, params0, max_iters: int, memory: float = 10) -> LbfgsResult:
    """Two-loop L-BFGS with strong-Wolfe line search, unconstrained.

    Stops on gradient norm < 1e-8, step < 1e-10, or max_iters. A failed line
    search returns the best point seen so far with line_search_failed set;
    it never raises. losses[k]/path[k] record the state entering iteration k.
    """
    fg = _as_float_pair(loss_and_grad)
    x = np.array(params0, dtype=float)
    f, g = fg(x)
    if not (math.isfinite(f) and np.all(np.isfinite(g))):
        raise DivergenceError("non-finite objective at start", iteration=0)
    result = LbfgsResult(params=x, final_loss=f)
    if float(np.linalg.norm(g)) < GRAD_TOL:
        result.converged = True
        return result
    s_hist: list = []
    y_hist: list = []
    best_f, best_x = f, x
    for k in range(max_iters):
        d = two_loop_direction(g, s_hist, y_hist)
        if float(np.dot(d, g)) >= 0.0:
            # Curvature history turned the direction uphill; drop it.
            s_hist.clear()
            y_hist.clear()
            d = -g
        result.losses.append(f)
        result.path.append(x.copy())
        result.iterations = k + 1
        alpha, f_new, g_new, ok = _line_search(fg, x, d, f, g)
        x_new = x + alpha * d
        if f_new < best_f:
            best_f, best_x = f_new, x_new
        if not ok:
            result.line_search_failed = True
            result.params, result.final_loss = best_x, best_f
            return result
        s = x_new - x
        y = g_new - g
        if float(np.dot(s, y)) > 1e-12:
            s_hist.append(s)
            y_hist.append(y)
            if len(s_hist) > memory:
                s_hist.pop(0)
                y_hist.pop(0)
        step_size = float(np.linalg.norm(s))
        x, f, g = x_new, f_new, g_new
        if float(np.linalg.norm(g)) < GRAD_TOL or step_size < STEP_TOL:
            result.converged = True
            break
    result.params, result.final_loss = x, f
    return result


@dataclass(frozen=True)
class HybridSchedule:
    """Plain-SGD warmup handing over to L-BFGS on a frozen batch."""

    switch_iteration: int = 80
    learning_rate: float = 0.01
    memory: int = 10

    def __post_init__(self):
        if self.switch_iteration < 1:
            raise ValueError("switch_iteration must be positive")


@dataclass
class HybridResult:
    """Per-iteration losses and parameter snapshots of a hybrid run."""

    params: np.ndarray
    losses: list
    path: list
    lbfgs_iterations: int = 0
    line_search_failed: bool = False


def run_hybrid(schedule: HybridSchedule, objective_for, params0, total_iters: int) -> HybridResult:
    """SGD for switch_iteration steps, then L-BFGS on the switch-time objective.

    objective_for(k) returns the loss-and-grad callable of iteration k (the
    caller resamples batches there); it is called once per SGD step plus once
    at the switch, whose batch stays frozen for the whole L-BFGS phase.
    losses[k]/path[k] record the state entering iteration k. If L-BFGS stops
    early the remaining rows repeat the converged state, so the trace always
    has total_iters rows.
    """
    if schedule.switch_iteration > total_iters:
        raise ValueError("switch_iteration exceeds the iteration budget")
    x = np.array(params0, dtype=float)
    sgd = SGD(schedule.learning_rate)
    losses: list = []
    path: list = []
    for k in range(schedule.switch_iteration):
        f, g = objective_for(k)(x)
        losses.append(float(f))
        path.append(x.copy())
        x = sgd.step(x, g)
    result = HybridResult(params=x, losses=losses, path=path)
    remaining = total_iters - schedule.switch_iteration
    if remaining == 0:
        return result
    frozen = objective_for(schedule.switch_iteration)
    lbfgs = minimize_lbfgs(frozen, x, max_iters=remaining, memory=schedule.memory)
    losses.extend(lbfgs.losses)
    path.extend(lbfgs.path)
    while len(losses) < total_iters:
        losses.append(float(lbfgs.final_loss))
        path.append(np.array(lbfgs.params, dtype=float))
    result.params = np.array(lbfgs.params, dtype=float)
    result.lbfgs_iterations = lbfgs.iterations
    result.line_search_failed = lbfgs.line_search_failed
    return result
