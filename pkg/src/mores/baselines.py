"""Online baselines sharing the learner interface: a slack-constrained
multi-output regressor (SOMOR) and per-output passive-aggressive
regressors (PA-I / PA-II)."""

import numpy as np

from .exceptions import ConfigError, DimensionMismatch, ZeroInput

__all__ = ["SomorLearner", "PaLearner", "somor_update", "pa_update"]


def somor_update(p, x, y, xi):
    """Minimal-change coefficient update subject to squared prediction
    error at most xi on the current sample.

    If the constraint already holds the coefficients are untouched.
    Otherwise the rank-one KKT solution rescales the residual to norm
    sqrt(xi):

        P_new = P + ((|r| - sqrt(xi)) / (|r| * |x|^2)) r x^T,  r = y - P x.

    Raises ZeroInput when the constraint is violated but x = 0 (no
    feasible rank-one correction exists).
    """
    r = y - p @ x
    err = float(r @ r)
    if err <= xi:
        return p, False
    xn2 = float(x @ x)
    if xn2 == 0.0:
        raise ZeroInput("constraint violated with zero input vector")
    rn = np.sqrt(err)
    lam = (rn - np.sqrt(xi)) / (rn * xn2)
    return p + lam * np.outer(r, x), True


def pa_update(w, x, y, variant, c, eps):
    """Passive-aggressive regression update for a single output.

    loss = max(0, |w.x - y| - eps); step size tau = min(c, loss/|x|^2)
    for PA-I or loss/(|x|^2 + 1/(2c)) for PA-II; w moves along
    sign(y - w.x) * tau * x.
    """
    pred = float(w @ x)
    loss = max(0.0, abs(pred - y) - eps)
    if loss == 0.0:
        return w, 0.0
    xn2 = float(x @ x)
    if xn2 == 0.0:
        # no direction to move in; skip the update
        return w, 0.0
    if variant == "pa1":
        tau = min(c, loss / xn2)
    else:
        tau = loss / (xn2 + 1.0 / (2.0 * c))
    return w + np.sign(y - pred) * tau * x, tau


class SomorLearner:
    """Stateful SOMOR learner (predict/update interface)."""

    name = "somor"

    def __init__(self, d, m, xi=1.0):
        if xi <= 0:
            raise ConfigError(f"xi must be positive, got {xi}")
        self.d = d
        self.m = m
        self.xi = float(xi)
        self.p = np.zeros((m, d))
        self.skipped_zero_input = 0

    def predict(self, x):
        x = np.asarray(x, dtype=float).ravel()
        if x.shape[0] != self.d:
            raise DimensionMismatch(f"input length {x.shape[0]}, expected {self.d}")
        return self.p @ x

    def update(self, x, y):
        x = np.asarray(x, dtype=float).ravel()
        y = np.asarray(y, dtype=float).ravel()
        prediction = self.predict(x)
        try:
            self.p, _ = somor_update(self.p, x, y, self.xi)
        except ZeroInput:
            self.skipped_zero_input += 1
        return prediction

    def clone(self):
        fresh = SomorLearner(self.d, self.m, self.xi)
        fresh.p = self.p.copy()
        return fresh


class PaLearner:
    """Per-output passive-aggressive regressor, variant 'pa1' or 'pa2'."""

    def __init__(self, d, m, variant="pa1", c=1.0, eps=0.0):
        if variant not in ("pa1", "pa2"):
            raise ConfigError(f"unknown PA variant: {variant}")
        if c <= 0 or eps < 0:
            raise ConfigError("PA requires c > 0 and eps >= 0")
        self.d = d
        self.m = m
        self.variant = variant
        self.c = float(c)
        self.eps = float(eps)
        self.w = np.zeros((m, d))
        self.name = variant

    def predict(self, x):
        x = np.asarray(x, dtype=float).ravel()
        if x.shape[0] != self.d:
            raise DimensionMismatch(f"input length {x.shape[0]}, expected {self.d}")
        return self.w @ x

    def update(self, x, y):
        x = np.asarray(x, dtype=float).ravel()
        y = np.asarray(y, dtype=float).ravel()
        prediction = self.predict(x)
        for j in range(self.m):
            self.w[j], _ = pa_update(
                self.w[j], x, float(y[j]), self.variant, self.c, self.eps
            )
        return prediction

    def clone(self):
        fresh = PaLearner(self.d, self.m, self.variant, self.c, self.eps)
        fresh.w = self.w.copy()
        return fresh
