"""Forgetting-factor sufficient statistics for streaming regression.

Three fixed-size matrices (input Gram, input/output cross products and
output Gram) summarize the decayed history exactly, so the weighted
prediction loss over all seen samples can be evaluated without keeping
any of them around.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionMismatch

__all__ = ["Sample", "SufficientStats", "negative_loss_clamps"]

# Number of times weighted_loss clamped a tiny negative round-off to zero.
_clamp_count = 0


def negative_loss_clamps():
    return _clamp_count


@dataclass
class Sample:
    """One stream observation: input vector x (length d), output y (length m)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float).ravel()
        self.y = np.asarray(self.y, dtype=float).ravel()
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y))):
            raise DimensionMismatch("sample contains non-finite entries")


@dataclass
class SufficientStats:
    """Decayed second-moment statistics of a stream.

    After folding samples 1..t with forgetting factor mu:

        c_xx = sum_i mu^(t-i) x_i x_i^T      (d x d)
        c_xy = sum_i mu^(t-i) x_i y_i^T      (d x m)
        c_yy = sum_i mu^(t-i) y_i y_i^T      (m x m)

    With mu = 0 only the newest sample survives (0^0 taken as 1).
    """

    d: int
    m: int
    mu: float = 1.0
    count: int = 0
    c_xx: np.ndarray = field(default=None)
    c_xy: np.ndarray = field(default=None)
    c_yy: np.ndarray = field(default=None)

    def __post_init__(self):
        if not (0.0 <= self.mu <= 1.0):
            raise DimensionMismatch(f"forgetting factor must be in [0, 1], got {self.mu}")
        if self.c_xx is None:
            self.c_xx = np.zeros((self.d, self.d))
        if self.c_xy is None:
            self.c_xy = np.zeros((self.d, self.m))
        if self.c_yy is None:
            self.c_yy = np.zeros((self.m, self.m))

    def copy(self):
        return SufficientStats(
            d=self.d, m=self.m, mu=self.mu, count=self.count,
            c_xx=self.c_xx.copy(), c_xy=self.c_xy.copy(), c_yy=self.c_yy.copy(),
        )


def fold(stats, sample):
    """Return new statistics with one more sample absorbed.

    c_xx <- mu*c_xx + x x^T, and likewise for c_xy, c_yy; O(d^2 + dm + m^2)
    regardless of how many samples came before.
    """
    x, y = sample.x, sample.y
    if x.shape != (stats.d,) or y.shape != (stats.m,):
        raise DimensionMismatch(
            f"sample shape ({x.shape[0]}, {y.shape[0]}) does not match "
            f"configured (d={stats.d}, m={stats.m})"
        )
    mu = stats.mu
    return SufficientStats(
        d=stats.d, m=stats.m, mu=mu, count=stats.count + 1,
        c_xx=mu * stats.c_xx + np.outer(x, x),
        c_xy=mu * stats.c_xy + np.outer(x, y),
        c_yy=mu * stats.c_yy + np.outer(y, y),
    )


def weighted_loss(stats, p, gamma):
    """Decayed prediction loss sum_i mu^(t-i) (y_i - P x_i)^T Gamma (y_i - P x_i).

    Evaluated from the statistics alone as
    tr(Gamma c_yy) + tr(P^T Gamma P c_xx) - 2 tr(Gamma P c_xy).
    Tiny negative round-off is clamped to zero (and counted).
    """
    global _clamp_count
    p = np.asarray(p, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    if p.shape != (stats.m, stats.d) or gamma.shape != (stats.m, stats.m):
        raise DimensionMismatch(
            f"expected P {(stats.m, stats.d)} and Gamma {(stats.m, stats.m)}, "
            f"got {p.shape} and {gamma.shape}"
        )
    gp = gamma @ p
    loss = (
        float(np.trace(gamma @ stats.c_yy))
        + float(np.sum((p.T @ gp) * stats.c_xx.T))
        - 2.0 * float(np.sum(gp * stats.c_xy.T))
    )
    if loss < 0.0:
        _clamp_count += 1
        loss = 0.0
    return loss
