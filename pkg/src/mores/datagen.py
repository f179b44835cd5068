"""Seeded synthetic stream generators.

All randomness flows from a PCG64 generator (a documented, portable
64-bit algorithm); Gaussian draws use the Box-Muller transform over its
uniforms so a given seed always yields the same stream.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError
from .suffstats import Sample

__all__ = [
    "SynthConfig",
    "gen_correlated",
    "gen_noiseless_linear",
    "gen_drifting",
]


@dataclass
class SynthConfig:
    """Configuration for the correlated-output synthetic stream."""

    seed: int = 0
    samples: int = 500
    d_features: int = 10
    noise_std: float = 0.1

    def validate(self):
        if self.samples < 1:
            raise ConfigError("samples must be >= 1")
        if self.noise_std < 0:
            raise ConfigError("noise_std must be >= 0")
        if self.d_features < 1:
            raise ConfigError("d_features must be >= 1")
        return self


def _normals(rng, n):
    """n standard-normal draws via Box-Muller on PCG64 uniforms."""
    half = (n + 1) // 2
    u1 = rng.random(half)
    u2 = rng.random(half)
    radius = np.sqrt(-2.0 * np.log1p(-u1))
    z = np.concatenate([radius * np.cos(2.0 * np.pi * u2),
                        radius * np.sin(2.0 * np.pi * u2)])
    return z[:n]


def gen_correlated(cfg):
    """Three correlated regression outputs over standard-normal inputs.

    Inputs carry d_features standard-normal entries plus a trailing
    constant 1 for the bias.  Two weight vectors p1, p2 define the first
    two outputs (plus independent Gaussian noise); the third output is
    their sum plus its own noise, so the first and third residual
    channels are correlated by construction.

    Returns (samples, p_real) where p_real stacks [p1; p2; p1 + p2].
    """
    cfg.validate()
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    d = cfg.d_features + 1
    p1 = _normals(rng, d)
    p2 = _normals(rng, d)
    p_real = np.vstack([p1, p2, p1 + p2])
    samples = []
    for _ in range(cfg.samples):
        x = np.concatenate([_normals(rng, cfg.d_features), [1.0]])
        eps = cfg.noise_std * _normals(rng, 3)
        y1 = p1 @ x + eps[0]
        y2 = p2 @ x + eps[1]
        y3 = y1 + y2 + eps[2]
        samples.append(Sample(x=x, y=np.array([y1, y2, y3])))
    return samples, p_real


def gen_noiseless_linear(seed, samples, d, m):
    """Exact linear stream y = P_real x with standard-normal inputs."""
    if d < 1 or m < 1 or samples < 1:
        raise ConfigError("d, m, samples must all be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    p_real = _normals(rng, m * d).reshape(m, d)
    out = []
    for _ in range(samples):
        x = _normals(rng, d)
        out.append(Sample(x=x, y=p_real @ x))
    return out, p_real


def gen_drifting(seed, samples, d, m, switch_at):
    """Noiseless linear stream whose coefficients switch once.

    Rounds 1..switch_at-1 follow P_a, the rest follow P_b; returns the
    (P_a, P_b, switch_at) schedule for diagnostics.  switch_at equal to
    samples means no switch occurs.
    """
    if not (1 <= switch_at <= samples):
        raise ConfigError("switch_at must satisfy 1 <= switch_at <= samples")
    rng = np.random.Generator(np.random.PCG64(seed))
    p_a = _normals(rng, m * d).reshape(m, d)
    p_b = _normals(rng, m * d).reshape(m, d)
    out = []
    for t in range(samples):
        x = _normals(rng, d)
        p = p_a if t < switch_at - 1 or switch_at == samples else p_b
        out.append(Sample(x=x, y=p @ x))
    return out, (p_a, p_b, switch_at)
