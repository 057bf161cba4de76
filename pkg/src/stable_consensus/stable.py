"""Alpha-stable laws S_alpha(sigma, beta, mu): algebra, characteristic function,
sampling and fractional moments.

Parameterization: the characteristic function is

    exp{ sigma^alpha (-|theta|^alpha + i theta omega(theta)) + i mu theta },

with ``omega = beta |theta|^(alpha-1) tan(pi alpha / 2)`` for ``alpha != 1``
and ``omega = -beta (2/pi) ln|theta|`` for ``alpha == 1``. ``S_2(sigma, ., mu)``
is Gaussian with variance ``2 sigma^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class StableParams:
    alpha: float
    sigma: float = 1.0
    beta: float = 0.0
    mu: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not self.sigma >= 0.0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if not -1.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [-1, 1], got {self.beta}")
        if not math.isfinite(self.mu):
            raise ValueError("mu must be finite")


def _omega_theta(theta: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    """``theta * omega(theta, alpha, beta)``, with the removable ``theta = 0`` value 0."""
    theta = np.asarray(theta, dtype=float)
    if alpha != 1.0:
        return beta * math.tan(math.pi * alpha / 2) * np.sign(theta) * np.abs(theta) ** alpha
    out = np.zeros_like(theta)
    nz = theta != 0
    out[nz] = -beta * (2 / math.pi) * theta[nz] * np.log(np.abs(theta[nz]))
    return out


def char_fn(p: StableParams, theta):
    """Characteristic function ``E exp(i theta z)`` for ``z ~ p``."""
    th = np.asarray(theta, dtype=float)
    a = p.alpha
    s_a = p.sigma ** a
    expo = s_a * (-np.abs(th) ** a + 1j * _omega_theta(th, a, p.beta)) + 1j * p.mu * th
    out = np.exp(expo)
    return complex(out) if np.ndim(theta) == 0 else out


def shift(p: StableParams, a: float) -> StableParams:
    return StableParams(p.alpha, p.sigma, p.beta, p.mu + a)


def scale_by(p: StableParams, a: float) -> StableParams:
    """Law of ``a * z``.

    For ``alpha == 1`` the shift picks up ``-(2/pi) a ln|a| sigma beta``, the
    value that makes ``char_fn(scale_by(p, a), t) == char_fn(p, a t)``.
    """
    if a == 0:
        raise ValueError("scale factor must be nonzero")
    mu = a * p.mu
    if p.alpha == 1.0:
        mu -= (2 / math.pi) * a * math.log(abs(a)) * p.sigma * p.beta
    return StableParams(p.alpha, abs(a) * p.sigma, math.copysign(1.0, a) * p.beta, mu)


def sum_indep(p1: StableParams, p2: StableParams) -> StableParams:
    """Law of the sum of independent variables with laws ``p1`` and ``p2``."""
    if p1.alpha != p2.alpha:
        raise ValueError(f"stability indices differ: {p1.alpha} vs {p2.alpha}")
    a = p1.alpha
    s1, s2 = p1.sigma ** a, p2.sigma ** a
    tot = s1 + s2
    beta = 0.0 if tot == 0 else (p1.beta * s1 + p2.beta * s2) / tot
    return StableParams(a, tot ** (1 / a), max(-1.0, min(1.0, beta)), p1.mu + p2.mu)


def signed_power(q, alpha: float):
    """``|q|^alpha sign(q)``."""
    out = np.sign(q) * np.abs(q) ** alpha
    return float(out) if np.ndim(q) == 0 else out


# ---------------------------------------------------------------------------
# random numbers

def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based (Philox) generator for the independent stream ``(seed, stream)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))


def standard_draws(alpha: float, beta: float, size, rng: np.random.Generator) -> np.ndarray:
    """Chambers-Mallows-Stuck draws from ``S_alpha(1, beta, 0)``."""
    half_pi = math.pi / 2
    v = rng.uniform(-half_pi, half_pi, size)
    w = rng.standard_exponential(size)
    if alpha == 1.0:
        bv = half_pi + beta * v
        return (2 / math.pi) * (bv * np.tan(v) - beta * np.log(half_pi * w * np.cos(v) / bv))
    zeta = beta * math.tan(math.pi * alpha / 2)
    b = math.atan(zeta) / alpha
    s = (1 + zeta * zeta) ** (1 / (2 * alpha))
    av = alpha * (v + b)
    return (s * np.sin(av) / np.cos(v) ** (1 / alpha)
            * (np.cos(v - av) / w) ** ((1 - alpha) / alpha))


def sample(p: StableParams, size=None, rng: np.random.Generator | None = None):
    """Draws from ``p``; ``rng`` defaults to ``make_rng(0)``."""
    rng = make_rng(0) if rng is None else rng
    x = standard_draws(p.alpha, p.beta, 1 if size is None else size, rng)
    if p.alpha == 1.0:
        lg = math.log(p.sigma) if p.sigma > 0 else 0.0
        x = p.sigma * x + (2 / math.pi) * p.beta * p.sigma * lg + p.mu
    else:
        x = p.sigma * x + p.mu
    return float(x[0]) if size is None else x


def sample_increment(alpha: float, beta: float, dt: float, size=None,
                     rng: np.random.Generator | None = None):
    """Increment of a stable Levy motion over a step ``dt``: ``S_alpha(dt^(1/alpha), beta, 0)``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    return sample(StableParams(alpha, dt ** (1 / alpha), beta, 0.0), size, rng)


# ---------------------------------------------------------------------------
# fractional moments

def moment_constant(alpha: float, beta: float, p: float) -> float:
    """``c`` with ``c^p = E|z0|^p`` for ``z0 ~ S_alpha(1, beta, 0)``.

    Closed form: the symmetric moment
    ``2^p Gamma((1+p)/2) Gamma(1-p/alpha) / (sqrt(pi) Gamma(1-p/2))`` times the
    skewness factor ``(1+zeta^2)^(p/(2 alpha)) cos(p/alpha * atan(zeta))`` with
    ``zeta = beta tan(pi alpha/2)``. Skewed ``alpha = 1`` is not supported.
    """
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (0, 2], got {alpha}")
    if not -1.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [-1, 1], got {beta}")
    if p <= 0:
        raise ValueError("p must be positive")
    if alpha < 2 and p >= alpha:
        raise ValueError(f"E|z|^p is infinite for p >= alpha (p={p}, alpha={alpha})")
    if alpha == 2 and p > 2:
        raise ValueError("only p <= 2 is supported for alpha = 2")
    if alpha == 1 and beta != 0:
        raise ValueError("moment constant for skewed alpha = 1 laws is not supported")
    if alpha == 2:
        # Gaussian with variance 2: Gamma(1-p/alpha)/Gamma(1-p/2) == 1
        moment = 2 ** p * math.gamma((1 + p) / 2) / math.sqrt(math.pi)
    else:
        moment = (2 ** p * math.gamma((1 + p) / 2) * math.gamma(1 - p / alpha)
                  / (math.sqrt(math.pi) * math.gamma(1 - p / 2)))
        if beta != 0:
            zeta = beta * math.tan(math.pi * alpha / 2)
            moment *= (1 + zeta * zeta) ** (p / (2 * alpha)) * math.cos(p / alpha * math.atan(zeta))
    return moment ** (1 / p)
