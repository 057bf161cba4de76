"""Steady-state output laws and the cumulative scale Sigma_alpha.

Every output ``y^(l)`` of the centered network converges to a stable law
``S_alpha(sigma_l, beta_l, mu_l)``. With ``A_lj = int |f_lj|^alpha``,
``S_lj = int f_lj^<alpha>`` and ``X_lj = int f_lj ln|f_lj|``:

    sigma_l^alpha = (1/alpha) sum_j A_lj
    beta_l        = sum_j beta_j (1/alpha) S_lj / sigma_l^alpha
    mu_l          = -(2/pi) sum_j beta_j X_lj        (alpha == 1, else 0)

``Sigma_alpha = sum_l sigma_l^alpha``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .graph import Spectrum, is_complete_spectrum
from .kernel import DEFAULT_TOL, SpectralKernel
from .stable import moment_constant

COMPLETE_TOL = 1e-9
GAUSSIAN_TOL = 1e-12

QUADRATURE = "quadrature"
CLOSED_FORM_ALPHA2 = "closed_form_alpha2"
CLOSED_FORM_COMPLETE = "closed_form_complete"


@dataclass(frozen=True)
class NoiseSpec:
    """Shared stability index and per-node skewness of the driving noise (shift 0)."""

    alpha: float
    betas: tuple[float, ...]

    def __init__(self, alpha: float, betas):
        if not 0.0 < alpha <= 2.0:
            raise ValueError(f"alpha must lie in (0, 2], got {alpha}")
        betas = tuple(float(b) for b in betas)
        if any(not -1.0 <= b <= 1.0 for b in betas):
            raise ValueError("every beta must lie in [-1, 1]")
        object.__setattr__(self, "alpha", float(alpha))
        object.__setattr__(self, "betas", betas)

    @classmethod
    def symmetric(cls, alpha: float, n: int) -> "NoiseSpec":
        return cls(alpha, [0.0] * n)

    @classmethod
    def uniform(cls, alpha: float, n: int, beta: float) -> "NoiseSpec":
        return cls(alpha, [beta] * n)

    @property
    def n(self) -> int:
        return len(self.betas)

    @property
    def is_symmetric(self) -> bool:
        return all(b == 0.0 for b in self.betas)


def _fmt(x: float) -> str:
    return f"{x + 0.0:.9g}"


@dataclass(frozen=True)
class FluctuationReport:
    alpha: float
    sigma_alpha: np.ndarray
    beta: np.ndarray
    mu: np.ndarray
    method: str
    tol: float
    Sigma_alpha: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "Sigma_alpha", float(np.sum(self.sigma_alpha)))

    @property
    def n(self) -> int:
        return len(self.sigma_alpha)

    @property
    def sigma(self) -> np.ndarray:
        return self.sigma_alpha ** (1.0 / self.alpha)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "method": self.method,
            "tol": self.tol,
            "Sigma_alpha": self.Sigma_alpha,
            "nodes": [
                {"node": l + 1, "sigma_alpha": float(s), "beta": float(b), "mu": float(m)}
                for l, (s, b, m) in enumerate(zip(self.sigma_alpha, self.beta, self.mu))
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["node", "sigma_alpha", "beta", "mu"])
        for l in range(self.n):
            w.writerow([l + 1, _fmt(self.sigma_alpha[l]), _fmt(self.beta[l]), _fmt(self.mu[l])])
        w.writerow(["total", _fmt(self.Sigma_alpha), "", ""])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# closed forms

def sigma_alpha_complete(n: int, lam: float, alpha: float) -> float:
    """Sigma_alpha when all nonzero Laplacian eigenvalues equal ``lam``."""
    if n < 2 or lam <= 0 or not 0 < alpha <= 2:
        raise ValueError("need n >= 2, lam > 0 and alpha in (0, 2]")
    return (n - 1) * (1 + (n - 1) ** (alpha - 1)) / (alpha ** 2 * n ** (alpha - 1) * lam)


def sigma_alpha_gaussian(spectrum: Spectrum) -> float:
    """Sigma_2 = (1/2) sum_k 1/(2 lambda_k), half the stationary output variance."""
    return 0.5 * float(np.sum(1.0 / (2.0 * spectrum.nonzero)))


def select_method(kernel: SpectralKernel, alpha: float) -> str:
    if is_complete_spectrum(kernel.spectrum, COMPLETE_TOL):
        return CLOSED_FORM_COMPLETE
    if abs(alpha - 2.0) <= GAUSSIAN_TOL:
        return CLOSED_FORM_ALPHA2
    return QUADRATURE


@dataclass(frozen=True)
class TransientParams:
    """Per-node law of ``y_t`` at a finite time ``t`` on a complete-spectrum graph."""

    t: float
    alpha: float
    sigma_alpha: np.ndarray
    beta: np.ndarray
    mu: np.ndarray


def _complete_xlogx(n: int, lam: float, t: float) -> tuple[float, float]:
    """``int_0^t f ln|f|`` for the diagonal and off-diagonal complete-graph kernels."""
    decay = -math.expm1(-lam * t) / lam if math.isfinite(t) else 1.0 / lam
    d = decay - (t * math.exp(-lam * t) if math.isfinite(t) else 0.0)
    a, b = (n - 1) / n, 1.0 / n
    diag = a * math.log(a) * decay - a * d
    off = -(b * math.log(b) * decay - b * d)
    return diag, off


def transient_params_complete(n: int, lam: float, alpha: float, betas, t: float) -> TransientParams:
    """Law of every output at time ``t`` from a zero start, for ``lambda_2 = lambda_n = lam``.

    ``t = inf`` gives the steady state. The skewness does not depend on ``t``
    (both the signed and absolute integrals carry the same ``1 - e^{-alpha lam t}``).
    """
    betas = np.asarray(betas, dtype=float)
    if len(betas) != n:
        raise ValueError("need one beta per node")
    growth = 1.0 if math.isinf(t) else -math.expm1(-alpha * lam * t)
    base = growth / (n ** alpha * alpha ** 2 * lam)
    diag_w = (n - 1) ** alpha
    sig = np.full(n, ((n - 1) + diag_w) * base)
    others = betas.sum() - betas
    beta = (betas * diag_w - others) / ((n - 1) + diag_w)
    if growth == 0.0:
        beta = np.zeros(n)
    mu = np.zeros(n)
    if alpha == 1.0:
        x_diag, x_off = _complete_xlogx(n, lam, t)
        mu = -(2 / math.pi) * (betas * x_diag + others * x_off)
    return TransientParams(t, alpha, sig, np.clip(beta, -1, 1), mu)


# ---------------------------------------------------------------------------
# general graphs

def steady_state_params(kernel: SpectralKernel, noise: NoiseSpec, tol: float = DEFAULT_TOL,
                        method: str = "auto") -> FluctuationReport:
    """Per-node steady-state stable parameters and Sigma_alpha.

    ``method="auto"`` uses the complete-spectrum or Gaussian closed form when
    one applies; ``"quadrature"`` forces the pairwise integrals.
    """
    n = kernel.n
    if noise.n != n:
        raise ValueError(f"noise has {noise.n} betas for a {n}-node graph")
    alpha = noise.alpha
    betas = np.asarray(noise.betas)
    if method == "auto":
        method = select_method(kernel, alpha)

    if method == CLOSED_FORM_COMPLETE:
        if not is_complete_spectrum(kernel.spectrum, COMPLETE_TOL):
            raise ValueError("complete-spectrum closed form needs lambda_2 == lambda_n")
        tp = transient_params_complete(n, kernel.lambda_max, alpha, betas, math.inf)
        return FluctuationReport(alpha, tp.sigma_alpha, tp.beta, tp.mu, method, tol)

    if method == CLOSED_FORM_ALPHA2:
        if abs(alpha - 2.0) > GAUSSIAN_TOL:
            raise ValueError("Gaussian closed form needs alpha == 2")
        sig = 0.5 * (kernel.modes ** 2 / (2 * kernel.rates)).sum(axis=1)
        beta = np.zeros(n)
        if not noise.is_symmetric:
            ints = kernel.pair_integrals(alpha, tol, signed=True)
            beta = (ints.matrix("signed_pow") @ betas) / alpha / sig
        return FluctuationReport(alpha, sig, np.clip(beta, -1, 1), np.zeros(n), method, tol)

    if method != QUADRATURE:
        raise ValueError(f"unknown method {method!r}")
    skewed = not noise.is_symmetric
    ints = kernel.pair_integrals(alpha, tol, signed=skewed, xlogx=skewed and alpha == 1.0)
    sig = ints.matrix("abs_pow").sum(axis=1) / alpha
    beta = np.zeros(n)
    mu = np.zeros(n)
    if skewed:
        beta = (ints.matrix("signed_pow") @ betas) / alpha / sig
        if alpha == 1.0:
            mu = -(2 / math.pi) * (ints.matrix("xlogx") @ betas)
    return FluctuationReport(alpha, sig, np.clip(beta, -1, 1), mu, method, tol)


def sigma_alpha_total(kernel: SpectralKernel, alpha: float, tol: float = DEFAULT_TOL,
                      method: str = "auto") -> float:
    """Sigma_alpha = (1/alpha) sum_{i,j} int |f_ij|^alpha."""
    if method == "auto":
        method = select_method(kernel, alpha)
    if method == CLOSED_FORM_COMPLETE:
        return sigma_alpha_complete(kernel.n, kernel.lambda_max, alpha)
    if method == CLOSED_FORM_ALPHA2:
        return sigma_alpha_gaussian(kernel.spectrum)
    ints = kernel.pair_integrals(alpha, tol, signed=False)
    weights = np.where(ints.pairs[:, 0] == ints.pairs[:, 1], 1.0, 2.0)
    return float(weights @ ints.abs_pow) / alpha


@dataclass(frozen=True)
class MonotonicityProfile:
    alphas: np.ndarray
    values: np.ndarray
    violations: list[tuple[float, float]]

    @property
    def decreasing(self) -> bool:
        return not self.violations


def monotonicity_profile(kernel: SpectralKernel, alpha_grid, tol: float = DEFAULT_TOL,
                         method: str = "auto") -> MonotonicityProfile:
    """Sigma_alpha over ``alpha_grid`` (sorted ascending) and any increases found.

    A step counts as a violation when Sigma grows by more than ``2 tol``
    relative, i.e. beyond quadrature noise.
    """
    alphas = np.sort(np.asarray(alpha_grid, dtype=float))
    if alphas[0] <= 0 or alphas[-1] > 2:
        raise ValueError("alpha grid must lie in (0, 2]")
    vals = np.array([sigma_alpha_total(kernel, a, tol, method) for a in alphas])
    bad = [(float(alphas[k]), float(alphas[k + 1])) for k in range(len(alphas) - 1)
           if vals[k + 1] - vals[k] > 2 * tol * abs(vals[k])]
    return MonotonicityProfile(alphas, vals, bad)


@dataclass(frozen=True)
class PMoment:
    """p-th absolute moments of the steady-state outputs.

    ``per_node[l] = c^p sigma_l^p``; ``total`` is ``E ||y||_p^p`` and
    ``lower <= total <= upper`` is the norm-equivalence sandwich in terms of
    Sigma_alpha.
    """

    p: float
    c: float
    per_node: np.ndarray
    total: float
    lower: float
    upper: float


def p_moment(report: FluctuationReport, p: float, beta_for_c: float = 0.0) -> PMoment:
    alpha = report.alpha
    c = moment_constant(alpha, beta_for_c, p)
    per_node = c ** p * report.sigma ** p
    base = c ** p * report.Sigma_alpha ** (p / alpha)
    upper = report.n ** (1 - p / alpha) * base
    return PMoment(p, c, per_node, float(per_node.sum()), float(base), float(upper))
