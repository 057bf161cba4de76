"""Monte Carlo integration of ``dx = -L x dt + dz`` with alpha-stable increments.

The centered output ``y = M_n x`` is simulated directly; since ``L 1 = 0``
the drift commutes with centering, so each step is

    y <- A y + M_n dz,   A = I - dt L  (Euler)  or  A = exp(-L dt)  (semi-exact).

Noise intensity: the steady-state formulas carry a factor ``1/alpha``
(``sigma_lj^alpha = (1/alpha) int |f_lj|^alpha``), which corresponds to a
stable motion whose increments over ``dt`` are ``S_alpha((dt/alpha)^(1/alpha), beta, 0)``.
That is the default; at ``alpha = 2`` it is standard Brownian motion.
``control="lebesgue"`` uses ``S_alpha(dt^(1/alpha), beta, 0)`` instead, which
scales every ``sigma_l^alpha`` by ``alpha``.

Paths run in blocks; block ``b`` draws from the stream ``(seed, b)``, so an
ensemble is bit-identical for any thread count.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .fluctuation import NoiseSpec
from .graph import Graph, build_laplacian, graph_spectrum
from .stable import StableParams, char_fn, make_rng, moment_constant, standard_draws

SCHEMES = ("euler", "semi-exact")
CONTROLS = ("scaled", "lebesgue")
MIN_SAMPLES = 1000


@dataclass(frozen=True)
class SimConfig:
    graph: Graph
    noise: NoiseSpec
    dt: float = 1e-3
    horizon: float = 10.0
    paths: int = 1000
    seed: int = 0
    x0: tuple[float, ...] | None = None
    record_stride: int | None = None
    scheme: str = "euler"
    control: str = "scaled"
    noise_scale: float = 1.0
    block_paths: int = 2000

    def __post_init__(self):
        if self.noise.n != self.graph.n:
            raise ValueError(f"noise has {self.noise.n} betas for a {self.graph.n}-node graph")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if self.control not in CONTROLS:
            raise ValueError(f"control must be one of {CONTROLS}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.paths < 1 or self.block_paths < 1:
            raise ValueError("paths and block_paths must be >= 1")
        if self.horizon < self.dt:
            raise ValueError("horizon must be >= dt")
        if self.noise_scale < 0:
            raise ValueError("noise_scale must be >= 0")
        if self.record_stride is not None and self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if self.x0 is not None and len(self.x0) != self.graph.n:
            raise ValueError("x0 needs one entry per node")
        lam_max = graph_spectrum(self.graph).lambda_max
        if self.dt >= 2.0 / lam_max:
            raise ValueError(f"dt={self.dt} violates dt < 2/lambda_n = {2.0 / lam_max:.6g}")

    @property
    def steps(self) -> int:
        return int(round(self.horizon / self.dt))

    @property
    def stride(self) -> int:
        return self.steps if self.record_stride is None else self.record_stride

    @property
    def increment_scale(self) -> float:
        """Scale of each per-node increment."""
        a = self.noise.alpha
        base = self.dt / a if self.control == "scaled" else self.dt
        return self.noise_scale * base ** (1.0 / a)

    def to_dict(self) -> dict:
        return {
            "n": self.graph.n, "alpha": self.noise.alpha, "betas": list(self.noise.betas),
            "dt": self.dt, "horizon": self.horizon, "paths": self.paths, "seed": self.seed,
            "scheme": self.scheme, "control": self.control, "noise_scale": self.noise_scale,
            "record_stride": self.stride, "block_paths": self.block_paths,
        }


@dataclass
class TrajectoryEnsemble:
    """Recorded outputs ``y[r, path, node]`` at ``times[r]``."""

    times: np.ndarray
    y: np.ndarray
    config: SimConfig

    @property
    def terminal(self) -> np.ndarray:
        return self.y[-1]

    def samples(self, burn_in: float | None = None) -> np.ndarray:
        """Pooled ``(records * paths, n)`` outputs at times ``>= burn_in``.

        The default burn-in is ``10 / lambda_2``; if no record is that late
        the terminal record is used.
        """
        if burn_in is None:
            burn_in = 10.0 / graph_spectrum(self.config.graph).lambda2
        keep = self.times >= burn_in - 1e-12
        if not keep.any():
            keep = self.times == self.times[-1]
        return self.y[keep].reshape(-1, self.y.shape[2])

    def centering_error(self) -> float:
        """``max_t |sum_l y_t| / max_t ||y_t||_1`` over all paths."""
        s = np.abs(self.y.sum(axis=2)).max()
        scale = np.abs(self.y).sum(axis=2).max()
        return float(s / scale) if scale > 0 else float(s)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time", "path", "node", "y"])
        for r, t in enumerate(self.times):
            for p in range(self.y.shape[1]):
                for l in range(self.y.shape[2]):
                    w.writerow([f"{t:.9g}", p, l + 1, f"{self.y[r, p, l]:.9g}"])
        return buf.getvalue()


def _drift(config: SimConfig) -> np.ndarray:
    if config.scheme == "euler":
        return np.eye(config.graph.n) - config.dt * build_laplacian(config.graph)
    spec = graph_spectrum(config.graph)
    q = np.asarray(spec.eigenvectors)
    return (q * np.exp(-np.asarray(spec.eigenvalues) * config.dt)) @ q.T


def _run_block(config: SimConfig, drift: np.ndarray, block: int, count: int):
    rng = make_rng(config.seed, block)
    n = config.graph.n
    alpha = config.noise.alpha
    betas = np.asarray(config.noise.betas)
    groups = [(b, np.flatnonzero(betas == b)) for b in sorted(set(betas.tolist()))]
    scale = config.increment_scale
    shift = 0.0
    if alpha == 1.0 and scale > 0:
        # S_1(s, beta, 0) = s Z + (2/pi) beta s ln s, per node
        shift = (2 / math.pi) * betas * scale * math.log(scale)
    y = np.zeros((count, n))
    if config.x0 is not None:
        x0 = np.asarray(config.x0, dtype=float)
        y[:] = x0 - x0.mean()
    steps, stride = config.steps, config.stride
    out = np.empty((steps // stride, count, n))
    dz = np.empty((count, n))
    for k in range(1, steps + 1):
        y = y @ drift
        if scale > 0:
            for b, cols in groups:
                dz[:, cols] = standard_draws(alpha, b, (count, len(cols)), rng)
            dz *= scale
            dz += shift
            dz -= dz.mean(axis=1, keepdims=True)
            y += dz
        if k % stride == 0:
            out[k // stride - 1] = y
    return out


def run(config: SimConfig, threads: int = 1) -> TrajectoryEnsemble:
    """Simulate the ensemble; outputs are recorded every ``record_stride`` steps."""
    drift = _drift(config)
    sizes = []
    left = config.paths
    while left > 0:
        sizes.append(min(config.block_paths, left))
        left -= sizes[-1]
    jobs = list(enumerate(sizes))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda j: _run_block(config, drift, *j), jobs))
    else:
        parts = [_run_block(config, drift, b, c) for b, c in jobs]
    y = np.concatenate(parts, axis=1)
    times = config.dt * config.stride * np.arange(1, y.shape[0] + 1)
    return TrajectoryEnsemble(times, y, config)


# ---------------------------------------------------------------------------
# estimation

@dataclass(frozen=True)
class ScaleEstimate:
    """Per-column ECF estimates; ``*_se`` are batch-means standard errors."""

    alpha: float
    sigma_alpha: np.ndarray
    beta: np.ndarray
    mu: np.ndarray
    sigma_alpha_se: np.ndarray
    samples: int

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha, "samples": self.samples,
            "sigma_alpha": self.sigma_alpha.tolist(), "sigma_alpha_se": self.sigma_alpha_se.tolist(),
            "beta": self.beta.tolist(), "mu": self.mu.tolist(),
        }


def _ecf_fit(x: np.ndarray, alpha: float):
    """sigma^alpha, beta and mu of each column of ``x`` from the ECF on a 3-point grid."""
    q75, q25 = np.percentile(x, [75, 25], axis=0)
    guess = np.maximum((q75 - q25) / 2.0, 1e-300)
    theta = np.array([0.25, 0.5, 1.0])[:, None] / guess[None, :]
    phi = np.exp(1j * theta[:, None, :] * x[None, :, :]).mean(axis=1)
    mod = np.maximum(np.abs(phi), 1e-300)
    s_a = np.mean(-np.log(mod) / theta ** alpha, axis=0)
    beta = np.zeros(x.shape[1])
    mu = np.zeros(x.shape[1])
    ang = np.unwrap(np.angle(phi), axis=0)
    for c in range(x.shape[1]):
        if alpha == 1.0:
            design = np.column_stack([-(2 / math.pi) * theta[:, c] * np.log(theta[:, c]), theta[:, c]])
        else:
            design = np.column_stack([math.tan(math.pi * alpha / 2) * theta[:, c] ** alpha, theta[:, c]])
        coef, *_ = np.linalg.lstsq(design, ang[:, c], rcond=None)
        mu[c] = coef[1]
        if abs(design[0, 0]) > 1e-12 and s_a[c] > 0:
            beta[c] = np.clip(coef[0] / s_a[c], -1, 1)
    return s_a, beta, mu


def estimate_scale(samples, alpha: float, batches: int = 10) -> ScaleEstimate:
    """Empirical-characteristic-function estimate of each column's stable law.

    ``sigma^alpha`` is the mean of ``-ln|phi(theta)| / theta^alpha`` over
    ``theta in {0.25, 0.5, 1} / s`` with ``s`` half the interquartile range.
    ``beta`` and ``mu`` come from a least-squares fit of ``arg phi``; ``beta``
    is reported as 0 at ``alpha = 2``, where it does not affect the law.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    m = x.shape[0]
    if m < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {m}")
    s_a, beta, mu = _ecf_fit(x, alpha)
    nb = max(2, min(batches, m // 100))
    parts = np.array_split(x, nb, axis=0)
    batch = np.array([_ecf_fit(p, alpha)[0] for p in parts])
    se = batch.std(axis=0, ddof=1) / math.sqrt(nb)
    return ScaleEstimate(alpha, s_a, beta, mu, se, m)


@dataclass(frozen=True)
class MomentCheck:
    p: float
    empirical: float
    theoretical: float
    ratio: float
    passed: bool


def fractional_moment_check(samples, p: float, alpha: float, beta: float, sigma: float,
                            rtol: float = 0.05) -> MomentCheck:
    """Compare ``mean |y|^p`` with ``c(alpha, beta, p)^p sigma^p``."""
    if alpha < 2 and p >= alpha:
        raise ValueError(f"E|y|^p is infinite for p >= alpha (p={p}, alpha={alpha})")
    x = np.asarray(samples, dtype=float).ravel()
    emp = float(np.mean(np.abs(x) ** p))
    theo = moment_constant(alpha, beta, p) ** p * sigma ** p
    ratio = emp / theo
    return MomentCheck(p, emp, theo, ratio, abs(ratio - 1) <= rtol)


def ecf_modulus_error(draws, params: StableParams, thetas) -> np.ndarray:
    """Relative modulus error ``| |phi_hat| / |phi| - 1 |`` at each ``theta``."""
    x = np.asarray(draws, dtype=float)
    th = np.asarray(thetas, dtype=float)
    emp = np.abs(np.array([np.mean(np.exp(1j * t * x)) for t in th]))
    return np.abs(emp / np.abs(char_fn(params, th)) - 1)


def jump_fraction(ensemble: TrajectoryEnsemble, factor: float = 5.0) -> float:
    """Fraction of recorded increments with ``|dy| > factor * median |dy|``."""
    d = np.abs(np.diff(ensemble.y, axis=0))
    if d.size == 0:
        raise ValueError("need at least two records")
    return float(np.mean(d > factor * np.median(d)))


def summary(ensemble: TrajectoryEnsemble, estimate: ScaleEstimate | None = None) -> str:
    doc = {"config": ensemble.config.to_dict(), "records": len(ensemble.times),
           "centering_error": ensemble.centering_error()}
    if estimate is not None:
        doc["estimate"] = estimate.to_dict()
    return json.dumps(doc, indent=2)
