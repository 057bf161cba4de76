"""Spectral upper bounds on Sigma_alpha.

Three families are computed:

* theorem-level bounds assembled from eigenvector alpha-norms, the
  eigenvalue-spread table and ``G_alpha`` (one formula for ``alpha <= 1``,
  the smaller of two formulas for ``alpha >= 1``), with the constants
  exactly as printed;
* claim-level bounds: per-pair upper bounds on ``sigma_ij^alpha`` summed over
  all pairs (for ``alpha >= 1`` the smaller of the two options per pair);
* the near-Gaussian bound, the Gaussian value plus a double integral over
  ``w in [alpha, 2]`` of ``n^(2-w) g^w |ln g|``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .graph import Spectrum
from .kernel import DEFAULT_TOL, G_alpha, SpectralKernel, lambda_table
from .fluctuation import sigma_alpha_total
from .quadrature import gauss_legendre, integrate


def _as_kernel(obj) -> SpectralKernel:
    return obj if isinstance(obj, SpectralKernel) else SpectralKernel(obj)


def eigvec_norm_power(spectrum: Spectrum, alpha: float) -> np.ndarray:
    """``||q_k||_alpha^(2 alpha) = (sum_i |q_ik|^alpha)^2`` for each nonzero mode."""
    return np.abs(np.asarray(spectrum.modes)).__pow__(alpha).sum(axis=0) ** 2


def low_constants(n: int, alpha: float) -> dict:
    return {
        "c1": 1.0 / (alpha * (n - 1) ** alpha),
        "c2": (1 + (n - 1) ** (1 - alpha)) / (alpha * n ** (alpha - 1)),
    }


def high_constants(n: int, alpha: float, spread_total: float) -> dict:
    lp = spread_total ** (alpha - 1)
    return {
        "d1": 2 ** (alpha - 1) / (alpha * (n - 1) ** alpha),
        "d2": 2 ** (alpha - 1) * n ** (1 - alpha) / alpha * (1 + (n - 1) ** (1 - alpha)),
        "d3": 1.0 / (alpha * (n - 1) ** alpha),
        "d4": (1 + (n - 1) ** (1 - alpha)) * (1 + alpha * lp) / (n ** (alpha - 1) * (n - 1) ** (-alpha)),
    }


@dataclass(frozen=True)
class TheoremBound:
    alpha: float
    low: float | None
    high_first: float | None
    high_second: float | None
    constants: dict

    @property
    def high(self) -> float | None:
        if self.high_first is None:
            return None
        return min(self.high_first, self.high_second)

    @property
    def value(self) -> float:
        vals = [v for v in (self.low, self.high) if v is not None]
        return min(vals)


def bound_theorem1(kernel, alpha: float, tol: float = DEFAULT_TOL) -> TheoremBound:
    """Theorem-level bound; ``value`` is the smallest formula valid at ``alpha``."""
    kernel = _as_kernel(kernel)
    if not 0 < alpha <= 2:
        raise ValueError("alpha must lie in (0, 2]")
    spec = kernel.spectrum
    n = spec.n
    norms = eigvec_norm_power(spec, alpha)
    G = G_alpha(kernel, alpha, tol)
    consts: dict = {"G_alpha": G}
    low = first = second = None
    if alpha <= 1:
        c = low_constants(n, alpha)
        table = lambda_table(spec, alpha, 1.0)
        low = c["c1"] * float(norms @ table.per_mode) + c["c2"] * G
        consts.update(c, Lambda_a1=table.total)
    if alpha >= 1:
        table = lambda_table(spec, alpha, alpha)
        d = high_constants(n, alpha, table.total)
        weighted = table.total ** (alpha - 1) * float(norms @ table.per_mode)
        first = d["d1"] * weighted + d["d2"] * G
        second = d["d3"] * weighted + d["d4"] * G
        consts.update(d, Lambda_aa=table.total)
    return TheoremBound(alpha, low, first, second, consts)


def claim_pair_bounds(kernel, alpha: float, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Matrix of per-pair upper bounds on ``sigma_ij^alpha``.

    At ``alpha == 1`` both families apply and the smaller is kept.
    """
    kernel = _as_kernel(kernel)
    spec = kernel.spectrum
    n = spec.n
    G = G_alpha(kernel, alpha, tol)
    p = np.abs(np.asarray(spec.modes)) ** alpha
    off = ~np.eye(n, dtype=bool)
    cands = []
    if alpha <= 1:
        table = lambda_table(spec, alpha, 1.0)
        mix = (p * table.per_mode) @ p.T
        c1 = 1.0 / (alpha * (n - 1) ** alpha)
        g_term = np.where(off, G / (n ** alpha * alpha * (n - 1) ** alpha), G / (alpha * n ** alpha))
        cands.append(c1 * mix + g_term)
    if alpha >= 1:
        table = lambda_table(spec, alpha, alpha)
        lp = table.total ** (alpha - 1)
        mix = lp * ((p * table.per_mode) @ p.T)
        g_part = np.where(off, G / n ** alpha, (n - 1) ** alpha / n ** alpha * G)
        pref = 1.0 / (alpha * (n - 1) ** alpha)
        cands.append(2 ** (alpha - 1) * pref * (mix + g_part))
        cands.append(pref * (mix + g_part * (1 + alpha * lp)))
    return np.minimum.reduce(cands)


def bound_claims(kernel, alpha: float, tol: float = DEFAULT_TOL) -> float:
    return float(claim_pair_bounds(kernel, alpha, tol).sum())


def _unit_crossing(kernel: SpectralKernel) -> float | None:
    """Time where ``g(t) = 1`` (``g`` decreases from ``n - 1``), if any."""
    if kernel.n - 1 <= 1:
        return None
    lo, hi = 0.0, 1.0 / kernel.lambda2
    while kernel.g(hi) > 1.0:
        hi *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if kernel.g(mid) > 1.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return 0.5 * (lo + hi)


def bound_near2(kernel, alpha: float, tol: float = DEFAULT_TOL, nodes: int = 21) -> float:
    """Gaussian-perturbation bound, valid for ``alpha in (1, 2]``."""
    kernel = _as_kernel(kernel)
    if not 1 < alpha <= 2:
        raise ValueError("near-Gaussian bound requires alpha in (1, 2]")
    n = kernel.n
    base = float(np.sum(1.0 / (2.0 * kernel.rates))) / alpha
    if alpha == 2:
        return base
    w, wts = gauss_legendre(nodes, alpha, 2.0)
    rates = kernel.rates
    atol = tol * kernel.scale_reference(alpha) / n
    horizon = kernel.horizon(alpha, atol) + 5.0 / kernel.lambda2
    cross = _unit_crossing(kernel)

    def integrand(t):
        gv = np.exp(-np.outer(rates, t)).sum(axis=0)
        lg = np.abs(np.log(gv))
        return gv[None, :] ** w[:, None] * lg[None, :]

    inner = integrate(integrand, 0.0, horizon, breakpoints=[] if cross is None else [cross],
                      rtol=tol, atol=atol).value
    return base + float(np.sum(wts * n ** (2 - w) * inner)) / alpha


# ---------------------------------------------------------------------------
# comparison against the exact value

@dataclass
class BoundReport:
    alpha: float
    exact: float
    thm_low: float | None
    thm_high: float | None
    thm: float
    claims: float
    near2: float | None
    constants: dict = field(default_factory=dict)
    tol: float = DEFAULT_TOL

    @property
    def best(self) -> float:
        return min(v for v in (self.thm, self.claims, self.near2) if v is not None)

    def ratios(self) -> dict:
        out = {"thm": self.thm / self.exact, "claims": self.claims / self.exact}
        if self.thm_low is not None:
            out["thm_low"] = self.thm_low / self.exact
        if self.thm_high is not None:
            out["thm_high"] = self.thm_high / self.exact
        if self.near2 is not None:
            out["near2"] = self.near2 / self.exact
        return out

    def violations(self, slack: float = 10.0) -> list[str]:
        """Names of bounds that fall below ``exact`` by more than ``slack * tol`` (relative)."""
        floor = self.exact * (1 - slack * self.tol)
        vals = {"thm": self.thm, "claims": self.claims, "near2": self.near2}
        return [k for k, v in vals.items() if v is not None and v < floor]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ratios"] = self.ratios()
        return d


def bound_report(kernel, alpha: float, tol: float = DEFAULT_TOL) -> BoundReport:
    kernel = _as_kernel(kernel)
    exact = sigma_alpha_total(kernel, alpha, tol)
    thm = bound_theorem1(kernel, alpha, tol)
    near2 = bound_near2(kernel, alpha, tol) if alpha > 1 else None
    return BoundReport(alpha, exact, thm.low, thm.high, thm.value,
                       bound_claims(kernel, alpha, tol), near2, thm.constants, tol)


def tightness_report(kernel, alpha_grid, tol: float = DEFAULT_TOL) -> list[BoundReport]:
    kernel = _as_kernel(kernel)
    return [bound_report(kernel, float(a), tol) for a in alpha_grid]


def _fmt(x) -> str:
    return "" if x is None else f"{x + 0.0:.9g}"


def reports_to_csv(reports: list[BoundReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha", "exact", "thm_bound", "claims_bound", "near2_bound",
                "thm_ratio", "claims_ratio", "near2_ratio"])
    for r in reports:
        rt = r.ratios()
        w.writerow([_fmt(r.alpha), _fmt(r.exact), _fmt(r.thm), _fmt(r.claims), _fmt(r.near2),
                    _fmt(rt["thm"]), _fmt(rt["claims"]), _fmt(rt.get("near2"))])
    return buf.getvalue()


def reports_to_json(reports: list[BoundReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2)
