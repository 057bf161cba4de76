"""Spectral kernels of the centered consensus dynamics and their integrals.

For a Laplacian ``L = Q diag(lambda) Q^T`` the impulse response of the
output ``y = M_n x`` from node ``j`` to node ``i`` is

    f_ij(t) = sum_{k>=2} q_ik q_jk exp(-lambda_k t),

and ``g(t) = sum_{k>=2} exp(-lambda_k t)`` dominates every ``|f_ij|``.
Integrals of powers of these exponential mixtures over ``[0, inf)`` are
computed by truncating at a point where the analytic tail bound is below the
absolute tolerance, splitting at the sign changes of ``f_ij`` (where
``|f|^alpha`` has a cusp) and running adaptive Gauss-Kronrod.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import Spectrum
from .quadrature import integrate

DEFAULT_TOL = 1e-8
LOG_FLOOR = 1e-30


def signed_pow(x: np.ndarray, alpha: float) -> np.ndarray:
    return np.sign(x) * np.abs(x) ** alpha


def _xlogx(x: np.ndarray) -> np.ndarray:
    ax = np.abs(x)
    out = np.zeros_like(x)
    m = ax >= LOG_FLOOR
    out[m] = x[m] * np.log(ax[m])
    return out


@dataclass(frozen=True)
class PairIntegrals:
    """Integrals over ``[0, inf)`` for the pairs ``(i, j)``, ``i <= j`` (0-based).

    ``abs_pow`` is ``int |f_ij|^alpha``, ``signed_pow`` is
    ``int f_ij^<alpha>`` and ``xlogx`` is ``int f_ij ln|f_ij|`` (only filled
    when requested).
    """

    alpha: float
    n: int
    pairs: np.ndarray
    abs_pow: np.ndarray
    signed_pow: np.ndarray | None
    xlogx: np.ndarray | None
    horizon: float

    def matrix(self, which: str = "abs_pow") -> np.ndarray:
        vals = getattr(self, which)
        if vals is None:
            raise ValueError(f"{which} was not computed")
        out = np.zeros((self.n, self.n))
        out[self.pairs[:, 0], self.pairs[:, 1]] = vals
        out[self.pairs[:, 1], self.pairs[:, 0]] = vals
        return out


class SpectralKernel:
    """Kernel functions attached to a validated :class:`Spectrum`."""

    def __init__(self, spectrum: Spectrum):
        self.spectrum = spectrum
        self.n = spectrum.n
        self.rates = np.asarray(spectrum.nonzero, dtype=float)
        self.modes = np.asarray(spectrum.modes, dtype=float)
        iu, ju = np.triu_indices(self.n)
        self.pairs = np.stack([iu, ju], axis=1)
        self.coefs = self.modes[iu] * self.modes[ju]
        # merge (numerically) repeated eigenvalues into one exponential each
        groups = [[0]]
        for k in range(1, len(self.rates)):
            if self.rates[k] - self.rates[groups[-1][0]] <= 1e-12 * self.lambda_max:
                groups[-1].append(k)
            else:
                groups.append([k])
        self.group_rates = np.array([self.rates[grp].mean() for grp in groups])
        self.group_sizes = np.array([len(grp) for grp in groups])
        merge = np.zeros((len(self.rates), len(groups)))
        for col, grp in enumerate(groups):
            merge[grp, col] = 1.0
        gc = self.coefs @ merge
        gc[np.abs(gc) < 1e-13] = 0.0
        self.group_coefs = gc
        self._cache: dict = {}

    @property
    def lambda2(self) -> float:
        return float(self.rates[0])

    @property
    def lambda_max(self) -> float:
        return float(self.rates[-1])

    # -- pointwise ----------------------------------------------------------

    def _exp(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.exp(-np.outer(self.rates, t))

    def _gexp(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.exp(-np.outer(self.group_rates, t))

    def f(self, i: int, j: int, t):
        """``f_ij(t)`` for 1-based node ids."""
        c = self.modes[i - 1] * self.modes[j - 1]
        out = c @ self._exp(t)
        return out if np.ndim(t) else float(out[0])

    def g(self, t):
        out = self._exp(t).sum(axis=0)
        return out if np.ndim(t) else float(out[0])

    def f_matrix(self, t: float) -> np.ndarray:
        """All ``f_ij(t)`` as an ``n x n`` matrix."""
        w = np.exp(-self.rates * t)
        return (self.modes * w) @ self.modes.T

    # -- truncation and panels ---------------------------------------------

    def scale_reference(self, alpha: float) -> float:
        """Lower bound of ``int f_ii^alpha`` (``f_ii >= (n-1)/n exp(-lambda_n t)``)."""
        return ((self.n - 1) / self.n) ** alpha / (alpha * self.lambda_max)

    def horizon(self, alpha: float, eps_abs: float) -> float:
        """Truncation point where ``int_T^inf g^alpha <= eps_abs``."""
        lam2 = self.lambda2
        arg = (self.n - 1) ** alpha / (alpha * lam2 * eps_abs)
        return max(math.log(max(arg, 1.0)) / (alpha * lam2), 1.0 / lam2)

    def sign_changes(self, coefs: np.ndarray, horizon: float) -> np.ndarray:
        """Sorted sign changes in ``(0, horizon)`` of the exponential sums with
        grouped coefficient rows ``coefs`` (one row per pair)."""
        coefs = np.atleast_2d(coefs)
        live = np.abs(coefs).max(axis=1) > 1e-14
        # a sum of exponentials with one-signed coefficients has no zeros
        live &= (coefs > 1e-14).any(axis=1) & (coefs < -1e-14).any(axis=1)
        if not live.any():
            return np.empty(0)
        c = coefs[live]
        grid = np.unique(np.concatenate([
            np.linspace(0.0, horizon, 2001),
            np.geomspace(1e-4 / self.lambda_max, horizon, 600),
        ]))
        sgn = np.sign(c @ self._gexp(grid))
        rows, cols = np.nonzero(sgn[:, :-1] * sgn[:, 1:] < 0)
        exact = grid[np.nonzero((sgn[:, 1:-1] == 0).any(axis=0))[0] + 1]
        if len(rows) == 0:
            return np.sort(exact)
        lo = grid[cols].copy()
        hi = grid[cols + 1].copy()
        cr = c[rows]
        flo = np.sign(np.einsum("mk,km->m", cr, self._gexp(lo)))
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            fm = np.sign(np.einsum("mk,km->m", cr, self._gexp(mid)))
            left = fm == flo
            lo = np.where(left, mid, lo)
            hi = np.where(left, hi, mid)
        roots = np.concatenate([0.5 * (lo + hi), exact])
        return np.unique(roots[(roots > 0) & (roots < horizon)])

    # -- integrals ------------------------------------------------------------

    def pair_integrals(self, alpha: float, tol: float = DEFAULT_TOL,
                       signed: bool = True, xlogx: bool = False,
                       pairs: np.ndarray | None = None) -> PairIntegrals:
        """Adaptive quadrature of the pair integrals for ``pairs`` (default: all ``i <= j``)."""
        key = (float(alpha), float(tol), bool(signed), bool(xlogx),
               None if pairs is None else np.asarray(pairs).tobytes())
        if key in self._cache:
            return self._cache[key]
        if pairs is None:
            sel = np.arange(len(self.pairs))
            pairs = self.pairs
        else:
            pairs = np.atleast_2d(np.asarray(pairs, dtype=int))
            pairs = np.sort(pairs, axis=1)
            sel = np.array([np.flatnonzero((self.pairs == p).all(axis=1))[0] for p in pairs])
        coefs = self.group_coefs[sel]
        m = len(sel)
        ref = self.scale_reference(alpha)
        atol = tol * ref / self.n
        horizon = self.horizon(alpha, atol)
        if xlogx:
            horizon += 5.0 / self.lambda2
        breaks = self.sign_changes(coefs, horizon)
        rates = self.group_rates

        def integrand(t):
            vals = coefs @ np.exp(-np.outer(rates, t))
            parts = [np.abs(vals) ** alpha]
            if signed:
                parts.append(signed_pow(vals, alpha))
            if xlogx:
                parts.append(_xlogx(vals))
            return np.concatenate(parts, axis=0)

        res = integrate(integrand, 0.0, horizon, breakpoints=breaks, rtol=tol, atol=atol)
        vals = res.value
        out = PairIntegrals(
            alpha=float(alpha),
            n=self.n,
            pairs=pairs,
            abs_pow=vals[:m],
            signed_pow=vals[m:2 * m] if signed else None,
            xlogx=vals[-m:] if xlogx else None,
            horizon=horizon,
        )
        self._cache[key] = out
        return out

    def sigma_matrix(self, alpha: float, tol: float = DEFAULT_TOL) -> np.ndarray:
        """``sigma_ij^alpha = (1/alpha) int |f_ij|^alpha`` for all pairs."""
        return self.pair_integrals(alpha, tol, signed=False).matrix("abs_pow") / alpha


def f_ij(kernel: SpectralKernel, i: int, j: int, t):
    return kernel.f(i, j, t)


def g(kernel: SpectralKernel, t):
    return kernel.g(t)


def G_alpha(kernel: SpectralKernel, alpha: float, tol: float = DEFAULT_TOL) -> float:
    """``int_0^inf g(s)^alpha ds``."""
    key = ("G", float(alpha), float(tol))
    if key in kernel._cache:
        return kernel._cache[key]
    rates = kernel.rates
    atol = tol * kernel.scale_reference(alpha) / kernel.n
    horizon = kernel.horizon(alpha, atol)

    def integrand(t):
        return (np.exp(-np.outer(rates, t)).sum(axis=0) ** alpha)[None, :]

    val = float(integrate(integrand, 0.0, horizon, rtol=tol, atol=atol).value[0])
    kernel._cache[key] = val
    return val


def G_alpha_tail_bound(kernel: SpectralKernel, alpha: float) -> float:
    """Analytic bound ``(n-1)^alpha / (alpha lambda_2)`` from ``g <= (n-1) e^{-lambda_2 t}``."""
    return (kernel.n - 1) ** alpha / (alpha * kernel.lambda2)


def G_alpha_simple_bound(kernel: SpectralKernel) -> float:
    """The coarse bound ``(n-1)/lambda_2`` quoted alongside the main estimates."""
    return (kernel.n - 1) / kernel.lambda2


def sigma_ij_alpha(kernel: SpectralKernel, i: int, j: int, alpha: float,
                   tol: float = DEFAULT_TOL) -> float:
    pi = kernel.pair_integrals(alpha, tol, signed=False, pairs=[(i - 1, j - 1)])
    return float(pi.abs_pow[0]) / alpha


def signed_sigma_integral(kernel: SpectralKernel, i: int, j: int, alpha: float,
                          tol: float = DEFAULT_TOL) -> float:
    """``int_0^inf f_ij(s)^<alpha> ds``."""
    pi = kernel.pair_integrals(alpha, tol, signed=True, pairs=[(i - 1, j - 1)])
    return float(pi.signed_pow[0])


def xlogx_integral(kernel: SpectralKernel, i: int, j: int, tol: float = DEFAULT_TOL) -> float:
    """``int_0^inf f_ij ln|f_ij| ds`` (the integrand is taken as 0 where ``|f| < 1e-30``)."""
    pi = kernel.pair_integrals(1.0, tol, signed=False, xlogx=True, pairs=[(i - 1, j - 1)])
    return float(pi.xlogx[0])


@dataclass(frozen=True)
class LambdaTable:
    """Eigenvalue-spread functional per nonzero mode (``per_mode[k-2]`` for ``k = 2..n``)."""

    alpha: float
    p: float
    per_mode: np.ndarray

    @property
    def total(self) -> float:
        return float(self.per_mode.sum())


def lambda_table(spectrum: Spectrum, alpha: float, p: float) -> LambdaTable:
    """Gamma-weighted spread of each nonzero eigenvalue from the rest of the spectrum.

    For mode ``k``: ``Gamma(alpha+1)^(1/p)`` times the sum over lower modes
    ``m`` of ``(lam_k - lam_m)^(alpha/p) / (alpha lam_m)^((alpha+1)/p)`` plus
    the sum over higher modes of ``(lam_m - lam_k)^(alpha/p) / (alpha lam_k)^((alpha+1)/p)``.
    Gaps below ``1e-12 lambda_n`` count as repeated eigenvalues.
    """
    lam = np.asarray(spectrum.nonzero, dtype=float)
    gap = np.abs(lam[:, None] - lam[None, :])                     # [k, m]
    # round-off gaps between repeated eigenvalues would survive a small power
    gap[gap <= 1e-12 * lam.max()] = 0.0
    spread = gap ** (alpha / p)
    expo = (alpha + 1) / p
    idx = np.arange(len(lam))
    below = idx[None, :] < idx[:, None]                           # m < k
    above = idx[None, :] > idx[:, None]                           # m > k
    vals = (np.where(below, spread / (alpha * lam[None, :]) ** expo, 0.0).sum(axis=1)
            + np.where(above, spread / (alpha * lam[:, None]) ** expo, 0.0).sum(axis=1))
    vals = math.gamma(alpha + 1) ** (1.0 / p) * vals
    return LambdaTable(float(alpha), float(p), vals)
