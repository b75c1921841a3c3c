"""Birkhoff averages along torus flows and fits of their decay rate."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BadCase, Degenerate
from .fourier import FourierSeries, dft_forward, grid_points

MIN_ERROR = 1e-14
MAX_BAND = 32
_CHUNK = 1 << 16


@dataclass
class RateCurve:
    """Horizons ``T`` and Birkhoff errors ``|<F>_T - int F|``."""

    T: np.ndarray
    errors: np.ndarray

    def __post_init__(self):
        self.T = np.asarray(self.T, dtype=np.float64)
        self.errors = np.asarray(self.errors, dtype=np.float64)
        if self.T.shape != self.errors.shape:
            raise ValueError("horizons and errors differ in length")
        if np.any(np.diff(self.T) <= 0) or np.any(self.T <= 0):
            raise ValueError("horizons must be positive and strictly increasing")
        if np.any(self.errors < 0):
            raise ValueError("errors must be nonnegative")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["T", "error"])
            for t, e in zip(self.T, self.errors):
                w.writerow([repr(float(t)), repr(float(e))])


@dataclass
class RateFit:
    beta_hat: float
    log_intercept: float
    r_squared: float
    n_used: int

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _frequency(omega) -> np.ndarray:
    return np.asarray(getattr(omega, "components", omega), dtype=np.float64).ravel()


def _max_rate(F, w: np.ndarray) -> float | None:
    """Largest angular frequency ``2 pi |<k, omega>|`` of a band-limited F."""
    if not isinstance(F, FourierSeries):
        return None
    ks = F.modes()[np.flatnonzero(F.coeffs.ravel())]
    if len(ks) == 0:
        return 0.0
    return float(2.0 * np.pi * np.abs(ks @ w).max())


def simpson_step(F, omega) -> float:
    """Quadrature step: ``1e-3 * max(1, 1/|omega|)``, refined for fast modes."""
    w = _frequency(omega)
    h = 1e-3 * max(1.0, 1.0 / float(np.linalg.norm(w)))
    lam = _max_rate(F, w)
    if lam:
        h = min(h, 0.02 / lam)
    return h


def birkhoff_avg_linear(F: Callable, omega, x0, T: float, t0: float = 0.0, step: float | None = None) -> float:
    """``(1/T) int_{t0}^{t0+T} F(x0 + omega t) dt`` by composite Simpson.

    ``F`` maps an ``(N, n)`` array of points to ``N`` values.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    w = _frequency(omega)
    x0 = np.asarray(x0, dtype=np.float64).ravel()
    h = simpson_step(F, w) if step is None else step
    m = math.ceil(T / h)
    m += m % 2  # Simpson needs an even number of panels
    h = T / m
    total = 0.0
    # fixed chunk order keeps the sum reproducible
    for s in range(0, m + 1, _CHUNK):
        j = np.arange(s, min(s + _CHUNK, m + 1))
        pts = x0 + np.outer(t0 + j * h, w)
        vals = np.asarray(F(np.mod(pts, 1.0)), dtype=np.float64)
        wts = np.where(j % 2 == 1, 4.0, 2.0)
        wts[(j == 0) | (j == m)] = 1.0
        total += float(np.dot(wts, vals))
    return total * h / 3.0 / T


def birkhoff_avg_exact(F: FourierSeries, omega, x0, T: float, t0: float = 0.0) -> float:
    """Closed-form average of a trigonometric polynomial along a linear flow."""
    w = _frequency(omega)
    x0 = np.asarray(x0, dtype=np.float64).ravel()
    ks = F.modes().astype(np.float64)
    c = F.coeffs.ravel()
    nz = np.flatnonzero(c)
    ks, c = ks[nz], c[nz]
    a = 2.0 * np.pi * (ks @ w)
    phase = np.exp(2j * np.pi * (ks @ x0))
    factor = np.empty(len(a), dtype=np.complex128)
    zero = np.abs(a) < 1e-300
    factor[zero] = 1.0
    az = a[~zero]
    factor[~zero] = np.exp(1j * az * t0) * (np.exp(1j * az * T) - 1.0) / (1j * az * T)
    out = np.sum(c * phase * factor)
    return float(out.real) if F.real else out


def birkhoff_avg_trajectory(F: Callable, traj) -> float:
    """Time average of ``F`` along a uniformly sampled trajectory (Simpson/trapezoid)."""
    vals = np.asarray(F(np.asarray(traj.points).reshape(-1, traj.points.shape[-1])), dtype=np.float64)
    vals = vals.reshape(np.asarray(traj.points).shape[:-1])
    m = len(traj.times) - 1
    if m < 1:
        raise ValueError("need at least two samples")
    h = (traj.times[-1] - traj.times[0]) / m
    if m % 2 == 0:
        wts = np.where(np.arange(m + 1) % 2 == 1, 4.0, 2.0)
        wts[[0, -1]] = 1.0
        wts = wts * h / 3.0
    else:
        wts = np.full(m + 1, h)
        wts[[0, -1]] = h / 2
    avg = np.tensordot(wts, vals, axes=(0, 0)) / (m * h)
    return float(np.mean(avg))


def space_average(F, band: int | None = None, n: int | None = None) -> float:
    """``int_{T^n} F`` by the (2K+2)-point rectangle rule, exact for band ``K``."""
    if isinstance(F, FourierSeries):
        band, n = F.K, F.n
    if band is None or n is None:
        raise ValueError("band and dimension are required for a generic observable")
    if band > MAX_BAND:
        raise ValueError(f"band {band} exceeds {MAX_BAND}")
    N = 2 * band + 2
    vals = np.asarray(F(grid_points(N, n)), dtype=np.float64).reshape((N,) * n)
    return float(dft_forward(vals, K=band, real=True).mean.real)


def birkhoff_rate_curve(F: Callable, omega, x0, T_grid: Sequence[float], band: int | None = None) -> RateCurve:
    n = _frequency(omega).size
    mean = space_average(F, band, n)
    T = np.asarray(sorted(T_grid), dtype=np.float64)
    errs = [abs(birkhoff_avg_linear(F, omega, x0, t) - mean) for t in T]
    return RateCurve(T, np.asarray(errs))


def log_spaced(lo: float, hi: float, count: int) -> np.ndarray:
    return np.geomspace(lo, hi, count)


def fit_power_law(x, y) -> tuple[float, float, float]:
    """Least squares ``log y = a + b log x``; returns ``(b, a, r^2)``."""
    lx, ly = np.log(np.asarray(x, dtype=np.float64)), np.log(np.asarray(y, dtype=np.float64))
    X = np.column_stack([np.ones_like(lx), lx])
    (a, b), *_ = np.linalg.lstsq(X, ly, rcond=None)
    resid = ly - (a + b * lx)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return float(b), float(a), r2


def fit_decay(curve: RateCurve) -> RateFit:
    """Fit ``e(T) ~ C T^-beta``; points with ``e <= 1e-14`` are dropped."""
    keep = curve.errors > MIN_ERROR
    if keep.sum() < 3:
        raise Degenerate(f"only {int(keep.sum())} usable points (need 3)")
    slope, intercept, r2 = fit_power_law(curve.T[keep], curve.errors[keep])
    return RateFit(-slope, intercept, r2, int(keep.sum()))


def lemma31_exponent(case: str, alpha: float = 1.0, tau: float = 1.0, n: int = 2, eps: float = 0.0) -> float:
    """Predicted Birkhoff decay exponent for a Holder-``alpha`` observable.

    ``diophantine``: ``alpha / (tau + n)``; ``algebraic``: ``alpha / (alpha + n - 1 + eps)``
    for algebraic frequencies; ``tau1``: ``alpha / (alpha + 1)``.
    """
    if not 0 < alpha <= 1:
        raise BadCase(f"Holder exponent must lie in (0, 1], got {alpha}")
    if case == "diophantine":
        if n < 2 or tau < n - 1:
            raise BadCase(f"need n >= 2 and tau >= n - 1, got n={n}, tau={tau}")
        return alpha / (tau + n)
    if case == "algebraic":
        if n < 2 or eps < 0:
            raise BadCase(f"need n >= 2 and eps >= 0, got n={n}, eps={eps}")
        return alpha / (alpha + n - 1 + eps)
    if case == "tau1":
        return alpha / (alpha + 1)
    raise BadCase(f"unknown case {case!r}")


def upper_holder_exponent(alpha: float = 1.0, tau: float = 1.0, n: int = 2) -> float:
    """Exponent ``alpha / (alpha + tau + n)`` of the W1 upper bound in the perturbation size."""
    return alpha / (alpha + tau + n)
