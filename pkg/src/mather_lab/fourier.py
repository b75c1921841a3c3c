"""Band-limited Fourier series on the torus R^n / Z^n.

Convention: ``F(x) = sum_k c_k exp(2 pi i <k, x>)`` for ``k`` in ``[-K, K]^n``.
Coefficients are stored densely in an array of shape ``(2K+1,)*n`` with
``c[k + K]`` holding mode ``k``.
"""

from __future__ import annotations

import json
from typing import Iterable, Mapping

import numpy as np

from .errors import Aliasing, DimensionMismatch

TWO_PI = 2.0 * np.pi


class FourierSeries:
    def __init__(self, coeffs, real: bool | None = None):
        c = np.asarray(coeffs, dtype=np.complex128)
        if c.ndim == 0 or any(s != c.shape[0] for s in c.shape) or c.shape[0] % 2 != 1:
            raise DimensionMismatch(f"coefficient array must be (2K+1,)*n, got {c.shape}")
        self.coeffs = c
        self.real = self.is_hermitian() if real is None else bool(real)

    # -- construction -------------------------------------------------
    @classmethod
    def zeros(cls, n: int, K: int, real: bool = True) -> "FourierSeries":
        return cls(np.zeros((2 * K + 1,) * n, dtype=np.complex128), real)

    @classmethod
    def from_modes(cls, modes: Mapping[tuple, complex], n: int, K: int | None = None, real=None):
        if K is None:
            K = max((max(abs(v) for v in k) for k in modes), default=0)
        c = np.zeros((2 * K + 1,) * n, dtype=np.complex128)
        for k, val in modes.items():
            if len(k) != n:
                raise DimensionMismatch(f"mode {k} is not {n}-dimensional")
            if max(abs(v) for v in k) > K:
                raise Aliasing(f"mode {k} exceeds band {K}")
            c[tuple(np.asarray(k) + K)] += val
        return cls(c, real)

    @classmethod
    def cosine(cls, k, amplitude: float = 1.0, K: int | None = None) -> "FourierSeries":
        """``amplitude * cos(2 pi <k, x>)``."""
        k = tuple(int(v) for v in k)
        neg = tuple(-v for v in k)
        if k == neg:
            return cls.from_modes({k: amplitude}, len(k), K, real=True)
        return cls.from_modes({k: amplitude / 2, neg: amplitude / 2}, len(k), K, real=True)

    @classmethod
    def sine(cls, k, amplitude: float = 1.0, K: int | None = None) -> "FourierSeries":
        """``amplitude * sin(2 pi <k, x>)``."""
        k = tuple(int(v) for v in k)
        neg = tuple(-v for v in k)
        return cls.from_modes({k: amplitude / 2j, neg: -amplitude / 2j}, len(k), K, real=True)

    @classmethod
    def constant(cls, value: float, n: int, K: int = 0) -> "FourierSeries":
        return cls.from_modes({(0,) * n: value}, n, K, real=True)

    @classmethod
    def random_real(cls, n: int, K: int, rng: np.random.Generator, decay: float = 0.0) -> "FourierSeries":
        """Random Hermitian series; mode ``k`` scaled by ``(1+|k|)^-decay``."""
        shape = (2 * K + 1,) * n
        c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        if decay:
            grids = np.meshgrid(*([np.arange(-K, K + 1)] * n), indexing="ij")
            norm = np.sqrt(sum(g.astype(float) ** 2 for g in grids))
            c = c * (1.0 + norm) ** (-decay)
        c = 0.5 * (c + np.conj(_flip(c)))
        return cls(c, real=True)

    # -- structure ----------------------------------------------------
    @property
    def n(self) -> int:
        return self.coeffs.ndim

    @property
    def K(self) -> int:
        return (self.coeffs.shape[0] - 1) // 2

    def modes(self) -> np.ndarray:
        """All wave vectors of the band, shape ``((2K+1)^n, n)`` in storage order."""
        axis = np.arange(-self.K, self.K + 1)
        mesh = np.meshgrid(*([axis] * self.n), indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=-1)

    def coefficient(self, k) -> complex:
        k = np.asarray(k)
        if np.abs(k).max(initial=0) > self.K:
            return 0j
        return complex(self.coeffs[tuple(k + self.K)])

    @property
    def mean(self) -> complex:
        return complex(self.coeffs[(self.K,) * self.n])

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        scale = max(1.0, float(np.abs(self.coeffs).max(initial=0.0)))
        return bool(np.abs(self.coeffs - np.conj(_flip(self.coeffs))).max(initial=0.0) <= tol * scale)

    def with_band(self, K: int) -> "FourierSeries":
        """Zero-pad (or truncate) to band ``K``."""
        c = np.zeros((2 * K + 1,) * self.n, dtype=np.complex128)
        m = min(K, self.K)
        src = tuple(slice(self.K - m, self.K + m + 1) for _ in range(self.n))
        dst = tuple(slice(K - m, K + m + 1) for _ in range(self.n))
        c[dst] = self.coeffs[src]
        return FourierSeries(c, self.real)

    # -- algebra ------------------------------------------------------
    def _aligned(self, other: "FourierSeries"):
        if other.n != self.n:
            raise DimensionMismatch("series dimensions differ")
        K = max(self.K, other.K)
        return self.with_band(K).coeffs, other.with_band(K).coeffs

    def __add__(self, other):
        if np.isscalar(other):
            out = self.coeffs.copy()
            out[(self.K,) * self.n] += other
            return FourierSeries(out, self.real and np.isrealobj(other))
        a, b = self._aligned(other)
        return FourierSeries(a + b, self.real and other.real)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return FourierSeries(self.coeffs * scalar, self.real and np.isrealobj(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return (-1.0) * self

    def derivative(self, axis: int) -> "FourierSeries":
        k = np.arange(-self.K, self.K + 1)
        shape = [1] * self.n
        shape[axis] = -1
        return FourierSeries(self.coeffs * (1j * TWO_PI) * k.reshape(shape), self.real)

    def gradient(self) -> list["FourierSeries"]:
        return [self.derivative(j) for j in range(self.n)]

    def directional(self, omega) -> "FourierSeries":
        """``<omega, grad F>``."""
        return FourierSeries(self.coeffs * (1j * TWO_PI) * self.divisors(omega), self.real)

    def divisors(self, omega) -> np.ndarray:
        """``<k, omega>`` for every stored mode, shaped like ``coeffs``."""
        w = np.asarray(getattr(omega, "components", omega), dtype=np.float64)
        if w.size != self.n:
            raise DimensionMismatch(f"frequency has {w.size} components, series is {self.n}-d")
        axis = np.arange(-self.K, self.K + 1, dtype=np.float64)
        mesh = np.meshgrid(*([axis] * self.n), indexing="ij")
        return sum(wj * g for wj, g in zip(w, mesh))

    # -- evaluation ---------------------------------------------------
    def __call__(self, points) -> np.ndarray:
        return self.evaluate(points)

    def evaluate(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if pts.shape[1] != self.n:
            raise DimensionMismatch(f"points are {pts.shape[1]}-d, series is {self.n}-d")
        ks, c, c0 = self._eval_plan()
        if ks.shape[0] == 0:
            out = np.full(pts.shape[0], c0.real if self.real else c0)
        elif self.real:
            # pair k with -k: c_k e^{i t} + conj(c_k) e^{-i t} = 2 Re(c_k e^{i t})
            theta = TWO_PI * (pts @ ks.T)
            out = c0.real + np.cos(theta) @ (2 * c.real) - np.sin(theta) @ (2 * c.imag)
        else:
            out = np.exp((1j * TWO_PI) * (pts @ ks.T)) @ c + c0
        return out[0] if single else out

    def _eval_plan(self):
        """Nonzero modes used by ``evaluate`` (half of them for real series)."""
        key = (self.real, self.coeffs.ctypes.data, self.coeffs.tobytes())
        cached = getattr(self, "_plan", None)
        if cached is not None and cached[0] == key:
            return cached[1]
        flat = self.coeffs.ravel()
        modes = self.modes()
        centre = flat.size // 2
        keep = flat != 0
        keep[centre] = False
        if self.real:
            # first nonzero component positive picks one of each +-k pair
            first = np.array([m[np.flatnonzero(m)[0]] if m.any() else 0 for m in modes])
            keep &= first > 0
        plan = (modes[keep].astype(np.float64), flat[keep], complex(flat[centre]))
        self._plan = (key, plan)
        return plan

    def to_grid(self, N: int) -> np.ndarray:
        return dft_inverse(self, N)

    def sup_norm_bound(self) -> float:
        """Sum of |c_k|, an upper bound for sup |F|."""
        return float(np.abs(self.coeffs).sum())

    # -- serialization ------------------------------------------------
    def to_dict(self) -> dict:
        flat = self.coeffs.ravel()
        entries = [
            {"k": [int(v) for v in k], "re": float(c.real), "im": float(c.imag)}
            for k, c in zip(self.modes(), flat)
            if c != 0
        ]
        return {"n": self.n, "K": self.K, "entries": entries}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, obj: Mapping) -> "FourierSeries":
        modes = {tuple(e["k"]): complex(e["re"], e["im"]) for e in obj["entries"]}
        return cls.from_modes(modes, int(obj["n"]), int(obj["K"]))

    @classmethod
    def from_json(cls, text: str) -> "FourierSeries":
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        return f"FourierSeries(n={self.n}, K={self.K}, nonzero={int(np.count_nonzero(self.coeffs))})"


def _flip(c: np.ndarray) -> np.ndarray:
    return c[(slice(None, None, -1),) * c.ndim]


def _band_index(K: int, N: int) -> np.ndarray:
    return np.arange(-K, K + 1) % N


def dft_forward(samples, K: int | None = None, real: bool | None = None) -> FourierSeries:
    """Coefficients of the trigonometric interpolant of samples on the grid ``j/N``."""
    s = np.asarray(samples)
    N = s.shape[0]
    if any(d != N for d in s.shape):
        raise DimensionMismatch(f"samples must be on a cubic grid, got {s.shape}")
    if K is None:
        K = (N - 1) // 2
    if N < 2 * K + 1:
        raise Aliasing(f"grid N={N} cannot resolve band K={K} (need N >= {2 * K + 1})")
    c = np.fft.fftn(s) / N**s.ndim
    idx = _band_index(K, N)
    c = c[np.ix_(*([idx] * s.ndim))]
    if real is None:
        real = np.isrealobj(s)
    return FourierSeries(c, real)


def dft_inverse(series: FourierSeries, N: int) -> np.ndarray:
    """Samples of ``series`` on the grid ``j/N`` (``j = 0..N-1`` per axis)."""
    K, n = series.K, series.n
    if N < 2 * K + 1:
        raise Aliasing(f"grid N={N} cannot resolve band K={K} (need N >= {2 * K + 1})")
    full = np.zeros((N,) * n, dtype=np.complex128)
    idx = _band_index(K, N)
    full[np.ix_(*([idx] * n))] = series.coeffs
    out = np.fft.ifftn(full) * N**n
    return out.real if series.real else out


def grid_points(N: int, n: int) -> np.ndarray:
    """Grid ``j/N`` flattened to shape ``(N^n, n)`` in C order (matches dft arrays)."""
    axis = np.arange(N) / N
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=-1)


def vector_evaluate(components: Iterable[FourierSeries], points) -> np.ndarray:
    """Evaluate a vector field given as one series per component."""
    return np.stack([c.evaluate(points) for c in components], axis=-1)
