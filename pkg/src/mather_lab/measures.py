"""Torus geometry and the measures the experiments transport between.

Points are numpy arrays of shape ``(N, n)`` reduced into ``[0, 1)^n``. A
measure on the tangent bundle carries a velocity array alongside; its
ground metric is ``sqrt(d_torus(x, y)**2 + |u - v|**2)``.
"""

from __future__ import annotations

import io
import json
import math
import struct
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, EmptyWindow, NotCoprime

BASE = "base-torus"
TANGENT = "tangent-bundle"
WEIGHT_TOL = 1e-12


def wrap(x) -> np.ndarray:
    """Reduce coordinates mod 1 into [0, 1)."""
    y = np.mod(np.asarray(x, dtype=np.float64), 1.0)
    # np.mod maps tiny negatives to exactly 1.0
    return np.where(y >= 1.0, 0.0, y)


def _wrapped_delta(x, y) -> np.ndarray:
    d = np.abs(np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64)) % 1.0
    return np.minimum(d, 1.0 - d)


def torus_distance(x, y) -> np.ndarray | float:
    """Flat-torus distance ``min_z |x - y + z|``; broadcasts over leading axes."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape[-1] != y.shape[-1]:
        raise DimensionMismatch(f"dimensions {x.shape[-1]} and {y.shape[-1]} differ")
    out = np.sqrt(np.sum(_wrapped_delta(x, y) ** 2, axis=-1))
    return float(out) if out.ndim == 0 else out


def torus_cost(X, Y, U=None, V=None) -> np.ndarray:
    """Pairwise cost matrix between point sets (optionally lifted with velocities)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    if X.shape[1] != Y.shape[1]:
        raise DimensionMismatch(f"dimensions {X.shape[1]} and {Y.shape[1]} differ")
    sq = np.zeros((X.shape[0], Y.shape[0]))
    # coordinate loop keeps memory at one (N, M) block
    for j in range(X.shape[1]):
        d = np.abs(X[:, j, None] - Y[None, :, j]) % 1.0
        d = np.minimum(d, 1.0 - d)
        sq += d * d
    if U is not None or V is not None:
        if U is None or V is None:
            raise DimensionMismatch("both measures need velocities for the lifted metric")
        U = np.atleast_2d(U)
        V = np.atleast_2d(V)
        for j in range(U.shape[1]):
            d = U[:, j, None] - V[None, :, j]
            sq += d * d
    return np.sqrt(sq)


@dataclass(frozen=True)
class DiscreteMeasure:
    """Weighted point cloud on the torus or on its tangent bundle."""

    points: np.ndarray
    weights: np.ndarray
    velocities: np.ndarray | None = None

    def __post_init__(self):
        pts = wrap(np.atleast_2d(self.points))
        w = np.asarray(self.weights, dtype=np.float64).ravel()
        if pts.shape[0] != w.size:
            raise DimensionMismatch(f"{pts.shape[0]} supports but {w.size} weights")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights sum to {w.sum()!r}, expected 1")
        vel = self.velocities
        if vel is not None:
            vel = np.atleast_2d(np.asarray(vel, dtype=np.float64))
            if vel.shape != pts.shape:
                raise DimensionMismatch("velocities must match points in shape")
            vel.setflags(write=False)
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "velocities", vel)

    @classmethod
    def uniform(cls, points, velocities=None) -> "DiscreteMeasure":
        pts = np.atleast_2d(points)
        return cls(pts, np.full(pts.shape[0], 1.0 / pts.shape[0]), velocities)

    @classmethod
    def dirac(cls, point, velocity=None) -> "DiscreteMeasure":
        vel = None if velocity is None else np.atleast_2d(velocity)
        return cls(np.atleast_2d(point), np.ones(1), vel)

    @property
    def space_tag(self) -> str:
        return BASE if self.velocities is None else TANGENT

    @property
    def n(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def integrate(self, func: Callable) -> float:
        """Integral of ``func(points)`` (or ``func(points, velocities)`` on TTn)."""
        vals = func(self.points) if self.velocities is None else func(self.points, self.velocities)
        return float(np.dot(self.weights, np.asarray(vals, dtype=np.float64)))

    def project(self) -> "DiscreteMeasure":
        return DiscreteMeasure(self.points, self.weights)

    def to_json(self) -> str:
        rows = self.points if self.velocities is None else np.hstack([self.points, self.velocities])
        return json.dumps(
            {"space_tag": self.space_tag, "n": self.n, "points": rows.tolist(), "weights": self.weights.tolist()}
        )

    @classmethod
    def from_json(cls, text: str) -> "DiscreteMeasure":
        obj = json.loads(text)
        rows = np.asarray(obj["points"], dtype=np.float64)
        n = int(obj.get("n", rows.shape[1] if obj["space_tag"] == BASE else rows.shape[1] // 2))
        if obj["space_tag"] == TANGENT:
            return cls(rows[:, :n], obj["weights"], rows[:, n:])
        return cls(rows, obj["weights"])

    def to_binary(self) -> bytes:
        """Little-endian column format: header ``<4sIIQ`` (magic, n, tag, count)."""
        tag = 0 if self.velocities is None else 1
        buf = io.BytesIO()
        buf.write(struct.pack("<4sIIQ", b"MLM1", self.n, tag, len(self)))
        cols = [self.points[:, j] for j in range(self.n)]
        if tag:
            cols += [self.velocities[:, j] for j in range(self.n)]
        for col in cols + [self.weights]:
            buf.write(np.ascontiguousarray(col, dtype="<f8").tobytes())
        return buf.getvalue()

    @classmethod
    def from_binary(cls, blob: bytes) -> "DiscreteMeasure":
        head = struct.calcsize("<4sIIQ")
        magic, n, tag, count = struct.unpack("<4sIIQ", blob[:head])
        if magic != b"MLM1":
            raise ValueError("not a measure file")
        ncol = n * (2 if tag else 1) + 1
        data = np.frombuffer(blob[head:], dtype="<f8", count=ncol * count).reshape(ncol, count)
        pts = data[:n].T.copy()
        vel = data[n : 2 * n].T.copy() if tag else None
        return cls(pts, data[-1].copy(), vel)


def pushforward(mu: DiscreteMeasure, T: Callable) -> DiscreteMeasure:
    """Image of ``mu`` under ``T``; weights are carried over unchanged.

    ``T`` receives the support array (and velocities, on the tangent bundle)
    and returns the mapped points, or a ``(points, velocities)`` pair.
    """
    out = T(mu.points) if mu.velocities is None else T(mu.points, mu.velocities)
    if isinstance(out, tuple):
        pts, vel = out
    else:
        pts, vel = out, None
    return DiscreteMeasure(pts, mu.weights, vel)


class GridDensity:
    """Piecewise-constant density: cell masses on a uniform grid of [0,1)^n."""

    def __init__(self, masses):
        m = np.asarray(masses, dtype=np.float64)
        if np.any(m < 0):
            raise ValueError("cell masses must be nonnegative")
        if abs(m.sum() - 1.0) > 1e-9:
            raise ValueError(f"cell masses sum to {m.sum()!r}")
        self.masses = m / m.sum()
        self.masses.setflags(write=False)

    @classmethod
    def uniform(cls, resolution: int, n: int = 2) -> "GridDensity":
        return cls(np.full((resolution,) * n, 1.0 / resolution**n))

    @classmethod
    def from_points(cls, points, weights=None, resolution: int = 32) -> "GridDensity":
        """Bin a weighted point cloud onto the grid (mass conserving)."""
        pts = wrap(np.atleast_2d(points))
        n = pts.shape[1]
        idx = np.minimum((pts * resolution).astype(np.int64), resolution - 1)
        flat = np.ravel_multi_index(tuple(idx.T), (resolution,) * n)
        w = np.full(pts.shape[0], 1.0 / pts.shape[0]) if weights is None else np.asarray(weights)
        counts = np.bincount(flat, weights=w, minlength=resolution**n)
        return cls(counts.reshape((resolution,) * n))

    @property
    def resolution(self) -> int:
        return self.masses.shape[0]

    @property
    def n(self) -> int:
        return self.masses.ndim

    def cell_centers(self) -> np.ndarray:
        axis = (np.arange(self.resolution) + 0.5) / self.resolution
        mesh = np.meshgrid(*([axis] * self.n), indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=-1)

    def integrate(self, func: Callable) -> float:
        """Midpoint-rule integral of ``func`` against the density."""
        return float(np.dot(self.masses.ravel(), func(self.cell_centers())))

    def to_discrete(self, drop_empty: bool = True) -> DiscreteMeasure:
        pts = self.cell_centers()
        w = self.masses.ravel()
        if drop_empty:
            keep = w > 0
            pts, w = pts[keep], w[keep]
        return DiscreteMeasure(pts, w / w.sum())


@dataclass(frozen=True)
class LineFamilyMeasure:
    """Uniform measure on the closed geodesic of slope p/q through 0 on T^2.

    In the unit square it is the union of the q lines
    ``y = (p/q) x + i/q mod 1`` with weight 1/q each.
    """

    p: int
    q: int

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("q must be positive")
        if math.gcd(self.p, self.q) != 1:
            raise NotCoprime(f"gcd({self.p}, {self.q}) != 1")

    @property
    def k(self) -> int:
        return self.q

    @property
    def slope(self) -> float:
        return self.p / self.q

    @property
    def gap(self) -> float:
        """Distance between consecutive parallel lines, 1/(q sqrt(1+(p/q)^2))."""
        return 1.0 / (self.q * math.sqrt(1.0 + (self.p / self.q) ** 2))

    @property
    def velocity(self) -> np.ndarray:
        return np.array([1.0, self.p / self.q])

    def sample(self, per_line: int = 64, offset: float = 0.5) -> DiscreteMeasure:
        """Equal-arc-length stratified samples, ``per_line`` on each line."""
        x = (np.arange(per_line) + offset) / per_line
        i = np.arange(self.q)
        X = np.tile(x, self.q)
        Y = (self.p / self.q) * X + np.repeat(i, per_line) / self.q
        return DiscreteMeasure.uniform(np.column_stack([X, Y]))

    def integrate(self, func: Callable, per_line: int = 4096) -> float:
        return self.sample(per_line).integrate(func)

    def strip_coordinate(self, points) -> np.ndarray:
        """s = q y - p x mod 1; lines sit at s = 0 and midlines at s = 1/2."""
        pts = np.atleast_2d(points)
        return wrap(self.q * pts[:, 1] - self.p * pts[:, 0])


def line_family(p: int, q: int) -> LineFamilyMeasure:
    return LineFamilyMeasure(int(p), int(q))


def min_dist_to_lines(x, L: LineFamilyMeasure) -> np.ndarray | float:
    """Torus distance from ``x`` to the union of the lines of ``L``.

    Every lift of the orbit is a line ``q y - p x = j`` with j an integer,
    so the distance is ``gap * ||q y - p x||_Z``.
    """
    pts = np.asarray(x, dtype=np.float64)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != 2:
        raise DimensionMismatch("line families live on T^2")
    s = L.q * pts[:, 1] - L.p * pts[:, 0]
    out = L.gap * np.abs(s - np.rint(s))
    return float(out[0]) if single else out


@dataclass(frozen=True)
class GraphLiftMeasure:
    """Lift of a base measure to the graph of a vector field."""

    base: object
    field: object

    def integrate(self, Phi: Callable) -> float:
        return self.base.integrate(lambda x: Phi(x, self.field(x)))

    def to_discrete(self, **kwargs) -> DiscreteMeasure:
        base = self.base
        if isinstance(base, GridDensity):
            base = base.to_discrete()
        elif isinstance(base, LineFamilyMeasure):
            base = base.sample(**kwargs)
        return DiscreteMeasure(base.points, base.weights, self.field(base.points))

    def project(self):
        return self.base


def graph_lift(base, V) -> GraphLiftMeasure:
    return GraphLiftMeasure(base, V)


def empirical_from_trajectory(traj, burn_in: float = 0.0, stride: int = 1) -> DiscreteMeasure:
    """Uniform empirical measure of the samples of ``traj`` with ``t >= burn_in``.

    Batched trajectories (points of shape ``(steps, batch, n)``) are pooled.
    The result lives on the tangent bundle when velocities were recorded.
    """
    keep = np.flatnonzero(np.asarray(traj.times) >= burn_in)[::stride]
    if keep.size == 0 or traj.times[-1] <= burn_in:
        raise EmptyWindow(f"no samples after burn-in {burn_in} (duration {traj.times[-1]})")
    pts = np.asarray(traj.points)[keep]
    n = pts.shape[-1]
    pts = pts.reshape(-1, n)
    vel = None
    if traj.velocities is not None:
        vel = np.asarray(traj.velocities)[keep].reshape(-1, n)
    return DiscreteMeasure.uniform(pts, vel)
