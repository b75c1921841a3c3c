"""Vector fields on the torus, the Mane action, and RK4 integration."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BadDelta, DimensionMismatch, NoReturn, NotCoprime, StepTooLarge
from .fourier import FourierSeries
from .measures import wrap

MAX_DT = 1e-2
MAX_DELTA = 0.2


class VectorField:
    """A vector field ``V: T^n -> R^n`` evaluated on arrays of shape ``(N, n)``."""

    kind = "generic"
    n: int

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if pts.shape[-1] != self.n:
            raise DimensionMismatch(f"field is {self.n}-d, points are {pts.shape[-1]}-d")
        out = self._eval(pts)
        return out[0] if single else out

    def _eval(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def is_constant(self) -> bool:
        return False


class ConstantField(VectorField):
    kind = "constant"

    def __init__(self, omega):
        self.omega = np.asarray(getattr(omega, "components", omega), dtype=np.float64).ravel()
        self.n = self.omega.size

    def _eval(self, pts):
        return np.broadcast_to(self.omega, pts.shape).copy()

    @property
    def is_constant(self) -> bool:
        return True


class RationalConstantField(ConstantField):
    """The constant field (1, p/q) on T^2."""

    kind = "rational-constant"

    def __init__(self, p: int, q: int):
        if q < 1:
            raise ValueError("q must be positive")
        if math.gcd(p, q) != 1:
            raise NotCoprime(f"gcd({p}, {q}) != 1")
        self.p, self.q = int(p), int(q)
        super().__init__([1.0, p / q])


class AttractingField(VectorField):
    """``(1, p/q + delta * g)`` with ``g = -sin(2 pi s)`` and strip coordinate ``s = q y - p x``.

    ``g`` vanishes on the lines ``s = 0`` and midlines ``s = 1/2``; it is
    negative just above each line and positive just below the next one, so
    every line attracts at transverse rate ``2 pi q delta``.
    """

    kind = "attracting"

    def __init__(self, p: int, q: int, delta: float):
        if q < 1:
            raise ValueError("q must be positive")
        if math.gcd(p, q) != 1:
            raise NotCoprime(f"gcd({p}, {q}) != 1")
        if not 0.0 <= delta <= MAX_DELTA:
            raise BadDelta(f"delta must lie in [0, {MAX_DELTA}], got {delta}")
        self.p, self.q, self.delta = int(p), int(q), float(delta)
        self.n = 2

    def strip(self, pts) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return self.q * pts[..., 1] - self.p * pts[..., 0]

    def g(self, pts) -> np.ndarray:
        return -np.sin(2.0 * np.pi * self.strip(pts))

    def _eval(self, pts):
        out = np.empty_like(pts)
        out[..., 0] = 1.0
        out[..., 1] = self.p / self.q + self.delta * self.g(pts)
        return out

    @property
    def transverse_rate(self) -> float:
        return -2.0 * np.pi * self.q * self.delta

    def exact_flow(self, x0, t) -> np.ndarray:
        """Closed-form lifted flow: ``tan(pi s)`` decays like ``exp(-2 pi q delta t)``."""
        x0 = np.atleast_2d(np.asarray(x0, dtype=np.float64))
        t = np.asarray(t, dtype=np.float64)
        s0 = self.strip(x0)
        base = np.rint(s0)
        r0 = s0 - base  # representative in [-1/2, 1/2]
        with np.errstate(over="ignore"):
            u0 = np.tan(np.pi * r0)
        decay = np.exp(-2.0 * np.pi * self.q * self.delta * t)
        r = np.where(np.abs(r0) == 0.5, r0, np.arctan(u0 * decay) / np.pi)
        x = x0[:, 0] + t
        y = x0[:, 1] + (self.p * t + (r - r0)) / self.q
        return np.stack([x, y], axis=-1)


class FourierField(VectorField):
    """Field whose components are real band-limited Fourier series."""

    kind = "fourier"

    def __init__(self, components: Sequence[FourierSeries]):
        comps = list(components)
        n = comps[0].n
        if len(comps) != n or any(c.n != n for c in comps):
            raise DimensionMismatch("need one n-dimensional series per component")
        if not all(c.is_hermitian() for c in comps):
            raise ValueError("field components must be real (Hermitian coefficients)")
        self.components = comps
        self.n = n

    @classmethod
    def perturbed(cls, omega, scale: float, perturbation: Sequence[FourierSeries]) -> "FourierField":
        """``omega + scale * W(x)``."""
        w = np.asarray(getattr(omega, "components", omega), dtype=np.float64)
        return cls([scale * c + float(wj) for c, wj in zip(perturbation, w)])

    def _eval(self, pts):
        flat = pts.reshape(-1, self.n)
        out = np.stack([c.evaluate(flat) for c in self.components], axis=-1)
        return out.reshape(pts.shape)

    @property
    def is_constant(self) -> bool:
        return all(np.count_nonzero(c.coeffs) == (c.mean != 0) for c in self.components)


def attracting_field(p: int, q: int, delta: float) -> AttractingField:
    return AttractingField(p, q, delta)


def mane_action(x, v, V: VectorField) -> np.ndarray | float:
    """``0.5 * |v - V(x)|^2``."""
    x = np.asarray(x, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if x.shape[-1] != v.shape[-1]:
        raise DimensionMismatch("position and velocity dimensions differ")
    out = 0.5 * np.sum((v - V(x)) ** 2, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


@dataclass
class Trajectory:
    """Uniformly sampled solution; points are ``(S, n)`` or batched ``(S, B, n)``."""

    times: np.ndarray
    points: np.ndarray
    velocities: np.ndarray | None = None

    def __post_init__(self):
        if len(self.times) != len(self.points):
            raise DimensionMismatch("times and points differ in length")
        if self.velocities is not None and len(self.velocities) != len(self.points):
            raise DimensionMismatch("velocities and points differ in length")

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    @property
    def endpoint(self) -> np.ndarray:
        return self.points[-1]

    def to_csv(self, path) -> None:
        pts = np.asarray(self.points)
        batched = pts.ndim == 3
        n = pts.shape[-1]
        header = (["traj"] if batched else []) + ["t"] + [f"x{i + 1}" for i in range(n)]
        if self.velocities is not None:
            header += [f"v{i + 1}" for i in range(n)]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for b in range(pts.shape[1] if batched else 1):
                for i, t in enumerate(self.times):
                    p = pts[i, b] if batched else pts[i]
                    row = ([b] if batched else []) + [repr(float(t))] + [repr(float(c)) for c in p]
                    if self.velocities is not None:
                        v = self.velocities[i, b] if batched else self.velocities[i]
                        row += [repr(float(c)) for c in v]
                    w.writerow(row)


def rk4_step(V: VectorField, x: np.ndarray, h: float) -> np.ndarray:
    k1 = V._eval(x)
    k2 = V._eval(x + 0.5 * h * k1)
    k3 = V._eval(x + 0.5 * h * k2)
    k4 = V._eval(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(
    V: VectorField,
    x0,
    T: float,
    dt: float = 1e-3,
    record_every: int = 1,
    wrap_coords: bool = True,
    method: str = "auto",
) -> Trajectory:
    """Integrate ``x' = V(x)`` from ``x0`` (one point or a batch) over ``[0, T]``.

    Classical RK4 with coordinates reduced mod 1 after each step. The step is
    shrunk to ``T / nsteps`` so samples are uniform in time. With
    ``method="auto"`` a constant field is advanced in closed form.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    if not 0 < dt <= MAX_DT:
        raise StepTooLarge(f"dt must lie in (0, {MAX_DT}], got {dt}")
    x = np.asarray(x0, dtype=np.float64)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[-1] != V.n:
        raise DimensionMismatch(f"initial point is {x.shape[-1]}-d, field is {V.n}-d")
    nsteps = math.ceil(T / dt - 1e-9)
    nsteps = record_every * math.ceil(nsteps / record_every)
    h = T / nsteps
    nrec = nsteps // record_every + 1
    times = np.arange(nrec) * (h * record_every)

    if method == "auto" and V.is_constant:
        omega = V._eval(x[:1])[0]
        pts = x[None, :, :] + times[:, None, None] * omega
        if wrap_coords:
            pts = wrap(pts)
    elif method in ("auto", "rk4"):
        pts = np.empty((nrec,) + x.shape)
        pts[0] = wrap(x) if wrap_coords else x
        cur = pts[0].copy()
        for step in range(1, nsteps + 1):
            cur = rk4_step(V, cur, h)
            if wrap_coords:
                cur = wrap(cur)
            if step % record_every == 0:
                pts[step // record_every] = cur
    else:
        raise ValueError(f"unknown method {method!r}")

    vel = V._eval(pts.reshape(-1, V.n)).reshape(pts.shape)
    if single:
        pts, vel = pts[:, 0], vel[:, 0]
    return Trajectory(times, pts, vel)


def poincare_map(V: VectorField, y0: float, dt: float = 1e-3, t_max: float = 1e3, tol: float = 1e-10) -> float:
    """First-return map of the section ``{x = 0}`` on T^2, as a map of the y coordinate."""
    if V.n != 2:
        raise DimensionMismatch("Poincare sections are defined on T^2")
    if isinstance(V, RationalConstantField):
        return float(wrap(y0 + V.p / V.q))
    if V.is_constant:
        w = V._eval(np.zeros((1, 2)))[0]
        if w[0] <= 0:
            raise NoReturn("field does not cross the section")
        return float(wrap(y0 + w[1] / w[0]))

    state = np.array([[0.0, float(y0)]])
    t = 0.0
    while True:
        nxt = rk4_step(V, state, dt)
        t += dt
        if nxt[0, 0] >= 1.0:
            break
        if t > t_max:
            raise NoReturn(f"no return to the section within T_max = {t_max}")
        state = nxt
    lo, hi = 0.0, dt
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if rk4_step(V, state, mid)[0, 0] >= 1.0:
            hi = mid
        else:
            lo = mid
    return float(wrap(rk4_step(V, state, 0.5 * (lo + hi))[0, 1]))
