"""First-order perturbation theory of the rotation measure in Fourier space.

For ``H(x, p) = H0(p) + eps f(x)`` with ``grad H0(0) = omega`` and Hessian
``A = D^2 H0(0)``, the first-order corrector ``u1`` solves the cohomological
equation ``<omega, grad u1> = [f] - f``. The invariant graph then carries the
field ``V_eps = omega + eps W`` with ``W = A (grad u1 + c1)``, and the flow
is conjugated to the rotation by ``psi_eps = id + eps psi1`` where
``<omega, grad> psi1 = -W``.

All series use the basis ``exp(2 pi i <k, x>)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, NearResonance, NonzeroMean, SingularHessian
from .flows import FourierField, integrate
from .fourier import FourierSeries, grid_points, vector_evaluate

RESONANCE_TOL = 1e-12
MEAN_TOL = 1e-10


def _omega(omega) -> np.ndarray:
    return np.asarray(getattr(omega, "components", omega), dtype=np.float64).ravel()


def _check_band(series: FourierSeries, w: np.ndarray, tol: float = RESONANCE_TOL) -> np.ndarray:
    div = series.divisors(w)
    mag = np.abs(div)
    mag[(series.K,) * series.n] = np.inf
    worst = np.unravel_index(np.argmin(mag), mag.shape)
    if mag[worst] <= tol:
        k = tuple(int(i) - series.K for i in worst)
        raise NearResonance(f"small divisor <k, omega> = {div[worst]:.3e} at k = {k}", k=k, divisor=float(div[worst]))
    return div


def _invert_directional(series: FourierSeries, w: np.ndarray) -> FourierSeries:
    """Zero-mean solution ``v`` of ``<omega, grad v> = series - mean``."""
    div = _check_band(series, w)
    c = np.zeros_like(series.coeffs)
    centre = (series.K,) * series.n
    nz = np.ones(div.shape, dtype=bool)
    nz[centre] = False
    c[nz] = series.coeffs[nz] / (2j * np.pi * div[nz])
    return FourierSeries(c, series.real)


def solve_cohomological(f: FourierSeries, omega) -> FourierSeries:
    """Zero-mean ``u1`` with ``<omega, grad u1> = [f] - f``: ``u1_k = -f_k / (2 pi i <k, omega>)``."""
    w = _omega(omega)
    if w.size != f.n:
        raise DimensionMismatch(f"frequency has {w.size} components, f is {f.n}-d")
    return -_invert_directional(f, w)


def velocity_correction(u1: FourierSeries, c1, A) -> list[FourierSeries]:
    """``W = A (grad u1 + c1)``, one series per component."""
    A = np.asarray(A, dtype=np.float64)
    c1 = np.asarray(c1, dtype=np.float64).ravel()
    n = u1.n
    if A.shape != (n, n) or c1.size != n:
        raise DimensionMismatch("Hessian and c1 must match the dimension of u1")
    grad = u1.gradient()
    Ac = A @ c1
    out = []
    for j in range(n):
        coeffs = sum(A[j, l] * grad[l].coeffs for l in range(n))
        W = FourierSeries(coeffs, u1.real) + float(Ac[j])
        out.append(W)
    return out


def _check_hessian(A) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise SingularHessian("Hessian must be a square matrix")
    if not np.allclose(A, A.T, atol=1e-12):
        raise SingularHessian("Hessian must be symmetric")
    try:
        np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise SingularHessian("Hessian is not positive definite") from exc
    if np.linalg.cond(A) > 1e12:
        raise SingularHessian("Hessian is numerically singular")
    return A


def solve_c1_quadratic(A, u1: FourierSeries) -> np.ndarray:
    """``c1`` making ``mean(W) = 0``: solves ``A c1 = -mean(A grad u1)``.

    ``grad u1`` has no zero mode, so this is the zero vector; computing it
    keeps the solvability condition of the conjugacy equation explicit.
    """
    A = _check_hessian(A)
    mean_grad = np.array([g.mean.real for g in u1.gradient()])
    return np.linalg.solve(A, -(A @ mean_grad))


def solve_conjugacy(W: Sequence[FourierSeries], omega) -> list[FourierSeries]:
    """Zero-mean ``psi1`` with ``<omega, grad> psi1 = -W`` componentwise."""
    w = _omega(omega)
    for j, comp in enumerate(W):
        if abs(comp.mean) > MEAN_TOL:
            raise NonzeroMean(f"component {j} of W has mean {comp.mean:.3e}")
    return [-_invert_directional(comp, w) for comp in W]


def alpha_expansion(f: FourierSeries, omega, c1) -> float:
    """First-order coefficient ``[f] + <omega, c1>`` of the critical value."""
    return float(f.mean.real + _omega(omega) @ np.asarray(c1, dtype=np.float64).ravel())


@dataclass
class ResponseExpansion:
    u1: FourierSeries
    W: list
    psi1: list
    c1: np.ndarray
    alpha1: float
    A: np.ndarray

    def field(self, omega, eps: float) -> FourierField:
        return FourierField.perturbed(omega, eps, self.W)

    def conjugacy(self, eps: float) -> Callable:
        return lambda x: np.asarray(x) + eps * vector_evaluate(self.psi1, x)


def expand(f: FourierSeries, omega, A) -> ResponseExpansion:
    """Run the first-order solves in order: ``u1``, ``c1``, ``W``, ``psi1``, ``alpha1``."""
    A = _check_hessian(A)
    u1 = solve_cohomological(f, omega)
    c1 = solve_c1_quadratic(A, u1)
    W = velocity_correction(u1, c1, A)
    psi1 = solve_conjugacy(W, omega)
    return ResponseExpansion(u1, W, psi1, c1, alpha_expansion(f, omega, c1), A)


class Observable:
    """Test function ``g(x, v)`` with its two partial gradients.

    All callables take ``(N, n)`` position and velocity arrays; ``g`` returns
    ``N`` values and the gradients return ``(N, n)`` arrays.
    """

    def __init__(self, g: Callable, grad_x: Callable, grad_v: Callable, name: str = "g"):
        self.g, self.grad_x, self.grad_v, self.name = g, grad_x, grad_v, name

    def __call__(self, x, v) -> np.ndarray:
        return self.g(np.atleast_2d(x), np.atleast_2d(v))

    @classmethod
    def constant(cls, value: float = 1.0) -> "Observable":
        zero = lambda x, v: np.zeros_like(np.asarray(x, dtype=np.float64))
        return cls(lambda x, v: np.full(len(x), value), zero, zero, f"const({value})")

    @classmethod
    def linear_velocity(cls, b) -> "Observable":
        """``<b, v>``."""
        b = np.asarray(b, dtype=np.float64)
        return cls(
            lambda x, v: np.asarray(v) @ b,
            lambda x, v: np.zeros_like(np.asarray(x, dtype=np.float64)),
            lambda x, v: np.broadcast_to(b, np.shape(v)).copy(),
            "linear-v",
        )

    @classmethod
    def mode_times_velocity(cls, k, j: int, amplitude: float = 1.0) -> "Observable":
        """``amplitude * cos(2 pi <k, x>) * v_j``."""
        k = np.asarray(k, dtype=np.float64)

        def g(x, v):
            return amplitude * np.cos(2 * np.pi * (x @ k)) * v[:, j]

        def gx(x, v):
            return (-2 * np.pi * amplitude * np.sin(2 * np.pi * (x @ k)) * v[:, j])[:, None] * k[None, :]

        def gv(x, v):
            out = np.zeros_like(v, dtype=np.float64)
            out[:, j] = amplitude * np.cos(2 * np.pi * (x @ k))
            return out

        return cls(g, gx, gv, f"cos(2pi<{k.astype(int).tolist()},x>) v{j + 1}")

    def gradient_error(self, n: int, samples: int = 1000, h: float = 1e-5, rng=None) -> float:
        """Max deviation of the stated gradients from central differences of ``g``."""
        rng = np.random.default_rng(0) if rng is None else rng
        x = rng.random((samples, n))
        v = rng.standard_normal((samples, n))
        gx, gv = self.grad_x(x, v), self.grad_v(x, v)
        err = 0.0
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            fdx = (self.g(x + e, v) - self.g(x - e, v)) / (2 * h)
            fdv = (self.g(x, v + e) - self.g(x, v - e)) / (2 * h)
            err = max(err, float(np.abs(fdx - gx[:, i]).max()), float(np.abs(fdv - gv[:, i]).max()))
        return err


def response_grid(f: FourierSeries, N: int | None = None) -> int:
    return max(4 * f.K, 64) if N is None else N


def linear_response(g: Observable, f: FourierSeries, omega, A, N: int | None = None) -> float:
    """``int [<d_x g(x, omega), psi1(x)> + <d_v g(x, omega), W(x)>] dx`` on the grid."""
    w = _omega(omega)
    exp = expand(f, w, A)
    N = response_grid(f, N)
    X = grid_points(N, f.n)
    Om = np.broadcast_to(w, X.shape)
    psi = vector_evaluate(exp.psi1, X)
    W = vector_evaluate(exp.W, X)
    integrand = np.sum(g.grad_x(X, Om) * psi, axis=1) + np.sum(g.grad_v(X, Om) * W, axis=1)
    return float(integrand.mean())


def finite_difference_response(g: Observable, f: FourierSeries, omega, A, eps_list, N: int | None = None) -> list[float]:
    """Difference quotients ``D(eps)`` of ``g`` integrated against the lifted image of Lebesgue.

    ``D(eps) = (int g(y, V_eps(y)) dx - int g(x, omega) dx) / eps`` with
    ``y = x + eps psi1(x)``.
    """
    eps_list = [float(e) for e in eps_list]
    if any(e <= 0 for e in eps_list) or any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be positive and decreasing")
    w = _omega(omega)
    exp = expand(f, w, A)
    N = response_grid(f, N)
    X = grid_points(N, f.n)
    base = float(g(X, np.broadcast_to(w, X.shape)).mean())
    psi = vector_evaluate(exp.psi1, X)
    out = []
    for eps in eps_list:
        Y = X + eps * psi
        V = w + eps * vector_evaluate(exp.W, Y)
        out.append((float(g(Y, V).mean()) - base) / eps)
    return out


def richardson(eps_list, values) -> float:
    """Value at ``eps = 0`` of the interpolating polynomial through ``(eps, D)`` (Neville)."""
    x = np.asarray(eps_list, dtype=np.float64)
    p = np.asarray(values, dtype=np.float64).copy()
    m = len(x)
    for level in range(1, m):
        for i in range(m - level):
            j = i + level
            p[i] = (x[j] * p[i] - x[i] * p[i + 1]) / (x[j] - x[i])
    return float(p[0])


def conjugacy_residual(f: FourierSeries, omega, A, eps: float, x0=None, T: float = 5.0, dt: float = 1e-3) -> float:
    """Max over the samples of ``|d/dt psi_eps(x(t)) - omega|`` along ``x' = omega + eps W``.

    The trajectory is integrated by RK4 on the lift and differentiated by
    central differences of the recorded samples; the first-order terms cancel
    and the remainder is ``eps^2 * D psi1 . W``.
    """
    w = _omega(omega)
    exp = expand(f, w, A)
    V = exp.field(w, eps)
    if x0 is None:
        x0 = np.random.default_rng(0).random((4, f.n))
    traj = integrate(V, x0, T, dt, wrap_coords=False, method="rk4")
    pts = np.asarray(traj.points)
    S = pts.shape[0]
    flat = pts.reshape(-1, f.n)
    lifted = (flat + eps * vector_evaluate(exp.psi1, flat)).reshape(pts.shape)
    h = traj.times[1] - traj.times[0]
    deriv = (lifted[2:] - lifted[:-2]) / (2 * h)
    return float(np.linalg.norm(deriv - w, axis=-1).max()) if S > 2 else 0.0


def response_report(g: Observable, f: FourierSeries, omega, A, eps_list, N: int | None = None) -> dict:
    exp = expand(f, omega, A)
    R = linear_response(g, f, omega, A, N)
    D = finite_difference_response(g, f, omega, A, eps_list, N)
    return {
        "alpha1": exp.alpha1,
        "c1": [float(c) for c in exp.c1],
        "response": R,
        "fd_ladder": [{"eps": e, "D": d} for e, d in zip(eps_list, D)],
        "richardson": richardson(eps_list, D),
    }


def response_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True)
