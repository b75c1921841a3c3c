"""Continued fractions and Diophantine approximation.

Continued fractions are computed on exact rationals: a float is converted
through its shortest ``repr`` and a decimal string is parsed digit for digit,
so partial quotients are never corrupted by binary rounding. Everything else
(exponent scans, small-divisor checks) works in 64-bit floating point.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    DepthExceeded,
    Degenerate,
    NonFinite,
    RationalDetected,
    ResonantFrequency,
)

MAX_DEPTH = 64
RATIONAL_THRESHOLD = 1e-14
DEFAULT_K_CHECK = 200

# 60 significant digits is well past the 30 needed to keep 64 quotients honest.
_NAMED_DIGITS = 60


def _named_constants() -> dict[str, Fraction]:
    with localcontext() as ctx:
        ctx.prec = _NAMED_DIGITS
        s5 = Decimal(5).sqrt()
        phi = (1 + s5) / 2
        table = {
            "phi": phi,
            "golden": phi,
            "phi-1": phi - 1,
            "sqrt2": Decimal(2).sqrt(),
            "sqrt3": Decimal(3).sqrt(),
            "sqrt5": s5,
        }
    return {name: Fraction(value) for name, value in table.items()}


NAMED_CONSTANTS = _named_constants()


def parse_real(value) -> Fraction:
    """Convert ``value`` to an exact rational.

    Accepts ints, floats (through their shortest repr), ``Fraction``,
    ``Decimal``, decimal or fraction strings such as
    ``"1.41421356237309504880168872"`` or ``"3/8"``, and the names in
    :data:`NAMED_CONSTANTS`.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            raise NonFinite(f"non-finite input {value!r}")
        return Fraction(repr(float(value)))
    if isinstance(value, Decimal):
        if not value.is_finite():
            raise NonFinite(f"non-finite input {value!r}")
        return Fraction(value)
    if isinstance(value, str):
        key = value.strip().lower()
        if key in NAMED_CONSTANTS:
            return NAMED_CONSTANTS[key]
        if key in {"nan", "inf", "+inf", "-inf", "infinity", "-infinity"}:
            raise NonFinite(f"non-finite input {value!r}")
        try:
            return Fraction(key)
        except ValueError:
            raise ValueError(f"cannot interpret {value!r} as a real number") from None
    raise TypeError(f"cannot interpret {value!r} as a real number")


@dataclass(frozen=True)
class RationalApprox:
    p: int
    q: int
    err: float

    def __post_init__(self):
        if self.q <= 0:
            raise ValueError("denominator must be positive")
        if math.gcd(self.p, self.q) != 1:
            raise ValueError(f"{self.p}/{self.q} is not in lowest terms")

    @property
    def value(self) -> float:
        return self.p / self.q

    def __str__(self):
        return f"{self.p}/{self.q}"


@dataclass(frozen=True)
class ContinuedFraction:
    value: float
    partial_quotients: tuple[int, ...]
    exact: Fraction = field(repr=False, compare=False)

    def __post_init__(self):
        if any(a < 1 for a in self.partial_quotients[1:]):
            raise ValueError("partial quotients after a0 must be >= 1")

    @property
    def terminated(self) -> bool:
        """True when the expansion ended because the input is rational."""
        return _reconstruct(self.partial_quotients) == self.exact

    def reconstruct(self) -> Fraction:
        return _reconstruct(self.partial_quotients)


def _reconstruct(quotients: Sequence[int]) -> Fraction:
    acc = Fraction(quotients[-1])
    for a in reversed(quotients[:-1]):
        acc = a + 1 / acc
    return acc


def continued_fraction(nu, depth: int = 20) -> ContinuedFraction:
    """Euclidean continued-fraction expansion of ``nu``, truncated at ``depth``.

    >>> continued_fraction(0.5, 10).partial_quotients
    (0, 2)
    """
    if not 1 <= depth <= MAX_DEPTH:
        raise DepthExceeded(f"depth must lie in [1, {MAX_DEPTH}], got {depth}")
    exact = parse_real(nu)
    x = exact
    quotients = []
    for _ in range(depth):
        a = math.floor(x)
        quotients.append(a)
        rest = x - a
        if rest == 0:
            break
        x = 1 / rest
    return ContinuedFraction(float(exact), tuple(quotients), exact)


def convergents(cf: ContinuedFraction, count: int | None = None) -> list[RationalApprox]:
    """First ``count`` convergents p_m/q_m of ``cf``.

    Errors are measured against the exact rational the expansion came from,
    so the Dirichlet bound ``err <= 1/q**2`` is never spoiled by rounding.
    """
    available = len(cf.partial_quotients)
    if count is None:
        count = available
    if count < 1 or count > available:
        raise DepthExceeded(f"requested {count} convergents, {available} quotients available")
    p_prev, p = 1, cf.partial_quotients[0]
    q_prev, q = 0, 1
    out = [RationalApprox(p, q, float(abs(cf.exact - p)))]
    for a in cf.partial_quotients[1:count]:
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        out.append(RationalApprox(p, q, float(abs(cf.exact - Fraction(p, q)))))
    return out


def distinct_convergents(cf: ContinuedFraction, count: int | None = None) -> list[RationalApprox]:
    """Convergents with strictly increasing denominators.

    When a1 = 1 the zeroth and first convergents share q = 1; only the later
    (better) one is kept.
    """
    full = convergents(cf)
    out: list[RationalApprox] = []
    for c in full:
        if out and out[-1].q == c.q:
            out[-1] = c
        else:
            out.append(c)
    if count is not None:
        if count > len(out):
            raise DepthExceeded(f"requested {count} distinct convergents, {len(out)} available")
        out = out[:count]
    return out


def diophantine_exponent_estimate(nu, M_max: int, q_min: int = 10) -> float:
    """Finite-horizon estimate of the Diophantine exponent tau(nu).

    Scans ``m = 1..M_max`` for the record minima of ``||m nu||`` (these are
    the best-approximation denominators), fits ``-log||q nu||`` against
    ``log q`` over records with ``q >= q_min``, and returns the largest slope
    over all record prefixes holding at least three points. The maximum over
    prefixes makes the estimate nondecreasing in ``M_max``.

    Raises
    ------
    RationalDetected
        If ``||m nu|| < 1e-14`` for some ``m <= M_max``.
    """
    if M_max < 100:
        raise ValueError("M_max must be at least 100")
    x = float(parse_real(nu)) if not isinstance(nu, (float, np.floating)) else float(nu)
    if not math.isfinite(x):
        raise NonFinite(f"non-finite input {nu!r}")
    m = np.arange(1, M_max + 1, dtype=np.float64)
    prod = m * x
    dist = np.abs(prod - np.rint(prod))
    bad = np.flatnonzero(dist < RATIONAL_THRESHOLD)
    if bad.size:
        raise RationalDetected(f"||m nu|| < {RATIONAL_THRESHOLD:g} at m = {int(m[bad[0]])}")
    running = np.minimum.accumulate(dist)
    is_record = np.empty(dist.size, dtype=bool)
    is_record[0] = True
    is_record[1:] = dist[1:] < running[:-1]
    idx = np.flatnonzero(is_record & (m >= q_min))
    if idx.size < 3:
        raise Degenerate(f"only {idx.size} best approximations with q >= {q_min} below M_max")
    logq = np.log(m[idx])
    y = -np.log(dist[idx])
    best = -math.inf
    for end in range(3, idx.size + 1):
        slope = np.polyfit(logq[:end], y[:end], 1)[0]
        best = max(best, float(slope))
    return best


class DiophantineCheck(NamedTuple):
    holds: bool
    witness: tuple[int, ...]
    min_ratio: float  # min over k of |<omega,k>| |k|^tau / sigma


def _box_chunks(n: int, K: int):
    """Yield every nonzero integer vector with |k|_inf <= K, chunk by chunk."""
    axis = np.arange(-K, K + 1)
    tail = min(n, 2)
    grid = np.stack(np.meshgrid(*([axis] * tail), indexing="ij"), -1).reshape(-1, tail)
    for head in itertools.product(range(-K, K + 1), repeat=n - tail):
        chunk = np.empty((grid.shape[0], n), dtype=np.int64)
        chunk[:, : n - tail] = head
        chunk[:, n - tail :] = grid
        if not any(head):
            chunk = chunk[np.any(chunk != 0, axis=1)]
        yield chunk


def _canonical(k: np.ndarray) -> bool:
    nz = k[k != 0]
    return bool(nz.size and nz[0] > 0)


def _worst_in_chunk(chunk: np.ndarray, score: np.ndarray):
    best = score.min()
    cand = np.flatnonzero(score == best)
    keys = []
    for i in cand:
        k = chunk[i]
        keys.append((float(best), int(np.abs(k).max()), not _canonical(k), tuple(int(v) for v in k)))
    return min(keys)


def verify_diophantine(omega, sigma: float, tau: float, K: int) -> DiophantineCheck:
    """Check ``|<omega,k>| >= sigma |k|^-tau`` for all ``0 < |k|_inf <= K``.

    The norm on k is the sup norm, matching the enumeration box. The witness
    is the k minimising ``|<omega,k>| |k|^tau``; among exact ties the
    shortest vector whose first nonzero entry is positive wins.
    """
    w = np.asarray(getattr(omega, "components", omega), dtype=np.float64)
    n = w.size
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if tau < n - 1:
        raise ValueError(f"tau must be >= n-1 = {n - 1}")
    best = None
    for chunk in _box_chunks(n, K):
        norm = np.abs(chunk).max(axis=1).astype(np.float64)
        score = np.abs(chunk @ w) * norm**tau
        key = _worst_in_chunk(chunk, score)
        if best is None or key < best:
            best = key
    score, _, _, k = best
    return DiophantineCheck(score >= sigma, k, score / sigma)


def min_small_divisor(omega, K: int) -> tuple[float, tuple[int, ...]]:
    """Smallest ``|<k,omega>|`` over ``0 < |k|_inf <= K`` and its k."""
    w = np.asarray(getattr(omega, "components", omega), dtype=np.float64)
    best = None
    for chunk in _box_chunks(w.size, K):
        key = _worst_in_chunk(chunk, np.abs(chunk @ w))
        if best is None or key < best:
            best = key
    return best[0], best[3]


@dataclass(frozen=True)
class Frequency:
    """Frequency vector with optional claimed Diophantine constants.

    ``exact`` keeps the rational values the components were parsed from, so
    continued fractions of the components stay accurate to full depth.
    """

    components: np.ndarray
    claimed_sigma: float | None = None
    claimed_tau: float | None = None
    k_check: int | None = None
    exact: tuple[Fraction, ...] = field(default=(), repr=False, compare=False)

    def __init__(self, components, claimed_sigma=None, claimed_tau=None, k_check=None):
        exact = tuple(parse_real(c) for c in np.atleast_1d(np.asarray(components, dtype=object)))
        comps = np.array([float(c) for c in exact], dtype=np.float64)
        comps.setflags(write=False)
        n = comps.size
        if k_check is None:
            # keep the resonance scan near 10^8 vectors in high dimension
            k_check = DEFAULT_K_CHECK if n <= 3 else max(2, int(round(1e8 ** (1 / n) / 2)))
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "claimed_sigma", claimed_sigma)
        object.__setattr__(self, "claimed_tau", claimed_tau)
        object.__setattr__(self, "k_check", int(k_check))
        object.__setattr__(self, "exact", exact)
        if n == 0:
            raise ValueError("frequency needs at least one component")
        divisor, k = min_small_divisor(comps, self.k_check)
        if divisor <= RATIONAL_THRESHOLD:
            raise ResonantFrequency(f"<k, omega> = {divisor:g} at k = {k}")
        if (claimed_sigma is None) != (claimed_tau is None):
            raise ValueError("claimed_sigma and claimed_tau must be given together")
        if claimed_sigma is not None:
            check = verify_diophantine(comps, claimed_sigma, claimed_tau, self.k_check)
            if not check.holds:
                raise ResonantFrequency(
                    f"claimed (sigma, tau) = ({claimed_sigma}, {claimed_tau}) fails at k = {check.witness}"
                )

    @property
    def n(self) -> int:
        return self.components.size

    def __len__(self):
        return self.n

    def __array__(self, dtype=None, copy=None):
        return np.array(self.components, dtype=dtype)


@dataclass(frozen=True)
class SimultaneousSchedule:
    per_component: tuple[RationalApprox, ...]
    T_m: int
    Q_m: int
    delta_m: float

    def __post_init__(self):
        qs = [a.q for a in self.per_component]
        if self.T_m != math.lcm(*qs) or self.Q_m != max(qs):
            raise ValueError("schedule T_m / Q_m inconsistent with its approximants")
        if not self.Q_m <= self.T_m <= self.Q_m ** len(qs):
            raise ValueError("schedule violates Q_m <= T_m <= Q_m^(n-1)")

    @property
    def velocity(self) -> np.ndarray:
        """The rational frequency (p_1/q_1, ..., p_{n-1}/q_{n-1}, 1)."""
        return np.array([a.p / a.q for a in self.per_component] + [1.0])


def simultaneous_schedule(omega, m: int, depth: int = MAX_DEPTH) -> SimultaneousSchedule:
    """Simultaneous rational approximation of (omega_1..omega_{n-1}, 1) at index m.

    Index m selects the m-th convergent (0-based, strictly increasing
    denominators) of each of the first n-1 components.
    """
    freq = omega if isinstance(omega, Frequency) else None
    exact = freq.exact if freq is not None else tuple(parse_real(c) for c in omega)
    if len(exact) < 2:
        raise ValueError("need at least two components")
    if exact[-1] != 1:
        raise ValueError("last component must equal 1")
    approx = []
    for value in exact[:-1]:
        conv = distinct_convergents(continued_fraction(value, depth))
        if m >= len(conv):
            raise DepthExceeded(f"index {m} beyond the {len(conv)} available convergents of {float(value)}")
        approx.append(conv[m])
    qs = [a.q for a in approx]
    return SimultaneousSchedule(
        tuple(approx),
        math.lcm(*qs),
        max(qs),
        max(a.err for a in approx),
    )
