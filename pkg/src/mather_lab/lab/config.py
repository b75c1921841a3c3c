"""Experiment configuration read from TOML files."""

from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from ..errors import ConfigError

EXPERIMENTS = ("upper-bound", "lower-bound-2d", "highdim-lower", "birkhoff", "linear-response")
GOLDEN_FREQUENCY = ("1", "phi-1")


@dataclass
class ExperimentConfig:
    """Every knob of every experiment; unused fields are ignored by the others.

    A config file is flat ``key = value`` TOML. Tables are allowed for
    grouping and are merged into the top level, so ``[transport]
    resolution = 32`` and ``resolution = 32`` mean the same thing.
    """

    experiment: str = "upper-bound"
    frequency: list = field(default_factory=lambda: list(GOLDEN_FREQUENCY))
    sigma: float | None = None
    tau: float | None = None
    seed: int = 0
    out: str = "out"

    # perturbation family
    deltas: list = field(default_factory=lambda: [0.02, 0.01, 0.005, 0.0025])
    amplitude: float = 1.0
    band: int = 1
    convergent_range: list = field(default_factory=lambda: [1, 8])
    q_values: list | None = None

    # transport
    method: str = "exact"
    resolution: int = 32
    reg: float = 1e-3
    quadrature: int = 256
    orbit_samples: int = 256
    highdim_resolution: int = 24

    # simulation
    starts: int = 4096
    T: float = 60.0
    dt: float = 1e-2
    burn_in: float = 10.0
    record_every: int = 5
    attractor: bool = False
    attractor_starts: int = 20
    attractor_T: float = 2000.0

    # Birkhoff
    horizons: list = field(default_factory=lambda: [10.0, 1e4, 12])
    observable: list = field(default_factory=lambda: [{"k": [1, 0], "amp": 1.0}, {"k": [1, 1], "amp": 1.0}])
    x0: list | None = None

    # linear response
    f_modes: list = field(default_factory=lambda: [{"k": [1, 0], "amp": 1.0}])
    g_mode: dict = field(default_factory=lambda: {"k": [1, 0], "component": 2, "amp": 1.0})
    eps: list = field(default_factory=lambda: [1e-2, 5e-3, 2.5e-3])
    hessian: list | None = None
    grid: int | None = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        d = [float(x) for x in self.deltas]
        if any(x <= 0 for x in d) or any(b >= a for a, b in zip(d, d[1:])):
            raise ConfigError("deltas must be positive and strictly decreasing")
        e = [float(x) for x in self.eps]
        if any(x <= 0 for x in e) or any(b >= a for a, b in zip(e, e[1:])):
            raise ConfigError("eps must be positive and strictly decreasing")
        if not 2 <= self.resolution <= 64:
            raise ConfigError("resolution must lie in [2, 64] (at most 4096 cells for the exact solver)")
        if self.method not in ("exact", "entropic"):
            raise ConfigError("method must be 'exact' or 'entropic'")
        if len(self.convergent_range) != 2 or self.convergent_range[0] > self.convergent_range[1]:
            raise ConfigError("convergent_range must be [first, last]")
        if len(self.horizons) != 3:
            raise ConfigError("horizons must be [T_min, T_max, count]")
        if self.dt <= 0 or self.T <= self.burn_in:
            raise ConfigError("need dt > 0 and T > burn_in")

    @classmethod
    def from_dict(cls, data: dict, **overrides) -> "ExperimentConfig":
        flat = {}
        for key, value in data.items():
            if isinstance(value, dict) and key not in ("g_mode",):
                flat.update(value)
            else:
                flat[key] = value
        flat.update({k: v for k, v in overrides.items() if v is not None})
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(flat) - names)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**flat)

    @classmethod
    def from_toml(cls, path, **overrides) -> "ExperimentConfig":
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data, **overrides)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)
