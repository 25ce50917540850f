"""Classical spin configurations, Ising Hamiltonians and observables.

Two model families are supported: the nearest-neighbour ring (periodic
chain, every bond (n, n+1) including the wrap bond (N, 1)) and the
all-to-all long-range model with a uniform pair coupling.  Observables are
affine combinations of spin products, X = a + b * sum of products; the two
built-ins are the magnetization (a=0, b=1, singletons) and the kink number
(a=N/2, b=-1/2, ring bonds).

The exhaustive-enumeration oracle in this module is the ground truth that
every analytic route in the package is validated against.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .distribution import DistMeta, Distribution
from .errors import InputError, SizeError

ENUMERATION_LIMIT = 24  # 2^N configurations; refuse above this
_ENUM_CHUNK = 1 << 16  # fixed chunking keeps the summation order deterministic


class ModelKind(enum.Enum):
    RING = "ring"
    LONG_RANGE = "longrange"


class ObsKind(enum.Enum):
    MAGNETIZATION = "magnetization"
    KINKS = "kinks"
    CUSTOM = "custom"


@dataclass(frozen=True)
class SpinConfig:
    """A concrete configuration of N spins, each +1 or -1."""

    spins: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.spins, dtype=np.int8)
        if arr.ndim != 1 or arr.size == 0:
            raise InputError("spin configuration must be a non-empty 1-d sequence")
        if not np.all(np.abs(arr) == 1):
            raise InputError("spins must take values +1 or -1")
        object.__setattr__(self, "spins", arr)

    def __len__(self):
        return self.spins.size

    @classmethod
    def all_up(cls, n: int) -> "SpinConfig":
        return cls(np.ones(n, dtype=np.int8))

    @classmethod
    def from_iterable(cls, values) -> "SpinConfig":
        return cls(np.asarray(list(values), dtype=np.int8))


@dataclass(frozen=True)
class ModelParams:
    """Couplings of one model instance.

    beta = 0 is accepted here (infinite-temperature limit, used by the
    enumeration oracle and the samplers); routines that divide by beta
    enforce beta > 0 themselves.
    """

    kind: ModelKind
    N: int
    J: float
    h: float
    beta: float

    def __post_init__(self):
        if self.N < 1:
            raise InputError("N must be a positive integer")
        if self.beta < 0:
            raise InputError("beta must be non-negative")


@dataclass(frozen=True)
class ObservableSpec:
    """X = a + b * sum over `terms` of spin products; indices are 1-based."""

    a: float
    b: float
    terms: tuple = ()
    kind: ObsKind = ObsKind.CUSTOM

    def __post_init__(self):
        object.__setattr__(
            self, "terms", tuple(tuple(int(i) for i in t) for t in self.terms)
        )
        for t in self.terms:
            if len(t) == 0 or any(i < 1 for i in t):
                raise InputError("each term needs at least one 1-based spin index")
        n = len(self.terms)
        if self.kind is ObsKind.MAGNETIZATION:
            if (self.a, self.b) != (0.0, 1.0) or self.terms != tuple(
                    (i,) for i in range(1, n + 1)):
                raise InputError("magnetization tag requires a=0, b=1 and one "
                                 "singleton per site")
        elif self.kind is ObsKind.KINKS:
            if (self.a, self.b) != (n / 2.0, -0.5) or self.terms != tuple(
                    (i, i % n + 1) for i in range(1, n + 1)):
                raise InputError("kink tag requires a=N/2, b=-1/2 and the ring "
                                 "bond list including the wrap bond")

    def value_bounds(self) -> tuple[int, int]:
        """Smallest and largest integer value X can take (term sum in [-T, T])."""
        t = len(self.terms)
        lo, hi = self.a - abs(self.b) * t, self.a + abs(self.b) * t
        for v in (lo, hi):
            if abs(v - round(v)) > 1e-9:
                raise InputError("observable is not integer-valued")
        return int(round(lo)), int(round(hi))


def magnetization(n: int) -> ObservableSpec:
    """M = sum of all spins; integer values in [-N, N] with the parity of N."""
    return ObservableSpec(
        a=0.0, b=1.0, terms=tuple((i,) for i in range(1, n + 1)), kind=ObsKind.MAGNETIZATION
    )


def kink_number(n: int) -> ObservableSpec:
    """K = (N - sum of ring-bond products)/2, the number of domain walls.

    The wrap bond (N, 1) is always included, so K is an even integer on the
    periodic ring for every configuration.
    """
    terms = tuple((i, i % n + 1) for i in range(1, n + 1))
    return ObservableSpec(a=n / 2.0, b=-0.5, terms=terms, kind=ObsKind.KINKS)


def custom_observable(a: float, b: float, terms) -> ObservableSpec:
    return ObservableSpec(a=a, b=b, terms=tuple(terms), kind=ObsKind.CUSTOM)


def observable_value(config: SpinConfig, obs: ObservableSpec) -> float:
    """Evaluate X on one configuration."""
    spins = config.spins
    n = spins.size
    total = 0
    for term in obs.terms:
        if any(i > n for i in term):
            raise InputError(f"term {term} out of range for N={n}")
        prod = 1
        for i in term:
            prod *= int(spins[i - 1])
        total += prod
    return obs.a + obs.b * total


def energy(model: ModelParams, config: SpinConfig) -> float:
    """Hamiltonian value of one configuration.

    Ring: -J * sum over ring bonds (wrap included) - h * sum of spins.
    Long range: -J * sum over all pairs m < n - h * sum of spins.
    """
    spins = config.spins.astype(np.int64)
    if spins.size != model.N:
        raise InputError(f"configuration has {spins.size} spins, model expects {model.N}")
    m = int(spins.sum())
    if model.kind is ModelKind.RING:
        bonds = int((spins * np.roll(spins, -1)).sum())
        return -model.J * bonds - model.h * m
    pair_sum = (m * m - model.N) / 2.0
    return -model.J * pair_sum - model.h * m


def _config_matrix(n: int, start: int, stop: int) -> np.ndarray:
    """Spins (+1/-1) of configurations with indices [start, stop), bit n-1 = site 1."""
    idx = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    bits = (idx[:, None] >> shifts[None, :]) & 1
    return (1 - 2 * bits).astype(np.int8)


def _batch_observable(spins: np.ndarray, obs: ObservableSpec) -> np.ndarray:
    n = spins.shape[1]
    total = np.zeros(spins.shape[0], dtype=np.int64)
    for term in obs.terms:
        if any(i > n for i in term):
            raise InputError(f"term {term} out of range for N={n}")
        prod = np.ones(spins.shape[0], dtype=np.int64)
        for i in term:
            prod *= spins[:, i - 1]
        total += prod
    return obs.a + obs.b * total


def _batch_energy(model: ModelParams, spins: np.ndarray) -> np.ndarray:
    m = spins.sum(axis=1, dtype=np.int64)
    if model.kind is ModelKind.RING:
        bonds = (spins.astype(np.int64) * np.roll(spins, -1, axis=1)).sum(axis=1)
        return -model.J * bonds - model.h * m
    return -model.J * (m * m - model.N) / 2.0 - model.h * m


class OracleResult:
    """Exact partition function and observable distribution from enumeration."""

    def __init__(self, log_z: float, dist: Distribution):
        self.log_z = log_z
        self.dist = dist

    @property
    def z(self) -> float:
        return math.exp(self.log_z)  # may overflow to inf for extreme parameters


def enumerate_oracle(model: ModelParams, obs: ObservableSpec) -> OracleResult:
    """Sum exp(-beta * E) over all 2^N configurations.

    Weights are shifted by the minimum energy internally, so the histogram is
    exact even when exp(-beta*E) itself would overflow.  Cost is 2^N; N above
    24 is refused.
    """
    n = model.N
    if n > ENUMERATION_LIMIT:
        raise SizeError(f"enumeration limited to N <= {ENUMERATION_LIMIT}, got {n}")
    lo, hi = obs.value_bounds()
    support = np.arange(lo, hi + 1)
    weights = np.zeros(support.size)

    total = 1 << n
    e_min = None
    # two passes: find the energy shift, then accumulate (keeps memory flat)
    for start in range(0, total, _ENUM_CHUNK):
        spins = _config_matrix(n, start, min(start + _ENUM_CHUNK, total))
        e = _batch_energy(model, spins)
        m = float(e.min())
        e_min = m if e_min is None else min(e_min, m)
    z_scaled = 0.0
    for start in range(0, total, _ENUM_CHUNK):
        spins = _config_matrix(n, start, min(start + _ENUM_CHUNK, total))
        e = _batch_energy(model, spins)
        x = _batch_observable(spins, obs)
        xi = np.rint(x).astype(np.int64)
        if np.abs(x - xi).max() > 1e-12:
            raise InputError("observable is not integer-valued on some configuration")
        w = np.exp(-model.beta * (e - e_min))
        weights += np.bincount(xi - lo, weights=w, minlength=support.size)
        z_scaled += float(w.sum())

    probs = weights / z_scaled
    log_z = math.log(z_scaled) - model.beta * e_min
    meta = DistMeta(
        obs_kind=obs.kind.value, n=n, model_kind=model.kind.value, method="oracle"
    )
    return OracleResult(log_z, Distribution(support=support, probs=probs, residual_imag=0.0, meta=meta))
