"""Sparse signals, support layouts and noisy compressed measurements.

Every sensor ``p`` observes ``y_p = A_p x_p + e_p`` where ``x_p`` is
``T``-sparse on its support ``T_p``.  Two support correlation models are
provided:

* common: all sensors share one support (``T_p = J``);
* mixed: ``T_p = I_p ∪ J`` with a shared joint part ``J`` and pairwise
  disjoint individual parts ``I_p``.

Indices are 0-based throughout.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SupportModel",
    "AmplitudeDist",
    "ModelConfig",
    "SupportLayout",
    "SensorInstance",
    "InfeasibleLayoutError",
    "as_support",
    "draw_supports",
    "draw_sensor",
    "noise_variance",
]


class SupportModel(str, enum.Enum):
    COMMON = "common"
    MIXED = "mixed"


class AmplitudeDist(str, enum.Enum):
    GAUSSIAN = "gaussian"
    RADEMACHER = "rademacher"


class InfeasibleLayoutError(ValueError):
    """Raised when the individual support parts cannot be made disjoint."""


def as_support(indices, n: int | None = None) -> np.ndarray:
    """Return ``indices`` as a sorted, duplicate-free int64 array.

    Raises ``ValueError`` on duplicates, negative entries or entries ``>= n``.
    """
    arr = np.asarray(indices, dtype=np.int64).ravel()
    out = np.unique(arr)
    if out.size != arr.size:
        raise ValueError(f"support contains duplicate indices: {arr.tolist()}")
    if out.size and out[0] < 0:
        raise ValueError("support indices must be non-negative")
    if n is not None and out.size and out[-1] >= n:
        raise IndexError(f"support index {int(out[-1])} out of range for N={n}")
    return out


@dataclass(frozen=True)
class ModelConfig:
    """Dimensions and noise level of the distributed sensing setup.

    ``j`` and ``i_card`` default to ``t`` and ``0`` for the common model.
    ``smnr_db = inf`` gives noiseless measurements.
    """

    n: int
    m_rows: int
    t: int
    l: int = 1
    smnr_db: float = math.inf
    support_model: SupportModel = SupportModel.COMMON
    j: int | None = None
    i_card: int | None = None
    amplitude_dist: AmplitudeDist = AmplitudeDist.GAUSSIAN

    def __post_init__(self):
        object.__setattr__(self, "support_model", SupportModel(self.support_model))
        object.__setattr__(self, "amplitude_dist", AmplitudeDist(self.amplitude_dist))
        if self.support_model is SupportModel.COMMON:
            j = self.t if self.j is None else self.j
            i_card = 0 if self.i_card is None else self.i_card
            if j != self.t or i_card != 0:
                raise ValueError("common model requires J = T and I = 0")
        else:
            i_card = self.i_card
            j = self.j
            if j is None and i_card is None:
                raise ValueError("mixed model needs J or I")
            if j is None:
                j = self.t - i_card
            if i_card is None:
                i_card = self.t - j
        object.__setattr__(self, "j", int(j))
        object.__setattr__(self, "i_card", int(i_card))

        if not 0 < self.t < self.m_rows < self.n:
            raise ValueError(
                f"need 0 < T < M < N, got T={self.t}, M={self.m_rows}, N={self.n}"
            )
        if self.l < 1:
            raise ValueError("need at least one sensor")
        if self.j < 0 or self.i_card < 0:
            raise ValueError("J and I must be non-negative")
        if self.j + self.i_card != self.t:
            raise ValueError(f"need T = I + J, got T={self.t}, I={self.i_card}, J={self.j}")
        if self.j + self.l * self.i_card > self.n:
            raise InfeasibleLayoutError(
                f"J + L*I = {self.j + self.l * self.i_card} exceeds N = {self.n}"
            )

    @property
    def eps_max(self) -> float:
        return (self.n - self.t) / self.n


@dataclass
class SupportLayout:
    joint: np.ndarray
    individual: list[np.ndarray]
    per_sensor: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        if not self.per_sensor:
            self.per_sensor = [np.union1d(part, self.joint) for part in self.individual]

    @property
    def n_sensors(self) -> int:
        return len(self.individual)


@dataclass
class SensorInstance:
    matrix_a: np.ndarray
    signal_x: np.ndarray
    dense_v: np.ndarray
    noise_e: np.ndarray
    meas_y: np.ndarray
    support: np.ndarray


def draw_supports(cfg: ModelConfig, rng: np.random.Generator) -> SupportLayout:
    """Draw the joint part and the per-sensor individual parts.

    Common model: a single uniform ``T``-subset shared by all sensors.
    Mixed model: a uniform ``J``-subset, then ``L`` disjoint ``I``-subsets
    drawn without replacement from the remaining ``N - J`` indices.
    """
    n, l = cfg.n, cfg.l
    if cfg.j + l * cfg.i_card > n:
        raise InfeasibleLayoutError(f"J + L*I = {cfg.j + l * cfg.i_card} exceeds N = {n}")
    if cfg.support_model is SupportModel.COMMON or cfg.i_card == 0:
        joint = np.sort(rng.choice(n, size=cfg.j, replace=False))
        empty = np.empty(0, dtype=np.int64)
        return SupportLayout(joint, [empty.copy() for _ in range(l)],
                             [joint.copy() for _ in range(l)])
    perm = rng.permutation(n)
    joint = np.sort(perm[: cfg.j])
    rest = perm[cfg.j : cfg.j + l * cfg.i_card].reshape(l, cfg.i_card)
    individual = [np.sort(row) for row in rest]
    return SupportLayout(joint, individual)


def noise_variance(signal_energy: float, m_rows: int, smnr_db: float) -> float:
    """Per-component noise variance giving ``E||e||^2 = ||x||^2 / smnr``."""
    if math.isinf(smnr_db) and smnr_db > 0:
        return 0.0
    return signal_energy / (m_rows * 10.0 ** (smnr_db / 10.0))


def draw_sensor(cfg: ModelConfig, support, rng: np.random.Generator) -> SensorInstance:
    """Draw one sensor realization on ``support``.

    ``A`` has i.i.d. zero-mean Gaussian entries and its columns are then
    scaled to unit norm, so the pre-normalization variance is immaterial.
    The noise variance is set from the drawn ``||x||^2``.
    """
    support = as_support(support, cfg.n)
    if support.size != cfg.t:
        raise ValueError(f"support has {support.size} indices, expected T={cfg.t}")
    m, n = cfg.m_rows, cfg.n

    a = rng.standard_normal((m, n))
    a /= np.linalg.norm(a, axis=0)

    if cfg.amplitude_dist is AmplitudeDist.GAUSSIAN:
        v = rng.standard_normal(cfg.t)
    else:
        v = rng.choice(np.array([-1.0, 1.0]), size=cfg.t)
    x = np.zeros(n)
    x[support] = v

    sigma2 = noise_variance(float(v @ v), m, cfg.smnr_db)
    if sigma2 > 0.0:
        e = math.sqrt(sigma2) * rng.standard_normal(m)
    else:
        e = np.zeros(m)
    y = a @ x + e
    return SensorInstance(a, x, v, e, y, support)
