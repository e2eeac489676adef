"""Seeded generator for grouped, directionally correlated predictors.

Prototype variables ``Z`` are drawn from ``N(0, sigma)``, standardized
in-sample, and each predictor is a randomly signed copy of its group's
prototype plus independent noise. The response is ``Z @ b`` plus noise.

Draw order from the single stream: ``Z`` (row-major), signs, predictor
noise (row-major), response noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .numerics import cholesky
from .rng import Xoshiro256pp, standard_normals

__all__ = ["SimulationConfig", "SimulatedData", "simulate", "standard_normals", "DEFAULT_SIGMA"]

DEFAULT_SIGMA = np.array(
    [
        [1.0, 0.5, 0.5, 0.5, 0.1],
        [0.5, 1.0, 0.5, 0.1, 0.1],
        [0.5, 0.5, 1.0, 0.1, 0.1],
        [0.5, 0.1, 0.1, 1.0, 0.1],
        [0.1, 0.1, 0.1, 0.1, 1.0],
    ]
)
DEFAULT_GROUPS = (35, 5, 10, 10, 10)
DEFAULT_B = (1.0, 5.0, 3.0, 0.0, 0.0)


def _default_sigma():
    return DEFAULT_SIGMA.copy()


@dataclass(frozen=True)
class SimulationConfig:
    n: int = 100
    group_sizes: tuple = DEFAULT_GROUPS
    sigma: np.ndarray = field(default_factory=_default_sigma, repr=False)
    b: tuple = DEFAULT_B
    noise_sd_x: float = 1.0
    noise_sd_y: float = 1.0
    seed: int = 0
    omega: Optional[tuple] = None  # fixed signs instead of random ones

    def __post_init__(self):
        sizes = tuple(int(g) for g in self.group_sizes)
        if not sizes or min(sizes) < 1:
            raise ValueError("group sizes must be positive integers")
        sigma = np.asarray(self.sigma, dtype=float)
        K = len(sizes)
        if sigma.shape != (K, K):
            raise ValueError(f"sigma must be {K}x{K} for {K} groups, got {sigma.shape}")
        b = tuple(float(v) for v in self.b)
        if len(b) != K:
            raise ValueError(f"b has {len(b)} entries for {K} groups")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.omega is not None and len(self.omega) != sum(sizes):
            raise ValueError("omega must have one sign per variable")
        object.__setattr__(self, "group_sizes", sizes)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "b", b)

    @property
    def p(self) -> int:
        return sum(self.group_sizes)

    @property
    def K(self) -> int:
        return len(self.group_sizes)

    @classmethod
    def default_for(cls, group_sizes, **kw) -> "SimulationConfig":
        """Config for arbitrary group sizes.

        Reuses the default covariance and coefficients when there are five
        groups; otherwise prototypes are independent and ``b`` is all ones.
        """
        K = len(group_sizes)
        if K == len(DEFAULT_GROUPS):
            return cls(group_sizes=tuple(group_sizes), **kw)
        return cls(group_sizes=tuple(group_sizes), sigma=np.eye(K), b=(1.0,) * K, **kw)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "group_sizes": list(self.group_sizes),
            "sigma": self.sigma.tolist(),
            "b": list(self.b),
            "noise_sd_x": self.noise_sd_x,
            "noise_sd_y": self.noise_sd_y,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class SimulatedData:
    X: np.ndarray
    y: np.ndarray
    allocation: np.ndarray
    omega: np.ndarray
    Z: np.ndarray
    config: SimulationConfig = field(repr=False)

    @property
    def var_names(self) -> tuple:
        return tuple(f"x{j + 1}" for j in range(self.X.shape[1]))

    def dataset(self):
        from .preprocess import Dataset

        return Dataset(self.X, self.var_names, tuple(str(i + 1) for i in range(self.X.shape[0])), self.y)


def simulate(config: SimulationConfig) -> SimulatedData:
    rng = Xoshiro256pp(config.seed)
    n, p, K = config.n, config.p, config.K
    L = cholesky(config.sigma)
    Z = rng.normals(n * K).reshape(n, K) @ L.T
    Z = Z - Z.mean(axis=0)
    Z = Z / Z.std(axis=0, ddof=1)

    allocation = np.repeat(np.arange(K), config.group_sizes)
    if config.omega is None:
        omega = np.array([rng.sign() for _ in range(p)], dtype=float)
    else:
        omega = np.asarray(config.omega, dtype=float)
        if not np.all(np.abs(omega) == 1.0):
            raise ValueError("omega entries must be +1 or -1")
    eps_x = rng.normals(n * p).reshape(n, p)
    eps_y = rng.normals(n)
    X = omega * Z[:, allocation] + config.noise_sd_x * eps_x
    y = Z @ np.asarray(config.b) + config.noise_sd_y * eps_y
    return SimulatedData(X, y, allocation, omega, Z, config)


def expected_prototype_correlations(config: SimulationConfig) -> np.ndarray:
    """Population ``cor(y, Z_k)`` implied by the config: ``(sigma b)_k / sqrt(b' sigma b + s_y^2)``."""
    b = np.asarray(config.b)
    sb = config.sigma @ b
    return sb / np.sqrt(b @ sb + config.noise_sd_y**2)
