"""Massart label oracles.

A :class:`MassartInstance` is a target halfspace plus a flip-probability
function bounded by ``(1 - beta) / 2``. Labels are ``sign(target . x)``
flipped independently with that probability; ``sign(0)`` is taken as +1
everywhere in the package.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import basis_vector, sample_unit_ball, unit_vector

FLIP_TOL = 1e-12


def sign(z) -> np.ndarray:
    """Sign with ``sign(0) = +1``, returned as int8 labels."""
    return np.where(np.asarray(z) >= 0, 1, -1).astype(np.int8)


@dataclass(frozen=True)
class MassartInstance:
    """Target direction, Massart parameter and a vectorized flip probability.

    ``flip_prob`` maps an ``(n, d)`` array to ``n`` probabilities. ``kind``
    and ``params`` only describe the instance for serialization.
    """

    target: np.ndarray
    beta: float
    flip_prob: Callable[[np.ndarray], np.ndarray]
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "target", unit_vector(self.target))
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")

    @property
    def dimension(self) -> int:
        return self.target.shape[0]

    @property
    def eta(self) -> float:
        """Largest flip probability the Massart condition allows."""
        return (1.0 - self.beta) / 2.0

    def flip_probabilities(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.broadcast_to(np.asarray(self.flip_prob(X), dtype=float), (X.shape[0],))

    def clean_labels(self, X) -> np.ndarray:
        return sign(np.asarray(X) @ self.target)

    def to_config(self) -> dict:
        return {"kind": self.kind, "beta": self.beta, "d": self.dimension, **self.params}


def label(instance: MassartInstance, x, rng: np.random.Generator):
    """Draw noisy label(s) for a point ``(d,)`` or a batch ``(n, d)``."""
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X2 = np.atleast_2d(X)
    y = instance.clean_labels(X2)
    flips = rng.random(X2.shape[0]) < instance.flip_probabilities(X2)
    y = np.where(flips, -y, y).astype(np.int8)
    return int(y[0]) if single else y


def check_massart(instance: MassartInstance, rng: np.random.Generator, n: int = 100_000) -> float:
    """Spot-check the flip bound on ``n`` random ball points.

    Returns the largest flip probability seen; raises if it exceeds
    ``(1 - beta)/2``.
    """
    X = sample_unit_ball(instance.dimension, rng, n)
    p = instance.flip_probabilities(X)
    worst = float(p.max())
    if worst > instance.eta + FLIP_TOL or p.min() < 0:
        raise ValueError(f"flip probability {worst} exceeds the Massart bound {instance.eta}")
    return worst


def make_noiseless(target) -> MassartInstance:
    return MassartInstance(target, 1.0, lambda X: np.zeros(X.shape[0]), kind="noiseless")


def make_rcn(target, eta: float) -> MassartInstance:
    """Random classification noise: every label flips with probability ``eta``."""
    if not 0.0 <= eta < 0.5:
        raise ValueError(f"RCN rate must lie in [0, 1/2), got {eta}")
    return MassartInstance(target, 1.0 - 2.0 * eta,
                           lambda X: np.full(X.shape[0], eta),
                           kind="rcn", params={"eta": eta})


def make_quadrant_adversary(beta: float, d: int = 2) -> MassartInstance:
    """Target e1; flip with probability ``(1-beta)/2`` exactly where ``x1*x2 < 0``."""
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    eta = (1.0 - beta) / 2.0

    def flip(X):
        return np.where(X[:, 0] * X[:, 1] < 0, eta, 0.0)

    return MassartInstance(basis_vector(d), beta, flip, kind="quadrant")


# wedge construction: w* = e1, competitor w at polar angle +alpha

REGION_A, REGION_B, REGION_D = "A", "B", "D"


def polar_angle(X) -> np.ndarray:
    """Counter-clockwise angle from e1 in [0, 2*pi) for 2-D points."""
    X = np.atleast_2d(X)
    return np.mod(np.arctan2(X[:, 1], X[:, 0]), 2 * math.pi)


def _check_wedge_alpha(alpha):
    if not 0.0 < alpha < math.pi / 3:
        raise ValueError(f"alpha must lie in (0, pi/3), got {alpha}")


def wedge_regions(alpha: float, X):
    """Vectorized region tags for the wedge construction.

    Returns ``(tags, in_c)`` with tags in {"A", "B", "D"} and a boolean for
    the double wedge C of half-angle alpha/2 around the target axis. Angles
    are reduced mod pi since the regions are symmetric about the origin.
    """
    psi = np.mod(polar_angle(X), math.pi)
    half = math.pi / 2
    in_a = (psi > half) & (psi < half + alpha)
    in_d = (psi > alpha / 2) & (psi < half)
    tags = np.where(in_a, REGION_A, np.where(in_d, REGION_D, REGION_B))
    in_c = (psi > math.pi - alpha / 2) | (psi < alpha / 2)
    return tags, in_c


def region_of(alpha: float, x):
    """Region tag of a single 2-D point and whether it lies in area C."""
    _check_wedge_alpha(alpha)
    x = np.asarray(x, dtype=float)
    if x.shape != (2,):
        raise ValueError("the wedge construction is two-dimensional")
    if not np.any(x):
        raise ValueError("the origin has no region")
    tags, in_c = wedge_regions(alpha, x[None, :])
    return str(tags[0]), bool(in_c[0])


def make_wedge_adversary(alpha: float, eta: float) -> MassartInstance:
    """Noise ``eta`` on areas A and B, deterministic labels on area D."""
    _check_wedge_alpha(alpha)
    if not 0.0 <= eta < 0.5:
        raise ValueError(f"eta must lie in [0, 1/2), got {eta}")

    def flip(X):
        psi = np.mod(polar_angle(X), math.pi)
        in_d = (psi > alpha / 2) & (psi < math.pi / 2)
        return np.where(in_d, 0.0, eta)

    return MassartInstance(basis_vector(2), 1.0 - 2.0 * eta, flip,
                           kind="wedge", params={"alpha": alpha, "eta": eta})


def wedge_competitor(alpha: float) -> np.ndarray:
    """The unit vector w at angle alpha from the target in the wedge construction."""
    return np.array([math.cos(alpha), math.sin(alpha)])


def clean_labels(X, target) -> np.ndarray:
    """Labels replaced by ``sign(target . x)``."""
    return sign(np.asarray(X, dtype=float) @ np.asarray(target, dtype=float))


def instance_from_config(cfg: dict) -> MassartInstance:
    """Build an instance from a ``{"kind": ..., ...}`` record."""
    kind = cfg.get("kind", "noiseless")
    d = int(cfg.get("d", 2))
    if kind == "noiseless":
        return make_noiseless(basis_vector(d))
    if kind == "rcn":
        if "eta" in cfg:
            eta = float(cfg["eta"])
        else:
            eta = (1.0 - float(cfg["beta"])) / 2.0
        return make_rcn(basis_vector(d), eta)
    if kind == "quadrant":
        return make_quadrant_adversary(float(cfg["beta"]), d)
    if kind == "wedge":
        if "eta" in cfg:
            eta = float(cfg["eta"])
        else:
            eta = (1.0 - float(cfg["beta"])) / 2.0
        return make_wedge_adversary(float(cfg["alpha"]), eta)
    raise ValueError(f"unknown noise kind {kind!r}")

