"""Hinge and 0/1 losses, plus excess-error estimators for the uniform ball."""
from __future__ import annotations

import math

import numpy as np

from .geometry import angle, sample_unit_ball
from .noise import MassartInstance, sign


def _check_tau(tau):
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")


def hinge(w, x, y, tau: float):
    """``max(0, 1 - y (w.x) / tau)``; ``w`` need not be a unit vector.

    Works on a single example or elementwise on ``(n, d)`` / ``(n,)`` arrays.
    """
    _check_tau(tau)
    margin = np.asarray(y) * (np.asarray(x, dtype=float) @ np.asarray(w, dtype=float))
    return np.maximum(0.0, 1.0 - margin / tau)


def empirical_hinge(w, X, y, tau: float) -> float:
    """Mean tau-hinge loss of ``w`` over the labeled sample ``(X, y)``."""
    X = np.atleast_2d(X)
    if X.shape[0] == 0:
        raise ValueError("empty sample")
    return float(np.mean(hinge(w, X, y, tau)))


def empirical_01(w, X, y) -> float:
    """Fraction of the sample where ``sign(w.x) != y``."""
    X = np.atleast_2d(X)
    if X.shape[0] == 0:
        raise ValueError("empty sample")
    return float(np.mean(sign(X @ np.asarray(w, dtype=float)) != np.asarray(y)))


def true_error_uniform(w, target) -> float:
    """Clean 0/1 error of ``w`` under the uniform ball: ``angle / pi``."""
    return angle(w, target) / math.pi


def excess_error_mc(w, instance: MassartInstance, n: int, rng: np.random.Generator,
                    chunk: int = 1_000_000):
    """Monte-Carlo estimate of ``err(w) - err(target)`` under ``instance``.

    Averages ``(1 - 2 eta(x)) 1{sign(w.x) != sign(target.x)}`` over uniform
    ball draws, which has the same mean as differencing the two noisy errors
    but far less variance. Returns ``(estimate, standard_error)``.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    w = np.asarray(w, dtype=float)
    total = 0.0
    total_sq = 0.0
    left = int(n)
    while left > 0:
        k = min(chunk, left)
        X = sample_unit_ball(instance.dimension, rng, k)
        disagree = sign(X @ w) != sign(X @ instance.target)
        vals = np.where(disagree, 1.0 - 2.0 * instance.flip_probabilities(X), 0.0)
        total += vals.sum()
        total_sq += (vals * vals).sum()
        left -= k
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0)
    return mean, math.sqrt(var / n)
