"""Constrained tau-hinge minimization over a Euclidean ball.

Solves ``min_v mean_i max(0, 1 - y_i (v.x_i)/tau)`` subject to
``|v - center| <= radius`` with projected subgradient descent. The
objective is polyhedral, so a normalized step whose length decays
geometrically between epochs (each epoch restarting from the incumbent)
converges quickly in practice; the ergodic average of each epoch is also
tried as a candidate. Several restarts from random feasible points guard
against stalling on a kink.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SolverOptions:
    max_iters: int = 20_000
    suboptimality: float = 1e-6
    restarts: int = 5
    epoch_length: int = 60
    step_decay: float = 0.7
    min_step: float = 1e-10
    patience: int = 12
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1 or self.restarts < 1 or self.epoch_length < 1:
            raise ValueError("iteration counts must be positive")
        if not 0.0 < self.step_decay < 1.0:
            raise ValueError("step_decay must lie in (0, 1)")


@dataclass(frozen=True)
class HingeSolution:
    v: np.ndarray
    achieved: float
    converged: bool
    iterations: int
    restart: int


def project_to_ball(v, center, radius: float) -> np.ndarray:
    """Euclidean projection of ``v`` onto the closed ball ``B(center, radius)``."""
    v = np.asarray(v, dtype=float)
    center = np.asarray(center, dtype=float)
    diff = v - center
    dist = np.linalg.norm(diff)
    if dist <= radius:
        return v.copy()
    return center + diff * (radius / dist)


class _Objective:
    def __init__(self, X, y, tau):
        self.A = np.asarray(y, dtype=float)[:, None] * np.asarray(X, dtype=float) / tau
        self.m = self.A.shape[0]

    def value(self, v):
        return float(np.maximum(0.0, 1.0 - self.A @ v).sum() / self.m)

    def value_and_subgradient(self, v):
        slack = 1.0 - self.A @ v
        # zero subgradient contribution exactly at the kink
        active = (slack > 0.0).astype(float)
        return float(slack @ active) / self.m, -(active @ self.A) / self.m


def minimize_hinge_in_ball(X, y, tau: float, center, radius: float,
                           opts: SolverOptions | None = None) -> HingeSolution:
    """Approximately minimize the empirical tau-hinge loss over ``B(center, radius)``.

    The returned ``v`` is always feasible. A descent stops once the
    incumbent has improved by at most ``opts.suboptimality`` for
    ``opts.patience`` consecutive epochs, or once the step length falls
    below ``opts.min_step``. ``converged`` is False when the iteration budget
    ran out first; the best point found is returned regardless.
    """
    opts = opts or SolverOptions()
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] == 0:
        raise ValueError("empty sample")
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    center = np.asarray(center, dtype=float)
    obj = _Objective(X, y, tau)
    rng = np.random.default_rng(opts.seed)
    budget = max(opts.max_iters // opts.restarts, opts.epoch_length)

    best = None
    for r in range(opts.restarts):
        if r == 0:
            start = center.copy()
        else:
            u = rng.standard_normal(center.shape[0])
            u *= radius * rng.random() ** (1.0 / center.shape[0]) / np.linalg.norm(u)
            start = center + u
        sol = _descend(obj, start, center, radius, budget, opts, r)
        # lowest objective wins; ties keep the earlier restart
        if best is None or sol.achieved < best.achieved:
            best = sol
    return best


def _descend(obj, start, center, radius, budget, opts, restart):
    v = start
    f_best, g = obj.value_and_subgradient(v)
    v_best = v.copy()
    step = radius
    it = 0
    converged = False
    stale_epochs = 0
    while it < budget:
        f_epoch_start = f_best
        v = v_best.copy()
        acc = np.zeros_like(v)
        n_acc = 0
        for _ in range(opts.epoch_length):
            f, g = obj.value_and_subgradient(v)
            it += 1
            if f < f_best:
                f_best, v_best = f, v.copy()
            gnorm = np.linalg.norm(g)
            if gnorm == 0.0:
                # zero is a subgradient: v minimizes the unconstrained problem
                return HingeSolution(v_best, f_best, True, it, restart)
            v = project_to_ball(v - (step / gnorm) * g, center, radius)
            acc += v
            n_acc += 1
            if it >= budget:
                break
        avg = project_to_ball(acc / n_acc, center, radius)
        f_avg = obj.value(avg)
        if f_avg < f_best:
            f_best, v_best = f_avg, avg
        f_last = obj.value(v)
        if f_last < f_best:
            f_best, v_best = f_last, v.copy()
        if f_epoch_start - f_best <= opts.suboptimality:
            stale_epochs += 1
        else:
            stale_epochs = 0
        step *= opts.step_decay
        if stale_epochs >= opts.patience or (step < opts.min_step * radius and stale_epochs > 0):
            converged = True
            break
    return HingeSolution(v_best, f_best, converged, it, restart)
