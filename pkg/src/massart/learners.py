"""Margin-based active learner, the Average baseline and one-shot hinge minimization."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .geometry import Band, angle, sample_in_band_batch, sample_unit_ball
from .noise import MassartInstance, label
from .solver import SolverOptions, minimize_hinge_in_ball

PAPER_LAMBDA = 1e-6
PAPER_AO = 0.038709
PAPER_C_BAND = 2.3463
PAPER_TAU_RATIO = math.sqrt(2.50306) * 3.6e-6 ** 0.25
DEFAULT_C_M = 5.0
NORM_GUARD = 1e-9


def round_count(epsilon: float, lam: float) -> int:
    """Rounds needed to shrink the angle scale by ``epsilon`` at rate ``1 - lam``."""
    return math.ceil(math.log(1.0 / epsilon) / -math.log1p(-lam))


@dataclass(frozen=True)
class Schedule:
    """Per-round constants of the margin-based learner.

    Round k (1-based) uses the hypothesis radius ``alpha(k)``, the band
    half-width ``band(k)`` around the previous hypothesis, the hinge scale
    ``tau(k)`` and ``labels(k)`` labeled examples.
    """

    d: int
    lam: float
    ao: float
    c_band: float
    tau_ratio: float
    s: int
    delta: float = 0.1
    c_m: float = DEFAULT_C_M
    kind: str = "custom"

    def __post_init__(self):
        if not 0.0 < self.lam < 1.0:
            raise ValueError(f"learning rate must lie in (0, 1), got {self.lam}")
        for name in ("ao", "c_band", "tau_ratio", "c_m"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.s < 1:
            raise ValueError("need at least one round")

    def alpha(self, k: int) -> float:
        return self.ao * math.pi * (1.0 - self.lam) ** (k - 1)

    def band(self, k: int) -> float:
        return self.c_band * self.alpha(k) / math.sqrt(self.d)

    def tau(self, k: int) -> float:
        return self.tau_ratio * self.band(k)

    def labels(self, k: int) -> int:
        return math.ceil(self.c_m * self.d * (self.d + math.log((k + k * k) / self.delta)))

    def rounds(self):
        for k in range(1, self.s + 1):
            yield k, self.alpha(k), self.band(k), self.tau(k), self.labels(k)

    def to_config(self) -> dict:
        return asdict(self)


def _check_eps_delta(epsilon, delta):
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")


def paper_schedule(d: int, epsilon: float, delta: float, c_m: float = DEFAULT_C_M) -> Schedule:
    """The constants under which the margin-based guarantee is proved (d > 20)."""
    _check_eps_delta(epsilon, delta)
    if not d > 20:
        raise ValueError("the proved constants need d > 20")
    return Schedule(d=d, lam=PAPER_LAMBDA, ao=PAPER_AO, c_band=PAPER_C_BAND,
                    tau_ratio=PAPER_TAU_RATIO, s=round_count(epsilon, PAPER_LAMBDA),
                    delta=delta, c_m=c_m, kind="paper")


def practical_schedule(d: int, epsilon: float, delta: float, lam: float = 0.5,
                       c_band: float = 1.5, tau_ratio: float = 0.5, m_scale: float = DEFAULT_C_M,
                       ao: float = PAPER_AO) -> Schedule:
    """Same template with desk-scale constants; carries no proved guarantee."""
    _check_eps_delta(epsilon, delta)
    if d < 2:
        raise ValueError("dimension must be >= 2")
    return Schedule(d=d, lam=lam, ao=ao, c_band=c_band, tau_ratio=tau_ratio,
                    s=round_count(epsilon, lam), delta=delta, c_m=m_scale, kind="practical")


class Oracle:
    """Unlabeled draws and label queries for one instance, with counters."""

    def __init__(self, instance: MassartInstance, rng: np.random.Generator):
        self.instance = instance
        self.rng = rng
        self.labels_used = 0
        self.unlabeled_drawn = 0

    @property
    def d(self) -> int:
        return self.instance.dimension

    def draw(self, n: int) -> np.ndarray:
        self.unlabeled_drawn += n
        return sample_unit_ball(self.d, self.rng, n)

    def draw_in_band(self, band: Band, n: int) -> np.ndarray:
        X, drawn = sample_in_band_batch(band, n, self.rng)
        self.unlabeled_drawn += drawn
        return X

    def query(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        self.labels_used += X.shape[0]
        return label(self.instance, X, self.rng)

    def sample(self, n: int):
        X = self.draw(n)
        return X, self.query(X)


@dataclass
class RoundRecord:
    k: int
    angle_to_target: float
    labels_used: int
    unlabeled_drawn: int
    hinge_achieved: float
    converged: bool
    alpha: float
    band: float
    tau: float
    flagged: bool = False
    center_distance: float = 0.0


@dataclass
class RunReport:
    final_w: np.ndarray
    per_round: list = field(default_factory=list)
    initial_angle: float = float("nan")

    @property
    def total_labels(self) -> int:
        return self.per_round[-1].labels_used if self.per_round else 0

    @property
    def total_unlabeled(self) -> int:
        return self.per_round[-1].unlabeled_drawn if self.per_round else 0

    @property
    def flagged(self) -> bool:
        return any(r.flagged for r in self.per_round)

    @property
    def final_angle(self) -> float:
        return self.per_round[-1].angle_to_target if self.per_round else self.initial_angle


def margin_based_learn(oracle: Oracle, schedule: Schedule, w0,
                       solver: SolverOptions | None = None) -> RunReport:
    """Run the margin-based localization learner from the initial guess ``w0``.

    Each round labels ``m_k`` points drawn from the band around the current
    hypothesis (rejected draws are never labeled), minimizes the tau-hinge
    loss over the ball of radius ``alpha_k`` around it, and renormalizes.
    Counts in the report are cumulative over rounds.
    """
    solver = solver or SolverOptions()
    if schedule.d != oracle.d:
        raise ValueError("schedule and oracle dimensions differ")
    w = np.asarray(w0, dtype=float)
    w = w / np.linalg.norm(w)
    target = oracle.instance.target
    report = RunReport(final_w=w, initial_angle=angle(w, target))
    labels_before = oracle.labels_used
    unlabeled_before = oracle.unlabeled_drawn
    for k, alpha_k, b, tau_k, m_k in schedule.rounds():
        band = Band(w, b)
        X = oracle.draw_in_band(band, m_k)
        y = oracle.query(X)
        sol = minimize_hinge_in_ball(X, y, tau_k, w, alpha_k, solver)
        moved = float(np.linalg.norm(sol.v - w))
        norm = np.linalg.norm(sol.v)
        flagged = not sol.converged
        if norm < NORM_GUARD:
            flagged = True
        else:
            w = sol.v / norm
        report.per_round.append(RoundRecord(
            k=k, angle_to_target=angle(w, target),
            labels_used=oracle.labels_used - labels_before,
            unlabeled_drawn=oracle.unlabeled_drawn - unlabeled_before,
            hinge_achieved=sol.achieved, converged=sol.converged,
            alpha=alpha_k, band=b, tau=tau_k, flagged=flagged, center_distance=moved))
    report.final_w = w
    return report


def average_learner(X, y) -> np.ndarray:
    """Mean of ``y_i x_i`` over the sample (not normalized)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] == 0:
        raise ValueError("empty sample")
    return np.asarray(y, dtype=float) @ X / X.shape[0]


def average_initializer(oracle: Oracle, m: int) -> np.ndarray:
    """Normalized Average over ``m`` fresh labeled examples."""
    X, y = oracle.sample(m)
    w = average_learner(X, y)
    return w / np.linalg.norm(w)


def one_shot_hinge(X, y, tau: float, solver: SolverOptions | None = None):
    """Minimize the tau-hinge loss over the unit ball and normalize.

    Returns ``(direction, solution)``; ``direction`` is None when the
    minimizer is (numerically) the zero vector.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    sol = minimize_hinge_in_ball(X, y, tau, np.zeros(X.shape[1]), 1.0, solver)
    norm = np.linalg.norm(sol.v)
    if norm < NORM_GUARD:
        return None, sol
    return sol.v / norm, sol
