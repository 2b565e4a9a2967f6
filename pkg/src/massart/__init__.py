"""Margin-based active learning of halfspaces under Massart noise.

Modules
-------
geometry
    Uniform-ball and band sampling, band-mass integrals.
noise
    Massart label oracles (RCN, quadrant and wedge adversaries).
losses
    tau-hinge and 0/1 losses, excess-error estimation.
solver
    Projected subgradient minimization of the hinge loss over a ball.
learners
    The margin-based learner, Average and one-shot hinge minimization.
lower_bounds
    Closed forms for the Average drift and hinge inconsistency.
verify
    Monte-Carlo checks of the constants used in the learner's analysis.
"""
from .geometry import Band, angle, sample_in_band, sample_unit_ball
from .learners import (Oracle, RunReport, Schedule, average_learner, margin_based_learn,
                       one_shot_hinge, paper_schedule, practical_schedule)
from .noise import (MassartInstance, label, make_noiseless, make_quadrant_adversary, make_rcn,
                    make_wedge_adversary)
from .solver import SolverOptions, minimize_hinge_in_ball

__version__ = "0.1.0"

__all__ = [
    "Band", "MassartInstance", "Oracle", "RunReport", "Schedule", "SolverOptions", "angle",
    "average_learner", "label", "make_noiseless", "make_quadrant_adversary", "make_rcn",
    "make_wedge_adversary", "margin_based_learn", "minimize_hinge_in_ball", "one_shot_hinge",
    "paper_schedule", "practical_schedule", "sample_in_band", "sample_unit_ball",
]
