"""Closed forms for the two negative results.

Average under the quadrant adversary drifts to a fixed angle from the
target. For tau-hinge minimization on the two-dimensional wedge
distribution, the expected hinge loss of the target is split over angular
regions; all region integrals use coordinates where ``phi`` is the angle
from the target's decision line, so a point at radius ``z`` sits at
distance ``z sin(phi)`` from it.

Region integrals (one wedge each, uniform density ``1/pi`` on the disk):

* A: ``phi in (0, alpha)``, the disagreement wedge;
* B: ``phi in (alpha, (pi + alpha)/2)``;
* D: ``phi in (0, (pi - alpha)/2)``;
* C: ``phi in ((pi - alpha)/2, (pi + alpha)/2)``, the wedge of angle alpha
  centred on the target axis, so that ``A + B - D = C``.

``c*`` uses the clean label (hinge ``max(0, 1 - z sin(phi)/tau)``), ``d*``
the flipped one (``1 + z sin(phi)/tau``).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate

from .geometry import Band, basis_vector, sample_band_exact, sample_unit_ball
from .noise import label, make_quadrant_adversary, polar_angle, sign, wedge_competitor

QUAD_TOL = 1e-12


def average_drift_angle(beta: float) -> float:
    """Angle between the expected Average output and the target."""
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    return math.atan((1.0 - beta) / (1.0 + beta))


def average_excess_lower(beta: float):
    """Excess error of the drifted Average direction.

    Returns ``(angle_version, closed_version)`` where the first is
    ``beta * drift / pi`` and the second is ``beta (1-beta) / (pi (1+beta))``.
    Note the closed version exceeds the angle version for beta < 1 since
    ``atan(x) < x``.
    """
    theta = average_drift_angle(beta)
    return beta * theta / math.pi, beta * (1.0 - beta) / (math.pi * (1.0 + beta))


def _check_alpha(alpha, upper=math.pi / 3, inclusive=False):
    ok = 0.0 < alpha <= upper if inclusive else 0.0 < alpha < upper
    if not ok:
        raise ValueError(f"alpha must lie in (0, pi/3), got {alpha}")


def _radial_clean(s, tau):
    # integral_0^1 max(0, 1 - z s / tau) z dz for s >= 0
    if s <= tau:
        return 0.5 - s / (3.0 * tau)
    return tau * tau / (6.0 * s * s)


def _radial_noisy(s, tau):
    return 0.5 + s / (3.0 * tau)


def _region(f, lo, hi, tau):
    # the clean integrand has a kink where sin(phi) = tau
    points = None
    if tau < 1.0:
        knots = [math.asin(tau), math.pi - math.asin(tau)]
        points = [p for p in knots if lo < p < hi] or None
    val, _ = integrate.quad(lambda p: f(math.sin(p), tau), lo, hi, points=points,
                            epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
    return val / math.pi


@dataclass(frozen=True)
class HingeAreas:
    cA: float
    dA: float
    cB: float
    dB: float
    cC: float
    dC: float
    cD: float
    dD: float
    cT: float

    def as_dict(self) -> dict:
        return asdict(self)


def hinge_areas(alpha: float, tau: float) -> HingeAreas:
    """Expected tau-hinge contributions of the target on each region.

    For ``tau >= 1`` every hinge is unclipped and the closed forms are
    used; otherwise each region is integrated numerically after doing the
    radial integral exactly. ``cT`` is the triangle bound on ``cC``, exact
    when ``tau <= cos(alpha/2)``.
    """
    _check_alpha(alpha)
    if not tau > 0:
        raise ValueError("tau must be positive")
    lo_b, hi_b = alpha, (math.pi + alpha) / 2
    hi_d = (math.pi - alpha) / 2
    cT = tau * tau / (3.0 * math.pi) * math.tan(alpha / 2)
    if tau >= 1.0:
        k = 1.0 / (3.0 * math.pi * tau)
        half = 1.0 / (2.0 * math.pi)
        cos_ab = 1.0 - math.cos(alpha)
        sin_b = math.cos(alpha) + math.sin(alpha / 2)
        sin_d = 1.0 - math.sin(alpha / 2)
        sin_c = 2.0 * math.sin(alpha / 2)
        return HingeAreas(
            cA=half * alpha - k * cos_ab, dA=half * alpha + k * cos_ab,
            cB=half * (hi_b - lo_b) - k * sin_b, dB=half * (hi_b - lo_b) + k * sin_b,
            cC=half * alpha - k * sin_c, dC=half * alpha + k * sin_c,
            cD=half * hi_d - k * sin_d, dD=half * hi_d + k * sin_d,
            cT=cT)
    return HingeAreas(
        cA=_region(_radial_clean, 0.0, alpha, tau), dA=_region(_radial_noisy, 0.0, alpha, tau),
        cB=_region(_radial_clean, lo_b, hi_b, tau), dB=_region(_radial_noisy, lo_b, hi_b, tau),
        cC=_region(_radial_clean, hi_d, hi_b, tau), dC=_region(_radial_noisy, hi_d, hi_b, tau),
        cD=_region(_radial_clean, 0.0, hi_d, tau), dD=_region(_radial_noisy, 0.0, hi_d, tau),
        cT=cT)


def eta1(alpha: float) -> float:
    """Noise level above which the rotated direction wins for every tau >= 1."""
    _check_alpha(alpha, inclusive=True)
    a = 1.0 - math.cos(alpha)
    return a / (a + 2.0 * math.sin(alpha / 2))


def _g(alpha, tau):
    return tau * alpha / 2 - tau ** 3 / 3 * math.tan(alpha / 2)


def eta2(alpha: float, tau: float) -> float:
    """Noise level above which the rotated direction certifiably wins for tau <= 1.

    Built from the closed form of ``dA - cA`` and the lower bound
    ``dC - cC >= dC - cT``.
    """
    _check_alpha(alpha)
    if not 0.0 < tau <= 1.0:
        raise ValueError(f"tau must lie in (0, 1], got {tau}")
    a = 2.0 / 3.0 * (1.0 - math.cos(alpha))
    denom = a + 2.0 / 3.0 * math.sin(alpha / 2) + _g(alpha, tau)
    if not denom > 0:
        raise ArithmeticError("non-positive denominator")
    return a / denom


def eta2_printed(alpha: float, tau: float) -> float:
    """Variant with ``sin(alpha)`` where :func:`eta2` has ``sin(alpha/2)``.

    Kept for comparison only: it is smaller than the threshold its own
    integrals support, so a gap certified with it may not hold.
    """
    _check_alpha(alpha)
    if not 0.0 < tau <= 1.0:
        raise ValueError(f"tau must lie in (0, 1], got {tau}")
    a = 2.0 / 3.0 * (1.0 - math.cos(alpha))
    return a / (a + 2.0 / 3.0 * math.sin(alpha) + _g(alpha, tau))


def gap_from_areas(areas: HingeAreas, eta: float) -> float:
    """``L_tau(w) - L_tau(w*)`` for unit w, w* from the region integrals."""
    return 2.0 * ((1.0 - eta) * (areas.dA - areas.cA) - eta * (areas.dC - areas.cC))


def _check_eta(eta):
    if not 0.0 <= eta < 0.5:
        raise ValueError(f"eta must lie in [0, 1/2), got {eta}")


def hinge_gap(alpha: float, eta: float, tau: float) -> float:
    """Expected tau-hinge loss of the rotated direction minus that of the target.

    Negative means the hinge minimizer prefers the wrong direction.
    """
    _check_eta(eta)
    return gap_from_areas(hinge_areas(alpha, tau), eta)


def hinge_gap_upper(alpha: float, eta: float, tau: float) -> float:
    """Closed-form upper bound on :func:`hinge_gap`, exact for ``tau >= 1``.

    Uses the unclipped ``dA - cA`` (clipping only lowers it) and ``cT`` in
    place of ``cC``. A negative value proves the gap negative.
    """
    _check_eta(eta)
    _check_alpha(alpha)
    da = 2.0 / (3.0 * math.pi * tau) * (1.0 - math.cos(alpha))
    if tau >= 1.0:
        dc = 4.0 / (3.0 * math.pi * tau) * math.sin(alpha / 2)
    else:
        dc = (alpha / 2 + 2.0 / (3.0 * tau) * math.sin(alpha / 2)
              - tau * tau / 3.0 * math.tan(alpha / 2)) / math.pi
    return 2.0 * ((1.0 - eta) * da - eta * dc)


def certify_gap(alpha: float, eta: float, tau: float) -> dict:
    """Gap value with a certification status.

    ``proved_negative`` when the closed-form upper bound is negative,
    ``positive`` / ``negative`` when only the integrated value says so.
    """
    gap = hinge_gap(alpha, eta, tau)
    upper = hinge_gap_upper(alpha, eta, tau)
    if upper < 0:
        status = "proved_negative"
    else:
        status = "negative" if gap < 0 else "positive"
    return {"gap": gap, "upper_bound": upper, "status": status}


def threshold_eta(alpha: float, tau: float) -> float:
    """Noise level at which the integrated gap changes sign."""
    a = hinge_areas(alpha, tau)
    da, dc = a.dA - a.cA, a.dC - a.cC
    return da / (da + dc)


def choose_alpha(tau0: float, eta0: float, rtol: float = 1e-6) -> float:
    """Largest angle (to ``rtol``) whose thresholds sit below ``eta0/2``.

    The rotated direction then beats the target in tau-hinge loss for
    every ``tau >= tau0`` on the wedge distribution with noise ``eta0``.
    eta2 is not monotone in tau near tau = 1 for larger angles, so both
    ends of ``[tau0, 1]`` are checked.
    """
    if not tau0 > 0:
        raise ValueError("tau0 must be positive")
    if not 0.0 < eta0 < 0.5:
        raise ValueError("eta0 must lie in (0, 1/2)")
    target = eta0 / 2
    tau_c = min(tau0, 1.0)

    def worst(a):
        val = eta1(a)
        if tau0 < 1.0:
            # g(tau) is concave, so eta2 peaks at an end of [tau0, 1]
            val = max(val, eta2(a, tau_c), eta2(a, 1.0))
        return val

    hi = math.pi / 3 * (1 - 1e-12)
    if worst(hi) < target:
        return hi
    lo = hi
    while worst(lo) >= target:
        lo /= 2
    while hi - lo > rtol * lo:
        mid = 0.5 * (lo + hi)
        if worst(mid) < target:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass
class HingeGapReport:
    alpha: float
    eta: float
    tau: float
    cA: float
    dA: float
    cB: float
    dB: float
    cC: float
    dC: float
    cT: float
    gap: float
    eta1: float
    eta2: float
    cD: float = float("nan")
    dD: float = float("nan")
    stderr: dict = field(default_factory=dict)
    n: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def closed_form_report(alpha: float, eta: float, tau: float) -> HingeGapReport:
    a = hinge_areas(alpha, tau)
    return HingeGapReport(alpha=alpha, eta=eta, tau=tau, cA=a.cA, dA=a.dA, cB=a.cB, dB=a.dB,
                          cC=a.cC, dC=a.dC, cT=a.cT, gap=gap_from_areas(a, eta),
                          eta1=eta1(alpha), eta2=eta2(alpha, min(tau, 1.0)), cD=a.cD, dD=a.dD)


def mc_hinge_by_region(alpha: float, eta: float, tau: float, n: int,
                       rng: np.random.Generator, chunk: int = 1_000_000) -> HingeGapReport:
    """Monte-Carlo estimates of the region integrals and the hinge gap.

    Each region is sampled as the union of its two symmetric wedges and
    halved. ``gap`` averages the label-conditional expectation
    ``E[l(w) - l(w*) | x]`` under the wedge distribution, so only the
    points are random. Standard errors are in ``stderr``.
    """
    _check_alpha(alpha)
    _check_eta(eta)
    if n < 2:
        raise ValueError("need at least two samples")
    target = np.array([1.0, 0.0])
    comp = wedge_competitor(alpha)
    names = ["cA", "dA", "cB", "dB", "cC", "dC", "cD", "dD", "gap"]
    sums = dict.fromkeys(names, 0.0)
    sq = dict.fromkeys(names, 0.0)
    left = int(n)
    while left > 0:
        k = min(chunk, left)
        X = sample_unit_ball(2, rng, k)
        psi = np.mod(polar_angle(X), math.pi)
        in_a = (psi > math.pi / 2) & (psi < math.pi / 2 + alpha)
        in_d = (psi > alpha / 2) & (psi < math.pi / 2)
        in_b = ~(in_a | in_d)
        in_c = (psi > math.pi - alpha / 2) | (psi < alpha / 2)
        dist = np.abs(X @ target) / tau
        clean = np.maximum(0.0, 1.0 - dist)
        noisy = 1.0 + dist
        vals = {}
        for tag, mask in (("A", in_a), ("B", in_b), ("C", in_c), ("D", in_d)):
            vals["c" + tag] = np.where(mask, clean, 0.0) / 2
            vals["d" + tag] = np.where(mask, noisy, 0.0) / 2
        y = sign(X @ target).astype(float)
        p = np.where(in_d, 0.0, eta)
        m_w = y * (X @ comp) / tau
        m_t = y * (X @ target) / tau
        exp_w = (1 - p) * np.maximum(0.0, 1 - m_w) + p * np.maximum(0.0, 1 + m_w)
        exp_t = (1 - p) * np.maximum(0.0, 1 - m_t) + p * np.maximum(0.0, 1 + m_t)
        vals["gap"] = exp_w - exp_t
        for key in names:
            sums[key] += vals[key].sum()
            sq[key] += (vals[key] ** 2).sum()
        left -= k
    est = {k: sums[k] / n for k in names}
    se = {k: math.sqrt(max(sq[k] / n - est[k] ** 2, 0.0) / n) for k in names}
    cT = tau * tau / (3.0 * math.pi) * math.tan(alpha / 2)
    return HingeGapReport(alpha=alpha, eta=eta, tau=tau, cA=est["cA"], dA=est["dA"],
                          cB=est["cB"], dB=est["dB"], cC=est["cC"], dC=est["dC"], cT=cT,
                          gap=est["gap"], eta1=eta1(alpha), eta2=eta2(alpha, min(tau, 1.0)),
                          cD=est["cD"], dD=est["dD"], stderr=se, n=int(n))


def average_in_band_angle(beta: float, d: int, b: float, m: int,
                          rng: np.random.Generator) -> float:
    """Angle to the target of Average run inside the band ``|x1| < b``.

    Labels follow the quadrant adversary on the first two coordinates.
    Narrow bands shrink the signal component while the noise-induced
    drift along e2 stays put, so the angle grows as ``b`` decreases.
    Illustrative only; no bound is asserted.
    """
    inst = make_quadrant_adversary(beta, d)
    X = sample_band_exact(Band(basis_vector(d), b), m, rng)
    w = np.asarray(label(inst, X, rng), dtype=float) @ X
    w /= np.linalg.norm(w)
    return float(np.arccos(np.clip(w[0], -1.0, 1.0)))
