"""Vector math and sampling on the uniform unit ball.

Hypotheses and targets are unit vectors stored as 1-D float arrays; batches
of points are ``(n, d)`` arrays. Every sampler takes an explicit
:class:`numpy.random.Generator` so runs are reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

UNIT_TOL = 1e-9
BALL_TOL = 1e-12
MAX_BAND_DRAWS = 10**9
_BATCH = 65536


class InvalidDimensionError(ValueError):
    pass


class PathologicalBandError(RuntimeError):
    """Raised when band rejection sampling exceeds its draw cap."""


def check_dimension(d: int) -> int:
    if int(d) != d or d < 2:
        raise InvalidDimensionError(f"dimension must be an integer >= 2, got {d!r}")
    return int(d)


def unit_vector(coords) -> np.ndarray:
    """Return ``coords`` as a float array after checking it has unit norm."""
    v = np.asarray(coords, dtype=float)
    if v.ndim != 1:
        raise ValueError("a unit vector must be one-dimensional")
    check_dimension(v.shape[0])
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > UNIT_TOL:
        raise ValueError(f"vector norm {norm!r} is not 1 within {UNIT_TOL}")
    return v


def normalize(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return v / norm


def basis_vector(d: int, i: int = 0) -> np.ndarray:
    e = np.zeros(check_dimension(d))
    e[i] = 1.0
    return e


def rotate_towards(u, angle: float, direction=None, rng=None) -> np.ndarray:
    """Unit vector at ``angle`` from ``u`` in the plane of ``u`` and ``direction``.

    ``direction`` defaults to a uniformly random direction orthogonal to ``u``
    drawn from ``rng``.
    """
    u = np.asarray(u, dtype=float)
    if direction is None:
        if rng is None:
            raise ValueError("need either a direction or an rng")
        direction = rng.standard_normal(u.shape[0])
    direction = np.asarray(direction, dtype=float)
    perp = direction - (direction @ u) * u
    perp = normalize(perp)
    return math.cos(angle) * u + math.sin(angle) * perp


def angle(u, v) -> float:
    """Angle in radians between two unit vectors, via clamped arccos."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return float(np.arccos(np.clip(u @ v, -1.0, 1.0)))


def sample_unit_ball(d: int, rng: np.random.Generator, n: int | None = None) -> np.ndarray:
    """Uniform draw(s) from the d-dimensional unit ball.

    The direction is a normalized isotropic Gaussian and the radius is
    ``U ** (1/d)``, so ``P(|x| <= r) = r**d``. Returns shape ``(d,)`` when
    ``n`` is None, else ``(n, d)``.
    """
    d = check_dimension(d)
    size = 1 if n is None else int(n)
    g = rng.standard_normal((size, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = rng.random(size) ** (1.0 / d)
    x = g * r[:, None]
    return x[0] if n is None else x


@dataclass(frozen=True)
class Band:
    """The slab ``{x : |center . x| < half_width}``."""

    center: np.ndarray
    half_width: float

    def __post_init__(self):
        object.__setattr__(self, "center", unit_vector(self.center))
        if not 0.0 < self.half_width:
            raise ValueError(f"band half-width must be positive, got {self.half_width}")

    @property
    def dimension(self) -> int:
        return self.center.shape[0]

    def contains(self, x) -> np.ndarray:
        return np.abs(np.asarray(x) @ self.center) < self.half_width


def sample_in_band(band: Band, d: int, rng: np.random.Generator,
                   max_draws: int = MAX_BAND_DRAWS):
    """Rejection-sample one uniform-ball point inside ``band``.

    Returns ``(x, rejected_count)``. A band of width >= 1 covers the whole
    ball, so nothing is ever rejected there.
    """
    if band.dimension != d:
        raise ValueError("band dimension does not match d")
    x, drawn = sample_in_band_batch(band, 1, rng, max_draws=max_draws)
    return x[0], drawn - 1


def sample_in_band_batch(band: Band, n: int, rng: np.random.Generator,
                         max_draws: int = MAX_BAND_DRAWS):
    """Draw ball points one stream at a time until ``n`` land in ``band``.

    Returns ``(X, drawn)`` where ``drawn`` counts every ball draw up to and
    including the n-th accepted one, exactly as a one-at-a-time sampler
    would.
    """
    d = band.dimension
    accepted = []
    need = int(n)
    drawn = 0
    hits = 0
    while need > 0:
        # size the next batch from the acceptance rate seen so far
        rate = (hits + 1) / (drawn + 2)
        batch = int(min(_BATCH, max(16, 1.25 * need / rate)))
        x = sample_unit_ball(d, rng, batch)
        idx = np.flatnonzero(band.contains(x))
        hits += idx.size
        if idx.size >= need:
            idx = idx[:need]
            drawn += int(idx[-1]) + 1
        else:
            drawn += batch
        if drawn > max_draws and need > idx.size:
            raise PathologicalBandError(
                f"more than {max_draws} draws without filling the band "
                f"(half-width {band.half_width})")
        accepted.append(x[idx])
        need -= idx.size
    X = np.concatenate(accepted) if accepted else np.empty((0, d))
    return X, drawn


def sample_band_exact(band: Band, n: int, rng: np.random.Generator) -> np.ndarray:
    """Sample the band-conditioned uniform distribution without rejecting
    in d dimensions.

    The projection ``z = center . x`` has density proportional to
    ``(1 - z^2)^((d-1)/2)`` on ``(-b, b)``; given ``z`` the rest of ``x`` is
    uniform on the (d-1)-ball of radius ``sqrt(1 - z^2)`` orthogonal to the
    center. Used by the Monte-Carlo verifiers where draw counts don't matter.
    """
    d = band.dimension
    b = min(band.half_width, 1.0)
    z = sample_band_projection(d, b, int(n), rng)
    g = rng.standard_normal((int(n), d))
    g -= np.outer(g @ band.center, band.center)
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = rng.random(int(n)) ** (1.0 / (d - 1)) * np.sqrt(1.0 - z * z)
    return z[:, None] * band.center + r[:, None] * g


def sample_band_projection(d: int, b: float, n: int, rng: np.random.Generator) -> np.ndarray:
    # proposal uniform on (-b, b); acceptance >= (1 - b^2)^((d-1)/2)
    out = np.empty(n)
    filled = 0
    expo = (d - 1) / 2.0
    while filled < n:
        k = max(int(1.2 * (n - filled)) + 16, 64)
        z = rng.uniform(-b, b, k)
        keep = z[rng.random(k) < (1.0 - z * z) ** expo]
        take = min(keep.size, n - filled)
        out[filled:filled + take] = keep[:take]
        filled += take
    return out


def volume_ratio(d: int) -> float:
    """``V_{d-1} / V_d`` for unit balls, via log-gamma."""
    d = check_dimension(d)
    return math.exp(special.gammaln(d / 2 + 1) - special.gammaln((d + 1) / 2)) / math.sqrt(math.pi)


def ball_volume(d: int) -> float:
    return math.exp((d / 2) * math.log(math.pi) - special.gammaln(d / 2 + 1))


def band_integral(d: int, a: float, b: float) -> float:
    """``integral_a^b (1 - z^2)^((d-1)/2) dz`` with the range clipped to [-1, 1]."""
    a, b = max(a, -1.0), min(b, 1.0)
    if a >= b:
        return 0.0
    val, _ = integrate.quad(lambda z: (1.0 - z * z) ** ((d - 1) / 2.0), a, b,
                            epsabs=1e-10, epsrel=1e-12, limit=200)
    return float(val)


def band_mass(d: int, a: float, b: float) -> float:
    """``P(a <= u . x <= b)`` for x uniform on the d-ball and any unit u."""
    return volume_ratio(d) * band_integral(d, a, b)


def band_mass_bounds(d: int, a: float, b: float, C: float):
    """Lower/upper bracket on the mass of ``{a <= u . x <= b}`` plus its exact value.

    Valid for ``a, b`` in ``[-C/sqrt(d), C/sqrt(d)]`` with ``C < d/2``:
    ``|b-a| 2^-C V_{d-1}/V_d <= mass <= |b-a| V_{d-1}/V_d``.
    """
    d = check_dimension(d)
    lim = C / math.sqrt(d)
    if not C < d / 2:
        raise ValueError(f"need C < d/2, got C={C}, d={d}")
    if not (-lim - 1e-15 <= a <= lim + 1e-15 and -lim - 1e-15 <= b <= lim + 1e-15):
        raise ValueError(f"endpoints must lie in [-C/sqrt(d), C/sqrt(d)] = [{-lim}, {lim}]")
    if a > b:
        raise ValueError("need a <= b")
    ratio = volume_ratio(d)
    width = abs(b - a)
    return width * 2.0 ** (-C) * ratio, width * ratio, ratio * band_integral(d, a, b)


def disagreement_outside_band_bound(d: int, alpha: float, c: float) -> float:
    """Upper bound on ``P(sign(u.x) != sign(w.x), |u.x| > c*alpha/sqrt(d))``
    for unit u, w at angle ``alpha``."""
    if not d > 2:
        raise ValueError("bound requires d > 2")
    if not 0.0 <= alpha < math.pi / 2:
        raise ValueError("alpha must lie in [0, pi/2)")
    if c < 1:
        raise ValueError("bound requires c >= 1")
    return alpha / math.pi * math.exp(-c * c * (d - 2) / (2.0 * d))
