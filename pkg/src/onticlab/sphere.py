"""Geometry of the ontic sphere: coordinates, sampling, caps and their overlaps.

The pole of the spherical coordinates is the propagation axis ``y``. The
azimuth ``mu`` is measured in the ``x``-``z`` plane from ``x`` towards ``z``,
so an in-plane setting with angle ``alpha`` has azimuth ``mu = alpha``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

TWO_PI = 2.0 * np.pi
POLE = np.array([0.0, 1.0, 0.0])


@dataclass(frozen=True)
class OntPoint:
    """Ontic variable as (azimuth, polar angle); fields may be arrays of samples."""

    mu: np.ndarray
    tau: np.ndarray

    @property
    def vector(self) -> np.ndarray:
        mu = np.asarray(self.mu, dtype=float)
        tau = np.asarray(self.tau, dtype=float)
        s = np.sin(tau)
        return np.stack(np.broadcast_arrays(s * np.cos(mu), np.cos(tau), s * np.sin(mu)), axis=-1)

    @classmethod
    def from_vector(cls, v) -> "OntPoint":
        v = np.asarray(v, dtype=float)
        v = v / np.linalg.norm(v, axis=-1, keepdims=True)
        tau = np.arccos(np.clip(v[..., 1], -1.0, 1.0))
        mu = np.arctan2(v[..., 2], v[..., 0]) % TWO_PI
        return cls(mu, tau)

    def __len__(self):
        return int(np.size(self.mu))


@dataclass(frozen=True)
class Cap:
    """Spherical cap ``{v : axis . v >= cos(half_angle)}``."""

    axis: tuple
    half_angle: float

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        axis = axis / np.linalg.norm(axis)
        object.__setattr__(self, "axis", tuple(float(c) for c in axis))
        if not (0.0 <= self.half_angle <= np.pi):
            raise ValueError(f"half_angle must lie in [0, pi], got {self.half_angle!r}")

    def contains(self, v) -> np.ndarray:
        return np.asarray(v) @ np.array(self.axis) >= np.cos(self.half_angle)

    @property
    def area_fraction(self) -> float:
        return 0.5 * (1.0 - np.cos(self.half_angle))


@dataclass
class RngStream:
    """Seeded random stream; ``(seed, stream_id)`` fixes the whole sequence.

    The stream is stateful: successive draws continue the sequence. Use
    :meth:`child` to derive independent sub-streams for parallel work.
    """

    seed: int
    stream_id: int | tuple = 0
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        key = self.stream_id if isinstance(self.stream_id, tuple) else (self.stream_id,)
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=tuple(int(k) for k in key))
        self._gen = np.random.default_rng(ss)

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def child(self, index: int) -> "RngStream":
        key = self.stream_id if isinstance(self.stream_id, tuple) else (self.stream_id,)
        return RngStream(self.seed, key + (int(index),))


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo mean with its standard error."""

    mean: float
    stderr: float
    count: int
    seed: int

    @classmethod
    def from_samples(cls, values, seed: int) -> "Estimate":
        values = np.asarray(values, dtype=float)
        n = values.size
        if n == 0:
            raise ValueError("no samples")
        sd = values.std(ddof=1) if n > 1 else 0.0
        return cls(float(values.mean()), float(sd / math.sqrt(n)), n, seed)

    def compatible(self, value: float, nsigma: float = 4.0, floor: float = 1e-12) -> bool:
        return abs(self.mean - value) <= nsigma * self.stderr + floor


def sample_uniform(rng: RngStream, n: int = 1) -> OntPoint:
    """Uniform points on the sphere: mu uniform, cos(tau) uniform."""
    g = rng.generator
    mu = g.uniform(0.0, TWO_PI, n)
    tau = np.arccos(g.uniform(-1.0, 1.0, n))
    return OntPoint(mu, tau)


def sample_mu_given_tau(rng: RngStream, tau: float, n: int = 1) -> OntPoint:
    if not (0.0 <= tau <= np.pi):
        raise ValueError(f"tau must lie in [0, pi], got {tau!r}")
    mu = rng.generator.uniform(0.0, TWO_PI, n)
    return OntPoint(mu, np.full(n, float(tau)))


def arc_half_width(cos_half_angle, sin_tau) -> np.ndarray:
    """Half-width of the arc of the circle at polar angle tau inside an in-plane cap.

    A point at azimuth offset ``d`` from the cap axis is inside when
    ``sin(tau) cos(d) >= cos(h)``.
    """
    c = np.asarray(cos_half_angle, dtype=float)
    s = np.asarray(sin_tau, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(s > 0, c / np.where(s > 0, s, 1.0), np.where(c > 0, np.inf, -np.inf))
    return np.arccos(np.clip(ratio, -1.0, 1.0))


def _check_in_plane(cap: Cap):
    if abs(cap.axis[1]) > 1e-12:
        raise ValueError("cap axis must be orthogonal to the pole")


def azimuthal_cap_fraction(cap: Cap, tau) -> np.ndarray:
    """Fraction of the mu-circle at polar angle ``tau`` lying inside ``cap``."""
    _check_in_plane(cap)
    return arc_half_width(np.cos(cap.half_angle), np.sin(tau)) / np.pi


def arc_overlap(w1, w2, d) -> np.ndarray:
    """Length of the intersection of two arcs of half-widths w1, w2 whose centres are d apart."""
    w1, w2, d = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (w1, w2, d)))
    total = np.zeros(w1.shape)
    for shift in (-TWO_PI, 0.0, TWO_PI):
        c = d + shift
        lo = np.maximum(-w1, c - w2)
        hi = np.minimum(w1, c + w2)
        total += np.maximum(hi - lo, 0.0)
    return total


def angle_between(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    # atan2 form keeps precision near 0 and pi
    return float(np.arctan2(np.linalg.norm(np.cross(u, v)), np.dot(u, v)))


def _band_edges(half_angle: float) -> float:
    """Polar angle in [0, pi/2] where an in-plane cap stops meeting the mu-circle."""
    return abs(0.5 * np.pi - half_angle)


def _overlap_breakpoints(h1: float, h2: float, omega: float, grid: int = 1025) -> list[float]:
    c1, c2 = np.cos(h1), np.cos(h2)
    pts = {0.0, 0.5 * np.pi, _band_edges(h1), _band_edges(h2)}

    def kinks(t):
        s = np.sin(t)
        w1, w2 = arc_half_width(c1, s), arc_half_width(c2, s)
        return np.stack([w1 + w2 - omega, np.abs(w1 - w2) - omega, w1 + w2 + omega - TWO_PI])

    # band edges split the search grid so nearby roots on either side are not paired up
    ts = np.union1d(np.linspace(0.0, 0.5 * np.pi, grid), sorted(pts))
    vals = kinks(ts)
    for row in range(vals.shape[0]):
        sgn = np.sign(vals[row])
        for i in np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]:
            root = optimize.brentq(lambda t: kinks(t)[row], ts[i], ts[i + 1], xtol=1e-15)
            pts.add(float(root))
    return sorted(p for p in pts if 0.0 <= p <= 0.5 * np.pi)


def _half_width_scalar(c: float, s: float) -> float:
    if s <= 0.0:
        return 0.0 if c > 0 else math.pi
    return math.acos(min(1.0, max(-1.0, c / s)))


def _arc_overlap_scalar(w1: float, w2: float, d: float) -> float:
    total = 0.0
    for shift in (-2.0 * math.pi, 0.0, 2.0 * math.pi):
        c = d + shift
        span = min(w1, c + w2) - max(-w1, c - w2)
        if span > 0.0:
            total += span
    return total


def cap_overlap_with_error(cap1: Cap, cap2: Cap) -> tuple[float, float]:
    """Sphere fraction inside both caps and the quadrature error estimate.

    Both axes are rotated into a common plane orthogonal to an auxiliary pole,
    where the overlap reduces to an integral over the polar angle of the
    arc intersection length. The integrand is symmetric about tau = pi/2.
    """
    h1, h2 = cap1.half_angle, cap2.half_angle
    omega = angle_between(cap1.axis, cap2.axis)
    c1, c2 = np.cos(h1), np.cos(h2)

    def integrand(t):
        s = math.sin(t)
        return _arc_overlap_scalar(_half_width_scalar(c1, s), _half_width_scalar(c2, s), omega) * s

    pts = _overlap_breakpoints(h1, h2, omega)
    total = 0.0
    err = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        if hi - lo <= 0:
            continue
        # roundoff-limited segments are fine; their error estimate is still reported
        val, e, *_ = integrate.quad(integrand, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200, full_output=1)
        total += val
        err += e
    # integrand omits the constant 1 / (2 pi) * 1 / 2; doubled for the mirror half
    err /= TWO_PI
    if err > 1e-10:
        warnings.warn(f"cap overlap quadrature error {err:.3g} exceeds 1e-10", RuntimeWarning, stacklevel=2)
    return total / TWO_PI, err


def cap_overlap_fraction(cap1: Cap, cap2: Cap) -> float:
    return cap_overlap_with_error(cap1, cap2)[0]
