"""Deterministic outcome functions of ontological models for the qubit pair.

Every model exposes ``outcome_A(state, a, b, lam)`` and ``outcome_B(state, b, lam)``
returning arrays of +1/-1 (``int8``) for an :class:`~onticlab.sphere.OntPoint`
holding one or many samples.
"""
from __future__ import annotations

import threading
from typing import Protocol

import numpy as np
from scipy import optimize

from .quantum import Party, Setting, TwoQubitState, correlation_qm, local_expectation
from .sphere import (
    TWO_PI,
    Cap,
    Estimate,
    OntPoint,
    RngStream,
    angle_between,
    cap_overlap_fraction,
    sample_uniform,
)

MIN_SAMPLES = 10_000


class NoSolution(ValueError):
    """The required correlation is outside what two caps of the given sizes can produce."""


class InvalidState(ValueError):
    pass


class OntologicalModel(Protocol):
    def outcome_A(self, state: TwoQubitState, a: Setting, b: Setting, lam: OntPoint) -> np.ndarray: ...

    def outcome_B(self, state: TwoQubitState, b: Setting, lam: OntPoint) -> np.ndarray: ...


def sign(x: float) -> int:
    """Sign with sign(0) = +1."""
    return 1 if x >= 0 else -1


def xi(state: TwoQubitState, a: Setting) -> float:
    """Half-angle of the +1 cap for A: cos(xi) = -<A(a)>."""
    return float(np.arccos(np.clip(-local_expectation(state, a, Party.A), -1.0, 1.0)))


def chi(state: TwoQubitState, b: Setting) -> float:
    return float(np.arccos(np.clip(-local_expectation(state, b, Party.B), -1.0, 1.0)))


def _pm1(mask) -> np.ndarray:
    return np.where(mask, 1, -1).astype(np.int8)


def _rotate_in_plane(alpha: float) -> Setting:
    return Setting.in_plane(alpha)


class BellGeneralizedModel:
    """Bell's singlet model extended to the whole Schmidt family.

    A is +1 on the cap (ahat, xi) and B is +1 on the cap (b, chi). The axis
    ``ahat`` is not given in closed form here: it is placed in the plane of
    ``a`` and ``b`` at the separation from ``b`` that makes the cap overlap
    reproduce the quantum correlation.
    """

    def __init__(self, root_tolerance: float = 1e-10):
        self.root_tolerance = root_tolerance
        self._cache: dict = {}
        self._lock = threading.Lock()

    def model_correlation(self, state, a, b, omega: float) -> float:
        """Correlation of the two cap outcomes when the A-axis sits ``omega`` away from b."""
        h_a, h_b = xi(state, a), chi(state, b)
        axis = (np.cos(omega), 0.0, np.sin(omega))
        overlap = cap_overlap_fraction(Cap(axis, h_a), Cap((1.0, 0.0, 0.0), h_b))
        p_a = 0.5 * (1 - np.cos(h_a))
        p_b = 0.5 * (1 - np.cos(h_b))
        return 4 * overlap - 2 * p_a - 2 * p_b + 1

    def separation(self, state: TwoQubitState, a: Setting, b: Setting) -> float:
        """Angle between ahat and b."""
        target = correlation_qm(state, a, b)
        tol = self.root_tolerance
        e_near = self.model_correlation(state, a, b, 0.0)
        e_far = self.model_correlation(state, a, b, np.pi)
        if abs(e_near - e_far) <= tol:
            if abs(target - e_near) <= tol:
                # overlap does not depend on the axis; keep ahat = a
                return angle_between(a.vector, b.vector)
            raise NoSolution(f"correlation {target:.12g} unreachable: model gives {e_near:.12g} for every axis")
        if not (e_far - tol <= target <= e_near + tol):
            raise NoSolution(
                f"correlation {target:.12g} outside reachable range [{e_far:.12g}, {e_near:.12g}]"
            )
        if target >= e_near:
            return 0.0
        if target <= e_far:
            return float(np.pi)
        return optimize.brentq(
            lambda w: self.model_correlation(state, a, b, w) - target, 0.0, np.pi, xtol=1e-14, rtol=1e-15
        )

    def ahat(self, state: TwoQubitState, a: Setting, b: Setting) -> Setting:
        if not (a.is_in_plane and b.is_in_plane):
            raise ValueError("the Bell model is defined for in-plane settings")
        key = (state.theta, a.vector, b.vector)
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        omega = self.separation(state, a, b)
        offset = (a.alpha - b.alpha) % TWO_PI
        direction = 1.0 if offset <= np.pi else -1.0
        if offset == 0.0 or offset == np.pi:
            direction = 1.0
        result = _rotate_in_plane(b.alpha + direction * omega)
        with self._lock:
            self._cache[key] = result
        return result

    def outcome_A(self, state, a, b, lam: OntPoint) -> np.ndarray:
        axis = self.ahat(state, a, b).array
        return _pm1(lam.vector @ axis >= np.cos(xi(state, a)))

    def outcome_B(self, state, b, lam: OntPoint) -> np.ndarray:
        return _pm1(lam.vector @ b.array >= np.cos(chi(state, b)))


def _half_circle(mu, mu_setting) -> np.ndarray:
    return (np.asarray(mu) - mu_setting) % TWO_PI < np.pi


def _band(tau, half_width: float) -> np.ndarray:
    return np.abs(np.asarray(tau) - 0.5 * np.pi) <= half_width


class SaturatingSigmaZModel:
    """Outcome supports rearranged into an equatorial band split in half by azimuth.

    Inside the band ``|tau - pi/2| <= eta`` (``sin eta = 1 - |<A>|``) the outcome
    is ``-sign<A>`` on the half circle starting at the setting's azimuth and
    ``+sign<A>`` elsewhere, so the intermediate average is 0 on the band and
    ``sign<A>`` off it.
    """

    @staticmethod
    def band_half_width(expectation: float) -> float:
        return float(np.arcsin(np.clip(1.0 - abs(expectation), 0.0, 1.0)))

    def _outcome(self, expectation, s: Setting, lam):
        sg = sign(expectation)
        inside = _band(lam.tau, self.band_half_width(expectation)) & _half_circle(lam.mu, s.alpha)
        return np.where(inside, -sg, sg).astype(np.int8)

    def outcome_A(self, state, a, b, lam: OntPoint) -> np.ndarray:
        return self._outcome(local_expectation(state, a, Party.A), a, lam)

    def outcome_B(self, state, b, lam: OntPoint) -> np.ndarray:
        return self._outcome(local_expectation(state, b, Party.B), b, lam)


class FactorizedLocalModel:
    """Local model for the product state (theta = 0).

    A is ``-sign<A>`` on the band ``|tau - pi/2| <= eta'`` with
    ``sin eta' = (1 - |<A>|) / 2`` and ``sign<A>`` elsewhere. B reads only the
    azimuth: it is ``sign<B>`` on an arc of length ``pi (1 + |<B>|)``. Since tau
    and mu are independent under the uniform measure, the pair reproduces both
    marginals and the product correlation <A><B>.
    """

    @staticmethod
    def band_half_width(expectation: float) -> float:
        return float(np.arcsin(np.clip(0.5 * (1.0 - abs(expectation)), 0.0, 0.5)))

    @staticmethod
    def _check(state):
        if state.theta != 0.0:
            raise InvalidState(f"factorized model needs theta = 0, got {state.theta!r}")

    def outcome_A(self, state, a, b, lam: OntPoint) -> np.ndarray:
        self._check(state)
        e = local_expectation(state, a, Party.A)
        sg = sign(e)
        return np.where(_band(lam.tau, self.band_half_width(e)), -sg, sg).astype(np.int8)

    def outcome_B(self, state, b, lam: OntPoint) -> np.ndarray:
        self._check(state)
        e = local_expectation(state, b, Party.B)
        sg = sign(e)
        arc = np.pi * (1.0 + abs(e))
        return np.where(np.asarray(lam.mu) % TWO_PI < arc, sg, -sg).astype(np.int8)


def _check_samples(n):
    if n < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples for a usable estimate, got {n}")


def estimate_local_average(model, state, a, b, party: Party, n: int, rng: RngStream) -> Estimate:
    _check_samples(n)
    lam = sample_uniform(rng, n)
    if party is Party.A:
        values = model.outcome_A(state, a, b, lam)
    else:
        values = model.outcome_B(state, b, lam)
    return Estimate.from_samples(values, rng.seed)


def estimate_correlation(model, state, a, b, n: int, rng: RngStream) -> Estimate:
    _check_samples(n)
    lam = sample_uniform(rng, n)
    values = model.outcome_A(state, a, b, lam).astype(np.int16) * model.outcome_B(state, b, lam)
    return Estimate.from_samples(values, rng.seed)


def estimate_all(model, state, a, b, n: int, rng: RngStream) -> tuple[Estimate, Estimate, Estimate]:
    """Local averages of A and B and their correlation from one shared sample."""
    _check_samples(n)
    lam = sample_uniform(rng, n)
    out_a = model.outcome_A(state, a, b, lam).astype(np.int16)
    out_b = model.outcome_B(state, b, lam).astype(np.int16)
    return (
        Estimate.from_samples(out_a, rng.seed),
        Estimate.from_samples(out_b, rng.seed),
        Estimate.from_samples(out_a * out_b, rng.seed),
    )
