"""Local averages at fixed accessible variable tau, their tau-marginals and variance.

Only the azimuth ``mu`` is averaged here (with density 1/2pi); the polar angle
``tau`` has density ``sin(tau)/2`` under the uniform sphere measure.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .models import (
    MIN_SAMPLES,
    BellGeneralizedModel,
    FactorizedLocalModel,
    SaturatingSigmaZModel,
    chi,
    sign,
    xi,
)
from .quantum import Party, Setting, TwoQubitState, local_expectation
from .sphere import (
    Estimate,
    RngStream,
    _arc_overlap_scalar,
    _half_width_scalar,
    angle_between,
    sample_mu_given_tau,
)

HALF_PI = 0.5 * np.pi


class PrecondFailed(ValueError):
    pass


class QuadratureError(RuntimeError):
    def __init__(self, message, achieved):
        super().__init__(f"{message} (achieved error {achieved:.3g})")
        self.achieved = achieved


@dataclass(frozen=True)
class IntermediateAverage:
    """A function of tau in [-1, 1], smooth between ``band_edges``.

    When ``grid`` is set the function is a tabulation and integrals over tau
    use the trapezoid rule on that grid.
    """

    func: Callable
    band_edges: tuple = ()
    grid: tuple | None = field(default=None, compare=False)

    def evaluate(self, tau):
        return self.func(tau)

    __call__ = evaluate


@dataclass(frozen=True)
class DeltaResult:
    value: float
    quadrature_error: float


def _edges(*half_widths) -> tuple:
    pts = set()
    for w in half_widths:
        for p in (HALF_PI - w, HALF_PI + w):
            if 0.0 < p < np.pi:
                pts.add(float(p))
    return tuple(sorted(pts))


def _cap_average(expectation, tau):
    """2 x (fraction of the mu-circle inside the cap) - 1 for a cap with cos(h) = -expectation.

    For expectation <= 0 this is (1/pi) arccos(2 E^2 / sin^2 tau - 1) - 1 on the band
    sin(tau) >= |E| and -1 off it, written via arccos(2x^2 - 1) = 2 arccos(x)
    to stay well conditioned near the band edges. Positive expectations use
    the antisymmetric extension f(-a) = -f(a).
    """
    tau = np.asarray(tau, dtype=float)
    mag = abs(expectation)
    s = np.sin(tau)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratio = np.where(s > 0, mag / np.where(s > 0, s, 1.0), np.where(mag > 0, np.inf, 0.0))
    inside = ratio <= 1.0
    f = np.where(inside, 2.0 / np.pi * np.arccos(np.clip(ratio, 0.0, 1.0)) - 1.0, -1.0)
    return f if expectation <= 0 else -f


def f_analytic(state: TwoQubitState, a: Setting, tau):
    """Intermediate local average of A in the generalized Bell model."""
    return _cap_average(local_expectation(state, a, Party.A), tau)


def g_analytic(state: TwoQubitState, b: Setting, tau):
    return _cap_average(local_expectation(state, b, Party.B), tau)


def _bell_band(expectation: float) -> float:
    # the cap meets the mu-circle partially while sin(tau) >= |<A>|
    return float(np.arccos(np.clip(abs(expectation), 0.0, 1.0)))


def analytic_intermediate(model, state: TwoQubitState, setting: Setting, party: Party = Party.A) -> IntermediateAverage:
    """Exact intermediate average for the built-in models."""
    e = local_expectation(state, setting, party)
    if isinstance(model, BellGeneralizedModel):
        return IntermediateAverage(lambda t: _cap_average(e, t), _edges(_bell_band(e)))
    if isinstance(model, SaturatingSigmaZModel):
        eta = model.band_half_width(e)
        sg = sign(e)
        return IntermediateAverage(
            lambda t: np.where(np.abs(np.asarray(t, dtype=float) - HALF_PI) <= eta, 0.0, float(sg)),
            _edges(eta),
        )
    if isinstance(model, FactorizedLocalModel):
        model._check(state)
        if party is Party.B:
            return IntermediateAverage(lambda t: np.full(np.shape(t), e, dtype=float))
        eta = model.band_half_width(e)
        sg = sign(e)
        return IntermediateAverage(
            lambda t: np.where(np.abs(np.asarray(t, dtype=float) - HALF_PI) <= eta, -float(sg), float(sg)),
            _edges(eta),
        )
    raise TypeError(f"no analytic intermediate average for {type(model).__name__}; use tabulate_intermediate")


def _check_samples(n):
    if n < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples for a usable estimate, got {n}")


def f_mc(model, state, a, b, tau, n: int, rng: RngStream) -> Estimate:
    """Average of A over the azimuth at fixed tau."""
    _check_samples(n)
    lam = sample_mu_given_tau(rng, tau, n)
    return Estimate.from_samples(model.outcome_A(state, a, b, lam), rng.seed)


def g_mc(model, state, b, tau, n: int, rng: RngStream) -> Estimate:
    _check_samples(n)
    lam = sample_mu_given_tau(rng, tau, n)
    return Estimate.from_samples(model.outcome_B(state, b, lam), rng.seed)


def intermediate_correlation(model, state, a, b, tau, n: int, rng: RngStream) -> Estimate:
    _check_samples(n)
    lam = sample_mu_given_tau(rng, tau, n)
    ab = model.outcome_A(state, a, b, lam).astype(np.int16) * model.outcome_B(state, b, lam)
    return Estimate.from_samples(ab, rng.seed)


def bell_intermediate_correlation(model: BellGeneralizedModel, state, a, b, tau: float) -> float:
    """Exact intermediate correlation of the Bell model from arc overlaps at polar angle tau."""
    s = math.sin(tau)
    h_a, h_b = xi(state, a), chi(state, b)
    w_a = _half_width_scalar(math.cos(h_a), s)
    w_b = _half_width_scalar(math.cos(h_b), s)
    omega = angle_between(model.ahat(state, a, b).vector, b.vector)
    both = _arc_overlap_scalar(w_a, w_b, omega) / (2 * math.pi)
    return 1.0 - 2.0 * w_a / math.pi - 2.0 * w_b / math.pi + 4.0 * both


def tabulate_intermediate(
    model, state, a, b, party: Party = Party.A, *, n: int, rng: RngStream, n_tau: int = 512, band_edges=()
) -> IntermediateAverage:
    """Monte Carlo tabulation on a tau grid, for models without a closed form."""
    if n_tau < 512:
        raise ValueError("tabulation needs at least 512 tau points")
    taus = np.union1d(np.linspace(0.0, np.pi, n_tau), np.asarray(band_edges, dtype=float))
    values = np.empty(taus.size)
    for i, t in enumerate(taus):
        sub = rng.child(i)
        est = f_mc(model, state, a, b, t, n, sub) if party is Party.A else g_mc(model, state, b, t, n, sub)
        values[i] = est.mean
    grid = (tuple(taus), tuple(values))
    return IntermediateAverage(lambda t: np.interp(t, taus, values), tuple(band_edges), grid)


def _tau_integral(func, edges) -> tuple[float, float]:
    pts = [0.0, *sorted(e for e in edges if 0.0 < e < np.pi), np.pi]
    total = err = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        val, e, *_ = integrate.quad(
            lambda t: float(func(t)) * 0.5 * math.sin(t), lo, hi, epsabs=1e-14, epsrel=1e-12, limit=200, full_output=1
        )
        total += val
        err += e
    return total, err


def _trapezoid(taus, values) -> float:
    taus = np.asarray(taus)
    return float(np.trapezoid(np.asarray(values) * 0.5 * np.sin(taus), taus))


def tau_average(f: IntermediateAverage, tol: float = 1e-9) -> float:
    """Marginal over tau with density sin(tau)/2."""
    if f.grid is not None:
        return _trapezoid(*f.grid)
    value, err = _tau_integral(f.evaluate, f.band_edges)
    if err > tol:
        raise QuadratureError("tau average did not converge", err)
    return value


def delta(state: TwoQubitState, a: Setting, f: IntermediateAverage, mean_tol: float = 1e-8) -> DeltaResult:
    """Variance over tau of the intermediate average of A around <A(a)>."""
    target = local_expectation(state, a, Party.A)
    mean = tau_average(f)
    if abs(mean - target) > mean_tol:
        raise PrecondFailed(f"tau average {mean:.12g} differs from <A> = {target:.12g} by more than {mean_tol:g}")
    if f.grid is not None:
        taus, vals = (np.asarray(x) for x in f.grid)
        return DeltaResult(max(_trapezoid(taus, (vals - target) ** 2), 0.0), float("nan"))
    value, err = _tau_integral(lambda t: (f.evaluate(t) - target) ** 2, f.band_edges)
    return DeltaResult(max(value, 0.0), err)


@dataclass(frozen=True)
class NonSignallingReport:
    passed: bool
    worst_tau: float
    worst_pair: tuple
    worst_diff: float
    worst_combined_stderr: float
    nsigma: float
    estimates: dict

    @property
    def worst_z(self) -> float:
        if self.worst_combined_stderr == 0:
            return math.inf if self.worst_diff > 0 else 0.0
        return self.worst_diff / self.worst_combined_stderr


def check_nonsignalling(model, state, a, b_grid, tau_grid, n: int, rng: RngStream, nsigma: float = 5.0):
    """Compare f estimates across B settings at each tau; report the least compatible pair."""
    b_grid = list(b_grid)
    if len({b.vector for b in b_grid}) < 3:
        raise ValueError("need at least three distinct B settings")
    estimates = {}
    worst = (-math.inf, None, None, 0.0, 0.0)
    for i, tau in enumerate(tau_grid):
        row = [f_mc(model, state, a, b, tau, n, rng.child(i).child(j)) for j, b in enumerate(b_grid)]
        estimates[float(tau)] = row
        for (j, e1), (k, e2) in itertools.combinations(enumerate(row), 2):
            diff = abs(e1.mean - e2.mean)
            comb = math.hypot(e1.stderr, e2.stderr)
            excess = diff - nsigma * comb
            if excess > worst[0]:
                worst = (excess, float(tau), (j, k), diff, comb)
    excess, tau, pair, diff, comb = worst
    return NonSignallingReport(excess <= 1e-12, tau, pair, diff, comb, nsigma, estimates)


@dataclass(frozen=True)
class ChainStepReport:
    lhs: float
    rhs: float
    combined_stderr: float
    holds: bool


def chain_step_check(model, state, gamma_j, gamma_j1, tau, n: int, rng: RngStream, odd: bool = False, nsigma=5.0):
    """|f - g| <= 1 - E at fixed tau for one link of a measurement chain.

    Even links measure A(gamma_j), B(gamma_j1); odd links swap the roles.
    Both sides are estimated from the same azimuth sample.
    """
    _check_samples(n)
    a, b = (gamma_j1, gamma_j) if odd else (gamma_j, gamma_j1)
    lam = sample_mu_given_tau(rng, tau, n)
    out_a = model.outcome_A(state, a, b, lam).astype(np.int16)
    out_b = model.outcome_B(state, b, lam).astype(np.int16)
    f = Estimate.from_samples(out_a, rng.seed)
    g = Estimate.from_samples(out_b, rng.seed)
    e = Estimate.from_samples(out_a * out_b, rng.seed)
    lhs = abs(f.mean - g.mean)
    rhs = 1.0 - e.mean
    comb = math.sqrt(f.stderr**2 + g.stderr**2 + e.stderr**2)
    return ChainStepReport(lhs, rhs, comb, lhs <= rhs + nsigma * comb + 1e-12)
