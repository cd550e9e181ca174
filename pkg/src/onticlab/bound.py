"""Chain bound on the tau-average of |f| and its numerical minimisation.

A chain from ``a`` to ``-a`` has 2n + 1 settings. Link ``j`` measures
A(gamma_j), B(gamma_{j+1}) for even ``j`` and A(gamma_{j+1}), B(gamma_j) for
odd ``j``; the chain value is ``n - 1/2 sum_j E_j``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .quantum import Party, Setting, TwoQubitState, correlation_qm, local_expectation
from .sphere import RngStream

MODES = ("plane", "sphere")


@dataclass(frozen=True)
class Chain:
    settings: tuple

    def __post_init__(self):
        object.__setattr__(self, "settings", tuple(self.settings))
        k = len(self.settings)
        if k < 3 or k % 2 == 0:
            raise ValueError(f"a chain has 2n + 1 >= 3 settings, got {k}")
        if not np.allclose(self.settings[-1].array, -self.settings[0].array, rtol=0, atol=1e-12):
            raise ValueError("a chain must end at the negation of its first setting")

    @property
    def n(self) -> int:
        return (len(self.settings) - 1) // 2

    @classmethod
    def from_angles(cls, alpha_a: float, interior) -> "Chain":
        alphas = [alpha_a, *np.asarray(interior, dtype=float), alpha_a + np.pi]
        return cls(Setting.in_plane(x) for x in alphas)

    @classmethod
    def equally_spaced(cls, a: Setting, n: int) -> "Chain":
        return cls.from_angles(a.alpha, a.alpha + np.arange(1, 2 * n) * np.pi / (2 * n))

    @property
    def angles(self) -> list[float]:
        """In-plane angles, unwrapped so consecutive entries differ by less than pi."""
        return [float(x) for x in np.unwrap([s.alpha for s in self.settings])]

    @property
    def vectors(self) -> np.ndarray:
        return np.array([s.vector for s in self.settings])


def _link_roles(k: int):
    j = np.arange(k - 1)
    odd = j % 2 == 1
    a_idx = np.where(odd, j + 1, j)
    b_idx = np.where(odd, j, j + 1)
    return a_idx, b_idx


def _omega_vectors(vectors: np.ndarray, sin_theta: float) -> float:
    a_idx, b_idx = _link_roles(len(vectors))
    va, vb = vectors[a_idx], vectors[b_idx]
    e = sin_theta * (va[:, 0] * vb[:, 0] - va[:, 1] * vb[:, 1]) + va[:, 2] * vb[:, 2]
    n = (len(vectors) - 1) // 2
    return n - 0.5 * float(e.sum())


def omega(state: TwoQubitState, a: Setting, chain: Chain) -> float:
    if not np.allclose(chain.settings[0].array, a.array, rtol=0, atol=1e-12):
        raise ValueError("chain does not start at a")
    total = 0.0
    s = chain.settings
    for k in range(chain.n):
        total += correlation_qm(state, s[2 * k], s[2 * k + 1])
        total += correlation_qm(state, s[2 * k + 2], s[2 * k + 1])
    return chain.n - 0.5 * total


def _plane_vectors(alpha_a, interior):
    alphas = np.concatenate([[alpha_a], interior, [alpha_a + np.pi]])
    return np.stack([np.cos(alphas), np.zeros_like(alphas), np.sin(alphas)], axis=1)


def _sphere_vectors(a_vec, params):
    polar, azim = params[0::2], params[1::2]
    sp = np.sin(polar)
    inner = np.stack([sp * np.cos(azim), np.cos(polar), sp * np.sin(azim)], axis=1)
    return np.vstack([a_vec, inner, -a_vec])


def _vectors_to_params(vectors):
    polar = np.arccos(np.clip(vectors[:, 1], -1, 1))
    azim = np.arctan2(vectors[:, 2], vectors[:, 0])
    out = np.empty(2 * len(vectors))
    out[0::2], out[1::2] = polar, azim
    return out


@dataclass(frozen=True)
class MinimizeResult:
    value: float
    chain: Chain
    restarts_used: int
    converged: bool
    initial_value: float


def _objective(state, a, mode):
    st = float(np.sin(state.theta))
    if mode == "plane":
        alpha = a.alpha
        return lambda x: _omega_vectors(_plane_vectors(alpha, x), st)
    a_vec = a.array
    return lambda x: _omega_vectors(_sphere_vectors(a_vec, x), st)


def _chain_from_x(a, x, mode) -> Chain:
    if mode == "plane":
        return Chain.from_angles(a.alpha, x)
    vecs = _sphere_vectors(a.array, x)
    return Chain([a, *(Setting(v) for v in vecs[1:-1]), -a])


def _x_from_chain(chain: Chain, mode) -> np.ndarray:
    if mode == "plane":
        return np.asarray(chain.angles[1:-1])
    return _vectors_to_params(chain.vectors[1:-1])


def _descend(fun, x0, tol, max_iters):
    """Simplex descent followed by a Powell polish; both derivative-free."""
    nm = optimize.minimize(
        fun,
        x0,
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": tol, "maxiter": max_iters, "maxfev": 2 * max_iters, "adaptive": True},
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        pw = optimize.minimize(fun, nm.x, method="Powell", options={"xtol": 1e-10, "ftol": tol * 1e-3, "maxiter": max_iters})
    best = pw if pw.fun <= nm.fun else nm
    return best.x, float(best.fun), bool(nm.success or pw.success)


def minimize_omega(
    state: TwoQubitState,
    a: Setting,
    n: int,
    *,
    restarts: int = 8,
    tol: float = 1e-9,
    max_iters: int = 20000,
    rng: RngStream | None = None,
    mode: str = "plane",
    initial=(),
) -> MinimizeResult:
    """Multi-start local minimisation of the chain value over the 2n - 1 interior settings.

    The equally spaced chain is always the first start; ``restarts - 1`` random
    starts follow, plus any chains passed in ``initial``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    rng = rng if rng is not None else RngStream(0)
    fun = _objective(state, a, mode)

    base = Chain.equally_spaced(a, n)
    starts = [_x_from_chain(base, mode)]
    for k in range(max(restarts, 1) - 1):
        g = rng.child(k).generator
        if mode == "plane":
            starts.append(a.alpha + np.sort(g.uniform(0.0, np.pi, 2 * n - 1)))
        else:
            starts.append(starts[0] + g.normal(0.0, 0.3, starts[0].size))
    starts.extend(_x_from_chain(c, mode) for c in initial)

    initial_value = fun(starts[0])
    best_x, best_val, converged = starts[0], initial_value, True
    for x0 in starts:
        f0 = fun(x0)
        x, val, ok = _descend(fun, x0, tol, max_iters)
        if val > f0:
            x, val = x0, f0
        converged &= ok
        if val < best_val:
            best_x, best_val = x, val
    return MinimizeResult(best_val, _chain_from_x(a, best_x, mode), len(starts), converged, initial_value)


def _refine(chain: Chain, a: Setting, mode: str) -> Chain:
    """Resample a chain onto n + 1 links by interpolating along its index."""
    k_old = len(chain.settings)
    k_new = k_old + 2
    s_old = np.linspace(0.0, 1.0, k_old)
    s_new = np.linspace(0.0, 1.0, k_new)
    if mode == "plane":
        alphas = np.interp(s_new, s_old, chain.angles)
        return Chain.from_angles(a.alpha, alphas[1:-1])
    vecs = np.stack([np.interp(s_new, s_old, chain.vectors[:, c]) for c in range(3)], axis=1)
    inner = vecs[1:-1]
    norms = np.linalg.norm(inner, axis=1, keepdims=True)
    inner = np.where(norms > 1e-9, inner / np.maximum(norms, 1e-300), [0.0, 1.0, 0.0])
    return Chain([a, *(Setting(v) for v in inner), -a])


@dataclass(frozen=True)
class NResult:
    n: int
    min_value: float
    chain: Chain
    restarts_used: int
    converged: bool


@dataclass(frozen=True)
class BoundReport:
    per_n: list = field(default_factory=list)
    overall_min: float = np.inf
    conjecture_value: float = np.nan

    @property
    def gap(self) -> float:
        return self.overall_min - self.conjecture_value

    @property
    def converged(self) -> bool:
        return all(r.converged for r in self.per_n)

    def to_dict(self) -> dict:
        return {
            "per_n": [
                {
                    "n": r.n,
                    "min_value": r.min_value,
                    "argmin_chain": r.chain.angles if all(s.is_in_plane for s in r.chain.settings) else r.chain.vectors.tolist(),
                    "restarts_used": r.restarts_used,
                    "converged": r.converged,
                }
                for r in self.per_n
            ],
            "overall_min": self.overall_min,
            "conjecture_value": self.conjecture_value,
            "gap": self.gap,
            "converged": self.converged,
        }


def scan_bound(
    state: TwoQubitState,
    a: Setting,
    n_max: int,
    *,
    restarts: int = 8,
    tol: float = 1e-9,
    max_iters: int = 20000,
    rng: RngStream | None = None,
    mode: str = "plane",
) -> BoundReport:
    """Minimise the chain value for n = 1..n_max, warm-starting each n from the previous optimum."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    rng = rng if rng is not None else RngStream(0)
    per_n = []
    overall = np.inf
    warm = ()
    for n in range(1, n_max + 1):
        res = minimize_omega(
            state, a, n, restarts=restarts, tol=tol, max_iters=max_iters, rng=rng.child(n), mode=mode, initial=warm
        )
        per_n.append(NResult(n, res.value, res.chain, res.restarts_used, res.converged))
        overall = min(overall, res.value)
        warm = (_refine(res.chain, a, mode),)
    return BoundReport(per_n, float(overall), float(np.cos(state.theta)))


def bound_rhs(state: TwoQubitState, a: Setting) -> float:
    """Conjectured bound on the variance of f: cos(theta) - <A(a)>^2."""
    return float(np.cos(state.theta) - local_expectation(state, a, Party.A) ** 2)


@dataclass(frozen=True)
class ConstraintMargins:
    chain_margin: float
    conjecture_margin: float
    holds_chain: bool
    holds_conjecture: bool

    @property
    def holds(self) -> bool:
        return self.holds_chain and self.holds_conjecture


def verify_constraint(delta, state: TwoQubitState, a: Setting, report: BoundReport, slack: float = 1e-6) -> ConstraintMargins:
    """Margins of delta below min(chain value) - <A>^2 and below the conjectured bound."""
    sq = local_expectation(state, a, Party.A) ** 2
    chain_margin = report.overall_min - sq - delta.value
    conj_margin = bound_rhs(state, a) - delta.value
    return ConstraintMargins(chain_margin, conj_margin, chain_margin >= -slack, conj_margin >= -slack)
