"""Two-qubit quantum predictions for the Schmidt family sin(t/2)|00> + cos(t/2)|11>.

Frame convention used throughout the package: the particles propagate along
``y``, measurement settings live in the ``x``-``z`` plane and ``sigma_z`` is
the ``z`` axis. An in-plane setting at angle ``alpha`` is
``cos(alpha) x + sin(alpha) z``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

HALF_PI = 0.5 * np.pi

SIGMA_I = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class Party(enum.Enum):
    A = "A"
    B = "B"


@dataclass(frozen=True)
class TwoQubitState:
    """Entangled pair parameterised by ``theta`` in [0, pi/2].

    ``theta = 0`` is the product state |11>, ``theta = pi/2`` is maximally
    entangled.
    """

    theta: float

    def __post_init__(self):
        if not (0.0 <= self.theta <= HALF_PI):
            raise ValueError(f"theta must lie in [0, pi/2], got {self.theta!r}")

    @property
    def amplitudes(self) -> np.ndarray:
        """Amplitudes in the basis |00>, |01>, |10>, |11>."""
        half = 0.5 * self.theta
        return np.array([np.sin(half), 0.0, 0.0, np.cos(half)], dtype=complex)


def make_state(theta: float) -> TwoQubitState:
    return TwoQubitState(float(theta))


@dataclass(frozen=True)
class Setting:
    """A measurement direction (unit 3-vector)."""

    vector: tuple = field()

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=float)
        norm = np.linalg.norm(v)
        if v.shape != (3,) or norm == 0:
            raise ValueError(f"setting needs a non-zero 3-vector, got {self.vector!r}")
        object.__setattr__(self, "vector", tuple(float(c) for c in v / norm))

    @classmethod
    def in_plane(cls, alpha: float) -> "Setting":
        return cls((np.cos(alpha), 0.0, np.sin(alpha)))

    @classmethod
    def from_vector(cls, v) -> "Setting":
        return cls(tuple(v))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.vector)

    @property
    def alpha(self) -> float:
        """Azimuth in the measurement plane, in [0, 2pi)."""
        x, _, z = self.vector
        return float(np.arctan2(z, x) % (2 * np.pi))

    @property
    def is_in_plane(self) -> bool:
        return abs(self.vector[1]) <= 1e-12

    def __neg__(self) -> "Setting":
        return Setting(tuple(-c for c in self.vector))

    def operator(self) -> np.ndarray:
        x, y, z = self.vector
        return x * SIGMA_X + y * SIGMA_Y + z * SIGMA_Z


X_AXIS = Setting((1.0, 0.0, 0.0))
Z_AXIS = Setting((0.0, 0.0, 1.0))


def local_expectation(state: TwoQubitState, s: Setting, party: Party = Party.A) -> float:
    """<sigma.s> on one side; the marginal of either qubit is diag(sin^2, cos^2)."""
    value = -np.cos(state.theta) * s.vector[2]
    # cos(pi/2) is 6e-17 in floating point; keep sign<A> stable at maximal entanglement
    return 0.0 if abs(value) < 1e-15 else float(value)


def correlation_qm(state: TwoQubitState, a: Setting, b: Setting) -> float:
    """<psi| sigma.a (x) sigma.b |psi>."""
    ax, ay, az = a.vector
    bx, by, bz = b.vector
    return np.sin(state.theta) * (ax * bx - ay * by) + az * bz


def _check_hermitian(op, name):
    op = np.asarray(op, dtype=complex)
    if op.shape != (2, 2):
        raise ValueError(f"{name} must be 2x2, got shape {op.shape}")
    if not np.allclose(op, op.conj().T, rtol=0, atol=1e-12):
        raise ValueError(f"{name} is not Hermitian")
    return op


def oracle_expectation(state: TwoQubitState, op_a, op_b) -> float:
    """Dense evaluation of <psi| op_a (x) op_b |psi>, independent of the closed forms."""
    op_a = _check_hermitian(op_a, "op_a")
    op_b = _check_hermitian(op_b, "op_b")
    psi = state.amplitudes
    return float(np.real(psi.conj() @ np.kron(op_a, op_b) @ psi))
