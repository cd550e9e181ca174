import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from onticlab.quantum import (
    SIGMA_I,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    Party,
    Setting,
    X_AXIS,
    Z_AXIS,
    correlation_qm,
    local_expectation,
    make_state,
    oracle_expectation,
)

angles = st.floats(0.0, 2 * np.pi, allow_nan=False)
thetas = st.floats(0.0, np.pi / 2, allow_nan=False)


def density_trace(state, op_a, op_b):
    """Tr(rho (A x B)) with rho built explicitly; second route to the oracle."""
    psi = state.amplitudes.reshape(2, 2)
    rho = np.einsum("ij,kl->ijkl", psi, psi.conj())
    return float(np.real(np.einsum("ijkl,ki,lj->", rho, op_a, op_b)))


@pytest.mark.parametrize(
    "theta, expected",
    [
        (0.0, [0, 0, 0, 1]),
        (np.pi / 2, [np.sqrt(2) / 2, 0, 0, np.sqrt(2) / 2]),
        (np.pi / 3, [0.5, 0, 0, np.sqrt(3) / 2]),
    ],
)
def test_make_state_amplitudes(theta, expected):
    state = make_state(theta)
    np.testing.assert_allclose(state.amplitudes, expected, atol=1e-15)
    assert abs(np.sum(np.abs(state.amplitudes) ** 2) - 1) < 1e-12


@pytest.mark.parametrize("theta", [-1e-3, np.pi / 2 + 1e-9, np.nan])
def test_make_state_rejects_out_of_range(theta):
    with pytest.raises(ValueError):
        make_state(theta)


def test_local_expectation_examples():
    assert local_expectation(make_state(0.0), Z_AXIS, Party.A) == -1.0
    for alpha in np.linspace(0, 2 * np.pi, 9):
        s = Setting.in_plane(alpha)
        assert abs(oracle_expectation(make_state(np.pi / 2), s.operator(), SIGMA_I)) < 1e-15
        assert abs(local_expectation(make_state(np.pi / 2), s, Party.A)) < 1e-15
    assert oracle_expectation(make_state(np.pi / 3), SIGMA_I, SIGMA_Z) == pytest.approx(-0.5, abs=1e-15)
    assert local_expectation(make_state(np.pi / 3), Z_AXIS, Party.B) == pytest.approx(-0.5, abs=1e-15)


def test_correlation_examples():
    for theta in (0.0, 0.4, np.pi / 3, np.pi / 2):
        assert oracle_expectation(make_state(theta), SIGMA_Z, SIGMA_Z) == pytest.approx(1.0, abs=1e-15)
        assert correlation_qm(make_state(theta), Z_AXIS, Z_AXIS) == pytest.approx(1.0, abs=1e-15)
    assert oracle_expectation(make_state(np.pi / 2), SIGMA_X, SIGMA_X) == pytest.approx(1.0, abs=1e-15)
    assert correlation_qm(make_state(np.pi / 2), X_AXIS, X_AXIS) == pytest.approx(1.0, abs=1e-15)
    assert oracle_expectation(make_state(0.0), SIGMA_X, SIGMA_Z) == pytest.approx(0.0, abs=1e-15)
    assert correlation_qm(make_state(0.0), X_AXIS, Z_AXIS) == pytest.approx(0.0, abs=1e-15)


def test_oracle_examples():
    assert oracle_expectation(make_state(0.7), SIGMA_I, SIGMA_I) == pytest.approx(1.0, abs=1e-15)
    assert oracle_expectation(make_state(0.0), SIGMA_Z, SIGMA_I) == pytest.approx(-1.0, abs=1e-15)
    assert oracle_expectation(make_state(np.pi / 3), SIGMA_X, SIGMA_X) == pytest.approx(np.sqrt(3) / 2, abs=1e-15)


def test_oracle_rejects_non_hermitian():
    with pytest.raises(ValueError):
        oracle_expectation(make_state(0.3), np.array([[0, 1], [0, 0]]), SIGMA_I)


def test_closed_forms_match_oracle_random():
    gen = np.random.default_rng(7)
    for _ in range(1000):
        state = make_state(gen.uniform(0, np.pi / 2))
        a = Setting.from_vector(gen.normal(size=3))
        b = Setting.from_vector(gen.normal(size=3))
        assert local_expectation(state, a, Party.A) == pytest.approx(
            oracle_expectation(state, a.operator(), SIGMA_I), abs=1e-10
        )
        assert local_expectation(state, b, Party.B) == pytest.approx(
            oracle_expectation(state, SIGMA_I, b.operator()), abs=1e-10
        )
        assert correlation_qm(state, a, b) == pytest.approx(oracle_expectation(state, a.operator(), b.operator()), abs=1e-10)


@given(thetas, st.tuples(*[st.floats(-1, 1)] * 3), st.tuples(*[st.floats(-1, 1)] * 3))
def test_oracle_matches_density_trace(theta, va, vb):
    if np.linalg.norm(va) < 1e-3 or np.linalg.norm(vb) < 1e-3:
        return
    state = make_state(theta)
    a, b = Setting(va), Setting(vb)
    for op_a, op_b in [(a.operator(), b.operator()), (SIGMA_Y, SIGMA_Y), (a.operator(), SIGMA_I)]:
        assert oracle_expectation(state, op_a, op_b) == pytest.approx(density_trace(state, op_a, op_b), abs=1e-12)


@given(thetas, angles, angles)
def test_antisymmetry_and_range(theta, alpha_a, alpha_b):
    state = make_state(theta)
    a, b = Setting.in_plane(alpha_a), Setting.in_plane(alpha_b)
    for party in Party:
        assert local_expectation(state, -a, party) == -local_expectation(state, a, party)
    assert abs(correlation_qm(state, a, b)) <= 1.0 + 1e-15


def test_setting_invariants():
    for alpha in np.linspace(0, 2 * np.pi, 13):
        s = Setting.in_plane(alpha)
        assert abs(np.linalg.norm(s.array) - 1) < 1e-12
        assert s.vector[1] == 0.0
        np.testing.assert_allclose(s.array, [np.cos(alpha), 0, np.sin(alpha)], atol=1e-15)
    assert Setting.in_plane(np.pi / 2).alpha == pytest.approx(np.pi / 2)
