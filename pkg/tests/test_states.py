import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from bellcert.errors import DomainError
from bellcert.states import (
    BellDiagonalState,
    NoiseModel,
    make_werner,
    on_simplex,
    project_to_simplex,
    state_fidelity,
    trace_distance,
)

from conftest import bell_states


def test_werner_examples():
    assert make_werner(0.7).as_array() == pytest.approx([0.7, 0.1, 0.1, 0.1], abs=1e-15)
    assert tuple(make_werner(1.0)) == (1.0, 0.0, 0.0, 0.0)
    assert make_werner(0.25).as_array() == pytest.approx([0.25] * 4, abs=1e-15)


@pytest.mark.parametrize("F", [-0.1, 1.2, float("nan")])
def test_werner_rejects_bad_fidelity(F):
    with pytest.raises(DomainError):
        make_werner(F)


def test_constructor_renormalizes_small_drift_only():
    s = BellDiagonalState(0.7 + 5e-10, 0.1, 0.1, 0.1)
    assert sum(s) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(DomainError):
        BellDiagonalState(0.7 + 1e-6, 0.1, 0.1, 0.1)
    with pytest.raises(DomainError):
        BellDiagonalState(1.1, -0.1, 0.0, 0.0)
    with pytest.raises(DomainError):
        BellDiagonalState(float("inf"), 0, 0, 0)


def test_noise_model_range():
    assert NoiseModel(0.0).is_ideal
    NoiseModel(0.999)
    for bad in (-0.01, 1.0, 2.0):
        with pytest.raises(DomainError):
            NoiseModel(bad)


def test_fidelity_examples():
    w = make_werner(0.7)
    assert state_fidelity(w, w) == pytest.approx(1.0, abs=1e-15)
    assert state_fidelity((1, 0, 0, 0), (0, 1, 0, 0)) == 0.0
    assert state_fidelity((1, 0, 0, 0), w) == pytest.approx(0.7, abs=1e-15)


def test_trace_distance_examples():
    w = make_werner(0.7)
    assert trace_distance(w, w) == 0.0
    assert trace_distance((1, 0, 0, 0), (0, 1, 0, 0)) == 1.0
    rho1 = np.array([0.845946, 0.0675676, 0.0189189, 0.0675676])
    assert trace_distance(w, BellDiagonalState.from_vector(rho1 / rho1.sum())) == pytest.approx(0.145946, abs=1e-6)


@settings(max_examples=200, deadline=None)
@given(bell_states(), bell_states(), bell_states())
def test_metric_properties(p, q, r):
    T, F = trace_distance(p, q), state_fidelity(p, q)
    assert 0.0 <= T <= 1.0 and 0.0 <= F <= 1.0
    assert T == pytest.approx(trace_distance(q, p), abs=1e-15)
    assert F == pytest.approx(state_fidelity(q, p), abs=1e-14)
    assert trace_distance(p, r) <= T + trace_distance(q, r) + 1e-12
    # Fuchs-van de Graaf
    assert 1 - np.sqrt(F) <= T + 1e-12
    assert T <= np.sqrt(max(0.0, 1 - F)) + 1e-7


def _kkt_projection(y):
    cons = [{"type": "eq", "fun": lambda x: x.sum() - 1}]
    res = minimize(lambda x: 0.5 * np.sum((x - y) ** 2), np.full(4, 0.25), jac=lambda x: x - y,
                   bounds=[(0, None)] * 4, constraints=cons, method="SLSQP", options={"ftol": 1e-14})
    return res.x


def test_projection_examples():
    assert project_to_simplex([0.7, 0.1, 0.1, 0.1]).as_array() == pytest.approx([0.7, 0.1, 0.1, 0.1], abs=1e-15)
    assert project_to_simplex([0.25] * 4).as_array() == pytest.approx([0.25] * 4, abs=1e-15)
    y = np.array([1.02, -0.01, -0.01, 0.0])
    x = project_to_simplex(y).as_array()
    assert x.sum() == pytest.approx(1.0, abs=1e-15) and np.all(x >= 0)
    assert x == pytest.approx(_kkt_projection(y), abs=1e-7)
    # KKT: the active entries share a common shift, inactive ones sit below it
    tau = (y - x)[x > 0]
    assert np.ptp(tau) < 1e-12
    assert np.all(y[x == 0] <= tau[0] + 1e-12)


def test_projection_rejects_non_finite():
    with pytest.raises(DomainError):
        project_to_simplex([np.nan, 0, 0, 1])
    with pytest.raises(DomainError):
        project_to_simplex([1, 0, 0])


vectors = st.lists(st.floats(-3, 3), min_size=4, max_size=4).map(np.array)


@settings(max_examples=300, deadline=None)
@given(vectors, vectors)
def test_projection_idempotent_and_nonexpansive(y, z):
    py, pz = project_to_simplex(y).as_array(), project_to_simplex(z).as_array()
    assert on_simplex(py)
    assert project_to_simplex(py).as_array() == pytest.approx(py, abs=1e-12)
    assert np.linalg.norm(py - pz) <= np.linalg.norm(y - z) + 1e-12
