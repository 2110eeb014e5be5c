import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellcert import estimate as est
from bellcert.circuit import MeasurementTally, build_circuit, joint_parity_distribution, sample_shots
from bellcert.errors import DomainError, InfeasibleProportionsError, LowParityError
from bellcert.estimate import (
    ParityProportions,
    estimate_from_tally,
    ideal_inverse_gradient,
    invert_general,
    invert_ideal,
    rounded_noiseless_estimator,
    rounded_tenth_noise_estimator,
)
from bellcert.states import make_werner

from conftest import states_with_fidelity

P7 = (0.68, 0.68, 0.4352)


def debiased_inverse(p, lam):
    """Independent inverse for this noise placement.

    Locations 1 and 2 see two noisy CNOTs, location 3 sees ten channels, and
    each channel shrinks the parity bias by (1 - lam).
    """
    q = np.array(p, dtype=float)
    q[:2] = 0.5 + (q[:2] - 0.5) / (1 - lam) ** 2
    q[2] = 0.5 + (q[2] - 0.5) / (1 - lam) ** 10
    return est.ideal_inverse_vector(q)


def test_ideal_examples():
    r = invert_ideal(P7)
    assert r.a_hat == pytest.approx(0.7, abs=1e-12)
    assert r.state.as_array() == pytest.approx([0.7, 0.1, 0.1, 0.1], abs=1e-12)
    assert not (r.clamped or r.projected)
    assert invert_ideal((1, 1, 0)).state.as_array() == pytest.approx([1, 0, 0, 0], abs=1e-12)


def test_continuity_in_p3():
    eps = 1e-6
    a0 = invert_ideal(P7).raw[0]
    a1 = invert_ideal((0.68, 0.68, 0.4352 + eps)).raw[0]
    slope = ideal_inverse_gradient(P7)[2]
    assert a1 - a0 == pytest.approx(slope * eps, rel=1e-5)
    assert a1 < a0


def test_rounded_closed_form_matches_to_four_digits():
    assert rounded_noiseless_estimator(*P7) == pytest.approx(0.7, abs=5e-4)


def test_low_parity_and_clamping():
    with pytest.raises(LowParityError):
        invert_ideal((0.49, 0.7, 0.5))
    r = invert_ideal((0.5 - 5e-7, 0.7, 0.45))
    assert r.clamped
    r = invert_ideal((0.62, 0.62, 0.2))
    assert r.projected and not r.clamped
    assert r.state.a == pytest.approx(max(0.0, min(1.0, r.state.a)))


def test_proportions_validation():
    with pytest.raises(DomainError):
        ParityProportions(1.2, 0.5, 0.5)
    with pytest.raises(DomainError):
        ParityProportions(0.5, 0.5, 0.5, n_shots=-1)


def test_general_agrees_with_closed_form_noiseless():
    r = invert_general(P7, 0.0, build_circuit(0.0))
    assert r.state.as_array() == pytest.approx(invert_ideal(P7).state.as_array(), abs=1e-8)


@pytest.mark.parametrize("lam", [0.01, 0.1])
def test_general_round_trip(lam):
    m = build_circuit(lam)
    f = joint_parity_distribution(make_werner(0.7), m).agree
    r = invert_general(f, lam, m)
    assert r.state.as_array() == pytest.approx([0.7, 0.1, 0.1, 0.1], abs=1e-6)
    assert r.residual < 1e-9 and not r.ambiguous


@pytest.mark.parametrize("lam", [0.01, 0.1, 0.3])
def test_general_matches_debiased_inverse(lam):
    m = build_circuit(lam)
    rng = np.random.default_rng(3)
    for _ in range(20):
        s = states_with_fidelity(1, 0.55, 0.99, seed=int(rng.integers(1 << 30)))[0]
        f = joint_parity_distribution(s, m).agree
        f = f + rng.normal(scale=2e-3, size=3)
        r = invert_general(f, lam, m)
        assert r.raw == pytest.approx(debiased_inverse(f, lam), abs=1e-9)


def test_tenth_noise_rounded_formula():
    m = build_circuit(0.1)
    f = joint_parity_distribution(make_werner(0.7), m).agree
    assert rounded_tenth_noise_estimator(*f) == pytest.approx(0.7, abs=5e-3)


def test_oracle_mismatch_rejected():
    with pytest.raises(DomainError):
        invert_general(P7, 0.1, build_circuit(0.0))


def test_infeasible_is_reported(monkeypatch):
    monkeypatch.setattr(est, "ROOT_RESIDUAL", -1.0)
    with pytest.raises(InfeasibleProportionsError):
        invert_general(P7, 0.1, build_circuit(0.1))


def test_noiseless_estimator_decreases_in_p3():
    for p1 in np.linspace(0.52, 1.0, 9):
        for p2 in np.linspace(0.52, 1.0, 9):
            for p3 in np.linspace(0.0, 1.0, 5):
                assert ideal_inverse_gradient((p1, p2, p3))[2] < 0


@settings(max_examples=100, deadline=None)
@given(st.floats(0.5, 1.0), st.floats(0.5, 1.0), st.floats(0.0, 1.0))
def test_flags_iff_repair(p1, p2, p3):
    r = invert_ideal((p1, p2, p3))
    assert r.clamped == (min(p1, p2) < 0.5 + est.CLAMP_EPS)
    raw_ok = np.all(r.raw >= -1e-12) and abs(r.raw.sum() - 1) < 1e-12
    assert r.projected == (not raw_ok)
    assert r.a_hat == r.state.a


def test_tally_paths():
    t = MeasurementTally.from_agree_counts(10_000, [6800, 6800, 4352])
    assert estimate_from_tally(t, 0.0).a_hat == pytest.approx(0.7, abs=1e-12)
    perfect = MeasurementTally.from_agree_counts(50, [50, 50, 0])
    assert estimate_from_tally(perfect, 0.0).a_hat == pytest.approx(1.0, abs=1e-12)
    m = build_circuit(0.0)
    n = 10**6
    t = sample_shots(make_werner(0.95), m, n, seed=2024)
    assert abs(estimate_from_tally(t, 0.0, m).a_hat - 0.95) <= 3 * 0.2108 / np.sqrt(n)


def test_tally_paths_noisy():
    m = build_circuit(0.1)
    t = sample_shots(make_werner(0.95), m, 10**6, seed=5)
    r = estimate_from_tally(t, 0.1, m)
    assert r.method == "newton"
    assert abs(r.a_hat - 0.95) <= 3 * 0.8585 / 1000
