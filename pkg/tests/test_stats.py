import numpy as np
import pytest

from bellcert.circuit import build_circuit, sample_shots
from bellcert.errors import SingularGradientError
from bellcert.estimate import ideal_inverse_gradient, ideal_inverse_vector
from bellcert.states import make_werner
from bellcert.stats import (
    SigmaCurve,
    confidence_interval,
    estimator_gradient,
    marginal_parity_probs,
    shot_covariance,
    sigma_one,
)

from conftest import random_states, states_with_fidelity

IDEAL_M = build_circuit(0.0)


def test_marginals():
    assert marginal_parity_probs(make_werner(0.7), IDEAL_M) == pytest.approx([0.68, 0.68, 0.4352], abs=1e-12)
    assert marginal_parity_probs((1, 0, 0, 0), IDEAL_M) == pytest.approx([1, 1, 0], abs=1e-15)
    w = make_werner(0.99)
    x = 0.99 + 0.01 / 3
    assert marginal_parity_probs(w, IDEAL_M)[0] == pytest.approx(x**2 + (1 - x) ** 2, abs=1e-14)


def test_covariance_structure():
    for lam in (0.0, 0.1):
        m = build_circuit(lam)
        for s in random_states(20, seed=8):
            f = marginal_parity_probs(s, m)
            for conv in ("joint", "diagonal"):
                C = shot_covariance(s, m, conv).matrix
                assert np.allclose(np.diag(C), f * (1 - f), atol=1e-12)
                assert np.allclose(C, C.T)
                assert np.linalg.eigvalsh(C).min() >= -1e-12
    assert np.allclose(shot_covariance((1, 0, 0, 0), IDEAL_M).matrix, 0.0)


def test_cross_covariance_against_sampling():
    n = 10**7
    s = make_werner(0.7)
    t = sample_shots(s, IDEAL_M, n, seed=99)
    freq = t.joint_counts / n
    f1 = freq[0].sum()
    f3 = freq[:, :, 0].sum()
    both = freq[0, :, 0].sum()
    emp = both - f1 * f3
    exact = shot_covariance(s, IDEAL_M).matrix[0, 2]
    se = np.sqrt(both * (1 - both) / n) + np.sqrt(f1 * (1 - f1) / n) + np.sqrt(f3 * (1 - f3) / n)
    assert abs(emp - exact) < 3 * se


def test_analytic_gradient_against_finite_differences():
    h = 1e-6
    for s in states_with_fidelity(50, 0.55, 0.99, seed=4):
        f = marginal_parity_probs(s, IDEAL_M)
        g = ideal_inverse_gradient(f)
        fd = np.array([
            (ideal_inverse_vector(f + h * e)[0] - ideal_inverse_vector(f - h * e)[0]) / (2 * h)
            for e in np.eye(3)
        ])
        assert np.allclose(g, fd, rtol=1e-6, atol=1e-6 * np.abs(g).max())


@pytest.mark.parametrize("lam", [0.01, 0.1])
def test_noisy_gradient_against_debiased_closed_form(lam):
    m = build_circuit(lam)
    scale = np.array([(1 - lam) ** -2, (1 - lam) ** -2, (1 - lam) ** -10])
    for F in (0.55, 0.7, 0.95):
        f = marginal_parity_probs(make_werner(F), m)
        q = 0.5 + (f - 0.5) * scale
        want = ideal_inverse_gradient(q) * scale
        assert estimator_gradient(f, lam, m) == pytest.approx(want, rel=1e-6, abs=1e-6 * np.abs(want).max())


def test_boundary_raises():
    with pytest.raises(SingularGradientError):
        estimator_gradient((1.0, 0.5, 0.0), 0.0, IDEAL_M)
    with pytest.raises(SingularGradientError):
        estimator_gradient((0.5, 0.8, 0.3), 0.1, build_circuit(0.1))


@pytest.mark.parametrize("F,lam,want", [(0.99, 0.0, 0.0880), (0.55, 0.1, 11.2091), (0.7, 0.01, 1.2864)])
def test_sigma_one_examples(F, lam, want):
    assert sigma_one(make_werner(F), lam).sigma1 == pytest.approx(want, rel=0.02)


def test_sigma_ordering():
    Fs, lams = (0.55, 0.7, 0.95, 0.99), (0.0, 0.01, 0.1)
    tab = np.array([[sigma_one(make_werner(F), lam).sigma1 for F in Fs] for lam in lams])
    assert np.all(np.diff(tab, axis=1) < 0)
    assert np.all(np.diff(tab, axis=0) > 0)


def test_confidence_interval():
    curve = SigmaCurve(0.0880, make_werner(0.99), 0.0)
    lo, hi = confidence_interval(0.99, curve, 2841 // 4, 3)
    assert (hi - lo) / 2 == pytest.approx(0.0099, abs=1e-4)
    assert (hi - lo) / 2 <= 0.01
    assert confidence_interval(0.99, curve, 10, 0) == (0.99, 0.99)
    assert confidence_interval(0.999, curve, 4, 3)[1] == 1.0
