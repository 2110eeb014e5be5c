"""Delta-method uncertainty of the fidelity estimator.

With ``n`` shots the proportions ``p`` are approximately normal with
covariance ``Sigma / n``, so ``a_hat = g(p)`` has standard deviation
``sigma1 / sqrt(n)`` where ``sigma1**2 = grad(g)^T Sigma grad(g)``.

Two choices of ``Sigma`` are available.  ``"diagonal"`` treats the three
locations as independent binomials (``f_i (1 - f_i)`` on the diagonal, zero
elsewhere); ``"joint"`` uses the exact per-shot covariance, including the
correlations between locations measured in the same run.  The diagonal form
is the default because it is the one that reproduces the published
uncertainty tables; see ``tests/test_sigma_convention.py``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import CircuitModel, build_circuit, joint_parity_distribution
from .errors import DomainError, SingularGradientError
from .estimate import ideal_inverse_gradient, invert_general
from .states import IDEAL, BellDiagonalState, as_noise, as_state

FD_STEP = 1e-6
RICHARDSON_RTOL = 1e-5
CONVENTIONS = ("diagonal", "joint")
DEFAULT_CONVENTION = "diagonal"


@dataclass(frozen=True)
class ShotCovariance:
    matrix: np.ndarray
    convention: str = "joint"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float).reshape(3, 3)
        m = (m + m.T) / 2
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class SigmaCurve:
    """``sigma(n) = sigma1 / sqrt(n)``."""

    sigma1: float
    state: BellDiagonalState
    lam: float
    convention: str = DEFAULT_CONVENTION

    def __post_init__(self):
        if not (self.sigma1 >= 0.0):
            raise DomainError(f"sigma1 must be non-negative, got {self.sigma1!r}")

    def sigma(self, n) -> float:
        return self.sigma1 / math.sqrt(n)


def _oracle(noise, oracle):
    noise = as_noise(noise)
    return noise, (build_circuit(noise) if oracle is None else oracle)


def marginal_parity_probs(state, oracle: CircuitModel) -> np.ndarray:
    return joint_parity_distribution(state, oracle).agree


def shot_covariance(state, oracle: CircuitModel, convention: str = "joint") -> ShotCovariance:
    """Per-shot covariance of the three agree indicators."""
    dist = joint_parity_distribution(state, oracle)
    f = dist.agree
    if convention == "joint":
        m = dist.agree_second_moments() - np.outer(f, f)
    elif convention == "diagonal":
        m = np.diag(f * (1 - f))
    else:
        raise DomainError(f"unknown covariance convention {convention!r}; use one of {CONVENTIONS}")
    m[np.abs(m) < 1e-17] = 0.0
    return ShotCovariance(m, convention)


def _raw_a(q, noise, oracle):
    return invert_general(q, noise, oracle).raw[0]


def _fd_gradient(f, noise, oracle, h):
    g = np.zeros(3)
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        g[i] = (_raw_a(f + e, noise, oracle) - _raw_a(f - e, noise, oracle)) / (2 * h)
    return g


def estimator_gradient(f, noise=IDEAL, oracle: CircuitModel | None = None, step: float = FD_STEP) -> np.ndarray:
    """Gradient of the ``a``-estimator with respect to the proportions at ``f``."""
    f = np.asarray(f, dtype=float)
    noise, oracle = _oracle(noise, oracle)
    if noise.is_ideal:
        return ideal_inverse_gradient(f)
    if min(f[0], f[1]) <= 0.5 + 2 * step or np.any(f - step < 0) or np.any(f + step > 1):
        raise SingularGradientError(f"proportions {f} are too close to the estimator boundary")
    coarse = _fd_gradient(f, noise, oracle, step)
    fine = _fd_gradient(f, noise, oracle, step / 2)
    scale = max(np.max(np.abs(fine)), 1.0)
    if np.max(np.abs(fine - coarse)) > RICHARDSON_RTOL * scale:
        return (4 * fine - coarse) / 3
    return fine


def sigma_one(state, noise=IDEAL, oracle: CircuitModel | None = None, convention: str = DEFAULT_CONVENTION) -> SigmaCurve:
    s = as_state(state)
    if s.a < 0.5:
        raise DomainError(f"fidelity {s.a} is below 1/2; the estimator is not defined there")
    noise, oracle = _oracle(noise, oracle)
    f = marginal_parity_probs(s, oracle)
    if s.a == 1.0 and noise.is_ideal:
        return SigmaCurve(0.0, s, noise.lam, convention)
    g = estimator_gradient(f, noise, oracle)
    cov = shot_covariance(s, oracle, convention).matrix
    return SigmaCurve(float(math.sqrt(max(g @ cov @ g, 0.0))), s, noise.lam, convention)


def confidence_interval(a_hat: float, curve: SigmaCurve, n: int, k_sigma: float = 3.0) -> tuple[float, float]:
    """``a_hat +/- k sigma1 / sqrt(n)`` clipped to ``[0, 1]``."""
    if n < 1:
        raise DomainError("n must be at least 1")
    if k_sigma < 0:
        raise DomainError("k_sigma must be non-negative")
    half = k_sigma * curve.sigma(n)
    return max(0.0, a_hat - half), min(1.0, a_hat + half)
