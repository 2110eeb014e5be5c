"""Reconstruct a Bell-diagonal state from the three parity-agree proportions.

Noiseless case: the location-1 and location-2 proportions fix ``a + b`` and
``a + d`` through ``p = x**2 + (1 - x)**2``, and the location-3 proportion is
linear in ``a`` once those are known:

    p3 - 1/2 = -(1/2) (2 p1 - 1) sqrt(2 p2 - 1) (4 a - 1 - r1 - r2),

with ``r_i = sqrt(2 p_i - 1)``.  For noisy circuits the marginals are quartic
forms taken from the circuit oracle and the system is solved numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import CircuitModel, MeasurementTally, build_circuit
from .errors import DomainError, InfeasibleProportionsError, LowParityError, SingularGradientError
from .states import IDEAL, BellDiagonalState, as_noise, on_simplex, project_to_simplex

LOW_PARITY_TOL = 1e-6
CLAMP_EPS = 1e-9
ROOT_RESIDUAL = 1e-9
NEWTON_MAX_ITER = 100
NEWTON_TOL = 1e-14
ROOT_TIE = 1e-12

# Reduced coordinates (a, b, c) -> (a, b, c, 1 - a - b - c).
_EMBED = np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0], [-1.0, -1.0, -1.0]])
_OFFSET = np.array([0.0, 0.0, 0.0, 1.0])


@dataclass(frozen=True)
class ParityProportions:
    """Agree fractions at locations 1..3; ``n_shots=0`` marks exact input."""

    p1: float
    p2: float
    p3: float
    n_shots: int = 0

    def __post_init__(self):
        for name in ("p1", "p2", "p3"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v < 0.0 or v > 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v!r}")
            object.__setattr__(self, name, v)
        if int(self.n_shots) != self.n_shots or self.n_shots < 0:
            raise DomainError("n_shots must be a non-negative integer")

    @classmethod
    def from_tally(cls, tally: MeasurementTally) -> "ParityProportions":
        if tally.n_shots < 1:
            raise DomainError("tally has no shots")
        p = tally.proportions
        return cls(p[0], p[1], p[2], tally.n_shots)

    def as_array(self) -> np.ndarray:
        return np.array([self.p1, self.p2, self.p3])


def as_proportions(p) -> ParityProportions:
    if isinstance(p, ParityProportions):
        return p
    p1, p2, p3 = (float(v) for v in p)
    return ParityProportions(p1, p2, p3)


@dataclass(frozen=True)
class ReconstructionResult:
    state: BellDiagonalState
    raw: np.ndarray
    clamped: bool = False
    projected: bool = False
    ambiguous: bool = False
    residual: float = 0.0
    method: str = "closed-form"

    @property
    def a_hat(self) -> float:
        return self.state.a


def _clamp(p: ParityProportions):
    q = p.as_array()
    if q[0] < 0.5 - LOW_PARITY_TOL or q[1] < 0.5 - LOW_PARITY_TOL:
        raise LowParityError(
            f"p1={q[0]:.6g}, p2={q[1]:.6g}: below 1/2, outside the estimation regime (fidelity >= 1/2)"
        )
    clamped = False
    for i in (0, 1):
        if q[i] < 0.5 + CLAMP_EPS:
            q[i] = 0.5 + CLAMP_EPS
            clamped = True
    return q, clamped


def ideal_inverse_vector(q) -> np.ndarray:
    """Unconstrained noiseless inverse of ``(p1, p2, p3)``; needs p1, p2 > 1/2."""
    p1, p2, p3 = q
    r1, r2 = math.sqrt(2 * p1 - 1), math.sqrt(2 * p2 - 1)
    a = (1 + r1 + r2 - (2 * p3 - 1) / (r1 * r1 * r2)) / 4
    x, y = (1 + r1) / 2, (1 + r2) / 2
    return np.array([a, x - a, 1 - x - y + a, y - a])


def ideal_inverse_gradient(q) -> np.ndarray:
    """Gradient of the noiseless ``a``-estimator with respect to ``(p1, p2, p3)``."""
    p1, p2, p3 = q
    if min(p1, p2) <= 0.5:
        raise SingularGradientError("estimator is singular at p1 = 1/2 or p2 = 1/2")
    r1, r2 = math.sqrt(2 * p1 - 1), math.sqrt(2 * p2 - 1)
    u = 2 * p3 - 1
    return np.array([
        (1 / r1 + 2 * u / (r1**4 * r2)) / 4,
        (1 / r2 + u / (r1**2 * r2**3)) / 4,
        -1 / (2 * r1**2 * r2),
    ])


def _finish(raw, clamped, method, residual=0.0, ambiguous=False) -> ReconstructionResult:
    raw = np.asarray(raw, dtype=float)
    if on_simplex(raw):
        state, projected = BellDiagonalState.from_vector(raw), False
    else:
        state, projected = project_to_simplex(raw), True
    return ReconstructionResult(state, raw, clamped, projected, ambiguous, float(residual), method)


def invert_ideal(p) -> ReconstructionResult:
    """Closed-form reconstruction for a noiseless circuit."""
    q, clamped = _clamp(as_proportions(p))
    return _finish(ideal_inverse_vector(q), clamped, "closed-form")


def _newton(resp, target, u0):
    u = np.array(u0, dtype=float)

    def resid(u):
        f, J = resp.agree_and_jacobian(_EMBED @ u + _OFFSET)
        return f - target, J @ _EMBED

    r, J = resid(u)
    norm = np.linalg.norm(r)
    for _ in range(NEWTON_MAX_ITER):
        if norm < NEWTON_TOL:
            break
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(J, -r, rcond=None)[0]
        t = 1.0
        while t > 1e-10:
            u_new = u + t * step
            r_new, J_new = resid(u_new)
            n_new = np.linalg.norm(r_new)
            if n_new < norm:
                break
            t *= 0.5
        else:
            break
        u, r, J, norm = u_new, r_new, J_new, n_new
    return u, norm


def _starts(q):
    starts = []
    try:
        starts.append(ideal_inverse_vector(q)[:3])
    except (ValueError, ZeroDivisionError):
        pass
    for F in (0.55, 0.7, 0.85, 0.99):
        e = (1 - F) / 3
        starts.append(np.array([F, e, e]))
    starts += [np.array([0.6, 0.3, 0.05]), np.array([0.6, 0.05, 0.3]), np.array([0.6, 0.05, 0.05])]
    return starts[:8]


def _preferred(u):
    s = _EMBED @ u + _OFFSET
    # Branch of the square roots implied by fidelity >= 1/2.
    return s[0] + s[1] >= 0.5 - 1e-9 and s[0] + s[3] >= 0.5 - 1e-9


def invert_general(p, noise=IDEAL, oracle: CircuitModel | None = None) -> ReconstructionResult:
    """Solve ``f_i(lambda, a, b, c, d) = p_i`` by multi-start damped Newton.

    Among converged roots, those with ``a + b, a + d >= 1/2`` are preferred,
    then the smallest residual, then the largest ``a``.
    """
    noise = as_noise(noise)
    oracle = build_circuit(noise) if oracle is None else oracle
    if abs(oracle.lam - noise.lam) > 0:
        raise DomainError(f"oracle noise {oracle.lam} does not match requested {noise.lam}")
    q, clamped = _clamp(as_proportions(p))
    resp = oracle.response()
    roots = []
    for u0 in _starts(q):
        u, res = _newton(resp, q, u0)
        if res <= ROOT_RESIDUAL and not any(np.allclose(u, v, atol=1e-7) for v, _ in roots):
            roots.append((u, res))
    if not roots:
        raise InfeasibleProportionsError(f"no root of the parity equations for p={q}")
    best = min(roots, key=lambda t: (not _preferred(t[0]), round(t[1] / ROOT_TIE), -t[0][0]))
    distinct_preferred = [r for r in roots if _preferred(r[0])]
    ambiguous = len(distinct_preferred) > 1
    return _finish(_EMBED @ best[0] + _OFFSET, clamped, "newton", best[1], ambiguous)


def invert(p, noise=IDEAL, oracle: CircuitModel | None = None) -> ReconstructionResult:
    """Closed form when noiseless, numerical inversion otherwise."""
    noise = as_noise(noise)
    if noise.is_ideal:
        return invert_ideal(p)
    return invert_general(p, noise, oracle)


def estimate_from_tally(tally: MeasurementTally, noise=IDEAL, oracle: CircuitModel | None = None) -> ReconstructionResult:
    return invert(ParityProportions.from_tally(tally), noise, oracle)


def rounded_noiseless_estimator(p1, p2, p3):
    """Integer-coefficient approximation of the noiseless inverse."""
    s1, s2 = np.sqrt(p1 - 0.5), np.sqrt(p2 - 0.5)
    num = (
        2000 * p1 * p2 + 2000 * p1 * s1 * s2 + 1414 * p1 * s2
        - 1000 * p1 - 1000 * p2 - 1000 * p3 - 1000 * s1 * s2 - 707 * s2 + 1000
    )
    return num / ((5657 * p1 - 2828) * s2)


def rounded_tenth_noise_estimator(p1, p2, p3):
    """Integer-coefficient approximation of the inverse at depolarizing 0.1."""
    s1, s2 = np.sqrt(p1 - 0.5), np.sqrt(p2 - 0.5)
    num = (
        1503 * p1 * p2 + 1503 * p1 * s1 * s2 + 957 * p1 * s2 - 752 * p1 - 752 * p2
        - 1414 * p3 - 752 * s1 * s2 - 478 * s2 + 1083
    )
    return num / (3826 * p1 * s2 - 1913 * s2)
