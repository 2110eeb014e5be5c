"""Bell-diagonal states and the metrics used to compare them.

A Bell-diagonal state is stored as its probability 4-vector over
``(|Phi+>, |Psi+>, |Psi->, |Phi->)``.  The first coefficient is the fidelity
with the target pair ``|Phi+>``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

SIMPLEX_TOL = 1e-12
RENORMALIZE_TOL = 1e-9

BELL_LABELS = ("phi+", "psi+", "psi-", "phi-")


@dataclass(frozen=True)
class BellDiagonalState:
    """Probability vector ``(a, b, c, d)`` over the Bell basis.

    Construction validates the simplex invariants.  Float drift up to
    ``RENORMALIZE_TOL`` in the sum (or slightly negative entries of that size)
    is repaired; anything larger raises :class:`DomainError`.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        v = np.array([self.a, self.b, self.c, self.d], dtype=float)
        if not np.all(np.isfinite(v)):
            raise DomainError(f"non-finite Bell coefficients {v}")
        if np.any(v < -RENORMALIZE_TOL) or np.any(v > 1 + RENORMALIZE_TOL):
            raise DomainError(f"Bell coefficients outside [0, 1]: {v}")
        total = v.sum()
        if abs(total - 1.0) > RENORMALIZE_TOL:
            raise DomainError(f"Bell coefficients sum to {total!r}, not 1")
        v = np.clip(v, 0.0, None)
        v = v / v.sum()
        for name, value in zip("abcd", v):
            object.__setattr__(self, name, float(value))

    @classmethod
    def from_vector(cls, v) -> "BellDiagonalState":
        v = np.asarray(v, dtype=float).reshape(-1)
        if v.shape != (4,):
            raise DomainError(f"expected 4 coefficients, got shape {v.shape}")
        return cls(*v)

    @property
    def fidelity(self) -> float:
        return self.a

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d])

    def __iter__(self):
        return iter((self.a, self.b, self.c, self.d))

    def is_close(self, other: "BellDiagonalState", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.as_array(), other.as_array(), rtol=0, atol=atol))


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing parameter applied after every noisy gate.

    A gate on ``k`` qubits is followed by ``rho -> (1 - lam) rho + lam I/2^k``
    on those qubits.
    """

    lam: float = 0.0

    def __post_init__(self):
        lam = float(self.lam)
        if not (np.isfinite(lam) and 0.0 <= lam < 1.0):
            raise DomainError(f"depolarizing parameter must lie in [0, 1), got {self.lam!r}")
        object.__setattr__(self, "lam", lam)

    @property
    def is_ideal(self) -> bool:
        return self.lam == 0.0


IDEAL = NoiseModel(0.0)


def as_state(x) -> BellDiagonalState:
    if isinstance(x, BellDiagonalState):
        return x
    return BellDiagonalState.from_vector(x)


def as_noise(x) -> NoiseModel:
    if isinstance(x, NoiseModel):
        return x
    return NoiseModel(0.0 if x is None else x)


def make_werner(F: float) -> BellDiagonalState:
    """Werner state ``(F, (1-F)/3, (1-F)/3, (1-F)/3)``."""
    F = float(F)
    if not (0.0 <= F <= 1.0):
        raise DomainError(f"Werner fidelity must lie in [0, 1], got {F!r}")
    e = (1.0 - F) / 3.0
    return BellDiagonalState(F, e, e, e)


def state_fidelity(p, q) -> float:
    """Uhlmann fidelity of two commuting (Bell-diagonal) states.

    Reduces to the squared Bhattacharyya coefficient of the two vectors.
    """
    p, q = as_state(p).as_array(), as_state(q).as_array()
    return float(min(1.0, np.sum(np.sqrt(p * q)) ** 2))


def trace_distance(p, q) -> float:
    p, q = as_state(p).as_array(), as_state(q).as_array()
    return float(0.5 * np.abs(p - q).sum())


def project_to_simplex(raw) -> BellDiagonalState:
    """Euclidean projection of a 4-vector onto the probability simplex."""
    y = np.asarray(raw, dtype=float).reshape(-1)
    if y.shape != (4,):
        raise DomainError(f"expected 4 components, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise DomainError(f"cannot project non-finite vector {y}")
    u = np.sort(y)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, y.size + 1)
    rho = k[u - (css - 1.0) / k > 0][-1]
    tau = (css[rho - 1] - 1.0) / rho
    x = np.maximum(y - tau, 0.0)
    return BellDiagonalState.from_vector(x / x.sum())


def on_simplex(raw, tol: float = SIMPLEX_TOL) -> bool:
    y = np.asarray(raw, dtype=float)
    return bool(np.all(y >= -tol) and abs(y.sum() - 1.0) <= tol)
