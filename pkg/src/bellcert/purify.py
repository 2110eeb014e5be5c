"""Recursive purification: closed forms when noiseless, circuit oracle otherwise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import analytic
from .circuit import DEGENERATE_P, build_circuit, output_state_on_success
from .errors import DegeneratePostSelectionError, DomainError, UnreachableThresholdError
from .states import IDEAL, BellDiagonalState, as_noise, as_state, make_werner

THRESHOLD_XTOL = 1e-4
THRESHOLD_BRACKET = (0.0, 0.5)


@dataclass(frozen=True)
class PurificationOutcome:
    output: BellDiagonalState
    success_probability: float
    round_index: int

    @property
    def fidelity(self) -> float:
        return self.output.a


@dataclass(frozen=True)
class Trajectory:
    """Round 0 is the input (success probability 1 by convention)."""

    rounds: tuple

    def __post_init__(self):
        idx = [r.round_index for r in self.rounds]
        if idx != list(range(len(idx))):
            raise DomainError("trajectory rounds must be numbered 0, 1, 2, ...")

    @property
    def initial(self) -> BellDiagonalState:
        return self.rounds[0].output

    @property
    def fidelities(self) -> np.ndarray:
        return np.array([r.fidelity for r in self.rounds])

    @property
    def success_probabilities(self) -> np.ndarray:
        """Per-round success probabilities for rounds 1..m."""
        return np.array([r.success_probability for r in self.rounds[1:]])

    def __len__(self):
        return len(self.rounds)

    def __getitem__(self, k) -> PurificationOutcome:
        return self.rounds[k]


def success_probability_ideal(state) -> float:
    return float(analytic.success_polynomial(*as_state(state)))


def purify_once_ideal(state, round_index: int = 1) -> PurificationOutcome:
    s = as_state(state)
    num = np.array(analytic.purified_numerators(*s))
    P = float(num.sum())
    if P < DEGENERATE_P:
        raise DegeneratePostSelectionError(f"success probability {P:.3g} is degenerate")
    return PurificationOutcome(BellDiagonalState.from_vector(num / P), P, round_index)


def iterate(state, noise=IDEAL, rounds: int = 1) -> Trajectory:
    """Feed each round's output, four copies at a time, into the next round."""
    if int(rounds) != rounds or rounds < 1:
        raise DomainError(f"rounds must be a positive integer, got {rounds!r}")
    noise = as_noise(noise)
    model = None if noise.is_ideal else build_circuit(noise)
    done = [PurificationOutcome(as_state(state), 1.0, 0)]
    for k in range(1, int(rounds) + 1):
        prev = done[-1].output
        try:
            if model is None:
                done.append(purify_once_ideal(prev, k))
            else:
                out, P = output_state_on_success(prev, model)
                done.append(PurificationOutcome(out, P, k))
        except DegeneratePostSelectionError as exc:
            raise DegeneratePostSelectionError(str(exc), completed=Trajectory(tuple(done))) from exc
    return Trajectory(tuple(done))


def single_round_gain(initial_F: float, lam: float) -> float:
    """Fidelity change of a Werner input after one round at noise ``lam``."""
    w = make_werner(initial_F)
    out, _ = output_state_on_success(w, build_circuit(lam))
    return out.a - w.a


def find_lambda_threshold(initial_F: float, xtol: float = THRESHOLD_XTOL) -> float:
    """Largest noise level at which one round still improves a Werner input."""
    F = float(initial_F)
    if not (0.5 < F <= 1.0):
        raise DomainError(f"initial fidelity must lie in (0.5, 1], got {initial_F!r}")
    if F == 1.0:
        return 0.0
    lo, hi = THRESHOLD_BRACKET
    g_lo, g_hi = single_round_gain(F, lo), single_round_gain(F, hi)
    if not (g_lo > 0 > g_hi):
        raise UnreachableThresholdError(
            f"no sign change of the single-round gain on [{lo}, {hi}] (gains {g_lo:.3g}, {g_hi:.3g})"
        )
    return float(optimize.bisect(lambda x: single_round_gain(F, x), lo, hi, xtol=xtol))
