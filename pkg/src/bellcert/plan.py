"""Bell-pair budgets for certifying, or purifying then certifying, a fidelity."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnreachableThresholdError
from .purify import iterate
from .states import IDEAL, as_noise, make_werner
from .stats import DEFAULT_CONVENTION, SigmaCurve, sigma_one

PAIRS_PER_RUN = 4
MAX_PLAN_ROUNDS = 10
FIDELITY_DIGITS = 3


@dataclass(frozen=True)
class ResourcePlan:
    circuit_runs: int
    bell_pairs: int
    rounds: int
    per_round_success: tuple
    target_halfwidth: float
    confidence_k: float
    sigma1: float
    fidelity: float

    def __post_init__(self):
        if self.bell_pairs < self.circuit_runs:
            raise DomainError("a plan cannot use fewer pairs than circuit runs")
        if any(not (0.0 < p <= 1.0) for p in self.per_round_success):
            raise DomainError("per-round success probabilities must lie in (0, 1]")

    @property
    def target_sigma(self) -> float:
        return self.target_halfwidth / self.confidence_k if self.confidence_k else math.inf


def _sigma1(curve) -> float:
    return curve.sigma1 if isinstance(curve, SigmaCurve) else float(curve)


def runs_for_halfwidth(curve, halfwidth: float, k_sigma: float = 3.0) -> int:
    """Smallest ``n`` with ``k sigma1 / sqrt(n) <= halfwidth``."""
    if not halfwidth > 0:
        raise DomainError(f"halfwidth must be positive, got {halfwidth!r}")
    s = _sigma1(curve)
    if s == 0.0 or k_sigma == 0:
        return 1
    x = (k_sigma * s / halfwidth) ** 2
    # Guard against x landing a few ulps above an integer.
    return max(1, math.ceil(x * (1 - 1e-12)))


def pairs_for_certification(F: float, noise=IDEAL, halfwidth: float = 0.01, k_sigma: float = 3.0,
                            convention: str = DEFAULT_CONVENTION) -> ResourcePlan:
    """Pairs needed so that the k-sigma interval of a Werner-``F`` estimate is within ``halfwidth``."""
    if F < 0.5 or F > 1:
        raise DomainError(f"fidelity must lie in [0.5, 1], got {F!r}")
    curve = sigma_one(make_werner(F), as_noise(noise), convention=convention)
    n = runs_for_halfwidth(curve, halfwidth, k_sigma)
    return ResourcePlan(n, PAIRS_PER_RUN * n, 0, (), halfwidth, k_sigma, curve.sigma1, F)


def purify_and_certify_plan(F0: float, noise=IDEAL, threshold: float = 0.9, k_sigma: float = 3.0,
                            rounding: str = "printed", convention: str = DEFAULT_CONVENTION,
                            strategy: str = "fewest-rounds") -> ResourcePlan:
    """Purify a Werner-``F0`` supply until it beats ``threshold``, then certify it.

    The fidelity after ``m`` rounds is taken from the (noise-aware) trajectory
    and must sit ``k_sigma`` standard deviations above ``threshold``.  The
    cost counts the expected number of raw pairs behind the ``n`` certified
    pairs: ``n * 4**m / prod(P_k)``.  With ``rounding="printed"`` the round-m
    fidelity is rounded to three decimals before the margin is formed;
    ``rounding="exact"`` keeps it unrounded.

    ``strategy="fewest-rounds"`` stops at the first round that beats the
    threshold.  Its cost jumps down whenever a higher threshold forces an
    extra round with a wider margin.  ``strategy="cheapest"`` instead takes
    the cheapest of all rounds up to ``MAX_PLAN_ROUNDS`` that beat the
    threshold, which makes the cost non-decreasing in the threshold.
    """
    if F0 < 0.5 or F0 > 1:
        raise DomainError(f"initial fidelity must lie in [0.5, 1], got {F0!r}")
    if not (0 < threshold < 1):
        raise DomainError(f"threshold must lie in (0, 1), got {threshold!r}")
    if rounding not in ("printed", "exact"):
        raise DomainError(f"unknown rounding mode {rounding!r}")
    if strategy not in ("fewest-rounds", "cheapest"):
        raise DomainError(f"unknown strategy {strategy!r}")
    noise = as_noise(noise)
    if F0 > threshold:
        return pairs_for_certification(F0, noise, F0 - threshold, k_sigma, convention)
    traj = iterate(make_werner(F0), noise, MAX_PLAN_ROUNDS)
    above = np.nonzero(traj.fidelities > threshold)[0]
    if len(above) == 0:
        raise UnreachableThresholdError(
            f"threshold {threshold} not reached within {MAX_PLAN_ROUNDS} rounds "
            f"(best fidelity {traj.fidelities.max():.6f})"
        )
    plans = []
    for m in (above[:1] if strategy == "fewest-rounds" else above):
        try:
            plans.append(_plan_at_round(traj, int(m), noise, threshold, k_sigma, rounding, convention))
        except UnreachableThresholdError:
            if strategy == "fewest-rounds":
                raise
    if not plans:
        raise UnreachableThresholdError(f"no round leaves a margin above {threshold}")
    return min(plans, key=lambda p: (p.bell_pairs, p.rounds))


def _plan_at_round(traj, m, noise, threshold, k_sigma, rounding, convention) -> ResourcePlan:
    a_m = traj[m].fidelity
    a_used = round(a_m, FIDELITY_DIGITS) if rounding == "printed" else a_m
    halfwidth = a_used - threshold
    if halfwidth <= 0:
        raise UnreachableThresholdError(
            f"round-{m} fidelity {a_m:.6f} rounds to {a_used}, leaving no margin above {threshold}"
        )
    curve = sigma_one(traj[m].output, noise, convention=convention)
    n = runs_for_halfwidth(curve, halfwidth, k_sigma)
    success = tuple(float(p) for p in traj.success_probabilities[:m])
    pairs = round(n * 4**m / float(np.prod(success)))
    return ResourcePlan(n, int(pairs), m, success, halfwidth, k_sigma, curve.sigma1, a_m)
