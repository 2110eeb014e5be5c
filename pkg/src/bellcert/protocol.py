"""Estimate-then-purify driver.

Each round runs one batch of circuits on the current pairs.  The batch gives
parity statistics, hence a fidelity estimate; the same circuits' successful
outputs are the next round's pairs.  If the estimate reaches the threshold
the pairs are delivered; otherwise another round is run, up to
``max_rounds``.  A round that fails to raise the true fidelity by at least
``PLATEAU_TOL`` ends the run, since further rounds cannot help.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .circuit import build_circuit, output_state_on_success, sample_shots
from .errors import BellCertError, DomainError
from .estimate import estimate_from_tally
from .plan import PAIRS_PER_RUN, runs_for_halfwidth
from .states import as_noise, as_state
from .stats import confidence_interval, sigma_one

PLATEAU_TOL = 1e-6
DEFAULT_BATCH = 1_000
MAX_AUTO_BATCH = 1_000_000
K_SIGMA = 3.0


@dataclass(frozen=True)
class EstimationEvent:
    round: int
    circuit_runs: int
    bell_pairs: int
    agree_counts: tuple
    a_hat: float | None
    interval: tuple | None
    true_fidelity: float
    note: str = ""
    kind: str = "estimate"


@dataclass(frozen=True)
class PurificationEvent:
    round: int
    success_probability: float
    observed_success_fraction: float
    fidelity_before: float
    fidelity_after: float
    circuit_runs: int = 0  # these circuits are already counted by the batch
    bell_pairs: int = 0
    kind: str = "purify"


@dataclass(frozen=True)
class ProtocolRunLog:
    events: tuple
    decision: str  # deliver | continue | abort
    reason: str
    circuit_runs: int = field(init=False)
    bell_pairs: int = field(init=False)

    def __post_init__(self):
        if self.decision not in ("deliver", "continue", "abort"):
            raise DomainError(f"unknown decision {self.decision!r}")
        object.__setattr__(self, "circuit_runs", sum(e.circuit_runs for e in self.events))
        object.__setattr__(self, "bell_pairs", sum(e.bell_pairs for e in self.events))

    @property
    def purification_rounds(self) -> int:
        return sum(isinstance(e, PurificationEvent) for e in self.events)

    def to_dict(self) -> dict:
        return {
            "events": [asdict(e) for e in self.events],
            "decision": self.decision,
            "reason": self.reason,
            "purification_rounds": self.purification_rounds,
            "circuit_runs": self.circuit_runs,
            "bell_pairs": self.bell_pairs,
        }


def default_batch(state, noise, threshold) -> int:
    """Runs needed for a three-sigma margin between the current fidelity and the threshold."""
    margin = state.a - threshold
    if margin <= 1e-3:
        return DEFAULT_BATCH
    try:
        n = runs_for_halfwidth(sigma_one(state, noise), margin, K_SIGMA)
    except BellCertError:
        return DEFAULT_BATCH
    return int(min(max(n, 1), MAX_AUTO_BATCH))


def run_protocol(initial, noise, threshold: float, batch_shots: int | None = None,
                 max_rounds: int = 10, seed=0) -> ProtocolRunLog:
    if not (0.5 < threshold < 1):
        raise DomainError(f"threshold must lie in (0.5, 1), got {threshold!r}")
    if batch_shots is not None and (int(batch_shots) != batch_shots or batch_shots < 1):
        raise DomainError("batch_shots must be a positive integer")
    if max_rounds < 0:
        raise DomainError("max_rounds must be non-negative")
    noise = as_noise(noise)
    model = build_circuit(noise)
    state = as_state(initial)
    events = []
    k = 0
    while True:
        n = int(batch_shots) if batch_shots is not None else default_batch(state, noise, threshold)
        tally = sample_shots(state, model, n, np.random.SeedSequence(int(seed), spawn_key=(k,)))
        a_hat, interval, note = None, None, ""
        try:
            est = estimate_from_tally(tally, noise, model)
            a_hat = est.a_hat
            if est.clamped:
                note = "clamped"
            try:
                interval = confidence_interval(a_hat, sigma_one(est.state, noise, model), n, K_SIGMA)
            except BellCertError as exc:
                note = (note + "; " if note else "") + f"no interval: {type(exc).__name__}"
        except BellCertError as exc:
            note = f"estimation failed: {type(exc).__name__}"
        events.append(EstimationEvent(
            k, n, PAIRS_PER_RUN * n, tuple(int(c) for c in tally.agree_counts),
            a_hat, interval, state.a, note,
        ))
        if a_hat is not None and a_hat >= threshold:
            return ProtocolRunLog(tuple(events), "deliver", f"estimate {a_hat:.6f} >= threshold {threshold}")
        if k >= max_rounds:
            return ProtocolRunLog(tuple(events), "abort", f"max_rounds={max_rounds} reached")
        out, P = output_state_on_success(state, model)
        events.append(PurificationEvent(k + 1, P, tally.successes / n, state.a, out.a))
        if out.a - state.a < PLATEAU_TOL:
            return ProtocolRunLog(
                tuple(events), "abort",
                f"plateau: round {k + 1} changed fidelity by {out.a - state.a:.3g}, threshold unreachable",
            )
        state = out
        k += 1
