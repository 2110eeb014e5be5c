"""Monte Carlo harness: reconstruction sweeps and shot-sampled purification.

Seeding: replicate ``r`` at grid index ``g`` draws from
``np.random.SeedSequence(base_seed, spawn_key=(g, r))``.  Streams for
distinct ``(g, r)`` are independent and do not depend on how work is spread
over threads, so results are reduced in ``(g, r)`` order and the CSV output
is byte-identical for any worker count.
"""

from __future__ import annotations

import csv
import io
import json
import platform
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import metadata

import numpy as np

from .circuit import build_circuit, is_success, sample_frame_runs, sample_shots
from .errors import BellCertError, DomainError
from .estimate import estimate_from_tally
from .states import as_noise, as_state, make_werner, state_fidelity, trace_distance

SEED_SCHEME = "numpy SeedSequence(base_seed, spawn_key=(grid_index, replicate))"
SWEEP_COLUMNS = (
    "werner_F", "lambda", "base_seed", "replicates", "n",
    "mean_fidelity", "std_fidelity", "mean_trace_distance",
    "mean_a_hat", "std_a_hat", "exclusions",
)
FIGURE_CONFIGS = tuple((F, lam) for lam in (0.0, 0.1) for F in (0.95, 0.7, 0.55))


def default_grid(stop: int = 70_000, step: int = 1_000) -> tuple:
    return tuple(range(step, stop + 1, step))


@dataclass(frozen=True)
class SweepConfig:
    werner_F: float
    lam: float = 0.0
    n_grid: tuple = field(default_factory=default_grid)
    replicates: int = 20
    base_seed: int = 0

    def __post_init__(self):
        grid = tuple(int(n) for n in self.n_grid)
        if not grid or any(n < 1 for n in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise DomainError("n_grid must be a non-empty, strictly increasing list of positive counts")
        if int(self.replicates) != self.replicates or self.replicates < 1:
            raise DomainError("replicates must be a positive integer")
        if not (0.0 <= self.werner_F <= 1.0):
            raise DomainError("werner_F must lie in [0, 1]")
        as_noise(self.lam)
        object.__setattr__(self, "n_grid", grid)
        object.__setattr__(self, "replicates", int(self.replicates))
        object.__setattr__(self, "base_seed", int(self.base_seed))


@dataclass(frozen=True)
class SweepRow:
    n: int
    mean_fidelity: float
    std_fidelity: float
    mean_trace_distance: float
    mean_a_hat: float
    std_a_hat: float
    exclusions: int


@dataclass(frozen=True)
class ReplicateResult:
    fidelity: float
    trace_distance: float
    a_hat: float
    excluded: bool = False
    reason: str = ""


def replicate_seed(base_seed: int, grid_index: int, replicate: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(base_seed), spawn_key=(int(grid_index), int(replicate)))


def reconstruct_once(truth, model, n, seed) -> ReplicateResult:
    """Sample ``n`` shots, invert, and score against the truth."""
    tally = sample_shots(truth, model, n, seed)
    try:
        res = estimate_from_tally(tally, model.noise, model)
    except BellCertError as exc:
        return ReplicateResult(np.nan, np.nan, np.nan, True, type(exc).__name__)
    return ReplicateResult(state_fidelity(truth, res.state), trace_distance(truth, res.state), res.a_hat)


def _summarize(n, reps) -> SweepRow:
    kept = [r for r in reps if not r.excluded]
    if not kept:
        nan = float("nan")
        return SweepRow(n, nan, nan, nan, nan, nan, len(reps))
    fid = np.array([r.fidelity for r in kept])
    td = np.array([r.trace_distance for r in kept])
    ah = np.array([r.a_hat for r in kept])
    ddof = 1 if len(kept) > 1 else 0
    return SweepRow(
        n, float(fid.mean()), float(fid.std(ddof=ddof)), float(td.mean()),
        float(ah.mean()), float(ah.std(ddof=ddof)), len(reps) - len(kept),
    )


def run_reconstruction_sweep(config: SweepConfig, workers: int = 1) -> list[SweepRow]:
    """Sample-then-invert replicates at every grid point."""
    truth = make_werner(config.werner_F)
    model = build_circuit(config.lam)
    model.response()  # build the shared table before threads start
    tasks = [(g, r, n) for g, n in enumerate(config.n_grid) for r in range(config.replicates)]

    def work(task):
        g, r, n = task
        return reconstruct_once(truth, model, n, replicate_seed(config.base_seed, g, r))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, tasks))
    else:
        results = [work(t) for t in tasks]
    R = config.replicates
    return [_summarize(n, results[g * R:(g + 1) * R]) for g, n in enumerate(config.n_grid)]


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def sweep_csv(config: SweepConfig, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in rows:
        w.writerow([
            _fmt(config.werner_F), _fmt(config.lam), _fmt(config.base_seed), _fmt(config.replicates),
            _fmt(row.n), _fmt(row.mean_fidelity), _fmt(row.std_fidelity), _fmt(row.mean_trace_distance),
            _fmt(row.mean_a_hat), _fmt(row.std_a_hat), _fmt(row.exclusions),
        ])
    return buf.getvalue()


def write_sweep_csv(path, config: SweepConfig, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(sweep_csv(config, rows))


def code_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def run_manifest(config: SweepConfig, **extra) -> str:
    """Plain-text record of what produced a CSV file."""
    info = {
        "config": asdict(config),
        "seed_scheme": SEED_SCHEME,
        "code_version": code_version(),
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "platform": platform.platform(),
        **extra,
    }
    lines = [f"{k} = {json.dumps(v, default=list)}" for k, v in info.items()]
    return "\n".join(lines) + "\n"


def write_manifest(path, config: SweepConfig, **extra) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(run_manifest(config, **extra))


def loglog_slope(n, y) -> float:
    """Least-squares slope of ``log y`` against ``log n``."""
    n, y = np.asarray(n, dtype=float), np.asarray(y, dtype=float)
    ok = np.isfinite(y) & (y > 0)
    return float(np.polyfit(np.log(n[ok]), np.log(y[ok]), 1)[0])


def a_hat_replicates(state, noise, n: int, replicates: int, base_seed: int = 0, workers: int = 1) -> np.ndarray:
    """Fidelity estimates from independent ``n``-shot batches; failures are NaN."""
    truth = as_state(state)
    model = build_circuit(noise)
    model.response()

    def work(r):
        return reconstruct_once(truth, model, n, replicate_seed(base_seed, 0, r)).a_hat

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return np.array(list(pool.map(work, range(replicates))))
    return np.array([work(r) for r in range(replicates)])


@dataclass(frozen=True)
class SampledRound:
    round: int
    circuit_runs: int
    post_selected_shots: int
    error_rate: float | None  # None marks a round with no surviving pairs

    @property
    def empty(self) -> bool:
        return self.post_selected_shots == 0


def run_sampled_purification(state, noise, rounds: int, shots: int, seed) -> list[SampledRound]:
    """Nested purification on sampled pairs.

    Round 1 runs ``shots`` circuits on fresh pairs drawn from ``state``.  Each
    later round groups the previous survivors four at a time, so the pool
    shrinks until no complete group is left.
    """
    if rounds < 1 or shots < 1:
        raise DomainError("rounds and shots must be positive")
    s = as_state(state)
    lam = as_noise(noise).lam
    rng = np.random.default_rng(seed)
    pool = rng.choice(4, size=4 * int(shots), p=s.as_array())
    out = []
    for k in range(1, int(rounds) + 1):
        runs = len(pool) // 4
        if runs == 0:
            out.append(SampledRound(k, 0, 0, None))
            pool = pool[:0]
            continue
        agree, frames = sample_frame_runs(pool[: 4 * runs].reshape(runs, 4), lam, rng)
        pool = frames[is_success(agree)]
        if len(pool) == 0:
            out.append(SampledRound(k, runs, 0, None))
        else:
            out.append(SampledRound(k, runs, len(pool), float(np.mean(pool != 0))))
    return out


def sampled_purification_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("round", "circuit_runs", "post_selected_shots", "error_rate"))
    for r in rows:
        w.writerow((r.round, r.circuit_runs, r.post_selected_shots, "" if r.error_rate is None else repr(r.error_rate)))
    return buf.getvalue()
