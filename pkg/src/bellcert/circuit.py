"""The four-pair purify-and-estimate circuit.

Layout: pair ``i`` owns Alice qubit ``i`` and Bob qubit ``4 + i``.  Pairs 0 and
1 go through a phase-parity check (location 1), pairs 2 and 3 through a
bit-parity check (location 2), and the two survivors meet in a final check
read out in the Y basis (location 3).  Pair 2 is the output.

Noise: every physical CNOT is followed by two-qubit depolarizing noise on its
qubits.  The Y-basis readout is compiled to ``S^dagger`` then ``H`` on each
qubit, and each of those gates is followed by single-qubit depolarizing noise.
X and Z readouts are native and ideal.  The final bilateral
``Rx(pi/2) (x) Rx(-pi/2)`` only relabels the output frame and is noiseless.

Two independent evaluation routes exist: a dense 256-dimensional density
matrix (:meth:`CircuitModel.evaluate_dense`) and Pauli-frame propagation
(:func:`pauli_frame_oracle`).
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import analytic
from . import densesim as ds
from .errors import CircuitSelfCheckError, DegeneratePostSelectionError, DomainError
from .states import IDEAL, BellDiagonalState, NoiseModel, as_noise, as_state

N_PAIRS = 4
AGREE, DISAGREE = 0, 1
SUCCESS_CELL = (AGREE, AGREE, DISAGREE)
DEGENERATE_P = 1e-15
SELF_CHECK_TOL = 1e-12


@dataclass(frozen=True)
class BilateralCNOT:
    control: int
    target: int

    def describe(self):
        return f"CNOT pair{self.control} -> pair{self.target} (both nodes, noisy)"


@dataclass(frozen=True)
class ParityReadout:
    pair: int
    basis: str
    location: int

    def describe(self):
        how = "S^dg,H then Z (noisy basis change)" if self.basis == "Y" else "native"
        return f"measure pair{self.pair} in {self.basis}{self.basis} parity at location {self.location} [{how}]"


@dataclass(frozen=True)
class FrameRotation:
    """Bilateral Rx(pi/2) (x) Rx(-pi/2); swaps the psi- and phi- labels."""

    pair: int

    def describe(self):
        return f"relabel pair{self.pair}: Rx(pi/2) at Alice, Rx(-pi/2) at Bob (noiseless)"


DEFAULT_OPS = (
    BilateralCNOT(1, 0),
    ParityReadout(1, "X", 1),
    BilateralCNOT(2, 3),
    ParityReadout(3, "Z", 2),
    BilateralCNOT(0, 2),
    ParityReadout(0, "Y", 3),
    FrameRotation(2),
)
OUTPUT_PAIR = 2


@dataclass(frozen=True)
class JointParityDistribution:
    """``prob[s1, s2, s3]`` with ``s_i`` in ``{AGREE, DISAGREE}``."""

    prob: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.prob, dtype=float).reshape(2, 2, 2)
        p = np.where(np.abs(p) < 1e-17, 0.0, p)
        if np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-12:
            raise DomainError(f"invalid joint parity distribution {p.ravel()}")
        p = np.clip(p, 0.0, None)
        p.setflags(write=False)
        object.__setattr__(self, "prob", p)

    @property
    def agree(self) -> np.ndarray:
        """Marginal agree probabilities ``(f1, f2, f3)``."""
        p = self.prob
        return np.array([p[AGREE].sum(), p[:, AGREE].sum(), p[:, :, AGREE].sum()])

    @property
    def success_probability(self) -> float:
        return float(self.prob[SUCCESS_CELL])

    def agree_second_moments(self) -> np.ndarray:
        """``E[1_i 1_j]`` for the agree indicators of locations ``i, j``."""
        ind = np.array(list(itertools.product((1, 0), repeat=3)), dtype=float)
        w = np.array([self.prob[tuple(1 - ind[k].astype(int))] for k in range(8)])
        return (ind.T * w) @ ind


@dataclass(frozen=True)
class MeasurementTally:
    n_shots: int
    joint_counts: np.ndarray

    def __post_init__(self):
        jc = np.asarray(self.joint_counts, dtype=np.int64).reshape(2, 2, 2)
        if np.any(jc < 0) or int(jc.sum()) != int(self.n_shots):
            raise DomainError("joint counts must be non-negative and sum to n_shots")
        jc.setflags(write=False)
        object.__setattr__(self, "joint_counts", jc)
        object.__setattr__(self, "n_shots", int(self.n_shots))

    @classmethod
    def from_agree_counts(cls, n_shots, agree_counts) -> "MeasurementTally":
        """Tally known only through its per-location agree counts.

        The joint cells are filled with a nested arrangement consistent with
        the marginals; only ``agree_counts`` is meaningful afterwards.
        """
        n = int(n_shots)
        k = [int(x) for x in agree_counts]
        if any(x < 0 or x > n for x in k):
            raise DomainError("agree counts must lie in [0, n_shots]")
        jc = np.zeros((2, 2, 2), dtype=np.int64)
        for shot_block in _marginal_fill(n, k):
            cell, count = shot_block
            jc[cell] += count
        return cls(n, jc)

    @property
    def agree_counts(self) -> np.ndarray:
        jc = self.joint_counts
        return np.array([jc[AGREE].sum(), jc[:, AGREE].sum(), jc[:, :, AGREE].sum()])

    @property
    def proportions(self) -> np.ndarray:
        return self.agree_counts / self.n_shots

    @property
    def successes(self) -> int:
        return int(self.joint_counts[SUCCESS_CELL])


def _marginal_fill(n, k):
    # Comonotone coupling: shot j agrees at location i iff j < k[i].
    cuts = sorted(set([0, n] + k))
    for lo, hi in zip(cuts, cuts[1:]):
        cell = tuple(AGREE if lo < ki else DISAGREE for ki in k)
        yield cell, hi - lo


@dataclass(frozen=True)
class CircuitModel:
    """Immutable gate list plus noise; evaluation is exact."""

    noise: NoiseModel = IDEAL
    ops: tuple = DEFAULT_OPS
    output_pair: int = OUTPUT_PAIR
    _readouts: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        readouts = tuple(op for op in self.ops if isinstance(op, ParityReadout))
        if sorted(r.location for r in readouts) != [1, 2, 3]:
            raise DomainError("circuit needs exactly one readout per location 1..3")
        measured = set()
        for op in self.ops:
            touched = _pairs_of(op)
            if touched & measured:
                raise DomainError(f"{op} acts on an already measured pair")
            if isinstance(op, ParityReadout):
                measured.add(op.pair)
        if self.output_pair in measured or len(measured | {self.output_pair}) != N_PAIRS:
            raise DomainError("output pair must be the single unmeasured pair")
        object.__setattr__(self, "_readouts", tuple(sorted(readouts, key=lambda r: r.location)))

    @property
    def lam(self) -> float:
        return self.noise.lam

    def describe(self) -> str:
        lines = [f"# depolarizing parameter {self.lam:g}; output pair {self.output_pair}"]
        lines += [f"{i:2d}. {op.describe()}" for i, op in enumerate(self.ops)]
        return "\n".join(lines)

    def evaluate_dense(self, state) -> tuple[np.ndarray, np.ndarray]:
        """Direct density-matrix run on four copies of ``state``.

        Returns ``(joint, outputs)`` where ``joint`` has shape ``(2, 2, 2)``
        and ``outputs[cell]`` holds the unnormalized Bell coefficients of the
        output pair for that outcome cell.
        """
        rho = ds.bell_diagonal_matrix(as_state(state).as_array())
        return _run_dense(self.ops, self.output_pair, self.lam, (rho,) * N_PAIRS)

    def response(self) -> "ResponseTensor":
        """Exact quartic forms of the outcome statistics (memoized per noise)."""
        return _response(self.ops, self.output_pair, self.lam)


def _pairs_of(op):
    if isinstance(op, BilateralCNOT):
        return {op.control, op.target}
    return {op.pair}


def _product_density(pair_matrices) -> ds.DensityMatrix:
    tensors = [np.asarray(m, dtype=complex).reshape(2, 2, 2, 2) for m in pair_matrices]
    subs = ["aeAE", "bfBF", "cgCG", "dhDH"]
    full = np.einsum(",".join(subs) + "->abcdefghABCDEFGH", *tensors)
    return ds.DensityMatrix(full)


_READOUT_PAULI = {"X": ds.X, "Y": ds.Z, "Z": ds.Z}


def _run_dense(ops, output_pair, lam, pair_matrices):
    dm = _product_density(pair_matrices)
    readouts = []
    for op in ops:
        if isinstance(op, BilateralCNOT):
            for node in (0, N_PAIRS):
                q = [node + op.control, node + op.target]
                dm.apply(ds.CNOT, q)
                dm.depolarize(q, lam)
        elif isinstance(op, ParityReadout):
            if op.basis == "Y":
                for q in (op.pair, N_PAIRS + op.pair):
                    for U in (ds.SDG, ds.H):
                        dm.apply(U, [q])
                        dm.depolarize([q], lam)
            elif op.basis not in ("X", "Z"):
                raise DomainError(f"unknown readout basis {op.basis!r}")
            readouts.append(op)
        elif isinstance(op, FrameRotation):
            dm.apply(ds.RX90, [op.pair])
            dm.apply(ds.RX90.conj(), [N_PAIRS + op.pair])
        else:
            raise DomainError(f"unknown circuit op {op!r}")
    readouts.sort(key=lambda r: r.location)
    measured_qubits = [q for r in readouts for q in (r.pair, N_PAIRS + r.pair)]
    B = ds.bell_vectors()
    joint = np.zeros((2, 2, 2))
    outputs = np.zeros((2, 2, 2, 4))
    for cell in itertools.product((AGREE, DISAGREE), repeat=3):
        P = np.array([[1.0]])
        for r, s in zip(readouts, cell):
            P = np.kron(P, ds.parity_projector(_READOUT_PAULI[r.basis], s == AGREE))
        # P is ordered (A_r1, B_r1, A_r2, B_r2, ...); reorder to measured_qubits order.
        k = len(measured_qubits)
        Pt = P.reshape((2,) * (2 * k))
        red = dm.expectation_projector(Pt.reshape(2**k, 2**k), measured_qubits)
        M = red.matrix()
        coeffs = np.einsum("ki,ij,kj->k", B.conj(), M, B).real
        joint[cell] = M.trace().real
        outputs[cell] = coeffs
    return joint, outputs


@dataclass(frozen=True)
class ResponseTensor:
    """Quartic forms: ``joint[cell] = sum T[cell, i, j, k, l] s_i s_j s_k s_l``."""

    joint: np.ndarray  # (2, 2, 2, 4, 4, 4, 4)
    outputs: np.ndarray  # (2, 2, 2, 4, 4, 4, 4, 4): cell, output label, inputs

    def joint_of(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return np.einsum("xyzijkl,i,j,k,l->xyz", self.joint, s, s, s, s)

    def outputs_of(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return np.einsum("xyzoijkl,i,j,k,l->xyzo", self.outputs, s, s, s, s)

    def agree_of(self, s) -> np.ndarray:
        J = self.joint_of(s)
        return np.array([J[AGREE].sum(), J[:, AGREE].sum(), J[:, :, AGREE].sum()])

    @functools.cached_property
    def agree_forms(self) -> np.ndarray:
        """``(3, 4, 4, 4, 4)`` quartic forms of the agree marginals."""
        J = self.joint
        return np.stack([J[AGREE].sum(axis=(0, 1)), J[:, AGREE].sum(axis=(0, 1)), J[:, :, AGREE].sum(axis=(0, 1))])

    @functools.cached_property
    def symmetric_agree_forms(self) -> np.ndarray:
        F = self.agree_forms
        perms = list(itertools.permutations(range(1, 5)))
        return sum(np.transpose(F, (0,) + p) for p in perms) / len(perms)

    def agree_and_jacobian(self, s) -> tuple[np.ndarray, np.ndarray]:
        """Agree marginals and their gradient with respect to ``s``."""
        S = self.symmetric_agree_forms
        s = np.asarray(s, dtype=float)
        cubic = np.einsum("rijkl,j,k,l->ri", S, s, s, s)
        return cubic @ s, 4.0 * cubic


@functools.lru_cache(maxsize=32)
def _response(ops, output_pair, lam) -> ResponseTensor:
    # Frame propagation of a Bell-basis delta input gives every quartic
    # coefficient in one pass; dense runs cross-check it in _self_check.
    e = np.eye(4)
    delta = np.einsum("ai,bj,ck,dl->abcdijkl", e, e, e, e)
    outputs = _propagate_frames(delta, lam, ops, output_pair)
    return ResponseTensor(outputs.sum(axis=3), outputs)


def _self_check(ops, output_pair):
    probes = [
        (0.7, 0.1, 0.1, 0.1),
        (0.4, 0.3, 0.2, 0.1),
        (0.55, 0.05, 0.15, 0.25),
        (0.1, 0.2, 0.3, 0.4),
    ]
    ideal = CircuitModel(IDEAL, ops, output_pair)
    resp = ideal.response()
    J_dense, O_dense = ideal.evaluate_dense(probes[1])
    if (
        np.max(np.abs(J_dense - resp.joint_of(probes[1]))) > SELF_CHECK_TOL
        or np.max(np.abs(O_dense - resp.outputs_of(probes[1]))) > SELF_CHECK_TOL
    ):
        raise CircuitSelfCheckError("dense and Pauli-frame evaluations disagree")
    for s in probes:
        J = resp.joint_of(s)
        f = np.array([J[AGREE].sum(), J[:, AGREE].sum(), J[:, :, AGREE].sum()])
        want_f = np.array(analytic.agree_probabilities(*s))
        out = resp.outputs_of(s)[SUCCESS_CELL]
        want_out = np.array(analytic.purified_numerators(*s))
        P = analytic.success_polynomial(*s)
        if (
            np.max(np.abs(f - want_f)) > SELF_CHECK_TOL
            or abs(J[SUCCESS_CELL] - P) > SELF_CHECK_TOL
            or np.max(np.abs(out - want_out)) > SELF_CHECK_TOL
        ):
            raise CircuitSelfCheckError(
                f"circuit disagrees with the analytic tables on state {s}: "
                f"agree {f} vs {want_f}, success {J[SUCCESS_CELL]} vs {P}"
            )


@functools.lru_cache(maxsize=8)
def _checked(ops, output_pair):
    _self_check(ops, output_pair)
    return True


def build_circuit(noise=IDEAL, ops=DEFAULT_OPS, output_pair=OUTPUT_PAIR) -> CircuitModel:
    """Compile the circuit; the noiseless version is validated against the tables."""
    model = CircuitModel(as_noise(noise), tuple(ops), output_pair)
    _checked(model.ops, model.output_pair)
    return model


def _joint_and_outputs(state, model):
    s = as_state(state).as_array()
    resp = model.response()
    return resp.joint_of(s), resp.outputs_of(s)


def joint_parity_distribution(state, model: CircuitModel) -> JointParityDistribution:
    J, _ = _joint_and_outputs(state, model)
    return JointParityDistribution(J)


def output_state_on_success(state, model: CircuitModel) -> tuple[BellDiagonalState, float]:
    """Post-selected output state and the success probability."""
    J, O = _joint_and_outputs(state, model)
    P = float(J[SUCCESS_CELL])
    if P < DEGENERATE_P:
        raise DegeneratePostSelectionError(f"success probability {P:.3g} is degenerate")
    return BellDiagonalState.from_vector(O[SUCCESS_CELL] / P), P


def sample_shots(state, model: CircuitModel, n: int, seed) -> MeasurementTally:
    """``n`` independent circuit executions, tallied by outcome cell."""
    if int(n) != n or n < 1:
        raise DomainError(f"number of shots must be a positive integer, got {n!r}")
    dist = joint_parity_distribution(state, model)
    rng = np.random.default_rng(seed)
    p = dist.prob.ravel()
    counts = rng.multinomial(int(n), p / p.sum())
    return MeasurementTally(int(n), counts.reshape(2, 2, 2))


# Pauli-frame route.  A pair's frame is the Pauli applied to Alice's qubit of
# |Phi+>: 0=I (phi+), 1=X (psi+), 2=Y (psi-), 3=Z (phi-).
_XZ = ((0, 0), (1, 0), (1, 1), (0, 1))
_FROM_XZ = {v: i for i, v in enumerate(_XZ)}
_CNOT_TABLE = np.zeros((4, 4, 2), dtype=int)
for _c, _t in itertools.product(range(4), repeat=2):
    (_xc, _zc), (_xt, _zt) = _XZ[_c], _XZ[_t]
    _CNOT_TABLE[_c, _t] = (_FROM_XZ[(_xc, _zc ^ _zt)], _FROM_XZ[(_xt ^ _xc, _zt)])
_AGREE_MASK = {
    "Z": np.array([x == 0 for x, _ in _XZ]),
    "X": np.array([z == 0 for _, z in _XZ]),
    "Y": np.array([(x ^ z) == 1 for x, z in _XZ]),
}
_RX90_RELABEL = np.array([0, 1, 3, 2])


def _frame_axis(n_outcomes, pair):
    return n_outcomes + pair


def pauli_frame_oracle(state, noise=IDEAL, ops=DEFAULT_OPS, output_pair=OUTPUT_PAIR):
    """Exact statistics by propagating Pauli frames instead of density matrices.

    The 256 Bell-basis input combinations are carried as a weighted table and
    pushed through ``ops``; depolarizing noise is a Pauli channel and acts as
    a mixing step on that table.  Returns ``(distribution, output, P)``.
    """
    s = as_state(state).as_array()
    v = np.einsum("i,j,k,l->ijkl", s, s, s, s)
    v = _propagate_frames(v, as_noise(noise).lam, tuple(ops), output_pair)
    dist = JointParityDistribution(v.sum(axis=-1))
    P = dist.success_probability
    if P < DEGENERATE_P:
        raise DegeneratePostSelectionError(f"success probability {P:.3g} is degenerate")
    out = BellDiagonalState.from_vector(v[SUCCESS_CELL] / P)
    return dist, out, P


def _propagate_frames(v, lam, ops, output_pair):
    """Push a frame table ``(4, 4, 4, 4, *batch)`` through ``ops``.

    Returns ``(2, 2, 2, 4, *batch)``: outcome at locations 1..3, output frame.
    """
    locations = []
    for op in ops:
        n_out = len(locations)
        if isinstance(op, BilateralCNOT):
            ca, ta = _frame_axis(n_out, op.control), _frame_axis(n_out, op.target)
            w = np.moveaxis(v, (ca, ta), (-2, -1))
            new = np.zeros_like(w)
            for c, t in itertools.product(range(4), repeat=2):
                c2, t2 = _CNOT_TABLE[c, t]
                new[..., c2, t2] += w[..., c, t]
            v = np.moveaxis(new, (-2, -1), (ca, ta))
            if lam:
                for _node in range(2):
                    mixed = v.sum(axis=(ca, ta), keepdims=True) / 16.0
                    v = (1 - lam) * v + lam * mixed
        elif isinstance(op, ParityReadout):
            ax = _frame_axis(n_out, op.pair)
            if op.basis == "Y" and lam:
                for _channel in range(4):
                    v = (1 - lam) * v + lam * v.sum(axis=ax, keepdims=True) / 4.0
            shape = [1] * v.ndim
            shape[ax] = 4
            m = _AGREE_MASK[op.basis].reshape(shape)
            v = np.stack([v * m, v * ~m], axis=0)
            locations.insert(0, op.location)
        elif isinstance(op, FrameRotation):
            ax = _frame_axis(n_out, op.pair)
            v = np.take(v, np.argsort(_RX90_RELABEL), axis=ax)
        else:
            raise DomainError(f"unknown circuit op {op!r}")
    n_out = len(locations)
    pair_axes = [n_out + p for p in range(N_PAIRS) if p != output_pair]
    v = v.sum(axis=tuple(pair_axes))
    order = [locations.index(loc) for loc in (1, 2, 3)]
    return np.transpose(v, order + list(range(3, v.ndim)))


_XOR = np.array([[_FROM_XZ[(xa ^ xb, za ^ zb)] for (xb, zb) in _XZ] for (xa, za) in _XZ])


def sample_frame_runs(frames, lam: float, rng, ops=DEFAULT_OPS, output_pair=OUTPUT_PAIR):
    """Monte Carlo execution of the circuit on explicit input frames.

    ``frames`` is an integer array ``(runs, 4)`` of Bell labels.  Each noise
    channel fires independently with probability ``lam`` and then applies a
    uniformly random Pauli (identity included), which is the stochastic
    unravelling of the depolarizing map.  Returns ``(agree, output)`` where
    ``agree`` is a boolean ``(runs, 3)`` array for locations 1..3 and
    ``output`` holds the output pair's Bell label.
    """
    f = np.array(frames, dtype=np.int64, copy=True)
    runs = f.shape[0]
    agree = np.zeros((runs, 3), dtype=bool)

    def kick(pair):
        hit = rng.random(runs) < lam
        f[hit, pair] = _XOR[f[hit, pair], rng.integers(0, 4, size=int(hit.sum()))]

    for op in ops:
        if isinstance(op, BilateralCNOT):
            c, t = op.control, op.target
            new = _CNOT_TABLE[f[:, c], f[:, t]]
            f[:, c], f[:, t] = new[:, 0], new[:, 1]
            if lam:
                for _node in range(2):
                    hit = rng.random(runs) < lam
                    k = int(hit.sum())
                    f[hit, c] = _XOR[f[hit, c], rng.integers(0, 4, size=k)]
                    f[hit, t] = _XOR[f[hit, t], rng.integers(0, 4, size=k)]
        elif isinstance(op, ParityReadout):
            if op.basis == "Y" and lam:
                for _channel in range(4):
                    kick(op.pair)
            agree[:, op.location - 1] = _AGREE_MASK[op.basis][f[:, op.pair]]
        elif isinstance(op, FrameRotation):
            f[:, op.pair] = _RX90_RELABEL[f[:, op.pair]]
        else:
            raise DomainError(f"unknown circuit op {op!r}")
    return agree, f[:, output_pair]


def is_success(agree) -> np.ndarray:
    """Post-selection rule applied row-wise to ``(runs, 3)`` agree flags."""
    agree = np.asarray(agree, dtype=bool)
    return agree[:, 0] & agree[:, 1] & ~agree[:, 2]
