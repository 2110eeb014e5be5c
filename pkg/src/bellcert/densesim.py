"""Minimal dense density-matrix engine for a handful of qubits.

The state is kept as a rank-``2n`` tensor with one axis per ket qubit
followed by one axis per bra qubit, so gates and channels touch only the
axes they act on.
"""

from __future__ import annotations

import string

import numpy as np

_KET = string.ascii_lowercase
_BRA = string.ascii_uppercase
_NEW = "wxyz"
_NEW_BRA = "WXYZ"

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.diag([1, 1j]).astype(complex)
SDG = S.conj().T
RX90 = (I2 - 1j * X) / np.sqrt(2)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)

PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}


class DensityMatrix:
    """``n``-qubit density matrix with in-place gate and channel updates."""

    def __init__(self, tensor: np.ndarray):
        n2 = tensor.ndim
        if n2 % 2 or tensor.shape != (2,) * n2:
            raise ValueError("density tensor must have shape (2,) * 2n")
        self.n = n2 // 2
        self.t = tensor.astype(complex, copy=False)

    @classmethod
    def from_matrix(cls, rho: np.ndarray) -> "DensityMatrix":
        dim = rho.shape[0]
        n = int(round(np.log2(dim)))
        return cls(np.asarray(rho, dtype=complex).reshape((2,) * (2 * n)))

    def matrix(self) -> np.ndarray:
        dim = 2**self.n
        return self.t.reshape(dim, dim)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix()))

    def _subs(self):
        return _KET[: self.n], _BRA[: self.n]

    def apply(self, U: np.ndarray, qubits) -> None:
        """Conjugate by a ``k``-qubit unitary acting on ``qubits`` (in order)."""
        qubits = list(qubits)
        k = len(qubits)
        Ut = np.asarray(U, dtype=complex).reshape((2,) * (2 * k))
        ket, bra = self._subs()
        src = ket + bra
        out = list(src)
        u_in = "".join(ket[q] for q in qubits)
        u_out = _NEW[:k]
        for j, q in enumerate(qubits):
            out[q] = u_out[j]
        ket_step = "".join(out)
        self.t = np.einsum(f"{u_out}{u_in},{src}->{ket_step}", Ut, self.t)
        b_in = "".join(bra[q] for q in qubits)
        b_out = _NEW_BRA[:k]
        out = list(ket_step)
        for j, q in enumerate(qubits):
            out[self.n + q] = b_out[j]
        self.t = np.einsum(
            f"{b_out}{b_in},{ket_step}->{''.join(out)}", Ut.conj(), self.t
        )

    def depolarize(self, qubits, lam: float) -> None:
        """``rho -> (1 - lam) rho + lam * I/2^k (x) Tr_qubits(rho)``."""
        if lam == 0.0:
            return
        qubits = list(qubits)
        k = len(qubits)
        ket, bra = self._subs()
        src = list(ket + bra)
        for q in qubits:
            src[self.n + q] = src[q]
        src = "".join(src)
        rest = "".join(ch for i, ch in enumerate(ket + bra) if not (i % self.n in qubits))
        reduced = np.einsum(f"{src}->{rest}", self.t)
        eye = np.eye(2**k, dtype=complex).reshape((2,) * (2 * k)) / 2**k
        eye_sub = "".join(ket[q] for q in qubits) + "".join(bra[q] for q in qubits)
        full = np.einsum(f"{eye_sub},{rest}->{ket + bra}", eye, reduced)
        self.t = (1.0 - lam) * self.t + lam * full

    def expectation_projector(self, P: np.ndarray, qubits) -> "DensityMatrix":
        """Return the unnormalized state ``Tr_qubits(P rho)`` on the other qubits."""
        qubits = list(qubits)
        k = len(qubits)
        Pt = np.asarray(P, dtype=complex).reshape((2,) * (2 * k))
        ket, bra = self._subs()
        p_sub = "".join(bra[q] for q in qubits) + "".join(ket[q] for q in qubits)
        keep = [q for q in range(self.n) if q not in qubits]
        out = "".join(ket[q] for q in keep) + "".join(bra[q] for q in keep)
        return DensityMatrix(np.einsum(f"{p_sub},{ket + bra}->{out}", Pt, self.t))


def bell_vectors() -> np.ndarray:
    """Rows are ``|Phi+>, |Psi+>, |Psi->, |Phi->`` in the ``|AB>`` basis."""
    r = 1 / np.sqrt(2)
    return np.array(
        [[r, 0, 0, r], [0, r, r, 0], [0, r, -r, 0], [r, 0, 0, -r]], dtype=complex
    )


def bell_diagonal_matrix(coeffs) -> np.ndarray:
    B = bell_vectors()
    return np.einsum("k,ki,kj->ij", np.asarray(coeffs, dtype=complex), B, B.conj())


def parity_projector(pauli: np.ndarray, agree: bool) -> np.ndarray:
    """Projector onto the ``+1`` (agree) or ``-1`` eigenspace of ``P (x) P``."""
    PP = np.kron(pauli, pauli)
    sign = 1.0 if agree else -1.0
    return (np.eye(4) + sign * PP) / 2
