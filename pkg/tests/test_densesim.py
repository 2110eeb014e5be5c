import numpy as np
import pytest

from bellcert import densesim as ds


def _random_density(n, rng):
    A = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
    rho = A @ A.conj().T
    return rho / np.trace(rho)


def _embed(U, qubits, n):
    # Full-space operator by explicit index bookkeeping, independent of einsum.
    k = len(qubits)
    dim = 2**n
    out = np.zeros((dim, dim), dtype=complex)
    for row in range(dim):
        for col in range(dim):
            rb = [(row >> (n - 1 - q)) & 1 for q in range(n)]
            cb = [(col >> (n - 1 - q)) & 1 for q in range(n)]
            if any(rb[q] != cb[q] for q in range(n) if q not in qubits):
                continue
            r = sum(rb[q] << (k - 1 - i) for i, q in enumerate(qubits))
            c = sum(cb[q] << (k - 1 - i) for i, q in enumerate(qubits))
            out[row, col] = U[r, c]
    return out


def test_apply_matches_explicit_embedding(rng):
    rho = _random_density(3, rng)
    for U, q in [(ds.CNOT, [2, 0]), (ds.H, [1]), (ds.SDG, [0])]:
        dm = ds.DensityMatrix.from_matrix(rho)
        dm.apply(U, q)
        full = _embed(U, q, 3)
        assert np.allclose(dm.matrix(), full @ rho @ full.conj().T, atol=1e-13)


def test_depolarize_is_pauli_twirl_mixture(rng):
    rho = _random_density(3, rng)
    lam = 0.3
    for q in ([1], [0, 2]):
        dm = ds.DensityMatrix.from_matrix(rho)
        dm.depolarize(q, lam)
        # (1-lam) rho + lam * uniform average over all Paulis on q
        paulis = [np.eye(1)]
        for _ in q:
            paulis = [np.kron(p, P) for p in paulis for P in ds.PAULIS.values()]
        twirl = sum(_embed(P, q, 3) @ rho @ _embed(P, q, 3).conj().T for P in paulis) / len(paulis)
        assert np.allclose(dm.matrix(), (1 - lam) * rho + lam * twirl, atol=1e-13)
        assert dm.trace() == pytest.approx(1.0)


def test_bell_diagonal_matrix_and_projector():
    rho = ds.bell_diagonal_matrix([0.7, 0.1, 0.1, 0.1])
    assert np.trace(rho).real == pytest.approx(1.0)
    B = ds.bell_vectors()
    assert np.allclose(B @ B.conj().T, np.eye(4))
    # XX parity agrees on phi+ and psi+, ZZ parity on phi+ and phi-
    ag = [np.real(B[k].conj() @ ds.parity_projector(ds.X, True) @ B[k]) for k in range(4)]
    assert ag == pytest.approx([1, 1, 0, 0])
    ag = [np.real(B[k].conj() @ ds.parity_projector(ds.Z, True) @ B[k]) for k in range(4)]
    assert ag == pytest.approx([1, 0, 0, 1])


def test_partial_projector_trace(rng):
    rho = _random_density(3, rng)
    P = ds.parity_projector(ds.Z, True)
    dm = ds.DensityMatrix.from_matrix(rho)
    red = dm.expectation_projector(P, [0, 1]).matrix()
    full = np.kron(P, np.eye(2)) @ rho
    expect = np.einsum("ijik->jk", full.reshape(4, 2, 4, 2))
    assert np.allclose(red, expect, atol=1e-13)
