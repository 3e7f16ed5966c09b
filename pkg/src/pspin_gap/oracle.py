"""
Brute-force reference on the full 2^N Hilbert space, for small N only.

Built from Pauli matrices by Kronecker products and diagonalized densely.
Intended for tests and the ``validate`` command.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
from scipy import sparse

from .dicke import ModelParams, SectorHamiltonian, _check_n
from .errors import ValidationError

MAX_SPINS = 12

_SX = sparse.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
_SZ = sparse.csr_matrix(np.array([[1.0, 0.0], [0.0, -1.0]]))


@dataclass(frozen=True)
class FullSpectrumResult:
    n_spins: int
    lowest: np.ndarray  # full-Hamiltonian units


def _guard(n_spins: int) -> int:
    n = _check_n(n_spins)
    if n > MAX_SPINS:
        raise ValidationError(f"oracle refuses N={n} > {MAX_SPINS} (dense 2^N matrix)")
    return n


def _site_operator(op, site: int, n: int):
    left = sparse.identity(2 ** site, format="csr")
    right = sparse.identity(2 ** (n - site - 1), format="csr")
    return sparse.kron(sparse.kron(left, op), right, format="csr")


def full_hamiltonian(params: ModelParams, n_spins: int) -> np.ndarray:
    """Dense H = N * E with m_a = (1/N) sum_i sigma_a^i."""
    n = _guard(n_spins)
    p, s, lam = params.p, params.s, params.lam
    dim = 2 ** n
    mz = sparse.csr_matrix((dim, dim))
    mx = sparse.csr_matrix((dim, dim))
    for i in range(n):
        mz = mz + _site_operator(_SZ, i, n)
        mx = mx + _site_operator(_SX, i, n)
    mz, mx = mz / n, mx / n
    mz_pow = sparse.diags(mz.diagonal() ** p)
    h = -s * lam * mz_pow + s * (1 - lam) * (mx @ mx) - (1 - s) * mx
    return n * h.toarray()


def full_hamiltonian_lowest(params: ModelParams, n_spins: int, k: int = 2) -> FullSpectrumResult:
    """The ``k`` lowest eigenvalues of the full Hamiltonian."""
    n = _guard(n_spins)
    if int(k) != k or not 2 <= k <= 2 ** n:
        raise ValidationError(f"k must lie in [2, 2^N], got {k!r}")
    w = np.linalg.eigvalsh(full_hamiltonian(params, n))
    return FullSpectrumResult(n_spins=n, lowest=w[: int(k)])


def dicke_vectors(n_spins: int) -> np.ndarray:
    """Columns |S, M = -S + k>: uniform superpositions of states with k up spins.

    sigma_z = +1 is local basis state 0, so a clear bit in the computational
    index is an up spin.  Site order does not matter for uniform superpositions.
    """
    n = _guard(n_spins)
    dim = 2 ** n
    downs = np.array([bin(x).count("1") for x in range(dim)])
    ups = n - downs
    vecs = np.zeros((dim, n + 1))
    for k in range(n + 1):
        vecs[ups == k, k] = 1.0 / np.sqrt(comb(n, k))
    return vecs


def project_to_dicke(params: ModelParams, n_spins: int) -> SectorHamiltonian:
    """Per-spin sector matrix <S,M|E|S,M'> obtained by projecting the full operator."""
    n = _guard(n_spins)
    v = dicke_vectors(n)
    h = v.T @ full_hamiltonian(params, n) @ v / n
    return SectorHamiltonian(params=params, n_spins=n, diagonal=np.diag(h).copy(),
                             off1=np.diag(h, -1).copy(), off2=np.diag(h, -2).copy())
