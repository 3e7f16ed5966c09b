"""
Maximum-spin sector of the p-spin model with antiferromagnetic transverse
interactions.

The per-spin Hamiltonian is

    E = -s*lam*mz**p + s*(1 - lam)*mx**2 - (1 - s)*mx,      m_i = S_i / S,

restricted to total spin S = N/2.  The basis is |S, M>, M = -S..S, with
index k = M + S and magnetization m = M/S = -1 + 2k/N.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .errors import ValidationError


@dataclass(frozen=True)
class ModelParams:
    """Exponent ``p`` and the interpolation parameters ``s`` and ``lam``."""

    p: int
    s: float
    lam: float

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 2:
            raise ValidationError(f"p must be an integer >= 2, got {self.p!r}")
        for name in ("s", "lam"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValidationError(f"{name} must lie in [0, 1], got {v!r}")
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "lam", float(self.lam))


@dataclass(frozen=True)
class SectorHamiltonian:
    """Symmetric pentadiagonal matrix of the per-spin operator in the S = N/2 sector.

    ``diagonal`` has length N+1, ``off1`` holds <k+1|E|k> (length N) and
    ``off2`` holds <k+2|E|k> (length N-1).
    """

    params: ModelParams
    n_spins: int
    diagonal: np.ndarray = field(repr=False)
    off1: np.ndarray = field(repr=False)
    off2: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.n_spins + 1

    @property
    def m_values(self) -> np.ndarray:
        return basis_m_values(self.n_spins)

    def lower_banded(self) -> np.ndarray:
        """Lower banded storage as expected by ``scipy.linalg.eig_banded``."""
        ab = np.zeros((3, self.dim))
        ab[0] = self.diagonal
        ab[1, :-1] = self.off1
        ab[2, :-2] = self.off2
        return ab

    def to_dense(self) -> np.ndarray:
        h = np.diag(self.diagonal)
        h += np.diag(self.off1, -1) + np.diag(self.off1, 1)
        if self.n_spins >= 2:
            h += np.diag(self.off2, -2) + np.diag(self.off2, 2)
        return h

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diagonal * x
        y[:-1] += self.off1 * x[1:]
        y[1:] += self.off1 * x[:-1]
        y[:-2] += self.off2 * x[2:]
        y[2:] += self.off2 * x[:-2]
        return y


def _check_n(n_spins: int) -> int:
    if int(n_spins) != n_spins or n_spins < 2:
        raise ValidationError(f"n_spins must be an integer >= 2, got {n_spins!r}")
    return int(n_spins)


def basis_m_values(n_spins: int) -> np.ndarray:
    """Magnetizations -1, -1 + 2/N, ..., 1 labelling the sector basis."""
    n = _check_n(n_spins)
    return (2.0 * np.arange(n + 1) - n) / n


def spin_operators(n_spins: int):
    """Sparse S_z, S_+ and S_x for spin S = N/2 in the |S, M> basis.

    Uses S+|S,M> = sqrt(S(S+1) - M(M+1)) |S,M+1>.
    """
    n = _check_n(n_spins)
    spin = n / 2.0
    mag = np.arange(n + 1) - spin
    raise_amp = np.sqrt(spin * (spin + 1.0) - mag[:-1] * (mag[:-1] + 1.0))
    s_z = sparse.diags(mag, format="csr")
    s_plus = sparse.diags(raise_amp, -1, shape=(n + 1, n + 1), format="csr")
    s_x = 0.5 * (s_plus + s_plus.T)
    return s_z, s_plus, s_x.tocsr()


def build_sector_hamiltonian(params: ModelParams, n_spins: int) -> SectorHamiltonian:
    """Per-spin Hamiltonian of the S = N/2 sector, assembled from ladder operators."""
    n = _check_n(n_spins)
    p, s, lam = params.p, params.s, params.lam
    spin = n / 2.0
    s_z, _, s_x = spin_operators(n)

    m_x = s_x / spin
    m_z_pow = sparse.diags((s_z.diagonal() / spin) ** p)
    h = -s * lam * m_z_pow + s * (1.0 - lam) * (m_x @ m_x) - (1.0 - s) * m_x
    h = sparse.csr_matrix(h)
    h.eliminate_zeros()

    if sparse.triu(h, 3).nnz or sparse.tril(h, -3).nnz:
        raise AssertionError("sector Hamiltonian exceeds half-bandwidth 2")

    return SectorHamiltonian(
        params=params,
        n_spins=n,
        diagonal=np.asarray(h.diagonal(0)),
        off1=np.asarray(h.diagonal(-1)),
        off2=np.asarray(h.diagonal(-2)),
    )
