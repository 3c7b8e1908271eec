"""Fixed-particle-number determinant space.

The Jordan-Wigner register restricted to determinants with n_alpha alpha and
n_beta beta electrons. States are real vectors over those determinants, with
the same amplitudes (and signs) as the corresponding JW basis states, so every
energy agrees with the full-register qubit simulation. This is what makes
CAS-CI and UCCSD tractable for the 18-20 qubit dimers.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np
import scipy.sparse as sp

from .qubit import PauliSum, _parity_sign


def _strings(n_orb: int, n_el: int, offset: int) -> list[int]:
    out = []
    for occ in combinations(range(n_orb), n_el):
        m = 0
        for i in occ:
            m |= 1 << (2 * i + offset)
        out.append(m)
    return out


class Sector:
    def __init__(self, n_so: int, n_alpha: int, n_beta: int):
        if n_so % 2:
            raise ValueError("spin-orbital count must be even")
        n_orb = n_so // 2
        if not (0 <= n_alpha <= n_orb and 0 <= n_beta <= n_orb):
            raise ValueError("electron count exceeds orbital count")
        self.n_so, self.n_alpha, self.n_beta = n_so, n_alpha, n_beta
        a = np.array(_strings(n_orb, n_alpha, 0), dtype=np.int64)
        b = np.array(_strings(n_orb, n_beta, 1), dtype=np.int64)
        self.dets = np.sort((a[:, None] | b[None, :]).ravel())

    def __len__(self) -> int:
        return len(self.dets)

    def index(self, masks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Positions of `masks` in the sector and a mask of which are present."""
        pos = np.searchsorted(self.dets, masks)
        pos = np.minimum(pos, len(self.dets) - 1)
        return pos, self.dets[pos] == masks

    def basis_vector(self, mask: int) -> np.ndarray:
        pos, ok = self.index(np.array([mask], dtype=np.int64))
        if not ok[0]:
            raise ValueError("determinant outside the sector")
        v = np.zeros(len(self.dets))
        v[pos[0]] = 1.0
        return v

    def hamiltonian(self, H: PauliSum, tol: float = 1e-10) -> sp.csr_matrix:
        """Matrix of a number-conserving JW operator on this sector."""
        if H.n_qubits != self.n_so:
            raise ValueError("operator acts on a different register")
        rows, cols, vals = [], [], []
        for x, d in H.diagonal_factors(self.dets):
            target = self.dets ^ x
            pos, ok = self.index(target)
            if not ok.any():
                continue
            src = np.flatnonzero(ok)
            rows.append(pos[src])
            cols.append(src)
            vals.append(d[src])
        M = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(len(self.dets),) * 2,
            dtype=complex,
        )
        if M.nnz and np.abs(M.data.imag).max() > tol:
            raise ValueError("operator has complex matrix elements in the determinant basis")
        M = sp.csr_matrix(M.real)
        M.eliminate_zeros()
        return M

    def excitation_pairs(self, create: tuple[int, ...], annihilate: tuple[int, ...]):
        """Source/target positions and signs of a+_create... a_annihilate... (applied right to left).

        For the operator tau = a+_a a+_b a_j a_i pass create=(a, b), annihilate=(j, i).
        """
        ops = [(p, 1) for p in create] + [(q, 0) for q in annihilate]
        m = self.dets.copy()
        ok = np.ones(len(m), dtype=bool)
        sign = np.ones(len(m))
        for p, dag in reversed(ops):
            bit = np.int64(1) << p
            occ = (m & bit) != 0
            ok &= ~occ if dag else occ
            sign *= _parity_sign(m, (1 << p) - 1)
            m = m ^ bit
        src = np.flatnonzero(ok)
        dst, present = self.index(m[src])
        if not present.all():
            raise ValueError("excitation leaves the sector")
        return src, dst[present], sign[src]


def givens_apply(vec: np.ndarray, src: np.ndarray, dst: np.ndarray, sign: np.ndarray, theta: float) -> None:
    """In place: vec <- exp(theta (tau - tau+)) vec, where tau|src> = sign |dst>."""
    if theta == 0.0 or len(src) == 0:
        return
    c, s = np.cos(theta), np.sin(theta)
    a = vec[src]
    b = vec[dst]
    vec[src] = c * a - s * sign * b
    vec[dst] = s * sign * a + c * b


class GeneratorPattern:
    """Fixed sparsity pattern of sum_g t_g (tau_g - tau_g+); only the values change with t."""

    def __init__(self, n: int, pairs):
        rows, cols, coef, gen = [], [], [], []
        for g, (src, dst, sign) in enumerate(pairs):
            rows += [dst, src]
            cols += [src, dst]
            coef += [sign, -sign]
            gen += [np.full(2 * len(src), g)]
        self.n = n
        if not rows:
            self._matrix = sp.csr_matrix((n, n))
            self._coef = np.zeros(0)
            self._gen = np.zeros(0, dtype=int)
            self._slot = None
            return
        rows, cols = np.concatenate(rows), np.concatenate(cols)
        keys, slot = np.unique(rows * n + cols, return_inverse=True)
        coef, gen = np.concatenate(coef), np.concatenate(gen)
        if len(keys) == len(slot):
            # every matrix element belongs to exactly one generator: store in CSR order
            order = np.argsort(slot)
            self._coef, self._gen, self._slot = coef[order], gen[order], None
        else:
            self._coef, self._gen, self._slot = coef, gen, slot
        r, c = np.divmod(keys, n)
        indptr = np.searchsorted(r, np.arange(n + 1))
        self._matrix = sp.csr_matrix((np.zeros(len(keys)), c, indptr), shape=(n, n))

    def matrix(self, amplitudes) -> sp.csr_matrix:
        x = np.asarray(amplitudes, dtype=float)
        vals = self._coef * x[self._gen]
        if self._slot is None:
            self._matrix.data[:] = vals
        else:
            self._matrix.data[:] = np.bincount(self._slot, weights=vals, minlength=len(self._matrix.data))
        return self._matrix
