"""Independent reference implementations used only by the tests.

Nothing here calls the optimized code paths it is compared against. Integrals
come from numerical quadrature, Fock builds and transforms from index loops,
qubit operators from Kronecker products of 2x2 matrices, many-body
Hamiltonians from explicit ladder-operator matrices or Slater determinant
bit manipulation.
"""

from __future__ import annotations

import itertools
from functools import reduce
from math import pi, sqrt

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.integrate import quad

from fragfield.integrals import load_basis_data

INF = np.inf


# --- Gaussian basis functions by quadrature -------------------------------------------


def _quad(f, a=-INF, b=INF):
    val, _ = quad(f, a, b, epsabs=1e-12, epsrel=1e-10, limit=400)
    return val


def _g1(x, A, a, l):
    return (x - A) ** l * np.exp(-a * (x - A) ** 2)


def _g1_dd(x, A, a, l):
    """Second derivative of (x-A)^l exp(-a (x-A)^2)."""
    u = x - A
    out = (4 * a * a * u ** (l + 2) - 2 * a * (2 * l + 1) * u ** l) * np.exp(-a * u * u)
    if l >= 2:
        out += l * (l - 1) * u ** (l - 2) * np.exp(-a * u * u)
    return out


def _overlap_1d(A, a, l, B, b, m):
    return _quad(lambda x: _g1(x, A, a, l) * _g1(x, B, b, m))


class QuadAO:
    """Contracted Cartesian Gaussian, normalized numerically."""

    def __init__(self, center, exps, coefs, lmn):
        self.center = np.asarray(center, dtype=float)
        self.exps = np.asarray(exps, dtype=float)
        self.lmn = tuple(lmn)
        # normalize primitives, then the contraction
        norms = np.array([1.0 / sqrt(self._prim_overlap(a, a)) for a in self.exps])
        self.coefs = np.asarray(coefs, dtype=float) * norms
        self.coefs /= sqrt(overlap(self, self))

    def _prim_overlap(self, a, b):
        return np.prod([_overlap_1d(self.center[d], a, self.lmn[d], self.center[d], b, self.lmn[d])
                        for d in range(3)])

    def prims(self):
        return zip(self.coefs, self.exps)


def sto3g_aos(atoms) -> list[QuadAO]:
    """``atoms`` is a list of (element, position in Bohr)."""
    data = load_basis_data("sto-3g")
    out = []
    for element, pos in atoms:
        for kind, rows in data[element]:
            out.append(QuadAO(pos, rows[:, 0], rows[:, 1], (0, 0, 0)))
            if kind == "SP":
                for d in range(3):
                    lmn = [0, 0, 0]
                    lmn[d] = 1
                    out.append(QuadAO(pos, rows[:, 0], rows[:, 2], lmn))
    return out


def overlap(f: QuadAO, g: QuadAO) -> float:
    tot = 0.0
    for ca, a in f.prims():
        for cb, b in g.prims():
            tot += ca * cb * np.prod([_overlap_1d(f.center[d], a, f.lmn[d], g.center[d], b, g.lmn[d])
                                      for d in range(3)])
    return tot


def kinetic(f: QuadAO, g: QuadAO) -> float:
    tot = 0.0
    for ca, a in f.prims():
        for cb, b in g.prims():
            s = [_overlap_1d(f.center[d], a, f.lmn[d], g.center[d], b, g.lmn[d]) for d in range(3)]
            for d in range(3):
                dd = _quad(lambda x: _g1(x, f.center[d], a, f.lmn[d]) * _g1_dd(x, g.center[d], b, g.lmn[d]))
                tot += -0.5 * ca * cb * dd * s[(d + 1) % 3] * s[(d + 2) % 3]
    return tot


_GRID_H = 0.002


def _grid_1d(lo, hi):
    return np.arange(lo, hi + _GRID_H, _GRID_H)


def nuclear(f: QuadAO, g: QuadAO, C, Z: float, t_max: float = 200.0) -> float:
    """-Z <f|1/|r-C||g> via 1/r = 2/sqrt(pi) int_0^inf exp(-t^2 r^2) dt.

    Spatial integrals use a fine trapezoid grid (spectrally accurate for
    Gaussians); t is integrated adaptively up to t_max and the remainder from
    the large-t limit int F exp(-t^2 (x-C)^2) dx -> sqrt(pi) F(C) / t.
    """
    C = np.asarray(C, dtype=float)
    pts = np.vstack([f.center, g.center, C])
    grids = [_grid_1d(pts[:, d].min() - 9.0, pts[:, d].max() + 9.0) for d in range(3)]
    prims = [(ca * cb, [_g1(grids[d], f.center[d], a, f.lmn[d]) * _g1(grids[d], g.center[d], b, g.lmn[d])
                        for d in range(3)])
             for ca, a in f.prims() for cb, b in g.prims()]
    dist2 = [(grids[d] - C[d]) ** 2 for d in range(3)]

    def integrand(t):
        w = [np.exp(-t * t * dist2[d]) for d in range(3)]
        return sum(c * np.prod([np.sum(fd[d] * w[d]) * _GRID_H for d in range(3)]) for c, fd in prims)

    body = _quad(integrand, 0.0, t_max)
    fg_at_C = sum(ca * cb * np.prod([_g1(C[d], f.center[d], a, f.lmn[d]) * _g1(C[d], g.center[d], b, g.lmn[d])
                                     for d in range(3)])
                  for ca, a in f.prims() for cb, b in g.prims())
    tail = pi ** 1.5 * fg_at_C / (2 * t_max ** 2)
    return -Z * 2 / sqrt(pi) * (body + tail)


def eri_s(fa: QuadAO, fb: QuadAO, fc: QuadAO, fd: QuadAO) -> float:
    """(ab|cd) for s functions; 1/r12 by its Gaussian transform, t by quadrature."""
    terms = []
    for (ca, a), (cb, b), (cc, c), (cd, d) in itertools.product(fa.prims(), fb.prims(), fc.prims(), fd.prims()):
        p, q = a + b, c + d
        P = (a * fa.center + b * fb.center) / p
        Q = (c * fc.center + d * fd.center) / q
        K = np.exp(-a * b / p * np.sum((fa.center - fb.center) ** 2) - c * d / q * np.sum((fc.center - fd.center) ** 2))
        terms.append((ca * cb * cc * cd * K, p, q, np.sum((P - Q) ** 2)))

    def integrand(t):
        tot = 0.0
        for w, p, q, R2 in terms:
            den = p * q + t * t * (p + q)
            tot += w * (pi * pi / den) ** 1.5 * np.exp(-p * q * t * t / den * R2)
        return tot

    return 2 / sqrt(pi) * _quad(integrand, 0.0, INF)


# --- mean-field and transform loops ---------------------------------------------------


def naive_jk(D, eri):
    n = D.shape[0]
    J = np.zeros((n, n))
    K = np.zeros((n, n))
    for m in range(n):
        for v in range(n):
            for l in range(n):
                for s in range(n):
                    J[m, v] += eri[m, v, l, s] * D[l, s]
                    K[m, v] += eri[m, l, v, s] * D[l, s]
    return J, K


def dense_rhf(h, eri, S, n_elec, E_nuc=0.0, tol=1e-12, max_iter=500):
    """Plain Roothaan iterations with damping; returns (E_total, C, eps)."""
    nocc = n_elec // 2
    eps, C = scipy.linalg.eigh(h, S)
    D = C[:, :nocc] @ C[:, :nocc].T
    E_old = 0.0
    for _ in range(max_iter):
        J, K = naive_jk(D, eri)
        F = h + 2 * J - K
        E = np.sum(D * (h + F)) + E_nuc
        eps, C = scipy.linalg.eigh(F, S)
        D_new = C[:, :nocc] @ C[:, :nocc].T
        if abs(E - E_old) < tol and np.abs(D_new - D).max() < 1e-10:
            return E, C, eps
        D = 0.5 * (D + D_new)
        E_old = E
    raise RuntimeError("oracle RHF did not converge")


def naive_mo_transform(eri, C):
    n = C.shape[0]
    m = C.shape[1]
    out = np.zeros((m, m, m, m))
    for p, q, r, s in itertools.product(range(m), repeat=4):
        v = 0.0
        for a, b, c, d in itertools.product(range(n), repeat=4):
            v += C[a, p] * C[b, q] * C[c, r] * C[d, s] * eri[a, b, c, d]
        out[p, q, r, s] = v
    return out


def spatial_mp2(eri_mo, eps, nocc):
    """Closed-shell MP2 from spatial (ia|jb) integrals."""
    e = 0.0
    n = len(eps)
    for i in range(nocc):
        for j in range(nocc):
            for a in range(nocc, n):
                for b in range(nocc, n):
                    iajb = eri_mo[i, a, j, b]
                    ibja = eri_mo[i, b, j, a]
                    e += iajb * (2 * iajb - ibja) / (eps[i] + eps[j] - eps[a] - eps[b])
    return e


# --- dense qubit and fermion matrices -------------------------------------------------

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_matrix(label: str) -> np.ndarray:
    """Label is written qubit 0 first; qubit 0 is the least significant bit."""
    return reduce(np.kron, [PAULI[c] for c in reversed(label)])


def pauli_sum_matrix(items, n: int) -> np.ndarray:
    out = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for label, c in items:
        out += c * pauli_matrix(label)
    return out


def annihilator(p: int, n: int) -> sp.csr_matrix:
    """Jordan-Wigner a_p with the Z string on modes below p."""
    lower = sp.csr_matrix(np.array([[0, 1], [0, 0]], dtype=float))
    Z = sp.csr_matrix(np.diag([1.0, -1.0]))
    I = sp.identity(2, format="csr")
    mats = [Z if q < p else lower if q == p else I for q in range(n)]
    return reduce(lambda a, b: sp.kron(a, b, format="csr"), reversed(mats))


def fermion_matrix(h, g, E_const, n: int) -> sp.csr_matrix:
    """sum h_pq a+_p a_q + 1/2 sum g_pqrs a+_p a+_q a_s a_r + E_const, g_pqrs = <pq|rs>."""
    a = [annihilator(p, n) for p in range(n)]
    ad = [x.T.tocsr() for x in a]
    H = E_const * sp.identity(2 ** n, format="csr")
    for p, q in zip(*np.nonzero(np.abs(h) > 1e-14)):
        H = H + h[p, q] * (ad[p] @ a[q])
    for p, q, r, s in zip(*np.nonzero(np.abs(g) > 1e-14)):
        if p == q or r == s:
            continue
        H = H + 0.5 * g[p, q, r, s] * (ad[p] @ ad[q] @ a[s] @ a[r])
    return H.tocsr()


def sector_indices(n: int, n_alpha: int, n_beta: int) -> np.ndarray:
    """Basis indices with given alpha (even modes) and beta (odd modes) counts."""
    idx = np.arange(2 ** n)
    even = sum(((idx >> k) & 1) for k in range(0, n, 2))
    odd = sum(((idx >> k) & 1) for k in range(1, n, 2))
    return idx[(even == n_alpha) & (odd == n_beta)]


# --- Slater determinants by bit manipulation ------------------------------------------


def _apply(ops, det):
    """Apply a product of ladder operators (rightmost first); ops = [(mode, dagger)]."""
    sign = 1
    for p, dagger in reversed(ops):
        occ = (det >> p) & 1
        if occ == dagger:
            return 0, None
        if bin(det & ((1 << p) - 1)).count("1") % 2:
            sign = -sign
        det ^= 1 << p
    return sign, det


def determinant_hamiltonian(h, g, E_const, dets) -> np.ndarray:
    """Dense H over an explicit determinant list, every term applied one by one."""
    index = {d: k for k, d in enumerate(dets)}
    n = h.shape[0]
    H = np.eye(len(dets)) * E_const
    for col, det in enumerate(dets):
        for p, q in itertools.product(range(n), repeat=2):
            if h[p, q] == 0:
                continue
            s, d = _apply([(p, 1), (q, 0)], det)
            if s and d in index:
                H[index[d], col] += s * h[p, q]
        for p, q, r, t in itertools.product(range(n), repeat=4):
            if g[p, q, r, t] == 0:
                continue
            s, d = _apply([(p, 1), (q, 1), (t, 0), (r, 0)], det)
            if s and d in index:
                H[index[d], col] += 0.5 * s * g[p, q, r, t]
    return H


def expm_dense(M: np.ndarray) -> np.ndarray:
    return scipy.linalg.expm(M)
