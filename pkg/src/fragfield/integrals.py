"""STO-3G basis construction and analytic Gaussian integrals (McMurchie-Davidson).

Shells are contracted Cartesian Gaussians with angular momentum s or p; the
shared-exponent 2sp shell of first-row atoms is stored as one shell with four
components (s, px, py, pz) so that primitive-pair quantities are reused.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from math import pi

import numpy as np
from scipy.special import gamma, gammainc

from .chem import FragmentedSystem

_S = (0, 0, 0)
_P = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


@lru_cache(maxsize=None)
def load_basis_data(name: str = "sto-3g") -> dict[str, list[tuple[str, np.ndarray]]]:
    """Parse a bundled basis file into ``{element: [(shell_type, rows), ...]}``."""
    text = resources.files("fragfield.data").joinpath(f"{name}.basis").read_text()
    data: dict[str, list] = {}
    current = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0][0].isalpha():
            element, kind = fields[0].capitalize(), fields[1].upper()
            if kind not in ("S", "SP"):
                raise ValueError(f"unsupported shell type {kind!r} for {element}")
            current = (kind, [])
            data.setdefault(element, []).append(current)
        else:
            current[1].append([float(v) for v in fields])
    return {el: [(kind, np.array(rows)) for kind, rows in shells] for el, shells in data.items()}


def _double_factorial(n: int) -> int:
    return 1 if n <= 0 else n * _double_factorial(n - 2)


def primitive_norm(alpha, lmn) -> np.ndarray:
    l, m, n = lmn
    L = l + m + n
    num = (2 * alpha / pi) ** 0.75 * (4 * alpha) ** (L / 2)
    den = np.sqrt(_double_factorial(2 * l - 1) * _double_factorial(2 * m - 1) * _double_factorial(2 * n - 1))
    return num / den


@dataclass
class Shell:
    center: np.ndarray
    exps: np.ndarray
    components: tuple[tuple[int, int, int], ...]
    coefs: np.ndarray  # (ncomp, nprim), primitive normalization folded in
    atom: int

    @property
    def lmax(self) -> int:
        return max(sum(c) for c in self.components)


@dataclass
class BasisSet:
    shells: list[Shell]
    ao_index: list[tuple[int, int]]  # AO -> (shell, component)
    ao_atom: np.ndarray
    ao_owner: np.ndarray  # AO -> fragment id
    labels: list[str]

    @property
    def nao(self) -> int:
        return len(self.ao_index)

    def aos_of(self, *frags: int) -> np.ndarray:
        return np.flatnonzero(np.isin(self.ao_owner, frags))

    def shell_offsets(self) -> list[int]:
        out, k = [], 0
        for sh in self.shells:
            out.append(k)
            k += len(sh.components)
        return out


def build_basis(system: FragmentedSystem, name: str = "sto-3g") -> BasisSet:
    data = load_basis_data(name)
    shells: list[Shell] = []
    ao_index, ao_atom, ao_owner, labels = [], [], [], []
    for ia, atom in enumerate(system.atoms):
        if atom.element not in data:
            raise ValueError(f"element {atom.element} not available in basis {name}")
        for n, (kind, rows) in enumerate(data[atom.element], start=1):
            exps = rows[:, 0]
            if kind == "S":
                comps = (_S,)
                raw = [rows[:, 1]]
            else:
                comps = (_S, *_P)
                raw = [rows[:, 1]] + [rows[:, 2]] * 3
            coefs = np.array([c * primitive_norm(exps, lmn) for c, lmn in zip(raw, comps)])
            shell = Shell(atom.position.copy(), exps.copy(), comps, coefs, ia)
            # contracted normalization, one factor per component
            self_ovlp = np.diag(_overlap_kinetic(shell, shell)[0])
            shell.coefs = coefs / np.sqrt(self_ovlp)[:, None]
            k = len(shells)
            shells.append(shell)
            for c, lmn in enumerate(comps):
                ao_index.append((k, c))
                ao_atom.append(ia)
                ao_owner.append(system.fragment_of[ia])
                tag = "s" if lmn == _S else "p" + "xyz"[lmn.index(1)]
                shell_n = n if kind == "S" else 2
                labels.append(f"{ia}{atom.element} {shell_n}{tag}")
    return BasisSet(shells, ao_index, np.array(ao_atom), np.array(ao_owner), labels)


# --- Boys function and Hermite machinery -------------------------------------------


def boys(n: int, T) -> np.ndarray:
    """Boys function F_n(T) for arrays of T >= 0."""
    T = np.asarray(T, dtype=float)
    out = np.empty_like(T)
    small = T < 1e-11
    a = n + 0.5
    Tl = T[~small]
    out[~small] = gamma(a) * gammainc(a, Tl) / (2.0 * Tl**a)
    Ts = T[small]
    out[small] = 1.0 / (2 * n + 1) - Ts / (2 * n + 3)
    return out


def hermite_e(i: int, j: int, t: int, Qx, a, b) -> np.ndarray:
    """Hermite expansion coefficient E^{ij}_t for a 1-D Gaussian product."""
    p = a + b
    q = a * b / p
    if t < 0 or t > i + j:
        return np.zeros(np.broadcast(Qx, a, b).shape)
    if i == j == t == 0:
        return np.exp(-q * Qx * Qx)
    if j == 0:
        return (
            hermite_e(i - 1, j, t - 1, Qx, a, b) / (2 * p)
            - (q * Qx / a) * hermite_e(i - 1, j, t, Qx, a, b)
            + (t + 1) * hermite_e(i - 1, j, t + 1, Qx, a, b)
        )
    return (
        hermite_e(i, j - 1, t - 1, Qx, a, b) / (2 * p)
        + (q * Qx / b) * hermite_e(i, j - 1, t, Qx, a, b)
        + (t + 1) * hermite_e(i, j - 1, t + 1, Qx, a, b)
    )


def hermite_r(L: int, p, PC) -> np.ndarray:
    """All Hermite Coulomb integrals R_{tuv}(p, PC) with t, u, v <= L.

    `p` has shape S and `PC` shape (3, *S); the result has shape (L+1, L+1, L+1, *S)
    and is valid for t + u + v <= L.
    """
    X, Y, Z = PC
    T = p * (X * X + Y * Y + Z * Z)
    shape = np.shape(T)
    # R^n_{000} = (-2p)^n F_n(T)
    Rn = {}
    for n in range(L + 1):
        Rn[(0, 0, 0, n)] = (-2 * p) ** n * boys(n, T)

    def get(t, u, v, n):
        key = (t, u, v, n)
        if key in Rn:
            return Rn[key]
        if t < 0 or u < 0 or v < 0:
            return 0.0
        if t > 0:
            val = (t - 1) * get(t - 2, u, v, n + 1) + X * get(t - 1, u, v, n + 1)
        elif u > 0:
            val = (u - 1) * get(t, u - 2, v, n + 1) + Y * get(t, u - 1, v, n + 1)
        else:
            val = (v - 1) * get(t, u, v - 2, n + 1) + Z * get(t, u, v - 1, n + 1)
        Rn[key] = val
        return val

    out = np.zeros((L + 1, L + 1, L + 1) + shape)
    for t in range(L + 1):
        for u in range(L + 1 - t):
            for v in range(L + 1 - t - u):
                out[t, u, v] = get(t, u, v, 0)
    return out


@dataclass
class _Pair:
    """Primitive-pair data for two shells (flattened over primitive pairs)."""

    p: np.ndarray
    P: np.ndarray  # (3, npair)
    coef: np.ndarray  # (ncompA, ncompB, npair)
    E: np.ndarray  # (ncompA, ncompB, L+1, L+1, L+1, npair) Hermite products
    L: int


def _pair(sa: Shell, sb: Shell) -> _Pair:
    a = np.repeat(sa.exps, len(sb.exps))
    b = np.tile(sb.exps, len(sa.exps))
    p = a + b
    A, B = sa.center, sb.center
    P = (a * A[:, None] + b * B[:, None]) / p
    L = sa.lmax + sb.lmax
    npair = len(p)
    E = np.zeros((len(sa.components), len(sb.components), L + 1, L + 1, L + 1, npair))
    coef = np.einsum("ip,jq->ijpq", sa.coefs, sb.coefs).reshape(len(sa.components), len(sb.components), npair)
    for ia, la in enumerate(sa.components):
        for ib, lb in enumerate(sb.components):
            ex = [
                [hermite_e(la[d], lb[d], t, A[d] - B[d], a, b) for t in range(la[d] + lb[d] + 1)]
                for d in range(3)
            ]
            for t, et in enumerate(ex[0]):
                for u, eu in enumerate(ex[1]):
                    for v, ev in enumerate(ex[2]):
                        E[ia, ib, t, u, v] = et * eu * ev
    return _Pair(p, P, coef, E, L)


def _overlap_kinetic(sa: Shell, sb: Shell) -> tuple[np.ndarray, np.ndarray]:
    a = np.repeat(sa.exps, len(sb.exps))[None, :]
    b = np.tile(sb.exps, len(sa.exps))[None, :]
    A, B = sa.center, sb.center
    p = a + b
    coef = np.einsum("ip,jq->ijpq", sa.coefs, sb.coefs).reshape(len(sa.components), len(sb.components), -1)

    def s1d(i, j, d):
        if j < 0:
            return np.zeros_like(p)
        return hermite_e(i, j, 0, A[d] - B[d], a, b) * np.sqrt(pi / p)

    S = np.zeros(coef.shape[:2])
    T = np.zeros(coef.shape[:2])
    for ia, la in enumerate(sa.components):
        for ib, lb in enumerate(sb.components):
            s = [s1d(la[d], lb[d], d) for d in range(3)]
            t = []
            for d in range(3):
                j = lb[d]
                t.append(
                    b * (2 * j + 1) * s[d]
                    - 2 * b * b * s1d(la[d], j + 2, d)
                    - 0.5 * j * (j - 1) * s1d(la[d], j - 2, d)
                )
            S[ia, ib] = np.sum(coef[ia, ib] * (s[0] * s[1] * s[2])[0])
            kin = t[0] * s[1] * s[2] + s[0] * t[1] * s[2] + s[0] * s[1] * t[2]
            T[ia, ib] = np.sum(coef[ia, ib] * kin[0])
    return S, T


@dataclass
class IntegralStore:
    """AO integrals over the global basis.

    ``V_nuc[A]`` is the full attraction operator of nucleus A (the factor -Z_A is
    included), so the bare core Hamiltonian of a unit is ``T + sum(V_nuc[A])`` over
    its atoms. ``eri`` is (mu nu|lam sig) in chemists' notation.
    """

    S: np.ndarray
    T: np.ndarray
    V_nuc: np.ndarray  # (natom, nao, nao)
    eri: np.ndarray

    @property
    def nao(self) -> int:
        return self.S.shape[0]

    def hcore(self, atoms, aos=None) -> np.ndarray:
        h = self.T + self.V_nuc[list(atoms)].sum(axis=0)
        if aos is not None:
            h = h[np.ix_(aos, aos)]
        return h


def one_electron_integrals(basis: BasisSet, system: FragmentedSystem):
    """Return (S, T, V_nuc) with V_nuc stacked per nuclear center."""
    shells = basis.shells
    off = basis.shell_offsets()
    n = basis.nao
    S = np.zeros((n, n))
    T = np.zeros((n, n))
    coords, charges = system.coords, system.nuclear_charges
    V = np.zeros((len(coords), n, n))
    for i, si in enumerate(shells):
        for j in range(i + 1):
            sj = shells[j]
            bi = slice(off[i], off[i] + len(si.components))
            bj = slice(off[j], off[j] + len(sj.components))
            s, t = _overlap_kinetic(si, sj)
            S[bi, bj] = s
            T[bi, bj] = t
            pr = _pair(si, sj)
            for A, (C, Z) in enumerate(zip(coords, charges)):
                R = hermite_r(pr.L, pr.p, pr.P - C[:, None])
                # sum_tuv E_tuv R_tuv, weighted by contraction and -Z 2 pi / p
                val = np.einsum("abtuvp,tuvp,abp->ab", pr.E, R, pr.coef * (2 * pi / pr.p))
                V[A, bi, bj] = -Z * val
            if i != j:
                S[bj, bi] = s.T
                T[bj, bi] = t.T
                V[:, bj, bi] = V[:, bi, bj].transpose(0, 2, 1)
    return S, T, V


def _eri_quartet(bra: _Pair, ket: _Pair) -> np.ndarray:
    L = bra.L + ket.L
    p = bra.p[:, None]
    q = ket.p[None, :]
    alpha = p * q / (p + q)
    PQ = bra.P[:, :, None] - ket.P[:, None, :]
    R = hermite_r(L, alpha, PQ)  # (L+1)^3 x nb x nk
    Lb, Lk = bra.L, ket.L
    # R6[t,u,v,tau,nu,phi] = (-1)^(tau+nu+phi) R[t+tau, u+nu, v+phi]
    idx_b = np.arange(Lb + 1)
    idx_k = np.arange(Lk + 1)
    tt = idx_b[:, None] + idx_k[None, :]
    R6 = R[tt[:, None, None, :, None, None], tt[None, :, None, None, :, None], tt[None, None, :, None, None, :]]
    sign = (-1.0) ** (idx_k[:, None, None] + idx_k[None, :, None] + idx_k[None, None, :])
    R6 = R6 * sign[None, None, None, :, :, :, None, None]
    pref = 2 * pi**2.5 / (p * q * np.sqrt(p + q))
    Eb = bra.E * bra.coef[:, :, None, None, None, :]
    Ek = ket.E * ket.coef[:, :, None, None, None, :]
    return np.einsum("abtuvx,cdklmy,tuvklmxy->abcd", Eb, Ek, R6 * pref, optimize=True)


def two_electron_integrals(basis: BasisSet) -> np.ndarray:
    """Full (mu nu|lam sig) tensor, evaluated over unique shell quartets."""
    shells = basis.shells
    off = basis.shell_offsets()
    n = basis.nao
    ns = len(shells)
    eri = np.zeros((n, n, n, n))
    pairs = {}
    for i in range(ns):
        for j in range(i + 1):
            pairs[(i, j)] = _pair(shells[i], shells[j])
    keys = list(pairs)
    sl = [slice(off[k], off[k] + len(shells[k].components)) for k in range(ns)]
    for x, (i, j) in enumerate(keys):
        for (k, l) in keys[: x + 1]:
            blk = _eri_quartet(pairs[(i, j)], pairs[(k, l)])
            I, J, K, Lq = sl[i], sl[j], sl[k], sl[l]
            for (a, b, c, d), arr in (
                ((I, J, K, Lq), blk),
                ((J, I, K, Lq), blk.transpose(1, 0, 2, 3)),
                ((I, J, Lq, K), blk.transpose(0, 1, 3, 2)),
                ((J, I, Lq, K), blk.transpose(1, 0, 3, 2)),
                ((K, Lq, I, J), blk.transpose(2, 3, 0, 1)),
                ((Lq, K, I, J), blk.transpose(3, 2, 0, 1)),
                ((K, Lq, J, I), blk.transpose(2, 3, 1, 0)),
                ((Lq, K, J, I), blk.transpose(3, 2, 1, 0)),
            ):
                eri[a, b, c, d] = arr
    return eri


def compute_integrals(system: FragmentedSystem, basis: BasisSet | None = None) -> tuple[BasisSet, IntegralStore]:
    basis = basis or build_basis(system)
    S, T, V = one_electron_integrals(basis, system)
    eri = two_electron_integrals(basis)
    return basis, IntegralStore(S, T, V, eri)
