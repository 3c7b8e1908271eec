"""Second-quantized Hamiltonians of embedded units.

Spatial integrals use chemists' notation (pq|rs). The spin-orbital form uses
interleaved ordering (2i = alpha of spatial orbital i, 2i+1 = beta) and
physicists' notation g_pqrs = <pq|rs> = (pr|qs), so that

    H = sum_pq h_pq a+_p a_q + 1/2 sum_pqrs g_pqrs a+_p a+_q a_s a_r + E_const.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class SpatialHamiltonian:
    h1: np.ndarray
    h2: np.ndarray  # (pq|rs)
    E_const: float
    n_elec: int
    eps: np.ndarray | None = None  # orbital energies of the active orbitals
    n_frozen: int = 0

    @property
    def norb(self) -> int:
        return self.h1.shape[0]

    @property
    def n_occ(self) -> int:
        return self.n_elec // 2

    def hf_energy(self) -> float:
        o = slice(0, self.n_occ)
        J = np.einsum("iijj->", self.h2[o, o, o, o])
        K = np.einsum("ijji->", self.h2[o, o, o, o])
        return float(2 * np.trace(self.h1[o, o]) + 2 * J - K + self.E_const)

    def fock_diagonal(self) -> np.ndarray:
        o = slice(0, self.n_occ)
        f = self.h1 + 2 * np.einsum("pqii->pq", self.h2[:, :, o, o]) - np.einsum("piiq->pq", self.h2[:, o, o, :])
        return np.diag(f).copy()


@dataclass
class SpinOrbitalHamiltonian:
    n_so: int
    n_elec: int
    h: np.ndarray
    g: np.ndarray
    E_const: float
    spatial: SpatialHamiltonian | None = field(default=None, repr=False)

    @property
    def n_alpha(self) -> int:
        return (self.n_elec + 1) // 2

    @property
    def n_beta(self) -> int:
        return self.n_elec // 2

    def hf_occupation(self) -> list[int]:
        """Spin orbitals occupied in the aufbau determinant."""
        return list(range(self.n_elec))

    def hf_energy(self) -> float:
        occ = self.hf_occupation()
        e = sum(self.h[i, i] for i in occ)
        for i in occ:
            for j in occ:
                e += 0.5 * (self.g[i, j, i, j] - self.g[i, j, j, i])
        return float(e + self.E_const)

    def fermion_operator(self, tol: float = 0.0):
        """The full Hamiltonian as a FermionOperator, two-body part over pairs p<q, r<s."""
        from .qubit import FermionOperator

        op = FermionOperator.constant(self.E_const)
        n = self.n_so
        for p in range(n):
            for q in range(n):
                if abs(self.h[p, q]) > tol:
                    op.add_term(((p, 1), (q, 0)), self.h[p, q])
        # 1/2 sum g_pqrs a+p a+q a_s a_r = sum_{p<q, r<s} (g_pqrs - g_pqsr) a+p a+q a_s a_r
        for p in range(n):
            for q in range(p + 1, n):
                for r in range(n):
                    for s in range(r + 1, n):
                        v = self.g[p, q, r, s] - self.g[p, q, s, r]
                        if abs(v) > tol:
                            op.add_term(((p, 1), (q, 1), (s, 0), (r, 0)), v)
        return op


def ao_to_mo(h_ao: np.ndarray, eri_ao: np.ndarray, C: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Transform one- and two-electron AO integrals with coefficients C (quarter steps)."""
    h = C.T @ h_ao @ C
    g = np.tensordot(eri_ao, C, axes=([0], [0]))  # (n l s) p
    g = np.tensordot(g, C, axes=([0], [0]))  # (l s) p q
    g = np.tensordot(g, C, axes=([0], [0]))  # s p q r
    g = np.tensordot(g, C, axes=([0], [0]))  # p q r s
    return h, g


def symmetrize(h: np.ndarray, g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Impose h_pq = h_qp and the 8-fold symmetry of real (pq|rs) exactly."""
    h = 0.5 * (h + h.T)
    g = 0.5 * (g + g.transpose(1, 0, 2, 3))
    g = 0.5 * (g + g.transpose(0, 1, 3, 2))
    g = 0.5 * (g + g.transpose(2, 3, 0, 1))
    return h, g


def freeze_core(h: np.ndarray, g: np.ndarray, n_frozen: int, n_occ: int | None = None):
    """Fold the lowest `n_frozen` doubly occupied MOs into an effective operator.

    Returns (h_eff, g_active, E_frozen) over the remaining orbitals.
    """
    if n_frozen < 0 or (n_occ is not None and n_frozen > n_occ):
        raise ValueError(f"cannot freeze {n_frozen} orbitals with {n_occ} occupied")
    if n_frozen == 0:
        return h.copy(), g.copy(), 0.0
    c = slice(0, n_frozen)
    a = slice(n_frozen, h.shape[0])
    J = np.einsum("pqcc->pq", g[:, :, c, c])
    K = np.einsum("pccq->pq", g[:, c, c, :])
    h_eff = (h + 2 * J - K)[a, a]
    E_frozen = 2 * np.trace(h[c, c]) + 2 * np.einsum("ccdd->", g[c, c, c, c]) - np.einsum("cddc->", g[c, c, c, c])
    return h_eff, g[a, a, a, a].copy(), float(E_frozen)


def to_spin_orbitals(h1: np.ndarray, h2: np.ndarray, E_const: float = 0.0, n_elec: int = 0,
                     spatial: SpatialHamiltonian | None = None) -> SpinOrbitalHamiltonian:
    n = h1.shape[0]
    n_so = 2 * n
    spin = np.arange(n_so) % 2
    orb = np.arange(n_so) // 2
    same = (spin[:, None] == spin[None, :]).astype(float)
    h = h1[np.ix_(orb, orb)] * same
    # <pq|rs> = (pr|qs) delta(s_p, s_r) delta(s_q, s_s)
    g = h2[np.ix_(orb, orb, orb, orb)].transpose(0, 2, 1, 3)
    g = g * same[:, None, :, None] * same[None, :, None, :]
    return SpinOrbitalHamiltonian(n_so, n_elec, h, g, float(E_const), spatial)


def count_core_orbitals(Z) -> int:
    """One frozen 1s orbital for every atom beyond helium."""
    return int(sum(1 for z in Z if z > 2))


def build_hamiltonian(
    h_ao: np.ndarray,
    eri_ao: np.ndarray,
    C: np.ndarray,
    n_elec: int,
    E_nuc: float,
    n_frozen: int = 0,
    eps: np.ndarray | None = None,
) -> SpatialHamiltonian:
    """Active-space Hamiltonian for orbitals C (columns ordered by energy)."""
    h, g = ao_to_mo(h_ao, eri_ao, C)
    h, g = symmetrize(h, g)
    h_eff, g_act, E_frozen = freeze_core(h, g, n_frozen, n_elec // 2)
    act_eps = None if eps is None else np.asarray(eps)[n_frozen:]
    return SpatialHamiltonian(h_eff, g_act, E_nuc + E_frozen, n_elec - 2 * n_frozen, act_eps, n_frozen)


def unit_hamiltonian(unit, system, n_frozen: int | None = None, C: np.ndarray | None = None) -> SpatialHamiltonian:
    """Embedded Hamiltonian of an FMO unit, ESP folded into h.

    By default one 1s core orbital per heavy atom is frozen.
    """
    if n_frozen is None:
        n_frozen = count_core_orbitals(system.nuclear_charges[unit.atoms])
    C = unit.scf.C if C is None else C
    h_ao = unit.h_core + unit.V_esp
    return build_hamiltonian(h_ao, unit.eri, C, unit.n_electrons, unit.E_nuc, n_frozen, unit.scf.eps)


# --- FCIDUMP -----------------------------------------------------------------------


class FCIDUMPError(ValueError):
    pass


def write_fcidump(ham: SpatialHamiltonian | SpinOrbitalHamiltonian, path, tol: float = 0.0) -> None:
    """Write a Molpro-style FCIDUMP (spatial orbitals, all symmetry labels 1).

    Values carry 17 significant digits so a write/read cycle is lossless.
    """
    if isinstance(ham, SpinOrbitalHamiltonian):
        if ham.spatial is None:
            raise ValueError("spin-orbital Hamiltonian has no spatial form to dump")
        ham = ham.spatial
    n = ham.norb
    lines = [
        f" &FCI NORB={n},NELEC={ham.n_elec},MS2=0,",
        "  ORBSYM=" + ",".join(["1"] * n) + ",",
        "  ISYM=1,",
        " &END",
    ]
    fmt = "{:24.16e} {:4d} {:4d} {:4d} {:4d}"
    g = ham.h2
    for i in range(n):
        for j in range(i + 1):
            ij = i * (i + 1) // 2 + j
            for k in range(n):
                for l in range(k + 1):
                    if k * (k + 1) // 2 + l > ij:
                        continue
                    v = g[i, j, k, l]
                    if abs(v) > tol:
                        lines.append(fmt.format(v, i + 1, j + 1, k + 1, l + 1))
    for i in range(n):
        for j in range(i + 1):
            v = ham.h1[i, j]
            if abs(v) > tol:
                lines.append(fmt.format(v, i + 1, j + 1, 0, 0))
    lines.append(fmt.format(ham.E_const, 0, 0, 0, 0))
    Path(path).write_text("\n".join(lines) + "\n")


def read_fcidump(path) -> SpatialHamiltonian:
    text = Path(path).read_text()
    head, sep, body = text.partition("&END")
    if not sep:
        head, sep, body = text.partition("/")
    if not sep or "&FCI" not in head.upper():
        raise FCIDUMPError("missing &FCI ... &END header")
    header = {}
    for item in head.upper().replace("&FCI", "").replace("\n", " ").split(","):
        if "=" in item:
            key, val = item.split("=", 1)
            header[key.strip()] = val.strip()
    try:
        n = int(header["NORB"])
        nelec = int(header["NELEC"])
    except (KeyError, ValueError):
        raise FCIDUMPError("header lacks NORB/NELEC") from None
    h1 = np.zeros((n, n))
    h2 = np.zeros((n, n, n, n))
    E_const = 0.0
    for lineno, line in enumerate(body.splitlines(), start=1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 5:
            raise FCIDUMPError(f"malformed integral line {lineno}: {line!r}")
        v = float(fields[0])
        i, j, k, l = (int(x) for x in fields[1:])
        if i == j == k == l == 0:
            E_const = v
        elif k == l == 0:
            h1[i - 1, j - 1] = h1[j - 1, i - 1] = v
        else:
            i, j, k, l = i - 1, j - 1, k - 1, l - 1
            for a, b, c, d in ((i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k)):
                h2[a, b, c, d] = h2[c, d, a, b] = v
    return SpatialHamiltonian(h1, h2, E_const, nelec)


def spin_orbital_hamiltonian(sp: SpatialHamiltonian) -> SpinOrbitalHamiltonian:
    return to_spin_orbitals(sp.h1, sp.h2, sp.E_const, sp.n_elec, spatial=sp)


__all__ = [
    "SpatialHamiltonian",
    "SpinOrbitalHamiltonian",
    "ao_to_mo",
    "freeze_core",
    "to_spin_orbitals",
    "build_hamiltonian",
    "unit_hamiltonian",
    "write_fcidump",
    "read_fcidump",
    "spin_orbital_hamiltonian",
    "count_core_orbitals",
]
