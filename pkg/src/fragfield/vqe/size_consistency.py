"""UCCSD size-consistency study on square H4 and two stacked squares (8H).

The monomer is a square of side R in the xy plane with its edges parallel to
the axes, so every STO-3G molecular orbital belongs to a distinct D2h irrep.
The dimer stacks a second, identical square along z. Dimer orbitals are
either the monomer orbitals placed block-wise in the dimer AO space (LMO) or
their normalized in-phase and out-of-phase combinations (CMO).
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from ..chem import ANGSTROM_TO_BOHR, HARTREE_KCALMOL, Atom, FragmentedSystem
from ..hamiltonian import build_hamiltonian, spin_orbital_hamiltonian
from ..integrals import BasisSet, compute_integrals
from ..scf import SCFResult, _orthogonalizer, rhf
from ..simulator import lanczos_ground
from .mp2 import mp2
from .optimize import OptimizeOptions, vqe_minimize
from .uccsd import UCCSD

log = logging.getLogger(__name__)

ORBITAL_BASES = ("lmo", "cmo")
TABLE_ROWS = [
    ("monomer", "lmo", False),
    ("dimer", "lmo", False),
    ("dimer", "cmo", False),
    ("monomer", "lmo", True),
    ("dimer", "lmo", True),
    ("dimer", "cmo", True),
]


class LocalityError(ValueError):
    pass


def square_h4(rhh: float) -> list[np.ndarray]:
    """Corner positions (Bohr) of a square with side `rhh` Angstrom, edges along x and y."""
    a = 0.5 * rhh * ANGSTROM_TO_BOHR
    return [np.array(p) for p in ((a, a, 0.0), (-a, a, 0.0), (-a, -a, 0.0), (a, -a, 0.0))]


def h4_monomer(rhh: float) -> FragmentedSystem:
    return FragmentedSystem([Atom("H", 1, p) for p in square_h4(rhh)], [1] * 4)


def h4_dimer(rhh: float, separation: float) -> FragmentedSystem:
    shift = np.array([0.0, 0.0, separation * ANGSTROM_TO_BOHR])
    pos = square_h4(rhh)
    atoms = [Atom("H", 1, p) for p in pos] + [Atom("H", 1, p + shift) for p in pos]
    return FragmentedSystem(atoms, [1] * 4 + [2] * 4)


def reflection_matrix(system: FragmentedSystem, basis: BasisSet, axis: int) -> np.ndarray:
    """AO representation of the mirror x_axis -> -x_axis (Cartesian shells)."""
    X = system.coords
    offsets = basis.shell_offsets()
    shells_on = {}
    for k, sh in enumerate(basis.shells):
        shells_on.setdefault(sh.atom, []).append(k)
    R = np.zeros((basis.nao, basis.nao))
    for a, shell_ids in shells_on.items():
        y = X[a].copy()
        y[axis] *= -1
        b = int(np.argmin(np.linalg.norm(X - y, axis=1)))
        if np.linalg.norm(X[b] - y) > 1e-8:
            raise ValueError("geometry is not symmetric under the requested mirror")
        for k, k2 in zip(shell_ids, shells_on[b]):
            for c, lmn in enumerate(basis.shells[k].components):
                R[offsets[k2] + c, offsets[k] + c] = (-1) ** lmn[axis]
    return R


def symmetric_rhf(system: FragmentedSystem, basis: BasisSet, ints, n_electrons: int) -> SCFResult:
    """RHF from a core guess whose degenerate orbitals are adapted to the x mirror.

    Within each degenerate block the orbital odd under x -> -x comes first, so
    the occupied component of a degenerate frontier pair is fixed.
    """
    h = ints.hcore(range(len(system.atoms)))
    X = _orthogonalizer(ints.S)
    eps, Cp = np.linalg.eigh(X.T @ h @ X)
    C = X @ Cp
    R = reflection_matrix(system, basis, 0)
    i = 0
    while i < len(eps):
        j = i
        while j + 1 < len(eps) and abs(eps[j + 1] - eps[i]) < 1e-8:
            j += 1
        if j > i:
            block = C[:, i : j + 1]
            _, U = np.linalg.eigh(block.T @ ints.S @ R @ block)
            C[:, i : j + 1] = block @ U
            log.info("degenerate core orbitals %d-%d adapted to the x mirror", i, j)
        i = j + 1
    nocc = n_electrons // 2
    guess = 2.0 * C[:, :nocc] @ C[:, :nocc].T
    return rhf(h, None, ints.eri, ints.S, n_electrons, system.nuclear_repulsion(), guess=guess)


def _fix_phase(C: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude coefficient of every column positive."""
    idx = np.argmax(np.abs(C), axis=0)
    return C * np.sign(C[idx, np.arange(C.shape[1])])


def dimer_orbitals(C_a: np.ndarray, eps: np.ndarray, n_occ: int, S: np.ndarray, kind: str):
    """Dimer MO coefficients and energies from monomer orbitals, occupied first.

    Monomer B carries the same coefficients as A on its own AOs (B is a pure
    translation of A). LMO order: occupied A, occupied B, virtual A, virtual B.
    CMO order: for each monomer orbital, (A + B)/sqrt2 then (A - B)/sqrt2.
    """
    n = C_a.shape[0]
    Z = np.zeros_like(C_a)
    A = np.vstack([C_a, Z])
    B = np.vstack([Z, C_a])
    if kind == "lmo":
        occ, vir = slice(0, n_occ), slice(n_occ, n)
        C = np.hstack([A[:, occ], B[:, occ], A[:, vir], B[:, vir]])
        e = np.concatenate([eps[occ], eps[occ], eps[vir], eps[vir]])
    elif kind == "cmo":
        cols, e = [], []
        for k in range(n):
            cols += [(A[:, k] + B[:, k]) / np.sqrt(2), (A[:, k] - B[:, k]) / np.sqrt(2)]
            e += [eps[k], eps[k]]
        C = np.array(cols).T
        # symmetric orthonormalization in the dimer metric
        w, U = np.linalg.eigh(C.T @ S @ C)
        C = C @ (U / np.sqrt(w)) @ U.T
        e = np.array(e)
    else:
        raise ValueError(f"orbital basis must be one of {ORBITAL_BASES}")
    return C, e


@dataclass
class SCResult:
    system: str
    basis: str
    trotter: bool
    E_uccsd: float
    E_casci: float
    E_hf: float
    n_evals: int
    converged: bool
    n_qubits: int
    n_params: int

    @property
    def delta_kcal(self) -> float:
        return (self.E_uccsd - self.E_casci) * HARTREE_KCALMOL


def sector_ground(ansatz: UCCSD, tol: float = 1e-10) -> float:
    """Lowest energy of the full (n_alpha, n_beta) sector, all spatial symmetries included."""
    _, H, psi0, _ = ansatz.sector
    rng = np.random.default_rng(2024)
    v = psi0 + 0.1 * rng.standard_normal(len(psi0)) / np.sqrt(len(psi0))
    E, _ = lanczos_ground(H, v, tol)
    return E


def sc_hamiltonian(rhh: float, separation: float, basis_kind: str, system: str = "dimer"):
    """Spin-orbital Hamiltonian of the H4 monomer or the 8H dimer in the requested orbitals."""
    mono = h4_monomer(rhh)
    mbasis, mints = compute_integrals(mono)
    scf = symmetric_rhf(mono, mbasis, mints, 4)
    C_a = _fix_phase(scf.C)
    if system == "monomer":
        h = mints.hcore(range(4))
        sp = build_hamiltonian(h, mints.eri, C_a, 4, scf.E_nuc, 0, scf.eps)
        return spin_orbital_hamiltonian(sp), scf
    dim = h4_dimer(rhh, separation)
    dbasis, dints = compute_integrals(dim)
    n = C_a.shape[0]
    cross = C_a.T @ dints.S[:n, n:] @ C_a
    if basis_kind == "lmo" and np.abs(cross).max() > 1e-10:
        raise LocalityError(f"monomer orbitals overlap by {np.abs(cross).max():.2e} at {separation} Angstrom")
    C, eps = dimer_orbitals(C_a, scf.eps, 2, dints.S, basis_kind)
    h = dints.hcore(range(8))
    sp = build_hamiltonian(h, dints.eri, C, 8, dim.nuclear_repulsion(), 0, eps)
    return spin_orbital_hamiltonian(sp), scf


def sc_harness(
    rhh: float = 1.0583,
    separation: float = 100.0,
    basis: str = "lmo",
    trotter: bool = False,
    system: str = "dimer",
    optimizer: str = "powell",
    ftol: float = 1e-9,
    max_evals: int | None = 400_000,
    backend: str = "sector",
) -> SCResult:
    """UCCSD minus CAS-CI total energy for the H4 monomer or 8H dimer."""
    if basis not in ORBITAL_BASES:
        raise ValueError(f"orbital basis must be one of {ORBITAL_BASES}")
    if system not in ("monomer", "dimer"):
        raise ValueError("system must be 'monomer' or 'dimer'")
    ham, _ = sc_hamiltonian(rhh, separation, basis, system)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        _, amps = mp2(ham, ham.spatial.eps, zero_below=1e-6)
    ansatz = UCCSD(ham, backend)
    sector_ansatz = ansatz if backend == "sector" else UCCSD(ham, "sector")
    E_cas = sector_ground(sector_ansatz)
    x0 = ansatz.vector(amps)
    opts = OptimizeOptions(optimizer, ftol=ftol, max_evals=max_evals)
    if trotter:
        plan = ansatz.plan(x0)
        res = vqe_minimize(lambda x: ansatz.energy_trotter(x, plan), x0, opts)
    else:
        res = vqe_minimize(ansatz.energy_exact, x0, opts)
    return SCResult(system, basis, trotter, res.energy, E_cas, ansatz.hf_energy(), res.n_evals, res.converged,
                    ansatz.n_qubits, ansatz.n_params)
