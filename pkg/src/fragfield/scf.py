"""Closed-shell restricted Hartree-Fock with DIIS over an AO sub-block."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)


class SCFConvergenceError(RuntimeError):
    def __init__(self, message: str, last_energy: float):
        super().__init__(f"{message} (last energy {last_energy:.12f})")
        self.last_energy = last_energy


@dataclass
class SCFOptions:
    max_iter: int = 200
    conv_dE: float = 1e-10
    conv_dD: float = 1e-8
    diis_dim: int = 8


@dataclass
class SCFResult:
    C: np.ndarray
    eps: np.ndarray
    D: np.ndarray
    E_total: float
    E_embed: float
    E_nuc: float
    n_electrons: int
    occupied: np.ndarray  # MO indices holding two electrons
    n_iter: int
    energies: list[float] = field(default_factory=list, repr=False)
    F: np.ndarray | None = field(default=None, repr=False)

    @property
    def E_elec(self) -> float:
        """Electronic energy, i.e. E_total without the constant nuclear term."""
        return self.E_total - self.E_nuc

    @property
    def n_occ(self) -> int:
        return self.n_electrons // 2


def coulomb_exchange(D: np.ndarray, eri: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    J = np.einsum("mnls,ls->mn", eri, D, optimize=True)
    K = np.einsum("mlsn,ls->mn", eri, D, optimize=True)
    return J, K


def fock_build(D: np.ndarray, h: np.ndarray, eri: np.ndarray) -> np.ndarray:
    """F = h + J(D) - K(D)/2 for a closed-shell density D."""
    J, K = coulomb_exchange(D, eri)
    return h + J - 0.5 * K


def _orthogonalizer(S: np.ndarray) -> np.ndarray:
    w, U = np.linalg.eigh(S)
    if w.min() <= 0:
        raise np.linalg.LinAlgError("overlap matrix is not positive definite")
    return (U / np.sqrt(w)) @ U.T


def _diagonalize(F: np.ndarray, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # numpy eigh (LAPACK syevd) returns ascending eigenvalues deterministically
    eps, Cp = np.linalg.eigh(X.T @ F @ X)
    return eps, X @ Cp


def rhf(
    h_core: np.ndarray,
    V_esp: np.ndarray | None,
    eri: np.ndarray,
    S: np.ndarray,
    n_electrons: int,
    E_nuc: float = 0.0,
    opts: SCFOptions | None = None,
    guess: np.ndarray | None = None,
) -> SCFResult:
    """Restricted closed-shell HF.

    `h_core` is the bare one-electron operator of the unit and `V_esp` a fixed
    embedding operator added to it. `guess` may be an initial density matrix;
    by default the core Hamiltonian is diagonalized. Among degenerate orbitals
    the eigensolver output order decides the occupation.
    """
    if n_electrons % 2:
        raise ValueError(f"closed-shell RHF needs an even electron count, got {n_electrons}")
    opts = opts or SCFOptions()
    nocc = n_electrons // 2
    V_esp = np.zeros_like(h_core) if V_esp is None else V_esp
    h = h_core + V_esp
    X = _orthogonalizer(S)

    if guess is None:
        eps, C = _diagonalize(h, X)
        D = 2.0 * C[:, :nocc] @ C[:, :nocc].T
    else:
        D = np.array(guess, dtype=float)

    focks: list[np.ndarray] = []
    errors: list[np.ndarray] = []
    energies: list[float] = []
    E_old = None
    for it in range(1, opts.max_iter + 1):
        F = fock_build(D, h, eri)
        E = 0.5 * np.einsum("ij,ij", D, h + F) + E_nuc
        energies.append(E)

        err = F @ D @ S - S @ D @ F
        focks.append(F)
        errors.append(X.T @ err @ X)
        if len(focks) > opts.diis_dim:
            focks.pop(0)
            errors.pop(0)
        F_ext = _diis_extrapolate(focks, errors) if len(focks) > 1 else F

        eps, C = _diagonalize(F_ext, X)
        D_new = 2.0 * C[:, :nocc] @ C[:, :nocc].T
        dD = np.abs(D_new - D).max()
        dE = np.inf if E_old is None else abs(E - E_old)
        D, E_old = D_new, E
        if dD <= opts.conv_dD and dE <= opts.conv_dE:
            break
    else:
        raise SCFConvergenceError(f"RHF not converged in {opts.max_iter} iterations", energies[-1])

    # final consistent quantities from the converged density
    F = fock_build(D, h, eri)
    eps, C = _diagonalize(F, X)
    D = 2.0 * C[:, :nocc] @ C[:, :nocc].T
    F = fock_build(D, h, eri)
    E = 0.5 * np.einsum("ij,ij", D, h + F) + E_nuc
    E_embed = float(np.einsum("ij,ij", D, V_esp))
    log.debug("RHF converged in %d iterations, E = %.12f", it, E)
    return SCFResult(
        C=C,
        eps=eps,
        D=D,
        E_total=float(E),
        E_embed=E_embed,
        E_nuc=float(E_nuc),
        n_electrons=n_electrons,
        occupied=np.arange(nocc),
        n_iter=it,
        energies=energies,
        F=F,
    )


def _diis_extrapolate(focks, errors) -> np.ndarray:
    n = len(focks)
    B = -np.ones((n + 1, n + 1))
    B[n, n] = 0.0
    for i in range(n):
        for j in range(i + 1):
            B[i, j] = B[j, i] = np.einsum("ij,ij", errors[i], errors[j])
    rhs = np.zeros(n + 1)
    rhs[n] = -1.0
    try:
        coef = np.linalg.solve(B, rhs)[:n]
    except np.linalg.LinAlgError:
        return focks[-1]
    return sum(c * F for c, F in zip(coef, focks))
