"""Unitary coupled-cluster ansatz with singles and doubles.

Each spin-orbital excitation tau (a+_a a_i, or a+_a a+_b a_j a_i with i<j,
a<b) carries one real amplitude t and enters the ansatz through the
anti-Hermitian generator t (tau - tau+). The Trotterized ansatz applies one
exponential per generator in a fixed order; the exact ansatz exponentiates
the sum of all generators at once.

Two interchangeable backends evaluate energies. ``"qubit"`` runs the reduced
qubit register with Pauli rotations and PauliSum products. ``"sector"`` works
on the fixed-number determinant space, where every generator exponential is a
set of independent 2x2 rotations. The qubit backend is the reference; the
sector backend makes 18-20 qubit units affordable.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..hamiltonian import SpinOrbitalHamiltonian
from ..qubit import (
    FermionOperator,
    PauliSum,
    hf_bitstring,
    jordan_wigner,
    occupation_mask,
    qubit_hamiltonian,
    reduce_two_qubits,
)
from ..sector import GeneratorPattern, Sector, givens_apply
from ..simulator import (
    apply_exp_antihermitian,
    apply_pauli_rotation,
    expectation,
    hf_state,
    krylov_expm,
    lanczos_ground,
)

log = logging.getLogger(__name__)

BACKENDS = ("qubit", "sector")


@dataclass(frozen=True)
class Excitation:
    id: int
    occ: tuple[int, ...]
    vir: tuple[int, ...]

    @property
    def kind(self) -> str:
        return "single" if len(self.occ) == 1 else "double"

    @property
    def key(self) -> tuple[int, ...]:
        return self.occ + self.vir

    def operator(self) -> FermionOperator:
        """tau = a+_a a+_b a_j a_i (or a+_a a_i)."""
        return FermionOperator.excitation(self.vir, tuple(reversed(self.occ)))

    def antihermitian(self) -> FermionOperator:
        tau = self.operator()
        return tau - tau.adjoint()


def build_generators(n_so: int, n_elec: int) -> list[Excitation]:
    """All spin-conserving singles and doubles out of the aufbau determinant.

    Canonical ids: singles sorted by (i, a), then doubles sorted by (i, j, a, b).
    """
    occ = range(n_elec)
    vir = range(n_elec, n_so)
    out: list[Excitation] = []
    for i in occ:
        for a in vir:
            if i % 2 == a % 2:
                out.append(Excitation(len(out), (i,), (a,)))
    for i in occ:
        for j in range(i + 1, n_elec):
            for a in vir:
                for b in range(a + 1, n_so):
                    if sorted((i % 2, j % 2)) == sorted((a % 2, b % 2)):
                        out.append(Excitation(len(out), (i, j), (a, b)))
    return out


@dataclass
class ClusterAmplitudes:
    singles: dict[tuple[int, int], float] = field(default_factory=dict)
    doubles: dict[tuple[int, int, int, int], float] = field(default_factory=dict)

    def get(self, exc: Excitation) -> float:
        table = self.singles if exc.kind == "single" else self.doubles
        return float(table.get(exc.key, 0.0))

    def to_vector(self, generators: list[Excitation]) -> np.ndarray:
        return np.array([self.get(g) for g in generators], dtype=float)

    @classmethod
    def from_vector(cls, generators: list[Excitation], x) -> "ClusterAmplitudes":
        out = cls()
        for g, t in zip(generators, x):
            (out.singles if g.kind == "single" else out.doubles)[g.key] = float(t)
        return out


@dataclass(frozen=True)
class TrotterPlan:
    """Generator ids in application order (first applied first) and the |t| they were ranked by."""

    order: tuple[int, ...]
    magnitudes: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.order)


def magnitude_order(generators: list[Excitation], amplitudes) -> TrotterPlan:
    """Descending |t|, ties broken by canonical generator id."""
    if isinstance(amplitudes, ClusterAmplitudes):
        mags = {g.id: abs(amplitudes.get(g)) for g in generators}
    else:
        x = np.asarray(amplitudes, dtype=float)
        mags = {g.id: abs(x[g.id]) for g in generators}
    order = sorted(mags, key=lambda gid: (-mags[gid], gid))
    return TrotterPlan(tuple(order), tuple(mags[g] for g in order))


def generator_images(generators: list[Excitation], n_so: int, n_alpha: int, n_beta: int,
                     reduce: bool = True) -> list[PauliSum]:
    """Qubit image of tau - tau+ for each generator (unit amplitude)."""
    out = []
    for g in generators:
        img = jordan_wigner(g.antihermitian(), n_so)
        if reduce:
            img = reduce_two_qubits(img, n_so, n_alpha, n_beta)
        out.append(img)
    return out


# --- qubit-register evaluators ---------------------------------------------------------


def trotter_state(x, plan: TrotterPlan, images: list[PauliSum], psi0: np.ndarray) -> np.ndarray:
    psi = psi0.astype(complex, copy=True)
    for gid in plan.order:
        t = float(x[gid])
        if t == 0.0:
            continue
        for P, c in images[gid]:
            # exp(t * i r P) with c = i r
            apply_pauli_rotation(psi, P, t * c.imag)
    return psi


def exact_state(x, images: list[PauliSum], psi0: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    terms: dict = {}
    for t, img in zip(x, images):
        if t == 0.0:
            continue
        for key, c in img.terms.items():
            terms[key] = terms.get(key, 0.0) + t * c
    A = PauliSum(images[0].n_qubits if images else 0, terms).simplify(0.0)
    psi = psi0.astype(complex, copy=True)
    return apply_exp_antihermitian(psi, A, tol)


def energy_trotter(x, plan: TrotterPlan, H_qubit: PauliSum, psi0: np.ndarray, images: list[PauliSum]) -> float:
    """Energy of the single-slice Trotterized UCCSD state (constant included in H_qubit)."""
    return expectation(trotter_state(x, plan, images, psi0), H_qubit)


def energy_exact(x, images: list[PauliSum], H_qubit: PauliSum, psi0: np.ndarray, tol: float = 1e-12) -> float:
    return expectation(exact_state(x, images, psi0, tol), H_qubit)


# --- the ansatz object ---------------------------------------------------------------


class UCCSD:
    """UCCSD energies for one SpinOrbitalHamiltonian.

    Amplitudes are vectors indexed by canonical generator id, or
    ClusterAmplitudes. All energies are totals in Hartree (E_const included).
    """

    def __init__(self, ham: SpinOrbitalHamiltonian, backend: str = "auto", exact_tol: float = 1e-12):
        if backend == "auto":
            backend = "qubit" if ham.n_so - 2 <= 12 else "sector"
        if backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}, got {backend!r}")
        self.ham = ham
        self.backend = backend
        self.exact_tol = exact_tol
        self.generators = build_generators(ham.n_so, ham.n_elec)
        self.n_evals = 0
        self._q = None
        self._s = None

    @property
    def n_params(self) -> int:
        return len(self.generators)

    @property
    def n_qubits(self) -> int:
        return self.ham.n_so - 2

    def vector(self, amplitudes) -> np.ndarray:
        if isinstance(amplitudes, ClusterAmplitudes):
            return amplitudes.to_vector(self.generators)
        x = np.asarray(amplitudes, dtype=float)
        if x.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} amplitudes, got shape {x.shape}")
        return x

    def plan(self, amplitudes) -> TrotterPlan:
        return magnitude_order(self.generators, self.vector(amplitudes))

    # backend data, built on first use
    @property
    def qubit(self):
        if self._q is None:
            h = self.ham
            H = qubit_hamiltonian(h)
            psi0 = hf_state(H.n_qubits, hf_bitstring(h))
            images = generator_images(self.generators, h.n_so, h.n_alpha, h.n_beta)
            self._q = (H, psi0, images)
        return self._q

    @property
    def sector(self):
        if self._s is None:
            h = self.ham
            sec = Sector(h.n_so, h.n_alpha, h.n_beta)
            H = sec.hamiltonian(jordan_wigner(h.fermion_operator(), h.n_so))
            psi0 = sec.basis_vector(occupation_mask(h.hf_occupation()))
            pairs = [sec.excitation_pairs(g.vir, tuple(reversed(g.occ))) for g in self.generators]
            # <psi|H|psi> for real psi needs only the diagonal and the strict upper triangle
            self._upper = (H.diagonal(), sp.triu(H, k=1, format="csr"))
            self._pattern = GeneratorPattern(len(psi0), pairs)
            self._s = (sec, H, psi0, pairs)
        return self._s

    def hf_energy(self) -> float:
        if self.backend == "qubit":
            H, psi0, _ = self.qubit
            return expectation(psi0, H)
        _, H, psi0, _ = self.sector
        return float(psi0 @ (H @ psi0))

    def state_trotter(self, amplitudes, plan: TrotterPlan) -> np.ndarray:
        x = self.vector(amplitudes)
        if self.backend == "qubit":
            _, psi0, images = self.qubit
            return trotter_state(x, plan, images, psi0)
        _, _, psi0, pairs = self.sector
        psi = psi0.copy()
        for gid in plan.order:
            givens_apply(psi, *pairs[gid], float(x[gid]))
        return psi

    def state_exact(self, amplitudes) -> np.ndarray:
        x = self.vector(amplitudes)
        if self.backend == "qubit":
            _, psi0, images = self.qubit
            return exact_state(x, images, psi0, self.exact_tol)
        _, _, psi0, _ = self.sector
        A = self._pattern.matrix(x)
        return krylov_expm(lambda v: A @ v, psi0, self.exact_tol)

    def _energy(self, psi: np.ndarray) -> float:
        self.n_evals += 1
        if self.backend == "qubit":
            return expectation(psi, self.qubit[0])
        self.sector
        diag, upper = self._upper
        return float(psi @ (diag * psi) + 2.0 * (psi @ (upper @ psi)))

    def energy_trotter(self, amplitudes, plan: TrotterPlan) -> float:
        return self._energy(self.state_trotter(amplitudes, plan))

    def energy_exact(self, amplitudes) -> float:
        return self._energy(self.state_exact(amplitudes))

    def casci(self, tol: float = 1e-10) -> float:
        """Ground energy in the HF symmetry sector (Lanczos from the HF state)."""
        if self.backend == "qubit":
            H, psi0, _ = self.qubit
            E, _ = lanczos_ground(H, psi0, tol)
        else:
            _, H, psi0, _ = self.sector
            E, _ = lanczos_ground(H, psi0, tol)
        return E
