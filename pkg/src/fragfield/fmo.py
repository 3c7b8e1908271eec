"""Two-body fragment molecular orbital (FMO2) Hartree-Fock.

Monomer and dimer energies are *electronic* energies of the embedded unit
(internuclear repulsion excluded), as printed by common FMO programs. The
two-body sum of those values plus the total internuclear repulsion of the
system gives the FMO2 total energy.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .chem import FragmentedSystem, fragment_pairs, unit_label
from .integrals import BasisSet, IntegralStore, compute_integrals
from .scf import SCFOptions, SCFResult, rhf

log = logging.getLogger(__name__)

ESP_MODES = ("aoc", "exact")


class SCCConvergenceError(RuntimeError):
    pass


@dataclass
class FMOOptions:
    esp: str = "aoc"
    scc_max: int = 50
    scc_conv_dE: float = 1e-8
    scc_conv_dD: float | None = None
    scf: SCFOptions = field(default_factory=SCFOptions)
    jobs: int = 1

    def __post_init__(self):
        if self.esp not in ESP_MODES:
            raise ValueError(f"esp mode must be one of {ESP_MODES}, got {self.esp!r}")


@dataclass
class EmbeddedUnit:
    """A monomer or dimer together with its fixed embedding operator."""

    unit: int | tuple[int, int]
    fragments: tuple[int, ...]
    aos: np.ndarray
    atoms: list[int]
    h_core: np.ndarray  # bare kinetic + own-nuclei attraction
    V_esp: np.ndarray
    S: np.ndarray
    eri: np.ndarray
    n_electrons: int
    E_nuc: float
    scf: SCFResult | None = None

    @property
    def label(self) -> str:
        return unit_label(self.unit)

    @property
    def energy(self) -> float:
        """Electronic energy in the embedding field."""
        return self.scf.E_elec


@dataclass
class MonomerState:
    fragment: int
    unit: EmbeddedUnit

    @property
    def scf(self) -> SCFResult:
        return self.unit.scf

    @property
    def D(self) -> np.ndarray:
        return self.unit.scf.D


def esp_operator(
    target_aos,
    env_fragments,
    monomer_densities: dict[int, np.ndarray],
    ints: IntegralStore,
    basis: BasisSet,
    system: FragmentedSystem,
    mode: str = "aoc",
) -> np.ndarray:
    """Electrostatic potential of the environment fragments on the target AOs.

    Nuclear attraction of the environment nuclei is always exact. The electron
    repulsion from the environment densities is either the full four-center
    contraction (``mode="exact"``) or its Mulliken approximation
    (``mode="aoc"``), where each environment charge distribution
    chi_l chi_s is replaced by S_ls (chi_l^2 + chi_s^2) / 2.
    """
    if mode not in ESP_MODES:
        raise ValueError(f"unknown ESP mode {mode!r}")
    t = np.asarray(target_aos)
    V = np.zeros((len(t), len(t)))
    for K in env_fragments:
        for A in system.atoms_of(K):
            V += ints.V_nuc[A][np.ix_(t, t)]
        k = basis.aos_of(K)
        D = monomer_densities[K]
        if mode == "exact":
            V += np.einsum("mnls,ls->mn", ints.eri[np.ix_(t, t, k, k)], D, optimize=True)
        else:
            q = (D * ints.S[np.ix_(k, k)]).sum(axis=1)  # gross AO populations
            diag = ints.eri[np.ix_(t, t, k, k)][:, :, np.arange(len(k)), np.arange(len(k))]
            V += diag @ q
    return V


def make_unit(
    unit,
    system: FragmentedSystem,
    basis: BasisSet,
    ints: IntegralStore,
    densities: dict[int, np.ndarray] | None,
    esp_mode: str = "aoc",
) -> EmbeddedUnit:
    frags = (unit,) if isinstance(unit, int) else tuple(sorted(unit))
    aos = basis.aos_of(*frags)
    atoms = system.atoms_of(*frags)
    env = [K for K in system.fragments if K not in frags]
    if env and densities is None:
        raise ValueError("environment densities required for an embedded unit")
    V = esp_operator(aos, env, densities or {}, ints, basis, system, esp_mode)
    ix = np.ix_(aos, aos)
    return EmbeddedUnit(
        unit=unit,
        fragments=frags,
        aos=aos,
        atoms=atoms,
        h_core=ints.hcore(atoms)[ix],
        V_esp=V,
        S=ints.S[ix],
        eri=ints.eri[np.ix_(aos, aos, aos, aos)],
        n_electrons=system.n_electrons(*frags),
        E_nuc=system.nuclear_repulsion(atoms),
    )


def solve_unit(unit: EmbeddedUnit, opts: SCFOptions | None = None, guess=None) -> EmbeddedUnit:
    unit.scf = rhf(unit.h_core, unit.V_esp, unit.eri, unit.S, unit.n_electrons, unit.E_nuc, opts, guess)
    return unit


def scc_loop(
    system: FragmentedSystem,
    basis: BasisSet,
    ints: IntegralStore,
    opts: FMOOptions | None = None,
) -> list[MonomerState]:
    """Monomer self-consistent-charge iterations.

    Isolated-monomer densities seed the ESP. Each sweep then solves monomers
    1..N_f in the ESP of the previous sweep's densities, until no monomer energy
    changes by more than ``opts.scc_conv_dE`` between sweeps.
    """
    opts = opts or FMOOptions()
    frags = list(system.fragments)
    bare = [solve_unit(_bare_unit(I, system, basis, ints), opts.scf) for I in frags]
    if len(frags) == 1:
        return [MonomerState(frags[0], bare[0])]
    densities = {I: u.scf.D for I, u in zip(frags, bare)}
    energies: dict[int, float] = {}

    def solve(I):
        unit = make_unit(I, system, basis, ints, densities, opts.esp)
        return solve_unit(unit, opts.scf, densities[I])

    for sweep in range(1, opts.scc_max + 1):
        results = _map(solve, frags, opts.jobs)
        new_E = {I: u.energy for I, u in zip(frags, results)}
        dE = max(abs(new_E[I] - energies[I]) for I in frags) if energies else np.inf
        dD = max(np.abs(u.scf.D - densities[I]).max() for I, u in zip(frags, results))
        densities = {I: u.scf.D for I, u in zip(frags, results)}
        energies = new_E
        log.info("SCC sweep %d: max|dE| = %.3e, max|dD| = %.3e", sweep, dE, dD)
        if dE <= opts.scc_conv_dE and (opts.scc_conv_dD is None or dD <= opts.scc_conv_dD):
            return [MonomerState(I, u) for I, u in zip(frags, results)]
    raise SCCConvergenceError(f"SCC not converged after {opts.scc_max} sweeps")


def _bare_unit(I, system, basis, ints) -> EmbeddedUnit:
    """Monomer without any environment, used to seed the SCC iterations."""
    aos = basis.aos_of(I)
    atoms = system.atoms_of(I)
    ix = np.ix_(aos, aos)
    return EmbeddedUnit(
        unit=I, fragments=(I,), aos=aos, atoms=atoms,
        h_core=ints.hcore(atoms)[ix], V_esp=np.zeros((len(aos), len(aos))), S=ints.S[ix],
        eri=ints.eri[np.ix_(aos, aos, aos, aos)], n_electrons=system.n_electrons(I),
        E_nuc=system.nuclear_repulsion(atoms),
    )


def _map(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def dimer_scf(
    I: int,
    J: int,
    monomers: dict[int, MonomerState],
    system: FragmentedSystem,
    basis: BasisSet,
    ints: IntegralStore,
    opts: FMOOptions | None = None,
) -> EmbeddedUnit:
    """Dimer RHF in the frozen ESP of all other monomers (no SCC)."""
    opts = opts or FMOOptions()
    densities = {K: m.D for K, m in monomers.items()}
    unit = make_unit((I, J), system, basis, ints, densities, opts.esp)
    # block-diagonal monomer densities as the starting guess
    guess = np.zeros((len(unit.aos), len(unit.aos)))
    for K in (J, I):
        pos = np.flatnonzero(np.isin(unit.aos, basis.aos_of(K)))
        guess[np.ix_(pos, pos)] = densities[K]
    return solve_unit(unit, opts.scf, guess)


@dataclass
class FMOEnergyLedger:
    """Monomer and dimer energies and their two-body assembly."""

    n_fragments: int
    E_I: dict[int, float] = field(default_factory=dict)
    E_IJ: dict[tuple[int, int], float] = field(default_factory=dict)
    corr_I: dict[int, float] = field(default_factory=dict)
    corr_IJ: dict[tuple[int, int], float] = field(default_factory=dict)

    @property
    def E_FMO(self) -> float:
        return assemble(self.E_I, self.E_IJ, self.n_fragments)

    @property
    def corr_FMO(self) -> float:
        return assemble(self.corr_I, self.corr_IJ, self.n_fragments)

    def to_dict(self) -> dict:
        return {
            "n_fragments": self.n_fragments,
            "E_I": {str(k): v for k, v in self.E_I.items()},
            "E_IJ": {unit_label(k): v for k, v in self.E_IJ.items()},
            "E_FMO": self.E_FMO,
        }


def assemble(monomer: dict, dimer: dict, n_fragments: int) -> float:
    """E = sum_{I>J} E_IJ - (N_f - 2) sum_I E_I."""
    missing = [I for I in range(1, n_fragments + 1) if I not in monomer]
    missing += [p for p in fragment_pairs(n_fragments) if p not in dimer]
    if missing:
        raise KeyError(f"missing FMO components: {[unit_label(m) for m in missing]}")
    pair_sum = sum(dimer[p] for p in fragment_pairs(n_fragments))
    mono_sum = sum(monomer[I] for I in range(1, n_fragments + 1))
    return pair_sum - (n_fragments - 2) * mono_sum


@dataclass
class FMOResult:
    system: FragmentedSystem
    basis: BasisSet
    ints: IntegralStore
    monomers: dict[int, MonomerState]
    dimers: dict[tuple[int, int], EmbeddedUnit]
    options: FMOOptions

    @property
    def ledger(self) -> FMOEnergyLedger:
        return FMOEnergyLedger(
            self.system.n_fragments,
            {I: m.unit.energy for I, m in self.monomers.items()},
            {p: d.energy for p, d in self.dimers.items()},
        )

    @property
    def nuclear_repulsion(self) -> float:
        return self.system.nuclear_repulsion()

    @property
    def E_total(self) -> float:
        """FMO2 total energy including all internuclear repulsion."""
        return self.ledger.E_FMO + self.nuclear_repulsion

    def unit(self, unit) -> EmbeddedUnit:
        if isinstance(unit, int):
            return self.monomers[unit].unit
        return self.dimers[tuple(unit)]

    def units(self) -> list[EmbeddedUnit]:
        return [m.unit for m in self.monomers.values()] + list(self.dimers.values())


def run_fmo_hf(system: FragmentedSystem, opts: FMOOptions | None = None, basis=None, ints=None) -> FMOResult:
    opts = opts or FMOOptions()
    if ints is None:
        basis, ints = compute_integrals(system, basis)
    states = scc_loop(system, basis, ints, opts)
    monomers = {m.fragment: m for m in states}
    pairs = fragment_pairs(system)
    dimers = _map(lambda p: dimer_scf(p[0], p[1], monomers, system, basis, ints, opts), pairs, opts.jobs)
    return FMOResult(system, basis, ints, monomers, dict(zip(pairs, dimers)), opts)
