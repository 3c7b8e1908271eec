"""Fast end-to-end consistency checks used by ``fragfield selftest``."""

from __future__ import annotations

import numpy as np

from .chem import bundled_geometry, parse_geometry
from .fmo import assemble, run_fmo_hf
from .hamiltonian import build_hamiltonian, spin_orbital_hamiltonian, unit_hamiltonian
from .integrals import compute_integrals
from .qubit import hf_bitstring, qubit_hamiltonian
from .scf import rhf
from .simulator import expectation, hf_state
from .vqe.uccsd import UCCSD

H2 = "2 1\nH 1 0.0 0.0 0.0\nH 1 0.0 0.0 0.74\n"


def _h2_hamiltonian():
    system = parse_geometry(H2)
    _, ints = compute_integrals(system)
    h = ints.hcore(range(2))
    scf = rhf(h, None, ints.eri, ints.S, 2, system.nuclear_repulsion())
    return scf, spin_orbital_hamiltonian(build_hamiltonian(h, ints.eri, scf.C, 2, scf.E_nuc, 0, scf.eps))


def run_selftest(verbose: bool = False) -> bool:
    checks = []

    E = assemble({1: -103.815720, 2: -103.995064, 3: -103.563842},
                 {(2, 1): -228.173251, (3, 1): -227.542281, (3, 2): -218.792929}, 3)
    checks.append(("two-body assembly", abs(E - (-363.133835)) < 5e-7, f"{E:.6f}"))

    scf, ham = _h2_hamiltonian()
    jw = qubit_hamiltonian(ham, reduce=False)
    red = qubit_hamiltonian(ham)
    e_jw = np.linalg.eigvalsh(jw.to_dense())[0]
    e_red = np.linalg.eigvalsh(red.to_dense())[0]
    checks.append(("H2 JW term count", len(jw) == 15, str(len(jw))))
    checks.append(("H2 reduced spectrum", abs(e_jw - e_red) < 1e-10, f"{e_red:.10f}"))
    psi = hf_state(red.n_qubits, hf_bitstring(ham))
    checks.append(("H2 HF expectation", abs(expectation(psi, red) - scf.E_total) < 1e-8, f"{scf.E_total:.10f}"))

    system = bundled_geometry("fh3")
    fmo = run_fmo_hf(system)
    unit = fmo.unit(1)
    mono = spin_orbital_hamiltonian(unit_hamiltonian(unit, system))
    ans = UCCSD(mono, "qubit")
    checks.append(("FH monomer qubits", ans.n_qubits == 8, str(ans.n_qubits)))
    checks.append(("FH monomer HF energy", abs(ans.hf_energy() - unit.scf.E_total) < 1e-8, f"{unit.energy:.6f}"))
    corr = ans.casci() - unit.scf.E_total
    checks.append(("FH monomer CAS-CI", abs(corr - (-0.026945)) < 2e-5, f"{corr:.6f}"))

    ok = True
    for name, passed, detail in checks:
        ok &= passed
        if verbose:
            print(f"{'PASS' if passed else 'FAIL'}  {name:<24} {detail}")
    return ok
