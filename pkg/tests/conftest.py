import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fragfield.chem import bundled_geometry, parse_geometry  # noqa: E402
from fragfield.fmo import run_fmo_hf  # noqa: E402

H2_XYZ = "2 1\nH 1 0.0 0.0 0.0\nH 1 0.0 0.0 0.7414\n"


@pytest.fixture(scope="session")
def h2():
    return parse_geometry(H2_XYZ)


@pytest.fixture(scope="session")
def fh3():
    return bundled_geometry("fh3")


@pytest.fixture(scope="session")
def fh2_h2o():
    return bundled_geometry("fh2_h2o")


@pytest.fixture(scope="session")
def fmo_fh3(fh3):
    return run_fmo_hf(fh3)


@pytest.fixture(scope="session")
def fmo_fh2_h2o(fh2_h2o):
    return run_fmo_hf(fh2_h2o)


@pytest.fixture(scope="session")
def h2_ham(h2):
    """(SCFResult, SpinOrbitalHamiltonian) of H2/STO-3G at 0.7414 Angstrom."""
    from fragfield.hamiltonian import build_hamiltonian, spin_orbital_hamiltonian
    from fragfield.integrals import compute_integrals
    from fragfield.scf import rhf

    _, ints = compute_integrals(h2)
    h = ints.hcore(range(2))
    scf = rhf(h, None, ints.eri, ints.S, 2, h2.nuclear_repulsion())
    return scf, spin_orbital_hamiltonian(build_hamiltonian(h, ints.eri, scf.C, 2, scf.E_nuc, 0, scf.eps))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
