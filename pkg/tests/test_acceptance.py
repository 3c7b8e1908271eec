"""Acceptance suite: one test and one printed PASS/FAIL line per criterion.

Reference values are the reference unit energies of the (FH)3 and
(FH)2-H2O clusters and the 4H/8H size-consistency deviations.
"""

import subprocess
import sys
import time
import warnings
from pathlib import Path

import numpy as np
import pytest

from fragfield.chem import bundled_geometry
from fragfield.fmo import assemble, run_fmo_hf
from fragfield.hamiltonian import spin_orbital_hamiltonian, unit_hamiltonian
from fragfield.vqe.mp2 import mp2
from fragfield.vqe.optimize import OptimizeOptions, vqe_minimize
from fragfield.vqe.size_consistency import TABLE_ROWS, sc_harness
from fragfield.vqe.uccsd import UCCSD

RESULTS: dict[int, tuple[bool, str]] = {}

MONOMERS = (1, 2, 3)
DIMERS = ((2, 1), (3, 1), (3, 2))
UNITS = MONOMERS + DIMERS

HF_REF = {
    "fh3": dict(zip(UNITS, (-103.815720, -103.995064, -103.563842, -228.173251, -227.542281, -218.792929))),
    "fh2_h2o": dict(zip(UNITS, (-84.426515, -103.695254, -103.695254, -207.357701, -207.357701, -220.935631))),
}
HF_SUM = {"fh3": -363.133835, "fh2_h2o": -343.834010}
MP2_REF = {
    "fh3": dict(zip(UNITS, (-0.017933, -0.017526, -0.017933, -0.035493, -0.035980, -0.035446))),
    "fh2_h2o": dict(zip(UNITS, (-0.035370, -0.017810, -0.017810, -0.053486, -0.053486, -0.035790))),
}
MP2_SUM = {"fh3": -0.053527, "fh2_h2o": -0.071770}
CAS_REF = {
    "fh3": dict(zip(UNITS, (-0.026945, -0.026216, -0.026929, -0.051963, -0.052879, -0.053124))),
    "fh2_h2o": dict(zip(UNITS, (-0.049445, -0.026705, -0.026705, -0.075600, -0.075600, -0.053549))),
}
EXACT_UCCSD_H2O_CLUSTER_FH = -0.026687
SC_REF = {
    ("monomer", "lmo", False): (0.8118, 0.02),
    ("dimer", "lmo", False): (1.6236, 0.02),
    ("dimer", "cmo", False): (1.6234, 0.02),
    ("monomer", "lmo", True): (0.8102, 0.03),
    ("dimer", "lmo", True): (1.6207, 0.03),
    ("dimer", "cmo", True): (5.0319, 0.15),
}
DIMER_VQE_BUDGET = 12_000
QUBITS_REF = {("fh3", 1): 8, ("fh3", (2, 1)): 18, ("fh2_h2o", 1): 10, ("fh2_h2o", (2, 1)): 20}


def record(n: int, ok: bool, detail: str):
    RESULTS[n] = (ok, detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


class Cluster:
    """FMO-HF result plus lazily built correlated-unit data for one bundled system."""

    def __init__(self, name: str):
        self.name = name
        self.system = bundled_geometry(name)
        t0 = time.perf_counter()
        self.fmo = run_fmo_hf(self.system)
        self.fmo_time = time.perf_counter() - t0
        self._ham = {}
        self._ansatz = {}
        self._vqe = {}

    def hamiltonian(self, unit):
        if unit not in self._ham:
            sp = unit_hamiltonian(self.fmo.unit(unit), self.system)
            self._ham[unit] = (sp, spin_orbital_hamiltonian(sp))
        return self._ham[unit]

    def ansatz(self, unit) -> UCCSD:
        if unit not in self._ansatz:
            self._ansatz[unit] = UCCSD(self.hamiltonian(unit)[1], "sector")
        return self._ansatz[unit]

    def e_scf(self, unit) -> float:
        return self.fmo.unit(unit).scf.E_total

    def casci(self, unit) -> float:
        return self.ansatz(unit).casci() - self.e_scf(unit)

    def mp2_amplitudes(self, unit):
        sp, ham = self.hamiltonian(unit)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return mp2(ham, sp.eps, zero_below=1e-6)

    def vqe(self, unit, trotter: bool):
        key = (unit, trotter)
        if key not in self._vqe:
            ans = self.ansatz(unit)
            x0 = ans.vector(self.mp2_amplitudes(unit)[1])
            # dimers run on a fixed budget of the same order as the reference Powell counts
            budget = 200_000 if unit in MONOMERS else DIMER_VQE_BUDGET
            opts = OptimizeOptions("powell", ftol=1e-8, max_evals=budget)
            if trotter:
                plan = ans.plan(x0)
                res = vqe_minimize(lambda x: ans.energy_trotter(x, plan), x0, opts)
            else:
                res = vqe_minimize(ans.energy_exact, x0, opts)
            self._vqe[key] = res.energy - self.e_scf(unit)
        return self._vqe[key]


@pytest.fixture(scope="module")
def clusters():
    return {name: Cluster(name) for name in ("fh3", "fh2_h2o")}


def test_criterion_01_assembly():
    out = []
    t0 = time.perf_counter()
    for name in HF_REF:
        mono = {u: v for u, v in HF_REF[name].items() if u in MONOMERS}
        dim = {u: v for u, v in HF_REF[name].items() if u in DIMERS}
        out.append((name, round(assemble(mono, dim, 3), 6)))
    elapsed = (time.perf_counter() - t0) / 2
    ok = all(v == HF_SUM[n] for n, v in out) and elapsed < 1e-3
    record(1, ok, f"sums {out}, {elapsed * 1e3:.3f} ms per assembly")


def test_criterion_02_fmo_hf(clusters):
    worst, detail = 0.0, []
    for name, c in clusters.items():
        for u in UNITS:
            worst = max(worst, abs(c.fmo.unit(u).energy - HF_REF[name][u]))
    c = clusters["fh2_h2o"]
    eq_mono = abs(c.fmo.unit(2).energy - c.fmo.unit(3).energy)
    eq_dim = abs(c.fmo.unit((2, 1)).energy - c.fmo.unit((3, 1)).energy)
    total = sum(c.fmo_time for c in clusters.values())
    detail = f"max unit error {worst:.2e} (tol 2e-5), C2v |E2-E3| {eq_mono:.1e}, |E21-E31| {eq_dim:.1e}, {total:.1f} s"
    record(2, worst <= 2e-5 and eq_mono <= 1e-8 and eq_dim <= 1e-8 and total < 60, detail)


def test_criterion_03_fmo_mp2(clusters):
    worst_cell, worst_sum = 0.0, 0.0
    t0 = time.perf_counter()
    sums = {}
    for name, c in clusters.items():
        vals = {u: c.mp2_amplitudes(u)[0] for u in UNITS}
        sums[name] = assemble({u: vals[u] for u in MONOMERS}, {u: vals[u] for u in DIMERS}, 3)
        worst_cell = max(worst_cell, max(abs(vals[u] - MP2_REF[name][u]) for u in UNITS))
        worst_sum = max(worst_sum, abs(sums[name] - MP2_SUM[name]))
    elapsed = time.perf_counter() - t0
    detail = f"max cell error {worst_cell:.2e} (tol 2e-5), max sum error {worst_sum:.2e} (tol 5e-5), {elapsed:.2f} s"
    record(3, worst_cell <= 2e-5 and worst_sum <= 5e-5 and elapsed < 1.0, detail)


@pytest.mark.slow
def test_criterion_04_casci(clusters):
    t0 = time.perf_counter()
    mono = max(abs(c.casci(u) - CAS_REF[n][u]) for n, c in clusters.items() for u in MONOMERS)
    t_mono = time.perf_counter() - t0
    dim = max(abs(c.casci(u) - CAS_REF[n][u]) for n, c in clusters.items() for u in DIMERS)
    t_all = time.perf_counter() - t0
    nq = max(c.ansatz(u).n_qubits for c in clusters.values() for u in DIMERS)
    detail = (f"monomers max error {mono:.2e} in {t_mono:.1f} s, dimers ({nq} qubits) max error {dim:.2e} "
              f"in {t_all - t_mono:.1f} s (tol 2e-5)")
    record(4, mono <= 2e-5 and dim <= 2e-5 and t_mono < 60 and t_all < 3600, detail)


@pytest.mark.slow
def test_criterion_05_exact_uccsd_invariance(clusters):
    c = clusters["fh2_h2o"]
    e2, e3 = c.vqe(2, trotter=False), c.vqe(3, trotter=False)
    err = max(abs(e2 - EXACT_UCCSD_H2O_CLUSTER_FH), abs(e3 - EXACT_UCCSD_H2O_CLUSTER_FH))
    detail = f"E2 {e2:.6f}, E3 {e3:.6f}, error {err:.1e} (tol 2e-5), |E2-E3| {abs(e2 - e3):.1e} (tol 1e-9)"
    record(5, err <= 2e-5 and abs(e2 - e3) <= 1e-9, detail)


@pytest.mark.slow
def test_criterion_06_size_consistency():
    t0 = time.perf_counter()
    dE = {row: sc_harness(basis=row[1], trotter=row[2], system=row[0]).delta_kcal for row in TABLE_ROWS}
    elapsed = time.perf_counter() - t0
    parts, ok = [], True
    for row, (ref, tol) in SC_REF.items():
        good = abs(dE[row] - ref) <= tol
        ok &= good
        parts.append(f"{row[0]}/{row[1]}/{'T' if row[2] else 'X'} {dE[row]:.4f} vs {ref}{'' if good else ' !'}")
    for trotter in (False, True):
        mono = dE[("monomer", "lmo", trotter)]
        for basis in ("lmo", "cmo"):
            d = dE[("dimer", basis, trotter)]
            if basis == "cmo" and trotter:
                good = d >= 4.5
            else:
                good = abs(d - 2 * mono) <= 0.01
            ok &= good
            if not good:
                parts.append(f"size-consistency claim broken for {basis} trotter={trotter}")
    record(6, ok and elapsed < 1800, "; ".join(parts) + f"; {elapsed / 60:.1f} min")


def test_criterion_07_qubit_counts(clusters):
    got = {k: clusters[k[0]].ansatz(k[1]).n_qubits for k in QUBITS_REF}
    record(7, got == QUBITS_REF, ", ".join(f"{n} {u}: {q}" for (n, u), q in got.items()))


@pytest.mark.slow
def test_criterion_08_variational_bound(clusters):
    rng = np.random.default_rng(8)
    worst, count = np.inf, 0
    for c in clusters.values():
        for u in MONOMERS:
            ans = c.ansatz(u)
            E_cas = ans.casci()
            x_mp2 = ans.vector(c.mp2_amplitudes(u)[1])
            for k in range(100):
                if k % 5 == 4:
                    # close to the correlated minimum, where the bound is tight
                    x = x_mp2 * rng.uniform(1.0, 1.6) + rng.normal(0, 2e-3, ans.n_params)
                else:
                    x = rng.uniform(-1, 1, ans.n_params) * (0.02, 0.2, 1.0, 3.0)[k % 5]
                plan = ans.plan(rng.standard_normal(ans.n_params))
                for E in (ans.energy_exact(x), ans.energy_trotter(x, plan)):
                    worst = min(worst, E - E_cas)
                    count += 1
    record(8, worst >= -1e-10, f"{count} energies over 6 monomers, min(E - E_CAS) = {worst:.2e}")


@pytest.mark.slow
def test_criterion_09_vqe_bounds(clusters):
    mono = {(n, u): c.vqe(u, trotter=True) - c.casci(u) for n, c in clusters.items() for u in MONOMERS}
    dim = {(n, u): c.vqe(u, trotter=True) - c.casci(u) for n, c in clusters.items() for u in DIMERS}
    c = clusters["fh2_h2o"]
    split = abs(c.vqe(2, trotter=True) - c.vqe(3, trotter=True))
    ok_mono = all(-1e-10 <= d <= 1e-4 for d in mono.values())
    ok_dim = all(-1e-10 <= d <= 3e-3 for d in dim.values())
    worst_mono = max(mono, key=mono.get)
    detail = (f"monomers above CAS-CI: max {mono[worst_mono]:.3e} at {worst_mono} (bound 1e-4); "
              f"dimers max {max(dim.values()):.3e} (bound 3e-3, {DIMER_VQE_BUDGET} evaluations); "
              f"Trotterized |E2-E3| = {split:.1e} (required > 1e-6)")
    record(9, ok_mono and ok_dim and split > 1e-6, detail)


ORACLE_MODULES = ["test_integrals.py", "test_scf.py", "test_fmo.py", "test_hamiltonian.py",
                  "test_qubit.py", "test_simulator.py", "test_vqe.py"]


@pytest.mark.slow
def test_criterion_10_oracles():
    here = Path(__file__).parent
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                           *[str(here / m) for m in ORACLE_MODULES]],
                          capture_output=True, text=True, cwd=here.parent)
    last = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    record(10, proc.returncode == 0, f"oracle modules: {last}")
