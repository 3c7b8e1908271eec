"""FMO pipeline: SCC, dimers, per-unit correlation methods, report assembly."""

from __future__ import annotations

import logging
import time
import warnings
from concurrent.futures import ThreadPoolExecutor

from .chem import FragmentedSystem
from .config import RunConfig
from .fmo import EmbeddedUnit, FMOResult, run_fmo_hf
from .hamiltonian import spin_orbital_hamiltonian, unit_hamiltonian
from .report import METHOD_ORDER, RunReport, UnitRecord, sha256_text
from .vqe.mp2 import mp2
from .vqe.optimize import vqe_minimize
from .vqe.uccsd import UCCSD

log = logging.getLogger(__name__)

METHODS = METHOD_ORDER


class UnitError(RuntimeError):
    def __init__(self, unit: str, exc: Exception):
        super().__init__(f"unit {unit}: {type(exc).__name__}: {exc}")
        self.unit = unit
        self.cause = exc


def correlate_unit(unit: EmbeddedUnit, system: FragmentedSystem, methods, cfg: RunConfig) -> list[UnitRecord]:
    """Run the requested correlation methods on one embedded unit."""
    E_hf = unit.energy
    records = []
    if "hf" in methods:
        records.append(UnitRecord(unit.label, "hf", E_hf, 0.0, E_hf, 0, True, 0.0))
    corr = [m for m in methods if m != "hf"]
    if not corr:
        return records
    sp = unit_hamiltonian(unit, system)
    ham = spin_orbital_hamiltonian(sp)
    E_scf = unit.scf.E_total

    def add(method, E_corr, t0, n_evals=0, converged=True):
        records.append(UnitRecord(unit.label, method, E_hf, E_corr, E_hf + E_corr, n_evals, converged,
                                  time.perf_counter() - t0))

    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        E_mp2, amps = mp2(ham, sp.eps, zero_below=cfg.uccsd.degenerate_zero)
    if "mp2" in corr:
        add("mp2", E_mp2, t0)
    ansatz = None
    if {"casci", "uccsd-trotter", "uccsd-exact"} & set(corr):
        ansatz = UCCSD(ham, cfg.uccsd.backend)
    if "casci" in corr:
        t0 = time.perf_counter()
        add("casci", ansatz.casci() - E_scf, t0)
    for method in ("uccsd-trotter", "uccsd-exact"):
        if method not in corr:
            continue
        t0 = time.perf_counter()
        x0 = ansatz.vector(amps) if cfg.uccsd.guess == "mp2" else ansatz.vector(amps) * 0.0
        if method == "uccsd-trotter":
            plan = ansatz.plan(x0)
            res = vqe_minimize(lambda x: ansatz.energy_trotter(x, plan), x0, cfg.vqe)
        else:
            res = vqe_minimize(ansatz.energy_exact, x0, cfg.vqe)
        add(method, res.energy - E_scf, t0, res.n_evals, res.converged)
    return records


def run_pipeline(system: FragmentedSystem, methods, cfg: RunConfig | None = None, jobs: int = 1,
                 geometry_text: str | None = None, fmo: FMOResult | None = None) -> RunReport:
    cfg = cfg or RunConfig()
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise ValueError(f"unknown methods {sorted(unknown)}; choose from {METHODS}")
    methods = [m for m in METHODS if m in methods]
    cfg.fmo.jobs = jobs
    if fmo is None:
        fmo = run_fmo_hf(system, cfg.fmo)
    report = RunReport(
        geometry_hash=sha256_text(geometry_text if geometry_text is not None else system.to_xyz()),
        config_hash=cfg.digest(),
        n_fragments=system.n_fragments,
        nuclear_repulsion=fmo.nuclear_repulsion,
    )

    def work(unit):
        try:
            return correlate_unit(unit, system, methods, cfg)
        except Exception as exc:  # surfaced below with the unit id attached
            return UnitError(unit.label, exc)

    units = fmo.units()
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, units))
    else:
        results = [work(u) for u in units]
    for unit, res in zip(units, results):
        if isinstance(res, UnitError):
            report.partial = True
            report.errors.append(str(res))
            log.error("%s", res)
        else:
            report.records.extend(res)
    # deterministic record order: method, then unit order of the FMO result
    order = {u.label: k for k, u in enumerate(units)}
    report.records.sort(key=lambda r: (METHODS.index(r.method), order[r.unit]))
    return report
