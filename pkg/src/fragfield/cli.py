"""Command-line interface: ``fragfield fmo|sc|ham|selftest``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .chem import GeometryParseError, bundled_geometry, load_geometry, parse_unit
from .config import ConfigError, RunConfig, load_config
from .fmo import SCCConvergenceError
from .scf import SCFConvergenceError

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2
NUMERICAL_ERRORS = (SCFConvergenceError, SCCConvergenceError, ArithmeticError)

log = logging.getLogger("fragfield")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def resolve_geometry(arg: str):
    """A path on disk, or the name of a bundled geometry (``fh3``, ``data/fh3.xyz``)."""
    p = Path(arg)
    if p.is_file():
        return load_geometry(p), p.read_text()
    name = p.stem
    try:
        system = bundled_geometry(name)
    except FileNotFoundError:
        raise UsageError(f"geometry {arg!r} not found (bundled: fh3, fh2_h2o)") from None
    return system, None


def _config(args) -> RunConfig:
    return load_config(args.config) if args.config else RunConfig()


def cmd_fmo(args) -> int:
    from .workflow import METHODS, run_pipeline

    system, text = resolve_geometry(args.geometry)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = sorted(set(methods) - set(METHODS))
    if unknown or not methods:
        raise UsageError(f"unknown methods {unknown}; choose from {', '.join(METHODS)}")
    report = run_pipeline(system, methods, _config(args), args.jobs, geometry_text=text)
    table = report.to_table()
    print(table, end="")
    if args.json:
        Path(args.json).write_text(report.to_json() + "\n")
    if args.table:
        Path(args.table).write_text(table)
    if report.partial:
        numerical = any("Convergence" in e or "ArithmeticError" in e for e in report.errors)
        return EXIT_NUMERICAL if numerical else EXIT_USAGE
    if any(not r.converged for r in report.records):
        log.warning("some VQE runs stopped before convergence")
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_sc(args) -> int:
    from .vqe.size_consistency import TABLE_ROWS, sc_harness

    cfg = _config(args)
    rows = TABLE_ROWS if args.all else [(args.system, args.basis, args.trotter == "on")]
    print(f"{'System':<14}{'Trotter':>8}{'dE / kcal mol-1':>18}")
    for system, basis, trotter in rows:
        res = sc_harness(args.rhh, args.separation, basis, trotter, system=system,
                         optimizer=cfg.vqe.optimizer, ftol=args.ftol)
        label = "Monomer" if system == "monomer" else f"Dimer ({basis.upper()})"
        print(f"{label:<14}{'Yes' if trotter else 'No':>8}{res.delta_kcal:>18.4f}", flush=True)
    return EXIT_OK


def cmd_ham(args) -> int:
    from .fmo import FMOOptions, run_fmo_hf
    from .hamiltonian import unit_hamiltonian, write_fcidump

    system, _ = resolve_geometry(args.geometry)
    try:
        unit = parse_unit(args.unit, system.n_fragments)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    cfg = _config(args)
    cfg.fmo.jobs = args.jobs
    fmo = run_fmo_hf(system, cfg.fmo)
    sp = unit_hamiltonian(fmo.unit(unit), system)
    write_fcidump(sp, args.fcidump)
    print(f"unit {args.unit}: {sp.norb} orbitals, {sp.n_elec} electrons, {sp.n_frozen} frozen -> {args.fcidump}")
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    return EXIT_OK if run_selftest(verbose=True) else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fragfield", description="FMO correlation energies with HF, MP2, CAS-CI and VQE-UCCSD.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="key = value configuration file")
        sp.add_argument("--jobs", type=int, default=1, help="units processed concurrently")

    f = sub.add_parser("fmo", help="FMO2 energies per unit and their two-body sums")
    f.add_argument("geometry")
    f.add_argument("--methods", default="hf", help="comma list of hf, mp2, casci, uccsd-trotter, uccsd-exact")
    f.add_argument("--json", help="write the JSON report here")
    f.add_argument("--table", help="write the text table here")
    common(f)
    f.set_defaults(func=cmd_fmo)

    s = sub.add_parser("sc", help="UCCSD size-consistency study on square H4 and its stacked dimer")
    s.add_argument("--rhh", type=float, default=1.0583, help="H-H side length / Angstrom")
    s.add_argument("--separation", type=float, default=100.0, help="monomer separation / Angstrom")
    s.add_argument("--system", choices=("monomer", "dimer"), default="dimer")
    s.add_argument("--basis", choices=("lmo", "cmo"), default="lmo")
    s.add_argument("--trotter", choices=("on", "off"), default="off")
    s.add_argument("--ftol", type=float, default=1e-9)
    s.add_argument("--all", action="store_true", help="all six table rows")
    common(s)
    s.set_defaults(func=cmd_sc)

    h = sub.add_parser("ham", help="write the embedded frozen-core Hamiltonian of a unit")
    h.add_argument("geometry")
    h.add_argument("unit", help="monomer '1' or dimer '21'")
    h.add_argument("--fcidump", required=True)
    common(h)
    h.set_defaults(func=cmd_ham)

    t = sub.add_parser("selftest", help="quick internal consistency checks")
    common(t)
    t.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.jobs < 1:
        print("fragfield: error: --jobs must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, ConfigError, GeometryParseError, FileNotFoundError) as exc:
        print(f"fragfield: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERICAL_ERRORS as exc:
        print(f"fragfield: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
