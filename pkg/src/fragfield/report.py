"""Run reports: JSON for machines, a fixed-width table for people."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

from .chem import fragment_pairs, parse_unit, unit_label
from .fmo import assemble

METHOD_ORDER = ("hf", "mp2", "casci", "uccsd-trotter", "uccsd-exact")
METHOD_TITLES = {
    "hf": "HF",
    "mp2": "MP2",
    "casci": "CAS-CI",
    "uccsd-trotter": "UCCSD:Trot",
    "uccsd-exact": "UCCSD:Exact",
}


@dataclass
class UnitRecord:
    unit: str
    method: str
    E_hf: float  # electronic HF energy of the embedded unit
    E_corr: float  # correlation energy (0 for hf)
    E_total: float  # E_hf + E_corr
    n_evals: int = 0
    converged: bool = True
    wall_time: float = 0.0


@dataclass
class RunReport:
    geometry_hash: str
    config_hash: str
    n_fragments: int
    nuclear_repulsion: float
    records: list[UnitRecord] = field(default_factory=list)
    partial: bool = False
    errors: list[str] = field(default_factory=list)

    def methods(self) -> list[str]:
        present = {r.method for r in self.records}
        return [m for m in METHOD_ORDER if m in present]

    def value(self, method: str, unit: str) -> float | None:
        for r in self.records:
            if r.method == method and r.unit == unit:
                return r.E_hf if method == "hf" else r.E_corr
        return None

    def sums(self, decimals: int | None = None) -> dict[str, float | None]:
        """Two-body FMO sum per method over the recorded unit values.

        With `decimals`, cells are rounded first, so a printed table's sum row
        is exactly the sum of its printed cells.
        """
        out = {}
        for m in self.methods():
            mono, dim = {}, {}
            for r in self.records:
                if r.method != m:
                    continue
                u = parse_unit(r.unit, self.n_fragments)
                v = r.E_hf if m == "hf" else r.E_corr
                (mono if isinstance(u, int) else dim)[u] = v if decimals is None else round(v, decimals)
            try:
                out[m] = assemble(mono, dim, self.n_fragments)
            except KeyError:
                out[m] = None
        return out

    def payload(self) -> dict:
        recs = [{k: v for k, v in asdict(r).items() if k != "wall_time"} for r in self.records]
        sums = self.sums()
        return {
            "provenance": {"geometry_sha256": self.geometry_hash, "config_sha256": self.config_hash},
            "n_fragments": self.n_fragments,
            "nuclear_repulsion": self.nuclear_repulsion,
            "records": recs,
            "sums": sums,
            "E_FMO_HF_total": None if sums.get("hf") is None else sums["hf"] + self.nuclear_repulsion,
            "partial": self.partial,
            "errors": self.errors,
        }

    def to_json(self) -> str:
        """Deterministic payload plus a separate timing block."""
        doc = {"payload": self.payload(), "timing": {r.method + ":" + r.unit: r.wall_time for r in self.records}}
        return json.dumps(doc, indent=2, sort_keys=True)

    def to_table(self) -> str:
        methods = self.methods()
        units = [unit_label(i) for i in range(1, self.n_fragments + 1)]
        units += [unit_label(p) for p in fragment_pairs(self.n_fragments)]
        width = 14
        head = f"{'Unit':<8}" + "".join(f"{METHOD_TITLES[m]:>{width}}" for m in methods)
        lines = [head, "-" * len(head)]
        for u in units:
            cells = []
            for m in methods:
                v = self.value(m, u)
                cells.append(f"{'':>{width}}" if v is None else f"{v:>{width}.6f}")
            lines.append(f"{u:<8}" + "".join(cells))
        lines.append("-" * len(head))
        sums = self.sums(decimals=6)
        lines.append(f"{'Sum':<8}" + "".join(
            f"{'n/a':>{width}}" if sums[m] is None else f"{sums[m]:>{width}.6f}" for m in methods))
        full = self.sums()
        if "hf" in methods and full["hf"] is not None:
            lines.append(f"HF sum is electronic; with nuclear repulsion E(FMO2-HF) = {full['hf'] + self.nuclear_repulsion:.6f}")
        if self.partial:
            lines.append("PARTIAL REPORT: " + "; ".join(self.errors))
        return "\n".join(lines) + "\n"


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()
