"""Spin-orbital MP2 energies and first-order doubles amplitudes."""

from __future__ import annotations

import warnings

import numpy as np

from .uccsd import ClusterAmplitudes


class DegenerateDenominatorError(ArithmeticError):
    pass


def spin_orbital_energies(eps) -> np.ndarray:
    return np.repeat(np.asarray(eps, dtype=float), 2)


def mp2(ham, eps, occ=None, virt=None, degenerate_tol: float = 1e-10, zero_below: float | None = None):
    """MP2 correlation energy and amplitudes t_ij^ab = <ij||ab> / (e_i + e_j - e_a - e_b).

    `eps` are the spatial orbital energies of the active space. Quadruples with
    |denominator| < `degenerate_tol` raise; with `zero_below` set, quadruples
    below that threshold get a zero amplitude (and a warning) instead.
    """
    e = spin_orbital_energies(eps)
    if len(e) != ham.n_so:
        raise ValueError(f"{len(e)} spin-orbital energies for {ham.n_so} spin orbitals")
    occ = list(range(ham.n_elec)) if occ is None else list(occ)
    virt = [p for p in range(ham.n_so) if p not in occ] if virt is None else list(virt)
    g = ham.g
    amps = ClusterAmplitudes()
    E = 0.0
    skipped = []
    for ii, i in enumerate(occ):
        for j in occ[ii + 1:]:
            for aa, a in enumerate(virt):
                for b in virt[aa + 1:]:
                    v = g[i, j, a, b] - g[i, j, b, a]
                    if v == 0.0:
                        continue
                    delta = e[i] + e[j] - e[a] - e[b]
                    if zero_below is not None and abs(delta) < zero_below:
                        skipped.append((i, j, a, b))
                        amps.doubles[(i, j, a, b)] = 0.0
                        continue
                    if abs(delta) < degenerate_tol:
                        raise DegenerateDenominatorError(f"vanishing MP2 denominator for (i,j,a,b) = {(i, j, a, b)}")
                    amps.doubles[(i, j, a, b)] = v / delta
                    E += v * v / delta
    if skipped:
        warnings.warn(f"{len(skipped)} degenerate MP2 amplitudes set to zero: {skipped[:4]}", stacklevel=2)
    return float(E), amps


def mp2_closed_shell(h2_mo: np.ndarray, eps, n_occ: int) -> float:
    """Spatial-orbital closed-shell MP2, sum_ijab (ia|jb)[2(ia|jb) - (ib|ja)] / D."""
    eps = np.asarray(eps)
    o, v = slice(0, n_occ), slice(n_occ, len(eps))
    iajb = h2_mo[o, v, o, v]
    D = eps[o, None, None, None] - eps[None, v, None, None] + eps[None, None, o, None] - eps[None, None, None, v]
    return float(np.sum(iajb * (2 * iajb - iajb.transpose(0, 3, 2, 1)) / D))
