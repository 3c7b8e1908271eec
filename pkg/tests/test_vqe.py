import warnings

import numpy as np
import pytest

import oracles
from fragfield.hamiltonian import ao_to_mo, spin_orbital_hamiltonian, to_spin_orbitals, unit_hamiltonian
from fragfield.vqe.mp2 import DegenerateDenominatorError, mp2
from fragfield.vqe.optimize import OptimizeOptions, neldermead_minimize, powell_minimize, vqe_minimize
from fragfield.vqe.uccsd import UCCSD, ClusterAmplitudes, build_generators, magnitude_order


@pytest.fixture(scope="module")
def fh_monomer(fmo_fh3, fh3):
    return spin_orbital_hamiltonian(unit_hamiltonian(fmo_fh3.unit(1), fh3))


# --- MP2 ---------------------------------------------------------------------------


def test_mp2_spin_orbital_vs_spatial(h2_ham, fmo_fh3, fh3):
    scf, ham = h2_ham
    E, amps = mp2(ham, ham.spatial.eps)
    assert abs(E - oracles.spatial_mp2(ham.spatial.h2, ham.spatial.eps, 1)) < 1e-12
    assert set(amps.doubles) == {(0, 1, 2, 3)}
    sp = unit_hamiltonian(fmo_fh3.unit(1), fh3)
    E2, _ = mp2(spin_orbital_hamiltonian(sp), sp.eps)
    assert abs(E2 - oracles.spatial_mp2(sp.h2, sp.eps, 4)) < 1e-12


def test_mp2_degenerate_denominator():
    rng = np.random.default_rng(8)
    h = np.diag([-1.0, -1.0, 0.5, 0.5])
    g = 0.1 * rng.standard_normal((4,) * 4)
    for perm in [(1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)]:
        g = g + g.transpose(perm)
    so = to_spin_orbitals(h, g, 0.0, 4)
    with pytest.raises(DegenerateDenominatorError):
        mp2(so, [-1.0, -1.0, -1.0, 0.5])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        _, amps = mp2(so, [-1.0, -1.0, -1.0, 0.5], zero_below=1e-6)
    assert caught and all(v == 0.0 for k, v in amps.doubles.items() if k[2] < 6 and k[3] < 6)


# --- generators and ordering ---------------------------------------------------------


def _enumerate(n_so, n_elec):
    """Brute force: every (occ, vir) subset pair of size 1 or 2 conserving S_z."""
    import itertools

    out = set()
    for k in (1, 2):
        for occ in itertools.combinations(range(n_elec), k):
            for vir in itertools.combinations(range(n_elec, n_so), k):
                if sum(p % 2 for p in occ) == sum(p % 2 for p in vir):
                    out.add(occ + vir)
    return out


def test_generator_counts(fh_monomer):
    gens = build_generators(4, 2)
    assert len(gens) == 3
    assert {g.key for g in gens} == _enumerate(4, 2)
    assert [g.id for g in gens] == list(range(3))
    assert build_generators(4, 4) == []
    fh = build_generators(fh_monomer.n_so, fh_monomer.n_elec)
    assert len(fh) == 24 and {g.key for g in fh} == _enumerate(10, 8)
    assert len(build_generators(16, 8)) == 360


def test_magnitude_order():
    gens = build_generators(4, 2)[:2]
    plan = magnitude_order(gens, ClusterAmplitudes(singles={(0, 2): 0.1, (1, 3): -0.3}))
    assert plan.order == (1, 0)
    assert magnitude_order(gens, np.zeros(2)).order == (0, 1)
    assert magnitude_order(list(reversed(gens)), np.array([0.1, -0.3])).order == (1, 0)


# --- ansatz evaluation ---------------------------------------------------------------


def test_zero_amplitudes_give_hf(fh_monomer, fmo_fh3):
    for backend in ("qubit", "sector"):
        ans = UCCSD(fh_monomer, backend)
        x = np.zeros(ans.n_params)
        E_hf = fmo_fh3.unit(1).scf.E_total
        assert abs(ans.energy_exact(x) - E_hf) < 1e-10
        assert abs(ans.energy_trotter(x, ans.plan(x)) - E_hf) < 1e-10


def test_backends_agree(fh_monomer):
    q, s = UCCSD(fh_monomer, "qubit"), UCCSD(fh_monomer, "sector")
    rng = np.random.default_rng(0)
    x = 0.2 * rng.standard_normal(q.n_params)
    plan = q.plan(x)
    assert abs(q.energy_trotter(x, plan) - s.energy_trotter(x, plan)) < 1e-11
    assert abs(q.energy_exact(x) - s.energy_exact(x)) < 1e-11
    assert abs(q.casci() - s.casci()) < 1e-10


def test_single_generator_trotter_is_exact(fh_monomer):
    ans = UCCSD(fh_monomer, "qubit", exact_tol=1e-15)
    for gid in (0, 7, 20):
        x = np.zeros(ans.n_params)
        x[gid] = 0.4
        plan = ans.plan(x)
        assert np.abs(ans.state_trotter(x, plan) - ans.state_exact(x)).max() < 1e-12
        assert abs(ans.energy_trotter(x, plan) - ans.energy_exact(x)) < 1e-12


def test_exact_state_vs_dense_expm(h2_ham):
    _, ham = h2_ham
    ans = UCCSD(ham, "qubit")
    H, psi0, images = ans.qubit
    x = np.array([0.1, -0.2, 0.3])
    A = sum((t * img.to_dense() for t, img in zip(x, images)), np.zeros((4, 4), complex))
    ref = oracles.expm_dense(A) @ psi0
    assert np.abs(ans.state_exact(x) - ref).max() < 1e-12


def test_h2_vqe_reaches_casci(h2_ham):
    _, ham = h2_ham
    ans = UCCSD(ham, "qubit")
    E_cas = ans.casci()
    _, amps = mp2(ham, ham.spatial.eps)
    x0 = ans.vector(amps)
    res = vqe_minimize(ans.energy_exact, x0, OptimizeOptions("powell", ftol=1e-12))
    assert abs(res.energy - E_cas) < 1e-7
    plan = ans.plan(x0)
    rt = vqe_minimize(lambda x: ans.energy_trotter(x, plan), x0, OptimizeOptions("powell", ftol=1e-12))
    assert abs(rt.energy - E_cas) < 1e-8


def test_variational_bound_random(fh_monomer):
    ans = UCCSD(fh_monomer, "sector")
    E_cas = ans.casci()
    rng = np.random.default_rng(42)
    for _ in range(20):
        x = rng.uniform(-1, 1, ans.n_params)
        plan = ans.plan(rng.standard_normal(ans.n_params))
        assert ans.energy_exact(x) >= E_cas - 1e-10
        assert ans.energy_trotter(x, plan) >= E_cas - 1e-10


def _flip_signs(gens, x, flipped):
    s = np.ones(len(x))
    for g in gens:
        for p in g.key:
            if p // 2 in flipped:
                s[g.id] *= -1
    return s * x


def test_mo_sign_flip(fmo_fh2_h2o, fh2_h2o):
    """Both evaluators are covariant under MO sign flips; at fixed amplitudes the energy moves."""
    unit = fmo_fh2_h2o.unit(2)
    ham = spin_orbital_hamiltonian(unit_hamiltonian(unit, fh2_h2o))
    C = unit.scf.C.copy()
    C[:, 2] *= -1  # second active orbital (one frozen core)
    ham_f = spin_orbital_hamiltonian(unit_hamiltonian(unit, fh2_h2o, C=C))
    a, b = UCCSD(ham, "sector"), UCCSD(ham_f, "sector")
    _, amps = mp2(ham, ham.spatial.eps)
    x = a.vector(amps) + 0.05
    plan = a.plan(a.vector(amps))
    xf = _flip_signs(a.generators, x, {1})
    assert abs(a.energy_exact(x) - b.energy_exact(xf)) < 1e-10
    assert abs(a.energy_trotter(x, plan) - b.energy_trotter(xf, plan)) < 1e-10
    assert abs(a.energy_trotter(x, plan) - b.energy_trotter(x, plan)) > 1e-7


# --- optimizers ----------------------------------------------------------------------


@pytest.mark.parametrize("minimize", [powell_minimize, neldermead_minimize])
def test_quadratic(minimize):
    c = np.array([0.3, -1.2, 0.7])
    opts = OptimizeOptions(ftol=1e-14, xtol=1e-9)
    res = minimize(lambda x: float(np.sum((x - c) ** 2)), np.zeros(3), opts)
    assert np.abs(res.x - c).max() < 1e-6 and res.n_evals < 500 and res.converged


def test_rosenbrock():
    f = lambda x: (1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2  # noqa: E731
    res = powell_minimize(f, np.array([-1.2, 1.0]), OptimizeOptions(ftol=1e-16, xtol=1e-10))
    assert np.abs(res.x - 1.0).max() < 1e-5
    res = neldermead_minimize(f, np.array([-1.2, 1.0]), OptimizeOptions("neldermead", ftol=1e-16, xtol=1e-10))
    assert np.abs(res.x - 1.0).max() < 1e-5


def test_parabola_and_permutation():
    res = powell_minimize(lambda x: (x[0] - 0.25) ** 2 + 1.0, np.zeros(1), OptimizeOptions(ftol=1e-14))
    assert abs(res.x[0] - 0.25) < 1e-6 and abs(res.energy - 1.0) < 1e-12
    w = np.array([1.0, 3.0, 0.5])
    c = np.array([0.2, -0.1, 0.4])
    f1 = lambda x: float(np.sum(w * (x - c) ** 2))  # noqa: E731
    p = [2, 0, 1]
    f2 = lambda x: float(np.sum(w[p] * (x - c[p]) ** 2))  # noqa: E731
    r1 = powell_minimize(f1, np.zeros(3), OptimizeOptions(ftol=1e-14))
    r2 = powell_minimize(f2, np.zeros(3), OptimizeOptions(ftol=1e-14))
    assert abs(r1.energy - r2.energy) < 1e-12


def test_budget_and_determinism():
    f = lambda x: float(np.sum(np.cos(3 * x) + x ** 2))  # noqa: E731
    res = powell_minimize(f, np.ones(4), OptimizeOptions(max_evals=25))
    assert not res.converged and res.n_evals == 25
    assert res.energy == min(res.history)
    a = neldermead_minimize(f, np.ones(4), OptimizeOptions("neldermead"))
    b = neldermead_minimize(f, np.ones(4), OptimizeOptions("neldermead"))
    assert a.energy == b.energy and a.n_evals == b.n_evals
    with pytest.raises(ValueError):
        OptimizeOptions("cobyla")
