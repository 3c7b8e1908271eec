"""Dense statevector engine.

States are complex128 numpy arrays of length 2^n in natural binary order with
qubit 0 as the least significant bit.
"""

from __future__ import annotations

import logging
import math
import struct
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.linalg

from .qubit import PauliString, PauliSum, apply_pauli_string

log = logging.getLogger(__name__)


class NotHermitianError(ValueError):
    pass


def n_qubits_of(state: np.ndarray) -> int:
    n = int(state.shape[0]).bit_length() - 1
    if state.ndim != 1 or 1 << n != state.shape[0]:
        raise ValueError("state length must be a power of two")
    return n


def basis_state(n_qubits: int, index: int) -> np.ndarray:
    psi = np.zeros(1 << n_qubits, dtype=complex)
    psi[index] = 1.0
    return psi


def hf_state(n_qubits: int, bits: str) -> np.ndarray:
    """Basis state from a qubit-0-first bit string ("10" sets qubit 0)."""
    if len(bits) != n_qubits:
        raise ValueError(f"bit string of length {len(bits)} for {n_qubits} qubits")
    if set(bits) - {"0", "1"}:
        raise ValueError(f"not a bit string: {bits!r}")
    return basis_state(n_qubits, int(bits[::-1], 2) if bits else 0)


def apply_pauli_rotation(state: np.ndarray, P: PauliString, theta: float) -> np.ndarray:
    """In place: state <- exp(i theta P) state."""
    if P.n_qubits != n_qubits_of(state):
        raise ValueError("Pauli string and state differ in qubit count")
    Ppsi = apply_pauli_string(P, state)
    state *= math.cos(theta)
    state += (1j * math.sin(theta)) * Ppsi
    return state


def expectation(state: np.ndarray, H: PauliSum, herm_tol: float = 1e-12) -> float:
    if not H.is_hermitian(herm_tol):
        raise NotHermitianError("expectation value requested for a non-Hermitian operator")
    val = np.sum(np.conj(state) * H.matvec(state))
    if abs(val.imag) > 1e-10:
        raise ArithmeticError(f"imaginary residue {val.imag:.3e} in a Hermitian expectation value")
    return float(val.real)


def taylor_terms(norm: float, tol: float, steps: int, max_terms: int = 200) -> int:
    """Smallest K with a^{K+1}/(K+1)! e^a <= tol/steps, a = norm/steps."""
    a = norm / steps
    bound = math.exp(a)
    for k in range(max_terms + 1):
        bound *= a / (k + 1)
        if bound <= tol / steps:
            return k
    raise ArithmeticError(f"Taylor series did not reach tolerance within {max_terms} terms")


def expm_multiply(matvec: Callable[[np.ndarray], np.ndarray], v: np.ndarray, norm: float,
                  tol: float = 1e-12, max_terms: int = 200) -> np.ndarray:
    """exp(A) v by a scaled, truncated Taylor series; `norm` bounds ||A||."""
    steps = max(1, math.ceil(norm))
    K = taylor_terms(norm, tol, steps, max_terms) if norm > 0 else 0
    out = v.copy()
    for _ in range(steps):
        term = out
        acc = out.copy()
        for k in range(1, K + 1):
            term = matvec(term) / (k * steps)
            acc += term
        out = acc
    return out


def krylov_expm(matvec: Callable[[np.ndarray], np.ndarray], v: np.ndarray, tol: float = 1e-12,
                max_dim: int = 40) -> np.ndarray:
    """exp(A) v by Arnoldi projection with full reorthogonalization.

    Converged when the residual estimate ||v|| h_{m+1,m} |e_m^T exp(H_m) e_1|
    drops below `tol`. If the subspace fills up first, the step is halved.
    """
    beta = float(np.linalg.norm(v))
    if beta == 0.0:
        return v.copy()
    V = np.zeros((max_dim + 1, len(v)), dtype=v.dtype)
    Hm = np.zeros((max_dim + 1, max_dim), dtype=v.dtype)
    V[0] = v / beta
    for j in range(max_dim):
        w = matvec(V[j])
        for _ in range(2):
            c = np.conj(V[: j + 1]) @ w
            w = w - c @ V[: j + 1]
            Hm[: j + 1, j] += c
        h = float(np.linalg.norm(w))
        Hm[j + 1, j] = h
        y = scipy.linalg.expm(Hm[: j + 1, : j + 1])[:, 0]
        if h <= 1e-14 or beta * h * abs(y[-1]) <= tol:
            return beta * (y @ V[: j + 1])
        V[j + 1] = w / h
    half = krylov_expm(lambda u: 0.5 * matvec(u), v, tol / 2, max_dim)
    return krylov_expm(lambda u: 0.5 * matvec(u), half, tol / 2, max_dim)


def apply_exp_antihermitian(state: np.ndarray, A: PauliSum, tol: float = 1e-12) -> np.ndarray:
    """In place: state <- exp(A) state for anti-Hermitian A (imaginary Pauli coefficients)."""
    if not A.is_antihermitian(1e-12):
        raise NotHermitianError("generator is not anti-Hermitian")
    if len(A) == 0:
        return state
    state[:] = expm_multiply(A.matvec, state, A.norm_bound(), tol)
    return state


def lanczos_ground(
    H,
    initial: np.ndarray,
    tol: float = 1e-10,
    krylov_dim: int = 60,
    max_restarts: int = 200,
    seed: int = 12345,
) -> tuple[float, np.ndarray]:
    """Lowest eigenpair reachable from `initial`, by restarted Lanczos.

    `H` is a PauliSum, a matrix-like object with ``@``, or a matvec callable.
    Every Krylov vector is reorthogonalized against all previous ones. A run
    restarts from its Ritz vector until the Ritz value moves by at most `tol`.
    On breakdown with a non-converged residual, a deterministic perturbation
    restricted to the support of the initial vector keeps the symmetry sector.
    """
    matvec = _as_matvec(H)
    v0 = np.asarray(initial).astype(complex)
    nrm = np.linalg.norm(v0)
    if nrm == 0:
        raise ValueError("initial vector is zero")
    v0 = v0 / nrm
    support = np.abs(v0) > 0
    rng = np.random.default_rng(seed)
    E_prev = None
    x = v0
    for restart in range(max_restarts):
        theta, x, resid, exhausted = _lanczos_cycle(matvec, x, krylov_dim)
        log.debug("Lanczos restart %d: E = %.14f, residual %.2e", restart, theta, resid)
        if exhausted and resid > 1e-8:
            pert = np.where(support, rng.standard_normal(len(x)), 0.0)
            x = x + 1e-3 * pert / np.linalg.norm(pert)
            x /= np.linalg.norm(x)
            E_prev = None
            continue
        if (E_prev is not None and abs(theta - E_prev) <= tol) or resid <= 1e-9:
            return float(theta), x
        E_prev = theta
    raise ArithmeticError(f"Lanczos did not converge in {max_restarts} restarts")


def _as_matvec(H):
    if isinstance(H, PauliSum):
        if not H.is_hermitian():
            raise NotHermitianError("Lanczos needs a Hermitian operator")
        return H.matvec
    if callable(H):
        return H
    return lambda v: H @ v


def _lanczos_cycle(matvec, v0, m):
    n = len(v0)
    m = min(m, n)
    V = np.zeros((m, n), dtype=complex)
    alpha = np.zeros(m)
    beta = np.zeros(m)
    V[0] = v0
    k_used = m
    exhausted = False
    for j in range(m):
        w = matvec(V[j])
        alpha[j] = np.real(np.vdot(V[j], w))
        # full reorthogonalization, done twice for stability
        for _ in range(2):
            w -= V[: j + 1].T @ (V[: j + 1].conj() @ w)
        b = np.linalg.norm(w)
        if j + 1 == m:
            break
        if b < 1e-12:
            k_used = j + 1
            exhausted = True
            break
        beta[j] = b
        V[j + 1] = w / b
    T = np.diag(alpha[:k_used]) + np.diag(beta[: k_used - 1], 1) + np.diag(beta[: k_used - 1], -1)
    evals, evecs = np.linalg.eigh(T)
    y = evecs[:, 0]
    x = y @ V[:k_used]
    x /= np.linalg.norm(x)
    resid = np.linalg.norm(matvec(x) - evals[0] * x)
    return evals[0], x, resid, exhausted


def dump_state(state: np.ndarray, path) -> None:
    """Binary dump: uint64 qubit count, then little-endian complex128 amplitudes."""
    n = n_qubits_of(state)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", n))
        fh.write(np.ascontiguousarray(state, dtype="<c16").tobytes())


def load_state(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < 8:
        raise ValueError("state file too short")
    (n,) = struct.unpack("<Q", raw[:8])
    data = np.frombuffer(raw[8:], dtype="<c16")
    if data.shape[0] != 1 << n:
        raise ValueError(f"state file holds {data.shape[0]} amplitudes, header says {n} qubits")
    return data.astype(complex)
