"""Pauli-string algebra and fermion-to-qubit mappings.

A Pauli string on n qubits is stored as two bitmasks (x, z): qubit k carries
X if only bit k of x is set, Z if only bit k of z is set and Y if both are.
The letter string is written with qubit 0 first, so "XZIY" means X on qubit 0
and Y on qubit 3. As an operator, letters(x, z) = i^{|x & z|} X^x Z^z.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

_I_POW = (1, 1j, -1, -1j)


def popcount(v: int) -> int:
    return v.bit_count()


def mul_masks(x1: int, z1: int, x2: int, z2: int) -> tuple[int, int, int]:
    """Product of two letter strings as (x, z, k), meaning i^k * letters(x, z)."""
    x, z = x1 ^ x2, z1 ^ z2
    k = popcount(x1 & z1) + popcount(x2 & z2) + 2 * popcount(z1 & x2) - popcount(x & z)
    return x, z, k % 4


@dataclass(frozen=True, order=True)
class PauliString:
    x: int
    z: int
    n_qubits: int

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        x = z = 0
        for k, ch in enumerate(label.upper()):
            if ch == "X":
                x |= 1 << k
            elif ch == "Z":
                z |= 1 << k
            elif ch == "Y":
                x |= 1 << k
                z |= 1 << k
            elif ch != "I":
                raise ValueError(f"invalid Pauli letter {ch!r}")
        return cls(x, z, len(label))

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(0, 0, n_qubits)

    @property
    def label(self) -> str:
        out = []
        for k in range(self.n_qubits):
            bx, bz = (self.x >> k) & 1, (self.z >> k) & 1
            out.append("IZXY"[bx * 2 + bz])
        return "".join(out)

    @property
    def weight(self) -> int:
        return popcount(self.x | self.z)

    def __str__(self) -> str:
        return self.label


def pauli_mul(a: tuple[PauliString, complex], b: tuple[PauliString, complex]) -> tuple[PauliString, complex]:
    (pa, ca), (pb, cb) = a, b
    if pa.n_qubits != pb.n_qubits:
        raise ValueError(f"qubit count mismatch: {pa.n_qubits} vs {pb.n_qubits}")
    x, z, k = mul_masks(pa.x, pa.z, pb.x, pb.z)
    return PauliString(x, z, pa.n_qubits), ca * cb * _I_POW[k]


class PauliSum:
    """Linear combination of Pauli strings, keyed by (x, z) masks."""

    __slots__ = ("n_qubits", "terms", "_groups")

    def __init__(self, n_qubits: int, terms: dict[tuple[int, int], complex] | None = None):
        self.n_qubits = int(n_qubits)
        self.terms: dict[tuple[int, int], complex] = dict(terms or {})
        self._groups = None

    # construction -----------------------------------------------------------------
    @classmethod
    def from_terms(cls, n_qubits: int, items: Iterable[tuple[PauliString | str, complex]]) -> "PauliSum":
        out = cls(n_qubits)
        for p, c in items:
            if isinstance(p, str):
                p = PauliString.from_label(p)
            if p.n_qubits != n_qubits:
                raise ValueError("qubit count mismatch")
            out.add((p.x, p.z), c)
        return out

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(n_qubits, {(0, 0): complex(coeff)})

    def add(self, key: tuple[int, int], coeff: complex) -> None:
        self.terms[key] = self.terms.get(key, 0.0) + coeff
        self._groups = None

    def copy(self) -> "PauliSum":
        return PauliSum(self.n_qubits, self.terms)

    # algebra ----------------------------------------------------------------------
    def _check(self, other: "PauliSum") -> None:
        if other.n_qubits != self.n_qubits:
            raise ValueError(f"qubit count mismatch: {self.n_qubits} vs {other.n_qubits}")

    def __add__(self, other: "PauliSum") -> "PauliSum":
        self._check(other)
        out = self.copy()
        for k, c in other.terms.items():
            out.add(k, c)
        return out

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-1.0) * other

    def __neg__(self) -> "PauliSum":
        return (-1.0) * self

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            self._check(other)
            out: dict[tuple[int, int], complex] = {}
            for (x1, z1), c1 in self.terms.items():
                for (x2, z2), c2 in other.terms.items():
                    x, z, k = mul_masks(x1, z1, x2, z2)
                    out[(x, z)] = out.get((x, z), 0.0) + c1 * c2 * _I_POW[k]
            return PauliSum(self.n_qubits, out)
        return PauliSum(self.n_qubits, {k: c * other for k, c in self.terms.items()})

    def __rmul__(self, scalar):
        return PauliSum(self.n_qubits, {k: scalar * c for k, c in self.terms.items()})

    def adjoint(self) -> "PauliSum":
        return PauliSum(self.n_qubits, {k: np.conj(c) for k, c in self.terms.items()})

    def simplify(self, tol: float = 1e-14) -> "PauliSum":
        """Drop terms with |c| <= tol and store the rest in canonical order."""
        keep = {k: complex(self.terms[k]) for k in sorted(self.terms) if abs(self.terms[k]) > tol}
        return PauliSum(self.n_qubits, keep)

    def commutator(self, other: "PauliSum") -> "PauliSum":
        return (self * other - other * self).simplify()

    # inspection -------------------------------------------------------------------
    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        for (x, z) in sorted(self.terms):
            yield PauliString(x, z, self.n_qubits), self.terms[(x, z)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        a, b = self.simplify(), other.simplify()
        return a.n_qubits == b.n_qubits and a.terms == b.terms

    def isclose(self, other: "PauliSum", tol: float = 1e-12) -> bool:
        diff = (self - other).simplify(tol)
        return len(diff) == 0

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= tol for c in map(complex, self.terms.values()))

    def is_antihermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.real) <= tol for c in map(complex, self.terms.values()))

    def norm_bound(self) -> float:
        """Sum of |c|, an upper bound on the operator 2-norm."""
        return float(sum(abs(c) for c in self.terms.values()))

    def constant(self) -> complex:
        return complex(self.terms.get((0, 0), 0.0))

    def __repr__(self) -> str:
        return f"PauliSum(n_qubits={self.n_qubits}, n_terms={len(self.terms)})"

    # serialization ----------------------------------------------------------------
    def to_text(self) -> str:
        lines = []
        for p, c in self.simplify(0.0):
            lines.append(f"{c.real!r} {c.imag!r} {p.label}")
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str, n_qubits: int | None = None) -> "PauliSum":
        out = None
        for lineno, line in enumerate(text.splitlines(), start=1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) != 3:
                raise ValueError(f"line {lineno}: expected 'coeff_re coeff_im letters'")
            p = PauliString.from_label(fields[2])
            if out is None:
                out = cls(p.n_qubits if n_qubits is None else n_qubits)
            if p.n_qubits != out.n_qubits:
                raise ValueError(f"line {lineno}: inconsistent qubit count")
            out.add((p.x, p.z), complex(float(fields[0]), float(fields[1])))
        if out is None:
            if n_qubits is None:
                raise ValueError("empty PauliSum text needs an explicit qubit count")
            out = cls(n_qubits)
        return out

    # action on states -------------------------------------------------------------
    def _grouped(self):
        """Terms grouped by x mask: [(x, z_array, phased_coeff_array)]."""
        if self._groups is None:
            groups: dict[int, list] = {}
            for (x, z), c in sorted(self.terms.items()):
                groups.setdefault(x, []).append((z, c * _I_POW[popcount(x & z) % 4]))
            self._groups = [
                (x, np.array([z for z, _ in zs], dtype=np.int64), np.array([c for _, c in zs], dtype=complex))
                for x, zs in groups.items()
            ]
        return self._groups

    def diagonal_factors(self, basis: np.ndarray):
        """For each x group, the per-basis-state factor sum_z c i^{|x&z|} (-1)^{|z&b|}."""
        for x, zs, cs in self._grouped():
            d = np.zeros(len(basis), dtype=complex)
            for z, c in zip(zs, cs):
                d += c * _parity_sign(basis, int(z))
            yield x, d

    def matvec(self, psi: np.ndarray) -> np.ndarray:
        n = self.n_qubits
        if psi.shape != (1 << n,):
            raise ValueError(f"state has {psi.shape[0]} amplitudes, expected {1 << n}")
        idx = _basis_indices(n)
        out = np.zeros_like(psi, dtype=complex)
        for x, d in self.diagonal_factors(idx):
            v = d * psi
            out += v[idx ^ x] if x else v
        return out

    def to_dense(self) -> np.ndarray:
        n = self.n_qubits
        idx = _basis_indices(n)
        M = np.zeros((1 << n, 1 << n), dtype=complex)
        for x, d in self.diagonal_factors(idx):
            M[idx ^ x, idx] += d
        return M


_BASIS_CACHE: dict[int, np.ndarray] = {}


def _basis_indices(n: int) -> np.ndarray:
    if n not in _BASIS_CACHE:
        _BASIS_CACHE[n] = np.arange(1 << n, dtype=np.int64)
    return _BASIS_CACHE[n]


def _parity_sign(basis: np.ndarray, z: int) -> np.ndarray:
    if z == 0:
        return np.ones(len(basis))
    return 1.0 - 2.0 * (np.bitwise_count(basis & z) & 1)


def apply_pauli_string(p: PauliString, psi: np.ndarray) -> np.ndarray:
    """Return P|psi> without modifying psi."""
    idx = _basis_indices(p.n_qubits)
    phase = _I_POW[popcount(p.x & p.z) % 4]
    v = psi * _parity_sign(idx, p.z) if p.z else psi.copy()
    if p.x:
        v = v[idx ^ p.x]
    # v[b ^ x] moved to position b: P|b> = phase (-1)^{z.b} |b ^ x>
    return phase * v


# --- fermion operators --------------------------------------------------------------


class FermionOperator:
    """Sum of products of ladder operators; a term is a tuple of (index, is_creation)."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[tuple[tuple[int, int], ...], complex] | None = None):
        self.terms = dict(terms or {})

    @classmethod
    def constant(cls, c: complex) -> "FermionOperator":
        return cls({(): c}) if c != 0 else cls()

    @classmethod
    def term(cls, ops: Iterable[tuple[int, int]], coeff: complex = 1.0) -> "FermionOperator":
        return cls({tuple((int(p), int(d)) for p, d in ops): coeff})

    @classmethod
    def excitation(cls, create: Iterable[int], annihilate: Iterable[int], coeff: complex = 1.0) -> "FermionOperator":
        """a+_c1 a+_c2 ... a_a1 a_a2 ... in the given order."""
        return cls.term([(p, 1) for p in create] + [(q, 0) for q in annihilate], coeff)

    def add_term(self, ops, coeff: complex) -> None:
        key = tuple(ops)
        self.terms[key] = self.terms.get(key, 0.0) + coeff

    def __add__(self, other: "FermionOperator") -> "FermionOperator":
        out = FermionOperator(self.terms)
        for k, c in other.terms.items():
            out.add_term(k, c)
        return out

    def __sub__(self, other: "FermionOperator") -> "FermionOperator":
        return self + (-1.0) * other

    def __mul__(self, other):
        if isinstance(other, FermionOperator):
            out = FermionOperator()
            for k1, c1 in self.terms.items():
                for k2, c2 in other.terms.items():
                    out.add_term(k1 + k2, c1 * c2)
            return out
        return FermionOperator({k: c * other for k, c in self.terms.items()})

    def __rmul__(self, scalar):
        return FermionOperator({k: scalar * c for k, c in self.terms.items()})

    def adjoint(self) -> "FermionOperator":
        return FermionOperator(
            {tuple((p, 1 - d) for p, d in reversed(k)): np.conj(c) for k, c in self.terms.items()}
        )

    def max_index(self) -> int:
        return max((p for k in self.terms for p, _ in k), default=-1)

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        return f"FermionOperator(n_terms={len(self.terms)})"


def _ladder_image(p: int, creation: int) -> tuple[tuple[int, int, complex], ...]:
    # a+_p = (X_p - i Y_p)/2 Z_{<p};  a_p = (X_p + i Y_p)/2 Z_{<p}
    low = (1 << p) - 1
    xbit = 1 << p
    sign = -1 if creation else 1
    # letters X_p Z_<p and Y_p Z_<p, coefficients with respect to letter strings
    return ((xbit, low, 0.5), (xbit, low | xbit, 0.5j * sign))


def jordan_wigner(op: FermionOperator, n_so: int) -> PauliSum:
    if op.max_index() >= n_so:
        raise ValueError(f"ladder index {op.max_index()} outside {n_so} spin orbitals")
    out: dict[tuple[int, int], complex] = {}
    cache: dict[tuple[int, int], tuple] = {}
    for key, coeff in op.terms.items():
        cur = [(0, 0, complex(coeff))]
        for p, d in key:
            img = cache.get((p, d))
            if img is None:
                img = cache[(p, d)] = _ladder_image(p, d)
            nxt = []
            for x1, z1, c1 in cur:
                for x2, z2, c2 in img:
                    x, z, k = mul_masks(x1, z1, x2, z2)
                    nxt.append((x, z, c1 * c2 * _I_POW[k]))
            cur = nxt
        for x, z, c in cur:
            out[(x, z)] = out.get((x, z), 0.0) + c
    return PauliSum(n_so, out).simplify()


# --- parity mapping and two-qubit reduction ------------------------------------------


def permute_bits(mask: int, perm: list[int]) -> int:
    """Move bit k of `mask` to position perm[k]."""
    out = 0
    k = 0
    while mask:
        if mask & 1:
            out |= 1 << perm[k]
        mask >>= 1
        k += 1
    return out


def interleaved_to_block(n_so: int) -> list[int]:
    """Qubit permutation taking (a0 b0 a1 b1 ...) to (a0 a1 ... b0 b1 ...)."""
    m = n_so // 2
    return [k // 2 if k % 2 == 0 else m + k // 2 for k in range(n_so)]


def prefix_xor(v: int, n: int) -> int:
    """Bit j of the result is the XOR of bits 0..j of v."""
    shift = 1
    while shift < n:
        v ^= v << shift
        shift <<= 1
    return v & ((1 << n) - 1)


def jw_to_parity(op: PauliSum) -> PauliSum:
    """Conjugate by the occupation-to-parity basis change |n> -> |p>, p_j = n_0 ^ ... ^ n_j."""
    n = op.n_qubits
    out: dict[tuple[int, int], complex] = {}
    for (x, z), c in op.terms.items():
        x2 = prefix_xor(x, n)
        z2 = z ^ (z >> 1)
        k = (popcount(x & z) - popcount(x2 & z2)) % 4
        out[(x2, z2)] = out.get((x2, z2), 0.0) + c * _I_POW[k]
    return PauliSum(n, out)


def permute_qubits(op: PauliSum, perm: list[int]) -> PauliSum:
    out: dict[tuple[int, int], complex] = {}
    for (x, z), c in op.terms.items():
        key = (permute_bits(x, perm), permute_bits(z, perm))
        out[key] = out.get(key, 0.0) + c
    return PauliSum(op.n_qubits, out)


def _remove_bits(v: int, positions: list[int]) -> int:
    for pos in sorted(positions, reverse=True):
        low = v & ((1 << pos) - 1)
        v = ((v >> (pos + 1)) << pos) | low
    return v


def tapered_qubits(n_so: int) -> tuple[int, int]:
    """Parity qubits holding the alpha-number and total-number parities."""
    return n_so // 2 - 1, n_so - 1


def reduce_two_qubits(
    op: PauliSum, n_so: int, n_alpha: int, n_beta: int, form: str = "jw", tol: float = 1e-12
) -> PauliSum:
    """Drop the two parity qubits fixed by (n_alpha, n_beta).

    `op` acts on n_so qubits in interleaved Jordan-Wigner form (``form="jw"``)
    or already in block-ordered parity form (``form="parity"``).
    """
    if op.n_qubits != n_so or n_so % 2:
        raise ValueError("reduction needs an even number of spin orbitals matching the operator")
    if form == "jw":
        op = jw_to_parity(permute_qubits(op, interleaved_to_block(n_so)))
    elif form != "parity":
        raise ValueError(f"unknown operator form {form!r}")
    qa, qn = tapered_qubits(n_so)
    sign_a = -1.0 if n_alpha % 2 else 1.0
    sign_n = -1.0 if (n_alpha + n_beta) % 2 else 1.0
    out: dict[tuple[int, int], complex] = {}
    for (x, z), c in op.terms.items():
        if abs(c) <= tol:
            continue
        if (x >> qa) & 1 or (x >> qn) & 1:
            raise ValueError("operator does not conserve the number parities; cannot taper")
        if (z >> qa) & 1:
            c = c * sign_a
        if (z >> qn) & 1:
            c = c * sign_n
        key = (_remove_bits(x, [qa, qn]), _remove_bits(z, [qa, qn]))
        out[key] = out.get(key, 0.0) + c
    return PauliSum(n_so - 2, out).simplify()


def occupation_mask(occupied: Iterable[int]) -> int:
    m = 0
    for p in occupied:
        m |= 1 << p
    return m


def reduced_basis_index(occ_mask: int, n_so: int) -> int:
    """Index in the reduced register of the JW (interleaved) occupation bitmask."""
    block = permute_bits(occ_mask, interleaved_to_block(n_so))
    return _remove_bits(prefix_xor(block, n_so), list(tapered_qubits(n_so)))


def reduced_basis_indices(occ_masks: np.ndarray, n_so: int) -> np.ndarray:
    return np.array([reduced_basis_index(int(m), n_so) for m in occ_masks], dtype=np.int64)


def bitstring(index: int, n_qubits: int) -> str:
    """Qubit-0-first bit string of a basis index."""
    return "".join(str((index >> k) & 1) for k in range(n_qubits))


def qubit_hamiltonian(ham, reduce: bool = True) -> PauliSum:
    """Qubit image of a SpinOrbitalHamiltonian; E_const sits in the identity term."""
    jw = jordan_wigner(ham.fermion_operator(), ham.n_so)
    if not reduce:
        return jw
    return reduce_two_qubits(jw, ham.n_so, ham.n_alpha, ham.n_beta)


def hf_bitstring(ham, reduce: bool = True) -> str:
    occ = occupation_mask(ham.hf_occupation())
    if not reduce:
        return bitstring(occ, ham.n_so)
    return bitstring(reduced_basis_index(occ, ham.n_so), ham.n_so - 2)
