"""Pauli-string algebra: Jordan-Wigner encoding, products, complexity analytics.

Pauli words are stored as (x, z) bit-mask pairs with qubit q at bit q.  The
word acts on a computational basis state |b> as

    W(x, z) |b> = i^{popcount(x & z)} (-1)^{popcount(b & z)} |b ^ x>,

which makes W the literal tensor product of I/X/Y/Z letters (Y = i X Z).
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping

import numpy as np

from .spmodel import DeformedBasis, ModelSpace, Species

PRUNE_TOL = 1e-12

_PHASES = (1.0 + 0j, 1j, -1.0 + 0j, -1j)


def word_from_letters(letters: str) -> tuple[int, int]:
    x = z = 0
    for q, c in enumerate(letters):
        if c in "XY":
            x |= 1 << q
        if c in "ZY":
            z |= 1 << q
        if c not in "IXYZ":
            raise ValueError(f"invalid Pauli letter {c!r}")
    return x, z


def letters_from_word(x: int, z: int, n: int) -> str:
    out = []
    for q in range(n):
        xb, zb = (x >> q) & 1, (z >> q) & 1
        out.append("IXZY"[xb + 2 * zb] if xb + 2 * zb != 3 else "Y")
    return "".join(out)


def word_product(x1: int, z1: int, x2: int, z2: int) -> tuple[complex, int, int]:
    """W1 * W2 = phase * W3; returns (phase, x3, z3)."""
    x3, z3 = x1 ^ x2, z1 ^ z2
    k = ((x1 & z1).bit_count() + (x2 & z2).bit_count() - (x3 & z3).bit_count()) % 4
    phase = _PHASES[k]
    if (z1 & x2).bit_count() & 1:
        phase = -phase
    return phase, x3, z3


def words_commute(x1: int, z1: int, x2: int, z2: int) -> bool:
    return ((z1 & x2).bit_count() + (x1 & z2).bit_count()) % 2 == 0


class PauliSum:
    """Weighted collection of n-qubit Pauli words with canonical term map."""

    __slots__ = ("n_qubits", "terms")

    def __init__(self, n_qubits: int, terms: Mapping[tuple[int, int], complex] | None = None):
        self.n_qubits = int(n_qubits)
        self.terms: dict[tuple[int, int], complex] = {}
        if terms:
            for key, c in terms.items():
                if abs(c) >= PRUNE_TOL:
                    self.terms[key] = complex(c)

    @classmethod
    def zero(cls, n_qubits: int) -> "PauliSum":
        return cls(n_qubits)

    @classmethod
    def from_label(cls, letters: str, coeff: complex = 1.0) -> "PauliSum":
        return cls(len(letters), {word_from_letters(letters): coeff})

    def coefficient(self, letters: str) -> complex:
        return self.terms.get(word_from_letters(letters), 0.0)

    @property
    def num_terms(self) -> int:
        """Number of stored non-identity terms."""
        return sum(1 for key in self.terms if key != (0, 0))

    def identity_coefficient(self) -> complex:
        return self.terms.get((0, 0), 0.0)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit-count mismatch")
        out = dict(self.terms)
        for key, c in other.terms.items():
            acc = out.get(key, 0.0) + c
            if abs(acc) < PRUNE_TOL:
                out.pop(key, None)
            else:
                out[key] = acc
        return PauliSum(self.n_qubits, out)

    def scaled(self, factor: complex) -> "PauliSum":
        return PauliSum(self.n_qubits, {k: c * factor for k, c in self.terms.items()})

    def is_hermitian(self, tol: float = PRUNE_TOL) -> bool:
        return all(abs(c.imag) <= tol for c in self.terms.values())

    def complexities(self) -> Iterable[int]:
        for (x, z) in self.terms:
            if (x, z) != (0, 0):
                yield (x | z).bit_count()

    def matrix(self) -> np.ndarray:
        """Dense 2^n x 2^n matrix; intended for small test spaces only."""
        if self.n_qubits > 14:
            raise ValueError("dense matrix limited to 14 qubits")
        dim = 1 << self.n_qubits
        mat = np.zeros((dim, dim), dtype=complex)
        basis = np.arange(dim)
        for (x, z), c in self.terms.items():
            phase = c * _PHASES[(x & z).bit_count() % 4]
            signs = 1 - 2 * (np.bitwise_count(basis & z).astype(np.int64) & 1)
            mat[basis ^ x, basis] += phase * signs
        return mat

    def to_lines(self) -> str:
        """One term per line: coefficient_re coefficient_im letters."""
        rows = []
        for (x, z) in sorted(self.terms):
            c = self.terms[(x, z)]
            rows.append(f"{c.real:.17g} {c.imag:.17g} {letters_from_word(x, z, self.n_qubits)}")
        return "\n".join(rows) + ("\n" if rows else "")

    def __repr__(self) -> str:
        return f"PauliSum(n_qubits={self.n_qubits}, terms={len(self.terms)})"


def multiply(a: PauliSum, b: PauliSum) -> PauliSum:
    """Exact Pauli-algebra product with term collection and pruning."""
    if a.n_qubits != b.n_qubits:
        raise ValueError("qubit-count mismatch")
    out: dict[tuple[int, int], complex] = {}
    for (x1, z1), c1 in a.terms.items():
        for (x2, z2), c2 in b.terms.items():
            phase, x3, z3 = word_product(x1, z1, x2, z2)
            key = (x3, z3)
            out[key] = out.get(key, 0.0) + phase * c1 * c2
    return PauliSum(a.n_qubits, out)


def angular_momentum_matrix(space: ModelSpace, axis: str, species: Species) -> np.ndarray:
    """One-body J_axis matrix in the spherical basis of one species block.

    J_z is diagonal with entries m; J_x = (J+ + J-)/2 and J_y = (J+ - J-)/(2i)
    with <j, m+1| J+ |j, m> = sqrt(j(j+1) - m(m+1)), block diagonal in j.
    """
    if axis not in ("x", "y", "z"):
        raise ValueError(f"axis must be x, y or z, got {axis!r}")
    block = space.block(species)
    n = len(block)
    mat = np.zeros((n, n), dtype=complex)
    if axis == "z":
        for q, mode in enumerate(block):
            mat[q, q] = mode.m
        return mat
    for q in range(n - 1):
        lo, hi = block[q], block[q + 1]
        if lo.j != hi.j or hi.m != lo.m + 1:
            continue
        c = math.sqrt(lo.j * (lo.j + 1) - lo.m * (lo.m + 1))
        if axis == "x":
            mat[q + 1, q] += c / 2
            mat[q, q + 1] += c / 2
        else:
            mat[q + 1, q] += -0.5j * c
            mat[q, q + 1] += +0.5j * c
    return mat


def encode_one_body(matrix: np.ndarray, space: ModelSpace, species: Species) -> PauliSum:
    """Jordan-Wigner image of a Hermitian one-body matrix on one species block.

    Diagonal entries map to (I - Z_i)/2, real off-diagonals (i < j) to
    (X_i Z .. Z X_j + Y_i Z .. Z Y_j)/2 and imaginary parts to
    -(X_i Z .. Z Y_j - Y_i Z .. Z X_j)/2, with qubit indices shifted by the
    species block offset.
    """
    matrix = np.asarray(matrix)
    n = space.n_modes(species)
    if matrix.shape != (n, n):
        raise ValueError(f"matrix shape {matrix.shape} does not match {n} modes")
    if np.max(np.abs(matrix - matrix.conj().T)) > 1e-10:
        raise ValueError("matrix is not Hermitian")
    off = space.offset(species)
    terms: dict[tuple[int, int], complex] = {}

    def add(x: int, z: int, c: float):
        if abs(c) < PRUNE_TOL:
            return
        terms[(x, z)] = terms.get((x, z), 0.0) + c

    for i in range(n):
        add(0, 0, matrix[i, i].real / 2)
        add(0, 1 << (i + off), -matrix[i, i].real / 2)
    for i in range(n):
        for j in range(i + 1, n):
            zs = 0
            for q in range(i + 1, j):
                zs |= 1 << (q + off)
            bi, bj = 1 << (i + off), 1 << (j + off)
            re, im = matrix[i, j].real, matrix[i, j].imag
            add(bi | bj, zs, re / 2)              # X..X
            add(bi | bj, zs | bi | bj, re / 2)    # Y..Y
            add(bi | bj, zs | bj, -im / 2)        # X..Y
            add(bi | bj, zs | bi, +im / 2)        # Y..X
    return PauliSum(space.n_qubits, terms)


def deformed_matrix(matrix: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Express a spherical-basis one-body matrix in the deformed basis U."""
    return u.T.conj() @ matrix @ u


def build_j_component(space: ModelSpace, axis: str,
                      basis: DeformedBasis | None = None) -> PauliSum:
    """Total J_axis over all species, optionally in a deformed basis."""
    total = PauliSum.zero(space.n_qubits)
    for sp in space.species:
        mat = angular_momentum_matrix(space, axis, sp)
        if basis is not None:
            mat = deformed_matrix(mat, basis.transform[sp])
        total = total + encode_one_body(mat, space, sp)
    return total


def build_j_squared(space: ModelSpace, basis: DeformedBasis | None = None) -> PauliSum:
    """J^2 = J_x^2 + J_y^2 + J_z^2 by squaring the one-body encodings."""
    total = PauliSum.zero(space.n_qubits)
    for axis in ("x", "y", "z"):
        j_axis = build_j_component(space, axis, basis)
        total = total + multiply(j_axis, j_axis)
    return total


def complexity_histogram(op: PauliSum) -> dict[int, int]:
    """Counts of non-identity terms by complexity N_c (identity excluded)."""
    hist: dict[int, int] = {}
    for nc in op.complexities():
        hist[nc] = hist.get(nc, 0) + 1
    return dict(sorted(hist.items()))


def histogram_csv(hist: Mapping[int, int]) -> str:
    """CSV rows complexity,count,percent; percentages over non-identity terms."""
    total = sum(hist.values())
    rows = ["complexity,count,percent"]
    for nc in sorted(hist):
        pct = 100.0 * hist[nc] / total if total else 0.0
        rows.append(f"{nc},{hist[nc]},{pct:.6f}")
    return "\n".join(rows) + "\n"
