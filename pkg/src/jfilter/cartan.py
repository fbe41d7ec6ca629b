"""KHK decomposition of one-body operators into triangular Givens networks.

The relevant involution splits the one-body algebra into

    m = span{ Z_a, X_a Z .. Z X_b, Y_a Z .. Z Y_b }   (dimension n^2)
    k = span{ X_a Z .. Z Y_b, Y_a Z .. Z X_b }        (dimension n(n-1))
    h = span{ Z_a }                                    (dimension n)

and any H in m with real one-body matrix elements factors as H = K h K+
with K a product of n(n-1)/2 two-qubit rotations
exp[i theta_{i,l} (X_i Y_{i+1} - Y_i X_{i+1})] arranged in a triangle:
layers l = 1..n-1, gates i = l..1 inside each layer, in that application
order.  All cost/gradient/conjugation work happens on coefficient vectors
over the m basis; no 2^n matrices are built outside small dense test paths.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .pauli import PauliSum, word_product, words_commute

RESIDUAL_TOL = 1e-8
_GRAD_TOL = 1e-12
_MAX_ITER = 5000
_MAX_RESTARTS = 8

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59,
           61, 67, 71, 73, 79, 83, 89, 97)


def triangle_order(n: int) -> list[tuple[int, int]]:
    """Gate slots (i, l), 1-indexed, in application order."""
    return [(i, l) for l in range(1, n) for i in range(l, 0, -1)]


def num_angles(n: int) -> int:
    return n * (n - 1) // 2


class CostProbe:
    """Probe element v = sum_i gamma_i Z_i with mutually irrational weights.

    gamma_i = sqrt(p_i) for the i-th prime, scaled to unit Euclidean norm,
    so all pairwise ratios are irrational and the cost stays O(1).
    """

    def __init__(self, n: int):
        if n > len(_PRIMES):
            raise ValueError(f"probe supports up to {len(_PRIMES)} modes")
        g = np.sqrt(np.array(_PRIMES[:n], dtype=float))
        self.n = n
        self.gamma = g / np.linalg.norm(g)

    def vector(self, algebra: "InvolutionAlgebra") -> np.ndarray:
        v = np.zeros(algebra.dim_m)
        v[:self.n] = self.gamma
        return v


class InvolutionAlgebra:
    """Bases of m, k, h for n modes plus the adjoint-rotation pair tables.

    For each gate position p (0-indexed, acting on modes p, p+1) and each
    of the two generator strings P1 = X_p Y_{p+1}, P2 = Y_p X_{p+1}, the
    table lists index pairs (q, r) with i P B_q = s B_r; conjugation by
    exp(i phi P) then rotates each (B_q, B_r) coefficient pair by 2 phi.
    """

    def __init__(self, n: int):
        self.n = n
        basis: list[tuple[int, int]] = [(0, 1 << a) for a in range(n)]
        for which in (0, 1):  # 0: XX, 1: YY
            for a in range(n):
                for b in range(a + 1, n):
                    zs = 0
                    for q in range(a + 1, b):
                        zs |= 1 << q
                    x = (1 << a) | (1 << b)
                    basis.append((x, zs | (x if which else 0)))
        self.m_basis = basis
        self.index = {key: i for i, key in enumerate(basis)}
        self.dim_m = len(basis)            # n^2
        self.dim_h = n
        self.dim_k = n * (n - 1)
        self.k_basis: list[tuple[int, int]] = []
        for which in (0, 1):  # 0: XY, 1: YX
            for a in range(n):
                for b in range(a + 1, n):
                    zs = 0
                    for q in range(a + 1, b):
                        zs |= 1 << q
                    x = (1 << a) | (1 << b)
                    self.k_basis.append((x, zs | (1 << (b if which == 0 else a))))
        self._tables = [self._gate_table(p) for p in range(n - 1)]

    def generator_words(self, p: int) -> tuple[tuple[int, int], tuple[int, int]]:
        x = (1 << p) | (1 << (p + 1))
        return (x, 1 << (p + 1)), (x, 1 << p)   # X_p Y_{p+1},  Y_p X_{p+1}

    def _gate_table(self, p: int):
        out = []
        for (px, pz) in self.generator_words(p):
            qs, rs, ss = [], [], []
            seen = set()
            for qi, (bx, bz) in enumerate(self.m_basis):
                if words_commute(px, pz, bx, bz):
                    continue
                phase, cx, cz = word_product(px, pz, bx, bz)
                phase *= 1j
                ri = self.index[(cx, cz)]
                key = (min(qi, ri), max(qi, ri))
                if key in seen:
                    continue
                seen.add(key)
                qs.append(qi)
                rs.append(ri)
                ss.append(round(phase.real))
            out.append((np.array(qs), np.array(rs), np.array(ss, dtype=float)))
        return out

    def rotate(self, vec: np.ndarray, p: int, which: int, phi: float) -> None:
        """In-place Ad(exp(i phi P)) on an m-coefficient vector."""
        qs, rs, ss = self._tables[p][which]
        c, s2 = np.cos(2 * phi), np.sin(2 * phi)
        vq = vec[qs].copy()
        vr = vec[rs].copy()
        vec[qs] = c * vq - ss * s2 * vr
        vec[rs] = ss * s2 * vq + c * vr

    def conjugate_gate(self, vec: np.ndarray, p: int, theta: float,
                       dagger: bool) -> None:
        """In-place Ad(g) / Ad(g+) for g = exp[i theta (P1 - P2)]."""
        t = -theta if dagger else theta
        self.rotate(vec, p, 0, t)
        self.rotate(vec, p, 1, -t)

    def commutator_inner(self, zvec: np.ndarray, yvec: np.ndarray, p: int) -> float:
        """<zvec, i[yvec, G_p]> with G_p = P1 - P2, in the trace inner product."""
        acc = 0.0
        for which, gen_sign in ((0, 1.0), (1, -1.0)):
            qs, rs, ss = self._tables[p][which]
            acc += gen_sign * 2.0 * float(np.sum(ss * (zvec[qs] * yvec[rs]
                                                       - zvec[rs] * yvec[qs])))
        return acc

    def closure_samples(self, rng: np.random.Generator, trials: int = 200) -> bool:
        """Spot-check [m,m] in k, [k,k] in k, [k,m] in m on random basis pairs."""
        kset = set(self.k_basis)
        mset = set(self.m_basis)
        checks = (
            (self.m_basis, self.m_basis, kset),
            (self.k_basis, self.k_basis, kset),
            (self.k_basis, self.m_basis, mset),
        )
        for left, right, target in checks:
            for _ in range(trials):
                a = left[rng.integers(len(left))]
                b = right[rng.integers(len(right))]
                if words_commute(*a, *b):
                    continue
                _, cx, cz = word_product(*a, *b)
                if (cx, cz) not in target:
                    return False
        return True


@lru_cache(maxsize=32)
def algebra(n: int) -> InvolutionAlgebra:
    return InvolutionAlgebra(n)


@dataclass
class CartanAnsatz:
    """Triangular Givens angles theta_{i,l} plus the diagonal element h.

    ``angles`` is flat in triangle_order(n); ``h`` holds the n Z_i
    coefficients of K+ H K; ``relabeling[q]`` is the canonical-target index
    matched by h[q] (identity when no target was requested).  ``offset``
    shifts the gate qubits when the ansatz is applied to a larger register.
    """

    n: int
    angles: np.ndarray
    h: np.ndarray
    offset: int = 0
    relabeling: np.ndarray = field(default=None)
    residual: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        self.angles = np.asarray(self.angles, dtype=float)
        self.h = np.asarray(self.h, dtype=float)
        if self.angles.shape != (num_angles(self.n),):
            raise ValueError(f"expected {num_angles(self.n)} angles, "
                             f"got {self.angles.shape}")
        if self.relabeling is None:
            self.relabeling = np.arange(self.n)
        self.relabeling = np.asarray(self.relabeling, dtype=int)

    def theta(self, i: int, l: int) -> float:
        """Angle at 1-indexed slot (i, l) with 1 <= i <= l <= n-1."""
        return float(self.angles[triangle_order(self.n).index((i, l))])

    def angle_rows(self) -> list[list[float]]:
        """Row-major triangular layout: row l lists theta_{1,l} .. theta_{l,l}."""
        order = triangle_order(self.n)
        rows: list[list[float]] = [[0.0] * l for l in range(1, self.n)]
        for k, (i, l) in enumerate(order):
            rows[l - 1][i - 1] = float(self.angles[k])
        return rows

    def gates(self, dagger: bool = False) -> list[tuple[int, float]]:
        """(global qubit, angle) pairs in application order."""
        order = triangle_order(self.n)
        seq = [(self.offset + i - 1, float(t)) for (i, l), t in zip(order, self.angles)]
        if dagger:
            seq = [(q, -t) for (q, t) in reversed(seq)]
        return seq

    def mirror_symmetric(self, tol: float = 0.0) -> bool:
        """theta_{i,l} == theta_{i, n-1+i-l} for all slots."""
        order = triangle_order(self.n)
        lut = {slot: float(t) for slot, t in zip(order, self.angles)}
        return all(abs(lut[(i, l)] - lut[(i, self.n - 1 + i - l)]) <= tol
                   for (i, l) in order)


def coeffs_from_matrix(matrix: np.ndarray) -> np.ndarray:
    """m-coefficient vector of a real-symmetric one-body matrix."""
    matrix = np.asarray(matrix)
    if np.iscomplexobj(matrix):
        if np.max(np.abs(matrix.imag)) > 1e-12:
            raise ValueError("matrix has complex elements outside the m algebra")
        matrix = matrix.real
    if np.max(np.abs(matrix - matrix.T)) > 1e-10:
        raise ValueError("matrix is not symmetric")
    n = matrix.shape[0]
    npairs = n * (n - 1) // 2
    vec = np.zeros(n * n)
    vec[:n] = -np.diag(matrix) / 2
    k = 0
    for a in range(n):
        for b in range(a + 1, n):
            vec[n + k] = matrix[a, b] / 2
            vec[n + npairs + k] = matrix[a, b] / 2
            k += 1
    return vec


def matrix_from_coeffs(vec: np.ndarray, n: int) -> np.ndarray:
    """Inverse of coeffs_from_matrix, ignoring any k-space residue."""
    mat = np.zeros((n, n))
    np.fill_diagonal(mat, -2 * vec[:n])
    k = 0
    for a in range(n):
        for b in range(a + 1, n):
            mat[a, b] = mat[b, a] = 2 * vec[n + k]
            k += 1
    return mat


def coeffs_from_pauli(op: PauliSum, n: int) -> np.ndarray:
    """Map a PauliSum supported on the m basis to its coefficient vector.

    Raises if any term (the identity included) falls outside m, or if a
    coefficient has an imaginary part.
    """
    alg = algebra(n)
    vec = np.zeros(alg.dim_m)
    for key, c in op.terms.items():
        if key not in alg.index:
            raise ValueError(f"term outside the m algebra: {key}")
        if abs(c.imag) > 1e-12:
            raise ValueError("m-algebra coefficients must be real")
        vec[alg.index[key]] = c.real
    return vec


def _as_coeffs(h_input, n: int | None = None) -> tuple[np.ndarray, int]:
    if isinstance(h_input, PauliSum):
        if n is None:
            n = h_input.n_qubits
        return coeffs_from_pauli(h_input, n), n
    mat = np.asarray(h_input)
    return coeffs_from_matrix(mat), mat.shape[0]


def conjugated_coeffs(vec: np.ndarray, angles: np.ndarray, n: int,
                      dagger: bool) -> np.ndarray:
    """Ad_K(vec) (or Ad_{K+}) for the triangular network with given angles."""
    alg = algebra(n)
    order = triangle_order(n)
    out = vec.copy()
    if dagger:
        # K+ Q K = g_1+ (... g_N+ Q g_N ...) g_1: process gates last-to-first
        for k in range(len(order) - 1, -1, -1):
            alg.conjugate_gate(out, order[k][0] - 1, angles[k], dagger=True)
    else:
        for k in range(len(order)):
            alg.conjugate_gate(out, order[k][0] - 1, angles[k], dagger=False)
    return out


def cost(theta: np.ndarray, h_input, probe: CostProbe | None = None) -> float:
    """Trace-normalized overlap of the probe with the conjugated operator.

    f(theta) = <v, K+ H K> / 2^n-normalized; at any local extremum in theta
    the conjugated operator K+ H K lies in h, giving H = K h K+.
    """
    vec, n = _as_coeffs(h_input)
    probe = probe or CostProbe(n)
    w = conjugated_coeffs(vec, np.asarray(theta, dtype=float), n, dagger=True)
    return float(probe.vector(algebra(n)) @ w)


def _cost_and_gradient(theta: np.ndarray, vec: np.ndarray, n: int,
                       probe: CostProbe) -> tuple[float, np.ndarray]:
    alg = algebra(n)
    order = triangle_order(n)
    nn = len(order)
    chain = [None] * (nn + 1)
    chain[nn] = vec.copy()
    for k in range(nn - 1, -1, -1):
        w = chain[k + 1].copy()
        alg.conjugate_gate(w, order[k][0] - 1, theta[k], dagger=True)
        chain[k] = w
    v = probe.vector(alg)
    f = float(v @ chain[0])
    grad = np.zeros(nn)
    z = v.copy()
    for k in range(nn):
        p = order[k][0] - 1
        alg.conjugate_gate(z, p, theta[k], dagger=False)
        grad[k] = alg.commutator_inner(z, chain[k + 1], p)
    return f, grad


def gradient(theta: np.ndarray, h_input, probe: CostProbe | None = None) -> np.ndarray:
    """Analytic partials of cost() with respect to every angle."""
    vec, n = _as_coeffs(h_input)
    probe = probe or CostProbe(n)
    return _cost_and_gradient(np.asarray(theta, dtype=float), vec, n, probe)[1]


def _residual_parts(vec: np.ndarray, angles: np.ndarray, n: int):
    w = conjugated_coeffs(vec, angles, n, dagger=True)
    h = w[:n].copy()
    off = float(np.linalg.norm(w[n:]))
    return h, off


def _match_relabeling(h: np.ndarray, target: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """Permutation r with target[r[q]] == h[q]; degenerate targets matched greedily."""
    remaining = list(range(len(target)))
    out = np.zeros(len(h), dtype=int)
    for q, value in enumerate(h):
        best = min(remaining, key=lambda t: abs(target[t] - value))
        if abs(target[best] - value) > tol:
            raise ValueError(f"h value {value} has no match in the target ordering")
        out[q] = best
        remaining.remove(best)
    return out


def decompose(h_input, seed: int = 0, target: Sequence[float] | None = None,
              offset: int = 0, residual_tol: float = RESIDUAL_TOL,
              max_restarts: int = _MAX_RESTARTS) -> CartanAnsatz:
    """Find angles and h with H = K(theta) h K(theta)+ by quasi-Newton descent.

    Args:
        h_input: real-symmetric one-body matrix, or a PauliSum supported
            on the m basis.
        seed: base seed for the uniform (0, pi) initial angles; restarts
            derive sub-seeds from it.
        target: optional canonical h ordering; when given, the returned
            relabeling maps each h entry onto its matching target slot.
        offset: global qubit offset stored in the ansatz.
        residual_tol: acceptance threshold for the relative residual
            ||K h K+ - H|| / ||H|| over m coefficients.

    Raises:
        ValueError: complex matrix elements, or residual failure after all
            restarts (the message reports the best residual reached).
    """
    vec, n = _as_coeffs(h_input)
    norm = float(np.linalg.norm(vec))
    if n == 1 or norm == 0.0:
        h = vec[:n].copy()
        ansatz = CartanAnsatz(n=n, angles=np.zeros(num_angles(n)), h=h,
                              offset=offset, residual=0.0, seed=seed)
        if target is not None:
            ansatz.relabeling = _match_relabeling(h, np.asarray(target, float))
        return ansatz
    probe = CostProbe(n)
    unit = vec / norm
    best: tuple[float, np.ndarray] | None = None
    for attempt in range(max_restarts):
        rng = np.random.default_rng((int(seed), attempt))
        theta0 = rng.uniform(0.0, np.pi, num_angles(n))
        res = minimize(_cost_and_gradient, theta0, args=(unit, n, probe),
                       jac=True, method="BFGS",
                       options={"gtol": _GRAD_TOL, "maxiter": _MAX_ITER})
        h_unit, off = _residual_parts(unit, res.x, n)
        residual = off  # ||unit|| == 1
        if best is None or residual < best[0]:
            best = (residual, res.x)
        if residual <= residual_tol:
            break
    residual, theta = best
    if residual > residual_tol:
        raise ValueError(f"decomposition failed: best residual {residual:.3e} "
                         f"after {max_restarts} restarts")
    h, _ = _residual_parts(vec, theta, n)
    ansatz = CartanAnsatz(n=n, angles=theta, h=h, offset=offset,
                          residual=float(residual), seed=seed)
    if target is not None:
        ansatz.relabeling = _match_relabeling(h, np.asarray(target, float))
    return ansatz


def _mirror_slots(n: int) -> tuple[dict[tuple[int, int], int], int]:
    """Free-parameter slot for each (i, l): mirror partner is (i, n-1+i-l)."""
    slot: dict[tuple[int, int], int] = {}
    nfree = 0
    for (i, l) in triangle_order(n):
        lm = n - 1 + i - l
        key = (i, min(l, lm))
        if key not in slot:
            slot[key] = nfree
            nfree += 1
        slot[(i, l)] = slot[key]
    return slot, nfree


def jx_block_ansatz(j: float, seed: int = 0, offset: int = 0,
                    residual_tol: float = RESIDUAL_TOL) -> CartanAnsatz:
    """Decompose the (2j+1)-mode J_x block with the mirror symmetry enforced.

    The constraint theta_{i,l} = theta_{i, n-1+i-l} is hard, leaving
    ceil(n^2/4) independent parameters.  h comes out as a permutation of
    the canonical J_z weights -m/2; the stored relabeling maps it onto the
    ascending-m canonical ordering.
    """
    if j < 0.5 or abs(2 * j - round(2 * j)) > 1e-9:
        raise ValueError(f"j must be a half-integer >= 1/2, got {j}")
    n = int(round(2 * j + 1))
    m_values = np.array([-j + t for t in range(n)])
    mat = np.zeros((n, n))
    for t in range(n - 1):
        c = np.sqrt(j * (j + 1) - m_values[t] * (m_values[t] + 1))
        mat[t, t + 1] = mat[t + 1, t] = c / 2
    vec = coeffs_from_matrix(mat)
    norm = float(np.linalg.norm(vec))
    unit = vec / norm
    probe = CostProbe(n)
    order = triangle_order(n)
    slot, nfree = _mirror_slots(n)
    slot_of = np.array([slot[(i, l)] for (i, l) in order])

    def fg(x):
        theta = x[slot_of]
        f, g = _cost_and_gradient(theta, unit, n, probe)
        gx = np.zeros(nfree)
        np.add.at(gx, slot_of, g)
        return f, gx

    best = None
    for attempt in range(_MAX_RESTARTS):
        rng = np.random.default_rng((int(seed), attempt))
        x0 = rng.uniform(0.0, np.pi, nfree)
        res = minimize(fg, x0, jac=True, method="BFGS",
                       options={"gtol": _GRAD_TOL, "maxiter": _MAX_ITER})
        theta = res.x[slot_of]
        if n == 2:
            # single gate: fold by the pi/2 gauge period (pure diagonal-sign
            # redundancy for a lone rotation), pinning |theta| = pi/8
            theta = ((theta + np.pi / 4) % (np.pi / 2)) - np.pi / 4
        _, off = _residual_parts(unit, theta, n)
        if best is None or off < best[0]:
            best = (off, theta)
        if off <= residual_tol:
            break
    residual, theta = best
    if residual > residual_tol:
        raise ValueError(f"J_x block decomposition failed for j={j}: "
                         f"best residual {residual:.3e}")
    h, _ = _residual_parts(vec, theta, n)
    ansatz = CartanAnsatz(n=n, angles=theta, h=h, offset=offset,
                          residual=float(residual), seed=seed)
    ansatz.relabeling = _match_relabeling(h, -m_values / 2)
    return ansatz


def network_from_orthogonal(v_target: np.ndarray, offset: int = 0) -> CartanAnsatz:
    """Exact triangular-network angles whose orbital matrix equals v_target.

    The network K satisfies K a+_q K+ = sum_p V[p, q] a+_p with V built from
    2x2 blocks [[cos 2t, sin 2t], [-sin 2t, cos 2t]] in the triangular gate
    order.  Requires det(v_target) = +1; the factorization is deterministic
    (a Givens elimination sweep, no optimization).
    """
    v = np.array(v_target, dtype=float)
    n = v.shape[0]
    if v.shape != (n, n) or np.max(np.abs(v.T @ v - np.eye(n))) > 1e-10:
        raise ValueError("target is not orthogonal")
    if np.linalg.det(v) < 0:
        raise ValueError("target must have determinant +1")
    angles = np.zeros(num_angles(n))
    order = triangle_order(n)
    pos = {slot: k for k, slot in enumerate(order)}
    w = v.copy()
    for l in range(n - 1, 0, -1):       # eliminate column l (0-indexed), top down
        for i in range(1, l + 1):
            p = i - 1
            phi = np.arctan2(w[p, l], w[p + 1, l])
            c, s = np.cos(phi), np.sin(phi)
            top = c * w[p, :] - s * w[p + 1, :]
            bot = s * w[p, :] + c * w[p + 1, :]
            if i == l and bot[l] < 0:
                phi += np.pi
                top, bot = -top, -bot
            w[p, :], w[p + 1, :] = top, bot
            angles[pos[(i, l)]] = phi / 2
    if np.max(np.abs(w - np.eye(n))) > 1e-9:
        raise ValueError("Givens elimination failed to reach the identity")
    return CartanAnsatz(n=n, angles=angles, h=np.zeros(n), offset=offset,
                        residual=0.0, seed=None)


def orbital_matrix(ansatz: CartanAnsatz, dagger: bool = False) -> np.ndarray:
    """n x n orbital rotation of the network (offset ignored)."""
    n = ansatz.n
    v = np.eye(n)
    for (q, t) in ansatz.gates(dagger=dagger):
        p = q - ansatz.offset
        c, s = np.cos(2 * t), np.sin(2 * t)
        block = v[p:p + 2, :].copy()
        v[p, :] = c * block[0] + s * block[1]
        v[p + 1, :] = -s * block[0] + c * block[1]
    return v


def verify(ansatz: CartanAnsatz, h_input, dense: bool = False) -> float:
    """Relative residual ||K h K+ - H|| / ||H|| over m coefficients.

    The default path conjugates h through the network in the coefficient
    representation; dense=True repeats the check with 2^n matrices (small
    spaces only) as an independent oracle.
    """
    vec, n = _as_coeffs(h_input, ansatz.n)
    if n != ansatz.n:
        raise ValueError("dimension mismatch between ansatz and operator")
    hvec = np.zeros_like(vec)
    hvec[:n] = ansatz.h
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        return float(np.linalg.norm(hvec))
    if not dense:
        recon = conjugated_coeffs(hvec, ansatz.angles, n, dagger=False)
        return float(np.linalg.norm(recon - vec)) / norm
    if n > 6:
        raise ValueError("dense verification limited to 6 modes")
    kd = _dense_network(ansatz)
    hsum = PauliSum(n, {(0, 1 << a): ansatz.h[a] for a in range(n)})
    target = PauliSum(n, {key: c for key, c in zip(algebra(n).m_basis, vec)})
    recon = kd @ hsum.matrix() @ kd.conj().T
    diff = recon - target.matrix()
    return float(np.linalg.norm(diff)) / (norm * np.sqrt(2 ** n))


def _dense_network(ansatz: CartanAnsatz) -> np.ndarray:
    from scipy.linalg import expm
    n = ansatz.n
    kd = np.eye(1 << n, dtype=complex)
    alg = algebra(n)
    for (q, t) in ansatz.gates():
        p = q - ansatz.offset
        (x1, z1), (x2, z2) = alg.generator_words(p)
        gen = PauliSum(n, {(x1, z1): 1.0, (x2, z2): -1.0}).matrix()
        kd = expm(1j * t * gen) @ kd
    return kd


def save_ansatz(ansatz: CartanAnsatz, path: str | Path) -> None:
    doc = {
        "n": ansatz.n,
        "offset": ansatz.offset,
        "angles": ansatz.angle_rows(),
        "h": [float(x) for x in ansatz.h],
        "relabeling": [int(x) for x in ansatz.relabeling],
        "residual": ansatz.residual,
        "seed": ansatz.seed,
    }
    Path(path).write_text(json.dumps(doc, indent=1))


def load_ansatz(path: str | Path) -> CartanAnsatz:
    doc = json.loads(Path(path).read_text())
    n = int(doc["n"])
    order = triangle_order(n)
    rows = doc["angles"]
    angles = np.array([rows[l - 1][i - 1] for (i, l) in order])
    return CartanAnsatz(n=n, angles=angles, h=np.array(doc["h"], float),
                        offset=int(doc.get("offset", 0)),
                        relabeling=np.array(doc["relabeling"], int),
                        residual=float(doc["residual"]),
                        seed=doc.get("seed"))
