"""Many-fermion state simulation: Givens networks, filters, observables.

Two interchangeable backends hold the amplitudes:

* ``full``   - one complex amplitude per computational basis state (2^n),
  with qubit q stored at bit q of the basis index.
* ``sector`` - amplitudes restricted to fixed per-species particle numbers,
  shaped (proton sector, neutron sector) with basis masks in ascending
  integer order per species.

All public operations return new states and preserve the norm except the
explicit post-selection branch inside filter_measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .cartan import CartanAnsatz
from .pauli import PauliSum, _PHASES
from .spmodel import ModelSpace, Species

LEAK_TOL = 1e-12
ZERO_PROB = 1e-14


class ZeroProbabilityError(RuntimeError):
    """All amplitude removed by a filter: schedule and trial are inconsistent."""


def _popcount(arr: np.ndarray) -> np.ndarray:
    return np.bitwise_count(arr.astype(np.uint64)).astype(np.int64)


@lru_cache(maxsize=64)
def _sector_masks(n_modes: int, n_particles: int) -> np.ndarray:
    masks = []
    for occ in combinations(range(n_modes), n_particles):
        m = 0
        for q in occ:
            m |= 1 << q
        masks.append(m)
    masks.sort()
    return np.array(masks, dtype=np.int64)


@lru_cache(maxsize=64)
def _rank_table(n_modes: int, n_particles: int) -> np.ndarray:
    table = -np.ones(1 << n_modes, dtype=np.int64)
    table[_sector_masks(n_modes, n_particles)] = np.arange(
        math.comb(n_modes, n_particles))
    return table


@lru_cache(maxsize=512)
def _hop_arrays(n_modes: int, n_particles: int, a: int, b: int):
    """a+_a a_b on the sector basis: (src_ranks, dst_ranks, signs)."""
    masks = _sector_masks(n_modes, n_particles)
    if a == b:
        src = np.nonzero((masks >> a) & 1)[0]
        return src, src, np.ones(len(src))
    table = _rank_table(n_modes, n_particles)
    sel = (((masks >> b) & 1) == 1) & (((masks >> a) & 1) == 0)
    src = np.nonzero(sel)[0]
    m0 = masks[src]
    par = _popcount(m0 & ((1 << b) - 1))
    m1 = m0 ^ (1 << b)
    par += _popcount(m1 & ((1 << a) - 1))
    dst = table[m1 | (1 << a)]
    signs = np.where(par % 2 == 0, 1.0, -1.0)
    return src, dst, signs


@lru_cache(maxsize=256)
def _givens_rows(n_modes: int, n_particles: int, p: int):
    """Row indices of |01> and |10> patterns on local modes (p, p+1)."""
    masks = _sector_masks(n_modes, n_particles)
    table = _rank_table(n_modes, n_particles)
    bits = (1 << p) | (1 << (p + 1))
    sel = ((masks & (1 << p)) == 0) & ((masks & (1 << (p + 1))) != 0)
    i01 = np.nonzero(sel)[0]
    i10 = table[masks[i01] ^ bits]
    return i01, i10


@dataclass
class OneBody:
    """One-body operator given by per-species matrices in the current basis."""

    matrices: dict[Species, np.ndarray]

    def __post_init__(self):
        self.matrices = {Species.coerce(s): np.asarray(m)
                         for s, m in self.matrices.items()}

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        return all(np.max(np.abs(m - m.conj().T)) <= tol
                   for m in self.matrices.values())


@dataclass
class DiagonalObservable:
    """Occupation-diagonal observable: eigenvalue = sum of occupied weights."""

    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)


class QuantumState:
    """Amplitude vector over fermionic occupation states.

    ``amps`` is 1-D of length 2^n for the full backend, or shaped
    (dim_proton, dim_neutron) for the sector backend with ``particles``
    giving the per-species particle numbers.
    """

    def __init__(self, space: ModelSpace, backend: str, amps: np.ndarray,
                 particles: dict[Species, int] | None = None):
        if backend not in ("full", "sector"):
            raise ValueError(f"unknown backend {backend!r}")
        self.space = space
        self.backend = backend
        self.amps = np.asarray(amps, dtype=complex)
        self.particles = dict(particles) if particles else None
        if backend == "sector" and self.particles is None:
            raise ValueError("sector backend requires particle numbers")

    def copy(self) -> "QuantumState":
        return QuantumState(self.space, self.backend, self.amps.copy(),
                            self.particles)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def sector_masks(self, species: Species) -> np.ndarray:
        sp = Species.coerce(species)
        return _sector_masks(self.space.n_modes(sp), self.particles[sp])

    def _species_axis(self, species: Species) -> int:
        return list(self.space.species).index(Species.coerce(species))

    def __repr__(self) -> str:
        return (f"QuantumState(backend={self.backend!r}, "
                f"dim={self.amps.size}, norm={self.norm:.6f})")


def prepare_slater(space: ModelSpace, occupations, backend: str = "sector"
                   ) -> QuantumState:
    """Computational-basis product state with the given global modes occupied."""
    occ = [int(q) for q in occupations]
    if len(set(occ)) != len(occ):
        raise ValueError("duplicate occupation index")
    if any(q < 0 or q >= space.n_qubits for q in occ):
        raise ValueError("occupation index out of range")
    if backend == "full":
        amps = np.zeros(1 << space.n_qubits, dtype=complex)
        index = 0
        for q in occ:
            index |= 1 << q
        amps[index] = 1.0
        return QuantumState(space, "full", amps)
    particles = {}
    dims = []
    index = []
    for sp in space.species:
        off, n = space.offset(sp), space.n_modes(sp)
        local = [q - off for q in occ if off <= q < off + n]
        particles[sp] = len(local)
        mask = 0
        for q in local:
            mask |= 1 << q
        dims.append(math.comb(n, len(local)))
        index.append(int(_rank_table(n, len(local))[mask]))
    while len(dims) < 2:  # keep sector amplitudes 2-D for single-species spaces
        dims.append(1)
        index.append(0)
    amps = np.zeros(tuple(dims), dtype=complex)
    amps[tuple(index)] = 1.0
    return QuantumState(space, "sector", amps, particles)


def slater_from_basis(space: ModelSpace, occupations_by_species,
                      backend: str = "sector") -> QuantumState:
    """Slater determinant from per-species local occupation indices."""
    occ = []
    for sp, local in occupations_by_species.items():
        off = space.offset(Species.coerce(sp))
        occ.extend(off + int(q) for q in local)
    return prepare_slater(space, occ, backend=backend)


def _check_adjacent_pair(space: ModelSpace, i: int) -> Species:
    if i < 0 or i + 1 >= space.n_qubits:
        raise ValueError(f"qubit pair ({i}, {i + 1}) out of range")
    sp = space.species_of(i)
    if space.species_of(i + 1) != sp:
        raise ValueError(f"qubit pair ({i}, {i + 1}) straddles species blocks")
    return sp


def _givens_inplace(state: QuantumState, i: int, theta: float) -> None:
    sp = _check_adjacent_pair(state.space, i)
    c, s = math.cos(2 * theta), math.sin(2 * theta)
    if state.backend == "full":
        basis = np.arange(state.amps.size)
        bits = (1 << i) | (1 << (i + 1))
        sel01 = np.nonzero((basis & bits) == (1 << (i + 1)))[0]
        sel10 = sel01 ^ bits
        a01 = state.amps[sel01].copy()
        a10 = state.amps[sel10].copy()
        state.amps[sel01] = c * a01 - s * a10
        state.amps[sel10] = s * a01 + c * a10
        return
    p = i - state.space.offset(sp)
    i01, i10 = _givens_rows(state.space.n_modes(sp), state.particles[sp], p)
    axis = state._species_axis(sp)
    view = state.amps if axis == 0 else state.amps.T
    a01 = view[i01, :].copy()
    a10 = view[i10, :].copy()
    view[i01, :] = c * a01 - s * a10
    view[i10, :] = s * a01 + c * a10


def apply_givens(state: QuantumState, i: int, theta: float) -> QuantumState:
    """exp[i theta (X_i Y_{i+1} - Y_i X_{i+1})] on adjacent same-species modes.

    Acts on the (i, i+1) occupation pair as |01> -> cos(2 theta)|01> +
    sin(2 theta)|10> and |10> -> -sin(2 theta)|01> + cos(2 theta)|10>,
    leaving |00> and |11> untouched; particle-number conserving.
    """
    out = state.copy()
    _givens_inplace(out, i, theta)
    return out


def apply_cartan(state: QuantumState, ansatz: CartanAnsatz,
                 dagger: bool = False) -> QuantumState:
    """Apply the triangular Givens network (layers l = 1..n-1, gates i = l..1)."""
    first = ansatz.offset
    _check_adjacent_pair(state.space, first)
    if ansatz.n > 1:
        sp = state.space.species_of(first)
        if first + ansatz.n > state.space.offset(sp) + state.space.n_modes(sp):
            raise ValueError("ansatz span crosses a species boundary")
    out = state.copy()
    for (q, t) in ansatz.gates(dagger=dagger):
        _givens_inplace(out, q, t)
    return out


def _diagonal_eigenvalues(state: QuantumState, obs: DiagonalObservable) -> np.ndarray:
    w = obs.weights
    if w.shape != (state.space.n_qubits,):
        raise ValueError("weight vector length must equal the qubit count")
    if state.backend == "full":
        basis = np.arange(state.amps.size)
        lam = np.zeros(state.amps.size)
        for q in range(state.space.n_qubits):
            if w[q] != 0.0:
                lam += w[q] * ((basis >> q) & 1)
        return lam
    per_species = []
    for sp in state.space.species:
        off = state.space.offset(sp)
        n = state.space.n_modes(sp)
        masks = state.sector_masks(sp)
        vals = np.zeros(len(masks))
        for p in range(n):
            wq = w[off + p]
            if wq != 0.0:
                vals += wq * ((masks >> p) & 1)
        per_species.append(vals)
    if len(per_species) == 1:
        return per_species[0][:, None]
    return per_species[0][:, None] + per_species[1][None, :]


def filter_measure(state: QuantumState, obs: DiagonalObservable, t: float,
                   delta: float = 0.0, mode: str = "postselect",
                   rng: np.random.Generator | None = None,
                   ) -> tuple[QuantumState, float, int]:
    """One ancilla filter: weight amplitudes by cos(lambda t + delta).

    In postselect mode the cosine branch is taken unconditionally; the
    returned probability is the squared norm that survives, and the state
    comes back renormalized with outcome 0.  In sample mode the outcome is
    drawn: outcome 1 applies the sin branch instead (the run has then lost
    the J = 0 target and should be flagged failed by the caller).
    """
    if abs(state.norm - 1.0) > 1e-9:
        raise ValueError("state must be normalized before filtering")
    lam = _diagonal_eigenvalues(state, obs)
    cosw = np.cos(lam * t + delta)
    out = state.copy()
    cos_amp = cosw * state.amps
    p0 = float(np.vdot(cos_amp, cos_amp).real)
    if mode == "postselect":
        if p0 < ZERO_PROB:
            raise ZeroProbabilityError(
                f"post-selection removed all amplitude (p = {p0:.3e})")
        out.amps = cos_amp / math.sqrt(p0)
        return out, p0, 0
    if mode != "sample":
        raise ValueError(f"unknown filter mode {mode!r}")
    rng = rng or np.random.default_rng()
    if rng.random() < p0:
        out.amps = cos_amp / math.sqrt(p0)
        return out, p0, 0
    sin_amp = np.sin(lam * t + delta) * state.amps
    p1 = float(np.vdot(sin_amp, sin_amp).real)
    if p1 < ZERO_PROB:
        raise ZeroProbabilityError(
            f"sampled branch carries no amplitude (p = {p1:.3e})")
    out.amps = sin_amp / math.sqrt(p1)
    return out, p0, 1


def apply_one_body(state: QuantumState, op: OneBody) -> QuantumState:
    """(sum_species sum_ab M_ab a+_a a_b) |state>, Jordan-Wigner signs included."""
    out = state.copy()
    out.amps = np.zeros_like(state.amps)
    for sp, mat in op.matrices.items():
        n = state.space.n_modes(sp)
        if mat.shape != (n, n):
            raise ValueError(f"{sp.value} matrix shape {mat.shape} != ({n}, {n})")
        if state.backend == "sector":
            axis = state._species_axis(sp)
            src_view = state.amps if axis == 0 else state.amps.T
            dst_view = out.amps if axis == 0 else out.amps.T
            k = state.particles[sp]
            for a, b in np.argwhere(np.abs(mat) > 1e-15):
                src, dst, sgn = _hop_arrays(n, k, int(a), int(b))
                if len(src):
                    dst_view[dst, :] += mat[a, b] * sgn[:, None] * src_view[src, :]
        else:
            off = state.space.offset(sp)
            basis = np.arange(state.amps.size)
            for a, b in np.argwhere(np.abs(mat) > 1e-15):
                ga, gb = int(a) + off, int(b) + off
                if ga == gb:
                    occ = ((basis >> ga) & 1).astype(float)
                    out.amps += mat[a, b] * occ * state.amps
                    continue
                sel = (((basis >> gb) & 1) == 1) & (((basis >> ga) & 1) == 0)
                src = np.nonzero(sel)[0]
                m0 = src
                par = _popcount(m0 & ((1 << gb) - 1))
                m1 = m0 ^ (1 << gb)
                par += _popcount(m1 & ((1 << ga) - 1))
                dst = m1 | (1 << ga)
                sgn = np.where(par % 2 == 0, 1.0, -1.0)
                out.amps[dst] += mat[a, b] * sgn * state.amps[src]
    return out


def _expect_pauli(state: QuantumState, op: PauliSum) -> complex:
    if op.n_qubits != state.space.n_qubits:
        raise ValueError("operator qubit count does not match the space")
    total = 0.0 + 0.0j
    if state.backend == "full":
        basis = np.arange(state.amps.size)
        conj = state.amps.conj()
        for (x, z), c in op.terms.items():
            phase = c * _PHASES[(x & z).bit_count() % 4]
            signs = 1 - 2 * (_popcount(basis & z) & 1)
            total += phase * np.sum(conj[basis ^ x] * signs * state.amps)
        return total
    space = state.space
    sps = list(space.species)
    masks = [state.sector_masks(sp) for sp in sps]
    tables = [_rank_table(space.n_modes(sp), state.particles[sp]) for sp in sps]
    offs = [space.offset(sp) for sp in sps]
    ns = [space.n_modes(sp) for sp in sps]
    conj = state.amps.conj()
    for (x, z), c in op.terms.items():
        phase = c * _PHASES[(x & z).bit_count() % 4]
        rows: list[np.ndarray] = []
        signs: list[np.ndarray] = []
        ok = True
        for k in range(len(sps)):
            lx = (x >> offs[k]) & ((1 << ns[k]) - 1)
            lz = (z >> offs[k]) & ((1 << ns[k]) - 1)
            flipped = masks[k] ^ lx
            rk = tables[k][flipped]
            if np.all(rk < 0):
                ok = False
                break
            rows.append(rk)
            signs.append(1 - 2 * (_popcount(masks[k] & lz) & 1))
        if not ok:
            continue
        valid = rows[0] >= 0
        if len(sps) == 1:
            idx = np.nonzero(valid)[0]
            total += phase * np.sum(conj[rows[0][idx], 0] * signs[0][idx]
                                    * state.amps[idx, 0])
            continue
        validn = rows[1] >= 0
        ip = np.nonzero(valid)[0]
        iq = np.nonzero(validn)[0]
        if len(ip) == 0 or len(iq) == 0:
            continue
        block = conj[np.ix_(rows[0][ip], rows[1][iq])]
        src = state.amps[np.ix_(ip, iq)]
        total += phase * np.sum(block * src
                                * np.outer(signs[0][ip], signs[1][iq]))
    return total


def expectation(state: QuantumState, op) -> float:
    """<state| op |state> for a Hermitian PauliSum or OneBody operator."""
    if isinstance(op, PauliSum):
        if not op.is_hermitian(1e-10):
            raise ValueError("operator is not Hermitian")
        value = _expect_pauli(state, op)
    elif isinstance(op, OneBody):
        if not op.is_hermitian():
            raise ValueError("operator is not Hermitian")
        value = complex(np.vdot(state.amps, apply_one_body(state, op).amps))
    elif isinstance(op, DiagonalObservable):
        lam = _diagonal_eigenvalues(state, op)
        value = complex(np.vdot(state.amps, lam * state.amps))
    else:
        raise TypeError(f"unsupported operator type {type(op).__name__}")
    if abs(value.imag) > 1e-10:
        raise ValueError(f"expectation has imaginary part {value.imag:.3e}")
    return float(value.real)


def expectation_j_squared(state: QuantumState, axes: tuple[OneBody, OneBody, OneBody]
                          ) -> float:
    """<J^2> as sum_axis ||J_axis |state>||^2 by double application."""
    total = 0.0
    for op in axes:
        phi = apply_one_body(state, op)
        total += float(np.vdot(phi.amps, phi.amps).real)
    return total


def _sector_index_grid(masks_per_species: list[np.ndarray]) -> np.ndarray:
    """Full-backend basis indices arranged in the 2-D sector layout."""
    if len(masks_per_species) == 1:
        return masks_per_species[0][:, None]
    return masks_per_species[0][:, None] | masks_per_species[1][None, :]


def convert_backend(state: QuantumState, target: str) -> QuantumState:
    """Re-express the amplitudes on the other backend.

    Full -> sector requires the state to live inside one particle-number
    sector per species (outside weight below 1e-12 rejects the conversion).
    """
    if target == state.backend:
        return state.copy()
    space = state.space
    if target == "sector":
        basis = np.arange(state.amps.size)
        weights = np.abs(state.amps) ** 2
        counts = {}
        for sp in space.species:
            off, n = space.offset(sp), space.n_modes(sp)
            occ = _popcount((basis >> off) & ((1 << n) - 1))
            counts[sp] = int(round(float(np.sum(weights * occ))))
        masks_per = []
        for sp in space.species:
            off, n = space.offset(sp), space.n_modes(sp)
            sector = _sector_masks(n, counts[sp])
            masks_per.append(sector << off)
        index = _sector_index_grid(masks_per)
        amps = state.amps[index]
        leak = 1.0 - float(np.vdot(amps, amps).real)
        if leak > LEAK_TOL:
            raise ValueError(f"state leaks outside the particle-number sector "
                             f"(weight {leak:.3e})")
        return QuantumState(space, "sector", amps, counts)
    if target != "full":
        raise ValueError(f"unknown backend {target!r}")
    masks_per = []
    for sp in space.species:
        off = space.offset(sp)
        masks_per.append(state.sector_masks(sp) << off)
    index = _sector_index_grid(masks_per)
    amps = np.zeros(1 << space.n_qubits, dtype=complex)
    amps[index] = state.amps
    return QuantumState(space, "full", amps)


def snapshot(state: QuantumState, threshold: float = 1e-10) -> str:
    """Debug dump: `bitstring amplitude_re amplitude_im` per retained state."""
    full = state if state.backend == "full" else convert_backend(state, "full")
    lines = []
    n = state.space.n_qubits
    for idx in np.nonzero(np.abs(full.amps) > threshold)[0]:
        bits = format(idx, f"0{n}b")[::-1]  # qubit 0 first
        a = full.amps[idx]
        lines.append(f"{bits} {a.real:.17g} {a.imag:.17g}")
    return "\n".join(lines) + ("\n" if lines else "")
