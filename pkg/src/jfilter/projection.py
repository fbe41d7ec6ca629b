"""The alternating Jz/Jx filter protocol and its exact validation oracle.

A run starts from a Slater determinant encoded in the deformed basis,
rotates to the spherical basis with a Givens network, then alternates
diagonal filter measurements along z and x (rotating into the per-j
x-diagonal basis and back each iteration).  Filters multiply amplitudes by
cos(M t + delta), so components with M = (2m+1) pi/(2t) vanish exactly
while the rotation-invariant target component is never touched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from . import cartan
from .pauli import angular_momentum_matrix, deformed_matrix
from .simulator import (DiagonalObservable, OneBody, QuantumState,
                        apply_cartan, apply_one_body, convert_backend,
                        expectation, expectation_j_squared, filter_measure,
                        prepare_slater)
from .spmodel import DeformedBasis, ModelSpace, Species

J2_THRESHOLD = 1e-6
_CLEAN_TOL = 1e-13
_ORACLE_DIM_LIMIT = 1_000_000


@dataclass(frozen=True)
class ProjectionSchedule:
    """Filter times and phases used for each axis, repeated every iteration."""

    n_proj: int
    n_iter: int
    times: tuple[float, ...]
    deltas: tuple[float, ...]
    target: str = "J0"
    sign: int = +1

    def __post_init__(self):
        if self.n_proj < 2 or self.n_proj % 2:
            raise ValueError("n_proj must be an even integer >= 2")
        if len(self.times) != self.n_proj // 2:
            raise ValueError("need n_proj/2 filter times per axis")
        if any(t2 >= t1 for t1, t2 in zip(self.times, self.times[1:])):
            raise ValueError("filter times must be strictly decreasing")
        if self.target not in ("J0", "Jhalf"):
            raise ValueError(f"unknown target {self.target!r}")
        if self.target == "J0" and any(d != 0.0 for d in self.deltas):
            raise ValueError("J0 schedules use zero phases")
        if self.sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")

    @classmethod
    def j0(cls, n_proj: int, n_iter: int) -> "ProjectionSchedule":
        """Times pi/2, pi/4, ..., pi/2^(n_proj/2); filter i removes
        M = (2m+1) 2^(i-1)."""
        times = tuple(math.pi / 2 ** (i + 1) for i in range(n_proj // 2))
        return cls(n_proj=n_proj, n_iter=n_iter, times=times,
                   deltas=(0.0,) * (n_proj // 2), target="J0")

    @classmethod
    def jhalf(cls, m_tildes: Sequence[float], n_iter: int,
              sign: int = +1) -> "ProjectionSchedule":
        """Times pi/(2 M~) for each M~ > 1/2; filter removes M = (2m+1) M~."""
        mts = tuple(float(m) for m in m_tildes)
        if any(m <= 0.5 for m in mts):
            raise ValueError("M~ values must exceed 1/2")
        times = tuple(math.pi / (2 * m) for m in mts)
        return cls(n_proj=2 * len(mts), n_iter=n_iter, times=times,
                   deltas=(0.0,) * len(mts), target="Jhalf", sign=sign)

    @classmethod
    def jhalf_for(cls, space: ModelSpace, particles: dict, n_iter: int,
                  sign: int = +1) -> "ProjectionSchedule":
        return cls.jhalf(mtilde_sequence(space, particles), n_iter, sign)


def _species_m_sums(space: ModelSpace, species: Species, count: int) -> set[int]:
    """All reachable 2*M values of `count` fermions in one species block."""
    twoms = [int(round(2 * m.m)) for m in space.block(species)]
    return {sum(c) for c in combinations(twoms, count)}


def reachable_m_values(space: ModelSpace, particles: dict) -> np.ndarray:
    """Ascending total M values reachable at the given particle numbers."""
    totals = {0}
    for sp in space.species:
        per = _species_m_sums(space, sp, int(particles.get(sp, 0)))
        totals = {a + b for a in totals for b in per}
    return np.array(sorted(totals)) / 2.0


def possible_j_values(space: ModelSpace, particles: dict) -> np.ndarray:
    """Every J that can occur in the sector: the distinct |M| values."""
    ms = reachable_m_values(space, particles)
    return np.array(sorted({abs(m) for m in ms}))


def mtilde_sequence(space: ModelSpace, particles: dict) -> list[float]:
    """Ascending M~ filters covering all reachable |M| > 1/2.

    A filter at M~ removes every M = (2m+1) M~, so values already covered
    by an earlier filter are skipped (for three sd-shell neutrons the
    sequence is 3/2, 5/2, 7/2, with 9/2 covered by the 3/2 filter).
    """
    targets = [m for m in possible_j_values(space, particles) if m > 0.5]
    covered: set[int] = set()
    out = []
    for m in targets:
        twom = int(round(2 * m))
        if twom in covered:
            continue
        out.append(m)
        k = twom
        top = int(round(2 * max(targets)))
        while k <= top:
            covered.add(k)
            k += 2 * twom
    return out


@dataclass
class FilterRow:
    measurement: int
    iteration: int
    axis: str
    t: float
    delta: float
    probability: float
    cumulative_probability: float
    j2: float
    jz: float


@dataclass
class ProjectionRecord:
    """Per-measurement trace of one projection run."""

    rows: list[FilterRow] = field(default_factory=list)
    cumulative_probability: float = 1.0
    final_state: QuantumState | None = None
    initial_j_weights: dict[float, float] = field(default_factory=dict)
    final_weights: dict[tuple[float, float], float] = field(default_factory=dict)
    target: str = "J0"
    sign: int = +1
    failed: bool = False
    failure_measurement: int | None = None

    @property
    def initial_j0_weight(self) -> float:
        return self.initial_j_weights.get(0.0, 0.0)

    @property
    def final_j2(self) -> float:
        return self.rows[-1].j2 if self.rows else float("nan")

    def first_measurement_below(self, threshold: float) -> int | None:
        for row in self.rows:
            if row.j2 <= threshold:
                return row.measurement
        return None

    def to_csv(self) -> str:
        out = ["measurement,iteration,axis,t,delta,probability,"
               "cumulative_probability,J2,Jz"]
        for r in self.rows:
            out.append(f"{r.measurement},{r.iteration},{r.axis},"
                       f"{r.t:.17g},{r.delta:.17g},{r.probability:.17g},"
                       f"{r.cumulative_probability:.17g},{r.j2:.17g},{r.jz:.17g}")
        return "\n".join(out) + "\n"

    def weights_csv(self) -> str:
        out = ["J,M,weight"]
        for (jv, mv) in sorted(self.final_weights):
            out.append(f"{jv:.1f},{mv:.1f},{self.final_weights[(jv, mv)]:.17g}")
        return "\n".join(out) + "\n"


class _OperatorTracker:
    """Physical J operators expressed in whatever basis the state occupies."""

    def __init__(self, space: ModelSpace, basis: DeformedBasis):
        self.space = space
        self.mats: dict[Species, dict[str, np.ndarray]] = {}
        for sp in space.species:
            u = basis.transform[sp]
            self.mats[sp] = {
                axis: deformed_matrix(angular_momentum_matrix(space, axis, sp), u)
                for axis in ("x", "y", "z")}

    def conjugate(self, species: Species, v: np.ndarray) -> None:
        """Basis change by a network with orbital matrix v (state -> v . state)."""
        for axis in ("x", "y", "z"):
            m = v @ self.mats[species][axis] @ v.T
            m[np.abs(m) < _CLEAN_TOL] = 0.0
            self.mats[species][axis] = m

    def one_body(self, axis: str) -> OneBody:
        return OneBody({sp: self.mats[sp][axis] for sp in self.mats})

    def axes(self) -> tuple[OneBody, OneBody, OneBody]:
        return tuple(self.one_body(a) for a in ("x", "y", "z"))

    def j2(self, state: QuantumState) -> float:
        return expectation_j_squared(state, self.axes())

    def jz(self, state: QuantumState) -> float:
        return expectation(state, self.one_body("z"))


def _default_jz_ansatz(space: ModelSpace, basis: DeformedBasis
                       ) -> dict[Species, cartan.CartanAnsatz]:
    """Exact deformed-to-spherical networks built from the known U matrices.

    The network K with orbital matrix U^T satisfies J~_z = K J_z K+ exactly,
    so K+ rotates the deformed encoding onto the canonical spherical one.
    A det(U) = -1 input gets its last deformed column sign-flipped first,
    which rephases the trial determinant by at most a global sign.
    """
    out = {}
    for sp in space.species:
        u = np.array(basis.transform[sp])
        if np.linalg.det(u) < 0:
            u[:, -1] *= -1
        ansatz = cartan.network_from_orthogonal(u.T, offset=space.offset(sp))
        ansatz.h = -space.m_values(sp) / 2
        mz = deformed_matrix(angular_momentum_matrix(space, "z", sp), u)
        ansatz.residual = cartan.verify(ansatz, mz)
        out[sp] = ansatz
    return out


def _jx_block_ansatze(space: ModelSpace, jx_seed: int
                      ) -> dict[Species, list[cartan.CartanAnsatz]]:
    """Per-(species, j) canonical Jx-diagonalizing networks; one optimization
    per distinct j, reused across species at shifted offsets."""
    cache: dict[float, cartan.CartanAnsatz] = {}
    out: dict[Species, list[cartan.CartanAnsatz]] = {}
    for sp in space.species:
        blocks = []
        off = space.offset(sp)
        for j in space.j_values(sp):
            if j not in cache:
                cache[j] = cartan.jx_block_ansatz(j, seed=jx_seed)
            base = cache[j]
            blocks.append(cartan.CartanAnsatz(
                n=base.n, angles=base.angles.copy(), h=base.h.copy(),
                offset=off, relabeling=base.relabeling.copy(),
                residual=base.residual, seed=base.seed))
            off += base.n
        out[sp] = blocks
    return out


def _weights_from_ansatze(space: ModelSpace, ansatze) -> np.ndarray:
    """Diagonal filter weights -2 h_q for every qubit covered by the ansatze."""
    w = np.zeros(space.n_qubits)
    items = ansatze.values() if isinstance(ansatze, dict) else ansatze
    for a in items:
        seq = a if isinstance(a, (list, tuple)) else [a]
        for ans in seq:
            w[ans.offset:ans.offset + ans.n] = -2 * ans.h
    return w


def _validate_run(space: ModelSpace, basis: DeformedBasis, schedule,
                  target: str) -> dict[Species, int]:
    if schedule.target != target:
        raise ValueError(f"schedule target {schedule.target} != {target}")
    for sp in space.species:
        if sp not in basis.transform:
            raise ValueError(f"deformed basis missing species {sp.value}")
        if basis.n(sp) != space.n_modes(sp):
            raise ValueError(f"{sp.value} deformation has {basis.n(sp)} modes, "
                             f"space has {space.n_modes(sp)}")
    particles = {sp: len(basis.occupations.get(sp, ())) for sp in space.species}
    total = sum(particles.values())
    if target == "J0" and total % 2:
        raise ValueError("J0 target needs an even total particle number")
    if target == "Jhalf" and total % 2 == 0:
        raise ValueError("Jhalf target needs an odd total particle number")
    if total == 0:
        raise ValueError("trial state has no particles")
    return particles


class _Runner:
    def __init__(self, basis: DeformedBasis, space: ModelSpace,
                 schedule: ProjectionSchedule, ansatz_jz, backend: str,
                 mode: str, rng, jx_seed: int):
        self.space = space
        self.schedule = schedule
        self.mode = mode
        self.rng = rng
        particles = _validate_run(space, basis, schedule, schedule.target)
        self.particles = particles
        occ = []
        for sp in space.species:
            off = space.offset(sp)
            occ.extend(off + k for k in basis.occupations.get(sp, ()))
        self.state = prepare_slater(space, occ, backend=backend)
        self.tracker = _OperatorTracker(space, basis)
        if ansatz_jz is None:
            ansatz_jz = _default_jz_ansatz(space, basis)
        ansatz_jz = {Species.coerce(k): v for k, v in ansatz_jz.items()}
        for sp, ans in ansatz_jz.items():
            mz = deformed_matrix(
                angular_momentum_matrix(space, "z", sp), basis.transform[sp])
            resid = cartan.verify(ans, mz)
            if resid > cartan.RESIDUAL_TOL:
                raise ValueError(f"{Species.coerce(sp).value} J~_z ansatz residual "
                                 f"{resid:.3e} exceeds {cartan.RESIDUAL_TOL}")
        self.ansatz_jz = ansatz_jz
        self.jx = _jx_block_ansatze(space, jx_seed)
        self.z_weights = _weights_from_ansatze(space, ansatz_jz)
        self.x_weights = _weights_from_ansatze(space, self.jx)
        self.record = ProjectionRecord(target=schedule.target, sign=schedule.sign)
        self.measurement = 0

    def rotate_to_spherical(self):
        for sp, ans in self.ansatz_jz.items():
            self.state = apply_cartan(self.state, ans, dagger=True)
            self.tracker.conjugate(Species.coerce(sp),
                                   cartan.orbital_matrix(ans, dagger=True))

    def rotate_to_deformed(self):
        for sp, ans in self.ansatz_jz.items():
            self.state = apply_cartan(self.state, ans, dagger=False)
            self.tracker.conjugate(Species.coerce(sp),
                                   cartan.orbital_matrix(ans, dagger=False))

    def x_basis(self, dagger: bool):
        for sp, blocks in self.jx.items():
            v = np.eye(self.space.n_modes(sp))
            off0 = self.space.offset(sp)
            for ans in blocks:
                self.state = apply_cartan(self.state, ans, dagger=dagger)
                lo = ans.offset - off0
                v[lo:lo + ans.n, lo:lo + ans.n] = cartan.orbital_matrix(
                    ans, dagger=dagger)
            self.tracker.conjugate(sp, v)

    def filter(self, axis: str, weights: np.ndarray, t: float, delta: float,
               iteration: int) -> bool:
        """Apply one filter; returns False when a sampled run must abort."""
        obs = DiagonalObservable(weights)
        self.state, prob, outcome = filter_measure(
            self.state, obs, t, delta, mode=self.mode, rng=self.rng)
        self.measurement += 1
        self.record.cumulative_probability *= prob
        self.record.rows.append(FilterRow(
            measurement=self.measurement, iteration=iteration, axis=axis,
            t=t, delta=delta, probability=prob,
            cumulative_probability=self.record.cumulative_probability,
            j2=self.tracker.j2(self.state), jz=self.tracker.jz(self.state)))
        if outcome == 1:
            self.record.failed = True
            self.record.failure_measurement = self.measurement
            return False
        return True

    def run_iterations(self) -> bool:
        sched = self.schedule
        for it in range(1, sched.n_iter + 1):
            for t, d in zip(sched.times, sched.deltas):
                if not self.filter("z", self.z_weights, t, d, it):
                    return False
            self.x_basis(dagger=True)
            for t, d in zip(sched.times, sched.deltas):
                if not self.filter("x", self.x_weights, t, d, it):
                    return False
            self.x_basis(dagger=False)
        return True

    def finish(self):
        self.record.final_state = self.state
        self.record.final_weights = exact_projector_oracle(
            self.state, self.space, axes=self.tracker.axes())


def run_j0(basis: DeformedBasis, space: ModelSpace,
           schedule: ProjectionSchedule,
           ansatz_jz: dict[Species, cartan.CartanAnsatz] | None = None,
           return_deformed: bool = False, backend: str = "sector",
           mode: str = "postselect", rng: np.random.Generator | None = None,
           jx_seed: int = 0) -> ProjectionRecord:
    """Project the deformed trial determinant onto its J = 0 component.

    One iteration applies n_proj/2 Jz filters, rotates every (species, j)
    block into the x-diagonal basis, applies the same filters along x and
    rotates back; the deformed-to-spherical rotation happens once up front.
    The final state is left in the spherical basis unless return_deformed.

    Args:
        ansatz_jz: per-species deformed-basis networks; defaults to the
            exact Givens factorization of the deformation matrices.  Any
            supplied ansatz must verify against J~_z at residual <= 1e-8.
        mode: "postselect" follows the cosine branch deterministically;
            "sample" draws ancilla outcomes from rng and aborts on a 1.

    Returns:
        ProjectionRecord with one row per measurement, the cumulative
        post-selection probability, initial J weights of the trial and the
        oracle (J, M) weight table of the final state.
    """
    runner = _Runner(basis, space, schedule, ansatz_jz, backend, mode, rng,
                     jx_seed)
    runner.record.initial_j_weights = j_weights(
        runner.state, space, axes=runner.tracker.axes())
    runner.rotate_to_spherical()
    if runner.run_iterations():
        if return_deformed:
            runner.rotate_to_deformed()
    runner.finish()
    return runner.record


def run_jhalf(basis: DeformedBasis, space: ModelSpace,
              schedule: ProjectionSchedule,
              ansatz_jz: dict[Species, cartan.CartanAnsatz] | None = None,
              sign: int | None = None, backend: str = "sector",
              mode: str = "postselect", rng: np.random.Generator | None = None,
              jx_seed: int = 0) -> ProjectionRecord:
    """Project an odd system onto J = 1/2 with a chosen magnetic substate.

    Runs the same z/x alternation with times pi/(2 M~), then applies one
    final phased Jz filter at t = pi/2, delta = -sign * pi/4, which keeps
    only M = sign/2 of the surviving M = +-1/2 pair.
    """
    sign = schedule.sign if sign is None else int(sign)
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    runner = _Runner(basis, space, schedule, ansatz_jz, backend, mode, rng,
                     jx_seed)
    runner.record.sign = sign
    runner.record.initial_j_weights = j_weights(
        runner.state, space, axes=runner.tracker.axes())
    runner.rotate_to_spherical()
    if runner.run_iterations():
        runner.filter("z", runner.z_weights, math.pi / 2, -sign * math.pi / 4,
                      schedule.n_iter + 1)
    runner.finish()
    return runner.record


def _canonical_axes(space: ModelSpace) -> tuple[OneBody, OneBody, OneBody]:
    return tuple(OneBody({sp: angular_momentum_matrix(space, axis, sp)
                          for sp in space.species})
                 for axis in ("x", "y", "z"))


def _j2_apply(state: QuantumState, axes) -> QuantumState:
    out = state.copy()
    out.amps = np.zeros_like(state.amps)
    for op in axes:
        out.amps += apply_one_body(apply_one_body(state, op), op).amps
    return out


def j_weights(state: QuantumState, space: ModelSpace, axes=None
              ) -> dict[float, float]:
    """||P_J state||^2 for every possible J, via exact spectral polynomials.

    The product over J' != J of (J^2 - J'(J'+1)) / (J(J+1) - J'(J'+1)) is
    the exact projector P_J because the sector spectrum of J^2 is contained
    in the possible-J set; weights therefore sum to 1.
    """
    if state.backend != "sector":
        state = convert_backend(state, "sector")
    if state.amps.size > _ORACLE_DIM_LIMIT:
        raise ValueError("sector too large for the projector oracle")
    axes = axes or _canonical_axes(space)
    jvals = possible_j_values(space, state.particles)
    out = {}
    for jv in jvals:
        v = state.copy()
        lam_j = jv * (jv + 1)
        for jp in jvals:
            if jp == jv:
                continue
            lam = jp * (jp + 1)
            w = _j2_apply(v, axes)
            v.amps = (w.amps - lam * v.amps) / (lam_j - lam)
        out[float(jv)] = float(np.vdot(v.amps, v.amps).real)
    return out


def exact_projector_oracle(state: QuantumState, space: ModelSpace, axes=None
                           ) -> dict[tuple[float, float], float]:
    """Squared overlaps with the simultaneous (J^2, J_z) eigenspaces.

    Args:
        state: sector-backend state (full states are converted first).
        axes: (Jx, Jy, Jz) OneBody operators in the state's current basis;
            defaults to the canonical spherical operators.

    Returns:
        {(J, M): weight} over all reachable (J, M) pairs; the weights sum
        to 1 within numerical accuracy.
    """
    if state.backend != "sector":
        state = convert_backend(state, "sector")
    if state.amps.size > _ORACLE_DIM_LIMIT:
        raise ValueError("sector too large for the projector oracle")
    axes = axes or _canonical_axes(space)
    jz = axes[2]
    mvals = reachable_m_values(space, state.particles)
    jvals = possible_j_values(space, state.particles)
    # fast path: Jz diagonal in the current basis -> resolve M by masking
    diag_jz = all(np.max(np.abs(m - np.diag(np.diag(m).real))) < 1e-12
                  for m in jz.matrices.values())
    out: dict[tuple[float, float], float] = {}
    for jv in jvals:
        v = state.copy()
        lam_j = jv * (jv + 1)
        for jp in jvals:
            if jp == jv:
                continue
            lam = jp * (jp + 1)
            w = _j2_apply(v, axes)
            v.amps = (w.amps - lam * v.amps) / (lam_j - lam)
        block_m = [m for m in mvals if abs(m) <= jv + 1e-9]
        if diag_jz:
            lam_m = _diag_m_values(state, jz)
            for mv in block_m:
                sel = np.abs(lam_m - mv) < 1e-9
                out[(float(jv), float(mv))] = float(
                    np.sum(np.abs(v.amps[sel]) ** 2))
        else:
            for mv in block_m:
                u = v.copy()
                for mp in mvals:
                    if mp == mv:
                        continue
                    w = apply_one_body(u, jz)
                    u.amps = (w.amps - mp * u.amps) / (mv - mp)
                out[(float(jv), float(mv))] = float(np.vdot(u.amps, u.amps).real)
    return out


def _diag_m_values(state: QuantumState, jz: OneBody) -> np.ndarray:
    """Per-basis-state total M when Jz is diagonal in the current basis."""
    parts = []
    for sp in state.space.species:
        diag = np.diag(jz.matrices[sp]).real
        masks = state.sector_masks(sp)
        vals = np.zeros(len(masks))
        for p, w in enumerate(diag):
            if w:
                vals += w * ((masks >> p) & 1)
        parts.append(vals)
    if len(parts) == 1:
        return parts[0][:, None]
    return parts[0][:, None] + parts[1][None, :]
