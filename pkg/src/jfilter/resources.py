"""Closed-form gate-resource estimates for the filter-projection algorithm.

All counts are pure integer arithmetic.  CNOTs come from three sources:
the one deformed-to-spherical network, n(n-1) per species; the per-j
x-basis networks, N_Jx = N_s sum_j 2j(2j+1) CNOTs applied twice per
iteration; and the diagonal filter evolutions, 2 CNOTs per system qubit
per measurement.  The Trotter comparison charges a ladder circuit
2(N_c - 1) CNOTs per Pauli string, with the ancilla coupling adding one
letter to every string.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .pauli import PauliSum

T_GATE_BASE = 10  # constant K in the T-count per synthesized rotation


@dataclass(frozen=True)
class GateBudget:
    """Inputs of the closed-form counts for one algorithm configuration."""

    n: int                       # single-particle states per species
    n_species: int
    n_iter: int
    n_proj: int
    j_values: tuple[float, ...]  # the set P of single-particle j values
    include_final_deformed_return: bool = False
    trial_in_spherical_basis: bool = False

    def __post_init__(self):
        if self.n < 1 or self.n_species < 1 or self.n_iter < 0 or self.n_proj < 0:
            raise ValueError("budget fields must be non-negative (n, N_s >= 1)")
        if self.include_final_deformed_return and self.trial_in_spherical_basis:
            raise ValueError("a spherical-basis trial has no deformed basis "
                             "to return to")

    @property
    def n_jx(self) -> int:
        return njx(self.n_species, self.j_values)


def njx(n_species: int, j_values: Sequence[float]) -> int:
    """CNOTs per application of the factorized x-basis rotation:
    N_s * sum_{j in P} 2j(2j+1)."""
    if not j_values:
        raise ValueError("the j set must not be empty")
    total = 0
    for j in j_values:
        twoj = int(round(2 * j))
        total += twoj * (twoj + 1)  # 2j(2j+1) as integers
    return n_species * total


def cnot_count(budget: GateBudget) -> int:
    """n(n-1)N_s + 2nN_sN_iterN_proj + 2N_iterN_Jx, first term per flags."""
    first = budget.n * (budget.n - 1) * budget.n_species
    if budget.trial_in_spherical_basis:
        first = 0
    elif budget.include_final_deformed_return:
        first *= 2
    return (first
            + 2 * budget.n * budget.n_species * budget.n_iter * budget.n_proj
            + 2 * budget.n_iter * budget.n_jx)


def single_qubit_counts(budget: GateBudget) -> tuple[int, int, int, int]:
    """(N_H, N_Rz, N_Rx, N_Rz(theta)) for the fixed pi/2 and variable angles."""
    base = budget.n * (budget.n - 1) * budget.n_species
    n_h = base + 2 * budget.n_iter * budget.n_jx
    n_rz = n_h
    n_rx = (2 * base
            + 2 * budget.n * budget.n_species * budget.n_iter * budget.n_proj
            + 4 * budget.n_iter * budget.n_jx)
    assert n_rx % 2 == 0
    return n_h, n_rz, n_rx, n_rx // 2


def t_count(n_rz_theta: int, epsilon: float) -> int:
    """T gates for all synthesized rotations: each costs K + 4 log2(1/eps)."""
    if not (0 < epsilon < 1):
        raise ValueError("epsilon must lie in (0, 1)")
    if n_rz_theta < 0:
        raise ValueError("rotation count must be non-negative")
    per_rotation = math.ceil(T_GATE_BASE + 4 * math.log2(1 / epsilon))
    return n_rz_theta * per_rotation


def trotter_step_cnots(op: PauliSum) -> int:
    """CNOTs for one Trotter step of exp(-i t op x Y_ancilla).

    Every non-identity string of complexity N_c gains the ancilla letter
    (complexity N_c + 1) and its ladder circuit costs 2 N_c CNOTs; no
    CNOT-cancellation between consecutive strings is attempted.
    """
    return int(sum(2 * nc for nc in op.complexities()))


def report(budget: GateBudget, epsilon: float = 2 ** -10,
           trotter_op: PauliSum | None = None) -> dict:
    """All inputs, flags and counts as one JSON-ready dictionary."""
    n_h, n_rz, n_rx, n_rz_theta = single_qubit_counts(budget)
    out = {
        "inputs": {
            "n": budget.n,
            "n_species": budget.n_species,
            "n_iter": budget.n_iter,
            "n_proj": budget.n_proj,
            "j_values": list(budget.j_values),
            "include_final_deformed_return": budget.include_final_deformed_return,
            "trial_in_spherical_basis": budget.trial_in_spherical_basis,
            "epsilon": epsilon,
        },
        "counts": {
            "n_jx": budget.n_jx,
            "cnot": cnot_count(budget),
            "h": n_h,
            "rz_fixed": n_rz,
            "rx_fixed": n_rx,
            "rz_theta": n_rz_theta,
            "t": t_count(n_rz_theta, epsilon),
        },
        "assumptions": {
            "ancilla_letter_in_ladder_complexity": True,
        },
    }
    if trotter_op is not None:
        trotter = trotter_step_cnots(trotter_op)
        out["counts"]["trotter_step_cnot"] = trotter
        out["counts"]["trotter_to_filter_ratio"] = trotter / out["counts"]["cnot"]
    return out


def table_csv(budgets: Sequence[GateBudget], trotter: int | None = None) -> str:
    """CSV rows (N_proj, N_iter, filter-algorithm CNOTs, Trotter-step CNOTs)."""
    rows = ["n_proj,n_iter,cnot_filter_algorithm,cnot_j2_trotter_step"]
    for b in budgets:
        tail = str(trotter) if trotter is not None else ""
        rows.append(f"{b.n_proj},{b.n_iter},{cnot_count(b)},{tail}")
    return "\n".join(rows) + "\n"
