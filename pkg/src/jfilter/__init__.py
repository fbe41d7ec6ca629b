"""jfilter: J = 0 / J = 1/2 state preparation by filter measurements.

Prepares total-angular-momentum eigencomponents of deformed fermionic
trial states by alternating diagonal Jz/Jx filter measurements, with all
basis rotations synthesized as triangular Givens networks, plus exact
gate-resource estimates for the resulting circuits.
"""

from .cartan import (CartanAnsatz, CostProbe, InvolutionAlgebra, cost,
                     decompose, gradient, jx_block_ansatz, load_ansatz,
                     network_from_orthogonal, orbital_matrix, save_ansatz,
                     verify)
from .pauli import (PauliSum, angular_momentum_matrix, build_j_component,
                    build_j_squared, complexity_histogram, encode_one_body,
                    multiply)
from .projection import (ProjectionRecord, ProjectionSchedule,
                         exact_projector_oracle, j_weights, mtilde_sequence,
                         possible_j_values, reachable_m_values, run_j0,
                         run_jhalf)
from .resources import (GateBudget, cnot_count, njx, report,
                        single_qubit_counts, t_count, trotter_step_cnots)
from .simulator import (DiagonalObservable, OneBody, QuantumState,
                        ZeroProbabilityError, apply_cartan, apply_givens,
                        convert_backend, expectation, expectation_j_squared,
                        filter_measure, prepare_slater, snapshot)
from .spmodel import (DeformedBasis, Mode, ModelSpace, Species, build_space,
                      generate_deformation, load_deformation,
                      save_deformation)

__version__ = "0.1.0"

__all__ = [
    "CartanAnsatz", "CostProbe", "InvolutionAlgebra", "cost", "decompose",
    "gradient", "jx_block_ansatz", "load_ansatz", "network_from_orthogonal",
    "orbital_matrix", "save_ansatz", "verify",
    "PauliSum", "angular_momentum_matrix", "build_j_component",
    "build_j_squared", "complexity_histogram", "encode_one_body", "multiply",
    "ProjectionRecord", "ProjectionSchedule", "exact_projector_oracle",
    "j_weights", "mtilde_sequence", "possible_j_values", "reachable_m_values",
    "run_j0", "run_jhalf",
    "GateBudget", "cnot_count", "njx", "report", "single_qubit_counts",
    "t_count", "trotter_step_cnots",
    "DiagonalObservable", "OneBody", "QuantumState", "ZeroProbabilityError",
    "apply_cartan", "apply_givens", "convert_backend", "expectation",
    "expectation_j_squared", "filter_measure", "prepare_slater", "snapshot",
    "DeformedBasis", "Mode", "ModelSpace", "Species", "build_space",
    "generate_deformation", "load_deformation", "save_deformation",
    "__version__",
]
