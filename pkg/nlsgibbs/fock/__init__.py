"""Truncated bosonic Fock space: operators, thermal states and expansions."""

from nlsgibbs.fock.basis import FockBasis, build_basis
from nlsgibbs.fock.duhamel import (
    DuhamelExpansion,
    duhamel_coefficient_a_tau_m,
    duhamel_remainder,
    shifted_duhamel_coefficient,
)
from nlsgibbs.fock.free import (
    bose_two_point,
    free_partition_function,
    free_partition_sum,
    free_wick_four_point,
    truncated_two_point,
)
from nlsgibbs.fock.operators import (
    BlockOperator,
    OperatorKind,
    build_operator,
    ccr_defect,
    dump_operator,
    ladder_operator,
    load_operator,
)
from nlsgibbs.fock.thermal import (
    PartitionFunctions,
    ThermalDecomposition,
    ThermalState,
    decompose,
    gamma_tau_p,
    heisenberg_evolve,
    partition_functions,
    quantum_expectation,
)

__all__ = [
    "BlockOperator",
    "DuhamelExpansion",
    "FockBasis",
    "OperatorKind",
    "PartitionFunctions",
    "ThermalDecomposition",
    "ThermalState",
    "bose_two_point",
    "build_basis",
    "build_operator",
    "ccr_defect",
    "decompose",
    "dump_operator",
    "duhamel_coefficient_a_tau_m",
    "duhamel_remainder",
    "free_partition_function",
    "free_partition_sum",
    "free_wick_four_point",
    "gamma_tau_p",
    "heisenberg_evolve",
    "ladder_operator",
    "load_operator",
    "partition_functions",
    "quantum_expectation",
    "shifted_duhamel_coefficient",
    "truncated_two_point",
]
