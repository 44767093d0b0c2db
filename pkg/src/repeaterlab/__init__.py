"""Rate analysis and brute-force verification for ensemble-based
quantum-repeater protocols.

The package has three layers: a truncated Fock-space engine
(`repeaterlab.fock`, `repeaterlab.series`) that brute-forces the
heralded-link density matrices, closed-form rate models for the compared
protocols (`repeaterlab.rates`), and the search, simulation, and
command-line tooling on top (`repeaterlab.optimize`,
`repeaterlab.waiting`, `repeaterlab.cli`).
"""

from .series import PSeries
from .fock import DetectorModel, FockDensity, pair_source_state
from .dlcz import (
    ErrorCoefficients,
    TwoModeLink,
    build_chain,
    dlcz_mixture_weights,
    elementary_link,
    extract_coefficients,
    final_fidelity,
    post_select,
    swap,
    swap_circuit,
    verified_coefficients,
)
from .rates import (
    A_TABLE,
    B_TABLE,
    InfeasibleError,
    LinkWeights,
    ProtocolParams,
    RateBreakdown,
    direct_transmission_time,
    transmission,
)
from .optimizer import OptimizationResult, crossover, curve, optimize, sensitivity
from .waiting import (
    ChainModel,
    WaitingStats,
    analytic_vs_mc_report,
    expected_max_geometric,
    protocol_mc_report,
    simulate_chain,
)

__version__ = "0.1.0"

__all__ = [
    "A_TABLE",
    "B_TABLE",
    "ChainModel",
    "DetectorModel",
    "ErrorCoefficients",
    "FockDensity",
    "InfeasibleError",
    "LinkWeights",
    "OptimizationResult",
    "PSeries",
    "ProtocolParams",
    "RateBreakdown",
    "TwoModeLink",
    "WaitingStats",
    "analytic_vs_mc_report",
    "build_chain",
    "crossover",
    "curve",
    "direct_transmission_time",
    "dlcz_mixture_weights",
    "elementary_link",
    "expected_max_geometric",
    "extract_coefficients",
    "final_fidelity",
    "optimize",
    "pair_source_state",
    "post_select",
    "protocol_mc_report",
    "sensitivity",
    "simulate_chain",
    "swap",
    "swap_circuit",
    "verified_coefficients",
    "transmission",
]
