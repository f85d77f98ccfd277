"""Probabilistic stability of polyhedral probabilistic hybrid systems.

A system is abstracted to a finite weighted MDP whose maximum expected mean
payoff, when strictly negative, certifies stability.
"""

from .abstraction import (AbstractWmdp, GuardEdge, Location, Pphs, abstract,
                          continuous_edge_feasible, edge_weight, pphs_stability_verdict, verify)
from .chain import decide_as_convergence, effective_weight, stationary_distribution
from .graph import mec_decompose, scc_decompose
from .harness import oracle_max_mean_payoff, simulate_chain, simulate_pphs
from .lp import LinearProgram, solve
from .mdp import Action, Wdtmc, Wmdp, induce
from .meanpayoff import Verdict, analyze, gain_lp, max_expected_mean_payoff, wmdp_stability_verdict
from .polyhedra import ConeInvariant, Facet, Polyhedron, enumerate_facets

__version__ = "0.1.0"

__all__ = [
    "AbstractWmdp", "Action", "ConeInvariant", "Facet", "GuardEdge", "LinearProgram", "Location",
    "Polyhedron", "Pphs", "Verdict", "Wdtmc", "Wmdp", "abstract", "analyze",
    "continuous_edge_feasible", "decide_as_convergence", "edge_weight", "effective_weight",
    "enumerate_facets", "gain_lp", "induce", "max_expected_mean_payoff", "mec_decompose",
    "oracle_max_mean_payoff", "pphs_stability_verdict", "scc_decompose", "simulate_chain",
    "simulate_pphs", "solve", "stationary_distribution", "verify", "wmdp_stability_verdict",
]
