"""Exact and Monte Carlo tools for online bipartite matching: Ranking, Balance,
the combinatorics of Ranking on upper-triangular graphs, a pricing view of
Ranking, and an adaptive adversary for deterministic algorithms."""

from .graph import (
    BipartiteGraph,
    FractionalMatching,
    GraphError,
    IntegralMatching,
    Permutation,
    make_monotone_graph,
    sample_dn,
)
from .ranking import EstimateReport, enumerate_ranking_exact, ranking_monte_carlo, run_ranking
from .balance import balance_monotone_closed_form, run_balance

__version__ = "0.1.0"

__all__ = [
    "BipartiteGraph",
    "EstimateReport",
    "FractionalMatching",
    "GraphError",
    "IntegralMatching",
    "Permutation",
    "balance_monotone_closed_form",
    "enumerate_ranking_exact",
    "make_monotone_graph",
    "ranking_monte_carlo",
    "run_balance",
    "run_ranking",
    "sample_dn",
]
