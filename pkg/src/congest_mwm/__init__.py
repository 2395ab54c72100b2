"""Reduction of weighted matching to cardinality matching in the CONGEST model.

Subpackages and modules:

* :mod:`.graph`: graphs, weighted instances, matchings, exact oracles.
* :mod:`.reduction`: the sequential reduction engine and its certificate.
* :mod:`.congest`: a synchronous message-passing simulator.
* :mod:`.protocol`: the distributed reduction and unweighted oracles.
* :mod:`.harness`: instance I/O, pipeline runs and sweeps.
"""

from .graph import (
    Graph,
    GraphError,
    Matching,
    OracleResult,
    OracleScaleError,
    WeightedInstance,
    is_matching,
    make_instance,
    matching_weight,
    nu_exact,
    opt_exact,
    validate_graph,
)

__all__ = [
    "Graph",
    "GraphError",
    "Matching",
    "OracleResult",
    "OracleScaleError",
    "WeightedInstance",
    "is_matching",
    "make_instance",
    "matching_weight",
    "nu_exact",
    "opt_exact",
    "validate_graph",
]
