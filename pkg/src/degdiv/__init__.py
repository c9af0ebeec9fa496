"""Distinct-degree structure of graphs.

Core library behind the degdiv service and CLI: bitset graphs, exact
small-graph oracles, probability-vector distributions, small-ball collision
estimation, cluster decompositions, the randomized cluster partition, witness
extraction and the scaling-experiment harness.
"""

__version__ = "0.1.0"
