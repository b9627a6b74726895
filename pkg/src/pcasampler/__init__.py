"""Parallel probabilistic-cellular-automaton sampling of pair-interaction
Gibbs measures, with exact small-system oracles and certified bounds."""

__version__ = "0.1.0"
