"""Growth constants of directed random graphs.

Four independent routes to the same constants: direct window simulation,
infinite-bin-model dynamics, exact word/Markov-chain combinatorics, and
perfect simulation of the max growth system.
"""

__version__ = "0.1.0"
