"""Quantum dynamo: a driven spin coupled to a bosonic bath.

Solvers for the spin dynamics (exact diagonalization, stochastic
Schroedinger equation, NIBA, GKLS), closed-form reference results, the
energy ledger with its topological read-out, and the ``dynamo-sim``
experiment harness.
"""

__version__ = "0.1.0"
