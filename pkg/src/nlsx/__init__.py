"""Desk-scale numerical laboratory for the 2D focusing Schrodinger equation
with exponential nonlinearity: ground states, invariant-set classification,
split-step evolution, virial and Moser-Trudinger diagnostics."""

__version__ = "0.1.0"
