"""riccatikit: symbolic-numeric toolkit for the Riccati equation and its kin.

The package ties together three equivalent descriptions of one object (the
Riccati equation, second-order linear ODEs and the Schwarzian family) and
uses them to build exactly solvable Schrödinger potentials: transparent
(N-soliton) potentials and 1-phase finite-gap potentials.
"""

from . import diffpoly, expr, finitegap, numeric, riccati, schwarzian, series, soliton

__all__ = [
    "expr",
    "diffpoly",
    "series",
    "numeric",
    "riccati",
    "schwarzian",
    "soliton",
    "finitegap",
]

__version__ = "0.1.0"
