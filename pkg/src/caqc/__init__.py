"""Computation with Clifford quantum cellular automata.

Pauli algebra, CQCA rules, rotation-layer programs, stabilizer codes, a
dense state-vector oracle, measurement-based computation driven by a CQCA,
resource-state construction and CQCA-based variational models.
"""

__version__ = "0.1.0"

from .errors import CaqcError  # noqa: F401
