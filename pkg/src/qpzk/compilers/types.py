"""Shared types for the compiled-protocol pipeline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qpzk.core import linalg
from qpzk.errors import DimensionMismatchError, StateValidationError


@dataclass(frozen=True)
class HvzkSimulator:
    """Round simulator: unitaries on (private register S, message register),
    in that wire order, mirroring the prover's (workspace, message) layout.

    The simulator never touches the verifier workspace; at desk scale the
    honest prover's unitaries relabeled onto S are an admissible stand-in,
    and runs record which simulator was used.
    """

    unitaries: tuple[np.ndarray, ...]
    m_qubits: int
    s_qubits: int
    copy_budget: int = 0
    label: str = "custom"

    def __post_init__(self):
        mats = tuple(np.asarray(u, dtype=complex) for u in self.unitaries)
        object.__setattr__(self, "unitaries", mats)
        dim = 2 ** (self.m_qubits + self.s_qubits)
        for u in mats:
            if u.shape != (dim, dim):
                raise DimensionMismatchError("simulator unitary must act on S and M")
            if not linalg.is_unitary(u):
                raise StateValidationError("simulator unitary is not unitary")

    @classmethod
    def from_honest_prover(cls, protocol) -> "HvzkSimulator":
        """Honest prover unitaries with the workspace relabeled as S."""
        return cls(
            tuple(protocol.prover_unitaries),
            m_qubits=protocol.m_qubits,
            s_qubits=protocol.r_qubits,
            label="honest-prover-standin",
        )
