"""Trusted-third-party execution of a two-party channel.

The corrupted party (if any) interacts through the extract-input /
program-output flow with an abort bit; after an abort the honest party
receives the distinguished symbol None, never a quantum state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from qpzk.core.registers import RegisterLayout
from qpzk.core.states import (
    MixedState,
    PureState,
    QuantumState,
    apply_unitary,
    partial_trace,
    tensor,
)
from qpzk.core.operators import UnitaryOp
from qpzk.errors import ConfigError, DimensionMismatchError, StateValidationError


@dataclass(frozen=True)
class IdealFunctionality:
    """A channel A x B -> A~ x B~ given as a unitary with declared ancilla
    and traced-out registers."""

    name: str
    a_qubits: int
    b_qubits: int
    a_out_qubits: int
    b_out_qubits: int
    unitary: np.ndarray  # acts on (A, B, Anc)
    ancilla_qubits: int = 0
    abortable: bool = True

    def __post_init__(self):
        total_in = self.a_qubits + self.b_qubits + self.ancilla_qubits
        if self.unitary.shape != (2 ** total_in, 2 ** total_in):
            raise DimensionMismatchError("functionality unitary has wrong dim")
        if self.a_out_qubits + self.b_out_qubits > total_in:
            raise DimensionMismatchError("declared outputs exceed available wires")

    @property
    def traced_qubits(self) -> int:
        return (self.a_qubits + self.b_qubits + self.ancilla_qubits
                - self.a_out_qubits - self.b_out_qubits)

    def apply(self, joint_ab: QuantumState) -> MixedState:
        """Run the channel on a joint (A, B) input state."""
        expected = self.a_qubits + self.b_qubits
        if joint_ab.n_qubits != expected:
            raise DimensionMismatchError(
                f"functionality {self.name!r} expects {expected} input qubits"
            )
        lay = RegisterLayout.of(("A", self.a_qubits), ("B", self.b_qubits))
        state: QuantumState = joint_ab.relabel(lay)
        if self.ancilla_qubits:
            anc = PureState.computational(RegisterLayout.single("Anc", self.ancilla_qubits))
            state = tensor(state, anc)
            names = ("A", "B", "Anc")
        else:
            names = ("A", "B")
        state = apply_unitary(state, UnitaryOp(self.unitary, names))
        # Output wires in order: A~ first, B~ next, traced rest.
        out_lay = [("Aout", self.a_out_qubits), ("Bout", self.b_out_qubits),
                   ("Junk", self.traced_qubits)]
        out_lay = [(n_, c) for n_, c in out_lay if c > 0]
        state = state.relabel(RegisterLayout.of(*out_lay))
        if self.traced_qubits:
            return partial_trace(state, "Junk")
        return state.to_mixed()


def identity_functionality(a_qubits: int, b_qubits: int) -> IdealFunctionality:
    dim = 2 ** (a_qubits + b_qubits)
    return IdealFunctionality(
        "identity", a_qubits, b_qubits, a_qubits, b_qubits,
        np.eye(dim, dtype=complex),
    )


@dataclass(frozen=True)
class ClassicalFunctionality:
    """A possibly randomized map on classical inputs, one output per party."""

    name: str
    compute: Callable[..., tuple]

    def run(self, in_a, in_b, rng) -> tuple:
        return self.compute(in_a, in_b, rng)


def xor_coin_functionality() -> ClassicalFunctionality:
    """Both parties receive the XOR of their input bits."""

    def compute(b_p: int, b_v: int, rng) -> tuple[int, int]:
        out = (int(b_p) ^ int(b_v)) & 1
        return out, out

    return ClassicalFunctionality("xor-coin", compute)


@dataclass
class IdealSession:
    """One trusted-third-party execution with corruption bookkeeping.

    The corrupted party's input is recorded when extracted; a simulator may
    program the output it should see; the abort bit is the corrupted party's
    post-output decision. The honest party's input is consumed exactly once.
    """

    functionality: object
    corrupted: Optional[str] = None  # None | "A" | "B"
    extracted_input: object = None
    programmed_output: object = None
    abort_bit: int = 0
    events: list = field(default_factory=list)
    _honest_input_used: bool = field(default=False, repr=False)

    def __post_init__(self):
        if self.corrupted not in (None, "A", "B"):
            raise ConfigError(f"corrupted role must be None, 'A' or 'B', "
                              f"got {self.corrupted!r}")

    def extract(self, state):
        """Record the corrupted party's chosen input (simulator step)."""
        if self.corrupted is None:
            raise StateValidationError("no corrupted party to extract from")
        self.extracted_input = state
        self.events.append("extract")
        return state

    def program(self, output):
        """Pin the output the corrupted party will see (simulator step)."""
        if self.corrupted is None:
            raise StateValidationError("no corrupted party to program for")
        self.programmed_output = output
        self.events.append("program")

    def consume_honest_input(self):
        if self._honest_input_used:
            raise StateValidationError("honest input consumed twice")
        self._honest_input_used = True


def ideal_compute(
    session: IdealSession,
    in_a: QuantumState,
    in_b: QuantumState,
    abort_decider: Optional[Callable] = None,
):
    """Run the functionality under the session's corruption model.

    Returns (out_a, out_b, abort_bit); the honest party's slot holds None
    after an abort while the corrupted party keeps its output.
    """
    fn: IdealFunctionality = session.functionality
    if in_a.n_qubits != fn.a_qubits or in_b.n_qubits != fn.b_qubits:
        raise DimensionMismatchError("inputs do not match the functionality signature")
    session.consume_honest_input()
    if session.corrupted == "A" and session.extracted_input is not None:
        in_a = session.extracted_input
    if session.corrupted == "B" and session.extracted_input is not None:
        in_b = session.extracted_input

    joint = tensor(
        in_a.relabel(RegisterLayout.single("A", fn.a_qubits)),
        in_b.relabel(RegisterLayout.single("B", fn.b_qubits)),
    )
    out = fn.apply(joint)
    if fn.a_out_qubits == 0:
        out_a, out_b = None, out
    elif fn.b_out_qubits == 0:
        out_a, out_b = out, None
    else:
        out_a = partial_trace(out, "Bout")
        out_b = partial_trace(out, "Aout")
    session.events.append("compute")

    if session.corrupted is None:
        return out_a, out_b, 0

    corrupted_out = out_a if session.corrupted == "A" else out_b
    if session.programmed_output is not None:
        corrupted_out = session.programmed_output
    bit = 0
    if abort_decider is not None:
        bit = int(abort_decider(corrupted_out))
    session.abort_bit = bit
    session.events.append("abort" if bit else "deliver")
    if session.corrupted == "A":
        return (corrupted_out, None if bit else out_b, bit)
    return (None if bit else out_a, corrupted_out, bit)


def ideal_compute_classical(session: IdealSession, in_a, in_b, rng,
                            abort_decider: Optional[Callable] = None):
    """Classical-functionality variant of ideal_compute."""
    fn: ClassicalFunctionality = session.functionality
    session.consume_honest_input()
    if session.corrupted == "A" and session.extracted_input is not None:
        in_a = session.extracted_input
    if session.corrupted == "B" and session.extracted_input is not None:
        in_b = session.extracted_input
    out_a, out_b = fn.run(in_a, in_b, rng)
    session.events.append("compute")
    if session.corrupted is None:
        return out_a, out_b, 0
    corrupted_out = out_a if session.corrupted == "A" else out_b
    if session.programmed_output is not None:
        corrupted_out = session.programmed_output
    bit = 0
    if abort_decider is not None:
        bit = int(abort_decider(corrupted_out))
    session.abort_bit = bit
    session.events.append("abort" if bit else "deliver")
    if session.corrupted == "A":
        return (corrupted_out, None if bit else out_b, bit)
    return (None if bit else out_a, corrupted_out, bit)
