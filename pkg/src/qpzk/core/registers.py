"""Named multi-qubit register layouts.

A layout is an ordered list of (name, qubit count) pairs. The first register
owns the most significant qubits of the state index, matching the usual
Kronecker-product ordering.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from qpzk.errors import QubitCapExceededError, RegisterError

DEFAULT_QUBIT_CAP = 14
CAP_ENV_VAR = "QPZK_QUBIT_CAP"


def qubit_cap() -> int:
    """Active qubit cap: the environment override, else the default of 14."""
    raw = os.environ.get(CAP_ENV_VAR)
    if raw is None:
        return DEFAULT_QUBIT_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise QubitCapExceededError(
            f"{CAP_ENV_VAR}={raw!r} is not an integer"
        ) from exc
    if cap < 1:
        raise QubitCapExceededError(f"{CAP_ENV_VAR} must be >= 1, got {cap}")
    return cap


@dataclass(frozen=True)
class RegisterLayout:
    """Ordered named registers over a dense qubit array.

    Invariants: names unique, every register has >= 1 qubit, and the total
    qubit count stays within the configured cap.
    """

    registers: tuple[tuple[str, int], ...]
    _index: dict[str, tuple[int, int]] = field(
        init=False, repr=False, compare=False, hash=False, default=None
    )

    def __post_init__(self):
        regs = tuple((str(n), int(c)) for n, c in self.registers)
        object.__setattr__(self, "registers", regs)
        names = [n for n, _ in regs]
        if len(set(names)) != len(names):
            raise RegisterError(f"duplicate register names in {names}")
        if any(c < 1 for _, c in regs):
            raise RegisterError("every register needs at least one qubit")
        total = sum(c for _, c in regs)
        if total < 1:
            raise RegisterError("layout must contain at least one qubit")
        cap = qubit_cap()
        if total > cap:
            raise QubitCapExceededError(
                f"layout needs {total} qubits, cap is {cap} "
                f"(override with {CAP_ENV_VAR})"
            )
        # Precompute (offset, count) per name in declaration order.
        index: dict[str, tuple[int, int]] = {}
        offset = 0
        for name, count in regs:
            index[name] = (offset, count)
            offset += count
        object.__setattr__(self, "_index", index)

    @classmethod
    def of(cls, *pairs: tuple[str, int]) -> "RegisterLayout":
        return cls(tuple(pairs))

    @classmethod
    def single(cls, name: str, qubits: int) -> "RegisterLayout":
        return cls(((name, qubits),))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.registers)

    @property
    def total_qubits(self) -> int:
        return sum(c for _, c in self.registers)

    @property
    def dim(self) -> int:
        return 2 ** self.total_qubits

    def qubits_of(self, name: str) -> list[int]:
        """Absolute qubit positions of a register (0 = most significant)."""
        if name not in self._index:
            raise RegisterError(f"unknown register {name!r}; have {self.names}")
        offset, count = self._index[name]
        return list(range(offset, offset + count))

    def qubits_of_all(self, names) -> list[int]:
        """Concatenated qubit positions for several registers, in given order."""
        out: list[int] = []
        for name in names:
            out.extend(self.qubits_of(name))
        return out

    def size_of(self, name: str) -> int:
        if name not in self._index:
            raise RegisterError(f"unknown register {name!r}; have {self.names}")
        return self._index[name][1]

    def concat(self, other: "RegisterLayout") -> "RegisterLayout":
        """Layout of self followed by other; names must not collide."""
        overlap = set(self.names) & set(other.names)
        if overlap:
            raise RegisterError(f"register name collision: {sorted(overlap)}")
        return RegisterLayout(self.registers + other.registers)

    def drop(self, names) -> "RegisterLayout":
        """Layout with the given registers removed, order preserved."""
        names = set(names)
        unknown = names - set(self.names)
        if unknown:
            raise RegisterError(f"unknown registers {sorted(unknown)}")
        kept = tuple((n, c) for n, c in self.registers if n not in names)
        if not kept:
            raise RegisterError("cannot drop every register")
        return RegisterLayout(kept)
