"""Parallel repetition of 3-message protocols.

The closed form multiplies soundness errors; the executable form tensors k
copies of a 3-message protocol into one, with a fresh collector qubit that
records the AND of the per-copy accept bits so acceptance stays a
first-workspace-qubit measurement.
"""

from __future__ import annotations

import numpy as np

from qpzk.core import linalg
from qpzk.core.operators import X, controlled
from qpzk.core.registers import RegisterLayout, qubit_cap
from qpzk.core.states import PureState, tensor
from qpzk.errors import ConfigError
from qpzk.protocol import InteractiveProtocol, initial_workspace_state


def repeated_soundness(zeta: float, k: int) -> float:
    """Soundness error of the k-fold parallel repetition: zeta^k."""
    if k < 1:
        raise ConfigError("repetition count must be at least 1")
    if not 0.0 <= zeta <= 1.0:
        raise ConfigError("base soundness must lie in [0, 1]")
    return zeta ** k


def parallel_repeat(base: InteractiveProtocol, k: int) -> InteractiveProtocol:
    """Executable k-fold tensor product of a 3-message protocol.

    Registers: R' = k R-blocks, W' = collector qubit + k W-blocks,
    M' = k M-blocks. The second verifier unitary runs every copy's V_2 and
    then ANDs the per-copy accept qubits into the collector.
    """
    if base.rounds != 2:
        raise ConfigError("executable repetition takes a 3-message protocol")
    if k == 1:
        return base
    r, w, m = base.r_qubits, base.w_qubits, base.m_qubits
    total = k * (r + w + m) + 1
    if total > qubit_cap():
        raise ConfigError("repeated protocol exceeds the qubit cap")

    wp = 1 + k * w
    mp = k * m
    rp = k * r
    n_loc_v = wp + mp  # local wires of a verifier unitary (W', M')

    def copy_wires(block: int, size: int, offset: int) -> list[int]:
        return list(range(offset + block * size, offset + (block + 1) * size))

    v_first = np.eye(2 ** n_loc_v, dtype=complex)
    v_second = np.eye(2 ** n_loc_v, dtype=complex)
    for j in range(k):
        wj = copy_wires(j, w, 1)
        mj = copy_wires(j, m, wp)
        v_first = linalg.embed(base.verifier_unitaries[0], wj + mj, n_loc_v) @ v_first
        v_second = linalg.embed(base.verifier_unitaries[1], wj + mj, n_loc_v) @ v_second
    # AND of the k per-copy accept qubits into the collector (wire 0).
    and_gate = _multi_controlled_x(k)
    accept_wires = [1 + j * w for j in range(k)]
    v_second = linalg.embed(and_gate, accept_wires + [0], n_loc_v) @ v_second

    n_loc_p = rp + mp
    p_first = np.eye(2 ** n_loc_p, dtype=complex)
    p_second = np.eye(2 ** n_loc_p, dtype=complex)
    for j in range(k):
        rj = copy_wires(j, r, 0)
        mj = copy_wires(j, m, rp)
        p_first = linalg.embed(base.prover_unitaries[0], rj + mj, n_loc_p) @ p_first
        p_second = linalg.embed(base.prover_unitaries[1], rj + mj, n_loc_p) @ p_second

    psi_w = initial_workspace_state(base)
    expected = np.kron(np.kron(linalg.basis_vector(0, 2 ** r), psi_w),
                       linalg.basis_vector(0, 2 ** m))
    overlap = abs(np.vdot(expected, base.initial.amplitudes))
    if abs(overlap - 1.0) > 1e-9:
        raise ConfigError("repetition expects zero-initialized R and M registers")
    psi_v_rep = np.array([1.0], dtype=complex)
    for _ in range(k):
        psi_v_rep = np.kron(psi_v_rep, psi_w)
    psi_v_full = np.kron(linalg.basis_vector(0, 2), psi_v_rep)
    lay_w = RegisterLayout.single("W", wp)
    return InteractiveProtocol.from_verifier_start(
        PureState(psi_v_full, lay_w), rp, mp, [v_first, v_second],
        [p_first, p_second],
    )


def _multi_controlled_x(controls: int) -> np.ndarray:
    return controlled(X, control_qubits=controls)

