"""Classifier circuit constructions.

Tree-tensor-network style ansaetze for one and two qudits, the 15-parameter
universal two-qubit circuit, and the two flavours of general single-qutrit
rotation: ``rl_gate`` built from Gell-Mann subspace rotations, and
``rl_prime_gate`` built from the hardware-native primed-X and virtual-Z set.
Parameter slots are numbered in application order (the first gate acting on
the state reads slot 0).
"""

from __future__ import annotations

import numpy as np

from . import gates
from .circuit import CircuitGate, ParamCircuit, fixed, slotted


def rl_gate(theta):
    """General single-qutrit rotation from subspace z/x rotations.

    Eight angles, applied to the state in index order:
    Rz01, Rx01, Rz01, Rz12, Rx12, Rz12, Rx01, Rz01.
    """
    t = np.asarray(theta, dtype=float)
    if t.shape != (8,):
        raise ValueError("rl_gate takes exactly 8 angles")
    return (
        gates.rz01(t[7]) @ gates.rx01(t[6]) @ gates.rz12(t[5]) @ gates.rx12(t[4])
        @ gates.rz12(t[3]) @ gates.rz01(t[2]) @ gates.rx01(t[1]) @ gates.rz01(t[0])
    )


def rl_prime_gate(theta):
    """Hardware form of the general qutrit rotation, X' and virtual-Z only."""
    t = np.asarray(theta, dtype=float)
    if t.shape != (8,):
        raise ValueError("rl_prime_gate takes exactly 8 angles")
    return (
        gates.xp01(t[7]) @ gates.z1(t[6]) @ gates.z2(t[5]) @ gates.xp12(t[4])
        @ gates.z2(t[3]) @ gates.z1(t[2]) @ gates.xp01(t[1]) @ gates.z1(t[0])
    )


def _qubit_r(start, qudit):
    """General SU(2) rotation R = Rz Rx Rz, three slots from ``start``."""
    return [
        slotted(gates.rz, start, qudit),
        slotted(gates.rx, start + 1, qudit),
        slotted(gates.rz, start + 2, qudit),
    ]


def _qutrit_r(start, qudit):
    """Hardware-form general qutrit rotation, eight slots from ``start``."""
    builders = [gates.z1, gates.xp01, gates.z1, gates.z2, gates.xp12, gates.z2, gates.z1, gates.xp01]
    return [slotted(b, start + i, qudit) for i, b in enumerate(builders)]


def _cnot_reversed():
    """CNOT with control on the second (least significant) qubit."""
    m = np.eye(4, dtype=complex)
    m[[1, 3]] = m[[3, 1]]
    return m


def ttn_one_qudit(dim):
    """Single general rotation block: 3 parameters for d=2, 8 for d=3."""
    if dim == 2:
        return ParamCircuit(2, 1, _qubit_r(0, 0), 3)
    if dim == 3:
        return ParamCircuit(3, 1, _qutrit_r(0, 0), 8)
    raise ValueError(f"unsupported qudit dimension {dim}")


def ttn_two_qudit(dim):
    """Rotation on each qudit, an entangler, then a rotation on the measured qudit.

    The entangler is CNOT for qubits and SUM for qutrits, controlled by
    qudit 0; the final rotation acts on qudit 1, whose marginal carries the
    class prediction. 9 parameters for qubits, 24 for qutrits.
    """
    if dim == 2:
        gate_list = _qubit_r(0, 0) + _qubit_r(3, 1)
        gate_list.append(fixed(gates.cnot(), 0, 1))
        gate_list += _qubit_r(6, 1)
        return ParamCircuit(2, 2, gate_list, 9)
    if dim == 3:
        gate_list = _qutrit_r(0, 0) + _qutrit_r(8, 1)
        gate_list.append(fixed(gates.sum_gate(), 0, 1))
        gate_list += _qutrit_r(16, 1)
        return ParamCircuit(3, 2, gate_list, 24)
    raise ValueError(f"unsupported qudit dimension {dim}")


def universal_two_qubit():
    """The 15-parameter circuit expressing any two-qubit unitary.

    Three CNOTs with interleaved single-qubit rotations: general rotations on
    both qubits, CNOT(1->0), Rz on qubit 0 with Ry on qubit 1, CNOT(0->1),
    Ry on qubit 1, CNOT(1->0), then general rotations on both qubits again.
    """
    rev = _cnot_reversed()
    gate_list = _qubit_r(0, 0) + _qubit_r(3, 1)
    gate_list.append(fixed(rev, 0, 1))
    gate_list.append(slotted(gates.rz, 6, 0))
    gate_list.append(slotted(gates.ry, 7, 1))
    gate_list.append(fixed(gates.cnot(), 0, 1))
    gate_list.append(slotted(gates.ry, 8, 1))
    gate_list.append(fixed(rev, 0, 1))
    gate_list += _qubit_r(9, 0) + _qubit_r(12, 1)
    return ParamCircuit(2, 2, gate_list, 15)
