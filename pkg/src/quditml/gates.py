"""Qubit and qutrit gate matrices, plus the generic-d pieces used by encodings.

Qutrit subspace rotations are exponentials of Gell-Mann generators restricted
to the (0,1) or (1,2) two-level subspace. The primed X gates and the subspace
Hadamards follow the hardware-native construction X'_{uv}(t) = H_v Z_v(t) H_v,
which differs from the plain subspace rotation by subspace-dependent phases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .state import ACCUM_TOL, UnitaryMatrix, _as_matrix


# ---------------------------------------------------------------------------
# qubit gates

def rx(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta):
    return np.array([[np.exp(-1j * theta / 2), 0], [0, np.exp(1j * theta / 2)]])


def zphase(theta):
    """Qubit phase gate diag(1, e^{i theta})."""
    return np.array([[1, 0], [0, np.exp(1j * theta)]])


def hadamard():
    return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def cnot():
    """Control on the first (most significant) qubit."""
    m = np.eye(4, dtype=complex)
    m[[2, 3]] = m[[3, 2]]
    return m


# ---------------------------------------------------------------------------
# qutrit gates

def rx01(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s, 0], [-1j * s, c, 0], [0, 0, 1]])


def rx12(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[1, 0, 0], [0, c, -1j * s], [0, -1j * s, c]])


def ry01(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]], dtype=complex)


def ry12(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[1, 0, 0], [0, c, -s], [0, s, c]], dtype=complex)


def rz01(theta):
    return np.diag([np.exp(-1j * theta / 2), np.exp(1j * theta / 2), 1.0 + 0j])


def rz12(theta):
    # Sign convention matches rz01: earlier level gets the negative phase.
    return np.diag([1.0 + 0j, np.exp(-1j * theta / 2), np.exp(1j * theta / 2)])


def z1(theta):
    return np.diag([1.0 + 0j, np.exp(1j * theta), 1.0 + 0j])


def z2(theta):
    return np.diag([1.0 + 0j, 1.0 + 0j, np.exp(1j * theta)])


def h1():
    """Subspace Hadamard on levels (0,1): Z1(pi) Ry01(-pi/2)."""
    return z1(np.pi) @ ry01(-np.pi / 2)


def h2():
    """Subspace Hadamard on levels (1,2): Z2(pi) Ry12(-pi/2)."""
    return z2(np.pi) @ ry12(-np.pi / 2)


def h3():
    """The full qutrit Hadamard (three-dimensional discrete Fourier matrix)."""
    return fourier(3)


def xp01(theta):
    """Hardware-native X rotation on (0,1): H1 Z1(theta) H1."""
    h = h1()
    return h @ z1(theta) @ h


def xp12(theta):
    """Hardware-native X rotation on (1,2): H2 Z2(theta) H2."""
    h = h2()
    return h @ z2(theta) @ h


def sum_gate():
    """Two-qutrit SUM, |a,b> -> |a,(a+b) mod 3>, control on the first qutrit."""
    m = np.zeros((9, 9), dtype=complex)
    for a in range(3):
        for b in range(3):
            m[3 * a + (a + b) % 3, 3 * a + b] = 1.0
    return m


# ---------------------------------------------------------------------------
# generic d-level pieces for the qudit encoding circuits

def subspace_ry(d, level, theta):
    """Real rotation in the (level, level+1) subspace of a d-level system."""
    if not 0 <= level < d - 1:
        raise ValueError(f"subspace ({level},{level + 1}) out of range for dimension {d}")
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    m = np.eye(d, dtype=complex)
    m[level, level] = c
    m[level, level + 1] = -s
    m[level + 1, level] = s
    m[level + 1, level + 1] = c
    return m


def level_phase(d, level, theta):
    """Phase e^{i theta} on a single level of a d-level system."""
    if not 0 <= level < d:
        raise ValueError(f"level {level} out of range for dimension {d}")
    diag = np.ones(d, dtype=complex)
    diag[level] = np.exp(1j * theta)
    return np.diag(diag)


def fourier(d):
    """The d-dimensional discrete Fourier matrix, (1/sqrt d) w^{jk}."""
    j, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    return np.exp(2j * np.pi * j * k / d) / np.sqrt(d)


# ---------------------------------------------------------------------------
# tagged gate construction

_PARAMETRIC = {
    "Rx": rx, "Ry": ry, "Rz": rz, "Zphase": zphase,
    "Rx01": rx01, "Rx12": rx12, "Ry01": ry01, "Ry12": ry12,
    "Rz01": rz01, "Rz12": rz12, "Z1": z1, "Z2": z2,
    "Xp01": xp01, "Xp12": xp12,
}

_FIXED = {
    "H": hadamard, "H1": h1, "H2": h2, "H3": h3,
    "CNOT": cnot, "SUM": sum_gate,
}

GATE_TAGS = frozenset(_PARAMETRIC) | frozenset(_FIXED)


@dataclass(frozen=True)
class GateId:
    """A gate tag plus its angle, when the tag is parameterized."""

    tag: str
    angle: float | None = None

    def __post_init__(self):
        if self.tag not in GATE_TAGS:
            raise ValueError(f"unknown gate tag {self.tag!r}")
        if self.tag in _PARAMETRIC:
            if self.angle is None:
                raise ValueError(f"gate {self.tag} requires an angle")
            if not np.isfinite(self.angle):
                raise ValueError(f"gate {self.tag} angle must be finite, got {self.angle!r}")
        elif self.angle is not None:
            raise ValueError(f"gate {self.tag} takes no angle")


def build_gate(gate_id):
    """Construct the matrix for a GateId, validated as a UnitaryMatrix."""
    if gate_id.tag in _PARAMETRIC:
        m = _PARAMETRIC[gate_id.tag](gate_id.angle)
    else:
        m = _FIXED[gate_id.tag]()
    return UnitaryMatrix(m, tol=1e-12)


def eigenvalue_count(gate, tol=1e-8):
    """Number of distinct eigenvalues of a unitary, clustered within tol.

    Eigenvalues of a unitary lie on the unit circle, so clustering sorts by
    angle and merges neighbours, including across the branch cut at pi.
    """
    u = _as_matrix(gate)
    dev = np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0])))
    if dev > ACCUM_TOL:
        raise ValueError(f"matrix is not unitary: max |U U+ - I| = {dev:.3e}")
    w = np.linalg.eigvals(u)
    w = w[np.argsort(np.angle(w))]
    clusters = 1 + sum(1 for i in range(1, len(w)) if abs(w[i] - w[i - 1]) > tol)
    if clusters > 1 and abs(w[0] - w[-1]) <= tol:
        clusters -= 1
    return clusters
