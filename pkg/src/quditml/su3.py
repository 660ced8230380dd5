"""Exact decomposition of 3x3 unitaries into the general-rotation gate sets.

Any U in SU(3) can be diagonalized by two-level Givens-style T matrices:
T23(b3, p3) T12(b2, p2) U T12(b1, p1)^dagger = D with unit-modulus diagonal
entries e^{i gamma_j}. Solving the resulting phase bookkeeping gives closed
forms for the eight angles of either general-rotation flavour, plus a global
phase. The hardware form carries a leading virtual Z1 that drops out of any
immediate Z-basis measurement; ``hardware_to_rl_prime`` re-indexes the
angles into the measurement-equivalent primed-rotation sequence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gates
from .ansatz import rl_gate, rl_prime_gate
from .state import ACCUM_TOL, _as_matrix, stream

_FORMS = ("theoretical", "hardware")


def t12(beta, phi):
    c, s = np.cos(beta), np.sin(beta)
    e = np.exp(1j * phi)
    return np.array([[e * c, -s, 0], [e * s, c, 0], [0, 0, 1]])


def t23(beta, phi):
    c, s = np.cos(beta), np.sin(beta)
    e = np.exp(1j * phi)
    return np.array([[1, 0, 0], [0, e * c, -s], [0, e * s, c]])


def _unit_angle(num, den, tol=1e-12):
    """Phase of num/den for unit-circle ratios; 0 when either side vanishes."""
    if abs(num) < tol or abs(den) < tol:
        return 0.0
    return float(np.angle(num * np.conj(den)))


def _elimination_angles(u, tol=1e-12):
    """T-matrix angles that diagonalize ``u`` (assumed special unitary).

    The first T12 clears the (3,1) entry from the right, the second clears
    (2,1) from the left, and the T23 clears (3,2). The 2x2 minors of the
    first column block determine the left-side angles; when those minors all
    vanish the first column is already (.,.,0) with a zero (3,2) target, and
    the angles reduce to a plain two-level rotation read off column one.
    """
    a31, a32 = u[2, 0], u[2, 1]
    m1 = u[1, 0] * u[0, 1] - u[0, 0] * u[1, 1]
    m2 = u[2, 0] * u[0, 1] - u[0, 0] * u[2, 1]
    m3 = u[2, 0] * u[1, 1] - u[1, 0] * u[2, 1]
    beta1 = float(np.arctan2(abs(a31), abs(a32)))
    phi1 = _unit_angle(a31, a32, tol)
    if np.hypot(abs(m2), abs(m3)) < tol:
        beta2 = float(np.arctan2(abs(u[1, 0]), abs(u[0, 0])))
        phi2 = _unit_angle(-u[1, 0], u[0, 0], tol)
        beta3, phi3 = 0.0, 0.0
    else:
        beta2 = float(np.arctan2(abs(m3), abs(m2)))
        phi2 = _unit_angle(-m3, m2, tol)
        beta3 = float(np.arctan2(np.hypot(abs(m2), abs(m3)), abs(m1)))
        phi3 = _unit_angle(-m2, m1, tol)
    return (beta1, beta2, beta3), (phi1, phi2, phi3)


@dataclass(frozen=True)
class Su3Decomposition:
    """Angles reconstructing a unitary as exp(i g) times a gate product."""

    form: str
    beta: tuple[float, float, float]
    phi: tuple[float, float, float]
    gamma: tuple[float, float, float]
    thetas: np.ndarray
    global_phase: float

    def reconstruct(self):
        if self.form == "theoretical":
            product = rl_gate(self.thetas)
        else:
            t = self.thetas
            product = (
                gates.z1(t[7]) @ gates.xp01(t[6]) @ gates.z2(t[5]) @ gates.xp12(t[4])
                @ gates.z2(t[3]) @ gates.z1(t[2]) @ gates.xp01(t[1]) @ gates.z1(t[0])
            )
        return np.exp(1j * self.global_phase) * product


def decompose_su3(u, form="theoretical", tol=ACCUM_TOL):
    """Angles of either general-rotation form for a 3x3 unitary.

    A U(3) input is accepted: a cube root of its determinant phase is folded
    into the returned global phase. Reconstruction satisfies
    max|U - exp(i g) * product| < 1e-9.
    """
    if form not in _FORMS:
        raise ValueError(f"unknown decomposition form {form!r}")
    u = _as_matrix(u)
    if u.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {u.shape}")
    dev = np.max(np.abs(u @ u.conj().T - np.eye(3)))
    if dev > tol:
        raise ValueError(f"matrix is not unitary: max |U U+ - I| = {dev:.3e}")
    det_phase = float(np.angle(np.linalg.det(u))) / 3.0
    v = u * np.exp(-1j * det_phase)

    (b1, b2, b3), (p1, p2, p3) = _elimination_angles(v)
    d = t23(b3, p3) @ t12(b2, p2) @ v @ t12(b1, p1).conj().T
    g1, g2, g3 = (float(np.angle(d[j, j])) for j in range(3))

    if form == "theoretical":
        thetas = np.array([
            -np.pi / 2 - p1,
            2 * b1,
            (-4 * g1 + 2 * g2 + 2 * g3 - p1 + p2 - 2 * p3) / 3,
            (-4 * g1 - 4 * g2 + 8 * g3 - 4 * p1 + p2 - 2 * p3) / 6 - 3 * np.pi / 4,
            -2 * b3,
            p2 / 2 + p3 + 3 * np.pi / 4,
            -2 * b2,
            p2 + np.pi / 2,
        ])
        phase = (g1 + g2 + g3 + p1 - p2 - p3) / 3
    else:
        thetas = np.array([
            -p1 - np.pi / 2,
            2 * b1,
            -g1 + g2 + b3 - p3,
            -g1 + g3 + b1 + b3 - p1 - p3 - np.pi,
            -2 * b3,
            -b2 + p2 + p3 + np.pi,
            -2 * b2,
            p2 + np.pi / 2,
        ])
        phase = g1 - b1 + b2 + p1 - p2
    return Su3Decomposition(
        form=form,
        beta=(b1, b2, b3),
        phi=(p1, p2, p3),
        gamma=(g1, g2, g3),
        thetas=thetas,
        global_phase=phase + det_phase,
    )


def hardware_to_rl_prime(thetas):
    """Re-index hardware decomposition angles into the primed-rotation sequence.

    The hardware product carries a leading virtual Z1 that cannot change
    Z-basis probabilities, so dropping it and inserting an idle Z1 slot gives
    ``rl_prime_gate`` parameters with identical measurement statistics.
    """
    t = np.asarray(thetas, dtype=float)
    if t.shape != (8,):
        raise ValueError("expected 8 hardware decomposition angles")
    return np.array([t[0], t[1], t[2], t[3], t[4], t[5], 0.0, t[6]])


def verify_rl_equiv(theta, num_states=1000, seed=0):
    """Max Z-basis probability gap between a rotation and its hardware twin.

    Decomposes ``rl_gate(theta)`` into the hardware form, maps the angles to
    the primed-rotation sequence, and compares measurement distributions over
    random input states. The contract is a gap below 1e-9.
    """
    v = rl_gate(np.asarray(theta, dtype=float))
    dec = decompose_su3(v, form="hardware")
    w = rl_prime_gate(hardware_to_rl_prime(dec.thetas))
    rng = stream(seed, 7)
    z = rng.standard_normal((num_states, 3)) + 1j * rng.standard_normal((num_states, 3))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    pv = np.abs(z @ v.T) ** 2
    pw = np.abs(z @ w.T) ** 2
    return float(np.max(np.abs(pv - pw)))
