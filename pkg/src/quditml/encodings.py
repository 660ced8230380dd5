"""Feature rescaling and the non-entangled qudit encodings.

Three product-state encodings map K rescaled features onto N qudits of
dimension d:

* amplitude (``nae``): d-1 features per qudit steer a chain of real
  subspace rotations, giving amplitudes cos/sin ladders.
* phase (``npe``): d-1 features per qudit enter as relative phases on a
  uniform superposition.
* compact (``nce``): 2(d-1) features per qudit, the amplitude ladder plus
  a phase on every level above zero. This is the densest non-entangled
  assignment possible.

The feature pipeline is: raw data -> rescale to [pi/4, 3pi/4] -> either a
feature permutation (fixed mode) or a trainable affine map phi = W x + b
(optimized mode, permutation forced to identity) -> scheme equations.
Unused trailing slots on the last qudit are pinned at pi/4, the rescale-range
minimum, which keeps every sine factor away from zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import ParamCircuit, fixed, slotted
from .state import QuditState
from . import gates

PAD_ANGLE = np.pi / 4

_SCHEMES = ("nae", "npe", "nce")


@dataclass(frozen=True)
class RescaleMap:
    """Per-feature affine map sending the fitted min to ``lo`` and max to ``hi``.

    Values outside the fitted range extrapolate linearly; there is no
    clamping, so test points may land slightly outside [lo, hi].
    """

    mins: np.ndarray
    maxs: np.ndarray
    lo: float = np.pi / 4
    hi: float = 3 * np.pi / 4

    @classmethod
    def fit(cls, features, lo=np.pi / 4, hi=3 * np.pi / 4):
        feats = np.asarray(features, dtype=float)
        if feats.ndim != 2:
            raise ValueError("fit expects a 2-D array of training rows")
        mins = feats.min(axis=0)
        maxs = feats.max(axis=0)
        degenerate = np.flatnonzero(maxs == mins)
        if degenerate.size:
            raise ValueError(f"degenerate features (min == max) at columns {degenerate.tolist()}")
        return cls(mins=mins, maxs=maxs, lo=float(lo), hi=float(hi))


def rescale(raw, rmap):
    """Apply a fitted RescaleMap to one feature vector or a batch of rows."""
    x = np.asarray(raw, dtype=float)
    if x.shape[-1] != rmap.mins.shape[0]:
        raise ValueError(f"expected {rmap.mins.shape[0]} features, got {x.shape[-1]}")
    return rmap.lo + (x - rmap.mins) / (rmap.maxs - rmap.mins) * (rmap.hi - rmap.lo)


def capacity_per_qudit(scheme, dim):
    if scheme == "nce":
        return 2 * (dim - 1)
    return dim - 1


def qudits_required(scheme, dim, num_features):
    """Number of qudits needed to hold ``num_features`` under a scheme."""
    scheme = scheme.lower()
    if scheme not in _SCHEMES:
        raise ValueError(f"unknown encoding scheme {scheme!r}")
    if dim < 2 or num_features < 1:
        raise ValueError("need dim >= 2 and at least one feature")
    cap = capacity_per_qudit(scheme, dim)
    return -(-num_features // cap)


@dataclass(frozen=True, eq=False)
class EncodingSpec:
    """Scheme tag, qudit dimension, feature count, and the feature pipeline.

    ``permutation`` lists, in encoding-slot order, which source feature each
    slot receives. A full-length permutation reorders all features; a shorter
    one selects an ordered subset (the one-qubit classifier encodes 2 of 4).
    ``affine`` is the trainable (W, b) pair; when present the permutation must
    be the identity, since W absorbs any reordering.
    """

    scheme: str
    dim: int
    num_features: int
    permutation: tuple[int, ...] | None = None
    affine: tuple[np.ndarray, np.ndarray] | None = None

    def __post_init__(self):
        object.__setattr__(self, "scheme", self.scheme.lower())
        if self.scheme not in _SCHEMES:
            raise ValueError(f"unknown encoding scheme {self.scheme!r}")
        if self.dim < 2:
            raise ValueError("qudit dimension must be at least 2")
        if self.num_features < 1:
            raise ValueError("need at least one feature")
        perm = self.permutation
        if perm is None:
            perm = tuple(range(self.num_features))
        else:
            perm = tuple(int(p) for p in perm)
        if len(set(perm)) != len(perm) or len(perm) > self.num_features:
            raise ValueError(f"permutation {perm} must be distinct indices, at most one per feature")
        if any(p < 0 or p >= self.num_features for p in perm):
            raise ValueError(f"permutation {perm} indexes outside {self.num_features} features")
        object.__setattr__(self, "permutation", perm)
        if self.affine is not None:
            w = np.asarray(self.affine[0], dtype=float)
            b = np.asarray(self.affine[1], dtype=float)
            k = self.num_features
            if w.shape != (k, k) or b.shape != (k,):
                raise ValueError(f"affine map must be a {k}x{k} matrix and length-{k} vector")
            if perm != tuple(range(k)):
                raise ValueError("the affine map replaces feature ordering; permutation must be identity")
            object.__setattr__(self, "affine", (w, b))

    @property
    def encoded_features(self):
        return len(self.permutation)

    @property
    def num_qudits(self):
        return qudits_required(self.scheme, self.dim, self.encoded_features)

    def with_affine(self, w, b):
        return EncodingSpec(self.scheme, self.dim, self.num_features, None, (w, b))


def affine_features(x, w, b):
    """phi = W x + b for one vector or a batch of rows; range unconstrained."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    b = np.asarray(b, dtype=float)
    k = x.shape[-1]
    if w.shape != (k, k) or b.shape != (k,):
        raise ValueError(f"affine shapes {w.shape}, {b.shape} do not match {k} features")
    return x @ w.T + b


def encoding_angles(features, spec):
    """Gate angles for a batch of rescaled feature rows, shape (n, slots).

    Applies the spec's permutation or affine map and pads the last qudit's
    unused slots with PAD_ANGLE, so the result always has
    ``num_qudits * capacity`` columns in qudit-major order.
    """
    x = np.atleast_2d(np.asarray(features, dtype=float))
    if x.shape[1] != spec.num_features:
        raise ValueError(f"expected {spec.num_features} features, got {x.shape[1]}")
    if spec.affine is not None:
        phi = affine_features(x, *spec.affine)
    else:
        phi = x[:, spec.permutation]
    slots = spec.num_qudits * capacity_per_qudit(spec.scheme, spec.dim)
    if phi.shape[1] < slots:
        pad = np.full((phi.shape[0], slots - phi.shape[1]), PAD_ANGLE)
        phi = np.concatenate([phi, pad], axis=1)
    return phi


def _amplitude_ladder(ang):
    """Batched cos/sin ladder: (n, d-1) angles -> (n, d) real amplitudes."""
    c, s = np.cos(ang), np.sin(ang)
    running = np.cumprod(s, axis=1)
    out = np.empty((ang.shape[0], ang.shape[1] + 1))
    out[:, 0] = c[:, 0]
    out[:, 1:-1] = running[:, :-1] * c[:, 1:]
    out[:, -1] = running[:, -1]
    return out


def _qudit_amplitudes(ang, scheme, dim):
    """Single-qudit amplitudes for a batch of per-qudit angle rows."""
    if scheme == "nae":
        return _amplitude_ladder(ang).astype(complex)
    if scheme == "npe":
        out = np.empty((ang.shape[0], dim), dtype=complex)
        out[:, 0] = 1.0
        out[:, 1:] = np.exp(1j * ang)
        return out / np.sqrt(dim)
    amps = _amplitude_ladder(ang[:, : dim - 1]).astype(complex)
    amps[:, 1:] *= np.exp(1j * ang[:, dim - 1 :])
    return amps


def encode_batch(features, spec):
    """Encoded statevectors for a batch of rescaled rows, shape (n, dim**N)."""
    ang = encoding_angles(features, spec)
    d, cap = spec.dim, capacity_per_qudit(spec.scheme, spec.dim)
    out = None
    for q in range(spec.num_qudits):
        amps = _qudit_amplitudes(ang[:, q * cap : (q + 1) * cap], spec.scheme, d)
        if out is None:
            out = amps
        else:
            out = (out[:, :, None] * amps[:, None, :]).reshape(out.shape[0], -1)
    return out


def encode_state(features, spec):
    """Encode one rescaled feature vector into a product QuditState."""
    x = np.asarray(features, dtype=float)
    if x.ndim != 1:
        raise ValueError("encode_state takes a single feature vector; use encode_batch for rows")
    amps = encode_batch(x[None, :], spec)[0]
    return QuditState(amps, spec.dim, spec.num_qudits)


def encoding_circuit(spec):
    """Gate realization of the encoding: circuit(|0...0>) == encode_state.

    The circuit's parameters are the post-pipeline angles in qudit-major
    order, exactly what ``encoding_angles`` produces.
    """
    d = spec.dim
    cap = capacity_per_qudit(spec.scheme, d)
    gate_list = []
    for q in range(spec.num_qudits):
        base = q * cap
        if spec.scheme in ("nae", "nce"):
            for j in range(d - 1):
                gate_list.append(slotted(_ry_builder(d, j), base + j, q, scale=2.0))
            if spec.scheme == "nce":
                for j in range(1, d):
                    gate_list.append(slotted(_phase_builder(d, j), base + d - 2 + j, q))
        else:
            gate_list.append(fixed(gates.fourier(d), q))
            for j in range(1, d):
                gate_list.append(slotted(_phase_builder(d, j), base + j - 1, q))
    return ParamCircuit(d, spec.num_qudits, gate_list, spec.num_qudits * cap)


def _ry_builder(d, level):
    def build(theta):
        return gates.subspace_ry(d, level, theta)

    return build


def _phase_builder(d, level):
    def build(theta):
        return gates.level_phase(d, level, theta)

    return build


def hardware_encoding_circuit():
    """The transmon-native qutrit compact encoder Z2 Z1 X'12 X'01.

    Up to a global phase this prepares the same state as the qutrit ``nce``
    circuit; ``hardware_encoding_params`` gives the angle relabeling.
    """
    gate_list = [
        slotted(gates.xp01, 0, 0),
        slotted(gates.xp12, 1, 0),
        slotted(gates.z1, 2, 0),
        slotted(gates.z2, 3, 0),
    ]
    return ParamCircuit(3, 1, gate_list, 4)


def hardware_encoding_params(nce_angles):
    """Map qutrit ``nce`` angles to the X'-based hardware encoder's angles.

    The primed rotations carry extra subspace phases relative to plain Ry
    rotations; absorbing them into the Z angles makes the two encoders
    prepare identical states up to a global phase.
    """
    y = np.asarray(nce_angles, dtype=float)
    if y.shape[-1] != 4:
        raise ValueError("the qutrit compact encoding uses exactly 4 angles")
    out = np.empty_like(y)
    out[..., 0] = 2 * y[..., 0]
    out[..., 1] = 2 * y[..., 1]
    out[..., 2] = y[..., 2] - y[..., 1] + np.pi / 2
    out[..., 3] = y[..., 3] - y[..., 1] - np.pi
    return out
