"""Statevectors, density matrices, and seeded measurement sampling.

The register convention is big-endian: qudit 0 is the most significant digit
of the computational-basis index, matching circuit diagrams read top to
bottom. All objects validate their defining algebraic invariants on
construction, so downstream code can assume normalized states, Hermitian
trace-one density matrices, and unitary gate matrices.
"""

from __future__ import annotations

import numpy as np

# Tolerance for exact algebraic identities (norms, Hermiticity, unitarity).
ALGEBRA_TOL = 1e-10
# Tolerance for quantities that accumulate floating-point error.
ACCUM_TOL = 1e-8


def stream(seed, *path):
    """Return a deterministic RNG stream for a root seed and an integer path.

    Distinct paths give statistically independent counter-based (Philox)
    streams, so every trial, retry, and sampled pair can own a private
    generator that is reproducible from the master seed alone.
    """
    key = tuple(int(p) for p in path)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=key)))


def _as_matrix(gate):
    if isinstance(gate, UnitaryMatrix):
        return gate.entries
    return np.asarray(gate, dtype=complex)


class QuditState:
    """Normalized pure state of ``num_qudits`` d-level systems."""

    __slots__ = ("dim_per_qudit", "num_qudits", "amplitudes")

    def __init__(self, amplitudes, dim_per_qudit, num_qudits=None, tol=ALGEBRA_TOL):
        amps = np.asarray(amplitudes, dtype=complex)
        if amps.ndim != 1:
            raise ValueError("amplitudes must be a one-dimensional vector")
        d = int(dim_per_qudit)
        if d < 2:
            raise ValueError(f"qudit dimension must be at least 2, got {d}")
        if num_qudits is None:
            num_qudits = _infer_num_qudits(amps.size, d)
        n = int(num_qudits)
        if n < 1 or d**n != amps.size:
            raise ValueError(f"amplitude vector of length {amps.size} does not match {n} qudits of dimension {d}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > tol:
            raise ValueError(f"state norm {norm!r} deviates from 1 beyond tolerance {tol}")
        # Snap to exact unit norm so error cannot accumulate over long gate sequences.
        self.amplitudes = amps / norm
        self.dim_per_qudit = d
        self.num_qudits = n

    @classmethod
    def zero(cls, dim_per_qudit, num_qudits=1):
        """The all-zeros computational basis state."""
        return cls.basis(dim_per_qudit, num_qudits, 0)

    @classmethod
    def basis(cls, dim_per_qudit, num_qudits, index):
        amps = np.zeros(dim_per_qudit**num_qudits, dtype=complex)
        amps[index] = 1.0
        return cls(amps, dim_per_qudit, num_qudits)

    @property
    def probabilities(self):
        return np.abs(self.amplitudes) ** 2

    def overlap(self, other):
        """Complex inner product <self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __repr__(self):
        return f"QuditState(d={self.dim_per_qudit}, n={self.num_qudits})"


def _infer_num_qudits(size, d):
    n, total = 0, 1
    while total < size:
        total *= d
        n += 1
    if total != size:
        raise ValueError(f"length {size} is not a power of the qudit dimension {d}")
    return max(n, 1)


class UnitaryMatrix:
    """A square complex matrix validated to be unitary."""

    __slots__ = ("dim", "entries")

    def __init__(self, entries, tol=ALGEBRA_TOL):
        m = np.asarray(entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        dev = np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0])))
        if dev > tol:
            raise ValueError(f"matrix is not unitary: max |U U+ - I| = {dev:.3e}")
        self.entries = m
        self.dim = m.shape[0]

    def __matmul__(self, other):
        return UnitaryMatrix(self.entries @ _as_matrix(other))

    def __repr__(self):
        return f"UnitaryMatrix(dim={self.dim})"


class DensityMatrix:
    """Hermitian, positive-semidefinite, trace-one mixture of pure states."""

    __slots__ = ("dim", "entries")

    def __init__(self, entries, tol=ALGEBRA_TOL):
        m = np.asarray(entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > tol:
            raise ValueError("density matrix is not Hermitian within tolerance")
        if abs(np.trace(m) - 1.0) > tol:
            raise ValueError(f"density matrix trace {np.trace(m)!r} is not 1")
        # Symmetrize before the eigenvalue check; eigvalsh requires it anyway.
        m = (m + m.conj().T) / 2.0
        if np.linalg.eigvalsh(m).min() < -1e-9:
            raise ValueError("density matrix has an eigenvalue below -1e-9")
        self.entries = m
        self.dim = m.shape[0]

    @property
    def purity(self):
        return trace_product(self, self)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


class ShotSampler:
    """Seeded multinomial measurement sampler.

    A sampler owns a private RNG stream: two samplers built from the same
    seed produce identical count sequences. Not safe to share across
    concurrent tasks.
    """

    def __init__(self, rng_seed, shots):
        shots = int(shots)
        if shots < 1:
            raise ValueError("shots must be a positive integer")
        self.rng_seed = int(rng_seed)
        self.shots = shots
        self.rng = stream(rng_seed)

    def counts(self, probs):
        return sample_counts(probs, self)


def apply_gate(state, gate, targets):
    """Apply a unitary acting on the listed target qudits.

    ``gate`` must be a d^len(targets) square matrix; the remaining qudits are
    untouched. Targets are embedded in the order given, so a two-qudit gate's
    most significant digit is ``targets[0]``.
    """
    gate = _as_matrix(gate)
    targets = [int(t) for t in targets]
    d, n = state.dim_per_qudit, state.num_qudits
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate target indices in {targets}")
    if any(t < 0 or t >= n for t in targets):
        raise ValueError(f"target indices {targets} out of range for {n} qudits")
    k = len(targets)
    if gate.shape != (d**k, d**k):
        raise ValueError(f"gate shape {gate.shape} does not act on {k} qudits of dimension {d}")
    psi = state.amplitudes.reshape((d,) * n)
    psi = np.moveaxis(psi, targets, range(k))
    shape = psi.shape
    psi = (gate @ psi.reshape(d**k, -1)).reshape(shape)
    psi = np.moveaxis(psi, range(k), targets)
    return QuditState(psi.reshape(-1), d, n, tol=ACCUM_TOL)


def measure_probs(state, measured_qudits):
    """Marginal Z-basis distribution over the listed qudits.

    Unmeasured qudits are summed out. The output is indexed big-endian in the
    order the qudits are listed, so ``measure_probs(s, [1])`` on a two-qudit
    register is the second qudit's marginal.
    """
    measured = [int(q) for q in measured_qudits]
    if not measured:
        raise ValueError("at least one qudit must be measured")
    d, n = state.dim_per_qudit, state.num_qudits
    if len(set(measured)) != len(measured):
        raise ValueError(f"duplicate qudit indices in {measured}")
    if any(q < 0 or q >= n for q in measured):
        raise ValueError(f"qudit indices {measured} out of range for {n} qudits")
    joint = state.probabilities.reshape((d,) * n)
    joint = np.moveaxis(joint, measured, range(len(measured)))
    out = joint.reshape((d ** len(measured), -1)).sum(axis=1)
    return out


def sample_counts(probs, sampler):
    """Draw multinomial counts for one batch of ``sampler.shots`` shots."""
    p = np.asarray(probs, dtype=float)
    if p.min() < -1e-9:
        raise ValueError(f"probability {p.min()} is negative beyond tolerance")
    total = p.sum()
    if abs(total - 1.0) > ACCUM_TOL:
        raise ValueError(f"probabilities sum to {total!r}, not 1")
    p = np.clip(p, 0.0, None)
    p = p / p.sum()
    return sampler.rng.multinomial(sampler.shots, p)


def density_from_states(states):
    """Equal-weight mixture rho = (1/m) sum |psi><psi| of the given states."""
    if not states:
        raise ValueError("cannot build a density matrix from an empty list")
    dims = {(s.dim_per_qudit, s.num_qudits) for s in states}
    if len(dims) > 1:
        raise ValueError(f"states have mixed dimensions: {sorted(dims)}")
    mat = np.stack([s.amplitudes for s in states])
    rho = mat.T @ mat.conj() / len(states)
    return DensityMatrix(rho)


def trace_product(a, b):
    """Tr[a b] for two density matrices, returned as a real number."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    value = np.sum(a.entries * b.entries.T)
    if abs(value.imag) > ALGEBRA_TOL:
        raise ValueError(f"trace product has imaginary residue {value.imag:.3e}")
    return float(value.real)
