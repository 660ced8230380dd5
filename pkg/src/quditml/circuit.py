"""Ordered gate lists with late-bound parameters.

A ParamCircuit is a sequence of gates over a small qudit register. Each gate
is either a fixed matrix or a one-angle builder wired to a slot of the
parameter vector, with an optional scale (so a circuit can realize e.g.
Ry01(2 x) from the slot value x). Evaluation produces either the full
register unitary or the state reached from a given input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .state import ACCUM_TOL, QuditState, apply_gate


@dataclass(frozen=True)
class CircuitGate:
    """One gate: a fixed ``matrix`` or a ``builder`` fed by parameter ``slot``."""

    targets: tuple[int, ...]
    matrix: np.ndarray | None = None
    builder: object = None
    slot: int | None = None
    scale: float = 1.0

    def __post_init__(self):
        fixed = self.matrix is not None
        slotted = self.builder is not None and self.slot is not None
        if fixed == slotted:
            raise ValueError("gate must have either a fixed matrix or a builder with a slot")
        if fixed:
            object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=complex))

    def resolve(self, params):
        if self.matrix is not None:
            return self.matrix
        return self.builder(self.scale * params[self.slot])


def fixed(matrix, *targets):
    return CircuitGate(targets=tuple(targets), matrix=matrix)


def slotted(builder, slot, *targets, scale=1.0):
    return CircuitGate(targets=tuple(targets), builder=builder, slot=slot, scale=scale)


class ParamCircuit:
    """Gate sequence over ``num_qudits`` d-level systems with free parameters."""

    def __init__(self, dim, num_qudits, gates, param_count, params=None):
        self.dim = int(dim)
        self.num_qudits = int(num_qudits)
        self.gates = tuple(gates)
        self.param_count = int(param_count)
        self.params = None if params is None else np.asarray(params, dtype=float)
        for g in self.gates:
            if g.slot is not None and not 0 <= g.slot < self.param_count:
                raise ValueError(f"slot {g.slot} out of range for {self.param_count} parameters")
            if any(t < 0 or t >= self.num_qudits for t in g.targets):
                raise ValueError(f"targets {g.targets} out of range for {self.num_qudits} qudits")
        if self.params is not None and self.params.shape != (self.param_count,):
            raise ValueError(f"expected {self.param_count} parameters, got shape {self.params.shape}")

    def with_params(self, params):
        return ParamCircuit(self.dim, self.num_qudits, self.gates, self.param_count, params)

    def _bound(self, params):
        if params is None:
            params = self.params
        if params is None:
            raise ValueError("circuit has no bound parameters and none were given")
        params = np.asarray(params, dtype=float)
        if params.shape != (self.param_count,):
            raise ValueError(f"expected {self.param_count} parameters, got shape {params.shape}")
        return params

    def unitary(self, params=None):
        """Full register unitary, gates applied in list order (first gate acts first)."""
        params = self._bound(params)
        d, n = self.dim, self.num_qudits
        u = np.eye(d**n, dtype=complex)
        for g in self.gates:
            u = self._embed(g.resolve(params), g.targets) @ u
        return u

    def apply(self, state, params=None):
        """Run the circuit on a state (defaults to |0...0>)."""
        params = self._bound(params)
        if state is None:
            state = QuditState.zero(self.dim, self.num_qudits)
        for g in self.gates:
            state = apply_gate(state, g.resolve(params), g.targets)
        return state

    def probs(self, params=None, state=None):
        return self.apply(state, params).probabilities

    def _embed(self, m, targets):
        d, n = self.dim, self.num_qudits
        if len(targets) == n and targets == tuple(range(n)):
            return m
        if len(targets) == 1:
            q = targets[0]
            left = np.eye(d ** q, dtype=complex)
            right = np.eye(d ** (n - q - 1), dtype=complex)
            return np.kron(np.kron(left, m), right)
        # Rare general case: build columns by applying the gate to basis states.
        size = d**n
        out = np.empty((size, size), dtype=complex)
        for idx in range(size):
            basis = QuditState.basis(d, n, idx)
            out[:, idx] = apply_gate(basis, m, targets).amplitudes
        return out

    def check_unitary(self, params=None, tol=ACCUM_TOL):
        u = self.unitary(params)
        return float(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))))
