import numpy as np
import pytest

from quditml import gates
from quditml.ansatz import (rl_gate, rl_prime_gate, ttn_one_qudit,
                            ttn_two_qudit, universal_two_qubit)
from quditml.optimizers import ObjectiveHandle, quasi_newton_minimize
from quditml.state import stream

from conftest import haar_unitary


class TestParamCounts:
    def test_single_qudit(self):
        assert ttn_one_qudit(2).param_count == 3
        assert ttn_one_qudit(3).param_count == 8

    def test_two_qudit(self):
        assert ttn_two_qudit(2).param_count == 9
        assert ttn_two_qudit(3).param_count == 24
        assert universal_two_qubit().param_count == 15

    def test_unsupported_dim(self):
        with pytest.raises(ValueError):
            ttn_one_qudit(4)
        with pytest.raises(ValueError):
            ttn_two_qudit(5)


class TestGeneralRotations:
    def test_rl_gate_is_unitary(self):
        rng = stream(0, 1)
        for _ in range(10):
            m = rl_gate(rng.uniform(-np.pi, np.pi, 8))
            assert np.max(np.abs(m @ m.conj().T - np.eye(3))) < 1e-12

    def test_rl_prime_is_unitary(self):
        rng = stream(0, 2)
        for _ in range(10):
            m = rl_prime_gate(rng.uniform(-np.pi, np.pi, 8))
            assert np.max(np.abs(m @ m.conj().T - np.eye(3))) < 1e-12

    def test_rl_gate_composition_order(self):
        t = np.arange(1.0, 9.0) / 10
        manual = (gates.rz01(t[7]) @ gates.rx01(t[6]) @ gates.rz12(t[5])
                  @ gates.rx12(t[4]) @ gates.rz12(t[3]) @ gates.rz01(t[2])
                  @ gates.rx01(t[1]) @ gates.rz01(t[0]))
        assert np.allclose(rl_gate(t), manual, atol=1e-12)

    def test_zero_angles_identity_up_to_phase(self):
        m = rl_gate(np.zeros(8))
        assert np.allclose(m, np.eye(3), atol=1e-12)
        m = rl_prime_gate(np.zeros(8))
        phase = m[0, 0]
        assert abs(abs(phase) - 1) < 1e-12
        assert np.allclose(m / phase, np.eye(3), atol=1e-12)

    def test_angle_count(self):
        with pytest.raises(ValueError):
            rl_gate(np.zeros(7))
        with pytest.raises(ValueError):
            rl_prime_gate(np.zeros(9))

    def test_rl_gate_covers_su3_samples(self):
        # fit the 8 angles against Haar targets; exact coverage is checked by
        # the decomposition suite, this is a smoke test of the parameterization
        rng = stream(9, 3)
        target = haar_unitary(np.random.default_rng(5), 3)
        target = target / np.linalg.det(target) ** (1 / 3)

        def infidelity(t):
            m = rl_gate(t)
            return 1.0 - abs(np.trace(target.conj().T @ m)) / 3.0

        best = np.inf
        for _ in range(6):
            x0 = rng.uniform(-np.pi, np.pi, 8)
            _, value, _ = quasi_newton_minimize(ObjectiveHandle(infidelity, 8), x0)
            best = min(best, value)
        assert best < 1e-6


class TestTtnStructure:
    def test_one_qubit_is_zxz(self):
        t = np.array([0.3, 0.8, -0.4])
        manual = gates.rz(t[2]) @ gates.rx(t[1]) @ gates.rz(t[0])
        assert np.allclose(ttn_one_qudit(2).unitary(t), manual, atol=1e-12)

    def test_one_qutrit_matches_prime_rotation_set(self):
        t = np.linspace(0.1, 0.8, 8)
        builders = [gates.z1, gates.xp01, gates.z1, gates.z2,
                    gates.xp12, gates.z2, gates.z1, gates.xp01]
        manual = np.eye(3, dtype=complex)
        for slot, b in enumerate(builders):
            manual = b(t[slot]) @ manual
        assert np.allclose(ttn_one_qudit(3).unitary(t), manual, atol=1e-12)

    def test_two_qubit_layout(self):
        t = np.linspace(-1.0, 1.0, 9)
        r = lambda a, b, c: gates.rz(c) @ gates.rx(b) @ gates.rz(a)
        eye = np.eye(2)
        manual = (np.kron(eye, r(t[6], t[7], t[8]))
                  @ gates.cnot()
                  @ np.kron(r(t[0], t[1], t[2]), r(t[3], t[4], t[5])))
        assert np.allclose(ttn_two_qudit(2).unitary(t), manual, atol=1e-12)

    def test_two_qutrit_layout(self):
        rng = stream(2, 4)
        t = rng.uniform(-np.pi, np.pi, 24)
        block = ttn_one_qudit(3)
        eye = np.eye(3)
        manual = (np.kron(eye, block.unitary(t[16:24]))
                  @ gates.sum_gate()
                  @ np.kron(block.unitary(t[0:8]), block.unitary(t[8:16])))
        assert np.allclose(ttn_two_qudit(3).unitary(t), manual, atol=1e-12)

    def test_all_zero_params_entangler_only(self):
        # zero-angle rotations are exact identities, leaving the bare entangler
        assert np.allclose(ttn_two_qudit(2).unitary(np.zeros(9)), gates.cnot(), atol=1e-12)
        assert np.allclose(ttn_two_qudit(3).unitary(np.zeros(24)), gates.sum_gate(), atol=1e-12)


class TestUniversalTwoQubit:
    def test_is_unitary(self):
        rng = stream(0, 5)
        c = universal_two_qubit()
        for _ in range(5):
            assert c.check_unitary(rng.uniform(-np.pi, np.pi, 15)) < 1e-9

    def test_reaches_random_su4_targets(self):
        # 15 parameters with three entanglers can express any two-qubit
        # unitary; verify by fitting a few Haar targets to high fidelity
        rng_t = np.random.default_rng(21)
        rng = stream(3, 6)
        circuit = universal_two_qubit()
        for _ in range(4):
            target = haar_unitary(rng_t, 4)

            def infidelity(t):
                m = circuit.unitary(t)
                return 1.0 - abs(np.trace(target.conj().T @ m)) / 4.0

            best = np.inf
            for _ in range(8):
                x0 = rng.uniform(-np.pi, np.pi, 15)
                _, value, _ = quasi_newton_minimize(
                    ObjectiveHandle(infidelity, 15), x0, max_iterations=400)
                best = min(best, value)
                if best < 5e-7:
                    break
            # process fidelity |Tr(U+ V)|^2 / 16 above 0.999
            assert (1.0 - best) ** 2 > 0.999

    def test_short_ansatz_cannot_reach_generic_targets(self):
        # the 9-parameter circuit has a single entangler; generic SU(4)
        # targets stay out of reach, which is the point of the long form
        rng_t = np.random.default_rng(33)
        rng = stream(4, 7)
        circuit = ttn_two_qudit(2)
        target = haar_unitary(rng_t, 4)

        def infidelity(t):
            m = circuit.unitary(t)
            return 1.0 - abs(np.trace(target.conj().T @ m)) / 4.0

        best = np.inf
        for _ in range(8):
            x0 = rng.uniform(-np.pi, np.pi, 9)
            _, value, _ = quasi_newton_minimize(ObjectiveHandle(infidelity, 9), x0)
            best = min(best, value)
        assert best > 1e-3
