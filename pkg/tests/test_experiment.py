import numpy as np
import pytest

from quditml.encoding_training import ShotProtocol
from quditml.experiment import (STANDARD_CELLS, ExperimentConfig,
                                LabeledDataset, child_seed, class_probs,
                                loss_linear, loss_one_qubit, loss_squared,
                                predict_label, run_hardware_protocol,
                                run_repetitions, run_sweep, run_trial,
                                split_dataset, sweep_permutations)
from quditml.encodings import EncodingSpec, RescaleMap, encode_batch, rescale
from quditml.optimizers import RotosolveConfig, SpsaConfig
from quditml.state import stream


def toy_dataset(rng, per_class=12, spread=0.05):
    """Well-separated clusters in raw feature space, labels 0/1/2."""
    centers = np.array([
        [1.0, 1.0, 9.0, 1.0],
        [5.0, 9.0, 5.0, 5.0],
        [9.0, 1.0, 1.0, 9.0],
    ])
    rows, labels = [], []
    for c, center in enumerate(centers):
        rows.append(center + rng.normal(0, spread, size=(per_class, 4)))
        labels += [c] * per_class
    return LabeledDataset("toy", np.concatenate(rows), np.array(labels))


def noise_dataset(rng, per_class=10):
    """Labels carry no information; nothing can classify this."""
    points = rng.uniform(0, 1, size=(3 * per_class, 4))
    labels = np.repeat([0, 1, 2], per_class)
    return LabeledDataset("noise", points, labels)


class TestLabeledDataset:
    def test_shape_and_class_checks(self):
        with pytest.raises(ValueError):
            LabeledDataset("x", np.ones((4, 2)), np.array([0, 1, 2]))
        with pytest.raises(ValueError):
            LabeledDataset("x", np.ones((3, 2)), np.array([0, 1, 3]))
        with pytest.raises(ValueError):
            LabeledDataset("x", np.ones((2, 2)), np.array([0, 1]))

    def test_properties(self, iris_dataset):
        assert iris_dataset.num_points == 150
        assert iris_dataset.num_features == 4


class TestChildSeed:
    def test_stable_and_distinct(self):
        assert child_seed(5, 1, 2) == child_seed(5, 1, 2)
        assert child_seed(5, 1, 2) != child_seed(5, 1, 3)
        assert child_seed(5, 1) != child_seed(6, 1)


class TestSplitDataset:
    def test_iris_sizes(self, iris_dataset):
        train, test = split_dataset(iris_dataset, seed=0)
        assert train.size == 100 and test.size == 50
        assert np.intersect1d(train, test).size == 0
        together = np.sort(np.concatenate([train, test]))
        assert np.array_equal(together, np.arange(150))

    def test_deterministic(self, iris_dataset):
        a = split_dataset(iris_dataset, seed=9)
        b = split_dataset(iris_dataset, seed=9)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
        c = split_dataset(iris_dataset, seed=10)
        assert not np.array_equal(a[0], c[0])

    def test_training_part_keeps_all_classes(self, iris_dataset):
        for seed in range(20):
            train, _ = split_dataset(iris_dataset, seed)
            assert set(iris_dataset.labels[train].tolist()) == {0, 1, 2}

    def test_too_small_dataset_raises(self):
        tiny = LabeledDataset("tiny", np.eye(3, 4), np.array([0, 1, 2]))
        with pytest.raises(ValueError):
            split_dataset(tiny, seed=0)

    def test_custom_fraction(self, iris_dataset):
        train, test = split_dataset(iris_dataset, seed=1, train_fraction=0.5)
        assert train.size == 75 and test.size == 75


class TestClassProbs:
    def test_one_qutrit_passthrough(self):
        p = np.array([0.2, 0.5, 0.3])
        assert np.allclose(class_probs(p, "one-qutrit"), p)

    def test_two_qutrit_second_marginal(self):
        # joint index is 3a + b; class probability is the marginal over b
        joint = np.zeros(9)
        joint[3 * 0 + 2] = 0.25
        joint[3 * 1 + 2] = 0.25
        joint[3 * 2 + 0] = 0.5
        out = class_probs(joint, "two-qutrit-second")
        assert np.allclose(out, [0.5, 0.0, 0.5])

    def test_two_qubit_first_three(self):
        joint = np.array([0.1, 0.2, 0.6, 0.1])
        assert np.allclose(class_probs(joint, "two-qubit"), [0.1, 0.2, 0.6])

    def test_batch_rows(self):
        joint = np.tile(np.eye(9)[4], (5, 1))
        out = class_probs(joint, "two-qutrit-second")
        assert out.shape == (5, 3)
        assert np.allclose(out[:, 1], 1.0)

    def test_one_qubit_has_no_class_vector(self):
        with pytest.raises(ValueError):
            class_probs(np.array([0.5, 0.5]), "one-qubit-interval")
        with pytest.raises(ValueError):
            class_probs(np.ones(3) / 3, "no-such-convention")


class TestLosses:
    def test_squared_example(self):
        # correct-class probabilities 0.8 and 0.5: (1-p)^2 sums to 0.29
        probs = np.array([[0.8, 0.1, 0.1], [0.2, 0.5, 0.3]])
        assert loss_squared(probs, [0, 1]) == pytest.approx(0.29, abs=1e-12)

    def test_linear_shares_minimum(self):
        probs = np.array([[0.8, 0.1, 0.1], [0.2, 0.5, 0.3]])
        assert loss_linear(probs, [0, 1]) == pytest.approx(0.7, abs=1e-12)
        perfect = np.eye(3)
        assert loss_squared(perfect, [0, 1, 2]) == 0.0
        assert loss_linear(perfect, [0, 1, 2]) == 0.0

    def test_label_range_enforced(self):
        probs = np.ones((2, 3)) / 3
        with pytest.raises(ValueError):
            loss_squared(probs, [0, 3])
        with pytest.raises(ValueError):
            loss_linear(probs, [-1, 0])

    def test_one_qubit_piecewise(self):
        assert loss_one_qubit(0.2, 0) == pytest.approx(0.2)
        assert loss_one_qubit(0.2, 1) == pytest.approx(0.3)
        assert loss_one_qubit(0.2, 2) == pytest.approx(0.8)
        assert loss_one_qubit(0.5, 1) == 0.0
        with pytest.raises(ValueError):
            loss_one_qubit(0.2, 3)


class TestPredictLabel:
    def test_one_qubit_interval_rule(self):
        # P(|0>) buckets: low third class 0, middle class 1, high class 2
        assert predict_label(np.array([0.1, 0.9]), "one-qubit-interval") == 0
        assert predict_label(np.array([0.5, 0.5]), "one-qubit-interval") == 1
        assert predict_label(np.array([0.7, 0.3]), "one-qubit-interval") == 2
        # boundary values fall toward the smaller label
        assert predict_label(np.array([1 / 3, 2 / 3]), "one-qubit-interval") == 0
        assert predict_label(np.array([2 / 3, 1 / 3]), "one-qubit-interval") == 1

    def test_argmax_with_ties_toward_smaller(self):
        assert predict_label(np.array([0.4, 0.4, 0.2]), "one-qutrit") == 0
        assert predict_label(np.array([0.2, 0.4, 0.4]), "one-qutrit") == 1

    def test_two_qutrit_rule(self):
        joint = np.zeros(9)
        joint[3 * 0 + 2] = 0.6
        joint[3 * 1 + 1] = 0.4
        assert predict_label(joint, "two-qutrit-second") == 2

    def test_two_qubit_rule(self):
        joint = np.array([0.2, 0.5, 0.2, 0.1])
        assert predict_label(joint, "two-qubit") == 1


class TestExperimentConfig:
    def test_known_cells_accepted(self, iris_dataset):
        for name, (dim, n, scheme, ansatz) in STANDARD_CELLS.items():
            cfg = ExperimentConfig(dataset=iris_dataset, qudit_dim=dim,
                                   num_qudits=n, scheme=scheme, ansatz=ansatz)
            assert cfg.build_circuit().param_count > 0

    def test_unknown_cell_rejected(self, iris_dataset):
        with pytest.raises(ValueError):
            ExperimentConfig(dataset=iris_dataset, qudit_dim=3, num_qudits=1,
                             scheme="nae", ansatz="ttn")

    def test_optimized_one_qubit_rejected(self, iris_dataset):
        with pytest.raises(ValueError):
            ExperimentConfig(dataset=iris_dataset, qudit_dim=2, num_qudits=1,
                             scheme="nce", encoding_mode="optimized")

    def test_conventions(self, iris_dataset):
        mk = lambda d, n, s, a: ExperimentConfig(dataset=iris_dataset, qudit_dim=d,
                                                 num_qudits=n, scheme=s, ansatz=a)
        assert mk(2, 1, "nce", "ttn").convention == "one-qubit-interval"
        assert mk(3, 1, "nce", "ttn").convention == "one-qutrit"
        assert mk(2, 2, "nce", "ttn").convention == "two-qubit"
        assert mk(3, 2, "nae", "ttn").convention == "two-qutrit-second"

    def test_one_qubit_encodes_feature_pairs(self, iris_dataset):
        cfg = ExperimentConfig(dataset=iris_dataset, qudit_dim=2, num_qudits=1,
                               scheme="nce")
        assert cfg.encoded_features == 2
        assert cfg.default_permutation() == (0, 1)

    def test_param_counts_by_cell(self, iris_dataset):
        counts = {"qubit1-nce": 3, "qutrit1-nce": 8, "qubit2-nce-short": 9,
                  "qubit2-nce-long": 15, "qutrit2-nae": 24, "qutrit2-npe": 24}
        for name, expect in counts.items():
            dim, n, scheme, ansatz = STANDARD_CELLS[name]
            cfg = ExperimentConfig(dataset=iris_dataset, qudit_dim=dim,
                                   num_qudits=n, scheme=scheme, ansatz=ansatz)
            assert cfg.build_circuit().param_count == expect


class TestRunTrial:
    def test_deterministic(self):
        ds = toy_dataset(stream(1, 1))
        cfg = ExperimentConfig(dataset=ds, qudit_dim=3, num_qudits=1, scheme="nce")
        a = run_trial(cfg, seed=123)
        b = run_trial(cfg, seed=123)
        assert np.array_equal(a.theta, b.theta)
        assert a.test_accuracy == b.test_accuracy
        assert np.array_equal(a.train_indices, b.train_indices)

    def test_separable_data_classified(self):
        ds = toy_dataset(stream(2, 1))
        cfg = ExperimentConfig(dataset=ds, qudit_dim=3, num_qudits=1, scheme="nce")
        record = run_trial(cfg, seed=7)
        assert record.test_accuracy >= 0.9
        assert record.w is None and record.b is None
        assert record.retries_exhausted is False

    def test_optimized_mode_returns_affine(self):
        ds = toy_dataset(stream(3, 1))
        cfg = ExperimentConfig(dataset=ds, qudit_dim=3, num_qudits=1, scheme="nce",
                               encoding_mode="optimized",
                               spsa=SpsaConfig(max_iterations=30))
        record = run_trial(cfg, seed=11)
        assert record.w.shape == (4, 4)
        assert record.b.shape == (4,)
        assert record.test_accuracy >= 0.9

    def test_retries_exhausted_on_noise(self):
        ds = noise_dataset(stream(4, 1))
        cfg = ExperimentConfig(dataset=ds, qudit_dim=3, num_qudits=1, scheme="nce",
                               retry_limit=3)
        record = run_trial(cfg, seed=5)
        assert record.retries == 3
        assert record.retries_exhausted is True

    def test_retry_threshold_zero_never_retries(self):
        ds = noise_dataset(stream(5, 1))
        cfg = ExperimentConfig(dataset=ds, qudit_dim=3, num_qudits=1, scheme="nce",
                               retry_threshold=0.0)
        record = run_trial(cfg, seed=5)
        assert record.retries == 0
        assert record.retries_exhausted is False

    def test_retry_on_train_gates_on_training_accuracy(self):
        # on noise data both accuracies hover near 1/3, so the train-gated
        # variant must also exhaust its retries
        ds = noise_dataset(stream(6, 1))
        cfg = ExperimentConfig(dataset=ds, qudit_dim=3, num_qudits=1, scheme="nce",
                               retry_limit=2, retry_on_train=True)
        record = run_trial(cfg, seed=3)
        assert record.retries == 2
        assert record.retries_exhausted is True


class TestRunRepetitions:
    def test_shapes_and_seed_sharing(self):
        ds = toy_dataset(stream(7, 1), per_class=8)
        cfg = ExperimentConfig(dataset=ds, qudit_dim=3, num_qudits=1, scheme="nce",
                               repetitions=3)
        accs_a, recs_a = run_repetitions(cfg, permutation=(0, 1, 2, 3))
        accs_b, recs_b = run_repetitions(cfg, permutation=(3, 2, 1, 0))
        assert accs_a.shape == (3,)
        # different orderings, same splits per repetition index
        for ra, rb in zip(recs_a, recs_b):
            assert np.array_equal(ra.train_indices, rb.train_indices)
            assert ra.seed == rb.seed


class TestSweeps:
    def test_permutation_counts(self, iris_dataset):
        qutrit = ExperimentConfig(dataset=iris_dataset, qudit_dim=3, num_qudits=1,
                                  scheme="nce")
        assert len(sweep_permutations(qutrit)) == 24
        qubit = ExperimentConfig(dataset=iris_dataset, qudit_dim=2, num_qudits=1,
                                 scheme="nce")
        perms = sweep_permutations(qubit)
        assert len(perms) == 12
        assert all(len(p) == 2 for p in perms)
        assert len(set(perms)) == 12

    def test_run_sweep_shapes(self):
        ds = toy_dataset(stream(8, 1), per_class=6)
        cfg = ExperimentConfig(dataset=ds, qudit_dim=3, num_qudits=1, scheme="nce",
                               repetitions=2)
        result = run_sweep(cfg)
        assert result.accuracies.shape == (24, 2)
        assert result.cell_means.shape == (24,)
        box = result.box
        assert set(box) == {"min", "q1", "median", "q3", "max"}
        assert box["min"] <= box["median"] <= box["max"]

    def test_sweep_requires_fixed_encoding(self):
        ds = toy_dataset(stream(9, 1))
        cfg = ExperimentConfig(dataset=ds, qudit_dim=3, num_qudits=1, scheme="nce",
                               encoding_mode="optimized")
        with pytest.raises(ValueError):
            run_sweep(cfg)


def test_untrained_circuits_score_near_chance(iris_dataset):
    # random parameters on a balanced three-class problem: mean accuracy
    # over many draws sits near 1/3
    cfg = ExperimentConfig(dataset=iris_dataset, qudit_dim=3, num_qudits=1,
                           scheme="nce")
    rmap = RescaleMap.fit(iris_dataset.points)
    x = rescale(iris_dataset.points, rmap)
    spec = EncodingSpec("nce", 3, 4)
    encoded = encode_batch(x, spec)
    circuit = cfg.build_circuit()
    rng = stream(99, 1)
    accs = []
    for _ in range(100):
        theta = rng.uniform(-np.pi, np.pi, circuit.param_count)
        joint = np.abs(encoded @ circuit.unitary(theta).T) ** 2
        preds = np.argmax(joint, axis=1)
        accs.append(np.mean(preds == iris_dataset.labels))
    assert abs(np.mean(accs) - 1 / 3) < 0.1


class TestHardwareProtocol:
    def test_tiny_run_shapes(self):
        ds = toy_dataset(stream(10, 1), per_class=8)
        cfg = ExperimentConfig(
            dataset=ds, qudit_dim=3, num_qudits=1, scheme="nce",
            encoding_mode="optimized",
            shot_protocol=ShotProtocol(pair_samples=20, shots_per_pair=5),
            eval_shots=50,
            spsa=SpsaConfig(max_iterations=3),
            rotosolve=RotosolveConfig(iterations=4),
        )
        result = run_hardware_protocol(cfg, num_seeds=2)
        assert result.final_accuracies.shape == (2,)
        assert result.initial_accuracies.shape == (2,)
        assert result.accuracy_trajectories.shape == (2, 5)
        for rec in result.records:
            assert rec.w.shape == (4, 4)
            assert rec.accuracy_trajectory[0] == rec.initial_accuracy
            assert rec.accuracy_trajectory[-1] == rec.final_accuracy
            assert len(rec.encoding_reports) == 2 * 3

    def test_requires_optimized_shot_mode(self):
        ds = toy_dataset(stream(11, 1))
        cfg = ExperimentConfig(dataset=ds, qudit_dim=3, num_qudits=1, scheme="nce")
        with pytest.raises(ValueError):
            run_hardware_protocol(cfg, num_seeds=1)

    def test_deterministic(self):
        ds = toy_dataset(stream(12, 1), per_class=6)
        cfg = ExperimentConfig(
            dataset=ds, qudit_dim=3, num_qudits=1, scheme="nce",
            encoding_mode="optimized",
            shot_protocol=ShotProtocol(pair_samples=10, shots_per_pair=3),
            eval_shots=20,
            spsa=SpsaConfig(max_iterations=2),
            rotosolve=RotosolveConfig(iterations=2),
        )
        a = run_hardware_protocol(cfg, num_seeds=1)
        b = run_hardware_protocol(cfg, num_seeds=1)
        assert np.array_equal(a.accuracy_trajectories, b.accuracy_trajectories)
