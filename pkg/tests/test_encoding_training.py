import numpy as np
import pytest

from quditml.encoding_training import (EncodingLossReport, ShotProtocol,
                                       class_densities, class_features,
                                       encoding_loss, overlap_estimate_shots,
                                       train_encoding)
from quditml.encodings import EncodingSpec, encode_batch
from quditml.optimizers import SpsaConfig
from quditml.state import DensityMatrix, stream


def identity_spec(k=4, scheme="nce", dim=3):
    return EncodingSpec(scheme, dim, k, affine=(np.eye(k), np.zeros(k)))


def separable_features(rng, per_class=12):
    """Three tight clusters along distinct feature directions."""
    lo, hi = np.pi / 4, 3 * np.pi / 4
    centers = np.array([
        [lo, lo, lo, lo],
        [hi, lo, hi, lo],
        [lo, hi, hi, hi],
    ])
    rows, labels = [], []
    for c, center in enumerate(centers):
        rows.append(center + rng.normal(0, 0.02, size=(per_class, 4)))
        labels += [c] * per_class
    return np.concatenate(rows), np.array(labels)


class TestClassSplitting:
    def test_groups_ordered_by_label(self):
        x = np.arange(12.0).reshape(6, 2)
        y = np.array([2, 0, 1, 0, 2, 1])
        groups = class_features(x, y)
        assert np.allclose(groups[0], x[[1, 3]])
        assert np.allclose(groups[1], x[[2, 5]])
        assert np.allclose(groups[2], x[[0, 4]])

    def test_class_densities_are_valid_mixtures(self):
        rng = stream(1, 1)
        x, y = separable_features(rng)
        densities = class_densities(x, y, identity_spec())
        assert len(densities) == 3
        for rho in densities:
            assert isinstance(rho, DensityMatrix)
            assert rho.dim == 3
            assert 1 / 3 - 1e-9 <= rho.purity <= 1 + 1e-9


class TestLossIdentities:
    def test_orthogonal_pure_classes_reach_minus_three(self):
        # three orthogonal pure classes: purities 1, cross terms 0,
        # so the loss is -(1+1+1)
        rhos = [DensityMatrix(np.outer(e, e)) for e in np.eye(3)]
        report = encoding_loss(rhos)
        assert report.loss == pytest.approx(-3.0, abs=1e-12)
        assert np.allclose(report.purities, 1.0)

    def test_identical_pure_classes_reach_plus_three(self):
        # all classes on one pure state: every table entry is 1, so the
        # squared cross terms sum to 6 against 3 units of purity
        e = np.eye(3)[0]
        rhos = [DensityMatrix(np.outer(e, e)) for _ in range(3)]
        assert encoding_loss(rhos).loss == pytest.approx(3.0, abs=1e-12)

    def test_report_recomputes_from_table(self):
        table = np.array([[0.9, 0.2], [0.2, 0.8]])
        report = EncodingLossReport.from_overlaps(table)
        expect = 2 * 0.2**2 - 0.9**2 - 0.8**2
        assert report.loss == pytest.approx(expect, abs=1e-12)
        assert np.allclose(report.purities, [0.9, 0.8])

    def test_table_must_be_square(self):
        with pytest.raises(ValueError):
            EncodingLossReport.from_overlaps(np.ones((2, 3)))

    def test_needs_two_classes(self):
        with pytest.raises(ValueError):
            encoding_loss([DensityMatrix(np.eye(3) / 3)])

    def test_loss_bounds_on_random_mixtures(self):
        # purities in (1/d, 1], overlaps nonnegative: the loss of any real
        # configuration lies in [-3, 6 - 3/d^2] for three classes
        rng = stream(2, 2)
        spec = identity_spec()
        for _ in range(10):
            x = rng.uniform(np.pi / 4, 3 * np.pi / 4, size=(30, 4))
            y = rng.integers(0, 3, 30)
            if len(set(y.tolist())) < 3:
                continue
            loss = encoding_loss(class_densities(x, y, spec)).loss
            assert -3.0 <= loss <= 6.0


class TestShotEstimator:
    def test_identical_point_estimates_one(self):
        # a class of one repeated point against itself: every sampled pair
        # has unit overlap, so every shot returns the all-zeros outcome
        spec = identity_spec()
        point = np.full((1, 4), np.pi / 3)
        protocol = ShotProtocol(pair_samples=50, shots_per_pair=10, rng_seed=0)
        est = overlap_estimate_shots(point, point, spec, protocol)
        assert est == 1.0

    def test_unbiased_against_exact_trace(self):
        rng = stream(3, 3)
        spec = identity_spec()
        x, y = separable_features(rng)
        groups = class_features(x, y)
        vecs_a = encode_batch(groups[0], spec)
        vecs_b = encode_batch(groups[1], spec)
        exact = np.mean(np.abs(vecs_a.conj() @ vecs_b.T) ** 2)
        protocol = ShotProtocol(pair_samples=500, shots_per_pair=10)
        estimates = [overlap_estimate_shots(groups[0], groups[1], spec, protocol,
                                            rng=stream(17, s))
                     for s in range(30)]
        err = abs(np.mean(estimates) - exact)
        se = np.std(estimates) / np.sqrt(len(estimates))
        assert err < 3 * se + 1e-12

    def test_deterministic_given_seed(self):
        rng = stream(4, 4)
        spec = identity_spec()
        x, y = separable_features(rng)
        groups = class_features(x, y)
        protocol = ShotProtocol(pair_samples=100, shots_per_pair=5, rng_seed=21)
        a = overlap_estimate_shots(groups[0], groups[1], spec, protocol)
        b = overlap_estimate_shots(groups[0], groups[1], spec, protocol)
        assert a == b

    def test_protocol_validation(self):
        with pytest.raises(ValueError):
            ShotProtocol(pair_samples=0)
        with pytest.raises(ValueError):
            ShotProtocol(shots_per_pair=0)


class TestTrainEncoding:
    def test_loss_improves_on_separable_data(self):
        rng = stream(5, 5)
        x, y = separable_features(rng)
        spec = identity_spec()
        cfg = SpsaConfig(max_iterations=100, rng_seed=1)
        w, b, trajectory = train_encoding(x, y, spec, cfg)
        initial = encoding_loss(class_densities(x, y, spec)).loss
        final = encoding_loss(class_densities(x, y, spec.with_affine(w, b))).loss
        assert final < initial

    def test_zero_iterations_returns_start(self):
        rng = stream(6, 6)
        x, y = separable_features(rng)
        spec = identity_spec()
        cfg = SpsaConfig(max_iterations=0, a=0.1)
        w, b, trajectory = train_encoding(x, y, spec, cfg)
        assert np.allclose(w, np.eye(4))
        assert np.allclose(b, np.zeros(4))
        assert trajectory == []

    def test_trajectory_two_reports_per_iteration(self):
        rng = stream(7, 7)
        x, y = separable_features(rng)
        cfg = SpsaConfig(max_iterations=10, rng_seed=2)
        _, _, trajectory = train_encoding(x, y, identity_spec(), cfg)
        # calibration probes are cleared; what remains is the run itself
        assert len(trajectory) == 20
        assert all(isinstance(r, EncodingLossReport) for r in trajectory)

    def test_requires_initialized_affine(self):
        rng = stream(8, 8)
        x, y = separable_features(rng)
        with pytest.raises(ValueError):
            train_encoding(x, y, EncodingSpec("nce", 3, 4), SpsaConfig(a=0.1))

    def test_shot_mode_deterministic(self):
        rng = stream(9, 9)
        x, y = separable_features(rng, per_class=8)
        spec = identity_spec()
        cfg = SpsaConfig(max_iterations=5, rng_seed=3)
        protocol = ShotProtocol(pair_samples=40, shots_per_pair=5, rng_seed=11)
        w1, b1, _ = train_encoding(x, y, spec, cfg, mode="shots", protocol=protocol)
        w2, b2, _ = train_encoding(x, y, spec, cfg, mode="shots", protocol=protocol)
        assert np.array_equal(w1, w2)
        assert np.array_equal(b1, b2)

    def test_shot_mode_requires_protocol(self):
        rng = stream(10, 10)
        x, y = separable_features(rng)
        with pytest.raises(ValueError):
            train_encoding(x, y, identity_spec(), SpsaConfig(a=0.1), mode="shots")

    def test_unknown_mode_rejected(self):
        rng = stream(11, 11)
        x, y = separable_features(rng)
        with pytest.raises(ValueError):
            train_encoding(x, y, identity_spec(), SpsaConfig(a=0.1), mode="fancy")

    def test_explicit_gain_skips_calibration(self):
        rng = stream(12, 12)
        x, y = separable_features(rng)
        cfg = SpsaConfig(max_iterations=4, a=0.05, rng_seed=13)
        _, _, trajectory = train_encoding(x, y, identity_spec(), cfg)
        assert len(trajectory) == 8
