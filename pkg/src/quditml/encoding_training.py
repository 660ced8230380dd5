"""Training of the affine encoding map by overlap/purity descent.

The trainable encoding feeds phi = W x + b into the scheme equations and
shapes (W, b) so that encoded classes become distinguishable: the loss sums
squared cross-class overlaps Tr[rho_i rho_j]^2 and subtracts squared
purities Tr[rho_i^2]^2. Exact mode computes the traces from full-training-set
density matrices; shot mode estimates every trace from randomly sampled state
pairs measured with a finite shot budget, the way a processor would.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encodings import encode_batch
from .optimizers import ObjectiveHandle, SpsaConfig, spsa_minimize
from .state import DensityMatrix, density_from_states, stream, trace_product

# Probe pairs used to scale the SPSA gain so the first update moves each
# coordinate by roughly this many radians.
_TARGET_FIRST_STEP = 0.1
_CALIBRATION_PROBES = 5


@dataclass(frozen=True)
class ShotProtocol:
    """Budget for one trace estimate: sampled state pairs times shots per pair."""

    pair_samples: int = 500
    shots_per_pair: int = 10
    rng_seed: int = 0

    def __post_init__(self):
        if self.pair_samples < 1 or self.shots_per_pair < 1:
            raise ValueError("pair_samples and shots_per_pair must be positive")


@dataclass(frozen=True)
class EncodingLossReport:
    """Loss value together with the trace table it was computed from.

    ``overlaps`` is the full symmetric matrix of Tr[rho_i rho_j]; its diagonal
    holds the class purities. The loss is always recomputed from the matrix,
    so report and table cannot disagree.
    """

    loss: float
    overlaps: np.ndarray

    @property
    def purities(self):
        return np.diag(self.overlaps).copy()

    @classmethod
    def from_overlaps(cls, overlaps):
        m = np.asarray(overlaps, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("overlap table must be square")
        cross = m**2
        loss = float(cross.sum() - 2 * np.trace(cross))
        return cls(loss=loss, overlaps=m)


def class_features(features, labels):
    """Split feature rows by class label, ordered by ascending label."""
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels)
    classes = np.unique(labels)
    groups = [features[labels == c] for c in classes]
    for c, g in zip(classes, groups):
        if g.shape[0] == 0:
            raise ValueError(f"class {c} has no points")
    return groups


def class_densities(features, labels, spec):
    """One mixed state per class from the encoded training points."""
    densities = []
    for rows in class_features(features, labels):
        vecs = encode_batch(rows, spec)
        rho = vecs.T @ vecs.conj() / vecs.shape[0]
        densities.append(DensityMatrix(rho))
    return densities


def encoding_loss(densities):
    """Exact overlap/purity loss report for a list of class densities."""
    if len(densities) < 2:
        raise ValueError("need at least two classes")
    dims = {d.dim for d in densities}
    if len(dims) > 1:
        raise ValueError(f"class densities have mixed dimensions: {sorted(dims)}")
    n = len(densities)
    table = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            table[i, j] = table[j, i] = trace_product(densities[i], densities[j])
    return EncodingLossReport.from_overlaps(table)


def overlap_estimate_shots(points_i, points_j, spec, protocol, rng=None):
    """Finite-shot estimate of Tr[rho_i rho_j] from sampled point pairs.

    Pairs are drawn uniformly with replacement from the two classes; each
    pair's squared state overlap is the all-zeros probability of the
    back-to-back encoder circuit, sampled with ``shots_per_pair`` shots.
    The average outcome frequency is an unbiased estimator of the trace.
    """
    if rng is None:
        rng = stream(protocol.rng_seed)
    vecs_i = encode_batch(np.asarray(points_i, dtype=float), spec)
    vecs_j = encode_batch(np.asarray(points_j, dtype=float), spec)
    idx_i = rng.integers(0, vecs_i.shape[0], protocol.pair_samples)
    idx_j = rng.integers(0, vecs_j.shape[0], protocol.pair_samples)
    overlap = np.abs(np.sum(vecs_i[idx_i].conj() * vecs_j[idx_j], axis=1)) ** 2
    counts = rng.binomial(protocol.shots_per_pair, np.clip(overlap, 0.0, 1.0))
    return float(counts.sum() / (protocol.pair_samples * protocol.shots_per_pair))


def _draw_pair_indices(groups, protocol):
    """One fixed pair sample per class pair, drawn from the protocol seed.

    The pair list is selected once per training run and reused for every
    loss evaluation; only the shots are re-executed when (W, b) change.
    Sharing the pairs keeps the sampled sub-table fixed, so SPSA's two-point
    differences carry the effect of the perturbation rather than pair churn.
    """
    rng = stream(protocol.rng_seed, 11)
    pairs = {}
    for i in range(len(groups)):
        for j in range(i, len(groups)):
            pairs[(i, j)] = (rng.integers(0, groups[i].shape[0], protocol.pair_samples),
                             rng.integers(0, groups[j].shape[0], protocol.pair_samples))
    return pairs


def _shot_loss_report(groups, spec, protocol, pairs, rng):
    n = len(groups)
    encoded = [encode_batch(g, spec) for g in groups]
    table = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            ii, jj = pairs[(i, j)]
            overlap = np.abs(np.sum(encoded[i][ii].conj() * encoded[j][jj], axis=1)) ** 2
            counts = rng.binomial(protocol.shots_per_pair, np.clip(overlap, 0.0, 1.0))
            table[i, j] = table[j, i] = counts.sum() / (protocol.pair_samples * protocol.shots_per_pair)
    return EncodingLossReport.from_overlaps(table)


def _flatten(w, b):
    return np.concatenate([w.reshape(-1), b])


def _unflatten(vec, k):
    return vec[: k * k].reshape(k, k), vec[k * k :]


def train_encoding(features, labels, spec, config=None, mode="exact", protocol=None):
    """Optimize (W, b) by SPSA from the spec's current affine initialization.

    Returns (W, b, trajectory) where the trajectory holds one
    EncodingLossReport per objective evaluation, two per SPSA iteration. In
    shot mode the pair sample behind each trace estimate is drawn once per
    run from the protocol seed and reused across evaluations; each evaluation
    re-executes only the shots, so runs are reproducible from the config
    seed. A ``config.a`` of None triggers gain calibration: probe
    perturbations pick the gain that makes the first update move each
    coordinate by about 0.1 rad.
    """
    if spec.affine is None:
        raise ValueError("spec.affine must be initialized before training")
    if mode not in ("exact", "shots"):
        raise ValueError(f"unknown training mode {mode!r}")
    if mode == "shots" and protocol is None:
        raise ValueError("shot mode requires a ShotProtocol")
    config = config or SpsaConfig()
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels)
    groups = class_features(features, labels)
    k = spec.num_features
    init = _flatten(*spec.affine)
    trajectory = []
    if mode == "shots":
        pairs = _draw_pair_indices(groups, protocol)
        shot_rng = stream(protocol.rng_seed, 12)

    def evaluate(vec):
        w, b = _unflatten(vec, k)
        candidate = spec.with_affine(w, b)
        if mode == "exact":
            report = encoding_loss(class_densities(features, labels, candidate))
        else:
            report = _shot_loss_report(groups, candidate, protocol, pairs, shot_rng)
        trajectory.append(report)
        if not np.isfinite(report.loss):
            raise FloatingPointError(f"encoding loss became non-finite: {report.loss!r}")
        return report.loss

    objective = ObjectiveHandle(evaluate, init.size)
    if config.a is None:
        config = config.replace_a(_calibrate_gain(objective, init, config))
        trajectory.clear()
    final, _ = spsa_minimize(objective, init, config)
    w, b = _unflatten(final, k)
    return w, b, trajectory


def _calibrate_gain(objective, init, config):
    """Pick ``a`` so the first SPSA step is about 0.1 rad per coordinate.

    The per-coordinate update magnitude at step 0 is
    a / (A + 1)^alpha * |L+ - L-| / (2 c), identical for every coordinate
    because perturbations are +-1. The median probe difference keeps a single
    lucky cancellation from blowing up the gain.
    """
    rng = stream(config.rng_seed, 13)
    c0 = config.c
    diffs = []
    for _ in range(_CALIBRATION_PROBES):
        delta = rng.integers(0, 2, init.size) * 2.0 - 1.0
        diffs.append(abs(objective.evaluate(init + c0 * delta) - objective.evaluate(init - c0 * delta)))
    scale = float(np.median(diffs))
    if scale < 1e-12:
        # Flat landscape near the start; any modest gain is as good as another.
        scale = 1e-12
    return _TARGET_FIRST_STEP * (config.A + 1) ** config.alpha * 2 * c0 / scale
