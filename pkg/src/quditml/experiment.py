"""End-to-end classification experiments.

One trial is: split the data 2:1, fit the rescaler on the training part,
optionally train the affine encoding, then repeatedly optimize the classifier
from fresh random angles until the test accuracy clears 80% (or ten re-runs
have been spent). Sweeps repeat trials over every feature ordering; the
hardware-protocol runner swaps the exact-probability objective for
finite-shot estimates and rotosolve updates.

Everything derives from a single master seed through named RNG substreams,
so any record can be reproduced exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .ansatz import ttn_one_qudit, ttn_two_qudit, universal_two_qubit
from .encoding_training import ShotProtocol, train_encoding
from .encodings import EncodingSpec, RescaleMap, encode_batch, rescale
from .optimizers import (ObjectiveHandle, RotosolveConfig, SpsaConfig,
                         quasi_newton_minimize, rotosolve_minimize)
from .state import stream

CONVENTIONS = ("one-qubit-interval", "one-qutrit", "two-qubit", "two-qutrit-second")

_KNOWN_CELLS = {
    (2, 1, "nce", "ttn"),
    (3, 1, "nce", "ttn"),
    (2, 2, "nce", "ttn"),
    (2, 2, "nce", "universal"),
    (3, 2, "nae", "ttn"),
    (3, 2, "npe", "ttn"),
}

# name -> (qudit_dim, num_qudits, scheme, ansatz)
STANDARD_CELLS = {
    "qubit1-nce": (2, 1, "nce", "ttn"),
    "qutrit1-nce": (3, 1, "nce", "ttn"),
    "qubit2-nce-short": (2, 2, "nce", "ttn"),
    "qubit2-nce-long": (2, 2, "nce", "universal"),
    "qutrit2-nae": (3, 2, "nae", "ttn"),
    "qutrit2-npe": (3, 2, "npe", "ttn"),
}


def child_seed(seed, *path):
    """A derived 64-bit seed, stable in (seed, path)."""
    key = tuple(int(p) for p in path)
    ss = np.random.SeedSequence(int(seed), spawn_key=key)
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Raw feature rows with integer class labels 0, 1, 2."""

    name: str
    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        labels = np.asarray(self.labels, dtype=int)
        if points.ndim != 2 or labels.ndim != 1 or points.shape[0] != labels.shape[0]:
            raise ValueError("points must be rows matching one label each")
        present = set(np.unique(labels).tolist())
        if not present <= {0, 1, 2} or len(present) != 3:
            raise ValueError(f"labels must cover exactly the classes 0, 1, 2; got {sorted(present)}")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "labels", labels)

    @property
    def num_points(self):
        return self.points.shape[0]

    @property
    def num_features(self):
        return self.points.shape[1]


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """One classification setup: dataset, circuit family, encoding mode, seeds."""

    dataset: LabeledDataset
    qudit_dim: int
    num_qudits: int
    scheme: str
    ansatz: str = "ttn"
    encoding_mode: str = "fixed"
    permutation: tuple[int, ...] | None = None
    repetitions: int = 50
    train_fraction: float = 2 / 3
    shot_protocol: ShotProtocol | None = None
    eval_shots: int = 500
    spsa: SpsaConfig = field(default_factory=SpsaConfig)
    rotosolve: RotosolveConfig = field(default_factory=RotosolveConfig)
    max_optimizer_iterations: int = 300
    retry_threshold: float = 0.80
    retry_limit: int = 10
    retry_on_train: bool = False
    master_seed: int = 0

    def __post_init__(self):
        scheme = self.scheme.lower()
        object.__setattr__(self, "scheme", scheme)
        cell = (self.qudit_dim, self.num_qudits, scheme, self.ansatz)
        if cell not in _KNOWN_CELLS:
            raise ValueError(f"unsupported classifier cell {cell}")
        if self.encoding_mode not in ("fixed", "optimized"):
            raise ValueError(f"unknown encoding mode {self.encoding_mode!r}")
        if self.encoding_mode == "optimized" and (self.qudit_dim, self.num_qudits) == (2, 1):
            raise ValueError("optimized encoding is undefined for the one-qubit cell: "
                             "a qubit cannot orthogonalize three classes")
        if self.permutation is not None:
            object.__setattr__(self, "permutation", tuple(int(p) for p in self.permutation))

    @property
    def convention(self):
        if self.num_qudits == 1:
            return "one-qubit-interval" if self.qudit_dim == 2 else "one-qutrit"
        return "two-qubit" if self.qudit_dim == 2 else "two-qutrit-second"

    @property
    def encoded_features(self):
        """The one-qubit cell holds only two of the four features."""
        if (self.qudit_dim, self.num_qudits) == (2, 1):
            return 2
        return self.dataset.num_features

    def default_permutation(self):
        return tuple(range(self.encoded_features))

    def build_circuit(self):
        if self.ansatz == "universal":
            return universal_two_qubit()
        if self.num_qudits == 1:
            return ttn_one_qudit(self.qudit_dim)
        return ttn_two_qudit(self.qudit_dim)


@dataclass(frozen=True, eq=False)
class TrialRecord:
    """Outcome of one train/test split."""

    seed: int
    train_indices: np.ndarray
    test_indices: np.ndarray
    theta: np.ndarray
    w: np.ndarray | None
    b: np.ndarray | None
    train_accuracy: float
    test_accuracy: float
    retries: int
    retries_exhausted: bool
    loss_trajectory: np.ndarray


def split_dataset(dataset, seed, train_fraction=2 / 3):
    """Deterministic unstratified 2:1 split; returns (train, test) index arrays.

    If the training part misses a class entirely the split is redrawn once;
    a second failure raises, since such a dataset cannot train three classes.
    """
    n = dataset.num_points
    n_train = int(round(train_fraction * n))
    for attempt in range(2):
        perm = stream(seed, 1, attempt).permutation(n)
        train, test = np.sort(perm[:n_train]), np.sort(perm[n_train:])
        if set(np.unique(dataset.labels[train]).tolist()) == {0, 1, 2}:
            return train, test
    raise ValueError("training split lost a class twice in a row; dataset too small or degenerate")


# ---------------------------------------------------------------------------
# losses and predictions

def class_probs(joint, convention):
    """Per-class probabilities P(|y>) from measurement distributions.

    ``joint`` is one distribution or a batch of rows over the full register
    basis. Two-qutrit rows are marginalized onto the second qutrit; two-qubit
    rows keep |00>, |01>, |10>; the one-qubit convention has no three-class
    vector and is handled by its dedicated loss and interval rule.
    """
    p = np.atleast_2d(np.asarray(joint, dtype=float))
    if convention == "one-qutrit":
        out = p
    elif convention == "two-qutrit-second":
        out = p.reshape(p.shape[0], 3, 3).sum(axis=1)
    elif convention == "two-qubit":
        out = p[:, :3]
    elif convention == "one-qubit-interval":
        raise ValueError("the one-qubit convention has no per-class probability vector")
    else:
        raise ValueError(f"unknown convention {convention!r}")
    return out[0] if np.ndim(joint) == 1 else out


def loss_squared(probs, labels):
    """Sum of (1 - P(|y_i>))^2 over data points; rows are class probabilities."""
    p = np.atleast_2d(np.asarray(probs, dtype=float))
    y = np.asarray(labels, dtype=int)
    if np.any((y < 0) | (y >= p.shape[1])):
        raise ValueError("label out of range")
    return float(np.sum((1.0 - p[np.arange(p.shape[0]), y]) ** 2))


def loss_linear(probs, labels):
    """Sum of 1 - P(|y_i>); shares its minimizers with the squared loss."""
    p = np.atleast_2d(np.asarray(probs, dtype=float))
    y = np.asarray(labels, dtype=int)
    if np.any((y < 0) | (y >= p.shape[1])):
        raise ValueError("label out of range")
    return float(np.sum(1.0 - p[np.arange(p.shape[0]), y]))


def loss_one_qubit(prob0, label):
    """Single-point loss for the one-qubit classifier.

    The two-level state cannot give each class its own basis state, so class
    1 is steered toward the half-way probability instead.
    """
    if label == 0:
        return float(prob0)
    if label == 1:
        return float(abs(prob0 - 0.5))
    if label == 2:
        return float(1.0 - prob0)
    raise ValueError(f"label {label!r} outside the three classes")


def _loss_one_qubit_batch(prob0, labels):
    p0 = np.asarray(prob0, dtype=float)
    y = np.asarray(labels, dtype=int)
    pieces = np.where(y == 0, p0, np.where(y == 1, np.abs(p0 - 0.5), 1.0 - p0))
    return float(pieces.sum())


def predict_label(probs, convention):
    """Class label from one measurement distribution under a convention.

    Ties break toward the smaller label. The one-qubit rule buckets P(|0>)
    into thirds: low means class 0, middle class 1, high class 2.
    """
    p = np.asarray(probs, dtype=float)
    if convention == "one-qubit-interval":
        p0 = float(p[0]) if p.ndim else float(p)
        return int((p0 > 1 / 3) + (p0 > 2 / 3))
    return int(np.argmax(class_probs(p, convention)))


def _predict_batch(joint, convention):
    p = np.atleast_2d(np.asarray(joint, dtype=float))
    if convention == "one-qubit-interval":
        p0 = p[:, 0]
        return ((p0 > 1 / 3).astype(int) + (p0 > 2 / 3).astype(int))
    return np.argmax(class_probs(p, convention), axis=1)


def _accuracy(joint, labels, convention):
    return float(np.mean(_predict_batch(joint, convention) == np.asarray(labels)))


# ---------------------------------------------------------------------------
# objectives

def _joint_probs(encoded, unitary):
    return np.abs(encoded @ unitary.T) ** 2


def _exact_loss(joint, labels, convention, linear=False):
    if convention == "one-qubit-interval":
        return _loss_one_qubit_batch(joint[:, 0], labels)
    p = class_probs(joint, convention)
    return loss_linear(p, labels) if linear else loss_squared(p, labels)


def _make_exact_objective(circuit, encoded, labels, convention):
    def evaluate(theta):
        joint = _joint_probs(encoded, circuit.unitary(theta))
        return _exact_loss(joint, labels, convention)

    return ObjectiveHandle(evaluate, circuit.param_count)


def _sampled_joint(joint, shots, rng):
    counts = rng.multinomial(shots, joint)
    return counts / shots


def _make_shot_objective(circuit, encoded, labels, convention, shots, seed):
    """Linear loss from fresh finite-shot frequency estimates per evaluation."""
    counter = {"n": 0}

    def evaluate(theta):
        rng = stream(seed, 5, counter["n"])
        counter["n"] += 1
        joint = _joint_probs(encoded, circuit.unitary(theta))
        freq = _sampled_joint(joint, shots, rng)
        return _exact_loss(freq, labels, convention, linear=True)

    return ObjectiveHandle(evaluate, circuit.param_count)


def _shot_accuracy(circuit, theta, encoded, labels, convention, shots, rng):
    joint = _joint_probs(encoded, circuit.unitary(theta))
    freq = _sampled_joint(joint, shots, rng)
    return _accuracy(freq, labels, convention)


# ---------------------------------------------------------------------------
# trial and sweep drivers

def _build_spec(config, w=None, b=None):
    k = config.dataset.num_features
    if config.encoding_mode == "optimized":
        if w is None:
            w, b = np.eye(k), np.zeros(k)
        return EncodingSpec(config.scheme, config.qudit_dim, k, affine=(w, b))
    perm = config.permutation or config.default_permutation()
    return EncodingSpec(config.scheme, config.qudit_dim, k, permutation=perm)


def run_trial(config, seed):
    """One split, optional encoding training, and the retry-guarded optimization.

    Re-runs keep the split and any trained encoding and only redraw the
    classifier's initial angles, so a retry gives the optimizer a fresh
    start out of a bad local minimum without changing the experiment it is
    retrying.
    """
    ds = config.dataset
    shot_mode = config.shot_protocol is not None
    train_idx, test_idx = split_dataset(ds, seed, config.train_fraction)
    rmap = RescaleMap.fit(ds.points[train_idx])
    x_train = rescale(ds.points[train_idx], rmap)
    x_test = rescale(ds.points[test_idx], rmap)
    y_train = ds.labels[train_idx]
    y_test = ds.labels[test_idx]

    spec = _build_spec(config)
    w = b = None
    if config.encoding_mode == "optimized":
        spsa_cfg = replace(config.spsa, rng_seed=child_seed(seed, 2))
        mode = "shots" if shot_mode else "exact"
        protocol = None
        if shot_mode:
            protocol = replace(config.shot_protocol, rng_seed=child_seed(seed, 7))
        w, b, _ = train_encoding(x_train, y_train, spec, spsa_cfg, mode=mode, protocol=protocol)
        spec = spec.with_affine(w, b)

    encoded_train = encode_batch(x_train, spec)
    encoded_test = encode_batch(x_test, spec)
    circuit = config.build_circuit()
    convention = config.convention

    chosen = None
    for attempt in range(config.retry_limit + 1):
        theta0 = stream(seed, 3, attempt).uniform(-np.pi, np.pi, circuit.param_count)
        if shot_mode:
            objective = _make_shot_objective(circuit, encoded_train, y_train, convention,
                                             config.shot_protocol.shots_per_pair,
                                             child_seed(seed, 4, attempt))
            roto_cfg = replace(config.rotosolve, rng_seed=child_seed(seed, 8, attempt))
            theta, steps = rotosolve_minimize(objective, theta0, roto_cfg)
            losses = np.array([s.fitted_min for s in steps])
            eval_rng = stream(seed, 6, attempt)
            train_acc = _shot_accuracy(circuit, theta, encoded_train, y_train, convention,
                                       config.eval_shots, eval_rng)
            test_acc = _shot_accuracy(circuit, theta, encoded_test, y_test, convention,
                                      config.eval_shots, eval_rng)
        else:
            objective = _make_exact_objective(circuit, encoded_train, y_train, convention)
            theta, final_loss, _ = quasi_newton_minimize(
                objective, theta0, max_iterations=config.max_optimizer_iterations)
            losses = np.array([final_loss])
            train_joint = _joint_probs(encoded_train, circuit.unitary(theta))
            test_joint = _joint_probs(encoded_test, circuit.unitary(theta))
            train_acc = _accuracy(train_joint, y_train, convention)
            test_acc = _accuracy(test_joint, y_test, convention)
        gate_acc = train_acc if config.retry_on_train else test_acc
        chosen = (theta, train_acc, test_acc, attempt, losses)
        if gate_acc >= config.retry_threshold:
            break

    theta, train_acc, test_acc, retries, losses = chosen
    return TrialRecord(
        seed=seed,
        train_indices=train_idx,
        test_indices=test_idx,
        theta=theta,
        w=w,
        b=b,
        train_accuracy=train_acc,
        test_accuracy=test_acc,
        retries=retries,
        retries_exhausted=retries == config.retry_limit and
        (train_acc if config.retry_on_train else test_acc) < config.retry_threshold,
        loss_trajectory=losses,
    )


def run_repetitions(config, permutation=None):
    """Test accuracies of ``repetitions`` trials; seeds shared across cells.

    Sharing trial seeds between permutations means every cell sees the same
    sequence of splits, so cell-to-cell spread reflects the orderings rather
    than split luck.
    """
    cfg = config if permutation is None else replace(config, permutation=tuple(permutation))
    records = [run_trial(cfg, child_seed(config.master_seed, rep))
               for rep in range(config.repetitions)]
    return np.array([r.test_accuracy for r in records]), records


@dataclass(frozen=True, eq=False)
class SweepResult:
    """Mean test accuracy per feature ordering, with box-plot statistics."""

    permutations: tuple[tuple[int, ...], ...]
    accuracies: np.ndarray
    cell_means: np.ndarray

    @property
    def box(self):
        q = np.percentile(self.cell_means, [0, 25, 50, 75, 100], method="linear")
        return {"min": q[0], "q1": q[1], "median": q[2], "q3": q[3], "max": q[4]}


def sweep_permutations(config):
    """All orderings for a cell: 12 ordered feature pairs for the one-qubit
    classifier, the 24 full permutations otherwise."""
    k = config.dataset.num_features
    if (config.qudit_dim, config.num_qudits) == (2, 1):
        return tuple(itertools.permutations(range(k), 2))
    return tuple(itertools.permutations(range(k)))


def run_sweep(config):
    """Repetitions for every feature ordering of a fixed-encoding cell."""
    if config.encoding_mode != "fixed":
        raise ValueError("permutation sweeps apply to fixed encodings only")
    perms = sweep_permutations(config)
    rows = []
    for perm in perms:
        accs, _ = run_repetitions(config, permutation=perm)
        rows.append(accs)
    accuracies = np.stack(rows)
    return SweepResult(perms, accuracies, accuracies.mean(axis=1))


# ---------------------------------------------------------------------------
# hardware-style protocol

@dataclass(frozen=True, eq=False)
class HardwareSeedRecord:
    seed: int
    w: np.ndarray
    b: np.ndarray
    theta: np.ndarray
    encoding_reports: list
    accuracy_trajectory: np.ndarray
    initial_accuracy: float
    final_accuracy: float


@dataclass(frozen=True, eq=False)
class HardwareProtocolResult:
    records: list

    @property
    def final_accuracies(self):
        return np.array([r.final_accuracy for r in self.records])

    @property
    def initial_accuracies(self):
        return np.array([r.initial_accuracy for r in self.records])

    @property
    def accuracy_trajectories(self):
        return np.stack([r.accuracy_trajectory for r in self.records])


def run_hardware_protocol(config, num_seeds=8):
    """The shot-budgeted pipeline: SPSA encoding, rotosolve classifier.

    Per seed: split, train the affine encoding from pair-sampled overlap
    estimates, then rotosolve the classifier on finite-shot linear loss,
    recording test accuracy at a larger shot count after every iteration
    (index 0 is the untrained circuit). No retry rule applies here; each seed
    is one experiment.
    """
    if config.encoding_mode != "optimized" or config.shot_protocol is None:
        raise ValueError("the hardware protocol runs the optimized encoding in shot mode")
    ds = config.dataset
    records = []
    for s in range(num_seeds):
        seed = child_seed(config.master_seed, 9, s)
        train_idx, test_idx = split_dataset(ds, seed, config.train_fraction)
        rmap = RescaleMap.fit(ds.points[train_idx])
        x_train = rescale(ds.points[train_idx], rmap)
        x_test = rescale(ds.points[test_idx], rmap)
        y_train = ds.labels[train_idx]
        y_test = ds.labels[test_idx]

        spec = _build_spec(config)
        spsa_cfg = replace(config.spsa, rng_seed=child_seed(seed, 2))
        protocol = replace(config.shot_protocol, rng_seed=child_seed(seed, 7))
        w, b, reports = train_encoding(x_train, y_train, spec, spsa_cfg,
                                       mode="shots", protocol=protocol)
        spec = spec.with_affine(w, b)

        encoded_train = encode_batch(x_train, spec)
        encoded_test = encode_batch(x_test, spec)
        circuit = config.build_circuit()
        convention = config.convention

        objective = _make_shot_objective(circuit, encoded_train, y_train, convention,
                                         config.shot_protocol.shots_per_pair,
                                         child_seed(seed, 4))
        theta0 = stream(seed, 3).uniform(-np.pi, np.pi, circuit.param_count)
        trajectory = np.empty(config.rotosolve.iterations + 1)

        def eval_accuracy(iteration, params):
            rng = stream(seed, 6, iteration)
            return _shot_accuracy(circuit, params, encoded_test, y_test, convention,
                                  config.eval_shots, rng)

        trajectory[0] = eval_accuracy(0, theta0)
        roto_cfg = replace(config.rotosolve, rng_seed=child_seed(seed, 8))
        theta, _ = rotosolve_minimize(
            objective, theta0, roto_cfg,
            on_update=lambda it, params: trajectory.__setitem__(it + 1, eval_accuracy(it + 1, params)),
        )
        records.append(HardwareSeedRecord(
            seed=seed,
            w=w,
            b=b,
            theta=theta,
            encoding_reports=reports,
            accuracy_trajectory=trajectory.copy(),
            initial_accuracy=float(trajectory[0]),
            final_accuracy=float(trajectory[-1]),
        ))
    return HardwareProtocolResult(records)
