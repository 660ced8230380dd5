"""Qudit statevector simulation and variational ternary classification.

The package covers the full pipeline: feature encodings onto one or two
qudits, tree-structured and universal classifier circuits, exact and
finite-shot training (quasi-Newton, rotosolve, SPSA), density-matrix-based
encoding optimization, SU(3) angle decompositions, and the benchmarking
drivers with CSV input and SVG output.
"""

from .ansatz import (rl_gate, rl_prime_gate, ttn_one_qudit, ttn_two_qudit,
                     universal_two_qubit)
from .circuit import CircuitGate, ParamCircuit, fixed, slotted
from .datasets import (IRIS_SCHEMA, PENGUINS_SCHEMA, SCHEMAS, DatasetSchema,
                       load_dataset)
from .encoding_training import (EncodingLossReport, ShotProtocol,
                                class_densities, class_features,
                                encoding_loss, overlap_estimate_shots,
                                train_encoding)
from .encodings import (PAD_ANGLE, EncodingSpec, RescaleMap, affine_features,
                        capacity_per_qudit, encode_batch, encode_state,
                        encoding_angles, encoding_circuit,
                        hardware_encoding_circuit, hardware_encoding_params,
                        qudits_required, rescale)
from .experiment import (STANDARD_CELLS, ExperimentConfig,
                         HardwareProtocolResult, LabeledDataset, SweepResult,
                         TrialRecord, child_seed, class_probs, loss_linear,
                         loss_one_qubit, loss_squared, predict_label,
                         run_hardware_protocol, run_repetitions, run_sweep,
                         run_trial, split_dataset, sweep_permutations)
from .gates import GateId, build_gate, eigenvalue_count
from .manifest import RunManifest
from .optimizers import (ObjectiveHandle, RotosolveConfig, SpsaConfig,
                         fd_gradient, quasi_newton_minimize, rotosolve_fit,
                         rotosolve_minimize, spsa_minimize)
from .plotting import BoxGroup, emit_boxplot_svg, five_number
from .state import (ACCUM_TOL, ALGEBRA_TOL, DensityMatrix, QuditState,
                    ShotSampler, UnitaryMatrix, apply_gate,
                    density_from_states, measure_probs, sample_counts,
                    stream, trace_product)
from .su3 import (Su3Decomposition, decompose_su3, hardware_to_rl_prime,
                  verify_rl_equiv)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "1.0.0"
