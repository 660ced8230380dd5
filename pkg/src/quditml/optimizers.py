"""Parameter optimization strategies for the classifier and encoding circuits.

Three optimizers cover the two operating regimes: a bounded quasi-Newton
minimizer with explicit central-difference gradients for exact-probability
simulation, coordinate-wise rotosolve with first-harmonic fits for the
shot-based pipeline, and SPSA for the encoding map. All are deterministic
given their seeds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .state import stream


@dataclass(frozen=True)
class ObjectiveHandle:
    """A loss function over a fixed-length real parameter vector."""

    evaluate: Callable[[np.ndarray], float]
    dimension: int


def counted(objective):
    """Wrap an ObjectiveHandle so calls are counted (for evaluation budgets)."""
    counter = {"calls": 0}

    def evaluate(x):
        counter["calls"] += 1
        return objective.evaluate(x)

    return ObjectiveHandle(evaluate, objective.dimension), counter


def fd_gradient(f, x, step=1e-6):
    """Central-difference gradient with an absolute step per coordinate."""
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.size):
        bump = np.zeros_like(x)
        bump[i] = step
        grad[i] = (f(x + bump) - f(x - bump)) / (2 * step)
    return grad


def quasi_newton_minimize(objective, init, gtol=1e-8, ftol=1e-12, bounds=None, max_iterations=500,
                          fd_step=1e-6):
    """Limited-memory quasi-Newton descent with finite-difference gradients.

    Returns (parameters, final loss, iterations). Stops at the usual
    stationarity tests: projected-gradient norm below gtol or relative loss
    change below ftol. A non-finite objective value aborts with a diagnostic.
    """
    x0 = np.asarray(init, dtype=float)

    def fun(x):
        value = objective.evaluate(x)
        if not np.isfinite(value):
            raise FloatingPointError(f"objective returned non-finite value {value!r} at {x!r}")
        return float(value)

    result = minimize(
        fun,
        x0,
        method="L-BFGS-B",
        jac=lambda x: fd_gradient(fun, x, fd_step),
        bounds=bounds,
        options={"gtol": gtol, "ftol": ftol, "maxiter": max_iterations},
    )
    return result.x, float(result.fun), int(result.nit)


@dataclass(frozen=True)
class RotosolveConfig:
    """Sweep settings: 16 uniform angles on [-pi, pi) per parameter update.

    One iteration sweeps a single parameter, chosen by a seeded random order
    in which no parameter repeats before all others have been swept.
    """

    samples_per_sweep: int = 16
    iterations: int = 32
    rng_seed: int = 0

    def __post_init__(self):
        if self.samples_per_sweep < 4:
            raise ValueError("need at least 4 sweep samples to fit a first harmonic")
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")


def _wrap_angle(x):
    """Wrap to (-pi, pi]."""
    y = (x + np.pi) % (2 * np.pi) - np.pi
    return np.pi if y == -np.pi else float(y)


def rotosolve_fit(angles, losses):
    """Least-squares first-harmonic fit c + A cos(theta - phase).

    Returns (amplitude, phase, offset, argmin). On a uniform grid this is the
    exact discrete Fourier projection. A flat curve (amplitude below 1e-12)
    gets argmin 0 by convention.
    """
    angles = np.asarray(angles, dtype=float)
    losses = np.asarray(losses, dtype=float)
    design = np.column_stack([np.ones_like(angles), np.cos(angles), np.sin(angles)])
    (offset, ac, asn), *_ = np.linalg.lstsq(design, losses, rcond=None)
    amplitude = float(np.hypot(ac, asn))
    phase = float(np.arctan2(asn, ac))
    argmin = _wrap_angle(phase + np.pi) if amplitude > 1e-12 else 0.0
    return amplitude, phase, float(offset), argmin


@dataclass(frozen=True)
class RotosolveStep:
    """Record of one coordinate update."""

    iteration: int
    param_index: int
    argmin: float
    amplitude: float
    offset: float
    fitted_min: float
    fit_residual: float


def rotosolve_minimize(objective, init, config, on_update=None):
    """Coordinate descent by sinusoidal fits, one parameter per iteration.

    Each iteration replaces one parameter with the argmin of a first-harmonic
    fit through ``samples_per_sweep`` fresh evaluations; the previous value of
    the swept parameter is discarded. ``on_update(iteration, params)`` runs
    after each update, letting callers record their own loss trajectory
    without spending extra objective evaluations here.
    """
    x = np.asarray(init, dtype=float).copy()
    dim = x.size
    rng = stream(config.rng_seed)
    grid = np.linspace(-np.pi, np.pi, config.samples_per_sweep, endpoint=False)
    trajectory = []
    order = None
    for it in range(config.iterations):
        if it % dim == 0:
            order = rng.permutation(dim)
        j = int(order[it % dim])
        losses = np.empty(grid.size)
        for k, theta in enumerate(grid):
            x[j] = theta
            losses[k] = objective.evaluate(x)
        amplitude, phase, offset, argmin = rotosolve_fit(grid, losses)
        x[j] = argmin
        fitted = offset + amplitude * np.cos(grid - phase)
        trajectory.append(RotosolveStep(
            iteration=it,
            param_index=j,
            argmin=argmin,
            amplitude=amplitude,
            offset=offset,
            fitted_min=offset - amplitude,
            fit_residual=float(np.max(np.abs(fitted - losses))),
        ))
        if on_update is not None:
            on_update(it, x.copy())
    return x, trajectory


@dataclass(frozen=True)
class SpsaConfig:
    """Standard decaying-gain SPSA schedule.

    a_k = a / (A + k + 1)^alpha and c_k = c / (k + 1)^gamma with Bernoulli
    +-1 perturbations. ``a=None`` asks the caller to calibrate the first step
    size before running (see encoding_training.train_encoding). The default
    c = 0.2 is sized against the shot-budgeted encoding objective, where a
    500-pair x 10-shot loss estimate carries noise of roughly 0.02-0.03:
    smaller perturbations let that noise dominate the two-point difference
    and occasionally stall a 100-iteration run entirely.
    """

    max_iterations: int = 100
    a: float | None = None
    c: float = 0.2
    A: float = 10.0
    alpha: float = 0.602
    gamma: float = 0.101
    rng_seed: int = 0

    def __post_init__(self):
        if self.a is not None and self.a <= 0:
            raise ValueError("gain a must be positive")
        if self.c <= 0:
            raise ValueError("gain c must be positive")
        if not (0 < self.alpha <= 1 and 0 < self.gamma <= 1):
            raise ValueError("alpha and gamma must lie in (0, 1]")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")

    def replace_a(self, a):
        return SpsaConfig(self.max_iterations, float(a), self.c, self.A, self.alpha,
                          self.gamma, self.rng_seed)


@dataclass(frozen=True)
class SpsaStep:
    iteration: int
    loss_plus: float
    loss_minus: float


def spsa_minimize(objective, init, config):
    """Simultaneous-perturbation descent: exactly two evaluations per iteration.

    Non-finite evaluations skip the update for that iteration while the gain
    schedule keeps decaying.
    """
    if config.a is None:
        raise ValueError("SpsaConfig.a is unset; calibrate or choose a gain first")
    x = np.asarray(init, dtype=float).copy()
    rng = stream(config.rng_seed)
    trajectory = []
    for k in range(config.max_iterations):
        a_k = config.a / (config.A + k + 1) ** config.alpha
        c_k = config.c / (k + 1) ** config.gamma
        delta = rng.integers(0, 2, x.size) * 2.0 - 1.0
        loss_plus = float(objective.evaluate(x + c_k * delta))
        loss_minus = float(objective.evaluate(x - c_k * delta))
        trajectory.append(SpsaStep(k, loss_plus, loss_minus))
        if not (np.isfinite(loss_plus) and np.isfinite(loss_minus)):
            continue
        # delta entries are +-1, so elementwise division equals multiplication.
        gradient = (loss_plus - loss_minus) / (2 * c_k) * delta
        x = x - a_k * gradient
    return x, trajectory
