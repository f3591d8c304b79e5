"""
The variational loop: CVaR estimation from shots, the quenched two-stage
ratio schedule, gradient estimators and Adam.
"""
import json
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
import pandas as pd

from .Alignment import format_index
from .MSAErrors import MSAParameterError
from .Scoring import EnergyTable, QueryEvaluator
from .Simulator import (QAOA, AnsatzSpec, EnergyLike, NoiseConfig, ShotTable, StateVector,
                        apply_1q, apply_cz, as_diagonal, circuit_ops, exact_expectation, prepare,
                        ry_derivative, ry_matrix, sample, sample_noisy)
from .Utils import task_rng

logger = logging.getLogger(__name__)

PARAMETER_SHIFT = "parameter-shift"
SPSA = "spsa"
FINITE_DIFFERENCE = "finite-difference"
AUTO = "auto"
METHODS = (PARAMETER_SHIFT, SPSA, FINITE_DIFFERENCE, AUTO)

@dataclass(frozen=True)
class CVaRConfig:
    r0: float = 1.0
    warmup_iters: int = 0
    r_final: float = 1.0

    def __post_init__(self):
        for name in ("r0", "r_final"):
            r = getattr(self, name)
            if not 0.0 < r <= 1.0:
                raise MSAParameterError(f"CVaR ratio {name} must be in (0, 1], got {r}.")
        if self.warmup_iters < 0:
            raise MSAParameterError("warmup_iters must be >= 0.")

    def ratio(self, iteration: int) -> float:
        return self.r0 if iteration < self.warmup_iters else self.r_final

@dataclass(frozen=True)
class AdamConfig:
    step: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

@dataclass(frozen=True)
class SPSAConfig:
    a: float = 0.2
    c: float = 0.1
    A: float = 10.0
    alpha: float = 0.602
    gamma: float = 0.101

    def a_t(self, t: int) -> float:
        return self.a / (t + 1 + self.A) ** self.alpha

    def c_t(self, t: int) -> float:
        return self.c / (t + 1) ** self.gamma

@dataclass(frozen=True)
class OptimizerConfig:
    """
    update is "adam" or "sgd"; sgd steps with the SPSA a_t sequence when the
    method is SPSA and with adam.step otherwise.
    """
    method: str = AUTO
    update: str = "adam"
    adam: AdamConfig = field(default_factory=AdamConfig)
    spsa: SPSAConfig = field(default_factory=SPSAConfig)
    shots: int = 2000
    max_iters: int = 100
    seed: int = 0
    fd_step: float = 1e-5

    def __post_init__(self):
        if self.method not in METHODS:
            raise MSAParameterError(f"Unknown gradient method '{self.method}', expected one of {METHODS}.")
        if self.update not in ("adam", "sgd"):
            raise MSAParameterError(f"Unknown update rule '{self.update}'.")
        if self.shots < 1:
            raise MSAParameterError("shots must be >= 1.")
        if self.max_iters < 0:
            raise MSAParameterError("max_iters must be >= 0.")
        if self.adam.step <= 0 or self.spsa.a <= 0 or self.spsa.c <= 0 or self.fd_step <= 0:
            raise MSAParameterError("Step sizes must be positive.")

    def resolve_method(self, spec: AnsatzSpec, noise: Optional[NoiseConfig]) -> str:
        if self.method != AUTO:
            return self.method
        if noise is not None and not noise.is_noiseless:
            return SPSA
        return PARAMETER_SHIFT if spec.shiftable else FINITE_DIFFERENCE

# CVaR

def cvar_loss(shot_energies, r: float) -> float:
    """
    Mean of the lowest ceil(r * m) of m shot energies.
    """
    energies = np.sort(np.asarray(shot_energies, dtype=np.float64).ravel())
    if energies.size == 0:
        raise MSAParameterError("CVaR of an empty sample is undefined.")
    if not 0.0 < r <= 1.0:
        raise MSAParameterError(f"CVaR ratio must be in (0, 1], got {r}.")
    # Tolerance keeps r = k/m from rounding up to k + 1 samples.
    tail = max(1, math.ceil(r * energies.size - 1e-9))
    return float(np.mean(energies[:tail]))

def exact_cvar(probabilities: np.ndarray, diagonal: np.ndarray, r: float) -> Tuple[float, np.ndarray]:
    """
    CVaR of the exact output distribution and the diagonal observable whose
    expectation has the same parameter gradient: min(E - VaR, 0) / r with
    VaR held fixed. At r = 1 the observable is the energy itself.
    """
    if r >= 1.0:
        return float(np.dot(probabilities, diagonal)), diagonal
    order = np.argsort(diagonal, kind="stable")
    mass = np.cumsum(probabilities[order])
    cut = min(int(np.searchsorted(mass, r * mass[-1])), len(order) - 1)
    var = diagonal[order[cut]]
    below = diagonal < var
    value = (np.dot(probabilities[below], diagonal[below]) + (r - probabilities[below].sum()) * var) / r
    return float(value), np.minimum(diagonal - var, 0.0) / r

# Gradients

def spsa_gradient(loss_fn: Callable[[np.ndarray], float], theta: np.ndarray, t: int,
                  spsa: SPSAConfig, seed) -> np.ndarray:
    """
    One Rademacher perturbation, two loss evaluations.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    c_t = spsa.c_t(t)
    if c_t <= 0:
        raise MSAParameterError("SPSA perturbation c_t must be positive.")
    delta = rng.integers(0, 2, size=len(theta)) * 2 - 1
    plus = loss_fn(theta + c_t * delta)
    minus = loss_fn(theta - c_t * delta)
    return (plus - minus) / (2.0 * c_t * delta)

def finite_difference_gradient(fn: Callable[[np.ndarray], float], theta: np.ndarray,
                               h: float=1e-5) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    grad = np.zeros_like(theta)
    for k in range(len(theta)):
        step = np.zeros_like(theta)
        step[k] = h
        grad[k] = (fn(theta + step) - fn(theta - step)) / (2 * h)
    return grad

def _shift_gradient(spec: AnsatzSpec, theta: np.ndarray, diagonal: np.ndarray) -> np.ndarray:
    grad = np.zeros_like(theta)
    for k in range(len(theta)):
        shifted = theta.copy()
        shifted[k] += np.pi / 2
        plus = exact_expectation(prepare(spec, shifted), diagonal)
        shifted[k] -= np.pi
        minus = exact_expectation(prepare(spec, shifted), diagonal)
        grad[k] = 0.5 * (plus - minus)
    return grad

def _sweep_gradient(spec: AnsatzSpec, theta: np.ndarray, diagonal: np.ndarray) -> np.ndarray:
    """
    The same values as the shift rule from one forward and one backward pass.
    """
    psi = prepare(spec, theta)
    n = spec.n
    state = psi.amplitudes
    lam = diagonal * state
    grad = np.zeros_like(theta)
    for op in reversed(circuit_ops(spec)):
        if op[0] == "cz":
            apply_cz(state, n, op[1], op[2])
            apply_cz(lam, n, op[1], op[2])
            continue
        q, k = op[1], op[2]
        undo = ry_matrix(-theta[k])
        apply_1q(state, n, q, undo)
        mu = state.copy()
        apply_1q(mu, n, q, ry_derivative(theta[k]))
        grad[k] = 2.0 * np.real(np.vdot(lam, mu))
        apply_1q(lam, n, q, undo)
    return grad

def parameter_shift_gradient(spec: AnsatzSpec, theta: np.ndarray, energy: EnergyLike,
                             mode: str="sweep") -> np.ndarray:
    """
    dC/dtheta_k = [C(theta_k + pi/2) - C(theta_k - pi/2)] / 2 for every rotation angle.
    mode="shift" evaluates the two shifted circuits per angle; mode="sweep"
    gets identical values from an adjoint pass.
    """
    if not spec.shiftable:
        raise MSAParameterError(f"The {spec.kind} ansatz has gates without a two-term shift rule.")
    theta = spec.check(theta)
    diagonal = as_diagonal(energy, spec.n)
    if mode == "shift":
        return _shift_gradient(spec, theta, diagonal)
    if mode == "sweep":
        return _sweep_gradient(spec, theta, diagonal)
    raise MSAParameterError(f"Unknown parameter-shift mode '{mode}'.")

class Adam:
    def __init__(self, config: AdamConfig, size: int):
        self.config = config
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    def update(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        c = self.config
        self.t += 1
        self.m = c.beta1 * self.m + (1 - c.beta1) * grad
        self.v = c.beta2 * self.v + (1 - c.beta2) * grad ** 2
        m_hat = self.m / (1 - c.beta1 ** self.t)
        v_hat = self.v / (1 - c.beta2 ** self.t)
        return theta - c.step * m_hat / (np.sqrt(v_hat) + c.epsilon)

# Loss estimation

def estimate_loss(spec: AnsatzSpec, theta: np.ndarray, evaluator: QueryEvaluator, r: float,
                  shots: int, seed, noise: NoiseConfig=None, energy: EnergyLike=None,
                  psi: StateVector=None) -> Tuple[float, ShotTable]:
    """
    Prepare, sample, score each shot by classical query, then CVaR over the
    shot energies (each shot counted once per occurrence).
    """
    if energy is None and spec.kind == QAOA:
        energy = evaluator
    if noise is not None and not noise.is_noiseless:
        seed_int = seed if not isinstance(seed, np.random.Generator) else int(seed.integers(2 ** 31))
        table = sample_noisy(spec, theta, noise, shots, seed_int, energy=energy)
    else:
        if psi is None:
            psi = prepare(spec, theta, energy=energy)
        table = sample(psi, shots, seed)
    idx = table.indices()
    energies = evaluator.energies(idx)
    counts = np.asarray([table.counts[int(i)] for i in idx])
    return cvar_loss(np.repeat(energies, counts), r), table

# Training

@dataclass
class IterationRecord:
    iteration: int
    theta: np.ndarray
    loss: float
    r: float
    shots: ShotTable
    expectation: Optional[float] = None
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "theta": [float(x) for x in self.theta],
            "loss": self.loss,
            "r": self.r,
            "expectation": self.expectation,
            "shots": self.shots.to_dict()["counts"],
        }

@dataclass
class TrainingTrace:
    records: List[IterationRecord] = field(default_factory=list)
    best_index: Optional[int] = None
    best_energy: float = math.inf
    method: str = None
    n: int = None

    def add(self, record: IterationRecord, evaluator: QueryEvaluator) -> None:
        if not math.isfinite(record.loss):
            raise MSAParameterError(f"Non-finite loss at iteration {record.iteration}.")
        self.records.append(record)
        idx = np.sort(evaluator.resolve(record.shots.indices()))
        energies = evaluator.energies(idx)
        k = int(np.argmin(energies))
        if energies[k] < self.best_energy:
            self.best_energy = float(energies[k])
            self.best_index = int(idx[k])

    @property
    def final(self) -> IterationRecord:
        return self.records[-1]

    @property
    def final_shots(self) -> ShotTable:
        return self.final.shots

    @property
    def final_energy(self) -> float:
        """Expectation at the final parameters when known, else the final loss estimate."""
        last = self.final
        return last.expectation if last.expectation is not None else last.loss

    def losses(self) -> np.ndarray:
        return np.asarray([r.loss for r in self.records])

    def ratios(self) -> np.ndarray:
        return np.asarray([r.r for r in self.records])

    def seconds_per_iteration(self) -> np.ndarray:
        return np.asarray([r.seconds for r in self.records[1:]])

    def to_jsonl(self, path: str) -> str:
        with open(path, "w") as f:
            for record in self.records:
                f.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")
        return path

    def summary(self, evaluator: QueryEvaluator=None) -> dict:
        data = {
            "method": self.method,
            "iterations": len(self.records) - 1,
            "final_loss": self.final.loss,
            "final_expectation": self.final.expectation,
            "best_energy": self.best_energy,
            "best_bitstring": format(self.best_index, f"0{self.n}b") if self.best_index is not None else None,
            "final_modal_bitstring": format(self.final_shots.modal_index(), f"0{self.n}b"),
        }
        if evaluator is not None:
            modal = self.final_shots.resolved(evaluator).modal_index()
            data["final_modal_bitstring"] = format(modal, f"0{self.n}b")
            data["final_modal_energy"] = evaluator(modal)
            data["best_feasible"] = bool(evaluator.feasible_mask([self.best_index])[0])
            data["best_alignment"] = format_index(self.best_index, evaluator.S, sep=" ")
        return data

    def summary_csv(self, path: str) -> str:
        pd.DataFrame({
            "iteration": [r.iteration for r in self.records],
            "loss": self.losses(),
            "r": self.ratios(),
            "expectation": [r.expectation for r in self.records],
        }).to_csv(path, index=False)
        return path

def initial_parameters(spec: AnsatzSpec, seed: int) -> np.ndarray:
    return task_rng(seed, 0).uniform(0.0, 2 * np.pi, size=spec.parameter_count)

def run_vqe(evaluator: QueryEvaluator, spec: AnsatzSpec, config: OptimizerConfig,
            cvar: CVaRConfig=None, noise: NoiseConfig=None, table: EnergyTable=None,
            theta0: np.ndarray=None) -> TrainingTrace:
    """
    Train the circuit. The reported solution is the lowest-energy bitstring
    ever sampled into the trace, not the final modal state.
    """
    cvar = cvar or CVaRConfig()
    method = config.resolve_method(spec, noise)
    if method == PARAMETER_SHIFT and not spec.shiftable:
        raise MSAParameterError(f"The {spec.kind} ansatz cannot use {PARAMETER_SHIFT}.")
    noisy = noise is not None and not noise.is_noiseless
    # Exact methods and QAOA phases need the dense diagonal.
    diagonal = None
    if table is not None:
        diagonal = as_diagonal(table, spec.n)
    elif method in (PARAMETER_SHIFT, FINITE_DIFFERENCE) or spec.kind == QAOA:
        diagonal = as_diagonal(evaluator, spec.n)
    energy = diagonal if spec.kind == QAOA else None

    theta = spec.check(theta0) if theta0 is not None else initial_parameters(spec, config.seed)
    adam = Adam(config.adam, len(theta))
    trace = TrainingTrace(method=method, n=spec.n)

    def evaluate(iteration: int, theta: np.ndarray, seconds: float) -> StateVector:
        r = cvar.ratio(iteration)
        psi = None if noisy else prepare(spec, theta, energy=energy)
        loss, shots = estimate_loss(spec, theta, evaluator, r, config.shots,
                                    task_rng(config.seed, 1, iteration), noise=noise,
                                    energy=energy, psi=psi)
        expectation = None
        if diagonal is not None:
            state = psi if psi is not None else prepare(spec, theta, energy=energy)
            expectation = exact_expectation(state, diagonal)
        trace.add(IterationRecord(iteration, theta.copy(), loss, r, shots, expectation, seconds), evaluator)
        logger.debug(f"iter {iteration} r={r} loss={loss:.4f} expectation={expectation}")
        return psi

    psi = evaluate(0, theta, 0.0)
    for t in range(config.max_iters):
        started = time.perf_counter()
        r = cvar.ratio(t)
        if method == PARAMETER_SHIFT:
            if psi is None:
                psi = prepare(spec, theta)
            _, observable = exact_cvar(psi.probabilities(), diagonal, r)
            grad = parameter_shift_gradient(spec, theta, observable)
        elif method == FINITE_DIFFERENCE:
            def exact_loss(x):
                return exact_cvar(prepare(spec, x, energy=energy).probabilities(), diagonal, r)[0]
            grad = finite_difference_gradient(exact_loss, theta, config.fd_step)
        else:
            stream = task_rng(config.seed, 2, t)
            def sampled_loss(x):
                return estimate_loss(spec, x, evaluator, r, config.shots, stream, noise=noise, energy=energy)[0]
            grad = spsa_gradient(sampled_loss, theta, t, config.spsa, stream)
        if config.update == "adam":
            theta = adam.update(theta, grad)
        else:
            step = config.spsa.a_t(t) if method == SPSA else config.adam.step
            theta = theta - step * grad
        psi = evaluate(t + 1, theta, 0.0)
        trace.final.seconds = time.perf_counter() - started
    logger.info(f"{spec.kind} d={spec.layers} seed={config.seed} {method}: final loss "
                f"{trace.final.loss:.4f}, best sampled energy {trace.best_energy}")
    return trace
