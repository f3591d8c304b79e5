"""
Named study protocols. Each protocol turns a base scenario into a set of
arms that differ in one setting; run_study runs every arm over the same
seeds and compares their final-energy distributions.
"""
import logging
import os
from typing import Callable, Dict, List, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from .MSAErrors import MSAStudyError
from .Optimizer import FINITE_DIFFERENCE, SPSA
from .Runner import ExperimentRunner, StudyResult
from .Scenario import ScenarioConfig
from .Simulator import HEA, QAOA
from .Utils import ensure_dir

logger = logging.getLogger(__name__)

global_studies = {}

# Used by noise-compare when the base scenario has no noise section.
DEFAULT_STUDY_NOISE = {"single_qubit_rate": 1e-3, "two_qubit_rate": 5e-3, "readout_flip": 1e-2, "trajectories": 8}

class StudyProtocol:
    def __init__(self,
        arms_fn: Callable[[ScenarioConfig], Dict[str, dict]]=None,
        kind: str=None,
        comparisons: List[Tuple[str, str]]=None,
        description: str=None,
    ):
        """
        arms_fn maps the base scenario to {arm name: overrides}. Each
        (a, b) in comparisons is tested one-sided for mean(a) < mean(b).
        """
        self.arms_fn = arms_fn
        self.kind = kind
        self.comparisons = comparisons or []
        self.description = description
        global_studies[kind] = self

    def arms(self, base: ScenarioConfig) -> Dict[str, ScenarioConfig]:
        return {
            name: base.with_overrides(dict(overrides, name=f"{base.name}-{name}"))
            for name, overrides in self.arms_fn(base).items()
        }

def Study(*args, **kwargs):
    """
    Registers an arms function as a study protocol, the same way the
    runner's own protocols below are registered:

    @Study("layer-sweep", comparisons=[("d=2", "d=1")])
    def layer_sweep(base):
        return {f"d={d}": {"ansatz": {"layers": d}} for d in (1, 2)}
    """
    def inner(func):
        StudyProtocol(func, *args, **kwargs)
        return func
    return inner

def welch_less(a, b) -> dict:
    """
    One-sided Welch t-test of mean(a) < mean(b). The p-value is None when
    either side has fewer than two seeds or both are constant.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    data = {"mean_a": float(np.mean(a)), "mean_b": float(np.mean(b)), "statistic": None, "p_value": None}
    if len(a) < 2 or len(b) < 2:
        return data
    res = stats.ttest_ind(a, b, equal_var=False, alternative="less")
    if np.isfinite(res.pvalue):
        data["statistic"] = float(res.statistic)
        data["p_value"] = float(res.pvalue)
    return data

def run_study(kind: str, base: ScenarioConfig, runner: ExperimentRunner=None, out_dir: str=None) -> StudyResult:
    runner = runner or ExperimentRunner(print_welcome_message=False)
    default_dir = runner.settings(base)[0]
    if kind not in global_studies:
        raise MSAStudyError(f"Unknown study kind '{kind}', expected one of {sorted(global_studies)}.")
    protocol = global_studies[kind]
    directory = ensure_dir(out_dir or os.path.join(default_dir, f"{base.name}-{kind}"))
    result = StudyResult(kind, base.to_dict())
    for name, config in protocol.arms(base).items():
        logger.info(f"Study {kind}: arm {name}")
        result.arms[name] = runner.run_scenario(config, out_dir=os.path.join(directory, name.replace("=", "")))

    for a, b in protocol.comparisons:
        result.tests[f"{a} < {b}"] = welch_less(result.arms[a].final_energies(), result.arms[b].final_energies())
    result.aggregates = {name: arm.aggregates for name, arm in result.arms.items()}
    rates = {name: arm.aggregates["hit_rate"] for name, arm in result.arms.items()
             if arm.aggregates.get("hit_rate") is not None}
    if rates:
        result.aggregates["best_hit_rate_arm"] = max(rates, key=lambda name: (rates[name], -list(rates).index(name)))

    distribution = pd.DataFrame([dict(row, arm=name) for name, arm in result.arms.items() for row in arm.rows])
    distribution.to_csv(os.path.join(directory, "distribution.csv"), index=False)
    convergence = pd.DataFrame([
        {"arm": name, "seed": seed, "iteration": record.iteration, "loss": record.loss,
         "r": record.r, "expectation": record.expectation}
        for name, arm in result.arms.items() for seed, trace in arm.traces.items() for record in trace.records
    ])
    convergence.to_csv(os.path.join(directory, "convergence.csv"), index=False)
    runner.dump_results(os.path.join(directory, "study.json"), {
        "kind": kind,
        "config": result.config,
        "aggregates": result.aggregates,
        "tests": result.tests,
        "arms": sorted(result.arms),
    })
    for a, b in protocol.comparisons:
        test = result.tests[f"{a} < {b}"]
        logger.info(f"{kind}: mean({a})={test['mean_a']:.4f} mean({b})={test['mean_b']:.4f} p={test['p_value']}")
    return result

# Protocols

@Study("entanglement-sweep", comparisons=[("d=1", "d=0")],
       description="HEA with 0 to 3 entangling columns.")
def entanglement_sweep(base: ScenarioConfig) -> Dict[str, dict]:
    return {f"d={d}": {"ansatz": {"kind": HEA, "layers": d}} for d in range(4)}

@Study("cvar-compare", comparisons=[("two-stage", "standard")],
       description="Warm-up at r0 < 1 then r = 1, against r = 1 throughout.")
def cvar_compare(base: ScenarioConfig) -> Dict[str, dict]:
    cvar = base["cvar"]
    r0 = cvar["r0"] if cvar["r0"] < 1.0 else 0.6
    warmup = cvar["warmup"] or 100
    # Both arms take the same number of steps, at least 300 of them at r = 1.
    iterations = max(base["optimizer"]["iterations"], warmup + 300)
    return {
        "two-stage": {"cvar": {"r0": r0, "warmup": warmup, "r_final": 1.0},
                      "optimizer": {"iterations": iterations}},
        "standard": {"cvar": {"r0": 1.0, "warmup": 0, "r_final": 1.0},
                     "optimizer": {"iterations": iterations}},
    }

@Study("qaoa-vs-hea", comparisons=[("hea", "qaoa")],
       description="HEA d=2 with parameter-shift against diagonal-phase QAOA with finite differences.")
def qaoa_vs_hea(base: ScenarioConfig) -> Dict[str, dict]:
    p = max(3, base["ansatz"]["layers"]) if base["ansatz"]["kind"] == QAOA else 3
    return {
        "hea": {"ansatz": {"kind": HEA, "layers": 2}, "optimizer": {"method": "auto"}},
        "qaoa": {"ansatz": {"kind": QAOA, "layers": p}, "optimizer": {"method": FINITE_DIFFERENCE}},
    }

@Study("noise-compare", comparisons=[("noiseless", "noisy")],
       description="Exact gradients without noise, SPSA with and without noise.")
def noise_compare(base: ScenarioConfig) -> Dict[str, dict]:
    noise = base["noise"] or DEFAULT_STUDY_NOISE
    return {
        "noiseless": {"noise": None, "optimizer": {"method": "auto"}},
        "noisy": {"noise": dict(noise), "optimizer": {"method": SPSA}},
        "noiseless-spsa": {"noise": None, "optimizer": {"method": SPSA}},
    }
