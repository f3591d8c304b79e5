"""
This is the base of the experiment runner.
"""
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from .Histogram import DISPLAY_ROWS, Histogram
from .MSAErrors import MSABaseError, MSASafeEnvError, MSATimeoutError
from .Optimizer import TrainingTrace, run_vqe
from .Oracle import MinimaReport, brute_force_min, build_landscape, export_landscape
from .Scenario import FORMATS, ScenarioConfig
from .Scoring import EnergyTable, build_energy_table, export_energy_table
from .SolutionClass import SolutionClass
from .Timeout import Timeout
from .Utils import default_out_dir, ensure_dir, get_welcome_message

logger = logging.getLogger(__name__)

printed_welcome_message = False

@dataclass
class SeedOutcome:
    seed: int
    trace: TrainingTrace

@dataclass
class StudyResult:
    """
    One scenario (or, with arms, one study). rows holds the per-seed summary
    the aggregates are computed from; timings holds seconds per iteration.
    """
    name: str
    config: dict
    oracle: Optional[MinimaReport] = None
    n: int = None
    rows: List[dict] = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)
    traces: Dict[int, TrainingTrace] = field(default_factory=dict)
    histograms: Dict[int, Histogram] = field(default_factory=dict)
    timings: Dict[int, np.ndarray] = field(default_factory=dict)
    arms: Dict[str, "StudyResult"] = field(default_factory=dict)
    tests: dict = field(default_factory=dict)

    @property
    def minimum(self) -> Optional[float]:
        return self.oracle.global_minimum if self.oracle is not None else None

    def final_energies(self) -> np.ndarray:
        return np.asarray([row["final_energy"] for row in self.rows])

    def to_dict(self) -> dict:
        data = {
            "name": self.name,
            "config": self.config,
            "aggregates": self.aggregates,
            "seeds": self.rows,
        }
        if self.oracle is not None:
            data["oracle"] = self.oracle.to_dict(self.n)
        if self.arms:
            data["arms"] = {name: arm.to_dict() for name, arm in self.arms.items()}
        if self.tests:
            data["tests"] = self.tests
        return data

def seed_row(seed: int, trace: TrainingTrace, histogram: Histogram, minimum: float=None) -> dict:
    modal = histogram.modal()
    row = {
        "seed": seed,
        "method": trace.method,
        "final_energy": trace.final_energy,
        "final_loss": trace.final.loss,
        "best_energy": trace.best_energy,
        "best_bitstring": format(trace.best_index, f"0{trace.n}b"),
        "modal_bitstring": format(modal.index, f"0{trace.n}b"),
        "modal_energy": modal.energy,
        "modal_class": modal.tag.value,
        "hit": None,
        "modal_hit": None,
    }
    if minimum is not None:
        row["hit"] = bool(trace.best_energy == minimum)
        row["modal_hit"] = modal.tag is SolutionClass.optimal
    return row

def aggregate(rows: List[dict], minimum: float=None) -> dict:
    """
    Summary statistics over per-seed rows. Only uses fields written to
    per_seed.csv, so the numbers can be recomputed from that file.
    """
    energies = np.asarray([row["final_energy"] for row in rows], dtype=np.float64)
    best = np.asarray([row["best_energy"] for row in rows], dtype=np.float64)
    data = {
        "seeds": len(rows),
        "mean_final_energy": float(np.mean(energies)),
        "median_final_energy": float(np.median(energies)),
        "std_final_energy": float(np.std(energies, ddof=1)) if len(rows) > 1 else 0.0,
        "mean_best_energy": float(np.mean(best)),
        "hit_rate": None,
        "modal_hit_rate": None,
        "relative_gap": None,
    }
    if minimum is not None:
        data["hit_rate"] = float(np.mean([bool(row["hit"]) for row in rows]))
        data["modal_hit_rate"] = float(np.mean([bool(row["modal_hit"]) for row in rows]))
        if minimum != 0:
            data["relative_gap"] = float(abs(data["mean_final_energy"] - minimum) / abs(minimum))
    return data

def run_seed(data: dict, seed: int, table: EnergyTable=None) -> SeedOutcome:
    """
    One seeded VQE run. Takes the resolved config as a plain dict so it can
    be shipped to a worker process.
    """
    config = ScenarioConfig(data)
    evaluator = config.evaluator()
    try:
        with Timeout(config["timeout"]):
            trace = run_vqe(evaluator, config.ansatz_spec(), config.optimizer_config(seed),
                            config.cvar_config(), config.noise_config(), table=table)
    except Timeout.Timeout:
        raise MSATimeoutError(f"Seed {seed} of '{config.name}' went over {config['timeout']} seconds.")
    return SeedOutcome(seed, trace)

class ExperimentRunner:
    def __init__(self, *,
        out_dir: str=None,
        formats: List[str]=None,
        top_k: int=None,
        workers: int=None,
        print_welcome_message: bool=True,
    ):
        """
        Arguments left as None fall back to each scenario's outputs section.
        """
        if print_welcome_message:
            global printed_welcome_message
            if not printed_welcome_message:
                printed_welcome_message = True
                logger.info(get_welcome_message())
        self.out_dir = out_dir
        self.formats = formats
        self.top_k = top_k
        self.workers = workers
        # Output root of the last scenario seen; error.json goes there.
        self.scenario_dir = None

    # Safe environment

    def safe_env(self, f: Callable[[], any], handler: Callable[[Exception], any]=None):
        try:
            return f()
        except Exception as exc:
            logger.exception("An exception occurred in the safe environment!")
            if handler is not None:
                try:
                    h = handler(exc)
                    if h is not None:
                        return MSASafeEnvError(h)
                except Exception:
                    logger.exception("An exception occurred while executing the exception handler!")
            self.fail(exc)
            return MSASafeEnvError(exc)

    def error_record(self, exc: Exception) -> dict:
        return {
            "error": type(exc).__name__,
            "message": str(exc),
            "info": exc.info if isinstance(exc, MSABaseError) else None,
        }

    def fail(self, exc: Exception) -> str:
        path = os.path.join(ensure_dir(self.out_dir or self.scenario_dir or default_out_dir()), "error.json")
        self.dump_results(path, self.error_record(exc))
        return path

    def dump_results(self, path: str, data: dict) -> str:
        jsondata = json.dumps(data, ensure_ascii=False, sort_keys=True, indent=2, default=str)
        with open(path, "wb") as f:
            f.write(jsondata.encode("ascii", errors="backslashreplace"))
        return path

    # Scenarios

    def settings(self, config: ScenarioConfig):
        outputs = config["outputs"]
        out_dir = self.out_dir or config.out_dir()
        self.scenario_dir = out_dir
        formats = self.formats or outputs["formats"]
        top_k = self.top_k or outputs["top_k"] or DISPLAY_ROWS
        workers = self.workers or config["workers"]
        return out_dir, formats, top_k, workers

    def oracle_report(self, config: ScenarioConfig) -> Optional[MinimaReport]:
        evaluator = config.evaluator()
        if evaluator.n_qubits > config["cap"]:
            return None
        return brute_force_min(evaluator, cap=config["cap"])

    def run_scenario(self, config: ScenarioConfig, out_dir: str=None) -> StudyResult:
        default_dir, formats, top_k, workers = self.settings(config)
        directory = ensure_dir(out_dir or os.path.join(default_dir, config.name))
        evaluator = config.evaluator()
        oracle = self.oracle_report(config)
        minimum = oracle.global_minimum if oracle is not None else None
        table = None
        if oracle is not None:
            table = build_energy_table(evaluator.S, evaluator.W, evaluator.p, cap=config["cap"],
                                       clamp_reference=evaluator.clamp_reference)
        seeds = config.seeds()
        data = config.to_dict()
        logger.info(f"Running '{config.name}': {evaluator.n_qubits} qubits, {len(seeds)} seed(s), "
                    f"{workers} worker(s).")
        if workers > 1 and len(seeds) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(run_seed, [data] * len(seeds), seeds, [table] * len(seeds)))
        else:
            outcomes = [run_seed(data, seed, table) for seed in seeds]

        result = StudyResult(config.name, data, oracle, evaluator.n_qubits)
        for outcome in sorted(outcomes, key=lambda o: o.seed):
            histogram = Histogram(outcome.trace.final_shots, evaluator, minimum)
            row = seed_row(outcome.seed, outcome.trace, histogram, minimum)
            result.rows.append(row)
            result.traces[outcome.seed] = outcome.trace
            result.histograms[outcome.seed] = histogram
            result.timings[outcome.seed] = outcome.trace.seconds_per_iteration()
            logger.info(f"seed {outcome.seed}: final energy {row['final_energy']:.4f}, "
                        f"best {row['best_energy']}, modal {row['modal_bitstring']} ({row['modal_class']})")
            self.emit_seed(directory, outcome, histogram, evaluator, formats, top_k)
        result.aggregates = aggregate(result.rows, minimum)
        self.emit_result(directory, result, config, formats)
        return result

    def emit_seed(self, directory: str, outcome: SeedOutcome, histogram: Histogram, evaluator,
                  formats: List[str], top_k: int) -> None:
        seed_dir = ensure_dir(os.path.join(directory, f"seed_{outcome.seed}"))
        trace = outcome.trace
        if "json" in formats:
            trace.to_jsonl(os.path.join(seed_dir, "trace.jsonl"))
            trace.final_shots.to_json(os.path.join(seed_dir, "shots.json"), evaluator)
            self.dump_results(os.path.join(seed_dir, "histogram.json"), {
                "top": histogram.export(top_k),
                "full": histogram.export(),
                "summary": trace.summary(evaluator),
            })
        if "csv" in formats:
            trace.summary_csv(os.path.join(seed_dir, "trace.csv"))
            trace.final_shots.to_csv(os.path.join(seed_dir, "shots.csv"), evaluator)
            histogram.to_csv(os.path.join(seed_dir, "histogram.csv"))
            histogram.to_csv(os.path.join(seed_dir, f"histogram_top{top_k}.csv"), top_k)

    def emit_result(self, directory: str, result: StudyResult, config: ScenarioConfig=None,
                    formats: List[str]=FORMATS) -> None:
        """
        Result files carry no wall-clock numbers; those go to timing*.csv.
        """
        self.dump_results(os.path.join(directory, "results.json"), result.to_dict())
        if config is not None:
            with open(os.path.join(directory, "config.yaml"), "w") as f:
                f.write(config.to_yaml())
        if "csv" in formats and result.rows:
            pd.DataFrame(result.rows).to_csv(os.path.join(directory, "per_seed.csv"), index=False)
        if result.timings:
            write_timings(directory, {seed: t for seed, t in result.timings.items()}, key="seed")

    # Oracle

    def run_oracle(self, config: ScenarioConfig, local: bool=False, feasible_only: bool=False,
                   landscape: bool=False, table_format: str=None) -> MinimaReport:
        default_dir, _, _, workers = self.settings(config)
        directory = ensure_dir(os.path.join(default_dir, config.name))
        evaluator = config.evaluator()
        report = brute_force_min(evaluator, cap=config["cap"], feasible_only=feasible_only,
                                 local=local, workers=workers)
        self.dump_results(os.path.join(directory, "oracle.json"), report.to_dict(evaluator.n_qubits))
        if landscape:
            graph = build_landscape(evaluator, feasible_only=feasible_only)
            export_landscape(graph, directory)
        if table_format is not None:
            table = build_energy_table(evaluator.S, evaluator.W, evaluator.p, cap=config["cap"],
                                       clamp_reference=evaluator.clamp_reference, workers=workers)
            export_energy_table(table, os.path.join(directory, f"energies.{table_format}"), table_format)
        return report

    # Timing

    def timing_report(self, configs: List[ScenarioConfig], out_dir: str=None) -> pd.DataFrame:
        """
        Mean and standard deviation of seconds per iteration for each qubit count.
        """
        directory = ensure_dir(out_dir or self.out_dir or self.settings(configs[0])[0])
        samples = {}
        for config in configs:
            n = config.sequence_set().n_qubits
            for seed in config.seeds():
                seconds = run_seed(config.to_dict(), seed).trace.seconds_per_iteration()
                samples.setdefault(n, []).append(seconds)
                logger.info(f"timing n={n} seed={seed}: {np.mean(seconds) if len(seconds) else 0.0:.4f} s/iteration")
        return write_timings(directory, {n: np.concatenate(parts) for n, parts in sorted(samples.items())}, key="n")

def write_timings(directory: str, timings: Dict[int, np.ndarray], key: str) -> pd.DataFrame:
    raw = pd.DataFrame([
        {key: k, "iteration": i + 1, "seconds": float(s)}
        for k, seconds in timings.items() for i, s in enumerate(seconds)
    ], columns=[key, "iteration", "seconds"])
    raw.to_csv(os.path.join(directory, "timing_raw.csv"), index=False)
    summary = raw.groupby(key, sort=True)["seconds"].agg(["mean", "std", "count"]).reset_index()
    summary = summary.rename(columns={"mean": "mean_seconds", "std": "std_seconds", "count": "iterations"})
    summary.to_csv(os.path.join(directory, "timing.csv"), index=False)
    return summary

def run_scenario(config: ScenarioConfig, out_dir: str=None) -> StudyResult:
    return ExperimentRunner(out_dir=out_dir, print_welcome_message=False).run_scenario(config)

def timing_report(configs: List[ScenarioConfig], out_dir: str=None) -> pd.DataFrame:
    return ExperimentRunner(out_dir=out_dir, print_welcome_message=False).timing_report(configs)
