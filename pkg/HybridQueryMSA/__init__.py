from .Alignment import (SequenceSet, AlignmentView, load_fasta, load_fasta_file, encode, decode,
                        position_map, is_feasible, format_index)
from .Scoring import (WeightDictionary, QueryEvaluator, EnergyTable, build_weights, build_energy_table,
                      sp_score, penalty, loss)
from .Simulator import AnsatzSpec, NoiseConfig, ShotTable, StateVector, prepare, exact_expectation, sample
from .Optimizer import CVaRConfig, OptimizerConfig, TrainingTrace, cvar_loss, parameter_shift_gradient, run_vqe
from .Oracle import MinimaReport, brute_force_min, build_landscape, local_minima
from .SolutionClass import SolutionClass
from .Histogram import Histogram
from .Scenario import ScenarioConfig, STAND_IN_INSTANCES
from .Runner import ExperimentRunner, StudyResult, run_scenario, timing_report
from .Study import Study, StudyProtocol, global_studies, run_study
from .MSAErrors import (MSABaseError, MSAInputError, MSADimensionError, MSACapacityError, MSAParameterError,
                        MSAConfigError, MSAStudyError, MSASafeEnvError, MSATimeoutError)

__all__ = [
    "SequenceSet",
    "AlignmentView",
    "load_fasta",
    "load_fasta_file",
    "encode",
    "decode",
    "position_map",
    "is_feasible",
    "format_index",
    "WeightDictionary",
    "QueryEvaluator",
    "EnergyTable",
    "build_weights",
    "build_energy_table",
    "sp_score",
    "penalty",
    "loss",
    "AnsatzSpec",
    "NoiseConfig",
    "ShotTable",
    "StateVector",
    "prepare",
    "exact_expectation",
    "sample",
    "CVaRConfig",
    "OptimizerConfig",
    "TrainingTrace",
    "cvar_loss",
    "parameter_shift_gradient",
    "run_vqe",
    "MinimaReport",
    "brute_force_min",
    "build_landscape",
    "local_minima",
    "SolutionClass",
    "Histogram",
    "ScenarioConfig",
    "STAND_IN_INSTANCES",
    "ExperimentRunner",
    "StudyResult",
    "run_scenario",
    "timing_report",
    "Study",
    "StudyProtocol",
    "global_studies",
    "run_study",
    "MSABaseError",
    "MSAInputError",
    "MSADimensionError",
    "MSACapacityError",
    "MSAParameterError",
    "MSAConfigError",
    "MSAStudyError",
    "MSASafeEnvError",
    "MSATimeoutError",
]
