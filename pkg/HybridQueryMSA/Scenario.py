"""
Scenario files: YAML, validated in full before any compute.

    schema: 1
    name: peptide4
    instance: peptide4            # or sequences: [...] / fasta: path
    L: 5
    p: 1.5
    ansatz: {kind: hea, layers: 2, topology: linear}
    optimizer: {method: parameter-shift, iterations: 400, shots: 2000}
    cvar: {r0: 0.6, warmup: 100, r_final: 1.0}
    noise: {single_qubit_rate: 0.001, two_qubit_rate: 0.001, readout_flip: 0.0}
    seeds: 10                  # a count (seeds 0..9) or an explicit list
    outputs: {dir: ./results, formats: [json, csv], top_k: 10}
"""
import copy
import logging
import os
from typing import List, Optional

import yaml

from .Alignment import SequenceSet, load_fasta_file
from .MSAErrors import MSABaseError, MSAConfigError
from .Optimizer import METHODS, AdamConfig, CVaRConfig, OptimizerConfig, SPSAConfig
from .Scoring import DEFAULT_CAP, QueryEvaluator, build_weights
from .Simulator import AnsatzSpec, NoiseConfig
from .Utils import default_out_dir, merge

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
FORMATS = ("json", "csv")

# Desk-scale instances. peptide4 is the four-peptide benchmark; the others
# are stand-ins sized at 4 to 20 qubits.
STAND_IN_INSTANCES = {
    "peptide4": {"sequences": ["AAKGT", "AT", "AKG", "KT"], "L": 5, "reference_index": 0},
    "gattaca": {"sequences": ["GATTACA", "GCATTACA"], "L": 10},
    "q4": {"sequences": ["AG", "G"], "L": 2},
    "q8": {"sequences": ["AKG", "AG"], "L": 4},
    "q12": {"sequences": ["AKGT", "AGT", "KT"], "L": 4},
    "q16": {"sequences": ["AKGT", "AGT", "AKT", "KG"], "L": 4},
}

NOISE_DEFAULTS = {"single_qubit_rate": 0.0, "two_qubit_rate": 0.0, "readout_flip": 0.0, "trajectories": 8}

DEFAULTS = {
    "schema": SCHEMA_VERSION,
    "name": "scenario",
    "instance": None,
    "sequences": None,
    "fasta": None,
    "L": None,
    "p": 1.5,
    "reference_index": None,
    "clamp_reference": False,
    "ansatz": {"kind": "hea", "layers": 2, "topology": "linear"},
    "optimizer": {
        "method": "auto",
        "update": "adam",
        "iterations": 100,
        "shots": 2000,
        "fd_step": 1e-5,
        "adam": {"step": 0.05, "beta1": 0.9, "beta2": 0.999, "epsilon": 1e-8},
        "spsa": {"a": 0.2, "c": 0.1, "A": 10.0, "alpha": 0.602, "gamma": 0.101},
    },
    "cvar": {"r0": 1.0, "warmup": 0, "r_final": 1.0},
    "noise": None,
    "seeds": 1,
    "workers": 1,
    "timeout": None,
    "cap": DEFAULT_CAP,
    "outputs": {"dir": None, "formats": list(FORMATS), "top_k": 10},
}

# Keys whose value is a free-form leaf even though the default is None or a dict.
_LEAVES = {"noise", "sequences", "seeds", "outputs.formats"}

def _unknown_keys(data: dict, template: dict, path: str="") -> List[str]:
    messages = []
    for key, value in data.items():
        dotted = f"{path}{key}"
        if key not in template:
            messages.append(f"{dotted}: unknown key")
        elif isinstance(template[key], dict) and dotted not in _LEAVES:
            if not isinstance(value, dict):
                messages.append(f"{dotted}: expected a mapping")
            else:
                messages.extend(_unknown_keys(value, template[key], dotted + "."))
    return messages

class ScenarioConfig:
    def __init__(self, data: dict=None):
        data = copy.deepcopy(data or {})
        if not isinstance(data, dict):
            raise MSAConfigError(["<root>: a scenario must be a mapping"])
        errors = _unknown_keys(data, DEFAULTS)
        if isinstance(data.get("noise"), dict):
            errors.extend(_unknown_keys(data["noise"], NOISE_DEFAULTS, "noise."))
        if errors:
            raise MSAConfigError(errors)
        resolved = merge(copy.deepcopy(DEFAULTS), data, override=True)
        if resolved["noise"] is not None:
            resolved["noise"] = merge(dict(NOISE_DEFAULTS), resolved["noise"], override=True)
        self.data = resolved
        self.validate()

    @classmethod
    def from_file(cls, path: str) -> "ScenarioConfig":
        with open(path, "r") as f:
            try:
                data = yaml.safe_load(f) or {}
            except yaml.YAMLError as e:
                raise MSAConfigError([f"{path}: not valid YAML ({e})"])
        base = os.path.dirname(os.path.abspath(path))
        if isinstance(data, dict) and isinstance(data.get("fasta"), str) and not os.path.isabs(data["fasta"]):
            data["fasta"] = os.path.join(base, data["fasta"])
        return cls(data)

    def with_overrides(self, overrides: dict) -> "ScenarioConfig":
        data = copy.deepcopy(self.data)
        return ScenarioConfig(merge(data, copy.deepcopy(overrides), override=True))

    def to_dict(self) -> dict:
        return copy.deepcopy(self.data)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.data, sort_keys=True)

    def __getitem__(self, key):
        return self.data[key]

    # Validation

    def validate(self) -> None:
        d = self.data
        errors = []

        def check(condition, message):
            if not condition:
                errors.append(message)

        check(d["schema"] == SCHEMA_VERSION, f"schema: unsupported version {d['schema']}, expected {SCHEMA_VERSION}")
        sources = [k for k in ("instance", "sequences", "fasta") if d[k] is not None]
        check(len(sources) == 1, "instance/sequences/fasta: exactly one sequence source is required")
        if d["instance"] is not None:
            check(d["instance"] in STAND_IN_INSTANCES,
                  f"instance: unknown instance '{d['instance']}', expected one of {sorted(STAND_IN_INSTANCES)}")
        if d["sequences"] is not None:
            check(isinstance(d["sequences"], list) and all(isinstance(s, str) for s in d["sequences"]),
                  "sequences: expected a list of strings")
        check(d["L"] is None or (isinstance(d["L"], int) and d["L"] >= 1), "L: expected a positive integer")
        check(isinstance(d["p"], (int, float)) and d["p"] > 0, "p: the penalty must be positive for a run")
        check(isinstance(d["clamp_reference"], bool), "clamp_reference: expected true or false")
        opt = d["optimizer"]
        check(opt["method"] in METHODS, f"optimizer.method: expected one of {METHODS}")
        check(isinstance(opt["iterations"], int) and opt["iterations"] >= 0, "optimizer.iterations: expected an integer >= 0")
        check(isinstance(opt["shots"], int) and opt["shots"] >= 1, "optimizer.shots: expected an integer >= 1")
        seeds = d["seeds"]
        check((isinstance(seeds, int) and seeds >= 1) or
              (isinstance(seeds, list) and seeds and all(isinstance(s, int) for s in seeds)),
              "seeds: expected a positive count or a non-empty list of integers")
        check(isinstance(d["workers"], int) and d["workers"] >= 1, "workers: expected an integer >= 1")
        check(d["timeout"] is None or (isinstance(d["timeout"], int) and d["timeout"] > 0),
              "timeout: expected a positive number of seconds")
        check(isinstance(d["cap"], int) and 1 <= d["cap"] <= 30, "cap: expected an integer in [1, 30]")
        out = d["outputs"]
        check(isinstance(out["formats"], list) and all(f in FORMATS for f in out["formats"]),
              f"outputs.formats: expected a list drawn from {FORMATS}")
        check(isinstance(out["top_k"], int) and out["top_k"] >= 1, "outputs.top_k: expected an integer >= 1")
        if errors:
            raise MSAConfigError(errors)

        # Module preconditions, reported against the field that feeds them.
        for name, build in (("sequences", self.sequence_set), ("ansatz", self.ansatz_spec),
                            ("optimizer", lambda: self.optimizer_config(0)), ("cvar", self.cvar_config),
                            ("noise", self.noise_config)):
            try:
                build()
            except MSABaseError as e:
                errors.append(f"{name}: {e.info}")
            except (TypeError, ValueError) as e:
                errors.append(f"{name}: {e}")
        if not errors:
            S = self.sequence_set()
            check(S.N >= 2, "sequences: at least two sequences are needed to align")
            check(S.n_qubits <= d["cap"], f"L: {S.n_qubits} qubits is over the cap of {d['cap']}")
            if d["clamp_reference"]:
                check(S.reference_index is not None, "clamp_reference: needs reference_index")
            cvar = self.cvar_config()
            if cvar.r0 < 1.0 and cvar.warmup_iters > 0:
                check(cvar.warmup_iters < opt["iterations"],
                      f"cvar.warmup: {cvar.warmup_iters} warm-up iterations leave no steps at r_final "
                      f"within optimizer.iterations = {opt['iterations']}")
        if errors:
            raise MSAConfigError(errors)

    # Builders

    @property
    def name(self) -> str:
        return str(self.data["name"])

    def sequence_set(self) -> SequenceSet:
        d = self.data
        if d["instance"] is not None:
            inst = STAND_IN_INSTANCES[d["instance"]]
            L = d["L"] if d["L"] is not None else inst.get("L")
            ref = d["reference_index"] if d["reference_index"] is not None else inst.get("reference_index")
            return SequenceSet.from_strings(inst["sequences"], L=L, reference_index=ref)
        if d["fasta"] is not None:
            return load_fasta_file(d["fasta"], L=d["L"], reference_index=d["reference_index"])
        return SequenceSet.from_strings(d["sequences"], L=d["L"], reference_index=d["reference_index"])

    def evaluator(self) -> QueryEvaluator:
        S = self.sequence_set()
        return QueryEvaluator(S, build_weights(S), float(self.data["p"]),
                              clamp_reference=self.data["clamp_reference"])

    def ansatz_spec(self) -> AnsatzSpec:
        a = self.data["ansatz"]
        return AnsatzSpec(a["kind"], self.sequence_set().n_qubits, int(a["layers"]), a["topology"])

    def optimizer_config(self, seed: int) -> OptimizerConfig:
        o = self.data["optimizer"]
        return OptimizerConfig(method=o["method"], update=o["update"], adam=AdamConfig(**o["adam"]),
                               spsa=SPSAConfig(**o["spsa"]), shots=int(o["shots"]),
                               max_iters=int(o["iterations"]), seed=int(seed), fd_step=float(o["fd_step"]))

    def cvar_config(self) -> CVaRConfig:
        c = self.data["cvar"]
        return CVaRConfig(r0=float(c["r0"]), warmup_iters=int(c["warmup"]), r_final=float(c["r_final"]))

    def noise_config(self) -> Optional[NoiseConfig]:
        if self.data["noise"] is None:
            return None
        return NoiseConfig(**self.data["noise"])

    def seeds(self) -> List[int]:
        seeds = self.data["seeds"]
        return list(range(seeds)) if isinstance(seeds, int) else list(seeds)

    def out_dir(self) -> str:
        return self.data["outputs"]["dir"] or default_out_dir()
