"""
Statistical acceptance runs. Minutes to hours each; enable with HQMSA_SLOW=true.
"""
import logging
import os
import tempfile
import unittest

import numpy as np

from HybridQueryMSA.Runner import ExperimentRunner, timing_report
from HybridQueryMSA.Scenario import ScenarioConfig
from HybridQueryMSA.Study import run_study
from HybridQueryMSA.report import number, slow, tags

logger = logging.getLogger(__name__)

WORKERS = os.cpu_count() or 1
ALPHA = 0.05


def runner(out_dir):
    return ExperimentRunner(out_dir=out_dir, print_welcome_message=False)


class TestAcceptance(unittest.TestCase):
    @slow
    @number("9.1")
    @tags("acceptance")
    def test_peptide4_vqe(self):
        config = ScenarioConfig({
            "name": "peptide4", "instance": "peptide4", "seeds": 10, "workers": WORKERS,
            "ansatz": {"kind": "hea", "layers": 2},
            "optimizer": {"method": "parameter-shift", "update": "adam", "iterations": 400, "shots": 2000},
        })
        with tempfile.TemporaryDirectory() as tmp:
            result = runner(tmp).run_scenario(config)
        self.assertEqual(result.minimum, -10.0)
        self.assertGreaterEqual(sum(row["hit"] for row in result.rows), 6)
        self.assertGreaterEqual(sum(row["modal_hit"] for row in result.rows), 5)
        for row in result.rows:
            self.assertGreaterEqual(row["best_energy"], result.minimum)

    @slow
    @number("9.2")
    @tags("acceptance", "study")
    def test_entanglement_sweep(self):
        base = ScenarioConfig({"name": "q12", "instance": "q12", "seeds": 50, "workers": WORKERS,
                               "optimizer": {"iterations": 100}})
        with tempfile.TemporaryDirectory() as tmp:
            result = run_study("entanglement-sweep", base, runner(tmp))
        self.assertLess(result.tests["d=1 < d=0"]["p_value"], ALPHA)
        # Soft: the best hit rate is expected at d=2 but only reported.
        logger.info(f"best hit rate arm: {result.aggregates['best_hit_rate_arm']}")

    @slow
    @number("9.3")
    @tags("acceptance", "study")
    def test_two_stage_cvar(self):
        for instance in ("peptide4", "gattaca"):
            with self.subTest(instance=instance):
                base = ScenarioConfig({
                    "name": instance, "instance": instance, "seeds": 100, "workers": WORKERS,
                    "optimizer": {"method": "parameter-shift", "iterations": 400, "shots": 2000},
                    "cvar": {"r0": 0.6, "warmup": 100, "r_final": 1.0},
                })
                with tempfile.TemporaryDirectory() as tmp:
                    result = run_study("cvar-compare", base, runner(tmp))
                test = result.tests["two-stage < standard"]
                self.assertLessEqual(test["mean_a"], test["mean_b"])

    @slow
    @number("9.4")
    @tags("acceptance", "study")
    def test_qaoa_vs_hea(self):
        base = ScenarioConfig({"name": "q12", "instance": "q12", "seeds": 5, "optimizer": {"iterations": 100}})
        with tempfile.TemporaryDirectory() as tmp:
            result = run_study("qaoa-vs-hea", base, runner(tmp))
        minimum = result.arms["hea"].minimum
        for name, arm in result.arms.items():
            best = min(min(r.expectation for r in trace.records) for trace in arm.traces.values())
            self.assertLessEqual(best, minimum + 0.1 * abs(minimum), name)
        seconds = {name: np.mean(np.concatenate(list(arm.timings.values()))) for name, arm in result.arms.items()}
        self.assertLess(seconds["hea"], seconds["qaoa"])

    @slow
    @number("9.5")
    @tags("acceptance", "study")
    def test_noise_keeps_optimum_modal(self):
        base = ScenarioConfig({"name": "q8", "instance": "q8", "seeds": 10, "workers": WORKERS,
                               "optimizer": {"iterations": 150}})
        with tempfile.TemporaryDirectory() as tmp:
            result = run_study("noise-compare", base, runner(tmp))
        self.assertGreaterEqual(result.arms["noisy"].aggregates["modal_hit_rate"], 0.5)

    @slow
    @number("9.6")
    @tags("acceptance", "timing")
    def test_time_grows_with_qubits(self):
        configs = [ScenarioConfig({"name": name, "instance": name, "optimizer": {"iterations": 5}})
                   for name in ("q4", "q8", "q12", "q16")]
        with tempfile.TemporaryDirectory() as tmp:
            summary = timing_report(configs, tmp)
        self.assertEqual(list(summary["n"]), [4, 8, 12, 16])
        self.assertTrue(np.all(np.diff(summary["mean_seconds"].to_numpy()) > 0))


if __name__ == "__main__":
    unittest.main()
