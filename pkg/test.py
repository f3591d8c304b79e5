"""
Runs every test under tests/ and writes results/test_report.json.

    python test.py                  # fast suite
    HQMSA_SLOW=true python test.py  # plus the statistical acceptance runs
"""
import os
import sys
import unittest

from HybridQueryMSA.Utils import ensure_dir
from HybridQueryMSA.report import JSONTestRunner

here = os.path.dirname(os.path.abspath(__file__))

if __name__ == "__main__":
    suite = unittest.defaultTestLoader.discover(os.path.join(here, "tests"), top_level_dir=here)
    out = ensure_dir(os.path.join(here, "results"))
    with open(os.path.join(out, "test_report.json"), "w") as f:
        result = JSONTestRunner(stream=f, buffer=True).run(suite)
    print(f"{result.testsRun} tests, {len(result.failures)} failures, {len(result.errors)} errors, "
          f"{len(result.skipped)} skipped. Report in results/test_report.json")
    sys.exit(0 if result.wasSuccessful() else 1)
