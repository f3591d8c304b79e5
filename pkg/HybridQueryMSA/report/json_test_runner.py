"""
unittest runner that writes one JSON report: a record per test (status,
seconds, tags, number, captured output) plus summary counts.
"""
import json
import sys
import time
from unittest import result
from unittest.signals import registerResult

STATUSES = ("passed", "failed", "error", "skipped")


class JSONTestResult(result.TestResult):
    def __init__(self, stream=None, descriptions=True, verbosity=1, records=None):
        super().__init__(stream, descriptions, verbosity)
        self.descriptions = descriptions
        self.records = records if records is not None else []
        self._started = {}

    def describe(self, test) -> str:
        first_line = test.shortDescription()
        return first_line if self.descriptions and first_line else str(test)

    def _marker(self, test, name):
        method = getattr(test, getattr(test, "_testMethodName", ""), None)
        return getattr(method, name, None)

    def _captured(self) -> str:
        if not self.buffer:
            return ""
        out = self._stdout_buffer.getvalue() if self._stdout_buffer else ""
        err = self._stderr_buffer.getvalue() if self._stderr_buffer else ""
        return out + ("\n" if out and err and not out.endswith("\n") else "") + err

    def startTest(self, test):
        self._started[test.id()] = time.perf_counter()
        super().startTest(test)

    def record(self, test, status: str, detail=None):
        started = self._started.pop(test.id(), None)
        entry = {"name": self.describe(test), "id": test.id(), "status": status}
        if started is not None:
            entry["seconds"] = round(time.perf_counter() - started, 3)
        for key, attr in (("number", "__number__"), ("tags", "__tags__")):
            value = self._marker(test, attr)
            if value:
                entry[key] = list(value) if key == "tags" else value
        output = self._captured()
        if detail:
            output += f"{detail}\n"
        if output:
            entry["output"] = output
        self.records.append(entry)

    def addSuccess(self, test):
        super().addSuccess(test)
        self.record(test, "passed")

    def addFailure(self, test, err):
        super().addFailure(test, err)
        # Captured output goes to the report only.
        self._mirrorOutput = False
        self.record(test, "failed", err[1])

    def addError(self, test, err):
        super().addError(test, err)
        self._mirrorOutput = False
        self.record(test, "error", self._exc_info_to_string(err, test))

    def addSkip(self, test, reason):
        super().addSkip(test, reason)
        self.record(test, "skipped", reason)


class JSONTestRunner:
    resultclass = JSONTestResult

    def __init__(self, stream=sys.stdout, descriptions=True, verbosity=1,
                 failfast=False, buffer=True, post_processor=None):
        """
        post_processor, if given, receives the report dict before it is written.
        """
        self.stream = stream
        self.descriptions = descriptions
        self.verbosity = verbosity
        self.failfast = failfast
        self.buffer = buffer
        self.post_processor = post_processor
        self.json_data = {"tests": []}

    def run(self, test):
        outcome = self.resultclass(self.stream, self.descriptions, self.verbosity, self.json_data["tests"])
        registerResult(outcome)
        outcome.failfast = self.failfast
        outcome.buffer = self.buffer
        started = time.perf_counter()
        outcome.startTestRun()
        try:
            test(outcome)
        finally:
            outcome.stopTestRun()

        tests = self.json_data["tests"]
        tests.sort(key=lambda t: (str(t.get("number", "")), t["id"]))
        summary = {status: 0 for status in STATUSES}
        for entry in tests:
            summary[entry["status"]] += 1
        self.json_data["summary"] = {status: count for status, count in summary.items() if count}
        self.json_data["execution_time"] = format(time.perf_counter() - started, "0.2f")
        if self.post_processor is not None:
            self.post_processor(self.json_data)
        json.dump(self.json_data, self.stream, indent=4)
        self.stream.write("\n")
        return outcome
