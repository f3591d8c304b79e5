from .decorators import number, tags, slow
from .json_test_runner import JSONTestResult, JSONTestRunner

__all__ = ["number", "tags", "slow", "JSONTestResult", "JSONTestRunner"]
