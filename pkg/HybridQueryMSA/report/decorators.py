import unittest

from ..Utils import run_slow_tests


class number(object):
    """Simple decorator to add a __number__ property to a function

    Usage: @number("3.1"). The JSON report is sorted by it.
    """
    def __init__(self, val):
        self.val = val

    def __call__(self, func):
        func.__number__ = self.val
        return func


class tags(object):
    """Simple decorator to add a __tags__ property to a function

    Usage: @tags("acceptance", "oracle"). Stacked uses accumulate.
    """
    def __init__(self, *args):
        self.tags = args

    def __call__(self, func):
        func.__tags__ = tuple(getattr(func, "__tags__", ())) + self.tags
        return func


def slow(func):
    """Statistical acceptance runs; skipped unless HQMSA_SLOW=true."""
    func = tags("slow")(func)
    return unittest.skipUnless(run_slow_tests(), "set HQMSA_SLOW=true to run")(func)
