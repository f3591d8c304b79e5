"""
Shared helpers: version, output locations, environment switches, config
merging and seeded random streams.
"""
import logging
import os
import pathlib

import numpy as np

with open(os.path.join(pathlib.Path(__file__).parent.absolute(), 'VERSION')) as version_file:
    VERSION = version_file.read().strip()

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

def get_welcome_message():
    return f"HybridQueryMSA v{VERSION}: hybrid query encoded MSA solver."

def run_slow_tests() -> bool:
    return os.environ.get("HQMSA_SLOW") == "true"

def default_out_dir() -> str:
    """
    Where results go when neither the scenario nor the command line names a directory.
    """
    return os.environ.get("HQMSA_OUT_DIR", "./results")

def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path

def configure_logging(verbose: bool=False) -> None:
    root = logging.getLogger("HybridQueryMSA")
    if not root.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)
    root.setLevel(logging.DEBUG if verbose else logging.INFO)

def merge(a, b, path=None, override=False):
    """
    merges b into a

    With override, leaf values of b replace those of a; otherwise a
    conflicting leaf raises.
    """
    if path is None: path = []
    for key in b:
        if key in a:
            if isinstance(a[key], dict) and isinstance(b[key], dict):
                merge(a[key], b[key], path + [str(key)], override=override)
            elif a[key] == b[key]:
                pass # same leaf value
            elif override:
                a[key] = b[key]
            else:
                raise ValueError('Conflict at %s' % '.'.join(path + [str(key)]))
        else:
            a[key] = b[key]
    return a

def task_rng(master_seed: int, *task_id: int) -> np.random.Generator:
    """
    Independent random stream for one task, derived from (master_seed, task_id...).
    """
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), *map(int, task_id)]))
