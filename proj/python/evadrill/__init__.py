"""Python access to the EVA drill core: plans, profiles, batches, logs."""

import json
import os

from . import _eva
from ._eva import AnalysisError, LogDecodeError, SummaryError

__version__ = _eva.version()

__all__ = [
    "AnalysisError",
    "LogDecodeError",
    "SummaryError",
    "analyze",
    "decode_log",
    "encode_log",
    "fit_profile",
    "load_plan",
    "load_profile",
    "load_records",
    "plan_digest",
    "profile_distance",
    "replay",
    "sample_plan",
    "simulate",
    "summarize_log",
    "validate_plan",
]


def _path(p):
    return os.fspath(p)


def _profile_text(profile):
    return profile if isinstance(profile, str) else json.dumps(profile)


def validate_plan(path, cell_size=0.5):
    """Violations found in a plan file; empty when it is usable."""
    return _eva.validate_plan(_path(path), cell_size)


def load_plan(path):
    return json.loads(_eva.load_plan(_path(path)))


def plan_digest(path):
    return _eva.plan_digest(_path(path))


def fit_profile(records_path, alpha=0.0):
    """Profile fitted from a records CSV or a directory of logs."""
    return json.loads(_eva.fit_profile(_path(records_path), alpha))


def load_profile(path):
    return json.loads(_eva.load_profile(_path(path)))


def profile_distance(a, b):
    return _eva.profile_distance(_profile_text(a), _profile_text(b))


def sample_plan(profile, seed):
    return json.loads(_eva.sample_plan(_profile_text(profile), seed))


def simulate(plan_path, profile, n_agents, seed, isolated=False, time_limit_s=900.0, out_dir=None):
    """Runs a batch; returns {"records": [...], "plans": [...]}.

    With out_dir, also writes one .evlog per agent plus records.csv there.
    """
    out = None if out_dir is None else _path(out_dir)
    return json.loads(
        _eva.simulate(_path(plan_path), _profile_text(profile), n_agents, seed, isolated, time_limit_s, out)
    )


def load_records(path):
    return json.loads(_eva.load_records(_path(path)))


def analyze(path, format="text"):
    return _eva.analyze(_path(path), format)


def decode_log(text, lenient=False):
    return json.loads(_eva.decode_log(text, lenient))


def encode_log(log):
    return _eva.encode_log(json.dumps(log))


def summarize_log(text):
    return json.loads(_eva.summarize_log(text))


def replay(log_path, plan_path):
    return json.loads(_eva.replay(_path(log_path), _path(plan_path)))
