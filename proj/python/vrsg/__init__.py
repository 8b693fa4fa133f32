"""Python bindings for the vrsg optimization core.

Config-driven entry points take plain dicts with the same layout as the CLI
JSON configs.
"""

import json as _json

from ._vrsg import (  # noqa: F401
    BudgetError,
    DivergenceError,
    ParseError,
    __version__,
    beta_from_constants,
    gen_synthetic,
    hoffman_theta_bound,
    numerical_rank,
    project_box,
    project_l1_ball,
    prox_l1,
    read_libsvm,
    theoretical_rate,
)
from . import _vrsg


def solve(config):
    """Run one algorithm on one dataset and return the trace as a dict."""
    out = _vrsg.run_config(_json.dumps(config))
    out["resolved_solver"] = _json.loads(out["resolved_solver"])
    return out


def certify(config):
    """Compute the certificate report for a constrained or regularized problem."""
    return _json.loads(_vrsg.certify_config(_json.dumps(config)))


def cli(*args):
    """Invoke the command-line harness; returns (exit_code, stdout, stderr)."""
    return _vrsg.cli([str(a) for a in args])
