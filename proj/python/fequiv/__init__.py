"""Permutation symmetry, covering bounds and basin experiments for feed-forward networks.

Networks are plain dicts in the CLI's JSON network format:
{"arch": {"d0", "hidden", "out", "activations"}, "layers": [{"W", "b"}, ...]}.
"""

import json

from . import _core
from ._core import (
    ConfigError,
    DomainError,
    Error,
    NumericError,
    StructuralError,
    UnsupportedTransformError,
    deep_covering_bound,
    effective_volume,
    entropy_comparison,
    exact_covering_number,
    exact_packing_number,
    greedy_covering_estimate,
    shallow_covering_bound,
    stirling_bracket,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "Error",
    "NumericError",
    "StructuralError",
    "UnsupportedTransformError",
    "amplification_check",
    "apply_permutation",
    "canonicalize",
    "check_equivalence",
    "deep_covering_bound",
    "effective_volume",
    "entropy_comparison",
    "exact_covering_number",
    "exact_packing_number",
    "forward",
    "greedy_covering_estimate",
    "shallow_covering_bound",
    "stirling_bracket",
]


def forward(net, x):
    return _core.forward(json.dumps(net), list(x))


def apply_permutation(net, perms):
    spec = [list(p) for p in perms]
    return json.loads(_core.apply_permutation(json.dumps(net), json.dumps(spec)))


def canonicalize(net):
    return json.loads(_core.canonicalize(json.dumps(net)))


def check_equivalence(a, b, radius=1.0, samples=4096, seed=0, tolerance=1e-7):
    return json.loads(_core.check_equivalence(json.dumps(a), json.dumps(b), radius, samples, seed, tolerance))


def amplification_check(net, a=-1.0, b=1.0, seed=0, n_draws=10000):
    return json.loads(_core.amplification_check(json.dumps(net), a, b, seed, n_draws))
