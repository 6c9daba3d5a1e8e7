"""Heavy-tailed Markov chains with an atom.

Kernels and laws are plain dicts in the same JSON form the command-line tool
reads; a builtin kernel may also be given by name.
"""

import json

from . import _exlab
from ._exlab import EstimationError, GuardTripped, nu_box, set_threads

__all__ = [
    "EstimationError",
    "GuardTripped",
    "constants",
    "cycles",
    "diagnose",
    "kernel",
    "kernels",
    "nu_box",
    "sample_limit",
    "set_threads",
    "simulate",
]

spec_version = _exlab.spec_version


def _kernel_text(k):
    if isinstance(k, str):
        k = {"builtin": k}
    return json.dumps(k)


def kernels():
    """Builtin kernel catalog."""
    return json.loads(_exlab.kernel_catalog())


def kernel(name, **params):
    """Full spec of a builtin kernel with parameter overrides."""
    return json.loads(_exlab.resolve_kernel(json.dumps({"builtin": name, "params": params})))


def simulate(k, n, seed=1, x0=None, cycle_cap=10_000_000):
    """States X_0..X_n and atom flags."""
    states, atom = _exlab.simulate(_kernel_text(k), n, seed, x0, cycle_cap)
    return states, atom.astype(bool)


def cycles(k, n, seed=1):
    """q estimate plus per-cycle lengths and maxima (the initial cycle is dropped)."""
    q, lengths, maxima = _exlab.cycles(_kernel_text(k), n, seed)
    return json.loads(q), lengths, maxima


def constants(g, alpha, n_reps=100_000, seed=1, q=None):
    """Tail-chain constants c, E sup xi(j)^alpha and, with q, the extremal index."""
    return json.loads(_exlab.constants(json.dumps(g), alpha, n_reps, seed, q))


def sample_limit(alpha, q, g, delta, s_max=1.0, mark_floor=1.0, seed=1):
    """One draw of the delta-restricted cluster limit: (times, marks, stack ids)."""
    return _exlab.sample_limit(alpha, q, json.dumps(g), delta, s_max, mark_floor, seed)


def diagnose(k, seed=1):
    """Condition reports with default options."""
    return json.loads(_exlab.diagnose(_kernel_text(k), seed))
