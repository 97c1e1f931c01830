"""Value-distribution densities of log L(sigma + it) for Euler products."""

import json

from . import _core
from ._core import Error, primes_upto, set_threads, st_ratio, tau

__version__ = _core.version()


def _config(config=None, **overrides):
    merged = dict(config or {})
    merged.update(overrides)
    return json.dumps(merged)


def density(config=None, **overrides):
    """Density grid as a dict with x, y, values (numpy) and meta (dict)."""
    out = _core.density(_config(config, **overrides))
    out["meta"] = json.loads(out["meta"])
    return out


def compare(config=None, **overrides):
    """Discrepancy report of the density against the sampled histogram."""
    return json.loads(_core.compare(_config(config, **overrides)))


def satotate(gamma, xi, x, epsilon=None, cache_dir=None):
    return json.loads(_core.satotate(gamma, xi, x, epsilon, cache_dir))


def local_charfn(n, w, config=None, **overrides):
    """K_n(w) for the n-th prime (0-based) of the configured spec."""
    return _core.local_charfn(_config(config, **overrides), n, complex(w))


__all__ = [
    "Error",
    "compare",
    "density",
    "local_charfn",
    "primes_upto",
    "satotate",
    "set_threads",
    "st_ratio",
    "tau",
]
