"""Kernel backend selection: compiled extension if built, else pure Python.

``BACKEND`` records which one is active.  ``get_backend`` exposes both for
the parity tests and the benchmark.
"""

try:
    from . import _speedups as _impl
    BACKEND = "cython"
except ImportError:  # extension not built; fall back
    from . import _fallback as _impl
    BACKEND = "python"

from . import _fallback

chain_batch = _impl.chain_batch
stratum_hist = _impl.stratum_hist
max_coverage = _impl.max_coverage


def get_backend(name):
    if name == "python":
        return _fallback
    if name == "cython":
        from . import _speedups
        return _speedups
    if name == "active":
        return _impl
    raise ValueError(f"unknown backend {name!r}")
