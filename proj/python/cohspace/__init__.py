"""Python front end for the cohspace C++ library."""

import json

from . import _core
from ._core import CohspaceError, KernelSpace, free_dispersion, gram_matrix

__version__ = _core.__version__

__all__ = [
    "CohspaceError",
    "KernelSpace",
    "check_coherence",
    "free_dispersion",
    "gram_matrix",
    "quantum_space",
    "run",
    "solve_spectrum",
    "space",
]


def space(descriptor):
    """Build a catalog space from a descriptor dict (see formats.md)."""
    if not isinstance(descriptor, str):
        descriptor = json.dumps(descriptor)
    return _core.space_from_json(descriptor)


def check_coherence(sp, points, tol=1e-8):
    return _core.check_coherence(sp, [list(p) for p in points], tol)


def quantum_space(sp, points, tol=1e-10):
    return json.loads(_core.quantum_space(sp, [list(p) for p in points], tol))


def solve_spectrum(model, interval, tol=1e-10, grid=10000):
    lo, hi = interval
    return json.loads(_core.solve_spectrum(json.dumps(model), lo, hi, tol, grid))


def run(*args):
    """Run a cohspace CLI command in-process; returns (exit_code, stdout, stderr)."""
    return _core.run_cli([str(a) for a in args])
