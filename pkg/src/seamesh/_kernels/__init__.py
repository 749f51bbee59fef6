"""Kernel backend selection.

Two interchangeable backends provide ``simplex_iterate`` and
``pattern_sinr``: a compiled Cython extension and a pure NumPy fallback.
The compiled one is used when importable; set ``SEAMESH_BACKEND=pure`` or
``SEAMESH_BACKEND=compiled`` to force a choice, or call
:func:`set_backend` at runtime.
"""

import os

from . import pure as _pure

try:
    from . import _speedups as _compiled
except ImportError:
    _compiled = None

STATUS_OPTIMAL = _pure.STATUS_OPTIMAL
STATUS_UNBOUNDED = _pure.STATUS_UNBOUNDED
STATUS_ITER_LIMIT = _pure.STATUS_ITER_LIMIT

_active = None
_active_name = None


def available_backends():
    names = ["pure"]
    if _compiled is not None:
        names.insert(0, "compiled")
    return names


def set_backend(name):
    """Select the kernel backend by name ('compiled' or 'pure')."""
    global _active, _active_name
    if name == "pure":
        _active = _pure
    elif name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available in this install")
        _active = _compiled
    else:
        raise ValueError(f"unknown backend {name!r}")
    _active_name = name
    return name


def backend_name():
    return _active_name


def default_backend():
    """What set_backend would pick with no environment override."""
    return "compiled" if _compiled is not None else "pure"


def simplex_iterate(T, basis, allowed, max_iter):
    return _active.simplex_iterate(T, basis, allowed, max_iter)


def pattern_sinr(gain, noise_w, tx, rx, power_w, out):
    return _active.pattern_sinr(gain, noise_w, tx, rx, power_w, out)


_requested = os.environ.get("SEAMESH_BACKEND")
if _requested:
    set_backend(_requested)
else:
    set_backend("compiled" if _compiled is not None else "pure")
