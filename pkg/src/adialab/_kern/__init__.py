"""Stepping-kernel backend selection.

The compiled Cython module is preferred when it imported cleanly; the numpy
fallback is byte-compatible in behavior (same call signatures, same sampling
contract). Set ``ADIALAB_NO_EXT=1`` before import to force the fallback, or
call :func:`use` at runtime (the propagator resolves the functions at call
time, so switching takes effect immediately).
"""

from __future__ import annotations

import os

from . import _fallback

if os.environ.get("ADIALAB_NO_EXT"):
    _core = None
else:
    try:
        from . import _core  # type: ignore[attr-defined]
    except ImportError:
        _core = None

_active = _core if _core is not None else _fallback

HAVE_EXT = _core is not None


def backend() -> str:
    """Name of the active backend, "cython" or "numpy"."""
    return _active.BACKEND


def use(name: str) -> str:
    """Select a backend by name; returns the previously active name."""
    global _active
    prev = _active.BACKEND
    if name == "numpy":
        _active = _fallback
    elif name == "cython":
        if _core is None:
            raise RuntimeError("compiled kernel is not available")
        _active = _core
    else:
        raise ValueError(f"unknown backend {name!r}")
    return prev


def expi_herm_batch(hs, coeff, out=None):
    return _active.expi_herm_batch(hs, coeff, out)


def chain_apply(us, psi, u_accum=None, sample_every=0, k_offset=0,
                psi_samples=None, u_samples=None, sample_pos=0):
    return _active.chain_apply(us, psi, u_accum, sample_every, k_offset,
                               psi_samples, u_samples, sample_pos)
