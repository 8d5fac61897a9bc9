"""Kernel backend selection.

Two interchangeable implementations of the network kernels live here:
`_core`, a compiled extension, and `_pure`, plain numpy. The active
backend is chosen once at import time. Set ETADM_KERNELS=python or
ETADM_KERNELS=compiled to force one; forcing `compiled` when the
extension was not built raises immediately rather than silently
falling back.
"""

from __future__ import annotations

import os

BACKEND_CHOICES = ("compiled", "python")


def load_backend(name: str):
    """Import and return one backend module by name."""
    if name == "python":
        from . import _pure

        return _pure
    if name == "compiled":
        from . import _core

        return _core
    raise ValueError(f"unknown kernel backend {name!r}; choose from {BACKEND_CHOICES}")


def available_backends() -> tuple[str, ...]:
    names = []
    for name in BACKEND_CHOICES:
        try:
            load_backend(name)
        except ImportError:
            continue
        names.append(name)
    return tuple(names)


def _select():
    forced = os.environ.get("ETADM_KERNELS")
    if forced:
        return load_backend(forced)
    try:
        return load_backend("compiled")
    except ImportError:
        return load_backend("python")


_active = _select()
BACKEND_NAME: str = _active.NAME
forward = _active.forward
loss_and_grads_core = _active.loss_and_grads_core
