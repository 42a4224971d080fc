"""Hot kernels with a compiled backend and a pure-Python fallback.

The compiled extension is used when it was built and importable; setting
``HETERO_ORCH_PURE_PYTHON=1`` forces the fallback. Both backends return
bit-identical results.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

try:
    from . import _ckernels  # type: ignore[attr-defined]
except ImportError:  # extension not built
    _ckernels = None


def available_backends() -> dict[str, ModuleType]:
    backends: dict[str, ModuleType] = {"python": _pykernels}
    if _ckernels is not None:
        backends["compiled"] = _ckernels
    return backends


def _select() -> tuple[str, ModuleType]:
    if os.environ.get("HETERO_ORCH_PURE_PYTHON", "") not in ("", "0") or _ckernels is None:
        return "python", _pykernels
    return "compiled", _ckernels


BACKEND, _impl = _select()

exact_search = _impl.exact_search
fluid_serve = _impl.fluid_serve

__all__ = ["BACKEND", "available_backends", "exact_search", "fluid_serve"]
