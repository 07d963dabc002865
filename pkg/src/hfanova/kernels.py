"""Hot-kernel backend selection.

The compiled extension is preferred when present; the pure-numpy fallback keeps
the package importable without a compiler.  HFANOVA_KERNEL={compiled,python}
forces a backend (useful for the benchmark and for debugging).
"""

from __future__ import annotations

import os

from . import _py_kernels

try:
    from . import _kernels_cy
except ImportError:  # pragma: no cover - depends on the build environment
    _kernels_cy = None

_BACKENDS = {"python": _py_kernels}
if _kernels_cy is not None:
    _BACKENDS["compiled"] = _kernels_cy


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def get_backend(name: str):
    return _BACKENDS[name]


_requested = os.environ.get("HFANOVA_KERNEL", "auto").lower()
if _requested == "auto":
    _active = _BACKENDS.get("compiled", _py_kernels)
elif _requested in _BACKENDS:
    _active = _BACKENDS[_requested]
else:
    raise ImportError(
        f"HFANOVA_KERNEL={_requested!r} not available; choices: {available_backends()}"
    )

BACKEND = _active.BACKEND
group_moments = _active.group_moments
block_statistics = _active.block_statistics
replicate_statistics = _active.replicate_statistics
