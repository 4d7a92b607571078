"""hsilab: a small hyperspectral-image denoising laboratory.

Wavelet-domain adaptive singular-value shrinkage with a hand-written,
stabilized SVD backward pass, inside a coarse/refine iterative network;
plus synthetic noise models, quality metrics, a toy trainer and a CLI.

Submodules are imported lazily so the CLI can configure thread environment
variables before numpy loads.
"""

from __future__ import annotations

import importlib

__version__ = "0.1.0"

_SUBMODULES = (
    "checkpoint",
    "cli",
    "cubeio",
    "errors",
    "layers",
    "linalg",
    "lowrank",
    "metrics",
    "network",
    "noise",
    "report",
    "trainer",
    "wavelet",
)


def __getattr__(name):
    if name in _SUBMODULES:
        return importlib.import_module(f".{name}", __name__)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__():
    return sorted(list(globals()) + list(_SUBMODULES))
