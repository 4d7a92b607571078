"""Single-level 2-D Haar transform on the trailing two axes.

Analysis uses the four integer kernels

    LL = [[ 1,  1], [ 1,  1]]    LH = [[-1, -1], [ 1,  1]]
    HL = [[-1,  1], [-1,  1]]    HH = [[ 1, -1], [-1,  1]]

applied as stride-2 valid cross-correlations to every (leading...) slice, so
for a 2x2 block [[a, b], [c, d]]:

    ll = a + b + c + d      lh = -a - b + c + d
    hl = -a + b - c + d     hh =  a - b - c + d

The synthesis kernels are the transposes scaled by 1/4 (the analysis matrix H
satisfies H H^T = 4 I), which makes idwt2_haar an exact inverse up to float
rounding. ``dwt_backward`` / ``idwt_backward`` are the exact adjoints of
analysis and synthesis, used by the hand-written backward passes.

Feature maps are typically (channels, bands, H, W) but any array with even
trailing spatial extents is accepted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "WaveletQuad",
    "dwt2_haar",
    "idwt2_haar",
    "dwt_backward",
    "idwt_backward",
]


@dataclass
class WaveletQuad:
    """The four stride-2 Haar subbands; all share one shape (..., H/2, W/2)."""

    ll: np.ndarray
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray

    def __post_init__(self):
        if not (self.ll.shape == self.lh.shape == self.hl.shape == self.hh.shape):
            raise ValueError(
                "subband shapes differ: "
                f"ll {self.ll.shape}, lh {self.lh.shape}, "
                f"hl {self.hl.shape}, hh {self.hh.shape}"
            )


def _blocks(x):
    x = np.asarray(x)
    if x.ndim < 2:
        raise ValueError(f"expected at least 2 dimensions, got shape {x.shape}")
    h, w = x.shape[-2:]
    if h % 2 or w % 2:
        raise ValueError(
            f"trailing spatial extents must be even, got {h}x{w}; pad before calling"
        )
    a = x[..., 0::2, 0::2]
    b = x[..., 0::2, 1::2]
    c = x[..., 1::2, 0::2]
    d = x[..., 1::2, 1::2]
    return a, b, c, d


def dwt2_haar(x):
    """Analysis: (..., H, W) -> WaveletQuad of (..., H/2, W/2) subbands."""
    a, b, c, d = _blocks(x)
    return WaveletQuad(
        ll=a + b + c + d,
        lh=-a - b + c + d,
        hl=-a + b - c + d,
        hh=a - b - c + d,
    )


def _assemble(a, b, c, d):
    h2, w2 = a.shape[-2:]
    out = np.empty(a.shape[:-2] + (2 * h2, 2 * w2), dtype=a.dtype)
    out[..., 0::2, 0::2] = a
    out[..., 0::2, 1::2] = b
    out[..., 1::2, 0::2] = c
    out[..., 1::2, 1::2] = d
    return out


def idwt2_haar(quad):
    """Synthesis: exact inverse of :func:`dwt2_haar` (carries the 1/4 factor)."""
    ll, lh, hl, hh = quad.ll, quad.lh, quad.hl, quad.hh
    a = (ll - lh - hl + hh) * 0.25
    b = (ll - lh + hl - hh) * 0.25
    c = (ll + lh - hl - hh) * 0.25
    d = (ll + lh + hl + hh) * 0.25
    return _assemble(a, b, c, d)


def dwt_backward(grad_quad):
    """Adjoint of analysis: subband gradients -> spatial gradient.

    Same block pattern as synthesis but without the 1/4 (H^T, not H^T/4).
    """
    gll, glh, ghl, ghh = grad_quad.ll, grad_quad.lh, grad_quad.hl, grad_quad.hh
    a = gll - glh - ghl + ghh
    b = gll - glh + ghl - ghh
    c = gll + glh - ghl - ghh
    d = gll + glh + ghl + ghh
    return _assemble(a, b, c, d)


def idwt_backward(grad_x):
    """Adjoint of synthesis: spatial gradient -> subband gradients ((1/4) H)."""
    a, b, c, d = _blocks(grad_x)
    return WaveletQuad(
        ll=(a + b + c + d) * 0.25,
        lh=(-a - b + c + d) * 0.25,
        hl=(-a + b - c + d) * 0.25,
        hh=(a - b - c + d) * 0.25,
    )
