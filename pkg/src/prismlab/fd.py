"""Finite-difference stencils and quadrature weights on uniform node-centered grids.

First derivatives are 2nd-order central in the interior with 2nd-order
one-sided closures at the first and last node (the ``np.gradient``
convention).  Pure second derivatives use the compact 3-point interior
stencil and the 4-point one-sided boundary stencil, which is exact through
cubics.  Mixed partials compose first-derivative stencils along distinct
axes; because the two stencil families act along different axes the
boundary closure does not degrade the O(h^2) error.
"""

from __future__ import annotations

import numpy as np


def _sl(ndim: int, axis: int, s) -> tuple:
    idx = [slice(None)] * ndim
    idx[axis] = s
    return tuple(idx)


def diff(values: np.ndarray, h: float, axis: int) -> np.ndarray:
    """First derivative along ``axis``: central interior, one-sided 2nd-order ends."""
    return np.gradient(values, h, axis=axis, edge_order=2)


def diff2(values: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Second derivative along ``axis``; 4-point one-sided stencil at the two ends."""
    f = np.asarray(values, dtype=float)
    out = np.empty_like(f)
    nd = f.ndim
    inner = (f[_sl(nd, axis, slice(None, -2))]
             - 2.0 * f[_sl(nd, axis, slice(1, -1))]
             + f[_sl(nd, axis, slice(2, None))])
    out[_sl(nd, axis, slice(1, -1))] = inner / h**2
    first = (2.0 * f[_sl(nd, axis, 0)] - 5.0 * f[_sl(nd, axis, 1)]
             + 4.0 * f[_sl(nd, axis, 2)] - f[_sl(nd, axis, 3)])
    last = (2.0 * f[_sl(nd, axis, -1)] - 5.0 * f[_sl(nd, axis, -2)]
            + 4.0 * f[_sl(nd, axis, -3)] - f[_sl(nd, axis, -4)])
    out[_sl(nd, axis, 0)] = first / h**2
    out[_sl(nd, axis, -1)] = last / h**2
    return out


def second_derivative_table(values: np.ndarray, spacings) -> dict:
    """All second partials of a field: table[(a, b)] = d^2 f / dx^a dx^b, a <= b."""
    table = {}
    for a in range(3):
        table[(a, a)] = diff2(values, spacings[a], a)
    for a in range(3):
        for b in range(a + 1, 3):
            table[(a, b)] = diff(diff(values, spacings[b], b), spacings[a], a)
    return table


def gradient_adjoint(values: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Exact transpose of :func:`diff` with respect to the plain (unweighted) dot product."""
    v = np.asarray(values, dtype=float)
    nd = v.ndim
    out = np.zeros_like(v)
    # interior rows i = 1 .. n-2 scatter -v_i/(2h) to col i-1 and +v_i/(2h) to col i+1
    out[_sl(nd, axis, slice(None, -2))] -= v[_sl(nd, axis, slice(1, -1))] / (2.0 * h)
    out[_sl(nd, axis, slice(2, None))] += v[_sl(nd, axis, slice(1, -1))] / (2.0 * h)
    # one-sided row 0: coefficients (-3, 4, -1)/(2h) on cols 0,1,2
    v0 = v[_sl(nd, axis, 0)]
    out[_sl(nd, axis, 0)] += -3.0 * v0 / (2.0 * h)
    out[_sl(nd, axis, 1)] += 4.0 * v0 / (2.0 * h)
    out[_sl(nd, axis, 2)] += -v0 / (2.0 * h)
    # one-sided row n-1: coefficients (1, -4, 3)/(2h) on cols n-3,n-2,n-1
    vl = v[_sl(nd, axis, -1)]
    out[_sl(nd, axis, -3)] += vl / (2.0 * h)
    out[_sl(nd, axis, -2)] += -4.0 * vl / (2.0 * h)
    out[_sl(nd, axis, -1)] += 3.0 * vl / (2.0 * h)
    return out


def trapezoid_weights_1d(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = 0.5 * h
    w[-1] = 0.5 * h
    return w


def quadrature_weights(dims, spacings) -> np.ndarray:
    """Tensor-product trapezoid weights for volume quadrature, shape ``dims``."""
    w1 = trapezoid_weights_1d(dims[0], spacings[0])
    w2 = trapezoid_weights_1d(dims[1], spacings[1])
    w3 = trapezoid_weights_1d(dims[2], spacings[2])
    return w1[:, None, None] * w2[None, :, None] * w3[None, None, :]
