"""Compiled inner loops.

Randomness never enters here: callers draw uniforms/normals from their
``RngStream`` and pass them in, so the kernels are pure functions of their
arguments and block boundaries cannot change results.
"""

from __future__ import annotations

import numpy as np
from numba import njit

WINDOW_OVERFLOW = 1e300


@njit(nogil=True, cache=True)
def advance_chain(w, uniforms, p, c1, c2, alpha, beta, ell, thin, offset, out):
    """Apply one chain step per uniform.

    A step is a loss when ``uniforms[i] < p``. When ``thin > 0`` the window
    after every step whose global index (``offset + i + 1``) is a multiple of
    ``thin`` is written to ``out``.

    Returns ``(w, reflections, reflection_mass, losses, recorded, bad_index)``;
    ``bad_index`` is -1 unless a step left the finite range, in which case the
    kernel stops there and ``w`` is the last good window.
    """
    reflections = 0
    mass = 0.0
    losses = 0
    recorded = 0
    for i in range(uniforms.shape[0]):
        if uniforms[i] < p:
            pre = w - c2 * w**beta
            losses += 1
        else:
            pre = w + c1 * w**alpha
        if not (abs(pre) <= WINDOW_OVERFLOW):
            return w, reflections, mass, losses, recorded, i
        if pre < ell:
            reflections += 1
            mass += ell - pre
            w = ell
        else:
            w = pre
        if thin > 0 and (offset + i + 1) % thin == 0:
            out[recorded] = w
            recorded += 1
    return w, reflections, mass, losses, recorded, -1


@njit(nogil=True, cache=True)
def affine_recursion(x0, decay, scale, normals):
    """x[k+1] = decay[k] * x[k] + scale[k] * normals[k], x[0] = x0."""
    n = normals.shape[0]
    x = np.empty(n + 1)
    x[0] = x0
    for k in range(n):
        x[k + 1] = decay[k] * x[k] + scale[k] * normals[k]
    return x
