"""Compactly supported smooth building blocks.

The C-infinity transition used throughout is the normalized running
integral of the bump ``exp(1 - 1/(1 - x**2))``: it is exactly 0 below the
transition, exactly 1 above it, and every derivative vanishes at both ends.
"""

from math import comb

import numpy as np
from numpy.polynomial.legendre import leggauss

_GL_X, _GL_W = leggauss(64)


def bump(x):
    """Evaluate ``exp(1 - 1/(1 - x**2))`` on ``|x| < 1`` and 0 elsewhere."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    inside = np.abs(x) < 1.0
    xi = x[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - xi * xi))
    return out


def _bump_primitive(y):
    # integral of the bump over [-1, y] for y <= 0, two GL panels split at the midpoint
    y = np.asarray(y, dtype=float)
    mid = 0.5 * (y - 1.0)
    total = np.zeros(y.shape)
    for lo, hi in ((np.full(y.shape, -1.0), mid), (mid, y)):
        half = 0.5 * (hi - lo)
        pts = lo[..., None] + half[..., None] * (_GL_X + 1.0)
        total += np.sum(_GL_W * bump(pts), axis=-1) * half
    return total


_HALF_MASS = float(_bump_primitive(np.array(0.0)))


def rising_step(s):
    """C-infinity step: 0 for ``s <= 0``, 1 for ``s >= 1``.

    Symmetric about ``s = 1/2``, where it equals 1/2 exactly; the upper
    half is evaluated through the symmetry so both halves share one rule.
    """
    s = np.asarray(s, dtype=float)
    flat = s.reshape(-1)
    out = (flat >= 1.0).astype(float)
    mid = (flat > 0.0) & (flat < 1.0)
    if np.any(mid):
        y = 2.0 * flat[mid] - 1.0
        low = 0.5 * _bump_primitive(-np.abs(y)) / _HALF_MASS
        out[mid] = np.where(y <= 0.0, low, 1.0 - low)
    return out.reshape(s.shape)


def polynomial_step(s, order):
    """Smoothstep polynomial of class C^order, clamped to [0, 1]."""
    if order < 1:
        raise ValueError("order must be >= 1")
    x = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    acc = np.zeros_like(x)
    for n in range(order + 1):
        acc += comb(order + n, n) * comb(2 * order + 1, order - n) * (-x) ** n
    return x ** (order + 1) * acc


def plateau(x, outer, inner, kind="C_inf_exp", order=3):
    """Plateau function equal to 1 on ``inner`` and 0 outside ``outer``.

    Parameters
    ----------
    x : array_like
        Evaluation points.
    outer, inner : tuple of float
        Support interval ``(a, d)`` and plateau interval ``(b, c)``.
    kind : {"C_inf_exp", "polynomial"}
        Transition family.
    order : int
        Smoothness order for the polynomial family.
    """
    a, d = outer
    b, c = inner
    step = rising_step if kind == "C_inf_exp" else (lambda s: polynomial_step(s, order))
    x = np.asarray(x, dtype=float)
    left = step((x - a) / (b - a))
    right = step((d - x) / (d - c))
    return np.where(x <= c, left, right) * ((x > a) & (x < d))
