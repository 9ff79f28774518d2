"""Gaussian tail function and its inverse."""

import math

import numpy as np
from scipy import special

from .exceptions import DomainError

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def q_function(x):
    """Standard Gaussian tail probability Q(x) = P(Z > x).

    Accepts scalars or arrays; raises DomainError on non-finite input.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("q_function requires finite input")
    out = 0.5 * special.erfc(arr / math.sqrt(2.0))
    return float(out) if out.ndim == 0 else out


def gaussian_pdf(x):
    arr = np.asarray(x, dtype=float)
    out = _INV_SQRT_2PI * np.exp(-0.5 * arr * arr)
    return float(out) if out.ndim == 0 else out


def q_inverse(p):
    """Inverse of :func:`q_function` on (0, 1).

    Starts from the rational-approximation quantile ``-ndtri(p)`` and applies
    one Newton step against the erfc-based tail.
    """
    arr = np.asarray(p, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise DomainError("q_inverse requires 0 < p < 1")
    x = -special.ndtri(arr)
    x = x + (0.5 * special.erfc(x / math.sqrt(2.0)) - arr) / (_INV_SQRT_2PI * np.exp(-0.5 * x * x))
    return float(x) if x.ndim == 0 else x


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0) if np.ndim(db) else 10.0 ** (db / 10.0)
