"""Small helpers for converting between coordinate pairs and complex numbers."""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi


def as_complex(z) -> np.ndarray:
    """Return ``z`` as a complex ndarray.

    Complex input is passed through. Real input whose last axis has
    length 2 is read as ``(x, y)`` coordinate pairs. Real scalars are
    promoted to the real axis.
    """
    arr = np.asarray(z)
    if np.iscomplexobj(arr):
        return arr.astype(np.complex128, copy=False)
    arr = arr.astype(np.float64, copy=False)
    if arr.ndim >= 1 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    return arr.astype(np.complex128)


def as_pairs(z) -> np.ndarray:
    """Inverse of :func:`as_complex`: stack real and imaginary parts."""
    z = np.asarray(z, dtype=np.complex128)
    return np.stack([z.real, z.imag], axis=-1)


def dot(u, v):
    """Euclidean dot product of complex-encoded plane vectors."""
    return np.real(u * np.conj(v))


def perp(u):
    """Rotate a complex-encoded vector by +90 degrees, (u1, u2) -> (-u2, u1)."""
    return 1j * u


def scalar(x):
    """Unwrap 0-d arrays into Python scalars, leave arrays alone."""
    if isinstance(x, np.ndarray) and x.ndim == 0:
        return x[()]
    return x
