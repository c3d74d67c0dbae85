"""Green function, Robin function and harmonic fields for every domain kind.

All functions accept scalars or broadcastable arrays of points (complex
numbers or ``(x, y)`` pairs) and return complex-encoded vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import as_complex, dot, perp, scalar
from .domain import DomainModel
from .errors import CoincidentPointsError, DomainViolationError, NoSuchHoleError
from .kernels import free_green, grad_free_green

__all__ = [
    "DomainModel",
    "KernelValue",
    "green",
    "grad_green",
    "gamma",
    "grad_gamma",
    "robin",
    "grad_robin",
    "harmonic_measure",
    "harmonic_field",
    "coupling",
    "boundary_distance",
    "free_green",
    "grad_free_green",
]


@dataclass(frozen=True)
class KernelValue:
    """A potential together with its gradient in the first argument."""

    value: float
    gradient_x: complex


def _closed(domain, *pts):
    out = []
    for p in pts:
        p = as_complex(p)
        if not np.all(domain.contains(p, closed=True)):
            raise DomainViolationError(f"point outside the closed {domain.kind} domain")
        out.append(p)
    return out


def _distinct(x, y):
    if np.any(x == y):
        raise CoincidentPointsError("Green function requested at coincident points")


def green(domain: DomainModel, x, y, with_gradient=False):
    """Dirichlet Green function ``G(x, y)``; zero when either point is on the boundary."""
    x, y = _closed(domain, x, y)
    _distinct(x, y)
    k = domain.kernels
    with np.errstate(divide="ignore", invalid="ignore"):
        val = k.G(x, y)
        if with_gradient:
            return KernelValue(scalar(val), scalar(k.grad_G(x, y)))
    return scalar(val)


def grad_green(domain: DomainModel, x, y):
    """Gradient of ``G`` in its first argument."""
    x, y = _closed(domain, x, y)
    _distinct(x, y)
    return scalar(domain.kernels.grad_G(x, y))


def gamma(domain: DomainModel, x, y):
    """Regular part ``G - ln|x - y|/(2 pi)``; equals the Robin value on the diagonal."""
    x, y = _closed(domain, x, y)
    x, y = np.broadcast_arrays(x, y)
    k = domain.kernels
    with np.errstate(divide="ignore", invalid="ignore"):
        val = k.gamma(x, y)
        same = x == y
        if np.any(same):
            val = np.where(same, k.robin(x), val)
    return scalar(val)


def grad_gamma(domain: DomainModel, x, y):
    """Gradient of the regular part in its first argument."""
    x, y = _closed(domain, x, y)
    with np.errstate(divide="ignore", invalid="ignore"):
        return scalar(domain.kernels.grad_gamma(x, y))


def robin(domain: DomainModel, x, with_gradient=False):
    """Robin function; tends to ``+inf`` at the boundary."""
    (x,) = _closed(domain, x)
    k = domain.kernels
    with np.errstate(divide="ignore", invalid="ignore"):
        val = k.robin(x)
        if with_gradient:
            return KernelValue(scalar(val), scalar(k.grad_robin(x)))
    return scalar(val)


def grad_robin(domain: DomainModel, x):
    (x,) = _closed(domain, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        return scalar(domain.kernels.grad_robin(x))


def _hole(domain, j):
    if domain.hole_count == 0:
        raise NoSuchHoleError(f"{domain.kind} domain has no holes")
    if j != 1:
        raise NoSuchHoleError(f"hole index {j} out of range 1..{domain.hole_count}")


def harmonic_measure(domain: DomainModel, j: int, x):
    """Harmonic function equal to 1 on hole ``j`` and 0 on the other boundaries."""
    _hole(domain, j)
    (x,) = _closed(domain, x)
    return scalar(domain.kernels.harmonic_measure(x))


def harmonic_field(domain: DomainModel, j: int, x):
    """Perpendicular gradient of :func:`harmonic_measure`."""
    _hole(domain, j)
    (x,) = _closed(domain, x)
    return scalar(domain.kernels.harmonic_field(x))


def coupling(domain: DomainModel, x, y):
    """``h(x, y) = grad_x G(x, y) . perp(grad robin(x))``."""
    x, y = _closed(domain, x, y)
    _distinct(x, y)
    k = domain.kernels
    return scalar(dot(k.grad_G(x, y), perp(k.grad_robin(x))))


def boundary_distance(domain: DomainModel, x):
    return scalar(domain.boundary_distance(as_complex(x)))
