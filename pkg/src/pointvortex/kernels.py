"""Unchecked, vectorized Green-function kernels for each model geometry.

These classes assume their arguments are valid points and broadcast over
arrays.  :mod:`pointvortex.greens` wraps them with argument checks.

Conventions: ``G`` is the Dirichlet Green function (negative inside),
``gamma = G - ln|x-y|/(2 pi)`` its regular part and ``robin(x) =
gamma(x, x)``.  Gradients are taken in the first argument and encoded as
complex numbers.
"""

from __future__ import annotations

import numpy as np

from ._util import TWO_PI


def free_green(x, y):
    """Whole-plane kernel ``ln|x-y| / (2 pi)``."""
    return np.log(np.abs(x - y)) / TWO_PI


def grad_free_green(x, y):
    d = x - y
    return d / (TWO_PI * (d.real**2 + d.imag**2))


def _one_minus_r2(x):
    # 1 - |x|^2 without cancellation near the unit circle
    r = np.abs(x)
    return (1.0 - r) * (1.0 + r)


class DiskKernels:
    """Kernels of the unit disk; the same formulas serve its exterior."""

    def G(self, x, y):
        return (np.log(np.abs(x - y)) - np.log(np.abs(1.0 - x * np.conj(y)))) / TWO_PI

    def gamma(self, x, y):
        return -np.log(np.abs(1.0 - x * np.conj(y))) / TWO_PI

    def robin(self, x):
        return -np.log(np.abs(_one_minus_r2(x))) / TWO_PI

    def grad_gamma(self, x, y):
        return y / (TWO_PI * (1.0 - np.conj(x) * y))

    def grad_G(self, x, y):
        return grad_free_green(x, y) + self.grad_gamma(x, y)

    def grad_robin(self, x):
        return x / (np.pi * _one_minus_r2(x))


class MappedKernels:
    """Kernels of ``Omega`` transported from a model domain by ``T``.

    Parameters
    ----------
    T : HolomorphicMap
        Map from ``Omega`` onto the model domain.
    base : DiskKernels
        Kernels of the model domain.
    """

    def __init__(self, T, base):
        self.T = T
        self.base = base

    def G(self, x, y):
        return self.base.G(self.T.forward(x), self.T.forward(y))

    def _log_ratio(self, x, y, Tx, Ty):
        # ln |T(x) - T(y)| / |x - y|, switching to T' at the midpoint for
        # nearly coincident arguments
        dx = x - y
        close = np.abs(dx) < 1e-7 * (1.0 + np.abs(x))
        with np.errstate(all="ignore"):
            far = np.abs(Tx - Ty) / np.abs(dx)
        near = np.abs(self.T.deriv(0.5 * (x + y)))
        return np.log(np.where(close, near, far)) / TWO_PI

    def gamma(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, complex), np.asarray(y, complex))
        Tx, Ty = self.T.forward(x), self.T.forward(y)
        return self.base.gamma(Tx, Ty) + self._log_ratio(x, y, Tx, Ty)

    def robin(self, x):
        return self.base.robin(self.T.forward(x)) + np.log(np.abs(self.T.deriv(x))) / TWO_PI

    def grad_G(self, x, y):
        return np.conj(self.T.deriv(x)) * self.base.grad_G(self.T.forward(x), self.T.forward(y))

    def grad_gamma(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, complex), np.asarray(y, complex))
        same = x == y
        with np.errstate(all="ignore"):
            off = self.grad_G(x, y) - grad_free_green(x, y)
        if np.any(same):
            off = np.where(same, 0.5 * self.grad_robin(x), off)
        return off

    def grad_robin(self, x):
        d1 = self.T.deriv(x)
        d2 = self.T.second_deriv(x)
        return np.conj(d1) * self.base.grad_robin(self.T.forward(x)) + np.conj(d2 / d1) / TWO_PI


class AnnulusKernels:
    """Kernels of ``rho < |z| < 1`` from the product series.

    With ``q = rho**2`` and ``Q(s) = prod_k (1 - q^k s)(1 - q^k / s)``,
    ``P(s) = (1 - s) Q(s)``::

        2 pi G(z, w) = ln|z - w| + ln|Q(z/w)| - ln|P(z conj(w))|
                       - ln|z| ln|w| / ln(rho)

    The product is truncated once ``q**K < 1e-16``.
    """

    def __init__(self, rho):
        self.rho = float(rho)
        self.log_rho = np.log(self.rho)
        q = self.rho**2
        K = 1
        while q**K >= 1e-16:
            K += 1
        self.K = K + 2
        self.qk = q ** np.arange(1, self.K + 1)
        self._logQ1 = 2.0 * float(np.sum(np.log1p(-self.qk)))

    # series pieces; the k axis is appended last
    def _logabs_Q(self, s):
        s = np.asarray(s)[..., None]
        return np.sum(np.log(np.abs(1.0 - self.qk * s)) + np.log(np.abs(1.0 - self.qk / s)), axis=-1)

    def _dlog_Q(self, s):
        s = np.asarray(s)[..., None]
        qk = self.qk
        return np.sum(-qk / (1.0 - qk * s) + qk / (s * (s - qk)), axis=-1)

    def G(self, z, w):
        with np.errstate(divide="ignore"):
            return (
                np.log(np.abs(z - w))
                + self._logabs_Q(z / w)
                - np.log(np.abs(1.0 - z * np.conj(w)))
                - self._logabs_Q(z * np.conj(w))
                - np.log(np.abs(z)) * np.log(np.abs(w)) / self.log_rho
            ) / TWO_PI

    def gamma(self, z, w):
        with np.errstate(divide="ignore"):
            return (
                self._logabs_Q(z / w)
                - np.log(np.abs(1.0 - z * np.conj(w)))
                - self._logabs_Q(z * np.conj(w))
                - np.log(np.abs(z)) * np.log(np.abs(w)) / self.log_rho
            ) / TWO_PI

    def _logabs_P_real(self, r):
        # ln P(r^2) for real r, with the two factors that vanish on the
        # boundary circles written in product form
        r = np.asarray(r, dtype=float)
        rho = self.rho
        out = np.log(np.abs((1.0 - r) * (1.0 + r)))
        out = out + np.log(np.abs((r - rho) * (r + rho))) - 2.0 * np.log(r)
        rest = self.qk[1:]
        r2 = (r * r)[..., None]
        out = out + np.sum(np.log1p(-rest / r2), axis=-1)
        out = out + np.sum(np.log1p(-self.qk * r2), axis=-1)
        return out

    def robin(self, z):
        r = np.abs(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            lr = np.log(r)
            return (self._logQ1 - self._logabs_P_real(r) - lr * lr / self.log_rho) / TWO_PI

    def grad_gamma(self, z, w):
        wb = np.conj(w)
        s = z * wb
        dlogP = -1.0 / (1.0 - s) + self._dlog_Q(s)
        inner = self._dlog_Q(z / w) / w - wb * dlogP - np.log(np.abs(w)) / (self.log_rho * z)
        return np.conj(inner) / TWO_PI

    def grad_G(self, z, w):
        return grad_free_green(z, w) + self.grad_gamma(z, w)

    def grad_robin(self, z):
        r = np.abs(z)
        rho = self.rho
        r2 = (r * r)[..., None]
        rest = self.qk[1:]
        dlogP = (
            -1.0 / ((1.0 - r) * (1.0 + r))
            + self.rho**2 / (r * r * (r - rho) * (r + rho))
            + np.sum(rest / (r2 * (r2 - rest)), axis=-1)
            - np.sum(self.qk / (1.0 - self.qk * r2), axis=-1)
        )
        inner = -np.conj(z) * dlogP - np.log(r) / (self.log_rho * z)
        return np.conj(inner) / np.pi

    # harmonic measure of the inner circle and its perpendicular gradient
    def harmonic_measure(self, z):
        return np.log(np.abs(z)) / self.log_rho

    def harmonic_field(self, z):
        return 1j * z / (np.abs(z) ** 2 * self.log_rho)
