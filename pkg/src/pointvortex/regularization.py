"""Regularized point-vortex dynamics with an odd cutoff of the kernels.

The cutoff ``f_eps`` is the identity on ``[-A, A]`` with
``A = |ln eps| / (2 pi)``, constant ``L`` beyond ``A + 1`` and odd.  On the
ramp ``[A, A+1]`` its derivative is the smooth step

    sigma(t) = g(1 - t) / (g(1 - t) + g(t)),     g(s) = exp(-1/s),

so ``L = A + int_0^1 sigma = A + 1/2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import expit

from ._util import TWO_PI, dot, perp
from .dynamics import VortexConfiguration, circulation_array, min_separation_array
from .errors import IntegrationError, ParameterError
from .integrators import Event, IntegratorOptions, solve
from .kernels import free_green, grad_free_green

_PANELS = 256
_NODES = 16


def smooth_step(t):
    """``sigma(t)``: 1 for ``t <= 0``, 0 for ``t >= 1``, smooth in between."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        s = expit(1.0 / t - 1.0 / (1.0 - t))
    s = np.where(t <= 0.0, 1.0, np.where(t >= 1.0, 0.0, s))
    return s


@lru_cache(maxsize=1)
def _ramp_table():
    x, w = np.polynomial.legendre.leggauss(_NODES)
    edges = np.linspace(0.0, 1.0, _PANELS + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = mid[:, None] + half[:, None] * x[None, :]
    panel = np.sum(w * smooth_step(nodes), axis=1) * half
    cum = np.concatenate([[0.0], np.cumsum(panel)])
    return x, w, edges, cum


def ramp_integral(u):
    """``int_0^u sigma(t) dt`` for ``u`` in ``[0, 1]`` (clipped outside)."""
    x, w, edges, cum = _ramp_table()
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    k = np.minimum((u * _PANELS).astype(int), _PANELS - 1)
    lo = edges[k]
    half = 0.5 * (u - lo)
    nodes = (lo + half)[..., None] + half[..., None] * x
    part = np.sum(w * smooth_step(nodes), axis=-1) * half
    return cum[k] + part


@dataclass(frozen=True)
class CutoffProfile:
    """The odd cutoff ``f_eps`` and its derivative.

    Attributes
    ----------
    epsilon : float
    A : float
        Threshold ``|ln eps| / (2 pi)`` below which ``f`` is the identity.
    L : float
        Plateau value for arguments above ``A + 1``.
    """

    epsilon: float
    A: float
    L: float

    def f(self, r):
        r = np.asarray(r, dtype=float)
        s = np.abs(r)
        with np.errstate(invalid="ignore"):
            out = np.where(s <= self.A, s, np.where(s >= self.A + 1.0, self.L, self.A + ramp_integral(s - self.A)))
        return np.sign(r) * out

    def fprime(self, r):
        s = np.abs(np.asarray(r, dtype=float))
        with np.errstate(invalid="ignore"):
            return np.where(s <= self.A, 1.0, smooth_step(s - self.A))

    def __call__(self, r):
        return self.f(r)


def build_cutoff(epsilon: float, domain=None) -> CutoffProfile:
    """Construct ``f_eps``.

    Raises
    ------
    ParameterError
        If ``epsilon`` is not in ``(0, 1)``, or for a bounded ``domain`` not
        below ``1 / diam``.
    """
    eps = float(epsilon)
    if not (0.0 < eps < 1.0):
        raise ParameterError(f"epsilon must lie in (0, 1), got {epsilon}")
    if domain is not None and domain.bounded and eps * domain.diameter >= 1.0:
        raise ParameterError(f"epsilon must be below 1/diam = {1.0 / domain.diameter:.4g}")
    A = abs(np.log(eps)) / TWO_PI
    L = A + float(ramp_integral(1.0))
    return CutoffProfile(eps, A, L)


@dataclass(frozen=True)
class FunctionalParams:
    """Exponent ``eta`` of ``F(r) = exp(-eta r)``."""

    eta: float = 0.1

    def __post_init__(self):
        if not (0.0 < self.eta < 1.0):
            raise ParameterError(f"eta must lie in (0, 1), got {self.eta}")

    def F(self, r):
        return np.exp(-self.eta * np.asarray(r))

    def Fprime(self, r):
        return -self.eta * np.exp(-self.eta * np.asarray(r))


def _guard(weight, vec):
    # weight * vec with 0 * inf treated as 0
    with np.errstate(invalid="ignore"):
        return np.where(weight == 0.0, 0.0, weight * vec)


@dataclass(frozen=True, eq=False)
class RegularizedKernels:
    """Cut-off Green and Robin functions of a domain."""

    domain: object
    cutoff: CutoffProfile

    @classmethod
    def build(cls, domain, epsilon):
        return cls(domain, build_cutoff(epsilon, domain))

    @property
    def epsilon(self):
        return self.cutoff.epsilon

    def on_boundary(self, x, tol=1e-14):
        x = np.asarray(x, dtype=np.complex128)
        d = self.domain
        if d.kind == "annulus":
            r = np.abs(x)
            return (np.abs(r - 1.0) <= tol) | (np.abs(r - d.rho) <= tol)
        return np.abs(np.abs(d.model_point(x)) - 1.0) <= tol

    def G(self, x, y):
        """Regularized Green function on the closed domain."""
        x, y = np.broadcast_arrays(np.asarray(x, np.complex128), np.asarray(y, np.complex128))
        k, f = self.domain.kernels, self.cutoff.f
        with np.errstate(all="ignore"):
            val = f(free_green(x, y)) + f(k.gamma(x, y))
            diag = -self.cutoff.L + f(k.robin(x))
        val = np.where(x == y, diag, val)
        return np.where(self.on_boundary(x) | self.on_boundary(y), 0.0, val)

    def grad_G(self, x, y):
        """Gradient in ``x`` of the regularized Green function."""
        k, fp = self.domain.kernels, self.cutoff.fprime
        with np.errstate(all="ignore"):
            g0 = free_green(x, y)
            g1 = k.gamma(x, y)
            out = _guard(fp(g0), grad_free_green(x, y)) + _guard(fp(g1), k.grad_gamma(x, y))
        return out

    def robin(self, x):
        with np.errstate(all="ignore"):
            return self.cutoff.f(self.domain.kernels.robin(x))

    def grad_robin(self, x):
        k = self.domain.kernels
        with np.errstate(all="ignore"):
            return _guard(self.cutoff.fprime(k.robin(x)), k.grad_robin(x))


def velocity_reg_array(rk: RegularizedKernels, Z, a, xi):
    """Regularized velocities for positions ``Z`` of shape ``(..., N)``."""
    dom = rk.domain
    N = Z.shape[-1]
    v = 0.5 * a * rk.grad_robin(Z)
    if N > 1:
        g = rk.grad_G(Z[..., :, None], Z[..., None, :])
        g = np.where(~np.eye(N, dtype=bool), g, 0.0)
        v = v + np.sum(g * a, axis=-1)
    v = 1j * v
    if dom.hole_count:
        c = circulation_array(dom, Z, a, xi)
        v = v + c[..., 0:1] * dom.kernels.harmonic_field(Z)
    return v


# --- public operations -----------------------------------------------------


def green_reg(kernels: RegularizedKernels, x, y, with_gradient=False):
    """``G_eps(x, y)``; total on the closed domain."""
    val = kernels.G(x, y)
    if with_gradient:
        return val, kernels.grad_G(np.asarray(x, complex), np.asarray(y, complex))
    return val


def robin_reg(kernels: RegularizedKernels, x, with_gradient=False):
    x = np.asarray(x, dtype=np.complex128)
    val = kernels.robin(x)
    if with_gradient:
        return val, kernels.grad_robin(x)
    return val


def velocity_reg(kernels: RegularizedKernels, X: VortexConfiguration):
    """Velocities of the regularized system; finite on the closed domain."""
    return velocity_reg_array(kernels, X.positions, X.masses, X.circulations)


def phi_array(rk, params, Z):
    N = Z.shape[-1]
    out = 0.5 * np.sum(np.exp(params.eta * rk.robin(Z)), axis=-1)
    if N > 1:
        G = rk.G(Z[..., :, None], Z[..., None, :])
        E = np.where(~np.eye(N, dtype=bool), params.F(G), 0.0)
        out = out + 0.5 * np.sum(E, axis=(-2, -1))
    return out


def phi_eps(kernels: RegularizedKernels, params: FunctionalParams, X: VortexConfiguration) -> float:
    """``1/2 sum_{i!=j} F(G_eps(x_i, x_j)) + 1/2 sum_i F(-robin_eps(x_i))``."""
    return float(phi_array(kernels, params, X.positions))


def lambda_terms_array(rk: RegularizedKernels, params: FunctionalParams, Z, a, xi) -> dict:
    """Batched version of :func:`lambda_terms` for positions of shape ``(..., N)``."""
    dom = rk.domain
    N = Z.shape[-1]
    off = ~np.eye(N, dtype=bool)
    gR = rk.grad_robin(Z)
    Fp_rob = params.Fprime(-rk.robin(Z))
    if dom.hole_count:
        beta = circulation_array(dom, Z, a, xi)[..., 0:1] * dom.kernels.harmonic_field(Z)
    else:
        beta = np.zeros(Z.shape, dtype=np.complex128)
    if N > 1:
        Zi, Zj = Z[..., :, None], Z[..., None, :]
        gG = np.where(off, rk.grad_G(Zi, Zj), 0.0)
        Fp_G = np.where(off, params.Fprime(rk.G(Zi, Zj)), 0.0)
        # sum_{k != i} a_k perp(grad G_eps(x_i, x_k))
        pair_vel = np.sum(perp(gG) * a, axis=-1)
    else:
        gG = np.zeros(Z.shape + (N,), dtype=np.complex128)
        Fp_G = np.zeros(Z.shape + (N,))
        pair_vel = np.zeros(Z.shape, dtype=np.complex128)
    axes = (-2, -1)
    B1 = np.sum(Fp_G * dot(gG, pair_vel[..., :, None]), axis=axes)
    B2 = np.sum(Fp_G * dot(gG, (0.5 * a * perp(gR))[..., :, None]), axis=axes)
    B3 = np.sum(Fp_G * dot(gG, beta[..., :, None]), axis=axes)
    B4 = -0.5 * np.sum(Fp_rob * dot(gR, pair_vel), axis=-1)
    B5 = -0.25 * np.sum(Fp_rob * a * dot(gR, perp(gR)), axis=-1)
    B6 = -0.5 * np.sum(Fp_rob * dot(gR, beta), axis=-1)
    return {"B1": B1, "B2": B2, "B3": B3, "B4": B4, "B5": B5, "B6": B6}


def lambda_terms(kernels: RegularizedKernels, params: FunctionalParams, X: VortexConfiguration) -> dict:
    """The six sums whose total is the time derivative of ``phi_eps``.

    ``B5`` pairs a vector with its own perpendicular and vanishes.
    """
    terms = lambda_terms_array(kernels, params, X.positions, X.masses, X.circulations)
    return {k: float(v) for k, v in terms.items()}


def lambda_eps(kernels: RegularizedKernels, params: FunctionalParams, X: VortexConfiguration) -> float:
    """Analytic derivative of ``phi_eps`` along the regularized flow."""
    return float(sum(lambda_terms(kernels, params, X).values()))


def regularized_flow(kernels: RegularizedKernels, X: VortexConfiguration, t: float, opts=None):
    """Positions after time ``t`` (negative allowed) of the regularized flow."""
    opts = opts or IntegratorOptions(rtol=1e-13, atol=1e-13)
    a, xi = X.masses, X.circulations
    with np.errstate(all="ignore"):
        res = solve(lambda Z: velocity_reg_array(kernels, Z, a, xi), X.positions, t, opts)
    return X.with_positions(res.states[-1])


THRESHOLD_NAMES = ("free_green", "robin", "gamma")


def threshold_margins(kernels: RegularizedKernels, Z):
    """``max |q| - A`` for the three monitored families, in tie-break order."""
    k = kernels.domain.kernels
    A = kernels.cutoff.A
    N = Z.shape[-1]
    with np.errstate(all="ignore"):
        rob = np.max(np.abs(k.robin(Z))) - A
        if N > 1:
            iu, ju = np.triu_indices(N, 1)
            g0 = np.max(np.abs(free_green(Z[iu], Z[ju]))) - A
            g1 = max(np.max(np.abs(k.gamma(Z[iu], Z[ju]))), np.max(np.abs(k.gamma(Z[ju], Z[iu])))) - A
        else:
            g0 = g1 = -np.inf
    return float(g0), float(rob), float(g1)


@dataclass
class TauResult:
    """Outcome of :func:`tau_eps`.

    ``condition`` is the index (0: free-space kernel, 1: Robin function,
    2: regular part) of the threshold that fired, or None at the horizon.
    """

    tau: float
    condition: int | None
    state: VortexConfiguration
    trajectory: object = field(default=None, repr=False)

    @property
    def condition_name(self):
        return None if self.condition is None else THRESHOLD_NAMES[self.condition]


def tau_eps(domain, X0: VortexConfiguration, epsilon: float, horizon: float, opts=None, eta=0.1, record_phi=True) -> TauResult:
    """First time a threshold quantity reaches ``A`` along the regularized flow.

    Returns the horizon (with ``condition=None``) if no threshold is met.
    Before this time the regularized and the true trajectories coincide.
    """
    from .dynamics import Termination, Trajectory, hamiltonian_array

    opts = opts or IntegratorOptions()
    X0.validate(domain)
    rk = RegularizedKernels.build(domain, epsilon)
    params = FunctionalParams(eta)
    a, xi = X0.masses, X0.circulations
    events = [Event(name, (lambda Z, i=i: threshold_margins(rk, Z)[i])) for i, name in enumerate(THRESHOLD_NAMES)]
    times, states, H, d, phi = [], [], [], [], []

    def record(t, Z):
        times.append(t)
        states.append(Z)
        with np.errstate(all="ignore"):
            H.append(float(hamiltonian_array(domain, Z, a, xi)))
        d.append(float(min_separation_array(domain, Z)))
        if record_phi:
            phi.append(float(phi_array(rk, params, Z)))

    with np.errstate(all="ignore"):
        res = solve(lambda Z: velocity_reg_array(rk, Z, a, xi), X0.positions, horizon, opts, events=events, record=record)
    if res.status == "event" and res.event in THRESHOLD_NAMES:
        cond = THRESHOLD_NAMES.index(res.event)
        term = Termination("collision_event", float(res.event_time), res.event)
        tau = float(res.event_time)
    elif res.status == "event":
        raise IntegrationError(f"regularized integration failed: {res.event}")
    else:
        cond, tau = None, float(horizon)
        term = Termination("horizon_reached", tau)
    traj = Trajectory(
        np.array(times), np.array(states), a, xi, np.array(H), np.array(d), term,
        {"phi": np.array(phi)} if record_phi else {},
    )
    return TauResult(tau, cond, X0.with_positions(states[-1]), traj)
