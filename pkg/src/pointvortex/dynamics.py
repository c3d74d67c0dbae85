"""Point-vortex equations of motion, energy and trajectory integration.

Vortex ``i`` moves with

    x_i' = sum_{j != i} a_j perp(grad_x G(x_i, x_j)) + (a_i / 2) perp(grad robin(x_i))
           + sum_j c_j beta_j(x_i)

where ``c_j = xi_j + sum_k a_k w_j(x_k)``.  The Kirchhoff-Routh energy

    H = sum_{i<j} a_i a_j G(x_i, x_j) + 1/2 sum_i a_i^2 robin(x_i)
        + sum_j (xi_j S_j + S_j^2 / 2),      S_j = sum_i a_i w_j(x_i)

generates this flow through ``a_i x_i' = perp(grad_{x_i} H)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._util import as_complex, as_pairs
from .errors import ConfigurationInvalidError, IntegrationError
from .integrators import Event, IntegratorOptions, solve


@dataclass(frozen=True, eq=False)
class VortexConfiguration:
    """Positions, masses and prescribed circulations around the holes.

    Positions may be given as complex numbers, as an ``(N, 2)`` array of
    coordinate pairs, or as real numbers on the real axis.
    """

    positions: np.ndarray
    masses: np.ndarray
    circulations: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        raw = np.asarray(self.positions)
        if not np.iscomplexobj(raw) and raw.ndim == 2:
            pos = as_complex(raw)
        else:
            pos = np.atleast_1d(raw).astype(np.complex128)
        a = np.atleast_1d(np.asarray(self.masses, dtype=float))
        xi = np.atleast_1d(np.asarray(self.circulations, dtype=float))
        if pos.ndim != 1 or pos.size < 1:
            raise ConfigurationInvalidError("need at least one vortex position")
        if a.shape != pos.shape:
            raise ConfigurationInvalidError(f"{pos.size} positions but {a.size} masses")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "masses", a)
        object.__setattr__(self, "circulations", xi)

    @property
    def N(self) -> int:
        return self.positions.size

    def with_positions(self, z):
        return VortexConfiguration(np.asarray(z), self.masses, self.circulations)

    def validate(self, domain):
        """Raise ConfigurationInvalidError unless the configuration is admissible."""
        if self.circulations.size != domain.hole_count:
            raise ConfigurationInvalidError(
                f"{domain.kind} has {domain.hole_count} holes but {self.circulations.size} circulations were given"
            )
        if not np.all(domain.contains(self.positions)):
            raise ConfigurationInvalidError("all vortices must lie strictly inside the domain")
        if self.N > 1:
            z = self.positions
            dz = np.abs(z[:, None] - z[None, :]) + np.eye(self.N)
            if np.any(dz == 0):
                raise ConfigurationInvalidError("vortex positions must be pairwise distinct")
        return self

    def to_dict(self):
        return {
            "positions": as_pairs(self.positions).tolist(),
            "masses": self.masses.tolist(),
            "circulations": self.circulations.tolist(),
        }


# --- vectorized cores ------------------------------------------------------
# Z has shape (..., N); masses a (N,), circulations xi (m,).


def _offdiag(N):
    return ~np.eye(N, dtype=bool)


def circulation_array(domain, Z, a, xi):
    if domain.hole_count == 0:
        return np.zeros(Z.shape[:-1] + (0,))
    w = domain.kernels.harmonic_measure(Z)
    return (xi[0] + np.sum(a * w, axis=-1))[..., None]


def velocity_array(domain, Z, a, xi):
    """Velocities for positions ``Z`` of shape ``(..., N)``."""
    k = domain.kernels
    N = Z.shape[-1]
    v = 0.5 * a * k.grad_robin(Z)
    if N > 1:
        with np.errstate(all="ignore"):
            g = k.grad_G(Z[..., :, None], Z[..., None, :])
        g = np.where(_offdiag(N), g, 0.0)
        v = v + np.sum(g * a, axis=-1)
    v = 1j * v
    if domain.hole_count:
        c = circulation_array(domain, Z, a, xi)
        v = v + c[..., 0:1] * k.harmonic_field(Z)
    return v


def hamiltonian_array(domain, Z, a, xi):
    k = domain.kernels
    N = Z.shape[-1]
    H = 0.5 * np.sum(a * a * k.robin(Z), axis=-1)
    if N > 1:
        iu, ju = np.triu_indices(N, 1)
        H = H + np.sum(a[iu] * a[ju] * k.G(Z[..., iu], Z[..., ju]), axis=-1)
    if domain.hole_count:
        S = np.sum(a * k.harmonic_measure(Z), axis=-1)
        H = H + xi[0] * S + 0.5 * S * S
    return H


def min_separation_array(domain, Z):
    d = np.min(domain.boundary_distance(Z), axis=-1)
    N = Z.shape[-1]
    if N > 1:
        iu, ju = np.triu_indices(N, 1)
        d = np.minimum(d, np.min(np.abs(Z[..., iu] - Z[..., ju]), axis=-1))
    return d


# --- public operations -----------------------------------------------------


def min_separation(domain, X: VortexConfiguration) -> float:
    """``min(min_{i!=j} |x_i - x_j|, min_i d(x_i, boundary))``."""
    return float(min_separation_array(domain, X.positions))


def circulation_coefficients(domain, X: VortexConfiguration) -> list:
    """``c_j = xi_j + sum_k a_k w_j(x_k)``; empty for simply connected domains."""
    if domain.hole_count == 0:
        return []
    return circulation_array(domain, X.positions, X.masses, X.circulations).tolist()


def vortex_velocity(domain, X: VortexConfiguration) -> np.ndarray:
    """Velocity of every vortex as a complex array of length N."""
    X.validate(domain)
    return velocity_array(domain, X.positions, X.masses, X.circulations)


def hamiltonian(domain, X: VortexConfiguration) -> float:
    X.validate(domain)
    return float(hamiltonian_array(domain, X.positions, X.masses, X.circulations))


@dataclass
class Termination:
    """How a run ended.

    ``kind`` is ``horizon_reached`` or ``collision_event``; for events
    ``cause`` says which monitor fired (``separation``, ``stiffness``,
    ``max_steps`` or a threshold name).
    """

    kind: str
    time: float
    cause: str | None = None

    def to_dict(self):
        return {"kind": self.kind, "time": self.time, "cause": self.cause}


@dataclass
class Trajectory:
    """Sampled solution with conserved-quantity diagnostics."""

    times: np.ndarray
    positions: np.ndarray
    masses: np.ndarray
    circulations: np.ndarray
    hamiltonian_series: np.ndarray
    min_separation_series: np.ndarray
    termination: Termination
    extra: dict = field(default_factory=dict)

    @property
    def states(self):
        return [VortexConfiguration(p, self.masses, self.circulations) for p in self.positions]

    @property
    def final(self) -> VortexConfiguration:
        return VortexConfiguration(self.positions[-1], self.masses, self.circulations)

    def max_energy_drift(self, relative=True):
        H = self.hamiltonian_series
        dH = np.max(np.abs(H - H[0]))
        return float(dH / (1.0 + abs(H[0]))) if relative else float(dH)


def _run(domain, X0, horizon, opts, rhs, events, diagnostics=None):
    a, xi = X0.masses, X0.circulations
    Hs, ds, extra_rows = [], [], []

    def record(t, Z):
        Hs.append(float(hamiltonian_array(domain, Z, a, xi)))
        ds.append(float(min_separation_array(domain, Z)))
        if diagnostics is not None:
            extra_rows.append(diagnostics(Z))

    with np.errstate(all="ignore"):
        res = solve(rhs, X0.positions, horizon, opts, events=events, record=record)
    if res.status == "event":
        term = Termination("collision_event", float(res.event_time), res.event)
    else:
        term = Termination("horizon_reached", float(res.times[-1]))
    traj = Trajectory(
        times=np.array(res.times),
        positions=np.array(res.states),
        masses=a,
        circulations=xi,
        hamiltonian_series=np.array(Hs),
        min_separation_series=np.array(ds),
        termination=term,
    )
    if extra_rows:
        traj.extra = {key: np.array([row[key] for row in extra_rows]) for key in extra_rows[0]}
    return traj


def integrate(domain, X0: VortexConfiguration, horizon: float, opts: IntegratorOptions | None = None) -> Trajectory:
    """Integrate the vortex system until ``horizon`` or a collision event.

    The run stops when the minimal separation drops below
    ``opts.delta_stop``; the crossing time is bisected to ``opts.event_tol``.
    A step-size underflow ends the run with cause ``stiffness``.
    """
    opts = opts or IntegratorOptions()
    X0.validate(domain)
    if horizon < 0:
        raise IntegrationError("horizon must be non-negative")
    a, xi = X0.masses, X0.circulations

    def rhs(Z):
        return velocity_array(domain, Z, a, xi)

    ev = Event("separation", lambda Z: opts.delta_stop - float(min_separation_array(domain, Z)))
    return _run(domain, X0, horizon, opts, rhs, [ev])


def reverse(X: VortexConfiguration) -> VortexConfiguration:
    """Time-reversed configuration: masses and circulations change sign."""
    return VortexConfiguration(X.positions, -X.masses, -X.circulations)


def flow_map(domain, Z0, a, xi, t, opts: IntegratorOptions):
    """Final positions for a stack of initial conditions integrated together.

    All rows share one step-size sequence, so the discrete flow map is a
    smooth function of the initial data.
    """

    def rhs(Z):
        return velocity_array(domain, Z, a, xi)

    with np.errstate(all="ignore"):
        res = solve(rhs, Z0, t, opts)
    if res.status != "horizon_reached":
        raise IntegrationError(f"flow map integration stopped early: {res.event}")
    return res.states[-1]


def flow_jacobian(domain, X0: VortexConfiguration, t: float, h: float = 1e-6, opts: IntegratorOptions | None = None) -> float:
    """Determinant of the central-difference Jacobian of ``X0 -> S_t X0``."""
    X0.validate(domain)
    if t == 0:
        return 1.0
    opts = opts or IntegratorOptions(rtol=1e-13, atol=1e-13)
    N = X0.N
    base = X0.positions
    rows = []
    for k in range(2 * N):
        dz = np.zeros(N, dtype=np.complex128)
        dz[k // 2] = h if k % 2 == 0 else 1j * h
        rows.append(base + dz)
        rows.append(base - dz)
    out = flow_map(domain, np.array(rows), X0.masses, X0.circulations, t, opts)
    J = np.empty((2 * N, 2 * N))
    for k in range(2 * N):
        col = (out[2 * k] - out[2 * k + 1]) / (2 * h)
        J[0::2, k] = col.real
        J[1::2, k] = col.imag
    return float(np.linalg.det(J))


def velocity_divergence(domain, X: VortexConfiguration, i: int, h: float = 1e-5) -> float:
    """Finite-difference divergence of vortex ``i``'s velocity in its own position."""
    a, xi = X.masses, X.circulations
    Z = X.positions

    def vi(dz):
        Zp = Z.copy()
        Zp[i] += dz
        return velocity_array(domain, Zp, a, xi)[i]

    return float(((vi(h) - vi(-h)).real + (vi(1j * h) - vi(-1j * h)).imag) / (2 * h))
