"""Monte Carlo evidence: sampling, near-collapse ensembles and inequality checks."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from ._util import TWO_PI, dot, perp
from .dynamics import VortexConfiguration, min_separation_array, velocity_array
from .errors import GeometryError, InvariantViolationError, ParameterError
from .integrators import IntegratorOptions, solve_batch
from .kernels import free_green, grad_free_green
from .regularization import FunctionalParams, RegularizedKernels, lambda_terms_array, phi_array

WORKERS_ENV = "POINTVORTEX_WORKERS"
STATUS_NAMES = ("horizon_reached", "separation", "stiffness", "max_steps")


def default_workers():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


# --- uniform sampling ------------------------------------------------------


@dataclass
class SampleStats:
    """Bookkeeping of a rejection sampler run."""

    draws: int = 0
    accepted: int = 0
    disk_draws: int = 0

    @property
    def acceptance_rate(self):
        return self.accepted / self.draws if self.draws else float("nan")


def sample_points(domain, count, rng, stats=None):
    """``count`` i.i.d. uniform points of the (windowed) domain by rejection."""
    x0, x1, y0, y1 = domain.bounding_box()
    stats = stats if stats is not None else SampleStats()
    out = np.empty(0, dtype=np.complex128)
    radius = 1.0 if domain.bounded or domain.window is None else domain.window
    while out.size < count:
        need = count - out.size
        rate = stats.accepted / stats.draws if stats.accepted else 0.5
        block = int(min(max(1024, 1.2 * need / max(rate, 1e-6)), 2**20))
        z = rng.uniform(x0, x1, block) + 1j * rng.uniform(y0, y1, block)
        ok = domain.sampling_contains(z)
        stats.draws += block
        stats.disk_draws += int(np.count_nonzero(np.abs(z) < radius))
        acc = z[ok]
        stats.accepted += acc.size
        out = np.concatenate([out, acc])
        if stats.draws > 1e6 * (stats.accepted + 1):
            raise GeometryError("rejection sampler needs more than 1e6 draws per accepted point")
    return out[:count]


def sample_positions(domain, N, count, seed, stats=None):
    """Array of shape ``(count, N)`` of uniform configurations in the domain."""
    if count < 0:
        raise ParameterError("count must be non-negative")
    rng = np.random.default_rng(seed)
    if count == 0:
        return np.empty((0, N), dtype=np.complex128)
    Z = sample_points(domain, count * N, rng, stats).reshape(count, N)
    if N > 1:
        # configurations with coincident points are redrawn (a null event)
        iu, ju = np.triu_indices(N, 1)
        bad = np.any(Z[:, iu] == Z[:, ju], axis=1)
        while np.any(bad):
            Z[bad] = sample_points(domain, int(bad.sum()) * N, rng, stats).reshape(-1, N)
            bad = np.any(Z[:, iu] == Z[:, ju], axis=1)
    return Z


def sample_configurations(domain, N, count, seed, masses=None, circulations=None, stats=None):
    """``count`` configurations with positions i.i.d. uniform on the domain.

    Raises
    ------
    ParameterError
        If ``count < 1``.
    GeometryError
        If the rejection sampler is too inefficient.
    """
    if count < 1:
        raise ParameterError("count must be at least 1")
    a = np.ones(N) if masses is None else np.asarray(masses, dtype=float)
    xi = np.zeros(domain.hole_count) if circulations is None else np.asarray(circulations, dtype=float)
    Z = sample_positions(domain, N, count, seed, stats)
    return [VortexConfiguration(z, a, xi) for z in Z]


# --- ensembles ---------------------------------------------------------------


def wilson_interval(k, n, z=1.959963984540054):
    """95% Wilson score interval for a binomial proportion."""
    if n == 0:
        return (float("nan"), float("nan"))
    p = k / n
    den = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / den
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    low = 0.0 if k == 0 else max(0.0, centre - half)
    high = 1.0 if k == n else min(1.0, centre + half)
    return (float(low), float(high))


@dataclass
class EnsembleReport:
    """Near-collapse statistics of an ensemble of uniform initial data.

    ``collapse_fraction`` maps each threshold to ``(fraction, low, high)``
    with a 95% Wilson interval; it is empty for an empty ensemble.
    """

    sample_count: int
    N: int
    masses: list
    horizon: float
    delta_grid: list
    delta_stop: float
    seed: int
    collapse_fraction: dict
    tau_histogram: dict
    status_counts: dict
    censored: dict
    min_separation: np.ndarray = field(repr=False)
    event_times: np.ndarray = field(repr=False)
    total_steps: int = 0

    def to_dict(self):
        return {
            "sample_count": self.sample_count,
            "N": self.N,
            "masses": list(self.masses),
            "horizon": self.horizon,
            "delta_grid": list(self.delta_grid),
            "delta_stop": self.delta_stop,
            "seed": self.seed,
            "collapse_fraction": {repr(float(d)): list(v) for d, v in self.collapse_fraction.items()},
            "tau_histogram": self.tau_histogram,
            "status_counts": self.status_counts,
            "censored": {repr(float(d)): v for d, v in self.censored.items()},
            "total_steps": self.total_steps,
        }


def _ensemble_chunk(args):
    domain, Z, a, xi, horizon, opts, delta_stop, max_steps = args

    def rhs(Y):
        return velocity_array(domain, Y, a, xi)

    def monitor(Y):
        return min_separation_array(domain, Y)

    with np.errstate(all="ignore"):
        res = solve_batch(rhs, Z, horizon, opts, monitor, delta_stop, max_steps=max_steps)
    return res.min_monitor, res.status, res.t_final, res.steps


def ensemble_statistics(
    domain,
    N,
    masses,
    count,
    horizon,
    delta_grid,
    seed,
    circulations=None,
    opts=None,
    workers=None,
    chunk_size=None,
    max_steps=100_000,
):
    """Integrate ``count`` uniform samples and tabulate near-collapse fractions.

    Each run is halted once its minimal separation drops below
    ``min(delta_grid) / 10``.  Per-run failures (step-size underflow, step
    cap) are counted in ``status_counts`` rather than raised.  A run that
    stops early keeps the running minimum reached so far; ``censored[d]``
    counts such runs that were not yet flagged at ``d``.

    Members are integrated as one vectorized batch per worker (every member
    keeps its own step size), and results are reduced in sample order, so
    they do not depend on ``workers`` or ``chunk_size``.
    """
    if horizon <= 0:
        raise ParameterError("horizon must be positive")
    a = np.broadcast_to(np.asarray(masses, dtype=float), (N,)).copy()
    xi = np.zeros(domain.hole_count) if circulations is None else np.asarray(circulations, dtype=float)
    deltas = sorted(float(d) for d in delta_grid)
    delta_stop = deltas[0] / 10.0 if deltas else 0.0
    opts = opts or IntegratorOptions(rtol=1e-8, atol=1e-10)
    workers = workers or default_workers()
    Z = sample_positions(domain, N, count, seed)
    if chunk_size is None:
        chunk_size = max(1, -(-count // workers))
    chunks = [
        (domain, Z[s : s + chunk_size], a, xi, float(horizon), opts, delta_stop, max_steps)
        for s in range(0, count, chunk_size)
    ]
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_ensemble_chunk, chunks))
    else:
        parts = [_ensemble_chunk(c) for c in chunks]
    if parts:
        mins = np.concatenate([p[0] for p in parts])
        status = np.concatenate([p[1] for p in parts])
        t_end = np.concatenate([p[2] for p in parts])
        steps = int(sum(int(np.sum(p[3])) for p in parts))
    else:
        mins = np.empty(0)
        status = np.empty(0, dtype=np.int8)
        t_end = np.empty(0)
        steps = 0
    fractions = {}
    censored = {}
    early = (status == 2) | (status == 3)
    if count:
        for d in deltas:
            k = int(np.count_nonzero(mins < d))
            fractions[d] = (k / count,) + wilson_interval(k, count)
            censored[d] = int(np.count_nonzero(early & (mins >= d)))
    stopped = t_end[status == 1]
    counts, edges = np.histogram(stopped, bins=20, range=(0.0, float(horizon)))
    hist = {"edges": edges.tolist(), "counts": counts.tolist()}
    status_counts = {name: int(np.count_nonzero(status == i)) for i, name in enumerate(STATUS_NAMES)}
    return EnsembleReport(
        sample_count=int(count),
        N=int(N),
        masses=a.tolist(),
        horizon=float(horizon),
        delta_grid=deltas,
        delta_stop=delta_stop,
        seed=int(seed),
        collapse_fraction=fractions,
        tau_histogram=hist,
        status_counts=status_counts,
        censored=censored,
        min_separation=mins,
        event_times=stopped,
        total_steps=steps,
    )


# --- importance sampling for singular double integrals --------------------


class _PairSampler:
    """Draws ``(x, y)`` with densities concentrated near the boundary and
    near the diagonal.

    ``x`` mixes the uniform law with a boundary layer whose distance has
    density proportional to ``d**-alpha``; ``y`` given ``x`` mixes the
    uniform law with a radial law proportional to ``|y - x|**(-1 - beta)``.
    For mapped domains both laws in ``x`` are pushed forward from the disk.
    """

    def __init__(self, domain, alpha, beta, mix=0.3):
        if domain.kind not in ("disk", "annulus", "mapped_simply_connected"):
            raise ParameterError(f"integral checks need a bounded domain, got {domain.kind}")
        self.domain = domain
        self.alpha = alpha
        self.beta = beta
        self.mix = mix
        self.R = domain.diameter
        self.model = "annulus" if domain.kind == "annulus" else "disk"
        self.rho = domain.rho if domain.kind == "annulus" else 0.0
        self.width = 1.0 - self.rho

    # model-domain laws (disk or annulus), returning points and densities
    def _unif(self, u1, u2):
        r = np.sqrt(self.rho**2 + u1 * (1.0 - self.rho**2))
        return r * np.exp(1j * TWO_PI * u2)

    def _unif_density(self, z):
        return np.full(np.shape(z), 1.0 / (np.pi * (1.0 - self.rho**2)))

    def _layer(self, sel, u1, u2):
        a = self.alpha
        # depths below 1e-15 would round onto the boundary; their mass is negligible
        d = np.maximum(self.width * u1 ** (1.0 / (1.0 - a)), 1e-15)
        if self.model == "disk":
            r = 1.0 - d
        else:
            r = np.where(sel < 0.5, 1.0 - d, self.rho + d)
        return r * np.exp(1j * TWO_PI * u2)

    def _pd(self, d):
        a = self.alpha
        d = np.maximum(d, 1e-15)
        return (1.0 - a) * d ** (-a) / self.width ** (1.0 - a)

    def _layer_density(self, z):
        r = np.abs(z)
        if self.model == "disk":
            return self._pd(1.0 - r) / (TWO_PI * r)
        return 0.5 * (self._pd(1.0 - r) + self._pd(r - self.rho)) / (TWO_PI * r)

    def _model_density(self, w):
        return self.mix * self._unif_density(w) + (1.0 - self.mix) * self._layer_density(w)

    def _x_density(self, x):
        if self.domain.map is None:
            return self._model_density(x)
        T = self.domain.map
        return self._model_density(T.forward(x)) * np.abs(T.deriv(x)) ** 2

    def _y_uniform_density(self, y):
        if self.domain.map is None:
            return self._unif_density(y)
        T = self.domain.map
        return self._unif_density(T.forward(y)) * np.abs(T.deriv(y)) ** 2

    def _to_domain(self, w):
        return w if self.domain.map is None else self.domain.map.inverse(w)

    def draw(self, U):
        """Map uniform points ``U`` of shape ``(n, 6)`` to samples and densities."""
        m = self.mix
        sel = U[:, 0]
        uni = sel < m
        sub = np.where(uni, 0.0, (sel - m) / (1.0 - m))
        w = np.where(uni, self._unif(U[:, 1], U[:, 2]), self._layer(sub, U[:, 1], U[:, 2]))
        x = self._to_domain(w)
        qx = self._x_density(x)
        # y given x
        b = self.beta
        yu = U[:, 3] < m
        s = self.R * U[:, 4] ** (1.0 / (1.0 - b))
        y_local = x + s * np.exp(1j * TWO_PI * U[:, 5])
        y_unif = self._to_domain(self._unif(U[:, 4], U[:, 5]))
        y = np.where(yu, y_unif, y_local)
        inside = self.domain.contains(y)
        y = np.where(inside, y, x + 0.5)
        dist = np.abs(y - x)
        with np.errstate(divide="ignore", invalid="ignore"):
            q_local = (1.0 - b) * dist ** (-b) / self.R ** (1.0 - b) / (TWO_PI * dist)
            q_local = np.where(dist < self.R, q_local, 0.0)
            qy = m * self._y_uniform_density(y) + (1.0 - m) * q_local
        ok = inside & (y != x)
        return x, qx, y, qy, ok


@dataclass
class InequalityReport:
    """Estimates of singular double integrals at increasing sample levels.

    ``estimates`` maps an integral name to one estimate per level.
    ``regularized`` maps an integral name to one finest-level estimate per
    epsilon.  ``verdict`` is ``convergent`` when every tracked integral
    changes by less than 5% between the two finest levels.
    """

    domain_kind: str
    kappa: float
    quadrature_levels: list
    estimates: dict
    relative_change: dict
    epsilon_grid: list
    regularized: dict
    regularized_spread: dict
    primitives: dict
    phi_integral: dict
    seed: int
    verdict: str

    def to_dict(self):
        return {
            "domain_kind": self.domain_kind,
            "kappa": self.kappa,
            "quadrature_levels": self.quadrature_levels,
            "estimates": self.estimates,
            "relative_change": self.relative_change,
            "epsilon_grid": self.epsilon_grid,
            "regularized": self.regularized,
            "regularized_spread": self.regularized_spread,
            "primitives": self.primitives,
            "phi_integral": self.phi_integral,
            "seed": self.seed,
            "verdict": self.verdict,
        }


CONVERGENCE_TOL = 0.05


def _pair_integrands(domain, x, y, ok, kappa, reg_kernels):
    k = domain.kernels
    xs, ys = x[ok], y[ok]
    d = domain.boundary_distance(xs)
    s = np.abs(xs - ys)
    with np.errstate(all="ignore"):
        h = np.abs(dot(k.grad_G(xs, ys), perp(k.grad_robin(xs))))
    vals = {
        "coupling_over_distance": h / s**kappa,
        "coupling_over_boundary": h / d**kappa,
        "primitive_pair": 1.0 / s ** (1.0 + kappa),
        "primitive_mixed": 1.0 / (d**kappa * s),
    }
    for eps, rk in reg_kernels.items():
        with np.errstate(all="ignore"):
            he = np.abs(dot(rk.grad_G(xs, ys), perp(rk.grad_robin(xs))))
        vals[f"reg_distance@{eps!r}"] = he / s**kappa
        vals[f"reg_boundary@{eps!r}"] = he / d**kappa
    return vals


def _level_estimates(domain, sampler, n, seed, kappa, reg_kernels, batch=1 << 15):
    sob = qmc.Sobol(d=6, scramble=True, seed=np.random.default_rng(seed))
    U = sob.random(n)
    sums = {}
    for s in range(0, n, batch):
        x, qx, y, qy, ok = sampler.draw(U[s : s + batch])
        w = 1.0 / (qx[ok] * qy[ok])
        for name, v in _pair_integrands(domain, x, y, ok, kappa, reg_kernels).items():
            sums[name] = sums.get(name, 0.0) + float(np.sum(v * w))
    return {name: total / n for name, total in sums.items()}


def _layer_integral(domain, kappa, eps, n, seed):
    """``eps**kappa`` times the integral of ``d**(-1-kappa)`` over ``d >= eps``."""
    rng = np.random.default_rng(seed)
    # sample the layer with density proportional to d^(-1-kappa) on d >= eps
    sampler = _PairSampler(domain, alpha=min(0.999, 0.5 + 0.5 * kappa), beta=0.0)
    U = qmc.Sobol(d=6, scramble=True, seed=rng).random(n)
    x, qx, _, _, _ = sampler.draw(U)
    d = domain.boundary_distance(x)
    with np.errstate(divide="ignore"):
        f = np.where(d >= eps, d ** (-1.0 - kappa), 0.0)
    return float(eps**kappa * np.mean(f / qx))


def _phi_integrals(domain, N, masses, eps_grid, eta, n, seed):
    rng = np.random.default_rng(seed)
    Z = sample_positions(domain, N, n, rng.integers(2**63))
    a = np.asarray(masses, dtype=float)
    xi = np.zeros(domain.hole_count)
    vol = domain.area**N
    out = {}
    for eps in eps_grid:
        rk = RegularizedKernels.build(domain, eps)
        p = FunctionalParams(eta)
        with np.errstate(all="ignore"):
            phi = phi_array(rk, p, Z)
            lam = sum(lambda_terms_array(rk, p, Z, a, xi).values())
        out[repr(float(eps))] = {"phi": float(vol * np.mean(phi)), "abs_lambda": float(vol * np.mean(np.abs(lam)))}
    return out


def verify_inequality_suite(
    domain,
    kappa,
    levels=(14, 16, 18),
    epsilon_grid=(1e-2, 1e-3, 1e-4),
    seed=0,
    N=2,
    masses=None,
    eta=0.1,
    phi_samples=4096,
):
    """Stratified importance-sampling estimates of the singular integrals.

    Parameters
    ----------
    levels : sequence of int
        Base-2 logarithms of the sample counts, increasing.

    Raises
    ------
    ParameterError
        If ``kappa`` is not in ``(0, 1)``; the integrals diverge at ``kappa = 1``.
    """
    kappa = float(kappa)
    if not (0.0 < kappa < 1.0):
        raise ParameterError(f"kappa must lie in (0, 1), got {kappa}")
    levels = sorted(int(m) for m in levels)
    if len(levels) < 2:
        raise ParameterError("need at least two quadrature levels")
    sampler = _PairSampler(domain, alpha=kappa, beta=kappa)
    reg = {float(e): RegularizedKernels.build(domain, e) for e in epsilon_grid}
    per_level = [_level_estimates(domain, sampler, 2**m, seed + i, kappa, reg) for i, m in enumerate(levels)]
    names = list(per_level[0])
    estimates = {k: [lv[k] for lv in per_level] for k in names}
    change = {k: abs(v[-1] - v[-2]) / abs(v[-1]) if v[-1] else float("inf") for k, v in estimates.items()}
    main = ["coupling_over_distance", "coupling_over_boundary"]
    regularized = {
        "coupling_over_distance": [estimates[f"reg_distance@{e!r}"][-1] for e in reg],
        "coupling_over_boundary": [estimates[f"reg_boundary@{e!r}"][-1] for e in reg],
    }
    spread = {k: max(v) / min(v) for k, v in regularized.items()}
    primitives = {
        "pair": estimates["primitive_pair"],
        "mixed": estimates["primitive_mixed"],
        "layer_scaled": {
            repr(float(e)): _layer_integral(domain, kappa, e, 2 ** levels[-1], seed + 101)
            for e in sorted(set(list(epsilon_grid) + [1e-2, 1e-3, 1e-4, 1e-5]), reverse=True)
        },
    }
    a = np.ones(N) if masses is None else masses
    phi = _phi_integrals(domain, N, a, epsilon_grid, eta, phi_samples, seed + 202) if phi_samples else {}
    verdict = "convergent" if all(change[k] < CONVERGENCE_TOL for k in main) else "suspect"
    return InequalityReport(
        domain_kind=domain.kind,
        kappa=kappa,
        quadrature_levels=levels,
        estimates=estimates,
        relative_change=change,
        epsilon_grid=[float(e) for e in epsilon_grid],
        regularized=regularized,
        regularized_spread=spread,
        primitives=primitives,
        phi_integral=phi,
        seed=int(seed),
        verdict=verdict,
    )


# --- pointwise bounds --------------------------------------------------------

NEAR_BOUNDARY = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
LOWER_BOUND_TOL = 1e-12


@dataclass
class PointwiseReport:
    """Sample maxima of the pointwise potential-theory bounds."""

    domain_kind: str
    sample_count: int
    seed: int
    lower_bound_violations: int
    gap_max: float
    gap_max_by_stratum: dict
    gradient_distance_max: float
    gradient_distance_by_stratum: dict
    tangency_max: float | None
    tangency_by_stratum: dict
    explicit_upper_violations: int | None
    concentration: dict
    blow_up: dict
    passed: bool

    def to_dict(self):
        return dict(self.__dict__)


def _strata_points(domain, per, rng):
    """Near-boundary points, keyed by distance, on every boundary component."""
    out = {}
    for delta in NEAR_BOUNDARY:
        theta = rng.uniform(0.0, TWO_PI, per)
        pts = [domain.near_boundary_points(theta, delta, 0)]
        if domain.kind == "annulus":
            pts.append(domain.near_boundary_points(rng.uniform(0.0, TWO_PI, per), delta, 1))
        out[delta] = np.concatenate(pts)
    return out


def _explicit_upper_ok(domain, x, minus2pi_robin):
    # -2 pi robin <= min_j ln(4 d_j / (1 - d_j / D_j)) for the round boundaries
    r = np.abs(x)
    if domain.kind == "disk":
        bound = np.log(4 * (1 - r))
    elif domain.kind == "annulus":
        rho = domain.rho
        d1, D1 = r - rho, r + rho
        bound = np.minimum(np.log(4 * (1 - r)), np.log(4 * d1 / (1 - d1 / D1)))
    elif domain.kind == "exterior_disk":
        d0, D0 = r - 1, r + 1
        bound = np.log(4 * d0 / (1 - d0 / D0))
    else:
        return None
    return int(np.count_nonzero(minus2pi_robin > bound + LOWER_BOUND_TOL))


def _concentration(domain, kernels, rng, per=2000, M=0.5):
    """Pairs with large regular part must be close to each other and to the boundary."""
    theta = rng.uniform(0, TWO_PI, per)
    depth = 10.0 ** rng.uniform(-7, -1, per)
    x = domain.near_boundary_points(theta, depth, 0)
    off = 10.0 ** rng.uniform(-7, -1, per) * np.exp(1j * rng.uniform(0, TWO_PI, per))
    y = x + off
    ok = domain.contains(y)
    x, y = x[ok], y[ok]
    with np.errstate(all="ignore"):
        g = kernels.gamma(x, y)
    d = domain.boundary_distance(x)
    s = np.abs(x - y)
    out = {}
    for k in (1.0, 0.5):
        Cs = []
        for eps in (1e-2, 1e-3, 1e-4):
            sel = g >= (k / TWO_PI) * abs(np.log(eps)) - M
            if not np.any(sel):
                Cs.append(float("nan"))
                continue
            Cs.append(float(max(np.max(s[sel]), np.max(d[sel])) / eps**k))
        C = np.array(Cs)
        fin = np.isfinite(C)
        # least squares on log scale: log C_eps = log C + 0 * log eps
        fitted = float(np.exp(np.mean(np.log(C[fin])))) if np.any(fin) else float("nan")
        bounded = bool(np.all(C[fin] <= 10.0 * fitted)) if np.any(fin) else True
        out[repr(k)] = {"C_by_eps": Cs, "fitted_C": fitted, "bounded": bounded}
    return out


def _blow_up(domain, kernels):
    deltas = 10.0 ** -np.arange(1, 9, dtype=float)
    comps = [0, 1] if domain.kind == "annulus" else [0]
    out = {}
    for c in comps:
        x = domain.near_boundary_points(np.full(deltas.size, 0.3), deltas, c)
        y = domain.near_boundary_points(0.3 + deltas, deltas, c)
        with np.errstate(all="ignore"):
            g = kernels.gamma(x, y)
        out[str(c)] = {"values": g.tolist(), "monotone": bool(np.all(np.diff(g) > 0))}
    return out


def verify_pointwise_bounds(domain, sample_count=10_000, seed=0, kernels=None, strict=True):
    """Check the pointwise Robin-function bounds on interior and near-boundary samples.

    The lower bound ``ln d <= -2 pi robin`` must hold at every sample;
    other quantities are reported as sample maxima.

    Parameters
    ----------
    kernels : object, optional
        Kernel implementation to test; defaults to ``domain.kernels``.
    strict : bool
        Raise on a lower-bound violation.

    Raises
    ------
    ParameterError
        If ``sample_count < 1000``.
    InvariantViolationError
        On any violation of the lower bound (with ``strict``).
    """
    if sample_count < 1000:
        raise ParameterError("sample_count must be at least 1000")
    k = kernels if kernels is not None else domain.kernels
    rng = np.random.default_rng(seed)
    n_strata = len(NEAR_BOUNDARY) * domain.boundary_components
    per = max(50, sample_count // (2 * n_strata))
    strata = _strata_points(domain, per, rng)
    n_bulk = max(sample_count - per * n_strata, sample_count // 2)
    strata = {"bulk": sample_points(domain, n_bulk, rng), **strata}

    violations = 0
    gap_by, grad_by, tan_by = {}, {}, {}
    explicit = 0 if domain.kind in ("disk", "annulus", "exterior_disk") else None
    total = 0
    for key, x in strata.items():
        d = domain.boundary_distance(x)
        with np.errstate(all="ignore"):
            m2r = -TWO_PI * k.robin(x)
            gr = k.grad_robin(x)
        total += x.size
        violations += int(np.count_nonzero(np.log(d) > m2r + LOWER_BOUND_TOL))
        label = "bulk" if key == "bulk" else repr(key)
        gap_by[label] = float(np.max(m2r - np.log(d)))
        grad_by[label] = float(np.max(np.abs(gr) * d))
        if domain.hole_count:
            tan_by[label] = float(np.max(np.abs(dot(gr, domain.kernels.harmonic_field(x)))))
        if explicit is not None:
            explicit += _explicit_upper_ok(domain, x, m2r)
    report = PointwiseReport(
        domain_kind=domain.kind,
        sample_count=total,
        seed=int(seed),
        lower_bound_violations=violations,
        gap_max=max(gap_by.values()),
        gap_max_by_stratum=gap_by,
        gradient_distance_max=max(grad_by.values()),
        gradient_distance_by_stratum=grad_by,
        tangency_max=max(tan_by.values()) if tan_by else None,
        tangency_by_stratum=tan_by,
        explicit_upper_violations=explicit,
        concentration=_concentration(domain, k, rng),
        blow_up=_blow_up(domain, k),
        passed=violations == 0,
    )
    if strict and violations:
        raise InvariantViolationError(f"{violations} samples violate ln d <= -2 pi robin", report)
    return report


# --- Green function invariants ------------------------------------------------


@dataclass
class GreensReport:
    """Maximum residual and tolerance of every Green-function invariant."""

    domain_kind: str
    sample_count: int
    seed: int
    checks: dict

    @property
    def passed(self):
        return all(c["passed"] for c in self.checks.values())

    @property
    def failures(self):
        return [name for name, c in self.checks.items() if not c["passed"]]

    def to_dict(self):
        return {
            "domain_kind": self.domain_kind,
            "sample_count": self.sample_count,
            "seed": self.seed,
            "checks": self.checks,
            "passed": self.passed,
        }


def _interior(domain, n, rng, margin):
    pts = np.empty(0, dtype=np.complex128)
    while pts.size < n:
        z = sample_points(domain, 4 * n, rng)
        if domain.bounded:
            z = z[domain.boundary_distance(z) >= margin]
        else:
            z = z[(domain.boundary_distance(z) >= margin) & (np.abs(z) < 0.8 * domain.window)]
        pts = np.concatenate([pts, z])
    return pts[:n]


def verify_greens(domain, sample_count=200, seed=0, kernels=None):
    """Check boundary vanishing, symmetry, harmonicity and derivative consistency.

    Harmonicity uses a five-point Laplacian with step ``1e-4`` at points at
    least ``0.15`` away from the boundary and the pole (less in thin domains,
    where half the largest sampled boundary distance is used), so the
    truncation error is far below the ``1e-4`` tolerance.
    """
    k = kernels if kernels is not None else domain.kernels
    rng = np.random.default_rng(seed)
    n = sample_count
    pilot = sample_points(domain, 1000, rng)
    margin = min(0.15, 0.5 * float(np.max(domain.boundary_distance(pilot))))
    x = _interior(domain, n, rng, margin)
    y = _interior(domain, n, rng, margin)
    far = np.abs(x - y) >= margin
    checks = {}

    def record(name, value, tol):
        value = float(value)
        checks[name] = {"max_error": value, "tol": tol, "passed": bool(np.isfinite(value) and value <= tol)}

    with np.errstate(all="ignore"):
        th = rng.uniform(0, TWO_PI, n)
        bpts = [domain.boundary_curve(th)]
        if domain.kind == "annulus":
            bpts.append(domain.inner_curve(th))
        vals = [np.abs(k.G(b, y)) for b in bpts] + [np.abs(k.G(y, b)) for b in bpts]
        record("boundary_vanishing", max(np.max(v) for v in vals), 1e-9)
        Gxy, Gyx = k.G(x, y), k.G(y, x)
        record("symmetry", np.max(np.abs(Gxy - Gyx) / (1.0 + np.abs(Gxy))), 1e-12)

        h = 1e-4
        lap = (k.G(x + h, y) + k.G(x - h, y) + k.G(x + 1j * h, y) + k.G(x - 1j * h, y) - 4 * Gxy) / h**2
        record("harmonicity", np.max(np.abs(lap[far])), 1e-4)

        hd = 1e-6
        fd = ((k.G(x + hd, y) - k.G(x - hd, y)) + 1j * (k.G(x + 1j * hd, y) - k.G(x - 1j * hd, y))) / (2 * hd)
        g = k.grad_G(x, y)
        record("grad_green_fd", np.max(np.abs(fd - g)[far] / (1.0 + np.abs(g[far]))), 1e-6)
        fr = ((k.robin(x + hd) - k.robin(x - hd)) + 1j * (k.robin(x + 1j * hd) - k.robin(x - 1j * hd))) / (2 * hd)
        gr = k.grad_robin(x)
        record("grad_robin_fd", np.max(np.abs(fr - gr) / (1.0 + np.abs(gr))), 1e-6)
        record("robin_is_diagonal", np.max(np.abs(k.gamma(x, x) - k.robin(x))), 1e-12)
        record("regular_part", np.max(np.abs(k.gamma(x, y) - (Gxy - free_green(x, y)))[far]), 1e-12)

        if domain.kind == "disk":
            from .complexmap import DiskAutomorphism

            errs = []
            for _ in range(10):
                a = 0.8 * np.sqrt(rng.uniform()) * np.exp(1j * rng.uniform(0, TWO_PI))
                T = DiskAutomorphism(a, rng.uniform(0, TWO_PI))
                errs.append(np.max(np.abs(k.G(T.forward(x), T.forward(y)) - Gxy)))
            record("mobius_invariance", max(errs), 1e-12)

        if domain.map is not None:
            from .kernels import DiskKernels

            # the Robin value as the symmetric limit of the transported regular part
            T, D = domain.map, DiskKernels()
            e = np.exp(1j * rng.uniform(0, TWO_PI, n))
            hs = 1e-4
            xa, xb = x - 0.5 * hs * e, x + 0.5 * hs * e
            limit = D.G(T.forward(xa), T.forward(xb)) - free_green(xa, xb)
            record("robin_transport", np.max(np.abs(k.robin(x) - limit)), 1e-7)

        if domain.kind == "annulus":
            from .complexmap import Polynomial
            from .domain import DomainModel

            outer = DomainModel.disk().kernels
            hole = DomainModel.mapped_exterior(Polynomial.affine(1.0 / domain.rho), check=False).kernels
            # the regular part grows when the domain shrinks
            deficit = np.maximum(outer.gamma(x, y), hole.gamma(x, y)) - k.gamma(x, y)
            record("domain_monotonicity", max(0.0, float(np.max(deficit))), 1e-12)
            w = k.harmonic_measure(x)
            lapw = (
                k.harmonic_measure(x + h) + k.harmonic_measure(x - h)
                + k.harmonic_measure(x + 1j * h) + k.harmonic_measure(x - 1j * h) - 4 * w
            ) / h**2
            record("harmonic_measure_harmonic", np.max(np.abs(lapw)), 1e-4)
            ones = k.harmonic_measure(domain.inner_curve(th)) - 1.0
            zeros = k.harmonic_measure(domain.boundary_curve(th))
            record("harmonic_measure_boundary", max(np.max(np.abs(ones)), np.max(np.abs(zeros))), 1e-12)
            tang = dot(k.harmonic_field(domain.boundary_curve(th)), domain.boundary_curve(th))
            record("harmonic_field_tangent", np.max(np.abs(tang)), 1e-12)
    return GreensReport(domain.kind, int(n), int(seed), checks)
