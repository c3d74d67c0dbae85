"""Holomorphic maps and the conformal transport formulas.

Points and plane vectors are encoded as complex numbers throughout: the
vector ``(g1, g2)`` is ``g1 + 1j*g2``.  With this encoding the Jacobian
of a holomorphic map acts on gradients as multiplication by the complex
conjugate of its derivative.

Every map declares a region where it may be evaluated (``contains``) and
a compact sample region used by :func:`map_sanity_report`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from ._util import TWO_PI, as_complex, scalar
from .errors import DomainViolationError, MapRejectedError, ParameterError

_DOMAIN_TOL = 1e-12


def _disk_samples(n, rng, r_in=0.0, r_out=1.0, boundary_fraction=0.1):
    """Quasi-uniform samples of the closed annulus ``r_in <= |z| <= r_out``.

    A scrambled Halton sequence fills the interior and evenly spaced points
    cover the bounding circles, so the closure is represented.
    """
    n_bd = max(int(boundary_fraction * n), 8)
    n_in = max(n - n_bd, 1)
    halton = qmc.Halton(d=2, scramble=True, seed=rng)
    u = halton.random(n_in)
    r = np.sqrt(r_in**2 + u[:, 0] * (r_out**2 - r_in**2))
    inner = r * np.exp(1j * TWO_PI * u[:, 1])
    circles = [r_out] if r_in == 0.0 else [r_out, r_in]
    per = max(n_bd // len(circles), 4)
    theta = TWO_PI * (np.arange(per) + rng.random()) / per
    ring = np.concatenate([c * np.exp(1j * theta) for c in circles])
    return np.concatenate([inner, ring]), n_in


class HolomorphicMap:
    """Base class for evaluatable biholomorphisms.

    Subclasses implement ``forward``, ``deriv`` and ``second_deriv``; maps
    with a closed-form inverse also implement ``inverse``.
    """

    kind = "abstract"
    has_inverse = False

    def __call__(self, z):
        return self.forward(z)

    def forward(self, z):
        raise NotImplementedError

    def deriv(self, z):
        raise NotImplementedError

    def second_deriv(self, z):
        raise NotImplementedError

    def inverse(self, w):
        raise NotImplementedError(f"{self.kind} map has no closed-form inverse")

    def contains(self, z, tol=_DOMAIN_TOL):
        """Boolean mask of points inside the declared domain."""
        return np.ones(np.shape(z), dtype=bool)

    def closure_samples(self, n, rng):
        """Return ``(samples, n_interior)``; interior samples come first."""
        return _disk_samples(n, rng)

    def to_config(self) -> dict:
        raise NotImplementedError

    def then(self, outer: "HolomorphicMap") -> "Composed":
        """Return ``outer o self``."""
        return Composed(outer, self)

    def inverted(self) -> "Inverse":
        return Inverse(self)


@dataclass(frozen=True)
class Identity(HolomorphicMap):
    kind = "identity"
    has_inverse = True

    def forward(self, z):
        return np.asarray(z, dtype=np.complex128) + 0.0

    def deriv(self, z):
        return np.ones(np.shape(z), dtype=np.complex128)

    def second_deriv(self, z):
        return np.zeros(np.shape(z), dtype=np.complex128)

    def inverse(self, w):
        return np.asarray(w, dtype=np.complex128) + 0.0

    def to_config(self):
        return {"kind": "identity"}


@dataclass(frozen=True)
class DiskAutomorphism(HolomorphicMap):
    """``T(z) = exp(i theta) (z - a) / (1 - conj(a) z)`` with ``|a| < 1``."""

    a: complex = 0.0
    theta: float = 0.0
    kind = "mobius"
    has_inverse = True

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        if abs(self.a) >= 1.0:
            raise ParameterError(f"disk automorphism needs |a| < 1, got |a|={abs(self.a)}")

    @property
    def _rot(self):
        return np.exp(1j * self.theta)

    def forward(self, z):
        z = np.asarray(z, dtype=np.complex128)
        return self._rot * (z - self.a) / (1.0 - np.conj(self.a) * z)

    def deriv(self, z):
        z = np.asarray(z, dtype=np.complex128)
        return self._rot * (1.0 - abs(self.a) ** 2) / (1.0 - np.conj(self.a) * z) ** 2

    def second_deriv(self, z):
        z = np.asarray(z, dtype=np.complex128)
        ab = np.conj(self.a)
        return 2.0 * ab * self._rot * (1.0 - abs(self.a) ** 2) / (1.0 - ab * z) ** 3

    def inverse(self, w):
        u = np.asarray(w, dtype=np.complex128) / self._rot
        return (u + self.a) / (1.0 + np.conj(self.a) * u)

    def contains(self, z, tol=_DOMAIN_TOL):
        # anywhere away from the pole 1/conj(a)
        return np.abs(1.0 - np.conj(self.a) * np.asarray(z)) > tol

    def to_config(self):
        return {"kind": "mobius", "a": [self.a.real, self.a.imag], "theta": self.theta}


@dataclass(frozen=True)
class Polynomial(HolomorphicMap):
    """``T(z) = c0 + c1 z + c2 z^2 + ...``.

    Parameters
    ----------
    coeffs : tuple of complex
        Coefficients in ascending order of degree.
    radius : float or None
        Radius of the closed disk on which the map is declared.  ``None``
        declares the whole plane (the sample region is then the unit disk).
    """

    coeffs: tuple = (0.0, 1.0)
    radius: float | None = 1.0
    kind = "polynomial"
    has_inverse = True

    def __post_init__(self):
        c = tuple(complex(v) for v in self.coeffs)
        while len(c) > 2 and c[-1] == 0:
            c = c[:-1]
        if len(c) < 2 or c[1] == 0:
            raise ParameterError("polynomial map needs a nonzero linear coefficient")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def perturbation(cls, c, radius=1.0):
        """The map ``z + c z^2`` declared on ``|z| <= radius``."""
        return cls((0.0, 1.0, complex(c)), radius)

    @classmethod
    def affine(cls, scale, shift=0.0, radius=None):
        return cls((complex(shift), complex(scale)), radius)

    def _poly(self, order):
        p = np.polynomial.Polynomial(np.array(self.coeffs))
        return p.deriv(order) if order else p

    def forward(self, z):
        return self._poly(0)(np.asarray(z, dtype=np.complex128))

    def deriv(self, z):
        return self._poly(1)(np.asarray(z, dtype=np.complex128)) + 0j

    def second_deriv(self, z):
        z = np.asarray(z, dtype=np.complex128)
        if len(self.coeffs) < 3:
            return np.zeros(z.shape, dtype=np.complex128)
        return self._poly(2)(z) + 0j

    def inverse(self, w):
        w = np.asarray(w, dtype=np.complex128)
        c = self.coeffs
        u = w - c[0]
        if len(c) == 2:
            return u / c[1]
        if len(c) == 3:
            # root that reduces to u/c1 as c2 -> 0; avoids cancellation
            s = np.sqrt(1.0 + 4.0 * c[2] * u / c[1] ** 2)
            return 2.0 * u / (c[1] * (1.0 + s))
        z = u / c[1]
        for _ in range(100):
            step = (self.forward(z) - w) / self.deriv(z)
            z = z - step
            if np.all(np.abs(step) < 1e-15 * (1.0 + np.abs(z))):
                break
        return z

    def contains(self, z, tol=_DOMAIN_TOL):
        if self.radius is None:
            return np.ones(np.shape(z), dtype=bool)
        return np.abs(np.asarray(z)) <= self.radius * (1.0 + tol)

    def closure_samples(self, n, rng):
        return _disk_samples(n, rng, r_out=1.0 if self.radius is None else self.radius)

    def to_config(self):
        cfg = {"kind": "polynomial", "coeffs": [[v.real, v.imag] for v in self.coeffs]}
        if self.radius is not None:
            cfg["radius"] = self.radius
        return cfg


@dataclass(frozen=True)
class Inversion(HolomorphicMap):
    """``T(z) = 1/z`` declared on ``|z| >= r_min``.

    The sample region is the closed annulus ``r_min <= |z| <= r_max``.
    """

    r_min: float = 1.0
    r_max: float = 2.0
    kind = "inversion"
    has_inverse = True

    def forward(self, z):
        return 1.0 / np.asarray(z, dtype=np.complex128)

    def deriv(self, z):
        return -1.0 / np.asarray(z, dtype=np.complex128) ** 2

    def second_deriv(self, z):
        return 2.0 / np.asarray(z, dtype=np.complex128) ** 3

    def inverse(self, w):
        return 1.0 / np.asarray(w, dtype=np.complex128)

    def contains(self, z, tol=_DOMAIN_TOL):
        return np.abs(np.asarray(z)) >= self.r_min * (1.0 - tol)

    def closure_samples(self, n, rng):
        return _disk_samples(n, rng, r_in=self.r_min, r_out=self.r_max)

    def to_config(self):
        return {"kind": "inversion", "r_min": self.r_min, "r_max": self.r_max}


@dataclass(frozen=True)
class Composed(HolomorphicMap):
    """``outer o inner``."""

    outer: HolomorphicMap = field(default_factory=Identity)
    inner: HolomorphicMap = field(default_factory=Identity)
    kind = "composed"

    @property
    def has_inverse(self):
        return self.outer.has_inverse and self.inner.has_inverse

    def forward(self, z):
        return self.outer.forward(self.inner.forward(z))

    def deriv(self, z):
        return self.outer.deriv(self.inner.forward(z)) * self.inner.deriv(z)

    def second_deriv(self, z):
        s = self.inner.forward(z)
        d1 = self.inner.deriv(z)
        return self.outer.second_deriv(s) * d1**2 + self.outer.deriv(s) * self.inner.second_deriv(z)

    def inverse(self, w):
        return self.inner.inverse(self.outer.inverse(w))

    def contains(self, z, tol=_DOMAIN_TOL):
        ok = self.inner.contains(z, tol)
        with np.errstate(all="ignore"):
            s = self.inner.forward(z)
        return ok & self.outer.contains(s, tol)

    def closure_samples(self, n, rng):
        return self.inner.closure_samples(n, rng)

    def to_config(self):
        return {"kind": "composed", "outer": self.outer.to_config(), "inner": self.inner.to_config()}


@dataclass(frozen=True)
class Inverse(HolomorphicMap):
    """The inverse ``F^{-1}`` of a map ``F`` that has a closed-form inverse.

    Derivatives come from ``F`` analytically: with ``s = F^{-1}(x)``,
    ``(F^{-1})'(x) = 1/F'(s)`` and ``(F^{-1})''(x) = -F''(s)/F'(s)**3``.
    """

    base: HolomorphicMap = field(default_factory=Identity)
    kind = "inverse"
    has_inverse = True

    def __post_init__(self):
        if not self.base.has_inverse:
            raise ParameterError(f"cannot invert a {self.base.kind} map without inverse")

    def forward(self, z):
        return self.base.inverse(z)

    def deriv(self, z):
        return 1.0 / self.base.deriv(self.base.inverse(z))

    def second_deriv(self, z):
        s = self.base.inverse(z)
        d1 = self.base.deriv(s)
        return -self.base.second_deriv(s) / d1**3

    def inverse(self, w):
        return self.base.forward(w)

    def contains(self, z, tol=_DOMAIN_TOL):
        z = np.asarray(z, dtype=np.complex128)
        with np.errstate(all="ignore"):
            s = self.base.inverse(z)
            back = self.base.forward(s)
        return self.base.contains(s, tol) & (np.abs(back - z) <= 1e-9 * (1.0 + np.abs(z)))

    def closure_samples(self, n, rng):
        s, n_in = self.base.closure_samples(n, rng)
        return self.base.forward(s), n_in

    def to_config(self):
        return {"kind": "inverse", "of": self.base.to_config()}


def map_from_config(cfg: dict) -> HolomorphicMap:
    """Build a map from a ``{kind, parameters}`` record.

    Raises
    ------
    KeyError, ValueError, ParameterError
        On unknown kinds or malformed parameters.  The config layer turns
        these into path-qualified errors.
    """
    kind = cfg["kind"]
    if kind == "identity":
        return Identity()
    if kind == "mobius":
        a = cfg.get("a", [0.0, 0.0])
        return DiskAutomorphism(complex(a[0], a[1]), float(cfg.get("theta", 0.0)))
    if kind == "polynomial":
        if "c" in cfg:
            c = cfg["c"]
            c = complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c)
            return Polynomial.perturbation(c, cfg.get("radius", 1.0))
        coeffs = [complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v) for v in cfg["coeffs"]]
        return Polynomial(tuple(coeffs), cfg.get("radius", 1.0))
    if kind == "inversion":
        return Inversion(float(cfg.get("r_min", 1.0)), float(cfg.get("r_max", 2.0)))
    if kind == "composed":
        return Composed(map_from_config(cfg["outer"]), map_from_config(cfg["inner"]))
    if kind == "inverse":
        return Inverse(map_from_config(cfg["of"]))
    raise ValueError(f"unknown map kind {kind!r}")


# --- public operations -------------------------------------------------------


def _checked(map_: HolomorphicMap, z):
    z = as_complex(z)
    if not np.all(map_.contains(z)):
        raise DomainViolationError(f"point outside the declared domain of the {map_.kind} map")
    return z


def map_forward(map_: HolomorphicMap, z):
    """Evaluate ``T(z)`` after checking ``z`` against the declared domain."""
    return scalar(map_.forward(_checked(map_, z)))


def map_deriv(map_: HolomorphicMap, z):
    return scalar(map_.deriv(_checked(map_, z)))


def map_second_deriv(map_: HolomorphicMap, z):
    return scalar(map_.second_deriv(_checked(map_, z)))


def pullback_gradient(map_: HolomorphicMap, z, g):
    """Gradient of ``f o T`` at ``z`` given ``g = grad f`` at ``T(z)``.

    Componentwise this is
    ``(T1_x g1 + T2_x g2, -T2_x g1 + T1_x g2)`` where ``T' = T1_x + i T2_x``,
    which is ``conj(T'(z)) * g`` in complex notation.
    """
    z = _checked(map_, z)
    return scalar(np.conj(map_.deriv(z)) * as_complex(g))


def psi_from_derivatives(d1, d2):
    """The correction field built from ``T'`` and ``T''`` values."""
    p, q = np.real(d1), np.imag(d1)
    P, Q = np.real(d2), np.imag(d2)
    c1 = -2.0 * p * q * P + (p**2 - q**2) * Q
    c2 = (p**2 - q**2) * P + 2.0 * p * q * Q
    return (c1 + 1j * c2) / TWO_PI


def psi_correction(map_: HolomorphicMap, z):
    """Correction field ``psi`` linking Robin gradients across a conformal map."""
    z = _checked(map_, z)
    return scalar(psi_from_derivatives(map_.deriv(z), map_.second_deriv(z)))


def boundary_normal(domain, x, with_flag=False):
    """Extended exterior normal field of ``domain`` at ``x``.

    Disk: ``x``; exterior of the disk: ``-x``; mapped domains transport the
    model normal ``n(T(x)) conj(T'(x)) / |T'(x)|``; annulus: ``x`` nearer the
    outer circle and ``-x/rho`` nearer the inner one.  On the boundary the
    value has unit length.

    With ``with_flag=True`` a boolean mask marking degenerate (zero) values,
    such as the disk centre, is returned as well.
    """
    x = as_complex(x)
    kind = domain.kind
    if kind == "disk":
        n = x + 0.0
    elif kind == "exterior_disk":
        n = -x
    elif kind in ("mapped_simply_connected", "mapped_exterior"):
        T = domain.map
        d1 = T.deriv(x)
        w = T.forward(x)
        model = w if kind == "mapped_simply_connected" else -w
        n = model * np.conj(d1) / np.abs(d1)
    elif kind == "annulus":
        rho = domain.rho
        r = np.abs(x)
        n = np.where(r >= 0.5 * (1.0 + rho), x, -x / rho)
    else:
        raise ValueError(f"unknown domain kind {kind!r}")
    n = scalar(n)
    if with_flag:
        return n, scalar(np.asarray(n) == 0)
    return n


# --- sanity report -----------------------------------------------------------


@dataclass(frozen=True)
class MapSanityReport:
    """Sampled surrogates for the derivative bounds of a map.

    Attributes
    ----------
    m_lower : float
        Smallest sampled ``|T'|``.
    M_upper : float
        Largest sampled value of ``|T'|`` and ``|T''|``.
    deriv_max, second_deriv_max : float
        The two contributions to ``M_upper``.
    cr_residual_max : float
        Largest Cauchy-Riemann residual of the finite-difference Jacobian,
        scaled by ``1 + |T'|``.
    injectivity_violations : int
        Number of well separated sample pairs with colliding images.
    """

    m_lower: float
    M_upper: float
    deriv_max: float
    second_deriv_max: float
    cr_residual_max: float
    injectivity_violations: int
    sample_count: int
    seed: int

    @property
    def accepted(self):
        return self.m_lower > 0 and self.injectivity_violations == 0 and np.isfinite(self.M_upper)

    def to_dict(self):
        return {
            "m_lower": self.m_lower,
            "M_upper": self.M_upper,
            "deriv_max": self.deriv_max,
            "second_deriv_max": self.second_deriv_max,
            "cr_residual_max": self.cr_residual_max,
            "injectivity_violations": self.injectivity_violations,
            "sample_count": self.sample_count,
            "seed": self.seed,
        }


def cauchy_riemann_residual(map_: HolomorphicMap, z, h=1e-6):
    """Scaled CR residual of the central-difference Jacobian at ``z``."""
    z = np.asarray(z, dtype=np.complex128)
    dx = (map_.forward(z + h) - map_.forward(z - h)) / (2 * h)
    dy = (map_.forward(z + 1j * h) - map_.forward(z - 1j * h)) / (2 * h)
    # T1_x = T2_y and T2_x = -T1_y
    res = np.maximum(np.abs(dx.real - dy.imag), np.abs(dx.imag + dy.real))
    return res / (1.0 + np.abs(map_.deriv(z)))


def _count_collisions(z, w, img_tol, src_sep, chunk=512):
    count = 0
    n = len(z)
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        dw = np.abs(w[start:stop, None] - w[None, :])
        dz = np.abs(z[start:stop, None] - z[None, :])
        hit = (dw < img_tol) & (dz > src_sep)
        # upper triangle only
        idx = np.arange(start, stop)[:, None] < np.arange(n)[None, :]
        count += int(np.count_nonzero(hit & idx))
    return count


def map_sanity_report(map_: HolomorphicMap, sample_count: int = 2000, seed: int = 0) -> MapSanityReport:
    """Sample the closure of the map's declared region and check conformality.

    Raises
    ------
    ParameterError
        If ``sample_count < 100``.
    MapRejectedError
        If ``m_lower <= 0`` or an injectivity violation is found.  The
        report is attached to the exception.
    """
    if sample_count < 100:
        raise ParameterError("map_sanity_report needs sample_count >= 100")
    rng = np.random.default_rng(seed)
    z, n_in = map_.closure_samples(sample_count, rng)
    with np.errstate(all="ignore"):
        d1 = np.abs(map_.deriv(z))
        d2 = np.abs(map_.second_deriv(z))
        w = map_.forward(z)
        cr = cauchy_riemann_residual(map_, z[:n_in])
    m_lower = float(np.min(d1))
    dmax = float(np.max(d1))
    d2max = float(np.max(d2))
    span = np.ptp(z.real) * np.ptp(z.imag)
    spacing = np.sqrt(max(span, 1e-300) / len(z))
    img_tol = 0.5 * float(np.median(d1)) * spacing
    src_sep = 0.1 * float(np.hypot(np.ptp(z.real), np.ptp(z.imag)))
    violations = _count_collisions(z, w, img_tol, src_sep)
    report = MapSanityReport(
        m_lower=m_lower,
        M_upper=max(dmax, d2max),
        deriv_max=dmax,
        second_deriv_max=d2max,
        cr_residual_max=float(np.max(cr)),
        injectivity_violations=violations,
        sample_count=int(len(z)),
        seed=int(seed),
    )
    if not report.accepted:
        raise MapRejectedError(
            f"{map_.kind} map rejected: m_lower={m_lower:.3g}, injectivity_violations={violations}",
            report,
        )
    return report
