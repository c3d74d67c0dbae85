"""Geometric description of the supported planar domains."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._util import TWO_PI, as_complex
from .complexmap import HolomorphicMap, Inverse, map_from_config, map_sanity_report
from .errors import GeometryError, ParameterError
from .kernels import AnnulusKernels, DiskKernels, MappedKernels

KINDS = ("disk", "exterior_disk", "mapped_simply_connected", "mapped_exterior", "annulus")

_CURVE_POINTS = 1024
_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class DomainModel:
    """A planar domain with known Green function.

    Attributes
    ----------
    kind : str
        One of ``disk``, ``exterior_disk``, ``mapped_simply_connected``,
        ``mapped_exterior`` or ``annulus``.
    map : HolomorphicMap, optional
        For mapped kinds, the biholomorphism from the domain onto the unit
        disk (or onto the exterior of the unit disk).  It must have a
        closed-form inverse, which traces the boundary.
    rho : float, optional
        Inner radius of the annulus ``rho < |z| < 1``.
    window : float, optional
        Radius of the disk that truncates unbounded domains for sampling.
    sanity : MapSanityReport, optional
        Report that accepted the map.
    """

    kind: str
    map: HolomorphicMap | None = None
    rho: float | None = None
    window: float | None = None
    sanity: object = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown domain kind {self.kind!r}")
        if self.kind == "annulus":
            if self.rho is None or not (0.0 < self.rho < 1.0):
                raise ParameterError(f"annulus requires 0 < rho < 1, got rho={self.rho}")
        if self.kind.startswith("mapped"):
            if self.map is None:
                raise ParameterError(f"{self.kind} domain needs a map")
            if not self.map.has_inverse:
                raise ParameterError("the domain map needs a closed-form inverse")
        if self.window is not None and self.window <= 1.0:
            raise ParameterError("sampling window must exceed the unit circle")

    # --- constructors ---------------------------------------------------

    @classmethod
    def disk(cls):
        return cls("disk")

    @classmethod
    def exterior_disk(cls, window=3.0):
        return cls("exterior_disk", window=window)

    @classmethod
    def annulus(cls, rho):
        return cls("annulus", rho=float(rho))

    @classmethod
    def mapped(cls, to_disk: HolomorphicMap, check=True, sample_count=2000, seed=0):
        """Simply connected domain ``T^{-1}(D)`` for a map ``T`` onto the disk."""
        rep = map_sanity_report(to_disk, sample_count, seed) if check else None
        return cls("mapped_simply_connected", map=to_disk, sanity=rep)

    @classmethod
    def image_of_disk(cls, F: HolomorphicMap, check=True, sample_count=2000, seed=0):
        """Simply connected domain ``F(D)`` for a univalent map ``F`` on the disk."""
        rep = map_sanity_report(F, sample_count, seed) if check else None
        return cls("mapped_simply_connected", map=Inverse(F), sanity=rep)

    @classmethod
    def mapped_exterior(cls, to_exterior: HolomorphicMap, window=3.0, check=True, sample_count=2000, seed=0):
        """Exterior domain ``T^{-1}(Pi_D)`` for a map onto the exterior of the disk."""
        rep = map_sanity_report(to_exterior, sample_count, seed) if check else None
        return cls("mapped_exterior", map=to_exterior, window=window, sanity=rep)

    @classmethod
    def from_config(cls, cfg: dict):
        kind = cfg["kind"]
        if kind == "disk":
            return cls.disk()
        if kind == "exterior_disk":
            return cls.exterior_disk(cfg.get("window", 3.0))
        if kind == "annulus":
            return cls.annulus(cfg["rho"])
        m = map_from_config(cfg["map"])
        seed = int(cfg.get("sanity_seed", 0))
        if kind == "mapped_simply_connected":
            if cfg.get("map_direction", "to_disk") == "from_disk":
                return cls.image_of_disk(m, seed=seed)
            return cls.mapped(m, seed=seed)
        if kind == "mapped_exterior":
            return cls.mapped_exterior(m, cfg.get("window", 3.0), seed=seed)
        raise ParameterError(f"unknown domain kind {kind!r}")

    def to_config(self) -> dict:
        cfg = {"kind": self.kind}
        if self.rho is not None:
            cfg["rho"] = self.rho
        if self.map is not None:
            cfg["map"] = self.map.to_config()
        if self.window is not None:
            cfg["window"] = self.window
        return cfg

    # --- basic properties -----------------------------------------------

    @property
    def hole_count(self) -> int:
        return 1 if self.kind == "annulus" else 0

    @property
    def bounded(self) -> bool:
        return self.kind in ("disk", "annulus", "mapped_simply_connected")

    @cached_property
    def kernels(self):
        if self.kind in ("disk", "exterior_disk"):
            return DiskKernels()
        if self.kind == "annulus":
            return AnnulusKernels(self.rho)
        return MappedKernels(self.map, DiskKernels())

    def model_point(self, x):
        """Image in the model domain (identity for unmapped kinds)."""
        return self.map.forward(x) if self.map is not None else x

    # --- membership and distance ----------------------------------------

    def contains(self, x, closed=False, tol=1e-12):
        """Mask of points in the domain (or its closure with ``closed=True``)."""
        x = as_complex(x)
        r = np.abs(x)
        t = tol if closed else -tol
        if self.kind == "disk":
            return r < 1.0 + t if not closed else r <= 1.0 + t
        if self.kind == "exterior_disk":
            return r > 1.0 - t if not closed else r >= 1.0 - t
        if self.kind == "annulus":
            if closed:
                return (r >= self.rho * (1 - tol)) & (r <= 1.0 + tol)
            return (r > self.rho * (1 + tol)) & (r < 1.0 - tol)
        T = self.map
        ok = T.contains(x)
        with np.errstate(all="ignore"):
            w = T.forward(x)
            back = T.inverse(w)
        ok = ok & (np.abs(back - x) <= 1e-9 * (1.0 + r))
        rw = np.abs(w)
        if self.kind == "mapped_simply_connected":
            inside = rw <= 1.0 + tol if closed else rw < 1.0 - tol
        else:
            inside = rw >= 1.0 - tol if closed else rw > 1.0 + tol
        return ok & inside

    def boundary_curve(self, theta):
        """Boundary point(s) parameterized by the model-circle angle.

        For the annulus, the outer circle is returned; see
        :meth:`inner_curve`.
        """
        e = np.exp(1j * np.asarray(theta, dtype=float))
        if self.map is None:
            return e
        return self.map.inverse(e)

    def inner_curve(self, theta):
        if self.kind != "annulus":
            raise GeometryError("only the annulus has an inner boundary curve")
        return self.rho * np.exp(1j * np.asarray(theta, dtype=float))

    def outward_normal_on_curve(self, theta):
        """Unit exterior normal at ``boundary_curve(theta)``."""
        theta = np.asarray(theta, dtype=float)
        e = np.exp(1j * theta)
        if self.map is None:
            return e if self.kind != "exterior_disk" else -e
        z = self.map.inverse(e)
        d1 = self.map.deriv(z)
        n = e * np.conj(d1) / np.abs(d1)
        return n if self.kind == "mapped_simply_connected" else -n

    def boundary_distance(self, x):
        """Euclidean distance ``d(x, boundary)``."""
        x = as_complex(x)
        r = np.abs(x)
        if self.kind in ("disk", "exterior_disk"):
            return np.abs(1.0 - r)
        if self.kind == "annulus":
            return np.minimum(np.abs(1.0 - r), np.abs(r - self.rho))
        return self._curve_distance(x)

    def _curve_distance(self, x, chunk=256):
        x = np.asarray(x, dtype=np.complex128)
        flat = x.reshape(-1)
        theta = TWO_PI * np.arange(_CURVE_POINTS) / _CURVE_POINTS
        curve = self.boundary_curve(theta)
        dtheta = TWO_PI / _CURVE_POINTS
        out = np.empty(flat.shape, dtype=float)
        for s in range(0, flat.size, chunk):
            pts = flat[s : s + chunk]
            k = np.argmin(np.abs(pts[:, None] - curve[None, :]), axis=1)
            lo = theta[k] - dtheta
            hi = theta[k] + dtheta
            # golden-section search on |x - Gamma(theta)|
            c = hi - _GOLDEN * (hi - lo)
            d = lo + _GOLDEN * (hi - lo)
            fc = np.abs(pts - self.boundary_curve(c))
            fd = np.abs(pts - self.boundary_curve(d))
            for _ in range(60):
                left = fc < fd
                hi = np.where(left, d, hi)
                lo = np.where(left, lo, c)
                c_new = np.where(left, hi - _GOLDEN * (hi - lo), d)
                d_new = np.where(left, c, lo + _GOLDEN * (hi - lo))
                probe = np.where(left, c_new, d_new)
                fp = np.abs(pts - self.boundary_curve(probe))
                fc, fd = np.where(left, fp, fd), np.where(left, fc, fp)
                c, d = c_new, d_new
            fa, fb = fc, fd
            out[s : s + chunk] = np.minimum(np.minimum(fa, fb), np.abs(pts - curve[k]))
        return out.reshape(x.shape)

    def near_boundary_points(self, theta, delta, component=0):
        """Points at distance ``delta`` inside the domain from its boundary.

        ``component`` selects the outer (0) or inner (1) circle of the annulus.
        """
        theta = np.asarray(theta, dtype=float)
        if component == 1:
            return (self.rho + delta) * np.exp(1j * theta)
        if component != 0:
            raise GeometryError("boundary component index out of range")
        return self.boundary_curve(theta) - delta * self.outward_normal_on_curve(theta)

    @property
    def boundary_components(self):
        return 2 if self.kind == "annulus" else 1

    # --- sampling geometry ----------------------------------------------

    def bounding_box(self):
        """``(xmin, xmax, ymin, ymax)`` of the sampling region."""
        if self.kind in ("disk", "annulus"):
            return (-1.0, 1.0, -1.0, 1.0)
        if self.kind == "mapped_simply_connected":
            c = self.boundary_curve(TWO_PI * np.arange(4096) / 4096)
            pad = 1e-3 * (np.ptp(c.real) + np.ptp(c.imag))
            return (c.real.min() - pad, c.real.max() + pad, c.imag.min() - pad, c.imag.max() + pad)
        if self.window is None:
            raise GeometryError("unbounded domain needs a sampling window")
        W = self.window
        return (-W, W, -W, W)

    def sampling_contains(self, x):
        """Membership in the (windowed, for unbounded kinds) sampling region."""
        inside = self.contains(x)
        if not self.bounded:
            inside = inside & (np.abs(as_complex(x)) < self.window)
        return inside

    @cached_property
    def area(self) -> float:
        """Area of the (windowed) sampling region."""
        if self.kind == "disk":
            return np.pi
        if self.kind == "annulus":
            return np.pi * (1.0 - self.rho**2)
        if self.kind == "exterior_disk":
            return np.pi * (self.window**2 - 1.0)
        # shoelace formula on a fine boundary polygon
        z = self.boundary_curve(TWO_PI * np.arange(65536) / 65536)
        enclosed = abs(0.5 * np.sum(np.imag(np.conj(z) * np.roll(z, -1))))
        if self.kind == "mapped_simply_connected":
            return enclosed
        return np.pi * self.window**2 - enclosed

    @property
    def diameter(self) -> float:
        x0, x1, y0, y1 = self.bounding_box()
        return float(np.hypot(x1 - x0, y1 - y0))
