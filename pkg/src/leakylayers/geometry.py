"""Planar closed curves, spheres, signed curvature and parallel offsets.

Orientation: curves are traversed counter-clockwise and ``n`` is the outer
unit normal.  Principal curvatures are the eigenvalues of ``L = -dn``, so a
convex domain has non-positive curvature (a circle of radius R has
``kappa = -1/R``) and the surface element of the parallel surface at signed
distance t is ``(1 - t*kappa) dSigma_0``.

Curves are analytic in the parameter and every evaluation routine accepts
complex parameter values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import shapely

from .errors import GeometryError

__all__ = [
    "ClosedCurve",
    "Circle",
    "Ellipse",
    "FourierCurve",
    "OffsetCurve",
    "Sphere",
    "PointSurface",
    "CurvatureField",
    "curvature",
    "parallel_offset",
    "jacobian_f",
    "max_parallel_range",
    "surface_integral",
    "curve_from_dict",
]

SAFETY_FACTOR = 0.9
DEFAULT_SAMPLES = 256


class ClosedCurve:
    """Smooth closed planar curve sampled on a uniform parameter grid."""

    kind = "curve"
    samples: int

    # --- analytic evaluation, overridden by concrete kinds -------------
    def derivatives(self, s):
        """Position, first and second parameter derivatives, each (2, ...)."""
        raise NotImplementedError

    def position(self, s):
        return self.derivatives(s)[0]

    def velocity(self, s):
        return self.derivatives(s)[1]

    def signed_curvature(self, s):
        _, d1, d2 = self.derivatives(s)
        speed = np.sqrt(d1[0] ** 2 + d1[1] ** 2)
        return -(d1[0] * d2[1] - d1[1] * d2[0]) / speed**3

    def speed(self, s):
        d1 = self.velocity(s)
        return np.sqrt(d1[0] ** 2 + d1[1] ** 2)

    def normal(self, s):
        d1 = self.velocity(s)
        speed = np.sqrt(d1[0] ** 2 + d1[1] ** 2)
        return np.stack([d1[1] / speed, -d1[0] / speed])

    # --- sampled views --------------------------------------------------
    @property
    def nodes(self):
        return 2.0 * np.pi * np.arange(self.samples) / self.samples

    def points(self):
        return self.position(self.nodes)

    def length(self):
        return float(np.sum(self.speed(self.nodes)) * 2.0 * np.pi / self.samples)

    def is_simple(self):
        xy = np.real(self.points()).T
        return bool(shapely.LinearRing(xy).is_simple)

    def with_samples(self, samples):
        raise NotImplementedError

    def describe(self):
        raise NotImplementedError

    def _validate(self):
        if self.samples < 8:
            raise GeometryError("need at least 8 samples")
        if not self.is_simple():
            raise GeometryError(f"{self.kind} curve self-intersects on its sample grid")


@dataclass(frozen=True)
class Circle(ClosedCurve):
    R: float
    samples: int = DEFAULT_SAMPLES
    kind = "circle"

    def __post_init__(self):
        if not self.R > 0:
            raise GeometryError("circle radius must be positive")
        self._validate()

    def derivatives(self, s):
        c, sn = np.cos(s), np.sin(s)
        R = self.R
        return (np.stack([R * c, R * sn]), np.stack([-R * sn, R * c]),
                np.stack([-R * c, -R * sn]))

    def with_samples(self, samples):
        return Circle(self.R, samples)

    def describe(self):
        return {"kind": "circle", "R": self.R, "samples": self.samples}


@dataclass(frozen=True)
class Ellipse(ClosedCurve):
    a: float
    b: float
    samples: int = DEFAULT_SAMPLES
    kind = "ellipse"

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise GeometryError("ellipse semi-axes must be positive")
        self._validate()

    def derivatives(self, s):
        c, sn = np.cos(s), np.sin(s)
        a, b = self.a, self.b
        return (np.stack([a * c, b * sn]), np.stack([-a * sn, b * c]),
                np.stack([-a * c, -b * sn]))

    def with_samples(self, samples):
        return Ellipse(self.a, self.b, samples)

    def describe(self):
        return {"kind": "ellipse", "a": self.a, "b": self.b, "samples": self.samples}


@dataclass(frozen=True)
class FourierCurve(ClosedCurve):
    """Star-shaped curve with polar radius ``r(s) = cos[0] + sum_k cos[k] cos(ks)
    + sin[k-1] sin(ks)``, k >= 1."""

    cos: tuple
    sin: tuple = ()
    samples: int = DEFAULT_SAMPLES
    kind = "fourier"

    def __post_init__(self):
        object.__setattr__(self, "cos", tuple(float(v) for v in self.cos))
        object.__setattr__(self, "sin", tuple(float(v) for v in self.sin))
        if not self.cos:
            raise GeometryError("fourier curve needs at least the mean radius")
        if np.min(self._radius(self.nodes)[0]) <= 0:
            raise GeometryError("fourier radius must stay positive")
        self._validate()

    def _radius(self, s):
        s = np.asarray(s)
        r = np.full(s.shape, self.cos[0], dtype=np.result_type(s, float))
        dr = np.zeros_like(r)
        ddr = np.zeros_like(r)
        for k in range(1, max(len(self.cos), len(self.sin) + 1)):
            a = self.cos[k] if k < len(self.cos) else 0.0
            b = self.sin[k - 1] if k - 1 < len(self.sin) else 0.0
            ck, sk = np.cos(k * s), np.sin(k * s)
            r = r + a * ck + b * sk
            dr = dr + k * (-a * sk + b * ck)
            ddr = ddr - k * k * (a * ck + b * sk)
        return r, dr, ddr

    def derivatives(self, s):
        r, dr, ddr = self._radius(s)
        c, sn = np.cos(s), np.sin(s)
        pos = np.stack([r * c, r * sn])
        d1 = np.stack([dr * c - r * sn, dr * sn + r * c])
        d2 = np.stack([ddr * c - 2 * dr * sn - r * c, ddr * sn + 2 * dr * c - r * sn])
        return pos, d1, d2

    def with_samples(self, samples):
        return FourierCurve(self.cos, self.sin, samples)

    def describe(self):
        return {"kind": "fourier", "cos": list(self.cos), "sin": list(self.sin),
                "samples": self.samples}


@dataclass(frozen=True)
class OffsetCurve(ClosedCurve):
    """The parallel curve ``q + t n(q)`` of a base curve, same parametrization."""

    base: ClosedCurve
    t: float
    samples: int = field(default=0)
    kind = "offset"

    def __post_init__(self):
        if self.samples == 0:
            object.__setattr__(self, "samples", self.base.samples)

    def derivatives(self, s):
        raise NotImplementedError("offset curves expose position/velocity only")

    def position(self, s):
        return self.base.position(s) + self.t * self.base.normal(s)

    def velocity(self, s):
        return self.base.velocity(s) * (1.0 - self.t * self.base.signed_curvature(s))

    def normal(self, s):
        return self.base.normal(s)

    def signed_curvature(self, s):
        k = self.base.signed_curvature(s)
        return k / (1.0 - self.t * k)

    def with_samples(self, samples):
        return OffsetCurve(self.base.with_samples(samples), self.t, samples)

    def describe(self):
        return {"kind": "offset", "t": self.t, "base": self.base.describe()}


@dataclass(frozen=True)
class Sphere:
    """Sphere of radius R in R^3 with a product Gauss-Legendre x uniform grid."""

    R: float
    n_theta: int = 24
    n_phi: int = 48
    kind = "sphere"
    dimension = 3

    def __post_init__(self):
        if not self.R > 0:
            raise GeometryError("sphere radius must be positive")

    def angles(self):
        x, _ = np.polynomial.legendre.leggauss(self.n_theta)
        theta = np.arccos(x)
        phi = 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi
        T, P = np.meshgrid(theta, phi, indexing="ij")
        return T.ravel(), P.ravel()

    def weights(self):
        _, w = np.polynomial.legendre.leggauss(self.n_theta)
        return np.repeat(w, self.n_phi) * (2.0 * np.pi / self.n_phi) * self.R**2

    def integrate(self, values):
        values = np.asarray(values)
        w = self.weights()
        if values.shape != w.shape:
            raise ValueError("samples are not aligned with the sphere grid")
        return complex(np.sum(w * values))

    def curvature_field(self):
        n = self.n_theta * self.n_phi
        kappa = np.full((n, 2), -1.0 / self.R)
        return CurvatureField(kappa=kappa, K1=kappa.mean(axis=1), dimension=3)

    def describe(self):
        return {"kind": "sphere", "R": self.R, "n_theta": self.n_theta, "n_phi": self.n_phi}


@dataclass(frozen=True)
class PointSurface:
    """The one-point 'hypersurface' {0} of the real line."""

    kind = "point"
    dimension = 1

    def integrate(self, values):
        values = np.atleast_1d(values)
        if values.shape != (1,):
            raise ValueError("a point surface carries exactly one sample")
        return complex(values[0])

    def curvature_field(self):
        return CurvatureField(kappa=np.zeros((1, 0)), K1=np.zeros(1), dimension=1)

    def describe(self):
        return {"kind": "point"}


@dataclass(frozen=True)
class CurvatureField:
    kappa: np.ndarray  # (nodes, d - 1) principal curvatures
    K1: np.ndarray  # (nodes,) first mean curvature
    dimension: int

    @property
    def max_abs(self):
        return float(np.max(np.abs(self.kappa))) if self.kappa.size else 0.0


def curvature(curve):
    """Signed principal curvature and first mean curvature at every node."""
    if isinstance(curve, (Sphere, PointSurface)):
        return curve.curvature_field()
    s = curve.nodes
    if np.min(np.abs(curve.speed(s))) < 1e-12:
        raise GeometryError("degenerate tangent on the sample grid")
    k = np.real(curve.signed_curvature(s))
    return CurvatureField(kappa=k[:, None], K1=k.copy(), dimension=2)


def max_parallel_range(curve):
    """Largest admissible offset ``0.9 / max|kappa|``."""
    if isinstance(curve, Sphere):
        return SAFETY_FACTOR * curve.R
    fine = 2.0 * np.pi * np.arange(8 * curve.samples) / (8 * curve.samples)
    kmax = float(np.max(np.abs(curve.signed_curvature(fine))))
    if kmax == 0.0:
        return math.inf
    return SAFETY_FACTOR / kmax


def parallel_offset(curve, t):
    """Sampled parallel curve at signed distance t along the outer normal."""
    if abs(t) >= max_parallel_range(curve):
        raise GeometryError(f"offset {t} beyond the admissible parallel range")
    if t == 0:
        return curve
    off = OffsetCurve(curve, float(t))
    if not off.is_simple():
        raise GeometryError("offset curve self-intersects")
    return off


def jacobian_f(field, node, t):
    """Surface-element ratio ``prod_mu (1 - t kappa_mu)`` at one node."""
    if abs(t) * field.max_abs >= 1.0:
        raise GeometryError("offset violates t * max|kappa| < 1")
    value = float(np.prod(1.0 - t * field.kappa[node]))
    return value


def surface_integral(curve, samples):
    """Periodic trapezoid rule for the integral of node values over the curve."""
    if isinstance(curve, (Sphere, PointSurface)):
        return curve.integrate(samples)
    values = np.asarray(samples)
    if values.shape != (curve.samples,):
        raise ValueError(f"expected {curve.samples} samples, got shape {values.shape}")
    speed = curve.speed(curve.nodes)
    return complex(np.sum(values * speed) * 2.0 * np.pi / curve.samples)


def curve_from_dict(desc, samples=None):
    """Build a curve from a JSON descriptor such as ``{"kind": "circle", "R": 1}``."""
    kind = desc.get("kind")
    n = int(samples or desc.get("samples", DEFAULT_SAMPLES))
    if kind == "circle":
        return Circle(float(desc["R"]), n)
    if kind == "ellipse":
        return Ellipse(float(desc["a"]), float(desc["b"]), n)
    if kind == "fourier":
        return FourierCurve(tuple(desc["cos"]), tuple(desc.get("sin", ())), n)
    raise GeometryError(f"unknown curve kind {kind!r}")
