"""Riemann-sphere arithmetic: Moebius maps, generalized circles, curvature.

Points of the extended plane are Python complex numbers; the point at
infinity is the sentinel :data:`INF` (test with :func:`is_inf`).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConstraintViolation, DegenerateInput, StepTooLarge
from .jets import Jet3

INF = complex(math.inf, 0.0)

# coefficient magnitude below which a generalized circle is treated as a line
_LINE_EPS = 1e-13


def is_inf(z) -> bool:
    z = complex(z)
    return not (math.isfinite(z.real) and math.isfinite(z.imag))


def chart_switch(z):
    """The sphere isometry z -> -1/z (sends infinity to 0)."""
    if is_inf(z):
        return 0j
    if z == 0:
        return INF
    return -1.0 / z


def chordal_distance(z, w) -> float:
    """Euclidean distance between the stereographic images on the unit sphere."""
    zi, wi = is_inf(z), is_inf(w)
    if zi and wi:
        return 0.0
    if zi:
        return 2.0 / math.sqrt(1.0 + abs(w) ** 2)
    if wi:
        return 2.0 / math.sqrt(1.0 + abs(z) ** 2)
    return 2.0 * abs(z - w) / math.sqrt((1.0 + abs(z) ** 2) * (1.0 + abs(w) ** 2))


def space_form_density(zeta, K):
    """Conformal factor 4/(1 + K|zeta|^2)^2 of the space form of curvature K."""
    zeta = np.asarray(zeta)
    return 4.0 / (1.0 + K * np.abs(zeta) ** 2) ** 2


# --------------------------------------------------------------------------
# Moebius transformations


@dataclass(frozen=True)
class Mobius:
    """z -> (a z + b) / (c z + d), stored with ad - bc = 1."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        a, b, c, d = (complex(x) for x in (self.a, self.b, self.c, self.d))
        det = a * d - b * c
        if det == 0 or not cmath.isfinite(det):
            raise DegenerateInput("singular Moebius coefficients")
        s = cmath.sqrt(det)
        object.__setattr__(self, "a", a / s)
        object.__setattr__(self, "b", b / s)
        object.__setattr__(self, "c", c / s)
        object.__setattr__(self, "d", d / s)

    @classmethod
    def identity(cls) -> "Mobius":
        return cls(1, 0, 0, 1)

    @classmethod
    def from_matrix(cls, m) -> "Mobius":
        m = np.asarray(m, dtype=complex)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def from_points(cls, p, q) -> "Mobius":
        """The unique map sending p[k] to q[k] for k = 0, 1, 2."""
        mp = _to_zero_one_inf(*p)
        mq = _to_zero_one_inf(*q)
        return mq.inverse() @ mp

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    def __matmul__(self, other: "Mobius") -> "Mobius":
        return Mobius.from_matrix(self.matrix @ other.matrix)

    def inverse(self) -> "Mobius":
        return Mobius(self.d, -self.b, -self.c, self.a)

    def __call__(self, z):
        return mobius_apply(self, z)

    def apply_array(self, z):
        """Vectorized action on finite points (poles give inf)."""
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            return (self.a * z + self.b) / (self.c * z + self.d)

    def apply_jet(self, u: Jet3, flip: bool = False) -> Jet3:
        """Jet of m(u); with ``flip`` the jet of -1/m(u) is returned instead."""
        a, b, c, d = self.a, self.b, self.c, self.d
        if flip:
            a, b, c, d = -c, -d, a, b
        x = u.f0
        den = c * x + d
        inv = 1.0 / den
        val = (a * x + b) * inv
        return u.apply(val, inv * inv, -2.0 * c * inv ** 3, 6.0 * c * c * inv ** 4)

    def prefers_flip(self, x) -> bool:
        """True when |m(x)| > 1, i.e. the -1/z chart is the better one."""
        return abs(self.a * x + self.b) > abs(self.c * x + self.d)

    def is_close(self, other: "Mobius", tol: float = 1e-10) -> bool:
        m1, m2 = self.matrix, other.matrix
        return bool(min(np.abs(m1 - m2).max(), np.abs(m1 + m2).max()) <= tol)

    def to_dict(self) -> dict:
        return {k: [getattr(self, k).real, getattr(self, k).imag] for k in "abcd"}

    @classmethod
    def from_dict(cls, d) -> "Mobius":
        return cls(*(complex(*d[k]) for k in "abcd"))


def _to_zero_one_inf(p1, p2, p3) -> Mobius:
    pts = (p1, p2, p3)
    for i in range(3):
        for j in range(i + 1, 3):
            if chordal_distance(pts[i], pts[j]) < 1e-14:
                raise DegenerateInput("three distinct points are required")
    if is_inf(p1):
        return Mobius(0, p2 - p3, 1, -p3)
    if is_inf(p2):
        return Mobius(1, -p1, 1, -p3)
    if is_inf(p3):
        return Mobius(1, -p1, 0, p2 - p1)
    return Mobius(p2 - p3, -p1 * (p2 - p3), p2 - p1, -p3 * (p2 - p1))


def mobius_apply(m: Mobius, z):
    """Projective action of ``m`` on a point of the sphere."""
    if is_inf(z):
        return INF if m.c == 0 else m.a / m.c
    z = complex(z)
    den = m.c * z + m.d
    num = m.a * z + m.b
    if den == 0:
        return INF
    return num / den


def isometry_normal_form(alpha, beta, K) -> Mobius:
    """Isometry g -> (alpha g - conj(beta)) / (K beta g + conj(alpha))."""
    alpha, beta = complex(alpha), complex(beta)
    unit = abs(alpha) ** 2 + K * abs(beta) ** 2
    if abs(unit - 1.0) > 1e-12:
        raise ConstraintViolation(f"|alpha|^2 + K|beta|^2 = {unit!r}, expected 1")
    return Mobius(alpha, -beta.conjugate(), K * beta, alpha.conjugate())


def cross_ratio(z1, z2, z3, z4):
    """(z1, z2; z3, z4) = (z1 - z3)(z2 - z4) / ((z1 - z4)(z2 - z3))."""
    return (z1 - z3) * (z2 - z4) / ((z1 - z4) * (z2 - z3))


# --------------------------------------------------------------------------
# Generalized circles


@dataclass(frozen=True)
class GeneralizedCircle:
    """{z : A|z|^2 + 2 Re(conj(B) z) + D = 0} scaled so that |B|^2 - AD = 1.

    Sign convention: A >= 0, and for lines (A = 0) the first nonzero of
    (Re B, Im B) is positive.
    """

    A: float
    B: complex
    D: float

    def __post_init__(self):
        A, B, D = float(self.A), complex(self.B), float(self.D)
        n = abs(B) ** 2 - A * D
        if not n > 0:
            raise DegenerateInput("|B|^2 - AD must be positive")
        s = math.sqrt(n)
        A, B, D = A / s, B / s, D / s
        if abs(A) < _LINE_EPS:
            A = 0.0
        flip = A < 0 or (A == 0 and (B.real < -_LINE_EPS or (abs(B.real) <= _LINE_EPS and B.imag < 0)))
        if flip:
            A, B, D = -A, -B, -D
        object.__setattr__(self, "A", A + 0.0)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "D", D + 0.0)

    @classmethod
    def from_center_radius(cls, center, radius) -> "GeneralizedCircle":
        c = complex(center)
        return cls(1.0, -c, abs(c) ** 2 - radius ** 2)

    @classmethod
    def line(cls, point, direction) -> "GeneralizedCircle":
        """Line through ``point`` with the given (complex) direction."""
        n = 1j * complex(direction)
        # 2 Re(conj(n) z) = 2 Re(conj(n) point)
        B = -n  # any nonzero normal works; canonical sign fixed afterwards
        return cls(0.0, B, 2.0 * (n.conjugate() * complex(point)).real)

    @property
    def is_line(self) -> bool:
        return self.A == 0.0

    @property
    def center(self) -> complex:
        return -self.B / self.A

    @property
    def radius(self) -> float:
        return 1.0 / self.A

    @property
    def hermitian(self) -> np.ndarray:
        return np.array([[self.A, self.B], [self.B.conjugate(), self.D]], dtype=complex)

    def _form(self, z):
        if is_inf(z):
            return self.A
        z = complex(z)
        return (self.A * abs(z) ** 2 + 2.0 * (self.B.conjugate() * z).real + self.D) / (1.0 + abs(z) ** 2)

    def residual(self, z) -> float:
        """Chordal distance from z to the circle, to first order.

        On the unit sphere the form h(z) = (A|z|^2 + 2 Re(conj(B) z) + D)/(1 + |z|^2)
        is an affine function whose gradient along the sphere, at the
        circle, has unit length under the canonical scaling.
        """
        return abs(self._form(z))

    def plane_distance(self, z) -> float:
        """Distance in R^3 from the stereographic image of z to the circle's plane."""
        d = 0.5 * (self.A + self.D)
        return abs(self._form(z)) / math.sqrt(1.0 + d * d)

    def contains(self, z, tol: float = 1e-10) -> bool:
        return self.residual(z) <= tol

    def transform(self, m: Mobius) -> "GeneralizedCircle":
        """Image circle m(C); H -> M^{-*} H M^{-1}."""
        Minv = m.inverse().matrix
        H = Minv.conj().T @ self.hermitian @ Minv
        return GeneralizedCircle(H[0, 0].real, H[0, 1], H[1, 1].real)

    def normal_at(self, z) -> complex:
        """Euclidean normal of the circle at the finite point z."""
        return self.A * complex(z) + self.B

    def tangent_at(self, z) -> complex:
        n = self.normal_at(z)
        return 1j * n / abs(n)

    def same_as(self, other: "GeneralizedCircle", tol: float = 1e-10) -> bool:
        v1 = np.array([self.A, self.B.real, self.B.imag, self.D])
        v2 = np.array([other.A, other.B.real, other.B.imag, other.D])
        return bool(min(np.abs(v1 - v2).max(), np.abs(v1 + v2).max()) <= tol)

    def inversive_product(self, other: "GeneralizedCircle") -> float:
        """Equals -cos of the intersection angle for intersecting circles."""
        return 0.5 * (self.A * other.D + other.A * self.D) - (self.B * other.B.conjugate()).real

    def to_dict(self) -> dict:
        return {"A": self.A, "B": [self.B.real, self.B.imag], "D": self.D}

    @classmethod
    def from_dict(cls, d) -> "GeneralizedCircle":
        return cls(d["A"], complex(*d["B"]), d["D"])


def circle_through(p1, p2, p3) -> GeneralizedCircle:
    """Generalized circle through three distinct points of the sphere."""
    pts = (p1, p2, p3)
    for i in range(3):
        for j in range(i + 1, 3):
            if chordal_distance(pts[i], pts[j]) < 1e-12:
                raise DegenerateInput("circle_through needs three distinct points")
    rows = []
    for p in pts:
        if is_inf(p):
            rows.append([1.0, 0.0, 0.0, 0.0])
        else:
            p = complex(p)
            s = 1.0 + abs(p) ** 2
            rows.append([abs(p) ** 2 / s, 2 * p.real / s, 2 * p.imag / s, 1.0 / s])
    _, sv, vt = np.linalg.svd(np.array(rows))
    if sv[-1] < 1e-14 * sv[0]:
        raise DegenerateInput("points do not determine a unique circle")
    A, bx, by, D = vt[-1]
    return GeneralizedCircle(A, complex(bx, by), D)


def fit_circle(points) -> GeneralizedCircle:
    """Least-squares generalized circle through many finite or infinite points."""
    rows = []
    for p in points:
        if is_inf(p):
            rows.append([1.0, 0.0, 0.0, 0.0])
        else:
            p = complex(p)
            s = 1.0 + abs(p) ** 2
            rows.append([abs(p) ** 2 / s, 2 * p.real / s, 2 * p.imag / s, 1.0 / s])
    rows = np.array(rows)
    # constrain through the normalization |B|^2 - AD = 1 afterwards; SVD gives
    # the direction minimizing the algebraic residual
    _, sv, vt = np.linalg.svd(rows)
    A, bx, by, D = vt[-1]
    return GeneralizedCircle(A, complex(bx, by), D)


@dataclass(frozen=True)
class IntersectionResult:
    tag: str  # "TwoPoints" | "Tangent" | "Disjoint" | "Equal"
    points: tuple = field(default_factory=tuple)
    inversive_product: float = float("nan")


def _line_line(c1: GeneralizedCircle, c2: GeneralizedCircle):
    a11, a12, r1 = c1.B.real, c1.B.imag, -c1.D / 2.0
    a21, a22, r2 = c2.B.real, c2.B.imag, -c2.D / 2.0
    det = a11 * a22 - a12 * a21
    if abs(det) < 1e-14:
        return None
    x = (r1 * a22 - a12 * r2) / det
    y = (a11 * r2 - a21 * r1) / det
    return complex(x, y)


def _line_circle(line: GeneralizedCircle, circ: GeneralizedCircle, tangent: bool):
    B, D = line.B, line.D
    u = 1j * B / abs(B)
    z0 = -D * B / (2.0 * abs(B) ** 2)
    a = circ.A
    bhalf = a * (z0.conjugate() * u).real + (circ.B.conjugate() * u).real
    cc = a * abs(z0) ** 2 + 2.0 * (circ.B.conjugate() * z0).real + circ.D
    disc = bhalf * bhalf - a * cc
    if tangent or disc < 0:
        disc = 0.0
    sq = math.sqrt(disc)
    if a == 0:
        return (z0,)
    t1 = (-bhalf - sq) / a
    t2 = (-bhalf + sq) / a
    if tangent:
        return (z0 + t1 * u,)
    return (z0 + t1 * u, z0 + t2 * u)


def classify_intersection(c1: GeneralizedCircle, c2: GeneralizedCircle, tol: float = 1e-10) -> IntersectionResult:
    """Relative position of two generalized circles with witness points."""
    if c1.same_as(c2, tol):
        return IntersectionResult("Equal", (), 1.0)
    ip = c1.inversive_product(c2)
    if abs(ip) > 1.0 + tol:
        return IntersectionResult("Disjoint", (), ip)
    tangent = abs(abs(ip) - 1.0) <= tol
    tag = "Tangent" if tangent else "TwoPoints"
    if c1.is_line and c2.is_line:
        p = _line_line(c1, c2)
        if p is None:
            return IntersectionResult("Tangent", (INF,), ip)
        return IntersectionResult(tag, (p, INF) if not tangent else (INF,), ip)
    if c1.is_line:
        pts = _line_circle(c1, c2, tangent)
    elif c2.is_line:
        pts = _line_circle(c2, c1, tangent)
    else:
        radical = GeneralizedCircle(
            0.0,
            c1.A * c2.B - c2.A * c1.B,
            c1.A * c2.D - c2.A * c1.D,
        ) if abs(c1.A * c2.B - c2.A * c1.B) > 1e-14 else None
        if radical is None:
            return IntersectionResult("Disjoint", (), ip)
        pts = _line_circle(radical, c1, tangent)
    return IntersectionResult(tag, tuple(complex(p) for p in pts), ip)


# --------------------------------------------------------------------------
# Curvature measurements


def spherical_derivative(g, z, g_inv=None) -> float:
    """|g'|/(1 + |g|^2) at z.

    ``g`` is either an object with a ``sphere_jet`` method (developing maps)
    or a callable returning a :class:`Jet3`.  If g has a pole at z, the
    jet of 1/g supplied through ``g_inv`` is used instead.
    """
    if hasattr(g, "sphere_jet"):
        jet, _ = g.sphere_jet(z)
    else:
        try:
            jet = g(z)
            bad = not (cmath.isfinite(jet.f0) and cmath.isfinite(jet.f1))
        except ZeroDivisionError:
            bad = True
        if bad:
            if g_inv is None:
                raise ZeroDivisionError("pole of g; pass g_inv for the chart switch")
            jet = g_inv(z)
    return abs(jet.f1) / (1.0 + abs(jet.f0) ** 2)


def _kg_once(curve, K, t, h):
    z0 = complex(curve(t))
    zp = complex(curve(t + h))
    zm = complex(curve(t - h))
    flip = K > 0 and abs(z0) > 1.0
    if flip:
        z0, zp, zm = -1.0 / z0, -1.0 / zp, -1.0 / zm
    d1 = (zp - zm) / (2.0 * h)
    d2 = (zp - 2.0 * z0 + zm) / (h * h)
    speed = abs(d1)
    k_euc = (d1.conjugate() * d2).imag / speed ** 3
    # phi = log 2 - log(1 + K|z|^2); Euclidean gradient as a complex number
    grad = -2.0 * K * z0 / (1.0 + K * abs(z0) ** 2)
    normal = 1j * d1 / speed
    dphi_dn = (grad.conjugate() * normal).real
    rho = 2.0 / (1.0 + K * abs(z0) ** 2)
    return (k_euc - dphi_dn) / rho


def geodesic_curvature(curve, K, t, h: float = 1e-3, tol: float = 1e-6) -> float:
    """Signed geodesic curvature of ``curve`` at ``t`` in 4|dz|^2/(1+K|z|^2)^2.

    The sign follows the left normal of the parametrization.  In a
    conformal metric e^{2 phi}|dz|^2 the covariant derivative of the unit
    tangent reduces to e^{-phi}(k_euclid - d phi/dN); derivatives of the
    curve are central differences with one Richardson step.
    """
    k1 = _kg_once(curve, K, t, h)
    k2 = _kg_once(curve, K, t, h / 2.0)
    err = abs(k2 - k1) / 3.0
    if err > tol:
        raise StepTooLarge(f"Richardson error estimate {err:.3e} exceeds {tol:.1e}")
    return (4.0 * k2 - k1) / 3.0
