"""Circular polygons traced by developing maps of polygonal metrics.

A polygonal metric on the upper half-plane has boundary singular points
q_1 < ... < q_n (and infinity); its developing map sends each boundary
interval onto an arc of a generalized circle.  This module assembles those
arcs into an :class:`ImmersedCircularPolygon`, measures vertex angles and
arc curvatures, checks necessary conditions for Alexandrov embeddedness and
solves the one-parameter accessory problem for two poles.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .developing import (
    DevelopingMap,
    LogForm,
    NumericMap,
    PowerForm,
    SpiralForm,
    boundary_circles,
    interval_points,
)
from .errors import (
    DomainError,
    FitFailure,
    NoBracket,
    VertexLimitNonconvergent,
)
from .moebius import (
    INF,
    GeneralizedCircle,
    Mobius,
    chordal_distance,
    classify_intersection,
    geodesic_curvature,
    is_inf,
)
from .schwarzian import SchwarzianSpec, indicial_roots, inversion_transform, validate_spec
from .verification import normal_derivative

FIT_TOL = 1e-8


# --------------------------------------------------------------------------
# small sphere helpers


def _chart_to_zero(p) -> Mobius:
    """A rotation of the sphere taking p to 0 (orientation preserving)."""
    if is_inf(p):
        return Mobius(0, 1, -1, 0)
    p = complex(p)
    return Mobius(1, -p, p.conjugate(), 1)


def _apply(m: Mobius, z):
    return m(INF if is_inf(z) else complex(z))


def _cross_ratio(z1, z2, z3, z4) -> complex:
    """(z1, z2; z3, z4), with infinite entries dropped from the formula."""
    def diff(a, b):
        return None if is_inf(a) or is_inf(b) else a - b

    num = [diff(z1, z3), diff(z2, z4)]
    den = [diff(z1, z4), diff(z2, z3)]
    n = np.prod([x for x in num if x is not None])
    d = np.prod([x for x in den if x is not None])
    return complex(n / d)


def _same_point(a, b, tol) -> bool:
    if is_inf(a) and is_inf(b):
        return True
    return chordal_distance(a, b) <= tol


def vertex_angle(alpha: float) -> float:
    """Interior angle pi*sqrt(1 - 2 alpha) at a double pole of coefficient alpha."""
    if alpha > 0.5:
        raise DomainError(f"alpha = {alpha!r} > 1/2 has no real local exponents")
    r = indicial_roots(alpha)
    return math.pi * r.difference


def is_horocycle(c: GeneralizedCircle, tol: float = 1e-9) -> bool:
    """Circle inside the closed unit disk and tangent to the unit circle."""
    if c.is_line:
        return False
    unit = GeneralizedCircle.from_center_radius(0.0, 1.0)
    res = classify_intersection(c, unit, tol)
    return res.tag == "Tangent" and c.radius < 1.0 and abs(c.center) + c.radius <= 1.0 + tol


# --------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class Arc:
    circle: GeneralizedCircle
    start: complex
    end: complex
    mid: complex  # a point of the arc between start and end
    orientation: int  # +1 when the arc runs counterclockwise about the circle's center
    interval: tuple
    fit_residual: float = 0.0

    def contains(self, z, tol: float = 1e-8) -> bool:
        """Whether z lies on the closed arc (z assumed on the circle)."""
        if _same_point(z, self.start, tol) or _same_point(z, self.end, tol):
            return True
        cr = _cross_ratio(self.start, self.end, self.mid, z)
        return cr.real > 0

    def to_dict(self) -> dict:
        return {
            "circle": self.circle.to_dict(),
            "start": _pt(self.start),
            "end": _pt(self.end),
            "mid": _pt(self.mid),
            "orientation": self.orientation,
            "interval": [_num(x) for x in self.interval],
            "fit_residual": self.fit_residual,
        }

    def transform(self, m: Mobius) -> "Arc":
        s, e, md = (_apply(m, p) for p in (self.start, self.end, self.mid))
        c = self.circle.transform(m)
        return Arc(c, s, e, md, _orientation(c, s, md, e), self.interval, self.fit_residual)


@dataclass(frozen=True)
class Vertex:
    point: complex
    angle: float  # measured interior angle
    expected: float | None  # angle predicted from the local exponents
    ideal: bool
    label: str

    def to_dict(self) -> dict:
        return {"point": _pt(self.point), "angle": self.angle, "expected": self.expected,
                "ideal": self.ideal, "label": self.label}


@dataclass
class ImmersedCircularPolygon:
    arcs: list
    vertices: list  # vertices[j] is where arcs[j-1] ends and arcs[j] starts
    K: int = 1
    constants: list = field(default_factory=list)  # fitted boundary constants per arc
    curvatures: list = field(default_factory=list)  # measured geodesic curvature per arc

    def closure_residual(self) -> float:
        """Largest chordal gap between consecutive arc endpoints."""
        n = len(self.arcs)
        gaps = [chordal_distance(self.arcs[j].end, self.arcs[(j + 1) % n].start) for j in range(n)]
        return float(max(gaps))

    def fit_residual(self) -> float:
        return float(max(a.fit_residual for a in self.arcs))

    def angles(self) -> list:
        return [v.angle for v in self.vertices]

    def ideal_vertex_report(self, tol: float = 1e-6) -> list:
        """For K = -1: (label, tangent, horocycle-free) per vertex on the unit circle."""
        out = []
        n = len(self.arcs)
        for j, v in enumerate(self.vertices):
            if not v.ideal:
                continue
            a, b = self.arcs[j - 1], self.arcs[j % n]
            tangent = min(v.angle, abs(2 * math.pi - v.angle)) <= tol
            clean = not (is_horocycle(a.circle) or is_horocycle(b.circle))
            out.append({"label": v.label, "tangent": bool(tangent), "horocycle_free": bool(clean)})
        return out

    def transform(self, m: Mobius) -> "ImmersedCircularPolygon":
        arcs = [a.transform(m) for a in self.arcs]
        verts = [Vertex(_apply(m, v.point), v.angle, v.expected, v.ideal, v.label) for v in self.vertices]
        return ImmersedCircularPolygon(arcs, verts, self.K, list(self.constants), list(self.curvatures))

    def polyline(self, dm: DevelopingMap, n: int = 64) -> list:
        """Dense boundary samples (arc index, s, g(s)) including vertex endpoints."""
        rows = []
        s = np.linspace(0.0, 1.0, n + 2)[1:-1]
        for j, arc in enumerate(self.arcs):
            rows.append((j, 0.0, arc.start))
            for sv, x in zip(s, interval_points(arc.interval, s)):
                rows.append((j, float(sv), dm.value(complex(x, 0.0))))
            rows.append((j, 1.0, arc.end))
        return rows

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "arcs": [a.to_dict() for a in self.arcs],
            "vertices": [v.to_dict() for v in self.vertices],
            "constants": list(self.constants),
            "curvatures": list(self.curvatures),
            "closure_residual": self.closure_residual(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_csv(self, dm: DevelopingMap, n: int = 64) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["arc", "s", "re", "im"])
        for j, s, z in self.polyline(dm, n):
            if is_inf(z):
                w.writerow([j, repr(s), "inf", "inf"])
            else:
                z = complex(z)
                w.writerow([j, repr(s), repr(z.real), repr(z.imag)])
        return buf.getvalue()


@dataclass(frozen=True)
class PolygonalMetricSpec:
    """Schwarzian data for a K = 1 polygonal metric plus a Moebius gauge."""

    schwarzian: SchwarzianSpec
    gauge: Mobius = field(default_factory=Mobius.identity)
    K: int = 1

    def __post_init__(self):
        if self.K != 1:
            raise DomainError("polygon synthesis from Schwarzian data is implemented for K = 1")

    @property
    def singular_points(self) -> list:
        return [p.q for p in self.schwarzian.pole_list()]

    def intervals(self) -> list:
        qs = self.singular_points
        ends = [-math.inf] + qs + [math.inf]
        # arc 0 starts at the vertex at infinity
        return list(zip(ends[:-1], ends[1:]))

    def to_dict(self) -> dict:
        return {"schwarzian": self.schwarzian.to_dict(), "gauge": self.gauge.to_dict(), "K": self.K}

    @classmethod
    def from_dict(cls, d) -> "PolygonalMetricSpec":
        if "schwarzian" not in d:
            return cls(SchwarzianSpec.from_dict(d))
        gauge = Mobius.from_dict(d["gauge"]) if "gauge" in d else Mobius.identity()
        return cls(SchwarzianSpec.from_dict(d["schwarzian"]), gauge, int(d.get("K", 1)))


def _pt(z):
    if is_inf(z):
        return "inf"
    z = complex(z)
    return [z.real, z.imag]


def _num(x):
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def _orientation(c: GeneralizedCircle, s, m, e) -> int:
    """+1 if start -> mid -> end runs counterclockwise about the center (left turn for lines)."""
    if c.is_line or any(is_inf(p) for p in (s, m, e)):
        # a line: orientation is the sign of travel along the tangent direction
        t = c.tangent_at(m if not is_inf(m) else s)
        a, b = (s, e) if not (is_inf(s) or is_inf(e)) else (m, e if not is_inf(e) else s)
        sign = ((complex(b) - complex(a)) * t.conjugate()).real
        return 1 if sign >= 0 else -1
    ctr = c.center
    turn = sum(
        math.remainder(math.atan2((b - ctr).imag, (b - ctr).real) - math.atan2((a - ctr).imag, (a - ctr).real), 2 * math.pi)
        for a, b in ((s, m), (m, e))
    )
    return 1 if turn > 0 else -1


# --------------------------------------------------------------------------
# arc and vertex extraction


def _vertex_point(dm: DevelopingMap, where):
    """g at a boundary singular point (index) or at infinity ('inf')."""
    if isinstance(dm, NumericMap):
        return dm.vertex_value(where)
    if isinstance(dm, SpiralForm):
        raise VertexLimitNonconvergent("spiral maps have no boundary limit at 0 or infinity")
    if isinstance(dm, LogForm):
        return _apply(dm.psi, INF)
    if isinstance(dm, PowerForm):
        red = dm.reduced()
        k0 = red.F.order_at_zero
        if k0 is None:
            raise DomainError("F vanishes identically")
        if where == "inf":
            k = red.F.low + len(red.F.coeffs) - 1
            e = red.gamma + k
            inner = INF if e > 0 else (0j if e < 0 else red.F.coeffs[-1])
        else:
            e = red.gamma + k0
            inner = 0j if e > 0 else (INF if e < 0 else red.F.coeffs[k0 - red.F.low])
        return _apply(dm.psi, inner)
    raise DomainError(f"no vertex limit for {type(dm).__name__}")


def _near_point(interval, side: str, delta: float) -> float:
    a, b = interval
    if side == "start":
        return -1.0 / delta if math.isinf(a) else a + delta
    return 1.0 / delta if math.isinf(b) else b - delta


def _arc_direction(arc: Arc, at, toward) -> complex:
    """Unit tangent of the arc at ``at`` pointing into the arc, in the chart sending ``at`` to 0."""
    T = _chart_to_zero(at)
    c = arc.circle.transform(T)
    t = c.tangent_at(0j)
    w = _apply(T, toward)
    if is_inf(w) or (complex(w) * t.conjugate()).real < 0:
        t = -t
    return t


def measure_angle(incoming: Arc, outgoing: Arc, P, near_in, near_out) -> float:
    """Interior angle at P from the outgoing tangent counterclockwise to the reversed incoming one."""
    d_out = _arc_direction(outgoing, P, near_out)
    d_back = _arc_direction(incoming, P, near_in)
    ang = math.atan2((d_back / d_out).imag, (d_back / d_out).real) % (2 * math.pi)
    if ang > 2 * math.pi - 1e-9:
        ang = 0.0
    return ang


def polygon_from_map(dm: DevelopingMap, singular: list, alphas: list | None = None,
                     alpha_inf: float | None = None, delta: float = 1e-6) -> ImmersedCircularPolygon:
    """Polygon traced by ``dm`` on the intervals cut out by ``singular`` and infinity."""
    qs = sorted(float(q) for q in singular)
    ends = [-math.inf] + qs + [math.inf]
    intervals = list(zip(ends[:-1], ends[1:]))
    labels = ["inf"] + list(range(len(qs)))
    points = [_vertex_point(dm, w) for w in labels]
    arcs = []
    for j, iv in enumerate(intervals):
        try:
            fit = boundary_circles(dm, iv)
        except Exception as exc:
            raise FitFailure(f"interval {iv}: {exc}") from exc
        if not fit.residual <= FIT_TOL:
            raise FitFailure(f"interval {iv}: circle residual {fit.residual:.3e} > {FIT_TOL:g}")
        start, end = points[j], points[(j + 1) % len(points)]
        mid = dm.value(complex(interval_points(iv, 0.5), 0.0))
        arcs.append(Arc(fit.circle, start, end, mid, _orientation(fit.circle, start, mid, end), iv, fit.residual))
    expected = [None] * len(labels)
    if alpha_inf is not None:
        expected[0] = vertex_angle(alpha_inf)
    if alphas is not None:
        for i, a in enumerate(alphas):
            expected[i + 1] = vertex_angle(a)
    verts = []
    n = len(arcs)
    for j, lab in enumerate(labels):
        inc, out = arcs[j - 1], arcs[j]
        near_in = dm.value(complex(_near_point(inc.interval, "end", delta), 0.0))
        near_out = dm.value(complex(_near_point(out.interval, "start", delta), 0.0))
        ang = measure_angle(inc, out, points[j], near_in, near_out)
        ideal = dm.K == -1 and not is_inf(points[j]) and abs(abs(points[j]) - 1.0) <= 1e-8
        verts.append(Vertex(points[j], ang, expected[j], ideal, str(lab)))
    assert len(verts) == n
    return ImmersedCircularPolygon(arcs, verts, dm.K)


def arc_curvature(dm: DevelopingMap, interval, s: float = 0.5, h: float = 1e-3) -> float:
    """Geodesic curvature of the boundary image at an interior parameter of the interval.

    The curve is parametrized by the boundary coordinate, so the left normal
    of the trace points into the image of the half-plane.
    """
    x0 = float(interval_points(interval, s))
    scale = max(1.0, abs(x0)) if math.isinf(interval[0]) or math.isinf(interval[1]) else min(1.0, interval[1] - interval[0])
    curve = lambda t: dm.value(complex(x0 + scale * t, 0.0))
    return geodesic_curvature(curve, dm.K, 0.0, h=h, tol=1e-6) if dm.K == 1 else geodesic_curvature(curve, dm.K, 0.0, h=h)


def fitted_constant(dm: DevelopingMap, interval, n: int = 9) -> tuple:
    """Boundary constant c from dv/dt = c e^{v/2} on interior points of an interval: (mean, spread)."""
    xs = interval_points(interval, np.linspace(0.3, 0.7, n))
    cs = []
    for x in xs:
        h = 1e-3 * max(1.0, abs(x)) if math.isinf(interval[0]) or math.isinf(interval[1]) else 1e-3 * min(1.0, interval[1] - interval[0])
        f = lambda z: np.array([dm.log_density(complex(w)) for w in np.atleast_1d(z)])
        vt = float(normal_derivative(f, np.array([x]), h)[0])
        v = float(dm.log_density(complex(x, 0.0)))
        cs.append(vt * math.exp(-0.5 * v))
    cs = np.array(cs)
    return float(np.mean(cs)), float(np.max(np.abs(cs - np.mean(cs))))


def polygon_from_spec(spec: PolygonalMetricSpec, measure: bool = True) -> tuple:
    """(polygon, developing map) for a valid polygonal metric spec."""
    sv = validate_spec(spec.schwarzian)
    if not sv.valid:
        raise DomainError(f"inadmissible spec: {sv.reason}")
    dm = NumericMap(spec=spec.schwarzian, K=1, psi=spec.gauge)
    poles = spec.schwarzian.pole_list()
    alpha_inf = spec.schwarzian.alpha_inf if not spec.schwarzian.is_global else spec.schwarzian.global_c.real
    try:
        poly = polygon_from_map(dm, [p.q for p in poles], [p.alpha for p in poles], alpha_inf)
    except (ArithmeticError, ValueError) as exc:
        raise VertexLimitNonconvergent(str(exc)) from exc
    if measure:
        for arc in poly.arcs:
            c, _ = fitted_constant(dm, arc.interval)
            poly.constants.append(c)
            poly.curvatures.append(arc_curvature(dm, arc.interval))
    return poly, dm


# --------------------------------------------------------------------------
# Alexandrov embeddedness: necessary conditions and the embedded case


@dataclass(frozen=True)
class Certificate:
    local_diffeo: bool
    boundary_regular: bool
    embedded_trace: bool
    winding: int | None
    full: bool
    flags: tuple = ()
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "local_diffeo": self.local_diffeo,
            "boundary_regular": self.boundary_regular,
            "embedded_trace": self.embedded_trace,
            "winding": self.winding,
            "full": self.full,
            "partial": not self.full,
            "flags": list(self.flags),
            "details": self.details,
        }


def _interior_samples(singular):
    r = np.geomspace(1e-2, 1e2, 9)
    th = np.linspace(0.1, math.pi - 0.1, 9)
    pts = [1j] + list((r[:, None] * np.exp(1j * th[None, :])).ravel())
    for q in singular:
        pts += [q + 0.05j, q + 0.2 * np.exp(0.25j * math.pi), q + 0.2 * np.exp(0.75j * math.pi)]
    return pts


def _segments_cross(p1, p2, p3, p4) -> bool:
    def orient(a, b, c):
        return ((b - a).conjugate() * (c - a)).imag

    d1, d2 = orient(p3, p4, p1), orient(p3, p4, p2)
    d3, d4 = orient(p1, p2, p3), orient(p1, p2, p4)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


def _winding(poly_pts, z0) -> int:
    ang = np.angle(np.asarray(poly_pts) - z0)
    d = np.diff(np.concatenate([ang, ang[:1]]))
    d = (d + math.pi) % (2 * math.pi) - math.pi
    return int(round(float(np.sum(d)) / (2 * math.pi)))


def alexandrov_partial_check(dm: DevelopingMap, poly: ImmersedCircularPolygon, singular: list,
                             n_boundary: int = 200, crit_tol: float = 1e-10) -> Certificate:
    """Partial certificate of Alexandrov embeddedness.

    Conditions (a) |g'| > 0 at interior samples and (b) regular boundary
    arcs are necessary.  When additionally the boundary trace is embedded,
    a winding number of +1 about interior images upgrades to a full
    certificate.
    """
    flags = []
    details = {}
    # (a) local diffeomorphism on interior samples
    pts = _interior_samples(singular)
    worst = math.inf
    for z in pts:
        j, _ = dm.sphere_jet(complex(z))
        scale = 1.0 + abs(complex(j.f0))
        worst = min(worst, abs(complex(j.f1)) / scale)
    local = worst > crit_tol
    details["min_derivative"] = worst
    if not local:
        flags.append("CriticalPoint")
    # (b) boundary regularity: g' != 0 inside each interval and arcs fit their circles
    reg = True
    for arc in poly.arcs:
        xs = interval_points(arc.interval, np.linspace(0.05, 0.95, 12))
        for x in xs:
            j, _ = dm.sphere_jet(complex(x, 0.0))
            if abs(complex(j.f1)) <= crit_tol * (1.0 + abs(complex(j.f0))):
                reg = False
        if arc.fit_residual > FIT_TOL:
            reg = False
    if not reg:
        flags.append("IrregularBoundary")
    # (c) embeddedness of the trace and winding about interior images
    arcs = poly.arcs
    embedded = True
    verts = [v.point for v in poly.vertices]
    for i in range(len(arcs)):
        for k in range(i + 1, len(arcs)):
            res = classify_intersection(arcs[i].circle, arcs[k].circle)
            if res.tag == "Equal":
                # arcs of one circle overlap iff a midpoint of one lies on the other
                if arcs[i].contains(arcs[k].mid) or arcs[k].contains(arcs[i].mid):
                    embedded = False
                continue
            for X in res.points:
                if any(_same_point(X, v, 1e-7) for v in verts):
                    continue
                if arcs[i].contains(X) and arcs[k].contains(X):
                    embedded = False
    winding = None
    if embedded:
        # chart with infinity just outside the first arc, opposite the interior
        arc = arcs[0]
        x = float(interval_points(arc.interval, 0.5))
        inside = dm.value(complex(x, 1e-2))
        outside = _reflect(arc.circle, inside)
        T = Mobius(0, 1, 1, -outside)
        rows = poly.polyline(dm, n_boundary)
        trace = [complex(_apply(T, z)) for _, _, z in rows]
        probes = [complex(_apply(T, dm.value(z))) for z in (1j, 2 + 1j, -2 + 1j, 0.3j)]
        ws = sorted({_winding(trace, p) for p in probes})
        winding = ws[0] if len(ws) == 1 else None
        details["winding_samples"] = ws
    else:
        flags.append("SelfIntersecting")
    full = bool(local and reg and embedded and winding == 1)
    return Certificate(bool(local), bool(reg), bool(embedded), winding, full, tuple(flags), details)


def _reflect(c: GeneralizedCircle, z):
    """Inversion of z in the generalized circle c."""
    z = complex(z)
    if c.is_line:
        # reflect across the line A=0: 2 Re(conj(B) z) + D = 0
        B = c.B
        return z - (2 * (B.conjugate() * z).real + c.D) / (2 * abs(B) ** 2) * 2 * B
    ctr, r = c.center, c.radius
    w = z - ctr
    return ctr + r * r / w.conjugate()


# --------------------------------------------------------------------------
# accessory parameter for two poles


@dataclass(frozen=True)
class AccessoryFit:
    beta: float  # beta_1; beta_2 = -beta_1
    residual: float
    alpha_inf: float
    spec: SchwarzianSpec

    def to_dict(self) -> dict:
        return {"beta1": self.beta, "beta2": -self.beta, "residual": self.residual,
                "alpha_inf": self.alpha_inf, "spec": self.spec.to_dict()}


def alpha_at_infinity(q1, q2, alpha1, alpha2, beta) -> float:
    return alpha1 + alpha2 + (q1 - q2) * beta


def fit_accessory(q1: float, q2: float, alpha1: float, alpha2: float, target_alpha_inf: float | None = None,
                  objective=None, xtol: float = 1e-10, max_expand: int = 60) -> AccessoryFit:
    """Solve for beta_1 = -beta_2 making a scalar closure objective vanish.

    The default objective is alpha_inf(beta) - target.  The admissible set is
    alpha_inf(beta) <= 1/2, a half-line in beta; the bracket starts at its
    end and is doubled outward until the objective changes sign.
    """
    if alpha1 > 0.5 or alpha2 > 0.5:
        raise DomainError("pole coefficients must be <= 1/2")
    if q1 == q2:
        raise DomainError("poles must be distinct")
    if q1 > q2:
        q1, q2, alpha1, alpha2 = q2, q1, alpha2, alpha1
    if objective is None:
        if target_alpha_inf is None:
            raise DomainError("give a target alpha_inf or an objective")
        objective = lambda b: alpha_at_infinity(q1, q2, alpha1, alpha2, b) - target_alpha_inf
    # alpha_inf(beta) <= 1/2  <=>  beta >= b0 since q1 - q2 < 0
    b0 = (0.5 - alpha1 - alpha2) / (q1 - q2)
    fa = objective(b0)
    if fa == 0.0:
        beta = b0
    else:
        width = 1.0
        for _ in range(max_expand):
            fb = objective(b0 + width)
            if fa * fb <= 0:
                break
            width *= 2.0
        else:
            raise NoBracket("closure objective keeps one sign on the admissible beta half-line")
        beta = brentq(objective, b0, b0 + width, xtol=xtol, rtol=4 * np.finfo(float).eps)
    spec = SchwarzianSpec.from_poles([(q1, alpha1, beta), (q2, alpha2, -beta)])
    beta = float(beta) + 0.0
    return AccessoryFit(beta, float(abs(objective(beta))), spec.alpha_inf, spec)


def alpha_inf_from_inversion(spec: SchwarzianSpec) -> float:
    """alpha at infinity read off from the pulled-back potential."""
    return float(inversion_transform(spec).limit.real)
