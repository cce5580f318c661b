"""Independent numerical checks of a candidate log-density v.

Nothing here constructs solutions: fields are sampled and differentiated
numerically, and areas are integrated with singularity-aware quadrature.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad

from . import asymptotics
from .canonical import CanonicalParams, boundary_constants, evaluate_density
from .developing import (
    DevelopingMap,
    LogForm,
    NumericMap,
    PowerForm,
    SpiralForm,
    check_range,
)
from .errors import DomainError, GridTooCoarse, MarginViolation, RangeViolation
from .moebius import Mobius

# --------------------------------------------------------------------------
# fields


@dataclass(frozen=True)
class MetricField:
    """A log-density z -> v(z) on the upper half-plane with its curvature."""

    logdens: Callable
    K: int
    singular: tuple = (0.0,)
    dev: DevelopingMap | None = None
    label: str = ""

    def v(self, z):
        return self.logdens(z)

    def ev(self, z):
        return np.exp(self.logdens(z))

    def distance_to_singular(self, z):
        z = np.asarray(z, dtype=complex)
        if not self.singular:
            return np.full(z.shape, np.inf)
        return np.min(np.abs(z[..., None] - np.array(self.singular, dtype=complex)), axis=-1)


def metric_from_dev(dm: DevelopingMap, K: int | None = None, label: str = "") -> MetricField:
    """Field v = log(4|g'|^2/(1 + K|g|^2)^2) of a developing map."""
    if K is None:
        K = dm.K
    if K != dm.K:
        raise DomainError(f"curvature {K} does not match the map's tag {dm.K}")
    check_range(dm)
    if isinstance(dm, NumericMap):
        sing = tuple(p.q for p in dm.spec.pole_list())
    else:
        sing = (0.0,)
    return MetricField(dm.log_density, K, sing, dm, label or type(dm).__name__)


def field_from_params(p: CanonicalParams) -> MetricField:
    return MetricField(lambda z: evaluate_density(p, z), p.K, (0.0,), None, f"{p.family} K={p.K}")


# --------------------------------------------------------------------------
# verdicts and reports


@dataclass(frozen=True)
class Verdict:
    name: str
    value: float
    tol: float
    passed: bool


def _verdict(name, value, tol) -> Verdict:
    value = float(value)
    return Verdict(name, value, float(tol), bool(value <= tol))


@dataclass
class ResidualReport:
    """Collected diagnostics; every verdict carries its tolerance."""

    label: str = ""
    data: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)

    def add(self, name, value, tol) -> Verdict:
        v = _verdict(name, value, tol)
        self.verdicts.append(v)
        return v

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "data": _jsonable(self.data),
            "verdicts": [asdict(v) for v in self.verdicts],
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if hasattr(x, "to_dict"):
        return _jsonable(x.to_dict())
    if hasattr(x, "__dataclass_fields__"):
        return _jsonable(asdict(x))
    return x


# --------------------------------------------------------------------------
# PDE residual


@dataclass(frozen=True)
class GridSpec:
    x0: float = -2.0
    x1: float = 2.0
    y0: float = 0.1
    y1: float = 4.0
    nx: int = 50
    ny: int = 50

    def points(self) -> np.ndarray:
        x = np.linspace(self.x0, self.x1, self.nx)
        y = np.linspace(self.y0, self.y1, self.ny)
        return (x[:, None] + 1j * y[None, :]).ravel()


@dataclass(frozen=True)
class PDEResidual:
    max: float
    mean: float
    disagreement: float
    n_points: int


def _laplacian(f, z, h):
    return (f(z + h) + f(z - h) + f(z + 1j * h) + f(z - 1j * h) - 4.0 * f(z)) / (h * h)


def liouville_residual(fld: MetricField, grid: GridSpec | None = None, h: float = 1e-2,
                       coarse_limit: float = 1e-2) -> PDEResidual:
    """|Lap v + 2K e^v| / (1 + 2 e^v) with a twice Richardson-extrapolated 5-point Laplacian.

    The step shrinks near the boundary and near singular points.  The gap
    between the two first-level extrapolants serves as the error gauge.
    """
    grid = GridSpec() if grid is None else grid
    z = grid.points()
    d = fld.distance_to_singular(z)
    if np.any(z.imag <= 0):
        raise DomainError("grid must be interior")
    hz = np.minimum(np.minimum(h, 0.25 * z.imag), 0.02 * d)
    f = fld.logdens
    L1, L2, L3 = (_laplacian(f, z, hz / m) for m in (1.0, 2.0, 4.0))
    R1 = (4.0 * L2 - L1) / 3.0
    R2 = (4.0 * L3 - L2) / 3.0
    lap = (16.0 * R2 - R1) / 15.0
    ev = np.exp(f(z))
    norm = 1.0 + 2.0 * ev
    r = np.abs(lap + 2.0 * fld.K * ev) / norm
    dis = np.abs(R2 - R1) / norm
    if float(np.max(dis)) > coarse_limit:
        raise GridTooCoarse(f"Richardson disagreement {np.max(dis):.3e} exceeds {coarse_limit:g}")
    return PDEResidual(float(np.max(r)), float(np.mean(r)), float(np.max(dis)), int(z.size))


def schwarzian_estimate(fld: MetricField, z, h: float = 1e-3):
    """v_zz - v_z^2/2 from central differences (Richardson in h)."""
    f = fld.logdens
    z = np.asarray(z, dtype=complex)

    def once(h):
        vx = (f(z + h) - f(z - h)) / (2 * h)
        vy = (f(z + 1j * h) - f(z - 1j * h)) / (2 * h)
        vxx = (f(z + h) - 2 * f(z) + f(z - h)) / h ** 2
        vyy = (f(z + 1j * h) - 2 * f(z) + f(z - 1j * h)) / h ** 2
        vxy = (f(z + h + 1j * h) - f(z + h - 1j * h) - f(z - h + 1j * h) + f(z - h - 1j * h)) / (4 * h * h)
        vz = 0.5 * (vx - 1j * vy)
        vzz = 0.25 * (vxx - 2j * vxy - vyy)
        return vzz - 0.5 * vz * vz

    return (4.0 * once(h / 2) - once(h)) / 3.0


# --------------------------------------------------------------------------
# Neumann data


@dataclass(frozen=True)
class NeumannFit:
    fitted_c: float
    spread: float  # max |c(s) - fitted_c|
    residual: float  # max |v_t - c e^{v/2}| / (1 + e^{v/2}) against the reference constant
    reference_c: float
    n_points: int


_STENCIL = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0


def normal_derivative(f, s, h):
    """Fourth-order one-sided dv/dt at real points s, stepping into Im z > 0."""
    s = np.asarray(s, dtype=float)
    out = 0.0
    for k, w in enumerate(_STENCIL):
        out = out + w * f(s + 1j * k * h)
    return out / h


def side_points(side, n: int = 50, r_min: float = 0.1, r_max: float = 10.0):
    """Sample points of (0, inf) for side 1 and (-inf, 0) for side 2, or an explicit interval."""
    if side in (1, "c1", "right"):
        return np.geomspace(r_min, r_max, n)
    if side in (2, "c2", "left"):
        return -np.geomspace(r_min, r_max, n)
    a, b = side
    return np.linspace(a, b, n + 2)[1:-1]


def neumann_residual(fld: MetricField, side, expected_c: float | None = None, n: int = 50,
                     margin: float = 1e-6, r_min: float = 0.1, r_max: float = 10.0) -> NeumannFit:
    """Fit c in dv/dt = c e^{v/2} along one boundary side."""
    s = side_points(side, n, r_min, r_max)
    d = fld.distance_to_singular(s.astype(complex))
    if np.any(d < margin):
        raise MarginViolation("boundary samples too close to a singular point")
    h = np.minimum(1e-3 * d, 1e-3)
    # one Richardson step cancels the h^4 term of the stencil
    vt = (16.0 * normal_derivative(fld.logdens, s, h / 2) - normal_derivative(fld.logdens, s, h)) / 15.0
    v = fld.logdens(s.astype(complex))
    cs = vt * np.exp(-0.5 * v)
    fitted = float(np.mean(cs))
    ref = fitted if expected_c is None else float(expected_c)
    res = np.abs(vt - ref * np.exp(0.5 * v)) / (1.0 + np.exp(0.5 * v))
    return NeumannFit(fitted, float(np.max(np.abs(cs - fitted))), float(np.max(res)), ref, int(s.size))


# --------------------------------------------------------------------------
# lengths and areas


def semicircle_length(fld: MetricField, r: float, epsrel: float = 1e-10) -> float:
    """r * integral_0^pi e^{v(r e^{i theta})/2} d theta."""
    f = lambda th: math.exp(0.5 * float(np.real(fld.logdens(r * complex(math.cos(th), math.sin(th))))))
    val, _ = quad(f, 0.0, math.pi, epsrel=epsrel, epsabs=0.0, limit=200)
    return r * val


@dataclass(frozen=True)
class AreaResult:
    value: float
    error: float
    divergent: bool
    verdict: str  # "converged", "slow-convergence, extrapolated", "DivergenceDetected", "slow-divergence"
    growth_exponent: float = float("nan")
    details: dict = field(default_factory=dict)


_FLOOR = 1e-200  # deepest ring radius
_MIN_DEPTH = 1e-10  # rings always reach this radius


def _gl(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _ring_integral(logf, center, r_in, r_out, theta_lims, nr, nt):
    """Integral of exp(logf) over {center + rho e^{i theta}} using GL in (log rho, theta).

    ``theta_lims(rho)`` returns arrays (lo, hi) of angular limits per radius.
    """
    xr, wr = _gl(nr)
    xt, wt = _gl(nt)
    a, b = math.log(r_in), math.log(r_out)
    lr = 0.5 * (b - a) * xr + 0.5 * (a + b)
    rho = np.exp(lr)
    lo, hi = theta_lims(rho)
    th = 0.5 * (hi - lo)[:, None] * xt[None, :] + 0.5 * (hi + lo)[:, None]
    z = center + rho[:, None] * np.exp(1j * th)
    vals = np.exp(logf(z) + 2.0 * lr[:, None])
    inner = np.sum(vals * wt[None, :], axis=1) * 0.5 * (hi - lo)
    return float(0.5 * (b - a) * np.sum(inner * wr))


def _tail_analysis(sums, log_radii):
    """Classify the sequence of dyadic ring sums toward a singular point.

    Two tail models compete on the last rings: geometric decay S_k ~ q^k
    (cones) and power decay S_k ~ |ln rho_k|^-p (logarithmic types).  The
    better least-squares fit decides the verdict and the tail estimate.
    Returns (verdict, tail, exponent) where exponent is log q or -p.
    """
    S = np.asarray(sums, dtype=float)
    m = min(len(S), 14)
    last = S[-m:]
    if np.all(np.abs(last) <= 1e-300):
        return "converged", 0.0, float("nan")
    if np.any(last <= 0):
        return "converged", float(np.sum(np.abs(last[-2:]))), float("nan")
    y = np.log(last)
    k = np.arange(m, dtype=float)
    ell = np.log(np.abs(np.asarray(log_radii[-m:], dtype=float)))
    cg, rg, *_ = np.polyfit(k, y, 1, full=True)
    cp, rp, *_ = np.polyfit(ell, y, 1, full=True)
    res_g = float(rg[0]) if len(rg) else 0.0
    res_p = float(rp[0]) if len(rp) else 0.0
    logq, p = float(cg[0]), -float(cp[0])
    if res_g <= res_p:
        if logq < -1e-3:
            q = math.exp(logq)
            return "converged", float(last[-1] * q / (1.0 - q)), logq
        return ("slow-divergence" if logq < 0 else "DivergenceDetected"), math.inf, logq
    if p > 1.5:
        tail = last[-1] * math.exp(ell[-1]) / (math.log(2.0) * (p - 1.0))
        return "slow-convergence, extrapolated", float(tail), -p
    return ("slow-divergence" if p > 0.5 else "DivergenceDetected"), math.inf, -p


def _split_radius(radii):
    cands = [1.0, 0.8, 1.25, 0.6, 1.6, 0.5, 2.0]
    best = max(cands, key=lambda c: min((abs(math.log(c / r)) for r in radii if r > 0), default=math.inf))
    return best


def _chart_area(f, R, centers, nr, nt):
    """Area of {|z| < R, Im z > 0} for integrand f with singular boundary points.

    The origin always gets dyadic rings; other real points in ``centers``
    get small half-disks (with dyadic rings) that are cut out of the
    polar integration about the origin.
    """
    others = sorted(c for c in centers if c != 0 and abs(c) < R)
    pts = [0.0] + others + [R, -R]
    holes = []
    for c in others:
        gap = min(abs(c - p) for p in pts if p != c)
        holes.append((c, 0.4 * gap))

    tails, verdicts, exps = [], [], []
    total = 0.0

    def rings(center, rmax):
        sums, mids = [], []
        full = lambda rho: (np.zeros_like(rho), np.full_like(rho, math.pi))
        r_out = rmax
        while r_out > _FLOOR:
            r_in = r_out / 2.0
            try:
                ring = _ring_integral(f, center, r_in, r_out, full, nr, nt)
            except RangeViolation:
                # the density left double range (|g| numerically on the ideal boundary)
                if r_out > _MIN_DEPTH:
                    raise
                break
            sums.append(ring)
            mids.append(0.5 * (math.log(r_in) + math.log(r_out)))
            r_out = r_in
            if not math.isfinite(ring):
                return math.inf, math.inf, "DivergenceDetected", math.inf
            if r_out < _MIN_DEPTH and len(sums) > 8:
                tot = abs(float(np.sum(sums)))
                recent = sums[-4:]
                if max(recent) <= 1e-17 * tot and all(b <= a for a, b in zip(recent, recent[1:])):
                    break
                if len(sums) >= 40 and min(sums[-20:]) > 0:
                    ell = np.log(-np.asarray(mids[-20:]))
                    if -np.polyfit(ell, np.log(sums[-20:]), 1)[0] < 0.5:
                        break  # not decaying: divergence is already evident
        verdict, tail, ex = _tail_analysis(sums, mids)
        return float(np.sum(sums)), tail, verdict, ex

    # near the origin: plain rings up to the first break radius
    breaks = sorted({abs(c) - d for c, d in holes} | {abs(c) + d for c, d in holes} | {R})
    r0 = min(breaks[0], R)
    s, tail, verdict, ex = rings(0.0, r0)
    total += s
    tails.append(tail)
    verdicts.append(verdict)
    exps.append(ex)

    def lims(rho):
        lo = np.zeros_like(rho)
        hi = np.full_like(rho, math.pi)
        for c, d in holes:
            a = abs(c)
            cosv = (rho ** 2 + a * a - d * d) / (2 * rho * a)
            inside = cosv < 1.0
            ang = np.where(inside, np.arccos(np.clip(cosv, -1.0, 1.0)), 0.0)
            if c > 0:
                lo = np.maximum(lo, ang)
            else:
                hi = np.minimum(hi, math.pi - ang)
        return lo, hi

    edges = [r0] + [b for b in breaks if b > r0]
    for a, b in zip(edges[:-1], edges[1:]):
        # panels in log radius: split wide shells so GL stays accurate
        npan = max(1, int(math.ceil(math.log(b / a) / math.log(2.0))))
        grid = np.geomspace(a, b, npan + 1)
        for u, w in zip(grid[:-1], grid[1:]):
            total += _ring_integral(f, 0.0, u, w, lims, nr, nt)
    for c, d in holes:
        s, tail, verdict, ex = rings(c, d)
        total += s
        tails.append(tail)
        verdicts.append(verdict)
        exps.append(ex)
    return total, tails, verdicts, exps


def area(fld: MetricField, domain="half-plane", tol: float = 1e-8, nr: int = 16, nt: int = 32) -> AreaResult:
    """Area of a half-disk ("half-disk", eps) or of the whole half-plane.

    The half-plane is split at a radius R into a half-disk and the exterior,
    which is pulled back to a half-disk by w = -1/z (Jacobian |w|^-4).
    """
    logdens = fld.logdens

    def f_z(z):
        return logdens(z)

    def f_w(w):
        return logdens(-1.0 / w) - 4.0 * np.log(np.abs(w))

    def run(nr, nt):
        if isinstance(domain, tuple) and domain[0] == "half-disk":
            eps = float(domain[1])
            total, tails, verdicts, exps = _chart_area(f_z, eps, [c for c in fld.singular if abs(c) < eps], nr, nt)
            return total, tails, verdicts, exps
        if domain != "half-plane":
            raise DomainError(f"unknown domain {domain!r}")
        R = _split_radius([abs(c) for c in fld.singular])
        inner = [c for c in fld.singular if abs(c) < R]
        outer = [-1.0 / c for c in fld.singular if abs(c) > R]
        t1, tl1, v1, e1 = _chart_area(f_z, R, inner, nr, nt)
        t2, tl2, v2, e2 = _chart_area(f_w, 1.0 / R, outer, nr, nt)
        return t1 + t2, tl1 + tl2, v1 + v2, e1 + e2

    with np.errstate(all="ignore"):
        total, tails, verdicts, exps = run(nr, nt)
        if any(not math.isfinite(t) for t in tails) or not math.isfinite(total):
            bad = [e for e, t in zip(exps, tails) if not math.isfinite(t)]
            worst = "DivergenceDetected" if "DivergenceDetected" in verdicts or not math.isfinite(total) else "slow-divergence"
            return AreaResult(math.inf, math.inf, True, worst, float(bad[0]) if bad else float("nan"),
                              {"ring_verdicts": verdicts, "partial": total})
        levels = [(nr, nt), (nr + 8, nt + 16), (2 * nr, 4 * nt), (3 * nr, 8 * nt), (4 * nr, 16 * nt)]
        total2, tails2 = total, tails
        for lv in levels[1:]:
            prev, prev_tails = total2, tails2
            total2, tails2, _, _ = run(*lv)
            if abs(total2 - prev) <= tol * max(1.0, abs(total2)):
                break
        total, tails = prev, prev_tails
    value = total2 + sum(tails2)
    err = abs(total2 - total) + abs(sum(tails2) - sum(tails)) + 1e-14 * abs(value)
    slow = [v for v in verdicts if v != "converged"]
    verdict = slow[0] if slow else "converged"
    if slow:
        err += 0.1 * abs(sum(tails2))
    return AreaResult(value, err, False, verdict, float("nan"), {"ring_verdicts": verdicts})


def annulus_area(fld: MetricField, r1: float, r2: float, chart: str = "z", nr: int = 24, nt: int = 48) -> float:
    """Area of {r1 < |z| < r2, Im z > 0} integrated in the z chart or the w = -1/z chart."""
    full = lambda rho: (np.zeros_like(rho), np.full_like(rho, math.pi))
    if chart == "z":
        f = fld.logdens
        grid = np.geomspace(r1, r2, 5)
    else:
        f = lambda w: fld.logdens(-1.0 / w) - 4.0 * np.log(np.abs(w))
        grid = np.geomspace(1.0 / r2, 1.0 / r1, 5)
    return sum(_ring_integral(f, 0.0, a, b, full, nr, nt) for a, b in zip(grid[:-1], grid[1:]))


# --------------------------------------------------------------------------
# finite area at the origin: the analytic decision table


@dataclass(frozen=True)
class Finiteness:
    finite: bool
    reason: str
    log_two: bool = False  # finite with |z|^-2 (ln|z|)^-2 behavior


def finiteness_at_origin(case: str, psi: Mobius, F_order: int | None, K: int, gamma: float = 0.0,
                         tol: float = 1e-12) -> Finiteness:
    """Finite-area verdict near 0 for g = psi(z^gamma F) (case 'i') or psi(F + log z) (case 'ii').

    ``F_order`` is the order of F at 0: >= 0 for a finite value, < 0 for a pole.
    """
    A, B, C, D = psi.a, psi.b, psi.c, psi.d
    m_inf = abs(C) ** 2 + K * abs(A) ** 2
    if case == "iii":
        return Finiteness(False, "spiral case: semicircle lengths stay bounded below")
    if F_order is None:
        F_order = 0
    pole = F_order < 0
    if case == "i":
        if not pole and gamma == 0 and F_order == 0:
            raise DomainError("gamma = 0 with F(0) != 0 does not send the origin to a fixed point of psi")
        if not pole:
            m0 = abs(D) ** 2 + K * abs(B) ** 2
            if abs(m0) > tol:
                return Finiteness(True, "conical: |D|^2 + K|B|^2 != 0")
            return Finiteness(False, f"|D|^2 + K|B|^2 = 0 with K = {K}: e^v is not integrable at 0")
        if abs(m_inf) > tol:
            return Finiteness(True, "conical: F has a pole and |C|^2 + K|A|^2 != 0")
        return Finiteness(False, f"F has a pole and |C|^2 + K|A|^2 = 0 with K = {K}")
    if case != "ii":
        raise DomainError(f"unknown case {case!r}")
    if abs(m_inf) > tol:
        return Finiteness(True, "|C|^2 + K|A|^2 != 0")
    if K == 0:
        return Finiteness(False, "K = 0 and C = 0: e^v ~ 4/|z|^2")
    if pole:
        return Finiteness(False, "K = -1, |A| = |C| and F has a pole")
    delta = -A * B.conjugate() + C * D.conjugate()
    if abs(delta.real) > tol:
        return Finiteness(True, "K = -1, |A| = |C|, Re(delta) != 0: e^v ~ |z|^-2 (ln|z|)^-2", True)
    return Finiteness(False, "K = -1, |A| = |C|, Re(delta) = 0: boundary arcs are horocycles")


def finiteness_of_map(dm: DevelopingMap) -> Finiteness:
    if isinstance(dm, SpiralForm):
        return finiteness_at_origin("iii", dm.psi, 0, dm.K)
    if isinstance(dm, PowerForm):
        red = dm.reduced()
        return finiteness_at_origin("i", red.psi, red.F.order_at_zero, red.K, red.gamma)
    if isinstance(dm, LogForm):
        order = dm.F.order_at_zero
        return finiteness_at_origin("ii", dm.psi, 0 if order is None else order, dm.K)
    raise DomainError("finiteness table covers closed-form maps only")


# --------------------------------------------------------------------------
# asymptotic classification of a field


@dataclass(frozen=True)
class AsymptoticFit:
    slope: float  # d log e^v / d log r along the ray
    log_exponent: float  # p in |z|^2 e^v ~ |ln r|^p
    tag: str  # Conical, LogFour, LogTwo or NonIntegrable
    alpha: float | None


def fit_asymptotics(fld: MetricField, r_min: float = 1e-150, r_max: float = 1e-30, n: int = 41) -> AsymptoticFit:
    """Conical versus logarithmic behavior of e^v along a ray into 0.

    Two models compete: v = a + 2 alpha log r, and
    v = a - 2 log r + p log|log r|.  The smaller residual wins.
    """
    r = np.geomspace(r_min, r_max, n)
    z = r * np.exp(1j * asymptotics.DEFAULT_ANGLE)
    v = np.full(n, np.nan)
    with np.errstate(all="ignore"):
        for k, zk in enumerate(z):
            try:
                v[k] = float(fld.logdens(zk))
            except (RangeViolation, ArithmeticError):
                pass
    ok = np.isfinite(v)
    if ok.sum() < 8:
        if r_min < 1e-8:
            return fit_asymptotics(fld, 1e-8, 1e-4, n)
        raise DomainError("log-density is not evaluable along the probe ray")
    r, v = r[ok], v[ok]
    lr = np.log(r)
    cone, res_c, *_ = np.polyfit(lr, v, 1, full=True)
    logm, res_l, *_ = np.polyfit(np.log(np.abs(lr)), v + 2.0 * lr, 1, full=True)
    slope, p = float(cone[0]), float(logm[0])
    rc = float(res_c[0]) if len(res_c) else 0.0
    rl = float(res_l[0]) if len(res_l) else 0.0
    if rc <= rl and slope > -2.0 + 1e-3:
        return AsymptoticFit(slope, p, "Conical", slope / 2.0)
    if p < -3.0:
        tag = "LogFour"
    elif p < -1.0:
        tag = "LogTwo"
    else:
        tag = "NonIntegrable"
    return AsymptoticFit(slope, p, tag, None)


# --------------------------------------------------------------------------
# consolidated verification of a canonical parameter set


def verify_canonical(p: CanonicalParams, pde_tol: float = 1e-5, neumann_tol: float = 1e-6,
                     area_tol: float = 1e-5, grid: GridSpec | None = None) -> ResidualReport:
    from .canonical import classify_asymptotics, closed_form_developing_map, validate_params
    from .developing import boundary_circles

    rep = ResidualReport(label=f"canonical {p.family} K={p.K}")
    rep.data["params"] = p.to_dict()
    val = validate_params(p)
    rep.data["validation"] = {"valid": val.valid, "reason": val.reason, "analytic": val.analytic, "scan": val.scan}
    if not val.valid:
        rep.add("validity", 1.0, 0.0)
        return rep
    fld = field_from_params(p)
    bc = boundary_constants(p)
    rep.data["boundary_constants"] = {"c1": bc.c1, "c2": bc.c2}
    pde = liouville_residual(fld, grid)
    rep.data["liouville"] = asdict(pde)
    rep.add("liouville_max", pde.max, pde_tol)
    for name, side, c in (("c1", 1, bc.c1), ("c2", 2, bc.c2)):
        fit = neumann_residual(fld, side, c)
        rep.data[f"neumann_{name}"] = asdict(fit)
        rep.add(f"neumann_{name}_constant", abs(fit.fitted_c - c), neumann_tol)
        rep.add(f"neumann_{name}_residual", fit.residual, neumann_tol)
    ar = area(fld)
    rep.data["area"] = {"value": ar.value, "error": ar.error, "divergent": ar.divergent, "verdict": ar.verdict}
    rep.add("area_finite", 0.0 if not ar.divergent else 1.0, 0.0)
    if not ar.divergent:
        rep.add("area_relative_error", ar.error / abs(ar.value), area_tol)
    radii = [10.0 ** -k for k in range(1, 7)]
    lengths = [semicircle_length(fld, r) for r in radii]
    rep.data["semicircle_lengths"] = {"r": radii, "L": lengths}
    ac = classify_asymptotics(p)
    rep.data["asymptotics"] = asdict(ac)
    dm = closed_form_developing_map(p)
    fits = {}
    for name, iv in (("positive", (0.0, math.inf)), ("negative", (-math.inf, 0.0))):
        bf = boundary_circles(dm, iv)
        fits[name] = {"circle": bf.circle.to_dict(), "residual": bf.residual}
        rep.add(f"circle_fit_{name}", bf.residual, 1e-8)
    rep.data["circle_fits"] = fits
    return rep


def field_csv(fld: MetricField, grid: GridSpec | None = None) -> str:
    """Grid samples as CSV with columns s, t, v, ev."""
    grid = GridSpec() if grid is None else grid
    z = grid.points()
    v = np.asarray(fld.logdens(z), dtype=float)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["s", "t", "v", "ev"])
    for zz, vv in zip(z, v):
        w.writerow([repr(float(zz.real)), repr(float(zz.imag)), repr(float(vv)), repr(float(math.exp(vv)))])
    return buf.getvalue()


def boundary_csv(fld: MetricField, n: int = 50) -> str:
    """Boundary trace samples (t = 0) on both sides, columns s, t, v, ev."""
    s = np.concatenate([-np.geomspace(10.0, 0.1, n), np.geomspace(0.1, 10.0, n)])
    v = np.asarray(fld.logdens(s.astype(complex)), dtype=float)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["s", "t", "v", "ev"])
    for ss, vv in zip(s, v):
        w.writerow([repr(float(ss)), repr(0.0), repr(float(vv)), repr(float(math.exp(vv)))])
    return buf.getvalue()


# --------------------------------------------------------------------------
# a catalog of local maps exercising every branch of the decision table


@dataclass(frozen=True)
class TableInstance:
    name: str
    dm: DevelopingMap
    case: str
    epsilon: float = 0.1  # the half-disk on which the map is a valid developing map


def _tilted(phi: float, a: complex = 0.0) -> Mobius:
    """u -> (e^{i phi}(u - a) + 1)/(e^{i phi}(u - a) - 1); |A| = |C| and Re(delta) = -cos(phi)."""
    e = complex(math.cos(phi), math.sin(phi))
    return Mobius(e, 1.0 - e * a, e, -1.0 - e * a)


def decision_table_instances() -> list:
    """Closed-form maps near 0, each valid on the half-disk of radius 0.1."""
    from .developing import REAL_ON_REAL, SymmetricFactor

    one = SymmetricFactor.constant(1.0)
    inv_z = SymmetricFactor.monomial(-1)
    cayley = Mobius(1, -1, 1, 1)  # (h - 1)/(h + 1)
    half = Mobius(0.5, 0, 0, 1)
    recip = Mobius(0, 1, 1, 0)

    def P(name, K, gamma, F, psi=None):
        return TableInstance(name, PowerForm(K=K, psi=psi or Mobius.identity(), gamma=gamma, F=F), "i")

    def L(name, K, F, psi=None):
        return TableInstance(name, LogForm(K=K, psi=psi or Mobius.identity(), F=F), "ii")

    F = lambda *c, low=0: SymmetricFactor(tuple(c), low, REAL_ON_REAL)
    out = [
        # case i, F finite at 0
        P("sphere cone 1/2", 1, 0.5, one),
        P("sphere cone 0.7, F = 1 + z", 1, 0.7, F(1.0, 1.0)),
        P("sphere gamma 0, F = z^2", 1, 0.0, SymmetricFactor.monomial(2)),
        P("sphere cone rotated", 1, 0.3, one, Mobius(1, 2, -2, 1)),
        P("plane cone 1/2", 0, 0.5, one),
        P("plane cone, psi = 1/(h + i)", 0, 0.6, one, Mobius(0, 1, 1, 1j)),
        P("plane D = 0", 0, 0.5, one, Mobius(0, 1, -1, 0)),
        P("plane D = 0, F = 2 + z", 0, 0.3, F(2.0, 1.0), Mobius(0, 1, -1, 0)),
        P("disk cone 1/2", -1, 0.5, one, half),
        P("disk gamma 0, F = z", -1, 0.0, SymmetricFactor.monomial(1), half),
        P("disk Cayley 0.4", -1, 0.4, one, cayley),
        P("disk Cayley 0.25", -1, 0.25, one, cayley),
        P("disk Cayley 0.45, F = 1 + z", -1, 0.45, F(1.0, 1.0), cayley),
        # case i, F with a pole at 0
        P("sphere pole", 1, 0.3, inv_z),
        P("plane pole, C = 0", 0, 0.4, inv_z),
        P("plane pole, psi = 1/(h - i)", 0, 0.4, inv_z, Mobius(0, 1, 1, -1j)),
        P("disk pole, 1/(2h)", -1, 0.3, inv_z, Mobius(0, 0.5, 1, 0)),
        P("disk pole Cayley 0.7", -1, 0.7, inv_z, cayley),
        P("disk pole Cayley 0.8", -1, 0.8, inv_z, cayley),
        # case ii, F finite at 0
        L("sphere log", 1, F(0.0)),
        L("sphere log shifted", 1, F(2.0), Mobius(1, 2, 0, 1)),
        L("plane log", 0, F(0.0)),
        L("plane log, F = 3 + z", 0, F(3.0, 1.0)),
        L("plane 1/(log z - 5)", 0, F(-5.0), recip),
        L("disk 1/(2 log z)", -1, F(0.0), Mobius(0, 0.5, 1, 0)),
        L("disk horocycle", -1, F(0.0), _tilted(math.pi / 2, -1j)),
        L("disk horocycle, F = 1", -1, F(1.0), _tilted(math.pi / 2, -1j)),
        L("disk tilted pi/3", -1, F(0.0), _tilted(math.pi / 3)),
        L("disk tilted pi/4", -1, F(0.0), _tilted(math.pi / 4)),
        L("disk tilted -pi/3", -1, F(0.0), _tilted(-math.pi / 3, 2 * cmath_exp(math.pi / 3))),
        # case ii, F with a pole at 0
        L("sphere log pole", 1, inv_z),
        L("sphere log double pole", 1, SymmetricFactor.monomial(-2)),
        L("plane log pole", 0, inv_z),
        L("plane log pole, 1/(u - 10i)", 0, inv_z, Mobius(0, 1, 1, -10j)),
        L("disk log pole, 1/(2u)", -1, inv_z, Mobius(0, 0.5, 1, 0)),
        L("disk log pole, |A| = |C|", -1, inv_z, Mobius(1, -math.pi * 1j, 1, -(math.pi + 2) * 1j)),
        L("disk log pole + 1, |A| = |C|", -1, F(1.0, 1.0, low=-1), Mobius(1, -math.pi * 1j, 1, -(math.pi + 2) * 1j)),
    ]
    return out


def cmath_exp(theta: float) -> complex:
    return complex(math.cos(theta), math.sin(theta))
