"""Developing maps: closed forms and ODE-backed numeric maps.

A developing map g realizes the log-density

    v = log(4 |g'|^2 / (1 + K |g|^2)^2)

as a pullback of the space form of curvature K.  Closed forms are
psi(z^gamma F(z)), psi(F(z) + log z) and psi(z^(i gamma) F(z)) with a
finite Laurent polynomial F and a Moebius psi.  Numeric maps are ratios
y2/y1 of solutions of y'' + Q y / 2 = 0, continued from a basepoint and
matched to Frobenius series near the poles of Q and near infinity.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.integrate import solve_ivp

from .errors import (
    DegenerateFit,
    DomainError,
    PoleProximity,
    RangeViolation,
    StepUnderflow,
    SymmetryViolation,
)
from .jets import Jet3, hp_log, jexp, jlog, jpow, variable
from .moebius import INF, GeneralizedCircle, Mobius, chordal_distance, circle_through, is_inf
from .schwarzian import (
    IndicialRoots,
    SchwarzianSpec,
    eval_Q,
    indicial_roots,
    infinity_coefficients,
    local_coefficients,
    schwarzian,
    validate_spec,
)

REAL_ON_REAL = "RealOnReal"
UNIMODULAR = "Unimodular"

_rng_probe = np.random.default_rng(20240611)
_PROBE = (np.exp(_rng_probe.uniform(-2, 2, 20)) * np.exp(1j * _rng_probe.uniform(0.05, 3.09, 20)))


# --------------------------------------------------------------------------
# the factor F


@dataclass(frozen=True)
class SymmetricFactor:
    """Finite Laurent polynomial sum_{k=low}^{high} a_k z^k with a reflection symmetry."""

    coeffs: tuple
    low: int = 0
    symmetry: str = REAL_ON_REAL

    def __post_init__(self):
        c = tuple(complex(x) for x in np.atleast_1d(self.coeffs))
        object.__setattr__(self, "coeffs", c)
        if self.symmetry == REAL_ON_REAL:
            if any(abs(x.imag) > 1e-14 * max(1.0, abs(x)) for x in c):
                raise SymmetryViolation("RealOnReal factor needs real coefficients")
        elif self.symmetry == UNIMODULAR:
            vals = self._eval(_PROBE) * np.conj(self._eval(np.conj(_PROBE)))
            if np.max(np.abs(vals - 1.0)) > 1e-12:
                raise SymmetryViolation("F(z) conj(F(conj z)) != 1")
        else:
            raise DomainError(f"unknown symmetry {self.symmetry!r}")

    @classmethod
    def constant(cls, c, symmetry: str = REAL_ON_REAL) -> "SymmetricFactor":
        return cls((c,), 0, symmetry)

    @classmethod
    def monomial(cls, k: int, a=1.0, symmetry: str = REAL_ON_REAL) -> "SymmetricFactor":
        return cls((a,), k, symmetry)

    @property
    def order_at_zero(self) -> int | None:
        """Lowest exponent with a nonzero coefficient (None for F = 0)."""
        for k, a in enumerate(self.coeffs):
            if a != 0:
                return self.low + k
        return None

    @property
    def is_zero(self) -> bool:
        return self.order_at_zero is None

    def times_power(self, n: int) -> "SymmetricFactor":
        return replace(self, low=self.low + n)

    def _eval(self, x):
        x = np.asarray(x, dtype=complex)
        return npoly.polyval(x, np.array(self.coeffs)) * x ** self.low

    def jet(self, u: Jet3) -> Jet3:
        """F(u) with derivatives, for a Jet3 argument."""
        c = np.array(self.coeffs)
        ks = self.low + np.arange(len(c))
        x = u.f0
        d = []
        for order in range(4):
            fall = np.ones_like(ks, dtype=float)
            for j in range(order):
                fall = fall * (ks - j)
            terms = [a * f * x ** (k - order) for a, f, k in zip(c, fall, ks) if a != 0 and f != 0]
            d.append(sum(terms) if terms else 0.0 * x)
        return u.apply(*d)

    def to_dict(self) -> dict:
        return {"low": self.low, "coeffs": [[a.real, a.imag] for a in self.coeffs], "symmetry": self.symmetry}

    @classmethod
    def from_dict(cls, d) -> "SymmetricFactor":
        return cls(tuple(complex(*a) for a in d["coeffs"]), int(d["low"]), d["symmetry"])


# --------------------------------------------------------------------------
# chart-aware evaluation shared by every variant


def _sphere_ratio(num: Jet3, den: Jet3):
    """num/den, or -den/num where that has the smaller modulus."""
    with np.errstate(all="ignore"):
        flip = np.abs(num.f0) > np.abs(den.f0)
        if np.ndim(flip) == 0:
            return ((-den / num) if flip else (num / den)), bool(flip)
        a, b = num / den, -den / num
    return Jet3(*(np.where(flip, y, x) for x, y in zip(a, b))), flip


def _mobius_pair(m: Mobius, u: Jet3):
    """Numerator and denominator jets of m(u)."""
    return m.a * u + m.b, m.c * u + m.d


def _log_density_from(jet: Jet3, flipped, K):
    """v from a jet of g (flipped False) or of -1/g (flipped True)."""
    m2 = np.abs(jet.f0) ** 2
    den = np.where(flipped, m2 + K, 1.0 + K * m2)
    if np.any(den <= 0):
        raise RangeViolation("1 + K|g|^2 <= 0")
    with np.errstate(divide="ignore"):
        v = math.log(4.0) + 2.0 * np.log(np.abs(jet.f1)) - 2.0 * np.log(den)
    return v[()] if np.ndim(v) == 0 else v


def _unflip_value(jet: Jet3, flipped):
    if np.ndim(flipped) == 0:
        if not flipped:
            return complex(jet.f0)
        return INF if jet.f0 == 0 else -1.0 / complex(jet.f0)
    with np.errstate(all="ignore"):
        return np.where(flipped, -1.0 / jet.f0, jet.f0)


class DevelopingMap:
    """Common interface: jets, chart-aware values and the induced density."""

    K: int
    psi: Mobius

    def sphere_jet(self, z):
        """(jet, flipped): jet of g, or of -1/g when |g| > 1."""
        raise NotImplementedError

    def jet(self, z) -> Jet3:
        j, flipped = self.sphere_jet(z)
        if np.ndim(flipped) == 0 and not flipped:
            return j
        # g = -1/h
        with np.errstate(all="ignore"):
            g = (-1.0) / j
        if np.ndim(flipped) == 0:
            return g
        return Jet3(*(np.where(flipped, y, x) for x, y in zip(j, g)))

    def value(self, z):
        j, flipped = self.sphere_jet(z)
        return _unflip_value(j, flipped)

    def log_density(self, z):
        j, flipped = self.sphere_jet(z)
        return _log_density_from(j, flipped, self.K)

    def schwarzian_at(self, z):
        j, _ = self.sphere_jet(z)
        # the Schwarzian is invariant under the chart switch -1/g
        return schwarzian(j)

    def post_compose(self, m: Mobius) -> "DevelopingMap":
        return replace(self, psi=m @ self.psi)


@dataclass(frozen=True)
class _ClosedForm(DevelopingMap):
    K: int = 1
    psi: Mobius = field(default_factory=Mobius.identity)

    def inner(self, u: Jet3) -> Jet3:
        raise NotImplementedError

    def inner_log(self, w: Jet3) -> Jet3:
        raise NotImplementedError

    def _base_monodromy(self) -> Mobius:
        raise NotImplementedError

    def sphere_jet(self, z):
        z = np.asarray(z, dtype=complex)
        u = self.inner(variable(z))
        return _sphere_ratio(*_mobius_pair(self.psi, u))

    def log_chart(self, w):
        """Jet of g(e^w) computed without branch cuts in w."""
        w = np.asarray(w, dtype=complex)
        u = self.inner_log(variable(w))
        j, flipped = _sphere_ratio(*_mobius_pair(self.psi, u))
        return j, flipped

    def log_chart_value(self, w):
        return _unflip_value(*self.log_chart(w))

    def monodromy(self) -> Mobius:
        """Psi with g(e^(w + 2 pi i)) = Psi(g(e^w))."""
        return self.psi @ self._base_monodromy() @ self.psi.inverse()

    def to_dict(self) -> dict:
        d = {"variant": type(self).__name__, "K": self.K, "psi": self.psi.to_dict()}
        for name in ("gamma",):
            if hasattr(self, name):
                d[name] = getattr(self, name)
        d["F"] = self.F.to_dict()
        return d


@dataclass(frozen=True)
class PowerForm(_ClosedForm):
    """psi(z^gamma F(z)); gamma in [0, 1) in reduced form."""

    gamma: float = 1.0
    F: SymmetricFactor = field(default_factory=lambda: SymmetricFactor.constant(1.0))

    def inner(self, u):
        return jpow(u, self.gamma, halfplane=True) * self.F.jet(u)

    def inner_log(self, w):
        return jexp(w * self.gamma) * self.F.jet(jexp(w))

    def _base_monodromy(self):
        e = cmath.exp(1j * math.pi * self.gamma)
        return Mobius(e, 0, 0, 1 / e)

    def reduced(self) -> "PowerForm":
        """Same map with floor(gamma) moved into F as a power of z."""
        n = math.floor(self.gamma)
        return replace(self, gamma=self.gamma - n, F=self.F.times_power(n))


@dataclass(frozen=True)
class LogForm(_ClosedForm):
    """psi(F(z) + log z)."""

    F: SymmetricFactor = field(default_factory=lambda: SymmetricFactor.constant(0.0))

    def inner(self, u):
        return self.F.jet(u) + jlog(u, halfplane=True)

    def inner_log(self, w):
        return self.F.jet(jexp(w)) + w

    def _base_monodromy(self):
        return Mobius(1, 2j * math.pi, 0, 1)


@dataclass(frozen=True)
class SpiralForm(_ClosedForm):
    """psi(z^(i gamma) F(z)) with gamma < 0 and |F| = 1 on the real axis."""

    gamma: float = -1.0
    F: SymmetricFactor = field(default_factory=lambda: SymmetricFactor.constant(1.0, UNIMODULAR))

    def inner(self, u):
        return jpow(u, 1j * self.gamma, halfplane=True) * self.F.jet(u)

    def inner_log(self, w):
        return jexp(w * (1j * self.gamma)) * self.F.jet(jexp(w))

    def _base_monodromy(self):
        s = math.exp(-math.pi * self.gamma)
        return Mobius(s, 0, 0, 1 / s)

    @property
    def radius_ratio(self) -> float:
        """R with boundary circles of radii 1 and R (for psi = id, F = 1)."""
        return math.exp(-math.pi * self.gamma)


# --------------------------------------------------------------------------
# constructors


def _range_probe_points():
    r = np.logspace(-3, 3, 25)
    th = np.linspace(0.0, math.pi, 13)
    return (r[:, None] * np.exp(1j * th[None, :])).ravel()


def check_range(dm: DevelopingMap, points=None) -> None:
    """Raise RangeViolation unless 1 + K|g|^2 > 0 and g' != 0 on the sample."""
    if dm.K > 0:
        return
    pts = _range_probe_points() if points is None else np.asarray(points)
    j, flipped = dm.sphere_jet(pts)
    m2 = np.abs(j.f0) ** 2
    den = np.where(flipped, m2 + dm.K, 1.0 + dm.K * m2)
    bad = ~(den > 0) | (flipped & (m2 == 0) & (dm.K == 0))
    if np.any(bad):
        raise RangeViolation(f"1 + K|g|^2 <= 0 at {int(np.sum(bad))} sample points")


def construct_case(case: str, K: int = 1, gamma: float | None = None, F: SymmetricFactor | None = None,
                   psi: Mobius | None = None, check: bool = True) -> DevelopingMap:
    """Closed-form map of type 'i' (power), 'ii' (log) or 'iii' (spiral)."""
    psi = Mobius.identity() if psi is None else psi
    if case == "i":
        gamma = 0.0 if gamma is None else float(gamma)
        if not 0.0 <= gamma < 1.0:
            raise DomainError("case i needs gamma in [0, 1)")
        F = SymmetricFactor.constant(1.0) if F is None else F
        if F.symmetry != REAL_ON_REAL:
            raise SymmetryViolation("case i needs a RealOnReal factor")
        dm = PowerForm(K=K, psi=psi, gamma=gamma, F=F)
    elif case == "ii":
        F = SymmetricFactor.constant(0.0) if F is None else F
        if F.symmetry != REAL_ON_REAL:
            raise SymmetryViolation("case ii needs a RealOnReal factor")
        dm = LogForm(K=K, psi=psi, F=F)
    elif case == "iii":
        if gamma is None or not gamma < 0:
            raise DomainError("case iii needs gamma < 0")
        F = SymmetricFactor.constant(1.0, UNIMODULAR) if F is None else F
        if F.symmetry != UNIMODULAR:
            raise SymmetryViolation("case iii needs a Unimodular factor")
        dm = SpiralForm(K=K, psi=psi, gamma=float(gamma), F=F)
    else:
        raise DomainError(f"unknown case {case!r}")
    if check:
        check_range(dm)
    return dm


def solve_global(c: float, K: int = 1) -> DevelopingMap:
    """A map with Schwarzian c/z^2.

    2c = 1 gives log z; 2c < 1 gives z^gamma with gamma = sqrt(1 - 2c) > 0;
    2c > 1 gives z^(i gamma) with gamma = -sqrt(2c - 1).
    """
    c = float(c)
    if c == 0.5:
        return LogForm(K=K)
    if c < 0.5:
        return PowerForm(K=K, gamma=math.sqrt(1.0 - 2.0 * c))
    return SpiralForm(K=K, gamma=-math.sqrt(2.0 * c - 1.0))


def developing_map_from_dict(d: dict) -> DevelopingMap:
    kind = d["variant"]
    psi = Mobius.from_dict(d["psi"]) if "psi" in d else Mobius.identity()
    if kind == "NumericMap":
        return NumericMap(spec=SchwarzianSpec.from_dict(d["spec"]), basepoint=complex(*d["basepoint"]), K=d["K"], psi=psi)
    F = SymmetricFactor.from_dict(d["F"])
    cls = {"PowerForm": PowerForm, "LogForm": LogForm, "SpiralForm": SpiralForm}[kind]
    kw = {"gamma": d["gamma"]} if "gamma" in d else {}
    return cls(K=d["K"], psi=psi, F=F, **kw)


# --------------------------------------------------------------------------
# Frobenius series


def _poly_jet(coeffs, u: Jet3) -> Jet3:
    x = u.f0
    c = np.asarray(coeffs)
    d0 = npoly.polyval(x, c)
    c1 = npoly.polyder(c)
    c2 = npoly.polyder(c1)
    c3 = npoly.polyder(c2)
    return u.apply(d0, npoly.polyval(x, c1), npoly.polyval(x, c2), npoly.polyval(x, c3))


@dataclass(frozen=True)
class LocalSeries:
    """Fundamental pair of y'' + P(t) y/(2 t^2) = 0 at t = 0.

    u2 = t^l2 a2(t) (plus u1 log t when l1 = l2) and
    u1 = t^l1 a1(t) (plus k u2 log t when l2 - l1 is a positive integer).
    ``center`` is the pole position, or None for the chart w = -1/z at infinity.
    """

    center: float | None
    roots: IndicialRoots
    p: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    k: float
    log_on: str | None  # "u1", "u2" or None
    radius: float

    def local_variable(self, zj: Jet3) -> Jet3:
        if self.center is None:
            return (-1.0) / zj
        return zj - self.center

    def pair_local(self, t: Jet3):
        """(u1, u2) as jets in the local variable."""
        l1, l2 = self.roots.lambda1, self.roots.lambda2
        u1 = jpow(t, l1, halfplane=True) * _poly_jet(self.a1, t)
        u2 = jpow(t, l2, halfplane=True) * _poly_jet(self.a2, t)
        if self.log_on == "u1" and self.k != 0:
            u1 = u1 + self.k * u2 * jlog(t, halfplane=True)
        elif self.log_on == "u2":
            u2 = u2 + u1 * jlog(t, halfplane=True)
        return u1, u2

    def pair(self, z):
        """(u1, u2) as jets in z."""
        return self.pair_local(self.local_variable(variable(np.asarray(z, dtype=complex))))

    def sigma(self, z):
        u1, u2 = self.pair(z)
        return complex(u2.f0 / u1.f0)

    @property
    def vertex_sigma(self):
        """Limit of u2/u1 at the singular point."""
        return INF if self.roots.difference == 0 else 0j

    def ode_residual(self, t) -> float:
        """|u'' + P u/(2 t^2)| / |u| for both members, at a local point t."""
        tj = variable(complex(t))
        P = npoly.polyval(complex(t), self.p)
        out = 0.0
        for u in self.pair_local(tj):
            out = max(out, abs(u.f2 + 0.5 * P / complex(t) ** 2 * u.f0) / max(abs(u.f0), 1e-300))
        return out


def _frobenius_coefficients(p, roots: IndicialRoots, n_terms: int):
    l1, l2 = roots.lambda1, roots.lambda2
    N = roots.difference

    def clean(lam):
        a = np.zeros(n_terms)
        a[0] = 1.0
        for n in range(1, n_terms):
            s = 0.5 * np.dot(p[1:n + 1], a[n - 1::-1][:n])
            a[n] = -s / ((n + lam - l1) * (n + lam - l2))
        return a

    b = clean(l2)
    if not roots.logarithmic:
        return clean(l1), b, 0.0, None
    Nint = roots.resonance
    if Nint == 0:
        a = b
        c = np.zeros(n_terms)
        for n in range(1, n_terms):
            s = 0.5 * np.dot(p[1:n + 1], c[n - 1::-1][:n])
            c[n] = -(s + 2.0 * n * a[n]) / (n * n)
        return a, c, 1.0, "u2"
    a = np.zeros(n_terms)
    a[0] = 1.0
    k = 0.0
    for m in range(1, n_terms):
        s = 0.5 * np.dot(p[1:m + 1], a[m - 1::-1][:m])
        if m < Nint:
            a[m] = -s / ((m + l1 - l1) * (m + l1 - l2))
        elif m == Nint:
            k = -s / N
            a[m] = 0.0
        else:
            j = m - Nint
            a[m] = -(s + k * b[j] * (2.0 * j + N)) / (m * (m - N))
    return a, b, k, "u1"


def handoff_radius(spec: SchwarzianSpec) -> float:
    qs = [p.q for p in spec.pole_list()]
    if len(qs) < 2:
        return 0.5
    return 0.1 * min(b - a for a, b in zip(qs, qs[1:]))


def infinity_radius(spec: SchwarzianSpec) -> float:
    qmax = max((abs(p.q) for p in spec.pole_list()), default=0.0)
    return 0.5 if qmax == 0 else 0.1 / qmax


def frobenius_seed(spec: SchwarzianSpec, index, n_terms: int = 40) -> LocalSeries:
    """Local fundamental pair at pole ``index`` (an int) or at infinity (``"inf"``)."""
    if n_terms < 4:
        raise DomainError("n_terms must be at least 4")
    if index == "inf":
        p = infinity_coefficients(spec, n_terms) if spec.pole_list() else np.zeros(n_terms)
        center, radius = None, infinity_radius(spec)
    else:
        p = local_coefficients(spec, index, n_terms)
        center, radius = spec.pole_list()[index].q, handoff_radius(spec)
    roots = indicial_roots(float(p[0]))
    a1, a2, k, log_on = _frobenius_coefficients(p, roots, n_terms)
    return LocalSeries(center, roots, p, a1, a2, k, log_on, radius)


# --------------------------------------------------------------------------
# ODE continuation


@dataclass
class ODESolutionPair:
    """States (y1, y2, y1', y2') at the vertices of a path."""

    points: np.ndarray
    states: np.ndarray
    frobenius: list = field(default_factory=list)

    @property
    def wronskian(self) -> np.ndarray:
        s = self.states
        return s[:, 0] * s[:, 3] - s[:, 1] * s[:, 2]

    @property
    def ratio(self) -> np.ndarray:
        return self.states[:, 1] / self.states[:, 0]


def _q_scalar(spec: SchwarzianSpec):
    if spec.is_global:
        c = spec.global_c
        return lambda z: c / (z * z)
    data = [(p.q, p.alpha, p.beta) for p in spec.poles]

    def Q(z):
        s = 0j
        for q, a, b in data:
            t = z - q
            s += (a / t + b) / t
        return s

    return Q


def _segment_distance(za, zb, q) -> float:
    d = zb - za
    if d == 0:
        return abs(za - q)
    s = ((q - za) * d.conjugate()).real / abs(d) ** 2
    s = min(1.0, max(0.0, s))
    return abs(za + s * d - q)


def propagate(spec: SchwarzianSpec, za, zb, state, rtol: float = 1e-12, atol: float = 1e-14, margin: float = 1e-8, Q=None):
    """Integrate y'' = -Q y/2 along the segment za -> zb."""
    za, zb = complex(za), complex(zb)
    qs = spec.arrays[0] if not spec.is_global else np.array([0.0])
    for q in qs:
        if _segment_distance(za, zb, q) < margin:
            raise PoleProximity(f"segment passes within {margin:g} of the pole {q!r}")
    if za == zb:
        return np.array(state, dtype=complex)
    Q = _q_scalar(spec) if Q is None else Q
    dz = zb - za

    def rhs(s, y):
        h = -0.5 * Q(za + s * dz)
        return np.array([y[2], y[3], h * y[0], h * y[1]]) * dz

    sol = solve_ivp(rhs, (0.0, 1.0), np.array(state, dtype=complex), method="DOP853", rtol=rtol, atol=atol)
    if sol.status != 0:
        raise StepUnderflow(sol.message)
    return sol.y[:, -1]


def integrate_pair(spec: SchwarzianSpec, path, init, **kw) -> ODESolutionPair:
    """Continue a solution pair along a polyline."""
    pts = np.asarray(path, dtype=complex)
    state = np.asarray(init, dtype=complex)
    w0 = state[0] * state[3] - state[1] * state[2]
    if w0 == 0:
        raise DomainError("initial pair has zero Wronskian")
    Q = _q_scalar(spec)
    states = [state]
    for za, zb in zip(pts[:-1], pts[1:]):
        state = propagate(spec, za, zb, state, Q=Q, **kw)
        states.append(state)
    return ODESolutionPair(pts, np.array(states))


@dataclass(frozen=True)
class NumericMap(DevelopingMap):
    """g = psi(y2/y1) with (y1, y2, y1', y2') = (1, 0, 0, 1) at the basepoint."""

    spec: SchwarzianSpec = field(default_factory=SchwarzianSpec)
    basepoint: complex = 1j
    K: int = 1
    psi: Mobius = field(default_factory=Mobius.identity)
    n_terms: int = 40
    _cache: dict = field(default_factory=dict, compare=False, repr=False)
    _local: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "basepoint", complex(self.basepoint))
        if self.basepoint.imag <= 0:
            raise DomainError("basepoint must be interior to the upper half-plane")
        if not self._cache:
            self._cache[self.basepoint] = np.array([1, 0, 0, 1], dtype=complex)
        object.__setattr__(self, "_Q", _q_scalar(self.spec))
        object.__setattr__(self, "_r_pole", handoff_radius(self.spec))
        object.__setattr__(self, "_r_inf", infinity_radius(self.spec))
        object.__setattr__(self, "_poles", [p.q for p in self.spec.pole_list()])

    def post_compose(self, m: Mobius) -> "NumericMap":
        # share the caches: they do not depend on psi
        out = NumericMap(self.spec, self.basepoint, self.K, m @ self.psi, self.n_terms, self._cache, self._local)
        return out

    def to_dict(self) -> dict:
        return {
            "variant": "NumericMap",
            "K": self.K,
            "psi": self.psi.to_dict(),
            "spec": self.spec.to_dict(),
            "basepoint": [self.basepoint.real, self.basepoint.imag],
        }

    # -- continuation -------------------------------------------------------

    def _route(self, p: complex, z: complex):
        safe = 0.5 * self._r_pole
        if all(_segment_distance(p, z, q) >= safe for q in self._poles):
            return [z]
        H = max(p.imag, z.imag, 2.0 * self._r_pole)
        return [complex(p.real, H), complex(z.real, H), z]

    def state(self, z) -> np.ndarray:
        """(y1, y2, y1', y2') at an ODE-region point of the closed half-plane."""
        z = complex(z)
        if z.imag < 0:
            raise DomainError("numeric maps live on the closed upper half-plane")
        hit = self._cache.get(z)
        if hit is not None:
            return hit
        keys = list(self._cache.keys())
        p = min(keys, key=lambda k: abs(k - z))
        Y = self._cache[p]
        for nxt in self._route(p, z):
            Y = propagate(self.spec, p, nxt, Y, Q=self._Q)
            self._cache[nxt] = Y
            p = nxt
        return Y

    def _state_jets(self, z: complex):
        y1, y2, d1, d2 = self.state(z)
        Q = self._Q(z)
        dQ = self._dQ(z)
        j1 = Jet3(y1, d1, -0.5 * Q * y1, -0.5 * (dQ * y1 + Q * d1))
        j2 = Jet3(y2, d2, -0.5 * Q * y2, -0.5 * (dQ * y2 + Q * d2))
        return j1, j2

    def _dQ(self, z):
        if self.spec.is_global:
            return -2.0 * self.spec.global_c / z ** 3
        s = 0j
        for p in self.spec.poles:
            t = z - p.q
            s += -2.0 * p.alpha / t ** 3 - p.beta / t ** 2
        return s

    # -- local series near singular points ----------------------------------

    def local(self, index):
        """(series, matching Moebius M) with raw y2/y1 = M(u2/u1) near ``index``."""
        hit = self._local.get(index)
        if hit is not None:
            return hit
        ser = frobenius_seed(self.spec, index, self.n_terms)
        thetas = (math.pi / 6, math.pi / 2, 5 * math.pi / 6)
        if index == "inf":
            zs = [-1.0 / (ser.radius * cmath.exp(1j * t)) for t in thetas]
        else:
            zs = [ser.center + ser.radius * cmath.exp(1j * t) for t in thetas]
        sig, raw = [], []
        for z in zs:
            sig.append(ser.sigma(z))
            y1, y2, _, _ = self.state(z)
            raw.append(INF if y1 == 0 else y2 / y1)
        M = Mobius.from_points(sig, raw)
        self._local[index] = (ser, M)
        return ser, M

    def _region(self, z: complex):
        for i, q in enumerate(self._poles):
            if abs(z - q) < self._r_pole:
                return i
        if abs(z) > 1.0 / self._r_inf:
            return "inf"
        return None

    def vertex_value(self, index):
        """Limit of g at the pole ``index`` (or at infinity)."""
        ser, M = self.local(index)
        return (self.psi @ M)(ser.vertex_sigma)

    def sphere_jet(self, z):
        if np.ndim(z) > 0:
            zz = np.asarray(z, dtype=complex)
            parts = [self._sphere_jet_scalar(complex(x)) for x in zz.ravel()]
            shape = zz.shape
            fields = [np.array([getattr(j, f) for j, _ in parts]).reshape(shape) for f in ("f0", "f1", "f2", "f3")]
            return Jet3(*fields), np.array([fl for _, fl in parts]).reshape(shape)
        return self._sphere_jet_scalar(complex(z))

    def _sphere_jet_scalar(self, z: complex):
        region = self._region(z)
        if region is None:
            j1, j2 = self._state_jets(z)
            m = self.psi
        else:
            ser, M = self.local(region)
            j1, j2 = ser.pair(z)
            m = self.psi @ M
        return _sphere_ratio(m.a * j2 + m.b * j1, m.c * j2 + m.d * j1)

    def value(self, z):
        if np.ndim(z) == 0:
            if is_inf(z):
                return self.vertex_value("inf")
            z = complex(z)
            for i, q in enumerate(self._poles):
                if z == q:
                    return self.vertex_value(i)
        return super().value(z)


def developing_map_numeric(spec: SchwarzianSpec, basepoint=1j, K: int = 1) -> NumericMap:
    v = validate_spec(spec)
    if not v.valid:
        raise DomainError(f"inadmissible Schwarzian data: {v.reason}")
    return NumericMap(spec=spec, basepoint=basepoint, K=K)


# --------------------------------------------------------------------------
# boundary circles


@dataclass(frozen=True)
class BoundaryFit:
    circle: GeneralizedCircle
    residual: float
    interval: tuple
    samples: tuple = ()

    @property
    def passed(self) -> bool:
        return self.residual <= 1e-8


def interval_points(interval, s):
    """Points of a real interval (ends may be infinite) at parameters s in (0, 1)."""
    a, b = interval
    s = np.asarray(s, dtype=float)
    if math.isfinite(a) and math.isfinite(b):
        return a + (b - a) * s
    if math.isfinite(a):
        return a + (1.0 + abs(a)) * np.tan(0.5 * math.pi * s)
    if math.isfinite(b):
        return b - (1.0 + abs(b)) * np.tan(0.5 * math.pi * (1.0 - s))
    return np.tan(math.pi * (s - 0.5))


def boundary_circles(dm: DevelopingMap, interval, n_check: int = 20) -> BoundaryFit:
    """Fit a generalized circle to the image of a boundary interval."""
    xs = interval_points(interval, [0.2, 0.5, 0.8])
    pts = [dm.value(complex(x, 0.0)) for x in xs]
    try:
        circ = circle_through(*pts)
    except Exception as exc:
        raise DegenerateFit(f"boundary samples do not determine a circle: {exc}") from exc
    check = interval_points(interval, np.linspace(0.05, 0.95, n_check))
    vals = [dm.value(complex(x, 0.0)) for x in check]
    res = max(circ.residual(v) for v in vals)
    return BoundaryFit(circ, float(res), tuple(interval), tuple(vals))
