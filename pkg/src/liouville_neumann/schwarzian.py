"""Schwarzian derivatives and the pole data of a Schwarzian potential.

A potential has either the global form ``Q = c/z^2`` or the real-pole form

    Q(z) = sum_i alpha_i/(z - q_i)^2 + beta_i/(z - q_i)

with q_1 < ... < q_n real.  Admissibility asks alpha_i <= 1/2,
sum beta_i = 0 and alpha_inf := sum(alpha_i + q_i beta_i) <= 1/2, where
alpha_inf is the double-pole coefficient seen from infinity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import CriticalPoint, DomainError, PoleEvaluation
from .jets import Jet3

POLE_GUARD = 1e-12


@dataclass(frozen=True)
class Pole:
    q: float
    alpha: float
    beta: float


@dataclass(frozen=True)
class SchwarzianSpec:
    poles: tuple = ()
    global_c: complex | None = None

    def __post_init__(self):
        if self.global_c is not None:
            if self.poles:
                raise DomainError("a spec is either global or pole-based")
            object.__setattr__(self, "global_c", complex(self.global_c))
            return
        poles = tuple(p if isinstance(p, Pole) else Pole(*map(float, p)) for p in self.poles)
        poles = tuple(sorted(poles, key=lambda p: p.q))
        qs = [p.q for p in poles]
        if any(b <= a for a, b in zip(qs, qs[1:])):
            raise DomainError("pole positions must be distinct")
        object.__setattr__(self, "poles", poles)

    @classmethod
    def from_poles(cls, triples) -> "SchwarzianSpec":
        return cls(tuple(triples))

    @classmethod
    def global_form(cls, c) -> "SchwarzianSpec":
        return cls((), complex(c))

    @property
    def is_global(self) -> bool:
        return self.global_c is not None

    def pole_list(self) -> tuple:
        """Poles, with a real global c read as a single pole at the origin."""
        if self.is_global:
            c = self.global_c
            if c.imag != 0:
                raise DomainError("complex global c has no real pole form")
            return (Pole(0.0, c.real, 0.0),)
        return self.poles

    @property
    def arrays(self):
        ps = self.pole_list()
        return (np.array([p.q for p in ps]), np.array([p.alpha for p in ps]), np.array([p.beta for p in ps]))

    @property
    def alpha_inf(self) -> float:
        if self.is_global:
            return self.global_c.real
        return float(sum(p.alpha + p.q * p.beta for p in self.poles))

    @property
    def beta_sum(self) -> float:
        return 0.0 if self.is_global else float(sum(p.beta for p in self.poles))

    def to_dict(self) -> dict:
        if self.is_global:
            return {"global_c": [self.global_c.real, self.global_c.imag]}
        return {"poles": [{"q": p.q, "alpha": p.alpha, "beta": p.beta} for p in self.poles]}

    @classmethod
    def from_dict(cls, d: dict) -> "SchwarzianSpec":
        if "global_c" in d:
            c = d["global_c"]
            return cls.global_form(complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c))
        return cls.from_poles([(p["q"], p["alpha"], p["beta"]) for p in d["poles"]])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SchwarzianSpec":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class SpecValidation:
    valid: bool
    reason: str
    alpha_inf: float

    def __bool__(self):
        return self.valid


@dataclass(frozen=True)
class IndicialRoots:
    lambda1: float
    lambda2: float
    logarithmic: bool

    @property
    def difference(self) -> float:
        return self.lambda2 - self.lambda1

    @property
    def resonance(self) -> int | None:
        """lambda2 - lambda1 as an integer when the exponents are resonant."""
        return int(round(self.difference)) if self.logarithmic else None


# --------------------------------------------------------------------------


def schwarzian(g: Jet3):
    """{g, z} = g'''/g' - 3/2 (g''/g')^2 from a jet."""
    f1 = g.f1
    scale = np.maximum(1.0, np.abs(g.f0)) if np.all(np.isfinite(g.f0)) else 1.0
    if np.any(np.abs(f1) < 1e-13 * scale):
        raise CriticalPoint("g' vanishes: the map is not locally univalent here")
    r = g.f2 / f1
    return g.f3 / f1 - 1.5 * r * r


def _guard(spec: SchwarzianSpec, z):
    qs = spec.arrays[0]
    if qs.size and np.min(np.abs(np.subtract.outer(np.atleast_1d(z), qs))) < POLE_GUARD:
        raise PoleEvaluation("evaluation point coincides with a pole of Q")


def eval_Q(spec: SchwarzianSpec, z):
    """Q(z); vectorized over ``z``."""
    z = np.asarray(z, dtype=complex)
    if spec.is_global:
        if np.any(np.abs(z) < POLE_GUARD):
            raise PoleEvaluation("Q = c/z^2 is singular at 0")
        out = spec.global_c / z ** 2
    else:
        _guard(spec, z)
        q, a, b = spec.arrays
        t = z[..., None] - q
        out = np.sum(a / t ** 2 + b / t, axis=-1)
    return out[()] if out.ndim == 0 else out


def eval_dQ(spec: SchwarzianSpec, z):
    """Q'(z)."""
    z = np.asarray(z, dtype=complex)
    if spec.is_global:
        out = -2.0 * spec.global_c / z ** 3
    else:
        _guard(spec, z)
        q, a, b = spec.arrays
        t = z[..., None] - q
        out = np.sum(-2.0 * a / t ** 3 - b / t ** 2, axis=-1)
    return out[()] if out.ndim == 0 else out


def validate_spec(spec: SchwarzianSpec) -> SpecValidation:
    ainf = spec.alpha_inf
    if spec.is_global:
        c = spec.global_c
        if c.imag != 0:
            return SpecValidation(False, "global c must be real for boundary problems", float("nan"))
        if c.real > 0.5:
            return SpecValidation(False, f"alpha = {c.real!r} > 1/2", ainf)
        return SpecValidation(True, "", ainf)
    for i, p in enumerate(spec.poles):
        if p.alpha > 0.5:
            return SpecValidation(False, f"alpha_{i + 1} = {p.alpha!r} > 1/2 at q = {p.q!r}", ainf)
    bs = spec.beta_sum
    if abs(bs) > 1e-14:
        return SpecValidation(False, f"sum of beta = {bs!r} != 0", ainf)
    if ainf > 0.5 + 1e-14:
        return SpecValidation(False, f"alpha_inf = sum(alpha + q beta) = {ainf!r} > 1/2", ainf)
    return SpecValidation(True, "", ainf)


@dataclass(frozen=True)
class InversionResult:
    """Q~(w) = Q(-1/w)/w^4 together with the behavior of w^2 Q~(w) at 0."""

    transformed: object  # SchwarzianSpec for the global form, else a callable
    limit: complex
    divergent: bool
    inverse_power_coeff: complex  # coefficient of 1/w in w^2 Q~(w)
    growth_exponent: float


def inversion_transform(Q, w_max: float = 1e-3, w_min: float = 1e-6, n: int = 25, tol: float = 1e-6) -> InversionResult:
    """Pull Q back through z = -1/w and extract lim w^2 Q~(w).

    ``Q`` is a spec or a callable.  The limit is fitted by least squares on
    the basis {1/w, 1, w, w^2} along the ray w = i t; a non-negligible
    1/w coefficient marks divergence.
    """
    if isinstance(Q, SchwarzianSpec):
        if Q.is_global:
            c = Q.global_c
            return InversionResult(Q, c, False, 0j, 0.0)
        spec = Q
        Qf = lambda z: eval_Q(spec, z)
    else:
        Qf = Q

    def Qt(w):
        w = np.asarray(w, dtype=complex)
        return Qf(-1.0 / w) / w ** 4

    t = np.logspace(math.log10(w_min), math.log10(w_max), n)
    w = 1j * t
    y = w ** 2 * Qt(w)
    basis = np.stack([1.0 / w, np.ones_like(w), w, w ** 2], axis=1)
    # weight rows so each equation has comparable magnitude
    wt = t[:, None]
    coef, *_ = np.linalg.lstsq(basis * wt, y * t, rcond=None)
    inv_c, lim = coef[0], coef[1]
    divergent = abs(inv_c) > tol * (1.0 + abs(lim))
    slope = float(np.polyfit(np.log(t), np.log(np.abs(y)), 1)[0])
    return InversionResult(Qt, complex(lim), bool(divergent), complex(inv_c), slope)


def log_chart_transform(Q, w):
    """e^{2w} Q(e^w) - 1/2: the potential seen by g(e^w)."""
    Qf = (lambda z: eval_Q(Q, z)) if isinstance(Q, SchwarzianSpec) else Q
    w = np.asarray(w, dtype=complex)
    e = np.exp(w)
    out = e ** 2 * Qf(e) - 0.5
    return out[()] if np.ndim(out) == 0 else out


def indicial_roots(alpha: float) -> IndicialRoots:
    """Roots of lambda^2 - lambda + alpha/2 = 0."""
    if alpha > 0.5:
        raise DomainError(f"alpha = {alpha!r} > 1/2 gives complex exponents")
    s = math.sqrt(1.0 - 2.0 * alpha)
    log_flag = abs(s - round(s)) <= 1e-12
    return IndicialRoots((1.0 - s) / 2.0, (1.0 + s) / 2.0, log_flag)


def local_coefficients(spec: SchwarzianSpec, index: int, n_terms: int) -> np.ndarray:
    """Taylor coefficients of t^2 Q(q_i + t) about t = 0.

    Other poles at offsets d_j = q_j - q_i contribute
    alpha_j (n+1)/d_j^(n+2) - beta_j/d_j^(n+1) to the coefficient of t^(n+2).
    """
    poles = spec.pole_list()
    here = poles[index]
    p = np.zeros(n_terms)
    p[0] = here.alpha
    if n_terms > 1:
        p[1] = here.beta
    for j, other in enumerate(poles):
        if j == index:
            continue
        d = other.q - here.q
        n = np.arange(max(n_terms - 2, 0))
        p[2:] += other.alpha * (n + 1) / d ** (n + 2) - other.beta / d ** (n + 1)
    return p


def infinity_coefficients(spec: SchwarzianSpec, n_terms: int) -> np.ndarray:
    """Taylor coefficients of w^2 Q~(w) at w = 0 (admissible specs, sum beta = 0)."""
    poles = spec.pole_list()
    n = np.arange(n_terms)
    p = np.zeros(n_terms)
    for pole in poles:
        mq = -pole.q
        p += pole.alpha * (n + 1) * mq ** n - pole.beta * mq ** (n + 1)
    return p
