"""Order-3 jets of holomorphic functions.

A :class:`Jet3` carries a value and its first three complex derivatives.
Arithmetic follows the truncated chain/product rules, so building an
expression out of jets yields the derivatives needed by the Schwarzian.
Fields may be Python complex numbers or numpy arrays (evaluated
elementwise).
"""

from __future__ import annotations

import numpy as np

__all__ = ["Jet3", "variable", "constant", "jexp", "jlog", "jpow", "hp_log", "hp_pow"]


def hp_log(z):
    """Logarithm with ``arg z`` in ``[0, pi]`` on the closed upper half-plane.

    Points on the negative real axis get ``arg = pi`` regardless of the sign
    of a zero imaginary part.  Tiny negative imaginary parts from rounding
    are clamped onto the nearest boundary ray.
    """
    z = np.asarray(z, dtype=complex)
    arg = np.angle(z)
    arg = np.where(arg < 0, np.where(arg < -np.pi / 2, np.pi, 0.0), arg)
    out = np.log(np.abs(z)) + 1j * arg
    return out[()] if out.ndim == 0 else out


def hp_pow(z, p):
    """``z**p`` on the closed upper half-plane using :func:`hp_log`."""
    out = np.exp(p * hp_log(z))
    return out


class Jet3:
    """Value and first three derivatives ``(f, f', f'', f''')``."""

    __slots__ = ("f0", "f1", "f2", "f3")

    def __init__(self, f0, f1=0.0, f2=0.0, f3=0.0):
        self.f0 = f0
        self.f1 = f1
        self.f2 = f2
        self.f3 = f3

    def __repr__(self):
        return f"Jet3({self.f0!r}, {self.f1!r}, {self.f2!r}, {self.f3!r})"

    def __iter__(self):
        return iter((self.f0, self.f1, self.f2, self.f3))

    @staticmethod
    def _lift(other):
        if isinstance(other, Jet3):
            return other
        return Jet3(other, 0.0, 0.0, 0.0)

    def apply(self, d0, d1, d2, d3):
        """Compose an outer function with known derivatives at ``self.f0``."""
        g1, g2, g3 = self.f1, self.f2, self.f3
        return Jet3(
            d0,
            d1 * g1,
            d2 * g1 * g1 + d1 * g2,
            d3 * g1 ** 3 + 3.0 * d2 * g1 * g2 + d1 * g3,
        )

    def compose(self, outer):
        """``outer(self)`` where ``outer`` maps a Jet3 at a point to its jet."""
        return outer(self)

    def __add__(self, other):
        o = self._lift(other)
        return Jet3(self.f0 + o.f0, self.f1 + o.f1, self.f2 + o.f2, self.f3 + o.f3)

    __radd__ = __add__

    def __neg__(self):
        return Jet3(-self.f0, -self.f1, -self.f2, -self.f3)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet3):
            return Jet3(self.f0 * other, self.f1 * other, self.f2 * other, self.f3 * other)
        u, v = self, other
        return Jet3(
            u.f0 * v.f0,
            u.f1 * v.f0 + u.f0 * v.f1,
            u.f2 * v.f0 + 2.0 * u.f1 * v.f1 + u.f0 * v.f2,
            u.f3 * v.f0 + 3.0 * u.f2 * v.f1 + 3.0 * u.f1 * v.f2 + u.f0 * v.f3,
        )

    __rmul__ = __mul__

    def reciprocal(self):
        x = self.f0
        inv = 1.0 / x
        return self.apply(inv, -inv * inv, 2.0 * inv ** 3, -6.0 * inv ** 4)

    def __truediv__(self, other):
        if not isinstance(other, Jet3):
            return self * (1.0 / other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self._lift(other) * self.reciprocal()

    def __pow__(self, p):
        return jpow(self, p)

    def conj_value(self):
        return np.conj(self.f0)


def variable(z):
    """Jet of the identity map at ``z``."""
    return Jet3(z, 1.0 + 0j, 0.0j, 0.0j)


def constant(c):
    return Jet3(c, 0.0j, 0.0j, 0.0j)


def jexp(u: Jet3) -> Jet3:
    e = np.exp(u.f0)
    return u.apply(e, e, e, e)


def jlog(u: Jet3, halfplane: bool = False) -> Jet3:
    """Logarithm of a jet; ``halfplane`` selects the ``arg in [0, pi]`` branch."""
    x = u.f0
    val = hp_log(x) if halfplane else np.log(x)
    inv = 1.0 / x
    return u.apply(val, inv, -inv * inv, 2.0 * inv ** 3)


def jpow(u: Jet3, p, halfplane: bool = False) -> Jet3:
    """``u**p`` for complex ``p`` on the principal (or half-plane) branch."""
    x = u.f0
    if halfplane:
        lx = hp_log(x)
    else:
        lx = np.log(x)
    val = np.exp(p * lx)
    inv = 1.0 / x
    d1 = p * val * inv
    d2 = p * (p - 1.0) * val * inv * inv
    d3 = p * (p - 1.0) * (p - 2.0) * val * inv ** 3
    return u.apply(val, d1, d2, d3)
