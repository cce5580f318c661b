import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liouville_neumann.errors import ConstraintViolation, DegenerateInput, StepTooLarge
from liouville_neumann.jets import jexp, jlog, jpow, variable
from liouville_neumann.moebius import (
    INF,
    GeneralizedCircle,
    Mobius,
    chordal_distance,
    circle_through,
    classify_intersection,
    cross_ratio,
    geodesic_curvature,
    is_inf,
    isometry_normal_form,
    mobius_apply,
    spherical_derivative,
)

finite = st.floats(-5, 5, allow_nan=False)
cpx = st.builds(complex, finite, finite)


def random_mobius(rng):
    while True:
        a, b, c, d = rng.normal(size=4) + 1j * rng.normal(size=4)
        if abs(a * d - b * c) > 0.1:
            return Mobius(a, b, c, d)


def pullback(m, z, K):
    """4|m'(z)|^2 / (1 + K|m(z)|^2)^2 for a Moebius map."""
    w = m(z)
    dm = 1.0 / (m.c * z + m.d) ** 2
    return 4 * abs(dm) ** 2 / (1 + K * abs(w) ** 2) ** 2


class TestApply:
    def test_identity(self):
        assert Mobius.identity()(2 + 1j) == 2 + 1j

    def test_inversion_sends_infinity_to_zero(self):
        assert mobius_apply(Mobius(0, 1, 1, 0), INF) == 0

    def test_pole_goes_to_infinity(self):
        assert is_inf(Mobius(1, 0, 1, -2)(2.0))

    def test_cayley(self):
        m = Mobius(1, -1j, 1, 1j)
        assert abs(m(1j)) < 1e-15
        rng = np.random.default_rng(5)
        for z in rng.normal(size=20) + 1j * rng.normal(size=20):
            assert abs(m(z) - (z - 1j) / (z + 1j)) <= 1e-14 * (1 + abs(m(z)))

    def test_normalized_determinant(self):
        m = Mobius(2, 3, 1, 5)
        assert abs(m.a * m.d - m.b * m.c - 1) < 1e-14
        assert abs(np.linalg.det((m @ m.inverse()).matrix) - 1) < 1e-14

    def test_singular_coefficients_rejected(self):
        with pytest.raises(DegenerateInput):
            Mobius(1, 2, 2, 4)

    def test_group_law(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            m1, m2 = random_mobius(rng), random_mobius(rng)
            z = complex(*rng.normal(size=2))
            assert chordal_distance((m1 @ m2)(z), m1(m2(z))) <= 1e-10

    def test_from_points(self):
        m = Mobius.from_points([0, 1, INF], [1j, 2, -1])
        assert abs(m(0) - 1j) < 1e-14 and abs(m(1) - 2) < 1e-14 and abs(m(INF) + 1) < 1e-14

    @given(cpx, cpx, cpx, cpx)
    @settings(max_examples=50, deadline=None)
    def test_cross_ratio_invariant(self, z1, z2, z3, z4):
        pts = [z1, z2, z3, z4]
        if min(abs(a - b) for i, a in enumerate(pts) for b in pts[i + 1:]) < 0.1:
            return
        m = Mobius(1 + 1j, 2, 0.5, 1 - 1j)
        images = [m(z) for z in pts]
        if any(is_inf(w) or abs(w) > 1e6 for w in images):
            return
        lhs, rhs = cross_ratio(*pts), cross_ratio(*images)
        assert abs(lhs - rhs) <= 1e-8 * (1 + abs(lhs))


class TestIsometry:
    def test_identity(self):
        for K in (-1, 0, 1):
            assert isometry_normal_form(1, 0, K).is_close(Mobius.identity())

    def test_unit_condition(self):
        with pytest.raises(ConstraintViolation):
            isometry_normal_form(1, 1, 1)

    def test_sphere_rotation_preserves_density(self):
        t = math.pi / 4
        m = isometry_normal_form(math.cos(t), math.sin(t), 1)
        rng = np.random.default_rng(1)
        for z in rng.normal(size=50) * 2 + 2j * rng.normal(size=50):
            assert abs(pullback(m, z, 1) - 4 / (1 + abs(z) ** 2) ** 2) <= 1e-10

    def test_disk_automorphism_preserves_density(self):
        s = 0.3
        m = isometry_normal_form(math.cosh(s), math.sinh(s), -1)
        rng = np.random.default_rng(2)
        r = 0.9 * np.sqrt(rng.uniform(size=50))
        for z in r * np.exp(2j * math.pi * rng.uniform(size=50)):
            ref = 4 / (1 - abs(z) ** 2) ** 2
            assert abs(pullback(m, z, -1) - ref) <= 1e-10 * ref

    @given(st.floats(0, 2 * math.pi), st.floats(-2, 2), st.floats(0, 2 * math.pi))
    @settings(max_examples=40, deadline=None)
    def test_plane_motions(self, t, s, u):
        alpha = cmath.exp(1j * t)
        m = isometry_normal_form(alpha, s * cmath.exp(1j * u), 0)
        z = 0.3 + 0.7j
        assert abs(pullback(m, z, 0) - 4) <= 1e-10


class TestCircles:
    def test_unit_circle(self):
        c = circle_through(1, 1j, -1)
        assert abs(c.A - 1) < 1e-12 and abs(c.B) < 1e-12 and abs(c.D + 1) < 1e-12

    def test_real_axis(self):
        c = circle_through(0, 1, INF)
        assert c.is_line
        assert abs(c.B - 1j) < 1e-12 or abs(c.B + 1j) < 1e-12
        assert c.contains(-7.5) and not c.contains(1j)

    def test_center_radius(self):
        c = circle_through(0, 1 + 1j, 2)
        assert abs(c.center - 1) < 1e-12 and abs(c.radius - 1) < 1e-12
        for t in np.linspace(0, 2 * math.pi, 10, endpoint=False):
            assert c.residual(1 + cmath.exp(1j * t)) <= 1e-12

    def test_canonical_scaling(self):
        c = GeneralizedCircle(3.0, 1 + 2j, -4.0)
        assert abs(abs(c.B) ** 2 - c.A * c.D - 1) < 1e-14 and c.A > 0

    def test_coincident_points(self):
        with pytest.raises(DegenerateInput):
            circle_through(1, 1, 2)

    def test_transport(self):
        rng = np.random.default_rng(3)
        base = GeneralizedCircle.from_center_radius(0.5 + 0.2j, 1.3)
        samples = 0.5 + 0.2j + 1.3 * np.exp(2j * math.pi * rng.uniform(size=23))
        for _ in range(10):
            m = random_mobius(rng)
            img = circle_through(*(m(z) for z in samples[:3]))
            assert img.same_as(base.transform(m), 1e-8)
            assert max(img.residual(m(z)) for z in samples[3:]) <= 1e-10


class TestIntersection:
    unit = GeneralizedCircle.from_center_radius(0, 1)

    def test_two_points(self):
        res = classify_intersection(self.unit, circle_through(0, 1, INF))
        assert res.tag == "TwoPoints"
        assert sorted(round(p.real, 12) for p in res.points) == [-1.0, 1.0]

    def test_tangent(self):
        res = classify_intersection(self.unit, GeneralizedCircle.line(1j, 1))
        assert res.tag == "Tangent" and abs(res.points[0] - 1j) < 1e-8

    def test_disjoint_and_equal(self):
        assert classify_intersection(self.unit, GeneralizedCircle.from_center_radius(0, 3)).tag == "Disjoint"
        assert classify_intersection(self.unit, circle_through(1, 1j, -1)).tag == "Equal"

    def test_mobius_invariance(self):
        rng = np.random.default_rng(4)
        pairs = [
            (self.unit, circle_through(0, 1, INF)),
            (self.unit, GeneralizedCircle.line(1j, 1)),
            (self.unit, GeneralizedCircle.from_center_radius(0, 3)),
        ]
        for c1, c2 in pairs:
            base = classify_intersection(c1, c2)
            for _ in range(5):
                m = random_mobius(rng)
                res = classify_intersection(c1.transform(m), c2.transform(m))
                assert res.tag == base.tag
                for p in base.points:
                    assert min(chordal_distance(m(p), q) for q in res.points) <= 1e-8
                for q in res.points:
                    assert c1.transform(m).residual(q) <= 1e-8


class TestMeasurements:
    def test_spherical_derivative(self):
        ident = lambda z: variable(z)
        assert spherical_derivative(ident, 0) == 1
        assert spherical_derivative(ident, 1j) == 0.5
        sq = lambda z: variable(z) * variable(z)
        assert abs(spherical_derivative(sq, 2) - 4 / 17) < 1e-15
        h = 1e-5
        fd = abs((2 + h) ** 2 - (2 - h) ** 2) / (2 * h) / 17
        assert abs(fd - 4 / 17) < 1e-8

    def test_spherical_derivative_at_pole(self):
        g = lambda z: 1 / variable(z)
        assert abs(spherical_derivative(g, 0, g_inv=lambda z: variable(z)) - 1) < 1e-15

    def test_equator_is_geodesic(self):
        kg = geodesic_curvature(lambda t: cmath.exp(1j * t), 1, 0.7)
        assert abs(kg) < 1e-6

    def test_flat_circles(self):
        # radius-r circle in 4|dz|^2 has curvature 1/(2r)
        for r in (0.5, 1.0, 3.0):
            kg = geodesic_curvature(lambda t: r * cmath.exp(1j * t / r), 0, 0.3)
            assert abs(kg - 1 / (2 * r)) < 1e-6

    def test_hyperbolic_circle(self):
        rho = 1.0
        r = math.tanh(rho / 2)
        kg = geodesic_curvature(lambda t: r * cmath.exp(1j * t), -1, 0.2)
        assert abs(kg - 1 / math.tanh(rho)) < 1e-6

    def test_orientation(self):
        kg = geodesic_curvature(lambda t: cmath.exp(-1j * t), 0, 0.3)
        assert abs(kg + 0.5) < 1e-6

    def test_step_too_large(self):
        with pytest.raises(StepTooLarge):
            geodesic_curvature(lambda t: 0.01 * cmath.exp(100j * t), 0, 0.0, h=0.5)


class TestJets:
    @staticmethod
    def fd(f, z, h=1e-4):
        d1 = lambda h: (f(z + h) - f(z - h)) / (2 * h)
        d2 = lambda h: (f(z + h) - 2 * f(z) + f(z - h)) / h ** 2
        return (4 * d1(h / 2) - d1(h)) / 3, (4 * d2(h / 2) - d2(h)) / 3

    def test_chain_rule(self):
        z0 = 0.7 + 0.4j
        build = lambda u: jexp(jpow(u, 0.5) * jlog(u + 2)) / (u * u + 1)
        plain = lambda z: np.exp(z ** 0.5 * np.log(z + 2)) / (z * z + 1)
        j = build(variable(z0))
        d1, d2 = self.fd(plain, z0)
        assert abs(j.f0 - plain(z0)) < 1e-14
        assert abs(j.f1 - d1) <= 1e-6 * abs(j.f1)
        assert abs(j.f2 - d2) <= 1e-6 * abs(j.f2)

    def test_third_derivative(self):
        j = jexp(3 * variable(0.2j))
        assert abs(j.f3 - 27 * cmath.exp(0.6j)) < 1e-12

    def test_halfplane_branch(self):
        j = jlog(variable(-2.0 + 0.0j), halfplane=True)
        assert abs(j.f0.imag - math.pi) < 1e-15
        j = jlog(variable(complex(-2.0, -0.0)), halfplane=True)
        assert abs(j.f0.imag - math.pi) < 1e-15
