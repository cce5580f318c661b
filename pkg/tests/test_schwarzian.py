import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liouville_neumann.errors import CriticalPoint, DomainError, PoleEvaluation
from liouville_neumann.jets import jexp, jlog, jpow, variable
from liouville_neumann.moebius import Mobius
from liouville_neumann.schwarzian import (
    SchwarzianSpec,
    eval_Q,
    indicial_roots,
    inversion_transform,
    log_chart_transform,
    schwarzian,
    validate_spec,
)


def two_pole(b):
    return SchwarzianSpec.from_poles([(-1, 0.25, b), (1, 0.25, -b)])


class TestSchwarzian:
    def test_mobius_annihilated(self):
        m = Mobius(1 + 2j, 3, -1j, 2)
        assert abs(schwarzian(m.apply_jet(variable(0.4 + 0.9j)))) < 1e-12

    def test_power(self):
        assert abs(schwarzian(jpow(variable(1.0 + 0j), 0.5)) - 0.375) < 1e-14

    def test_log(self):
        assert abs(schwarzian(jlog(variable(2.0 + 0j))) - 0.125) < 1e-15

    def test_critical_point(self):
        z = variable(0j)
        with pytest.raises(CriticalPoint):
            schwarzian(z * z)

    @given(st.floats(0.05, 3.0), st.floats(0.1, 5.0), st.floats(0.05, 3.0))
    @settings(max_examples=60, deadline=None)
    def test_power_closed_form(self, gamma, r, th):
        z = r * cmath.exp(1j * th)
        s = schwarzian(jpow(variable(z), gamma))
        ref = (1 - gamma ** 2) / (2 * z ** 2)
        assert abs(s - ref) <= 1e-10 * max(1.0, abs(ref))

    def test_mobius_invariance(self):
        rng = np.random.default_rng(0)
        worst = 0.0
        for _ in range(100):
            a, b, c, d = rng.normal(size=4) + 1j * rng.normal(size=4)
            m = Mobius(a, b, c, d)
            z = complex(rng.uniform(0.5, 2), rng.uniform(0.2, 2))
            u = jexp(0.7 * jlog(variable(z))) + 0.3 * variable(z)
            s0 = schwarzian(u)
            worst = max(worst, abs(schwarzian(m.apply_jet(u)) - s0) / abs(s0))
        assert worst <= 1e-10


class TestEvalQ:
    def test_global(self):
        assert eval_Q(SchwarzianSpec.global_form(0.375), 1.0) == 0.375

    def test_symmetric_pair(self):
        assert abs(eval_Q(two_pole(0.0), 0.0) - 0.5) < 1e-15

    def test_exact_rational_oracle(self):
        b = Fraction(1, 8)
        oracle = Fraction(1, 4) / 1 + b / (0 + 1) + Fraction(1, 4) / 1 + (-b) / (0 - 1)
        assert oracle == Fraction(3, 4)
        assert abs(eval_Q(two_pole(0.125), 0.0) - float(oracle)) < 1e-15

    def test_pole_guard(self):
        with pytest.raises(PoleEvaluation):
            eval_Q(two_pole(0.1), 1.0)
        with pytest.raises(PoleEvaluation):
            eval_Q(SchwarzianSpec.global_form(0.2), 0.0)

    def test_reflection(self):
        spec = SchwarzianSpec.from_poles([(-2.0, 0.3, 0.4), (0.5, -1.0, 0.1), (3.0, 0.1, -0.5)])
        rng = np.random.default_rng(1)
        z = rng.normal(size=30) * 3 + 1j * rng.normal(size=30)
        assert np.array_equal(eval_Q(spec, z.conj()), np.conj(eval_Q(spec, z)))

    def test_json(self):
        spec = two_pole(0.1)
        assert SchwarzianSpec.from_json(spec.to_json()) == spec
        g = SchwarzianSpec.global_form(0.25 - 0.5j)
        assert SchwarzianSpec.from_dict(g.to_dict()) == g


class TestValidation:
    def test_valid_with_alpha_inf(self):
        v = validate_spec(two_pole(0.1))
        assert v.valid and abs(v.alpha_inf - 0.3) < 1e-15

    def test_alpha_too_large(self):
        v = validate_spec(SchwarzianSpec.from_poles([(0, 1, 0)]))
        assert not v.valid and "> 1/2" in v.reason

    def test_beta_sum(self):
        v = validate_spec(SchwarzianSpec.from_poles([(0, 0, 1)]))
        assert not v.valid and "beta" in v.reason

    def test_alpha_inf_too_large(self):
        v = validate_spec(two_pole(-0.1))
        assert not v.valid and abs(v.alpha_inf - 0.7) < 1e-15

    def test_empty_is_valid(self):
        assert validate_spec(SchwarzianSpec()).valid

    def test_complex_global(self):
        assert not validate_spec(SchwarzianSpec.global_form(0.1 + 0.1j)).valid

    def test_duplicate_poles(self):
        with pytest.raises(DomainError):
            SchwarzianSpec.from_poles([(0, 0.1, 0), (0, 0.2, 0)])


class TestTransforms:
    def test_global_inversion(self):
        res = inversion_transform(SchwarzianSpec.global_form(0.3))
        assert res.limit == 0.3 and not res.divergent

    def test_inversion_limit(self):
        res = inversion_transform(two_pole(0.1))
        assert abs(res.limit - 0.3) < 1e-6 and not res.divergent

    @given(st.floats(-0.4, 0.4), st.floats(-1.0, 1.0), st.floats(0.3, 3.0))
    @settings(max_examples=40, deadline=None)
    def test_inversion_matches_alpha_inf(self, a, b, q):
        spec = SchwarzianSpec.from_poles([(-q, a, b), (q, 0.1, -b)])
        assert abs(inversion_transform(spec).limit - spec.alpha_inf) <= 1e-6

    def test_unbalanced_residues_diverge(self):
        spec = SchwarzianSpec.from_poles([(-1, 0.25, 0.1), (1, 0.25, 0.1)])
        res = inversion_transform(spec)
        assert res.divergent and abs(res.growth_exponent + 1) < 0.05

    def test_excess_alpha_inf_has_finite_limit(self):
        res = inversion_transform(two_pole(-0.1))
        assert not res.divergent and abs(res.limit - 0.7) < 1e-6

    def test_log_chart(self):
        gamma = 0.5
        Q = lambda z: (1 - gamma ** 2) / (2 * z ** 2)
        w = 0.3 + 1.1j
        direct = schwarzian(jexp(gamma * variable(w)))
        assert abs(log_chart_transform(Q, w) + gamma ** 2 / 2) < 1e-14
        assert abs(direct + gamma ** 2 / 2) < 1e-14
        assert abs(log_chart_transform(lambda z: 0.5 / z ** 2, w)) < 1e-15
        assert abs(log_chart_transform(SchwarzianSpec.global_form(0.375), 1 + 1j) + 0.125) < 1e-15

    def test_cocycle(self):
        g = lambda u: jpow(u, 0.3, halfplane=True) + u * u
        rng = np.random.default_rng(2)
        for w in rng.uniform(-1, 1, 50) + 1j * rng.uniform(0.1, 3.0, 50):
            lhs = schwarzian(g(jexp(variable(w))))
            rhs = log_chart_transform(lambda z: schwarzian(g(variable(z))), w)
            assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))


class TestIndicial:
    def test_double_root(self):
        r = indicial_roots(0.5)
        assert r.lambda1 == r.lambda2 == 0.5 and r.logarithmic

    def test_free(self):
        r = indicial_roots(0.0)
        assert (r.lambda1, r.lambda2, r.logarithmic) == (0.0, 1.0, True)

    def test_three_eighths(self):
        r = indicial_roots(0.375)
        assert abs(r.lambda1 - 0.25) < 1e-15 and abs(r.lambda2 - 0.75) < 1e-15 and not r.logarithmic

    def test_complex_roots_rejected(self):
        with pytest.raises(DomainError):
            indicial_roots(0.6)

    @given(st.floats(-20, 0.5))
    def test_vieta(self, a):
        r = indicial_roots(a)
        assert abs(r.lambda1 + r.lambda2 - 1) <= 1e-14
        assert abs(r.lambda1 * r.lambda2 - a / 2) <= 1e-14 * max(1.0, abs(a))
        for lam in (r.lambda1, r.lambda2):
            assert abs(lam * lam - lam + a / 2) <= 1e-14 * max(1.0, abs(a))

    def test_resonance(self):
        assert indicial_roots(-1.5).resonance == 2
        assert indicial_roots(0.1).resonance is None
