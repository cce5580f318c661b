import json
import math

import numpy as np
import pytest
from scipy.integrate import quad

from liouville_neumann.canonical import CanonicalParams, boundary_constants, classify_asymptotics, closed_form_developing_map
from liouville_neumann.developing import PowerForm, SpiralForm, construct_case
from liouville_neumann.errors import DomainError, GridTooCoarse, MarginViolation, RangeViolation
from liouville_neumann.moebius import Mobius
from liouville_neumann.verification import (
    GridSpec,
    MetricField,
    annulus_area,
    area,
    boundary_csv,
    decision_table_instances,
    field_csv,
    field_from_params,
    finiteness_at_origin,
    finiteness_of_map,
    fit_asymptotics,
    liouville_residual,
    metric_from_dev,
    neumann_residual,
    schwarzian_estimate,
    semicircle_length,
    verify_canonical,
)
from sampling import random_suite

SPHERE = metric_from_dev(PowerForm(K=1, gamma=1.0))


class TestFields:
    def test_sphere(self):
        assert abs(SPHERE.ev(1j) - 1) < 1e-15

    def test_flat(self):
        fld = metric_from_dev(PowerForm(K=0, gamma=1.0))
        assert np.allclose(fld.ev(np.array([1j, 3 + 0.1j, -2 + 5j])), 4.0, rtol=1e-15)

    def test_square_root(self):
        fld = metric_from_dev(PowerForm(K=1, gamma=0.5))
        assert abs(fld.ev(1.0 + 0j) - 0.25) < 1e-15

    def test_curvature_tag(self):
        with pytest.raises(DomainError):
            metric_from_dev(PowerForm(K=1, gamma=1.0), K=0)

    def test_range_screen(self):
        with pytest.raises(RangeViolation):
            metric_from_dev(PowerForm(K=-1, gamma=1.0))


class TestLiouville:
    def test_sphere(self):
        res = liouville_residual(SPHERE, GridSpec())
        assert res.max <= 1e-6 and res.n_points == 2500

    def test_hyperbolic_canonical(self):
        p = CanonicalParams("Power", -1, 1.0, -2 + 0.5j, 0.6)
        assert liouville_residual(field_from_params(p)).max <= 1e-6

    def test_corrupted_field_detected(self):
        bad = MetricField(lambda z: SPHERE.v(z) + 0.01 * np.real(np.asarray(z) ** 2), 1)
        assert liouville_residual(bad).max >= 1e-3

    def test_grid_must_be_interior(self):
        with pytest.raises(DomainError):
            liouville_residual(SPHERE, GridSpec(y0=0.0))

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_coarse_grid(self):
        wiggly = MetricField(lambda z: np.real(np.sin(40 * np.asarray(z))), 1)
        with pytest.raises(GridTooCoarse):
            liouville_residual(wiggly, h=0.2, coarse_limit=1e-6)

    def test_schwarzian_estimator(self):
        p = CanonicalParams("Power", 1, 1.0, 1 + 1j, 0.7)
        dm = closed_form_developing_map(p)
        for z in (0.5 + 0.5j, -1 + 2j, 2 + 0.3j):
            est = schwarzian_estimate(field_from_params(p), z)
            assert abs(est - dm.schwarzian_at(z)) <= 1e-4


class TestNeumann:
    def test_canonical_constant(self):
        fld = field_from_params(CanonicalParams("Power", 1, 1.0, 1j, 1.0))
        fit = neumann_residual(fld, (0.05, 0.5), 2.0)
        assert abs(fit.fitted_c - 2) <= 1e-6 and fit.residual <= 1e-6 and fit.n_points == 50

    def test_geodesic_axis(self):
        for side in (1, 2):
            assert abs(neumann_residual(SPHERE, side).fitted_c) <= 1e-9

    def test_reflection_swaps_sides(self):
        p = CanonicalParams("Power", 0, 1.0, 2 * np.exp(2.5j), 0.6)
        fld = field_from_params(p)
        mirror = MetricField(lambda z: fld.v(-np.conj(np.asarray(z))), 0)
        c = boundary_constants(p)
        # reflection also reverses the boundary direction, which flips signs
        assert abs(neumann_residual(mirror, 1).fitted_c - c.c2) <= 1e-6
        assert abs(neumann_residual(mirror, 2).fitted_c - c.c1) <= 1e-6

    def test_margin(self):
        with pytest.raises(MarginViolation):
            neumann_residual(SPHERE, (-1e-7, 1e-7), n=3)


class TestLengths:
    def test_sphere(self):
        assert abs(semicircle_length(SPHERE, 1.0) - math.pi) <= 1e-12
        for r in (0.1, 3.0):
            assert abs(semicircle_length(SPHERE, r) - 2 * math.pi * r / (1 + r * r)) <= 1e-10

    @pytest.mark.parametrize("p", random_suite(9, per_k=2))
    def test_canonical_lengths_decrease(self, p):
        L = [semicircle_length(field_from_params(p), 10.0 ** -k) for k in range(1, 7)]
        assert all(b < a for a, b in zip(L, L[1:]))

    def test_spiral_bounded_below(self):
        fld = metric_from_dev(construct_case("iii", gamma=-0.3))
        L = [semicircle_length(fld, 10.0 ** -k) for k in range(1, 7)]
        assert min(L) / max(L) >= 0.5


class TestArea:
    def test_sphere(self):
        res = area(SPHERE)
        assert abs(res.value - 2 * math.pi) <= 1e-6 * 2 * math.pi and res.verdict == "converged"

    def test_flat_diverges(self):
        res = area(metric_from_dev(PowerForm(K=0, gamma=1.0)))
        assert res.divergent and res.verdict == "DivergenceDetected"

    def test_flat_origin_log_divergence(self):
        res = area(field_from_params(CanonicalParams("Power", 0, 1.0, 0j, 0.5)), ("half-disk", 1.0))
        assert res.divergent
        # e^v = 4 gamma^2 |z|^(-2 - 2 gamma): each dyadic ring grows by 2^(2 gamma)
        assert abs(res.growth_exponent - 2 * 0.5 * math.log(2)) < 1e-6

    @pytest.mark.parametrize("p", random_suite(12, per_k=2))
    def test_gauss_bonnet(self, p):
        # K A + sum k_g l_i + 2 (pi - pi gamma) = 2 pi, with k_g = -c_i/2 and two corners of angle pi gamma
        fld = field_from_params(p)
        res = area(fld, tol=1e-10)
        c = boundary_constants(p)

        def length(sign):
            if p.family == "Log":
                # in u = log s the integrand is 2 lam / (K lam^2 + y^2 + (u - x0)^2)
                y = p.z0.imag if sign > 0 else math.pi - p.z0.imag
                return 2 * math.pi * p.lam / math.sqrt(p.K * p.lam ** 2 + y * y)
            f = lambda u: math.exp(0.5 * float(fld.v(complex(sign * math.exp(u), 0.0))) + u)
            cuts = [-400.0, -40.0, -5.0, 0.0, 5.0, 40.0, 400.0]
            return sum(quad(f, a, b, epsabs=0, epsrel=1e-12, limit=400)[0] for a, b in zip(cuts, cuts[1:]))

        gamma = p.gamma if p.family == "Power" else 0.0
        total = p.K * res.value - 0.5 * (c.c1 * length(1) + c.c2 * length(-1)) + 2 * (math.pi - math.pi * gamma)
        assert not res.divergent
        assert abs(total - 2 * math.pi) <= 1e-6

    def test_chart_agreement(self):
        p = CanonicalParams("Power", -1, 1.0, -2 + 0.5j, 0.6)
        fld = field_from_params(p)
        for r1, r2 in ((0.5, 2.0), (0.9, 1.1), (2.0, 7.0)):
            a, b = annulus_area(fld, r1, r2, "z"), annulus_area(fld, r1, r2, "w")
            assert abs(a - b) <= 1e-6 * a

    def test_half_disk(self):
        # sphere field on |z| < 1 covers a quarter sphere
        assert abs(area(SPHERE, ("half-disk", 1.0)).value - math.pi) <= 1e-8


class TestDecisionTable:
    def test_examples(self):
        ident = Mobius.identity()
        assert finiteness_at_origin("i", ident, 0, 1, 0.5).finite
        assert finiteness_at_origin("ii", Mobius(0, 1, -1, 0), 0, 0).finite
        assert not finiteness_at_origin("ii", ident, 0, 0).finite
        v = finiteness_at_origin("iii", ident, 0, 1)
        assert not v.finite and "spiral" in v.reason

    def test_log_two_branch(self):
        inst = next(i for i in decision_table_instances() if i.name == "disk tilted pi/3")
        v = finiteness_of_map(inst.dm)
        assert v.finite and v.log_two
        fld = MetricField(inst.dm.log_density, -1)
        c1 = neumann_residual(fld, (0.01, 0.05), n=20).fitted_c
        c2 = neumann_residual(fld, (-0.05, -0.01), n=20).fitted_c
        assert abs(c1 + c2) <= 1e-6 and -2 < c1 < 2

    def test_degenerate_gamma(self):
        with pytest.raises(DomainError):
            finiteness_at_origin("i", Mobius.identity(), 0, 1, 0.0)

    def test_catalog_covers_branches(self):
        reasons = {finiteness_of_map(i.dm).reason.split(":")[0] for i in decision_table_instances()}
        assert len(decision_table_instances()) >= 30 and len(reasons) >= 8

    def test_agrees_with_quadrature_sample(self):
        picks = ("sphere cone 1/2", "plane D = 0", "disk pole Cayley 0.7", "plane log", "disk horocycle")
        for inst in decision_table_instances():
            if inst.name not in picks:
                continue
            fv = finiteness_of_map(inst.dm)
            res = area(MetricField(inst.dm.log_density, inst.dm.K), ("half-disk", inst.epsilon))
            assert fv.finite == (not res.divergent), inst.name


class TestAsymptoticFits:
    @pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
    def test_conical(self, gamma):
        fit = fit_asymptotics(field_from_params(CanonicalParams("Power", 1, 1.0, 1 + 1j, gamma)))
        assert fit.tag == "Conical" and abs(fit.slope - 2 * (gamma - 1)) <= 0.01

    def test_log_four(self):
        fit = fit_asymptotics(field_from_params(CanonicalParams("Log", 1, 1.0, 2j)))
        assert fit.tag == "LogFour" and abs(fit.log_exponent + 4) < 0.1

    def test_log_two(self):
        inst = next(i for i in decision_table_instances() if i.name == "disk tilted pi/4")
        fit = fit_asymptotics(MetricField(inst.dm.log_density, -1))
        assert fit.tag == "LogTwo" and abs(fit.log_exponent + 2) < 0.1

    def test_consistent_with_canonical_classifier(self):
        for p in random_suite(13, per_k=2):
            fit = fit_asymptotics(field_from_params(p))
            assert fit.tag == classify_asymptotics(p).tag


class TestReports:
    def test_verify_canonical(self):
        rep = verify_canonical(CanonicalParams("Power", 1, 1.0, 0j, 1.0))
        assert rep.passed
        assert abs(rep.data["area"]["value"] - 2 * math.pi) < 1e-6
        doc = json.loads(rep.to_json())
        assert all({"name", "value", "tol", "passed"} <= set(v) for v in doc["verdicts"])

    def test_invalid_params_fail(self):
        rep = verify_canonical(CanonicalParams("Power", 0, 1.0, 0j, 0.5))
        assert not rep.passed

    def test_csv(self):
        text = field_csv(SPHERE, GridSpec(nx=3, ny=2))
        lines = text.split("\n")
        assert lines[0] == "s,t,v,ev" and len(lines) == 8 and "\r" not in text
        assert boundary_csv(SPHERE, 5).count("\n") == 11
