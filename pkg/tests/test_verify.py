import numpy as np
import pytest

from quadriclab.gaussmap import angle_spectrum, gauge_normalize, gauss_map, second_fundamental_form
from quadriclab.hypersurfaces import principal_curvatures, round_sphere
from quadriclab.quadric import StructureGauge, quadric_distance
from quadriclab.verify import (
    GaugePolicy,
    VerifyError,
    check_csc_identities,
    check_prop1,
    classify_by_angles,
    codazzi_residual,
    connection_and_s,
    field_derivatives,
    gauss_equation_residual,
    gauss_lift_field,
    gauss_metric_fn,
    reconstruct_hypersurface,
    sectional_curvature,
    sectional_from_metric,
)

P3 = np.array([0.1, -0.2, 0.15])


class TestConnection:
    def test_antisymmetry(self, tube):
        conn = connection_and_s(tube, P3)
        assert conn.antisymmetry_defect < 1e-8

    def test_gauge_one_form_vanishes_minimal_normalized(self, tube, sphere_half):
        for chart in (tube, sphere_half):
            conn = connection_and_s(chart, P3, GaugePolicy("normalized"))
            assert np.abs(conn.s).max() < 1e-5

    def test_gauge_one_form_nonzero_on_nonminimal(self, wavy_sphere):
        # pointwise renormalization of a non-minimal chart is a genuinely
        # varying gauge; its one-form must show up and intcond-style
        # consistency must still hold (checked via prop1 below)
        p = np.array([0.1, -0.15])
        conn = connection_and_s(wavy_sphere, p, GaugePolicy("normalized"))
        assert np.abs(conn.s).max() > 1e-3

    def test_cartan_rotation_rate_nonzero(self, tube):
        conn = connection_and_s(tube, P3, GaugePolicy("normalized"))
        assert np.abs(conn.omega).max() > 0.1


class TestProp1:
    def test_isoparametric_tight(self, sphere_half, product_13, tube):
        for chart in (sphere_half, product_13, tube):
            rep = check_prop1(chart, P3, GaugePolicy("normalized"))
            for entry in rep.entries.values():
                assert entry.residual < 1e-8

    def test_rotational_nontrivial(self, rotational_chart):
        fd = field_derivatives(
            rotational_chart, rotational_chart.box.center, GaugePolicy("normalized")
        )
        # the angle gradients along the profile direction are genuinely nonzero
        assert np.abs(fd.d_theta()).max() > 0.1
        assert np.abs(fd.ff.h).max() > 0.1
        rep = check_prop1(
            rotational_chart, rotational_chart.box.center, fields=fd
        )
        for entry in rep.entries.values():
            assert entry.residual < 1e-4

    def test_nonminimal_with_varying_gauge(self, wavy_sphere):
        # s != 0 here, so the angle-gradient identity exercises its s-term
        p = np.array([0.1, -0.15])
        rep = check_prop1(wavy_sphere, p, GaugePolicy("normalized"))
        assert rep.entries["angle_gradient_identity"].residual < 1e-4
        assert rep.entries["frame_rotation_identity"].residual < 1e-4

    def test_cartan_rotation_identity_content(self, tube):
        # sin(dtheta) * omega = cos(dtheta) * h with all factors nonzero
        fd = field_derivatives(tube, P3, GaugePolicy("normalized"))
        conn = connection_and_s(tube, P3, fields=fd)
        th = fd.spec.thetas
        lhs = np.sin(th[0] - th[1]) * conn.omega[2, 0, 1]
        rhs = np.cos(th[0] - th[1]) * fd.ff.h[2, 0, 1]
        assert abs(lhs) > 0.1
        assert abs(lhs - rhs) < 1e-8


class TestCurvature:
    def test_metric_route_round_sphere_unit(self):
        # analytic metric of the unit 2-sphere: K must be +1
        def metric(q):
            return np.diag([np.cos(q[1]) ** 2, 1.0])

        k = sectional_from_metric(
            metric, np.array([0.2, 0.3]), np.array([1.0, 0.0]), np.array([0.0, 1.0]), 2e-3
        )
        assert abs(k - 1.0) < 1e-8

    def test_sphere_gauss_map_curvature_two(self, sphere_half):
        metric = gauss_metric_fn(sphere_half)
        k = sectional_from_metric(
            metric, P3, np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), 2.5e-3
        )
        assert abs(k - 2.0) < 1e-3

    def test_flat_torus(self, clifford_torus):
        metric = gauss_metric_fn(clifford_torus)
        k = sectional_from_metric(
            metric, np.array([0.2, -0.1]), np.array([1.0, 0]), np.array([0, 1.0]), 2.5e-3
        )
        assert abs(k) < 1e-3

    def test_cartan_eighth(self, tube):
        jet = gauss_map(tube, P3)
        spec = angle_spectrum(jet, gauge_normalize(jet))
        ff = second_fundamental_form(jet, spec)
        k_alg = sectional_curvature(spec, ff)
        for i in range(3):
            for j in range(3):
                if i != j:
                    assert abs(k_alg[i, j] - 0.125) < 1e-3

    def test_product_mixed_planes_not_constant(self, product_13):
        # mixed planes have curvature 2 cos^2(dtheta) != 2
        jet = gauss_map(product_13, P3)
        spec = angle_spectrum(jet)
        ff = second_fundamental_form(jet, spec)
        k = sectional_curvature(spec, ff)
        th = spec.thetas
        values = sorted({round(k[i, j], 6) for i in range(3) for j in range(3) if i != j})
        assert len(values) > 1  # not constant curvature
        # the angle gap is pi/2, so mixed planes are flat
        mixed = 2.0 * np.cos(th[0] - th[-1]) ** 2
        assert abs(mixed) < 1e-8
        assert min(values) == pytest.approx(0.0, abs=1e-8)

    def test_gauss_equation_all_catalog(
        self, sphere_half, clifford_torus, product_13, tube, rotational_chart
    ):
        for chart, p in (
            (sphere_half, P3),
            (clifford_torus, np.array([0.2, -0.1])),
            (product_13, P3),
            (tube, P3),
            (rotational_chart, rotational_chart.box.center),
        ):
            rep = gauss_equation_residual(chart, p, GaugePolicy("normalized"))
            assert rep.entries["gauss_equation"].residual < 1e-3


class TestCodazzi:
    def test_totally_geodesic_charts(self, sphere_half, product_13):
        for chart in (sphere_half, product_13):
            rep = codazzi_residual(chart, P3, GaugePolicy("normalized"))
            assert rep.entries["codazzi_equation"].residual < 1e-3

    def test_cartan_and_rotational(self, tube, rotational_chart):
        for chart, p in ((tube, P3), (rotational_chart, rotational_chart.box.center)):
            rep = codazzi_residual(chart, p, GaugePolicy("normalized"))
            assert rep.entries["codazzi_equation"].residual < 1e-3

    def test_cartan_cyclic_component_relations(self, tube):
        # the squared off-diagonal cubic component against the three cyclic
        # trigonometric products
        jet = gauss_map(tube, P3)
        spec = angle_spectrum(jet, gauge_normalize(jet))
        ff = second_fundamental_form(jet, spec)
        th = spec.thetas
        h2 = ff.h[0, 1, 2] ** 2
        c1 = -np.cos(th[0] - th[1]) * np.sin(th[1] - th[2]) * np.sin(th[2] - th[0])
        c2 = -np.sin(th[0] - th[1]) * np.cos(th[1] - th[2]) * np.sin(th[2] - th[0])
        c3 = -np.sin(th[0] - th[1]) * np.sin(th[1] - th[2]) * np.cos(th[2] - th[0])
        for c in (c1, c2, c3):
            assert abs(h2 - c) < 1e-3

    def test_wavy_sphere(self, wavy_sphere):
        rep = codazzi_residual(wavy_sphere, np.array([0.1, -0.15]), GaugePolicy("normalized"))
        assert rep.entries["codazzi_equation"].residual < 1e-3


class TestCscIdentities:
    def test_sphere_trivial(self, sphere_half):
        jet = gauss_map(sphere_half, P3)
        spec = angle_spectrum(jet)
        ff = second_fundamental_form(jet, spec)
        rep = check_csc_identities(spec, ff)
        assert rep.all_pass
        for e in rep.entries.values():
            assert e.residual < 1e-8

    def test_cartan(self, tube):
        jet = gauss_map(tube, P3)
        spec = angle_spectrum(jet, gauge_normalize(jet))
        ff = second_fundamental_form(jet, spec)
        rep = check_csc_identities(spec, ff)
        assert rep.all_pass
        # the triple-vanishing identity holds through the angle combination,
        # not through h: check the trigonometric factor itself vanishes
        th = spec.thetas
        assert abs(ff.h[0, 1, 2]) > 0.1
        assert abs(np.sin(th[0] + th[1] - 2 * th[2])) < 1e-8

    def test_flat_torus_vacuous(self, clifford_torus):
        jet = gauss_map(clifford_torus, np.array([0.2, -0.1]))
        spec = angle_spectrum(jet)
        ff = second_fundamental_form(jet, spec)
        rep = check_csc_identities(spec, ff)
        assert rep.entries == {}

    def test_four_index_identity_on_sphere_n4(self):
        # n = 4 turns on the four-distinct-index identity
        chart = round_sphere(4, 0.7)
        jet = gauss_map(chart, np.array([0.1, -0.2, 0.15, 0.05]))
        spec = angle_spectrum(jet)
        ff = second_fundamental_form(jet, spec)
        rep = check_csc_identities(spec, ff)
        assert "csc_quadruple_vanishing" in rep.entries
        assert rep.all_pass


class TestClassification:
    def samples(self, chart, count=5):
        rng = np.random.default_rng(17)
        return [
            angle_spectrum(gauss_map(chart, chart.box.sample(rng, margin=0.03)))
            for _ in range(count)
        ]

    def test_sphere_g1(self, sphere_half):
        assert classify_by_angles(self.samples(sphere_half)) == 1

    def test_product_g2(self, product_13):
        assert classify_by_angles(self.samples(product_13)) == 2

    def test_cartan_g3(self, tube):
        assert classify_by_angles(self.samples(tube)) == 3

    def test_nonconstant_angles_rejected(self, rotational_chart):
        with pytest.raises(VerifyError):
            classify_by_angles(self.samples(rotational_chart))

    def test_gauge_invariance(self, tube):
        rng = np.random.default_rng(23)
        specs = [
            angle_spectrum(gauss_map(tube, tube.box.sample(rng, 0.03)), StructureGauge(0.9))
            for _ in range(4)
        ]
        assert classify_by_angles(specs) == 3


class TestReconstruction:
    def test_round_trip_identity(self, sphere_half):
        jet = gauss_map(sphere_half, P3)
        spec = angle_spectrum(jet)
        rec = reconstruct_hypersurface(
            gauss_lift_field(sphere_half), sphere_half.box, spec, 0.0, 3
        )
        lam = principal_curvatures(rec, P3).lambdas
        np.testing.assert_allclose(lam, 1.0, atol=1e-8)
        # same chart up to the identity motion
        np.testing.assert_allclose(rec.embed(P3), sphere_half.embed(P3), atol=1e-12)

    @pytest.mark.parametrize("t", [0.1, 0.3])
    def test_offset_curvatures(self, sphere_half, t):
        jet = gauss_map(sphere_half, P3)
        spec = angle_spectrum(jet)
        rec = reconstruct_hypersurface(
            gauss_lift_field(sphere_half), sphere_half.box, spec, t, 3
        )
        lam = principal_curvatures(rec, P3).lambdas
        np.testing.assert_allclose(lam, 1.0 / np.tan(np.pi / 4.0 + t), atol=1e-4)

    def test_gauss_map_reproduced(self, sphere_half):
        jet = gauss_map(sphere_half, P3)
        spec = angle_spectrum(jet)
        rec = reconstruct_hypersurface(
            gauss_lift_field(sphere_half), sphere_half.box, spec, 0.3, 3
        )
        rng = np.random.default_rng(3)
        for _ in range(4):
            p = sphere_half.box.sample(rng, 0.03)
            d = quadric_distance(gauss_map(rec, p).lift, gauss_map(sphere_half, p).lift)
            assert d < 1e-6

    def test_degenerate_offset_rejected(self, sphere_half):
        jet = gauss_map(sphere_half, P3)
        spec = angle_spectrum(jet)
        with pytest.raises(VerifyError):
            reconstruct_hypersurface(
                gauss_lift_field(sphere_half), sphere_half.box, spec, -np.pi / 4.0, 3
            )

    def test_reconstruction_from_normalized_gauge(self, tube):
        # c = phi/2 + t must feed the curvature prediction
        jet = gauss_map(tube, P3)
        gauge = gauge_normalize(jet)
        spec = angle_spectrum(jet, gauge)
        t = 0.15
        rec = reconstruct_hypersurface(gauss_lift_field(tube), tube.box, spec, t, 3)
        lam = np.sort(principal_curvatures(rec, P3).lambdas)
        c = gauge.phi / 2.0 + t
        expected = np.sort(1.0 / np.tan(spec.thetas + c))
        np.testing.assert_allclose(lam, expected, atol=1e-4)
