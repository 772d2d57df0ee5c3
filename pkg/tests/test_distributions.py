import numpy as np
import pytest

from planefield.catalog import (polar_cylinder_model, random_periodic_form,
                                shipped_examples, sphere_model,
                                two_pi_torus_model)
from planefield.distributions import (Distribution, classify, contact_volume,
                                      curvature_arrays, distribution_frames,
                                      extrinsic_curvature, frobenius_residual,
                                      integral_mean_curvature, mean_curvature,
                                      normal_arrays, normal_field,
                                      second_fundamental_form, tangent_frame)
from planefield.errors import ConfigError, DegenerateDistributionError
from planefield.geometry import (MetricField, OneForm, VectorField,
                                 christoffel)
from planefield.expr import Num


# ---------------------------------------------------------------------------
# frames and normals


def test_frame_of_horizontal_foliation_has_no_vertical_part(torus):
    dist = torus.distribution("vertical")
    s, t = tangent_frame(torus.metric, dist, np.array([0.3, 0.4, 0.5]))
    assert s[2] == 0.0 and t[2] == 0.0


def test_frame_annihilates_the_form(contact_box):
    chart = contact_box.chart
    alpha = OneForm(chart, ("-y", "0", "1"))   # ker(dz - y dx)
    dist = Distribution.kernel(alpha)
    rng = np.random.default_rng(2)
    pts = rng.uniform(-0.9, 0.9, size=(3, 40))
    fd = distribution_frames(dist, pts)
    aval, _ = alpha.eval(pts)
    pairing = np.einsum("...ak,...k->...a", fd.val, aval)
    assert np.max(np.abs(pairing)) < 1e-12


def test_span_frame_returned_unchanged(reeb):
    chart = reeb.chart
    x, y = reeb.frame("paper")
    dist = Distribution.span(x, y)
    p = np.array([0.5, 1.0, 2.0])
    s, t = tangent_frame(reeb.metric, dist, p)
    xv, _ = x.eval(p)
    yv, _ = y.eval(p)
    assert np.array_equal(s, xv) and np.array_equal(t, yv)


def test_degenerate_form_rejected(torus):
    chart = torus.chart
    vanishing = OneForm(chart, ("x - 0.5", "0", "0"))
    dist = Distribution.kernel(vanishing)
    with pytest.raises(DegenerateDistributionError):
        tangent_frame(torus.metric, dist, np.array([0.5, 0.1, 0.1]))


def test_normal_of_horizontal_foliation(torus):
    n = normal_field(torus.metric, torus.distribution("vertical"),
                     np.array([0.2, 0.8, 0.1]))
    assert np.allclose(n, [0, 0, 1])


def test_normal_matches_interpolating_transversal(reeb):
    from planefield.expr import smoothstep
    p = np.array([0.5, 1.0, 2.0])
    f = smoothstep(1 / 3, 2 / 3, p[0])
    expected = np.array([f, 0.0, 1 - f]) / np.sqrt(2 * f * f - 2 * f + 1)
    n = normal_field(reeb.metric, reeb.distribution(), p)
    assert np.allclose(n, expected, atol=1e-14)


def test_normal_invariant_under_form_scaling(torus):
    chart = torus.chart
    alpha = OneForm(chart, ("0.2*pi*cos(2*pi*x)", "-0.14*pi*sin(2*pi*y)", "1"))
    scaled = OneForm(chart, tuple(Num(5.0) * c for c in alpha.components))
    p = np.array([0.3, 0.6, 0.2])
    n1 = normal_field(torus.metric, Distribution.kernel(alpha), p)
    n2 = normal_field(torus.metric, Distribution.kernel(scaled), p)
    assert np.allclose(n1, n2, atol=1e-15)


def test_co_orientation_flips_normal(torus):
    dist = torus.distribution("vertical")
    p = np.array([0.1, 0.2, 0.3])
    n_plus = normal_field(torus.metric, dist, p)
    n_minus = normal_field(torus.metric, dist.flipped(), p)
    assert np.array_equal(n_plus, -n_minus)


# ---------------------------------------------------------------------------
# second fundamental form, H, K_e


def test_product_leaves_are_totally_geodesic(torus):
    b = second_fundamental_form(torus.metric, torus.distribution("vertical"),
                                np.array([0.7, 0.1, 0.4]))
    assert np.all(b == 0)


def test_cylinder_second_fundamental_form(polar_chart, polar_metric):
    dist = Distribution.kernel(OneForm(polar_chart, ("1", "0", "0")))
    p = np.array([0.7, 0.3, 0.2])
    b = second_fundamental_form(polar_metric, dist, p)
    assert np.allclose(b, [[-0.7, 0.0], [0.0, 0.0]], atol=1e-14)
    assert mean_curvature(polar_metric, dist, p) == pytest.approx(-1 / 0.7)
    assert extrinsic_curvature(polar_metric, dist, p) == pytest.approx(0.0)


def test_sphere_extrinsic_curvature_is_inverse_square_radius():
    model = sphere_model()
    for rho in (0.6, 1.0, 1.4):
        p = np.array([rho, 1.1, 0.3])
        assert extrinsic_curvature(model.metric, model.distribution(), p) \
            == pytest.approx(1.0 / rho ** 2, rel=1e-12)


def _weingarten_fd_b(metric, dist, p, h=1e-6):
    """Independent route: B(E_a, E_b) = -<nabla_{E_a} n, E_b>, with the
    derivative of the unit normal taken by central differences."""
    p = p.reshape(3, 1)
    mj = metric.eval(p)
    fd = distribution_frames(dist, p)
    nval, _ = normal_arrays(mj, dist, p)
    gamma = christoffel(metric, p)

    dn = np.zeros((3, 3))   # dn[i, k] = d_i n^k
    for i in range(3):
        shift = np.zeros((3, 1))
        shift[i, 0] = h
        n_plus, _ = normal_arrays(metric.eval(p + shift), dist, p + shift)
        n_minus, _ = normal_arrays(metric.eval(p - shift), dist, p - shift)
        dn[i] = (n_plus[0] - n_minus[0]) / (2 * h)

    e = fd.val[0]           # (2, 3)
    b = np.zeros((2, 2))
    for a in range(2):
        nabla_a_n = e[a] @ dn + np.einsum("kij,i,j->k", gamma[0], e[a], nval[0])
        for c in range(2):
            b[a, c] = -float(mj.val[0] @ e[c] @ nabla_a_n)
    return 0.5 * (b + b.T)


@pytest.mark.parametrize("builder,point", [
    (sphere_model, np.array([1.2, 1.0, 0.5])),
    (polar_cylinder_model, np.array([0.8, 0.4, 0.3])),
])
def test_b_matches_finite_difference_weingarten(builder, point):
    model = builder()
    dist = model.distribution()
    b = second_fundamental_form(model.metric, dist, point)
    b_fd = _weingarten_fd_b(model.metric, dist, point)
    assert np.max(np.abs(b - b_fd)) < 1e-6


def test_b_weingarten_on_generic_periodic_plane_field(torus):
    alpha = random_periodic_form(5)
    dist = Distribution.kernel(alpha)
    p = np.array([0.37, 0.81, 0.24])
    b = second_fundamental_form(torus.metric, dist, p)
    b_fd = _weingarten_fd_b(torus.metric, dist, p)
    assert np.max(np.abs(b - b_fd)) < 1e-6


# ---------------------------------------------------------------------------
# integrability and contact residuals


def test_foliation_brackets_stay_tangent(torus):
    res = frobenius_residual(torus.metric, torus.distribution("vertical"),
                             np.array([0.2, 0.5, 0.8]))
    assert res == 0.0


def test_graph_plane_field_residual_near_origin(contact_box):
    chart = contact_box.chart
    dist = Distribution.kernel(OneForm(chart, ("-y", "0", "1")))
    for y in (0.0, 0.3, -0.4):
        p = np.array([0.1, y, 0.2])
        res = frobenius_residual(contact_box.metric, dist, p)
        assert res == pytest.approx(-1.0 / (1 + y * y), rel=1e-12)
        assert abs(res) >= 0.5


def test_contact_volume_standard_form(contact_box):
    rng = np.random.default_rng(1)
    pts = rng.uniform(-1, 1, size=(3, 50))
    cv = contact_volume(contact_box.form("standard-contact"), pts)
    assert np.max(np.abs(cv - 2.0)) < 1e-12


def test_contact_volume_of_closed_form_vanishes(torus):
    cv = contact_volume(torus.form("vertical"), np.array([0.1, 0.2, 0.3]))
    assert cv == 0.0


def test_contact_volume_winding_form():
    model = two_pi_torus_model()
    rng = np.random.default_rng(6)
    pts = rng.uniform(0, 2 * np.pi, size=(3, 50))
    cv = contact_volume(model.form("winding-contact"), pts)
    assert np.max(np.abs(cv - (-1.0))) < 1e-12


# ---------------------------------------------------------------------------
# classification


def test_cylinder_foliation_classifies_parabolic(polar_metric):
    dist = Distribution.kernel(OneForm(polar_metric.chart, ("1", "0", "0")))
    rep = classify(polar_metric, dist, grid=(24, 8, 8))
    assert rep.classification == "parabolic"
    assert rep.n_valid == rep.n_points


def test_sphere_foliation_classifies_elliptic():
    model = sphere_model()
    rep = classify(model.metric, model.distribution(), grid=(10, 10, 10))
    assert rep.classification == "elliptic"
    assert rep.aggregates["k_e"]["min"] >= 1.0 / 1.5 ** 2 - 1e-9


def test_classification_consistent_with_aggregates():
    model = sphere_model()
    rep = classify(model.metric, model.distribution(), grid=(8, 8, 8))
    ke = rep.aggregates["k_e"]
    assert ke["min"] >= rep.tol            # elliptic per the stored minimum
    assert ke["min"] <= ke["mean"] <= ke["max"]


def test_classify_rejects_nonpositive_tolerance(torus):
    with pytest.raises(ConfigError):
        classify(torus.metric, torus.distribution("vertical"), tol=-1.0)


def test_classify_records_invalid_points_without_aborting():
    from planefield.geometry import Chart
    chart = Chart(("r", "y", "z"), ((0.1, 2.0), (0, 1), (0, 1)),
                  (False, True, True))
    g = MetricField.from_strings(chart, ("r - 1", "0", "0", "1", "0", "1"))
    dist = Distribution.kernel(OneForm(chart, ("0", "0", "1")))
    rep = classify(g, dist, grid=(8, 4, 4))
    assert rep.errors
    assert rep.n_valid < rep.n_points
    assert all(e["reason"] == "not-spd" for e in rep.errors if e["point"])


def test_worst_points_sorted_by_extrinsic_curvature():
    model = sphere_model()
    rep = classify(model.metric, model.distribution(), grid=(8, 8, 8))
    magnitudes = [abs(w["k_e"]) for w in rep.worst_points]
    assert magnitudes == sorted(magnitudes, reverse=True)
    assert len(rep.worst_points) == 10


# ---------------------------------------------------------------------------
# invariance properties


def _curvatures_in_frame(model, dist, pts, frame):
    mj = model.metric.eval(pts)
    fd = distribution_frames(dist, pts, frame)
    nval, _ = normal_arrays(mj, dist, pts)
    return curvature_arrays(mj, fd, nval)


def test_reframing_transforms_b_and_preserves_h_ke():
    model = sphere_model()
    dist = model.distribution()
    frame = (VectorField(model.chart, ("0", "1", "0")),
             VectorField(model.chart, ("0", "0", "1")))
    pts = model.chart.random_points(6, seed=3)
    base = _curvatures_in_frame(model, dist, pts, frame)
    rng = np.random.default_rng(12)
    for _ in range(25):
        a = rng.uniform(-1, 1, size=(2, 2))
        if abs(np.linalg.det(a)) < 0.3:
            continue
        s, t = frame
        sa = VectorField(model.chart, tuple(a[0, 0] * cs + a[1, 0] * ct
                                            for cs, ct in zip(s.components, t.components)))
        ta = VectorField(model.chart, tuple(a[0, 1] * cs + a[1, 1] * ct
                                            for cs, ct in zip(s.components, t.components)))
        new = _curvatures_in_frame(model, dist, pts, (sa, ta))
        assert np.allclose(new["k_e"], base["k_e"], rtol=1e-9)
        assert np.allclose(new["h"], base["h"], rtol=1e-9)
        b_old = np.stack([np.stack([base["b00"], base["b01"]], -1),
                          np.stack([base["b01"], base["b11"]], -1)], -2)
        b_new = np.stack([np.stack([new["b00"], new["b01"]], -1),
                          np.stack([new["b01"], new["b11"]], -1)], -2)
        expected = np.einsum("ca,...cd,db->...ab", a, b_old, a)
        assert np.max(np.abs(b_new - expected)) < 1e-9 * max(
            1.0, float(np.max(np.abs(expected))))


def test_co_orientation_flip_negates_b_and_h_keeps_ke():
    model = sphere_model()
    dist = model.distribution()
    p = np.array([1.1, 1.3, 0.7])
    b = second_fundamental_form(model.metric, dist, p)
    b_flip = second_fundamental_form(model.metric, dist.flipped(), p)
    assert np.allclose(b_flip, -b, atol=1e-12)
    assert mean_curvature(model.metric, dist.flipped(), p) \
        == pytest.approx(-mean_curvature(model.metric, dist, p), rel=1e-12)
    assert extrinsic_curvature(model.metric, dist.flipped(), p) \
        == pytest.approx(extrinsic_curvature(model.metric, dist, p), abs=1e-12)


def test_constant_rescaling_of_the_metric():
    model = sphere_model()
    dist = model.distribution()
    scaled = MetricField(model.chart,
                         tuple(Num(4.0) * e for e in model.metric.entries))
    pts = model.chart.random_points(10, seed=21)
    ke = extrinsic_curvature(model.metric, dist, pts)
    h = mean_curvature(model.metric, dist, pts)
    ke_scaled = extrinsic_curvature(scaled, dist, pts)
    h_scaled = mean_curvature(scaled, dist, pts)
    assert np.allclose(ke_scaled, ke / 4.0, rtol=1e-9)
    assert np.allclose(h_scaled, h / 2.0, rtol=1e-9)


def test_contact_or_integrable_dichotomy_for_shipped_forms():
    for ex in shipped_examples():
        model, dist = ex.build()
        rep = classify(model.metric, dist, grid=(10, 10, 10))
        cv = rep.aggregates["contact_volume"]
        frob = rep.aggregates["frobenius_residual"]
        min_abs_cv = min(abs(cv["min"]), abs(cv["max"]))
        if cv["min"] < 0 < cv["max"]:
            min_abs_cv = 0.0
        is_contact = min_abs_cv > 0.1
        is_integrable = max(abs(frob["min"]), abs(frob["max"])) < 1e-8
        assert is_contact != is_integrable, ex.example_id
        assert is_contact == (ex.kind == "contact"), ex.example_id


# ---------------------------------------------------------------------------
# mean curvature integral


def test_integral_h_of_flat_foliation_vanishes(torus):
    res = integral_mean_curvature(torus.metric,
                                  torus.distribution("vertical"),
                                  grid=(8, 8, 8))
    assert res["integral_h"] == 0.0
    assert res["max_pointwise_defect"] <= 1e-12


def test_integral_h_small_for_generic_periodic_plane_field(torus):
    dist = Distribution.kernel(random_periodic_form(4))
    res = integral_mean_curvature(torus.metric, dist, grid=(32, 32, 32))
    assert abs(res["integral_h"]) <= 1e-8
    assert res["max_pointwise_defect"] <= 1e-9


def test_integral_h_requires_periodic_chart(reeb):
    with pytest.raises(ConfigError):
        integral_mean_curvature(reeb.metric, reeb.distribution(), grid=(4, 4, 4))
