import math

import numpy as np
import pytest

from planefield.errors import ConfigError, NotSPDError, SingularSampleError
from planefield.geometry import (Chart, MetricField, OneForm, SingularLocus,
                                 VectorField, christoffel, chunked_eval,
                                 covariant_derivative, d_oneform, divergence,
                                 integrate_scalar, metric_at, pairwise_sum,
                                 wedge3)

EUCLID = ("1", "0", "0", "1", "0", "1")


def box_chart():
    return Chart(("x", "y", "z"), ((-1, 1), (-1, 1), (-1, 1)),
                 (False, False, False))


def torus_chart():
    return Chart(("x", "y", "z"), ((0, 1), (0, 1), (0, 1)),
                 (True, True, True))


# ---------------------------------------------------------------------------
# charts and grids


def test_chart_rejects_empty_interval():
    with pytest.raises(ConfigError):
        Chart(("x", "y", "z"), ((1, 1), (0, 1), (0, 1)), (False,) * 3)


def test_chart_rejects_duplicate_names():
    with pytest.raises(ConfigError):
        Chart(("x", "x", "z"), ((0, 1),) * 3, (False,) * 3)


def test_sample_grid_avoids_singular_locus(polar_chart):
    grid = polar_chart.sample_grid((16, 4, 4), margin=1e-3)
    assert np.all(grid.points[0] >= 1e-3)


def test_quadrature_grid_spans_full_domain(polar_chart):
    grid = polar_chart.quadrature_grid((10, 4, 4))
    h = 2.0 / 10
    assert grid.points[0].min() == pytest.approx(h / 2)
    assert grid.cell_volume == pytest.approx(h * (2 * np.pi / 4) * (1.0 / 4))


def test_quadrature_grid_refuses_interior_locus_hit():
    chart = Chart(("x", "y", "z"), ((0, 1),) * 3, (True,) * 3,
                  singular_loci=(SingularLocus("x", 0.5),))
    with pytest.raises(SingularSampleError):
        chart.quadrature_grid((1, 4, 4))   # lone midpoint lands on 0.5


def test_random_points_respect_margin(polar_chart):
    pts = polar_chart.random_points(256, seed=9, margin=1e-3)
    assert np.all(pts[0] >= 1e-3)
    again = polar_chart.random_points(256, seed=9, margin=1e-3)
    assert np.array_equal(pts, again)


# ---------------------------------------------------------------------------
# metric evaluation


def test_metric_at_identity():
    g = MetricField.from_strings(box_chart(), EUCLID)
    val, dval = metric_at(g, np.array([0.3, -0.2, 0.9]))
    assert np.array_equal(val, np.eye(3))
    assert np.all(dval == 0)


def test_metric_at_polar(polar_metric):
    val, _ = metric_at(polar_metric, np.array([0.2, 1.0, 0.5]))
    assert np.allclose(np.diag(val), [1.0, 0.04, 1.0])


def test_metric_at_reeb_outer_region_is_flat(reeb):
    val, _ = metric_at(reeb.metric, np.array([0.5, 0.0, 0.0]))
    assert np.allclose(val, np.eye(3), atol=1e-15)


def test_metric_not_spd_raises():
    g = MetricField.from_strings(box_chart(),
                                 ("-1", "0", "0", "1", "0", "1"))
    with pytest.raises(NotSPDError) as err:
        metric_at(g, np.zeros(3))
    assert err.value.minor_index == 0


def test_metric_batch_flags_invalid_points():
    chart = Chart(("r", "y", "z"), ((0.1, 2.0), (0, 1), (0, 1)),
                  (False, True, True))
    g = MetricField.from_strings(chart, ("r - 1", "0", "0", "1", "0", "1"))
    pts = np.stack([np.linspace(0.2, 1.8, 9), np.zeros(9), np.zeros(9)])
    mj = g.eval(pts)
    assert np.array_equal(mj.spd, pts[0] > 1.0)


# ---------------------------------------------------------------------------
# connection


def test_christoffel_flat_is_zero():
    g = MetricField.from_strings(box_chart(), EUCLID)
    gamma = christoffel(g, np.array([0.1, 0.2, 0.3]))
    assert np.all(gamma == 0)


def test_christoffel_constant_metric_is_zero():
    g = MetricField.from_strings(box_chart(),
                                 ("2", "0.3", "0.1", "1.5", "0.2", "1.1"))
    gamma = christoffel(g, np.array([0.4, -0.5, 0.6]))
    assert np.all(gamma == 0)


def test_christoffel_polar_values(polar_metric):
    gamma = christoffel(polar_metric, np.array([0.2, 0.7, 0.1]))
    assert gamma[0, 1, 1] == pytest.approx(-0.2, rel=1e-14)
    assert gamma[1, 0, 1] == pytest.approx(5.0, rel=1e-14)
    assert gamma[1, 1, 0] == pytest.approx(5.0, rel=1e-14)
    mask = np.ones((3, 3, 3), dtype=bool)
    mask[0, 1, 1] = mask[1, 0, 1] = mask[1, 1, 0] = False
    assert np.allclose(gamma[mask], 0.0, atol=1e-14)


def test_christoffel_symmetric_in_lower_indices():
    chart = box_chart()
    g = MetricField.from_strings(chart, ("2 + sin(x)^2", "0.2*x*y", "0",
                                         "1.5 + 0.3*cos(z)", "0.1*y", "1"))
    rng = np.random.default_rng(4)
    pts = rng.uniform(-0.9, 0.9, size=(3, 20))
    gamma = christoffel(g, pts)
    assert np.allclose(gamma, np.swapaxes(gamma, -2, -1), atol=1e-13)


def test_covariant_derivative_flat():
    chart = box_chart()
    g = MetricField.from_strings(chart, EUCLID)
    x = VectorField(chart, ("1", "0", "0"))
    y = VectorField(chart, ("0", "1", "0"))
    out = covariant_derivative(g, x, y, np.array([0.1, 0.2, 0.3]))
    assert np.all(out == 0)


def test_covariant_derivative_polar_circle(polar_chart, polar_metric):
    dphi = VectorField(polar_chart, ("0", "1", "0"))
    out = covariant_derivative(polar_metric, dphi, dphi,
                               np.array([0.7, 0.3, 0.1]))
    assert np.allclose(out, [-0.7, 0.0, 0.0], atol=1e-14)


def test_covariant_derivative_ignores_flat_directions(polar_chart, polar_metric):
    dz = VectorField(polar_chart, ("0", "0", "1"))
    y = VectorField(polar_chart, ("sin(r)", "r^2", "0"))
    out = covariant_derivative(polar_metric, dz, y, np.array([0.7, 0.3, 0.1]))
    assert np.allclose(out, 0.0, atol=1e-14)


def test_metric_compatibility_of_connection():
    # d_k g(X, Y) = g(nabla_k X, Y) + g(X, nabla_k Y) at random points
    chart = box_chart()
    g = MetricField.from_strings(chart, ("2 + 0.5*sin(x)^2", "0.2*sin(y)", "0",
                                         "1.5 + 0.3*cos(z)^2", "0.1*sin(x)", "1.2"))
    x = VectorField(chart, ("sin(y)", "cos(z)", "x^2"))
    y = VectorField(chart, ("exp(0.3*x)", "y", "sin(z)"))
    rng = np.random.default_rng(11)
    pts = rng.uniform(-0.9, 0.9, size=(3, 30))

    mj = g.eval(pts)
    gamma = christoffel(g, pts)
    xv, xj = x.eval(pts)
    yv, yj = y.eval(pts)
    # left side assembled from exact jets of the entries and components
    lhs = (np.einsum("...kij,...i,...j->...k", mj.dval, xv, yv)
           + np.einsum("...ij,...ki,...j->...k", mj.val, xj, yv)
           + np.einsum("...ij,...i,...kj->...k", mj.val, xv, yj))
    basis = np.eye(3)
    rhs = np.zeros_like(lhs)
    for k in range(3):
        ek = np.broadcast_to(basis[k], xv.shape)
        zero_jac = np.zeros(xv.shape + (3,))
        from planefield.geometry import covariant_derivative_raw
        dx = covariant_derivative_raw(gamma, ek, zero_jac, xv, xj)
        dy = covariant_derivative_raw(gamma, ek, zero_jac, yv, yj)
        rhs[..., k] = (np.einsum("...ij,...i,...j->...", mj.val, dx, yv)
                       + np.einsum("...ij,...i,...j->...", mj.val, xv, dy))
    assert np.max(np.abs(lhs - rhs)) < 1e-9


# ---------------------------------------------------------------------------
# exterior calculus


def test_d_of_closed_form_vanishes():
    chart = box_chart()
    alpha = OneForm(chart, ("0", "0", "1"))
    assert np.all(d_oneform(alpha, np.array([0.1, 0.2, 0.3])) == 0)


def test_d_of_x_dy():
    chart = box_chart()
    alpha = OneForm(chart, ("0", "x", "0"))
    da = d_oneform(alpha, np.array([0.5, -0.3, 0.2]))
    expected = np.zeros((3, 3))
    expected[0, 1], expected[1, 0] = 1.0, -1.0
    assert np.array_equal(da, expected)


def test_d_of_interpolating_form(reeb):
    from planefield.expr import smoothstep_deriv
    da = d_oneform(reeb.form(), np.array([0.5, 0.0, 0.0]))
    fp = smoothstep_deriv(1 / 3, 2 / 3, 0.5)
    assert da[0, 2] == pytest.approx(-fp, rel=1e-13)
    assert da[2, 0] == pytest.approx(fp, rel=1e-13)


def test_wedge3_normalization():
    omega = np.zeros((3, 3))
    omega[1, 2], omega[2, 1] = 1.0, -1.0
    assert wedge3([1, 0, 0], omega) == pytest.approx(1.0)
    omega_xy = np.zeros((3, 3))
    omega_xy[0, 1], omega_xy[1, 0] = 1.0, -1.0
    assert wedge3([0, 0, 1], omega_xy) == pytest.approx(1.0)
    assert wedge3([1, 0, 0], omega_xy) == 0.0


def test_wedge3_mixed_terms():
    omega = np.zeros((3, 3))
    omega[0, 1], omega[1, 0] = 2.0, -2.0
    for p in ([0.5, 0.7, 0.1], [0.0, 0.0, 0.0]):
        x, y, _ = p
        assert wedge3([-y, x, 1.0], omega) == pytest.approx(2.0)


# ---------------------------------------------------------------------------
# divergence and quadrature


def test_divergence_flat_constant_field():
    chart = box_chart()
    g = MetricField.from_strings(chart, EUCLID)
    assert divergence(g, VectorField(chart, ("1", "0", "0")),
                      np.array([0.1, 0.2, 0.3])) == 0.0


def test_divergence_flat_linear_field():
    chart = box_chart()
    g = MetricField.from_strings(chart, EUCLID)
    assert divergence(g, VectorField(chart, ("x", "0", "0")),
                      np.array([0.1, 0.2, 0.3])) == pytest.approx(1.0)


def test_divergence_polar_radial(polar_chart, polar_metric):
    out = divergence(polar_metric, VectorField(polar_chart, ("1", "0", "0")),
                     np.array([0.2, 0.3, 0.4]))
    assert out == pytest.approx(5.0, rel=1e-13)


def test_integral_of_one_is_the_volume():
    g = MetricField.from_strings(torus_chart(), EUCLID)
    for grid in ((16, 16, 16), (10, 6, 4)):
        assert integrate_scalar(g, lambda p: np.ones(p.shape[1]), grid) \
            == pytest.approx(1.0, abs=1e-12)


def test_integral_of_full_period_sine_vanishes():
    g = MetricField.from_strings(torus_chart(), EUCLID)
    out = integrate_scalar(g, lambda p: np.sin(2 * np.pi * p[0]), (16, 16, 16))
    assert abs(out) < 1e-14


def test_integral_of_divergence_vanishes():
    chart = torus_chart()
    g = MetricField.from_strings(chart, EUCLID)
    x = VectorField(chart, ("sin(2*pi*x)", "0", "0"))
    out = integrate_scalar(g, lambda p: divergence(g, x, p), (32, 32, 32))
    assert abs(out) <= 1e-12


def test_integral_of_divergence_random_periodic_field():
    chart = torus_chart()
    g = MetricField.from_strings(chart, EUCLID)
    x = VectorField(chart, ("sin(2*pi*x + 0.3)*cos(2*pi*y)",
                            "cos(2*pi*(y + z) + 1.1)",
                            "sin(2*pi*z)*sin(2*pi*x + 0.5)"))
    out = integrate_scalar(g, lambda p: divergence(g, x, p), (64, 64, 64))
    assert abs(out) <= 1e-10


def test_integral_on_open_chart_needs_explicit_support_claim():
    g = MetricField.from_strings(box_chart(), EUCLID)
    with pytest.raises(ConfigError):
        integrate_scalar(g, lambda p: np.ones(p.shape[1]), (4, 4, 4))
    out = integrate_scalar(g, lambda p: np.ones(p.shape[1]), (4, 4, 4),
                           assume_compact_support=True)
    assert out == pytest.approx(8.0)


def test_quadrature_weight_includes_volume_element(polar_metric):
    # area of the r <= 2 disk times unit height, in polar coordinates
    out = integrate_scalar(polar_metric, lambda p: np.ones(p.shape[1]),
                           (64, 16, 4), assume_compact_support=True)
    assert out == pytest.approx(4.0 * np.pi, rel=1e-4)


# ---------------------------------------------------------------------------
# deterministic reductions


def test_pairwise_sum_matches_math_fsum():
    rng = np.random.default_rng(8)
    a = rng.uniform(-1, 1, size=10001)
    assert pairwise_sum(a) == pytest.approx(math.fsum(a), abs=1e-12)
    assert pairwise_sum([]) == 0.0


def test_chunked_eval_is_worker_count_invariant():
    g = MetricField.from_strings(torus_chart(), EUCLID)
    chart = g.chart
    x = VectorField(chart, ("exp(sin(2*pi*x))", "cos(2*pi*y)", "x*z"))
    pts = chart.quadrature_grid((8, 8, 8)).points

    def kernel(p):
        return divergence(g, x, p)

    base = chunked_eval(kernel, pts, jobs=1)
    for jobs in (2, 3, 8):
        assert np.array_equal(chunked_eval(kernel, pts, jobs=jobs), base)
