"""Families of surface metrics interpolating G -> H with degenerate speed.

For the product metric dt^2 + G_t on (surface) x [0, 1] the second
fundamental form of the slices {t = const} is -(1/2) d_t G_t, so the slice
foliation is parabolic exactly when det(d_t G_t) = 0 along the family.
``verify_metric_path`` measures that determinant (plus the end-collar and
boundary conditions) on a grid; ``rank_one_path`` builds a default family
whose t-derivative has rank at most one by construction:

* split D = H - G pointwise into its two spectral pieces mu_a u_a u_a^T,
* raise them one at a time through disjoint smoothstep time windows,
* subdivide D into D/m chunks (m doubling up to 2^8) until every
  intermediate metric stays positive definite.

At points where the eigenvalues of D collide the eigenvectors need not
vary smoothly; those points are flagged (EigenCrossing) rather than
rejected, and the determinant check simply reports them separately.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .. import expr
from ..errors import ConfigError, NonSPDPathError, NotSPDError
from ..geometry import Chart
from .base import SurfaceMetric

__all__ = ["ExprMetricPath", "RankOnePath", "rank_one_path",
           "straight_line_path", "verify_metric_path"]


def _entry_eval(nodes, points) -> tuple:
    """(G (..., 2, 2), dG/dt (..., 2, 2)) for 3 upper-triangle entries."""
    shape = points.shape[1:]
    g = np.zeros(shape + (2, 2))
    dg = np.zeros(shape + (2, 2))
    for node, (i, j) in zip(nodes, ((0, 0), (0, 1), (1, 1))):
        jet = expr.eval_jet(node, points)
        g[..., i, j] = jet.value
        dg[..., i, j] = jet.gradient[2]
        if i != j:
            g[..., j, i] = jet.value
            dg[..., j, i] = jet.gradient[2]
    return g, dg


@dataclass
class ExprMetricPath:
    """Path given directly as expressions in (u, v, t), t in [0, 1]."""

    chart: Chart
    entries: tuple            # (g11, g12, g22) over (u, v, t)
    delta0: float = 0.05
    delta1: float = 0.05
    boundary_margin: float = 0.1

    def __post_init__(self):
        parsed = []
        for e in self.entries:
            parsed.append(self.chart.parse_expr(e) if isinstance(e, str) else e)
        self.entries = tuple(parsed)
        if len(self.entries) != 3:
            raise ConfigError("metric path needs (g11, g12, g22)")

    def eval(self, points) -> tuple:
        return _entry_eval(self.entries, points)

    def crossing_mask(self, points) -> np.ndarray:
        return np.zeros(points.shape[1:], dtype=bool)


def straight_line_path(g: SurfaceMetric, h: SurfaceMetric,
                       **kwargs) -> ExprMetricPath:
    """Naive interpolation G + t (H - G); generically *not* parabolic."""
    if g.chart is not h.chart:
        raise ConfigError("both surface metrics must share one chart")
    t = expr.Coord(g.chart.coord_names[2], 2)
    entries = tuple(ge + t * (he - ge)
                    for ge, he in zip(g.entries, h.entries))
    return ExprMetricPath(g.chart, entries, **kwargs)


@dataclass
class RankOnePath:
    """Staged spectral interpolation with rank-one time derivative."""

    chart: Chart
    base_entries: tuple       # G, t-independent
    diff_entries: tuple       # H - G, t-independent
    substeps: int             # 0 means the constant path
    delta0: float = 0.05
    delta1: float = 0.05
    boundary_margin: float = 0.1
    crossing_tol: float = 1e-8
    _cuts: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.substeps:
            self._cuts = np.linspace(self.delta0, 1.0 - self.delta1,
                                     2 * self.substeps + 1)

    @property
    def stages(self) -> int:
        return 2 * self.substeps

    def _spectral(self, points) -> tuple:
        gb, _ = _entry_eval(self.base_entries, points)
        d, _ = _entry_eval(self.diff_entries, points)
        mu, u = np.linalg.eigh(d)
        return gb, mu, u

    def _time_weights(self, t: np.ndarray) -> tuple:
        """Accumulated smoothstep weight and speed per eigen-slot."""
        coef = np.zeros((2,) + t.shape)
        dcoef = np.zeros((2,) + t.shape)
        inv_m = 1.0 / self.substeps
        for q in range(self.stages):
            lo, hi = self._cuts[q], self._cuts[q + 1]
            w = (t - lo) / (hi - lo)
            coef[q % 2] += expr._transition(w) * inv_m
            dcoef[q % 2] += expr._transition_d1(w) / (hi - lo) * inv_m
        return coef, dcoef

    def eval(self, points) -> tuple:
        points = np.asarray(points, dtype=float)
        if self.substeps == 0:
            gb, _ = _entry_eval(self.base_entries, points)
            return gb, np.zeros_like(gb)
        gb, mu, u = self._spectral(points)
        coef, dcoef = self._time_weights(points[2])
        proj = np.einsum("...ia,...ja->...aij", u, u)
        g = gb + np.einsum("a...,...a,...aij->...ij",
                           coef, mu, proj)
        dg = np.einsum("a...,...a,...aij->...ij", dcoef, mu, proj)
        return g, dg

    def crossing_mask(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if self.substeps == 0:
            return np.zeros(points.shape[1:], dtype=bool)
        d, _ = _entry_eval(self.diff_entries, points)
        mu = np.linalg.eigvalsh(d)
        return np.abs(mu[..., 1] - mu[..., 0]) < self.crossing_tol


def _spd_failure(path, grid) -> Optional[tuple]:
    """First (t, p) where a path metric leaves the SPD cone, or None."""
    nu, nv, nt = grid
    upts, _ = path.chart.axis_points(0, nu, margin=1e-6)
    vpts, _ = path.chart.axis_points(1, nv, margin=1e-6)
    tline = np.linspace(0.0, 1.0, nt)
    mu, mv, mt = np.meshgrid(upts, vpts, tline, indexing="ij")
    pts = np.stack([mu.reshape(-1), mv.reshape(-1), mt.reshape(-1)], axis=0)
    g, _ = path.eval(pts)
    m1 = g[..., 0, 0]
    m2 = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] ** 2
    bad = ~((m1 > 0) & (m2 > 0))
    if np.any(bad):
        i = int(np.argmax(bad))
        return float(pts[2, i]), (float(pts[0, i]), float(pts[1, i]))
    return None


def rank_one_path(g: SurfaceMetric, h: SurfaceMetric,
                  delta0: float = 0.05, delta1: float = 0.05,
                  boundary_margin: float = 0.1,
                  grid=(9, 9, 33), max_depth: int = 8,
                  crossing_tol: float = 1e-8) -> RankOnePath:
    """Default parabolic path from G to H (SPD-validated, see module doc)."""
    if g.chart is not h.chart:
        raise ConfigError("both surface metrics must share one chart")
    diff = tuple(he - ge for ge, he in zip(g.entries, h.entries))
    probe = g.chart.sample_grid((grid[0], grid[1], 1), margin=1e-6)
    dval, _ = _entry_eval(diff, probe.points)
    if float(np.max(np.abs(dval))) < 1e-14:
        return RankOnePath(g.chart, g.entries, diff, substeps=0,
                           delta0=delta0, delta1=delta1,
                           boundary_margin=boundary_margin,
                           crossing_tol=crossing_tol)
    failure = None
    for depth in range(max_depth + 1):
        path = RankOnePath(g.chart, g.entries, diff, substeps=2 ** depth,
                           delta0=delta0, delta1=delta1,
                           boundary_margin=boundary_margin,
                           crossing_tol=crossing_tol)
        nt = max(grid[2], 8 * path.substeps + 1)
        failure = _spd_failure(path, (grid[0], grid[1], nt))
        if failure is None:
            return path
    raise NonSPDPathError(failure[0], failure[1], max_depth)


def verify_metric_path(path, grid=(9, 9, 17), det_tol: float = 1e-8,
                       collar_samples: int = 5) -> dict:
    """Measure everything the gluing conditions require of a path.

    Reports the largest |det d_t G_t| away from (and at) eigen-crossing
    flags, the residuals of the two end collars (G_t frozen for t <= delta0
    and t >= 1 - delta1), the t-independence residual near non-periodic
    surface boundaries, and whether the family stays SPD (failure raises
    NotSPD with the offending (t, p)).
    """
    chart = path.chart
    sample = chart.sample_grid(grid, margin=1e-9)
    pts = sample.points
    g, dg = path.eval(pts)

    m1 = g[..., 0, 0]
    m2 = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] ** 2
    bad = ~((m1 > 0) & (m2 > 0))
    if np.any(bad):
        i = int(np.argmax(bad))
        raise NotSPDError((pts[0, i], pts[1, i], pts[2, i]), 1, float(m2[i]))

    det_dt = dg[..., 0, 0] * dg[..., 1, 1] - dg[..., 0, 1] ** 2
    flagged = path.crossing_mask(pts)
    clear = ~flagged
    max_det = float(np.max(np.abs(det_dt[clear]))) if np.any(clear) else 0.0
    max_det_flagged = (float(np.max(np.abs(det_dt[flagged])))
                       if np.any(flagged) else 0.0)

    # end collars: G_t must equal the t=0 / t=1 metric within the margins
    nu, nv = grid[0], grid[1]
    surf = chart.sample_grid((nu, nv, 1), margin=1e-9).points[:2]

    def _freeze_residual(t_ref: float, t_window: np.ndarray) -> float:
        ref_pts = np.vstack([surf, np.full((1, surf.shape[1]), t_ref)])
        g_ref, _ = path.eval(ref_pts)
        worst = 0.0
        for tc in t_window:
            probe = np.vstack([surf, np.full((1, surf.shape[1]), tc)])
            g_probe, _ = path.eval(probe)
            worst = max(worst, float(np.max(np.abs(g_probe - g_ref))))
        return worst

    collar0 = _freeze_residual(0.0, np.linspace(0.0, path.delta0, collar_samples))
    collar1 = _freeze_residual(1.0, np.linspace(1.0 - path.delta1, 1.0,
                                                collar_samples))

    # boundary neighbourhood: t-independence near non-periodic edges
    margin = path.boundary_margin
    near_edge = np.zeros(surf.shape[1], dtype=bool)
    for axis in range(2):
        if chart.periodic[axis]:
            continue
        lo, hi = chart.domain[axis]
        near_edge |= (surf[axis] - lo <= margin) | (hi - surf[axis] <= margin)
    boundary_residual = 0.0
    if np.any(near_edge):
        edge = surf[:, near_edge]
        ref_pts = np.vstack([edge, np.zeros((1, edge.shape[1]))])
        g_ref, _ = path.eval(ref_pts)
        for tc in np.linspace(0.0, 1.0, 2 * collar_samples + 1):
            probe = np.vstack([edge, np.full((1, edge.shape[1]), tc)])
            g_probe, _ = path.eval(probe)
            boundary_residual = max(boundary_residual,
                                    float(np.max(np.abs(g_probe - g_ref))))

    return {
        "grid": list(grid),
        "stages": int(getattr(path, "stages", 0)),
        "max_abs_det_dt": max_det,
        "max_abs_det_dt_flagged": max_det_flagged,
        "n_flagged": int(np.count_nonzero(flagged)),
        "n_points": int(pts.shape[1]),
        "collar0_residual": collar0,
        "collar1_residual": collar1,
        "boundary_points": int(np.count_nonzero(near_edge)),
        "boundary_residual": boundary_residual,
        "parabolic": bool(max_det <= det_tol),
        "det_tol": det_tol,
    }
