"""Charts, metric evaluation, connection coefficients and quadrature.

Everything here is batched: a point batch is an array of shape ``(3, N)``
(or plain ``(3,)`` for a single point) and all tensors carry the batch
shape in front of their index slots.  Index conventions:

* metric values ``g[..., i, j]``, partials ``dg[..., l, i, j] = d_l g_ij``
* vector fields ``X[..., k]`` with Jacobian ``jac[..., i, k] = d_i X^k``
* 1-forms ``a[..., k]`` with Jacobian ``jac[..., i, k] = d_i a_k``
* Christoffel symbols ``Gamma[..., k, i, j]``

Grid sums use a fixed pairwise reduction over the flattened index so
results do not depend on how work was split across threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import expr
from .errors import ConfigError, NotSPDError, SingularSampleError

__all__ = [
    "SingularLocus", "Chart", "GridSample", "MetricField", "MetricJets",
    "VectorField", "OneForm", "LEVI",
    "metric_at", "christoffel", "covariant_derivative", "d_oneform",
    "wedge3", "divergence", "divergence_raw", "integrate_scalar",
    "pairwise_sum", "chunked_eval",
]

LEVI = np.zeros((3, 3, 3))
LEVI[0, 1, 2] = LEVI[1, 2, 0] = LEVI[2, 0, 1] = 1.0
LEVI[0, 2, 1] = LEVI[2, 1, 0] = LEVI[1, 0, 2] = -1.0


def pairwise_sum(values) -> float:
    """Deterministic pairwise sum over the flattened index."""
    a = np.ascontiguousarray(np.asarray(values, dtype=float).ravel())
    if a.size == 0:
        return 0.0

    def rec(lo: int, hi: int) -> float:
        n = hi - lo
        if n <= 16:
            s = 0.0
            for i in range(lo, hi):
                s += a[i]
            return s
        mid = lo + (n >> 1)
        return rec(lo, mid) + rec(mid, hi)

    return rec(0, a.size)


def _chunk_slices(n: int, jobs: int) -> list:
    chunk = -(-n // max(1, jobs))
    return [slice(i, min(i + chunk, n)) for i in range(0, n, chunk)]


def chunked_eval(fn: Callable, points: np.ndarray, jobs: int = 1):
    """Evaluate ``fn`` over a ``(3, N)`` point batch, optionally splitting
    it across a thread pool.  ``fn`` returns an array whose leading axis is
    the batch, or a dict of such arrays; chunks are reassembled in index
    order so the result is identical for any worker count."""
    n = points.shape[1]
    if jobs <= 1 or n < 2 * jobs:
        return fn(points)
    slices = _chunk_slices(n, jobs)
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(lambda s: fn(points[:, s]), slices))
    if isinstance(parts[0], dict):
        return {k: np.concatenate([p[k] for p in parts], axis=0)
                for k in parts[0]}
    return np.concatenate(parts, axis=0)


# ---------------------------------------------------------------------------
# charts


@dataclass(frozen=True)
class SingularLocus:
    coordinate: str
    value: float
    note: str = ""


@dataclass
class Chart:
    """Named coordinates on a rectangular box, with periodicity flags and
    declared coordinate singularities that samplers must avoid."""

    coord_names: tuple
    domain: tuple
    periodic: tuple
    singular_loci: tuple = ()
    chart_id: str = "chart"

    def __post_init__(self):
        self.coord_names = tuple(self.coord_names)
        self.domain = tuple((float(lo), float(hi)) for lo, hi in self.domain)
        self.periodic = tuple(bool(p) for p in self.periodic)
        self.singular_loci = tuple(self.singular_loci)
        if len(self.coord_names) != 3 or len(set(self.coord_names)) != 3:
            raise ConfigError(f"chart needs 3 distinct coordinates, got {self.coord_names!r}")
        if len(self.domain) != 3 or len(self.periodic) != 3:
            raise ConfigError("chart needs 3 domain intervals and 3 periodicity flags")
        for name, (lo, hi) in zip(self.coord_names, self.domain):
            if not lo < hi:
                raise ConfigError(f"empty interval for {name!r}: [{lo}, {hi}]")
        for locus in self.singular_loci:
            if locus.coordinate not in self.coord_names:
                raise ConfigError(f"singular locus names unknown coordinate {locus.coordinate!r}")

    def axis(self, name: str) -> int:
        return self.coord_names.index(name)

    def parse_expr(self, text: str) -> expr.Node:
        return expr.parse(text, self.coord_names)

    def _loci_on_axis(self, i: int) -> list:
        name = self.coord_names[i]
        return [l.value for l in self.singular_loci if l.coordinate == name]

    def _axis_interval(self, i: int, margin: float) -> tuple:
        lo, hi = self.domain[i]
        for v in self._loci_on_axis(i):
            if abs(v - lo) <= margin:
                lo = v + margin
            elif abs(v - hi) <= margin:
                hi = v - margin
        if not lo < hi:
            raise ConfigError(f"margin {margin} empties axis {self.coord_names[i]!r}")
        return lo, hi

    def axis_points(self, i: int, n: int, margin: float = 0.0) -> tuple:
        """Midpoints of ``n`` equal cells on axis ``i`` (after shrinking the
        interval away from singular loci by ``margin``)."""
        if n < 1:
            raise ConfigError(f"axis needs at least 1 cell, got {n}")
        lo, hi = self._axis_interval(i, margin) if margin > 0 else self.domain[i]
        h = (hi - lo) / n
        pts = lo + (np.arange(n) + 0.5) * h
        for v in self._loci_on_axis(i):
            hit = np.abs(pts - v) < 1e-12
            if np.any(hit):
                if margin > 0:
                    pts = np.where(hit, pts + margin, pts)
                else:
                    raise SingularSampleError(self.coord_names[i], v)
        return pts, h

    def sample_grid(self, counts, margin: float = 1e-3) -> "GridSample":
        """Classification-style grid: midpoints, kept ``margin`` away from
        declared singular loci."""
        return self._grid(counts, margin)

    def quadrature_grid(self, counts) -> "GridSample":
        """Midpoint-rule grid over the full domain (no margins)."""
        return self._grid(counts, 0.0)

    def _grid(self, counts, margin: float) -> "GridSample":
        counts = tuple(int(c) for c in counts)
        if len(counts) != 3:
            raise ConfigError(f"grid needs 3 axis counts, got {counts!r}")
        axes, steps = [], []
        for i, n in enumerate(counts):
            pts, h = self.axis_points(i, n, margin)
            axes.append(pts)
            steps.append(h)
        mesh = np.meshgrid(*axes, indexing="ij")
        points = np.stack([m.reshape(-1) for m in mesh], axis=0)
        return GridSample(points=points, shape=counts,
                          cell_volume=float(np.prod(steps)),
                          axes=tuple(axes))

    def random_points(self, n: int, seed: int = 0, margin: float = 1e-3) -> np.ndarray:
        """Uniform interior sample that avoids singular loci; deterministic
        for a fixed seed."""
        rng = np.random.default_rng(seed)
        cols = []
        for i in range(3):
            lo, hi = self._axis_interval(i, margin)
            cols.append(rng.uniform(lo, hi, size=n))
        pts = np.stack(cols, axis=0)
        for i in range(3):
            for v in self._loci_on_axis(i):
                pts[i] = np.where(np.abs(pts[i] - v) < margin, v + margin, pts[i])
        return pts

    def contains(self, points: np.ndarray, atol: float = 1e-9) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        ok = np.ones(p.shape[1:], dtype=bool)
        for i, (lo, hi) in enumerate(self.domain):
            ok &= (p[i] >= lo - atol) & (p[i] <= hi + atol)
        return ok


@dataclass
class GridSample:
    points: np.ndarray      # (3, N) in C order over the axis mesh
    shape: tuple
    cell_volume: float
    axes: tuple


# ---------------------------------------------------------------------------
# fields


def _as_nodes(chart: Chart, components) -> tuple:
    out = []
    for c in components:
        out.append(chart.parse_expr(c) if isinstance(c, str) else c)
    return tuple(out)


@dataclass
class MetricField:
    """Pointwise symmetric 3x3 matrix of expressions; SPD wherever sampled."""

    chart: Chart
    entries: tuple   # 6 nodes, upper triangle row-major: g11 g12 g13 g22 g23 g33

    def __post_init__(self):
        self.entries = _as_nodes(self.chart, self.entries)
        if len(self.entries) != 6:
            raise ConfigError(f"metric needs 6 upper-triangle entries, got {len(self.entries)}")

    @classmethod
    def from_strings(cls, chart: Chart, entries) -> "MetricField":
        return cls(chart, tuple(entries))

    def eval(self, points) -> "MetricJets":
        p = np.asarray(points, dtype=float)
        shape = p.shape[1:]
        val = np.zeros(shape + (3, 3))
        dval = np.zeros(shape + (3, 3, 3))
        pairs = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]
        for node, (i, j) in zip(self.entries, pairs):
            jet = expr.eval_jet(node, p)
            val[..., i, j] = jet.value
            grad = np.moveaxis(jet.gradient, 0, -1)   # (..., l)
            dval[..., :, i, j] = grad
            if i != j:
                val[..., j, i] = jet.value
                dval[..., :, j, i] = grad
        m1 = val[..., 0, 0]
        m2 = val[..., 0, 0] * val[..., 1, 1] - val[..., 0, 1] ** 2
        m3 = _det3(val)
        minors = np.stack([m1, m2, m3], axis=-1)
        spd = (m1 > 0) & (m2 > 0) & (m3 > 0)
        return MetricJets(val=val, dval=dval, spd=spd, minors=minors)

    def matrix_at(self, point) -> tuple:
        """Single-point API: (matrix, entry gradients); raises NotSPD."""
        p = np.asarray(point, dtype=float).reshape(3)
        mj = self.eval(p)
        if not bool(mj.spd):
            k = int(np.argmax(mj.minors <= 0))
            raise NotSPDError(p, k, float(mj.minors[k]))
        return mj.val, mj.dval


def _det3(m: np.ndarray) -> np.ndarray:
    return (m[..., 0, 0] * (m[..., 1, 1] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 1])
            - m[..., 0, 1] * (m[..., 1, 0] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 0])
            + m[..., 0, 2] * (m[..., 1, 0] * m[..., 2, 1] - m[..., 1, 1] * m[..., 2, 0]))


@dataclass
class MetricJets:
    """Metric values and exact first partials on a point batch."""

    val: np.ndarray     # (..., 3, 3)
    dval: np.ndarray    # (..., l, i, j) = d_l g_ij
    spd: np.ndarray     # (...,) bool
    minors: np.ndarray  # (..., 3) leading principal minors
    _inv: np.ndarray = field(default=None, repr=False)

    def det(self) -> np.ndarray:
        return self.minors[..., 2]

    def inv(self) -> np.ndarray:
        if self._inv is None:
            eye = np.broadcast_to(np.eye(3), self.val.shape)
            safe = np.where(self.spd[..., None, None], self.val, eye)
            self._inv = np.linalg.inv(safe)
        return self._inv

    def dot(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.einsum("...ij,...i,...j->...", self.val, u, v)


@dataclass
class VectorField:
    """Contravariant components as expressions over a chart."""

    chart: Chart
    components: tuple

    def __post_init__(self):
        self.components = _as_nodes(self.chart, self.components)
        if len(self.components) != 3:
            raise ConfigError("vector field needs 3 components")

    def eval(self, points) -> tuple:
        """Returns (values ``(..., k)``, Jacobian ``(..., i, k) = d_i X^k``)."""
        p = np.asarray(points, dtype=float)
        jets = [expr.eval_jet(c, p) for c in self.components]
        val = np.stack([j.value for j in jets], axis=-1)
        jac = np.stack([np.moveaxis(j.gradient, 0, -1) for j in jets], axis=-1)
        return val, jac


class OneForm(VectorField):
    """Covariant components as expressions over a chart."""


# ---------------------------------------------------------------------------
# connection and calculus


def _metric_jets(g, points) -> MetricJets:
    if isinstance(g, MetricJets):
        return g
    return g.eval(points)


def christoffel_raw(mj: MetricJets) -> np.ndarray:
    """Gamma[..., k, i, j] from exact metric partials."""
    dg = mj.dval
    # C[..., i, j, l] = d_i g_jl + d_j g_il - d_l g_ij; dg carries (l, i, j),
    # so reading dg with indices renamed (i, j, l) is dg itself.
    c = dg + np.swapaxes(dg, -3, -2) - np.moveaxis(dg, -3, -1)
    return 0.5 * np.einsum("...kl,...ijl->...kij", mj.inv(), c)


def christoffel(g, points=None) -> np.ndarray:
    """Levi-Civita connection coefficients Gamma[..., k, i, j]."""
    mj = _metric_jets(g, points)
    return christoffel_raw(mj)


def covariant_derivative_raw(gamma: np.ndarray, xval, xjac, yval, yjac) -> np.ndarray:
    """(nabla_X Y)^k = X^i d_i Y^k + Gamma^k_ij X^i Y^j."""
    return (np.einsum("...i,...ik->...k", xval, yjac)
            + np.einsum("...kij,...i,...j->...k", gamma, xval, yval))


def covariant_derivative(g, x: VectorField, y: VectorField, points) -> np.ndarray:
    mj = _metric_jets(g, points)
    gamma = christoffel_raw(mj)
    xval, xjac = x.eval(points)
    yval, yjac = y.eval(points)
    return covariant_derivative_raw(gamma, xval, xjac, yval, yjac)


def d_oneform(alpha: OneForm, points) -> np.ndarray:
    """(d alpha)_ij = d_i a_j - d_j a_i (antisymmetric matrix of values)."""
    _, jac = alpha.eval(points)
    return jac - np.swapaxes(jac, -2, -1)


def d_oneform_raw(ajac: np.ndarray) -> np.ndarray:
    return ajac - np.swapaxes(ajac, -2, -1)


def wedge3(alpha_val, omega_val) -> np.ndarray:
    """Coefficient of dx1 ^ dx2 ^ dx3 in (1-form) ^ (2-form); normalised so
    that wedge3(dx1, dx2 ^ dx3) = 1."""
    a = np.asarray(alpha_val, dtype=float)
    w = np.asarray(omega_val, dtype=float)
    out = 0.5 * np.einsum("ijk,...i,...jk->...", LEVI, a, w)
    return float(out) if out.ndim == 0 else out


def divergence_raw(mj: MetricJets, xval: np.ndarray, xjac: np.ndarray) -> np.ndarray:
    """div X = d_i X^i + X^i * (d_i log sqrt(det g)), exactly from jets."""
    tr_jac = np.einsum("...ii->...", xjac)
    dlog = 0.5 * np.einsum("...lm,...ilm->...i", mj.inv(), mj.dval)
    return tr_jac + np.einsum("...i,...i->...", xval, dlog)


def divergence(g, x: VectorField, points) -> np.ndarray:
    mj = _metric_jets(g, points)
    xval, xjac = x.eval(points)
    out = divergence_raw(mj, xval, xjac)
    return float(out) if out.ndim == 0 else out


def metric_at(g: MetricField, point) -> tuple:
    """Spec'd single-point metric evaluation: (matrix, partials)."""
    return g.matrix_at(point)


def integrate_scalar(metric: MetricField, f: Callable, grid, jobs: int = 1,
                     assume_compact_support: bool = False) -> float:
    """Midpoint-rule quadrature of ``f * sqrt(det g)`` over the chart.

    Valid when every axis is periodic, or when the caller asserts that the
    integrand is compactly supported away from non-periodic boundaries.
    ``f`` maps a ``(3, N)`` batch to ``(N,)`` values.
    """
    chart = metric.chart
    if not all(chart.periodic) and not assume_compact_support:
        raise ConfigError(
            "integral over a non-periodic chart requires "
            "assume_compact_support=True from the caller")
    sample = chart.quadrature_grid(grid)

    def kernel(pts):
        mj = metric.eval(pts)
        det = mj.det()
        if np.any(det <= 0):
            bad = int(np.argmax(det <= 0))
            raise NotSPDError(pts[:, bad], 2, float(det[bad]))
        return np.asarray(f(pts), dtype=float) * np.sqrt(det)

    values = chunked_eval(kernel, sample.points, jobs)
    return pairwise_sum(values) * sample.cell_volume
