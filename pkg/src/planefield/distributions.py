"""Plane fields and their extrinsic curvature functionals.

A distribution is either the kernel of a 1-form or the span of two vector
fields.  For a tangent frame (S, T), a unit normal n and the Levi-Civita
connection, the toolkit computes

* the second fundamental form  B(S, T) = (1/2) <nabla_S T + nabla_T S, n>,
* the mean curvature           H = trace of B against the frame Gram matrix,
* the extrinsic curvature      K_e = det B / det Gram,
* the integrability residual   <[S, T], n> / |S wedge T|,
* the contact volume           alpha ^ d(alpha) as a 3-form coefficient.

B uses the *unit* normal throughout; H and K_e are Gram-weighted so any
(non-orthonormal) frame gives the same numbers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import jetalg
from .errors import (ConfigError, DegenerateDistributionError,
                     NotSPDError)
from .expr import jet_sqrt
from .geometry import (LEVI, MetricField, MetricJets, OneForm,
                       VectorField, chunked_eval, christoffel_raw,
                       d_oneform_raw, divergence_raw, pairwise_sum, wedge3)

__all__ = [
    "Distribution", "FrameData", "CurvatureReport",
    "tangent_frame", "normal_field", "second_fundamental_form",
    "mean_curvature", "extrinsic_curvature", "frobenius_residual",
    "contact_volume", "classify", "integral_mean_curvature",
    "curvature_arrays", "distribution_frames", "normal_arrays",
]

_DEGENERATE_REL = 1e-12


@dataclass
class Distribution:
    """Plane field given as ker(alpha) or span(S, T).

    ``co_orientation`` fixes the sign of the unit normal (kernel case:
    the g-dual of alpha times the sign; span case: the normal making the
    frame positively oriented, times the sign).
    """

    kind: str
    alpha: Optional[OneForm] = None
    span_fields: Optional[tuple] = None
    co_orientation: int = 1
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("kernel", "span"):
            raise ConfigError(f"unknown distribution kind {self.kind!r}")
        if self.kind == "kernel" and self.alpha is None:
            raise ConfigError("kernel distribution needs a 1-form")
        if self.kind == "span" and (self.span_fields is None
                                    or len(self.span_fields) != 2):
            raise ConfigError("span distribution needs two vector fields")
        if self.co_orientation not in (-1, 1):
            raise ConfigError("co_orientation must be +1 or -1")

    @classmethod
    def kernel(cls, alpha: OneForm, co_orientation: int = 1, label: str = ""):
        return cls("kernel", alpha=alpha, co_orientation=co_orientation,
                   label=label)

    @classmethod
    def span(cls, s: VectorField, t: VectorField, co_orientation: int = 1,
             label: str = ""):
        return cls("span", span_fields=(s, t), co_orientation=co_orientation,
                   label=label)

    def flipped(self) -> "Distribution":
        return Distribution(self.kind, alpha=self.alpha,
                            span_fields=self.span_fields,
                            co_orientation=-self.co_orientation,
                            label=self.label)


@dataclass
class FrameData:
    """Evaluated tangent frame on a point batch."""

    val: np.ndarray    # (N, 2, 3)
    jac: np.ndarray    # (N, 2, 3, 3); [a, i, k] = d_i E_a^k
    ok: np.ndarray     # (N,) frame well-defined here
    desc: str


_COMPLEMENT = ((1, 2), (0, 2), (0, 1))


def _kernel_frame(aval: np.ndarray, ajac: np.ndarray) -> FrameData:
    """Two g-independent kernel vectors from the coordinate planes with the
    largest form component: for m = argmax |alpha_i| and the remaining
    indices j, the vector alpha_m e_j - alpha_j e_m annihilates alpha."""
    n = aval.shape[0]
    val = np.zeros((n, 2, 3))
    jac = np.zeros((n, 2, 3, 3))
    idx = np.argmax(np.abs(aval), axis=-1)
    am = np.take_along_axis(aval, idx[:, None], axis=-1)[:, 0]
    ok = np.abs(am) > 0.0
    for m in range(3):
        mask = idx == m
        if not np.any(mask):
            continue
        j1, j2 = _COMPLEMENT[m]
        for a, j in ((0, j1), (1, j2)):
            val[mask, a, j] = aval[mask, m]
            val[mask, a, m] = -aval[mask, j]
            jac[mask, a, :, j] = ajac[mask, :, m]
            jac[mask, a, :, m] = -ajac[mask, :, j]
    return FrameData(val=val, jac=jac, ok=ok, desc="kernel-coordinate-planes")


def distribution_frames(dist: Distribution, points: np.ndarray,
                        frame: Optional[tuple] = None) -> FrameData:
    """Tangent frame (values + Jacobians) at a flat ``(3, N)`` batch.

    ``frame`` optionally overrides the derived frame with two explicit
    vector fields (they are trusted to span the plane; classify checks
    Gram degeneracy downstream either way).
    """
    if frame is not None:
        sval, sjac = frame[0].eval(points)
        tval, tjac = frame[1].eval(points)
        val = np.stack([sval, tval], axis=-2)
        jac = np.stack([sjac, tjac], axis=-3)
        return FrameData(val=val, jac=jac,
                         ok=np.ones(points.shape[1], dtype=bool),
                         desc="explicit")
    if dist.kind == "kernel":
        aval, ajac = dist.alpha.eval(points)
        return _kernel_frame(aval, ajac)
    sval, sjac = dist.span_fields[0].eval(points)
    tval, tjac = dist.span_fields[1].eval(points)
    val = np.stack([sval, tval], axis=-2)
    jac = np.stack([sjac, tjac], axis=-3)
    return FrameData(val=val, jac=jac,
                     ok=np.ones(points.shape[1], dtype=bool), desc="span")


def _annihilator(dist: Distribution, points: np.ndarray) -> tuple:
    """Covector (values, Jacobian) whose kernel is the plane: alpha itself,
    or eps_ijk S^j T^k for a span."""
    if dist.kind == "kernel":
        return dist.alpha.eval(points)
    sval, sjac = dist.span_fields[0].eval(points)
    tval, tjac = dist.span_fields[1].eval(points)
    bval = np.einsum("ljk,...j,...k->...l", LEVI, sval, tval)
    bjac = (np.einsum("ljk,...ij,...k->...il", LEVI, sjac, tval)
            + np.einsum("ljk,...j,...ik->...il", LEVI, sval, tjac))
    return bval, bjac


def normal_arrays(mj: MetricJets, dist: Distribution,
                  points: np.ndarray) -> tuple:
    """Unit normal values (N, 3) and a validity mask."""
    aval, _ = _annihilator(dist, points)
    raised = np.einsum("...kl,...l->...k", mj.inv(), aval)
    norm2 = np.einsum("...k,...k->...", aval, raised)
    ok = mj.spd & (norm2 > 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        nval = dist.co_orientation * raised / np.sqrt(norm2)[..., None]
    return nval, ok


def normal_jets(mj: MetricJets, dist: Distribution,
                points: np.ndarray) -> list:
    """Unit normal as a jet-vector (exact first partials); used for
    divergence cross-checks.  n = adj(g) a / sqrt(det g * (a adj(g) a))."""
    aval, ajac = _annihilator(dist, points)
    a = jetalg.jets_from_components(aval, ajac)
    g = jetalg.jets_from_metric(mj)
    adj = jetalg.adjugate3(g)
    det = jetalg.det3(g)
    w = jetalg.matvec(adj, a)
    denom = jet_sqrt(det * jetalg.raw_dot(a, w))
    return [float(dist.co_orientation) * c / denom for c in w]


def curvature_arrays(mj: MetricJets, fd: FrameData, nval: np.ndarray) -> dict:
    """All pointwise curvature quantities for a frame and unit normal."""
    gamma = christoffel_raw(mj)
    e0, e1 = fd.val[..., 0, :], fd.val[..., 1, :]
    j0, j1 = fd.jac[..., 0, :, :], fd.jac[..., 1, :, :]

    def cov(xv, yv, yj):
        return (np.einsum("...i,...ik->...k", xv, yj)
                + np.einsum("...kij,...i,...j->...k", gamma, xv, yv))

    def gdot(u, v):
        return np.einsum("...ij,...i,...j->...", mj.val, u, v)

    c00 = cov(e0, e0, j0)
    c01 = cov(e0, e1, j1)
    c10 = cov(e1, e0, j0)
    c11 = cov(e1, e1, j1)
    b00 = gdot(c00, nval)
    b01 = 0.5 * (gdot(c01, nval) + gdot(c10, nval))
    b11 = gdot(c11, nval)

    gram00 = gdot(e0, e0)
    gram01 = gdot(e0, e1)
    gram11 = gdot(e1, e1)
    det_gram = gram00 * gram11 - gram01 ** 2
    scale = gram00 * gram11
    ok = fd.ok & mj.spd & (det_gram > _DEGENERATE_REL * np.maximum(scale, 1e-300))

    bracket = (np.einsum("...i,...ik->...k", e0, j1)
               - np.einsum("...i,...ik->...k", e1, j0))
    with np.errstate(invalid="ignore", divide="ignore"):
        h = (b00 * gram11 + b11 * gram00 - 2.0 * b01 * gram01) / det_gram
        k_e = (b00 * b11 - b01 ** 2) / det_gram
        frob = gdot(bracket, nval) / np.sqrt(det_gram)
    b_norm = np.sqrt(b00 ** 2 + 2.0 * b01 ** 2 + b11 ** 2)
    return {
        "b00": b00, "b01": b01, "b11": b11,
        "gram00": gram00, "gram01": gram01, "gram11": gram11,
        "det_gram": det_gram, "h": h, "k_e": k_e,
        "frobenius_residual": frob, "b_norm": b_norm, "ok": ok,
    }


def _contact_volume_arrays(dist: Distribution, points: np.ndarray) -> np.ndarray:
    aval, ajac = _annihilator(dist, points)
    return wedge3(aval, d_oneform_raw(ajac))


# ---------------------------------------------------------------------------
# single-point operations (spec surface)


def _single(points) -> tuple:
    p = np.asarray(points, dtype=float)
    if p.ndim == 1:
        return p.reshape(3, 1), True
    return p, False


def tangent_frame(metric: MetricField, dist: Distribution, point,
                  frame: Optional[tuple] = None) -> tuple:
    """Two vectors spanning the plane at a point."""
    p, squeeze = _single(point)
    fd = distribution_frames(dist, p, frame)
    if not np.all(fd.ok):
        raise DegenerateDistributionError(p[:, 0], "vanishing defining form")
    mj = metric.eval(p)
    e0, e1 = fd.val[..., 0, :], fd.val[..., 1, :]
    g00 = mj.dot(e0, e0)
    g01 = mj.dot(e0, e1)
    g11 = mj.dot(e1, e1)
    det_gram = g00 * g11 - g01 ** 2
    if np.any(det_gram <= _DEGENERATE_REL * np.maximum(g00 * g11, 1e-300)):
        raise DegenerateDistributionError(p[:, 0], "frame Gram degenerate")
    return (e0[0], e1[0]) if squeeze else (e0, e1)


def normal_field(metric: MetricField, dist: Distribution, point) -> np.ndarray:
    """Unit normal at a point, signed by the co-orientation."""
    p, squeeze = _single(point)
    mj = metric.eval(p)
    if not np.all(mj.spd):
        k = int(np.argmax(mj.minors[0] <= 0))
        raise NotSPDError(p[:, 0], k, float(mj.minors[0][k]))
    nval, ok = normal_arrays(mj, dist, p)
    if not np.all(ok):
        raise DegenerateDistributionError(p[:, 0], "vanishing defining form")
    return nval[0] if squeeze else nval


def _point_arrays(metric, dist, point, frame=None) -> dict:
    p, squeeze = _single(point)
    mj = metric.eval(p)
    if not np.all(mj.spd):
        k = int(np.argmax(mj.minors[0] <= 0))
        raise NotSPDError(p[:, 0], k, float(mj.minors[0][k]))
    fd = distribution_frames(dist, p, frame)
    nval, nok = normal_arrays(mj, dist, p)
    arrs = curvature_arrays(mj, fd, nval)
    if not np.all(arrs["ok"] & nok):
        raise DegenerateDistributionError(p[:, 0], "degenerate plane field")
    arrs["_squeeze"] = squeeze
    return arrs


def second_fundamental_form(metric: MetricField, dist: Distribution, point,
                            frame: Optional[tuple] = None) -> np.ndarray:
    """Symmetric 2x2 matrix of B in the (derived or explicit) frame."""
    a = _point_arrays(metric, dist, point, frame)
    b = np.stack([np.stack([a["b00"], a["b01"]], axis=-1),
                  np.stack([a["b01"], a["b11"]], axis=-1)], axis=-2)
    return b[0] if a["_squeeze"] else b


def mean_curvature(metric: MetricField, dist: Distribution, point,
                   frame: Optional[tuple] = None):
    a = _point_arrays(metric, dist, point, frame)
    return float(a["h"][0]) if a["_squeeze"] else a["h"]


def extrinsic_curvature(metric: MetricField, dist: Distribution, point,
                        frame: Optional[tuple] = None):
    a = _point_arrays(metric, dist, point, frame)
    return float(a["k_e"][0]) if a["_squeeze"] else a["k_e"]


def frobenius_residual(metric: MetricField, dist: Distribution, point,
                       frame: Optional[tuple] = None):
    a = _point_arrays(metric, dist, point, frame)
    out = a["frobenius_residual"]
    return float(out[0]) if a["_squeeze"] else out


def contact_volume(alpha: OneForm, point):
    """alpha ^ d(alpha) against the chart volume element dx1^dx2^dx3."""
    p, squeeze = _single(point)
    aval, ajac = alpha.eval(p)
    out = wedge3(aval, d_oneform_raw(ajac))
    return float(out[0]) if squeeze else out


# ---------------------------------------------------------------------------
# grid classification


@dataclass
class CurvatureReport:
    """Grid sweep of the curvature functionals plus the sign classification."""

    chart_id: str
    grid: tuple
    tol: float
    frame_desc: str
    classification: str
    aggregates: dict
    worst_points: list
    errors: list
    n_points: int
    n_valid: int
    per_point: Optional[dict] = field(default=None, repr=False)
    points: Optional[np.ndarray] = field(default=None, repr=False)

    def body(self) -> dict:
        """Deterministic JSON-safe payload (no timings)."""
        return {
            "chart": self.chart_id,
            "grid": list(self.grid),
            "tol": self.tol,
            "frame": self.frame_desc,
            "classification": self.classification,
            "aggregates": self.aggregates,
            "worst_points": self.worst_points,
            "errors": self.errors,
            "n_points": self.n_points,
            "n_valid": self.n_valid,
        }

    def write_csv(self, path):
        if self.per_point is None or self.points is None:
            raise ConfigError("classify(..., keep_points=True) required for CSV")
        cols = ["b00", "b01", "b11", "gram00", "gram01", "gram11",
                "h", "k_e", "frobenius_residual", "contact_volume"]
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(["p1", "p2", "p3"] + cols) + "\n")
            for i in range(self.n_points):
                row = [repr(float(self.points[a, i])) for a in range(3)]
                row += [repr(float(self.per_point[c][i])) for c in cols]
                fh.write(",".join(row) + "\n")


def _classification(k_min: float, k_max: float, tol: float) -> str:
    if max(abs(k_min), abs(k_max)) <= tol:
        return "parabolic"
    if k_min >= tol:
        return "elliptic"
    if k_max <= -tol:
        return "hyperbolic"
    return "mixed"


def _agg(values: np.ndarray) -> dict:
    return {
        "min": float(np.min(values)),
        "max": float(np.max(values)),
        "mean": float(pairwise_sum(values) / values.size),
    }


def classify(metric: MetricField, dist: Distribution, grid=(16, 16, 16),
             tol: float = 1e-8, jobs: int = 1, margin: float = 1e-3,
             frame: Optional[tuple] = None, keep_points: bool = False
             ) -> CurvatureReport:
    """Sweep the chart grid and classify the plane field by the sign of its
    extrinsic curvature (|K_e| <= tol everywhere -> parabolic, K_e >= tol
    -> elliptic, K_e <= -tol -> hyperbolic, anything else -> mixed).

    Per-point failures (non-SPD metric, degenerate frame) are collected
    into the report instead of aborting the sweep.
    """
    if tol <= 0:
        raise ConfigError(f"tolerance must be positive, got {tol}")
    chart = metric.chart
    sample = chart.sample_grid(grid, margin=margin)

    def kernel(pts):
        mj = metric.eval(pts)
        fd = distribution_frames(dist, pts, frame)
        nval, nok = normal_arrays(mj, dist, pts)
        arrs = curvature_arrays(mj, fd, nval)
        arrs["ok"] &= nok
        arrs["spd"] = mj.spd
        arrs["contact_volume"] = _contact_volume_arrays(dist, pts)
        return arrs

    arrs = chunked_eval(kernel, sample.points, jobs)
    ok = arrs.pop("ok")
    spd = arrs.pop("spd")
    n_points = sample.points.shape[1]
    n_valid = int(np.count_nonzero(ok))

    errors = []
    bad = np.nonzero(~ok)[0]
    for i in bad[:32]:
        reason = "not-spd" if not spd[i] else "degenerate-frame"
        errors.append({"point": [float(sample.points[a, i]) for a in range(3)],
                       "reason": reason})
    if bad.size > 32:
        errors.append({"point": None,
                       "reason": f"... {bad.size - 32} more invalid points"})

    fields = ["k_e", "h", "frobenius_residual", "contact_volume", "b_norm"]
    if n_valid == 0:
        aggregates = {}
        classification = "undefined"
        worst = []
    else:
        aggregates = {name: _agg(arrs[name][ok]) for name in fields}
        classification = _classification(aggregates["k_e"]["min"],
                                         aggregates["k_e"]["max"], tol)
        order = np.lexsort((np.arange(n_points)[ok],
                            -np.abs(arrs["k_e"][ok])))
        valid_idx = np.nonzero(ok)[0][order][:10]
        worst = [{
            "point": [float(sample.points[a, i]) for a in range(3)],
            "k_e": float(arrs["k_e"][i]),
            "h": float(arrs["h"][i]),
            "b_norm": float(arrs["b_norm"][i]),
        } for i in valid_idx]

    frame_desc = ("explicit" if frame is not None
                  else ("span" if dist.kind == "span"
                        else "kernel-coordinate-planes"))
    report = CurvatureReport(
        chart_id=chart.chart_id, grid=tuple(grid), tol=tol,
        frame_desc=frame_desc, classification=classification,
        aggregates=aggregates, worst_points=worst, errors=errors,
        n_points=n_points, n_valid=n_valid,
        per_point=arrs if keep_points else None,
        points=sample.points if keep_points else None)
    return report


def integral_mean_curvature(metric: MetricField, dist: Distribution,
                            grid=(32, 32, 32), jobs: int = 1,
                            defect: bool = True) -> dict:
    """Quadrature of H over a fully periodic chart, plus the worst pointwise
    gap between H and the divergence route -div(n)."""
    chart = metric.chart
    if not all(chart.periodic):
        raise ConfigError("integral of H requires a fully periodic chart")
    sample = chart.quadrature_grid(grid)

    def kernel(pts):
        mj = metric.eval(pts)
        if not np.all(mj.spd):
            i = int(np.argmax(~mj.spd))
            k = int(np.argmax(mj.minors[i] <= 0))
            raise NotSPDError(pts[:, i], k, float(mj.minors[i][k]))
        fd = distribution_frames(dist, pts)
        nval, nok = normal_arrays(mj, dist, pts)
        arrs = curvature_arrays(mj, fd, nval)
        if not np.all(arrs["ok"] & nok):
            i = int(np.argmax(~(arrs["ok"] & nok)))
            raise DegenerateDistributionError(pts[:, i])
        out = {"weighted_h": arrs["h"] * np.sqrt(mj.det())}
        if defect:
            njets = normal_jets(mj, dist, pts)
            div_n = divergence_raw(mj, jetalg.vector_values(njets),
                                   jetalg.vector_jacobian(njets))
            out["defect"] = np.abs(arrs["h"] + div_n)
        return out

    arrs = chunked_eval(kernel, sample.points, jobs)
    result = {
        "chart": chart.chart_id,
        "grid": list(grid),
        "integral_h": float(pairwise_sum(arrs["weighted_h"]) * sample.cell_volume),
        "n_points": sample.points.shape[1],
    }
    if defect:
        result["max_pointwise_defect"] = float(np.max(arrs["defect"]))
    return result
