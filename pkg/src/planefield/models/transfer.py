"""Carry a metric adapted to one plane field over to another one.

Given a metric g, a plane field xi with unit normal n, and a second plane
field eta transverse to n, declare the frame

    { P X_1,  P X_2,  n }

to be orthonormal for a new metric, where (X_1, X_2) is a g-orthonormal
frame of xi and P is the g-orthogonal projection onto eta.  The new metric
is independent of the frame choice (any two g-orthonormal frames of xi
differ by a rotation of the projected pair).  The target relation

    B~_eta(P X, P Y) = B_xi(X, Y)

is *reported*, not assumed: the report carries both the entrywise residual
against B_xi and |det B~_eta| pointwise, because the construction here is
the simplest candidate rather than a derived identity.

Everything is evaluated through first-order jets, so the new metric comes
with exact partials and its own connection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import jetalg
from ..distributions import (Distribution, FrameData, curvature_arrays,
                             distribution_frames, normal_arrays, normal_jets)
from ..errors import DegenerateDistributionError, NotSPDError, NotTransverseError
from ..expr import jet_sqrt
from ..geometry import MetricField, MetricJets

__all__ = ["TransferReport", "transfer_metric"]


@dataclass
class TransferReport:
    chart_id: str
    grid: tuple
    n_points: int
    max_form_residual: float
    mean_form_residual: float
    max_det_residual: float
    mean_det_residual: float
    min_transversality: float
    new_metric_spd: bool

    def body(self) -> dict:
        return {
            "chart": self.chart_id,
            "grid": list(self.grid),
            "n_points": self.n_points,
            "form_residual": {"max": self.max_form_residual,
                              "mean": self.mean_form_residual},
            "det_residual": {"max": self.max_det_residual,
                             "mean": self.mean_det_residual},
            "min_transversality": self.min_transversality,
            "new_metric_spd": self.new_metric_spd,
        }


def _frame_from_jets(v1: list, v2: list) -> FrameData:
    val = np.stack([jetalg.vector_values(v1), jetalg.vector_values(v2)],
                   axis=-2)
    jac = np.stack([jetalg.vector_jacobian(v1), jetalg.vector_jacobian(v2)],
                   axis=-3)
    return FrameData(val=val, jac=jac,
                     ok=np.ones(val.shape[0], dtype=bool), desc="jet-frame")


def transfer_metric(metric: MetricField, xi: Distribution, eta: Distribution,
                    grid=(8, 8, 8), margin: float = 1e-3,
                    transversality_tol: float = 1e-8) -> TransferReport:
    """Build the transferred metric on a grid and report both residuals."""
    chart = metric.chart
    pts = chart.sample_grid(grid, margin=margin).points
    mj = metric.eval(pts)
    if not np.all(mj.spd):
        i = int(np.argmax(~mj.spd))
        k = int(np.argmax(mj.minors[i] <= 0))
        raise NotSPDError(pts[:, i], k, float(mj.minors[i][k]))

    g = jetalg.jets_from_metric(mj)
    fd = distribution_frames(xi, pts)
    if not np.all(fd.ok):
        i = int(np.argmax(~fd.ok))
        raise DegenerateDistributionError(pts[:, i], "xi degenerates")
    v1 = jetalg.jets_from_components(fd.val[:, 0, :], fd.jac[:, 0, :, :])
    v2 = jetalg.jets_from_components(fd.val[:, 1, :], fd.jac[:, 1, :, :])

    # g-orthonormal frame of xi
    n1 = jet_sqrt(jetalg.dot(g, v1, v1))
    x1 = [c / n1 for c in v1]
    c12 = jetalg.dot(g, v2, x1)
    w2 = jetalg.sub(v2, jetalg.scale(c12, x1))
    n2 = jet_sqrt(jetalg.dot(g, w2, w2))
    x2 = [c / n2 for c in w2]

    n_xi = normal_jets(mj, xi, pts)
    m_eta = normal_jets(mj, eta, pts)

    trans = jetalg.dot(g, n_xi, m_eta).value
    if np.any(np.abs(trans) < transversality_tol):
        i = int(np.argmax(np.abs(trans) < transversality_tol))
        angle = float(np.arccos(np.clip(np.abs(trans[i]), 0.0, 1.0)))
        raise NotTransverseError(pts[:, i], angle)

    def project(x):
        c = jetalg.dot(g, x, m_eta)
        return jetalg.sub(x, jetalg.scale(c, m_eta))

    p1, p2 = project(x1), project(x2)

    # declare (p1, p2, n_xi) orthonormal: g~ = F^-T F^-1 for F = [p1 p2 n]
    f = [[p1[i], p2[i], n_xi[i]] for i in range(3)]
    det_f = jetalg.det3(f)
    adj = jetalg.adjugate3(f)
    finv = [[adj[r][c] / det_f for c in range(3)] for r in range(3)]
    gt = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            acc = None
            for k in range(3):
                term = finv[k][i] * finv[k][j]
                acc = term if acc is None else acc + term
            gt[i][j] = acc

    val = jetalg.matrix_values(gt)
    dval = jetalg.matrix_partials(gt)
    m1 = val[..., 0, 0]
    m2 = val[..., 0, 0] * val[..., 1, 1] - val[..., 0, 1] ** 2
    m3 = (val[..., 0, 0] * (val[..., 1, 1] * val[..., 2, 2] - val[..., 1, 2] ** 2)
          - val[..., 0, 1] * (val[..., 0, 1] * val[..., 2, 2] - val[..., 1, 2] * val[..., 0, 2])
          + val[..., 0, 2] * (val[..., 0, 1] * val[..., 1, 2] - val[..., 1, 1] * val[..., 0, 2]))
    minors = np.stack([m1, m2, m3], axis=-1)
    spd = (m1 > 0) & (m2 > 0) & (m3 > 0)
    mj_new = MetricJets(val=val, dval=dval, spd=spd, minors=minors)

    # B of xi under g in the orthonormal frame
    arrs_xi = curvature_arrays(mj, _frame_from_jets(x1, x2),
                               jetalg.vector_values(n_xi))
    # B of eta under the new metric in the projected frame
    n_eta, ok = normal_arrays(mj_new, eta, pts)
    if not np.all(ok & spd):
        i = int(np.argmax(~(ok & spd)))
        raise DegenerateDistributionError(pts[:, i], "transferred metric degenerate")
    arrs_eta = curvature_arrays(mj_new, _frame_from_jets(p1, p2), n_eta)

    form_res = np.maximum.reduce([
        np.abs(arrs_eta["b00"] - arrs_xi["b00"]),
        np.abs(arrs_eta["b01"] - arrs_xi["b01"]),
        np.abs(arrs_eta["b11"] - arrs_xi["b11"]),
    ])
    det_res = np.abs(arrs_eta["b00"] * arrs_eta["b11"] - arrs_eta["b01"] ** 2)

    return TransferReport(
        chart_id=chart.chart_id,
        grid=tuple(grid),
        n_points=int(pts.shape[1]),
        max_form_residual=float(np.max(form_res)),
        mean_form_residual=float(np.mean(form_res)),
        max_det_residual=float(np.max(det_res)),
        mean_det_residual=float(np.mean(det_res)),
        min_transversality=float(np.min(np.abs(trans))),
        new_metric_spd=bool(np.all(spd)),
    )
