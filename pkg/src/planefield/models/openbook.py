"""Desk-scale open-book atlas: annulus pages, two binding circles.

Five charts cover the demo manifold: a solid-torus model around each
binding circle, a collar easing torus leaves into page leaves on each
side, and one product chart for the mapping cylinder of the annulus page
(identity monodromy).  All transition maps are affine, every piece is
flat where it meets its neighbour, and each chart's foliation classifies
parabolic on its own.

The assembly check pulls the neighbouring metric back through each
transition and measures the worst entry mismatch, plus how far the
neighbour's leaves are from being tangent to the local ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..distributions import classify, distribution_frames
from ..errors import ConfigError, OverlapMismatchError
from ..expr import eval_jet
from ..geometry import Chart, MetricField, OneForm, VectorField
from .base import Model
from .collar import collar_model
from .reeb import reeb_solid_torus

__all__ = ["Transition", "AtlasReport", "assemble_open_book_demo", "page_cylinder_model"]


@dataclass
class Transition:
    source: str
    target: str
    forward: tuple          # 3 expression nodes over the source coordinates
    overlap: tuple          # 3 (lo, hi) ranges in source coordinates


@dataclass
class AtlasReport:
    atlas_id: str
    charts: list
    overlaps: list
    max_metric_mismatch: float
    max_leaf_residual: float
    all_parabolic: bool

    def body(self) -> dict:
        return {
            "atlas": self.atlas_id,
            "charts": self.charts,
            "overlaps": self.overlaps,
            "max_metric_mismatch": self.max_metric_mismatch,
            "max_leaf_residual": self.max_leaf_residual,
            "all_parabolic": self.all_parabolic,
        }


def page_cylinder_model(length: float = 1.0) -> Model:
    """Flat product chart (rho, phi, t) for the annulus-page mapping
    cylinder; pages are the constant-phi slices."""
    chart = Chart(
        coord_names=("rho", "phi", "t"),
        domain=((0.0, length), (0.0, 2.0 * math.pi), (0.0, 2.0 * math.pi)),
        periodic=(False, True, True),
        chart_id="page-cylinder",
    )
    metric = MetricField.from_strings(chart, ("1", "0", "0", "1", "0", "1"))
    alpha = OneForm(chart, ("0", "1", "0"))
    frame = (VectorField(chart, ("1", "0", "0")),
             VectorField(chart, ("0", "0", "1")))
    return Model(model_id="page-cylinder", chart=chart, metric=metric,
                 forms={"foliation": alpha},
                 named_frames={"page": frame},
                 parameters={"length": length}, foliation="foliation")


def _overlap_grid(tr: Transition, counts) -> np.ndarray:
    axes = []
    for (lo, hi), n in zip(tr.overlap, counts):
        h = (hi - lo) / n
        axes.append(lo + (np.arange(n) + 0.5) * h)
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=0)


def check_transition(src: Model, dst: Model, tr: Transition,
                     counts=(6, 8, 8)) -> dict:
    """Pull the target metric and foliation back through the transition and
    compare against the source on the overlap."""
    pts = _overlap_grid(tr, counts)
    jets = [eval_jet(node, pts) for node in tr.forward]
    qpts = np.stack([j.value for j in jets], axis=0)
    if not np.all(dst.chart.contains(qpts)):
        raise ConfigError(
            f"transition {tr.source}->{tr.target} leaves the target domain")
    jac = np.stack([np.moveaxis(j.gradient, 0, -1) for j in jets], axis=-1)

    g_dst = dst.metric.eval(qpts).val
    pulled = np.einsum("...ik,...kl,...jl->...ij", jac, g_dst, jac)
    g_src = src.metric.eval(pts).val
    metric_mismatch = float(np.max(np.abs(pulled - g_src)))

    fd = distribution_frames(src.distribution(), pts)
    push = np.einsum("...ai,...ik->...ak", fd.val, jac)
    aval, _ = dst.form().eval(qpts)
    num = np.abs(np.einsum("...ak,...k->...a", push, aval))
    den = (np.linalg.norm(push, axis=-1)
           * np.linalg.norm(aval, axis=-1)[..., None])
    leaf_residual = float(np.max(num / den))

    return {
        "source": tr.source,
        "target": tr.target,
        "metric_mismatch": metric_mismatch,
        "leaf_residual": leaf_residual,
        "n_points": int(pts.shape[1]),
    }


def assemble_open_book_demo(eps: float = 0.05, delta: float = 0.05,
                            overlap_grid=(6, 8, 8),
                            classify_grid=(48, 8, 8),
                            tolerance: float = 1e-9,
                            class_tol: float = 1e-8,
                            jobs: int = 1) -> tuple:
    """Build the demo atlas, check all overlaps and classify every chart.

    Returns (models, transitions, report); raises OverlapMismatch if any
    pullback disagrees beyond ``tolerance`` (the report rides along on the
    exception).
    """
    if not 0 < eps <= 0.25:
        raise ConfigError("eps must lie in (0, 0.25] for the demo layout")
    length = 1.0

    binding_a = reeb_solid_torus()
    binding_a.model_id = binding_a.chart.chart_id = "binding-a"
    collar_a = collar_model(eps, r_lo=1.0 - delta)
    collar_a.model_id = collar_a.chart.chart_id = "collar-a"
    pages = page_cylinder_model(length)
    collar_b = collar_model(eps, r_lo=1.0 - delta)
    collar_b.model_id = collar_b.chart.chart_id = "collar-b"
    binding_b = reeb_solid_torus()
    binding_b.model_id = binding_b.chart.chart_id = "binding-b"
    models = [binding_a, collar_a, pages, collar_b, binding_b]

    two_pi = 2.0 * math.pi
    full = (0.0, two_pi)

    def fwd(model, exprs):
        return tuple(model.chart.parse_expr(e) for e in exprs)

    transitions = [
        Transition("binding-a", "collar-a",
                   fwd(binding_a, ("r", "phi", "t")),
                   ((1.0 - delta, 1.0), full, full)),
        Transition("collar-a", "page-cylinder",
                   fwd(collar_a, (f"r - {1.0 + eps!r}", "phi", "t")),
                   ((1.0 + eps, 1.0 + 2.0 * eps), full, full)),
        Transition("page-cylinder", "collar-b",
                   fwd(pages, (f"{1.0 + eps + length!r} - rho", "phi", "t")),
                   ((length - eps, length), full, full)),
        Transition("collar-b", "binding-b",
                   fwd(collar_b, ("r", "phi", "t")),
                   ((1.0 - delta, 1.0), full, full)),
    ]

    by_id = {m.model_id: m for m in models}
    overlaps = []
    for tr in transitions:
        overlaps.append(check_transition(by_id[tr.source], by_id[tr.target],
                                         tr, overlap_grid))

    charts = []
    all_parabolic = True
    for m in models:
        rep = classify(m.metric, m.distribution(), grid=classify_grid,
                       tol=class_tol, jobs=jobs)
        ke = rep.aggregates.get("k_e", {})
        charts.append({
            "chart": m.model_id,
            "classification": rep.classification,
            "max_abs_k_e": max(abs(ke.get("min", 0.0)), abs(ke.get("max", 0.0))),
            "n_valid": rep.n_valid,
        })
        all_parabolic &= rep.classification == "parabolic"

    report = AtlasReport(
        atlas_id="annulus-open-book",
        charts=charts,
        overlaps=overlaps,
        max_metric_mismatch=max(o["metric_mismatch"] for o in overlaps),
        max_leaf_residual=max(o["leaf_residual"] for o in overlaps),
        all_parabolic=all_parabolic,
    )
    if report.max_metric_mismatch > tolerance:
        worst = max(overlaps, key=lambda o: o["metric_mismatch"])
        raise OverlapMismatchError(worst["source"], worst["target"],
                                   worst["metric_mismatch"], tolerance,
                                   report=report)
    return models, transitions, report
