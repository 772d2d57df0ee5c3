"""Built-in constructions: solid-torus and collar foliations, product
fibrations, Dehn-twist pullbacks, metric paths, metric transfer, the
open-book demo atlas and the contact deformation scanner."""

from .base import Model, SurfaceMetric
from .collar import collar_model
from .fibration import (TwistSpec, annulus_surface_chart, dehn_twist_pullback,
                        product_fibration, torus_surface_chart,
                        twist_map_points)
from .openbook import (AtlasReport, Transition, assemble_open_book_demo,
                       check_transition, page_cylinder_model)
from .paths import (ExprMetricPath, RankOnePath, rank_one_path,
                    straight_line_path, verify_metric_path)
from .reeb import closed_form_B_reeb, reeb_solid_torus
from .scan import ScanReport, contact_deformation_scan
from .transfer import TransferReport, transfer_metric

__all__ = [
    "Model", "SurfaceMetric",
    "reeb_solid_torus", "closed_form_B_reeb",
    "collar_model",
    "product_fibration", "TwistSpec", "dehn_twist_pullback",
    "torus_surface_chart", "annulus_surface_chart", "twist_map_points",
    "ExprMetricPath", "RankOnePath", "rank_one_path", "straight_line_path",
    "verify_metric_path",
    "TransferReport", "transfer_metric",
    "AtlasReport", "Transition", "assemble_open_book_demo",
    "check_transition", "page_cylinder_model",
    "ScanReport", "contact_deformation_scan",
]
