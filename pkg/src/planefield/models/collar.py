"""Collar model: turning torus leaves into page-like annulus leaves.

On [1, 1+2*eps] x T^2 with the flat metric dr^2 + dphi^2 + dt^2 the plane
field is the kernel of

    alpha = (1 - f(r)) dr + f(r) dphi,     f = step rising on
                                           (1 + eps/2, 1 + eps).

Near r = 1 the leaves are the constant-r tori (matching the outer region
of the solid-torus model); past r = 1 + eps they are the constant-phi
annuli, i.e. pages.  Every leaf contains the direction d_t, which is
parallel for the flat metric, so the t-row of B vanishes and det B = 0
at every point: the foliation is parabolic throughout the collar.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from ..geometry import Chart, MetricField, OneForm, VectorField
from .base import Model

__all__ = ["collar_model"]


def collar_model(eps: float = 0.05, r_lo: float = None) -> Model:
    """Collar on [r_lo, 1+2*eps] x T^2 (r_lo defaults to 1)."""
    if eps <= 0:
        raise ConfigError(f"collar width must be positive, got {eps}")
    lo = 1.0 if r_lo is None else float(r_lo)
    if lo >= 1.0 + eps / 2.0:
        raise ConfigError("collar must start below the transition zone")
    a, b = 1.0 + eps / 2.0, 1.0 + eps
    f = f"smoothstep({a!r}, {b!r}, r)"
    chart = Chart(
        coord_names=("r", "phi", "t"),
        domain=((lo, 1.0 + 2.0 * eps), (0.0, 2.0 * np.pi), (0.0, 2.0 * np.pi)),
        periodic=(False, True, True),
        chart_id="collar",
    )
    metric = MetricField.from_strings(chart, ("1", "0", "0", "1", "0", "1"))
    alpha = OneForm(chart, (f"1 - {f}", f, "0"))
    # in-page direction and the principal geodesic direction d_t
    frame_x = VectorField(chart, (f"-({f})", f"1 - {f}", "0"))
    frame_y = VectorField(chart, ("0", "0", "1"))
    return Model(
        model_id="collar",
        chart=chart,
        metric=metric,
        forms={"foliation": alpha},
        named_frames={"page": (frame_x, frame_y)},
        parameters={"eps": eps, "r_lo": lo, "f_rise": [a, b]},
        foliation="foliation",
    )
