"""Solid-torus model: a thick Reeb-type foliation that is parabolic.

Coordinates (r, phi, t) on D^2 x S^1 with r in [0, 1] and phi, t periodic.
The plane field is the kernel of

    alpha = f(r) dr + (1 - f(r)) dt,

with f the C-infinity step rising on (1/3, 2/3): inside r <= 1/3 the leaves
are the flat disks {t = const}, outside r >= 2/3 they are the cylinders
{r = const}, and in between the leaves spiral from one family to the
other.  The metric is diag(1, G(r), 1) with G = r^2 near the core (so the
metric is the flat one written in polar coordinates there, regular across
r = 0) and G = 1 for r >= 1/3.

With the unit normal n = (f d_r + (1-f) d_t) / |n|, |n|^2 = 2f^2 - 2f + 1,
the second fundamental form in the frame

    X = d_phi,   Y = (1 - f) d_r - f d_t

is diagonal:

    B = diag(-f G' / 2,  -(1 - f) f') / |n|.

f G' vanishes identically (G' is supported where f = 0), so det B = 0
everywhere: the foliation is parabolic, and totally geodesic wherever
f' = 0 as well.
"""

from __future__ import annotations

import numpy as np

from ..errors import DomainError
from ..expr import smoothstep, smoothstep_deriv
from ..geometry import Chart, MetricField, OneForm, SingularLocus, VectorField
from .base import Model

__all__ = ["reeb_solid_torus", "closed_form_B_reeb",
           "REEB_F_LO", "REEB_F_HI", "REEB_G_LO", "REEB_G_HI"]

REEB_F_LO, REEB_F_HI = 1.0 / 3.0, 2.0 / 3.0   # rise interval of f
REEB_G_LO, REEB_G_HI = 1.0 / 4.0, 1.0 / 3.0   # rise interval of G

_F = "smoothstep(1/3, 2/3, r)"
_S2 = "smoothstep(1/4, 1/3, r)"


def reeb_solid_torus() -> Model:
    """Build the solid-torus model, ready for classify/verify."""
    chart = Chart(
        coord_names=("r", "phi", "t"),
        domain=((0.0, 1.0), (0.0, 2.0 * np.pi), (0.0, 2.0 * np.pi)),
        periodic=(False, True, True),
        singular_loci=(SingularLocus("r", 0.0, "polar coordinate axis"),),
        chart_id="reeb-solid-torus",
    )
    metric = MetricField.from_strings(
        chart, ("1", "0", "0", f"(1 - {_S2})*r^2 + {_S2}", "0", "1"))
    alpha = OneForm(chart, (_F, "0", f"1 - {_F}"))
    frame_x = VectorField(chart, ("0", "1", "0"))
    frame_y = VectorField(chart, (f"1 - {_F}", "0", f"-({_F})"))
    return Model(
        model_id="reeb-solid-torus",
        chart=chart,
        metric=metric,
        forms={"foliation": alpha},
        vectors={},
        named_frames={"paper": (frame_x, frame_y)},
        parameters={"f_rise": [REEB_F_LO, REEB_F_HI],
                    "g_rise": [REEB_G_LO, REEB_G_HI]},
        foliation="foliation",
    )


def closed_form_B_reeb(r):
    """Closed-form second fundamental form of the solid-torus model in the
    frame (X, Y) with the unit normal: diag(-f G'/2, -(1-f) f') / |n|.

    Accepts a scalar or an array of radii in (0, 1]; returns a (2, 2) or
    (..., 2, 2) array.
    """
    arr = np.asarray(r, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr > 1.0):
        raise DomainError("closed_form_B_reeb", float(np.min(arr)),
                          "radius must lie in (0, 1]")
    f = smoothstep(REEB_F_LO, REEB_F_HI, arr)
    fp = smoothstep_deriv(REEB_F_LO, REEB_F_HI, arr)
    s2 = smoothstep(REEB_G_LO, REEB_G_HI, arr)
    s2p = smoothstep_deriv(REEB_G_LO, REEB_G_HI, arr)
    gp = 2.0 * arr * (1.0 - s2) + s2p * (1.0 - arr ** 2)
    norm = np.sqrt(2.0 * f ** 2 - 2.0 * f + 1.0)
    out = np.zeros(arr.shape + (2, 2))
    out[..., 0, 0] = -0.5 * f * gp / norm
    out[..., 1, 1] = -(1.0 - f) * fp / norm
    return out
