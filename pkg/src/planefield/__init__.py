"""planefield: extrinsic geometry of plane fields on Riemannian 3-manifolds.

Charts carry metrics, 1-forms and vector fields as closed-form expressions;
first-order jets make every derivative exact.  On top of that the package
evaluates second fundamental forms, mean and extrinsic curvature,
integrability and contact residuals, classifies plane fields by curvature
sign, ships parabolic reference constructions (solid torus, collars,
fibrations, open-book atlas) and runs machine-checkable suites over them.
"""

from . import catalog, chartio, distributions, expr, geometry, models, verify
from .distributions import (CurvatureReport, Distribution, classify,
                            contact_volume, extrinsic_curvature,
                            frobenius_residual, integral_mean_curvature,
                            mean_curvature, normal_field,
                            second_fundamental_form, tangent_frame)
from .errors import (ArityError, ConfigError, DegenerateDistributionError,
                     DomainError, NonSPDPathError, NotSPDError,
                     NotTransverseError, OverlapMismatchError, ParseError,
                     PlanefieldError, SingularSampleError,
                     UnknownIdentifierError)
from .expr import Jet1, eval_jet, parse, smoothstep, to_string
from .geometry import (Chart, MetricField, OneForm, SingularLocus,
                       VectorField, christoffel, covariant_derivative,
                       d_oneform, divergence, integrate_scalar, metric_at,
                       pairwise_sum, wedge3)

__version__ = "0.1.0"
