import numpy as np
import pytest

from planefield.catalog import box_contact_model, flat_torus_model
from planefield.geometry import Chart, MetricField, SingularLocus
from planefield.models import collar_model, reeb_solid_torus


@pytest.fixture(scope="session")
def torus():
    return flat_torus_model()


@pytest.fixture(scope="session")
def contact_box():
    return box_contact_model()


@pytest.fixture(scope="session")
def reeb():
    return reeb_solid_torus()


@pytest.fixture(scope="session")
def collar():
    return collar_model()


@pytest.fixture()
def polar_chart():
    return Chart(("r", "phi", "z"),
                 ((0.0, 2.0), (0.0, 2.0 * np.pi), (0.0, 1.0)),
                 (False, True, True),
                 singular_loci=(SingularLocus("r", 0.0, "polar axis"),),
                 chart_id="polar")


@pytest.fixture()
def polar_metric(polar_chart):
    return MetricField.from_strings(polar_chart,
                                    ("1", "0", "0", "r^2", "0", "1"))
