"""Small dense linear algebra over first-order jets.

A jet-vector is a list of three :class:`~planefield.expr.Jet1` scalars, a
jet-matrix a 3x3 nested list.  Carrying the chart partials through the
algebra gives exact Jacobians for derived fields (unit normals, frame
pushforwards, transferred metrics) without any symbolic blow-up: only
first derivatives of the primitive fields are ever consumed.
"""

from __future__ import annotations

import numpy as np

from .expr import Jet1

__all__ = [
    "jets_from_metric", "jets_from_components", "vector_values",
    "vector_jacobian", "matvec", "dot", "raw_dot", "adjugate3", "det3",
    "normalize", "scale", "add", "sub", "matrix_values", "matrix_partials",
]


def jets_from_metric(mj) -> list:
    """3x3 jet-matrix from a :class:`MetricJets` batch."""
    out = []
    for i in range(3):
        row = []
        for j in range(3):
            grad = np.moveaxis(mj.dval[..., :, i, j], -1, 0)
            row.append(Jet1(mj.val[..., i, j], grad))
        out.append(row)
    return out


def jets_from_components(val: np.ndarray, jac: np.ndarray) -> list:
    """Jet-vector from field evaluation arrays (values, Jacobian)."""
    return [Jet1(val[..., k], np.moveaxis(jac[..., :, k], -1, 0))
            for k in range(3)]


def vector_values(v: list) -> np.ndarray:
    return np.stack([c.value for c in v], axis=-1)


def vector_jacobian(v: list) -> np.ndarray:
    """jac[..., i, k] = d_i v^k."""
    return np.stack([np.moveaxis(c.gradient, 0, -1) for c in v], axis=-1)


def matvec(m: list, v: list) -> list:
    return [m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2] for i in range(3)]


def dot(g: list, u: list, v: list) -> Jet1:
    acc = None
    for i in range(3):
        for j in range(3):
            term = g[i][j] * u[i] * v[j]
            acc = term if acc is None else acc + term
    return acc


def raw_dot(u: list, v: list) -> Jet1:
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def det3(m: list) -> Jet1:
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def adjugate3(m: list) -> list:
    """Transposed cofactor matrix, so inv = adjugate / det."""
    c = [[None] * 3 for _ in range(3)]
    idx = [(0, 1, 2), (1, 2, 0), (2, 0, 1)]
    for a in range(3):
        for b in range(3):
            i1, i2 = [x for x in range(3) if x != a]
            j1, j2 = [x for x in range(3) if x != b]
            minor = m[i1][j1] * m[i2][j2] - m[i1][j2] * m[i2][j1]
            sign = -1.0 if (a + b) % 2 else 1.0
            c[b][a] = minor * sign
    return c


def add(u: list, v: list) -> list:
    return [a + b for a, b in zip(u, v)]


def sub(u: list, v: list) -> list:
    return [a - b for a, b in zip(u, v)]


def scale(s: Jet1, v: list) -> list:
    return [s * c for c in v]


def normalize(g: list, v: list):
    """Unit jet-vector under the jet-metric g; returns (unit, norm)."""
    from .expr import jet_sqrt
    norm = jet_sqrt(dot(g, v, v))
    return [c / norm for c in v], norm


def matrix_values(m: list) -> np.ndarray:
    shape = m[0][0].value.shape
    out = np.zeros(shape + (3, 3))
    for i in range(3):
        for j in range(3):
            out[..., i, j] = m[i][j].value
    return out


def matrix_partials(m: list) -> np.ndarray:
    """dval[..., l, i, j] = d_l m_ij, matching MetricJets layout."""
    shape = m[0][0].value.shape
    out = np.zeros(shape + (3, 3, 3))
    for i in range(3):
        for j in range(3):
            out[..., :, i, j] = np.moveaxis(m[i][j].gradient, 0, -1)
    return out
