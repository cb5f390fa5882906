"""Metric pairs sharing unparametrized geodesics and their linking tensor.

The central object is the field L built from a pair (g, gbar): self-adjoint
with respect to g, and satisfying a first-order compatibility identity that
`bm_residual` measures in a g-orthonormal frame. All constructions here are
inverses of one another at the field level:

    l_from_pair(g, gbar_from_l(g, L)) == L      (pointwise, to rounding)

Sign and index conventions follow curvature.py.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .curvature import christoffel, ricci, riemann
from .errors import NonPositiveSpectrum, SingularMatrix
from .fields import (
    EndomorphismField,
    MetricField,
    NumericField,
    VectorField,
    fmat_adjugate,
    fmat_det,
    fmat_mul,
    fmat_scale,
    g_orthonormal_frame,
)


def pencil_spectrum(gmat, lmat):
    """Eigenvalues of L, ascending. Real because g*L is symmetric."""
    gl = gmat @ lmat
    return scipy.linalg.eigh(0.5 * (gl + gl.T), gmat, eigvals_only=True)


def spectrum_at(g: MetricField, L: EndomorphismField, x):
    return pencil_spectrum(g.matrix(x), L.matrix(x))


def covariant_endo_derivative(g, L, x):
    """(nabla L)[i, j, k] = (nabla_k L)^i_j."""
    gam = christoffel(g, x)
    dL = L.dmatrix(x)
    lm = L.matrix(x)
    return (
        dL
        + np.einsum("ikm,mj->ijk", gam, lm)
        - np.einsum("mkj,im->ijk", gam, lm)
    )


def bm_residual(g, L, x, eps_sym_factor=1e-9):
    """Max defect of the compatibility identity at x, orthonormal frame.

    The identity tested, for frame vectors u, v, w:

        g((nabla_u L) v, w) = 1/2 g(v, u) dtr(w) + 1/2 g(w, u) dtr(v)

    where dtr is the differential of trace L. The frame makes the result
    scale-honest: residuals from different metrics are comparable.
    """
    L.require_self_adjoint(g, x, eps_sym_factor)
    gmat = g.matrix(x)
    frame = g_orthonormal_frame(gmat)  # columns e_a
    cov = covariant_endo_derivative(g, L, x)
    tau = frame.T @ L.trace_d1(x)

    # lhs[a, b, c] = g((nabla_{e_a} L) e_b, e_c)
    m = np.einsum("ijk,ka->aij", cov, frame)
    gm = np.einsum("im,amj->aij", gmat, m)
    lhs = np.einsum("aij,ic,jb->abc", gm, frame, frame)

    n = g.dim
    eye = np.eye(n)
    rhs = 0.5 * np.einsum("ab,c->abc", eye, tau) + 0.5 * np.einsum(
        "ac,b->abc", eye, tau
    )
    return float(np.max(np.abs(lhs - rhs)))


def bm_residual_stats(g, L, points, eps_sym_factor=1e-9) -> dict:
    vals = np.array([bm_residual(g, L, x, eps_sym_factor) for x in points])
    worst = int(np.argmax(vals))
    return {
        "max": float(vals.max()),
        "mean": float(vals.mean()),
        "points": int(len(vals)),
        "worst_point": [float(v) for v in points[worst]],
    }


@dataclass(frozen=True)
class MetricPair:
    """Two metrics on one chart, intended as a geodesically linked pair."""

    g: MetricField
    gbar: MetricField

    def __post_init__(self):
        if self.g.chart != self.gbar.chart:
            raise ValueError("pair metrics must share a chart")

    @property
    def chart(self):
        return self.g.chart


def l_from_pair(g, gbar, x):
    """Linking endomorphism at x: (det gbar / det g)^{1/(n+1)} gbar^{-1} g."""
    gmat = g.matrix(x)
    gbmat = gbar.matrix(x)
    n = g.dim
    ratio = np.linalg.det(gbmat) / np.linalg.det(gmat)
    if ratio <= 0.0:
        raise SingularMatrix("determinant ratio not positive; metrics degenerate")
    return ratio ** (1.0 / (n + 1)) * np.linalg.solve(gbmat, gmat)


def l_field_from_pair(pair: MetricPair) -> EndomorphismField:
    """Field version of l_from_pair, with exact derivative propagation."""
    g, gbar = pair.g, pair.gbar
    n = g.dim
    det_g = fmat_det([list(r) for r in g.entries])
    det_gb = fmat_det([list(r) for r in gbar.entries])
    # gbar^{-1} = adj(gbar) / det(gbar); fold both determinant powers into one scale
    scale = det_gb ** (1.0 / (n + 1) - 1.0) * det_g ** (-1.0 / (n + 1))
    raw = fmat_mul(fmat_adjugate([list(r) for r in gbar.entries]),
                   [list(r) for r in g.entries])
    return EndomorphismField(g.chart, fmat_scale(raw, scale))


def gbar_from_l(g, L, eig_floor=1e-12, samples=500, seed=0, validate=False):
    """Partner metric gbar = det(L)^{-1} L^{-1} acting on g, as a field.

    Entry formula: gbar_ij = det(L)^{-2} (adj L)^a_i g_aj. Positivity of
    the L-spectrum is scanned on `samples` quasi-random points first;
    NonPositiveSpectrum names the worst point. The result is symmetric
    because g*L^{-1} is, and positive-definite wherever L is; the
    constructor scan is skipped by default for that reason.
    """
    chart = g.chart
    worst = None
    worst_val = np.inf
    for x in chart.sample(samples, seed=seed):
        lam = pencil_spectrum(g.matrix(x), L.matrix(x))
        if lam[0] < worst_val:
            worst_val = float(lam[0])
            worst = x
    if worst_val <= eig_floor:
        raise NonPositiveSpectrum(
            f"L eigenvalue {worst_val:.3e} <= {eig_floor:.1e} at {worst};"
            " partner metric undefined"
        )

    det_l = fmat_det([list(r) for r in L.entries])
    adj = fmat_adjugate([list(r) for r in L.entries])
    n = g.dim
    adj_t = [[adj[j][i] for j in range(n)] for i in range(n)]
    raw = fmat_scale(fmat_mul(adj_t, [list(r) for r in g.entries]),
                     det_l ** -2.0)
    sym = [[None] * n for _ in range(n)]
    for i in range(n):
        sym[i][i] = raw[i][i]
        for j in range(i + 1, n):
            shared = (raw[i][j] + raw[j][i]) * 0.5
            sym[i][j] = shared
            sym[j][i] = shared
    return MetricField(chart, sym, validate=validate)


def pair_from_l(g, L, **kw) -> MetricPair:
    return MetricPair(g, gbar_from_l(g, L, **kw))


# --- flows -------------------------------------------------------------


@dataclass(frozen=True)
class ProjectiveFlowSpec:
    """A metric and the generator of a geodesic-preserving flow on it."""

    metric: MetricField
    generator: VectorField

    def __post_init__(self):
        if self.metric.chart != self.generator.chart:
            raise ValueError("generator must live on the metric's chart")


def lie_derivative_metric(g, v: VectorField, x):
    """(L_v g)_ij = v^k d_k g_ij + g_kj d_i v^k + g_ik d_j v^k."""
    gmat = g.matrix(x)
    dg = g.dmatrix(x)
    vv = v.values(x)
    jac = v.jacobian(x)  # jac[k, i] = d v^k / d x_i
    return (
        np.einsum("ijk,k->ij", dg, vv)
        + np.einsum("kj,ki->ij", gmat, jac)
        + np.einsum("ik,kj->ij", gmat, jac)
    )


def bm_from_flow(spec: ProjectiveFlowSpec, x):
    """Trace-adjusted velocity of the metric under the flow, at x.

    Returns A - tr(A)/(n+1) Id with A = g^{-1} (L_v g). A Killing
    generator gives the zero matrix; a projective one gives a solution
    of the compatibility identity (up to sign conventions this is the
    time derivative of the pulled-back metric at t = 0).
    """
    g = spec.metric
    n = g.dim
    lie = lie_derivative_metric(g, spec.generator, x)
    a = np.linalg.solve(g.matrix(x), lie)
    return a - (np.trace(a) / (n + 1)) * np.eye(n)


def bm_from_flow_field(spec: ProjectiveFlowSpec) -> EndomorphismField:
    """bm_from_flow as an endomorphism field.

    Entries are finite-difference fields over the pointwise formula; each
    derivative costs 2n matrix builds. Accurate to ~1e-10, which is all
    the downstream residual checks need.
    """
    chart = spec.metric.chart
    n = chart.dim

    def make(i, j):
        return NumericField(chart, lambda x, i=i, j=j: bm_from_flow(spec, x)[i, j])

    return EndomorphismField(chart, [[make(i, j) for j in range(n)] for i in range(n)])


# --- obstructions ------------------------------------------------------


def nijenhuis_torsion(L: EndomorphismField, x):
    """Torsion N[i, j, k] of L at x; identically zero is necessary for
    L to come from a metric pair in normal form."""
    lm = L.matrix(x)
    dl = L.dmatrix(x)  # dl[i, j, k] = d_k L^i_j
    return (
        np.einsum("aj,ika->ijk", lm, dl)
        - np.einsum("ak,ija->ijk", lm, dl)
        + np.einsum("im,mjk->ijk", lm, dl)
        - np.einsum("im,mkj->ijk", lm, dl)
    )


def projective_weyl(g, x, riem=None):
    """Weyl-type curvature W[i, j, k, l], invariant across a linked pair.

    W = R + (delta^i_l Ric_jk - delta^i_k Ric_jl) / (n - 1). Both traces
    over (i, k) and (i, l) vanish; constant-curvature metrics give W = 0.
    Identically zero in dimension 2.
    """
    n = g.dim
    if riem is None:
        riem = riemann(g, x)
    ric = ricci(g, x, riem=riem)
    eye = np.eye(n)
    corr = (
        np.einsum("il,jk->ijkl", eye, ric) - np.einsum("ik,jl->ijkl", eye, ric)
    ) / (n - 1)
    return riem + corr


def weyl_trace_defect(w):
    """Max of the two contractions that must vanish for a Weyl-type tensor."""
    t1 = np.einsum("ijki->jk", w)
    t2 = np.einsum("ijil->jl", w)
    return float(max(np.max(np.abs(t1)), np.max(np.abs(t2))))


def weyl_pair_defect(pair: MetricPair, points) -> dict:
    """Max entry difference of W between the two pair members, over points."""
    worst = 0.0
    worst_pt = None
    for x in points:
        d = float(np.max(np.abs(projective_weyl(pair.g, x) - projective_weyl(pair.gbar, x))))
        if d > worst:
            worst = d
            worst_pt = [float(v) for v in x]
    return {"max": worst, "points": int(len(points)), "worst_point": worst_pt}


# --- linear sphere-to-sphere maps ---------------------------------------


def beltrami_map_defect(a_matrix, normal, samples: int = 64) -> float:
    """Coplanarity defect of the central projection of a great circle.

    The circle orthogonal to `normal` is pushed through the linear map
    and re-normalized to the sphere; the image must lie on the great
    circle orthogonal to the inverse-transpose image of `normal`. Returns
    the max inner product between image points and that normal, which is
    zero (to rounding) for any invertible linear map.
    """
    a = np.asarray(a_matrix, dtype=float)
    if a.shape != (3, 3):
        raise ValueError("expected a 3x3 matrix")
    if np.linalg.cond(a) > 1e12:
        raise SingularMatrix("map is numerically singular")
    nrm = np.asarray(normal, dtype=float)
    ln = np.linalg.norm(nrm)
    if ln == 0.0:
        raise ValueError("normal must be nonzero")
    nrm = nrm / ln

    # orthonormal basis of the plane orthogonal to nrm
    axis = np.zeros(3)
    axis[int(np.argmin(np.abs(nrm)))] = 1.0
    e1 = axis - (axis @ nrm) * nrm
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(nrm, e1)

    image_normal = np.linalg.solve(a.T, nrm)
    image_normal /= np.linalg.norm(image_normal)

    thetas = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
    defect = 0.0
    for th in thetas:
        v = np.cos(th) * e1 + np.sin(th) * e2
        w = a @ v
        w /= np.linalg.norm(w)
        defect = max(defect, abs(float(w @ image_normal)))
    return defect
