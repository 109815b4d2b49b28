"""Galerkin discretization on (0, 1) with clamped B-splines.

The discrete space is spanned by uniform clamped B-splines of order
(polynomial degree) p in {1, 2, 3} with boundary constraints applied by
*recombination*: a sparse transform T maps constrained coefficients to
raw spline coefficients, and every assembled raw matrix A_raw becomes
T' A_raw T. Two constraint modes exist:

``dirichlet``
    drop the first and last raw spline (the only ones nonzero at the
    endpoints), so every basis function vanishes on the boundary;

``dirichlet_plus_laplace_zero``
    (p = 3 only) additionally force vanishing second derivatives at the
    endpoints by replacing the two splines adjacent to each end with the
    single combination psi = B_edge - (B_edge''(end)/B_next''(end)) B_next.
    Since B_next'(end) = 0, the first derivative of psi at the endpoint
    stays unconstrained, as required for discretizing the third operator
    power.

All constructions keep the constrained dimension equal to the requested
N by adjusting the number of cells.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (
    AssemblyIntegrityError,
    CoefficientError,
    ConstraintError,
    DomainError,
    ParameterError,
    UnsupportedFormError,
)
from .model_config import CoefficientField

__all__ = [
    "SplineBasis",
    "build_basis",
    "eval_matrix",
    "AssembledOperators",
    "mass_matrix",
    "assemble_aL",
    "assemble_a2",
    "assemble_a3",
    "integral_obs_matrix",
    "point_obs_matrix",
]

DIRICHLET = "dirichlet"
DIRICHLET_LAPLACE = "dirichlet_plus_laplace_zero"


@dataclass(frozen=True)
class SplineBasis:
    """A constrained clamped B-spline basis on [0, 1].

    ``transform`` has shape (n_raw, n_dof); column j holds the raw
    coefficients of the j-th constrained basis function.
    """

    order: int
    n_dof: int
    knots: np.ndarray
    breakpoints: np.ndarray
    constraint_mode: str
    transform: np.ndarray

    @property
    def n_raw(self):
        return self.knots.shape[0] - self.order - 1

    @property
    def n_cells(self):
        return self.breakpoints.shape[0] - 1

    @property
    def cell_width(self):
        return 1.0 / self.n_cells


def build_basis(N, order, constraint=DIRICHLET):
    """Constrained spline basis with exactly N degrees of freedom.

    The cell count is chosen so the constrained dimension equals N:
    N + 2 - p cells in ``dirichlet`` mode, N + 1 cells in
    ``dirichlet_plus_laplace_zero`` mode (p = 3 only).
    """
    if not isinstance(N, (int, np.integer)) or N < 10:
        raise ParameterError(f"N must be an integer >= 10, got {N!r}")
    if order not in (1, 2, 3):
        raise ParameterError(f"spline order must be 1, 2 or 3, got {order!r}")
    if constraint not in (DIRICHLET, DIRICHLET_LAPLACE):
        raise ConstraintError(f"unknown constraint mode {constraint!r}")
    if constraint == DIRICHLET_LAPLACE and order != 3:
        raise ConstraintError(
            "second-derivative endpoint constraints require order 3 splines"
        )

    p = int(order)
    if constraint == DIRICHLET:
        m = int(N) + 2 - p
    else:
        m = int(N) + 1
    breakpoints = np.linspace(0.0, 1.0, m + 1)
    knots = np.concatenate([np.zeros(p), breakpoints, np.ones(p)])
    n_raw = m + p

    if constraint == DIRICHLET:
        transform = np.eye(n_raw)[:, 1 : n_raw - 1]
    else:
        ders0, _ = _kernels.basis_ders(knots, p, 0.0, 2)
        ders1, _ = _kernels.basis_ders(knots, p, 1.0, 2)
        # actives at 0 are raw 0..3; at 1 raw n_raw-4..n_raw-1
        r_left = ders0[2, 1] / ders0[2, 2]
        r_right = ders1[2, 2] / ders1[2, 1]
        n_dof = n_raw - 4
        transform = np.zeros((n_raw, n_dof))
        transform[1, 0] = 1.0
        transform[2, 0] = -r_left
        for j in range(n_raw - 6):
            transform[3 + j, 1 + j] = 1.0
        transform[n_raw - 2, n_dof - 1] = 1.0
        transform[n_raw - 3, n_dof - 1] = -r_right

    basis = SplineBasis(
        order=p,
        n_dof=int(N),
        knots=knots,
        breakpoints=breakpoints,
        constraint_mode=constraint,
        transform=transform,
    )
    _check_partition_of_unity(basis)
    _check_boundary_constraints(basis)
    return basis


def _check_partition_of_unity(basis):
    # The raw clamped basis sums to one everywhere; verify at a handful of
    # interior points before any constraint recombination is used.
    xs = np.linspace(0.037, 0.971, 11)
    vals, _ = _kernels.eval_basis_many(basis.knots, basis.order, xs, 0)
    sums = vals[:, 0, :].sum(axis=1)
    if not np.allclose(sums, 1.0, rtol=0.0, atol=1e-12):
        raise AssemblyIntegrityError(
            f"raw spline partition of unity violated: max|sum-1| = {np.max(np.abs(sums - 1.0)):.3e}"
        )


def _check_boundary_constraints(basis):
    for end in (0.0, 1.0):
        ders, span = _kernels.basis_ders(basis.knots, basis.order, end, 2)
        row_val = np.zeros(basis.n_raw)
        row_val[span - basis.order : span + 1] = ders[0]
        vals = row_val @ basis.transform
        if np.max(np.abs(vals)) > 1e-12:
            raise AssemblyIntegrityError(f"constrained basis not zero at s={end}")
        if basis.constraint_mode == DIRICHLET_LAPLACE:
            row_d2 = np.zeros(basis.n_raw)
            row_d2[span - basis.order : span + 1] = ders[2]
            d2 = row_d2 @ basis.transform
            scale = max(np.max(np.abs(ders[2])), 1.0)
            if np.max(np.abs(d2)) > 1e-9 * scale:
                raise AssemblyIntegrityError(
                    f"second-derivative constraint violated at s={end}"
                )


def eval_matrix(basis, locations, derivative=0):
    """Dense matrix of constrained basis (derivative) values at locations.

    Returns shape (len(locations), n_dof); row i evaluates all basis
    functions (or the requested derivative) at locations[i].
    """
    xs = np.atleast_1d(np.asarray(locations, dtype=np.float64))
    if xs.ndim != 1:
        raise ParameterError("locations must be one-dimensional")
    if np.any(xs < 0.0) or np.any(xs > 1.0):
        raise DomainError("evaluation points must lie in [0, 1]")
    vals, spans = _kernels.eval_basis_many(basis.knots, basis.order, xs, derivative)
    raw = np.zeros((xs.shape[0], basis.n_raw))
    p = basis.order
    for i in range(xs.shape[0]):
        raw[i, spans[i] - p : spans[i] + 1] = vals[i, derivative, :]
    return raw @ basis.transform


@dataclass(frozen=True)
class AssembledOperators:
    """Mass matrix M and a stiffness-like form matrix K, both constrained.

    ``form_order`` records which bilinear form K discretizes: "a_L" for
    the second-order operator itself, "a2"/"a3" for its second/third
    power.
    """

    M: np.ndarray
    K: np.ndarray
    form_order: str


def _element_quadrature(basis, nquad):
    x, w = np.polynomial.legendre.leggauss(int(nquad))
    bp = basis.breakpoints
    mid = 0.5 * (bp[:-1] + bp[1:])
    half = 0.5 * np.diff(bp)
    qpts = mid[:, None] + half[:, None] * x[None, :]
    qwts = half[:, None] * w[None, :]
    return qpts, qwts


def _field_at(field, qpts, derivative=False):
    fn = field.derivative if derivative else field.value
    return np.asarray(fn(qpts.ravel()), dtype=np.float64).reshape(qpts.shape)


def _assemble(basis, qpts, qwts, coeffs, d1, d2):
    raw = _kernels.assemble_bilinear(
        basis.knots,
        basis.order,
        basis.n_raw,
        qpts,
        qwts,
        np.ascontiguousarray(coeffs),
        np.asarray(d1, dtype=np.int64),
        np.asarray(d2, dtype=np.int64),
    )
    if basis.constraint_mode == DIRICHLET:
        return raw[1:-1, 1:-1].copy()
    return basis.transform.T @ raw @ basis.transform


def mass_matrix(basis, nquad=None):
    """Constrained mass matrix, exact for the spline products."""
    if nquad is None:
        nquad = basis.order + 1
    qpts, qwts = _element_quadrature(basis, nquad)
    coeffs = np.ones((1,) + qpts.shape)
    return _assemble(basis, qpts, qwts, coeffs, [0], [0])


def assemble_aL(basis, a, kappa2, nquad=None):
    """Mass matrix and the form <a u', v'> + <kappa2 u, v>.

    The diffusion coefficient must be strictly positive at every
    quadrature node; the reaction coefficient must be nonnegative
    (zero is allowed, e.g. for a pure Laplacian).
    """
    if nquad is None:
        nquad = basis.order + 2
    qpts, qwts = _element_quadrature(basis, nquad)
    a_q = _field_at(a, qpts)
    k2_q = _field_at(kappa2, qpts)
    if np.min(a_q) <= 0.0:
        raise CoefficientError(
            f"diffusion coefficient must be strictly positive; min at quadrature nodes = {np.min(a_q):.6g}"
        )
    if np.min(k2_q) < 0.0:
        raise CoefficientError(
            f"reaction coefficient must be nonnegative; min at quadrature nodes = {np.min(k2_q):.6g}"
        )
    coeffs = np.stack([a_q, k2_q])
    K = _assemble(basis, qpts, qwts, coeffs, [1, 0], [1, 0])
    return AssembledOperators(M=mass_matrix(basis), K=K, form_order="a_L")


def _require_unit_diffusion(a, form):
    if a is None:
        return
    if isinstance(a, CoefficientField) and a.kind == "constant" and a.params[0] == 1.0:
        return
    raise UnsupportedFormError(
        f"the {form} form is implemented for unit diffusion only; "
        "rescale constant diffusion into the reaction coefficient instead"
    )


def assemble_a2(basis, kappa2, a=None, nquad=None):
    """Form for the squared operator (kappa2 - Laplacian)^2, unit diffusion.

    With g = kappa2 the assembled form is

        <g^2 u, v> + <2 g u', v'> + <g' u, v'> + <g' u', v> + <u'', v''>,

    valid on spline spaces of order >= 2 with Dirichlet constraints.
    """
    if basis.order < 2:
        raise ParameterError("squared-operator form needs spline order >= 2")
    _require_unit_diffusion(a, "a2")
    if nquad is None:
        nquad = basis.order + 5
    qpts, qwts = _element_quadrature(basis, nquad)
    g = _field_at(kappa2, qpts)
    gp = _field_at(kappa2, qpts, derivative=True)
    if np.min(g) < 0.0:
        raise CoefficientError("reaction coefficient must be nonnegative")
    coeffs = np.stack([g * g, 2.0 * g, gp, gp, np.ones_like(g)])
    d1 = [0, 1, 0, 1, 2]
    d2 = [0, 1, 1, 0, 2]
    K = _assemble(basis, qpts, qwts, coeffs, d1, d2)
    return AssembledOperators(M=mass_matrix(basis), K=K, form_order="a2")


def assemble_a3(basis, kappa2, a=None, nquad=None):
    """Form for the cubed operator (kappa2 - Laplacian)^3, unit diffusion.

    Requires order-3 splines with the second-derivative endpoint
    constraints active. With g = kappa2 the twelve assembled pairings are

        <(g^3 + g'^2) u, v> + <g g' u, v'> + <g g' u', v> + <g^2 u', v'>
        - <g^2 u'', v> - <g^2 u, v''> + <g u'', v''>
        - <g' u''', v> - <g' u, v'''> - <g u''', v'> - <g u', v'''>
        + <u''', v'''>.
    """
    if basis.order != 3 or basis.constraint_mode != DIRICHLET_LAPLACE:
        raise ConstraintError(
            "cubed-operator form needs order-3 splines with "
            "second-derivative endpoint constraints"
        )
    _require_unit_diffusion(a, "a3")
    if nquad is None:
        nquad = 9
    qpts, qwts = _element_quadrature(basis, nquad)
    g = _field_at(kappa2, qpts)
    gp = _field_at(kappa2, qpts, derivative=True)
    if np.min(g) < 0.0:
        raise CoefficientError("reaction coefficient must be nonnegative")
    one = np.ones_like(g)
    coeffs = np.stack(
        [
            g * g * g + gp * gp,  # (0,0)
            g * gp,  # (0,1)
            g * gp,  # (1,0)
            g * g,  # (1,1)
            -(g * g),  # (2,0)
            -(g * g),  # (0,2)
            g,  # (2,2)
            -gp,  # (3,0)
            -gp,  # (0,3)
            -g,  # (3,1)
            -g,  # (1,3)
            one,  # (3,3)
        ]
    )
    d1 = [0, 0, 1, 1, 2, 0, 2, 3, 0, 3, 1, 3]
    d2 = [0, 1, 0, 1, 0, 2, 2, 0, 3, 1, 3, 3]
    K = _assemble(basis, qpts, qwts, coeffs, d1, d2)
    return AssembledOperators(M=mass_matrix(basis), K=K, form_order="a3")


def integral_obs_matrix(basis, n_rows, nquad=None):
    """Observation matrix against the sine system sqrt(2) sin(l pi s).

    Row l-1 holds the pairings of the l-th sine function with every
    constrained basis function, l = 1..n_rows. The default per-element
    quadrature grows with the highest frequency so that even the most
    oscillatory row is resolved.
    """
    if not 1 <= n_rows <= basis.n_dof:
        raise ParameterError(
            f"n_rows must lie in [1, {basis.n_dof}], got {n_rows}"
        )
    if nquad is None:
        nquad = max(basis.order + 2, math.ceil(4.0 * n_rows * basis.cell_width))
    qpts, qwts = _element_quadrature(basis, nquad)
    raw = _kernels.sine_rows(
        basis.knots, basis.order, basis.n_raw, qpts, qwts, int(n_rows)
    )
    if basis.constraint_mode == DIRICHLET:
        return raw[:, 1:-1].copy()
    return raw @ basis.transform


def point_obs_matrix(basis, locations):
    """Observation matrix of point evaluations at interior locations.

    Each row has at most order+1 nonzero entries. Locations must lie
    strictly inside (0, 1); the constrained field vanishes on the
    boundary, so endpoint observations would be degenerate.
    """
    xs = np.atleast_1d(np.asarray(locations, dtype=np.float64))
    if np.any(xs <= 0.0) or np.any(xs >= 1.0):
        raise DomainError("point observations must lie strictly inside (0, 1)")
    return eval_matrix(basis, xs, derivative=0)
