"""Low-level B-spline evaluation and Galerkin assembly kernels.

These are the only hot loops in the package. Each function is decorated
with :func:`wmlab._accel.njit`, so the same source runs jitted (numba)
or as plain Python depending on availability and the ``WMLAB_NO_NUMBA``
environment flag. Everything here operates on the *raw* (unconstrained)
clamped B-spline basis; boundary constraints are applied afterwards by
congruence with a sparse transform, see :mod:`wmlab.fem1d`.

Conventions
-----------
* ``knots`` is a full clamped knot vector (end knots repeated p+1 times).
* A "span" is an index i with knots[i] <= s < knots[i+1]; the B-splines
  B_{span-p}, ..., B_{span} are the p+1 functions active at s.
* Derivative evaluation follows the classical recurrence for B-spline
  derivatives (Cox-de Boor tables, cf. Piegl & Tiller, alg. A2.3).
* Assembly accumulates element-by-element in a fixed order, so results
  are bit-reproducible for a fixed input regardless of caller threading.
"""

import numpy as np

from ._accel import njit


@njit
def find_span(knots, p, s):
    """Index of the knot span containing s (clamped at both ends)."""
    n = knots.shape[0] - p - 1  # number of raw basis functions
    if s >= knots[n]:
        return n - 1
    if s <= knots[p]:
        return p
    lo = p
    hi = n
    mid = (lo + hi) // 2
    while s < knots[mid] or s >= knots[mid + 1]:
        if s < knots[mid]:
            hi = mid
        else:
            lo = mid
        mid = (lo + hi) // 2
    return mid


@njit
def basis_ders(knots, p, s, nders):
    """Nonzero B-splines and their derivatives at one point.

    Returns ``(ders, span)`` where ``ders[k, j]`` is the k-th derivative
    of B_{span-p+j, p} at s, for k = 0..nders. Rows with k > p are zero
    (piecewise degree-p polynomials have vanishing higher derivatives
    inside each cell).
    """
    span = find_span(knots, p, s)
    ndu = np.empty((p + 1, p + 1))
    left = np.empty(p + 1)
    right = np.empty(p + 1)
    ndu[0, 0] = 1.0
    for j in range(1, p + 1):
        left[j] = s - knots[span + 1 - j]
        right[j] = knots[span + j] - s
        saved = 0.0
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved

    ders = np.zeros((nders + 1, p + 1))
    for j in range(p + 1):
        ders[0, j] = ndu[j, p]

    nd = nders if nders < p else p
    a = np.empty((2, p + 1))
    for r in range(p + 1):
        s1 = 0
        s2 = 1
        a[0, 0] = 1.0
        for k in range(1, nd + 1):
            d = 0.0
            rk = r - k
            pk = p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d = a[s2, 0] * ndu[rk, pk]
            if rk >= -1:
                j1 = 1
            else:
                j1 = -rk
            if r - 1 <= pk:
                j2 = k - 1
            else:
                j2 = p - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d += a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d += a[s2, k] * ndu[r, pk]
            ders[k, r] = d
            tmp = s1
            s1 = s2
            s2 = tmp

    fac = float(p)
    for k in range(1, nd + 1):
        for j in range(p + 1):
            ders[k, j] *= fac
        fac *= p - k
    return ders, span


@njit
def eval_basis_many(knots, p, xs, nders):
    """Active-function table at many points.

    Returns ``(vals, spans)`` with ``vals[i, k, j]`` the k-th derivative
    of the j-th active raw spline at ``xs[i]`` and ``spans[i]`` its span.
    """
    m = xs.shape[0]
    vals = np.zeros((m, nders + 1, p + 1))
    spans = np.zeros(m, dtype=np.int64)
    for i in range(m):
        ders, span = basis_ders(knots, p, xs[i], nders)
        for k in range(nders + 1):
            for j in range(p + 1):
                vals[i, k, j] = ders[k, j]
        spans[i] = span
    return vals, spans


@njit
def assemble_bilinear(knots, p, ndof_raw, qpts, qwts, coeffs, d1, d2):
    """Galerkin matrix of a sum of weighted derivative pairings.

    Accumulates sum_t of integral( coeffs[t] * u^(d1[t]) * v^(d2[t]) )
    over the partition, using per-element quadrature.

    Parameters
    ----------
    qpts, qwts : (n_elements, n_quad) global points and weights.
    coeffs : (n_terms, n_elements, n_quad) coefficient values at qpts.
    d1, d2 : (n_terms,) int64 derivative orders for trial/test factors.

    Returns the raw (unconstrained) ndof_raw x ndof_raw matrix. Row i /
    column j index raw splines; entries accumulate in element order.
    """
    nel, nq = qpts.shape
    nterms = d1.shape[0]
    maxd = 0
    for t in range(nterms):
        if d1[t] > maxd:
            maxd = d1[t]
        if d2[t] > maxd:
            maxd = d2[t]
    out = np.zeros((ndof_raw, ndof_raw))
    for e in range(nel):
        for q in range(nq):
            ders, span = basis_ders(knots, p, qpts[e, q], maxd)
            w = qwts[e, q]
            i0 = span - p
            for t in range(nterms):
                c = coeffs[t, e, q] * w
                if c == 0.0:
                    continue
                k1 = d1[t]
                k2 = d2[t]
                for i in range(p + 1):
                    ci = c * ders[k1, i]
                    if ci != 0.0:
                        for j in range(p + 1):
                            out[i0 + i, i0 + j] += ci * ders[k2, j]
    return out


@njit
def sine_rows(knots, p, ndof_raw, qpts, qwts, n_rows):
    """Pairings of the raw basis against sqrt(2)*sin(l*pi*s), l = 1..n_rows.

    Returns an (n_rows, ndof_raw) matrix with entry [l-1, k] equal to
    integral over (0,1) of sqrt(2) sin(l pi s) B_k(s) ds, by the supplied
    per-element quadrature.
    """
    nel, nq = qpts.shape
    out = np.zeros((n_rows, ndof_raw))
    sq2 = np.sqrt(2.0)
    for e in range(nel):
        for q in range(nq):
            ders, span = basis_ders(knots, p, qpts[e, q], 0)
            x = qpts[e, q]
            w = qwts[e, q]
            i0 = span - p
            for l in range(1, n_rows + 1):
                sv = sq2 * np.sin(l * np.pi * x) * w
                for j in range(p + 1):
                    out[l - 1, i0 + j] += sv * ders[0, j]
    return out
