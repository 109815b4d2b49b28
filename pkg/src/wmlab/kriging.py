"""Linear prediction with a possibly misspecified covariance.

Observations are linear functionals of the Galerkin field, collected in
an observation matrix Phi; with weight covariance C the joint covariance
of all functionals is Sigma = Phi C Phi'. For a target functional h and
the first n observations,

* the correct kriging error is  Sigma_hh - sigma' Sigma_n^{-1} sigma,
* a predictor built from a *wrong* covariance Sigma~ uses weights
  w = Sigma~_n^{-1} sigma~ and incurs
  Sigma_hh + w' Sigma_n w - 2 sigma' w  under the true model,

where sigma (sigma~) is the true (wrong) cross-covariance vector. The
relative efficiency loss is the ratio of the two minus one; it is
nonnegative up to roundoff because the correct predictor is optimal.

Numerically everything is solved after a *joint* diagonal rescaling by
the true standard deviations: prediction is equivariant under diagonal
scaling (applied consistently to both covariances), the scaled true
matrix is a correlation matrix with unit diagonal, and the enormous raw
dynamic range of smooth models (~1e20 for third operator powers) drops
out. Leading blocks whose scaled condition estimate exceeds 1e12 are
flagged in the curve output -- never regularized.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.linalg

from .errors import (
    ConditioningError,
    DegenerateTargetError,
    DomainError,
    NumericalIntegrityError,
    ParameterError,
)
from .fem1d import (
    DIRICHLET,
    DIRICHLET_LAPLACE,
    assemble_a2,
    assemble_a3,
    assemble_aL,
    build_basis,
    integral_obs_matrix,
    point_obs_matrix,
)
from .spectral import covariance_direct, covariance_weights, generalized_eig

__all__ = [
    "ObservationDesign",
    "point_locations",
    "sigma_matrix",
    "correct_error_variance",
    "misspecified_error_variance",
    "efficiency",
    "EfficiencyCurve",
    "efficiency_curve_integral",
    "efficiency_curve_point",
    "write_curves_csv",
    "CURVE_CSV_COLUMNS",
]

COND_FLAG_LIMIT = 1e12
_DEGENERATE_REL = 1e-14


@dataclass(frozen=True)
class ObservationDesign:
    """Which functionals are observed.

    ``integral``: pairings with the first n_max sine functions
    sqrt(2) sin(l pi s); prediction targets are higher sine indices.

    ``point``: evaluations alternating around a center s0 at spacing
    delta_o (s0-d, s0+d, s0-2d, s0+2d, ...); the target is the field
    value at s0 itself.
    """

    kind: str
    n_max: int
    s0: float = 0.5
    delta_o: float = 0.01

    def __post_init__(self):
        if self.kind not in ("integral", "point"):
            raise ParameterError(f"design kind must be 'integral' or 'point', got {self.kind!r}")
        if not isinstance(self.n_max, (int, np.integer)) or self.n_max < 1:
            raise ParameterError(f"n_max must be a positive integer, got {self.n_max!r}")
        if self.kind == "point":
            if not 0.0 < self.s0 < 1.0:
                raise DomainError(f"s0 must lie in (0, 1), got {self.s0}")
            if not 0.0 < self.delta_o < 0.5:
                raise ParameterError(f"delta_o must lie in (0, 1/2), got {self.delta_o}")
            locs = point_locations(self)
            if np.any(locs <= 0.0) or np.any(locs >= 1.0):
                raise DomainError(
                    "point design exceeds the interval: reduce n_max or delta_o"
                )


def point_locations(design, n=None):
    """First n alternating observation points (all of them by default)."""
    if design.kind != "point":
        raise ParameterError("point_locations needs a point design")
    n = design.n_max if n is None else int(n)
    if not 1 <= n <= design.n_max:
        raise ParameterError(f"n must lie in [1, {design.n_max}], got {n}")
    out = np.empty(n)
    for i in range(1, n + 1):
        j = (i + 1) // 2
        out[i - 1] = design.s0 + j * design.delta_o if i % 2 == 0 else design.s0 - j * design.delta_o
    return out


def sigma_matrix(Phi, cov):
    """Joint covariance Phi C Phi' of the observed functionals."""
    Phi = np.asarray(Phi, dtype=np.float64)
    if Phi.ndim != 2 or Phi.shape[1] != cov.C.shape[0]:
        raise ParameterError(
            f"observation matrix shape {Phi.shape} incompatible with covariance "
            f"dimension {cov.C.shape[0]}"
        )
    S = Phi @ cov.C @ Phi.T
    return 0.5 * (S + S.T)


def _check_sigma_args(Sigma, n, target_row):
    Sigma = np.asarray(Sigma, dtype=np.float64)
    if Sigma.ndim != 2 or Sigma.shape[0] != Sigma.shape[1]:
        raise ParameterError(f"Sigma must be square, got shape {Sigma.shape}")
    rows = Sigma.shape[0]
    if not (1 <= n < target_row <= rows):
        raise ParameterError(
            f"need 1 <= n < target_row <= {rows}, got n={n}, target_row={target_row}"
        )
    return Sigma


def _scaled_blocks(Sigma, Sigma_tilde, n, targets):
    """Jointly rescaled leading blocks and cross columns.

    Returns (S, St, cross, crosst, dt2, cond) where S/St are the scaled
    n x n leading blocks, cross/crosst the scaled cross-covariance
    columns for each target, dt2 the squared true scaling of each target
    and cond the condition estimate of S.
    """
    d = np.sqrt(np.maximum(np.diag(Sigma), 0.0))
    dsafe = np.where(d > 0.0, d, 1.0)
    inv = 1.0 / dsafe
    idx = np.arange(n)
    S = Sigma[np.ix_(idx, idx)] * np.outer(inv[:n], inv[:n])
    cross = Sigma[np.ix_(idx, targets)] * np.outer(inv[:n], inv[targets])
    St = crosst = None
    if Sigma_tilde is not None:
        St = Sigma_tilde[np.ix_(idx, idx)] * np.outer(inv[:n], inv[:n])
        crosst = Sigma_tilde[np.ix_(idx, targets)] * np.outer(inv[:n], inv[targets])
    return S, St, cross, crosst, d[targets] ** 2


def _chol(S, what):
    try:
        return scipy.linalg.cho_factor(S, lower=True)
    except scipy.linalg.LinAlgError as exc:
        ev = scipy.linalg.eigvalsh(S)
        cond = abs(ev[-1] / ev[0]) if ev[0] != 0.0 else math.inf
        raise ConditioningError(
            f"{what} leading block is not positive definite (condition estimate {cond:.3e})",
            condition_estimate=cond,
        ) from exc


def _batch_variances(Sigma, Sigma_tilde, n, targets):
    """(v_true, v_miss, diff, cond) for many targets at one n.

    ``diff`` is v_miss - v_true evaluated directly as the quadratic form
    of the weight discrepancy in the scaled true metric,
    (w~ - w)' S (w~ - w); expanding it reproduces the textbook variance
    difference exactly, but the form stays accurate (and nonnegative up
    to roundoff) even when both predictors are nearly optimal, where
    subtracting the two variances would cancel catastrophically.
    ``v_miss`` is returned as v_true + diff for consistency. Both are
    None when Sigma_tilde is None.
    """
    targets = np.asarray(targets, dtype=np.int64)
    S, St, cross, crosst, dt2 = _scaled_blocks(Sigma, Sigma_tilde, n, targets)
    att = np.where(dt2 > 0.0, 1.0, 0.0)  # scaled target variances

    fac = _chol(S, "true")
    X = scipy.linalg.cho_solve(fac, cross)
    v_true = (att - np.sum(cross * X, axis=0)) * dt2

    v_miss = diff = None
    if Sigma_tilde is not None:
        fac_t = _chol(St, "misspecified")
        W = scipy.linalg.cho_solve(fac_t, crosst)
        D = W - X
        diff = np.sum(D * (S @ D), axis=0) * dt2
        v_miss = v_true + diff

    cond = float(np.linalg.cond(S))
    return v_true, v_miss, diff, cond


def correct_error_variance(Sigma, n, target_row):
    """Optimal linear prediction error of row ``target_row`` (1-based)
    from the first n functionals, all under the covariance Sigma."""
    Sigma = _check_sigma_args(Sigma, n, target_row)
    v, _, _, _ = _batch_variances(Sigma, None, int(n), [int(target_row) - 1])
    return float(v[0])


def misspecified_error_variance(Sigma, Sigma_tilde, n, target_row):
    """True error of the predictor whose weights come from Sigma_tilde.

    Sigma is the true covariance, Sigma_tilde the one the predictor was
    (wrongly) built from; ``target_row`` is 1-based.
    """
    Sigma = _check_sigma_args(Sigma, n, target_row)
    Sigma_tilde = np.asarray(Sigma_tilde, dtype=np.float64)
    if Sigma_tilde.shape != Sigma.shape:
        raise ParameterError(
            f"covariance shapes differ: {Sigma.shape} vs {Sigma_tilde.shape}"
        )
    _, v, _, _ = _batch_variances(Sigma, Sigma_tilde, int(n), [int(target_row) - 1])
    return float(v[0])


def _efficiency_from_variances(v_true, diff, sigma_tt):
    if v_true <= _DEGENERATE_REL * max(sigma_tt, 0.0) or v_true <= 0.0:
        raise DegenerateTargetError(
            f"optimal error variance {v_true:.3e} is degenerate for this target"
        )
    e = diff / v_true
    if e < -1e-6:
        raise NumericalIntegrityError(
            f"efficiency {e:.3e} grossly negative; misspecified predictor "
            "cannot beat the optimal one"
        )
    return 0.0 if e < 0.0 else float(e)


def efficiency(Sigma, Sigma_tilde, n, target_row):
    """Relative efficiency loss v_missp / v_correct - 1 (>= 0 up to roundoff).

    Invariant under separate positive rescalings of Sigma and
    Sigma_tilde; tiny negative values from rounding are clipped to zero,
    values below -1e-6 raise.
    """
    Sigma = _check_sigma_args(Sigma, n, target_row)
    Sigma_tilde = np.asarray(Sigma_tilde, dtype=np.float64)
    if Sigma_tilde.shape != Sigma.shape:
        raise ParameterError(
            f"covariance shapes differ: {Sigma.shape} vs {Sigma_tilde.shape}"
        )
    t = int(target_row) - 1
    v_true, _, diff, _ = _batch_variances(Sigma, Sigma_tilde, int(n), [t])
    return _efficiency_from_variances(float(v_true[0]), float(diff[0]), float(Sigma[t, t]))


@dataclass(frozen=True)
class EfficiencyCurve:
    """Worst-case efficiency loss as a function of the observation count.

    Per n: ``e_max`` is the maximum loss over targets, ``target`` the
    label of the target attaining it (sine index, or "z(s0)" for the
    point design), ``true_var``/``missp_var`` its two error variances,
    ``flagged`` whether a scaled leading-block condition estimate
    exceeded 1e12 (values are still reported), ``cond`` that estimate.
    ``per_target`` optionally maps n to (targets, eff, v_true, v_miss).
    """

    design: str
    n_values: Tuple[int, ...]
    e_max: Tuple[float, ...]
    target: Tuple[object, ...]
    true_var: Tuple[float, ...]
    missp_var: Tuple[float, ...]
    flagged: Tuple[bool, ...]
    cond: Tuple[float, ...]
    per_target: Optional[dict] = None


def _is_integer(x, tol=1e-12):
    return abs(x - round(x)) <= tol


def _model_operators(model, basis):
    """Assemble the stiffest exact form available for the exponent."""
    if _is_integer(model.beta) and int(round(model.beta)) in (1, 2, 3):
        b = int(round(model.beta))
        if b == 1:
            return assemble_aL(basis, model.a, model.kappa2)
        if b == 2:
            return assemble_a2(basis, model.kappa2, a=model.a)
        return assemble_a3(basis, model.kappa2, a=model.a)
    return assemble_aL(basis, model.a, model.kappa2)


def _model_covariance(model, basis):
    """Weight covariance by the cheapest *exact* route for the model."""
    ops = _model_operators(model, basis)
    if _is_integer(model.beta) and int(round(model.beta)) in (1, 2, 3):
        return covariance_direct(ops, int(round(model.beta)), model.tau)
    dec = generalized_eig(ops)
    return covariance_weights(dec, model.beta, model.tau)


def _sigma_for_model(model, basis, Phi):
    """Observation covariance Phi C Phi' evaluated without forming C.

    Both routes produce a Gram matrix of solved vectors, so the result
    is symmetric positive semidefinite in floating point and every entry
    is accurate relative to itself. That matters for the higher-order
    forms: the variances of high-frequency functionals decay like
    l^(-4*beta) and would drown in the absolute noise floor of a dense
    N x N covariance.
    """
    ops = _model_operators(model, basis)
    if _is_integer(model.beta) and int(round(model.beta)) in (1, 2, 3):
        try:
            fac = scipy.linalg.cho_factor(ops.K, lower=True)
        except scipy.linalg.LinAlgError as exc:
            raise ConditioningError(
                "stiffness-form matrix is not positive definite"
            ) from exc
        Y = scipy.linalg.cho_solve(fac, Phi.T)
        S = model.tau**2 * (Y.T @ (ops.M @ Y))
    else:
        dec = generalized_eig(ops)
        B = Phi @ dec.eigenvectors
        w = model.tau**2 * dec.eigenvalues ** (-2.0 * model.beta)
        S = (B * w) @ B.T
    return 0.5 * (S + S.T)


def _curve_basis(true_model, missp_model, N):
    if true_model.beta != missp_model.beta:
        raise ParameterError(
            "efficiency curves compare models with a common exponent; got "
            f"beta={true_model.beta} vs {missp_model.beta}"
        )
    if true_model.basis_order != missp_model.basis_order:
        raise ParameterError("models must share basis_order")
    mode = DIRICHLET
    if _is_integer(true_model.beta) and int(round(true_model.beta)) == 3:
        mode = DIRICHLET_LAPLACE
    return build_basis(int(N), true_model.basis_order, mode)


def efficiency_curve_integral(
    true_model, missp_model, N, n_values=None, nquad=None, keep_per_target=False
):
    """Worst-case loss over sine targets l = n+1..N versus n.

    Both covariances are discretized on the same N-dimensional basis;
    observation l pairs the field with sqrt(2) sin(l pi s). Requires
    max(n_values) <= N/2 so a substantial target range remains.
    """
    basis = _curve_basis(true_model, missp_model, N)
    if n_values is None:
        n_values = (10, 20, 50, 100, 200, 300, 400, 500)
    n_values = tuple(int(n) for n in n_values)
    if any(n < 1 for n in n_values) or len(set(n_values)) != len(n_values):
        raise ParameterError(f"n_values must be distinct positive integers: {n_values}")
    if max(n_values) > N // 2:
        raise ParameterError(
            f"max(n_values)={max(n_values)} exceeds N/2={N // 2}; "
            "leave room for prediction targets"
        )
    Phi = integral_obs_matrix(basis, N, nquad=nquad)
    Sigma = _sigma_for_model(true_model, basis, Phi)
    Sigma_t = _sigma_for_model(missp_model, basis, Phi)

    e_max, tgt, tv, mv, flags, conds = [], [], [], [], [], []
    per_target = {} if keep_per_target else None
    diag = np.diag(Sigma)
    for n in sorted(n_values):
        targets = np.arange(n, N)
        v_true, v_miss, diff, cond = _batch_variances(Sigma, Sigma_t, n, targets)
        valid = v_true > _DEGENERATE_REL * np.maximum(diag[targets], 0.0)
        valid &= v_true > 0.0
        if not np.any(valid):
            raise DegenerateTargetError(f"all targets degenerate at n={n}")
        eff = np.full(targets.shape, np.nan)
        raw = diff[valid] / v_true[valid]
        if np.min(raw) < -1e-6:
            raise NumericalIntegrityError(
                f"grossly negative efficiency {np.min(raw):.3e} at n={n}"
            )
        eff[valid] = np.clip(raw, 0.0, None)
        k = int(np.nanargmax(eff))
        e_max.append(float(eff[k]))
        tgt.append(int(targets[k]) + 1)  # sine index l is 1-based
        tv.append(float(v_true[k]))
        mv.append(float(v_miss[k]))
        flags.append(bool(cond > COND_FLAG_LIMIT))
        conds.append(float(cond))
        if keep_per_target:
            per_target[n] = (
                targets[valid] + 1,
                eff[valid],
                v_true[valid],
                v_miss[valid],
            )
    return EfficiencyCurve(
        design="integral",
        n_values=tuple(sorted(n_values)),
        e_max=tuple(e_max),
        target=tuple(tgt),
        true_var=tuple(tv),
        missp_var=tuple(mv),
        flagged=tuple(flags),
        cond=tuple(conds),
        per_target=per_target,
    )


def efficiency_curve_point(
    true_model, missp_model, N, n_values=None, s0=0.5, delta_o=0.01
):
    """Efficiency loss predicting z(s0) from alternating nearby points.

    The first n observation points of the alternating design are used
    for each n; the target functional is the field value at the center
    s0 itself.
    """
    basis = _curve_basis(true_model, missp_model, N)
    if n_values is None:
        n_values = tuple(range(10, 100, 10))
    n_values = tuple(int(n) for n in n_values)
    if any(n < 1 for n in n_values) or len(set(n_values)) != len(n_values):
        raise ParameterError(f"n_values must be distinct positive integers: {n_values}")
    design = ObservationDesign(
        kind="point", n_max=max(n_values), s0=float(s0), delta_o=float(delta_o)
    )
    locs = point_locations(design)
    Phi = point_obs_matrix(basis, np.concatenate([locs, [design.s0]]))
    Sigma = _sigma_for_model(true_model, basis, Phi)
    Sigma_t = _sigma_for_model(missp_model, basis, Phi)

    t = Sigma.shape[0] - 1  # target row: the center evaluation
    e_vals, tv, mv, flags, conds = [], [], [], [], []
    for n in sorted(n_values):
        v_true, v_miss, diff, cond = _batch_variances(Sigma, Sigma_t, n, [t])
        e = _efficiency_from_variances(
            float(v_true[0]), float(diff[0]), float(Sigma[t, t])
        )
        e_vals.append(e)
        tv.append(float(v_true[0]))
        mv.append(float(v_miss[0]))
        flags.append(bool(cond > COND_FLAG_LIMIT))
        conds.append(float(cond))
    return EfficiencyCurve(
        design="point",
        n_values=tuple(sorted(n_values)),
        e_max=tuple(e_vals),
        target=("z(s0)",) * len(n_values),
        true_var=tuple(tv),
        missp_var=tuple(mv),
        flagged=tuple(flags),
        cond=tuple(conds),
        per_target=None,
    )


CURVE_CSV_COLUMNS = (
    "experiment",
    "model",
    "beta",
    "delta",
    "design",
    "n",
    "target",
    "true_var",
    "missp_var",
    "efficiency",
    "e_max",
)


def _target_sort_key(label):
    s = str(label)
    if s == "max":
        return (0, 0.0, "")
    try:
        return (1, float(s), "")
    except ValueError:
        return (2, 0.0, s)


def _row_sort_key(row):
    delta = row.get("delta")
    return (
        row["experiment"],
        row["model"],
        delta is not None,
        float(delta) if delta is not None else 0.0,
        float(row["beta"]),
        int(row["n"]),
        _target_sort_key(row["target"]),
    )


def curve_rows(experiment, model_label, beta, delta, curve, per_target=False):
    """Flatten an EfficiencyCurve into CSV-ready row dicts.

    Integral curves get one summary row per n (target "max") carrying
    the worst target's variances and e_max; point curves one row per n
    with the single target "z(s0)". With per_target=True each retained
    target adds its own row (efficiency of that target, e_max of its n).
    """
    rows = []
    for i, n in enumerate(curve.n_values):
        label = "max" if curve.design == "integral" else curve.target[i]
        rows.append(
            {
                "experiment": experiment,
                "model": model_label,
                "beta": beta,
                "delta": delta,
                "design": curve.design,
                "n": n,
                "target": label,
                "true_var": curve.true_var[i],
                "missp_var": curve.missp_var[i],
                "efficiency": curve.e_max[i],
                "e_max": curve.e_max[i],
            }
        )
        if per_target and curve.per_target is not None:
            targets, eff, v_true, v_miss = curve.per_target[n]
            for j in range(len(targets)):
                rows.append(
                    {
                        "experiment": experiment,
                        "model": model_label,
                        "beta": beta,
                        "delta": delta,
                        "design": curve.design,
                        "n": n,
                        "target": int(targets[j]),
                        "true_var": float(v_true[j]),
                        "missp_var": float(v_miss[j]),
                        "efficiency": float(eff[j]),
                        "e_max": curve.e_max[i],
                    }
                )
    return rows


def write_curves_csv(path, rows):
    """Write efficiency rows in the canonical column order, sorted and
    repr-formatted so reruns are byte-identical."""

    def fmt(v):
        if v is None:
            return ""
        if isinstance(v, (int, np.integer)):
            return str(int(v))
        if isinstance(v, (float, np.floating)):
            return repr(float(v))
        return str(v)

    rows = sorted(rows, key=_row_sort_key)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(CURVE_CSV_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(fmt(row.get(c)) for c in CURVE_CSV_COLUMNS) + "\n")
