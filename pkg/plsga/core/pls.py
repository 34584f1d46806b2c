"""
Single-response PLS regression (SIMPLS with modified Gram-Schmidt), an orthogonal-scores
NIPALS fitter used as numerically conservative cross-check, and ordinary least squares.

All fitters center X and y; no scaling is applied. Models hold the coefficient path for
every component count 1..A_max, so one fit serves all model complexities.
"""
from __future__ import absolute_import
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

WEIGHT_NORM_RTOL = 1e-12
"""Component extraction stops when the weight norm falls below this fraction of the first"""

SINGULAR_RTOL = 1e-10
"""QR pivots below this fraction of the largest one mark an OLS design as singular"""


class PlsError(Exception):
    """Base class of model fitting errors"""


class InvalidComponentsError(PlsError):
    pass


class ShapeError(PlsError):
    pass


class SingularDesignError(PlsError):
    pass


@dataclass(frozen=True)
class PlsModel:
    """Centered PLS fit with coefficient paths.

    Attributes:
        x_means: column means of the calibration X (q)
        y_mean: mean of the calibration response
        coef_path: q x A_max, column a-1 holds the a-component coefficients
        intercept_path: A_max intercepts, so that y_hat = intercept + X @ coef
        requested_components: the A_max asked for; larger than A_max when truncated
    """
    x_means: np.ndarray
    y_mean: float
    coef_path: np.ndarray
    intercept_path: np.ndarray
    requested_components: int

    @property
    def A_max(self):
        return self.coef_path.shape[1]

    @property
    def truncated(self):
        return self.A_max < self.requested_components

    def coefficients(self, a):
        return self.coef_path[:, a - 1]

    def predict(self, X_new, a):
        return pls_predict(self, X_new, a)

    def predict_path(self, X_new, a_max=None):
        """Predictions for a = 1..a_max as an m x a_max matrix.

        Component counts beyond a truncated model repeat its last stable column, i.e. the
        converged solution.
        """
        X_new = _check_columns(self, X_new)
        a_max = a_max or self.requested_components
        cols = np.minimum(np.arange(a_max), self.A_max - 1)
        return (X_new - self.x_means) @ self.coef_path[:, cols] + self.y_mean


@dataclass(frozen=True)
class OlsModel:
    coefficients: np.ndarray
    """Intercept first, then one coefficient per column"""
    rss: float

    def predict(self, X_new):
        return self.coefficients[0] + np.asarray(X_new, dtype=float) @ self.coefficients[1:]


def _check_fit_inputs(X, y, A_max):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.ndim == 1:
        X = X[:, None]
    n, q = X.shape
    if y.shape[0] != n:
        raise ShapeError("X has {} rows but y has {}".format(n, y.shape[0]))
    if n < 2:
        raise InvalidComponentsError("At least 2 observations are required to fit PLS")
    A_max = int(A_max)
    if not 1 <= A_max <= min(q, n - 1):
        raise InvalidComponentsError(
            "Number of components must be in [1, {}], got {}".format(min(q, n - 1), A_max))
    return X, y, A_max


def _check_columns(model, X_new):
    X_new = np.asarray(X_new, dtype=float)
    if X_new.ndim == 1:
        X_new = X_new[None, :]
    if X_new.shape[1] != model.x_means.shape[0]:
        raise ShapeError("Model has {} variables, data has {}".format(
            model.x_means.shape[0], X_new.shape[1]))
    return X_new


def _build_model(x_means, y_mean, coef_path, requested):
    coef_path = np.ascontiguousarray(coef_path)
    intercepts = y_mean - x_means @ coef_path
    return PlsModel(x_means, float(y_mean), coef_path, intercepts, requested)


def fit_simpls(X_cal, y_cal, A_max, reorthogonalize=False) -> PlsModel:
    """SIMPLS for a single response.

    The loading basis is kept orthonormal with modified Gram-Schmidt; `reorthogonalize`
    runs a second MGS pass per component (slower, more accurate for many components).
    If the cross-covariance vanishes before A_max components, the model is truncated to
    the last stable count (see `PlsModel.truncated`).
    """
    X, y, A_max = _check_fit_inputs(X_cal, y_cal, A_max)
    n, q = X.shape
    x_means = X.mean(axis=0)
    y_mean = y.mean()
    X0 = X - x_means
    y0 = y - y_mean

    V = np.zeros((q, A_max))
    coef_path = np.zeros((q, A_max))
    coef = np.zeros(q)
    s = X0.T @ y0
    first_norm = None
    n_comp = 0
    for a in range(A_max):
        s_norm = np.linalg.norm(s)
        if first_norm is None:
            first_norm = s_norm
        if s_norm == 0 or s_norm <= WEIGHT_NORM_RTOL * first_norm:
            break
        r = s
        t = X0 @ r
        t_norm = np.linalg.norm(t)
        if t_norm == 0:
            break
        t = t / t_norm
        r = r / t_norm
        p = X0.T @ t
        q_a = y0 @ t

        v = p.copy()
        for _ in range(2 if reorthogonalize else 1):
            for j in range(a):  # MGS against the previous basis
                v -= (V[:, j] @ v) * V[:, j]
        v /= np.linalg.norm(v)
        V[:, a] = v
        s = s - v * (v @ s)

        coef = coef + r * q_a
        coef_path[:, a] = coef
        n_comp = a + 1

    if n_comp == 0:
        raise InvalidComponentsError("Response has no covariance with the predictors")
    if n_comp < A_max:
        logging.debug("SIMPLS truncated to %d of %d components", n_comp, A_max)
    return _build_model(x_means, y_mean, coef_path[:, :n_comp], A_max)


def fit_pls_oracle(X_cal, y_cal, A_max) -> PlsModel:
    """Orthogonal-scores (NIPALS) PLS1 with explicit deflation of X and y.

    Slow but numerically conservative; the a-component coefficients are
    W_a (P_a' W_a)^-1 c_a.
    """
    X, y, A_max = _check_fit_inputs(X_cal, y_cal, A_max)
    n, q = X.shape
    x_means = X.mean(axis=0)
    y_mean = y.mean()
    E = X - x_means
    f = y - y_mean

    W = np.zeros((q, A_max))
    P = np.zeros((q, A_max))
    c = np.zeros(A_max)
    first_norm = None
    n_comp = 0
    for a in range(A_max):
        w = E.T @ f
        w_norm = np.linalg.norm(w)
        if first_norm is None:
            first_norm = w_norm
        if w_norm == 0 or w_norm <= WEIGHT_NORM_RTOL * first_norm:
            break
        w /= w_norm
        t = E @ w
        tt = t @ t
        if tt == 0:
            break
        P[:, a] = E.T @ t / tt
        c[a] = f @ t / tt
        W[:, a] = w
        E = E - np.outer(t, P[:, a])
        f = f - c[a] * t
        n_comp = a + 1

    if n_comp == 0:
        raise InvalidComponentsError("Response has no covariance with the predictors")
    coef_path = np.zeros((q, n_comp))
    for a in range(1, n_comp + 1):
        Wa = W[:, :a]
        coef_path[:, a - 1] = Wa @ np.linalg.solve(P[:, :a].T @ Wa, c[:a])
    return _build_model(x_means, y_mean, coef_path, A_max)


def pls_predict(model: PlsModel, X_new, a):
    """Predictions of the a-component model"""
    a = int(a)
    if not 1 <= a <= model.A_max:
        raise ShapeError("Model has components 1..{}, requested {}".format(model.A_max, a))
    X_new = _check_columns(model, X_new)
    return model.intercept_path[a - 1] + X_new @ model.coef_path[:, a - 1]


def fit_ols(X_cal, y_cal) -> OlsModel:
    """Least squares with intercept, through a pivoted QR of the design.

    Raises:
        SingularDesignError: fewer than q + 2 rows or rank-deficient design
    """
    X = np.asarray(X_cal, dtype=float)
    y = np.asarray(y_cal, dtype=float).reshape(-1)
    if X.ndim == 1:
        X = X[:, None]
    n, q = X.shape
    if y.shape[0] != n:
        raise ShapeError("X has {} rows but y has {}".format(n, y.shape[0]))
    if n < q + 2:
        raise SingularDesignError("OLS needs at least {} observations, got {}".format(q + 2, n))
    design = np.column_stack([np.ones(n), X])
    Q, R, perm = scipy.linalg.qr(design, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = diag[0] * SINGULAR_RTOL
    if diag[-1] <= tol:
        raise SingularDesignError("Design matrix is rank deficient")
    beta_perm = scipy.linalg.solve_triangular(R, Q.T @ y)
    beta = np.empty(q + 1)
    beta[perm] = beta_perm
    residuals = y - design @ beta
    return OlsModel(beta, float(residuals @ residuals))
