"""Regression models for hash-phase and network-phase durations (microseconds)."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y

from ..exceptions import FitError

REFERENCE_BETA = (1.3958, 0.081, -0.017, 0.008)
REFERENCE_SIGMA_M = 5.4542
REFERENCE_SLOPE = 0.129
REFERENCE_INTERCEPT = 12.48
REFERENCE_SIGMA_N = 1.902


def _design(N, c):
    N = np.asarray(N, dtype=float)
    c = np.asarray(c, dtype=float)
    return np.column_stack([np.ones_like(N), N, c, N * c])


def _as_pairs(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1 and X.shape[0] == 2:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != 2:
        raise FitError(f"expected an (n, 2) array of (N, c) pairs, got shape {X.shape}")
    return X


class TimingModel(BaseEstimator, RegressorMixin):
    """``y = b0 + b1*N + b2*c + b3*N*c`` with ``sigma_m_`` the mean absolute residual.

    ``X`` rows are ``(N, c)``: bytes hashed and instructions per loop iteration.
    """

    def __init__(self, rcond=None):
        self.rcond = rcond

    @classmethod
    def from_coefficients(cls, beta, sigma_m) -> "TimingModel":
        model = cls()
        model.coef_ = np.asarray(beta, dtype=float)
        model.sigma_m_ = float(sigma_m)
        model.n_features_in_ = 2
        return model

    @classmethod
    def reference(cls) -> "TimingModel":
        return cls.from_coefficients(REFERENCE_BETA, REFERENCE_SIGMA_M)

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float)
        if X.shape[1] != 2:
            raise FitError(f"expected (N, c) columns, got {X.shape[1]}")
        if X.shape[0] < 4:
            raise FitError(f"need at least 4 samples, got {X.shape[0]}")
        A = _design(X[:, 0], X[:, 1])
        # lstsq instead of explicit normal equations: same solution, better conditioned
        coef, _, rank, _ = np.linalg.lstsq(A, y, rcond=self.rcond)
        if rank < 4:
            raise FitError("singular design: need at least two distinct N and two distinct c")
        self.coef_ = coef
        self.sigma_m_ = float(np.mean(np.abs(y - A @ coef)))
        self.n_features_in_ = 2
        return self

    @property
    def beta(self) -> tuple[float, float, float, float]:
        check_is_fitted(self, "coef_")
        return tuple(float(b) for b in self.coef_)

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = _as_pairs(X)
        return _design(X[:, 0], X[:, 1]) @ self.coef_

    def evaluate(self, N, c) -> float:
        b0, b1, b2, b3 = self.beta
        return b0 + b1 * N + b2 * c + b3 * N * c

    def gradient(self, N, c) -> tuple[float, float]:
        _, b1, b2, b3 = self.beta
        return b1 + b3 * c, b2 + b3 * N

    def injection_gap(self, N, c, k) -> float:
        """Extra time from ``k`` injected instructions per loop iteration."""
        return self.evaluate(N, c + k) - self.evaluate(N, c)


class NetworkModel(BaseEstimator, RegressorMixin):
    """``y_n = slope * bytes + intercept`` with ``sigma_n_`` the mean absolute residual."""

    def __init__(self, rcond=None):
        self.rcond = rcond

    @classmethod
    def from_coefficients(cls, slope, intercept, sigma_n) -> "NetworkModel":
        model = cls()
        model.slope_ = float(slope)
        model.intercept_ = float(intercept)
        model.sigma_n_ = float(sigma_n)
        model.n_features_in_ = 1
        return model

    @classmethod
    def reference(cls) -> "NetworkModel":
        return cls.from_coefficients(REFERENCE_SLOPE, REFERENCE_INTERCEPT, REFERENCE_SIGMA_N)

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        X, y = check_X_y(X, y, dtype=float)
        if np.unique(X[:, 0]).shape[0] < 2:
            raise FitError("need at least two distinct byte counts")
        A = np.column_stack([X[:, 0], np.ones(X.shape[0])])
        (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=self.rcond)
        if slope <= 0:
            raise FitError(f"fitted slope {slope} is not positive")
        self.slope_, self.intercept_ = float(slope), float(intercept)
        self.sigma_n_ = float(np.mean(np.abs(y - A @ np.array([slope, intercept]))))
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "slope_")
        X = np.asarray(X, dtype=float).reshape(-1)
        return self.slope_ * X + self.intercept_

    def evaluate(self, nbytes) -> float:
        return self.slope_ * nbytes + self.intercept_


def fit_timing_model(samples) -> TimingModel:
    """Fit from rows ``(N, c, t_us)``."""
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise FitError(f"expected rows of (N, c, t_us), got shape {arr.shape}")
    return TimingModel().fit(arr[:, :2], arr[:, 2])


def fit_network_model(samples) -> NetworkModel:
    """Fit from rows ``(bytes, t_us)``."""
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise FitError(f"expected rows of (bytes, t_us), got shape {arr.shape}")
    return NetworkModel().fit(arr[:, 0], arr[:, 1])
