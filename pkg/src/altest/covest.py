"""Noise covariance estimation from fit residuals, with spectral conditioning
so the estimate is always safely invertible downstream."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .model import Dataset

# ridge kicks in when lambda_min < EPS * max(1, lambda_max); the added ridge is
# far below the statistical noise floor of any realistic sample size
_EPS = 1e-8


@dataclass(frozen=True)
class CovEstimate:
    """Conditioned residual covariance plus spectral diagnostics.

    min_eig/max_eig describe sigma_hat after conditioning; epsilon_added is
    the ridge magnitude (0.0 when conditioning did not fire).
    """

    sigma_hat: np.ndarray
    min_eig: float
    max_eig: float
    regularized: bool
    epsilon_added: float


def estimate_covariance(data: Dataset, theta: np.ndarray) -> CovEstimate:
    """Average of residual outer products (1/n) sum r_i r_i^T at r = y - X theta,
    symmetrized and ridged if nearly singular."""
    theta = np.asarray(theta, dtype=np.float64).ravel()
    if theta.shape != (data.p,):
        raise InvalidParameterError(f"theta must have length {data.p}")
    r = data.y - np.einsum("nmp,p->nm", data.x, theta)
    s = r.T @ r / data.n
    s = (s + s.T) / 2.0
    w = np.linalg.eigvalsh(s)
    floor = _EPS * max(1.0, w[-1])
    if w[0] < floor:
        ridge = floor - w[0]
        s = s + ridge * np.eye(data.m)
        return CovEstimate(s, float(floor), float(w[-1] + ridge), True, float(ridge))
    return CovEstimate(s, float(w[0]), float(w[-1]), False, 0.0)


def spectral_sandwich(sigma_hat: np.ndarray, sigma_star: np.ndarray) -> tuple[float, float]:
    """Extreme eigenvalues of sigma_star^{-1/2} sigma_hat sigma_star^{-1/2},
    the scale-free agreement diagnostic between estimate and truth."""
    sigma_hat = np.asarray(sigma_hat, dtype=np.float64)
    sigma_star = np.asarray(sigma_star, dtype=np.float64)
    if sigma_hat.shape != sigma_star.shape or sigma_hat.ndim != 2:
        raise InvalidParameterError("matrices must be square and same shape")
    if np.max(np.abs(sigma_hat - sigma_hat.T)) > 1e-10 * max(1.0, np.max(np.abs(sigma_hat))):
        raise InvalidParameterError("sigma_hat must be symmetric")
    w, v = np.linalg.eigh(sigma_star)
    if w[0] <= 0:
        raise InvalidParameterError("sigma_star must be positive definite")
    inv_half = (v / np.sqrt(w)) @ v.T
    mid = inv_half @ sigma_hat @ inv_half
    eigs = np.linalg.eigvalsh((mid + mid.T) / 2.0)
    return float(eigs[0]), float(eigs[-1])
