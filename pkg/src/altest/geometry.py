"""Geometric measures behind the recovery guarantees: the covariance error
factor xi, Gaussian widths of the norm ball and the descent cone, restricted
norm compatibility, and the oracle/floor error levels assembled from them.

Widths are Monte Carlo estimates with reported standard errors; the descent
cone width uses the polar-cone distance, which for the L1 norm reduces to a
one-dimensional soft-threshold minimization solved by golden-section search.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundDivergenceError, InvalidParameterError
from .model import ModelSpec

_CHUNK = 4096
_GOLDEN_STEPS = 80  # bracket shrinks by 0.618 per step; 80 steps reach ~1e-10
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class McEstimate:
    value: float
    se: float
    samples: int


@dataclass(frozen=True)
class PsiEstimate:
    """Restricted norm compatibility: analytic bound and a sampled lower
    estimate (sampled suprema systematically undershoot, so the bound is the
    number to report)."""

    analytic: float
    sampled_lower: float
    samples: int


@dataclass(frozen=True)
class GeometryReport:
    xi_sigma: float
    xi_star: float
    width_ball: McEstimate
    width_cone: McEstimate
    psi: PsiEstimate
    e_orc: float
    e_min: float
    mc_samples: int


def xi_factor(sigma: np.ndarray, sigma_star: np.ndarray) -> float:
    """sqrt(tr(S^{-1} S* S^{-1})) / tr(S^{-1}) for S = sigma, S* = sigma_star.

    Minimized over S at S = sigma_star, where it equals 1/sqrt(tr(S*^{-1})).
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    sigma_star = np.asarray(sigma_star, dtype=np.float64)
    if sigma.shape != sigma_star.shape or sigma.ndim != 2:
        raise InvalidParameterError("sigma and sigma_star must be square, same shape")
    w, v = np.linalg.eigh((sigma + sigma.T) / 2.0)
    if w[0] <= 0:
        raise InvalidParameterError("sigma must be positive definite")
    inv = (v / w) @ v.T
    num = math.sqrt(float(np.trace(inv @ sigma_star @ inv)))
    return num / float(np.trace(inv))


def xi_minimizer_check(
    sigma_star: np.ndarray, trials: int, rng: np.random.Generator
) -> tuple[bool, float]:
    """Check xi(sigma_star) <= xi(S) + 1e-12 over `trials` random SPD matrices
    S = G G^T / m + 1e-6 I. Returns (passed, worst_violation)."""
    sigma_star = np.asarray(sigma_star, dtype=np.float64)
    m = sigma_star.shape[0]
    xi_star = xi_factor(sigma_star, sigma_star)
    worst = 0.0
    for _ in range(trials):
        g = rng.standard_normal((m, m))
        s = g @ g.T / m + 1e-6 * np.eye(m)
        worst = max(worst, xi_star - xi_factor(s, sigma_star))
    return worst <= 1e-12, worst


def width_l1_ball(p: int, samples: int, rng: np.random.Generator) -> McEstimate:
    """Gaussian width of the unit L1 ball: E max_j |g_j|, by Monte Carlo."""
    if p < 1:
        raise InvalidParameterError("p must be >= 1")
    if samples < 2:
        raise InvalidParameterError("need at least 2 samples")
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        k = min(_CHUNK, samples - done)
        sup = np.max(np.abs(rng.standard_normal((k, p))), axis=1)
        total += float(np.sum(sup))
        total_sq += float(np.sum(sup * sup))
        done += k
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    return McEstimate(mean, math.sqrt(var / samples), samples)


def _polar_obj(tau: np.ndarray, a: np.ndarray, off_abs: np.ndarray) -> np.ndarray:
    """Squared distance from each sample to tau * (subdifferential of the L1
    norm at theta*): sum_S (a_j - tau)^2 + sum_off (|g_j| - tau)_+^2."""
    on = np.sum((a - tau[:, None]) ** 2, axis=1)
    if off_abs.shape[1] == 0:
        return on
    return on + np.sum(np.maximum(off_abs - tau[:, None], 0.0) ** 2, axis=1)


def _argmin_tau(a: np.ndarray, off_abs: np.ndarray) -> np.ndarray:
    """Minimizer over tau >= 0 of the polar-distance objective, one
    golden-section search per sample, vectorized across samples.

    a: (k, s) support entries of g aligned with sign(theta*); off_abs:
    (k, p-s) magnitudes of the off-support entries. The objective is convex
    in tau and its minimizer is at most max(mean(a), max|g_off|).
    """
    k = a.shape[0]
    lo = np.zeros(k)
    hi = np.maximum(np.mean(a, axis=1), 0.0)
    if off_abs.shape[1]:
        hi = np.maximum(hi, np.max(off_abs, axis=1))
    hi = hi + 1.0
    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    f1 = _polar_obj(x1, a, off_abs)
    f2 = _polar_obj(x2, a, off_abs)
    for _ in range(_GOLDEN_STEPS):
        shrink_right = f1 < f2
        hi = np.where(shrink_right, x2, hi)
        lo = np.where(shrink_right, lo, x1)
        x1 = hi - _INVPHI * (hi - lo)
        x2 = lo + _INVPHI * (hi - lo)
        f1 = _polar_obj(x1, a, off_abs)
        f2 = _polar_obj(x2, a, off_abs)
    return (lo + hi) / 2.0


def _polar_dist_sq(a: np.ndarray, off_abs: np.ndarray) -> np.ndarray:
    return _polar_obj(_argmin_tau(a, off_abs), a, off_abs)


def _support_split(theta_star: np.ndarray):
    theta_star = np.asarray(theta_star, dtype=np.float64).ravel()
    on = np.abs(theta_star) > 0
    if not np.any(on):
        raise InvalidParameterError("theta_star must be nonzero")
    return theta_star, on, np.sign(theta_star[on])


def width_descent_cone(
    theta_star: np.ndarray, samples: int, rng: np.random.Generator
) -> McEstimate:
    """Width of the L1 descent cone at theta_star (intersected with the unit
    sphere), estimated as sqrt of the Monte Carlo mean of the squared cone
    projection ||Pi_cone(g)||^2 = dist^2(g, polar cone).

    Depends only on the support and signs of theta_star, never its scale.
    """
    if samples < 2:
        raise InvalidParameterError("need at least 2 samples")
    theta_star, on, signs = _support_split(theta_star)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        k = min(_CHUNK, samples - done)
        g = rng.standard_normal((k, theta_star.size))
        a = g[:, on] * signs
        d2 = _polar_dist_sq(a, np.abs(g[:, ~on]))
        total += float(np.sum(d2))
        total_sq += float(np.sum(d2 * d2))
        done += k
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    value = math.sqrt(mean)
    # se of sqrt(mean) by the delta method
    se = math.sqrt(var / samples) / (2.0 * value) if value > 0 else 0.0
    return McEstimate(value, se, samples)


def restricted_norm_compat(
    theta_star: np.ndarray, samples: int, rng: np.random.Generator
) -> PsiEstimate:
    """Restricted norm compatibility sup ||v||_1 / ||v||_2 over the descent
    cone: the analytic bound 2 sqrt(s) (cone vectors obey
    ||v_off||_1 <= ||v_on||_1), plus a sampled lower estimate from projecting
    Gaussian draws onto the cone."""
    theta_star, on, signs = _support_split(theta_star)
    s = int(np.sum(on))
    analytic = 2.0 * math.sqrt(s)
    best = 0.0
    done = 0
    while done < samples:
        k = min(_CHUNK, samples - done)
        g = rng.standard_normal((k, theta_star.size))
        a = g[:, on] * signs
        off = g[:, ~on]
        # tau minimizing the polar distance, recovered by a small golden pass
        tau = _argmin_tau(a, np.abs(off))
        v_on = a - tau[:, None]
        v_off = np.sign(off) * np.maximum(np.abs(off) - tau[:, None], 0.0)
        l1 = np.sum(np.abs(v_on), axis=1) + np.sum(np.abs(v_off), axis=1)
        l2 = np.sqrt(np.sum(v_on**2, axis=1) + np.sum(v_off**2, axis=1))
        ok = l2 > 1e-12
        if np.any(ok):
            best = max(best, float(np.max(l1[ok] / l2[ok])))
        done += k
    return PsiEstimate(analytic, best, samples)


def bound_values(
    spec: ModelSpec,
    n: int,
    kappa: float = 1.0,
    mu_max: float = 1.0,
    mu_min: float = 1.0,
    c1: float = 1.0,
    c: float = 1.0,
    kappa0: float = 1.0,
    width_ball_value: float | None = None,
    samples: int = 100_000,
    rng: np.random.Generator | None = None,
) -> tuple[float, float]:
    """Oracle error level e_orc and minimum achievable floor e_min, up to the
    user-supplied constants (all default 1; Gaussian design has
    mu_max = mu_min = 1).

    e_orc = c1 kappa sqrt(mu_max / mu_min^2) xi(S*) Psi(theta*) w(B) / sqrt(n)
    e_min = e_orc (1 + 2 c kappa0 (m/n)^{1/4})
                / (1 - 2 e_orc sqrt(mu_max / lambda_min(S*)))

    Raises BoundDivergenceError when the denominator is nonpositive.
    """
    e_orc = _oracle_level(spec, n, kappa, mu_max, mu_min, c1, width_ball_value, samples, rng)
    lam_min = float(np.linalg.eigvalsh(spec.sigma_star)[0])
    denom = 1.0 - 2.0 * e_orc * math.sqrt(mu_max / lam_min)
    if denom <= 0.0:
        raise BoundDivergenceError(
            f"floor formula diverges: 1 - 2 e_orc sqrt(mu_max/lambda_min) = {denom:.3e}"
        )
    e_min = e_orc * (1.0 + 2.0 * c * kappa0 * (spec.m / n) ** 0.25) / denom
    return e_orc, e_min


def _oracle_level(spec, n, kappa, mu_max, mu_min, c1, width_ball_value, samples, rng) -> float:
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    if width_ball_value is None:
        if rng is None:
            raise InvalidParameterError("provide width_ball_value or an rng for MC")
        width_ball_value = width_l1_ball(spec.p, samples, rng).value
    s = int(np.sum(np.abs(spec.theta_star) > 0))
    if s == 0:
        raise InvalidParameterError("theta_star must be nonzero")
    psi = 2.0 * math.sqrt(s)
    xi_star = xi_factor(spec.sigma_star, spec.sigma_star)
    return c1 * kappa * math.sqrt(mu_max / mu_min**2) * xi_star * psi * width_ball_value / math.sqrt(n)


def noise_shape_factors(sigma: np.ndarray, sigma_star: np.ndarray) -> tuple[float, float]:
    """rho = sup_{v in B} ||v||_2 (1 for the L1 ball) and the Frobenius/spectral
    ratio of S^{-1} S*^{1/2}; reported for completeness, driving no algorithmic
    decision."""
    sigma = np.asarray(sigma, dtype=np.float64)
    sigma_star = np.asarray(sigma_star, dtype=np.float64)
    w, v = np.linalg.eigh((sigma + sigma.T) / 2.0)
    if w[0] <= 0:
        raise InvalidParameterError("sigma must be positive definite")
    inv = (v / w) @ v.T
    ws, vs = np.linalg.eigh((sigma_star + sigma_star.T) / 2.0)
    if ws[0] <= 0:
        raise InvalidParameterError("sigma_star must be positive definite")
    half = (vs * np.sqrt(ws)) @ vs.T
    mat = inv @ half
    fro = float(np.linalg.norm(mat, "fro"))
    spec_norm = float(np.linalg.norm(mat, 2))
    return 1.0, fro / spec_norm


def geometry_report(
    spec: ModelSpec,
    sigma: np.ndarray | None,
    n: int,
    samples: int,
    rng: np.random.Generator,
) -> GeometryReport:
    """Assemble the full geometric summary for a model at sample size n.

    sigma defaults to the identity (the covariance the plain selector uses).
    A divergent floor formula (sample size below the contraction threshold)
    reports e_min as inf rather than failing the whole report.
    """
    if sigma is None:
        sigma = np.eye(spec.m)
    xi_sigma = xi_factor(sigma, spec.sigma_star)
    xi_star = xi_factor(spec.sigma_star, spec.sigma_star)
    wb = width_l1_ball(spec.p, samples, rng)
    wc = width_descent_cone(spec.theta_star, samples, rng)
    psi = restricted_norm_compat(spec.theta_star, samples, rng)
    try:
        e_orc, e_min = bound_values(spec, n, width_ball_value=wb.value)
    except BoundDivergenceError:
        e_orc = _oracle_level(spec, n, 1.0, 1.0, 1.0, 1.0, wb.value, samples, rng)
        e_min = math.inf
    return GeometryReport(xi_sigma, xi_star, wb, wc, psi, e_orc, e_min, samples)
