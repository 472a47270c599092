"""Generalized Dantzig selector: minimize ||theta|| subject to a dual-norm
bound on the correlation residual.

For the L1 norm the problem is the linear program

    min sum(u)  s.t.  -u <= theta <= u,  -gamma <= A theta - b <= gamma,

with A the p x p Gram operator and b the linear term. It is solved here by a
Chambolle-Pock primal-dual splitting on the saddle formulation

    min_theta max_w  <w, A theta> - f*(w) + ||theta||_1,
    f*(w) = <b, w> + gamma ||w||_1,

whose prox maps are both soft thresholds. Scalar steps sized by a
power-iteration estimate of ||A||_2 handle well-conditioned instances
quickly; runs that have not converged by a fixed iteration switch to
diagonal (row-sum) preconditioned steps, which unstick the ill-conditioned
small-radius regime. Throughout, the dual/primal step ratio is rebalanced
from observed movement and the iteration periodically restarts at the
better of the current iterate and the running average. All of it is
deterministic: identical inputs give bit-identical solutions. Contracts are
stated on objective value and feasibility; LP minimizers need not be unique.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    IllConditionedCovarianceError,
    InfeasibleRadiusError,
    InvalidParameterError,
)
from .model import Dataset

_POWER_SEED = 0x5EED
_CHECK_EVERY = 50
_RESTART_EVERY = 10 * _CHECK_EVERY
_PRECONDITION_AT = 2000


@dataclass(frozen=True)
class NormDescriptor:
    """Structure norm used by the selector. Only "l1" ships; the descriptor is
    the seam for other atomic norms."""

    kind: str
    dimension: int

    def __post_init__(self):
        if self.kind != "l1":
            raise InvalidParameterError(f"unsupported norm kind {self.kind!r}")
        if self.dimension < 1:
            raise InvalidParameterError("dimension must be >= 1")

    def value(self, v: np.ndarray) -> float:
        return float(np.sum(np.abs(v)))

    def dual_value(self, v: np.ndarray) -> float:
        return float(np.max(np.abs(v)))

    def in_subdifferential(self, w: np.ndarray, v: np.ndarray, tol: float = 1e-10) -> bool:
        """Membership test for w in the subdifferential of the norm at v."""
        if np.max(np.abs(w)) > 1.0 + tol:
            return False
        on = np.abs(v) > tol
        return bool(np.all(np.abs(w[on] - np.sign(v[on])) <= tol))


def l1_norm(p: int) -> NormDescriptor:
    return NormDescriptor("l1", p)


@dataclass(frozen=True)
class GdsProblem:
    """Assembled selector instance: Gram operator, linear term, radius."""

    gram: np.ndarray
    linear: np.ndarray
    gamma: float
    norm: NormDescriptor

    def __post_init__(self):
        gram = np.asarray(self.gram, dtype=np.float64)
        linear = np.asarray(self.linear, dtype=np.float64).ravel()
        p = self.norm.dimension
        if gram.shape != (p, p) or linear.shape != (p,):
            raise InvalidParameterError("gram/linear shapes must match the norm dimension")
        scale = np.max(np.abs(gram)) if gram.size else 0.0
        if np.max(np.abs(gram - gram.T)) > 1e-10 * max(1.0, scale):
            raise InvalidParameterError("gram must be symmetric")
        if self.gamma < 0:
            raise InvalidParameterError("gamma must be >= 0")
        object.__setattr__(self, "gram", gram)
        object.__setattr__(self, "linear", linear)
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def p(self) -> int:
        return self.norm.dimension


@dataclass(frozen=True)
class GdsSolution:
    theta_hat: np.ndarray
    residual_dual_norm: float
    norm_value: float
    solver_iterations: int
    converged: bool


def assemble_problem(
    data: Dataset, sigma: np.ndarray, gamma: float, norm: NormDescriptor
) -> GdsProblem:
    """Build gram = (1/n) sum X_i^T sigma^{-1} X_i and
    linear = (1/n) sum X_i^T sigma^{-1} y_i via one factorization of sigma."""
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.shape != (data.m, data.m):
        raise InvalidParameterError(f"sigma must be {data.m}x{data.m}")
    w, v = np.linalg.eigh((sigma + sigma.T) / 2.0)
    if w[0] <= 1e-10 * max(1.0, w[-1]):
        raise IllConditionedCovarianceError(
            f"sigma min eigenvalue {w[0]:.3e} too small to invert"
        )
    # sigma^{-1} = M^T M with M = W^{-1/2} V^T, so the sums collapse to one
    # stacked Gram product over all n*m whitened rows.
    half = (v / np.sqrt(w)).T
    xw = np.einsum("ab,nbp->nap", half, data.x, optimize=True)
    g = xw.reshape(data.n * data.m, data.p)
    yw = (data.y @ half.T).reshape(data.n * data.m)
    gram = g.T @ g / data.n
    gram = (gram + gram.T) / 2.0
    linear = g.T @ yw / data.n
    return GdsProblem(gram, linear, gamma, norm)


def residual_dual_norm(problem: GdsProblem, theta: np.ndarray) -> float:
    """Exact dual norm of the correlation residual gram @ theta - linear,
    recomputed independently of any solver state."""
    theta = np.asarray(theta, dtype=np.float64).ravel()
    if theta.shape != (problem.p,):
        raise InvalidParameterError(f"theta must have length {problem.p}")
    return problem.norm.dual_value(problem.gram @ theta - problem.linear)


def _power_norm(a: np.ndarray) -> float:
    """Largest eigenvalue of the symmetric PSD matrix a by power iteration,
    deterministic across calls."""
    rng = np.random.default_rng(_POWER_SEED)
    v = rng.standard_normal(a.shape[0])
    norm = np.linalg.norm(v)
    if norm == 0.0:
        return 0.0
    v /= norm
    lam = 0.0
    for _ in range(500):
        w = a @ v
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(nw - lam) <= 1e-12 * max(nw, 1.0):
            break
        lam = nw
    return max(lam, float(np.max(np.diag(a))))


def _soft(v: np.ndarray, t) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def solve_gds(problem: GdsProblem, tol: float = 1e-6, max_iter: int = 50_000) -> GdsSolution:
    """Solve the selector to objective accuracy tol * max(1, ||theta||_1) and
    feasibility slack tol.

    A point slightly outside the constraint set can undercut the true
    optimum by (slack * dual norm), so the convergence test bounds the
    duality gap and that undershoot together.

    Raises InfeasibleRadiusError when infeasibility is certified (possible
    when gamma is below the minimal achievable residual, e.g. gamma = 0 with
    a gram whose range misses the linear term). Returns the best iterate with
    converged=False if max_iter is exhausted.
    """
    if tol <= 0:
        raise InvalidParameterError("tol must be > 0")
    a, b, gamma = problem.gram, problem.linear, problem.gamma
    p = problem.p

    if float(np.max(np.abs(b))) <= gamma:
        # zero is feasible, hence norm-minimal
        theta = np.zeros(p)
        return GdsSolution(theta, residual_dual_norm(problem, theta), 0.0, 0, True)

    lam = _power_norm(a)
    if lam == 0.0:
        # gram is identically zero and ||b||_inf > gamma: certified infeasible
        raise InfeasibleRadiusError("zero gram cannot meet the residual constraint")
    base = 0.95 / lam
    omega = 1.0
    sig, tau = base, base
    # any plausible optimum has L1 norm on the scale of ||b||_1 / lambda_max;
    # a dual lower bound astronomically above that certifies infeasibility
    infeas_level = 1e10 * max(1.0, float(np.sum(np.abs(b))) / lam)

    def dual_lower(uu: np.ndarray, au: np.ndarray) -> float:
        scale = max(1.0, float(np.max(np.abs(au))))
        return (-float(b @ uu) - gamma * float(np.sum(np.abs(uu)))) / scale

    def measures(th: np.ndarray, uu: np.ndarray, au: np.ndarray):
        feas = max(0.0, float(np.max(np.abs(a @ th - b))) - gamma)
        obj = float(np.sum(np.abs(th)))
        # undershoot from infeasibility is at most feas * ||u*||_1
        slack_cost = feas * float(np.sum(np.abs(uu)))
        gap = obj - dual_lower(uu, au)
        converged = feas <= tol and gap + slack_cost <= tol * max(1.0, obj)
        return converged, feas, obj, gap

    theta = np.zeros(p)
    theta_bar = np.zeros(p)
    u = np.zeros(p)
    sum_theta = np.zeros(p)
    sum_u = np.zeros(p)
    in_avg = 0
    anchor_theta, anchor_u = theta.copy(), u.copy()
    best_theta, best_obj = None, math.inf
    geometry_checked = False
    it = 0
    while it < max_iter:
        it += 1
        u = _soft(u + sig * (a @ theta_bar - b), sig * gamma)
        au = a @ u
        theta_new = _soft(theta - tau * au, tau)
        theta_bar = 2.0 * theta_new - theta
        theta = theta_new
        sum_theta += theta
        sum_u += u
        in_avg += 1
        if it % _CHECK_EVERY == 0 or it == max_iter:
            done, feas, obj, gap = measures(theta, u, au)
            if feas <= tol and obj < best_obj:
                best_theta, best_obj = theta.copy(), obj
            if done:
                return GdsSolution(
                    theta, residual_dual_norm(problem, theta), obj, it, True
                )
            if dual_lower(u, au) > infeas_level:
                raise InfeasibleRadiusError(
                    "dual lower bound exceeds any plausible primal value; "
                    "no theta satisfies the residual constraint"
                )
            if best_theta is None and it >= 1000 and not geometry_checked:
                # no feasible iterate yet: check whether one can exist at all.
                # The least-squares residual is b's component outside range(a),
                # common to every theta, so min ||a theta - b||_inf is at least
                # its L2 norm / sqrt(p).
                geometry_checked = True
                theta_ls = np.linalg.lstsq(a, b, rcond=None)[0]
                resid = float(np.linalg.norm(a @ theta_ls - b))
                if resid / math.sqrt(p) > gamma * (1.0 + 1e-9) + 1e-12:
                    raise InfeasibleRadiusError(
                        f"residual floor {resid / math.sqrt(p):.3e} exceeds "
                        f"gamma={gamma:.3e}; the constraint set is empty"
                    )
            if it % _RESTART_EVERY == 0:
                avg_theta = sum_theta / in_avg
                avg_u = sum_u / in_avg
                avg_au = a @ avg_u
                done_a, feas_a, obj_a, gap_a = measures(avg_theta, avg_u, avg_au)
                if feas_a <= tol and obj_a < best_obj:
                    best_theta, best_obj = avg_theta.copy(), obj_a
                if done_a:
                    return GdsSolution(
                        avg_theta,
                        residual_dual_norm(problem, avg_theta),
                        obj_a,
                        it,
                        True,
                    )
                # restart from whichever point scores better; while the dual
                # is still drifting the current iterate wins and only the
                # averaging window resets
                if feas_a + max(gap_a, 0.0) < feas + max(gap, 0.0):
                    theta, u = avg_theta, avg_u
                    theta_bar = theta.copy()
                dx = float(np.linalg.norm(theta - anchor_theta))
                dy = float(np.linalg.norm(u - anchor_u))
                if dx > 1e-30 and dy > 1e-30:
                    omega = min(max(math.sqrt(omega * dy / dx), 1e-4), 1e4)
                if it == _PRECONDITION_AT:
                    # still unconverged: swap in row-sum preconditioned steps,
                    # which handle ill-conditioned grams far more robustly
                    base = 0.95 / np.maximum(np.sum(np.abs(a), axis=1), 1e-300)
                sig, tau = base * omega, base / omega
                anchor_theta, anchor_u = theta.copy(), u.copy()
                sum_theta = np.zeros(p)
                sum_u = np.zeros(p)
                in_avg = 0
    theta = best_theta if best_theta is not None else theta
    return GdsSolution(
        theta,
        residual_dual_norm(problem, theta),
        float(np.sum(np.abs(theta))),
        max_iter,
        False,
    )


def solve_single_response(
    X: np.ndarray,
    y: np.ndarray,
    gamma: float,
    norm: NormDescriptor,
    tol: float = 1e-6,
    max_iter: int = 50_000,
) -> GdsSolution:
    """Single-observation selector with identity noise covariance and the
    unnormalized constraint ||X^T (X theta - y)||_* <= gamma."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise InvalidParameterError("X must be (m, p) and y length m")
    problem = GdsProblem(X.T @ X, X.T @ y, gamma, norm)
    return solve_gds(problem, tol=tol, max_iter=max_iter)
