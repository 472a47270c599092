"""Ground-truth model definition, synthetic data generation, and the
disjoint-subset plan used by the resampled alternating scheme.

The generative model: each observation i carries an m x p design block X_i
with i.i.d. standard Gaussian entries and an m-vector response
y_i = X_i theta_star + eta_i, with eta_i zero-mean Gaussian whose covariance
sigma_star has unit diagonal.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, InvalidParameterError
from .rng import stream_rng

_SYM_TOL = 1e-12


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class ModelSpec:
    """Problem definition: true coefficients, true noise covariance, sizes.

    design is a descriptor of the row distribution of X; only i.i.d. standard
    Gaussian entries ("gaussian") are implemented.
    """

    p: int
    m: int
    theta_star: np.ndarray
    sigma_star: np.ndarray
    design: str = "gaussian"
    seed: int = 0

    def __post_init__(self):
        if self.p < 1 or self.m < 1:
            raise InvalidParameterError("p and m must be >= 1")
        if self.design != "gaussian":
            raise InvalidParameterError(f"unsupported design {self.design!r}")
        theta = _freeze(np.asarray(self.theta_star, dtype=np.float64).ravel())
        sigma = _freeze(np.asarray(self.sigma_star, dtype=np.float64))
        if theta.shape != (self.p,):
            raise InvalidParameterError(f"theta_star must have length p={self.p}")
        if sigma.shape != (self.m, self.m):
            raise InvalidParameterError(f"sigma_star must be {self.m}x{self.m}")
        if np.max(np.abs(sigma - sigma.T)) > _SYM_TOL:
            raise InvalidParameterError("sigma_star must be symmetric within 1e-12")
        if np.max(np.abs(np.diag(sigma) - 1.0)) > _SYM_TOL:
            raise InvalidParameterError("sigma_star must have unit diagonal")
        if np.linalg.eigvalsh(sigma)[0] <= 0.0:
            raise InvalidParameterError("sigma_star must be positive definite")
        object.__setattr__(self, "theta_star", theta)
        object.__setattr__(self, "sigma_star", sigma)

    def noise_factor(self) -> np.ndarray:
        """Symmetric-eigendecomposition factor F with F F^T = sigma_star.

        Eigenvalues below 1e-12 are clamped to zero so a near-singular
        covariance degrades gracefully instead of raising.
        """
        w, v = np.linalg.eigh(self.sigma_star)
        w = np.where(w < 1e-12, 0.0, w)
        return v * np.sqrt(w)


@dataclass(frozen=True)
class Dataset:
    """n observations: design blocks x (n, m, p) and responses y (n, m).

    noise keeps the realized eta draws when the dataset is synthetic; it is
    None for datasets loaded from disk, which disables the exact-noise gamma
    rule.
    """

    x: np.ndarray
    y: np.ndarray
    noise: np.ndarray | None = None

    def __post_init__(self):
        x = _freeze(self.x)
        y = _freeze(self.y)
        if x.ndim != 3:
            raise InvalidParameterError("x must have shape (n, m, p)")
        n, m, _ = x.shape
        if y.shape != (n, m):
            raise InvalidParameterError("y must have shape (n, m) matching x")
        if n < 1:
            raise InvalidParameterError("dataset needs at least one observation")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if self.noise is not None:
            noise = _freeze(self.noise)
            if noise.shape != (n, m):
                raise InvalidParameterError("noise must have shape (n, m)")
            object.__setattr__(self, "noise", noise)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def m(self) -> int:
        return self.x.shape[1]

    @property
    def p(self) -> int:
        return self.x.shape[2]

    def observations(self):
        """Iterate (X_i, y_i) pairs."""
        return zip(self.x, self.y)

    def take(self, start: int, stop: int) -> "Dataset":
        """Contiguous sub-dataset over observations [start, stop)."""
        if not (0 <= start < stop <= self.n):
            raise InvalidParameterError(f"bad observation range [{start}, {stop})")
        noise = None if self.noise is None else self.noise[start:stop]
        return Dataset(self.x[start:stop], self.y[start:stop], noise)


@dataclass(frozen=True)
class ResamplingPlan:
    """2T disjoint contiguous index ranges into a parent dataset.

    Range 2t-1 (1-based) feeds the coefficient update at iteration t and
    range 2t feeds the covariance update.
    """

    subsets: tuple[tuple[int, int], ...]
    T: int = field(default=0)

    def __post_init__(self):
        if self.T < 1 or len(self.subsets) != 2 * self.T:
            raise InvalidParameterError("plan must contain exactly 2T subsets")
        prev_stop = 0
        for start, stop in self.subsets:
            if start != prev_stop or stop <= start:
                raise InvalidParameterError("subsets must be nonempty, disjoint, contiguous")
            prev_stop = stop

    def gds_range(self, t: int) -> tuple[int, int]:
        """Index range feeding the coefficient update at iteration t (1-based)."""
        return self.subsets[2 * t - 2]

    def cov_range(self, t: int) -> tuple[int, int]:
        """Index range feeding the covariance update at iteration t (1-based)."""
        return self.subsets[2 * t - 1]


def make_block_sigma(m: int, rho: float) -> np.ndarray:
    """Block-diagonal covariance with 2x2 blocks [[1, rho], [rho, 1]]."""
    if m < 2 or m % 2 != 0:
        raise InvalidParameterError("m must be even and >= 2")
    if not abs(rho) < 1.0:
        raise InvalidParameterError("|rho| must be < 1")
    sigma = np.eye(m)
    for k in range(0, m, 2):
        sigma[k, k + 1] = rho
        sigma[k + 1, k] = rho
    return sigma


def make_sparse_theta(p: int, s: int, magnitude: float = 1.0) -> np.ndarray:
    """Coefficient vector with s/2 entries +magnitude, s/2 entries -magnitude,
    and p - s zeros."""
    if s <= 0 or s > p:
        raise InvalidParameterError("need 0 < s <= p")
    if s % 2 != 0:
        raise InvalidParameterError("s must be even")
    theta = np.zeros(p)
    theta[: s // 2] = magnitude
    theta[s // 2 : s] = -magnitude
    return theta


def sample_dataset(spec: ModelSpec, n: int, stream: int | tuple[int, ...] = 0) -> Dataset:
    """Draw n observations from the model, deterministically for a given
    (spec.seed, stream)."""
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    key = stream if isinstance(stream, tuple) else (stream,)
    rng = stream_rng(spec.seed, *key)
    x = rng.standard_normal((n, spec.m, spec.p))
    z = rng.standard_normal((n, spec.m))
    noise = z @ spec.noise_factor().T
    y = np.einsum("nmp,p->nm", x, spec.theta_star) + noise
    return Dataset(x, y, noise)


def plan_resampling(data: Dataset, T: int) -> ResamplingPlan:
    """Split the first data.n indices into 2T contiguous disjoint subsets of
    equal size (floor division); leftover observations are appended to the
    final subset, which feeds the last covariance update."""
    if T < 1:
        raise InvalidParameterError("T must be >= 1")
    if data.n < 2 * T:
        raise InsufficientDataError(f"need at least 2T={2 * T} observations, have {data.n}")
    base = data.n // (2 * T)
    bounds = []
    for k in range(2 * T):
        start = k * base
        stop = (k + 1) * base if k < 2 * T - 1 else data.n
        bounds.append((start, stop))
    return ResamplingPlan(tuple(bounds), T)
