"""Reproduce the stalling small instance and inspect convergence."""

import numpy as np

from altest.gds import GdsProblem, l1_norm, solve_gds
from scripts._proto_solver_bench import lp_reference  # noqa


def make_instance(k_target):
    rng = np.random.default_rng(7)
    for k in range(k_target + 1):
        p = int(rng.integers(2, 11))
        m = int(rng.integers(1, 4))
        n = int(rng.integers(1, 9))
        X = rng.standard_normal((n, m, p))
        theta = np.zeros(p)
        nz = rng.integers(1, p + 1)
        theta[:nz] = rng.standard_normal(nz)
        y = np.einsum("nmp,p->nm", X, theta) + 0.3 * rng.standard_normal((n, m))
        G = X.reshape(n * m, p)
        gram = G.T @ G / n
        linear = G.T @ y.reshape(-1) / n
        gamma = 0.5 * np.max(np.abs(linear)) * rng.uniform(0.2, 1.5)
    return gram, linear, gamma, p, m, n


gram, linear, gamma, p, m, n = make_instance(19)
print(f"p={p} m={m} n={n} gamma={gamma:.6f}")
print("gram eigenvalues:", np.linalg.eigvalsh(gram))
ref = lp_reference(gram, linear, gamma)
print("LP objective:", ref.fun)

prob = GdsProblem(gram, linear, gamma, l1_norm(p))
for it in [1000, 5000, 20000, 50000, 200000]:
    sol = solve_gds(prob, tol=1e-6, max_iter=it)
    print(
        f"max_iter={it}: obj={sol.norm_value:.10f} feas_slack={sol.residual_dual_norm - gamma:.2e} "
        f"converged={sol.converged} diff={abs(sol.norm_value - ref.fun):.2e}"
    )
