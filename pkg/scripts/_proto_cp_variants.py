"""Scratch: compare CP variants on the hard small instance + speed check on
desk instances. Not part of the deliverable."""

import time

import numpy as np
from scipy.optimize import linprog


def lp_reference(gram, linear, gamma):
    p = gram.shape[0]
    c = np.concatenate([np.zeros(p), np.ones(p)])
    I = np.eye(p)
    A_ub = np.block(
        [[I, -I], [-I, -I], [gram, np.zeros((p, p))], [-gram, np.zeros((p, p))]]
    )
    b_ub = np.concatenate([np.zeros(2 * p), linear + gamma, gamma - linear])
    return linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=(None, None), method="highs")


def soft(v, t):
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def cp(a, b, gamma, tol=1e-6, max_iter=200_000, eta=1.0, restart=0, check=50):
    """eta: dual/primal step ratio (sigma = eta*s, tau = s/eta).
    restart>0: every `restart` checks, reset iterates to running averages."""
    p = a.shape[0]
    lam = np.linalg.eigvalsh(a)[-1]
    s = 0.95 / lam
    sig, tau = s * eta, s / eta
    theta = np.zeros(p)
    theta_bar = np.zeros(p)
    u = np.zeros(p)
    sum_theta = np.zeros(p)
    sum_u = np.zeros(p)
    navg = 0
    checks = 0
    for it in range(1, max_iter + 1):
        u = soft(u + sig * (a @ theta_bar - b), sig * gamma)
        au = a @ u
        theta_new = soft(theta - tau * au, tau)
        theta_bar = 2.0 * theta_new - theta
        theta = theta_new
        sum_theta += theta
        sum_u += u
        navg += 1
        if it % check == 0:
            feas = max(0.0, np.max(np.abs(a @ theta - b)) - gamma)
            obj = np.sum(np.abs(theta))
            scale = max(1.0, np.max(np.abs(au)))
            lower = (-(b @ u) - gamma * np.sum(np.abs(u))) / scale
            if feas <= tol and obj - lower <= tol * max(1.0, obj):
                return theta, it, True
            checks += 1
            if restart and checks % restart == 0:
                theta = sum_theta / navg
                u = sum_u / navg
                theta_bar = theta.copy()
                sum_theta = np.zeros(p)
                sum_u = np.zeros(p)
                navg = 0
    return theta, max_iter, False


def instance19():
    rng = np.random.default_rng(7)
    for k in range(20):
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
    return gram, linear, gamma


gram, linear, gamma = instance19()
ref = lp_reference(gram, linear, gamma)
print("instance19 LP obj:", ref.fun)
for eta in [1.0, 4.0, 16.0, 64.0]:
    for restart in [0, 10]:
        th, it, conv = cp(gram, linear, gamma, eta=eta, restart=restart)
        print(
            f"eta={eta:5.1f} restart={restart:2d}: iters={it:6d} conv={conv} "
            f"diff={abs(np.sum(np.abs(th)) - ref.fun):.2e}"
        )
