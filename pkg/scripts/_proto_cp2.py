"""Scratch: CP with best-of(average, current) restarts + primal weight update."""

import json

import numpy as np


def soft(v, t):
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def cp2(a, b, gamma, tol=1e-6, max_iter=50_000, check=50, restart_every=500):
    p = a.shape[0]
    lam = np.linalg.eigvalsh(a)[-1]
    if lam == 0:
        raise ValueError
    s0 = 0.95 / lam
    omega = 1.0
    sig, tau = s0 * omega, s0 / omega
    theta = np.zeros(p)
    theta_bar = np.zeros(p)
    u = np.zeros(p)
    sum_t = np.zeros(p)
    sum_u = np.zeros(p)
    k_avg = 0
    rt, ru = theta.copy(), u.copy()

    def score(th, uu, au=None):
        feas = max(0.0, np.max(np.abs(a @ th - b)) - gamma)
        obj = np.sum(np.abs(th))
        au = a @ uu if au is None else au
        scale = max(1.0, np.max(np.abs(au)))
        lower = (-(b @ uu) - gamma * np.sum(np.abs(uu))) / scale
        gap = obj - lower
        return feas + max(gap, 0.0), feas, obj, gap

    for it in range(1, max_iter + 1):
        u = soft(u + sig * (a @ theta_bar - b), sig * gamma)
        au = a @ u
        tn = soft(theta - tau * au, tau)
        theta_bar = 2.0 * tn - theta
        theta = tn
        sum_t += theta
        sum_u += u
        k_avg += 1
        if it % check == 0:
            _, feas, obj, gap = score(theta, u, au)
            if feas <= tol and gap <= tol * max(1.0, obj):
                return theta, it, True, omega
            if it % restart_every == 0:
                t_avg, u_avg = sum_t / k_avg, sum_u / k_avg
                s_avg, feas_a, obj_a, gap_a = score(t_avg, u_avg)
                if feas_a <= tol and gap_a <= tol * max(1.0, obj_a):
                    return t_avg, it, True, omega
                s_cur = score(theta, u, au)[0]
                if s_avg < s_cur:
                    theta, u = t_avg.copy(), u_avg.copy()
                    theta_bar = theta.copy()
                dx = np.linalg.norm(theta - rt)
                dy = np.linalg.norm(u - ru)
                if dx > 1e-30 and dy > 1e-30:
                    omega = min(max(np.sqrt(omega * dy / dx), 1e-6), 1e6)
                    sig, tau = s0 * omega, s0 / omega
                rt, ru = theta.copy(), u.copy()
                sum_t = np.zeros(p)
                sum_u = np.zeros(p)
                k_avg = 0
    return theta, max_iter, False, omega


if __name__ == "__main__":
    gram = np.load("/tmp/bad_gram.npy")
    linear = np.load("/tmp/bad_linear.npy")
    gamma = json.load(open("/tmp/bad_gamma.json"))["gamma"]
    th, it, conv, om = cp2(gram, linear, gamma)
    print(
        f"instance111: obj={np.sum(np.abs(th)):.6f} (ref 0.629389) "
        f"iters={it} conv={conv} omega={om:.2f} "
        f"feas={np.max(np.abs(gram @ th - linear)) - gamma:.2e}"
    )
