"""Scratch: desk-scale statistics preview for the acceptance criteria."""

import time

import numpy as np

from altest.alternating import AltEstConfig, run_altest, run_oracle_gds, run_ordinary_gds
from altest.geometry import xi_factor
from altest.model import ModelSpec, make_block_sigma, sample_dataset

P, RHO, T, TRIALS, SEED = 100, 0.8, 5, 50, 2024


def desk_theta(p=P):
    theta = np.zeros(p)
    theta[:3] = 1.0
    theta[3:5] = -1.0
    return theta


def desk_spec(m, seed=SEED):
    return ModelSpec(P, m, desk_theta(), make_block_sigma(m, RHO), seed=seed)


def se(arr):
    return arr.std(ddof=1) / np.sqrt(len(arr))


def batch_c345(m=4, n=80):
    spec = desk_spec(m)
    cfg = AltEstConfig(T=T, mode="resampled")
    alt = np.zeros((TRIALS, T))
    xis = np.zeros((TRIALS, T))
    orc = np.zeros(TRIALS)
    ordi = np.zeros(TRIALS)
    t0 = time.perf_counter()
    for trial in range(TRIALS):
        data = sample_dataset(spec, 2 * T * n, stream=(0, trial))
        head = data.take(0, n)
        rep = run_altest(data, spec, cfg)
        alt[trial] = rep.theta_err
        xis[trial] = rep.xi_hat
        orc[trial] = run_oracle_gds(head, spec, cfg).err_l2
        ordi[trial] = run_ordinary_gds(head, spec, cfg).err_l2
    dt = time.perf_counter() - t0
    print(f"C3/4/5 batch: {dt:.1f}s")
    print(f"  oracle mean {orc.mean():.4f} (se {se(orc):.4f})")
    print(f"  altest  t-means {np.round(alt.mean(0), 4)}")
    print(f"  ordinary mean {ordi.mean():.4f}")
    d1 = alt[:, T - 1] - orc
    d2 = ordi - alt[:, T - 1]
    print(f"  gap altest5-oracle: {d1.mean():.4f} = {d1.mean()/se(d1):.1f} se")
    print(f"  gap ordinary-altest5: {d2.mean():.4f} = {d2.mean()/se(d2):.1f} se")
    print(f"  ratio oracle/ordinary: {orc.mean()/ordi.mean():.4f} (predict 0.6)")
    for t in range(T - 1):
        d = alt[:, t + 1] - alt[:, t]
        print(f"  err t{t+1}->t{t+2}: mean diff {d.mean():+.4f} ({d.mean()/se(d):+.1f} se)")
    lhs = alt[:, 2].mean() - alt[:, 4].mean()
    rhs = 0.25 * (alt[:, 0].mean() - alt[:, 4].mean())
    print(f"  contraction: err3-err5 = {lhs:.4f} <= 0.25*(err1-err5) = {rhs:.4f}: {lhs <= rhs}")
    xi_star = xi_factor(spec.sigma_star, spec.sigma_star)
    print(f"  xi means {np.round(xis.mean(0), 4)} vs xi* {xi_star:.4f}")
    for t in range(T - 1):
        d = xis[:, t + 1] - xis[:, t]
        print(f"  xi t{t+1}->t{t+2}: mean diff {d.mean():+.5f} ({d.mean()/se(d):+.1f} se)")


def batch_c6():
    spec = desk_spec(4, seed=SEED + 1)
    t0 = time.perf_counter()
    res = {}
    for gi, n in enumerate((30, 60, 90)):
        rs = np.zeros(TRIALS)
        pr = np.zeros(TRIALS)
        for trial in range(TRIALS):
            data = sample_dataset(spec, 2 * T * n, stream=(gi, trial))
            rep_r = run_altest(data, spec, AltEstConfig(T=T, mode="resampled"))
            rep_p = run_altest(data.take(0, n), spec, AltEstConfig(T=T, mode="practical"))
            rs[trial] = rep_r.theta_err[-1]
            pr[trial] = rep_p.theta_err[-1]
        res[n] = (rs, pr)
        print(f"C6 n={n}: resampled {rs.mean():.4f} (se {se(rs):.4f}), practical {pr.mean():.4f} (se {se(pr):.4f})")
    print(f"C6 batch: {time.perf_counter() - t0:.1f}s")
    for a, b in ((30, 60), (60, 90)):
        for k, label in ((0, "resampled"), (1, "practical")):
            ga = res[a][k].mean() - res[b][k].mean()
            gse = np.sqrt(se(res[a][k]) ** 2 + se(res[b][k]) ** 2)
            print(f"  {label} {a}->{b}: drop {ga:.4f} = {ga/gse:.1f} se")
    d = res[30][0] - res[30][1]
    print(f"  resampled - practical at n=30: {d.mean():+.4f} ({d.mean()/se(d):+.1f} se) [want <= +1 se]")


def batch_c7():
    t0 = time.perf_counter()
    out = {}
    for gi, m in enumerate((2, 4, 8)):
        n = round(480 / m)
        spec = desk_spec(m, seed=SEED + 2)
        cfg = AltEstConfig(T=T, mode="resampled")
        alt = np.zeros(TRIALS)
        orc = np.zeros(TRIALS)
        ordi = np.zeros(TRIALS)
        for trial in range(TRIALS):
            data = sample_dataset(spec, 2 * T * n, stream=(gi, trial))
            head = data.take(0, n)
            alt[trial] = run_altest(data, spec, cfg).theta_err[-1]
            orc[trial] = run_oracle_gds(head, spec, cfg).err_l2
            ordi[trial] = run_ordinary_gds(head, spec, cfg).err_l2
        out[m] = (alt, orc, ordi)
        print(f"C7 m={m} n={n}: altest {alt.mean():.4f}, oracle {orc.mean():.4f}, ordinary {ordi.mean():.4f}")
    print(f"C7 batch: {time.perf_counter() - t0:.1f}s")
    orc_means = [out[m][1].mean() for m in (2, 4, 8)]
    print(f"  oracle spread: {max(orc_means)/min(orc_means) - 1:.3f} [want < 0.20]")
    d = out[8][0].mean() - out[2][0].mean()
    gse = np.sqrt(se(out[8][0]) ** 2 + se(out[2][0]) ** 2)
    print(f"  altest m=8 vs m=2: {d:+.4f} = {d/gse:+.1f} se [want >= 1 se]")


if __name__ == "__main__":
    batch_c345()
    batch_c6()
    batch_c7()
