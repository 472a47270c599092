"""Trial-batch harness: runs the selected estimators over a grid of problem
sizes, many seeded trials each, and writes a flat CSV plus aggregated
summaries.

Determinism contract: rows appear in a fixed order (grid-major, then trial,
then method, then iteration) and every float except wall_ms is reproducible
for a given config and seed; per-trial RNG streams are keyed by
(grid index, trial index) so scheduling cannot change results.
"""

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .alternating import (
    GAMMA_RULES,
    AltEstConfig,
    run_altest,
    run_oracle_gds,
    run_ordinary_gds,
)
from .errors import AltEstError, ConfigError
from .geometry import xi_factor
from .model import ModelSpec, make_block_sigma, make_sparse_theta, sample_dataset

METHODS = ("altest_resampled", "altest_practical", "oracle", "ordinary")

CSV_HEADER = "trial,method,n,m,iteration,err_l2,xi_hat,gamma_used,converged,wall_ms"
_COLUMNS = CSV_HEADER.split(",")


@dataclass(frozen=True)
class ExperimentConfig:
    preset: str = "custom"
    p: int = 100
    s: int = 4
    m: int = 4
    rho: float = 0.8
    T: int = 5
    trials: int = 50
    n_grid: tuple[int, ...] | None = (40, 80)
    mn_budget: int | None = None
    m_grid: tuple[int, ...] | None = None
    methods: tuple[str, ...] = METHODS
    gamma_rule: str = "oracle_noise"
    gamma_scale: float = 1.1
    gamma_fixed: float | None = None
    solver_tol: float = 1e-6
    seed: int = 0
    out_dir: str = "results"
    jobs: int = 1

    def __post_init__(self):
        if self.preset not in ("fig1", "fig2", "custom"):
            raise ConfigError(f"preset: unknown preset {self.preset!r}")
        if self.p < 1:
            raise ConfigError("p: must be >= 1")
        if not (0 < self.s <= self.p) or self.s % 2 != 0:
            raise ConfigError("s: must be even with 0 < s <= p")
        if not abs(self.rho) < 1:
            raise ConfigError("rho: must satisfy |rho| < 1")
        if self.T < 1:
            raise ConfigError("T: must be >= 1")
        if self.trials < 1:
            raise ConfigError("trials: must be >= 1")
        if not self.methods:
            raise ConfigError("methods: select at least one method")
        for meth in self.methods:
            if meth not in METHODS:
                raise ConfigError(f"methods: unknown method {meth!r}")
        if self.gamma_rule not in GAMMA_RULES:
            raise ConfigError(f"gamma_rule: must be one of {GAMMA_RULES}")
        if self.gamma_rule == "fixed" and self.gamma_fixed is None:
            raise ConfigError("gamma_fixed: required when gamma_rule is 'fixed'")
        if self.gamma_scale <= 0:
            raise ConfigError("gamma_scale: must be > 0")
        if self.solver_tol <= 0:
            raise ConfigError("solver_tol: must be > 0")
        if self.jobs < 1:
            raise ConfigError("jobs: must be >= 1")
        if self.mn_budget is not None:
            if self.m_grid is None or not self.m_grid:
                raise ConfigError("m_grid: required when mn_budget is set")
            for m in self.m_grid:
                self._check_m(m, "m_grid")
            if "altest_resampled" in self.methods and self.mn_budget < max(self.m_grid) * 2 * self.T:
                raise ConfigError(
                    "mn_budget: must be >= max(m_grid) * 2T when resampled "
                    "alternating estimation is selected"
                )
        else:
            if self.n_grid is None or not self.n_grid:
                raise ConfigError("n_grid: required unless mn_budget is set")
            if any(n < 1 for n in self.n_grid):
                raise ConfigError("n_grid: entries must be >= 1")
            self._check_m(self.m, "m")

    def _check_m(self, m: int, fieldname: str) -> None:
        if m < 1:
            raise ConfigError(f"{fieldname}: must be >= 1")
        if self.rho != 0.0 and m % 2 != 0:
            raise ConfigError(f"{fieldname}: must be even when rho != 0 (2x2 noise blocks)")

    def grid(self) -> list[tuple[int, int]]:
        """(n, m) evaluation points."""
        if self.mn_budget is not None:
            return [(int(round(self.mn_budget / m)), m) for m in self.m_grid]
        return [(n, self.m) for n in self.n_grid]


def preset_config(name: str, **overrides) -> ExperimentConfig:
    """Paper-protocol presets; overrides are applied on top."""
    if name == "fig1":
        base = ExperimentConfig(
            preset="fig1",
            p=500,
            s=20,
            m=10,
            rho=0.8,
            T=5,
            trials=100,
            n_grid=(40, 50, 60, 70, 80, 90),
            methods=METHODS,
        )
    elif name == "fig2":
        base = ExperimentConfig(
            preset="fig2",
            p=500,
            s=20,
            rho=0.8,
            T=5,
            trials=100,
            n_grid=None,
            mn_budget=500,
            m_grid=(2, 4, 6, 8, 10),
            methods=("altest_resampled", "oracle", "ordinary"),
        )
    elif name == "custom":
        base = ExperimentConfig()
    else:
        raise ConfigError(f"preset: unknown preset {name!r}")
    return replace(base, **overrides) if overrides else base


@dataclass(frozen=True)
class ResultRow:
    trial: int
    method: str
    n: int
    m: int
    iteration: int
    err_l2: float
    xi_hat: float
    gamma_used: float
    converged: bool
    wall_ms: float

    def to_csv(self) -> str:
        return ",".join(
            [
                str(self.trial),
                self.method,
                str(self.n),
                str(self.m),
                str(self.iteration),
                f"{self.err_l2:.17g}",
                f"{self.xi_hat:.17g}",
                f"{self.gamma_used:.17g}",
                "1" if self.converged else "0",
                f"{self.wall_ms:.17g}",
            ]
        )


def _trial_spec(cfg: ExperimentConfig, m: int) -> ModelSpec:
    sigma = make_block_sigma(m, cfg.rho) if cfg.rho != 0.0 else np.eye(m)
    theta = make_sparse_theta(cfg.p, cfg.s)
    return ModelSpec(cfg.p, m, theta, sigma, seed=cfg.seed)


def _alt_cfg(cfg: ExperimentConfig, mode: str) -> AltEstConfig:
    return AltEstConfig(
        T=cfg.T,
        mode=mode,
        gamma_rule=cfg.gamma_rule,
        gamma_scale=cfg.gamma_scale,
        gamma_fixed=cfg.gamma_fixed,
        solver_tol=cfg.solver_tol,
        seed=cfg.seed,
    )


def run_trial(cfg: ExperimentConfig, grid_index: int, trial: int) -> list[ResultRow]:
    """All selected methods on one fresh dataset; one row per method
    iteration. A method failure (e.g. an infeasible radius under the plugin
    rule) records rows for the zero estimate with converged=0 instead of
    aborting the batch."""
    n, m = cfg.grid()[grid_index]
    spec = _trial_spec(cfg, m)
    need_resampled = "altest_resampled" in cfg.methods
    n_total = 2 * cfg.T * n if need_resampled else n
    data = sample_dataset(spec, n_total, (grid_index, trial))
    head = data.take(0, n) if n_total > n else data
    zero_err = float(np.linalg.norm(spec.theta_star))
    xi_eye = xi_factor(np.eye(m), spec.sigma_star)
    rows: list[ResultRow] = []
    for method in METHODS:
        if method not in cfg.methods:
            continue
        if method.startswith("altest"):
            mode = method.removeprefix("altest_")
            run_data = data if mode == "resampled" else head
            start = time.perf_counter()
            try:
                rep = run_altest(run_data, spec, _alt_cfg(cfg, mode))
                for t in range(1, cfg.T + 1):
                    rows.append(
                        ResultRow(
                            trial, method, n, m, t,
                            float(rep.theta_err[t - 1]),
                            float(rep.xi_hat[t - 1]),
                            float(rep.gamma_used[t - 1]),
                            bool(rep.solver_converged[t - 1]),
                            float(rep.wall_ms[t - 1]),
                        )
                    )
            except AltEstError:
                wall = (time.perf_counter() - start) * 1e3
                for t in range(1, cfg.T + 1):
                    rows.append(
                        ResultRow(trial, method, n, m, t, zero_err, xi_eye, 0.0, False, wall)
                    )
        else:
            runner = run_oracle_gds if method == "oracle" else run_ordinary_gds
            sigma_xi = (
                xi_factor(spec.sigma_star, spec.sigma_star) if method == "oracle" else xi_eye
            )
            start = time.perf_counter()
            try:
                res = runner(head, spec, _alt_cfg(cfg, "practical"))
                rows.append(
                    ResultRow(
                        trial, method, n, m, 1,
                        res.err_l2, sigma_xi, res.gamma_used,
                        res.solution.converged, res.wall_ms,
                    )
                )
            except AltEstError:
                wall = (time.perf_counter() - start) * 1e3
                rows.append(
                    ResultRow(trial, method, n, m, 1, zero_err, sigma_xi, 0.0, False, wall)
                )
    return rows


def _run_task(args):
    cfg, grid_index, trial = args
    return run_trial(cfg, grid_index, trial)


def run_experiment(cfg: ExperimentConfig, gnuplot: bool = False) -> dict:
    """Execute the full batch, write results.csv / summary.json / summary.txt
    under cfg.out_dir, and return the summary structure."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = [
        (cfg, gi, trial)
        for gi in range(len(cfg.grid()))
        for trial in range(cfg.trials)
    ]
    started = time.perf_counter()
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            per_task = list(pool.map(_run_task, tasks, chunksize=1))
    else:
        per_task = [_run_task(t) for t in tasks]
    elapsed_ms = (time.perf_counter() - started) * 1e3
    rows = [row for chunk in per_task for row in chunk]

    csv_path = out / "results.csv"
    with open(csv_path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(row.to_csv() + "\n")

    summary = summarize(csv_path)
    summary["config"] = asdict(cfg)
    summary["total_wall_ms"] = elapsed_ms
    with open(out / "summary.json", "w", encoding="ascii") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(out / "summary.txt", "w", encoding="ascii") as fh:
        fh.write(format_summary(summary))
    if gnuplot:
        _write_gnuplot_stub(out)
    return summary


def _parse_row(line: str, lineno: int) -> ResultRow:
    parts = line.split(",")
    if len(parts) != len(_COLUMNS):
        raise ConfigError(
            f"results line {lineno}: expected {len(_COLUMNS)} columns, got {len(parts)}"
        )
    spec = [
        ("trial", int),
        ("method", str),
        ("n", int),
        ("m", int),
        ("iteration", int),
        ("err_l2", float),
        ("xi_hat", float),
        ("gamma_used", float),
        ("converged", int),
        ("wall_ms", float),
    ]
    values = []
    for raw, (name, typ) in zip(parts, spec):
        try:
            values.append(typ(raw))
        except ValueError as exc:
            raise ConfigError(f"results line {lineno}, column {name}: {exc}") from exc
    values[8] = bool(values[8])
    return ResultRow(*values)


def summarize(csv_path: str | Path) -> dict:
    """Aggregate a results CSV: per (method, n, m, iteration) group report the
    trial count and the mean, sd, and standard error of the error (plus the
    mean covariance factor). Both sd and se are emitted since either may serve
    as an error bar; count 1 yields sd = se = 0 with the count flagging it."""
    csv_path = Path(csv_path)
    with open(csv_path, "r", encoding="ascii") as fh:
        header = fh.readline().rstrip("\n")
        if header != CSV_HEADER:
            raise ConfigError(
                f"{csv_path}: header mismatch: expected {CSV_HEADER!r}, got {header!r}"
            )
        groups: dict[tuple, list[ResultRow]] = {}
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            row = _parse_row(line, lineno)
            groups.setdefault((row.method, row.n, row.m, row.iteration), []).append(row)
    entries = []
    for key in sorted(groups, key=lambda k: (k[0], k[1], k[2], k[3])):
        rows = groups[key]
        errs = np.array([r.err_l2 for r in rows])
        xis = np.array([r.xi_hat for r in rows])
        count = len(rows)
        sd = float(np.std(errs, ddof=1)) if count > 1 else 0.0
        entries.append(
            {
                "method": key[0],
                "n": key[1],
                "m": key[2],
                "iteration": key[3],
                "count": count,
                "err_mean": float(np.mean(errs)),
                "err_sd": sd,
                "err_se": sd / math.sqrt(count) if count > 1 else 0.0,
                "xi_mean": float(np.mean(xis)),
                "converged_frac": float(np.mean([r.converged for r in rows])),
            }
        )
    return {"groups": entries}


def format_summary(summary: dict) -> str:
    lines = [
        f"{'method':<18} {'n':>5} {'m':>3} {'it':>3} {'count':>5} "
        f"{'err_mean':>12} {'err_se':>12} {'err_sd':>12} {'xi_mean':>10}"
    ]
    for g in summary["groups"]:
        lines.append(
            f"{g['method']:<18} {g['n']:>5} {g['m']:>3} {g['iteration']:>3} "
            f"{g['count']:>5} {g['err_mean']:>12.6f} {g['err_se']:>12.6f} "
            f"{g['err_sd']:>12.6f} {g['xi_mean']:>10.6f}"
        )
    if "total_wall_ms" in summary:
        lines.append(f"total wall time: {summary['total_wall_ms'] / 1e3:.2f} s")
    return "\n".join(lines) + "\n"


def _write_gnuplot_stub(out: Path) -> None:
    stub = """# minimal stub: mean error vs n for each method/iteration group
set datafile separator ","
set xlabel "n"
set ylabel "mean L2 error"
set key outside
# aggregate results.csv externally (see summary.json) or plot raw points:
plot "results.csv" every ::1 using 3:6 with points title "err_l2"
"""
    with open(out / "plot.gp", "w", encoding="ascii") as fh:
        fh.write(stub)
