"""Experiment harness: presets, seeded sweeps, CSV persistence."""
from __future__ import annotations

import json
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import estimators as est
from .analysis import MonicPolynomial, filter_from_poly, gramian_sum_opnorm, opt_hat
from .lti import (AdversarialBounded, NoiseModel, NoNoise, StateSpace,
                  StochasticGaussian, markov_params, simulate)

SCHEMA_LINE = "# schema=1"
SWEEP_COLUMNS = ("run_id", "preset", "estimator", "N", "T", "L", "mu", "seed",
                 "op_error", "fro_error", "opt_hat", "cond_ok", "wall_ms", "error")

PRESETS = ("double-integrator", "scalar-marginal", "stable-random")


def preset_system(name: str) -> StateSpace:
    """Named benchmark systems.

    double-integrator: discretized F = m x'' with unit sampling time,
    position observed; marginally stable with a size-2 Jordan block at 1.
    scalar-marginal: the scalar accumulator A = 1.
    stable-random: a fixed (seed-pinned) dense system scaled to rho = 0.5.
    """
    if name == "double-integrator":
        return StateSpace(A=[[1.0, 1.0], [0.0, 1.0]], B=[[0.0], [1.0]],
                          C=[[1.0, 0.0]], D=[[0.0]],
                          Bw=[[0.0], [1.0]], Dz=[[1.0]])
    if name == "scalar-marginal":
        return StateSpace(A=[[1.0]], B=[[1.0]], C=[[1.0]], D=[[0.0]],
                          Bw=[[1.0]], Dz=[[1.0]])
    if name == "stable-random":
        rng = np.random.default_rng(20240817)
        A = rng.standard_normal((3, 3))
        A *= 0.5 / np.max(np.abs(np.linalg.eigvals(A)))
        B = rng.standard_normal((3, 2))
        C = rng.standard_normal((2, 3))
        D = np.zeros((2, 2))
        Bw = 0.5 * rng.standard_normal((3, 2))
        Dz = 0.5 * rng.standard_normal((2, 2))
        return StateSpace(A=A, B=B, C=C, D=D, Bw=Bw, Dz=Dz)
    raise ValueError(f"unknown preset {name!r}; choose from {PRESETS}")


def noise_from_dict(doc: dict) -> NoiseModel:
    kind = doc.get("kind", "none")
    if kind == "none":
        return NoNoise()
    if kind == "gaussian":
        return StochasticGaussian(sigma_w=doc.get("sigma_w", 1.0),
                                  sigma_z=doc.get("sigma_z", 1.0))
    if kind == "adversarial":
        return AdversarialBounded(generator=doc.get("generator", "constant-sign"),
                                  period=doc.get("period", 1))
    raise ValueError(f"unknown noise kind {kind!r}")


@dataclass(frozen=True)
class EstimatorSpec:
    name: str  # ols | pfls | fixed-filter | select-l
    poly: tuple = ()  # fixed-filter: coefficients f_1..f_d of the monic polynomial

    def __post_init__(self):
        if self.name not in ("ols", "pfls", "fixed-filter", "select-l"):
            raise ValueError(f"unknown estimator {self.name!r}")
        if self.name == "fixed-filter" and not self.poly:
            raise ValueError("fixed-filter needs polynomial coefficients")
        object.__setattr__(self, "poly", tuple(float(c) for c in self.poly))

    @property
    def label(self) -> str:
        return self.name

    @staticmethod
    def parse(item) -> "EstimatorSpec":
        if isinstance(item, str):
            return EstimatorSpec(name=item)
        return EstimatorSpec(name=item["name"], poly=tuple(item.get("poly", ())))


@dataclass(frozen=True)
class ExperimentConfig:
    system: StateSpace
    noise: NoiseModel
    Ns: tuple
    T: int
    L: int
    mu: float
    delta: float = 0.05
    estimators: tuple = (EstimatorSpec("ols"), EstimatorSpec("pfls"))
    seeds: tuple = (0,)
    preset: str = "inline"
    L_max: Optional[int] = None  # select-l candidates; defaults to L
    out: Optional[str] = None
    memory_guard: int = 200_000_000

    def __post_init__(self):
        object.__setattr__(self, "Ns", tuple(int(N) for N in self.Ns))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "estimators",
                           tuple(EstimatorSpec.parse(e) if not isinstance(e, EstimatorSpec) else e
                                 for e in self.estimators))
        if not self.Ns:
            raise ValueError("N grid must be nonempty")
        if not self.seeds:
            raise ValueError("seeds must be nonempty")
        sys = self.system
        footprint = max(self.Ns) * (sys.n + sys.m + sys.p + sys.d_w + sys.d_z)
        if footprint > self.memory_guard:
            raise ValueError(f"N_max * state width = {footprint} exceeds memory guard")

    @staticmethod
    def from_json(text: str) -> "ExperimentConfig":
        doc = json.loads(text)
        if "preset" in doc:
            system = preset_system(doc["preset"])
            preset = doc["preset"]
        else:
            system = StateSpace.from_json(json.dumps(doc["system"]))
            preset = "inline"
        return ExperimentConfig(
            system=system, preset=preset,
            noise=noise_from_dict(doc.get("noise", {"kind": "none"})),
            Ns=tuple(doc["N"]), T=int(doc["T"]), L=int(doc["L"]),
            mu=float(doc["mu"]), delta=float(doc.get("delta", 0.05)),
            estimators=tuple(EstimatorSpec.parse(e) for e in doc.get("estimators", ["ols", "pfls"])),
            seeds=tuple(doc["seeds"]), L_max=doc.get("L_max"),
            out=doc.get("out"),
            memory_guard=int(doc.get("memory_guard", 200_000_000)))


@dataclass(frozen=True)
class ResultRow:
    run_id: str
    preset: str
    estimator: str
    N: int
    T: int
    L: int
    mu: float
    seed: int
    op_error: Optional[float] = None
    fro_error: Optional[float] = None
    opt_hat: Optional[float] = None
    cond_ok: Optional[bool] = None
    wall_ms: Optional[float] = None
    error: str = ""


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def write_csv(path: str, columns: Sequence[str], rows, timestamp: bool = True) -> None:
    """Write rows atomically (temp file in the target directory, then rename)."""
    lines = [SCHEMA_LINE]
    if timestamp:
        lines.append(f"# created: {time.strftime('%Y-%m-%dT%H:%M:%S')}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    body = "\n".join(lines) + "\n"
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".csv.tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(body)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _run_one(task) -> ResultRow:
    config, spec, N, seed = task
    sys = config.system
    t0 = time.perf_counter()
    run_id = f"{config.preset}:{spec.label}:N{N}:s{seed}"
    L_used = config.L
    try:
        traj = simulate(sys, N, config.noise, seed)
        Gstar = markov_params(sys, config.T)
        if spec.name == "select-l":
            L_max = config.L_max or config.L
            sel = est.select_L(traj, config.T, L_max, config.mu, config.delta)
            L_used = sel.selected
            data = est.build_regression_data(traj, config.T, L_used)
            Ghat, _ = est.pfls(data, config.mu)
        else:
            data = est.build_regression_data(traj, config.T, config.L)
            if spec.name == "ols":
                Ghat = est.ols(data)
            elif spec.name == "pfls":
                Ghat, _ = est.pfls(data, config.mu)
            else:
                phi = filter_from_poly(MonicPolynomial(spec.poly), sys.m, config.L)
                Ghat = est.fixed_filter_estimate(data, phi)
        diff = Ghat.G - Gstar.G
        row = ResultRow(
            run_id=run_id, preset=config.preset, estimator=spec.label, N=N,
            T=config.T, L=L_used, mu=config.mu, seed=seed,
            op_error=float(np.linalg.norm(diff, ord=2)),
            fro_error=float(np.linalg.norm(diff, ord="fro")),
            opt_hat=opt_hat(data.Y, data.K, config.mu),
            cond_ok=est.check_conditioning(data)[0],
            wall_ms=(time.perf_counter() - t0) * 1e3)
    except Exception as exc:  # recorded, never aborts the sweep
        row = ResultRow(run_id=run_id, preset=config.preset, estimator=spec.label,
                        N=N, T=config.T, L=L_used, mu=config.mu, seed=seed,
                        wall_ms=(time.perf_counter() - t0) * 1e3,
                        error=f"{type(exc).__name__}: {exc}")
    return row


def _n_workers() -> int:
    try:
        return max(1, int(os.environ.get("SYSID_THREADS", "1")))
    except ValueError:
        return 1


def run_sweep(config: ExperimentConfig):
    """One row per (estimator, N, seed); rows in config order regardless of scheduling."""
    tasks = [(config, spec, N, seed)
             for spec in config.estimators for N in config.Ns for seed in config.seeds]
    workers = _n_workers()
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_one, tasks))
    else:
        rows = [_run_one(t) for t in tasks]
    if config.out:
        write_csv(config.out, SWEEP_COLUMNS,
                  [[getattr(r, c) for c in SWEEP_COLUMNS] for r in rows])
    return rows


LOWERBOUND_COLUMNS = ("preset", "N", "seed", "ols_op_error", "gramian_over_N")


def cmd_lowerbound(preset: str, Ns: Sequence[int], seeds: Sequence[int],
                   T: int = 5, out: Optional[str] = None):
    """Pair the zero-noise OLS error with the Gramian-sum growth driver.

    Returns rows (preset, N, seed, ||G_LS - G*||_op, sqrt||sum GG_t||_op / N)
    and optionally writes them as CSV.
    """
    sys = preset_system(preset)
    Gstar = markov_params(sys, T)
    rows = []
    for N in Ns:
        theory = gramian_sum_opnorm(sys, int(N)) / N
        for seed in seeds:
            traj = simulate(sys, int(N), NoNoise(), int(seed))
            data = est.build_regression_data(traj, T, 1)
            try:
                err = float(np.linalg.norm(est.ols(data).G - Gstar.G, ord=2))
            except est.RankDeficient:
                err = None
            rows.append((preset, int(N), int(seed), err, theory))
    if out:
        write_csv(out, LOWERBOUND_COLUMNS, rows)
    return rows
