"""Experiment runner: seeded Monte-Carlo trials over one swept parameter.

Every trial draws its own generator from ``(master_seed, trial)``. The sweep
index does not enter the seed, so all sweep points of a trial share the same
random stream (common random numbers across the sweep).
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .channel import ChannelModel, PathLossParams, draw_channel, path_loss_gain
from .config import ExperimentConfig
from .geometry import SimArchitecture
from .metrics import LinkBudget, ber_bpsk, capacity_bounds, many_stream_limit, nmse, sim_capacity
from .optimizer import fit
from .propagation import build_operators, end_to_end
from .target import ideal_capacity, truncated_svd_target, water_filling

CSV_FIELDS = (
    "sweep_value",
    "trial",
    "seed",
    "nmse",
    "sim_capacity",
    "ideal_capacity",
    "bound_lower",
    "bound_upper",
    "ber",
    "iterations",
    "wall_time_ms",
)
NUMERIC_FIELDS = CSV_FIELDS[3:]


class TrialError(RuntimeError):
    def __init__(self, sweep_value, seed, cause):
        super().__init__(f"trial failed at sweep value {sweep_value!r} (seed {seed}): {cause}")
        self.sweep_value = sweep_value
        self.seed = seed


@dataclass
class ResultRow:
    sweep_value: object
    trial: object
    seed: Optional[int]
    nmse: float
    sim_capacity: float
    ideal_capacity: float
    bound_lower: float
    bound_upper: float
    ber: Optional[float]
    iterations: float
    wall_time_ms: Optional[float]


def trial_seed(master_seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([master_seed, trial]).generate_state(1, np.uint64)[0])


@lru_cache(maxsize=16)
def _operators(arch: SimArchitecture):
    return build_operators(arch)


@lru_cache(maxsize=16)
def _channel_model(arch: SimArchitecture, pathloss: PathLossParams, correlated: bool):
    return ChannelModel.for_architecture(arch, pathloss, correlated)


def _run_trial(cfg: ExperimentConfig, sweep_value, trial: int, timing: bool):
    seed = trial_seed(cfg.master_seed, trial)
    try:
        started = time.perf_counter()
        rng = np.random.default_rng(seed)
        arch, budget = cfg.arch, cfg.budget
        ops = _operators(arch)
        G = draw_channel(_channel_model(arch, cfg.pathloss, cfg.correlated), rng, seed).G
        target = truncated_svd_target(G, arch.S)
        alloc = water_filling(target.lambda_sq, budget.P_t, budget.sigma2)
        result = fit(ops, G, target.Lambda_S, cfg.hyper, rng)
        H = end_to_end(ops, result.phases, G)
        alpha = result.phases.alpha
        ber = None
        if cfg.ber_bits_per_stream > 0:
            ber = ber_bpsk(result.phases, ops, G, alloc, budget.sigma2, cfg.ber_bits_per_stream, rng, H=H).aggregate
        row = ResultRow(
            sweep_value=sweep_value,
            trial=trial,
            seed=seed,
            nmse=nmse(H, alpha, target.Lambda_S),
            sim_capacity=sim_capacity(H, alpha, alloc, budget.sigma2),
            ideal_capacity=ideal_capacity(target.lambda_sq, alloc, budget.sigma2),
            bound_lower=math.nan,
            bound_upper=math.nan,
            ber=ber,
            iterations=result.iterations,
            wall_time_ms=(time.perf_counter() - started) * 1e3 if timing else None,
        )
        extremes = (float(target.lambda_sq[0]), float(target.lambda_sq[-1]))
    except Exception as exc:
        raise TrialError(sweep_value, seed, exc) from exc
    return row, extremes


def _run_task(args):
    return _run_trial(*args)


def aggregate(rows: Sequence[ResultRow]) -> List[ResultRow]:
    """Mean and sample standard deviation of every numeric column."""
    out = []
    for label in ("mean", "std"):
        values = {}
        for name in NUMERIC_FIELDS:
            column = [getattr(r, name) for r in rows if getattr(r, name) is not None]
            if not column:
                values[name] = None
            elif label == "mean":
                values[name] = float(np.mean(column))
            else:
                values[name] = float(np.std(column, ddof=1)) if len(column) > 1 else 0.0
        out.append(ResultRow(sweep_value=rows[0].sweep_value, trial=label, seed=None, **values))
    return out


def run_sweep(
    cfg: ExperimentConfig, threads: int = 1, timing: bool = False, include_aggregates: bool = True
) -> List[ResultRow]:
    """Run every (sweep value, trial) pair and return the rows in sweep order.

    Each sweep value contributes ``cfg.trials`` rows followed by a ``mean``
    and a ``std`` row. The capacity bounds in every row of a sweep value are
    computed from the eigenvalue sample means of that value's trials.
    Without a sweep axis the base configuration is run once with an empty
    sweep value.
    """
    points = [(v, cfg.at(v)) for v in cfg.sweep.values] if cfg.sweep else [("", cfg)]
    tasks = [(point_cfg, value, trial, timing) for value, point_cfg in points for trial in range(cfg.trials)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(_run_task, tasks))
    else:
        outcomes = [_run_task(t) for t in tasks]

    rows: List[ResultRow] = []
    for i, (value, point_cfg) in enumerate(points):
        chunk = outcomes[i * cfg.trials : (i + 1) * cfg.trials]
        bounds = capacity_bounds([e for _, e in chunk], point_cfg.arch.S, point_cfg.budget)
        group = []
        for row, _ in chunk:
            row.bound_lower, row.bound_upper = bounds.lower, bounds.upper
            group.append(row)
        rows.extend(group)
        if include_aggregates:
            rows.extend(aggregate(group))
    return rows


def mimo_baseline_capacity(
    antennas_tx: int,
    antennas_rx: int,
    S: int,
    pathloss: PathLossParams,
    wavelength: float,
    budget: LinkBudget,
    trials: int,
    rng: np.random.Generator,
) -> float:
    """Mean capacity of a conventional digital MIMO link over i.i.d. Rayleigh
    fading with log-distance path loss, using truncated-SVD precoding and
    water-filling over ``S`` streams."""
    if S > min(antennas_tx, antennas_rx):
        raise ValueError("S must not exceed the number of antennas on either side")
    caps = np.empty(trials)
    for t in range(trials):
        shadow = float(rng.standard_normal()) if pathloss.delta_db > 0 else 0.0
        rho2 = path_loss_gain(pathloss, shadow, wavelength)
        shape = (antennas_rx, antennas_tx)
        G = math.sqrt(rho2 / 2) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
        lam2 = truncated_svd_target(G, S).lambda_sq
        caps[t] = ideal_capacity(lam2, water_filling(lam2, budget.P_t, budget.sigma2), budget.sigma2)
    return float(caps.mean())


BOUNDS_FIELDS = (
    "sweep_value",
    "streams",
    "trials",
    "mean_ideal_capacity",
    "bound_lower",
    "bound_upper",
    "e_lambda1_sq",
    "e_lambdaS_sq",
    "limit_lower",
    "limit_upper",
)


def run_bounds(cfg: ExperimentConfig) -> List[dict]:
    """Ideal-policy capacity against its eigenvalue bounds, no SIM fitting."""
    points = [(v, cfg.at(v)) for v in cfg.sweep.values] if cfg.sweep else [("", cfg)]
    rows = []
    for value, point in points:
        model = _channel_model(point.arch, point.pathloss, point.correlated)
        budget = point.budget
        caps, extremes = [], []
        for trial in range(cfg.trials):
            rng = np.random.default_rng(trial_seed(cfg.master_seed, trial))
            lam2 = truncated_svd_target(draw_channel(model, rng).G, point.arch.S).lambda_sq
            caps.append(ideal_capacity(lam2, water_filling(lam2, budget.P_t, budget.sigma2), budget.sigma2))
            extremes.append((lam2[0], lam2[-1]))
        b = capacity_bounds(extremes, point.arch.S, budget)
        rows.append(
            dict(
                sweep_value=value,
                streams=point.arch.S,
                trials=cfg.trials,
                mean_ideal_capacity=float(np.mean(caps)),
                bound_lower=b.lower,
                bound_upper=b.upper,
                e_lambda1_sq=b.e_lambda1_sq,
                e_lambdaS_sq=b.e_lambdaS_sq,
                limit_lower=many_stream_limit(b.e_lambdaS_sq, budget),
                limit_upper=many_stream_limit(b.e_lambda1_sq, budget),
            )
        )
    return rows


BER_FIELDS = ("tx_power_dbm", "trial", "seed", "nmse", "ber")
DEFAULT_BER_BITS = 100_000


def run_ber(cfg: ExperimentConfig) -> List[dict]:
    """BPSK BER of the fitted SIM link at each configured transmit power.

    The phases are fitted once per trial (the fit does not depend on power);
    the water-filling split is recomputed at every power.
    """
    powers = cfg.ber_powers_dbm or (cfg.tx_power_dbm,)
    bits = cfg.ber_bits_per_stream or DEFAULT_BER_BITS
    arch = cfg.arch
    ops = _operators(arch)
    model = _channel_model(arch, cfg.pathloss, cfg.correlated)
    per_power = {p: [] for p in powers}
    for trial in range(cfg.trials):
        seed = trial_seed(cfg.master_seed, trial)
        rng = np.random.default_rng(seed)
        G = draw_channel(model, rng, seed).G
        target = truncated_svd_target(G, arch.S)
        result = fit(ops, G, target.Lambda_S, cfg.hyper, rng)
        H = end_to_end(ops, result.phases, G)
        for p_dbm in powers:
            budget = LinkBudget.from_dbm(p_dbm, cfg.noise_power_dbm)
            alloc = water_filling(target.lambda_sq, budget.P_t, budget.sigma2)
            ber = ber_bpsk(result.phases, ops, G, alloc, budget.sigma2, bits, rng, H=H).aggregate
            per_power[p_dbm].append(dict(tx_power_dbm=p_dbm, trial=trial, seed=seed, nmse=result.final_nmse, ber=ber))
    rows = []
    for p_dbm in powers:
        group = per_power[p_dbm]
        rows.extend(group)
        rows.append(
            dict(
                tx_power_dbm=p_dbm,
                trial="mean",
                seed=None,
                nmse=float(np.mean([r["nmse"] for r in group])),
                ber=float(np.mean([r["ber"] for r in group])),
            )
        )
    return rows


BASELINE_FIELDS = ("antennas", "streams", "trials", "mean_capacity")


def run_baseline(cfg: ExperimentConfig) -> List[dict]:
    if not cfg.baseline_antennas:
        raise ValueError("[baseline] antennas list is empty")
    rows = []
    for n in cfg.baseline_antennas:
        rng = np.random.default_rng([cfg.master_seed, n])
        cap = mimo_baseline_capacity(n, n, cfg.arch.S, cfg.pathloss, cfg.arch.wavelength, cfg.budget, cfg.trials, rng)
        rows.append(dict(antennas=n, streams=cfg.arch.S, trials=cfg.trials, mean_capacity=cap))
    return rows


# --- output ---------------------------------------------------------------


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(rows: Iterable, stream, fieldnames: Sequence[str] = CSV_FIELDS):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(fieldnames)
    for row in rows:
        record = asdict(row) if not isinstance(row, dict) else row
        writer.writerow([_cell(record[name]) for name in fieldnames])


def write_jsonl(rows: Iterable, stream, fieldnames: Sequence[str] = CSV_FIELDS):
    for row in rows:
        record = asdict(row) if not isinstance(row, dict) else row
        clean = {}
        for name in fieldnames:
            value = record[name]
            if isinstance(value, float) and not math.isfinite(value):
                value = None
            clean[name] = value
        stream.write(json.dumps(clean) + "\n")


def rows_to_csv(rows: Iterable, fieldnames: Sequence[str] = CSV_FIELDS) -> str:
    buf = io.StringIO()
    write_csv(rows, buf, fieldnames)
    return buf.getvalue()


def read_csv(text: str) -> List[dict]:
    return list(csv.DictReader(io.StringIO(text)))

