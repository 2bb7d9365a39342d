import io
import json
import math

import numpy as np
import pytest

from simhmimo import harness
from simhmimo.channel import PathLossParams
from simhmimo.cli import main
from simhmimo.config import loads
from simhmimo.metrics import LinkBudget

TINY = """
[architecture]
streams = 2
tx_layers = 1
rx_layers = 1
tx_atoms = 9
rx_atoms = 9

[channel]
shadowing_db = 0.0

[optimizer]
n_starts = 2
max_iters = 20

[experiment]
trials = 3
master_seed = 11
"""

SWEEP = TINY + """
[sweep]
axis = "layers"
values = [1, 2]
"""


@pytest.fixture
def config_file(tmp_path):
    def write(text, name="cfg.toml"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return write


def run_cli(argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_trial_seed_is_stable_and_distinct():
    assert harness.trial_seed(7, 0) == harness.trial_seed(7, 0)
    seeds = {harness.trial_seed(7, t) for t in range(100)}
    assert len(seeds) == 100
    assert harness.trial_seed(7, 0) != harness.trial_seed(8, 0)


def test_run_sweep_layout():
    cfg = loads(SWEEP)
    rows = harness.run_sweep(cfg)
    assert len(rows) == 2 * (3 + 2)
    assert [r.trial for r in rows[:5]] == [0, 1, 2, "mean", "std"]
    assert [r.sweep_value for r in rows] == [1] * 5 + [2] * 5
    for r in rows:
        if r.trial in ("mean", "std"):
            continue
        for name in ("nmse", "sim_capacity", "ideal_capacity", "bound_lower", "bound_upper"):
            assert math.isfinite(getattr(r, name))
        assert r.ber is None and r.wall_time_ms is None


def test_common_random_numbers_across_sweep():
    rows = harness.run_sweep(loads(SWEEP), include_aggregates=False)
    first, second = rows[:3], rows[3:]
    assert [r.seed for r in first] == [r.seed for r in second]
    # the ideal capacity depends on the channel only, not on the layer count
    assert [r.ideal_capacity for r in first] == [r.ideal_capacity for r in second]


def test_aggregates_match_recomputation():
    rows = harness.run_sweep(loads(TINY))
    trials, mean, std = rows[:3], rows[3], rows[4]
    for name in harness.NUMERIC_FIELDS:
        values = [getattr(r, name) for r in trials if getattr(r, name) is not None]
        if not values:
            assert getattr(mean, name) is None
            continue
        assert getattr(mean, name) == pytest.approx(np.mean(values), rel=1e-12, abs=1e-15)
        assert getattr(std, name) == pytest.approx(np.std(values, ddof=1), rel=1e-12, abs=1e-15)


def test_bounds_filled_from_ensemble():
    rows = harness.run_sweep(loads(TINY), include_aggregates=False)
    assert len({(r.bound_lower, r.bound_upper) for r in rows}) == 1
    assert rows[0].bound_lower <= rows[0].bound_upper


def test_timing_column():
    rows = harness.run_sweep(loads(TINY), timing=True, include_aggregates=False)
    assert all(r.wall_time_ms > 0 for r in rows)


def test_ber_column_when_requested():
    cfg = loads(TINY + "\n[ber]\nbits_per_stream = 2000\n")
    rows = harness.run_sweep(cfg, include_aggregates=False)
    assert all(0 <= r.ber <= 1 for r in rows)


def test_threaded_sweep_matches_serial():
    cfg = loads(SWEEP)
    serial = harness.rows_to_csv(harness.run_sweep(cfg))
    parallel = harness.rows_to_csv(harness.run_sweep(cfg, threads=2))
    assert serial == parallel


def test_trial_failure_reports_seed(monkeypatch):
    def boom(*a, **k):
        raise FloatingPointError("boom")

    monkeypatch.setattr(harness, "fit", boom)
    with pytest.raises(harness.TrialError, match="seed"):
        harness.run_sweep(loads(TINY))


def test_baseline_siso_reduction():
    pl = PathLossParams(d=1.0, delta_db=0.0)
    budget = LinkBudget(1.0, 1.0)
    wl = 0.0107
    got = harness.mimo_baseline_capacity(1, 1, 1, pl, wl, budget, 4000, np.random.default_rng(0))
    # E log2(1 + rho2 |g|^2) by an independent draw of the exponential gain
    from simhmimo.channel import path_loss_gain

    rho2 = path_loss_gain(pl, 0.0, wl)
    g = np.random.default_rng(1).exponential(size=400_000)
    assert got == pytest.approx(np.mean(np.log2(1 + rho2 * g)), rel=0.05)


def test_baseline_monotone_in_antennas():
    pl, budget = PathLossParams(delta_db=0.0), LinkBudget.from_dbm()
    caps = [
        harness.mimo_baseline_capacity(n, n, 2, pl, 0.0107, budget, 100, np.random.default_rng(3))
        for n in (4, 16, 64)
    ]
    assert caps[0] < caps[1] < caps[2]


def test_baseline_rejects_too_many_streams():
    with pytest.raises(ValueError):
        harness.mimo_baseline_capacity(2, 2, 3, PathLossParams(), 0.0107, LinkBudget(1, 1), 1, np.random.default_rng())


def test_run_bounds_and_ber_and_baseline_rows():
    cfg = loads(TINY + "\n[ber]\nbits_per_stream = 1000\ntx_power_dbm = [10.0, 30.0]\n\n[baseline]\nantennas = [2, 4]\n")
    b = harness.run_bounds(cfg)
    assert len(b) == 1 and b[0]["bound_lower"] <= b[0]["bound_upper"]
    ber = harness.run_ber(cfg)
    assert [r["trial"] for r in ber] == [0, 1, 2, "mean"] * 2
    base = harness.run_baseline(cfg)
    assert [r["antennas"] for r in base] == [2, 4]


def test_csv_and_jsonl_share_fields():
    rows = harness.run_sweep(loads(TINY))
    text = harness.rows_to_csv(rows)
    assert text.splitlines()[0] == ",".join(harness.CSV_FIELDS)
    parsed = harness.read_csv(text)
    assert float(parsed[0]["nmse"]) == rows[0].nmse  # full precision survives
    buf = io.StringIO()
    harness.write_jsonl(rows, buf)
    records = [json.loads(line) for line in buf.getvalue().splitlines()]
    assert list(records[0]) == list(harness.CSV_FIELDS)
    assert records[0]["nmse"] == rows[0].nmse


# --- CLI ---------------------------------------------------------------


def test_cli_sweep_header_and_file_output(config_file, tmp_path):
    out = tmp_path / "res.csv"
    code, stdout, _ = run_cli(["sweep", "--config", config_file(SWEEP), "--seed", "7", "--out", str(out)])
    assert code == 0 and stdout == ""
    header = out.read_text().splitlines()[0]
    assert header == "sweep_value,trial,seed,nmse,sim_capacity,ideal_capacity,bound_lower,bound_upper,ber,iterations,wall_time_ms"


def test_cli_byte_identical_reruns(config_file, tmp_path):
    path = config_file(SWEEP)
    outputs = []
    for i in range(2):
        out = tmp_path / f"run{i}.csv"
        assert run_cli(["sweep", "--config", path, "--seed", "5", "--out", str(out)])[0] == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]


def test_cli_seed_and_trials_override(config_file):
    path = config_file(TINY)
    _, a, _ = run_cli(["fit", "--config", path, "--seed", "1", "--trials", "1"])
    _, b, _ = run_cli(["fit", "--config", path, "--seed", "2", "--trials", "1"])
    assert a != b
    assert len(a.splitlines()) == 2  # header plus one trial, no aggregates for a single trial


def test_cli_json_output(config_file):
    code, stdout, _ = run_cli(["fit", "--config", config_file(TINY), "--json"])
    assert code == 0
    assert all(set(json.loads(line)) == set(harness.CSV_FIELDS) for line in stdout.splitlines())


@pytest.mark.parametrize("command", ["bounds", "ber", "baseline"])
def test_cli_other_commands(config_file, command):
    text = TINY + "\n[ber]\nbits_per_stream = 500\n\n[baseline]\nantennas = [2]\n"
    code, stdout, stderr = run_cli([command, "--config", config_file(text)])
    assert code == 0, stderr
    assert len(stdout.splitlines()) >= 2


def test_cli_missing_config_exit_1():
    code, stdout, stderr = run_cli(["fit", "--config", "no/such/file.toml"])
    assert code == 1 and stdout == ""
    assert "no/such/file.toml" in stderr


def test_cli_invalid_architecture_exit_1(config_file):
    code, _, stderr = run_cli(["fit", "--config", config_file(TINY.replace("streams = 2", "streams = 12"))])
    assert code == 1
    assert "S=12" in stderr


def test_cli_sweep_without_section_exit_1(config_file):
    code, _, stderr = run_cli(["sweep", "--config", config_file(TINY)])
    assert code == 1 and "[sweep]" in stderr


def test_cli_runtime_failure_exit_2(config_file):
    # the baseline command needs a non-empty antenna list
    code, stdout, stderr = run_cli(["baseline", "--config", config_file(TINY)])
    assert code == 2 and stdout == "" and "antennas" in stderr


def test_cli_threads_env_fallback(config_file, monkeypatch):
    monkeypatch.setenv("SIM_HMIMO_THREADS", "zero")
    code, _, stderr = run_cli(["fit", "--config", config_file(TINY)])
    assert code == 1 and "SIM_HMIMO_THREADS" in stderr
    monkeypatch.setenv("SIM_HMIMO_THREADS", "2")
    assert run_cli(["fit", "--config", config_file(TINY)])[0] == 0
