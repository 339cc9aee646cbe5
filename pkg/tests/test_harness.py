import json
import math

import numpy as np
import pytest

import nlsearch.linear_stage as linear_stage
from nlsearch.cli import main
from nlsearch.errors import AssumptionError
from nlsearch.harness import ExperimentConfig, run_algo1, run_algo2, run_sweep, run_verify
from nlsearch.harness.output import read_csv, to_csv, to_json
from nlsearch.nonlinear import InverseTanh, PolchinskiTanh, GatedTanh, mobility_frequency

LIST_FIELDS = ("flags_history", "sigma3_times", "sigma3_values")


def test_algo1_s0_everything_still():
    for model in ("quadratic", "inverse-tanh", "gated", "polchinski"):
        rec = run_algo1(ExperimentConfig(n=3, s=0, model=model))
        assert rec.p_flag_one == 0.0
        assert rec.frequency_formula == 0.0
        assert rec.passed, rec.checks
        assert max(abs(1 - v) for v in rec.sigma3_values) < 1e-10


@pytest.mark.parametrize("model", ["quadratic", "inverse-tanh", "gated", "polchinski"])
def test_algo1_measured_frequency(model):
    rec = run_algo1(ExperimentConfig(n=3, s=1, model=model, eta=0.5))
    assert rec.frequency_rel_dev < 1e-6
    assert rec.passed, rec.checks
    assert rec.p_ground == pytest.approx(50 / 64, abs=1e-12)


def test_algo1_rejects_alpha():
    with pytest.raises(Exception):
        run_algo1(ExperimentConfig(model="alpha"))


def test_polchinski_slower_than_gated_at_n8():
    eta = 2**-3.5
    assert mobility_frequency(PolchinskiTanh(1, eta, 8), 1) < mobility_frequency(GatedTanh(1, eta, 8), 1)
    gated = run_algo1(ExperimentConfig(n=8, s=1, model="gated", eta=eta))
    polch = run_algo1(ExperimentConfig(n=8, s=1, model="polchinski", eta=eta))
    assert polch.frequency_formula < gated.frequency_formula
    assert polch.passed and gated.passed


def test_algo2_discrete_walkthrough():
    rec = run_algo2(ExperimentConfig(n=3, oracle_hex="40", mode="algo2-discrete"))
    assert rec.flags_history == ["40", "44", "55", "ff"]
    assert rec.p_flag_one_final == pytest.approx(1.0, abs=1e-12)
    rec0 = run_algo2(ExperimentConfig(n=3, s=0, mode="algo2-discrete"))
    assert rec0.p_flag_one_final == 0.0 and rec0.passed


def test_algo2_continuous_s0_constant():
    rec = run_algo2(ExperimentConfig(n=3, s=0, mode="algo2-continuous", model="alpha"))
    assert rec.checks["s0_constant"]
    assert max(abs(v - 1) for v in rec.sigma3_values) < 1e-10


def test_algo2_continuous_quarter_period():
    n, eta, alpha = 3, 0.01, 1e3
    w = math.tanh(alpha * eta / 4)
    t_final = (math.pi / 2) / w
    rec = run_algo2(
        ExperimentConfig(n=n, oracle_hex="40", mode="algo2-continuous", model="alpha", t_final=t_final, dt=t_final / 4000)
    )
    assert rec.sigma3_values[-1] == pytest.approx(-0.74985, abs=1e-8)
    assert rec.passed


def test_algo2_assumption():
    with pytest.raises(AssumptionError):
        run_algo2(ExperimentConfig(n=3, s=2, mode="algo2-continuous", model="alpha"))
    rec = run_algo2(ExperimentConfig(n=3, s=2, mode="algo2-discrete", allow_any_s=True))
    assert rec.p_flag_one_final == pytest.approx(1.0, abs=1e-12)


def test_sweep_s_parabola():
    cfg = ExperimentConfig(n=4, model="gated", mode="sweep", sweep_axis="s", sweep_values=tuple(range(0, 17)), eta=0.5)
    recs = run_sweep(cfg)
    assert [r.s for r in recs] == list(range(17))
    p = [r.p_ground for r in recs]
    assert min(p) == pytest.approx(0.5, abs=1e-12) and int(np.argmin(p)) == 8
    assert all(abs(r.p_ground - r.p_ground_formula) < 1e-12 for r in recs)


def test_sweep_eta_inverse_tanh_usable_near_scale():
    n = 12
    etas = [2 ** (-k / 2) for k in range(1, 13)]
    cfg = ExperimentConfig(n=n, s=1, model="inverse-tanh", mode="sweep", sweep_axis="eta", sweep_values=tuple(etas))
    recs = run_sweep(cfg, jobs=2)
    assert [r.eta for r in recs] == etas
    w = np.array([r.frequency_formula for r in recs])
    assert all(r.passed for r in recs)
    # usable rate appears only once eta drops towards 2^(-(n-1)/2)
    assert w[0] < 1e-3 and w[-1] > 0.5
    assert np.all(np.diff(w) > 0)


def test_sweep_alpha_saturates():
    cfg = ExperimentConfig(n=3, s=1, model="alpha", mode="sweep", sweep_axis="alpha", sweep_values=(10.0, 1e3, 1e5))
    recs = run_sweep(cfg)
    assert recs[-1].frequency_formula == pytest.approx(1.0, abs=1e-12)
    assert recs[0].frequency_formula < recs[1].frequency_formula <= recs[2].frequency_formula


def test_json_csv_value_identical():
    cfg = ExperimentConfig(n=3, s=1, model="gated", mode="sweep", sweep_axis="eta", sweep_values=(0.1, 0.3))
    recs = run_sweep(cfg)
    js = json.loads(to_json(cfg.echo(), recs))["results"]
    cs = read_csv(to_csv(recs), LIST_FIELDS)
    assert len(js) == len(cs)
    for a, b in zip(js, cs):
        assert set(a) == set(b)
        for k in a:
            if a[k] is None:
                assert b[k] is None
            elif isinstance(a[k], float):
                assert float(b[k]) == a[k], k
            elif isinstance(a[k], list):
                assert [float(x) for x in b[k]] == [float(x) for x in a[k]], k
            else:
                assert b[k] == a[k], k


def test_cli_exit_codes(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["algo1", "--n", "3", "--s", "1", "--model", "polchinski", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["config"]["model"] == "polchinski" and data["results"][0]["passed"]
    assert main(["algo1", "--n", "25"]) == 2
    assert main(["algo2", "--s", "2"]) == 2
    assert main(["algo1", "--eta", "1.5"]) == 2
    assert main(["algo1", "--n", "3", "--oracle-hex", "zz"]) == 2
    assert main(["sweep", "--n", "3"]) == 2
    assert main(["algo1", "--s", "1,2"]) == 2
    assert main(["bogus"]) == 2
    # <B> = 0 when s = 2^(n-1) under the flag-local law
    assert main(["algo1", "--n", "3", "--s", "4", "--model", "polchinski"]) == 3
    assert main(["algo1", "--n", "3", "--t-final", "1", "--dt", "1", "--eps", "100"]) == 3


def test_cli_csv_and_sweep(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--n", "4", "--s", "0,1,2,8", "--model", "gated", "--eta", "0.4",
                 "--format", "csv", "--out", str(out)]) == 0
    rows = read_csv(out.read_text(), LIST_FIELDS)
    assert [r["s"] for r in rows] == [0, 1, 2, 8]
    assert rows[-1]["p_ground"] == pytest.approx(0.5, abs=1e-12)


def test_cli_algo2_discrete(capsys):
    assert main(["algo2", "--mode", "discrete", "--n", "3", "--oracle-hex", "40"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["results"][0]["flags_history"] == ["40", "44", "55", "ff"]


def test_verify_subset_passes():
    results = run_verify(ExperimentConfig(), only={"probability_parabola", "discrete_scan", "operator_identities"})
    assert [r.name for r in results] == ["probability_parabola", "discrete_scan", "operator_identities"]
    assert all(r.passed for r in results)


def test_verify_detects_wrong_inverse(monkeypatch):
    monkeypatch.setattr(linear_stage, "U_INV_MATRIX", linear_stage.U_MATRIX.copy())
    results = run_verify(ExperimentConfig(), only={"probability_parabola"})
    assert not results[0].passed
    assert main(["verify", "--only", "probability_parabola"]) == 1


def test_verify_at_n10_is_fast():
    import time

    t0 = time.perf_counter()
    results = run_verify(ExperimentConfig(n=10), only={"probability_parabola", "flag_statistics", "linear_invariants"})
    assert all(r.passed for r in results)
    assert time.perf_counter() - t0 < 30
