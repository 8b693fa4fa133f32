import json
import math
import pathlib

import jsonschema
import numpy as np
import pytest
from referencing import Registry, Resource

import vrsg

ROOT = pathlib.Path(__file__).resolve().parents[2]
SCHEMAS = ROOT / "schemas"
CONFIGS = ROOT / "configs"


def small_config(**solver):
    return {
        "algorithm": "vrpsg",
        "dataset": {"kind": "synthetic", "n": 40, "d": 10, "rank": 4},
        "problem": {"loss": "least_squares", "constraint": {"type": "l1_ball", "tau": 2}},
        "solver": {"epochs": 8, "m_over_n": 1, "eta_times_LP": 0.1, **solver},
    }


def schema_validator(name):
    store = {s.name: json.loads(s.read_text()) for s in SCHEMAS.glob("*.json")}
    registry = Registry().with_resources((k, Resource.from_contents(v)) for k, v in store.items())
    return jsonschema.Draft202012Validator(store[name], registry=registry)


def test_l1_projection_matches_numpy_bisection():
    rng = np.random.default_rng(0)
    for _ in range(50):
        v = rng.normal(size=rng.integers(1, 20)) * 3
        tau = rng.uniform(0.1, 3)
        p = vrsg.project_l1_ball(v, tau)
        if np.abs(v).sum() <= tau:
            assert np.array_equal(p, v)
            continue
        lo, hi = 0.0, np.abs(v).max()
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if np.maximum(np.abs(v) - mid, 0).sum() > tau else (lo, mid)
        oracle = np.sign(v) * np.maximum(np.abs(v) - 0.5 * (lo + hi), 0)
        assert np.max(np.abs(p - oracle)) <= 1e-10


def test_box_and_prox():
    assert np.array_equal(vrsg.project_box(np.array([-2.0, 0.5]), np.zeros(2), np.ones(2)), [0.0, 0.5])
    assert np.array_equal(vrsg.prox_l1(np.array([3.0, -1.0]), 0.5), [2.5, -0.5])
    with pytest.raises(ValueError):
        vrsg.prox_l1(np.array([1.0]), -1.0)


def test_rate_and_beta():
    rho, linear = vrsg.theoretical_rate(0.1, 100, 1.0, 1.0)
    assert linear and abs(rho - 5 / 6) / (5 / 6) < 0.01
    assert vrsg.beta_from_constants(1, 2, 3, 1) == pytest.approx(2 / 9)
    with pytest.raises(ValueError):
        vrsg.theoretical_rate(0.3, 100, 1.0, 1.0)
    assert vrsg.hoffman_theta_bound(np.array([[1.0], [-1.0]]), np.ones(2), np.array([[2.0]])) == pytest.approx(1.0)
    with pytest.raises(vrsg.BudgetError):
        vrsg.hoffman_theta_bound(np.eye(25), np.ones(25), np.zeros((0, 25)))


def test_synthetic_rank_and_reproducibility():
    a = vrsg.gen_synthetic(30, 8, 3, noise_std=0.1, seed=5)
    b = vrsg.gen_synthetic(30, 8, 3, noise_std=0.1, seed=5)
    assert a["X"].shape == (30, 8)
    assert np.array_equal(a["X"], b["X"]) and np.array_equal(a["y"], b["y"])
    assert vrsg.numerical_rank(a["X"]) == 3 == np.linalg.matrix_rank(a["X"])
    lg = vrsg.gen_synthetic(30, 8, 3, noise_std=0.5, task="logistic")
    assert set(np.unique(lg["y"])) <= {-1.0, 1.0}


def test_read_libsvm(tmp_path):
    f = tmp_path / "a.svm"
    f.write_text("+1 1:0.5 3:2\n-1 2:1\n")
    x, y = vrsg.read_libsvm(str(f))
    assert np.array_equal(x, [[0.5, 0, 2], [0, 1, 0]])
    assert np.array_equal(y, [1, -1])
    f.write_text("1 1:1 1:2\n")
    with pytest.raises(vrsg.ParseError, match="line 1"):
        vrsg.read_libsvm(str(f))


def test_solve_accounting_and_decrease():
    out = vrsg.solve(small_config())
    rows = out["rows"]
    assert len(rows) == 9
    assert [r["grad_evals"] for r in rows] == [k * 120 for k in range(9)]
    assert rows[-1]["gap"] < rows[0]["gap"]
    assert np.abs(out["final_iterate"]).sum() <= 2 + 1e-9
    assert out["resolved_solver"]["inner_iterations"] == 40


def test_solve_reports_theory_warning():
    out = vrsg.solve(small_config(eta_times_LP=5.0))
    assert out["warnings"]


def test_unknown_algorithm_is_value_error():
    cfg = small_config()
    cfg["algorithm"] = "adam"
    with pytest.raises(ValueError, match="vrpsg2"):
        vrsg.solve(cfg)


def test_certificate_pipeline_validates_against_schema(tmp_path):
    code, out, err = vrsg.cli("certify", "--config", CONFIGS / "certify_box_d2.json", "--out", tmp_path)
    assert code == 0, err
    report = json.loads((tmp_path / "certificate.json").read_text())
    schema_validator("certificate.schema.json").validate(report)
    assert report["rate"]["linear_rate_found"]
    assert report["rate"]["rho"] < 1
    assert report["constants"]["mu"]["value"] == pytest.approx(1 / 12)

    direct = vrsg.certify(json.loads((CONFIGS / "certify_box_d2.json").read_text()))
    assert direct["rate"]["rho"] == report["rate"]["rho"]


def test_oversize_certificate_exit_code(tmp_path):
    code, _, err = vrsg.cli("certify", "--config", CONFIGS / "certify_l1_oversize.json", "--out", tmp_path)
    assert code == 1
    assert "budget" in err


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.json")), ids=lambda p: p.name)
def test_shipped_configs_validate(path):
    schema_validator("config.schema.json").validate(json.loads(path.read_text()))


def test_seeded_cli_runs_match(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(small_config()))
    traces = []
    for k in range(2):
        code, _, err = vrsg.cli("solve", "--config", cfg, "--seed", 7, "--out", tmp_path / str(k))
        assert code == 0, err
        lines = (tmp_path / str(k) / "trace.csv").read_text().splitlines()
        traces.append([line.rsplit(",", 1)[0] for line in lines])
    assert traces[0] == traces[1]
    assert not math.isnan(float(traces[0][-1].split(",")[3]))
