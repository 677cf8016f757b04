import csv

import numpy as np
import pytest

from adasmooth import LinearGaussianHmm, SmootherConfig, StateSumFunctional, run_smoother
from adasmooth.cli import main
from adasmooth.config import SMOOTHER_SEED_OFFSET, ConfigError, load_config

BASE = """
seed = 7
model.kind = lgssm
simulate.n_steps = 501
smoother.particles = 100
"""


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_simulate_reproducible(tmp_path):
    cfg = write_cfg(tmp_path, BASE)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    out1.mkdir()
    out2.mkdir()
    assert main(["simulate", "--config", cfg, "--out", str(out1)]) == 0
    assert main(["simulate", "--config", cfg, "--out", str(out2)]) == 0
    text = (out1 / "trajectory.csv").read_text()
    assert text == (out2 / "trajectory.csv").read_text()
    data = [line for line in text.splitlines()[1:] if not line.startswith("#")]
    assert len(data) == 501
    assert text.rstrip().endswith("# seed=7")


def test_simulate_missing_dir(tmp_path, capsys):
    cfg = write_cfg(tmp_path, BASE)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "missing")]) == 2
    assert "missing" in capsys.readouterr().err


def test_simulate_sv(tmp_path):
    cfg = write_cfg(tmp_path, "model.kind = sv\nsimulate.n_steps = 300\n")
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 0
    table = np.array([[float(v) for v in r] for r in rows(tmp_path / "trajectory.csv")[1:] if not r[0].startswith("#")])
    assert table.shape == (300, 2) and np.isfinite(table).all()


def test_run_outputs(tmp_path):
    cfg = write_cfg(tmp_path, BASE)
    assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 0
    diag = rows(tmp_path / "diagnostics.csv")
    header, body = diag[0], np.array(diag[1:], dtype=float)
    assert len(body) == 500
    rho, eps = body[:, header.index("rho")], body[:, header.index("eps")]
    assert np.all(eps <= rho)
    assert np.isfinite(body[-1, header.index("estimate_0")])
    est = rows(tmp_path / "estimates.csv")
    assert est[0] == ["replicate", "checkpoint", "component", "estimate", "estimate_over_sqrt_n"]
    assert len(est) == 502


def test_simulate_then_run_roundtrip(tmp_path):
    cfg = write_cfg(tmp_path, BASE)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 0
    assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 0
    in_memory = (tmp_path / "estimates.csv").read_text()
    from_file = write_cfg(tmp_path, BASE.replace("simulate.n_steps = 501", "model.observations = trajectory.csv"), "f.cfg")
    assert main(["run", "--config", from_file, "--out", str(tmp_path)]) == 0
    assert (tmp_path / "estimates.csv").read_text() == in_memory
    # and the library agrees with the file
    loaded = load_config(from_file)
    rec = run_smoother(loaded.build_model(), StateSumFunctional(), SmootherConfig(seed=7 + SMOOTHER_SEED_OFFSET), 100)
    assert float(rows(tmp_path / "estimates.csv")[-1][3]) == rec.estimates[-1, 0]


def test_seed_flag_overrides(tmp_path):
    cfg = write_cfg(tmp_path, BASE)
    assert load_config(cfg, seed_override=3).seed == 3
    assert load_config(cfg, seed_override=3).smoother.seed == 3 + SMOOTHER_SEED_OFFSET
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir()
    b.mkdir()
    main(["simulate", "--config", cfg, "--out", str(a), "--seed", "3"])
    main(["simulate", "--config", cfg, "--out", str(b)])
    assert (a / "trajectory.csv").read_text() != (b / "trajectory.csv").read_text()


def test_schedule_limit(capsys):
    assert main(["schedule-limit", "2", "100000"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(2.5, abs=1e-3)
    assert main(["schedule-limit", "0", "10"]) == 2


def test_oracle_zero_observations(tmp_path, capsys):
    (tmp_path / "y.csv").write_text("y\n" + "0.0\n" * 50)
    cfg = write_cfg(tmp_path, "model.observations = y.csv\n")
    assert main(["oracle", "--config", cfg, "--out", str(tmp_path)]) == 0
    assert float(capsys.readouterr().out.split()[0]) == 0.0
    assert rows(tmp_path / "oracle.csv")[1] == ["49", "0.0"]


def test_oracle_rejects_sv(tmp_path):
    cfg = write_cfg(tmp_path, "model.kind = sv\nsimulate.n_steps = 20\n")
    assert main(["oracle", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_bench_grid_rows(tmp_path):
    text = BASE.replace("simulate.n_steps = 501", "simulate.n_steps = 31") + (
        "bench.replicates = 2\nbench.checkpoints = 30\nbench.alphas = 0.3, 0.6, 1.0\n"
        "bench.betas = 0.2, 0.5\nbench.particles = 20, 40\nbench.baselines = paris, ffbsm\n"
    )
    assert main(["bench-grid", "--config", write_cfg(tmp_path, text), "--out", str(tmp_path), "--threads", "2"]) == 0
    eff = rows(tmp_path / "efficiency.csv")[1:]
    for N in ("20", "40"):
        assert sum(r[2] == N for r in eff) == 6
    assert len(rows(tmp_path / "schedule_stats.csv")) == 13
    assert {r[0] for r in rows(tmp_path / "efficiency_baselines.csv")[1:]} == {"paris(K=2)", "ffbsm"}


def test_variance_curve(tmp_path):
    text = BASE.replace("simulate.n_steps = 501", "simulate.n_steps = 41") + (
        "bench.replicates = 3\nbench.checkpoints = 0, 20, 40\nbench.variants = adasmooth, poorman\n"
    )
    assert main(["variance-curve", "--config", write_cfg(tmp_path, text), "--out", str(tmp_path)]) == 0
    curve = rows(tmp_path / "variance_curve.csv")
    assert curve[0] == ["variant", "n", "var_over_n"] and len(curve) == 7
    assert (tmp_path / "estimates_adasmooth_0.6_0.5.csv").exists()
    assert (tmp_path / "estimates_poorman_0.6.csv").exists()


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_degeneracy_exit_code(tmp_path, capsys):
    (tmp_path / "y.csv").write_text("y\n0.0\n0.5\n1e200\n0.0\n")
    cfg = write_cfg(tmp_path, "model.observations = y.csv\n")
    assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 3
    assert "time index 2" in capsys.readouterr().err


@pytest.mark.property
@pytest.mark.parametrize(
    "text,key",
    [
        ("smoother.alpha = 1.5", "smoother.alpha"),
        ("smoother.beta = 1", "smoother.beta"),
        ("smoother.particles = 1", "smoother.particles"),
        ("smoother.variant = magic", "smoother.variant"),
        ("smoother.max_gap = 0", "smoother.max_gap"),
        ("smoother.period = 0", "smoother.period"),
        ("smoother.precision_draws = 0", "smoother.precision_draws"),
        ("smoother.backward_schedule = sometimes", "smoother.backward_schedule"),
        ("model.a = 1.2", "model.a"),
        ("model.sigma_u = -1", "model.sigma_u"),
        ("model.kind = sv\nmodel.rho = 1", "model.rho"),
        ("model.kind = sv\nmodel.sigma_u = 1", "model.sigma_u"),
        ("model.kind = ar", "model.kind"),
        ("model.observations = nowhere.csv", "model.observations"),
        ("simulate.n_steps = 0", "simulate.n_steps"),
        ("functional = cubes", "functional"),
        ("bench.replicates = 0", "bench.replicates"),
        ("bench.alphas = 0.5, 2", "bench.alphas"),
        ("bench.checkpoints = 1, x", "bench.checkpoints"),
        ("bench.variants = adasmooth, slow", "bench.variants"),
        ("seed = -4", "seed"),
        ("smoother.colour = red", "smoother.colour"),
    ],
)
def test_config_rejection_names_key(tmp_path, text, key):
    with pytest.raises(ConfigError) as info:
        load_config(write_cfg(tmp_path, text + "\n"))
    assert info.value.key == key
    assert main(["run", "--config", write_cfg(tmp_path, text + "\n"), "--out", str(tmp_path)]) == 2


def test_config_syntax_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(text="model.a 0.5")
    with pytest.raises(ConfigError):
        load_config(text="seed = 1\nseed = 2")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.cfg")


def test_config_defaults_and_comments():
    cfg = load_config(text="# comment\nmodel.kind = sv   # trailing\n")
    assert cfg.functional == "sv_triple"
    assert cfg.model_params["rho"] == -0.1
    model = load_config(text="model.a = 0.5\nsimulate.n_steps = 12\n").build_model()
    assert isinstance(model, LinearGaussianHmm) and model.a == 0.5 and model.n_observations == 12
