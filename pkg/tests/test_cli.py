import json

import pytest

from hwcost import cli, linmod, polyreg
from hwcost.netgraph import LayerKind

NETWORK_SPEC = """
c1 conv in=1x3x8x8 k=3x3 s=1 p=1 out=4
p1 pool k=2x2 s=2
f1 fc out=10
"""

DEVICE_SPEC = """
peak_flops = 1e12
read_bandwidth = 4e9
write_bandwidth = 4e9
ppp_compute = 1.0
ppp_io = 1.0
bytes_per_element = 4
"""

ENERGY_SPEC = """
e_mac = 1.0
levels = DRAM:100.0
bitwidth_reference = 16
"""

SPACE_SPEC = {
    "dimensions": [
        {"name": "x1", "kind": "continuous", "lo": 0.0, "hi": 1.0},
        {"name": "x2", "kind": "continuous", "lo": 0.0, "hi": 1.0},
    ],
    "structural": ["x1", "x2"],
}

SCHEMA_SPEC = {
    "dimensions": [
        {"name": "units1", "lo": 1, "hi": 64},
        {"name": "units2", "lo": 1, "hi": 64},
    ],
}


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_version_flag(capsys):
    with pytest.raises(SystemExit):
        cli.main(["--version"])


def test_compare_reference_values(capsys):
    code, out, _ = run(capsys, "compare-reference")
    assert code == 0
    assert "-6.13" in out and "+1.47" in out          # VGG-16
    assert "-15.02" in out and "+11.25" in out        # AlexNet
    assert "-9.83" in out and "+23.61" in out         # NIN
    assert "-42.06" in out and "-1.40" in out         # Overfeat
    assert "-42.60" in out and "+2.08" in out         # CIFAR10-6conv
    assert "39.97" in out and "1.019" in out          # CONV layer metrics echo
    assert "41.92" in out and "11.41" in out


def test_compare_reference_csv_format(capsys):
    code, out, _ = run(capsys, "compare-reference", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("network,paleo_ms,neuralpower_ms,actual_ms")
    assert lines[1].split(",")[0] == "VGG-16"


def test_synth_fit_predict_pipeline(tmp_path, capsys):
    out_dir = tmp_path / "run"
    code, out, err = run(capsys, "synth", "--count", "60", "--noise", "0.0",
                         "--seed", "11", "--output-dir", str(out_dir))
    assert code == 0, err
    csv_path = out_dir / "synthetic_profile.csv"
    assert csv_path.exists()
    assert (out_dir / "manifest.json").exists()

    code, out, err = run(capsys, "fit", str(csv_path), "--seed", "1",
                         "--output-dir", str(out_dir))
    assert code == 0, err
    models = sorted(p.name for p in out_dir.glob("model_*.json"))
    assert models == [
        "model_conv_power_w.json", "model_conv_runtime_ms.json",
        "model_fc_power_w.json", "model_fc_runtime_ms.json",
        "model_pool_power_w.json", "model_pool_runtime_ms.json",
    ]
    # outputs re-parse into valid models
    model = polyreg.model_from_json((out_dir / "model_fc_runtime_ms.json").read_text())
    assert model.layer_kind is LayerKind.FULLY_CONNECTED

    net = tmp_path / "net.txt"
    net.write_text(NETWORK_SPEC)
    code, out, err = run(capsys, "predict", str(net), "--family", "poly",
                         "--models-dir", str(out_dir))
    assert code == 0, err
    assert "total" in out


def test_fit_empty_csv_is_usage_error(tmp_path, capsys):
    bad = tmp_path / "empty.csv"
    bad.write_text("")
    code, _, err = run(capsys, "fit", str(bad))
    assert code == 1
    assert "error" in err


def test_predict_paleo_matches_module(tmp_path, capsys):
    from hwcost.analytic import paleo_network_runtime, parse_device_spec
    from hwcost.netgraph import parse_network

    net_path = tmp_path / "net.txt"
    net_path.write_text(NETWORK_SPEC)
    dev_path = tmp_path / "device.txt"
    dev_path.write_text(DEVICE_SPEC)
    code, out, err = run(capsys, "predict", str(net_path), "--family", "paleo",
                         "--device", str(dev_path), "--format", "csv")
    assert code == 0, err
    total_row = [line for line in out.splitlines() if line.startswith("total")][0]
    reported = float(total_row.split(",")[-1])
    expected = paleo_network_runtime(parse_network(NETWORK_SPEC),
                                     parse_device_spec(DEVICE_SPEC)).total_ms
    assert reported == pytest.approx(expected, rel=1e-5)


def test_predict_energy_reproduces_5100pj_example(tmp_path, capsys):
    net_path = tmp_path / "net.txt"
    net_path.write_text("f1 fc in=1x10x1x1 out=10\n")  # 100 MACs
    spec_path = tmp_path / "energy.txt"
    spec_path.write_text(ENERGY_SPEC)
    acc_path = tmp_path / "accesses.txt"
    acc_path.write_text("f1 DRAM 50\n")
    code, out, err = run(capsys, "predict", str(net_path), "--family", "energy",
                         "--energy", str(spec_path), "--accesses", str(acc_path),
                         "--format", "csv")
    assert code == 0, err
    total_row = [line for line in out.splitlines() if line.startswith("total")][0]
    assert float(total_row.split(",")[-1]) == 5100.0


def test_predict_requires_family_inputs(tmp_path, capsys):
    net_path = tmp_path / "net.txt"
    net_path.write_text(NETWORK_SPEC)
    code, _, err = run(capsys, "predict", str(net_path), "--family", "paleo")
    assert code == 1


def test_sample_and_fit_linear(tmp_path, capsys):
    schema_path = tmp_path / "schema.json"
    schema_path.write_text(json.dumps(SCHEMA_SPEC))
    out_dir = tmp_path / "out"
    code, _, err = run(capsys, "sample", str(schema_path), "--count", "40",
                       "--seed", "3", "--output-dir", str(out_dir))
    assert code == 0, err
    samples = (out_dir / "samples.csv").read_text().splitlines()
    assert samples[0] == "units1,units2"
    assert len(samples) == 41

    profile = ["units1,units2,power_w,memory_mb"]
    for line in samples[1:]:
        a, b = (int(v) for v in line.split(","))
        profile.append(f"{a},{b},{1.5 * a + 0.25 * b},{0.5 * a + 2.0 * b}")
    profile_path = tmp_path / "profile.csv"
    profile_path.write_text("\n".join(profile) + "\n")

    code, out, err = run(capsys, "fit-linear", str(profile_path), "--seed", "5",
                         "--output-dir", str(out_dir))
    assert code == 0, err
    power = linmod.model_from_json((out_dir / "linear_power.json").read_text())
    assert power.weights == pytest.approx((1.5, 0.25), abs=1e-8)
    memory = linmod.model_from_json((out_dir / "linear_memory.json").read_text())
    assert memory.weights == pytest.approx((0.5, 2.0), abs=1e-8)


def test_optimize_quadratic(tmp_path, capsys):
    space_path = tmp_path / "space.json"
    space_path.write_text(json.dumps(SPACE_SPEC))
    out_dir = tmp_path / "opt"
    code, out, err = run(capsys, "optimize", str(space_path), "--objective", "quadratic",
                         "--budget", "20", "--seed", "5", "--output-dir", str(out_dir))
    assert code == 0, err
    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["status"] == "ok"
    assert summary["best_y"] <= 1e-2
    trace = (out_dir / "trace.csv").read_text().splitlines()
    assert trace[0] == "iter,x1,x2,acq,y,pred_power,pred_mem,feasible,best_y"
    assert len(trace) == 21


def test_optimize_constrained_and_infeasible_exit_codes(tmp_path, capsys):
    space_path = tmp_path / "space.json"
    space_path.write_text(json.dumps(SPACE_SPEC))
    power_path = tmp_path / "power.json"
    power_path.write_text(linmod.model_to_json(
        linmod.LinearModel(("x1", "x2"), (1.0, 1.0), linmod.LinTarget.POWER_W)))
    memory_path = tmp_path / "memory.json"
    memory_path.write_text(linmod.model_to_json(
        linmod.LinearModel(("x1", "x2"), (1.0, 0.0), linmod.LinTarget.MEMORY_MB)))

    out_dir = tmp_path / "ok"
    code, out, err = run(capsys, "optimize", str(space_path), "--objective", "quadratic",
                         "--center", "1,1", "--budget", "30", "--seed", "5",
                         "--power-model", str(power_path), "--memory-model", str(memory_path),
                         "--power-budget", "1.0", "--memory-budget", "10.0",
                         "--output-dir", str(out_dir))
    assert code == 0, err
    rows = (out_dir / "trace.csv").read_text().splitlines()[1:]
    for row in rows:
        cells = row.split(",")
        if cells[-2] == "true":
            assert float(cells[-4]) <= 1.0 + 1e-9

    out_dir2 = tmp_path / "infeasible"
    code, out, err = run(capsys, "optimize", str(space_path), "--objective", "quadratic",
                         "--budget", "10", "--seed", "5",
                         "--power-model", str(power_path), "--memory-model", str(memory_path),
                         "--power-budget", "1e-6", "--memory-budget", "10.0",
                         "--output-dir", str(out_dir2))
    assert code == 2
    assert (out_dir2 / "trace.csv").exists()
    summary = json.loads((out_dir2 / "summary.json").read_text())
    assert summary["status"] == "infeasible"


def test_optimize_partial_constraint_flags_rejected(tmp_path, capsys):
    space_path = tmp_path / "space.json"
    space_path.write_text(json.dumps(SPACE_SPEC))
    code, _, err = run(capsys, "optimize", str(space_path), "--budget", "10",
                       "--power-budget", "1.0")
    assert code == 1


def test_usage_error_exit_code(capsys):
    assert cli.main(["predict"]) == 1          # missing required args
    assert cli.main(["no-such-command"]) == 1


def test_missing_file_exit_code(capsys):
    assert cli.main(["fit", "/nonexistent/profile.csv"]) == 1


def test_predict_constant_model_single_fc(tmp_path, capsys):
    # a constant-5ms runtime model makes the single-layer network total 5 ms
    models_dir = tmp_path / "models"
    models_dir.mkdir()
    schema = polyreg.feature_schema(LayerKind.FULLY_CONNECTED)
    const = polyreg.TermSpec((0,) * len(schema))
    runtime = polyreg.PolynomialModel(LayerKind.FULLY_CONNECTED, polyreg.Target.RUNTIME_MS,
                                      2, schema, ((const, 5.0),), ())
    power = polyreg.PolynomialModel(LayerKind.FULLY_CONNECTED, polyreg.Target.POWER_W,
                                    2, schema, ((const, 2.0),), ())
    (models_dir / "model_fc_runtime_ms.json").write_text(polyreg.model_to_json(runtime))
    (models_dir / "model_fc_power_w.json").write_text(polyreg.model_to_json(power))
    net = tmp_path / "net.txt"
    net.write_text("f1 fc in=1x4x1x1 out=2\n")
    code, out, err = run(capsys, "predict", str(net), "--family", "poly",
                         "--models-dir", str(models_dir), "--format", "csv")
    assert code == 0, err
    total = [line for line in out.splitlines() if line.startswith("total")][0].split(",")
    assert float(total[2]) == 5.0


def test_optimize_command_objective(tmp_path, capsys):
    space_path = tmp_path / "space.json"
    space_path.write_text(json.dumps({"dimensions": [
        {"name": "x", "kind": "continuous", "lo": 0.0, "hi": 1.0}]}))
    out_dir = tmp_path / "opt"
    script = ("import sys; x = float(sys.stdin.readline().split(',')[0]); "
              "print((x - 0.3) ** 2)")
    code, out, err = run(capsys, "optimize", str(space_path), "--objective", "command",
                         "--budget", "10", "--seed", "2", "--output-dir", str(out_dir),
                         "--command", "python3", "-c", script)
    assert code == 0, err
    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["best_y"] <= 0.05


def test_numerical_failure_exit_code(monkeypatch, tmp_path, capsys):
    from hwcost.bayesopt import NumericalError

    def boom(*args, **kwargs):
        raise NumericalError("covariance not positive definite at jitter 1")

    monkeypatch.setattr(cli.bayesopt, "bo_run", boom)
    space_path = tmp_path / "space.json"
    space_path.write_text(json.dumps({"dimensions": [
        {"name": "x", "kind": "continuous", "lo": 0.0, "hi": 1.0}]}))
    code, _, err = run(capsys, "optimize", str(space_path), "--budget", "10")
    assert code == 3
    assert "numerical failure" in err


def test_cli_determinism_byte_identical(tmp_path, capsys):
    """Representative determinism check; the acceptance suite covers every command."""
    args = ["synth", "--count", "30", "--noise", "0.05", "--seed", "9"]
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    code, stdout_a, _ = run(capsys, *args, "--output-dir", str(out_a))
    assert code == 0
    code, stdout_b, _ = run(capsys, *args, "--output-dir", str(out_b))
    assert code == 0
    assert (out_a / "synthetic_profile.csv").read_bytes() == \
        (out_b / "synthetic_profile.csv").read_bytes()
