import glob
import json
import os

import pytest

from varheat.cli import EXIT_INVALID, EXIT_OK, RERUN_SUFFIX, main


def _run_dir(root, command):
    dirs = glob.glob(os.path.join(str(root), f"{command}-*"))
    assert len(dirs) == 1
    return dirs[0]


def test_kernel_check(tmp_path):
    assert main(["kernel-check", "--alpha", "2", "--t", "1", "--output-dir", str(tmp_path)]) == EXIT_OK
    run = _run_dir(tmp_path, "kernel-check")
    with open(os.path.join(run, "kernel_check.json"), encoding="utf-8") as handle:
        report = json.load(handle)
    assert report["symmetry_error"] < 1e-9
    assert os.path.isfile(os.path.join(run, "manifest.json"))
    assert os.path.isfile(os.path.join(run, "last_run.log"))


def test_sample_then_variation(tmp_path):
    assert main(["sample", "--process", "fbm", "--n", "64", "--hurst", "0.25", "--output-dir", str(tmp_path)]) == EXIT_OK
    path_file = os.path.join(_run_dir(tmp_path, "sample"), "path.csv")
    assert os.path.isfile(path_file)
    assert main(["variation", "--kind", "fbm", "--hurst", "0.25", "--input", path_file,
                 "--output-dir", str(tmp_path)]) == EXIT_OK
    with open(os.path.join(_run_dir(tmp_path, "variation"), "variation.csv"), encoding="utf-8") as handle:
        rows = handle.read().splitlines()
    assert rows[0] == "kind,n,alpha_or_h,p,statistic"
    assert rows[1].startswith("fbm_norm,64,0.25,,")


def test_estimate_from_u0(tmp_path):
    args = ["estimate", "--target", "alpha_corrected", "--alpha", "1.5", "--n", "256", "--output-dir", str(tmp_path)]
    assert main(args) == EXIT_OK
    with open(os.path.join(_run_dir(tmp_path, "estimate"), "estimate.json"), encoding="utf-8") as handle:
        result = json.load(handle)
    assert result["target"] == "alpha"
    assert result["method"] == "log_ratio_corrected"
    assert result["n"] == 256
    assert 1.05 <= result["estimate"] <= 2.0


def test_rerun_is_bit_identical(tmp_path):
    assert main(["sample", "--process", "u0", "--alpha", "2", "--n", "32", "--seed", "3",
                 "--output-dir", str(tmp_path)]) == EXIT_OK
    run = _run_dir(tmp_path, "sample")
    with open(os.path.join(run, "path.csv"), "rb") as handle:
        first = handle.read()
    assert main(["rerun", os.path.join(run, "manifest.json")]) == EXIT_OK
    rerun = run + RERUN_SUFFIX
    assert sorted(glob.glob(os.path.join(str(tmp_path), "sample-*"))) == [run, rerun]
    with open(os.path.join(rerun, "path.csv"), "rb") as handle:
        assert handle.read() == first
    with open(os.path.join(run, "path.csv"), "rb") as handle:
        assert handle.read() == first
    with open(os.path.join(rerun, "manifest.json"), encoding="utf-8") as handle:
        assert json.load(handle)["seed"] == 3


def test_rate_small(tmp_path):
    args = ["rate", "--target", "fbm_vn", "--n-grid", "32,64", "--reps", "5", "--allow-small",
            "--threads", "2", "--output-dir", str(tmp_path)]
    assert main(args) == EXIT_OK
    run = _run_dir(tmp_path, "rate")
    assert os.path.isfile(os.path.join(run, "rate_fbm_vn.csv"))
    assert os.path.isfile(os.path.join(run, "rate_fbm_vn.json"))


def test_rate_nonlinear_pair(tmp_path):
    args = ["rate", "--target", "nonlinear_pair", "--n-grid", "16,32", "--reps", "2", "--n-space", "256",
            "--allow-small", "--output-dir", str(tmp_path)]
    assert main(args) == EXIT_OK
    run = _run_dir(tmp_path, "rate")
    for name in ("rate_nonlinear_vn.csv", "rate_nonlinear_un.csv"):
        assert os.path.isfile(os.path.join(run, name))
    with open(os.path.join(run, "slope_agreement.json"), encoding="utf-8") as handle:
        data = json.load(handle)
    assert set(data) == {"v", "u", "slope_gap", "agree"}


@pytest.mark.parametrize("args", [
    ["sample", "--process", "nope"],
    ["sample"],
    ["estimate", "--target", "theta2", "--alpha", "1.75", "--n", "32"],
    ["rate", "--target", "fbm_vn", "--reps", "5"],
    ["variation", "--kind", "quad"],
    ["variation", "--kind", "quad", "--input", "missing.csv"],
    ["sample", "--process", "fbm", "--sigma", "cubic:1"],
    ["kernel-check", "--alpha", "2", "--bogus", "1"],
])
def test_invalid_arguments_exit_two(tmp_path, args):
    assert main(args + ["--output-dir", str(tmp_path)]) == EXIT_INVALID


def test_variation_from_file_matches_in_memory(tmp_path):
    from varheat.gaussian import sample_fbm
    from varheat.serialization import write_path_csv
    from varheat.variations import quad_variation_renorm

    path = sample_fbm(0.25, 128, seed=4)
    path_file = write_path_csv(str(tmp_path / "path.csv"), path)
    assert main(["variation", "--kind", "quad", "--alpha", "2", "--input", path_file, "--output-dir", str(tmp_path)]) == EXIT_OK
    with open(os.path.join(_run_dir(tmp_path, "variation"), "variation.csv"), encoding="utf-8") as handle:
        statistic = float(handle.read().splitlines()[1].split(",")[-1])
    assert statistic == quad_variation_renorm(path, 2.0).statistic


def test_variation_simulated(tmp_path):
    assert main(["variation", "--kind", "power", "--simulate", "--alpha", "2", "--n", "64",
                 "--format", "json", "--output-dir", str(tmp_path)]) == EXIT_OK
    with open(os.path.join(_run_dir(tmp_path, "variation"), "variation.json"), encoding="utf-8") as handle:
        data = json.load(handle)
    assert data["kind"] == "power_p"
    assert data["p"] == 4.0


@pytest.mark.parametrize("args", [
    ["kernel-check", "--alpha", "2.5"],
    ["kernel-check", "--alpha", "2", "--t", "0"],
    ["sample", "--process", "u0", "--n", "1"],
    ["sample", "--process", "u0", "--t-start", "0.5", "--t-end", "0.5"],
    ["sample", "--process", "spde", "--n-space", "300"],
    ["sample", "--process", "fbm", "--hurst", "1.2"],
    ["sample", "--process", "perturbed", "--c0", "-1"],
    ["sample", "--process", "u0", "--theta", "0"],
    ["estimate", "--target", "alpha", "--n", "3"],
    ["rate", "--target", "u0_vn", "--n-grid", "64,100", "--reps", "2", "--allow-small"],
    ["rate", "--target", "nonlinear_vn", "--n-grid", "16,32", "--reps", "0", "--allow-small"],
    ["rate", "--target", "nonlinear_vn", "--n-grid", "16,32", "--n-space", "128", "--reps", "2", "--allow-small"],
    ["prop4-check", "--delta-ladder", "0.5,-0.1", "--reps", "2", "--allow-small"],
    ["prop4-check", "--t", "0.5", "--delta-ladder", "0.5,0.25", "--reps", "2", "--allow-small"],
])
def test_out_of_range_parameters_fail_before_run_dir(tmp_path, args):
    assert main(args + ["--output-dir", str(tmp_path)]) == EXIT_INVALID
    assert not os.listdir(tmp_path)
