import subprocess
import sys

import numpy as np
import pytest

from fairimpute.cli import main

CONFIG = """
[dataset]
path = people.csv
sensitive = sex, race
majority = Male, White
response = y

[experiment]
L = 2
repeats = 2
master_seed = 5

[mechanisms]
1a
2a

[imputer.mean]
[imputer.knn]
k = 3
"""


@pytest.fixture
def people(tmp_path):
    rng = np.random.default_rng(0)
    n = 80
    lines = ["a,b,c,d,sex,race,y"]
    for i in range(n):
        x = rng.normal(size=4)
        sex = "Male" if i % 3 else "Female"
        race = "White" if i % 4 else "Black"
        lines.append(",".join(f"{v:.6f}" for v in x) + f",{sex},{race},{int(x[0] > 0)}")
    (tmp_path / "people.csv").write_text("\n".join(lines) + "\n")
    (tmp_path / "exp.ini").write_text(CONFIG)
    return tmp_path


def test_bench_impute_two_groupings(people, capsys):
    out = people / "res"
    assert main(["bench-impute", "--config", str(people / "exp.ini"), "--out", str(out)]) == 0
    lines = (out / "impute_report.csv").read_text().splitlines()
    assert lines[0] == "mechanism,method,metric,mean,sd,repeats"
    metrics = {line.split(",")[2] for line in lines[1:]}
    assert metrics == {"MSIE", "IAPD_sex", "IAPD_race", "Var", "VarD_sex", "VarD_race"}
    assert len(lines) - 1 == 2 * (2 * 3 + 3)


def test_bench_impute_is_byte_identical(people):
    paths = []
    for name in ("r1", "r2"):
        assert main(["bench-impute", "--config", str(people / "exp.ini"), "--out", str(people / name)]) == 0
        paths.append(people / name / "impute_report.csv")
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert main(["bench-impute", "--config", str(people / "exp.ini"), "--seed", "6",
                 "--out", str(people / "r3")]) == 0
    assert (people / "r3" / "impute_report.csv").read_bytes() != paths[0].read_bytes()


def test_global_flags_before_subcommand(people):
    out = people / "md"
    code = main(["--config", str(people / "exp.ini"), "--reps", "1", "--format", "md", "--out", str(out),
                 "bench-impute"])
    assert code == 0
    text = (out / "impute_report.md").read_text()
    assert "## MSIE" in text and "| mechanism | knn | mean |" in text


def test_bench_predict(people):
    cfg = people / "exp.ini"
    cfg.write_text(CONFIG.replace("master_seed = 5", "master_seed = 5\nforest_trees = 5"))
    assert main(["bench-predict", "--config", str(cfg), "--out", str(people / "p")]) == 0
    lines = (people / "p" / "predict_report.csv").read_text().splitlines()[1:]
    methods = {line.split(",")[1] for line in lines}
    assert methods == {"mean", "knn", "CC", "complete"}
    # accuracy plus EOD and acc_diff for each of two groupings
    assert len(lines) == 2 * 4 * 5


def test_failure_rows_exit_code(people):
    cfg = people / "exp.ini"
    cfg.write_text(CONFIG.replace("[imputer.knn]\nk = 3", "[imputer.optspace]\nrank = 40"))
    out = people / "f"
    assert main(["bench-impute", "--config", str(cfg), "--out", str(out)]) == 2
    text = (out / "impute_report.csv").read_text()
    assert "optspace,MSIE:failed" in text and "mean,MSIE," in text


def test_input_errors(people, capsys):
    assert main(["bench-impute"]) == 1
    assert main(["bench-impute", "--config", str(people / "missing.ini")]) == 1
    bad = people / "bad.ini"
    bad.write_text(CONFIG.replace("k = 3", "kk = 3"))
    assert main(["bench-impute", "--config", str(bad)]) == 1
    assert "unknown keys" in capsys.readouterr().err


def test_synth_ampute_impute_roundtrip(people):
    data = people / "syn.csv"
    assert main(["synth", "--n", "120", "--p", "6", "--response", "none", "--seed", "4",
                 "--out", str(data)]) == 0
    header = data.read_text().splitlines()[0]
    assert header == "x1,x2,x3,x4,x5,x6,g"
    amp = people / "amp"
    assert main(["ampute", "--input", str(data), "--sensitive", "g", "--majority", "1",
                 "--mechanism", "1b", "--L", "3", "--out", str(amp), "--seed", "1"]) == 0
    masked = (amp / "masked.csv").read_text()
    assert "NA" in masked
    mask = np.loadtxt(amp / "mask.csv", delimiter=",", skiprows=1)
    assert mask.shape == (120, 7) and np.all(mask[:, 3:] == 1) and 0.3 < 1 - mask[:, :3].mean() < 0.7
    done = people / "completed.csv"
    assert main(["impute", "--input", str(amp / "masked.csv"), "--mask", str(amp / "mask.csv"),
                 "--sensitive", "g", "--majority", "1", "--method", "knn", "--param", "k=4",
                 "--out", str(done)]) == 0
    completed = np.loadtxt(done, delimiter=",", skiprows=1)
    original = np.loadtxt(data, delimiter=",", skiprows=1)
    assert np.all(np.isfinite(completed))
    observed = mask == 1
    # ampute normalizes; the observed cells match the normalized input
    norm = (original - original.mean(axis=0)) / original.std(axis=0)
    norm[:, 6] = original[:, 6]
    np.testing.assert_allclose(completed[observed], norm[observed], atol=1e-12)


def test_impute_rejects_bad_param_and_mask(people):
    data = people / "syn.csv"
    main(["synth", "--n", "40", "--p", "4", "--response", "none", "--out", str(data)])
    amp = people / "amp"
    main(["ampute", "--input", str(data), "--sensitive", "g", "--mechanism", "1b", "--L", "2", "--out", str(amp)])
    args = ["impute", "--input", str(amp / "masked.csv"), "--sensitive", "g", "--method", "knn"]
    assert main(args + ["--mask", str(amp / "mask.csv"), "--param", "kk=2"]) == 1
    bad = people / "badmask.csv"
    bad.write_text((amp / "mask.csv").read_text().replace("0", "1"))
    assert main(args + ["--mask", str(bad)]) == 1


def test_console_entry_point(people):
    proc = subprocess.run([sys.executable, "-m", "fairimpute", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for name in ("synth", "ampute", "impute", "bench-impute", "bench-predict"):
        assert name in proc.stdout
