import math

import numpy as np
import pytest

from fairimpute.amputation import ampute, mechanism
from fairimpute.data import DataError, group_partition
from fairimpute.harness.benchmark import run_imputation_benchmark, run_prediction_benchmark
from fairimpute.harness.config import ConfigError, ExperimentConfig, parse_config
from fairimpute.harness.report import (
    CSV_HEADER,
    Report,
    ReportRow,
    aggregate,
    emit_report,
    render_csv,
    render_markdown,
)
from fairimpute.harness.seeding import derive_seed, mix64, stream
from fairimpute.harness.synthetic import SyntheticSpec, generate_synthetic
from fairimpute.metrics import variance_baselines
from fairimpute.prediction.forest import ForestConfig

BASIC = """
# a comment
[synthetic]
n = 200
p = 10
seed = 3          # inline comment

[experiment]
L = 5
repeats = 3
master_seed = 42

[mechanisms]
1a
2c

[imputer.mean]
[imputer.knn]
k = 3
"""


def test_parse_basic_config():
    cfg = parse_config(BASIC)
    assert cfg.mechanisms == ["1a", "2c"]
    assert cfg.imputers == {"mean": {}, "knn": {"k": 3}}
    assert (cfg.L, cfg.repeats, cfg.master_seed) == (5, 3, 42)
    assert cfg.synthetic == SyntheticSpec(n=200, p=10, seed=3)
    assert cfg.train_fraction == 0.8 and cfg.format == "csv"


def test_parse_dataset_section(tmp_path):
    cfg = parse_config(BASIC.replace("[synthetic]\nn = 200\np = 10\nseed = 3          # inline comment",
                                     "[dataset]\npath = data.csv\nsensitive = sex, race\nmajority = Male, auto\n"
                                     "response = y\nnormalize = no"), tmp_path)
    assert cfg.dataset_path == tmp_path / "data.csv"
    assert list(cfg.schema.sensitive) == ["sex", "race"]
    assert list(cfg.schema.majority) == ["Male", None]
    assert cfg.schema.response == "y" and cfg.normalize is False


@pytest.mark.parametrize("edit, message", [
    (("k = 3", "neighbours = 3"), "unknown keys"),
    (("L = 5", "L = 5\nrepeat = 2"), "unknown keys"),
    (("[imputer.mean]", "[imputer.gain]"), "unknown imputer"),
    (("[mechanisms]", "[extras]\nfoo\n[mechanisms]"), "unknown section"),
    (("1a\n", "9z\n"), "unknown mechanism"),
    (("repeats = 3", "repeats = 0"), "repeats"),
    (("repeats = 3", "repeats = three"), "number"),
    (("n = 200", "n = 200\nbogus = 1"), "unknown keys"),
    (("1a\n", "1a = yes\n"), "one label per line"),
])
def test_config_errors(edit, message):
    with pytest.raises(ConfigError, match=message):
        parse_config(BASIC.replace(*edit))


def test_config_needs_one_data_source():
    with pytest.raises(ConfigError, match="exactly one"):
        parse_config(BASIC.replace("[synthetic]\nn = 200\np = 10\nseed = 3          # inline comment\n", ""))


def test_mix64_known_values_and_streams():
    # SplitMix64 reference outputs for the state sequence starting at 0
    assert mix64(0) == 0xE220A8397B1DCDAF
    assert mix64(0x9E3779B97F4A7C15) == 0x6E789E6AA1B965F4
    assert derive_seed(1, 0, "1a") == derive_seed(1, 0, "1a")
    seeds = {derive_seed(1, r, label) for r in range(20) for label in ("1a", "1b", "2a")}
    assert len(seeds) == 60
    assert derive_seed(1, 0, "knn") != derive_seed(2, 0, "knn")
    a = stream(5, 1, "mice").random(3)
    b = stream(5, 1, "mice").random(3)
    assert np.array_equal(a, b)


def test_synthetic_group_sizes():
    fractions = []
    for seed in range(100):
        ds = generate_synthetic(SyntheticSpec(n=1000, majority_fraction=0.8, response="none", seed=seed))
        fractions.append(ds.values[:, ds.sensitive_col].mean())
    assert np.all(np.abs(np.array(fractions) - 0.8) <= 0.03)


def test_synthetic_determinism_and_layout():
    a = generate_synthetic(SyntheticSpec(n=100, p=4, seed=9))
    b = generate_synthetic(SyntheticSpec(n=100, p=4, seed=9))
    assert np.array_equal(a.values, b.values)
    assert list(a.column_names) == ["x1", "x2", "x3", "x4", "g", "y"]
    feats = a.values[:, a.feature_cols]
    np.testing.assert_allclose(feats.mean(axis=0), 0, atol=1e-12)
    np.testing.assert_allclose(feats.std(axis=0), 1, atol=1e-12)
    assert set(np.unique(a.values[:, -1])) <= {0.0, 1.0}


def test_synthetic_symmetric_groups_small_vard():
    ds = generate_synthetic(SyntheticSpec(n=2000, response="none", seed=2))
    md = ampute(ds, mechanism("1b", 5), np.random.default_rng(0))
    _, vard = variance_baselines(md, *group_partition(md.dataset))
    assert abs(vard) < 0.1


def test_synthetic_rejects_bad_spec():
    with pytest.raises(DataError):
        SyntheticSpec(p=3, rank=4)
    with pytest.raises(DataError):
        SyntheticSpec(majority_fraction=1.0)
    with pytest.raises(DataError):
        SyntheticSpec(noise_sd_minority=0)


def _cfg(**kw):
    base = dict(mechanisms=["1a", "1b"], imputers={"mean": {}, "group_mean": {}, "knn": {}}, repeats=3,
                synthetic=SyntheticSpec(n=150, p=10, seed=1))
    base.update(kw)
    return ExperimentConfig(**base).validate()


def test_imputation_grid_cardinality_and_baseline_identity():
    report = run_imputation_benchmark(_cfg())
    assert len(report.rows) == 2 * (3 * 2 + 2)
    assert not report.has_failures
    assert {r.repeats for r in report.rows} == {3}
    for label in ("1a", "1b"):
        assert report.lookup(label, "group_mean", "IAPD_g").mean == report.lookup(label, "baseline", "VarD_g").mean
    assert all(r.sd >= 0 for r in report.rows)


def test_adding_a_cell_does_not_move_others():
    small = run_imputation_benchmark(_cfg(imputers={"knn": {}}))
    large = run_imputation_benchmark(_cfg(mechanisms=["2a", "1a", "1b"], imputers={"mean": {}, "knn": {}}))
    for row in small.rows:
        assert large.lookup(row.mechanism, row.method, row.base_metric) == row


def test_prediction_grid_cardinality():
    cfg = _cfg(mechanisms=["1a"], imputers={"mean": {}, "knn": {}}, repeats=2, task="predict",
               synthetic=SyntheticSpec(n=150, p=10, seed=1), forest=ForestConfig(n_trees=10, max_depth=5))
    report = run_prediction_benchmark(cfg)
    assert len(report.rows) == 12
    assert {r.method for r in report.rows} == {"mean", "knn", "CC", "complete"}
    assert {r.metric for r in report.rows} == {"accuracy", "EOD_g", "acc_diff_g"}


def test_prediction_zero_missingness_arms_match():
    cfg = _cfg(mechanisms=["mcar(0)"], imputers={"mice": {}}, repeats=2, task="predict",
               forest=ForestConfig(n_trees=10, max_depth=5))
    report = run_prediction_benchmark(cfg)
    for metric in ("accuracy", "EOD_g", "acc_diff_g"):
        ref = report.lookup("mcar(0)", "complete", metric).mean
        assert abs(report.lookup("mcar(0)", "mice", metric).mean - ref) <= 1e-12
        assert abs(report.lookup("mcar(0)", "CC", metric).mean - ref) <= 1e-12


def test_failed_cells_are_isolated():
    cfg = _cfg(imputers={"mean": {}, "optspace": {"rank": 50}})
    report = run_imputation_benchmark(cfg)
    failed = [r for r in report.rows if r.failed]
    assert failed and all(r.method == "optspace" for r in failed)
    assert all(r.repeats == 0 and math.isnan(r.mean) for r in failed)
    reference = run_imputation_benchmark(_cfg(imputers={"mean": {}}))
    for row in reference.rows:
        assert report.lookup(row.mechanism, row.method, row.base_metric) == row


def test_aggregate_statistics():
    rows = aggregate({("1a", "m", "MSIE"): [1.0, 2.0, 3.0], ("1a", "m", "IAPD_g"): [1.0, None, 3.0],
                      ("1a", "x", "MSIE"): [4.0]}, 3)
    by = {(r.method, r.metric): r for r in rows}
    assert by[("m", "MSIE")].mean == 2.0 and by[("m", "MSIE")].sd == 1.0
    partial = by[("m", "IAPD_g:failed")]
    assert partial.failed and partial.base_metric == "IAPD_g"
    assert (partial.mean, partial.repeats) == (2.0, 2)
    assert by[("x", "MSIE:failed")].sd == 0.0


def test_csv_format():
    report = Report("t", [ReportRow("1a", "mice", "MSIE", 0.68, 0.03, 50)])
    assert render_csv(report) == CSV_HEADER + "\n1a,mice,MSIE,0.680000,0.0300000,50\n"


def test_csv_sorted_rows():
    rows = [ReportRow("2a", "knn", "MSIE", 1.0, 0.1, 2), ReportRow("1a", "mice", "MSIE", 1.0, 0.1, 2),
            ReportRow("1a", "knn", "MSIE", 1.0, 0.1, 2), ReportRow("1a", "knn", "IAPD_g", 1.0, 0.1, 2)]
    lines = render_csv(Report("t", rows)).splitlines()[1:]
    assert [tuple(line.split(",")[:3]) for line in lines] == [
        ("1a", "knn", "IAPD_g"), ("1a", "knn", "MSIE"), ("1a", "mice", "MSIE"), ("2a", "knn", "MSIE")]


def test_markdown_pivot():
    rows = [ReportRow(m, meth, "MSIE", v, 0.0, 1) for m, meth, v in
            [("1a", "knn", 0.5), ("1a", "mice", 0.25), ("1b", "knn", 1.0), ("1b", "mice", 0.125)]]
    rows.append(ReportRow("1b", "knn", "IAPD_g:failed", math.nan, math.nan, 0))
    text = render_markdown(Report("t", rows))
    msie_block = text.split("## MSIE")[1].strip().splitlines()
    assert msie_block[0] == "| mechanism | knn | mice |"
    assert msie_block[2:] == ["| 1a | 0.50 | 0.25 |", "| 1b | 1.00 | 0.12 |"]
    assert "| 1b | fail |" in text


def test_emit_report(tmp_path):
    with pytest.raises(ValueError, match="empty"):
        emit_report(Report("t", []), "csv", tmp_path / "r.csv")
    report = Report("t", [ReportRow("1a", "mice", "MSIE", 0.68, 0.03, 50)])
    path = emit_report(report, "md", tmp_path / "deep" / "r.md")
    assert path.read_text().startswith("# t")
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError):
        emit_report(report, "csv", blocker / "r.csv")
