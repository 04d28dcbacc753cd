import json

import numpy as np
import pytest

import ia_estimation
from ia_estimation import FamilyParams
from ia_estimation.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main, plot_data_rows
from ia_estimation.metrics_eval import CSV_COLUMNS
from ia_estimation.utils import read_values


@pytest.fixture
def cauchy_csv(tmp_path):
    path = tmp_path / "cauchy.csv"
    argv = ["sample", "--family", "student-t", "--kappa", "1", "--n", "5000", "--seed", "7", "--out", str(path)]
    assert main(argv) == 0
    return path


def test_sample(cauchy_csv):
    values = read_values(cauchy_csv)

    assert values.shape == (5_000,)
    expected = ia_estimation.sample(FamilyParams(family=ia_estimation.Family.STUDENT_T, kappa=1.0), 5_000, seed=7)
    assert np.array_equal(values, expected.values)

    manifest = ia_estimation.RunManifest.read(cauchy_csv.with_name("cauchy.csv.manifest.json"))
    assert manifest.command == "sample"
    assert manifest.seed == 7
    assert manifest.config["kappa"] == 1.0
    assert manifest.version == ia_estimation.__version__


def test_sample_is_deterministic(tmp_path):
    first = tmp_path / "first.csv"
    second = tmp_path / "second.csv"

    for out in (first, second):
        argv = ["sample", "--family", "student-t", "--kappa", "1", "--n", "5", "--seed", "7", "--out", str(out)]
        assert main(argv) == EXIT_OK

    assert first.read_bytes() == second.read_bytes()


def test_sample_respects_pareto_support(tmp_path):
    out = tmp_path / "pareto.csv"

    argv = ["sample", "--family", "gpareto-1s", "--mu", "3", "--kappa", "0.5", "--n", "1000", "--out", str(out)]
    assert main(argv) == EXIT_OK

    assert np.all(read_values(out) >= 3.0)


def test_sample_rejects_negative_shape(tmp_path):
    out = tmp_path / "x.csv"

    assert main(["sample", "--family", "t", "--kappa", "-1", "--n", "5", "--out", str(out)]) == EXIT_USAGE
    assert not out.exists()


def test_estimate(cauchy_csv, tmp_path):
    out = tmp_path / "estimate.json"

    assert main(["estimate", "--in", str(cauchy_csv), "--json-out", str(out)]) == EXIT_OK

    document = json.loads(out.read_text(encoding="utf-8"))
    assert document["family"] == "student_t"
    assert document["kappa"] == pytest.approx(1.0, abs=0.4)
    assert document["n2"] > 0
    assert document["theory"] is not None
    assert (tmp_path / "estimate.json.manifest.json").exists()


def test_estimate_to_stdout(cauchy_csv, tmp_path, capsys):
    assert main(["estimate", "--in", str(cauchy_csv)]) == EXIT_OK

    document = json.loads(capsys.readouterr().out)
    assert document["family"] == "student_t"
    assert sorted(p.name for p in tmp_path.iterdir()) == ["cauchy.csv", "cauchy.csv.manifest.json"]


def test_estimate_does_not_depend_on_threads(cauchy_csv, tmp_path):
    one = tmp_path / "one.json"
    four = tmp_path / "four.json"

    assert main(["estimate", "--in", str(cauchy_csv), "--json-out", str(one)]) == EXIT_OK
    assert main(["--threads", "4", "estimate", "--in", str(cauchy_csv), "--json-out", str(four)]) == EXIT_OK

    assert one.read_text(encoding="utf-8") == four.read_text(encoding="utf-8")


def test_estimate_plot_data(cauchy_csv, tmp_path):
    plot = tmp_path / "plot.csv"

    code = main(
        [
            "estimate",
            "--in",
            str(cauchy_csv),
            "--json-out",
            str(tmp_path / "e.json"),
            "--plot-data",
            str(plot),
            "--bins",
            "10",
        ]
    )

    assert code == EXIT_OK
    lines = plot.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "kind,x,density"
    assert sum(line.startswith("histogram,") for line in lines) == 10
    assert sum(line.startswith("pdf,") for line in lines) == 41


def test_plot_data_rows(cauchy):
    values = ia_estimation.sample(cauchy, 10_000, seed=0).values

    rows = plot_data_rows(values, cauchy, bins=20)
    histogram = [row for row in rows if row["kind"] == "histogram"]
    width = histogram[1]["x"] - histogram[0]["x"]

    # 99% of the samples fall within the plotted range
    assert sum(row["density"] for row in histogram) * width == pytest.approx(0.99, abs=0.01)
    assert max(row["density"] for row in rows if row["kind"] == "pdf") <= 1.0 / np.pi + 1e-12


def test_estimate_pareto(tmp_path):
    data = tmp_path / "pareto.csv"
    out = tmp_path / "pareto.json"
    assert main(["sample", "--family", "gpareto-1s", "--kappa", "0.5", "--n", "20000", "--out", str(data)]) == 0

    assert main(["estimate", "--in", str(data), "--family", "gpareto-1s", "--json-out", str(out)]) == EXIT_OK

    document = json.loads(out.read_text(encoding="utf-8"))
    assert document["family"] == "gpareto_one_sided"
    assert document["theory"] is None
    assert any("sample minimum" in w for w in document["warnings"])


def test_ia_select(cauchy_csv, tmp_path):
    out = tmp_path / "selection.csv"
    counts = tmp_path / "counts.json"

    assert main(["ia-select", "--in", str(cauchy_csv), "--out", str(out), "--json-out", str(counts)]) == EXIT_OK

    document = json.loads(counts.read_text(encoding="utf-8"))
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "order,value"
    assert sum(line.startswith("2,") for line in lines) == document["n2"]
    assert sum(line.startswith("3,") for line in lines) == document["n3"]
    assert document["spread"] > 0


def test_fit_eval_with_params(cauchy_csv, tmp_path):
    out = tmp_path / "fit.json"

    assert main(["fit-eval", "--in", str(cauchy_csv), "--kappa", "1", "--json-out", str(out)]) == EXIT_OK

    document = json.loads(out.read_text(encoding="utf-8"))
    assert document["params"] == {"family": "student_t", "mu": 0.0, "sigma": 1.0, "kappa": 1.0}
    assert document["cvm_p"] > 0.001
    assert document["ks"] < 0.05
    assert document["avg_ll"] == pytest.approx(-np.log(4.0 * np.pi), abs=0.1)


@pytest.mark.parametrize("fit", ["ia", "mle"])
def test_fit_eval_with_fit(fit: str, cauchy_csv, tmp_path):
    out = tmp_path / "fit.json"

    assert main(["fit-eval", "--in", str(cauchy_csv), "--fit", fit, "--json-out", str(out)]) == EXIT_OK

    document = json.loads(out.read_text(encoding="utf-8"))
    assert document["params"]["kappa"] == pytest.approx(1.0, abs=0.4)


def test_fit_eval_requires_params_or_fit(cauchy_csv):
    assert main(["fit-eval", "--in", str(cauchy_csv)]) == EXIT_USAGE


def test_hill(tmp_path):
    data = tmp_path / "pareto.csv"
    out = tmp_path / "hill.json"
    assert main(["sample", "--family", "gpareto-1s", "--kappa", "0.5", "--n", "20000", "--out", str(data)]) == 0

    assert main(["hill", "--in", str(data), "--k", "500", "--shift", "-2", "--json-out", str(out)]) == EXIT_OK

    document = json.loads(out.read_text(encoding="utf-8"))
    assert document["k_used"] == 500
    assert document["kappa"] == pytest.approx(0.5, abs=0.1)


def test_hill_stable_average(tmp_path):
    data = tmp_path / "pareto.csv"
    out = tmp_path / "hill.json"
    assert main(["sample", "--family", "gpareto-1s", "--kappa", "0.5", "--n", "20000", "--out", str(data)]) == 0

    code = main(
        ["hill", "--in", str(data), "--k-min", "50", "--k-max", "2000", "--shift", "-2", "--json-out", str(out)]
    )

    assert code == EXIT_OK
    document = json.loads(out.read_text(encoding="utf-8"))
    assert document["k_range"] == [50, 2000]
    assert 50 <= document["k_used"][0] <= document["k_used"][1] <= 2000


def test_benchmark(tmp_path):
    config = tmp_path / "benchmark.json"
    config.write_text(
        json.dumps({"family": "student_t", "shapes": [1.0], "sizes": [1000], "trials": 2, "seed": 3}),
        encoding="utf-8",
    )
    out = tmp_path / "benchmark.csv"

    assert main(["benchmark", "--config", str(config), "--out", str(out)]) == EXIT_OK

    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 3
    assert lines[1].startswith("cell,student_t,")
    assert lines[2].startswith("pooled,student_t,")
    assert (tmp_path / "benchmark.md").read_text(encoding="utf-8").startswith("Benchmark of student_t")
    manifest = ia_estimation.RunManifest.read(tmp_path / "benchmark.csv.manifest.json")
    assert manifest.config["trials"] == 2
    assert manifest.seed == 3


def test_benchmark_rejects_unknown_keys(tmp_path):
    config = tmp_path / "benchmark.json"
    config.write_text(json.dumps({"family": "student_t", "shapes": [1.0], "trails": 2}), encoding="utf-8")

    assert main(["benchmark", "--config", str(config), "--out", str(tmp_path / "b.csv")]) == EXIT_USAGE


def test_stdmap(tmp_path):
    out = tmp_path / "z.csv"
    report = tmp_path / "z.json"

    argv = ["stdmap", "--K", "10", "--M", "3000", "--T", "30", "--out", str(out), "--estimate"]
    argv += ["--json-out", str(report)]
    code = main(argv)

    assert code == EXIT_OK
    assert read_values(out).shape == (3_000,)
    assert json.loads(report.read_text(encoding="utf-8"))["family"] == "student_t"
    manifest = ia_estimation.RunManifest.read(tmp_path / "z.csv.manifest.json")
    assert manifest.config == {"K": 10.0, "M": 3000, "T": 30, "seed": 0, "wrap": True, "estimate": True}


def test_replay(cauchy_csv):
    original = cauchy_csv.read_bytes()
    cauchy_csv.unlink()

    assert main(["replay", str(cauchy_csv.with_name("cauchy.csv.manifest.json"))]) == EXIT_OK

    assert cauchy_csv.read_bytes() == original


def test_replay_rejects_invalid_manifest(write_csv):
    assert main(["replay", str(write_csv("bad.manifest.json", "{}"))]) == EXIT_DATA


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["sample", "--family", "lognormal", "--kappa", "1", "--n", "10", "--out", "x.csv"],
        ["sample", "--family", "t", "--kappa", "1", "--n", "0", "--out", "x.csv"],
        ["sample", "--family", "t", "--kappa", "1", "--n", "10", "--seed", "-1", "--out", "x.csv"],
        ["estimate"],
    ],
)
def test_usage_errors(argv: list[str]):
    assert main(argv) == EXIT_USAGE


def test_invalid_params(tmp_path):
    out = tmp_path / "x.csv"

    argv = ["sample", "--family", "t", "--kappa", "1", "--sigma", "-1", "--n", "10", "--out", str(out)]
    assert main(argv) == EXIT_USAGE
    assert not out.exists()


@pytest.mark.parametrize(
    "content",
    [
        "value\n1\ntwo\n",
        "# nothing here\n",
        "0\n1\n4\n9\n16\n25\n36\n49\n64\n81\n",
    ],
)
def test_data_errors(content: str, write_csv, tmp_path):
    path = write_csv("data.csv", content)

    argv = ["estimate", "--in", str(path), "--epsilon", "1e-9", "--permutations", "1"]
    argv += ["--json-out", str(tmp_path / "e.json")]
    code = main(argv)

    assert code == EXIT_DATA


def test_missing_input(tmp_path):
    assert main(["estimate", "--in", str(tmp_path / "missing.csv")]) == EXIT_DATA


def test_input_that_is_not_utf8(tmp_path):
    path = tmp_path / "latin.csv"
    path.write_bytes(b"value\n1.0\n\xff\xfe2.0\n3.0\n")

    assert main(["estimate", "--in", str(path)]) == EXIT_DATA
