import csv
import xml.etree.ElementTree as ET

import pytest

from abc_evidence.core import InvalidConfig
from abc_evidence.harness import load_config, run
from abc_evidence.harness.cli import main
from abc_evidence.harness.config import parse_config_text, write_dataset
from abc_evidence.harness.tables import csv_text, fmt
from abc_evidence.core import Dataset

SVG = "{http://www.w3.org/2000/svg}"
TINY = dict(n_accept=200, m_sims=10_000)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestConfig:
    def test_paper_defaults(self, tmp_path):
        empty = tmp_path / "empty.cfg"
        empty.write_text("")
        cfg = load_config(empty, experiment="replicate-study")
        assert (cfg.epsilon, cfg.n_accept, cfg.n, cfg.theta_true) == (0.001, 10_000, 10, 2.0)
        assert cfg.replicates == 50 and cfg.m_sims == 10**6
        post = load_config(empty, experiment="posterior")
        assert post.fixed_dataset().counts == (2, 3, 1, 1, 2, 1, 3, 1, 3, 1)

    def test_negative_epsilon_named(self, tmp_path):
        f = tmp_path / "c.cfg"
        f.write_text("experiment=posterior\nepsilon=-1\n")
        with pytest.raises(InvalidConfig) as info:
            load_config(f)
        assert info.value.key == "epsilon" and "epsilon" in str(info.value)

    def test_flag_overrides_file(self, tmp_path):
        f = tmp_path / "c.cfg"
        f.write_text("# comment\nexperiment=posterior\nepsilon=0.5  # inline\nn_accept=300\n")
        cfg = load_config(f, epsilon="0.25", out=str(tmp_path / "o"))
        assert cfg.epsilon == 0.25 and cfg.n_accept == 300
        run(cfg)
        assert "epsilon=0.25\n" in (tmp_path / "o" / "run_config.txt").read_text()

    def test_unknown_key(self):
        with pytest.raises(InvalidConfig) as info:
            load_config(None, experiment="posterior", bogus="1")
        assert info.value.key == "bogus"

    def test_unknown_statistic(self):
        with pytest.raises(InvalidConfig) as info:
            load_config(None, experiment="sufficiency", statistics="sum,median")
        assert info.value.key == "statistics"

    def test_two_sources(self):
        with pytest.raises(InvalidConfig):
            load_config(None, experiment="posterior", counts="1,2", generate="poisson-exp,2,10")

    def test_source_flag_replaces_file_source(self, tmp_path):
        f = tmp_path / "c.cfg"
        f.write_text("experiment=posterior\ncounts=1,2,3\n")
        assert load_config(f, generate="poisson-exp,1.5,4").generate == "poisson-exp,1.5,4"

    @pytest.mark.parametrize(
        "flags, key",
        [
            ({"experiment": "nope"}, "experiment"),
            ({"experiment": "posterior", "n_accept": "0"}, "n_accept"),
            ({"experiment": "posterior", "m_sims": "100"}, "m_sims"),
            ({"experiment": "posterior", "seed": "-3"}, "seed"),
            ({"experiment": "posterior", "counts": "1,x"}, "counts"),
            ({"experiment": "posterior", "generate": "poisson-exp,0,10"}, "theta"),
            ({"experiment": "posterior", "model": "negbin"}, "model"),
            ({"experiment": "posterior", "point": "mode"}, "point"),
        ],
    )
    def test_invalid_values(self, flags, key):
        with pytest.raises(InvalidConfig) as info:
            load_config(None, **flags)
        assert info.value.key == key

    def test_parse_rejects_garbage(self):
        with pytest.raises(InvalidConfig):
            parse_config_text("just words\n")

    def test_data_file(self, tmp_path):
        path = tmp_path / "y.txt"
        write_dataset(path, Dataset([4, 0, 2]))
        assert path.read_bytes() == b"4\n0\n2\n"
        assert load_config(None, experiment="posterior", data=str(path)).fixed_dataset().counts == (4, 0, 2)


class TestTables:
    @pytest.mark.parametrize(
        "value, text",
        [(0.1, "0.1"), (-15.926137743940042, "-15.9261377439"), (1.23e-7, "0.000000123"), (7, "7"), (None, ""), (float("nan"), "")],
    )
    def test_fmt(self, value, text):
        assert fmt(value) == text

    def test_csv(self):
        assert csv_text(("a", "b"), [(1, 0.5)]) == "a,b\n1,0.5\n"


class TestCli:
    def test_posterior_outputs(self, tmp_path, capsys):
        out = tmp_path / "o"
        assert main(["posterior", "--out", str(out)]) == 0
        rows = read_csv(out / "posterior_draws.csv")
        assert rows[0] == ["draw_index", "theta"] and len(rows) == 10_001
        root = ET.parse(out / "posterior_overlay.svg").getroot()
        assert root.tag == f"{SVG}svg"
        assert len(root.findall(f".//{SVG}rect[@data-x]")) == 30
        curve = root.find(f".//{SVG}polyline[@class='density']")
        assert len(curve.get("points").split()) == 200

    def test_same_seed_byte_identical(self, tmp_path):
        for name in ("a", "b"):
            assert main(["posterior", "--n-accept", "500", "--seed", "9", "--out", str(tmp_path / name)]) == 0
        assert (tmp_path / "a/posterior_draws.csv").read_bytes() == (tmp_path / "b/posterior_draws.csv").read_bytes()

    def test_unwritable_out(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        target = blocker / "sub"
        assert main(["posterior", "--out", str(target)]) == 2
        assert list(tmp_path.iterdir()) == [blocker]

    def test_config_error_exit_code(self, tmp_path, capsys):
        assert main(["posterior", "--epsilon=-1", "--out", str(tmp_path)]) == 2
        assert "epsilon" in capsys.readouterr().err

    def test_runtime_error_exit_code(self, tmp_path, capsys):
        out = tmp_path / "o"
        code = main(["posterior", "--counts", "100000,100000", "--max-attempts", "50", "--out", str(out)])
        assert code == 3
        assert "BudgetExceeded" in capsys.readouterr().err
        assert list(out.iterdir()) == []

    def test_missing_experiment(self, tmp_path):
        assert main(["--out", str(tmp_path)]) == 2

    def test_evidence_experiment(self, tmp_path):
        out = tmp_path / "o"
        assert main(["evidence", "--counts", "0", "--n-accept", "2000", "--m-sims", "10000", "--out", str(out)]) == 0
        rows = read_csv(out / "evidence.csv")
        assert rows[0][:7] == ["replicate", "seed", "model", "n", "s", "log_evidence", "log_evidence_exact"]
        assert len(rows) == 2


class TestReplicateStudy:
    def test_smoke_and_svg(self, tmp_path):
        out = tmp_path / "o"
        cfg = load_config(None, experiment="replicate-study", replicates="2", out=str(out), **TINY)
        result = run(cfg)
        rows = read_csv(out / "replicates.csv")
        assert rows[0] == ["replicate", "seed", "n", "s", "log_evidence_abc", "log_evidence_exact", "abs_error"]
        assert len(rows) == 3
        for r in rows[1:]:
            assert float(r[6]) == pytest.approx(abs(float(r[4]) - float(r[5])), abs=1e-9)
        root = ET.parse(out / "evidence_scatter.svg").getroot()
        points = [(c.get("data-x"), c.get("data-y")) for c in root.iter(f"{SVG}circle")]
        assert points == [(r[5], r[4]) for r in rows[1:]]
        assert root.find(f".//{SVG}polyline[@class='diagonal']") is not None
        assert len([t for t in root.iter(f"{SVG}text")]) > 4
        assert result.summary["max_abs_error"] < float("inf")

    def test_fixed_dataset_replicates(self, tmp_path):
        cfg = load_config(None, experiment="replicate-study", replicates="3", counts="1,2,0", out=str(tmp_path), **TINY)
        run(cfg)
        rows = read_csv(tmp_path / "replicates.csv")[1:]
        assert {r[3] for r in rows} == {"3"} and len({r[1] for r in rows}) == 3

    def test_workers_do_not_change_output(self, tmp_path):
        texts = []
        for w in ("1", "2"):
            out = tmp_path / w
            run(load_config(None, experiment="replicate-study", replicates="3", workers=w, out=str(out), **TINY))
            texts.append((out / "replicates.csv").read_bytes())
        assert texts[0] == texts[1]

    def test_needs_two_replicates(self, tmp_path):
        with pytest.raises(InvalidConfig):
            run(load_config(None, experiment="replicate-study", replicates="1", out=str(tmp_path), **TINY))


class TestPathologyAndSufficiency:
    def test_pathology_small(self, tmp_path):
        cfg = load_config(
            None, experiment="mc-pathology", replicates="2", n_grid="5,10", out=str(tmp_path), **TINY
        )
        result = run(cfg)
        rows = read_csv(tmp_path / "mc_pathology.csv")
        assert rows[0] == ["n", "replicate", "log_bf_abcmc", "log_bf_exact", "log_bf_alg2"]
        assert [r[0] for r in rows[1:]] == ["5", "5", "10", "10"]
        assert set(result.summary) == {5, 10}
        assert read_csv(tmp_path / "mc_pathology_summary.csv")[0][0] == "n"

    def test_pathology_degenerate_rows_kept(self, tmp_path):
        # a model prior of 0.999 on Poisson starves the Geometric slot
        cfg = load_config(
            None, experiment="mc-pathology", replicates="2", n_grid="10", model_prior="0.9999,0.0001",
            n_accept="20", m_sims="10000", out=str(tmp_path),
        )
        run(cfg)
        rows = read_csv(tmp_path / "mc_pathology.csv")[1:]
        assert len(rows) == 2 and all(r[2] == "" for r in rows) and all(r[4] != "" for r in rows)

    def test_pathology_needs_replicates(self, tmp_path):
        with pytest.raises(InvalidConfig):
            run(load_config(None, experiment="mc-pathology", replicates="1", out=str(tmp_path)))

    def test_pathology_needs_two_models(self, tmp_path):
        with pytest.raises(InvalidConfig):
            run(load_config(None, experiment="mc-pathology", models="poisson-exp", out=str(tmp_path)))

    def test_sufficiency_small(self, tmp_path):
        cfg = load_config(None, experiment="sufficiency", replicates="2", out=str(tmp_path), **TINY)
        run(cfg)
        rows = read_csv(tmp_path / "sufficiency.csv")
        assert rows[0] == ["statistic", "replicate", "log_evidence_abc", "log_evidence_exact", "abs_error"]
        assert [r[0] for r in rows[1:]] == ["sum", "sum", "half-sum", "half-sum", "max", "max"]
        # the same datasets are used under every statistic
        exact = {(r[1], r[3]) for r in rows[1:]}
        assert len(exact) == 2


def test_rerun_from_run_config(tmp_path):
    first = tmp_path / "first"
    assert main(["sufficiency", "--replicates", "2", "--n-accept", "300", "--m-sims", "10000", "--out", str(first)]) == 0
    second = tmp_path / "second"
    assert main(["--config", str(first / "run_config.txt"), "--out", str(second)]) == 0
    for name in ("sufficiency.csv", "sufficiency_summary.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()
