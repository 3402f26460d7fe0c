import csv
import io
import math
import statistics

import numpy as np
import pytest

from permoll.cli import main
from permoll.harness import (
    GridPoint,
    LandscapeConfig,
    SweepConfig,
    parse_policy,
    run_landscape,
    run_sweep,
    run_verify,
    summarize,
)
from permoll.harness.landscape import HEADER as LANDSCAPE_HEADER
from permoll.harness.sweep import RAW_HEADER, SUMMARY_HEADER
from permoll.harness.verify import HEADER as VERIFY_HEADER
from permoll.harness.verify import acceptance_grid, build_grid, eval_size_expr


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def header_of(text):
    return text.splitlines()[0].split(",")


class TestSummarize:
    def test_examples(self):
        s = summarize([1, 2, 3])
        assert (s.count, s.mean, s.std, s.min, s.max) == (3, 2.0, 1.0, 1.0, 3.0)
        assert summarize([5]).std == 0.0 and summarize([5]).mean == 5.0

    def test_empty(self):
        with pytest.raises(ValueError):
            summarize([])

    def test_matches_numpy(self):
        values = np.random.default_rng(0).normal(2.4, 0.3, 100)
        s = summarize(values)
        assert s.mean == pytest.approx(values.mean())
        assert s.std == pytest.approx(values.std(ddof=1))


class TestPolicyParsing:
    def test_variants(self):
        assert parse_policy("static:10", 64).lam == 10
        assert parse_policy("log", 255).lam == pytest.approx(2 * math.log(256))
        adj = parse_policy("adjust:1.5,1,n", 64)
        assert (adj.variant, adj.F, adj.lam_min, adj.lam_max, adj.lam) == ("self_adjusting", 1.5, 1, 64, 1)
        assert parse_policy("adjust:1.5,1,log", 64).lam_max == pytest.approx(2 * math.log(65))
        assert parse_policy("adjust", 64).lam_max == 64
        th = parse_policy("theory:0.3,0.7", 64)
        assert (th.c1, th.c2) == (0.3, 0.7)

    @pytest.mark.parametrize("spec", ["static", "static:x", "adjust:1.5", "theory:0.6,0.7", "fixed:3", "log:2"])
    def test_invalid(self, spec):
        with pytest.raises(ValueError):
            parse_policy(spec, 64)


class TestSweep:
    def test_headers_and_rows(self):
        res = run_sweep(SweepConfig("ollga", [8, 12], runs=3, seed=1, policy="static:3"))
        assert header_of(res.raw_csv()) == RAW_HEADER
        assert header_of(res.summary_csv()) == SUMMARY_HEADER
        raw = rows_of(res.raw_csv())
        assert [(int(r["n"]), int(r["run"])) for r in raw] == [(8, 0), (8, 1), (8, 2), (12, 0), (12, 1), (12, 2)]
        assert {r["finished"] for r in raw} == {"true"}
        assert {r["policy"] for r in raw} == {"static:3"}

    def test_non_ollga_label(self):
        res = run_sweep(SweepConfig("rls", [8], runs=2, seed=1))
        assert {r.policy for r in res.raw} == {"-"}

    def test_byte_identical(self):
        cfg = SweepConfig("ea", [10, 16], runs=4, seed=99)
        a, b = run_sweep(cfg), run_sweep(cfg)
        assert a.raw_csv() == b.raw_csv() and a.summary_csv() == b.summary_csv()

    def test_seeds_follow_run_index(self):
        res = run_sweep(SweepConfig("rls", [8, 9], runs=3, seed=5))
        by_run = {}
        for r in res.raw:
            by_run.setdefault(r.run, set()).add(r.seed)
        assert all(len(s) == 1 for s in by_run.values())

    def test_single_run_summary(self):
        res = run_sweep(SweepConfig("ollga", [20], runs=1, seed=3, policy="log"))
        row = res.summary_for(20)
        assert row.runs == 1 and row.std_evals_over_n2 == 0
        assert row.mean_evals_over_n2 == pytest.approx(res.raw[0].evaluations / 400)

    def test_summary_recomputed_independently(self):
        res = run_sweep(SweepConfig("ollga", [32], runs=12, seed=4, policy="log"))
        values = [int(r["evaluations"]) / 32 ** 2 for r in rows_of(res.raw_csv())]
        summary = rows_of(res.summary_csv())[0]
        assert float(summary["mean_evals_over_n2"]) == pytest.approx(statistics.mean(values), abs=1e-6)
        assert float(summary["std_evals_over_n2"]) == pytest.approx(statistics.stdev(values), abs=1e-6)

    def test_unfinished_runs(self):
        cfg = dict(algo="rls", sizes=[40], runs=3, seed=2, budget_mult=0.05)
        res = run_sweep(SweepConfig(**cfg))
        assert all(not r.finished for r in res.raw)
        assert res.summary == []
        res = run_sweep(SweepConfig(**cfg, include_unfinished=True))
        assert res.summary_for(40).runs == 3

    def test_rls_n16(self):
        res = run_sweep(SweepConfig("rls", [16], runs=100, seed=2024))
        assert res.summary_for(16).mean_evals_over_n2 == pytest.approx(1.297, rel=0.15)

    def test_invalid_configs(self):
        with pytest.raises(ValueError):
            SweepConfig("ga", [8], 1, 0)
        with pytest.raises(ValueError):
            SweepConfig("rls", [1], 1, 0)
        with pytest.raises(ValueError):
            SweepConfig("rls", [8], 0, 0)
        with pytest.raises(ValueError):
            SweepConfig("ollga", [8], 1, 0, policy="static:0.5")


class TestLandscape:
    def test_shape(self):
        cfg = LandscapeConfig(n=12, lam_min=1, lam_max=4, step=1.5, runs=6, seed=1)
        assert cfg.lattice() == pytest.approx([1, 1.5, 2.25, 3.375])
        res = run_landscape(cfg)
        text = res.to_csv()
        assert header_of(text) == LANDSCAPE_HEADER
        rows = rows_of(text)
        by_d = {}
        for r in rows:
            assert 0 < float(r["rel_perf"]) <= 1
            assert 0 < float(r["improve_prob"]) <= 1
            assert int(r["samples"]) >= 1
            assert int(r["distance"]) >= 2
            by_d.setdefault(int(r["distance"]), []).append(float(r["rel_perf"]))
        assert all(max(v) == 1.0 for v in by_d.values())
        assert res.best_lambda(2) in cfg.lattice()

    def test_deterministic(self):
        cfg = LandscapeConfig(n=10, lam_min=1, lam_max=3, step=1.4, runs=4, seed=8)
        assert run_landscape(cfg).to_csv() == run_landscape(cfg).to_csv()

    def test_lattice_includes_endpoints(self):
        lattice = LandscapeConfig(n=256).lattice()
        assert lattice[0] == 1 and lattice[-1] <= 64 and lattice[-1] * 1.05 > 64
        assert len(lattice) == 86

    def test_invalid(self):
        with pytest.raises(ValueError):
            LandscapeConfig(n=10, step=1.0)
        with pytest.raises(ValueError):
            LandscapeConfig(n=10, lam_min=0.5)


class TestVerify:
    def test_expr(self):
        assert [eval_size_expr(e, 27) for e in ("n-3", "n-ceil(cbrt(n))", "ceil(sqrt(n))")] == [24, 24, 6]
        assert eval_size_expr("ceil(0.4*n)", 20) == 8
        with pytest.raises(ValueError):
            eval_size_expr("__import__('os')", 5)

    def test_acceptance_grid(self):
        grid = acceptance_grid()
        assert len(grid) == 68
        assert {(p.tau, p.n, p.f) for p in grid} >= {(0, 100, 10), (-1, 50, 20), (-2, 100, 95), (-2, 20, 17)}
        assert all(p.lam == p.ell for p in grid)

    def test_known_point(self):
        res = run_verify([GridPoint(0, 100, 0, 1, 1)], 100_000, seed=3)
        row = res.rows[0]
        assert row.bound == pytest.approx(0.01 * math.exp(-6 / 97))
        assert abs(row.estimate - 100 / 4950) < 5 * math.sqrt(0.0202 / 100_000)
        assert row.passed and res.ok

    def test_skips(self):
        points = [GridPoint(-1, 20, 2, 1, 1), GridPoint(-2, 20, 19, 1, 1), GridPoint(0, 3, 0, 1, 1)]
        res = run_verify(points, 100, seed=0)
        assert len(res.skipped) == 3 and res.ok
        statuses = [r["pass"] for r in rows_of(res.to_csv())]
        assert all(s.startswith("skipped: ") for s in statuses)
        assert res.summary_line() == "verify: 0 passed, 0 failed, 3 skipped"

    def test_header_and_grid(self):
        points = build_grid(0, [20], ["0"], [1, 2], [1, 2], mode="algo")
        assert len(points) == 4 and {p.mode for p in points} == {"algo"}
        res = run_verify(points, 2000, seed=1)
        assert header_of(res.to_csv()) == VERIFY_HEADER


class TestCli:
    def test_sweep_files(self, tmp_path):
        out = tmp_path / "rls.csv"
        code = main(["sweep", "--algo", "rls", "--sizes", "8,10", "--runs", "2", "--seed", "1", "--out", str(out)])
        assert code == 0
        assert header_of(out.read_text()) == RAW_HEADER
        summary = tmp_path / "rls.summary.csv"
        assert header_of(summary.read_text()) == SUMMARY_HEADER
        assert len(rows_of(summary.read_text())) == 2

    def test_sweep_explicit_summary(self, tmp_path):
        code = main(["sweep", "--algo", "ollga", "--policy", "adjust:1.5,1,n", "--sizes", "8", "--runs", "2",
                     "--budget-mult", "10", "--out", str(tmp_path / "a.csv"),
                     "--summary-out", str(tmp_path / "s.csv")])
        assert code == 0 and (tmp_path / "s.csv").exists()

    def test_landscape(self, tmp_path):
        out = tmp_path / "land.csv"
        code = main(["landscape", "--n", "10", "--lambda-min", "1", "--lambda-max", "2", "--step", "1.3",
                     "--runs", "3", "--seed", "2", "--out", str(out)])
        assert code == 0 and header_of(out.read_text()) == LANDSCAPE_HEADER

    def test_verify_pass(self, tmp_path, capsys):
        out = tmp_path / "v.csv"
        code = main(["verify", "--tau", "-2", "--n", "20", "--f", "n-3", "--lambda", "1,2", "--ell", "1,2",
                     "--trials", "20000", "--mode", "proof", "--seed", "0", "--out", str(out)])
        assert code == 0
        assert len(rows_of(out.read_text())) == 4
        assert "0 failed" in capsys.readouterr().err

    def test_verify_failure_exit(self, tmp_path):
        # a single trial cannot see an event of probability 0.0094, so the row fails
        code = main(["verify", "--tau", "0", "--n", "100", "--f", "0", "--lambda", "1", "--ell", "1",
                     "--trials", "1", "--seed", "0", "--out", str(tmp_path / "v.csv")])
        assert code == 1
        assert rows_of((tmp_path / "v.csv").read_text())[0]["pass"] == "false"

    def test_invalid_config_exit(self, tmp_path, capsys):
        assert main(["sweep", "--algo", "ollga", "--policy", "bogus", "--sizes", "8", "--runs", "1",
                     "--out", str(tmp_path / "x.csv")]) == 2
        assert "bad policy" in capsys.readouterr().err
        assert main(["landscape", "--n", "10", "--step", "0.9", "--out", str(tmp_path / "y.csv")]) == 2
        with pytest.raises(SystemExit) as exc:
            main(["verify", "--tau", "1", "--n", "20", "--f", "0", "--lambda", "1", "--ell", "1"])
        assert exc.value.code == 2
