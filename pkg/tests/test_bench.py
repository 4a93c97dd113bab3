"""Load harness against a live service subprocess."""

import json

import pytest

from server_util import ServerProcess
from vaxledger import bench
from vaxledger.bench import LoadProfile, MetricsReport, RunMetrics, TargetUnreachable


@pytest.fixture(scope="module")
def server(tmp_path_factory):
    root = tmp_path_factory.mktemp("bench-server")
    with ServerProcess(root, difficulty=6, max_pending=8) as process:
        yield process


class TestHarness:
    def test_single_user_unloaded_has_zero_failures(self, server):
        report = bench.run_load(LoadProfile(base_url=server.url, n_users=1, iterations=1))
        run = report.runs[0]
        assert run.failure_pct == 0.0
        assert run.submitted == run.committed == 1
        assert run.response_ms_mean > 0 and run.latency_ms_mean > 0
        assert run.latency_ms_mean <= run.response_ms_mean + 1e-6

    def test_total_transactions_exceeding_users(self, server):
        profile = LoadProfile(
            base_url=server.url, n_users=3, iterations=1, total_transactions=10
        )
        report = bench.run_load(profile)
        run = report.runs[0]
        assert run.submitted == 10
        assert run.submitted == run.committed + run.failed

    def test_accounting_submitted_equals_committed_plus_failed(self, server):
        report = bench.run_sweep(server.url, levels=[3, 5], iterations=2)
        for run in report.runs:
            assert run.submitted == run.n_users
            assert run.submitted == run.committed + run.failed

    def test_below_capacity_has_zero_failures(self, server):
        # capacity is 8: four concurrent users can never queue past it
        report = bench.run_load(LoadProfile(base_url=server.url, n_users=4, iterations=3))
        assert all(run.failure_pct == 0.0 for run in report.runs)

    def test_throughput_within_5pct_of_recomputation(self, server):
        report = bench.run_load(LoadProfile(base_url=server.url, n_users=5, iterations=2))
        for run in report.runs:
            recomputed = run.committed / run.wall_s
            assert abs(run.throughput_tps - recomputed) <= 0.05 * recomputed

    def test_unreachable_target_raises(self):
        with pytest.raises(TargetUnreachable):
            bench.run_load(LoadProfile(base_url="http://127.0.0.1:9", n_users=1))

    def test_profile_validation(self):
        with pytest.raises(ValueError):
            LoadProfile(base_url="http://x", n_users=0)
        with pytest.raises(ValueError):
            LoadProfile(base_url="http://x", n_users=1, op_mix=(("signup", 0.5),))
        with pytest.raises(ValueError):
            LoadProfile(base_url="http://x", n_users=1, total_transactions=0)


class TestExport:
    def sample_report(self) -> MetricsReport:
        report = MetricsReport()
        for n_users in (2, 4):
            for iteration in (1, 2, 3):
                report.runs.append(
                    RunMetrics(
                        n_users=n_users,
                        iteration=iteration,
                        submitted=n_users,
                        committed=n_users - 1,
                        failed=1,
                        wall_s=0.5,
                        response_ms_mean=10.5 * iteration,
                        response_ms_p50=9.0,
                        response_ms_p90=20.0,
                        response_ms_p99=30.0,
                        latency_ms_mean=5.25 * iteration,
                        throughput_tps=(n_users - 1) / 0.5,
                        failure_pct=100.0 / n_users,
                    )
                )
        return report

    def test_one_row_per_level_per_iteration(self, tmp_path):
        report = self.sample_report()
        path = bench.export_report(report, "csv", tmp_path / "r.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "n_users,response_ms_mean,latency_ms_mean,throughput_tps,failure_pct"
        assert len(lines) == 1 + 2 * 3

    def test_csv_and_json_carry_identical_numbers(self, tmp_path):
        report = self.sample_report()
        csv_path = bench.export_report(report, "csv", tmp_path / "r.csv")
        json_path = bench.export_report(report, "json", tmp_path / "r.json")
        json_rows = json.loads(json_path.read_text())["rows"]
        csv_lines = csv_path.read_text().splitlines()[1:]
        assert len(csv_lines) == len(json_rows)
        for line, row in zip(csv_lines, json_rows):
            n_users, response, latency, tput, fail = line.split(",")
            assert int(n_users) == row["n_users"]
            assert float(response) == row["response_ms_mean"]
            assert float(latency) == row["latency_ms_mean"]
            assert float(tput) == row["throughput_tps"]
            assert float(fail) == row["failure_pct"]

    def test_reexport_is_byte_identical(self, tmp_path):
        report = self.sample_report()
        first = bench.export_report(report, "csv", tmp_path / "a.csv").read_bytes()
        second = bench.export_report(report, "csv", tmp_path / "b.csv").read_bytes()
        assert first == second
        jfirst = bench.export_report(report, "json", tmp_path / "a.json").read_bytes()
        jsecond = bench.export_report(report, "json", tmp_path / "b.json").read_bytes()
        assert jfirst == jsecond

    def test_aggregate_means_across_iterations(self):
        report = self.sample_report()
        agg = report.aggregate(2)
        assert agg["iterations"] == 3
        assert agg["response_ms_mean"] == pytest.approx(10.5 * 2)  # mean of 10.5,21,31.5
        with pytest.raises(ValueError):
            report.aggregate(99)
