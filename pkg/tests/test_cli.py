import math

import pytest

from cascore.cli import main


@pytest.fixture()
def chain_csv(tmp_path):
    path = tmp_path / "events.csv"
    path.write_text(
        "cascade_id,participant_id,timestamp\n"
        "c1,A,1\nc1,B,2\nc1,C,3\n"
        "c2,A,5\nc2,C,6\n"
    )
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestScore:
    def test_golden_output(self, capsys, chain_csv):
        code, out, _ = run(capsys, "score", chain_csv)
        assert code == 0
        assert out.splitlines() == [
            "participant_id,total_score,cascade_count",
            f"A,{math.log(2):.6f},2",
            "B,0.000000,1",
            "C,0.000000,2",
        ]

    def test_byte_identical_reruns(self, capsys, chain_csv, tmp_path):
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        assert main(["score", chain_csv, "--output", str(first)]) == 0
        assert main(["score", chain_csv, "--output", str(second)]) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_empty_input_exits_zero(self, capsys, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("cascade_id,participant_id,timestamp\n")
        code, out, _ = run(capsys, "score", str(path))
        assert code == 0
        assert out.splitlines() == ["participant_id,total_score,cascade_count"]

    def test_lenient_default_reports_skips(self, capsys, tmp_path):
        path = tmp_path / "dirty.csv"
        path.write_text("cascade_id,participant_id,timestamp\nc,u,bad\nc,u,1\n")
        code, out, err = run(capsys, "score", str(path))
        assert code == 0
        assert "skipped 1 malformed line" in err

    def test_strict_mode_is_a_data_error(self, capsys, tmp_path):
        path = tmp_path / "dirty.csv"
        path.write_text("cascade_id,participant_id,timestamp\nc,u,bad\n")
        code, _, err = run(capsys, "score", str(path), "--strict")
        assert code == 2
        assert "line 2" in err

    def test_missing_file_is_io_error(self, capsys, tmp_path):
        code, _, err = run(capsys, "score", str(tmp_path / "nope.csv"))
        assert code == 3
        assert "nope.csv" in err

    def test_min_size_filter(self, capsys, chain_csv):
        code, out, _ = run(capsys, "score", chain_csv, "--min-size", "3")
        assert code == 0
        rows = out.splitlines()[1:]
        assert [r.split(",")[2] for r in rows] == ["1", "1", "1"]

    def test_decompose_store_writes_terms(self, capsys, chain_csv, tmp_path):
        terms_path = tmp_path / "terms.csv"
        code, _, _ = run(capsys, "score", chain_csv, "--decompose-store", str(terms_path))
        assert code == 0
        lines = terms_path.read_text().splitlines()
        assert lines[0] == (
            "participant_id,cascade_id,downstream_count,viewed,inverse_percentile,value"
        )
        assert len(lines) == 6  # five entries across the two cascades

    def test_env_var_alpha_and_flag_precedence(self, capsys, tmp_path, monkeypatch):
        path = tmp_path / "events.csv"
        path.write_text(
            "cascade_id,participant_id,timestamp\nc,A,1\nc,B,2\nc,C,3\nc,D,4\n"
        )
        _, default_out, _ = run(capsys, "score", str(path))
        monkeypatch.setenv("CASCORE_ALPHA", "2.0")
        _, env_out, _ = run(capsys, "score", str(path))
        assert env_out != default_out
        _, flag_out, _ = run(capsys, "score", str(path), "--alpha", "0.5")
        assert flag_out == default_out

    def test_viewed_column_flag(self, capsys, tmp_path):
        path = tmp_path / "events.csv"
        path.write_text(
            "cascade_id,participant_id,timestamp,viewed\nc,A,1,0\nc,B,2,1\nc,C,3,1\n"
        )
        _, ignored, _ = run(capsys, "score", str(path), "--viewed-col", "3")
        assert ignored.splitlines()[1] == f"A,{math.log(2):.6f},1"
        _, filtered, _ = run(
            capsys, "score", str(path), "--viewed-col", "3", "--use-view-column"
        )
        assert filtered.splitlines()[1].startswith("A,0.000000")


class TestDecompose:
    def test_top_terms(self, capsys, chain_csv):
        code, out, _ = run(
            capsys, "decompose", chain_csv, "--participant", "A", "--top-n", "1"
        )
        assert code == 0
        lines = out.splitlines()
        assert len(lines) == 2
        assert lines[1].startswith(f"A,c1,2,1,1.000000,{math.log(2):.6f}")

    def test_unknown_participant(self, capsys, chain_csv):
        code, _, err = run(capsys, "decompose", chain_csv, "--participant", "nobody")
        assert code == 2
        assert "nobody" in err

    def test_zero_top_n_is_usage_error(self, capsys, chain_csv):
        code, _, _ = run(
            capsys, "decompose", chain_csv, "--participant", "A", "--top-n", "0"
        )
        assert code == 1


@pytest.fixture()
def interval_csv(tmp_path):
    # Twenty intervals, one identical 3-participant cascade in each.
    lines = ["cascade_id,participant_id,timestamp"]
    for i in range(20):
        for j, pid in enumerate(["A", "B", "C"]):
            lines.append(f"c{i},{pid},{i + 0.1 * (j + 1)}")
    path = tmp_path / "intervals.csv"
    path.write_text("\n".join(lines) + "\n")
    return str(path)


class TestRolling:
    def test_default_shape_and_range(self, capsys, interval_csv):
        code, out, _ = run(capsys, "rolling", interval_csv)
        assert code == 0
        lines = out.splitlines()
        assert len(lines) == 18  # header plus 17 consecutive-window overlaps
        assert lines[0] == "window_end_interval,overlap_fraction"
        for line in lines[1:]:
            _, fraction = line.split(",")
            assert 0.0 <= float(fraction) <= 1.0

    def test_identical_intervals_overlap_one(self, capsys, interval_csv):
        _, out, _ = run(capsys, "rolling", interval_csv)
        fractions = {line.split(",")[1] for line in out.splitlines()[1:]}
        assert fractions == {"1.000000"}

    def test_window_larger_than_intervals_is_usage_error(self, capsys, interval_csv):
        code, _, _ = run(capsys, "rolling", interval_csv, "--intervals", "4", "--window", "9")
        assert code == 1

    def test_empty_input_is_data_error(self, capsys, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("cascade_id,participant_id,timestamp\n")
        code, _, _ = run(capsys, "rolling", str(path))
        assert code == 2

    def test_figure_written(self, capsys, interval_csv, tmp_path):
        figure = tmp_path / "consistency.png"
        code, _, _ = run(capsys, "rolling", interval_csv, "--figure", str(figure))
        assert code == 0
        assert figure.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


class TestNetwork:
    def test_successor_chain(self, capsys, tmp_path):
        path = tmp_path / "events.csv"
        path.write_text("cascade_id,participant_id,timestamp\nc,A,1\nc,B,2\nc,C,3\n")
        code, out, _ = run(capsys, "network", str(path), "--mode", "successor")
        assert code == 0
        assert out.splitlines() == [
            "source,target,weight,support",
            f"A,B,{math.log(2):.6f},1",
            "B,C,0.000000,1",
        ]

    def test_cluster_tsv_input(self, capsys, tmp_path):
        path = tmp_path / "clusters.tsv"
        path.write_text("cl1\t100\tsite-a\ncl1\t200\tsite-b\n")
        code, out, _ = run(
            capsys, "network", str(path), "--format", "cluster-tsv", "--mode", "downstream"
        )
        assert code == 0
        assert out.splitlines()[1] == "site-a,site-b,0.000000,1"


class TestGenerate:
    def test_deterministic_files(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = [
            "generate", "--cascades", "20", "--pool", "50",
            "--size-dist", "powerlaw:2.0,50", "--seed", "1",
        ]
        assert main(args + ["--output", str(a)]) == 0
        assert main(args + ["--output", str(b)]) == 0
        capsys.readouterr()
        assert a.read_bytes() == b.read_bytes()

    def test_generated_file_scores(self, capsys, tmp_path):
        out_csv = tmp_path / "events.csv"
        main([
            "generate", "--cascades", "10", "--pool", "30",
            "--size-dist", "uniform:2,6", "--seed", "3", "--output", str(out_csv),
        ])
        capsys.readouterr()
        code, out, _ = run(capsys, "score", str(out_csv))
        assert code == 0
        assert len(out.splitlines()) > 1

    def test_requires_a_stopping_rule(self, capsys):
        code, _, _ = run(capsys, "generate", "--pool", "10")
        assert code == 1

    def test_bad_size_dist_is_usage_error(self, capsys):
        code, _, _ = run(
            capsys, "generate", "--cascades", "5", "--size-dist", "zipf:9"
        )
        assert code == 1


class TestBench:
    def test_small_run(self, capsys, tmp_path):
        out_csv = tmp_path / "bench.csv"
        code = main([
            "bench", "--events", "500", "--pool", "100",
            "--size-dist", "uniform:2,8", "--repetitions", "3",
            "--output", str(out_csv),
        ])
        err = capsys.readouterr().err
        assert code == 0
        header, row = out_csv.read_text().splitlines()
        assert header.startswith("events,cascades")
        assert int(row.split(",")[0]) >= 500
        assert "total:" in err

    def test_default_seven_repetitions_at_64k(self, capsys, tmp_path):
        out_csv = tmp_path / "bench.csv"
        code = main(["bench", "--events", "64000", "--output", str(out_csv)])
        capsys.readouterr()
        assert code == 0
        header, row = out_csv.read_text().splitlines()
        columns = dict(zip(header.split(","), row.split(",")))
        assert columns["repetitions"] == "7"
        assert int(columns["events"]) >= 64_000


def test_usage_error_without_subcommand(capsys):
    assert main([]) == 1
    capsys.readouterr()
