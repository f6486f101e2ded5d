import json

import pandas as pd
import pytest

from cli import build_parser, main
from cli.commands import parse_floats, parse_grid
from cli.main import EXIT_FAILURE, EXIT_OK, EXIT_PRECONDITION
from cli.parser import (
    COMMAND_GROUPS,
    _expand_abbreviations,
    _subcommand_help,
    load_config,
    print_overview,
)
from spikedpca.asymptotics import phase_prediction
from spikedpca.errors import InvalidParameter, IoFailure, RootNotFound


class TestParseGrid:
    def test_list(self):
        assert parse_grid("0.1,0.2, 0.5") == [0.1, 0.2, 0.5]

    def test_range(self):
        assert parse_grid("0:3:4") == [0.0, 1.0, 2.0, 3.0]

    def test_integer(self):
        assert parse_grid("10:20:3", integer=True) == [10, 15, 20]

    def test_sequence(self):
        assert parse_grid([1, 2]) == [1.0, 2.0]

    @pytest.mark.parametrize("value", ["a,b", "0:1", None])
    def test_rejects(self, value):
        with pytest.raises(InvalidParameter):
            parse_grid(value)

    def test_floats(self):
        assert parse_floats("3,1,1") == [3.0, 1.0, 1.0]
        with pytest.raises(InvalidParameter):
            parse_floats("3,x")


class TestAbbreviations:
    @pytest.mark.parametrize(
        "argv, expected",
        [
            (["sweep-s", "--p", "5"], ["sweep-sigma", "--p", "5"]),
            (["ph"], ["phase"]),
            (["--log-level", "DEBUG", "cov"], ["--log-level", "DEBUG", "coverage"]),
            (["sweep"], ["sweep"]),
            ([], []),
        ],
    )
    def test_expand(self, argv, expected):
        assert _expand_abbreviations(argv, build_parser()) == expected


class TestConfig:
    def test_yaml_keys_normalized(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("signal-norm: 1.5\ntrials: 3\n")
        assert load_config(str(path)) == {"signal_norm": 1.5, "trials": 3}

    def test_json(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text('{"p": 30}')
        assert load_config(str(path)) == {"p": 30}

    def test_missing(self, tmp_path):
        with pytest.raises(IoFailure):
            load_config(str(tmp_path / "absent.yaml"))

    def test_not_a_mapping(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(InvalidParameter):
            load_config(str(path))


class TestMain:
    def test_no_command(self, capsys):
        assert main([]) == EXIT_PRECONDITION

    def test_command_groups_cover_every_subcommand(self):
        grouped = [name for names in COMMAND_GROUPS.values() for name in names]
        summaries = _subcommand_help(build_parser())
        assert sorted(grouped) == sorted(summaries)
        assert all(summaries.values())

    def test_overview_without_rich(self, capsys, monkeypatch):
        monkeypatch.setattr("cli.parser.HAS_RICH", False)
        print_overview(build_parser())
        out = capsys.readouterr().out
        assert out.startswith("usage: spca")
        assert "noise-norm" in out

    def test_phase(self, capsys, tmp_path):
        code = main(
            ["phase", "--signal-norm", "1.4142135623730951", "--sigma", "1", "--c", "1", "--out", str(tmp_path)]
        )
        assert code == EXIT_OK
        assert "4.5" in capsys.readouterr().out
        data = json.loads((tmp_path / "phase.json").read_text())
        assert data["lambda_limit"] == pytest.approx(4.5)
        assert data["overlap_sq"] == pytest.approx(0.5)

    def test_abbreviated_command(self, capsys):
        assert main(["ph", "--c", "1"]) == EXIT_OK

    def test_sweep_sigma_writes_files(self, capsys, tmp_path):
        code = main(
            [
                "sweep-sigma",
                "--p", "30",
                "--n", "20",
                "--grid", "0.1,0.5,1.0",
                "--trials", "2",
                "--format", "csv,json",
                "--out", str(tmp_path),
            ]
        )
        assert code == EXIT_OK
        frame = pd.read_csv(tmp_path / "sweep_sigma.csv")
        assert len(frame) == 6
        assert (tmp_path / "sweep_sigma.json").exists()
        assert "crossover" in capsys.readouterr().out.lower()

    def test_sweep_n(self, capsys, tmp_path):
        code = main(
            ["sweep-n", "--p", "30", "--grid", "5,40", "--sigma", "1", "--out", str(tmp_path)]
        )
        assert code == EXIT_OK
        assert len(pd.read_csv(tmp_path / "sweep_n.csv")) == 2

    def test_config_file_sets_defaults(self, capsys, tmp_path):
        config = tmp_path / "sweep.yaml"
        config.write_text("p: 30\nn: 20\ngrid: [0.1, 0.2]\ntrials: 3\n")
        code = main(
            ["--config", str(config), "sweep-sigma", "--trials", "1", "--out", str(tmp_path)]
        )
        assert code == EXIT_OK
        frame = pd.read_csv(tmp_path / "sweep_sigma.csv")
        assert len(frame) == 2
        assert list(frame["grid_value"]) == [0.1, 0.2]

    def test_unknown_config_key(self, capsys, tmp_path):
        config = tmp_path / "bad.yaml"
        config.write_text("colour: blue\n")
        assert main(["--config", str(config), "phase"]) == EXIT_PRECONDITION
        assert "colour" in capsys.readouterr().err

    def test_bounds(self, capsys, tmp_path):
        assert main(["bounds", "--out", str(tmp_path)]) == EXIT_OK
        data = json.loads((tmp_path / "bounds.json").read_text())
        assert data["condition_holds"]
        assert data["lambda_lower"] < 2.8**2 < data["lambda_upper"]
        assert data["config"]["p"] == 200

    def test_coverage_condition_violated(self, capsys):
        code = main(["coverage", "--sigma", "3", "--trials", "5"])
        assert code == EXIT_PRECONDITION
        assert "Error" in capsys.readouterr().err

    def test_coverage(self, capsys):
        assert main(["coverage", "--trials", "5"]) == EXIT_OK

    def test_bad_seed(self, capsys):
        code = main(["sweep-sigma", "--seed", "-3", "--grid", "0.1", "--p", "10"])
        assert code == EXIT_PRECONDITION

    def test_missing_arrowhead_file(self, capsys, tmp_path):
        code = main(["arrowhead-solve", "--input", str(tmp_path / "none.json")])
        assert code == EXIT_FAILURE

    def test_random_arrowhead(self, capsys):
        assert main(["arrowhead-solve", "--size", "6", "--show", "3"]) == EXIT_OK

    def test_wishart(self, capsys, tmp_path):
        code = main(["wishart-bound", "--alpha", "1", "--out", str(tmp_path)])
        assert code == EXIT_OK
        data = json.loads((tmp_path / "wishart.json").read_text())
        assert data["norm bound"] == pytest.approx(13.0)
        assert data["centered bound"] == pytest.approx(16.0)

    def test_wishart_regime(self, capsys):
        assert main(["wishart-bound", "--p", "10", "--n", "50"]) == EXIT_PRECONDITION

    def test_lawley(self, capsys, tmp_path):
        assert main(["lawley", "--out", str(tmp_path)]) == EXIT_OK
        rows = json.loads((tmp_path / "lawley.json").read_text())
        assert [row["k"] for row in rows] == [1, 2, 3, 4, 5]
        assert rows[0]["expected"] == pytest.approx(3.003)
        assert rows[1]["expected"] is None

    def test_noise_norm(self, capsys, tmp_path):
        code = main(["noise-norm", "--c", "4", "--out", str(tmp_path)])
        assert code == EXIT_OK
        data = json.loads((tmp_path / "noise_norm.json").read_text())
        assert data["limit_norm"] == pytest.approx(9.0, abs=1e-8)

    def test_moments(self, capsys):
        code = main(["moments", "--sigmas", "0.01,0.02", "--trials", "5", "--p", "20", "--n", "30"])
        assert code == EXIT_OK

    def test_log_file(self, capsys, tmp_path):
        log = tmp_path / "logs" / "run.log"
        assert main(["--log-file", str(log), "phase"]) == EXIT_OK
        assert log.exists()

    def test_numerical_failure(self, capsys, mocker):
        mocker.patch(
            "cli.commands.noise_norm_limit", side_effect=RootNotFound("no sign change")
        )
        assert main(["noise-norm", "--c", "4"]) == EXIT_FAILURE
        assert "no sign change" in capsys.readouterr().err

    def test_command_receives_parsed_options(self, capsys, mocker):
        spy = mocker.patch("cli.commands.phase_prediction", wraps=phase_prediction)
        assert main(["phase", "--signal-norm", "2", "--sigma", "1", "--c", "0.5"]) == EXIT_OK
        spy.assert_called_once_with(2.0, 1.0, 0.5)
