import json

import numpy as np
import pandas as pd
import pytest

from spikedpca.arrowhead import ArrowheadMatrix
from spikedpca.errors import InvalidParameter, IoFailure
from spikedpca.export import (
    export,
    read_arrowhead,
    read_csv,
    read_realization,
    write_arrowhead,
    write_csv,
    write_json,
    write_payload,
    write_realization,
    write_svg,
)
from spikedpca.harness import RECORD_FIELDS, SweepRecord, SweepSpec, sweep_sigma


@pytest.fixture
def spec(model):
    return SweepSpec(model, n=50, sigma_grid=(0.1, 0.7, 1.9), trials=2, seed=13)


@pytest.fixture
def records(spec):
    return sweep_sigma(spec)


def make_record(**changes):
    values = dict(
        grid_index=0,
        grid_value=0.1,
        trial=0,
        lambda1=1.0 / 3.0,
        lambda2=0.1,
        overlap=0.9,
        sin_theta=0.4358898943540674,
        crossover_flag=False,
        signal_rank=0,
    )
    values.update(changes)
    return SweepRecord(**values)


class TestCsv:
    def test_empty_input(self, tmp_path):
        with pytest.raises(IoFailure):
            write_csv([], tmp_path / "sweep.csv")
        assert not (tmp_path / "sweep.csv").exists()

    def test_single_record(self, tmp_path):
        path = write_csv([make_record()], tmp_path / "one.csv")
        lines = path.read_text().splitlines()
        assert len(lines) == 2
        assert lines[0] == ",".join(RECORD_FIELDS)

    def test_reparse_is_exact(self, records, tmp_path):
        path = write_csv(records, tmp_path / "sweep.csv")
        assert read_csv(path) == records

    def test_missing_overlays_round_trip(self, tmp_path):
        record = make_record(lambda_lower=None, predicted_lambda=2.5)
        (parsed,) = read_csv(write_csv([record], tmp_path / "r.csv"))
        assert parsed.lambda_lower is None
        assert parsed.predicted_lambda == 2.5
        assert parsed.lambda1 == record.lambda1

    def test_repeat_is_byte_identical(self, spec, tmp_path):
        first = write_csv(sweep_sigma(spec), tmp_path / "a.csv").read_bytes()
        second = write_csv(sweep_sigma(spec), tmp_path / "b.csv").read_bytes()
        assert first == second

    def test_creates_directories(self, tmp_path):
        path = write_csv([make_record()], tmp_path / "deep" / "dir" / "r.csv")
        assert path.exists()

    def test_read_missing_columns(self, tmp_path):
        path = tmp_path / "bad.csv"
        pd.DataFrame({"grid_index": [0]}).to_csv(path, index=False)
        with pytest.raises(IoFailure):
            read_csv(path)


class TestJson:
    def test_records_and_sweep(self, records, spec, tmp_path):
        data = json.loads(write_json(records, tmp_path / "s.json", spec=spec).read_text())
        assert data["sweep"]["seed"] == 13
        assert data["sweep"]["sigma_grid"] == [0.1, 0.7, 1.9]
        assert len(data["records"]) == len(records)
        assert data["records"][0]["lambda1"] == records[0].lambda1

    def test_non_finite_values(self, tmp_path):
        path = write_payload({"a": float("inf"), "b": float("nan"), "c": [np.float64(1.5)]}, tmp_path / "p.json")
        assert json.loads(path.read_text()) == {"a": "inf", "b": None, "c": [1.5]}


class TestSvg:
    def test_written(self, records, tmp_path):
        path = write_svg(records, tmp_path / "chart.svg")
        text = path.read_text()
        assert text.lstrip().startswith("<?xml")
        assert "<svg" in text

    def test_repeat_is_byte_identical(self, records, tmp_path):
        first = write_svg(records, tmp_path / "a.svg").read_bytes()
        second = write_svg(records, tmp_path / "b.svg").read_bytes()
        assert first == second


class TestExport:
    def test_all_formats(self, records, spec, tmp_path):
        paths = export(records, ("csv", "json", "svg"), tmp_path, stem="run", spec=spec)
        assert [p.name for p in paths] == ["run.csv", "run.json", "run.svg"]
        assert all(p.exists() for p in paths)

    def test_unknown_format(self, records, tmp_path):
        with pytest.raises(InvalidParameter):
            export(records, ("xlsx",), tmp_path)

    def test_empty(self, tmp_path):
        with pytest.raises(IoFailure):
            export([], ("csv",), tmp_path)


def test_realization_round_trip(realization, tmp_path):
    path = write_realization(realization, tmp_path / "real.csv")
    assert path.with_suffix(".json").exists()
    loaded = read_realization(path)
    assert loaded.model == realization.model
    assert loaded.seed == realization.seed
    assert loaded.stream_key == realization.stream_key
    np.testing.assert_array_equal(loaded.samples, realization.samples)
    np.testing.assert_array_equal(loaded.latents_u, realization.latents_u)


def test_read_realization_missing(tmp_path):
    with pytest.raises(IoFailure):
        read_realization(tmp_path / "none.csv")


class TestArrowheadFiles:
    def test_round_trip(self, tmp_path):
        a = ArrowheadMatrix(2.0, [0.5, -0.25], [1.0, 0.5])
        b = read_arrowhead(write_arrowhead(a, tmp_path / "a.json"))
        np.testing.assert_array_equal(a.dense(), b.dense())

    def test_missing_key(self, tmp_path):
        path = tmp_path / "a.json"
        path.write_text('{"head": 1.0, "shaft": [1.0]}')
        with pytest.raises(InvalidParameter):
            read_arrowhead(path)

    def test_unreadable(self, tmp_path):
        with pytest.raises(IoFailure):
            read_arrowhead(tmp_path / "missing.json")
