"""Writers for sweep records and realizations.

CSV files carry the fixed header ``RECORD_FIELDS`` with floats printed to
17 significant digits, so re-parsing a file reproduces every value. JSON
files mirror the record fields. SVG charts are rendered through
matplotlib's SVG backend with a fixed hash salt and no date, so
identical inputs give identical bytes.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict
from logging import Logger
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from spikedpca.arrowhead import ArrowheadMatrix  # noqa: E402
from spikedpca.errors import InvalidParameter, IoFailure  # noqa: E402
from spikedpca.harness import RECORD_FIELDS, SweepRecord, SweepSpec, summarize  # noqa: E402
from spikedpca.log import get_logger  # noqa: E402
from spikedpca.model import LatentLaw, SampleRealization, SpikedModel  # noqa: E402

LOGGER = get_logger(__name__)

PathLike = Union[str, Path]
FLOAT_FORMAT = "%.17g"
SVG_SALT = "spikedpca"


def _require_records(records: Sequence[SweepRecord]) -> List[SweepRecord]:
    records = list(records)
    if not records:
        raise IoFailure("no records to export")
    return records


def _prepare(path: PathLike) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create {path.parent}: {exc}") from exc
    return path


def records_frame(records: Sequence[SweepRecord]) -> pd.DataFrame:
    """Records as a DataFrame with columns in ``RECORD_FIELDS`` order."""
    return pd.DataFrame([asdict(r) for r in records], columns=list(RECORD_FIELDS))


def write_csv(records: Sequence[SweepRecord], path: PathLike, logger: Logger = LOGGER) -> Path:
    """Write records as CSV with the fixed header ``RECORD_FIELDS``.

    Missing overlays are written as empty fields.

    Raises:
        IoFailure: when there are no records or the file cannot be written.
    """
    records = _require_records(records)
    path = _prepare(path)
    try:
        records_frame(records).to_csv(
            path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
        )
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    logger.info("wrote %d records to %s", len(records), path)
    return path


def read_csv(path: PathLike) -> List[SweepRecord]:
    """Parse a file written by ``write_csv`` back into records."""
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError) as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    missing = set(RECORD_FIELDS) - set(frame.columns)
    if missing:
        raise IoFailure(f"{path} lacks columns {sorted(missing)}")
    records = []
    for row in frame.to_dict(orient="records"):
        values = {}
        for name in RECORD_FIELDS:
            value = row[name]
            if isinstance(value, float) and math.isnan(value):
                value = None
            values[name] = value
        values["grid_index"] = int(values["grid_index"])
        values["trial"] = int(values["trial"])
        values["signal_rank"] = int(values["signal_rank"])
        values["crossover_flag"] = bool(values["crossover_flag"])
        records.append(SweepRecord(**values))
    return records


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def _clean(data):
    if isinstance(data, dict):
        return {key: _clean(value) for key, value in data.items()}
    if isinstance(data, (list, tuple)):
        return [_clean(value) for value in data]
    return _json_value(data)


def write_json(
    records: Sequence[SweepRecord],
    path: PathLike,
    spec: Optional[SweepSpec] = None,
    logger: Logger = LOGGER,
) -> Path:
    """Write records, and optionally the sweep that produced them, as JSON."""
    records = _require_records(records)
    path = _prepare(path)
    payload = {"records": [asdict(r) for r in records]}
    if spec is not None:
        payload = {"sweep": spec_to_dict(spec), **payload}
    return write_payload(payload, path, logger=logger)


def write_payload(payload, path: PathLike, logger: Logger = LOGGER) -> Path:
    """Write any JSON-compatible report, mapping non-finite floats to strings or null."""
    path = _prepare(path)
    try:
        path.write_text(json.dumps(_clean(payload), indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    logger.info("wrote %s", path)
    return path


def spec_to_dict(spec: SweepSpec) -> dict:
    return {
        "model": spec.model.to_dict(),
        "n": spec.n,
        "sigma_grid": list(spec.sigma_grid) if spec.sigma_grid is not None else None,
        "n_grid": list(spec.n_grid) if spec.n_grid is not None else None,
        "trials": spec.trials,
        "seed": spec.seed,
    }


def write_svg(
    records: Sequence[SweepRecord],
    path: PathLike,
    xlabel: str = "grid value",
    logger: Logger = LOGGER,
) -> Path:
    """Line charts of mean overlap and of the two top eigenvalues over the grid.

    Theoretical overlays are drawn dashed where they exist.
    """
    records = _require_records(records)
    path = _prepare(path)
    summary = summarize(records)
    x = summary["grid_value"].to_numpy(dtype=float)

    with plt.rc_context({"svg.hashsalt": SVG_SALT, "svg.fonttype": "none"}):
        fig, (ax_r, ax_l) = plt.subplots(1, 2, figsize=(10, 4))
        ax_r.plot(x, summary["mean_overlap"], marker="o", label="mean R")
        predicted = summary["predicted_overlap_sq"].to_numpy(dtype=float)
        if np.isfinite(predicted).any():
            ax_r.plot(x, np.sqrt(predicted), linestyle="--", label="limit R")
        ax_r.set_xlabel(xlabel)
        ax_r.set_ylabel("overlap R")
        ax_r.set_ylim(0.0, 1.05)
        ax_r.legend()

        ax_l.plot(x, summary["mean_lambda1"], marker="o", label="lambda 1")
        ax_l.plot(x, summary["mean_lambda2"], marker="s", label="lambda 2")
        for column, label in (
            ("predicted_lambda", "limit"),
            ("mean_lambda_lower", "lower bound"),
            ("mean_lambda_upper", "upper bound"),
        ):
            values = summary[column].to_numpy(dtype=float)
            if np.isfinite(values).any():
                ax_l.plot(x, values, linestyle="--", label=label)
        ax_l.set_xlabel(xlabel)
        ax_l.set_ylabel("eigenvalue")
        ax_l.legend()

        fig.tight_layout()
        try:
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as exc:
            raise IoFailure(f"cannot write {path}: {exc}") from exc
        finally:
            plt.close(fig)
    logger.info("wrote chart %s", path)
    return path


def export(
    records: Sequence[SweepRecord],
    formats: Iterable[str],
    out_dir: PathLike,
    stem: str = "sweep",
    spec: Optional[SweepSpec] = None,
    logger: Logger = LOGGER,
) -> List[Path]:
    """Write records in every requested format under ``out_dir``.

    Returns:
        The written paths, in the order of ``formats``.

    Raises:
        IoFailure: when there are no records or a file cannot be written.
        InvalidParameter: for an unknown format.
    """
    records = _require_records(records)
    out_dir = Path(out_dir)
    xlabel = "n" if spec is not None and spec.n_grid is not None else "sigma"
    written = []
    for fmt in formats:
        target = out_dir / f"{stem}.{fmt}"
        if fmt == "csv":
            written.append(write_csv(records, target, logger=logger))
        elif fmt == "json":
            written.append(write_json(records, target, spec=spec, logger=logger))
        elif fmt == "svg":
            written.append(write_svg(records, target, xlabel=xlabel, logger=logger))
        else:
            raise InvalidParameter(f"unknown output format {fmt!r}")
    return written


# Realizations and arrowhead matrices


def write_realization(real: SampleRealization, path: PathLike, logger: Logger = LOGGER) -> Path:
    """Store samples as CSV next to a JSON sidecar holding the model, seed and latents."""
    path = _prepare(path)
    columns = [f"x{j}" for j in range(real.dimension)]
    sidecar = path.with_suffix(".json")
    try:
        pd.DataFrame(real.samples, columns=columns).to_csv(
            path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
        )
        sidecar.write_text(
            json.dumps(
                {
                    "model": real.model.to_dict(),
                    "seed": real.seed,
                    "stream_key": list(real.stream_key),
                    "latents_u": real.latents_u.tolist(),
                    "latents_xi": real.latents_xi.tolist(),
                },
            )
            + "\n",
            encoding="utf-8",
        )
    except OSError as exc:
        raise IoFailure(f"cannot write realization {path}: {exc}") from exc
    logger.info("wrote realization n=%d p=%d to %s", real.n, real.dimension, path)
    return path


def read_realization(path: PathLike) -> SampleRealization:
    """Load a realization written by ``write_realization``."""
    path = Path(path)
    try:
        samples = pd.read_csv(path).to_numpy(dtype=float)
        meta = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
    except (OSError, ValueError, pd.errors.ParserError) as exc:
        raise IoFailure(f"cannot read realization {path}: {exc}") from exc
    try:
        model_data = meta["model"]
        model = SpikedModel(
            signal_norm=model_data["signal_norm"],
            noise_level=model_data["noise_level"],
            dimension=model_data["dimension"],
            latent_law=LatentLaw(model_data["latent_law"]),
        )
        return SampleRealization(
            model=model,
            samples=samples,
            latents_u=np.asarray(meta["latents_u"], dtype=float),
            latents_xi=np.asarray(meta["latents_xi"], dtype=float),
            seed=int(meta["seed"]),
            stream_key=tuple(meta.get("stream_key", ())),
        )
    except (KeyError, InvalidParameter) as exc:
        raise IoFailure(f"malformed realization sidecar for {path}: {exc}") from exc


def read_arrowhead(path: PathLike) -> ArrowheadMatrix:
    """Read an arrowhead matrix from JSON ``{"head": ..., "shaft": [...], "tail": [...]}``."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise IoFailure(f"cannot read arrowhead {path}: {exc}") from exc
    return ArrowheadMatrix.from_dict(data)


def write_arrowhead(a: ArrowheadMatrix, path: PathLike, logger: Logger = LOGGER) -> Path:
    return write_payload(a.to_dict(), path, logger=logger)
