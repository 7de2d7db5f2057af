"""Atomic writers and readers for every file the command line produces."""

import io
import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from TVAR_Rate_Distortion import __version__
from TVAR_Rate_Distortion.errors import InputError
from TVAR_Rate_Distortion.matrices.band_matrices import SymBandMatrix
from TVAR_Rate_Distortion.model.simulator import SamplePaths
from TVAR_Rate_Distortion.model.spectrum import SpectrumGrid
from TVAR_Rate_Distortion.model.tvar_model import FloatArray, TvarModel
from TVAR_Rate_Distortion.rate_distortion.curves import NATS_PER_BIT, RdCurve, RdPoint

logger = logging.getLogger(__name__)
UTC = timezone.utc  # datetime.UTC alias (Python 3.11+)

CURVE_COLUMNS = ("theta", "distortion", "rate_nats", "rate_bits")
FLOAT_FORMAT = "%.17g"


def atomic_write_text(path: str | Path, text: str) -> Path:
    """
    Write ``text`` as UTF-8 through a temporary file in the target directory, then rename it into place.

    Args:
        path (str | Path): Destination file; parent directories are created.
        text (str): File contents.

    Returns
    -------
        Path: The destination.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise
    return path


def save_json_obj(obj: dict[str, Any] | list[Any], path: str | Path) -> Path:
    """Save a JSON document with sorted keys."""
    text = json.dumps(obj, indent=4, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"
    return atomic_write_text(path, text)


def _frame_to_csv(frame: pd.DataFrame, *, header: bool = True) -> str:
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, header=header, float_format=FLOAT_FORMAT, lineterminator="\n")
    return buffer.getvalue()


def sidecar_path(path: str | Path) -> Path:
    """Return ``<stem>.json`` next to ``path``."""
    return Path(path).with_suffix(".json")


@dataclass(frozen=True)
class RunManifest:
    """What produced an output file: command, model digest, settings, tool version and time."""

    command: str
    model_hash: str
    settings: dict[str, Any] = field(default_factory=dict)
    version: str = __version__
    timestamp: str = ""

    def to_dict(self) -> dict[str, Any]:
        """Return a JSON-ready dictionary."""
        return {"command": self.command, "model_hash": self.model_hash, "settings": self.settings, "version": self.version, "timestamp": self.timestamp}


def manifest_timestamp() -> str:
    """ISO-8601 UTC time; ``SOURCE_DATE_EPOCH`` pins it for reproducible builds."""
    epoch = os.getenv("SOURCE_DATE_EPOCH")
    moment = datetime.fromtimestamp(int(epoch), tz=UTC) if epoch else datetime.now(tz=UTC)
    return moment.replace(microsecond=0).isoformat()


def build_manifest(command: str, model: TvarModel | None, settings: dict[str, Any]) -> RunManifest:
    """Build the manifest of one command run."""
    return RunManifest(command=command, model_hash=model.model_hash if model else "", settings=settings, timestamp=manifest_timestamp())


def curve_frame(curve: RdCurve) -> pd.DataFrame:
    """Return the curve table with the fixed column order."""
    rates = curve.rates
    return pd.DataFrame(
        {"theta": curve.thetas, "distortion": curve.distortions, "rate_nats": rates, "rate_bits": rates / NATS_PER_BIT},
        columns=list(CURVE_COLUMNS),
    )


def write_curve_csv(curve: RdCurve, path: str | Path, manifest: RunManifest, units: str = "nats") -> Path:
    """
    Write a curve CSV and its JSON sidecar.

    The CSV always carries rates in both nats and bits; ``units`` only records the preferred display unit.

    Args:
        curve (RdCurve): Curve to write.
        path (str | Path): CSV destination.
        manifest (RunManifest): Run description stored in the sidecar.
        units (str): ``"nats"`` or ``"bits"``.

    Returns
    -------
        Path: The CSV path.
    """
    path = atomic_write_text(path, _frame_to_csv(curve_frame(curve)))
    unconverged = [p.theta for p in curve.points if not p.converged]
    sidecar = {
        "manifest": manifest.to_dict(),
        "source_tag": curve.source_tag,
        "d_max": curve.d_max,
        "units": units,
        "num_points": len(curve.points),
        "all_converged": curve.all_converged,
        "unconverged_thetas": unconverged,
        "max_error_estimate": max((p.error_estimate for p in curve.points), default=0.0),
        "settings": curve.settings,
    }
    save_json_obj(sidecar, sidecar_path(path))
    logger.info("Curve '%s' (%d points) written to %s", curve.source_tag, len(curve.points), path)
    return path


def read_curve_csv(path: str | Path) -> RdCurve:
    """
    Read a curve CSV; the legend tag comes from the sidecar, or the file stem when there is none.

    Raises
    ------
        InputError: Missing file, wrong header, or non-finite / non-numeric values.
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=float, float_precision="round_trip")
    except (OSError, ValueError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        msg = f"Cannot read curve file {path}: {e}"
        raise InputError(msg) from e
    if tuple(frame.columns) != CURVE_COLUMNS:
        msg = f"Curve file {path} has columns {list(frame.columns)}, expected {list(CURVE_COLUMNS)}"
        raise InputError(msg)
    if frame.empty or not np.isfinite(frame.to_numpy()).all():
        msg = f"Curve file {path} is empty or holds non-finite values"
        raise InputError(msg)

    source_tag, d_max = path.stem, float(frame["distortion"].max())
    meta_path = sidecar_path(path)
    if meta_path.is_file():
        try:
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
            source_tag = str(meta.get("source_tag", source_tag))
            d_max = float(meta.get("d_max", d_max))
        except (json.JSONDecodeError, TypeError, ValueError) as e:
            logger.warning("Ignoring unreadable sidecar %s: %s", meta_path, e)
    points = tuple(RdPoint(theta=row.theta, distortion=row.distortion, rate=row.rate_nats) for row in frame.itertuples(index=False))
    return RdCurve(points=points, d_max=d_max, source_tag=source_tag)


def write_paths_csv(sample: SamplePaths, path: str | Path, manifest: RunManifest) -> Path:
    """Write simulated paths, one row per path with columns ``x_1..x_N``, plus a sidecar manifest."""
    frame = pd.DataFrame(sample.paths, columns=[f"x_{t}" for t in range(1, sample.n + 1)])
    path = atomic_write_text(path, _frame_to_csv(frame))
    save_json_obj({"manifest": manifest.to_dict(), "n": sample.n, "num_paths": sample.num_paths, "seed": sample.seed}, sidecar_path(path))
    logger.info("%d paths of length %d written to %s", sample.num_paths, sample.n, path)
    return path


def write_spectrum_csv(grid: SpectrumGrid, path: str | Path, manifest: RunManifest, summary: dict[str, Any]) -> Path:
    """Write ``(r, omega, g)`` triples and a sidecar with the grid extrema and validation summary."""
    frame = pd.DataFrame(grid.triples(), columns=["r", "omega", "g"])
    path = atomic_write_text(path, _frame_to_csv(frame))
    sidecar = {
        "manifest": manifest.to_dict(),
        "nr": int(grid.r_nodes.size),
        "nw": int(grid.omega_nodes.size),
        "g_min": grid.g_min,
        "g_max": grid.g_max,
        "argmin": list(grid.argmin),
        "argmax": list(grid.argmax),
        **summary,
    }
    save_json_obj(sidecar, sidecar_path(path))
    logger.info("Spectrum grid %dx%d written to %s (g in [%.6g, %.6g])", grid.r_nodes.size, grid.omega_nodes.size, path, grid.g_min, grid.g_max)
    return path


def write_dense_csv(matrix: FloatArray, path: str | Path) -> Path:
    """Write a dense matrix as headerless CSV."""
    return atomic_write_text(path, _frame_to_csv(pd.DataFrame(matrix), header=False))


def write_band_file(matrix: SymBandMatrix, noise_variance: float, path: str | Path) -> Path:
    """
    Write a symmetric band matrix as text.

    Line 1 holds ``n M sigma^2``; line ``k + 2`` holds the ``n - k`` entries of the k-th diagonal.
    """
    lines = [f"{matrix.n} {matrix.bandwidth} {noise_variance!r}"]
    for k in range(matrix.bandwidth + 1):
        lines.append(" ".join(repr(float(v)) for v in matrix.diagonal(k)))
    return atomic_write_text(path, "\n".join(lines) + "\n")


def read_band_file(path: str | Path) -> tuple[SymBandMatrix, float]:
    """
    Read a band file written by ``write_band_file``.

    Returns
    -------
        tuple: The matrix and the noise variance from the header.

    Raises
    ------
        InputError: Malformed header or diagonal lengths.
    """
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        n_text, m_text, var_text = lines[0].split()
        n, order, noise_variance = int(n_text), int(m_text), float(var_text)
        diagonals = [np.array(line.split(), dtype=float) for line in lines[1 : order + 2]]
    except (OSError, IndexError, ValueError) as e:
        msg = f"Malformed band file {path}: {e}"
        raise InputError(msg) from e
    if len(diagonals) != order + 1 or any(d.size != max(n - k, 0) for k, d in enumerate(diagonals)):
        msg = f"Band file {path} does not hold {order + 1} diagonals of an {n}x{n} matrix"
        raise InputError(msg)
    band = np.zeros((order + 1, n))
    for k, diagonal in enumerate(diagonals):
        band[k, : diagonal.size] = diagonal
    if not math.isfinite(noise_variance) or noise_variance <= 0:
        msg = f"Band file {path} has invalid noise variance {noise_variance!r}"
        raise InputError(msg)
    return SymBandMatrix(n=n, bandwidth=order, band=band, scale=1.0 / noise_variance), noise_variance
