"""Deterministic CSV/JSON export and run manifests."""

from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.model.domain import (
    FRAME_NAMES,
    SAMPLE_COLUMNS,
    BranchPoint,
    ConnectionMapSample,
    FieldFrame,
    RunManifest,
    ShotRecord,
    SimilaritySolution,
)
from src.utils.json_utils import dumps_canonical, format_float
from src.utils.logger import get_logger

logger = get_logger(__name__)

MAP_COLUMNS = ["sweep_var", "kind", "xi_term", "val_term"]
FRAME_COLUMNS = ["t", "x", "h"]


def trajectory_table(record: ShotRecord) -> pd.DataFrame:
    """Shot samples with one row per stored point and the frame named.

    Args:
        record (ShotRecord): Shot to export.

    Returns:
        pd.DataFrame: Columns clock, frame, xi, u, w, x, y, z.
    """
    df = pd.DataFrame(np.asarray(record.samples), columns=list(SAMPLE_COLUMNS))
    df["frame"] = [FRAME_NAMES.get(v, "unknown") for v in df["frame"]]
    return df


def map_table(samples: Sequence[ConnectionMapSample]) -> pd.DataFrame:
    """Connection-map samples as a table."""
    rows = [s.model_dump(include=set(MAP_COLUMNS)) for s in samples]
    return pd.DataFrame(rows, columns=MAP_COLUMNS)


def frames_table(frames: Sequence[FieldFrame]) -> pd.DataFrame:
    """Long-format (t, x, h) rows for every frame."""
    rows = [(f.t, x, h) for f in frames for x, h in zip(f.x, f.h)]
    return pd.DataFrame(rows, columns=FRAME_COLUMNS)


def solutions_table(solutions: Sequence[SimilaritySolution]) -> pd.DataFrame:
    """Scalar summary of each solution, profiles omitted."""
    return pd.DataFrame([s.summary() for s in solutions])


def branches_table(points: Sequence[BranchPoint]) -> pd.DataFrame:
    return pd.DataFrame([p.model_dump() for p in points])


def csv_text(df: pd.DataFrame) -> str:
    """CSV with a single header row, LF endings and shortest round-trip floats.

    Args:
        df (pd.DataFrame): Table to render.

    Returns:
        str: CSV text.
    """
    return df.to_csv(index=False, lineterminator="\n", float_format=format_float, na_rep="")


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)


class ExportService:
    """Service for writing results and their manifests."""

    def __init__(self, fmt: str = "json"):
        """Initialize export service.

        Args:
            fmt (str): "csv" or "json" for file outputs.
        """
        self.fmt = fmt
        self.logger = get_logger(__name__)

    def render(self, payload: Dict[str, Any], table: Optional[pd.DataFrame]) -> str:
        """Text of one result in the configured format.

        Args:
            payload (Dict[str, Any]): JSON result.
            table (Optional[pd.DataFrame]): Tabular form, used for CSV.

        Returns:
            str: Rendered result; JSON when no table exists.
        """
        if self.fmt == "csv" and table is not None:
            return csv_text(table)
        return dumps_canonical(payload)

    def write(
        self,
        payload: Dict[str, Any],
        table: Optional[pd.DataFrame],
        out: Optional[str],
    ) -> List[str]:
        """Write a result to a file, or to stdout when out is None.

        Args:
            payload (Dict[str, Any]): JSON result.
            table (Optional[pd.DataFrame]): Tabular form, used for CSV.
            out (Optional[str]): Output path.

        Returns:
            List[str]: Written paths, empty for stdout.
        """
        text = self.render(payload, table if out is not None else None)
        if out is None:
            print(text, end="")
            return []
        write_text(Path(out), text)
        self.logger.info(f"Wrote {out}")
        return [out]

    def write_manifest(self, manifest: RunManifest, out: str) -> str:
        """Write the manifest next to its output as PATH.manifest.json.

        Args:
            manifest (RunManifest): Run manifest.
            out (str): Output path the manifest describes.

        Returns:
            str: Manifest path.
        """
        path = f"{out}.manifest.json"
        write_text(Path(path), dumps_canonical(manifest.model_dump()))
        self.logger.info(f"Wrote manifest {path}")
        return path
