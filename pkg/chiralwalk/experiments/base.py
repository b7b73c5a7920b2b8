from pathlib import Path
from typing import List, Literal, Mapping, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from chiralwalk.config import settings
from chiralwalk.services import storage_service
from chiralwalk.utils.logger import logger


class ExperimentConfig(BaseModel):
    """Options shared by every experiment runner"""

    model_config = ConfigDict(extra="forbid")

    out: Optional[Path] = Field(None, description="Output directory; nothing is written when omitted")
    format: Literal["csv", "json"] = "csv"
    grid_points: int = Field(default_factory=lambda: settings.GRID_POINTS, ge=2)
    horizon: Optional[float] = Field(None, gt=0.0)
    seed: int = 0
    workers: int = Field(default_factory=lambda: settings.WORKERS, ge=1)

    def time_grid(self, default_horizon: float) -> np.ndarray:
        return np.linspace(0.0, self.horizon or default_horizon, self.grid_points)


class ExperimentReport(BaseModel):
    experiment: str
    files: List[str] = Field(default_factory=list)


class OutputWriter:
    """
    Collects the files of one run under config.out.

    Curves go out as CSV or JSON according to config.format; the summary and
    the manifest are always JSON. Without an output directory every call is
    a no-op.
    """

    def __init__(self, experiment: str, config: ExperimentConfig):
        self.experiment = experiment
        self.config = config
        self.files: List[Path] = []

    @property
    def enabled(self) -> bool:
        return self.config.out is not None

    def curves(self, name: str, columns: Mapping[str, Sequence[float]]) -> None:
        if not self.enabled:
            return
        if self.config.format == "csv":
            path = storage_service.write_series_csv(self.config.out / f"{name}.csv", columns)
        else:
            payload = {key: np.asarray(values, dtype=float).tolist() for key, values in columns.items()}
            path = storage_service.write_json(self.config.out / f"{name}.json", payload)
        self.files.append(path)

    def trajectory(self, name: str, traj) -> None:
        if not self.enabled:
            return
        if self.config.format == "csv":
            path = traj.to_csv(self.config.out / f"{name}.csv")
        else:
            path = storage_service.write_json(self.config.out / f"{name}.json", traj.to_dict())
        self.files.append(path)

    def finish(self, report: ExperimentReport) -> ExperimentReport:
        """Write summary.json and manifest.json and record the file list on the report."""
        if not self.enabled:
            return report
        summary = storage_service.write_json(
            self.config.out / "summary.json", report.model_dump(mode="json", exclude={"files"})
        )
        self.files.append(summary)
        manifest = storage_service.write_manifest(
            self.config.out, self.experiment, self.config.model_dump(mode="json"), self.files
        )
        self.files.append(manifest)
        logger.info(f"{self.experiment}: wrote {len(self.files)} files to {self.config.out}")
        return report.model_copy(update={"files": sorted(p.name for p in self.files)})


def ratio(numerator: Optional[float], denominator: Optional[float]) -> Optional[float]:
    if numerator is None or denominator in (None, 0.0):
        return None
    return numerator / denominator

