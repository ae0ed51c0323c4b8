"""
Report Service
Deterministic CSV reports and key=value run manifests.
"""

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple, Union

from lens import __version__
from lens.config import logger
from lens.utils.formatting import format_float


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def write_csv(path: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """
    Write a CSV with a mandatory header and stable number formatting.

    Args:
        path: Destination file
        header: Column names
        rows: Row values; floats use round-trip precision, booleans true/false

    Returns:
        Path written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        count = 0
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"Row {list(row)} has {len(row)} cells, header has {len(header)}")
            writer.writerow([_cell(v) for v in row])
            count += 1
    logger.info(f"Wrote {count} row(s) to {path}")
    return path


@dataclass
class RunManifest:
    """What a run was asked to do and where it wrote"""

    subcommand: str
    seed: object = None
    config: List[Tuple[str, object]] = field(default_factory=list)
    outputs: List[str] = field(default_factory=list)
    version: str = __version__

    def to_text(self) -> str:
        """Flat key=value lines in a fixed order."""
        lines = [
            f"subcommand={self.subcommand}",
            f"seed={'' if self.seed is None else self.seed}",
        ]
        lines.extend(f"config.{key}={_cell(value)}" for key, value in self.config)
        lines.extend(f"output={path}" for path in self.outputs)
        lines.append(f"version={self.version}")
        return "\n".join(lines) + "\n"

    def write(self, out_dir: Union[str, Path]) -> Path:
        """Write <subcommand>.manifest into out_dir."""
        path = Path(out_dir) / f"{self.subcommand.replace(' ', '_')}.manifest"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_text(), encoding="utf-8")
        return path
