#!/usr/bin/env python3
"""
Artifact Writers
CSV and YAML output with stable formatting, so identical runs give identical bytes.
"""
import csv
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

import yaml


def format_value(value: Any) -> str:
    """Stable text form of a CSV cell."""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        if math.isnan(value):
            return 'nan'
        return '%.10g' % value
    if hasattr(value, 'item'):
        # numpy scalar
        return format_value(value.item())
    return str(value)


class ArtifactWriter:
    """Writes the files of one run directory."""

    def __init__(self, run_dir: str):
        """
        Args:
            run_dir: Directory that receives all artifacts of the run
        """
        self.run_dir = Path(run_dir)
        self.run_dir.mkdir(parents=True, exist_ok=True)

    def path(self, relative: str) -> Path:
        """Absolute path of an artifact, creating parent directories."""
        target = self.run_dir / relative
        target.parent.mkdir(parents=True, exist_ok=True)
        return target

    def write_csv(
        self,
        relative: str,
        header: Sequence[str],
        rows: Iterable[Sequence[Any]],
        trailer: List[str] = None
    ) -> Path:
        """
        Write a CSV file: ',' separator, LF endings, header row.

        Args:
            relative: Path inside the run directory
            header: Column names
            rows: Row values
            trailer: Optional '# ' comment lines appended after the rows

        Returns:
            Path of the written file
        """
        target = self.path(relative)
        with open(target, 'w', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_value(v) for v in row])
            for line in trailer or []:
                f.write(f"# {line}\n")
        return target

    def write_yaml(self, relative: str, data: Dict[str, Any]) -> Path:
        """Write a YAML document with sorted keys."""
        target = self.path(relative)
        with open(target, 'w', newline='\n') as f:
            yaml.safe_dump(data, f, sort_keys=True, default_flow_style=False)
        return target
