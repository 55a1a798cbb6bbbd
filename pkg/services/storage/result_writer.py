from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union
import csv
import datetime
import json
import logging
import re

import numpy as np
import pytz
import yaml

import config

logger = logging.getLogger(__name__)

CONFIG_MARKER = "# config:"
CONFIG_PREFIX = "#   "


def _json_default(value: Any):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


class ResultWriter:
    """
    Writes one run's result files into a single directory

    Every CSV table starts with a '#' header block holding the code version, the
    UTC creation time and the complete resolved configuration as YAML.
    """

    def __init__(
        self,
        output_dir: Union[str, Path],
        resolved_config: Dict[str, Any],
        label: str = "run",
        timestamped: bool = False,
    ):
        self.created_utc = datetime.datetime.now(pytz.utc)
        base = Path(output_dir)
        self.run_dir = base / self._generate_run_dirname(label) if timestamped else base
        self.run_dir.mkdir(parents=True, exist_ok=True)
        self.resolved_config = resolved_config
        self.files: List[str] = []

    def _generate_run_dirname(self, label: str) -> str:
        """
        Timestamped directory name for a run

        Args:
            label: Experiment label

        Returns:
            Name with whitespace collapsed to underscores and other unsafe characters dropped
        """
        timestamp = self.created_utc.strftime("%Y%m%d_%H%M%S")
        normalized = re.sub(r"\s+", "_", label.strip())
        normalized = re.sub(r"[^A-Za-z0-9_.-]", "", normalized) or "run"
        return f"{normalized}_{timestamp}"

    def header_lines(self) -> List[str]:
        lines = [
            f"# {config.APP_TITLE}",
            f"# code_version: {config.APP_VERSION}",
            f"# generated_utc: {self.created_utc.isoformat()}",
            "# units: times in ns, frequencies in rad/ns",
            CONFIG_MARKER,
        ]
        dumped = yaml.safe_dump(self.resolved_config, sort_keys=False, default_flow_style=False)
        lines.extend(CONFIG_PREFIX + line for line in dumped.splitlines())
        return lines

    def _register(self, path: Path) -> Path:
        self.files.append(path.name)
        logger.info(f"Wrote {path}")
        return path

    def write_table(self, name: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        """
        Write a CSV table preceded by the header block

        Returns:
            Path of the written file
        """
        path = self.run_dir / name
        with path.open("w", encoding="utf-8", newline="") as handle:
            for line in self.header_lines():
                handle.write(line + "\n")
            writer = csv.writer(handle)
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_cell(value) for value in row])
        return self._register(path)

    def write_json(self, name: str, data: Dict[str, Any]) -> Path:
        path = self.run_dir / name
        with path.open("w", encoding="utf-8") as handle:
            json.dump(data, handle, indent=2, default=_json_default)
            handle.write("\n")
        return self._register(path)

    def write_metrics(self, metrics: Dict[str, Any]) -> Path:
        return self.write_json("metrics.json", metrics)

    def write_text(self, name: str, text: str) -> Path:
        path = self.run_dir / name
        path.write_text(text, encoding="utf-8")
        return self._register(path)

    def write_manifest(self, run_info: Dict[str, Any]) -> Path:
        """manifest.json: run facts (seed, step, dimension, workers, wall time) plus every file written so far"""
        manifest = {
            "app": config.APP_TITLE,
            "code_version": config.APP_VERSION,
            "generated_utc": self.created_utc.isoformat(),
            **run_info,
            "config": self.resolved_config,
            "files": list(self.files) + ["manifest.json"],
        }
        return self.write_json("manifest.json", manifest)

    def write_plot_script(self, plots: Sequence[Dict[str, Any]]) -> Path:
        """
        Emit plot_results.py, which renders the given CSV columns with matplotlib

        Args:
            plots: Dicts with keys file, x, y (list of columns), title and optional yerr
        """
        script = _PLOT_TEMPLATE.replace("__PLOTS__", json.dumps(list(plots), indent=4))
        return self.write_text("plot_results.py", script)


def _cell(value: Any) -> Any:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return "" if value is None else value


def read_table(path: Union[str, Path]) -> List[Dict[str, str]]:
    """Rows of a CSV written by ResultWriter, header block skipped"""
    with Path(path).open("r", encoding="utf-8", newline="") as handle:
        lines = [line for line in handle if not line.startswith("#")]
    return list(csv.DictReader(lines))


def read_embedded_config(path: Union[str, Path]) -> Dict[str, Any]:
    """Recover the resolved configuration from a result CSV header block"""
    collected: List[str] = []
    inside = False
    with Path(path).open("r", encoding="utf-8") as handle:
        for line in handle:
            if not line.startswith("#"):
                break
            if line.rstrip("\n") == CONFIG_MARKER:
                inside = True
                continue
            if inside:
                collected.append(line.rstrip("\n")[len(CONFIG_PREFIX):])
    if not inside:
        raise ValueError(f"{path} has no embedded configuration")
    return yaml.safe_load("\n".join(collected)) or {}


_PLOT_TEMPLATE = '''"""Render the CSV tables of this run. Requires matplotlib."""
import csv
from pathlib import Path

import matplotlib.pyplot as plt

PLOTS = __PLOTS__


def load(name):
    with (Path(__file__).parent / name).open() as handle:
        rows = list(csv.DictReader(line for line in handle if not line.startswith("#")))
    return rows


def main():
    for plot in PLOTS:
        rows = load(plot["file"])
        figure, axis = plt.subplots()
        x = [float(row[plot["x"]]) for row in rows if row[plot["x"]]]
        for column in plot["y"]:
            y = [float(row[column]) if row[column] else float("nan") for row in rows if row[plot["x"]]]
            if plot.get("yerr"):
                err = [float(row[plot["yerr"]]) if row[plot["yerr"]] else 0.0 for row in rows if row[plot["x"]]]
                axis.errorbar(x, y, yerr=err, fmt="o-", label=column)
            else:
                axis.plot(x, y, label=column)
        axis.set_xlabel(plot["x"])
        axis.set_title(plot["title"])
        axis.legend()
        figure.savefig(Path(__file__).parent / (Path(plot["file"]).stem + ".png"), dpi=150)


if __name__ == "__main__":
    main()
'''
