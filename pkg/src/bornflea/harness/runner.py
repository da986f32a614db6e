"""Run a validated config and emit a deterministic CSV."""
from __future__ import annotations

import csv
import io
import numbers
from dataclasses import dataclass

from .. import __version__
from ..errors import BornFleaError, InvalidInputError
from .config import ExperimentConfig
from .experiments import RUNNERS, SCHEMAS


@dataclass(frozen=True)
class ResultTable:
    experiment: str
    columns: tuple
    rows: tuple
    provenance: tuple  # ((key, value), ...) in output order

    def __post_init__(self):
        if tuple(self.columns) != tuple(SCHEMAS[self.experiment]):
            raise InvalidInputError(f"columns {self.columns} do not match the {self.experiment} schema")
        for r in self.rows:
            if len(r) != len(self.columns):
                raise InvalidInputError(f"row {r!r} has {len(r)} fields, schema has {len(self.columns)}")

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, value in self.provenance:
            buf.write(f"# {key}: {value}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(v) for v in r])
        return buf.getvalue()

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, numbers.Integral):
        return str(int(v))
    if isinstance(v, numbers.Real):
        return format(float(v), ".17g")
    return str(v)


def run(config: ExperimentConfig, threads: int = 1) -> ResultTable:
    """Dispatch to the experiment; errors are re-raised with the experiment name attached."""
    try:
        columns, rows = RUNNERS[config.experiment](config, threads)
    except BornFleaError as exc:
        exc.args = (f"[{config.experiment}] {exc.args[0] if exc.args else exc}",) + exc.args[1:]
        raise
    provenance = (("bornflea", __version__), ("experiment", config.experiment),
                  ("config_sha256", config.sha256()), ("seed", config.seed))
    return ResultTable(config.experiment, tuple(columns), tuple(tuple(r) for r in rows), provenance)


def read_csv(text: str) -> tuple[dict, list[str], list[list[str]]]:
    """Split emitted CSV text into (provenance, header, rows)."""
    prov, body = {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            k, _, v = line[2:].partition(": ")
            prov[k] = v
        else:
            body.append(line)
    rows = list(csv.reader(body))
    return prov, rows[0], rows[1:]
