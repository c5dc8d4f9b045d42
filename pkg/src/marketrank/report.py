"""Analysis reports: a versioned JSON document plus a flat CSV projection.

JSON schema ``marketrank-report/1``::

    {
      "schema": "marketrank-report/1",
      "tool": {"name": "marketrank", "version": "..."},
      "command": "analyze",
      "config": {"tol": ..., "angle_tol": ..., "measure": "...", "seed": ...},
      "scalars": {...},
      "cells": [{"cell_id", "time", "rank", "dd", "freedom"}, ...],
      "payload": {...},          # command-specific tables
      "suites": [...]            # verify only
    }

Keys are sorted and no timestamps are written, so identical inputs give
byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from . import __version__

SCHEMA = "marketrank-report/1"
CELL_COLUMNS = ("cell_id", "time", "rank", "dd", "freedom")
SUITE_COLUMNS = ("name", "cases", "failures", "status")


def _plain(obj):
    """Convert numpy scalars and arrays to JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


@dataclass
class AnalysisReport:
    command: str
    config: dict
    scalars: dict = field(default_factory=dict)
    cells: list = field(default_factory=list)
    payload: dict = field(default_factory=dict)
    suites: list = field(default_factory=list)
    version: str = __version__

    @staticmethod
    def cell_table(tree, rank, dd, freedom):
        return [
            {"cell_id": c, "time": int(tree.times[c]), "rank": int(rank[c]), "dd": int(dd[c]), "freedom": int(freedom[c])}
            for c in range(tree.n_cells)
        ]

    def to_dict(self):
        return _plain(
            {
                "schema": SCHEMA,
                "tool": {"name": "marketrank", "version": self.version},
                "command": self.command,
                "config": self.config,
                "scalars": self.scalars,
                "cells": self.cells,
                "payload": self.payload,
                "suites": self.suites,
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, data):
        if data.get("schema") != SCHEMA:
            raise ValueError(f"unsupported report schema {data.get('schema')!r}")
        return cls(
            command=data["command"],
            config=data["config"],
            scalars=data["scalars"],
            cells=data["cells"],
            payload=data["payload"],
            suites=data["suites"],
            version=data["tool"]["version"],
        )

    @classmethod
    def from_json(cls, text: str):
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        """Per-cell table, or the suite table for ``verify``."""
        buf = io.StringIO()
        if self.command == "verify":
            writer = csv.DictWriter(buf, SUITE_COLUMNS, extrasaction="ignore", lineterminator="\n")
            writer.writeheader()
            writer.writerows(self.suites)
        else:
            writer = csv.DictWriter(buf, CELL_COLUMNS, lineterminator="\n")
            writer.writeheader()
            writer.writerows(self.cells)
        return buf.getvalue()


def read_csv_cells(text: str) -> list[dict]:
    return [{k: int(v) for k, v in row.items()} for row in csv.DictReader(io.StringIO(text))]
