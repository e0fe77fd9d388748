# JSON-lines traces: one {"kind": ..., "data": ...} object per line
#
# Keys are sorted and nothing time-dependent is written, so identical runs
# give byte-identical files.

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from mashumaro import DataClassDictMixin


class TraceError(ValueError):
    """A trace file is malformed."""


@dataclass
class TraceEntry:
    kind: str
    data: dict[str, Any]


@dataclass
class TraceWriter:
    entries: list[TraceEntry] = field(default_factory=list)

    def add(self, kind: str, data: DataClassDictMixin | dict[str, Any]) -> None:
        payload = data.to_dict() if isinstance(data, DataClassDictMixin) else data
        self.entries.append(TraceEntry(kind, payload))

    def lines(self) -> list[str]:
        return [
            json.dumps({"kind": e.kind, "data": e.data}, sort_keys=True, ensure_ascii=False) + "\n"
            for e in self.entries
        ]

    def write(self, path: Path) -> None:
        """Write atomically through ``<path>.tmp``; the temp file is removed on failure."""
        temp_file = path.with_suffix(path.suffix + ".tmp")
        try:
            with temp_file.open("w", encoding="utf-8") as f:
                f.writelines(self.lines())
            temp_file.replace(path)
        except OSError:
            if temp_file.exists():
                temp_file.unlink()
            raise


def read_trace(path: Path) -> list[TraceEntry]:
    entries = []
    with path.open(encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as e:
                raise TraceError(f"Line {number}: {e.msg}") from e
            if not isinstance(raw, dict) or "kind" not in raw or not isinstance(raw.get("data"), dict):
                raise TraceError(f"Line {number}: expected an object with kind and data")
            entries.append(TraceEntry(str(raw["kind"]), raw["data"]))
    return entries
