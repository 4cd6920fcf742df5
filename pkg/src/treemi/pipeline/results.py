"""Experiment outputs: CSV tables, JSON documents and the run manifest."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

__all__ = ["ExperimentResult", "file_sha256", "format_cell", "to_json"]


def format_cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def _clean(obj: Any) -> Any:
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalar
        return _clean(obj.item())
    return obj


def to_json(obj: Any) -> str:
    """Deterministic JSON; non-finite floats become ``null``."""
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def file_sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


@dataclass
class ExperimentResult:
    """Named output files plus manifest entries.

    ``tables`` maps a file name to ``(header, rows)``; ``documents`` holds
    JSON-serialisable objects; ``texts`` holds verbatim text files.
    """

    name: str
    tables: dict[str, tuple[Sequence[str], list[Sequence[Any]]]] = field(default_factory=dict)
    documents: dict[str, Any] = field(default_factory=dict)
    texts: dict[str, str] = field(default_factory=dict)
    manifest: dict[str, str] = field(default_factory=dict)

    def table_text(self, fname: str) -> str:
        header, rows = self.tables[fname]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_cell(v) for v in row])
        return buf.getvalue()

    def rows(self, fname: str) -> list[dict[str, Any]]:
        header, rows = self.tables[fname]
        return [dict(zip(header, r)) for r in rows]

    def merge(self, other: "ExperimentResult", prefix: str = "") -> "ExperimentResult":
        for k, v in other.tables.items():
            self.tables[prefix + k] = v
        for k, v in other.documents.items():
            self.documents[prefix + k] = v
        for k, v in other.texts.items():
            self.texts[prefix + k] = v
        return self

    def rendered(self) -> dict[str, str]:
        out = {k: self.table_text(k) for k in self.tables}
        out.update({k: to_json(v) for k, v in self.documents.items()})
        out.update(self.texts)
        return dict(sorted(out.items()))

    def write(self, out_dir: str | Path) -> list[Path]:
        """Write every output and a ``manifest.txt`` listing their hashes."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        lines = [f"experiment: {self.name}"]
        lines += [f"{k}: {v}" for k, v in self.manifest.items()]
        for fname, text in self.rendered().items():
            p = out_dir / fname
            p.write_text(text, encoding="utf-8", newline="\n")
            written.append(p)
            lines.append(f"output_sha256 {fname}: {hashlib.sha256(text.encode()).hexdigest()}")
        man = out_dir / "manifest.txt"
        man.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
        written.append(man)
        return written
