"""Sample batches with provenance metadata and CSV serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyBatch


@dataclass(frozen=True)
class SampleBatch:
    """n points in R^d plus the seed / solver / grid that produced them.

    ``meta`` always records at least: seed, solver, grid, T, delta, n.
    Every point is finite; this is checked at construction.
    """

    points: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.size == 0:
            raise EmptyBatch("sample batch contains no points")
        if not np.all(np.isfinite(pts)):
            raise EmptyBatch("sample batch contains non-finite points")
        object.__setattr__(self, "points", pts)
        meta = dict(self.meta)
        meta.setdefault("n", pts.shape[0])
        object.__setattr__(self, "meta", meta)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def to_csv(self, path: str | Path, meta_path: str | Path | None = None) -> None:
        """Write points as CSV (header x0..x{d-1}) plus a JSON metadata sidecar.

        Floats are written with repr (shortest round-trip), so identical
        arrays always serialize to identical bytes.
        """
        path = Path(path)
        d = self.dim
        lines = [",".join(f"x{j}" for j in range(d))]
        for row in self.points:
            lines.append(",".join(repr(float(v)) for v in row))
        path.write_text("\n".join(lines) + "\n")
        if meta_path is None:
            meta_path = path.with_suffix(".meta.json")
        Path(meta_path).write_text(json.dumps(self.meta, indent=2, sort_keys=True) + "\n")

    @classmethod
    def from_csv(cls, path: str | Path, meta_path: str | Path | None = None) -> "SampleBatch":
        path = Path(path)
        rows = path.read_text().strip().splitlines()
        pts = np.array([[float(v) for v in line.split(",")] for line in rows[1:]])
        meta = {}
        if meta_path is None:
            meta_path = path.with_suffix(".meta.json")
        meta_path = Path(meta_path)
        if meta_path.exists():
            meta = json.loads(meta_path.read_text())
        return cls(points=pts, meta=meta)
