"""File outputs: binary PGM images, small CSV helpers, run manifests.

Spacetime diagrams and grids are written as 8-bit binary PGM (P5) with 0
cells white and 1 cells black.  A RunManifest records everything needed
to reproduce a run: the subcommand, its experiment-defining parameters,
the master seed, the tool version, and the output basenames.  Wall time
is the one field allowed to differ between identical reruns.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np


def pgm_bytes(bitmap) -> bytes:
    """Binary P5 image of a {0,1} array: 0 -> white (255), 1 -> black (0)."""
    grid = np.asarray(bitmap, dtype=np.uint8)
    if grid.ndim != 2 or grid.size < 1:
        raise ValueError("PGM output needs a non-empty 2D array")
    if grid.max(initial=0) > 1:
        raise ValueError("PGM output expects cell values 0 or 1")
    h, w = grid.shape
    header = f"P5\n{w} {h}\n255\n".encode()
    return header + ((1 - grid) * np.uint8(255)).tobytes()


def write_pgm(path: str, bitmap) -> None:
    with open(path, "wb") as fh:
        fh.write(pgm_bytes(bitmap))


def read_pgm(path: str) -> np.ndarray:
    """Read back a P5 file written by write_pgm, as a {0,1} array."""
    with open(path, "rb") as fh:
        data = fh.read()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if fields[0] != b"P5" or fields[3] != b"255":
        raise ValueError(f"{path} is not an 8-bit P5 file")
    w, h = int(fields[1]), int(fields[2])
    raw = np.frombuffer(data[pos + 1:pos + 1 + h * w], dtype=np.uint8)
    if raw.size != h * w:
        raise ValueError(f"{path} is truncated")
    return (raw.reshape(h, w) < 128).astype(np.uint8)


def cells_csv(cells) -> str:
    """Single CSV row of cell values."""
    arr = np.asarray(cells)
    return ",".join(str(int(v)) for v in arr) + "\n"


def grid_csv(grid) -> str:
    """One CSV row per grid row."""
    arr = np.asarray(grid)
    return "".join(",".join(str(int(v)) for v in row) + "\n" for row in arr)


def curve_csv(points, x_name: str = "p", y_name: str = "mean_final_density") -> str:
    lines = [f"{x_name},{y_name}"]
    for x, y in points:
        lines.append(f"{x!r},{y!r}")
    return "\n".join(lines) + "\n"


def matrix_csv(row_values, col_values, matrix, corner: str = "p\\q") -> str:
    """Matrix with row/column headers, rows indexed by row_values."""
    mat = np.asarray(matrix)
    lines = [",".join([corner] + [repr(float(c)) for c in col_values])]
    for rv, row in zip(row_values, mat):
        lines.append(",".join([repr(float(rv))] + [repr(float(x)) for x in row]))
    return "\n".join(lines) + "\n"


@dataclass
class RunManifest:
    """Reproducibility record written next to every command's outputs."""

    subcommand: str
    parameters: dict
    seed: int
    version: str
    outputs: list[str] = field(default_factory=list)
    outcome: dict = field(default_factory=dict)
    wall_time_s: float = 0.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=str) + "\n"


def read_manifest(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)
