import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from consensuslab.fileio import (RunManifest, cells_csv, curve_csv, grid_csv,
                                 matrix_csv, pgm_bytes, read_manifest, read_pgm,
                                 write_pgm)

bitmaps = st.tuples(st.integers(1, 12), st.integers(1, 12)).flatmap(
    lambda hw: st.lists(st.integers(0, 1), min_size=hw[0] * hw[1],
                        max_size=hw[0] * hw[1]).map(
        lambda bits: np.array(bits, dtype=np.uint8).reshape(hw)))


@given(bitmaps)
def test_pgm_round_trip(tmp_path_factory, bitmap):
    path = str(tmp_path_factory.mktemp("pgm") / "img.pgm")
    write_pgm(path, bitmap)
    assert np.array_equal(read_pgm(path), bitmap)


def test_pgm_header_and_polarity():
    data = pgm_bytes(np.array([[0, 1]], dtype=np.uint8))
    assert data.startswith(b"P5\n2 1\n255\n")
    assert data[-2:] == bytes([255, 0])


def test_pgm_rejects_grayscale_input():
    with pytest.raises(ValueError):
        pgm_bytes(np.array([[0, 2]], dtype=np.uint8))
    with pytest.raises(ValueError):
        pgm_bytes(np.zeros(4, dtype=np.uint8))


def test_csv_helpers():
    assert cells_csv([1, 0, 1]) == "1,0,1\n"
    assert grid_csv([[1, 0], [0, 1]]) == "1,0\n0,1\n"
    curve = curve_csv([(0.3, 0.0), (0.7, 1.0)])
    assert curve.splitlines()[0] == "p,mean_final_density"
    matrix = matrix_csv([0.2], [0.0, 0.1], [[0.5, 0.25]])
    lines = matrix.splitlines()
    assert lines[0].startswith("p\\q,")
    assert lines[1] == "0.2,0.5,0.25"


def test_manifest_round_trip(tmp_path):
    manifest = RunManifest(subcommand="simulate", parameters={"n": 9},
                           seed=4, version="0.1.0", outputs=["a.pgm"],
                           outcome={"consensus": None}, wall_time_s=0.5)
    path = tmp_path / "m.json"
    path.write_text(manifest.to_json())
    loaded = read_manifest(str(path))
    assert loaded["subcommand"] == "simulate"
    assert loaded["parameters"] == {"n": 9}
    assert json.dumps(loaded, sort_keys=True)  # valid plain JSON throughout
