import numpy as np
import pytest

from aaobayes.export import (read_csv, read_json, read_pgm, write_csv, write_field_image,
                             write_json, write_nodal_csv, write_pgm)
from aaobayes.fem import Mesh


def test_csv_roundtrip(tmp_path):
    p = write_csv(tmp_path / "a" / "t.csv", ["x", "y"], [(1, 0.1), (np.int64(2), np.float64(1 / 3))])
    header, rows = read_csv(p)
    assert header == ["x", "y"]
    assert rows == [["1", "0.1"], ["2", repr(1 / 3)]]
    # floats are written with full precision
    assert float(rows[1][1]) == 1 / 3
    assert p.read_bytes().endswith(b"\n") and b"\r" not in p.read_bytes()


def test_nodal_csv(tmp_path):
    m = Mesh(4)
    vals = np.arange(m.n_interior, dtype=float)
    header, rows = read_csv(write_nodal_csv(tmp_path / "f.csv", m, vals))
    assert header == ["node", "x", "y", "value"] and len(rows) == m.n_interior
    assert float(rows[0][1]) == pytest.approx(m.interior_coords[0, 0])


def test_pgm_layout(tmp_path):
    img = np.array([[0.0, 1.0, 2.0], [3.0, 4.0, 5.0]])
    info = write_pgm(tmp_path / "i.pgm", img)
    raw = (tmp_path / "i.pgm").read_bytes()
    assert raw.startswith(b"P5\n3 2\n255\n")
    back = read_pgm(tmp_path / "i.pgm")
    np.testing.assert_array_equal(back, [[0, 51, 102], [153, 204, 255]])
    assert info == {"file": "i.pgm", "min": 0.0, "max": 5.0}


def test_constant_image(tmp_path):
    write_pgm(tmp_path / "c.pgm", np.full((2, 2), 7.0))
    assert np.all(read_pgm(tmp_path / "c.pgm") == 0)


def test_field_image_flips_rows(tmp_path):
    g = np.array([[0.0, 0.0], [1.0, 1.0]])  # row index is y
    write_field_image(tmp_path / "f.pgm", g)
    np.testing.assert_array_equal(read_pgm(tmp_path / "f.pgm"), [[255, 255], [0, 0]])


def test_pgm_errors(tmp_path):
    with pytest.raises(ValueError):
        write_pgm(tmp_path / "x.pgm", np.zeros(3))
    (tmp_path / "bad.pgm").write_bytes(b"P2\n1 1\n255\n0")
    with pytest.raises(ValueError):
        read_pgm(tmp_path / "bad.pgm")


def test_json_numpy_values(tmp_path):
    p = write_json(tmp_path / "m.json", {"a": np.arange(3), "b": np.float64(0.5), "c": tmp_path})
    d = read_json(p)
    assert d == {"a": [0, 1, 2], "b": 0.5, "c": str(tmp_path)}
    with pytest.raises(TypeError):
        write_json(tmp_path / "n.json", {"x": object()})
