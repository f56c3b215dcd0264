import numpy as np
import pytest
from numpy.testing import assert_array_equal

from src.core.errors import InvalidInputError
from src.core.imaging import compose_rgb, infer_shape, quantize_to_image, read_netpbm, write_netpbm


def test_square_shape_inferred():
    assert infer_shape(16) == (4, 4)
    assert infer_shape(12, (3, 4)) == (3, 4)


def test_shape_errors():
    with pytest.raises(InvalidInputError):
        infer_shape(12)
    with pytest.raises(InvalidInputError):
        infer_shape(12, (5, 2))


def test_constant_input_maps_to_zero():
    assert_array_equal(quantize_to_image(np.full(4, 0.7), (2, 2)), np.zeros((2, 2), dtype=np.uint8))
    assert_array_equal(quantize_to_image(np.zeros(4), (2, 2), symmetric=True), np.zeros((2, 2), dtype=np.uint8))


def test_binary_input_uses_full_range():
    raster = quantize_to_image(np.array([0.0, 1.0, 1.0, 0.0]), (2, 2))
    assert raster.dtype == np.uint8
    assert_array_equal(raster, [[0, 255], [255, 0]])


def test_symmetric_range_centers_zero():
    assert_array_equal(quantize_to_image(np.array([-1.0, 0.0, 1.0]), (1, 3), symmetric=True), [[0, 128, 255]])


def test_gray_header_and_payload(tmp_path):
    raster = quantize_to_image(np.arange(6.0), (2, 3))
    path = write_netpbm(tmp_path / "a.pgm", raster)
    data = path.read_bytes()
    assert data.startswith(b"P5")
    assert b"3 2" in data[:20]
    assert data.endswith(raster.tobytes())
    assert_array_equal(read_netpbm(path), raster)


def test_color_header(tmp_path):
    gray = quantize_to_image(np.arange(4.0), (2, 2))
    raster = compose_rgb([gray, gray[::-1], np.zeros_like(gray)])
    path = write_netpbm(tmp_path / "nested" / "b.ppm", raster)
    assert path.read_bytes().startswith(b"P6")
    assert_array_equal(read_netpbm(path), raster)


def test_invalid_rasters(tmp_path):
    with pytest.raises(InvalidInputError):
        write_netpbm(tmp_path / "c.pgm", np.zeros((2, 2)))
    with pytest.raises(InvalidInputError):
        write_netpbm(tmp_path / "c.pgm", np.zeros((2, 2, 2), dtype=np.uint8))
    with pytest.raises(InvalidInputError):
        compose_rgb([np.zeros((2, 2), dtype=np.uint8)] * 2)
