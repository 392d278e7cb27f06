import numpy as np
from PIL import Image

import hoibench as hb
from hoibench import imgio


def test_uint8_round_half_up():
    # 0.5/255 boundary rounds up; exact endpoints map to 0 and 255
    buf = hb.ImageBuffer.from_array(np.array([[0.0, 1.0, 0.5 / 255.0, 0.49 / 255.0]]))
    u8 = imgio.to_uint8(buf)
    assert u8[0, :, 0].tolist() == [0, 255, 1, 0]


def test_uint8_round_trip_is_exact():
    rng = np.random.default_rng(0)
    buf = hb.ImageBuffer.from_array(rng.random((9, 7, 3)))
    quantized = imgio.from_uint8(imgio.to_uint8(buf))
    again = imgio.from_uint8(imgio.to_uint8(quantized))
    assert np.array_equal(quantized.data, again.data)


def test_png_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    buf = hb.ImageBuffer.from_array(rng.random((12, 10, 3)))
    path = tmp_path / "img.png"
    imgio.write_png(buf, path)
    loaded = imgio.read_image(path)
    assert np.array_equal(loaded.data, imgio.from_uint8(imgio.to_uint8(buf)).data)


def test_png_round_trip_grayscale(tmp_path):
    buf = hb.ImageBuffer.from_array(np.linspace(0, 1, 64).reshape(8, 8))
    path = tmp_path / "gray.png"
    imgio.write_png(buf, path)
    loaded = imgio.read_image(path)
    assert loaded.channels == 1
    assert np.array_equal(loaded.data, imgio.from_uint8(imgio.to_uint8(buf)).data)


def test_jpeg_source_read(tmp_path):
    arr = (np.random.default_rng(2).random((16, 16, 3)) * 255).astype(np.uint8)
    path = tmp_path / "src.jpg"
    Image.fromarray(arr, mode="RGB").save(path, format="JPEG", quality=95)
    loaded = imgio.read_image(path)
    assert loaded.channels == 3
    assert loaded.data.min() >= 0.0 and loaded.data.max() <= 1.0


def test_mask_png_round_trip(tmp_path):
    mask = np.zeros((10, 11), dtype=bool)
    mask[2:5, 3:9] = True
    path = tmp_path / "mask.png"
    imgio.write_mask_png(mask, path)
    assert np.array_equal(imgio.read_mask_png(path), mask)


def test_jpeg_roundtrip_preserves_shape_and_range():
    rng = np.random.default_rng(3)
    for channels in (1, 3):
        buf = hb.ImageBuffer.from_array(rng.random((20, 24, channels)))
        out = imgio.jpeg_roundtrip(buf, quality=10)
        assert out.data.shape == buf.data.shape
        assert out.data.min() >= 0.0 and out.data.max() <= 1.0


def test_jpeg_roundtrip_is_deterministic():
    rng = np.random.default_rng(4)
    buf = hb.ImageBuffer.from_array(rng.random((16, 16, 3)))
    a = imgio.jpeg_roundtrip(buf, quality=15)
    b = imgio.jpeg_roundtrip(buf, quality=15)
    assert np.array_equal(a.data, b.data)
