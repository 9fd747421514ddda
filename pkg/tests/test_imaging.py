import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from topostyle.errors import FormatError
from topostyle.imaging import (
    CHANNELS,
    ChannelSet,
    edge_map,
    extract_channels,
    grayscale,
    load_image,
    resize_capped,
    save_bits_png,
    save_grid_png,
)

rgb_images = arrays(
    np.uint8,
    st.tuples(st.integers(1, 12), st.integers(1, 12), st.just(3)),
)


def naive_sobel_magnitude(gray):
    """Direct 3x3 correlation with replicated borders."""
    g = np.pad(gray.astype(float), 1, mode="edge")
    kx = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], float)
    h, w = gray.shape
    gx = np.zeros((h, w))
    gy = np.zeros((h, w))
    for i in range(h):
        for j in range(w):
            win = g[i:i + 3, j:j + 3]
            gx[i, j] = (win * kx).sum()
            gy[i, j] = (win * kx.T).sum()
    return np.hypot(gx, gy)


def test_load_single_pixel(tmp_path):
    Image.fromarray(np.array([[[10, 20, 30]]], np.uint8)).save(tmp_path / "p.png")
    img = load_image(tmp_path / "p.png")
    assert img.shape == (1, 1, 3)
    assert img[0, 0].tolist() == [10, 20, 30]


def test_load_white(tmp_path):
    Image.new("RGB", (2, 2), (255, 255, 255)).save(tmp_path / "w.png")
    assert (load_image(tmp_path / "w.png") == 255).all()


def test_load_truncated_file(tmp_path):
    Image.fromarray(np.random.default_rng(0).integers(0, 256, (32, 32, 3), dtype=np.uint8)).save(tmp_path / "t.png")
    data = (tmp_path / "t.png").read_bytes()
    (tmp_path / "t.png").write_bytes(data[: len(data) // 2])
    with pytest.raises(FormatError):
        load_image(tmp_path / "t.png")


def test_load_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_image(tmp_path / "nope.png")


def test_load_unsupported_format(tmp_path):
    Image.new("RGB", (2, 2)).save(tmp_path / "x.bmp")
    with pytest.raises(FormatError):
        load_image(tmp_path / "x.bmp")


def test_load_jpeg(tmp_path):
    Image.new("RGB", (3, 2), (0, 0, 0)).save(tmp_path / "x.jpg")
    img = load_image(tmp_path / "x.jpg")
    assert img.shape == (2, 3, 3)


def test_alpha_composited_over_white(tmp_path):
    Image.new("RGBA", (1, 1), (0, 0, 0, 0)).save(tmp_path / "a.png")
    assert load_image(tmp_path / "a.png")[0, 0].tolist() == [255, 255, 255]


def test_palette_expanded(tmp_path):
    im = Image.new("P", (2, 1))
    im.putpalette([255, 0, 0, 0, 0, 255] + [0] * 762)
    im.putpixel((1, 0), 1)
    im.save(tmp_path / "p.png")
    assert load_image(tmp_path / "p.png").tolist() == [[[255, 0, 0], [0, 0, 255]]]


@pytest.mark.parametrize(
    "shape, max_side, expected",
    [((50, 100), 200, (50, 100)), ((500, 1000), 500, (250, 500)), ((1, 999), 333, (1, 333))],
)
def test_resize_shapes(shape, max_side, expected):
    img = np.zeros((*shape, 3), np.uint8)
    assert resize_capped(img, max_side).shape[:2] == expected


def test_resize_noop_returns_same_pixels():
    img = np.random.default_rng(1).integers(0, 256, (50, 100, 3), dtype=np.uint8)
    assert np.array_equal(resize_capped(img, 200), img)


def test_resize_preserves_constant_color():
    img = np.full((40, 80, 3), (12, 200, 99), np.uint8)
    out = resize_capped(img, 20)
    assert out.shape == (10, 20, 3)
    assert (out == (12, 200, 99)).all()


def test_resize_rejects_bad_cap():
    with pytest.raises(ValueError):
        resize_capped(np.zeros((2, 2, 3), np.uint8), 0)


@pytest.mark.parametrize(
    "pixel, expected", [((0, 0, 0), 0), ((100, 200, 50), 153), ((255, 0, 0), 76), ((255, 255, 255), 255)]
)
def test_grayscale_examples(pixel, expected):
    assert grayscale(np.array([[pixel]], np.uint8))[0, 0] == expected


def test_component_projection():
    ch = extract_channels(np.full((3, 4, 3), (10, 20, 30), np.uint8))
    assert (ch.red == 10).all() and (ch.green == 20).all() and (ch.blue == 30).all()
    assert ch.shape == (3, 4)


@pytest.mark.parametrize("color", [(255, 255, 255), (0, 0, 0), (13, 200, 77)])
def test_constant_image_edge_is_white(color):
    assert (edge_map(np.full((5, 6, 3), color, np.uint8)) == 255).all()


def test_edge_single_column():
    img = np.full((7, 1, 3), 90, np.uint8)
    assert (edge_map(img) == 255).all()


def test_edge_step_image():
    gray = np.zeros((5, 8), np.uint8)
    gray[:, 4:] = 255
    img = np.repeat(gray[:, :, None], 3, axis=2)
    edge = edge_map(img)
    mag = naive_sobel_magnitude(gray)
    expected = 255 - np.floor(255 * mag / mag.max() + 0.5)
    assert np.array_equal(edge, expected)
    assert set(np.flatnonzero(edge.min(axis=0) == 0)) == {3, 4}
    assert (edge[:, [0, 1, 6, 7]] == 255).all()


def test_edge_matches_naive_sobel():
    img = np.random.default_rng(3).integers(0, 256, (9, 11, 3), dtype=np.uint8)
    mag = naive_sobel_magnitude(grayscale(img))
    expected = 255 - np.floor(255 * mag / mag.max() + 0.5)
    assert np.allclose(edge_map(img), expected, atol=1)


@settings(max_examples=60, deadline=None)
@given(rgb_images)
def test_channels_lossless_and_same_shape(img):
    ch = extract_channels(img)
    assert np.array_equal(np.stack([ch.red, ch.green, ch.blue], axis=2), img)
    assert {ch[name].shape for name in CHANNELS} == {img.shape[:2]}
    for name in CHANNELS:
        assert ch[name].dtype == np.uint8


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 255), min_size=3, max_size=3), st.lists(st.integers(0, 255), min_size=3, max_size=3))
def test_grayscale_monotone(p, q):
    hi = np.maximum(p, q)
    lo = np.minimum(p, q)
    pair = np.array([[hi, lo]], np.uint8)
    g = grayscale(pair)
    assert g[0, 0] >= g[0, 1]


@settings(max_examples=40, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(2, 10), st.integers(2, 10)), elements=st.integers(0, 200)),
       st.integers(0, 55))
def test_edge_invariant_under_brightness_shift(gray, c):
    img = np.repeat(gray[:, :, None], 3, axis=2)
    shifted = (img.astype(int) + c).astype(np.uint8)
    assert np.array_equal(edge_map(img), edge_map(shifted))


def test_channelset_rejects_mismatched_shapes():
    a = np.zeros((2, 2), np.uint8)
    with pytest.raises(ValueError):
        ChannelSet(a, a, a, a, np.zeros((3, 2), np.uint8))


def test_png_exports(tmp_path):
    grid = np.arange(12, dtype=np.uint8).reshape(3, 4) * 20
    save_grid_png(grid, tmp_path / "g.png")
    assert np.array_equal(np.asarray(Image.open(tmp_path / "g.png")), grid)
    bits = grid <= 100
    save_bits_png(bits, tmp_path / "b.png")
    back = np.asarray(Image.open(tmp_path / "b.png").convert("L"))
    assert np.array_equal(back == 0, bits)
