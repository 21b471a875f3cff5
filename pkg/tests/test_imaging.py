import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from ppgdenoise.errors import InvalidInputError, PgmFormatError
from ppgdenoise.imaging import (
    GrayImage,
    decode,
    encode,
    image_filename,
    parse_image_filename,
    read_pgm,
    write_pgm,
)
from ppgdenoise.signals import SignalWindow

unit_windows = hnp.arrays(
    np.float64, 256, elements=st.floats(0.0, 1.0, allow_nan=False, allow_subnormal=False)
)


def window_of(samples):
    return SignalWindow(np.asarray(samples, dtype=np.float64))


class TestEncode:
    def test_constant_half(self):
        img = encode(window_of(np.full(256, 0.5)))
        assert (img.pixels == 128).all()

    def test_small_values(self):
        samples = np.zeros(256)
        samples[1] = 0.25
        img = encode(window_of(samples))
        assert img.pixels[0, 0] == 0
        assert img.pixels[0, 1] == 32
        assert img.pixels[1, 0] == 32
        assert img.pixels[1, 1] == 64

    def test_clamp_at_full_scale(self):
        samples = np.zeros(256)
        samples[7] = 1.0
        img = encode(window_of(samples))
        assert img.pixels[7, 7] == 255  # raw value 256 clamps

    @given(unit_windows)
    @settings(max_examples=60, deadline=None)
    def test_symmetry(self, samples):
        img = encode(window_of(samples))
        np.testing.assert_array_equal(img.pixels, img.pixels.T)

    @given(unit_windows, st.integers(0, 255), st.floats(0.0, 1.0, allow_nan=False))
    @settings(max_examples=60, deadline=None)
    def test_monotone_in_each_sample(self, samples, idx, raised):
        lower = encode(window_of(samples)).pixels
        bumped = samples.copy()
        bumped[idx] = max(bumped[idx], raised)
        upper = encode(window_of(bumped)).pixels
        assert (upper[idx, :] >= lower[idx, :]).all()
        assert (upper[:, idx] >= lower[:, idx]).all()


class TestDecode:
    def test_constant_half(self):
        win = decode(GrayImage(np.full((256, 256), 128, dtype=np.uint8)))
        np.testing.assert_array_equal(win.samples, np.full(256, 0.5))

    def test_all_zero(self):
        win = decode(GrayImage(np.zeros((256, 256), dtype=np.uint8)))
        np.testing.assert_array_equal(win.samples, np.zeros(256))

    def test_round_trip_all_quantized_levels(self):
        # Exhaustive oracle: every 8-bit level with a perturbed second sample.
        for level in range(256):
            samples = np.full(256, level / 256.0)
            samples[1] = min(level / 256.0 + 1 / 512.0, 1.0)
            win = window_of(samples)
            back = decode(encode(win))
            assert np.abs(back.samples - win.samples).max() < 1 / 256.0

    @given(unit_windows)
    @settings(max_examples=100, deadline=None)
    def test_round_trip_bound(self, samples):
        win = window_of(samples)
        back = decode(encode(win))
        err = np.abs(back.samples - win.samples).max()
        assert err <= 1 / 256.0  # equality only at samples exactly 1.0
        if samples.max() < 1.0:
            assert err < 1 / 256.0


class TestPgm:
    def test_round_trip(self, tmp_path, rng):
        img = GrayImage(rng.integers(0, 256, size=(256, 256)).astype(np.uint8), "x")
        path = tmp_path / "x.pgm"
        write_pgm(img, path)
        back = read_pgm(path)
        np.testing.assert_array_equal(back.pixels, img.pixels)

    def test_write_is_canonical(self, tmp_path):
        img = GrayImage(np.zeros((256, 256), dtype=np.uint8))
        path = tmp_path / "z.pgm"
        write_pgm(img, path)
        data = path.read_bytes()
        assert data.startswith(b"P5\n256 256\n255\n")
        assert len(data) == len(b"P5\n256 256\n255\n") + 256 * 256

    def test_rejects_wide_maxval(self, tmp_path):
        path = tmp_path / "bad.pgm"
        path.write_bytes(b"P5\n256 256\n65535\n" + bytes(256 * 256 * 2))
        with pytest.raises(PgmFormatError, match="maxval"):
            read_pgm(path)

    def test_rejects_wrong_dimensions(self, tmp_path):
        path = tmp_path / "bad.pgm"
        path.write_bytes(b"P5\n255 256\n255\n" + bytes(255 * 256))
        with pytest.raises(PgmFormatError, match="dimensions"):
            read_pgm(path)

    def test_rejects_wrong_magic(self, tmp_path):
        path = tmp_path / "bad.pgm"
        path.write_bytes(b"P2\n256 256\n255\n" + bytes(256 * 256))
        with pytest.raises(PgmFormatError, match="magic"):
            read_pgm(path)

    def test_rejects_truncated_pixels(self, tmp_path):
        path = tmp_path / "bad.pgm"
        path.write_bytes(b"P5\n256 256\n255\n" + bytes(100))
        with pytest.raises(PgmFormatError, match="payload"):
            read_pgm(path)

    def test_rejects_non_numeric_width(self, tmp_path):
        path = tmp_path / "bad.pgm"
        path.write_bytes(b"P5\nwide 256\n255\n" + bytes(256 * 256))
        with pytest.raises(PgmFormatError, match="width"):
            read_pgm(path)

    def test_reads_comments_and_alternate_whitespace(self, tmp_path, rng):
        pixels = rng.integers(0, 256, size=(256, 256)).astype(np.uint8)
        path = tmp_path / "c.pgm"
        path.write_bytes(b"P5\n# a comment\n256   256\n255\n" + pixels.tobytes())
        np.testing.assert_array_equal(read_pgm(path).pixels, pixels)


class TestFilenames:
    def test_round_trip(self):
        name = image_filename("rec01", 3840, "noisy")
        assert name == "rec01_3840_noisy.pgm"
        assert parse_image_filename(name) == ("rec01", 3840, "noisy")

    def test_record_ids_with_underscores(self):
        record, offset, kind = parse_image_filename("a_b_c_512_translated.pgm")
        assert (record, offset, kind) == ("a_b_c", 512, "translated")

    def test_rejects_unknown_kind(self):
        with pytest.raises(InvalidInputError):
            image_filename("x", 0, "denoised")
        with pytest.raises(InvalidInputError):
            parse_image_filename("x_12_smoothed.pgm")


class TestGrayImage:
    def test_rejects_wrong_shape(self):
        with pytest.raises(InvalidInputError):
            GrayImage(np.zeros((255, 256), dtype=np.uint8))

    def test_rejects_out_of_range_ints(self):
        with pytest.raises(InvalidInputError):
            GrayImage(np.full((256, 256), 300))
