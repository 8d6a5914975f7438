"""
Tests for the ingest package: grid and SEG-Y files, normalization, padding and tiling.
"""

import struct

import numpy as np
import pytest

from core.masking import TraceMask, generate_mask
from ingest.gather import Gather, GatherError, SeismicIOError
from ingest.grid import GridFormatError, read_gather, read_grid, write_gather, write_grid
from ingest.preprocess import (
    PreprocessError,
    crop,
    denormalize,
    normalize,
    pad_to_multiple,
)
from ingest.segy import SegyParseError, ibm_to_ieee, ieee_to_ibm, read_segy, write_segy
from ingest.tiling import TilingError, cut_tiles, plan_tiles, stitch


def _random_gather(rng, shape=(40, 24), dt=0.002):
    return Gather(rng.standard_normal(shape).astype(np.float32), dt=dt, line_id="L1")


# =============================================================================
# ZSG1 grid files
# =============================================================================

class TestGrid:

    def test_round_trip_bit_exact(self, tmp_path, rng):
        g = _random_gather(rng)
        loaded = read_grid(write_grid(g, tmp_path / "g.zsg"))
        assert loaded.amplitudes.tobytes() == g.amplitudes.tobytes()
        assert loaded.dt == g.dt

    def test_small_grid_layout(self, tmp_path):
        g = Gather(np.arange(6, dtype=np.float32).reshape(2, 3), dt=0.004)
        path = write_grid(g, tmp_path / "g.zsg")
        raw = path.read_bytes()
        assert raw[:4] == b"ZSG1"
        assert struct.unpack_from("<IId", raw, 4) == (2, 3, 0.004)
        loaded = read_gather(path)
        assert loaded.shape == (2, 3)
        np.testing.assert_array_equal(loaded.amplitudes[1], [3, 4, 5])

    def test_empty_gather_rejected(self):
        with pytest.raises(GatherError):
            Gather(np.zeros((0, 3)))

    def test_missing_file_names_path(self, tmp_path):
        target = tmp_path / "nope.zsg"
        with pytest.raises(SeismicIOError, match="nope.zsg"):
            read_gather(target)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "g.zsg"
        path.write_bytes(b"ABCD" + bytes(16))
        with pytest.raises(GridFormatError, match="magic"):
            read_grid(path)

    def test_size_disagrees_with_header(self, tmp_path, rng):
        path = write_grid(_random_gather(rng), tmp_path / "g.zsg")
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(GridFormatError):
            read_grid(path)

    def test_write_gather_dispatches_on_extension(self, tmp_path, rng):
        g = _random_gather(rng)
        assert write_gather(g, tmp_path / "a.sgy").read_bytes()[:4] != b"ZSG1"
        assert write_gather(g, tmp_path / "a.zsg").read_bytes()[:4] == b"ZSG1"
        np.testing.assert_array_equal(read_gather(tmp_path / "a.sgy").amplitudes, g.amplitudes)


# =============================================================================
# SEG-Y
# =============================================================================

class TestSegy:

    def test_ieee_round_trip_bit_exact(self, tmp_path, rng):
        g = _random_gather(rng, dt=0.004)
        loaded = read_segy(write_segy(g, tmp_path / "g.sgy"))
        assert loaded.amplitudes.tobytes() == g.amplitudes.tobytes()
        np.testing.assert_array_equal(loaded.trace_numbers, g.trace_numbers)

    def test_sample_interval_header(self, tmp_path, rng):
        path = write_segy(_random_gather(rng, dt=0.004), tmp_path / "g.sgy")
        raw = path.read_bytes()
        assert struct.unpack_from(">H", raw, 3216)[0] == 4000
        assert read_segy(path).dt == pytest.approx(0.004)

    def test_short_file_reports_offset(self, tmp_path):
        path = tmp_path / "short.sgy"
        path.write_bytes(bytes(1000))
        with pytest.raises(SegyParseError) as info:
            read_segy(path)
        assert info.value.offset == 1000

    def test_ibm_round_trip_within_precision(self, tmp_path, rng):
        g = _random_gather(rng, dt=0.004)
        loaded = read_segy(write_segy(g, tmp_path / "g.sgy", format_code=1))
        np.testing.assert_allclose(loaded.amplitudes, g.amplitudes, rtol=1e-6, atol=1e-7)

    def test_ibm_known_word(self):
        assert int(ieee_to_ibm(np.array([-118.625]))[0]) == 0xC276A000
        assert ibm_to_ieee(np.array([0xC276A000], dtype=np.uint32))[0] == np.float32(-118.625)

    def test_ibm_zero(self):
        assert int(ieee_to_ibm(np.array([0.0]))[0]) == 0

    def test_truncated_trace(self, tmp_path, rng):
        path = write_segy(_random_gather(rng, shape=(10, 3)), tmp_path / "g.sgy")
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(SegyParseError, match="truncated trace 3"):
            read_segy(path)

    def test_unsupported_format_offset(self, tmp_path, rng):
        path = write_segy(_random_gather(rng), tmp_path / "g.sgy")
        raw = bytearray(path.read_bytes())
        struct.pack_into(">H", raw, 3224, 8)
        path.write_bytes(bytes(raw))
        with pytest.raises(SegyParseError) as info:
            read_segy(path)
        assert info.value.offset == 3224

    def test_refuses_unknown_write_format(self, tmp_path, rng):
        with pytest.raises(SeismicIOError):
            write_segy(_random_gather(rng), tmp_path / "g.sgy", format_code=3)

    @pytest.mark.parametrize("first", [2**31 - 2, -2**31 - 1])
    def test_trace_number_overflow(self, tmp_path, first):
        g = Gather(np.zeros((8, 3), dtype=np.float32), trace_numbers=np.arange(first, first + 3))
        with pytest.raises(SeismicIOError, match="trace numbers"):
            write_segy(g, tmp_path / "g.sgy")
        assert not (tmp_path / "g.sgy").exists()


# =============================================================================
# Normalization and padding
# =============================================================================

class TestNormalize:

    def test_round_trip(self, rng):
        g = _random_gather(rng)
        normalized, scale = normalize(g)
        restored = denormalize(normalized, scale)
        np.testing.assert_allclose(restored.amplitudes, g.amplitudes, rtol=1e-6)
        assert restored.scale == pytest.approx(1.0)

    def test_constant_gather(self):
        g = Gather(np.full((8, 8), 10.0))
        normalized, scale = normalize(g)
        assert scale == 10.0
        assert np.all(normalized.amplitudes == 1.0)

    def test_single_outlier_does_not_set_scale(self):
        data = np.ones((100, 100))
        data[50, 50] = 1e6
        _, scale = normalize(Gather(data))
        assert scale == pytest.approx(1.0)

    def test_missing_traces_ignored(self):
        data = np.ones((10, 4))
        data[:, 1] = 1e6
        mask = TraceMask(np.array([1, 0, 1, 1]))
        _, scale = normalize(Gather(data), mask)
        assert scale == pytest.approx(1.0)

    def test_all_zero(self):
        with pytest.raises(PreprocessError):
            normalize(Gather(np.zeros((4, 4))))


class TestPadding:

    def test_pad_and_crop(self, rng):
        g = _random_gather(rng, shape=(100, 130))
        padded, _, info = pad_to_multiple(g, 16)
        assert padded.shape == (112, 144)
        assert (info.top, info.left) == (6, 7)
        np.testing.assert_array_equal(crop(padded, info).amplitudes, g.amplitudes)
        np.testing.assert_array_equal(crop(padded, info).trace_numbers, g.trace_numbers)

    def test_divisible_input_unchanged(self, rng):
        g = _random_gather(rng, shape=(32, 48))
        padded, _, info = pad_to_multiple(g, 16)
        np.testing.assert_array_equal(padded.amplitudes, g.amplitudes)
        assert (info.top, info.left) == (0, 0)

    def test_single_sample_gather(self):
        padded, _, info = pad_to_multiple(Gather(np.array([[3.0]])), 16)
        assert padded.shape == (16, 16)
        assert np.all(padded.amplitudes == 3.0)
        assert crop(padded, info).shape == (1, 1)

    def test_padding_reflects(self, rng):
        g = _random_gather(rng, shape=(16, 14))
        padded, _, info = pad_to_multiple(g, 16)
        assert info.left == 1
        np.testing.assert_array_equal(padded.amplitudes[:, 0], g.amplitudes[:, 1])
        np.testing.assert_array_equal(padded.amplitudes[:, -1], g.amplitudes[:, -2])

    def test_mask_follows_reflection(self, rng):
        g = _random_gather(rng, shape=(16, 10))
        mask = generate_mask(10, 0.5, seed=2)
        padded, padded_mask, info = pad_to_multiple(g, 16, mask)
        assert padded_mask.n_traces == 16
        source = [3, 2, 1] + list(range(10)) + [8, 7, 6]
        np.testing.assert_array_equal(padded_mask.keep, mask.keep[source])

    def test_mask_length_mismatch(self, rng):
        with pytest.raises(PreprocessError):
            pad_to_multiple(_random_gather(rng), 16, generate_mask(5, 0.5, seed=0))


# =============================================================================
# Tiling
# =============================================================================

class TestTiling:

    def test_weights_sum_to_one(self):
        plan = plan_tiles((100, 130), tile=(32, 32), overlap=0.5)
        assert plan.n_tiles > 1
        np.testing.assert_allclose(plan.weight_field(), 1.0, rtol=1e-12)

    def test_cut_and_stitch_identity(self, rng):
        g = _random_gather(rng, shape=(100, 130))
        plan = plan_tiles(g, tile=(32, 48), overlap=0.5)
        out = stitch(cut_tiles(g, plan), plan, like=g)
        np.testing.assert_allclose(out.amplitudes, g.amplitudes, rtol=1e-6, atol=1e-6)
        assert out.dt == g.dt

    def test_small_gather_single_tile(self, rng):
        g = _random_gather(rng, shape=(20, 20))
        plan = plan_tiles(g)
        assert plan.n_tiles == 1 and plan.tile == (20, 20)
        np.testing.assert_array_equal(stitch(cut_tiles(g, plan), plan).amplitudes, g.amplitudes)

    def test_last_tile_ends_on_edge(self):
        plan = plan_tiles((64, 100), tile=(64, 32), overlap=0.5)
        assert [c for _, c in plan.offsets] == [0, 16, 32, 48, 64, 68]

    @pytest.mark.parametrize("overlap", [1.0, -0.1])
    def test_invalid_overlap(self, overlap):
        with pytest.raises(TilingError):
            plan_tiles((64, 64), tile=(32, 32), overlap=overlap)

    def test_tile_shape_mismatch(self):
        plan = plan_tiles((64, 64), tile=(32, 32))
        with pytest.raises(TilingError):
            stitch([np.zeros((16, 16))] * plan.n_tiles, plan)

    def test_excluded_tile_gets_no_weight(self):
        plan = plan_tiles((32, 64), tile=(32, 32), overlap=0.5)
        assert [c for _, c in plan.offsets] == [0, 16, 32]
        ones = np.ones(plan.tile)
        out = stitch([ones, ones, None], plan).amplitudes
        np.testing.assert_allclose(out[:, :48], 1.0, rtol=1e-6)
        assert np.all(out[:, 48:] == 0)

    def test_all_tiles_excluded(self):
        plan = plan_tiles((32, 64), tile=(32, 32), overlap=0.5)
        assert np.all(stitch([None] * plan.n_tiles, plan).amplitudes == 0)
