import numpy as np
import pytest

from angiokit import raster
from angiokit.errors import OutOfBoundsError, PgmFormatError
from angiokit.raster import GrayImage, Mask, Point


def make_gray(arr):
    return GrayImage(np.asarray(arr, dtype=np.uint8))


class TestLoadMask:
    def test_all_zero_image_has_no_foreground(self, tmp_path):
        p = tmp_path / "z.pgm"
        raster.save_gray(make_gray(np.zeros((4, 4))), p)
        assert raster.load_mask(p).count() == 0

    def test_all_255_image_is_full_foreground(self, tmp_path):
        p = tmp_path / "f.pgm"
        raster.save_gray(make_gray(np.full((4, 4), 255)), p)
        assert raster.load_mask(p).count() == 16

    def test_checkerboard_halves(self, tmp_path):
        board = np.indices((4, 4)).sum(axis=0) % 2 * 255
        p = tmp_path / "c.pgm"
        raster.save_gray(make_gray(board), p)
        assert raster.load_mask(p).count() == 8

    def test_threshold_is_strict(self, tmp_path):
        p = tmp_path / "t.pgm"
        raster.save_gray(make_gray(np.full((2, 2), 127)), p)
        assert raster.load_mask(p, threshold=127).count() == 0
        assert raster.load_mask(p, threshold=126).count() == 4

    def test_missing_file_raises_oserror(self, tmp_path):
        with pytest.raises(OSError):
            raster.load_mask(tmp_path / "nope.pgm")

    def test_malformed_header_raises_format_error(self, tmp_path):
        bad = tmp_path / "bad.pgm"
        bad.write_bytes(b"P5\n4 four\n255\n" + bytes(16))
        with pytest.raises(PgmFormatError):
            raster.load_mask(bad)

    def test_truncated_payload_raises_format_error(self, tmp_path):
        bad = tmp_path / "short.pgm"
        bad.write_bytes(b"P5\n4 4\n255\n" + bytes(7))
        with pytest.raises(PgmFormatError):
            raster.load_mask(bad)

    def test_wrong_magic_raises_format_error(self, tmp_path):
        bad = tmp_path / "p2.pgm"
        bad.write_bytes(b"P2\n2 2\n255\n0 0 0 0\n")
        with pytest.raises(PgmFormatError):
            raster.load_mask(bad)


class TestPgmRoundTrip:
    def test_mask_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(11)
        for i in range(20):
            mask = Mask(rng.random((rng.integers(1, 40), rng.integers(1, 40))) > 0.5)
            p = tmp_path / f"m{i}.pgm"
            raster.save_mask(mask, p)
            assert np.array_equal(raster.load_mask(p).pixels, mask.pixels)

    def test_mask_written_as_0_and_255(self, tmp_path):
        mask = Mask(np.eye(3, dtype=bool))
        p = tmp_path / "eye.pgm"
        raster.save_mask(mask, p)
        vals = np.unique(raster.load_gray(p).pixels)
        assert set(vals.tolist()) <= {0, 255}

    def test_gray_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        img = make_gray(rng.integers(0, 256, (17, 23)))
        p = tmp_path / "g.pgm"
        raster.save_gray(img, p)
        assert np.array_equal(raster.load_gray(p).pixels, img.pixels)

    def test_pgm_comment_lines_are_skipped(self, tmp_path):
        p = tmp_path / "c.pgm"
        p.write_bytes(b"P5\n# a comment\n2 2\n255\n" + bytes([1, 2, 3, 4]))
        assert np.array_equal(raster.load_gray(p).pixels, [[1, 2], [3, 4]])

    def test_png_round_trip(self, tmp_path):
        pytest.importorskip("PIL")
        rng = np.random.default_rng(5)
        img = make_gray(rng.integers(0, 256, (9, 12)))
        p = tmp_path / "g.png"
        raster.save_gray(img, p)
        assert np.array_equal(raster.load_gray(p).pixels, img.pixels)


class TestNeighbors8:
    def test_isolated_pixel_has_no_neighbors(self):
        m = np.zeros((5, 5), dtype=bool)
        m[2, 2] = True
        assert raster.neighbors8(Mask(m), Point(2, 2)) == []

    def test_interior_of_filled_block_has_8(self):
        m = Mask(np.ones((3, 3), dtype=bool))
        assert len(raster.neighbors8(m, Point(1, 1))) == 8

    def test_middle_of_3px_line_has_2(self):
        m = np.zeros((3, 5), dtype=bool)
        m[1, 1:4] = True
        nbrs = raster.neighbors8(Mask(m), Point(2, 1))
        assert sorted(nbrs) == [Point(1, 1), Point(3, 1)]

    def test_out_of_bounds_raises(self):
        m = Mask(np.ones((3, 3), dtype=bool))
        with pytest.raises(OutOfBoundsError):
            raster.neighbors8(m, Point(3, 0))

    def test_point_set_input(self):
        pts = {Point(1, 1), Point(2, 2), Point(5, 5)}
        assert raster.neighbors8(pts, Point(1, 1)) == [Point(2, 2)]

    def test_symmetry_on_random_masks(self):
        rng = np.random.default_rng(23)
        for _ in range(10):
            m = Mask(rng.random((12, 12)) > 0.6)
            pts = m.to_points()
            for p in pts:
                for q in raster.neighbors8(m, p):
                    assert p in raster.neighbors8(m, q)


class TestConnectedComponents:
    def test_empty_mask(self):
        assert raster.connected_components(Mask(np.zeros((4, 4), dtype=bool))) == []

    def test_two_disjoint_blocks(self):
        m = np.zeros((8, 8), dtype=bool)
        m[0:2, 0:2] = True
        m[5:7, 5:7] = True
        comps = raster.connected_components(Mask(m))
        assert [len(c) for c in comps] == [4, 4]

    def test_single_block(self):
        comps = raster.connected_components(Mask(np.ones((5, 5), dtype=bool)))
        assert [len(c) for c in comps] == [25]

    def test_diagonal_touch_is_one_component(self):
        m = np.zeros((4, 4), dtype=bool)
        m[0, 0] = m[1, 1] = True
        assert len(raster.connected_components(Mask(m))) == 1

    def test_partition_property(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            m = Mask(rng.random((15, 15)) > 0.55)
            comps = raster.connected_components(m)
            union = set()
            total = 0
            for c in comps:
                assert not (union & c), "components must be disjoint"
                union |= c
                total += len(c)
            assert union == m.to_points()
            assert total == m.count()

    def test_largest_component(self):
        m = np.zeros((10, 10), dtype=bool)
        m[0:4, 0:4] = True
        m[7:9, 7:9] = True
        largest = raster.largest_component(Mask(m))
        assert largest.count() == 16
