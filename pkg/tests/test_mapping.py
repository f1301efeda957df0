import numpy as np
import pytest

from photonlink.channel import grid_from_config
from photonlink.mapping import (
    BitFrame,
    GrayMap,
    bit_error_rate,
    bits_to_symbol,
    bits_to_symbols,
    gray_decode,
    gray_encode,
    pack_bits_to_symbols,
    symbol_to_bits,
    symbols_to_bits,
    unpack_symbols_to_bits,
)


def bits_str(bits):
    return "".join(str(int(b)) for b in bits)


def prefix_xor_decode(bits):
    """Independent Gray inverse: running XOR over the bits, then binary value."""
    out = []
    acc = 0
    for b in bits:
        acc ^= int(b)
        out.append(acc)
    value = 0
    for b in out:
        value = 2 * value + b
    return value


class TestGrayCode:
    def test_zero(self):
        assert bits_str(gray_encode(0, 7)) == "0000000"

    def test_two(self):
        assert bits_str(gray_encode(2, 7)) == "0000011"

    def test_decode_examples(self):
        assert gray_decode([0, 0, 0, 0, 0, 0, 0]) == 0
        assert gray_decode([0, 0, 0, 0, 0, 1, 1]) == 2
        assert gray_decode([1, 0, 0, 0, 0, 0, 0]) == 127

    def test_decode_matches_prefix_xor_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            bits = rng.integers(0, 2, size=rng.integers(1, 15))
            assert gray_decode(bits) == prefix_xor_decode(bits)

    @pytest.mark.parametrize("width", range(1, 15))
    def test_roundtrip_exhaustive(self, width):
        for v in range(1 << width):
            assert gray_decode(gray_encode(v, width)) == v

    @pytest.mark.parametrize("width", range(1, 15))
    def test_adjacent_values_differ_in_one_bit(self, width):
        values = np.arange(1 << width)
        codes = values ^ (values >> 1)
        diff = codes[1:] ^ codes[:-1]
        popcount = np.array([bin(d).count("1") for d in diff])
        assert np.all(popcount == 1)

    def test_out_of_range_value(self):
        with pytest.raises(ValueError):
            gray_encode(128, 7)
        with pytest.raises(ValueError):
            gray_encode(-1, 7)


@pytest.fixture(scope="module")
def default_grid():
    return grid_from_config(896, 648, 8)


class TestGrayMap:
    def test_default_covers_default_grid(self, default_grid):
        gmap = GrayMap()
        assert (gmap.bits_x, gmap.bits_y) == (7, 7)
        assert gmap.width == 14
        gmap.check_grid(default_grid)

    def test_for_grid(self, default_grid):
        assert GrayMap.for_grid(default_grid) == GrayMap(7, 7)
        assert GrayMap.for_grid(grid_from_config(64, 64, 8)) == GrayMap(3, 3)

    def test_undersized_map_rejected(self, default_grid):
        with pytest.raises(ValueError):
            GrayMap(6, 7).check_grid(default_grid)


class TestSymbolBits:
    def test_symbol_zero_is_all_zero(self, default_grid):
        assert bits_str(symbol_to_bits(0, default_grid, GrayMap())) == "0" * 14

    def test_symbol_113(self, default_grid):
        bits = symbol_to_bits(113, default_grid, GrayMap())
        assert bits_str(bits) == "0000001" + "0000001"

    def test_roundtrip_all_symbols(self, default_grid):
        gmap = GrayMap()
        all_bits = symbols_to_bits(np.arange(default_grid.n_symbols), default_grid, gmap)
        symbols, clamped = bits_to_symbols(all_bits, default_grid, gmap)
        assert np.array_equal(symbols, np.arange(default_grid.n_symbols))
        assert not clamped.any()

    def test_vectorized_matches_scalar(self, default_grid):
        gmap = GrayMap()
        rng = np.random.default_rng(1)
        picks = rng.integers(0, default_grid.n_symbols, size=64)
        stacked = symbols_to_bits(picks, default_grid, gmap)
        for i, s in enumerate(picks):
            assert np.array_equal(stacked[i], symbol_to_bits(int(s), default_grid, gmap))

    def test_cross_neighbors_differ_in_exactly_one_bit(self, default_grid):
        gmap = GrayMap()
        n_cols = default_grid.n_cols
        all_bits = symbols_to_bits(np.arange(default_grid.n_symbols), default_grid, gmap)
        grid_bits = all_bits.reshape(default_grid.n_rows, n_cols, 14)
        dx = (grid_bits[:, 1:] != grid_bits[:, :-1]).sum(axis=2)
        dy = (grid_bits[1:] != grid_bits[:-1]).sum(axis=2)
        assert np.all(dx == 1)
        assert np.all(dy == 1)

    def test_corner_symbol(self, default_grid):
        bits = symbol_to_bits(9071, default_grid, GrayMap())
        symbol, clamped = bits_to_symbol(bits, default_grid, GrayMap())
        assert symbol == 9071
        assert not clamped

    def test_out_of_alphabet_column_clamps(self, default_grid):
        gmap = GrayMap()
        bits = np.concatenate([gray_encode(120, 7), gray_encode(40, 7)])
        symbol, clamped = bits_to_symbol(bits, default_grid, gmap)
        assert clamped
        assert symbol == 40 * 112 + 111

    def test_out_of_alphabet_row_clamps(self, default_grid):
        gmap = GrayMap()
        bits = np.concatenate([gray_encode(3, 7), gray_encode(100, 7)])
        symbol, clamped = bits_to_symbol(bits, default_grid, gmap)
        assert clamped
        assert symbol == 80 * 112 + 3

    def test_symbol_out_of_range(self, default_grid):
        with pytest.raises(IndexError):
            symbol_to_bits(9072, default_grid, GrayMap())


class TestBitFrame:
    def test_pad_and_payload(self):
        frame = BitFrame.pad([1, 0, 1], 8)
        assert bits_str(frame.bits) == "10100000"
        assert frame.n_padding == 5
        assert bits_str(frame.payload) == "101"

    def test_nonzero_padding_rejected(self):
        with pytest.raises(ValueError):
            BitFrame(np.array([1, 0, 1], dtype=np.uint8), n_padding=1)

    def test_oversized_payload_rejected(self):
        with pytest.raises(ValueError):
            BitFrame.pad(np.ones(9, dtype=np.uint8), 8)


class TestPacking:
    def test_codeword_packing_arithmetic(self):
        # 1024x1024 px at 8 px binning: 128x128 grid, every 14-bit word valid
        grid = grid_from_config(1024, 1024, 8)
        gmap = GrayMap()
        rng = np.random.default_rng(2)
        codeword = rng.integers(0, 2, size=64800, dtype=np.uint8)
        symbols, n_pad, n_clamped = pack_bits_to_symbols(codeword, grid, gmap)
        assert symbols.size == 4629
        assert n_pad == 6
        assert n_clamped == 0
        back = unpack_symbols_to_bits(symbols, grid, gmap, 64800)
        assert np.array_equal(back, codeword)

    def test_clamped_words_are_counted(self, default_grid):
        gmap = GrayMap()
        bits = np.concatenate([gray_encode(120, 7), gray_encode(40, 7),
                               gray_encode(3, 7), gray_encode(2, 7)])
        symbols, n_pad, n_clamped = pack_bits_to_symbols(bits, default_grid, gmap)
        assert n_pad == 0
        assert n_clamped == 1
        assert symbols[1] == 2 * 112 + 3

    def test_unpack_length_check(self, default_grid):
        with pytest.raises(ValueError):
            unpack_symbols_to_bits(np.array([0, 1]), default_grid, GrayMap(), 100)


class TestBitErrorRate:
    def test_identical(self):
        assert bit_error_rate([0, 1, 1, 0], [0, 1, 1, 0]) == 0.0

    def test_complement(self):
        assert bit_error_rate([0, 1, 1, 0], [1, 0, 0, 1]) == 1.0

    def test_counting(self):
        sent = np.zeros(64800, dtype=np.uint8)
        received = sent.copy()
        received[:648] = 1
        assert bit_error_rate(sent, received) == pytest.approx(0.01)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            bit_error_rate([0, 1], [0, 1, 1])

    def test_empty(self):
        with pytest.raises(ValueError):
            bit_error_rate([], [])
