"""Seeded Toeplitz randomness extraction over GF(2).

Matrix convention, fixed so extracted files are reproducible bit-exact:
for a seed bit string s of length m + n - 1,

    T[i][j] = s[i + (n - 1) - j],   i in [0, m), j in [0, n)

i.e. the first row is s[n-1], s[n-2], ..., s[0] and diagonals descend to
the right. A block of n input bits x maps to m output bits
y_i = XOR_j (T[i][j] AND x_j).

The hot path never materializes T. Writing s' for the reversed seed,
y_i equals the parity of (s'[o : o + n] AND x) with o = m - 1 - i, so a
block is m sliding-window AND/XOR-fold passes over packed 64-bit words,
using a precomputed table of the 64 bit-shifts of s'. The word kernel is
compiled with numba and needs n to be a multiple of 64 for block
alignment within a stream; otherwise (or under VACQRNG_BACKEND=numpy) an
exact FFT convolution path is used: y_i = conv(s, x)[n - 1 + i] mod 2,
with float64 roundoff provably below 1/2 for any practical n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import NUMBA_ENABLED, njit
from .bitstream import BitStream
from .errors import GeometryError

DEFAULT_BLOCK_N = 4096

# blocks per FFT batch are sized to keep the scratch arrays around 256 MB
_FFT_BATCH_BYTES = 1 << 28


@dataclass(frozen=True)
class ToeplitzSeed:
    """Extractor seed: m + n - 1 packed bits plus the block geometry."""

    bits: BitStream
    m: int
    n: int

    def __post_init__(self):
        if not (1 <= self.m <= self.n):
            raise GeometryError(f"need 1 <= m <= n, got m={self.m} n={self.n}")
        expect = self.m + self.n - 1
        if self.bits.bit_length != expect:
            raise GeometryError(
                f"seed for m={self.m}, n={self.n} needs {expect} bits, "
                f"got {self.bits.bit_length}"
            )


def build_matrix(seed: ToeplitzSeed) -> np.ndarray:
    """Materialize the m x n matrix as uint8. Reference realization only;
    extraction never builds this. Intended for diagnostics and small
    geometries (memory is m * n bytes)."""
    sb = seed.bits.to_bits()
    rows = np.arange(seed.m, dtype=np.int64)[:, None]
    cols = np.arange(seed.n, dtype=np.int64)[None, :]
    return sb[rows + (seed.n - 1) - cols]


# -- word-packed kernel (numba) ---------------------------------------------

def _reversed_seed_shift_table(seed: ToeplitzSeed) -> np.ndarray:
    """(64, W+1) uint64 table; row s holds the reversed seed shifted right
    by s bits, padded with one zero word so windows may read one past the
    end."""
    rev = seed.bits.to_bits()[::-1]
    packed = BitStream.from_bits(rev).words
    w = packed.size
    tab = np.zeros((64, w + 1), dtype=np.uint64)
    tab[0, :w] = packed
    hi = np.concatenate([packed[1:], np.zeros(1, dtype=np.uint64)])
    for s in range(1, 64):
        tab[s, :w] = (packed >> np.uint64(s)) | (hi << np.uint64(64 - s))
    return tab


if NUMBA_ENABLED:

    @njit(cache=True)
    def _extract_words(tab, raw_words, nblocks, n_words, m, out_words):
        one = np.uint64(1)
        for b in range(nblocks):
            base = b * n_words
            out_base = b * m
            for i in range(m):
                o = m - 1 - i
                row = tab[o & 63]
                q = o >> 6
                acc = np.uint64(0)
                for t in range(n_words):
                    acc ^= row[q + t] & raw_words[base + t]
                acc ^= acc >> np.uint64(32)
                acc ^= acc >> np.uint64(16)
                acc ^= acc >> np.uint64(8)
                acc ^= acc >> np.uint64(4)
                acc ^= acc >> np.uint64(2)
                acc ^= acc >> np.uint64(1)
                g = out_base + i
                out_words[g >> 6] |= (acc & one) << np.uint64(g & 63)


# -- FFT fallback ------------------------------------------------------------

def _extract_fft(seed_bits: np.ndarray, raw_bits: np.ndarray, nblocks: int,
                 n: int, m: int) -> np.ndarray:
    """Exact GF(2) block extraction via float64 FFT convolution.

    Integer convolution values are bounded by n, so the float64 FFT
    roundoff (~ eps * L * log L * n) stays far below 0.5 and rounding
    recovers the exact counts.
    """
    conv_len = m + 2 * n - 2
    fft_len = 1 << int(np.ceil(np.log2(max(conv_len, 2))))
    s_spec = np.fft.rfft(seed_bits.astype(np.float64), fft_len)
    out = np.empty(nblocks * m, dtype=np.uint8)
    batch = max(1, _FFT_BATCH_BYTES // (fft_len * 16))
    blocks = raw_bits[: nblocks * n].reshape(nblocks, n)
    for b0 in range(0, nblocks, batch):
        chunk = blocks[b0 : b0 + batch].astype(np.float64)
        spec = np.fft.rfft(chunk, fft_len, axis=1)
        spec *= s_spec
        conv = np.fft.irfft(spec, fft_len, axis=1)
        vals = np.rint(conv[:, n - 1 : n - 1 + m]).astype(np.int64)
        out[b0 * m : (b0 + chunk.shape[0]) * m] = (vals & 1).astype(np.uint8).ravel()
    return out


# -- public operations --------------------------------------------------------

def _extract_blocks(seed: ToeplitzSeed, raw: BitStream, nblocks: int) -> BitStream:
    n, m = seed.n, seed.m
    if nblocks == 0:
        return BitStream.zeros(0)
    if NUMBA_ENABLED and n % 64 == 0:
        tab = _reversed_seed_shift_table(seed)
        out = np.zeros((nblocks * m + 63) // 64, dtype=np.uint64)
        _extract_words(tab, raw.words, nblocks, n // 64, m, out)
        return BitStream(out, nblocks * m)
    return BitStream.from_bits(
        _extract_fft(seed.bits.to_bits(), raw.to_bits(), nblocks, n, m)
    )


def extract_block(seed: ToeplitzSeed, block: BitStream) -> BitStream:
    """Hash one n-bit input block to m output bits."""
    if block.bit_length != seed.n:
        raise GeometryError(
            f"input block has {block.bit_length} bits, seed expects n={seed.n}"
        )
    if NUMBA_ENABLED:
        # a single block is always word aligned at offset 0
        tab = _reversed_seed_shift_table(seed)
        out = np.zeros((seed.m + 63) // 64, dtype=np.uint64)
        _extract_words(tab, block.words, 1, block.words.size, seed.m, out)
        return BitStream(out, seed.m)
    return BitStream.from_bits(
        _extract_fft(seed.bits.to_bits(), block.to_bits(), 1, seed.n, seed.m)
    )


def extract_stream(seed: ToeplitzSeed, raw: BitStream, ratio: float) -> BitStream:
    """Hash a raw stream block by block with one seed.

    The stream is cut into consecutive n-bit blocks (a final partial block
    is dropped) and each block is hashed independently; outputs are
    concatenated in block order, for floor(len(raw) / n) * m bits total.
    ``ratio`` is the certified extractable fraction of raw bits; geometries
    compressing less than that (m / n > ratio) are refused.
    """
    if not (0.0 < ratio <= 1.0):
        raise GeometryError(f"ratio must be in (0, 1], got {ratio}")
    if seed.m / seed.n > ratio:
        raise GeometryError(
            f"block geometry m/n = {seed.m}/{seed.n} = {seed.m / seed.n:.6f} "
            f"exceeds certified ratio {ratio:.6f}"
        )
    nblocks = raw.bit_length // seed.n
    return _extract_blocks(seed, raw, nblocks)
