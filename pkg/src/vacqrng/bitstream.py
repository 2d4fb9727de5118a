"""Packed bit sequences with an exact bit length.

Bit order is little-endian everywhere: stream bit ``k`` lives in byte
``k // 8`` at bit position ``k % 8`` (bit 0 is the least significant bit of
the byte). The in-memory representation is an array of uint64 words with the
same layout, so the byte serialization of the words *is* the byte form of
the stream. Pad bits past ``bit_length`` in the last word are always zero.
"""

from __future__ import annotations

import numpy as np

_POPCOUNT8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint32)


class BitStream:
    """Immutable-by-convention packed bit sequence."""

    __slots__ = ("words", "bit_length")

    def __init__(self, words: np.ndarray, bit_length: int):
        if bit_length < 0:
            raise ValueError("bit_length must be >= 0")
        nwords = (bit_length + 63) // 64
        words = np.ascontiguousarray(words, dtype=np.uint64)
        if words.size != nwords:
            raise ValueError(
                f"need exactly {nwords} words for {bit_length} bits, got {words.size}"
            )
        # enforce the zero-padding invariant on the tail
        tail = bit_length % 64
        if nwords and tail:
            words = words.copy()
            words[-1] &= (np.uint64(1) << np.uint64(tail)) - np.uint64(1)
        self.words = words
        self.bit_length = bit_length

    # -- constructors ------------------------------------------------------

    @classmethod
    def zeros(cls, nbits: int) -> "BitStream":
        return cls(np.zeros((nbits + 63) // 64, dtype=np.uint64), nbits)

    @classmethod
    def from_bits(cls, bits: np.ndarray) -> "BitStream":
        """Pack an array of 0/1 values, element i becoming stream bit i."""
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.ndim != 1:
            raise ValueError("expected a 1-d bit array")
        return cls.from_bytes(np.packbits(bits, bitorder="little").tobytes(), bits.size)

    @classmethod
    def from_bytes(cls, data: bytes | np.ndarray, bit_length: int | None = None) -> "BitStream":
        buf = np.frombuffer(bytes(data), dtype=np.uint8)
        if bit_length is None:
            bit_length = 8 * buf.size
        nbytes = (bit_length + 7) // 8
        if buf.size < nbytes:
            raise ValueError(f"{buf.size} bytes cannot hold {bit_length} bits")
        nwords = (bit_length + 63) // 64
        padded = np.zeros(nwords * 8, dtype=np.uint8)
        padded[:nbytes] = buf[:nbytes]
        return cls(padded.view(np.uint64), bit_length)

    # -- views -------------------------------------------------------------

    def to_bits(self) -> np.ndarray:
        """Unpack to a uint8 array of 0/1 values of length bit_length."""
        byts = self.words.view(np.uint8)
        return np.unpackbits(byts, bitorder="little", count=self.bit_length)

    def to_bytes(self) -> bytes:
        nbytes = (self.bit_length + 7) // 8
        return self.words.view(np.uint8)[:nbytes].tobytes()

    def popcount(self) -> int:
        return int(_POPCOUNT8[self.words.view(np.uint8)].sum())

    def __len__(self) -> int:
        return self.bit_length

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitStream):
            return NotImplemented
        return self.bit_length == other.bit_length and np.array_equal(self.words, other.words)

    def __repr__(self) -> str:
        return f"BitStream({self.bit_length} bits)"


def pack_codes(codes: np.ndarray, code_bits: int) -> BitStream:
    """Flatten signed ADC codes to a bit stream.

    Each code contributes exactly ``code_bits`` bits: the two's-complement
    pattern of the code, least significant bit first. Streams produced here
    are what the extractor consumes, so this mapping is part of the on-disk
    contract and must not change.
    """
    codes = np.asarray(codes)
    if code_bits < 1 or code_bits > 32:
        raise ValueError("code_bits out of range")
    mask = np.uint32((1 << code_bits) - 1)
    shifts = np.arange(code_bits, dtype=np.uint32)
    total_bits = codes.size * code_bits
    parts = []
    chunk = 1 << 20  # multiple of 8 so per-chunk packbits stays byte aligned
    for lo in range(0, codes.size, chunk):
        c = (codes[lo : lo + chunk].astype(np.int64) & int(mask)).astype(np.uint32)
        bits = ((c[:, None] >> shifts[None, :]) & np.uint32(1)).astype(np.uint8)
        parts.append(np.packbits(bits.ravel(), bitorder="little"))
    if parts:
        buf = np.concatenate(parts)
    else:
        buf = np.zeros(0, dtype=np.uint8)
    return BitStream.from_bytes(buf.tobytes(), total_bits)
