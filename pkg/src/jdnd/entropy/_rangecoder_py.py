"""Pure-Python byte-oriented range coder (carry-less, 32-bit).

Renormalization releases a byte whenever the top byte of low and low+range
agree; when the range underflows below 16 bits without agreement it is
clipped to the next 16-bit boundary, trading a sliver of coding efficiency
for carry-free output. Frequencies are 16-bit: every CDF must end at 2**16.

This is the fallback backend; the compiled extension implements the same
interface. Streams produced by one backend decode with the other.
"""

from __future__ import annotations

import numpy as np

from ..errors import BitstreamError

TOP = 1 << 24
BOTTOM = 1 << 16
MASK = 0xFFFFFFFF
TOTAL_FREQ = 1 << 16

_RAW_OFFSET = 1 << 31


class RangeEncoder:
    """Single-use encoder for one symbol stream."""

    def __init__(self):
        self._low = 0
        self._range = MASK
        self._out = bytearray()
        self._finished = False

    def _put(self, cum: int, freq: int) -> None:
        if freq <= 0:
            raise BitstreamError("cannot encode a zero-frequency symbol")
        low = self._low
        rng = self._range
        r = rng // TOTAL_FREQ
        low += r * cum
        rng = r * freq
        out = self._out
        while True:
            if (low ^ (low + rng)) < TOP:
                pass
            elif rng < BOTTOM:
                rng = (-low) & (BOTTOM - 1)
            else:
                break
            out.append((low >> 24) & 0xFF)
            low = (low << 8) & MASK
            rng <<= 8
        self._low = low
        self._range = rng

    def encode(self, sym: int, cdf) -> None:
        """Encode one symbol under a cumulative table (cdf[-1] == 2**16)."""
        cum = int(cdf[sym])
        freq = int(cdf[sym + 1]) - cum
        self._put(cum, freq)

    def _put_raw32(self, value: int) -> None:
        u = (value + _RAW_OFFSET) & MASK
        for shift in (24, 16, 8, 0):
            b = (u >> shift) & 0xFF
            self._put(b * 256, 256)

    def encode_bins(self, bins, cdfs, bank_idx=None, escape_bin: int = -1, raw=None) -> None:
        """Encode a vector of bin indices with per-position CDFs.

        ``cdfs`` is a (B, K+1) bank; ``bank_idx`` maps position -> bank row
        (identity when None). Positions where ``bins[i] == escape_bin``
        additionally emit ``raw[i]`` as 4 literal bytes.
        """
        bins = np.asarray(bins)
        n = len(bins)
        for i in range(n):
            row = cdfs[i if bank_idx is None else bank_idx[i]]
            b = int(bins[i])
            self.encode(b, row)
            if b == escape_bin:
                self._put_raw32(int(raw[i]))

    def finish(self) -> bytes:
        if not self._finished:
            low = self._low
            for _ in range(4):
                self._out.append((low >> 24) & 0xFF)
                low = (low << 8) & MASK
            self._finished = True
        return bytes(self._out)


class RangeDecoder:
    """Single-use decoder over one byte payload."""

    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0
        self._low = 0
        self._range = MASK
        code = 0
        for _ in range(4):
            code = (code << 8) | self._next_byte()
        self._code = code

    def _next_byte(self) -> int:
        if self._pos >= len(self._data):
            raise BitstreamError(f"truncated payload at byte {self._pos}")
        b = self._data[self._pos]
        self._pos += 1
        return b

    def _offset(self) -> tuple[int, int]:
        r = self._range // TOTAL_FREQ
        dv = ((self._code - self._low) & MASK) // r
        if dv >= TOTAL_FREQ:
            dv = TOTAL_FREQ - 1
        return r, dv

    def _consume(self, r: int, cum: int, freq: int) -> None:
        low = self._low + r * cum
        rng = r * freq
        code = self._code
        while True:
            if (low ^ (low + rng)) < TOP:
                pass
            elif rng < BOTTOM:
                rng = (-low) & (BOTTOM - 1)
            else:
                break
            code = ((code << 8) | self._next_byte()) & MASK
            low = (low << 8) & MASK
            rng <<= 8
        self._low = low
        self._range = rng
        self._code = code

    def decode(self, cdf) -> int:
        r, dv = self._offset()
        sym = int(np.searchsorted(cdf, dv, side="right")) - 1
        cum = int(cdf[sym])
        freq = int(cdf[sym + 1]) - cum
        self._consume(r, cum, freq)
        return sym

    def _get_raw32(self) -> int:
        u = 0
        for _ in range(4):
            r, dv = self._offset()
            b = dv >> 8
            self._consume(r, b * 256, 256)
            u = (u << 8) | b
        return u - _RAW_OFFSET

    def decode_bins(self, n: int, cdfs, bank_idx=None, escape_bin: int = -1):
        """Decode ``n`` bin indices; returns (bins, raw) int64 arrays."""
        bins = np.empty(n, dtype=np.int64)
        raw = np.zeros(n, dtype=np.int64)
        for i in range(n):
            row = cdfs[i if bank_idx is None else bank_idx[i]]
            sym = self.decode(row)
            bins[i] = sym
            if sym == escape_bin:
                raw[i] = self._get_raw32()
        return bins, raw
