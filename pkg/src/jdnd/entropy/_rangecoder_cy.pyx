# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twin of the pure-Python range coder backend.

Same algorithm, same stream format: carry-less 32-bit range coder with
16-bit frequencies. See _rangecoder_py.py for the commented reference.
"""

from cpython.bytes cimport PyBytes_FromStringAndSize
from cpython.mem cimport PyMem_Free, PyMem_Malloc, PyMem_Realloc
from libc.stdint cimport int64_t, uint8_t, uint32_t, uint64_t

import numpy as np

from ..errors import BitstreamError

DEF TOP = 16777216          # 1 << 24
DEF BOTTOM = 65536          # 1 << 16
DEF TOTAL_FREQ = 65536
DEF RAW_OFFSET = 2147483648  # 1 << 31

TOTAL = TOTAL_FREQ


cdef class RangeEncoder:
    cdef uint32_t _low
    cdef uint32_t _range
    cdef uint8_t* _buf
    cdef size_t _len
    cdef size_t _cap
    cdef bint _finished

    def __cinit__(self):
        self._low = 0
        self._range = 0xFFFFFFFFu
        self._cap = 4096
        self._len = 0
        self._buf = <uint8_t*> PyMem_Malloc(self._cap)
        if self._buf == NULL:
            raise MemoryError()
        self._finished = False

    def __dealloc__(self):
        if self._buf != NULL:
            PyMem_Free(self._buf)

    cdef int _emit(self, uint8_t b) except -1:
        if self._len == self._cap:
            self._cap *= 2
            self._buf = <uint8_t*> PyMem_Realloc(self._buf, self._cap)
            if self._buf == NULL:
                raise MemoryError()
        self._buf[self._len] = b
        self._len += 1
        return 0

    cdef int _put(self, uint32_t cum, uint32_t freq) except -1:
        cdef uint32_t low = self._low
        cdef uint32_t rng = self._range
        cdef uint32_t r = rng // TOTAL_FREQ
        if freq == 0:
            raise BitstreamError("cannot encode a zero-frequency symbol")
        low = low + r * cum
        rng = r * freq
        while True:
            if (low ^ (low + rng)) < TOP:
                pass
            elif rng < BOTTOM:
                rng = (-low) & (BOTTOM - 1)
            else:
                break
            self._emit(<uint8_t> (low >> 24))
            low <<= 8
            rng <<= 8
        self._low = low
        self._range = rng
        return 0

    def encode(self, sym, cdf):
        cdef uint32_t[::1] row = np.ascontiguousarray(cdf, dtype=np.uint32)
        cdef Py_ssize_t s = sym
        self._put(row[s], row[s + 1] - row[s])

    cdef int _put_raw32(self, int64_t value) except -1:
        cdef uint32_t u = <uint32_t> (value + RAW_OFFSET)
        self._put(((u >> 24) & 0xFFu) * 256, 256)
        self._put(((u >> 16) & 0xFFu) * 256, 256)
        self._put(((u >> 8) & 0xFFu) * 256, 256)
        self._put((u & 0xFFu) * 256, 256)
        return 0

    def encode_bins(self, bins, cdfs, bank_idx=None, escape_bin=-1, raw=None):
        cdef int64_t[::1] b = np.ascontiguousarray(bins, dtype=np.int64)
        cdef uint32_t[:, ::1] table = np.ascontiguousarray(cdfs, dtype=np.uint32)
        cdef int64_t[::1] idx
        cdef int64_t[::1] rawv
        cdef bint has_idx = bank_idx is not None
        cdef bint has_raw = raw is not None
        cdef Py_ssize_t i, n = b.shape[0], row
        cdef Py_ssize_t esc = escape_bin
        cdef Py_ssize_t s
        if has_idx:
            idx = np.ascontiguousarray(bank_idx, dtype=np.int64)
        if has_raw:
            rawv = np.ascontiguousarray(raw, dtype=np.int64)
        for i in range(n):
            row = idx[i] if has_idx else i
            s = b[i]
            self._put(table[row, s], table[row, s + 1] - table[row, s])
            if s == esc:
                self._put_raw32(rawv[i] if has_raw else 0)

    def finish(self):
        cdef uint32_t low = self._low
        cdef int k
        if not self._finished:
            for k in range(4):
                self._emit(<uint8_t> (low >> 24))
                low <<= 8
            self._finished = True
        return PyBytes_FromStringAndSize(<char*> self._buf, self._len)


cdef class RangeDecoder:
    cdef const uint8_t[::1] _data
    cdef object _keep
    cdef Py_ssize_t _pos
    cdef uint32_t _low
    cdef uint32_t _range
    cdef uint32_t _code

    def __init__(self, data):
        cdef int k
        self._keep = data
        self._data = data
        self._pos = 0
        self._low = 0
        self._range = 0xFFFFFFFFu
        self._code = 0
        for k in range(4):
            self._code = (self._code << 8) | self._next_byte()

    cdef uint32_t _next_byte(self) except? 0xFFFFFFFF:
        if self._pos >= self._data.shape[0]:
            raise BitstreamError(f"truncated payload at byte {self._pos}")
        self._pos += 1
        return self._data[self._pos - 1]

    cdef uint32_t _offset(self, uint32_t r) noexcept:
        cdef uint32_t dv = (self._code - self._low) // r
        if dv >= TOTAL_FREQ:
            dv = TOTAL_FREQ - 1
        return dv

    cdef int _consume(self, uint32_t r, uint32_t cum, uint32_t freq) except -1:
        cdef uint32_t low = self._low + r * cum
        cdef uint32_t rng = r * freq
        cdef uint32_t code = self._code
        while True:
            if (low ^ (low + rng)) < TOP:
                pass
            elif rng < BOTTOM:
                rng = (-low) & (BOTTOM - 1)
            else:
                break
            code = (code << 8) | self._next_byte()
            low <<= 8
            rng <<= 8
        self._low = low
        self._range = rng
        self._code = code
        return 0

    cdef Py_ssize_t _find(self, const uint32_t[::1] row, uint32_t dv) noexcept:
        # largest s with row[s] <= dv  (binary search over K+1 entries)
        cdef Py_ssize_t lo = 0, hi = row.shape[0] - 1, mid
        while hi - lo > 1:
            mid = (lo + hi) >> 1
            if row[mid] <= dv:
                lo = mid
            else:
                hi = mid
        return lo

    def decode(self, cdf):
        cdef uint32_t[::1] row = np.ascontiguousarray(cdf, dtype=np.uint32)
        cdef uint32_t r = self._range // TOTAL_FREQ
        cdef uint32_t dv = self._offset(r)
        cdef Py_ssize_t s = self._find(row, dv)
        self._consume(r, row[s], row[s + 1] - row[s])
        return s

    cdef int64_t _get_raw32(self) except? -1:
        cdef uint64_t u = 0
        cdef uint32_t r, dv, b
        cdef int k
        for k in range(4):
            r = self._range // TOTAL_FREQ
            dv = self._offset(r)
            b = dv >> 8
            self._consume(r, b * 256, 256)
            u = (u << 8) | b
        return <int64_t> u - RAW_OFFSET

    def decode_bins(self, n, cdfs, bank_idx=None, escape_bin=-1):
        cdef uint32_t[:, ::1] table = np.ascontiguousarray(cdfs, dtype=np.uint32)
        cdef int64_t[::1] idx
        cdef bint has_idx = bank_idx is not None
        cdef Py_ssize_t i, count = n, row
        cdef Py_ssize_t esc = escape_bin
        cdef Py_ssize_t s
        cdef uint32_t r, dv
        bins_arr = np.empty(count, dtype=np.int64)
        raw_arr = np.zeros(count, dtype=np.int64)
        cdef int64_t[::1] bins = bins_arr
        cdef int64_t[::1] raw = raw_arr
        if has_idx:
            idx = np.ascontiguousarray(bank_idx, dtype=np.int64)
        for i in range(count):
            row = idx[i] if has_idx else i
            r = self._range // TOTAL_FREQ
            dv = self._offset(r)
            s = self._find(table[row], dv)
            self._consume(r, table[row, s], table[row, s + 1] - table[row, s])
            bins[i] = s
            if s == esc:
                raw[i] = self._get_raw32()
        return bins_arr, raw_arr
