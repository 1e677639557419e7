"""Integer CDF tables shared by the encoder and decoder.

Probabilities are quantized to 16-bit totals. Every in-alphabet bin keeps a
count of at least 1 so any symbol stays encodable; values outside
[-QMAX, QMAX] go through a dedicated escape bin followed by 4 literal bytes.
Table construction is pure integer-deterministic given (mu, sigma), so both
sides of the channel derive identical tables from the decoded hyper latent.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtr

from .gaussian import QMAX, SIGMA_MIN
from .rangecoder import TOTAL_FREQ

#: number of bins: one per value in [-QMAX, QMAX] plus the escape bin
NUM_BINS = 2 * QMAX + 2
ESCAPE_BIN = NUM_BINS - 1

_CHUNK = 8192


def gaussian_pmf(mu: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """(n, NUM_BINS) float64 pmf rows for N(mu, sigma) over the alphabet."""
    mu = np.asarray(mu, dtype=np.float64).reshape(-1)
    sigma = np.clip(np.asarray(sigma, dtype=np.float64).reshape(-1), SIGMA_MIN, None)
    n = mu.shape[0]
    edges = np.arange(-QMAX - 0.5, QMAX + 1.5, 1.0)  # 2*QMAX + 2 edges
    pmf = np.empty((n, NUM_BINS), dtype=np.float64)
    for start in range(0, n, _CHUNK):
        sl = slice(start, min(start + _CHUNK, n))
        cdf = ndtr((edges[None, :] - mu[sl, None]) / sigma[sl, None])
        pmf[sl, :-1] = np.diff(cdf, axis=1)
        pmf[sl, -1] = cdf[:, 0] + (1.0 - cdf[:, -1])
    return pmf


def quantize_pmf(pmf: np.ndarray) -> np.ndarray:
    """Quantize pmf rows to cumulative uint32 tables summing to 2**16.

    All bins get a count >= 1; the remaining surplus/deficit is settled on
    the largest bins so the result is deterministic.
    """
    counts = np.maximum(1, np.round(pmf * TOTAL_FREQ)).astype(np.int64)
    delta = TOTAL_FREQ - counts.sum(axis=1)
    pos = np.nonzero(delta > 0)[0]
    if pos.size:
        counts[pos, np.argmax(counts[pos], axis=1)] += delta[pos]
    for row in np.nonzero(delta < 0)[0]:
        need = -int(delta[row])
        order = np.argsort(counts[row])[::-1]
        for j in order:
            take = min(need, int(counts[row, j]) - 1)
            counts[row, j] -= take
            need -= take
            if need == 0:
                break
        if need:
            raise ValueError("cannot normalize pmf row to 16-bit counts")
    cdf = np.zeros((counts.shape[0], NUM_BINS + 1), dtype=np.uint32)
    cdf[:, 1:] = np.cumsum(counts, axis=1)
    return cdf


def gaussian_cdf_table(mu: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    return quantize_pmf(gaussian_pmf(mu, sigma))


def values_to_bins(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map integer symbol values to (bin index, raw escape value) arrays."""
    values = np.asarray(values, dtype=np.int64).reshape(-1)
    inside = np.abs(values) <= QMAX
    bins = np.where(inside, values + QMAX, ESCAPE_BIN)
    raw = np.where(inside, 0, values)
    return bins, raw


def bins_to_values(bins: np.ndarray, raw: np.ndarray) -> np.ndarray:
    bins = np.asarray(bins, dtype=np.int64)
    return np.where(bins == ESCAPE_BIN, raw, bins - QMAX)
