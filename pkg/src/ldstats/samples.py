"""Mutant-count samples and their frequency summaries."""

from __future__ import annotations

import numpy as np

from .errors import DomainError

__all__ = ["Sample"]


class Sample:
    """A vector of non-negative integer mutant counts.

    Attributes
    ----------
    counts : int64 array, read-only
    n : sample size
    max_count : largest observed count
    values, freqs : sparse frequency table (unique counts and multiplicities)
    notes : provenance strings, e.g. a Winsorization record
    """

    def __init__(self, counts, notes: tuple[str, ...] = ()):
        arr = np.asarray(counts)
        if arr.ndim != 1 or arr.size < 1:
            raise DomainError("a sample must be a non-empty 1-d vector of counts")
        if not np.issubdtype(arr.dtype, np.integer):
            rounded = np.rint(arr)
            if not np.all(np.isfinite(arr)) or np.any(rounded != arr):
                raise DomainError("counts must be integers")
            arr = rounded
        arr = arr.astype(np.int64)
        if arr.min() < 0:
            raise DomainError("counts must be non-negative")
        arr.flags.writeable = False
        self.counts = arr
        self.n = int(arr.size)
        self.max_count = int(arr.max())
        self.values, self.freqs = np.unique(arr, return_counts=True)
        self.notes = tuple(notes)

    def zero_fraction(self) -> float:
        if self.values[0] == 0:
            return float(self.freqs[0]) / self.n
        return 0.0

    def dense_freq(self) -> np.ndarray:
        """Frequency table c[i] = #{j : X_j = i} for i = 0..max_count.

        Only sensible when max_count is moderate; likelihood code guards
        its own size budget before calling this.
        """
        c = np.zeros(self.max_count + 1, dtype=np.int64)
        c[self.values] = self.freqs
        return c

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"Sample(n={self.n}, max={self.max_count})"
