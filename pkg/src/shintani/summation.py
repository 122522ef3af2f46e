"""Compensated summation helpers.

Shells can contain millions of terms, and the shell-order-independence
contract requires results stable to 1e-12 relative under any enumeration
order.  Chunk subtotals go through a Neumaier accumulator; atom-table
reductions use math.fsum, which is exactly order independent.
"""

from __future__ import annotations

import math

import numpy as np


class CompensatedSum:
    """Neumaier (improved Kahan) accumulator for complex values."""

    __slots__ = ("_re", "_cre", "_im", "_cim")

    def __init__(self) -> None:
        self._re = 0.0
        self._cre = 0.0
        self._im = 0.0
        self._cim = 0.0

    def add(self, value: complex) -> None:
        re, im = value.real, value.imag
        t = self._re + re
        if abs(self._re) >= abs(re):
            self._cre += (self._re - t) + re
        else:
            self._cre += (re - t) + self._re
        self._re = t
        t = self._im + im
        if abs(self._im) >= abs(im):
            self._cim += (self._im - t) + im
        else:
            self._cim += (im - t) + self._im
        self._im = t

    def add_array(self, values: np.ndarray) -> None:
        # np.sum is pairwise within the chunk; compensation handles the
        # cross-chunk accumulation.
        self.add(complex(np.sum(values)))

    @property
    def value(self) -> complex:
        return complex(self._re + self._cre, self._im + self._cim)


def exact_complex_sum(values: np.ndarray) -> complex:
    """Order-independent sum of a complex array via math.fsum."""
    arr = np.asarray(values)
    if np.iscomplexobj(arr):
        return complex(math.fsum(arr.real.tolist()), math.fsum(arr.imag.tolist()))
    return complex(math.fsum(arr.tolist()), 0.0)


def exact_real_sum(values: np.ndarray) -> float:
    """Order-independent sum of a real array via math.fsum."""
    return math.fsum(np.asarray(values, dtype=float).tolist())
