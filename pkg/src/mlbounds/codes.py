"""Generator matrices of a few classical binary codes used in examples and tests."""

from __future__ import annotations

import numpy as np

HAMMING_7_4 = np.array(
    [
        [1, 0, 0, 0, 1, 1, 0],
        [0, 1, 0, 0, 1, 0, 1],
        [0, 0, 1, 0, 0, 1, 1],
        [0, 0, 0, 1, 1, 1, 1],
    ],
    dtype=np.uint8,
)

# x^11 + x^10 + x^6 + x^5 + x^4 + x^2 + 1
GOLAY_23_POLY = 0b110001110101


def cyclic_generator(poly: int, n: int) -> np.ndarray:
    """Non-systematic generator of the length-``n`` cyclic code with generator polynomial ``poly``.

    Bit ``i`` of ``poly`` is the coefficient of ``x**i``; row ``j`` holds
    the coefficients of ``x**j * g(x)``.
    """
    deg = poly.bit_length() - 1
    if deg < 1 or deg >= n:
        raise ValueError(f"polynomial degree {deg} does not fit length {n}")
    g = np.array([(poly >> i) & 1 for i in range(deg + 1)], dtype=np.uint8)
    k = n - deg
    out = np.zeros((k, n), dtype=np.uint8)
    for j in range(k):
        out[j, j : j + deg + 1] = g
    return out


def golay_23_12() -> np.ndarray:
    return cyclic_generator(GOLAY_23_POLY, 23)


def repetition(n: int) -> np.ndarray:
    return np.ones((1, n), dtype=np.uint8)


def single_parity_check(n: int) -> np.ndarray:
    return np.hstack([np.eye(n - 1, dtype=np.uint8), np.ones((n - 1, 1), dtype=np.uint8)])
