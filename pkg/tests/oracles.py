"""Independent reference computations for the test suite.

Nothing here calls into the package's numerical code; each oracle is the
slowest obvious way to get the answer.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from fractions import Fraction

import numpy as np
from mpmath import mp, mpf, ncdf


def q_exact(x: float) -> float:
    """Gaussian tail at 50 significant digits."""
    with mp.workdps(50):
        return float(ncdf(-mpf(x)))


def q_inverse(p: float) -> float:
    with mp.workdps(50):
        return float(mp.findroot(lambda x: ncdf(-x) - mpf(p), 1.0))


def cap_ratio_quad(n: int, theta: float) -> float:
    """Cap-area ratio by direct quadrature of sin^(n-2)."""
    with mp.workdps(40):
        c = mp.gamma(mpf(n) / 2) / (mp.sqrt(mp.pi) * mp.gamma(mpf(n - 1) / 2))
        th = mpf(theta)
        if th == 0:
            return 0.0
        # u = phi / theta and a unit-scale integrand: mp.quad's error
        # control is absolute, so tiny caps must be rescaled to be resolved
        peak = mp.sin(min(th, mp.pi / 2))
        body = mp.quad(lambda u: (mp.sin(th * u) / peak) ** (n - 2), [0, 0.5, 1])
        return float(c * th * body * peak ** (n - 2))


def weight_histogram(generator) -> dict[int, int]:
    """Weights of all 2^k codewords, by explicit message loop."""
    g = [[int(x) for x in row] for row in np.asarray(generator)]
    k, n = len(g), len(g[0])
    hist: Counter = Counter()
    for msg in itertools.product((0, 1), repeat=k):
        word = [sum(m * g[i][j] for i, m in enumerate(msg)) % 2 for j in range(n)]
        hist[sum(word)] += 1
    return dict(hist)


def paths(trellis):
    """Yield (branch index tuple, state sequence) for every root-to-toor path."""
    stages = trellis.stages

    def walk(t, state, idx, states):
        if t == len(stages):
            if state == 0:
                yield tuple(idx), tuple(states)
            return
        for i, b in enumerate(stages[t].branches):
            if b.from_state == state:
                yield from walk(t + 1, b.to_state, idx + [i], states + [b.to_state])

    yield from walk(0, 0, [], [0])


def _labels(trellis, idx):
    out = []
    for t, i in enumerate(idx):
        out.extend(trellis.stages[t].branches[i].label)
    return out


def _key(x: float, ndigits: int = 9) -> float:
    return round(x, ndigits)


def all_pairs_histogram(codewords) -> tuple[dict, dict]:
    """Exact A and B histograms over all ordered pairs, keys rounded to 1e-9."""
    cws = [list(map(float, c)) for c in codewords]
    m = len(cws)
    a: Counter = Counter()
    b: Counter = Counter()
    for s in cws:
        e1 = sum(x * x for x in s)
        for t in cws:
            e2 = sum(x * x for x in t)
            d = sum((x - y) ** 2 for x, y in zip(s, t))
            a[_key(d)] += 1
            b[(_key(e1), _key(e2), _key(d))] += 1
    return (
        {k: Fraction(v, m) for k, v in a.items()},
        {k: Fraction(v, m) for k, v in b.items()},
    )


def is_single_error_event(idx1, states1, idx2, states2) -> bool:
    """True when two distinct paths differ in exactly one contiguous excursion.

    The branches must differ somewhere; between the first and the last
    differing stage the two state sequences must stay apart.
    """
    diff = [t for t, (u, v) in enumerate(zip(idx1, idx2)) if u != v]
    if not diff:
        return False
    i, j = diff[0], diff[-1]
    return all(states1[t] != states2[t] for t in range(i + 1, j + 1))


def single_event_histogram(trellis) -> tuple[dict, dict]:
    """A and B over ordered path pairs that form one error event, plus the diagonal."""
    ps = list(paths(trellis))
    m = len(ps)
    words = [_labels(trellis, idx) for idx, _ in ps]
    a: Counter = Counter()
    b: Counter = Counter()
    for (idx1, st1), s in zip(ps, words):
        e1 = sum(x * x for x in s)
        for (idx2, st2), t in zip(ps, words):
            if idx1 != idx2 and not is_single_error_event(idx1, st1, idx2, st2):
                continue
            e2 = sum(x * x for x in t)
            d = sum((x - y) ** 2 for x, y in zip(s, t))
            a[_key(d)] += 1
            b[(_key(e1), _key(e2), _key(d))] += 1
    return (
        {k: Fraction(v, m) for k, v in a.items()},
        {k: Fraction(v, m) for k, v in b.items()},
    )


def nearest_codeword(codewords: np.ndarray, y: np.ndarray) -> int:
    """Index of the first codeword at minimum distance from ``y``."""
    best, arg = math.inf, -1
    for i, c in enumerate(codewords):
        d = float(np.sum((c - y) ** 2))
        if d < best:
            best, arg = d, i
    return arg


def grid_root(f, lo: float, hi: float, points: int = 10**6) -> float:
    """First grid point where a vectorized nondecreasing ``f`` reaches 1."""
    x = np.linspace(lo, hi, points)
    v = f(x)
    k = int(np.argmax(v >= 1.0))
    return 0.5 * (x[max(k - 1, 0)] + x[k])
