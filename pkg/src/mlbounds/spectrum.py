"""Euclidean and triangle distance spectra of trellis codes.

The Euclidean distance spectrum maps a squared distance ``D`` to the average
number (per transmitted codeword) of ordered codeword pairs at that
distance.  The triangle spectrum refines each count by the energies
``E1 = |s|^2`` and ``E2 = |ŝ|^2`` of the two codewords, giving keys
``(E1, E2, D)``.

Both are computed by a forward pass over the product error trellis that
keeps two kinds of partial pairs per state pair: pairs that have not yet
closed an error event, and pairs whose single error event has closed.
A pair that would open a second error event is dropped.  Keys are real
numbers, so exponents that agree to within the quantization tolerance are
merged into one key.

Spectra keep the self-pairs at ``D = 0`` (mass 1 after averaging); the
bound evaluators ignore that key.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .trellis import Codeword, GuardError, Trellis, TrellisError, count_paths, product_size

DEFAULT_TOLERANCE = 1e-9
DEFAULT_PRODUCT_LIMIT = 10**6
BRUTE_FORCE_LIMIT = 2**12


class SpectrumError(ValueError):
    """Raised for refused spectrum computations and malformed spectrum files."""


@dataclass(frozen=True)
class DistanceSpectrum:
    """Map from squared Euclidean distance to average ordered-pair multiplicity."""

    entries: Mapping[float, float]
    n: int
    quantization_tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "entries", {float(k): float(v) for k, v in sorted(self.entries.items())}
        )
        if any(k < 0 for k in self.entries):
            raise SpectrumError("squared distances must be nonnegative")

    def positive(self) -> tuple[np.ndarray, np.ndarray]:
        """Keys ``D > 0`` and their multiplicities as arrays."""
        items = [(k, v) for k, v in self.entries.items() if k > 0 and v != 0]
        if not items:
            return np.empty(0), np.empty(0)
        keys, mult = zip(*items)
        return np.array(keys), np.array(mult)

    @property
    def total_mass(self) -> float:
        return math.fsum(self.entries.values())


@dataclass(frozen=True)
class TriangleSpectrum:
    """Map from ``(E1, E2, D)`` to average ordered-pair multiplicity."""

    entries: Mapping[tuple[float, float, float], float]
    n: int
    quantization_tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "entries",
            {
                (float(a), float(b), float(c)): float(v)
                for (a, b, c), v in sorted(self.entries.items())
            },
        )
        if any(min(k) < 0 for k in self.entries):
            raise SpectrumError("energies and squared distances must be nonnegative")

    def positive(self) -> tuple[np.ndarray, np.ndarray]:
        """Rows ``(E1, E2, D)`` with ``D > 0`` and their multiplicities."""
        items = [(k, v) for k, v in self.entries.items() if k[2] > 0 and v != 0]
        if not items:
            return np.empty((0, 3)), np.empty(0)
        keys, mult = zip(*items)
        return np.array(keys, dtype=float), np.array(mult)

    @property
    def total_mass(self) -> float:
        return math.fsum(self.entries.values())

    def marginal(self) -> DistanceSpectrum:
        """Sum out the two energies."""
        if not self.entries:
            return DistanceSpectrum({}, self.n, self.quantization_tolerance)
        keys = np.array([k[2] for k in self.entries])[:, None]
        mult = np.array(list(self.entries.values()))
        k, m = _merge(keys, mult, self.quantization_tolerance)
        return DistanceSpectrum(
            dict(zip(k[:, 0].tolist(), m.tolist())), self.n, self.quantization_tolerance
        )

    def average_energy(self) -> float:
        """Mean codeword energy, read off the self-pair entries ``(E, E, 0)``.

        Exact when no two distinct codewords coincide.
        """
        diag = [(k[0], v) for k, v in self.entries.items() if k[2] == 0.0]
        mass = math.fsum(v for _, v in diag)
        if mass <= 0:
            raise SpectrumError("spectrum has no self-pair entries")
        return math.fsum(e * v for e, v in diag) / mass


# ---------------------------------------------------------------------------
# quantized merging


def _cluster(values: np.ndarray, eps: float) -> np.ndarray:
    """Cluster ids for ``values``; ascending sweep, a key joins the open
    cluster while within ``max(eps, eps * anchor)`` of its first key."""
    uniq, inv = np.unique(values, return_inverse=True)
    ids = np.empty(uniq.size, dtype=np.int64)
    cid = -1
    anchor = 0.0
    for i, v in enumerate(uniq):
        if cid < 0 or v - anchor > max(eps, eps * abs(anchor)):
            cid += 1
            anchor = v
        ids[i] = cid
    return ids[inv.ravel()]


def _merge(
    keys: np.ndarray,
    coef: np.ndarray,
    eps: float,
    groups: np.ndarray | None = None,
) -> tuple[np.ndarray, ...]:
    """Sum coefficients of records whose keys fall in the same clusters.

    ``keys`` has shape ``(R, k)``; ``groups`` (shape ``(R, g)``, integer)
    holds exact grouping columns such as the product state.  Merged keys
    are the coefficient-weighted mean of their members, or the common
    value when all members agree.  Output is sorted by groups, then keys.
    """
    if keys.shape[0] == 0:
        out = (keys, coef)
        return out + ((groups,) if groups is not None else ())
    cols = [_cluster(keys[:, j], eps) for j in range(keys.shape[1])]
    label = np.column_stack(cols)
    if groups is not None:
        label = np.column_stack([groups, label])
    uniq, inv = np.unique(label, axis=0, return_inverse=True)
    inv = inv.ravel()
    m = uniq.shape[0]
    total = np.bincount(inv, weights=coef, minlength=m)
    merged = np.empty((m, keys.shape[1]))
    for j in range(keys.shape[1]):
        kmin = np.full(m, np.inf)
        kmax = np.full(m, -np.inf)
        np.minimum.at(kmin, inv, keys[:, j])
        np.maximum.at(kmax, inv, keys[:, j])
        wsum = np.bincount(inv, weights=coef * keys[:, j], minlength=m)
        with np.errstate(invalid="ignore", divide="ignore"):
            mean = np.clip(wsum / total, kmin, kmax)
        merged[:, j] = np.where(kmin == kmax, kmin, mean)
    out = (merged, total)
    if groups is not None:
        out = out + (uniq[:, : groups.shape[1]],)
    return out


def _pair_sqdist(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``|x_i - y_j|^2`` for all row pairs."""
    diff = x[:, None, :] - y[None, :, :]
    return (diff * diff).sum(axis=-1)


def _sqnorm(x: np.ndarray) -> np.ndarray:
    return (x * x).sum(axis=-1)


def _check_tolerance(eps: float) -> None:
    if not (0.0 < eps <= 1e-3):
        raise SpectrumError(f"quantization tolerance must lie in (0, 1e-3], got {eps}")


# ---------------------------------------------------------------------------
# product error trellis


def _product_trellis_pass(
    trellis: Trellis, eps: float, triangle: bool, product_limit: int
) -> tuple[np.ndarray, np.ndarray]:
    trellis.check()
    _check_tolerance(eps)
    size = product_size(trellis)
    if size > product_limit:
        raise GuardError(
            f"product trellis needs {size} state pairs in one stage, "
            f"limit is {product_limit}"
        )
    k = 3 if triangle else 1
    s1 = np.zeros(1, dtype=np.int64)
    s2 = np.zeros(1, dtype=np.int64)
    closed = np.zeros(1, dtype=bool)
    keys = np.zeros((1, k))
    coef = np.ones(1)

    for stage in trellis.stages:
        labels = stage.labels
        dist = _pair_sqdist(labels, labels)
        energy = _sqnorm(labels)
        leaving: dict[int, np.ndarray] = {}
        for s in np.unique(stage.from_states):
            leaving[int(s)] = np.flatnonzero(stage.from_states == s)

        pairs, pair_inv = np.unique(np.column_stack([s1, s2]), axis=0, return_inverse=True)
        pair_inv = pair_inv.ravel()
        rec_parts, bi_parts, bj_parts = [], [], []
        for p, (a, b) in enumerate(pairs):
            recs = np.flatnonzero(pair_inv == p)
            out_a, out_b = leaving.get(int(a)), leaving.get(int(b))
            if out_a is None or out_b is None:
                continue
            bi = np.repeat(out_a, out_b.size)
            bj = np.tile(out_b, out_a.size)
            rec_parts.append(np.repeat(recs, bi.size))
            bi_parts.append(np.tile(bi, recs.size))
            bj_parts.append(np.tile(bj, recs.size))
        if not rec_parts:
            raise TrellisError("no branch continues the product trellis")
        rec = np.concatenate(rec_parts)
        bi = np.concatenate(bi_parts)
        bj = np.concatenate(bj_parts)

        same = bi == bj
        t1 = stage.to_states[bi]
        t2 = stage.to_states[bj]
        was_closed = closed[rec]
        # same branch: carry the pair as it is; different branches extend or
        # close an error event, which only pairs without a closed event may do
        keep = same | ~was_closed
        new_closed = np.where(same, was_closed, t1 == t2)[keep]
        rec, bi, bj, t1, t2 = rec[keep], bi[keep], bj[keep], t1[keep], t2[keep]

        step = dist[bi, bj][:, None]
        if triangle:
            step = np.column_stack([energy[bi], energy[bj], dist[bi, bj]])
        new_keys = keys[rec] + step
        groups = np.column_stack([t1, t2, new_closed.astype(np.int64)])
        keys, coef, g = _merge(new_keys, coef[rec], eps, groups)
        s1, s2, closed = g[:, 0], g[:, 1], g[:, 2].astype(bool)

    # state (0, 0) at the end: self-pairs (open, D = 0) and closed single events
    final = (s1 == 0) & (s2 == 0)
    keys, coef = _merge(keys[final], coef[final], eps)
    m = count_paths(trellis)
    return keys, coef / m


def euclidean_spectrum(
    trellis: Trellis,
    quantization_tolerance: float = DEFAULT_TOLERANCE,
    product_limit: int = DEFAULT_PRODUCT_LIMIT,
) -> DistanceSpectrum:
    """Euclidean distance spectrum over self-pairs and single-error-event pairs.

    Raises :class:`GuardError` when a stage of the product trellis has
    more than ``product_limit`` state pairs.
    """
    keys, coef = _product_trellis_pass(trellis, quantization_tolerance, False, product_limit)
    return DistanceSpectrum(
        dict(zip(keys[:, 0].tolist(), coef.tolist())), trellis.n, quantization_tolerance
    )


def triangle_spectrum(
    trellis: Trellis,
    quantization_tolerance: float = DEFAULT_TOLERANCE,
    product_limit: int = DEFAULT_PRODUCT_LIMIT,
) -> TriangleSpectrum:
    """Triangle distance spectrum ``(E1, E2, D) -> multiplicity``, same pair set
    as :func:`euclidean_spectrum`."""
    keys, coef = _product_trellis_pass(trellis, quantization_tolerance, True, product_limit)
    return TriangleSpectrum(
        {tuple(k): c for k, c in zip(keys.tolist(), coef.tolist())},
        trellis.n,
        quantization_tolerance,
    )


def brute_force_pair_spectrum(
    codewords: Sequence[Codeword] | np.ndarray,
    quantization_tolerance: float = DEFAULT_TOLERANCE,
    n: int | None = None,
) -> tuple[DistanceSpectrum, TriangleSpectrum]:
    """Spectra over all ``M**2`` ordered codeword pairs, divided by ``M``."""
    _check_tolerance(quantization_tolerance)
    x = np.array([np.asarray(c, dtype=float) for c in codewords], dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise SpectrumError("need a non-empty list of equal-length codewords")
    m = x.shape[0]
    if m > BRUTE_FORCE_LIMIT:
        raise GuardError(f"{m} codewords exceed the pair-enumeration guard {BRUTE_FORCE_LIMIT}")
    n = x.shape[1] if n is None else n
    energy = _sqnorm(x)
    eps = quantization_tolerance

    # per-row blocks keep memory at O(M * block)
    block = max(1, 2**20 // m)
    tri_keys, tri_coef = [], []
    for start in range(0, m, block):
        rows = x[start : start + block]
        d = _pair_sqdist(rows, x)
        e1 = np.broadcast_to(energy[start : start + block, None], d.shape)
        e2 = np.broadcast_to(energy[None, :], d.shape)
        trip = np.column_stack([e1.ravel(), e2.ravel(), d.ravel()])
        u, cnt = np.unique(trip, axis=0, return_counts=True)
        tri_keys.append(u)
        tri_coef.append(cnt.astype(float))
    tk, tc = _merge(np.concatenate(tri_keys), np.concatenate(tri_coef), eps)
    dk, dc = _merge(np.concatenate(tri_keys)[:, 2:], np.concatenate(tri_coef), eps)
    a = DistanceSpectrum(dict(zip(dk[:, 0].tolist(), (dc / m).tolist())), n, eps)
    b = TriangleSpectrum(
        {tuple(k): c for k, c in zip(tk.tolist(), (tc / m).tolist())}, n, eps
    )
    return a, b


def binary_spectra_from_weights(
    weights: Mapping[int, float], n: int
) -> tuple[DistanceSpectrum, TriangleSpectrum]:
    """Spectra of the BPSK image of a binary linear code from its weight distribution.

    Weight ``d`` maps to squared distance ``4d``; both codewords of every
    pair have energy ``n``.
    """
    if n < 1:
        raise SpectrumError("n must be positive")
    a: dict[float, float] = {}
    b: dict[tuple[float, float, float], float] = {}
    for d, count in sorted(weights.items()):
        d = int(d)
        if d < 0 or d > n:
            raise SpectrumError(f"weight {d} outside [0, {n}]")
        if count < 0:
            raise SpectrumError(f"negative multiplicity for weight {d}")
        if count > math.comb(n, d):
            raise SpectrumError(
                f"A_{d}={count} exceeds C({n},{d})={math.comb(n, d)} words of weight {d}"
            )
        if d == 0 and count != 1:
            raise SpectrumError("A_0 must be 1 when present")
        if count == 0:
            continue
        a[4.0 * d] = float(count)
        b[(float(n), float(n), 4.0 * d)] = float(count)
    return DistanceSpectrum(a, n), TriangleSpectrum(b, n)


def weight_distribution(generator_matrix) -> dict[int, int]:
    """Exhaustive Hamming weight histogram of the row space of a binary matrix."""
    from .trellis import linear_code_words

    words = linear_code_words(generator_matrix)
    w, c = np.unique(words.sum(axis=1), return_counts=True)
    return {int(a): int(b) for a, b in zip(w, c)}


def spectra_close(x: Mapping, y: Mapping, rtol: float = 1e-9) -> bool:
    """Entry-wise comparison of two spectrum maps with tolerant keys and values."""
    if len(x) != len(y):
        return False
    for (kx, vx), (ky, vy) in zip(sorted(x.items()), sorted(y.items())):
        kx, ky = np.atleast_1d(kx), np.atleast_1d(ky)
        if not np.allclose(kx, ky, rtol=rtol, atol=rtol):
            return False
        if not math.isclose(vx, vy, rel_tol=rtol, abs_tol=rtol):
            return False
    return True


# ---------------------------------------------------------------------------
# text format


def format_spectrum(
    spectrum: DistanceSpectrum | TriangleSpectrum,
    avg_energy: float | None = None,
    extra: Iterable[DistanceSpectrum | TriangleSpectrum] = (),
) -> str:
    """Render one or more spectra in the line-oriented text format."""
    lines = [f"# n={spectrum.n} eps={spectrum.quantization_tolerance!r}"]
    if avg_energy is not None:
        lines.append(f"# avg_energy={avg_energy!r}")
    for sp in (spectrum, *extra):
        if isinstance(sp, DistanceSpectrum):
            for k, v in sp.entries.items():
                lines.append(f"A {k:.12f} {v:.17g}")
        else:
            for (e1, e2, d), v in sp.entries.items():
                lines.append(f"B {e1:.12f} {e2:.12f} {d:.12f} {v:.17g}")
    return "\n".join(lines) + "\n"


def write_spectrum(spectrum, path, avg_energy: float | None = None, extra=()) -> None:
    Path(path).write_text(format_spectrum(spectrum, avg_energy, extra))


@dataclass(frozen=True)
class SpectrumFile:
    distance: DistanceSpectrum | None
    triangle: TriangleSpectrum | None
    n: int
    avg_energy: float | None


def parse_spectra(text: str, source: str = "<string>") -> SpectrumFile:
    n = None
    eps = DEFAULT_TOLERANCE
    avg = None
    a: dict[float, float] = {}
    b: dict[tuple[float, float, float], float] = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for tok in line[1:].split():
                key, _, val = tok.partition("=")
                try:
                    if key == "n":
                        n = int(val)
                    elif key == "eps":
                        eps = float(val)
                    elif key == "avg_energy":
                        avg = float(val)
                except ValueError:
                    raise SpectrumError(f"{source}:{ln}: bad header field {tok!r}") from None
            continue
        parts = line.split()
        try:
            nums = [float(p) for p in parts[1:]]
        except ValueError:
            raise SpectrumError(f"{source}:{ln}: non-numeric field in {line!r}") from None
        if parts[0] == "A" and len(nums) == 2:
            a[nums[0]] = a.get(nums[0], 0.0) + nums[1]
        elif parts[0] == "B" and len(nums) == 4:
            key = tuple(nums[:3])
            b[key] = b.get(key, 0.0) + nums[3]
        else:
            raise SpectrumError(f"{source}:{ln}: expected 'A k m' or 'B k1 k2 kd m', got {line!r}")
        if any(x < 0 for x in nums):
            raise SpectrumError(f"{source}:{ln}: negative value")
    if n is None:
        raise SpectrumError(f"{source}: missing '# n=<n> eps=<tolerance>' header")
    return SpectrumFile(
        DistanceSpectrum(a, n, eps) if a else None,
        TriangleSpectrum(b, n, eps) if b else None,
        n,
        avg,
    )


def read_spectra(path) -> SpectrumFile:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SpectrumError(f"cannot read {path}: {exc.strerror}") from None
    return parse_spectra(text, str(path))
