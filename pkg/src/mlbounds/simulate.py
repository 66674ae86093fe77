"""Monte-Carlo frame-error rate of exact ML (Viterbi) decoding.

Random numbers come from numpy's Philox4x64-10, a counter-based generator.
Frames are grouped into fixed blocks of ``BLOCK_FRAMES``; block ``k`` of a
run with seed ``s`` draws from ``Philox(key=s + k * 2**64)``, i.e. the
128-bit key holds the seed in its low word and the block index in its high
word.  Inside a block, the codeword indices of all frames are drawn first
(``Generator.integers``), then the noise as a ``(frames, n)`` array of
uniforms (``Generator.random``, shifted by ``2**-54`` off zero) mapped
through the inverse Gaussian CDF.  Results therefore do not depend on how blocks are
spread over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import special

from .trellis import Codeword, Trellis, TrellisError, enumerate_paths

BLOCK_FRAMES = 4096
_U_SHIFT = 2.0**-54
_CHUNK_ELEMENTS = 2**21


@dataclass(frozen=True)
class FerEstimate:
    fer: float
    stderr: float
    frames: int
    errors_observed: int
    seed: int


def _block_rng(seed: int, block: int) -> np.random.Generator:
    key = (int(seed) & (2**64 - 1)) | (int(block) << 64)
    return np.random.Generator(np.random.Philox(key=key))


class _Decoder:
    """Batch Viterbi decoder; path metrics for many received words at once."""

    def __init__(self, trellis: Trellis) -> None:
        trellis.check()
        self.trellis = trellis
        self.offsets = np.cumsum([0] + [st.nt for st in trellis.stages])
        self.incoming = []
        for st in trellis.stages:
            groups = {}
            for s in np.unique(st.to_states):
                groups[int(s)] = np.flatnonzero(st.to_states == s)
            self.incoming.append(groups)
        self.label_energy = [np.einsum("bk,bk->b", st.labels, st.labels) for st in trellis.stages]

    def decode(self, y: np.ndarray) -> np.ndarray:
        """Branch indices of the ML path for each row of ``y``, shape ``(F, N)``.

        Ties go to the lowest branch index entering a state.
        """
        widest = max(len(st.branches) for st in self.trellis.stages)
        chunk = max(1, _CHUNK_ELEMENTS // widest)
        if y.shape[0] > chunk:
            return np.concatenate(
                [self._decode(y[i : i + chunk]) for i in range(0, y.shape[0], chunk)]
            )
        return self._decode(y)

    def _decode(self, y: np.ndarray) -> np.ndarray:
        f = y.shape[0]
        rows = np.arange(f)
        metric = np.zeros((f, 1))
        survivors = []
        for t, st in enumerate(self.trellis.stages):
            seg = y[:, self.offsets[t] : self.offsets[t + 1]]
            # |y - l|^2 minus the branch-independent |y|^2
            cand = metric[:, st.from_states] + (self.label_energy[t] - 2.0 * seg @ st.labels.T)
            size = st.num_to_states
            new_metric = np.full((f, size), np.inf)
            surv = np.zeros((f, size), dtype=np.int64)
            for s, idx in self.incoming[t].items():
                sub = cand[:, idx]
                j = np.argmin(sub, axis=1)
                surv[:, s] = idx[j]
                new_metric[:, s] = sub[rows, j]
            survivors.append(surv)
            metric = new_metric
        path = np.empty((f, len(survivors)), dtype=np.int64)
        state = np.zeros(f, dtype=np.int64)
        for t in range(len(survivors) - 1, -1, -1):
            b = survivors[t][rows, state]
            path[:, t] = b
            state = self.trellis.stages[t].from_states[b]
        return path

    def samples(self, paths: np.ndarray) -> np.ndarray:
        return np.concatenate(
            [st.labels[paths[:, t]] for t, st in enumerate(self.trellis.stages)], axis=1
        )


def viterbi_decode(trellis: Trellis, received) -> Codeword:
    """Codeword nearest to ``received`` in Euclidean distance."""
    y = np.asarray(received, dtype=float)
    if y.shape != (trellis.n,):
        raise TrellisError(f"received vector has shape {y.shape}, expected ({trellis.n},)")
    dec = _Decoder(trellis)
    path = dec.decode(y[None, :])
    return Codeword.from_samples(dec.samples(path)[0])


def _run_block(dec: _Decoder, codebook: np.ndarray, sigma: float, seed: int, block: int, frames: int) -> int:
    rng = _block_rng(seed, block)
    m, n = codebook.shape
    picks = rng.integers(m, size=frames)
    u = rng.random((frames, n))
    noise = special.ndtri(u + _U_SHIFT)
    sent = codebook[picks]
    decoded = dec.samples(dec.decode(sent + sigma * noise))
    return int(np.count_nonzero(np.any(decoded != sent, axis=1)))


def monte_carlo_fer(
    trellis: Trellis,
    sigma: float,
    frames: int,
    seed: int,
    workers: int = 1,
    codeword_limit: int = 2**16,
) -> FerEstimate:
    """Estimate the ML frame-error rate at noise level ``sigma``.

    Each frame sends a uniformly chosen codeword, adds i.i.d. ``N(0, σ²)``
    noise, Viterbi-decodes, and counts an error when any decoded sample
    differs from the sent one.  The transmitted codeword is drawn from the
    enumerated codebook, so ``trellis`` may have at most ``codeword_limit``
    paths.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if frames < 1:
        raise ValueError(f"frames must be positive, got {frames}")
    dec = _Decoder(trellis)
    codebook = dec.samples(np.array(enumerate_paths(trellis, codeword_limit)))

    jobs = [
        (k, min(BLOCK_FRAMES, frames - k * BLOCK_FRAMES))
        for k in range(math.ceil(frames / BLOCK_FRAMES))
    ]
    if workers <= 1:
        counts = [_run_block(dec, codebook, sigma, seed, k, f) for k, f in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(
                pool.map(lambda job: _run_block(dec, codebook, sigma, seed, *job), jobs)
            )
    errors = sum(counts)
    fer = errors / frames
    return FerEstimate(fer, math.sqrt(fer * (1.0 - fer) / frames), frames, errors, seed)
