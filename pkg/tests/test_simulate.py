import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import am4_toy_trellis, random_layered_trellis, toy_convolutional
from oracles import nearest_codeword, q_exact
from mlbounds.codes import HAMMING_7_4
from mlbounds.simulate import BLOCK_FRAMES, monte_carlo_fer, viterbi_decode
from mlbounds.trellis import (
    TrellisError,
    bpsk_linear_code_trellis,
    enumerate_codewords,
    trivial_trellis,
)


def codebook(tr):
    return np.array([w.samples for w in enumerate_codewords(tr)])


def test_viterbi_matches_exhaustive_search_on_toy_code():
    tr = toy_convolutional()
    words = codebook(tr)
    rng = np.random.default_rng(7)
    for _ in range(10**4):
        y = words[rng.integers(len(words))] + rng.normal(0.0, 1.2, tr.n)
        got = np.array(viterbi_decode(tr, y).samples)
        assert np.array_equal(got, words[nearest_codeword(words, y)])


@given(random_layered_trellis(integer_labels=False), st.data())
def test_viterbi_finds_a_nearest_codeword(tr, data):
    words = codebook(tr)
    y = np.array(data.draw(st.lists(st.floats(-4, 4), min_size=tr.n, max_size=tr.n)))
    got = np.array(viterbi_decode(tr, y).samples)
    best = np.min(np.sum((words - y) ** 2, axis=1))
    assert np.sum((got - y) ** 2) <= best + 1e-9 * (1.0 + best)


def test_noiseless_received_word_decodes_to_itself():
    tr = am4_toy_trellis()
    for w in codebook(tr):
        assert viterbi_decode(tr, w).samples == tuple(w)


def test_just_past_the_midpoint_picks_the_nearer_word():
    tr = trivial_trellis([[1.0, 1.0], [-1.0, -1.0]])
    eps = 1e-9
    assert viterbi_decode(tr, [eps, eps]).samples == (1.0, 1.0)
    assert viterbi_decode(tr, [-eps, -eps]).samples == (-1.0, -1.0)


def test_received_length_mismatch():
    with pytest.raises(TrellisError, match="shape"):
        viterbi_decode(toy_convolutional(), np.zeros(3))


def test_antipodal_fer_is_q_of_one_over_sigma():
    tr = trivial_trellis([[1.0], [-1.0]])
    est = monte_carlo_fer(tr, 1.0, 2 * 10**5, seed=3)
    assert est.frames == 2 * 10**5
    assert abs(est.fer - q_exact(1.0)) <= 4.0 * est.stderr
    assert est.stderr == pytest.approx(math.sqrt(est.fer * (1 - est.fer) / est.frames))


def test_tiny_noise_gives_no_errors():
    est = monte_carlo_fer(bpsk_linear_code_trellis(HAMMING_7_4), 1e-6, 5000, seed=0)
    assert est.errors_observed == 0 and est.fer == 0.0


@pytest.mark.parametrize("workers", [2, 3, 8])
def test_result_does_not_depend_on_workers(workers):
    tr = bpsk_linear_code_trellis(HAMMING_7_4)
    frames = 3 * BLOCK_FRAMES + 123
    one = monte_carlo_fer(tr, 0.9, frames, seed=42, workers=1)
    many = monte_carlo_fer(tr, 0.9, frames, seed=42, workers=workers)
    assert one == many


def test_repeated_runs_are_identical_and_seeds_differ():
    tr = toy_convolutional()
    a = monte_carlo_fer(tr, 1.0, 10**4, seed=5)
    assert monte_carlo_fer(tr, 1.0, 10**4, seed=5) == a
    assert monte_carlo_fer(tr, 1.0, 10**4, seed=6).errors_observed != a.errors_observed


def test_prefix_of_a_longer_run_reuses_the_same_blocks():
    # whole blocks are shared, so the error count can only grow with frames
    tr = toy_convolutional()
    short = monte_carlo_fer(tr, 1.0, 2 * BLOCK_FRAMES, seed=9)
    long = monte_carlo_fer(tr, 1.0, 3 * BLOCK_FRAMES, seed=9)
    assert long.errors_observed >= short.errors_observed


def test_linear_code_fer_is_independent_of_the_sent_word():
    # for a linear code under BPSK, sending only the all-ones word (the zero
    # codeword) is statistically the same as sending uniformly chosen words
    tr = bpsk_linear_code_trellis(HAMMING_7_4)
    sigma, frames = 0.8, 10**5
    uniform = monte_carlo_fer(tr, sigma, frames, seed=21)
    rng = np.random.default_rng(22)
    words = codebook(tr)
    zero = words[0]
    errs = 0
    for _ in range(frames // 10**4):
        y = zero + rng.normal(0.0, sigma, (10**4, tr.n))
        d = ((y[:, None, :] - words[None, :, :]) ** 2).sum(axis=2)
        errs += int(np.count_nonzero(np.argmin(d, axis=1) != 0))
    p = errs / frames
    se = math.hypot(uniform.stderr, math.sqrt(p * (1 - p) / frames))
    assert abs(uniform.fer - p) <= 4.0 * se


@pytest.mark.parametrize("kwargs", [dict(sigma=0.0, frames=10), dict(sigma=1.0, frames=0)])
def test_argument_checks(kwargs):
    with pytest.raises(ValueError):
        monte_carlo_fer(toy_convolutional(), seed=1, **kwargs)
