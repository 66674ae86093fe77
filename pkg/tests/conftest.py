from __future__ import annotations

import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from mlbounds.trellis import Branch, Stage, Trellis, convolutional_trellis  # noqa: E402

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

AM4 = np.array([-3.0, -1.0, 1.0, 3.0])


def am4_toy_trellis() -> Trellis:
    """3-stage, 2-state trellis with one 4-AM symbol per branch and parallel pairs."""
    s0 = Stage(1, (Branch(0, 0, (-3.0,)), Branch(0, 0, (1.0,)), Branch(0, 1, (-1.0,)), Branch(0, 1, (3.0,))))
    s1 = Stage(
        1,
        (
            Branch(0, 0, (-3.0,)),
            Branch(0, 1, (-1.0,)),
            Branch(1, 0, (1.0,)),
            Branch(1, 1, (3.0,)),
            Branch(1, 0, (-3.0,)),
        ),
    )
    s2 = Stage(1, (Branch(0, 0, (1.0,)), Branch(0, 0, (-1.0,)), Branch(1, 0, (3.0,))))
    return Trellis((s0, s1, s2), 3)


def toy_convolutional() -> Trellis:
    """2-state (memory 1), rate 1/2 code with 3 information bits: 8 codewords."""
    return convolutional_trellis([0b11, 0b01], 3)


@st.composite
def random_layered_trellis(draw, max_states=3, max_stages=4, max_nt=2, integer_labels=True):
    """A valid trellis with random connectivity, parallel branches and labels."""
    n_stages = draw(st.integers(1, max_stages))
    widths = [1] + [draw(st.integers(1, max_states)) for _ in range(n_stages - 1)] + [1]
    label_el = (
        st.integers(-3, 3).map(float)
        if integer_labels
        else st.floats(-3, 3, allow_nan=False, allow_infinity=False)
    )
    stages = []
    n = 0
    for t in range(n_stages):
        nt = draw(st.integers(1, max_nt))
        n += nt
        branches = []
        # a spanning set guarantees no dead ends or unreachable states
        for s in range(widths[t]):
            branches.append((s, draw(st.integers(0, widths[t + 1] - 1))))
        for q in range(widths[t + 1]):
            branches.append((draw(st.integers(0, widths[t] - 1)), q))
        extra = draw(st.integers(0, 2))
        for _ in range(extra):
            branches.append(
                (draw(st.integers(0, widths[t] - 1)), draw(st.integers(0, widths[t + 1] - 1)))
            )
        labelled = [
            Branch(a, b, tuple(draw(label_el) for _ in range(nt))) for a, b in branches
        ]
        stages.append(Stage(nt, tuple(labelled)))
    return Trellis(tuple(stages), n)


@st.composite
def random_convolutional(draw, max_memory=3, max_stages=12):
    b = draw(st.integers(2, 3))
    memory = draw(st.integers(1, max_memory))
    gens = [draw(st.integers(1, 2 ** (memory + 1) - 1)) for _ in range(b)]
    gens[0] |= 1 << memory  # pin the memory so the state count is known
    info = draw(st.integers(1, max_stages - memory))
    label_map = None
    if draw(st.booleans()):
        label_map = draw(
            st.lists(st.integers(-3, 3).map(float), min_size=2**b, max_size=2**b)
        )
    return convolutional_trellis(gens, info, label_map)


@pytest.fixture
def hamming():
    from mlbounds.codes import HAMMING_7_4

    return HAMMING_7_4


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE: list[str] = []


def report(criterion: int, ok: bool, detail: str) -> bool:
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
