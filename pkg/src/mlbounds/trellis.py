"""Trellis representation of general codes.

A code of length ``n`` with ``M`` codewords is a staged multigraph.  Stage
``t`` carries ``n_t`` real symbols per branch, every path from the root
state to the toor state spells one codeword, and ``sum(n_t) == n``.  The
first stage starts in state 0 and the last stage ends in state 0.

Trellis values are immutable; every function here is pure.
"""

from __future__ import annotations

import json
import json.decoder
import json.scanner
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

DEFAULT_PATH_LIMIT = 2**20


class TrellisError(ValueError):
    """Raised for malformed trellises or trellis files."""


class GuardError(ValueError):
    """Raised when a computation is refused because it would exceed a size guard."""


@dataclass(frozen=True)
class Branch:
    from_state: int
    to_state: int
    label: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "label", tuple(float(x) for x in self.label))


@dataclass(frozen=True)
class Stage:
    """One trellis section: ``nt`` symbols per branch and its branch list.

    Branch order is kept as given; the branch index is what breaks ties
    in decoding and orders enumeration.
    """

    nt: int
    branches: tuple[Branch, ...]
    from_states: np.ndarray = field(init=False, repr=False, compare=False)
    to_states: np.ndarray = field(init=False, repr=False, compare=False)
    labels: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        branches = tuple(
            b if isinstance(b, Branch) else Branch(*b) for b in self.branches
        )
        object.__setattr__(self, "branches", branches)
        frm = np.array([b.from_state for b in branches], dtype=np.int64)
        to = np.array([b.to_state for b in branches], dtype=np.int64)
        if all(len(b.label) == self.nt for b in branches):
            labels = np.array([b.label for b in branches], dtype=float)
            labels = labels.reshape(len(branches), self.nt)
        else:
            # ragged stage, only reachable through validate()
            labels = np.full((len(branches), self.nt), np.nan)
        for arr in (frm, to, labels):
            arr.setflags(write=False)
        object.__setattr__(self, "from_states", frm)
        object.__setattr__(self, "to_states", to)
        object.__setattr__(self, "labels", labels)

    @property
    def num_from_states(self) -> int:
        return int(self.from_states.max()) + 1 if len(self.branches) else 0

    @property
    def num_to_states(self) -> int:
        return int(self.to_states.max()) + 1 if len(self.branches) else 0


@dataclass(frozen=True)
class Trellis:
    stages: tuple[Stage, ...]
    n: int
    declared_codeword_count: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "stages", tuple(self.stages))

    @property
    def num_stages(self) -> int:
        return len(self.stages)

    def check(self) -> None:
        """Raise :class:`TrellisError` listing every violation, if any."""
        report = validate(self)
        if report:
            raise TrellisError("invalid trellis:\n  " + "\n  ".join(map(str, report)))


@dataclass(frozen=True)
class Codeword:
    samples: tuple[float, ...]
    energy: float

    @classmethod
    def from_samples(cls, samples: Iterable[float]) -> "Codeword":
        s = tuple(float(x) for x in samples)
        return cls(s, math.fsum(x * x for x in s))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.samples, dtype=dtype)


@dataclass(frozen=True)
class Violation:
    """A single invariant violation; ``stage``/``branch`` locate it when known."""

    message: str
    stage: int | None = None
    branch: int | None = None

    def __str__(self) -> str:
        where = []
        if self.stage is not None:
            where.append(f"stage {self.stage}")
        if self.branch is not None:
            where.append(f"branch {self.branch}")
        return (", ".join(where) + ": " if where else "") + self.message


def _count_paths_exact(trellis: Trellis) -> int:
    # python ints: path counts overflow int64 for long trellises
    counts = {0: 1}
    for stage in trellis.stages:
        nxt: dict[int, int] = {}
        for b in stage.branches:
            c = counts.get(b.from_state, 0)
            if c:
                nxt[b.to_state] = nxt.get(b.to_state, 0) + c
        counts = nxt
    return counts.get(0, 0)


def validate(trellis: Trellis) -> list[Violation]:
    """Return every invariant violation of ``trellis``; empty when valid."""
    report: list[Violation] = []
    stages = trellis.stages
    if not stages:
        return [Violation("trellis has no stages")]
    if trellis.n < 1:
        report.append(Violation(f"n must be positive, got {trellis.n}"))
    total = 0
    for t, stage in enumerate(stages):
        total += stage.nt
        if stage.nt < 1:
            report.append(Violation(f"symbol count nt={stage.nt} must be positive", t))
        if not stage.branches:
            report.append(Violation("stage has no branches", t))
        for i, b in enumerate(stage.branches):
            if len(b.label) != stage.nt:
                report.append(
                    Violation(f"label length {len(b.label)} != nt={stage.nt}", t, i)
                )
            if not all(math.isfinite(x) for x in b.label):
                report.append(Violation("label has non-finite entries", t, i))
            if b.from_state < 0 or b.to_state < 0:
                report.append(Violation("state indices must be nonnegative", t, i))
            if t == 0 and b.from_state != 0:
                report.append(
                    Violation(f"first-stage branch starts in state {b.from_state}, not 0", t, i)
                )
            if t == len(stages) - 1 and b.to_state != 0:
                report.append(
                    Violation(f"last-stage branch ends in state {b.to_state}, not 0", t, i)
                )
    if total != trellis.n:
        report.append(Violation(f"Σ n_t ≠ n: stage symbol counts sum to {total}, n={trellis.n}"))

    for t in range(len(stages) - 1):
        here, nxt = stages[t], stages[t + 1]
        leaving = {b.from_state for b in nxt.branches}
        arriving = {b.to_state for b in here.branches}
        for i, b in enumerate(here.branches):
            if b.to_state not in leaving:
                report.append(
                    Violation(
                        f"dead end: state {b.to_state} has no branch in stage {t + 1}", t, i
                    )
                )
        for i, b in enumerate(nxt.branches):
            if b.from_state not in arriving:
                report.append(
                    Violation(
                        f"unreachable: state {b.from_state} is not entered by stage {t}",
                        t + 1,
                        i,
                    )
                )

    if trellis.declared_codeword_count is not None and not report:
        m = _count_paths_exact(trellis)
        if m != trellis.declared_codeword_count:
            report.append(
                Violation(
                    f"trellis has {m} paths, declared codeword count is "
                    f"{trellis.declared_codeword_count}"
                )
            )
    return report


def count_paths(trellis: Trellis) -> int:
    """Number of root-to-toor paths, i.e. the codeword count M."""
    return _count_paths_exact(trellis)


def enumerate_paths(
    trellis: Trellis, limit: int = DEFAULT_PATH_LIMIT
) -> list[tuple[int, ...]]:
    """All paths as tuples of per-stage branch indices, in lexicographic order."""
    m = _count_paths_exact(trellis)
    if m > limit:
        raise GuardError(f"trellis has {m} paths, above the enumeration limit {limit}")

    # backward reachability prunes branches that cannot reach the toor
    alive_to: list[set[int]] = [set() for _ in range(trellis.num_stages + 1)]
    alive_to[-1] = {0}
    by_state: list[dict[int, list[int]]] = []
    for t in range(trellis.num_stages - 1, -1, -1):
        stage = trellis.stages[t]
        table: dict[int, list[int]] = {}
        for i, b in enumerate(stage.branches):
            if b.to_state in alive_to[t + 1]:
                table.setdefault(b.from_state, []).append(i)
        alive_to[t] = set(table)
        by_state.append(table)
    by_state.reverse()

    paths: list[tuple[int, ...]] = []
    n_stages = trellis.num_stages

    def walk(t: int, state: int, prefix: list[int]) -> None:
        if t == n_stages:
            paths.append(tuple(prefix))
            return
        stage = trellis.stages[t]
        for i in by_state[t].get(state, ()):
            prefix.append(i)
            walk(t + 1, stage.branches[i].to_state, prefix)
            prefix.pop()

    walk(0, 0, [])
    return paths


def path_samples(trellis: Trellis, path: Sequence[int]) -> np.ndarray:
    """Concatenated branch labels along ``path``."""
    return np.concatenate(
        [stage.labels[i] for stage, i in zip(trellis.stages, path)]
    )


def enumerate_codewords(
    trellis: Trellis, limit: int = DEFAULT_PATH_LIMIT
) -> list[Codeword]:
    """Every codeword of ``trellis`` by depth-first traversal.

    Order is lexicographic in the branch index of each stage.  Raises
    :class:`GuardError` when the trellis has more than ``limit`` paths.
    """
    return [
        Codeword.from_samples(path_samples(trellis, p))
        for p in enumerate_paths(trellis, limit)
    ]


def trivial_trellis(codewords: Sequence[Sequence[float]]) -> Trellis:
    """One-stage trellis with one parallel branch per codeword."""
    if len(codewords) == 0:
        raise TrellisError("a code needs at least one codeword")
    rows = [tuple(float(x) for x in np.asarray(c, dtype=float).ravel()) for c in codewords]
    n = len(rows[0])
    if n < 1:
        raise TrellisError("codewords must have length >= 1")
    for i, r in enumerate(rows):
        if len(r) != n:
            raise TrellisError(f"codeword {i} has length {len(r)}, expected {n}")
    stage = Stage(n, tuple(Branch(0, 0, r) for r in rows))
    return Trellis((stage,), n, len(rows))


def bpsk_linear_code_trellis(generator_matrix, max_dimension: int = 20) -> Trellis:
    """Trivial trellis of the BPSK image (``s = 1 - 2c``) of a binary linear code.

    Codewords are listed in the order of the message integer whose bit ``i``
    selects row ``i`` of the generator matrix.
    """
    g = np.asarray(generator_matrix)
    if g.ndim != 2:
        raise TrellisError("generator matrix must be two-dimensional")
    k, n = g.shape
    if k < 1 or n < k:
        raise TrellisError(f"need 1 <= k <= n, got k={k}, n={n}")
    if not np.isin(g, (0, 1)).all():
        raise TrellisError("generator matrix entries must be 0 or 1")
    if k > max_dimension:
        raise GuardError(f"k={k} exceeds the enumeration guard ({max_dimension})")
    words = linear_code_words(g)
    return trivial_trellis(1.0 - 2.0 * words)


def linear_code_words(generator_matrix) -> np.ndarray:
    """All ``2**k`` codewords of the row space, shape ``(2**k, n)``, dtype uint8."""
    g = np.asarray(generator_matrix, dtype=np.uint8) & 1
    k = g.shape[0]
    msgs = (np.arange(2**k)[:, None] >> np.arange(k)[None, :]) & 1
    return (msgs.astype(np.int64) @ g.astype(np.int64) % 2).astype(np.uint8)


def average_energy(trellis: Trellis) -> float:
    """Mean codeword energy under equiprobable codewords.

    Computed by one forward pass that carries, per state, the number of
    partial paths and the sum of their energies; no codeword is enumerated.
    """
    counts = np.ones(1)
    esums = np.zeros(1)
    for stage in trellis.stages:
        size = max(stage.num_to_states, 1)
        c_new = np.zeros(size)
        e_new = np.zeros(size)
        c_in = counts[stage.from_states]
        e_in = esums[stage.from_states]
        branch_energy = np.einsum("ij,ij->i", stage.labels, stage.labels)
        np.add.at(c_new, stage.to_states, c_in)
        np.add.at(e_new, stage.to_states, e_in + c_in * branch_energy)
        counts, esums = c_new, e_new
    if counts[0] == 0:
        raise TrellisError("trellis has no complete path")
    return float(esums[0] / counts[0])


def convolutional_trellis(
    generators: Sequence[int],
    info_length: int,
    label_map=None,
) -> Trellis:
    """Terminated trellis of a rate-1/b feedforward convolutional encoder.

    Parameters
    ----------
    generators : sequence of int
        One tap polynomial per output bit; bit ``i`` of a polynomial taps
        the input delayed by ``i`` steps (bit 0 is the current input).
    info_length : int
        Number of information bits.  ``memory`` zero tail bits follow, so
        the trellis has ``info_length + memory`` stages and ``2**info_length``
        paths.
    label_map : array_like, optional
        Shape ``(2**b, nt)``.  Row ``j`` is the real label emitted for the
        output bit pattern ``j`` (output bit ``i`` is bit ``i`` of ``j``).
        Defaults to BPSK, one symbol ``1 - 2c`` per output bit.

    Returns
    -------
    Trellis
        States are renumbered densely per stage in increasing register order.
    """
    gens = [int(g) for g in generators]
    if not gens or any(g <= 0 for g in gens):
        raise TrellisError("generators must be positive tap polynomials")
    if info_length < 1:
        raise TrellisError("info_length must be positive")
    b = len(gens)
    memory = max(g.bit_length() for g in gens) - 1
    if label_map is None:
        patterns = np.arange(2**b)[:, None] >> np.arange(b)[None, :] & 1
        label_map = 1.0 - 2.0 * patterns
    label_map = np.asarray(label_map, dtype=float)
    if label_map.ndim == 1:
        label_map = label_map[:, None]
    if label_map.shape[0] != 2**b:
        raise TrellisError(f"label_map needs {2**b} rows, got {label_map.shape[0]}")
    nt = label_map.shape[1]
    mask = (1 << memory) - 1

    n_stages = info_length + memory
    raw_states = [[0]]
    raw_branches = []
    for t in range(n_stages):
        inputs = (0, 1) if t < info_length else (0,)
        rows = []
        for s in raw_states[-1]:
            for u in inputs:
                reg = (s << 1) | u
                out = 0
                for j, g in enumerate(gens):
                    out |= (bin(g & reg).count("1") & 1) << j
                rows.append((s, reg & mask, out))
        raw_branches.append(rows)
        raw_states.append(sorted({r[1] for r in rows}))

    stages = []
    for t, rows in enumerate(raw_branches):
        src = {s: i for i, s in enumerate(raw_states[t])}
        dst = {s: i for i, s in enumerate(raw_states[t + 1])}
        stages.append(
            Stage(nt, tuple(Branch(src[s], dst[q], label_map[o]) for s, q, o in rows))
        )
    return Trellis(tuple(stages), nt * n_stages, 2**info_length)


# ---------------------------------------------------------------------------
# file format


class _PositionedDict(dict):
    pos: int = 0


def _positioned_decoder() -> json.JSONDecoder:
    decoder = json.JSONDecoder()

    def parse_object(s_and_end, strict, scan_once, object_hook, object_pairs_hook, memo=None):
        start = s_and_end[1] - 1
        obj, end = json.decoder.JSONObject(
            s_and_end, strict, scan_once, object_hook, object_pairs_hook, memo
        )
        out = _PositionedDict(obj)
        out.pos = start
        return out, end

    decoder.parse_object = parse_object
    decoder.scan_once = json.scanner.py_make_scanner(decoder)
    return decoder


def _line_of(text: str, pos: int) -> int:
    return text.count("\n", 0, pos) + 1


def parse_trellis(text: str, source: str = "<string>") -> Trellis:
    """Parse the textual trellis format; raise :class:`TrellisError` with line numbers."""
    try:
        doc, end = _positioned_decoder().raw_decode(text.lstrip())
        offset = len(text) - len(text.lstrip())
    except json.JSONDecodeError as exc:
        raise TrellisError(f"{source}:{exc.lineno}: malformed file: {exc.msg}") from None

    def line(obj) -> int:
        return _line_of(text, getattr(obj, "pos", 0) + offset)

    def fail(obj, msg: str):
        raise TrellisError(f"{source}:{line(obj)}: {msg}")

    if not isinstance(doc, dict):
        raise TrellisError(f"{source}:1: top level must be an object")
    if not isinstance(doc.get("n"), int) or isinstance(doc.get("n"), bool):
        fail(doc, "field 'n' must be an integer")
    if not isinstance(doc.get("stages"), list):
        fail(doc, "field 'stages' must be an array")

    stage_lines: list[int] = []
    branch_lines: list[list[int]] = []
    stages = []
    for t, st in enumerate(doc["stages"]):
        if not isinstance(st, dict):
            fail(doc, f"stage {t} must be an object")
        nt = st.get("nt")
        if not isinstance(nt, int) or isinstance(nt, bool):
            fail(st, f"stage {t}: field 'nt' must be an integer")
        if not isinstance(st.get("branches"), list):
            fail(st, f"stage {t}: field 'branches' must be an array")
        stage_lines.append(line(st))
        lines_here = []
        branches = []
        for i, br in enumerate(st["branches"]):
            if not isinstance(br, dict):
                fail(st, f"stage {t}, branch {i}: must be an object")
            frm, to, lab = br.get("from"), br.get("to"), br.get("label")
            if not all(isinstance(v, int) and not isinstance(v, bool) for v in (frm, to)):
                fail(br, f"stage {t}, branch {i}: 'from' and 'to' must be integers")
            if not isinstance(lab, list) or not all(
                isinstance(x, (int, float)) and not isinstance(x, bool) for x in lab
            ):
                fail(br, f"stage {t}, branch {i}: 'label' must be an array of numbers")
            lines_here.append(line(br))
            branches.append(Branch(frm, to, tuple(lab)))
        branch_lines.append(lines_here)
        stages.append(Stage(nt, tuple(branches)))

    trellis = Trellis(tuple(stages), doc["n"], doc.get("codewords"))
    report = validate(trellis)
    if report:
        msgs = []
        for v in report:
            if v.stage is not None and v.branch is not None:
                ln = branch_lines[v.stage][v.branch]
            elif v.stage is not None:
                ln = stage_lines[v.stage]
            else:
                ln = line(doc)
            msgs.append(f"{source}:{ln}: {v}")
        raise TrellisError("\n".join(msgs))
    return trellis


def read_trellis(path) -> Trellis:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise TrellisError(f"cannot read {path}: {exc.strerror}") from None
    return parse_trellis(text, str(path))


def format_trellis(trellis: Trellis) -> str:
    """Serialize to the textual trellis format, one branch per line."""
    out = ["{", f'  "n": {trellis.n},']
    if trellis.declared_codeword_count is not None:
        out.append(f'  "codewords": {trellis.declared_codeword_count},')
    out.append('  "stages": [')
    for t, stage in enumerate(trellis.stages):
        out.append(f'    {{"nt": {stage.nt}, "branches": [')
        for i, b in enumerate(stage.branches):
            lab = ", ".join(repr(float(x)) for x in b.label)
            sep = "," if i < len(stage.branches) - 1 else ""
            out.append(
                f'      {{"from": {b.from_state}, "to": {b.to_state}, "label": [{lab}]}}{sep}'
            )
        out.append("    ]}" + ("," if t < trellis.num_stages - 1 else ""))
    out.append("  ]")
    out.append("}")
    return "\n".join(out) + "\n"


def write_trellis(trellis: Trellis, path) -> None:
    Path(path).write_text(format_trellis(trellis))


def product_size(trellis: Trellis) -> int:
    """Largest number of state pairs of any stage of the product trellis."""
    sizes = [1]
    for stage in trellis.stages:
        sizes.append(stage.num_from_states**2)
        sizes.append(stage.num_to_states**2)
    return max(sizes)
