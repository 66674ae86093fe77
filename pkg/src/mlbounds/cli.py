"""Command-line front end.

Three subcommands::

    mlbounds spectrum --trellis code.json --out code.spec [--kind triangle]
    mlbounds sweep    --trellis code.json --bounds union,sb,tb,tsb --snr-db 0:8:1
    mlbounds simulate --trellis code.json --snr-db 3 --frames 100000 --seed 1

SNR is ``E_avg / (n σ²)`` in dB, where ``E_avg`` is the mean codeword
energy.  It is not Eb/N0.

Exit status: 0 on success, 1 for usage or input errors, 2 for numerical
failures (bracket violations, size guards).
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import bounds as bd
from .numerics import BracketError
from .simulate import monte_carlo_fer
from .spectrum import (
    DEFAULT_TOLERANCE,
    DistanceSpectrum,
    SpectrumError,
    TriangleSpectrum,
    euclidean_spectrum,
    format_spectrum,
    read_spectra,
    triangle_spectrum,
)
from .trellis import GuardError, TrellisError, average_energy, read_trellis

CSV_HEADER = ["snr_db", "sigma", "union", "sb", "tb", "tsb", "fer", "fer_stderr", "frames"]
BOUND_NAMES = ("union", "sb", "tb", "tsb")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERIC = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; 2 is reserved for numerical failures here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class SweepSpec:
    snr_db_start: float
    snr_db_stop: float
    snr_db_step: float
    bounds: tuple[str, ...]
    simulate_frames: int = 0
    seed: int | None = None

    def __post_init__(self) -> None:
        if not self.snr_db_step > 0:
            raise UsageError("SNR step must be positive")
        if self.snr_db_start > self.snr_db_stop:
            raise UsageError("SNR start must not exceed stop")
        unknown = set(self.bounds) - set(BOUND_NAMES)
        if unknown:
            raise UsageError(f"unknown bound(s): {', '.join(sorted(unknown))}")
        if self.simulate_frames < 0:
            raise UsageError("frames must be nonnegative")
        if not self.bounds and self.simulate_frames == 0:
            raise UsageError("nothing to do: request at least one bound or --frames > 0")
        if self.simulate_frames > 0 and self.seed is None:
            raise UsageError("simulation requires an explicit --seed")

    def points(self) -> list[float]:
        count = math.floor((self.snr_db_stop - self.snr_db_start) / self.snr_db_step + 1e-9) + 1
        return [round(self.snr_db_start + i * self.snr_db_step, 12) for i in range(count)]


def parse_snr_range(text: str) -> tuple[float, float, float]:
    """``START:STOP:STEP`` (inclusive), or a single value."""
    parts = text.split(":")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"bad SNR range {text!r}") from None
    if len(vals) == 1:
        return vals[0], vals[0], 1.0
    if len(vals) == 2:
        return vals[0], vals[1], 1.0
    if len(vals) == 3:
        return vals[0], vals[1], vals[2]
    raise UsageError(f"bad SNR range {text!r}, expected START:STOP:STEP")


def parse_bounds(text: str) -> tuple[str, ...]:
    names = tuple(x.strip().lower() for x in text.split(",") if x.strip())
    if "all" in names:
        return BOUND_NAMES
    return names


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, int):
        return str(x)
    return f"{x:.12g}"


def format_rows(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        w.writerow([_fmt(row.get(k)) for k in CSV_HEADER])
    return buf.getvalue()


def _atomic_write(path: str, text: str) -> None:
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(out: str | None, text: str) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        _atomic_write(out, text)


# ---------------------------------------------------------------------------
# spectrum


def cmd_spectrum(trellis_path: str, output_path: str, tolerance: float = DEFAULT_TOLERANCE, kind: str = "euclidean") -> int:
    trellis = read_trellis(trellis_path)
    if kind == "euclidean":
        spec = euclidean_spectrum(trellis, tolerance)
    elif kind == "triangle":
        spec = triangle_spectrum(trellis, tolerance)
    else:
        raise UsageError(f"unknown spectrum kind {kind!r}")
    _emit(output_path, format_spectrum(spec, avg_energy=average_energy(trellis)))
    print(f"{len(spec.entries)} entries, total mass {spec.total_mass:.12g}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep


@dataclass
class _Inputs:
    n: int
    avg_energy: float
    distance: DistanceSpectrum | None
    triangle: TriangleSpectrum | None
    trellis: object | None


def _gather_inputs(args, needs: set[str]) -> _Inputs:
    trellis = read_trellis(args.trellis) if args.trellis else None
    distance = triangle = None
    avg = args.avg_energy
    n_seen: dict[str, int] = {}
    for path in filter(None, (args.spectrum, args.triangle_spectrum)):
        sf = read_spectra(path)
        n_seen[path] = sf.n
        distance = distance or sf.distance
        if path == args.triangle_spectrum or triangle is None:
            triangle = sf.triangle or triangle
        if avg is None and sf.avg_energy is not None:
            avg = sf.avg_energy
    if args.triangle_spectrum and triangle is None:
        raise UsageError(f"{args.triangle_spectrum} has no B lines")
    if trellis is not None:
        n_seen[args.trellis] = trellis.n
        if avg is None:
            avg = average_energy(trellis)
    if len(set(n_seen.values())) > 1:
        raise UsageError("inputs disagree on n: " + ", ".join(f"{p}: n={v}" for p, v in n_seen.items()))

    if "distance" in needs and distance is None:
        if triangle is not None:
            distance = triangle.marginal()
        elif trellis is not None:
            distance = euclidean_spectrum(trellis)
        else:
            raise UsageError("union/sb need a distance spectrum: pass --spectrum or --trellis")
    if "triangle" in needs and triangle is None:
        if trellis is None:
            raise UsageError("tb/tsb need a triangle spectrum: pass --triangle-spectrum or --trellis")
        triangle = triangle_spectrum(trellis)
    if "trellis" in needs and trellis is None:
        raise UsageError("simulation needs --trellis")
    if avg is None and triangle is not None:
        avg = triangle.average_energy()
    if avg is None:
        raise UsageError("average codeword energy unknown: pass --avg-energy or --trellis")
    if not n_seen:
        raise UsageError("no input: pass --trellis, --spectrum or --triangle-spectrum")
    return _Inputs(next(iter(n_seen.values())), avg, distance, triangle, trellis)


def _sweep_point(snr_db: float, sweep: SweepSpec, inp: _Inputs, q: bd.QuadratureConfig) -> dict:
    ch = bd.ChannelParams.from_snr_db(snr_db, inp.n, inp.avg_energy)
    row: dict = {"snr_db": snr_db, "sigma": ch.sigma}
    if "union" in sweep.bounds:
        row["union"] = bd.union_bound(inp.distance, ch).value
    if "sb" in sweep.bounds:
        row["sb"] = bd.sphere_bound_general(inp.distance, ch, q).value
    if "tb" in sweep.bounds:
        row["tb"] = bd.tangential_bound_general(inp.triangle, ch, q).value
    if "tsb" in sweep.bounds:
        row["tsb"] = bd.tangential_sphere_bound_general(inp.triangle, ch, q).value
    if sweep.simulate_frames:
        est = monte_carlo_fer(inp.trellis, ch.sigma, sweep.simulate_frames, sweep.seed)
        row.update(fer=est.fer, fer_stderr=est.stderr, frames=est.frames)
    return row


def run_sweep(sweep: SweepSpec, inp: _Inputs, q: bd.QuadratureConfig, workers: int = 1) -> list[dict]:
    points = sweep.points()
    if workers <= 1:
        return [_sweep_point(s, sweep, inp, q) for s in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map preserves input order, so rows come out in SNR order
        return list(pool.map(lambda s: _sweep_point(s, sweep, inp, q), points))


def cmd_sweep(args) -> int:
    start, stop, step = parse_snr_range(args.snr_db)
    sweep = SweepSpec(start, stop, step, parse_bounds(args.bounds), args.frames, args.seed)
    needs = set()
    if {"union", "sb"} & set(sweep.bounds):
        needs.add("distance")
    if {"tb", "tsb"} & set(sweep.bounds):
        needs.add("triangle")
    if sweep.simulate_frames:
        needs.add("trellis")
    inp = _gather_inputs(args, needs)
    q = bd.QuadratureConfig(relative_tolerance=args.tolerance)
    rows = run_sweep(sweep, inp, q, args.workers)
    _emit(args.out, format_rows(rows))
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    if args.frames is None or args.frames < 1:
        raise UsageError("--frames must be a positive integer")
    if args.seed is None:
        raise UsageError("simulation requires an explicit --seed")
    if (args.sigma is None) == (args.snr_db is None):
        raise UsageError("give exactly one of --sigma and --snr-db")
    trellis = read_trellis(args.trellis)
    avg = args.avg_energy if args.avg_energy is not None else average_energy(trellis)
    if args.sigma is not None:
        ch = bd.ChannelParams(args.sigma, trellis.n, avg)
    else:
        try:
            snr_db = float(args.snr_db)
        except ValueError:
            raise UsageError(f"--snr-db takes a single value here, got {args.snr_db!r}") from None
        ch = bd.ChannelParams.from_snr_db(snr_db, trellis.n, avg)
    est = monte_carlo_fer(trellis, ch.sigma, args.frames, args.seed, workers=args.workers)
    row = {"snr_db": ch.snr_db, "sigma": ch.sigma, "fer": est.fer, "fer_stderr": est.stderr, "frames": est.frames}
    text = format_rows([row])
    if args.out and args.out != "-":
        path = Path(args.out)
        if path.exists() and path.stat().st_size > 0:
            with path.open("a") as fh:
                fh.write(text.split("\n", 1)[1])
        else:
            path.write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mlbounds", description="ML decoding error bounds for trellis codes over AWGN.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("spectrum", help="compute a distance spectrum from a trellis file")
    s.add_argument("--trellis", required=True, metavar="PATH")
    s.add_argument("--out", required=True, metavar="PATH")
    s.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE, help="key quantization tolerance")
    s.add_argument("--kind", choices=("euclidean", "triangle"), default="euclidean")

    w = sub.add_parser("sweep", help="evaluate bounds (and optionally simulate) over an SNR grid")
    w.add_argument("--trellis", metavar="PATH")
    w.add_argument("--spectrum", metavar="PATH")
    w.add_argument("--triangle-spectrum", metavar="PATH")
    w.add_argument("--bounds", default="union,sb,tb,tsb", metavar="LIST")
    w.add_argument("--snr-db", required=True, metavar="START:STOP:STEP")
    w.add_argument("--frames", type=int, default=0, metavar="N")
    w.add_argument("--seed", type=int, metavar="N")
    w.add_argument("--tolerance", type=float, default=1e-8, help="quadrature relative tolerance")
    w.add_argument("--avg-energy", type=float, metavar="E")
    w.add_argument("--workers", type=int, default=1)
    w.add_argument("--out", metavar="PATH")

    m = sub.add_parser("simulate", help="Monte-Carlo ML frame-error rate at one channel point")
    m.add_argument("--trellis", required=True, metavar="PATH")
    m.add_argument("--sigma", type=float)
    m.add_argument("--snr-db", metavar="DB")
    m.add_argument("--frames", type=int, required=True, metavar="N")
    m.add_argument("--seed", type=int, metavar="N")
    m.add_argument("--avg-energy", type=float, metavar="E")
    m.add_argument("--workers", type=int, default=1)
    m.add_argument("--out", metavar="PATH")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "spectrum":
            return cmd_spectrum(args.trellis, args.out, args.tolerance, args.kind)
        if args.command == "sweep":
            return cmd_sweep(args)
        return cmd_simulate(args)
    except (BracketError, GuardError, FloatingPointError) as exc:
        print(f"mlbounds: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, TrellisError, SpectrumError, bd.BoundError, ValueError, OSError) as exc:
        print(f"mlbounds: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
