"""Command-line front end: subcommand routing, CSV/JSON emission, and run
manifests.

Every run writes its table to --out (or stdout), plus a sidecar manifest
holding the command line, seed, version, wall time, and an FNV-1a checksum
of the emitted bytes; replaying the manifest's command reproduces the
checksum.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .harness import InvalidParameterError, ResourceError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def format_table(header, rows, fmt: str) -> bytes:
    """CSV ('.' decimal, newline-terminated, UTF-8, header row) or JSON
    (array of objects keyed by the header)."""
    if not rows:
        raise InvalidParameterError("refusing to emit an empty table")
    if fmt == "csv":
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(_cell(v) for v in row))
        return ("\n".join(lines) + "\n").encode("utf-8")
    if fmt == "json":
        payload = [dict(zip(header, row)) for row in rows]
        return (json.dumps(payload, indent=1, sort_keys=True) + "\n").encode("utf-8")
    raise InvalidParameterError(f"unknown format {fmt!r}")


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit(header, rows, fmt: str, out: str | None, manifest: dict | None = None) -> int:
    """Write the table, write the sidecar manifest, return the checksum."""
    data = format_table(header, rows, fmt)
    checksum = fnv1a64(data)
    if out is None or out == "-":
        sys.stdout.write(data.decode("utf-8"))
    else:
        path = Path(out)
        path.write_bytes(data)
        if manifest is not None:
            manifest = dict(manifest, checksum=f"{checksum:016x}")
            Path(str(path) + ".manifest.json").write_text(
                json.dumps(manifest, indent=1, sort_keys=True) + "\n", encoding="utf-8"
            )
    return checksum


def _parse_config(path: str) -> dict:
    """Flat key=value lines; blank lines and #-comments are ignored."""
    out = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InvalidParameterError(f"config line without '=': {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _float_grid(spec: str) -> list[float]:
    """Either a comma list '0.1,0.2' or a range 'start:stop:count'."""
    if ":" in spec:
        start, stop, count = spec.split(":")
        start, stop, count = float(start), float(stop), int(count)
        if count < 2:
            return [start]
        step = (stop - start) / (count - 1)
        return [start + i * step for i in range(count)]
    return [float(tok) for tok in spec.split(",") if tok]


def _parse_mu(spec: str):
    from .ibm import LetterLaw

    if spec.startswith("geometric:"):
        return LetterLaw.geometric(float(spec.split(":", 1)[1]))
    if spec.startswith("file:"):
        masses = {}
        for key, value in _parse_config(spec.split(":", 1)[1]).items():
            letter = math.inf if key in ("inf", "infinity") else int(key)
            masses[letter] = float(value)
        return LetterLaw.finite(masses)
    raise InvalidParameterError(f"cannot parse letter law {spec!r}")


def _parse_charge_law(spec: str):
    from . import mgs

    if spec == "shifted-exp":
        return mgs.shifted_exponential()
    if spec.startswith("bernoulli:"):
        return mgs.bernoulli_law(float(spec.split(":", 1)[1]))
    if spec.startswith("two-atom:"):
        p, x = spec.split(":", 1)[1].split(",")
        return mgs.two_atom_law(float(p), float(x))
    raise InvalidParameterError(f"cannot parse charge law {spec!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lpp",
        description="Growth constants of directed random graphs: simulate, bound, estimate.",
    )
    parser.add_argument("--seed", type=int, default=0, help="base seed for all streams")
    parser.add_argument("--replicas", type=int, default=100, help="Monte Carlo replicas")
    parser.add_argument("--out", default=None, help="output path ('-' for stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--config", default=None, help="flat key=value defaults file")
    sub = parser.add_subparsers(dest="command", required=True)

    graph = sub.add_parser("graph", help="window sampling, paths, skeleton, CLT")
    gsub = graph.add_subparsers(dest="subcommand", required=True)
    g_sample = gsub.add_parser("sample")
    g_sample.add_argument("--n", type=int, required=True)
    g_sample.add_argument("--p", type=float, required=True)
    g_long = gsub.add_parser("longest")
    g_long.add_argument("--n", type=int, required=True)
    g_long.add_argument("--p", type=float, required=True)
    g_clt = gsub.add_parser("clt")
    g_clt.add_argument("--n", type=int, default=20000)
    g_clt.add_argument("--p", type=float, required=True)
    g_gaps = gsub.add_parser("gaps")
    g_gaps.add_argument("--p", type=float, required=True)
    g_gaps.add_argument("--nmax", type=int, default=6)
    g_skel = gsub.add_parser("skeleton")
    g_skel.add_argument("--n", type=int, required=True)
    g_skel.add_argument("--p", type=float, required=True)
    g_skel.add_argument("--trim", type=int, default=None)
    g_heavy = gsub.add_parser("heavy")
    g_heavy.add_argument("--s", type=float, required=True)
    g_heavy.add_argument("--sizes", default="256,512,1024,2048,4096")

    euler = sub.add_parser("euler", help="skeleton rate and partitions")
    esub = euler.add_subparsers(dest="subcommand", required=True)
    e_rate = esub.add_parser("rate")
    e_rate.add_argument("--p", required=True, help="grid: comma list or start:stop:count")
    e_part = esub.add_parser("partitions")
    e_part.add_argument("--nmax", type=int, default=20)

    ibm = sub.add_parser("ibm", help="bin-model simulation")
    isub = ibm.add_subparsers(dest="subcommand", required=True)
    i_speed = isub.add_parser("speed")
    i_speed.add_argument("--mu", required=True, help="geometric:<p> or file:<path>")
    i_speed.add_argument("--steps", type=int, default=10**6)
    i_front = isub.add_parser("front")
    i_front.add_argument("--p", type=float, required=True)
    i_front.add_argument("--steps", type=int, default=10**6)

    words = sub.add_parser("words", help="exact word combinatorics")
    wsub = words.add_subparsers(dest="subcommand", required=True)
    w_an = wsub.add_parser("an")
    w_an.add_argument("--nmax", type=int, default=8)
    w_cls = wsub.add_parser("classify")
    w_cls.add_argument("word", help="letters in application order, e.g. 1,2,2")
    w_ser = wsub.add_parser("series")
    w_ser.add_argument("--p", type=float, required=True)
    w_ser.add_argument("--hmax", type=int, default=6)

    bounds = sub.add_parser("bounds", help="exact sandwich around C(p)")
    bounds.add_argument("--k", type=int, default=6)
    bounds.add_argument("--p", required=True, help="grid: comma list or start:stop:count")

    pwit = sub.add_parser("pwit", help="tree growth and sparse laws")
    psub = pwit.add_subparsers(dest="subcommand", required=True)
    p_sim = psub.add_parser("sim")
    p_sim.add_argument("--tmax", type=float, default=3.0)
    p_brw = psub.add_parser("brw")
    p_brw.add_argument("--generations", type=int, default=500)
    p_brw.add_argument("--beam", type=int, default=1000)
    p_cpl = psub.add_parser("coupled")
    p_cpl.add_argument("--p", type=float, required=True)
    p_cpl.add_argument("--steps", type=int, default=10000)
    p_sparse = psub.add_parser("sparse")
    p_sparse.add_argument("--n", type=int, required=True)
    p_sparse.add_argument("--p", type=float, required=True)

    shortest = sub.add_parser("shortest", help="minimal path length law")
    shortest.add_argument("--n", type=int, required=True)
    shortest.add_argument("--p", type=float, required=True)

    charged = sub.add_parser("charged", help="two-weights model")
    csub = charged.add_subparsers(dest="subcommand", required=True)
    c_est = csub.add_parser("estimate")
    c_est.add_argument("--p", type=float, required=True)
    c_est.add_argument("--x", required=True, help="a rational, or -inf")
    c_est.add_argument("--n", type=int, default=1000)
    c_wit = csub.add_parser("witness")
    c_wit.add_argument("--x", required=True)
    c_ver = csub.add_parser("verify")
    c_ver.add_argument("--x", required=True)
    c_ver.add_argument("--graph", default=None, help="JSON edge list (default: built witness)")
    c_scale = csub.add_parser("scaling")
    c_scale.add_argument("--p", type=float, required=True)
    c_scale.add_argument("--x", type=float, required=True)
    c_scale.add_argument("--n", type=int, default=1000)

    mgs = sub.add_parser("mgs", help="perfect simulation of C(F)")
    msub = mgs.add_subparsers(dest="subcommand", required=True)
    m_est = msub.add_parser("estimate")
    m_est.add_argument("--dist", required=True, help="shifted-exp | bernoulli:<p> | two-atom:<p>,<x>")
    m_est.add_argument("--ell", type=float, default=None)
    m_est.add_argument("--n", type=int, default=10000)
    m_cpx = msub.add_parser("complexity")
    m_cpx.add_argument("--dist", required=True)
    m_cpx.add_argument("--ells", default="0.3,0.5,0.7,0.9")
    m_cpx.add_argument("--n", type=int, default=2000)
    m_gr = msub.add_parser("glynn-rhee")
    m_gr.add_argument("--p", type=float, default=0.5, help="level law decay ratio")
    m_gr.add_argument("--n", type=int, default=2000)

    return parser


def _run(args) -> tuple[list[str], list[tuple]]:
    cmd = (args.command, getattr(args, "subcommand", None))
    seed, reps = args.seed, args.replicas

    if cmd == ("euler", "rate"):
        from .euler import skeleton_rate

        rows = []
        for p in _float_grid(args.p):
            lam = skeleton_rate(p)
            rows.append((p, lam, math.inf if lam == 0 else 1.0 / lam))
        return ["p", "lambda", "inv_lambda"], rows

    if cmd == ("euler", "partitions"):
        from .euler import partition_numbers

        return ["n", "partitions"], list(enumerate(partition_numbers(args.nmax), start=1))

    if cmd == ("words", "an"):
        from .words import a_coefficients

        return ["n", "a_n"], list(enumerate(a_coefficients(args.nmax)))

    if cmd == ("words", "classify"):
        from .words import Word, classify, coupling_number, is_triangular

        letters = tuple(int(t) for t in args.word.split(","))
        w = Word(letters)
        return (
            ["word", "class", "triangular", "coupling_number", "height"],
            [(args.word, classify(w), is_triangular(w), coupling_number(w), w.height)],
        )

    if cmd == ("words", "series"):
        from .words import speed_series_lower

        rows = [(h, speed_series_lower(args.p, h)) for h in range(args.hmax + 1)]
        return ["h_max", "lower_series"], rows

    if cmd == ("bounds", None):
        from .chainbounds import bounds_C

        rows = []
        for p in _float_grid(args.p):
            lo, hi = bounds_C(p, args.k)
            rows.append((p, lo, hi, hi - lo))
        return ["p", "lower", "upper", "gap"], rows

    if cmd == ("graph", "sample"):
        from .graph import EdgeLaw, sample_window
        from .harness import RngStream

        w = sample_window(args.n, EdgeLaw.bernoulli(args.p), RngStream(seed))
        rows = [
            (i, j) for i in range(args.n) for j in range(i + 1, args.n + 1) if w.has_edge(i, j)
        ]
        return ["i", "j"], rows

    if cmd == ("graph", "longest"):
        from .graph import window_longest_via_bins
        from .harness import MonteCarloSummary, RngStream

        vals = [
            window_longest_via_bins(args.n, args.p, RngStream(seed, r).generator()) / args.n
            for r in range(reps)
        ]
        s = MonteCarloSummary.from_values(vals)
        return (
            ["n", "p", "reps", "mean", "ci95"],
            [(args.n, args.p, reps, s.mean, s.ci95_halfwidth)],
        )

    if cmd == ("graph", "clt"):
        from .graph import clt_experiment

        rep = clt_experiment(args.p, args.n, reps, seed)
        return (
            ["p", "n", "reps", "sigma2", "ks_stat", "ks_threshold", "c_hat", "lambda_hat"],
            [(args.p, args.n, reps, rep.sigma2, rep.ks_stat, rep.ks_threshold, rep.c_hat, rep.lambda_hat)],
        )

    if cmd == ("graph", "gaps"):
        from .graph import skeleton_gap_pmf

        rows = skeleton_gap_pmf(args.p, args.nmax, reps, seed)
        return ["n", "estimate", "ci95"], rows

    if cmd == ("graph", "skeleton"):
        from .euler import skeleton_rate
        from .graph import EdgeLaw, sample_window, skeleton_points
        from .harness import RngStream

        w = sample_window(args.n, EdgeLaw.bernoulli(args.p), RngStream(seed))
        rep = skeleton_points(w)
        trim = args.trim
        if trim is None:
            trim = max(1, math.ceil(5.0 / skeleton_rate(args.p)))
        pts = [v for v in rep.points if trim <= v <= args.n - trim]
        density = len(pts) / max(1, args.n - 2 * trim + 1)
        gaps = [b - a for a, b in zip(pts, pts[1:])]
        mean_gap = sum(gaps) / len(gaps) if gaps else math.inf
        return (
            ["n", "p", "trim", "points", "density", "mean_gap"],
            [(args.n, args.p, trim, len(pts), density, mean_gap)],
        )

    if cmd == ("graph", "heavy"):
        from .graph import heavy_edge_exponent

        grid = [int(s) for s in args.sizes.split(",")]
        rep = heavy_edge_exponent(args.s, grid, reps, seed)
        return (
            ["s", "slope", "expected"],
            [(args.s, rep.slope, 1.0 / (args.s - 1.0))],
        )

    if cmd == ("ibm", "speed"):
        from .ibm import simulate_speed

        law = _parse_mu(args.mu)
        s = simulate_speed(law, args.steps, seed=seed, replicas=max(2, min(reps, 16)))
        return (
            ["mu", "steps", "mean", "ci95"],
            [(args.mu, args.steps, s.mean, s.ci95_halfwidth)],
        )

    if cmd == ("ibm", "front"):
        from .ibm import estimate_C_via_front

        s = estimate_C_via_front(args.p, args.steps, seed=seed, replicas=max(2, min(reps, 16)))
        return (
            ["p", "steps", "mean", "ci95"],
            [(args.p, args.steps, s.mean, s.ci95_halfwidth)],
        )

    if cmd == ("pwit", "sim"):
        from .harness import RngStream
        from .pwit import simulate_pwit

        snap = simulate_pwit(args.tmax, RngStream(seed))
        return (
            ["generation", "count", "first_birth"],
            [(g, c, t) for g, (c, t) in enumerate(zip(snap.counts, snap.first_birth))],
        )

    if cmd == ("pwit", "brw"):
        from .harness import RngStream
        from .pwit import brw_min_displacement

        m = brw_min_displacement(args.generations, args.beam, RngStream(seed))
        return (
            ["generations", "beam", "min_displacement", "per_generation"],
            [(args.generations, args.beam, m, m / args.generations)],
        )

    if cmd == ("pwit", "coupled"):
        from .harness import RngStream
        from .pwit import coupled_tree

        traj = coupled_tree(args.p, args.steps, RngStream(seed))
        step = max(1, args.steps // 200)
        rows = [
            (int(i), int(traj.kappa[i]), int(traj.generations[i]), int(traj.front[i]))
            for i in range(0, args.steps + 1, step)
        ]
        return ["index", "vertex", "generation", "front"], rows

    if cmd == ("pwit", "sparse"):
        from .pwit import sparse_longest

        rep = sparse_longest(args.n, args.p, reps, seed)
        rows = [(k, c / rep.reps) for k, c in sorted(rep.counts.items())]
        return ["length", "probability"], rows

    if cmd == ("shortest", None):
        from .pwit import shortest_path

        law = shortest_path(args.n, args.p, reps, seed)
        return ["length", "probability"], sorted(law.items())

    if cmd == ("charged", "estimate"):
        from .charged import estimate_Cpx

        x = -math.inf if args.x in ("-inf", "-infinity") else float(Fraction(args.x))
        s = estimate_Cpx(args.p, x, args.n, reps, seed)
        return (
            ["p", "x", "n", "mean", "ci95"],
            [(args.p, args.x, args.n, s.mean, s.ci95_halfwidth)],
        )

    if cmd == ("charged", "witness"):
        from .charged import build_witness

        g = build_witness(Fraction(args.x))
        return ["i", "j"], sorted(g.blue_edges)

    if cmd == ("charged", "verify"):
        from .charged import WitnessGraph, build_witness, verify_critical

        x = Fraction(args.x)
        if args.graph:
            edges = json.loads(Path(args.graph).read_text())
            n = max(j for _, j in edges)
            g = WitnessGraph(n=n, blue_edges=frozenset((int(i), int(j)) for i, j in edges))
        else:
            g = build_witness(x)
        ok, cert = verify_critical(g, x)
        return (
            ["x", "n", "critical", "certificate"],
            [(args.x, g.n, ok, ";".join("-".join(map(str, p)) for p in cert))],
        )

    if cmd == ("charged", "scaling"):
        from .charged import scaling_check

        rep = scaling_check(args.p, args.x, args.n, reps, seed)
        return (
            ["quantity", "mean", "ci95"],
            [
                ("C(p,x)", rep.direct.mean, rep.direct.ci95_halfwidth),
                ("x*C(1-p,1/x)", rep.via_inverse.mean, rep.via_inverse.ci95_halfwidth),
                ("x*C(1-p,x)", rep.via_same.mean, rep.via_same.ci95_halfwidth),
            ],
        )

    if cmd == ("mgs", "estimate"):
        from .mgs import estimate_CF

        law = _parse_charge_law(args.dist)
        rep = estimate_CF(law, args.ell, args.n, seed)
        return (
            ["dist", "ell", "n", "estimate", "ci95", "mean_tstar_sq"],
            [(
                args.dist,
                law.default_ell() if args.ell is None else args.ell,
                args.n,
                rep.summary.mean,
                rep.summary.ci95_halfwidth,
                rep.mean_tstar_sq,
            )],
        )

    if cmd == ("mgs", "complexity"):
        from .mgs import complexity_profile

        law = _parse_charge_law(args.dist)
        rows = complexity_profile(law, _float_grid(args.ells), args.n, seed)
        return ["ell", "mean_tstar_sq"], rows

    if cmd == ("mgs", "glynn-rhee"):
        from .mgs import bernoulli_law, glynn_rhee_estimate

        def family(n):
            return bernoulli_law(0.5), 1.0  # constant family: already bounded

        masses = {1: 1.0 - args.p, 2: args.p * (1.0 - args.p), 3: args.p**2}
        total = sum(masses.values())
        masses = {k: v / total for k, v in masses.items()}
        s = glynn_rhee_estimate(family, masses, args.n, seed)
        return (
            ["n", "mean", "variance", "ci95"],
            [(args.n, s.mean, s.variance, s.ci95_halfwidth)],
        )

    raise InvalidParameterError(f"unhandled command {cmd}")


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    if args.config:
        try:
            defaults = _parse_config(args.config)
        except (OSError, InvalidParameterError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_ERROR
        for key, value in defaults.items():
            if getattr(args, key, None) in (None,) and hasattr(args, key):
                setattr(args, key, value)
    started = time.time()
    try:
        header, rows = _run(args)
    except (InvalidParameterError, ResourceError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_ERROR
    manifest = {
        "command": ["lpp"] + list(argv),
        "seed": args.seed,
        "version": __version__,
        "wall_time_s": round(time.time() - started, 3),
        "output": args.out,
    }
    emit(header, rows, args.format, args.out, manifest)
    return EXIT_OK


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))
