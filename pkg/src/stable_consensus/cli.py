"""Command-line interface.

Exit codes: 0 success, 2 bad input (flags, malformed files), 3 invalid
graph (e.g. disconnected), 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import bounds as bnd
from . import design as dsg
from . import simulate as sim
from .datasets import resolve_graph
from .fluctuation import NoiseSpec, steady_state_params, sigma_alpha_total
from .graph import DisconnectedGraphError, GraphError, SpectrumError, graph_spectrum
from .kernel import DEFAULT_TOL, SpectralKernel
from .quadrature import QuadratureError

EXIT_INPUT, EXIT_GRAPH, EXIT_NUMERIC = 2, 3, 4


class InputError(ValueError):
    pass


def fmt(x) -> str:
    return "" if x is None else f"{x + 0.0:.9g}"


def parse_grid(text: str) -> list[float]:
    """``'a:b:step'`` (inclusive) or a comma-separated list."""
    try:
        if ":" in text:
            a, b, step = (float(v) for v in text.split(":"))
            if step <= 0 or b < a:
                raise InputError(f"bad grid {text!r}")
            count = int(math.floor((b - a) / step + 1e-9)) + 1
            return [round(a + k * step, 12) for k in range(count)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"bad grid {text!r}") from None


def parse_pairs(text: str) -> list[tuple[int, int]]:
    pairs = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].replace(",", " ").replace("-", " ").split()
        if not line:
            continue
        if len(line) != 2:
            raise InputError(f"bad candidate line {raw!r}")
        pairs.append((int(line[0]), int(line[1])))
    return pairs


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return args.threads
    return dsg.default_threads()


def _alphas(args) -> list[float]:
    if getattr(args, "alpha_grid", None):
        return parse_grid(args.alpha_grid)
    if args.alpha is None:
        raise InputError("give --alpha or --alpha-grid")
    return [args.alpha]


def _noise(args, n: int) -> NoiseSpec:
    if args.beta_file:
        try:
            betas = [float(v) for v in Path(args.beta_file).read_text().split()]
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot read beta file: {exc}") from None
        if len(betas) != n:
            raise InputError(f"beta file has {len(betas)} values for a {n}-node graph")
        return NoiseSpec(args.alpha, betas)
    return NoiseSpec.uniform(args.alpha, n, args.beta)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands

def cmd_sigma(args) -> int:
    g = resolve_graph(args.graph)
    kernel = SpectralKernel(graph_spectrum(g))
    noise = _noise(args, g.n)
    rep = steady_state_params(kernel, noise, args.tol, args.method)
    if args.alpha == 2.0 and not noise.is_symmetric:
        print("note: alpha = 2 laws are Gaussian; beta does not affect them", file=sys.stderr)
    _emit(rep.to_json() + "\n" if args.json else rep.to_csv(), args.out)
    return 0


def cmd_bounds(args) -> int:
    g = resolve_graph(args.graph)
    kernel = SpectralKernel(graph_spectrum(g))
    reports = bnd.tightness_report(kernel, _alphas(args), args.tol)
    for r in reports:
        bad = r.violations()
        if bad:
            print(f"warning: alpha={fmt(r.alpha)}: {', '.join(bad)} below exact", file=sys.stderr)
    _emit(bnd.reports_to_json(reports) + "\n" if args.json else bnd.reports_to_csv(reports), args.out)
    return 0


def cmd_simulate(args) -> int:
    g = resolve_graph(args.graph)
    cfg = sim.SimConfig(g, _noise(args, g.n), dt=args.dt, horizon=args.horizon, paths=args.paths,
                        seed=args.seed, record_stride=args.record_stride, scheme=args.scheme)
    ens = sim.run(cfg, threads=_threads(args))
    est = None
    samples = ens.samples(args.burn_in)
    if len(samples) >= sim.MIN_SAMPLES:
        est = sim.estimate_scale(samples, args.alpha)
    else:
        print(f"note: {len(samples)} samples after burn-in, skipping estimation", file=sys.stderr)
    if args.out:
        Path(args.out).write_text(ens.to_csv())
    _emit(sim.summary(ens, est) + "\n", args.summary)
    return 0


def _design_candidates(args):
    if args.candidates in (None, "all"):
        return None
    path = Path(args.candidates)
    try:
        return parse_pairs(path.read_text())
    except OSError:
        return parse_pairs(args.candidates.replace(";", "\n"))


def cmd_design(args) -> int:
    alphas = _alphas(args)
    threads = _threads(args)
    results = []
    segments = None
    if args.kind == "reweight":
        template = dsg.load_template(args.graph)
        lo, hi = template.b_range
        grid = parse_grid(args.b_grid) if args.b_grid else list(np.linspace(lo, hi, 41)[1:-1])
        for a in alphas:
            results.append(dsg.best_reweighting(template, grid, a, args.tol, threads=threads))
    else:
        g = resolve_graph(args.graph)
        cands = _design_candidates(args)
        fn = dsg.best_addition if args.kind == "add" else dsg.best_removal
        for a in alphas:
            results.append(fn(g, a, cands, args.tol, threads=threads))
        if args.crossovers and len(alphas) > 1:
            segments = dsg.crossover_scan(g, args.kind, alphas, cands, args.tol, threads=threads)
    if args.json:
        doc = []
        for r in results:
            doc.append({
                "alpha": r.alpha,
                "candidates": [dsg._cand_str(c) for c in r.candidates],
                "sigma_alpha": r.values.tolist(),
                "argmin": [dsg._cand_str(c) for c in r.argmin],
                "skipped": [dsg._cand_str(c) for c in r.skipped],
                "refined": r.refined,
            })
        out = {"kind": args.kind, "results": doc}
        if segments is not None:
            out["segments"] = [{"lo": s.lo, "hi": s.hi, "argmin": [dsg._cand_str(c) for c in s.argmin]}
                               for s in segments]
        _emit(json.dumps(out, indent=2) + "\n", args.out)
    else:
        text = "".join(r.to_csv(header=k == 0) for k, r in enumerate(results))
        _emit(text, args.out)
        for r in results:
            if r.skipped:
                print(f"alpha={fmt(r.alpha)}: skipped disconnecting removals "
                      + " ".join(dsg._cand_str(c) for c in r.skipped), file=sys.stderr)
            if r.refined is not None:
                print(f"alpha={fmt(r.alpha)}: refined b*={fmt(r.refined[0])} "
                      f"sigma_alpha={fmt(r.refined[1])}", file=sys.stderr)
        if segments is not None:
            for s in segments:
                print(f"[{fmt(s.lo)}, {fmt(s.hi)}]: " + " ".join(dsg._cand_str(c) for c in s.argmin),
                      file=sys.stderr)
    return 0


def cmd_plotdata(args) -> int:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if args.kind == "sigma":
        w.writerow(["graph", "alpha", "sigma_alpha"])
        for spec in args.graph:
            kernel = SpectralKernel(graph_spectrum(resolve_graph(spec)))
            for a in _alphas(args):
                w.writerow([spec, fmt(a), fmt(sigma_alpha_total(kernel, a, args.tol))])
    elif args.kind == "reweight":
        template = dsg.load_template(args.graph[0])
        lo, hi = template.b_range
        grid = parse_grid(args.b_grid) if args.b_grid else list(np.linspace(lo, hi, 41)[1:-1])
        w.writerow(["alpha", "b", "sigma_alpha"])
        for a in _alphas(args):
            r = dsg.best_reweighting(template, grid, a, args.tol, refine=False, threads=_threads(args))
            for b, v in zip(r.candidates, r.values):
                w.writerow([fmt(a), fmt(b), fmt(v)])
    else:
        w.writerow(["graph", "ratio", "alpha", "series", "value"])
        for spec in args.graph:
            kernel = SpectralKernel(graph_spectrum(resolve_graph(spec)))
            ratio = kernel.lambda_max / kernel.lambda2
            for r in bnd.tightness_report(kernel, _alphas(args), args.tol):
                for name, val in (("exact", r.exact), ("thm", r.thm), ("claims", r.claims),
                                  ("near2", r.near2)):
                    if val is not None:
                        w.writerow([spec, fmt(ratio), fmt(r.alpha), name, fmt(val)])
    _emit(buf.getvalue(), args.out)
    return 0


# ---------------------------------------------------------------------------
# parser

def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stable-consensus",
                                description="Fluctuations of consensus networks under alpha-stable noise.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, grid=True):
        sp.add_argument("--graph", required=True,
                        help="edge-list file, bundled name (g1, g2, g3) or generator (complete:5, path:3, star:4, cycle:6)")
        sp.add_argument("--alpha", type=float)
        if grid:
            sp.add_argument("--alpha-grid", help="a:b:step (inclusive) or comma list")
        sp.add_argument("--tol", type=_positive, default=DEFAULT_TOL)
        sp.add_argument("--json", action="store_true")
        sp.add_argument("--out")
        sp.add_argument("--threads", type=int)

    def noise(sp):
        sp.add_argument("--beta", type=float, default=0.0, help="uniform skewness")
        sp.add_argument("--beta-file", help="whitespace-separated per-node skewness")

    s = sub.add_parser("sigma", help="steady-state parameters and Sigma_alpha")
    common(s, grid=False)
    noise(s)
    s.add_argument("--method", choices=["auto", "quadrature"], default="auto")
    s.set_defaults(func=cmd_sigma, need_alpha=True)

    b = sub.add_parser("bounds", help="spectral bounds against the exact value")
    common(b)
    b.set_defaults(func=cmd_bounds)

    m = sub.add_parser("simulate", help="Monte Carlo ensemble")
    common(m, grid=False)
    noise(m)
    m.add_argument("--dt", type=_positive, default=1e-3)
    m.add_argument("--horizon", type=_positive, default=10.0)
    m.add_argument("--paths", type=int, default=1000)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--burn-in", type=float)
    m.add_argument("--record-stride", type=int)
    m.add_argument("--scheme", choices=list(sim.SCHEMES), default="euler")
    m.add_argument("--summary", help="write the JSON summary here instead of stdout")
    m.set_defaults(func=cmd_simulate, need_alpha=True)

    d = sub.add_parser("design", help="single-step design search")
    d.add_argument("kind", choices=["add", "remove", "reweight"])
    common(d)
    d.add_argument("--candidates", help="'all', a file of 'i j' lines, or 'i-j;k-l'")
    d.add_argument("--b-grid", help="reweighting grid a:b:step or comma list")
    d.add_argument("--crossovers", action="store_true", help="refine argmin switch points over the alpha grid")
    d.set_defaults(func=cmd_design)

    pl = sub.add_parser("plotdata", help="long-format CSV curves")
    pl.add_argument("kind", choices=["sigma", "reweight", "bounds"])
    pl.add_argument("--graph", action="append", required=True)
    pl.add_argument("--alpha", type=float)
    pl.add_argument("--alpha-grid")
    pl.add_argument("--b-grid")
    pl.add_argument("--tol", type=_positive, default=DEFAULT_TOL)
    pl.add_argument("--out")
    pl.add_argument("--threads", type=int)
    pl.set_defaults(func=cmd_plotdata)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "need_alpha", False) and args.alpha is None:
        parser.error("--alpha is required")
    try:
        return args.func(args)
    except DisconnectedGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GRAPH
    except (SpectrumError, QuadratureError, FloatingPointError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (GraphError, InputError, KeyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
