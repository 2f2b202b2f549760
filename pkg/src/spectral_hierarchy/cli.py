"""Command-line entry point.

Exit codes: 0 success, 1 unexpected error, 2 invalid sequence or arguments,
3 domain error, 4 numerical failure, 5 not regular, 6 cutoff too large,
7 input/parse error, 8 fetch error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .core import invert_average, unfold, RiemannVonMangoldt
from .errors import SpectralError
from .graph import (
    compute_spectrum,
    enumerate_orbits,
    first_eigenvalues,
    graph_expansion,
    graph_expansion_lattice,
)
from .hierarchy import Midpoint, build_hierarchy, separating_sequence, HierarchyLevel
from .io import dumps, fetch_dataset, fmt, read_graph_spec, write_csv, emit_histogram_csv
from .pipeline import MODELS, AnalysisConfig, load_input, run_analyze, select_model
from .stats import histogram, spacings, sup_distance, xi_statistic
from .trace import StaircaseExpansion, reconstruct_spectrum, riemann_expansion


def parse_cutoff(text, L0=None):
    """``"12.5"`` or a multiple of the total length such as ``"20L0"``."""
    t = text.strip()
    if t.endswith("L0"):
        if L0 is None:
            raise argparse.ArgumentTypeError("an L0-relative cutoff needs a graph")
        mult = t[:-2].rstrip("*").strip() or "1"
        value = float(mult) * L0
    else:
        value = float(t)
    if not value > 0:
        raise argparse.ArgumentTypeError("cutoff must be positive")
    return value


def _writer(out):
    if out is None or out == "-":
        return sys.stdout
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    return open(out, "w", newline="\n", encoding="utf-8")


def _csv(out, header, columns):
    fh = _writer(out)
    try:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(fmt(v) for v in row) + "\n")
    finally:
        if fh is not sys.stdout:
            fh.close()


def _config(args, **extra):
    params = {}
    if getattr(args, "L0", None) is not None:
        params["L0"] = args.L0
    if getattr(args, "poly_degree", None) is not None:
        params["degree"] = args.poly_degree
    kw = dict(
        input=args.input,
        source=getattr(args, "source", "auto"),
        model=getattr(args, "model", "auto"),
        model_params=params,
        count=getattr(args, "count", None),
        offline=getattr(args, "offline", False),
        cache_dir=getattr(args, "cache_dir", None),
    )
    kw.update(extra)
    return AnalysisConfig(**kw)


# --------------------------------------------------------------------------
# subcommands


def cmd_analyze(args):
    anchor = args.anchor
    try:
        anchor = float(anchor)
    except ValueError:
        pass
    cfg = _config(
        args,
        strategy=args.strategy,
        anchor=anchor,
        max_depth=args.max_depth,
        criterion=args.criterion,
        prime_cutoff=args.prime_cutoff,
        m_max=args.m_max,
        orbit_cutoff=None,
        out_dir=args.out,
        emit_staircase=args.staircase,
        bins=args.bins,
    )
    if args.orbit_cutoff is not None:
        _, _, g = load_input(cfg)
        cfg.orbit_cutoff = parse_cutoff(args.orbit_cutoff, g.L0 if g is not None else None)
    report = run_analyze(cfg)
    degree = "not terminated" if report.degree is None else report.degree
    print(f"levels={report.fingerprint['count']} degree={degree} strategy={report.strategy['kind']}")
    if args.out is None:
        sys.stdout.write(dumps(report.to_dict()))
    return 0


def cmd_unfold(args):
    cfg = _config(args)
    _, seq, g = load_input(cfg)
    model = select_model(cfg, seq, g)
    u = unfold(seq, model)
    n = np.arange(1, len(u) + 1)
    _csv(args.out, ("n", "E", "k", "delta"), (n, seq.values, u.values, u.deltas))
    return 0


def cmd_graph_spectrum(args):
    g = read_graph_spec(args.input)
    seq = compute_spectrum(g, args.k_max) if args.k_max is not None else first_eigenvalues(g, args.count)
    mult = seq.multiplicity if seq.multiplicity is not None else np.ones(len(seq), dtype=int)
    _csv(args.out, ("n", "k", "multiplicity"), (np.arange(1, len(seq) + 1), seq.values, mult))
    return 0


def cmd_orbits(args):
    g = read_graph_spec(args.input)
    cutoff = parse_cutoff(args.orbit_cutoff, g.L0)
    orbits = enumerate_orbits(g, cutoff, args.max_orbits)
    codes = ["-".join(str(b) for b in o.code) for o in orbits]
    _csv(
        args.out,
        ("code", "length", "amp_re", "amp_im", "repetition"),
        (
            codes,
            [o.length for o in orbits],
            [complex(o.amplitude).real for o in orbits],
            [complex(o.amplitude).imag for o in orbits],
            [o.repetition for o in orbits],
        ),
    )
    return 0


def _expansion(args):
    if args.input is None:
        return riemann_expansion(args.prime_cutoff, args.m_max, args.damping)
    g = read_graph_spec(args.input)
    cutoff = parse_cutoff(args.orbit_cutoff or "10L0", g.L0)
    if args.method == "orbits":
        return graph_expansion(g, enumerate_orbits(g, cutoff), length_cutoff=cutoff)
    return graph_expansion_lattice(g, cutoff)


def cmd_expansion(args):
    x = _expansion(args)
    fh = _writer(args.out)
    try:
        fh.write(dumps(x.to_dict()))
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_reconstruct(args):
    if args.input is None:
        raise SpectralError("reconstruct needs --input (graph spec or zero table)")
    cfg = _config(args, count=None)
    _, seq, g = load_input(cfg)
    n_levels = args.count
    if g is not None:
        cutoff = parse_cutoff(args.orbit_cutoff or "10L0", g.L0)
        x = graph_expansion_lattice(g, cutoff)
        exact = first_eigenvalues(g, n_levels + 1)
        # separators from the first midpoint level, in physical units
        k = np.concatenate([[0.0], exact.values])
        sep = 0.5 * (k[1:] + k[:-1])
        ref = exact.values[:n_levels]
    else:
        x = riemann_expansion(args.prime_cutoff, args.m_max, args.damping)
        sep = invert_average(RiemannVonMangoldt(), np.arange(0, n_levels + 1, dtype=float))
        ref = seq.values[:n_levels]
    rec = reconstruct_spectrum(x, sep).values
    m = min(rec.size, ref.size)
    _csv(args.out, ("n", "k_reconstructed", "k_exact", "error"),
         (np.arange(1, m + 1), rec[:m], ref[:m], rec[:m] - ref[:m]))
    return 0


def _read_level_csv(path):
    rows = Path(path).read_text().splitlines()
    if rows and rows[0].startswith("n,k"):
        return np.array([float(r.split(",")[1]) for r in rows[1:] if r])
    return None


def cmd_stats(args):
    k = _read_level_csv(args.input) if args.input.endswith(".csv") else None
    if k is None:
        cfg = _config(args)
        _, seq, g = load_input(cfg)
        k = unfold(seq, select_model(cfg, seq, g)).values
    level = HierarchyLevel(0, k)
    s = spacings(level)
    hs = histogram(s, args.bins, (0.0, max(4.0, float(np.ceil(s.max())))))
    hx = histogram(xi_statistic(level), args.bins)
    if args.out is not None:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        emit_histogram_csv(hs, out / "spacing_hist.csv")
        emit_histogram_csv(hx, out / "xi_hist.csv")
    print(f"count={k.size} mean_spacing={fmt(float(s.mean()))} std_spacing={fmt(float(s.std()))} "
          f"wigner_sup_distance={fmt(sup_distance(hs))}")
    return 0


def cmd_fetch(args):
    print(fetch_dataset(args.input, args.cache_dir, args.offline))
    return 0


# --------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="spectral-hierarchy", description="Bootstrapping hierarchies of spectral sequences.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, input_required=True):
        sp.add_argument("--input", required=input_required, help="file path or URL")
        sp.add_argument("--source", choices=("auto", "zeros", "graph"), default="auto")
        sp.add_argument("--model", choices=MODELS, default="auto")
        sp.add_argument("--L0", type=float, help="total length for --model weyl")
        sp.add_argument("--poly-degree", type=int, help="degree for --model polynomial")
        sp.add_argument("--count", type=int, help="use only the first COUNT levels")
        sp.add_argument("--offline", action="store_true")
        sp.add_argument("--cache-dir")

    a = sub.add_parser("analyze", help="full pipeline with report")
    common(a)
    a.add_argument("--strategy", choices=("optimal", "midpoint"), default="optimal")
    a.add_argument("--anchor", default="first-element", help="first-element, mean or a number")
    a.add_argument("--max-depth", type=int, default=32)
    a.add_argument("--criterion", choices=("interval", "spacing"), default="interval")
    a.add_argument("--prime-cutoff", type=int, default=1000)
    a.add_argument("--m-max", type=int, default=3)
    a.add_argument("--orbit-cutoff", help="length, or multiple of L0 such as 10L0")
    a.add_argument("--staircase", action="store_true", help="also emit staircase samples")
    a.add_argument("--bins", type=int, default=50)
    a.add_argument("--out", help="output directory")
    a.set_defaults(func=cmd_analyze)

    u = sub.add_parser("unfold", help="unfolded levels as CSV")
    common(u)
    u.add_argument("--out")
    u.set_defaults(func=cmd_unfold)

    gs = sub.add_parser("graph-spectrum", help="eigenvalues of a quantum graph")
    gs.add_argument("--input", required=True)
    gs.add_argument("--count", type=int, default=500)
    gs.add_argument("--k-max", type=float)
    gs.add_argument("--out")
    gs.set_defaults(func=cmd_graph_spectrum)

    o = sub.add_parser("orbits", help="periodic orbits up to a length")
    o.add_argument("--input", required=True)
    o.add_argument("--orbit-cutoff", required=True)
    o.add_argument("--max-orbits", type=int, default=10**6)
    o.add_argument("--out")
    o.set_defaults(func=cmd_orbits)

    e = sub.add_parser("expansion", help="harmonic staircase expansion as JSON")
    e.add_argument("--input", help="graph spec; omit for the zeta-zero expansion")
    e.add_argument("--prime-cutoff", type=int, default=1000)
    e.add_argument("--m-max", type=int, default=3)
    e.add_argument("--orbit-cutoff")
    e.add_argument("--damping", type=float, help="Gaussian length damping scale (zeta expansion only)")
    e.add_argument("--method", choices=("lattice", "orbits"), default="lattice")
    e.add_argument("--out")
    e.set_defaults(func=cmd_expansion)

    r = sub.add_parser("reconstruct", help="eigenvalues from the expansion")
    common(r)
    r.set_defaults(count=100)
    r.add_argument("--prime-cutoff", type=int, default=1000)
    r.add_argument("--m-max", type=int, default=3)
    r.add_argument("--orbit-cutoff")
    r.add_argument("--damping", type=float, help="Gaussian length damping scale (zeta expansion only)")
    r.add_argument("--out")
    r.set_defaults(func=cmd_reconstruct)

    s = sub.add_parser("stats", help="spacing and xi histograms")
    common(s)
    s.add_argument("--bins", type=int, default=50)
    s.add_argument("--out", help="output directory")
    s.set_defaults(func=cmd_stats)

    f = sub.add_parser("fetch", help="download a dataset into the cache")
    f.add_argument("--input", required=True, help="URL")
    f.add_argument("--cache-dir")
    f.add_argument("--offline", action="store_true")
    f.set_defaults(func=cmd_fetch)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpectralError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 7


if __name__ == "__main__":
    sys.exit(main())
