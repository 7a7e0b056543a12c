"""Command line interface: ``rauzylab <command> [options]``.

Options may also come from a key=value file given with --config; command
line flags win. Mathematical findings never change the exit status; only
operational errors (bad input, IO) do.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import cfalgo, discrete_geometry as dg, lyapunov as ly, rauzy, render, sadic
from .substitution import builtin_family
from .words import balance_check, render as render_word


class OperationalError(RuntimeError):
    pass


# ------------------------------------------------------------ helpers

def read_config(path: str) -> dict[str, str]:
    """key = value lines; '#' starts a comment."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise OperationalError(f"{path}:{n}: expected key = value")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def parse_number(text: str):
    text = text.strip()
    if text.lower() in ("phi", "phi^-1", "golden"):
        from .exact import golden_inverse
        return golden_inverse()
    if "/" in text:
        return Fraction(text)
    try:
        return Fraction(int(text))
    except ValueError:
        return float(text)


def _directive(spec: str) -> sadic.DirectiveSequence:
    return sadic.parse_directive(spec)


def _config_of(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "config", "out", "points", "faces")}


def _write(path: str | None, data: str | bytes) -> None:
    if path is None:
        return
    mode = "wb" if isinstance(data, bytes) else "w"
    with open(path, mode) as fh:
        fh.write(data)


def _emit_json(obj, out: str | None = None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True, default=_json_default)
    if out:
        _write(out, text + "\n")
    else:
        print(text)


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (bytes, bytearray)):
        return render_word(o)
    if isinstance(o, Fraction):
        return str(o)
    return str(o)


# ------------------------------------------------------------ commands

def cmd_limitword(args) -> int:
    if args.n == 0:
        return 0
    d = _directive(args.directive)
    seqs = sadic.limit_sequences(d)
    if args.letter is not None:
        seqs = [s for s in seqs if s.first_letter == args.letter]
        if not seqs:
            raise OperationalError(f"no limit sequence starts with letter {args.letter}")
    if not args.no_header:
        prim = sadic.primitivity_check(d, 0)
        print(f"# directive {d.describe()}")
        print(f"# primitive witness at level 0: {prim.witnesses.get(0)}")
        print(f"# limit sequences: {len(seqs)} (ordered by first letter)")
    for s in seqs:
        print(render_word(s.prefix(args.n)))
    return 0


def cmd_language(args) -> int:
    d = _directive(args.directive)
    res = sadic.language(d, args.level, args.length)
    words = sorted((w for ws in res.words.values() for w in ws if w), key=lambda b: (len(b), b))
    print(f"# level {args.level}, {len(words)} nonempty factors of length <= {args.length}, "
          f"stabilized={res.stabilized}")
    for w in words:
        print(render_word(w))
    return 0


def cmd_expand(args) -> int:
    xs = [parse_number(t) for t in args.x.split(",")]
    if args.algorithm == "gauss":
        res = cfalgo.cf_expand(xs[0], args.depth)
        _emit_json({"digits": res.digits, "terminated": res.terminated,
                    "uncertain_from": res.uncertain_from})
    elif args.algorithm == "additive":
        exp = cfalgo.expand(cfalgo.ADDITIVE, (1, xs[0]) if len(xs) == 1 else xs, args.depth)
        _emit_json({"branches": exp.branches, "runs": cfalgo.run_lengths(exp.branches)})
    else:
        if len(xs) != 2:
            raise OperationalError("brun needs two coordinates x1,x2")
        _emit_json({"cases": cfalgo.brun_projective_orbit(xs[0], xs[1], args.depth),
                    "matrices": cfalgo.brun_linear_orbit(xs[0], xs[1], args.depth)})
    return 0


def _balance_guard(d: sadic.DirectiveSequence, n: int, cap: int = 8) -> int | None:
    w = sadic.limit_sequences(d)[0].prefix(max(n, 1000))
    for C in range(1, cap + 1):
        if balance_check(w, C, d.d, 256).balanced:
            return C
    return None


def cmd_fractal(args) -> int:
    d = _directive(args.directive)
    C = _balance_guard(d, args.n)
    if C is None and not args.force:
        raise OperationalError("no balance constant <= 8 witnessed; the cloud may be unbounded (use --force)")
    frame = rauzy.ProjectionFrame.for_directive(d)
    if args.plane == "u":
        frame = rauzy.ProjectionFrame.make(frame.u, frame.u)
    cloud = rauzy.rauzy_cloud(d, args.n, frame, level=args.level)
    config = _config_of(args) | {"balance_C": C}
    if args.ppm:
        _write(args.out, render.cloud_ppm(cloud))
    else:
        _write(args.out, render.cloud_svg(cloud, config))
    _write(args.points, cloud.to_lines() + "\n")
    print(f"points {len(cloud)} balance_C {C} sup_diameter {cloud.diameter_sup():.6f}")
    return 0


def cmd_dualplane(args) -> int:
    d = _directive(args.directive)
    letters = [int(t) for t in args.letters.split(",")] if args.letters else None
    seed = dg.Patch.seed(d.d, letters)
    patch = dg.e1_star_iterate(d.window(0, args.steps), seed, budget=args.budget)
    config = _config_of(args)
    _write(args.out, render.patch_svg(patch, config))
    _write(args.faces, patch.to_lines() + "\n")
    info = {"faces": len(patch)}
    if dg.Patch.seed(d.d).issubset(patch):
        info["minimal_combinatorial_radius"] = dg.minimal_combinatorial_radius(patch)
    print(" ".join(f"{k} {v}" for k, v in info.items()))
    return 0


def _run_section(report: dict, errors: list, name: str, fn) -> None:
    try:
        report[name] = fn()
    except Exception as exc:  # recorded as an operational failure of this section
        report[name] = {"error": f"{type(exc).__name__}: {exc}"}
        errors.append(name)


def cmd_check(args) -> int:
    d = _directive(args.directive)
    skip = set(filter(None, (args.skip or "").split(",")))
    report: dict = {"config": _config_of(args)}
    errors: list[str] = []

    def coincidence():
        for l in range(1, 9):
            res = dg.strong_coincidence_check(d.window(0, l))
            if res.ok:
                return {"l": l, "witnesses": {f"{a},{b}": v for (a, b), v in res.witnesses.items()}}
        return {"l": None, "found": False}

    def geometric():
        for n in range(1, args.max_n + 1):
            r = dg.geometric_coincidence_check(d, n)
            if r.found:
                return vars(r)
        return {"found": False, "max_n": args.max_n}

    def tiling():
        cloud = rauzy.rauzy_cloud(d, args.cloud)
        h = rauzy.tiling_multiplicity_sample(cloud, samples=1000)
        return {"heuristic": True, "eps": h.eps, "histogram": h.counts, "mode": h.mode}

    def exponents():
        run = ly.CocycleRun(list(np.array(s.incidence, float) for s in d.family.values()),
                            n=args.lyapunov_n, replicas=8, seed=args.seed, label="uniform bernoulli")
        return ly.estimate_exponents(run).to_json()

    def radius():
        if d.d != 3 or d.is_finite():
            return {"skipped": "needs an infinite directive on three letters"}
        rows = dg.radius_growth(d.window(0, args.radius_steps), args.radius_steps, budget=200_000)
        return [{"n": n, "faces": f, "radius": r} for n, f, r in rows]

    sections = [("hypotheses", lambda: sadic.hypothesis_report(d)),
                ("strong_coincidence", coincidence), ("geometric_coincidence", geometric),
                ("tiling_multiplicity", tiling), ("lyapunov", exponents), ("radius_growth", radius)]
    for name, fn in sections:
        if name not in skip:
            _run_section(report, errors, name, fn)
    report["errors"] = errors
    _emit_json(report, args.out)
    return 1 if errors else 0


def cmd_lyapunov(args) -> int:
    fam = builtin_family(args.family)
    weights = [float(t) for t in args.weights.split(",")] if args.weights else None
    transition = None
    if args.markov:
        k = len(fam)
        transition = (np.ones((k, k)) - np.eye(k)) / (k - 1)
    label = "markov (no repeats)" if args.markov else ("bernoulli" + (f" {weights}" if weights else " uniform"))
    run = ly.CocycleRun.from_family(fam, n=args.n, replicas=args.replicas, seed=args.seed,
                                   weights=weights, transition=transition, label=label)
    est = ly.estimate_exponents(run, transpose=args.transpose)
    out = {"family": args.family, "measure": label, **est.to_json()}
    _emit_json(out, args.out)
    return 0


def cmd_code(args) -> int:
    d = _directive(args.directive)
    seqs = sadic.limit_sequences(d)
    if d.d == 2 and args.directive.strip().lower().startswith("fibonacci"):
        word = [s for s in seqs if s.first_letter == 2][0].prefix(args.steps)
        rep = rauzy.natural_coding_crosscheck_interval(word, steps=args.steps)
        mode = "interval rotation by phi^-2 from phi^-1 (exact)"
    else:
        word = seqs[0].prefix(args.steps)
        cloud = rauzy.rauzy_cloud(d, args.cloud)
        rep = rauzy.natural_coding_crosscheck_torus(cloud, word, args.steps)
        mode = "torus rotation by pi e_1 mod Lambda, subtile membership"
    _emit_json({"mode": mode, "steps": rep.steps, "agreement": rep.agreement,
                "full": rep.full, "contested": rep.contested})
    return 0


def cmd_exchange(args) -> int:
    d = _directive(args.directive)
    cloud = rauzy.rauzy_cloud(d, args.cloud)
    word = sadic.limit_sequences(d)[0].prefix(args.steps)
    rep = rauzy.domain_exchange_orbit(cloud, np.zeros(d.d - 1), args.steps)
    agree = rauzy._agreement(rep.labels, word)
    print(f"# eps {rep.eps:.6g} contested {rep.contested} agreement {agree}/{args.steps}")
    print(render_word(rep.labels))
    return 0


# ------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rauzylab", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="key=value file with option defaults")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=fn)
        return sp

    sp = add("limitword", cmd_limitword, "print prefixes of the limit sequences")
    sp.add_argument("--directive", required=True)
    sp.add_argument("--n", type=int, default=100)
    sp.add_argument("--letter", type=int, help="only the sequence starting with this letter")
    sp.add_argument("--no-header", action="store_true")

    sp = add("language", cmd_language, "factors of the level-k language")
    sp.add_argument("--directive", required=True)
    sp.add_argument("--level", type=int, default=0)
    sp.add_argument("--length", type=int, default=4)

    sp = add("expand", cmd_expand, "continued fraction expansions")
    sp.add_argument("--algorithm", choices=["gauss", "additive", "brun"], default="gauss")
    sp.add_argument("--x", required=True, help="number(s): 'phi', 'p/q' or decimals; brun takes x1,x2")
    sp.add_argument("--depth", type=int, default=20)

    sp = add("fractal", cmd_fractal, "Rauzy fractal point cloud as SVG")
    sp.add_argument("--directive", required=True)
    sp.add_argument("--n", type=int, default=20_000)
    sp.add_argument("--level", type=int, default=0)
    sp.add_argument("--out")
    sp.add_argument("--points")
    sp.add_argument("--ppm", action="store_true")
    sp.add_argument("--force", action="store_true")
    sp.add_argument("--plane", choices=["one", "u"], default="one",
                    help="representation plane: 1-perp (default) or u-perp")

    sp = add("dualplane", cmd_dualplane, "iterate E1* on a seed patch")
    sp.add_argument("--directive", required=True)
    sp.add_argument("--steps", type=int, default=8)
    sp.add_argument("--letters")
    sp.add_argument("--budget", type=int, default=10 ** 6)
    sp.add_argument("--out")
    sp.add_argument("--faces")

    sp = add("check", cmd_check, "JSON report of all diagnostics")
    sp.add_argument("--directive", required=True)
    sp.add_argument("--skip", help="comma separated section names")
    sp.add_argument("--max-n", type=int, default=16)
    sp.add_argument("--cloud", type=int, default=20_000)
    sp.add_argument("--lyapunov-n", type=int, default=5000)
    sp.add_argument("--radius-steps", type=int, default=9)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")

    sp = add("lyapunov", cmd_lyapunov, "Monte-Carlo Lyapunov exponents and the Pisot verdict")
    sp.add_argument("--family", default="brun")
    sp.add_argument("--n", type=int, default=100_000)
    sp.add_argument("--replicas", type=int, default=32)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--weights")
    sp.add_argument("--markov", action="store_true")
    sp.add_argument("--transpose", action="store_true")
    sp.add_argument("--out")

    sp = add("code", cmd_code, "compare a rotation coding with the limit word")
    sp.add_argument("--directive", required=True)
    sp.add_argument("--steps", type=int, default=1000)
    sp.add_argument("--cloud", type=int, default=10_000)

    sp = add("exchange", cmd_exchange, "domain exchange orbit of the origin")
    sp.add_argument("--directive", required=True)
    sp.add_argument("--steps", type=int, default=1000)
    sp.add_argument("--cloud", type=int, default=10_000)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else argv
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    try:
        if known.config:
            values = read_config(known.config)
            for sp in parser._subparsers._group_actions[0].choices.values():
                for a in sp._actions:
                    if a.dest not in values:
                        continue
                    v = values[a.dest]
                    if isinstance(a, argparse._StoreTrueAction):
                        v = v.lower() in ("1", "true", "yes", "on")
                    sp.set_defaults(**{a.dest: v})
                    a.required = False
        args = parser.parse_args(argv)
        return args.func(args)
    except sadic.ParseError as exc:
        print(f"error: {exc}\n  {exc.text}\n  {' ' * exc.pos}^", file=sys.stderr)
        return 2
    except (OperationalError, sadic.DirectiveError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
