"""Command line entry point: ``colorgame <subcommand> [flags]``.

Exit status: 0 on success, 2 on usage errors (bad flags or parameter values),
1 on runtime failures. Results go to stdout unless ``--output`` is given;
files are written only after the computation succeeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Sequence

from . import bounds, experiments
from .engine import MAKER, play_game
from .errors import CapacityError, ParameterError, ParseError
from .graph import FAMILIES, InstanceSpec, encode_graph, make_named
from .solver import Solver, chromatic_number_exact
from .strategies import make_strategy, parse_opts


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _k_range(text: str) -> list[int]:
    """``a:b`` (inclusive) or a comma list."""
    if ":" in text:
        try:
            a, b = (int(x) for x in text.split(":", 1))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad k range {text!r}") from None
        return list(range(a, b + 1))
    return _int_list(text)


def _family(text: str) -> str:
    fam = text.replace("-", "_")
    if fam not in FAMILIES:
        raise argparse.ArgumentTypeError(f"unknown family {text!r}; choose from {', '.join(FAMILIES)}")
    return fam


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--output", "-o", help="write results to this path instead of stdout")
    common.add_argument("--format", choices=("json", "csv", "table"), help="output format")
    common.add_argument("--threads", type=int, default=1, help="worker processes for mc/kstar")

    inst = argparse.ArgumentParser(add_help=False)
    inst.add_argument("--family", type=_family, default="gnp")
    inst.add_argument("--n", type=int, default=10, help="vertex count (per side for bipartite families)")
    inst.add_argument("--p", type=float, help="edge probability")
    inst.add_argument("--pruefer", type=_int_list, help="Pruefer sequence for tree_from_pruefer")
    inst.add_argument("--file", help="edge-list file for from_file")
    inst.add_argument("--graph-seed", type=int, help="graph seed (defaults to --seed)")

    players = argparse.ArgumentParser(add_help=False)
    players.add_argument("--maker", default="greedy")
    players.add_argument("--breaker", default="random")
    players.add_argument("--maker-opt", action="append", default=[], metavar="KEY=VALUE")
    players.add_argument("--breaker-opt", action="append", default=[], metavar="KEY=VALUE")
    players.add_argument("--first", choices=("maker", "breaker"), default="maker")

    params = argparse.ArgumentParser(add_help=False)
    params.add_argument("--eps", type=float, default=0.1)
    params.add_argument("--alpha", type=float, default=3.0)
    params.add_argument("--eta", type=float, default=bounds.DEFAULT_ETA)

    parser = argparse.ArgumentParser(prog="colorgame", description="Vertex-coloring game toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("gen", parents=[common, inst], help="generate a graph as an edge list")

    p = sub.add_parser("play", parents=[common, inst, players], help="play one game")
    p.add_argument("--k", type=int, required=True)

    p = sub.add_parser("solve", parents=[common, inst], help="exact winner of the fresh position")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--first", choices=("maker", "breaker"), default="maker")

    p = sub.add_parser("chi-game", parents=[common, inst], help="exact game chromatic number")
    p.add_argument("--kmax", type=int)
    p.add_argument("--first", choices=("maker", "breaker"), default="maker")

    p = sub.add_parser("bounds", parents=[common, params], help="thresholds and theorem bounds")
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--p", type=float, required=True)

    for name, helptext in (("mc", "Monte Carlo campaign"), ("kstar", "empirical least winning k")):
        p = sub.add_parser(name, parents=[common, inst, players], help=helptext)
        p.add_argument("--k", type=_k_range, required=True, help="k values: 'a:b' or comma list")
        p.add_argument("--trials", type=int, default=10)
        p.add_argument("--campaign", default=name)
        p.add_argument("--timing", action="store_true", help="record wall-clock durations")
        if name == "kstar":
            p.add_argument("--win-threshold", type=float, default=experiments.DEFAULT_WIN_THRESHOLD)
            p.add_argument("--records", help="also write per-game records to this path")

    p = sub.add_parser("landmarks", parents=[common, inst, players, params], help="availability landmarks of one game")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=_float_list, help="strictly decreasing thresholds (default: halving from k)")

    p = sub.add_parser("probe", parents=[common, inst], help="sampled set-statistic probes")
    p.add_argument("--probe", choices=experiments.PROBES, required=True)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--size", type=int, help="set size (lemma2) or maximum set size (lemma6)")
    p.add_argument("--max-size", type=int, default=10, help="largest Breaker-side set (lemma9)")
    p.add_argument("--k", type=int, help="colors for escape_mass games")
    p.add_argument("--maker", default="greedy")
    p.add_argument("--breaker-opt", action="append", default=[], metavar="KEY=VALUE")
    return parser


def _instance(args) -> InstanceSpec:
    gseed = args.graph_seed if args.graph_seed is not None else args.seed
    return InstanceSpec(args.family, args.n, args.p, gseed,
                        tuple(args.pruefer) if args.pruefer else None, args.file)


def _table(rows: Sequence[tuple[str, Any]]) -> str:
    width = max((len(k) for k, _ in rows), default=0)
    out = []
    for key, val in rows:
        if isinstance(val, float):
            val = f"{val:.6g}"
        out.append(f"{key:<{width}}  {val}")
    return "\n".join(out) + "\n"


def _flat(d: dict[str, Any], prefix: str = "") -> list[tuple[str, Any]]:
    rows = []
    for key, val in d.items():
        if isinstance(val, dict):
            rows += _flat(val, f"{prefix}{key}.")
        else:
            rows.append((f"{prefix}{key}", val))
    return rows


def _finite(obj: Any) -> Any:
    """Strict JSON has no NaN/Infinity; those become strings."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def _json(obj: Any) -> str:
    return json.dumps(_finite(obj), indent=2, allow_nan=False) + "\n"


def _dump(obj: dict[str, Any], fmt: str | None) -> str:
    if fmt in (None, "table"):
        return _table(_flat(obj))
    return _json(obj)


def _emit(text: str, args) -> None:
    if args.output:
        experiments._atomic_write(Path(args.output), text)
    else:
        sys.stdout.write(text)


def cmd_gen(args) -> None:
    g = make_named(_instance(args))
    if args.format == "json":
        text = json.dumps({"n": g.n, "edges": g.edges.tolist(),
                           "part": None if g.part is None else g.part.tolist()}) + "\n"
    else:
        text = encode_graph(g)
    _emit(text, args)


def cmd_play(args) -> None:
    g = make_named(_instance(args))
    maker = make_strategy(args.maker, MAKER, parse_opts(args.maker_opt))
    breaker = make_strategy(args.breaker, "breaker", parse_opts(args.breaker_opt))
    out = play_game(g, args.k, maker, breaker, seed=args.seed, first=args.first)
    data = out.to_json()
    if args.format == "table":
        rows = [("winner", data["winner"]), ("witness", data["witness"]), ("moves_played", data["moves_played"]),
                ("colors_used", sum(1 for s in data["class_sizes"] if s))]
        rows += _flat(data["diagnostics"], "diagnostics.")
        _emit(_table(rows), args)
    else:
        _emit(_json(data), args)


def cmd_solve(args) -> None:
    g = make_named(_instance(args))
    solver = Solver()
    winner = solver.solve(g, args.k, args.first)
    _emit(_dump({"k": args.k, "first": args.first, "winner": winner.value, **solver.last_stats}, args.format), args)


def cmd_chi_game(args) -> None:
    g = make_named(_instance(args))
    report = Solver().game_chromatic(g, args.kmax, args.first)
    data = report.to_json()
    if g.n <= 20:
        data["chromatic_number"] = chromatic_number_exact(g)
    _emit(_dump(data, args.format), args)


def cmd_bounds(args) -> None:
    ps = bounds.derive_parameters(args.n, args.p, args.eps, args.alpha, args.eta)
    br = bounds.theorem_bounds(args.n, args.p, args.eps, args.alpha, args.eta)
    data = {"parameters": ps.to_dict(), "bounds": br.to_dict()}
    if args.format in (None, "table"):
        d = ps.to_dict()
        d["x"] = ", ".join(f"{v:.6g}" for v in ps.x)
        d["d"] = ", ".join(f"{v:.6g}" for v in ps.d)
        _emit(_table(_flat({"parameters": d, "bounds": br.to_dict()})), args)
    else:
        _emit(_json(data), args)


def _config(args) -> experiments.ExperimentConfig:
    return experiments.ExperimentConfig(
        family=args.family, n=args.n, p=args.p, k_values=args.k,
        maker=args.maker, breaker=args.breaker,
        maker_opts=parse_opts(args.maker_opt), breaker_opts=parse_opts(args.breaker_opt),
        trials=args.trials, seed=args.seed, first=args.first, threads=args.threads,
        campaign=args.campaign, timing=args.timing,
        pruefer=tuple(args.pruefer) if args.pruefer else None, path=args.file,
    )


def _validate_players(cfg: experiments.ExperimentConfig) -> None:
    make_strategy(cfg.maker, MAKER, cfg.maker_opts)
    make_strategy(cfg.breaker, "breaker", cfg.breaker_opts)


def cmd_mc(args) -> None:
    cfg = _config(args)
    _validate_players(cfg)
    fmt = "jsonl" if args.format == "json" else "csv"
    path = Path(args.output) if args.output else Path(f"{cfg.campaign}-{cfg.seed}.{fmt}")
    records = list(experiments.run_matches(cfg))
    experiments.persist(records, path, fmt)
    wins = sum(r.winner == MAKER.value for r in records)
    sys.stderr.write(f"wrote {len(records)} records to {path} (maker wins {wins})\n")


def cmd_kstar(args) -> None:
    cfg = _config(args)
    _validate_players(cfg)
    records = list(experiments.run_matches(cfg))
    report = experiments.estimate_k_star(cfg, args.win_threshold, records)
    if args.records:
        experiments.persist(records, args.records)
    data = report.to_json()
    if args.format in (None, "table"):
        rows = [(f"k={k}", f"{w}/{w + l}  rate={r:.3f}") for k, w, l, r in
                zip(report.k_values, report.wins, report.losses, report.rates)]
        rows.append(("k_star", report.k_star))
        _emit(_table(rows), args)
    else:
        _emit(_json(data), args)


def cmd_landmarks(args) -> None:
    g = make_named(_instance(args))
    d = args.d
    if d is None:
        d, x = [], float(args.k)
        while x >= 1:
            d.append(x)
            x /= 2
    maker = make_strategy(args.maker, MAKER, parse_opts(args.maker_opt))
    breaker = make_strategy(args.breaker, "breaker", parse_opts(args.breaker_opt))
    report = experiments.measure_landmarks(g, args.k, maker, breaker, args.seed, d, args.first)
    data = report.to_json()
    if args.format in (None, "table"):
        rows = [(f"d={di:g}", f"u={ui}  u_maker={um}") for di, ui, um in zip(report.d, report.u, report.u_maker)]
        rows.append(("winner", report.winner))
        _emit(_table(rows), args)
    else:
        _emit(_json(data), args)


def cmd_probe(args) -> None:
    spec = _instance(args)
    report = experiments.probe(args.probe, spec, args.samples, args.seed, size=args.size,
                               max_size=args.max_size, k=args.k, maker=args.maker,
                               breaker_opts=parse_opts(args.breaker_opt))
    if args.output:
        fmt = "csv" if args.format == "csv" else "json"
        experiments.persist(report, args.output, fmt)
    data = report.to_json()
    if args.format in (None, "table"):
        rows = [("probe", report.probe), ("samples", report.samples), ("violations", report.violations),
                ("sampled", report.sampled)] + _flat(report.quantiles, "statistic.")
        sys.stdout.write(_table(rows))
    elif not args.output:
        sys.stdout.write(_json(data))


COMMANDS = {
    "gen": cmd_gen, "play": cmd_play, "solve": cmd_solve, "chi-game": cmd_chi_game,
    "bounds": cmd_bounds, "mc": cmd_mc, "kstar": cmd_kstar, "landmarks": cmd_landmarks,
    "probe": cmd_probe,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args)
    except (ParameterError, ParseError) as exc:
        sys.stderr.write(f"colorgame {args.command}: error: {exc}\n")
        return 2
    except (CapacityError, OSError, RuntimeError) as exc:
        sys.stderr.write(f"colorgame {args.command}: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
