"""Seeded Monte Carlo campaigns, landmark measurement and sampled probes.

Seeds
-----
Every trial gets its seeds from the master seed through
``derive_seed(master, cell, trial)``: the first 8 bytes (little endian) of
``blake2b(f"{master}:{cell}:{trial}", digest_size=8)``. Cells are the k values
in the order given. The graph for trial ``t`` uses ``cell = -1`` so that all k
values of one trial play on the same graph. Results are merged by
``(cell, trial)``, so output does not depend on the number of workers.

File schema (version 1)
-----------------------
CSV with a header row, or JSON lines; every row carries ``schema_version``.
Dict-valued fields (strategy options, diagnostics) are JSON-encoded strings in
CSV. ``duration`` is empty unless timing was requested, which keeps files
byte-identical across reruns.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Sequence

import numpy as np

from . import bounds
from .engine import MAKER, GameState, Player, play_game
from .errors import ParameterError
from .graph import Graph, InstanceSpec, induced_edge_count, make_named
from .strategies import BipartiteBreaker, make_strategy

SCHEMA_VERSION = 1
DEFAULT_WIN_THRESHOLD = 0.9


def derive_seed(master: int, cell: int, trial: int) -> int:
    digest = hashlib.blake2b(f"{master}:{cell}:{trial}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass
class ExperimentConfig:
    family: str
    n: int
    k_values: list[int]
    p: float | None = None
    maker: str = "greedy"
    breaker: str = "random"
    maker_opts: dict[str, Any] = field(default_factory=dict)
    breaker_opts: dict[str, Any] = field(default_factory=dict)
    trials: int = 1
    seed: int = 0
    first: str = "maker"
    threads: int = 1
    campaign: str = "campaign"
    timing: bool = False
    pruefer: tuple[int, ...] | None = None
    path: str | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ParameterError("trials must be >= 1")
        if not self.k_values:
            raise ParameterError("k range is empty")
        if any(k < 1 for k in self.k_values):
            raise ParameterError("every k must be >= 1")
        Player(self.first)
        self.instance(0)  # validates family parameters

    def instance(self, graph_seed: int) -> InstanceSpec:
        return InstanceSpec(self.family, self.n, self.p, graph_seed,
                            tuple(self.pruefer) if self.pruefer else None, self.path)


@dataclass
class ExperimentRecord:
    campaign: str
    family: str
    n: int
    p: float | None
    k: int
    maker: str
    breaker: str
    maker_opts: dict[str, Any]
    breaker_opts: dict[str, Any]
    first: str
    cell: int
    trial: int
    graph_seed: int
    seed: int
    winner: str
    moves: int
    witness: int | None
    colors_used: int
    max_class: int
    min_class: int
    forfeit: str | None
    diagnostics: dict[str, Any]
    duration: float | None = None
    schema_version: int = SCHEMA_VERSION
    pruefer: tuple[int, ...] | None = None
    path: str | None = None


FIELDS = [f.name for f in dataclasses.fields(ExperimentRecord)]
_INT = {"n", "k", "cell", "trial", "graph_seed", "seed", "moves", "witness", "colors_used",
        "max_class", "min_class", "schema_version"}
_FLOAT = {"p", "duration"}
_JSON = {"maker_opts", "breaker_opts", "diagnostics", "pruefer"}


def _play_one(task: tuple) -> ExperimentRecord:
    cfg, cell, k, trial = task
    graph_seed = derive_seed(cfg.seed, -1, trial)
    seed = derive_seed(cfg.seed, cell, trial)
    t0 = time.perf_counter()
    g = _graph_cache(cfg, graph_seed)
    maker = make_strategy(cfg.maker, MAKER, cfg.maker_opts)
    breaker = make_strategy(cfg.breaker, "breaker", cfg.breaker_opts)
    out = play_game(g, k, maker, breaker, seed=seed, first=cfg.first)
    sizes = [s for s in out.class_sizes if s]
    return ExperimentRecord(
        campaign=cfg.campaign, family=cfg.family, n=cfg.n, p=cfg.p, k=k,
        maker=cfg.maker, breaker=cfg.breaker,
        maker_opts=dict(cfg.maker_opts), breaker_opts=dict(cfg.breaker_opts),
        first=cfg.first, cell=cell, trial=trial, graph_seed=graph_seed, seed=seed,
        winner=out.winner.value, moves=out.moves_played, witness=out.witness,
        colors_used=len(sizes), max_class=max(sizes, default=0), min_class=min(sizes, default=0),
        forfeit=out.forfeit, diagnostics=out.diagnostics,
        duration=round(time.perf_counter() - t0, 6) if cfg.timing else None,
        pruefer=tuple(cfg.pruefer) if cfg.pruefer else None, path=cfg.path,
    )


_GRAPHS: dict[tuple, Graph] = {}


def _graph_cache(cfg: ExperimentConfig, graph_seed: int) -> Graph:
    key = (cfg.family, cfg.n, cfg.p, graph_seed, cfg.pruefer, cfg.path)
    g = _GRAPHS.get(key)
    if g is None:
        if len(_GRAPHS) > 8:
            _GRAPHS.clear()
        g = _GRAPHS[key] = make_named(cfg.instance(graph_seed))
    return g


def _tasks(cfg: ExperimentConfig) -> list[tuple]:
    # trial-major order lets consecutive tasks reuse one sampled graph
    order = [(cfg, cell, k, trial) for trial in range(cfg.trials) for cell, k in enumerate(cfg.k_values)]
    return order


def run_matches(cfg: ExperimentConfig) -> Iterator[ExperimentRecord]:
    """All trials x k values, yielded sorted by (cell, trial)."""
    tasks = _tasks(cfg)
    if cfg.threads <= 1:
        results = [_play_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(_play_one, tasks, chunksize=max(1, len(tasks) // (4 * cfg.threads))))
    results.sort(key=lambda r: (r.cell, r.trial))
    yield from results


def replay(rec: ExperimentRecord) -> ExperimentRecord:
    """Re-run one record from its own fields."""
    cfg = ExperimentConfig(
        family=rec.family, n=rec.n, p=rec.p, k_values=[rec.k], maker=rec.maker, breaker=rec.breaker,
        maker_opts=rec.maker_opts, breaker_opts=rec.breaker_opts, first=rec.first,
        campaign=rec.campaign, pruefer=rec.pruefer, path=rec.path,
    )
    g = make_named(cfg.instance(rec.graph_seed))
    out = play_game(g, rec.k, make_strategy(rec.maker, MAKER, rec.maker_opts),
                    make_strategy(rec.breaker, "breaker", rec.breaker_opts), seed=rec.seed, first=rec.first)
    sizes = [s for s in out.class_sizes if s]
    return dataclasses.replace(
        rec, winner=out.winner.value, moves=out.moves_played, witness=out.witness,
        colors_used=len(sizes), max_class=max(sizes, default=0), min_class=min(sizes, default=0),
        forfeit=out.forfeit, diagnostics=out.diagnostics, duration=None,
    )


@dataclass
class KStarReport:
    k_values: list[int]
    wins: list[int]
    losses: list[int]
    rates: list[float]
    trials: int
    win_threshold: float
    k_star: int | None

    def to_json(self) -> dict[str, Any]:
        return asdict(self)


def estimate_k_star(cfg: ExperimentConfig, win_threshold: float = DEFAULT_WIN_THRESHOLD,
                    records: list[ExperimentRecord] | None = None) -> KStarReport:
    """Maker's win rate at every k (ascending, no bisection) and the least k reaching the threshold."""
    if list(cfg.k_values) != sorted(cfg.k_values):
        raise ParameterError("k scan range must be ascending")
    recs = list(run_matches(cfg)) if records is None else records
    wins = [0] * len(cfg.k_values)
    losses = [0] * len(cfg.k_values)
    for r in recs:
        if r.winner == MAKER.value:
            wins[r.cell] += 1
        else:
            losses[r.cell] += 1
    rates = [w / cfg.trials for w in wins]
    k_star = next((k for k, rate in zip(cfg.k_values, rates) if rate >= win_threshold), None)
    return KStarReport(list(cfg.k_values), wins, losses, rates, cfg.trials, win_threshold, k_star)


# ---------------------------------------------------------------------------
# landmarks


@dataclass
class LandmarkReport:
    """``u[i]`` is the least uncolored count at which every uncolored vertex had
    at least ``d[i]`` colors, the finished board included (where it holds
    vacuously). ``u_maker[i]`` only looks at positions with Maker to move and
    something left to color, i.e. the last Maker move made while the threshold
    still held.
    """

    d: list[float]
    u: list[int | None]
    u_maker: list[int | None]
    curve: list[tuple[int, int | None, bool]]  # (uncolored, min availability, Maker to move)
    winner: str

    def to_json(self) -> dict[str, Any]:
        return asdict(self)


def min_availability(st: GameState) -> int | None:
    if st.n_uncolored == 0:
        return None
    return int(st.avail_count[st.uncolored_mask].min())


def landmarks_from_curve(curve: Sequence[tuple], d: Sequence[float], maker_only: bool = False) -> list[int | None]:
    out = []
    for di in d:
        ok = []
        for u, m, *rest in curve:
            if maker_only and (m is None or (rest and not rest[0])):
                continue
            if m is None or m >= di:
                ok.append(u)
        out.append(min(ok) if ok else None)
    return out


def measure_landmarks(g: Graph, k: int, maker, breaker, seed: int, d_sequence: Sequence[float],
                      first: str = "maker") -> LandmarkReport:
    d = list(d_sequence)
    if not d or any(x <= 0 for x in d) or any(a <= b for a, b in zip(d, d[1:])):
        raise ParameterError("d_sequence must be strictly decreasing positives")
    curve: list[tuple[int, int | None, bool]] = []

    def observe(st: GameState) -> None:
        curve.append((st.n_uncolored, min_availability(st), not st.status().over and st.to_move is MAKER))

    curve.append((g.n, k if g.n else None, Player(first) is MAKER and g.n > 0))
    out = play_game(g, k, maker, breaker, seed=seed, first=first, observer=observe)
    return LandmarkReport(d, landmarks_from_curve(curve, d), landmarks_from_curve(curve, d, maker_only=True),
                          curve, out.winner.value)


# ---------------------------------------------------------------------------
# probes

PROBES = ("lemma2", "lemma6", "lemma9", "escape_mass")


@dataclass
class ProbeReport:
    probe: str
    family: str
    n: int
    p: float
    samples: int
    seed: int
    rows: list[dict[str, Any]]
    violations: int
    quantiles: dict[str, float]
    sampled: bool = True
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> dict[str, Any]:
        return asdict(self)


def _quantiles(values: Sequence[float]) -> dict[str, float]:
    if not len(values):
        return {}
    qs = np.quantile(np.asarray(values, dtype=float), [0, 0.25, 0.5, 0.75, 1.0])
    return {name: float(v) for name, v in zip(("min", "q25", "median", "q75", "max"), qs)}


def _union_rows(g: Graph, vs: Iterable[int]) -> int:
    acc = 0
    for v in vs:
        acc |= g.row(int(v))
    return acc


def probe(probe_id: str, spec: InstanceSpec, samples: int, seed: int, *, size: int | None = None,
          max_size: int = 10, k: int | None = None, maker: str = "greedy",
          breaker_opts: dict[str, Any] | None = None) -> ProbeReport:
    """Sampled checks of set statistics against their stated bounds.

    lemma2: |non-neighbourhood| of random ``size``-sets against the window
        [mu / log n, mu log n], mu = (n - s)(1-p)^s.
    lemma6: edges spanned by random sets of random size in 2..n against
        (5ps + log n) s.
    lemma9: Maker-side non-neighbours of random Breaker-side sets of size
        1..max_size against 2n(1-p)^l.
    escape_mass: ``samples`` bipartite-Breaker games; a violation is a game
        where nu_M > nu_B without a concession.
    """
    if probe_id not in PROBES:
        raise ParameterError(f"unknown probe {probe_id!r}; choose from {PROBES}")
    if samples < 1:
        raise ParameterError("samples must be >= 1")
    bip = probe_id in ("lemma9", "escape_mass")
    if bip != spec.bipartite:
        need = "a bipartite" if bip else "a non-bipartite"
        raise ParameterError(f"{probe_id} probe needs {need} family, got {spec.family}")
    g = make_named(spec)
    rng = np.random.default_rng(seed)
    n_side = g.n // 2 if bip else g.n
    pairs = n_side * n_side if bip else g.n * (g.n - 1) / 2
    p = spec.p if spec.p is not None else (g.edge_count / pairs if pairs else 0.0)
    rows: list[dict[str, Any]] = []
    stat_values: list[float] = []

    if probe_id == "lemma2":
        if size is None or not 1 <= size <= g.n:
            raise ParameterError("lemma2 probe needs size in 1..n")
        mu = (g.n - size) * (1 - p) ** size
        ln = math.log(g.n) if g.n > 1 else 1.0
        lo, hi = mu / max(ln, 1.0), mu * max(ln, 1.0)
        full = (1 << g.n) - 1
        for i in range(samples):
            s = rng.choice(g.n, size=size, replace=False)
            sbits = sum(1 << int(v) for v in s)
            stat = (full & ~(sbits | _union_rows(g, s))).bit_count()
            viol = not lo <= stat <= hi
            rows.append({"index": i, "size": size, "statistic": stat, "expected": mu, "lower": lo, "upper": hi, "violation": viol})
            stat_values.append(stat)

    elif probe_id == "lemma6":
        from .graph import VertexSet
        hi_size = g.n if size is None else size
        if hi_size < 2:
            raise ParameterError("lemma6 probe needs n >= 2")
        for i in range(samples):
            s_size = int(rng.integers(2, hi_size + 1))
            s = rng.choice(g.n, size=s_size, replace=False)
            e = induced_edge_count(g, VertexSet.of(g.n, s.tolist()))
            bound = bounds.phi(s_size, g.n, p)
            rows.append({"index": i, "size": s_size, "statistic": e, "bound": bound, "violation": e > bound})
            stat_values.append(e)

    elif probe_id == "lemma9":
        wm = g.side(0).bits
        side_b = np.flatnonzero(g.part == 1)
        top = min(max_size, len(side_b))
        for i in range(samples):
            ell = int(rng.integers(1, top + 1))
            L = rng.choice(side_b, size=ell, replace=False)
            stat = (wm & ~_union_rows(g, L)).bit_count()
            bound = 2 * n_side * (1 - p) ** ell
            rows.append({"index": i, "size": ell, "statistic": stat, "bound": bound, "violation": stat > bound})
            stat_values.append(stat)

    else:  # escape_mass
        if k is None:
            try:
                k = max(1, math.floor(bounds.derive_parameters(n_side, p, eta=0.0).k_bip))
            except ParameterError:
                k = 1
        for i in range(samples):
            game_seed = derive_seed(seed, 0, i)
            opts = {"p": p, **(breaker_opts or {})}
            br = BipartiteBreaker(**opts)
            out = play_game(g, k, make_strategy(maker, MAKER), br, seed=game_seed)
            diag = out.diagnostics["breaker"]
            viol = (not diag["conceded"]) and diag["nu_M"] > diag["nu_B"]
            rows.append({
                "index": i, "seed": game_seed, "k": k, "winner": out.winner.value,
                "t": diag["t"], "m": [e["m"] for e in diag["escaped_colors"].values()],
                "statistic": diag["escape_mass"], "case": diag["escape_case"],
                "nu_M": diag["nu_M"], "nu_B": diag["nu_B"], "conceded": diag["conceded"],
                "dead": len(diag["dead_colors"]), "violation": viol,
            })
            stat_values.append(diag["escape_mass"])

    return ProbeReport(
        probe=probe_id, family=spec.family, n=spec.n, p=p, samples=samples, seed=seed, rows=rows,
        violations=sum(1 for r in rows if r["violation"]), quantiles=_quantiles(stat_values),
    )


# ---------------------------------------------------------------------------
# persistence


def _cell(name: str, value: Any) -> str:
    if value is None:
        return ""
    if name in _JSON:
        return json.dumps(list(value) if name == "pruefer" else value, sort_keys=True, separators=(",", ":"))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _uncell(name: str, text: str) -> Any:
    if text == "" and name not in ("campaign", "family", "maker", "breaker", "first", "winner"):
        return None
    if name in _JSON:
        v = json.loads(text)
        return tuple(v) if name == "pruefer" else v
    if name in _INT:
        return int(text)
    if name in _FLOAT:
        return float(text)
    return text


def records_to_csv(records: Iterable[ExperimentRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELDS)
    for r in records:
        w.writerow([_cell(f, getattr(r, f)) for f in FIELDS])
    return buf.getvalue()


def records_to_jsonl(records: Iterable[ExperimentRecord]) -> str:
    lines = []
    for r in records:
        d = asdict(r)
        if d["pruefer"] is not None:
            d["pruefer"] = list(d["pruefer"])
        lines.append(json.dumps(d, sort_keys=True, separators=(",", ":")))
    return "".join(line + "\n" for line in lines)


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".part")
    try:
        tmp.write_text(text)
        os.replace(tmp, path)
    except OSError as exc:
        tmp.unlink(missing_ok=True)
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def persist(obj: Iterable[ExperimentRecord] | ProbeReport, path: str | Path, fmt: str | None = None) -> Path:
    """Write records (csv or jsonl) or a probe report (json, jsonl or csv rows)."""
    path = Path(path)
    fmt = fmt or ("csv" if path.suffix == ".csv" else "jsonl")
    if isinstance(obj, ProbeReport):
        if fmt == "csv":
            keys = sorted({key for row in obj.rows for key in row})
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["schema_version", "probe"] + keys)
            for row in obj.rows:
                w.writerow([SCHEMA_VERSION, obj.probe] + [json.dumps(row.get(key)) for key in keys])
            text = buf.getvalue()
        else:
            text = json.dumps(obj.to_json(), sort_keys=True) + "\n"
    else:
        records = list(obj)
        text = records_to_csv(records) if fmt == "csv" else records_to_jsonl(records)
    _atomic_write(path, text)
    return path


def read_records(path: str | Path) -> list[ExperimentRecord]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if path.suffix == ".csv":
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], rows[1:]
        return [ExperimentRecord(**{h: _uncell(h, cell) for h, cell in zip(header, row)}) for row in body]
    out = []
    for line in text.splitlines():
        if line.strip():
            d = json.loads(line)
            if d.get("pruefer") is not None:
                d["pruefer"] = tuple(d["pruefer"])
            out.append(ExperimentRecord(**d))
    return out


def read_probe_report(path: str | Path) -> ProbeReport:
    return ProbeReport(**json.loads(Path(path).read_text()))
