"""Move-selection policies.

A strategy is bound to one game: ``start(state, rng)`` is called by the
referee before the first move, then ``next_move(state)`` whenever it is the
strategy's turn. All randomness comes from the generator handed to ``start``.
"Arbitrary" choices are seeded-uniform over the allowed set.
"""

from __future__ import annotations

import math
from typing import Any

import numpy as np

from . import bounds
from .engine import BREAKER, MAKER, GameState, Move, Player
from .errors import ParameterError
from .graph import DENSE_LIMIT, EXACT_MIS_LIMIT, Graph, VertexSet, greedy_independent_indices, independent_set


def _edge_density(g: Graph) -> float:
    if g.part is not None:
        left = int((g.part == 0).sum())
        pairs = left * (g.n - left)
    else:
        pairs = g.n * (g.n - 1) // 2
    return g.edge_count / pairs if pairs else 0.0


def _pick(rng: np.random.Generator, idx: np.ndarray) -> int:
    return int(idx[rng.integers(len(idx))])


def random_vertex_for_color(st: GameState, c: int, rng: np.random.Generator, within: np.ndarray | None = None) -> int | None:
    cand = st.uncolored_mask & st.avail[:, c - 1]
    if within is not None:
        cand &= within
    idx = np.flatnonzero(cand)
    return _pick(rng, idx) if len(idx) else None


def random_legal_move(st: GameState, rng: np.random.Generator, within: np.ndarray | None = None) -> Move | None:
    """Uniform over legal (vertex, color) pairs, optionally restricted to a vertex mask."""
    mask = st.uncolored_mask if within is None else st.uncolored_mask & within
    counts = np.where(mask, st.avail_count, 0)
    cum = np.cumsum(counts)
    total = int(cum[-1]) if len(cum) else 0
    if total == 0:
        return None
    r = int(rng.integers(total))
    v = int(np.searchsorted(cum, r, side="right"))
    offset = r - (int(cum[v - 1]) if v else 0)
    c = int(np.flatnonzero(st.avail[v])[offset]) + 1
    return Move(v, c)


class Strategy:
    name = "base"
    roles: tuple[Player, ...] = (MAKER, BREAKER)

    def __init__(self, role: Player | str):
        self.role = Player(role)
        if self.role not in self.roles:
            raise ParameterError(f"{self.name} strategy cannot play {self.role.value}")
        self.rng: np.random.Generator | None = None

    def start(self, st: GameState, rng: np.random.Generator) -> None:
        self.rng = rng

    def next_move(self, st: GameState) -> Move | None:
        raise NotImplementedError

    def diagnostics(self) -> dict[str, Any]:
        return {}


class RandomStrategy(Strategy):
    """Uniform over legal (vertex, color) pairs."""

    name = "random"

    def next_move(self, st):
        return random_legal_move(st, self.rng)


class GreedyMaker(Strategy):
    """Color a vertex with the fewest available colors.

    ``tie='low'`` takes the lowest index among minimisers, ``tie='random'`` a
    seeded-uniform one; ``color`` likewise picks the lowest or a random
    available color.
    """

    name = "greedy"
    roles = (MAKER,)

    def __init__(self, role=MAKER, tie: str = "low", color: str = "low"):
        super().__init__(role)
        if tie not in ("low", "random") or color not in ("low", "random"):
            raise ParameterError("tie and color must be 'low' or 'random'")
        self.tie = tie
        self.color = color

    def next_move(self, st):
        live = st.uncolored_mask & (st.avail_count > 0)
        if not live.any():
            return None
        counts = np.where(live, st.avail_count, np.iinfo(np.int64).max)
        if self.tie == "low":
            v = int(np.argmin(counts))
        else:
            v = _pick(self.rng, np.flatnonzero(counts == counts.min()))
        colors = np.flatnonzero(st.avail[v])
        c = int(colors[0]) if self.color == "low" else _pick(self.rng, colors)
        return Move(v, c + 1)


ARBITRARY = "arbitrary"
ELIMINATING = "eliminating"
EXHAUSTED = "exhausted"


class EliminationBreaker(Strategy):
    """Breaker answers each Maker color with the same color.

    Below ``l1`` uses of a color the reply vertex is arbitrary. Once the class
    holds ``l1`` vertices Breaker fixes an independent set ``I`` among the
    vertices that can still take the color and keeps coloring the candidate
    that kills the most of ``I``. When ``|I| <= l3`` a fresh set is taken if
    one of size ``>= l2`` exists; otherwise the color is exhausted and played
    arbitrarily from then on.

    Thresholds are injected (``l1``, ``l2``, ``l3``) or derived from
    ``bounds.derive_parameters`` with the documented clamps. ``mis`` selects
    the independent-set routine: ``auto`` (exact up to ``mis_limit`` vertices,
    min-degree greedy beyond), ``exact`` or ``greedy``.
    """

    name = "elimination"
    roles = (BREAKER,)

    def __init__(self, role=BREAKER, l1: int | None = None, l2: int | None = None, l3: int | None = None,
                 eps: float = 0.1, p: float | None = None, mis: str = "auto", mis_limit: int = EXACT_MIS_LIMIT,
                 iteration_cap: int | None = None, record: bool = False):
        super().__init__(role)
        if mis not in ("auto", "exact", "greedy"):
            raise ParameterError(f"unknown mis mode {mis!r}")
        self.inject = {"l1": l1, "l2": l2, "l3": l3}
        self.eps = eps
        self.p = p
        self.mis = mis
        self.mis_limit = mis_limit
        self.iteration_cap = iteration_cap
        self.record = record
        self.trace: list[dict[str, Any]] = []

    def start(self, st, rng):
        super().start(st, rng)
        th = dict(self.inject)
        cap = self.iteration_cap
        self.clamps: list[str] = []
        if any(v is None for v in th.values()) or cap is None:
            p = self.p if self.p is not None else _edge_density(st.graph)
            try:
                derived = bounds.clamped_cutoffs(bounds.derive_parameters(st.n, p, self.eps, 3.0, eta=0.0))
            except ParameterError as exc:
                derived = {"l1": 1, "l2": 1, "l3": 1, "iteration_cap": math.ceil(2000 / self.eps**2),
                           "clamps": [f"parameters underivable ({exc}); cut-offs set to 1"]}
            used = [key for key in ("l1", "l2", "l3") if th[key] is None]
            for key in used:
                th[key] = derived[key]
            self.clamps = [c for c in derived["clamps"] if c.split(":")[0] in used or c.startswith("parameters")]
            if cap is None:
                cap = derived["iteration_cap"]
        self.l1, self.l2, self.l3 = th["l1"], th["l2"], th["l3"]
        self.cap = cap
        self.phase: dict[int, str] = {}
        self.indep: dict[int, np.ndarray] = {}
        self.iteration: dict[int, int] = {}
        self.counts = {"responses": 0, "fallbacks": 0, "unprompted": 0, "eliminating_moves": 0,
                       "mis_exact": 0, "mis_greedy": 0, "exhausted": 0}
        self._dense = st.graph.n <= DENSE_LIMIT

    # -- helpers ---------------------------------------------------------

    def _candidates(self, st: GameState, c: int) -> np.ndarray:
        return st.uncolored_mask & st.avail[:, c - 1]

    def _independent(self, st: GameState, cand: np.ndarray) -> np.ndarray:
        idx = np.flatnonzero(cand)
        out = np.zeros(st.n, dtype=bool)
        if not len(idx):
            return out
        exact = self.mis == "exact" or (self.mis == "auto" and len(idx) <= self.mis_limit)
        if exact:
            self.counts["mis_exact"] += 1
            chosen = independent_set(st.graph, VertexSet.from_mask(cand), "exact", limit=max(self.mis_limit, len(idx))).to_list()
            out[chosen] = True
        else:
            self.counts["mis_greedy"] += 1
            g = st.graph
            sub = g.matrix[np.ix_(idx, idx)] if self._dense else _sparse_sub(g, idx)
            out[idx[greedy_independent_indices(sub)]] = True
        return out

    def _hits(self, st: GameState, cand_idx: np.ndarray, target: np.ndarray) -> np.ndarray:
        g = st.graph
        if self._dense:
            return g.matrix[cand_idx][:, target].sum(axis=1)
        return np.array([target[g.neighbors(v)].sum() for v in cand_idx.tolist()], dtype=np.int64)

    def _arbitrary(self, st, c):
        return Move(random_vertex_for_color(st, c, self.rng), c)

    # -- policy ----------------------------------------------------------

    def next_move(self, st):
        last = st.last_move(MAKER)
        if last is not None and self._candidates(st, last.color).any():
            self.counts["responses"] += 1
            return self._respond(st, last.color)
        self.counts["fallbacks" if last is not None else "unprompted"] += 1
        playable = (st.avail & st.uncolored_mask[:, None]).any(axis=0)
        best = None
        for c in range(1, st.k + 1):
            if playable[c - 1] and self.phase.get(c) != EXHAUSTED:
                if best is None or st.class_sizes[c - 1] < st.class_sizes[best - 1]:
                    best = c
        if best is None:
            return random_legal_move(st, self.rng)
        return self._arbitrary(st, best)

    def _respond(self, st: GameState, c: int) -> Move:
        phase = self.phase.get(c, ARBITRARY)
        if phase == EXHAUSTED or (phase == ARBITRARY and st.class_sizes[c - 1] < self.l1):
            return self._arbitrary(st, c)
        cand = self._candidates(st, c)
        if phase == ARBITRARY:
            self.phase[c] = ELIMINATING
            self.indep[c] = self._independent(st, cand)
            self.iteration[c] = 1
        indep = self.indep[c] & cand
        if indep.sum() <= self.l3:
            fresh = self._independent(st, cand) if self.iteration[c] < self.cap else None
            if fresh is None or fresh.sum() < self.l2:
                self.phase[c] = EXHAUSTED
                self.counts["exhausted"] += 1
                self.indep.pop(c, None)
                return self._arbitrary(st, c)
            indep = fresh
            self.iteration[c] += 1
        cand_idx = np.flatnonzero(cand)
        hits = self._hits(st, cand_idx, indep)
        v = int(cand_idx[int(np.argmax(hits))])
        after = indep.copy()
        after[st.graph.neighbors(v)] = False
        self.indep[c] = after
        self.counts["eliminating_moves"] += 1
        if self.record:
            self.trace.append({
                "color": c,
                "iteration": self.iteration[c],
                "candidates": cand_idx.tolist(),
                "indep_before": np.flatnonzero(indep).tolist(),
                "vertex": v,
                "hits": int(hits.max()),
                "indep_after": np.flatnonzero(after).tolist(),
            })
        return Move(v, c)

    def diagnostics(self):
        phases = list(self.phase.values())
        return {
            "l1": self.l1, "l2": self.l2, "l3": self.l3, "iteration_cap": self.cap,
            "clamps": self.clamps,
            "eliminating_colors": phases.count(ELIMINATING),
            "exhausted_colors": phases.count(EXHAUSTED),
            "max_iteration": max(self.iteration.values(), default=0),
            **self.counts,
        }


def _sparse_sub(g: Graph, idx: np.ndarray) -> np.ndarray:
    local = np.full(g.n, -1, dtype=np.int64)
    local[idx] = np.arange(len(idx))
    sub = np.zeros((len(idx), len(idx)), dtype=bool)
    for i, v in enumerate(idx.tolist()):
        nb = local[g.neighbors(v)]
        sub[i, nb[nb >= 0]] = True
    return sub


class BipartiteBreaker(Strategy):
    """Breaker plays only on his own side of a bipartite graph.

    Rules, in order: never color a Maker-side vertex; never use a dead color
    (one available on fewer than ``dead_threshold`` uncolored Maker-side
    vertices); answer a Maker-side move in kind when possible. A live color
    that no Breaker-side vertex can take any more has escaped; its Maker-side
    class size ``m_i`` is recorded and contributes ``(1-p)^m_i`` to the escape
    mass. When every color is dead or escaped Breaker keeps coloring
    arbitrarily on his side; if his side is full he concedes a Maker-side
    move, flagged in the diagnostics.
    """

    name = "bipartite"
    roles = (BREAKER,)

    def __init__(self, role=BREAKER, breaker_side: int = 1, dead_threshold: float | None = None,
                 p: float | None = None, record: bool = False):
        super().__init__(role)
        if breaker_side not in (0, 1):
            raise ParameterError("breaker_side must be 0 or 1")
        self.breaker_side = breaker_side
        self.dead_threshold_opt = dead_threshold
        self.p_opt = p
        self.record = record
        self.trace: list[dict[str, Any]] = []

    def start(self, st, rng):
        super().start(st, rng)
        g = st.graph
        if g.part is None:
            raise ParameterError("bipartite strategy needs a graph with side labels")
        self.bmask = g.part == self.breaker_side
        self.mmask = ~self.bmask
        n_m = int(self.mmask.sum())
        self.p = self.p_opt if self.p_opt is not None else _edge_density(g)
        self.lambda0 = None
        if self.dead_threshold_opt is not None:
            self.threshold = float(self.dead_threshold_opt)
        else:
            try:
                ps = bounds.derive_parameters(n_m, self.p, 0.1, 3.0, eta=0.0)
                self.threshold = ps.dead_threshold
                self.lambda0 = ps.lambda0
            except ParameterError:
                self.threshold = math.inf
        self.dead: set[int] = set()
        self.escaped: dict[int, dict[str, int]] = {}
        self.in_kind = 0
        self.arbitrary_live = 0
        self.after_stop = 0
        self.conceded = False
        self.stopped = False
        self.nu = (0, 0)
        self.max_live_breaker_class = 0

    def _side_counts(self, st: GameState, mask: np.ndarray) -> np.ndarray:
        return (st.avail & (st.uncolored_mask & mask)[:, None]).sum(axis=0)

    def _class_on(self, st: GameState, c: int, mask: np.ndarray) -> int:
        return int(((st.color_of == c) & mask).sum())

    def next_move(self, st):
        k = st.k
        avail_m = self._side_counts(st, self.mmask)
        avail_b = self._side_counts(st, self.bmask)
        for c in range(1, k + 1):
            if c not in self.dead and avail_m[c - 1] < self.threshold:
                self.dead.add(c)
        for c in range(1, k + 1):
            if c in self.dead or c in self.escaped:
                continue
            if avail_b[c - 1] == 0:
                self.escaped[c] = {"m": self._class_on(st, c, self.mmask), "b": self._class_on(st, c, self.bmask)}
        live = [c for c in range(1, k + 1) if c not in self.dead and c not in self.escaped]
        for c in live:
            self.max_live_breaker_class = max(self.max_live_breaker_class, self._class_on(st, c, self.bmask))

        last = st.last_move(MAKER)
        kind = None
        move = None
        if live:
            if last is not None and self.mmask[last.vertex] and last.color in live:
                c = last.color
                kind = "in_kind"
                self.in_kind += 1
            else:
                c = live[int(self.rng.integers(len(live)))]
                kind = "arbitrary_live"
                self.arbitrary_live += 1
            move = Move(random_vertex_for_color(st, c, self.rng, self.bmask), c)
            colored_m = int((~st.uncolored_mask & self.mmask).sum())
            colored_b = int((~st.uncolored_mask & self.bmask).sum()) + 1
            self.nu = (colored_m, colored_b)
        else:
            self.stopped = True
            move = random_legal_move(st, self.rng, self.bmask)
            kind = "after_stop"
            self.after_stop += 1
            if move is None:
                move = random_legal_move(st, self.rng)
                self.conceded = True
                kind = "concession"
        if self.record:
            self.trace.append({
                "kind": kind,
                "dead": sorted(self.dead),
                "escaped": sorted(self.escaped),
                "vertex": move.vertex if move else None,
                "color": move.color if move else None,
                "maker_last": tuple(last) if last else None,
            })
        return move

    def escape_mass(self) -> float:
        return math.fsum((1 - self.p) ** e["m"] for e in self.escaped.values())

    def diagnostics(self):
        alpha = self.escape_mass()
        return {
            "dead_threshold": self.threshold if math.isfinite(self.threshold) else None,
            "lambda0": self.lambda0,
            "dead_colors": sorted(self.dead),
            "escaped_colors": {str(c): e for c, e in sorted(self.escaped.items())},
            "escape_mass": alpha,
            "escape_case": "case1" if alpha < 1 / 6 else "case2",
            "t": len(self.escaped),
            "nu_M": self.nu[0],
            "nu_B": self.nu[1],
            "stopped": self.stopped,
            "conceded": self.conceded,
            "in_kind": self.in_kind,
            "arbitrary_live": self.arbitrary_live,
            "after_stop": self.after_stop,
            "max_live_breaker_class": self.max_live_breaker_class,
        }


class MirrorBreaker(Strategy):
    """On K_{n,n} minus the matching ``i <-> n+i``, copy Maker's color onto the partner vertex."""

    name = "mirror"
    roles = (BREAKER,)

    def start(self, st, rng):
        super().start(st, rng)
        g = st.graph
        if g.part is None or g.n % 2:
            raise ParameterError("mirror strategy needs K_{n,n} minus a perfect matching")
        half = g.n // 2
        ok = all(g.degree(v) == half - 1 and not g.has_edge(v, (v + half) % g.n) for v in range(g.n))
        if not ok or g.edge_count != half * (half - 1):
            raise ParameterError("mirror strategy needs K_{n,n} minus the matching i <-> n+i")
        self.half = half
        self.fallbacks = 0
        self.unprompted = 0

    def partner(self, v: int) -> int:
        return (v + self.half) % (2 * self.half)

    def next_move(self, st):
        last = st.last_move(MAKER)
        if last is None:
            self.unprompted += 1
            return random_legal_move(st, self.rng)
        u = self.partner(last.vertex)
        if st.is_legal(u, last.color):
            return Move(u, last.color)
        self.fallbacks += 1
        return random_legal_move(st, self.rng)

    def diagnostics(self):
        return {"fallbacks": self.fallbacks, "unprompted": self.unprompted}


REGISTRY: dict[str, type[Strategy]] = {
    "random": RandomStrategy,
    "greedy": GreedyMaker,
    "elimination": EliminationBreaker,
    "bipartite": BipartiteBreaker,
    "mirror": MirrorBreaker,
}

_INT_OPTS = {"l1", "l2", "l3", "mis_limit", "iteration_cap", "breaker_side"}
_FLOAT_OPTS = {"eps", "p", "dead_threshold"}


def parse_opts(pairs: list[str] | None) -> dict[str, Any]:
    """Turn ``["key=value", ...]`` into typed keyword arguments."""
    out: dict[str, Any] = {}
    for item in pairs or []:
        if "=" not in item:
            raise ParameterError(f"strategy option {item!r} is not key=value")
        key, val = item.split("=", 1)
        key = key.strip().replace("-", "_")
        if key in _INT_OPTS:
            out[key] = int(val)
        elif key in _FLOAT_OPTS:
            out[key] = float(val)
        elif key == "record":
            out[key] = val.lower() in ("1", "true", "yes")
        else:
            out[key] = val
    return out


def make_strategy(name: str, role: Player | str, opts: dict[str, Any] | None = None) -> Strategy:
    try:
        cls = REGISTRY[name]
    except KeyError:
        raise ParameterError(f"unknown strategy {name!r}; choose from {sorted(REGISTRY)}") from None
    try:
        return cls(Player(role), **(opts or {}))
    except TypeError as exc:
        raise ParameterError(f"bad options for {name}: {exc}") from None
