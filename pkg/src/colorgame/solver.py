"""Exact game values and game chromatic numbers for small graphs.

Positions are color-class tuples of int bitsets. The memoised search keys a
position by its nonempty classes sorted by bitset, so positions that differ
only by renaming colors share one entry, and among the currently unused
colors only one is ever tried. Vertex symmetries are not exploited.
"""

from __future__ import annotations

import copy
from dataclasses import asdict, dataclass, field
from typing import Any

from .engine import BREAKER, MAKER, GameState, Move, Player, new_game
from .errors import CapacityError
from .graph import Graph

N_LIMIT = 14
K_LIMIT = 8
TABLE_LIMIT = 4_000_000


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


class _Search:
    def __init__(self, adj: list[int], k: int, canonical: bool = True, memo: bool = True,
                 table_limit: int = TABLE_LIMIT):
        self.adj = adj
        self.k = k
        self.canonical = canonical
        self.memo = memo
        self.table: dict[Any, bool] = {}
        self.table_limit = table_limit
        self.overflowed = False
        self.nodes = 0

    def _kills(self, classes: tuple[int, ...], unc: int, v: int) -> bool:
        """True if some uncolored neighbor of ``v`` has no color left."""
        for u in _bits(self.adj[v] & unc):
            row = self.adj[u]
            if all(row & cls for cls in classes):
                return True
        return False

    def _key(self, classes: tuple[int, ...], mover: int):
        if self.canonical:
            return tuple(sorted(c for c in classes if c)), mover
        return classes, mover

    def maker_wins(self, classes: tuple[int, ...], unc: int, mover: int) -> bool:
        """Game value of a live position (no dead vertex, something uncolored)."""
        self.nodes += 1
        if self.memo:
            key = self._key(classes, mover)
            hit = self.table.get(key)
            if hit is not None:
                return hit
        result = self._expand(classes, unc, mover)
        if self.memo:
            if len(self.table) < self.table_limit:
                self.table[key] = result
            else:
                self.overflowed = True
        return result

    def _moves(self, classes: tuple[int, ...], unc: int):
        adj = self.adj
        order = []
        for v in _bits(unc):
            row = adj[v]
            cols = []
            seen_empty = False
            for i, cls in enumerate(classes):
                if row & cls:
                    continue
                if not cls and self.canonical:
                    if seen_empty:
                        continue
                    seen_empty = True
                cols.append(i)
            order.append((len(cols), v, cols))
        order.sort()
        for _, v, cols in order:
            for i in cols:
                yield v, i

    def _safe(self, classes: tuple[int, ...], unc: int) -> bool:
        """Every uncolored vertex has more colors left than uncolored neighbors,
        so no vertex can ever die."""
        for v in _bits(unc):
            row = self.adj[v]
            free = sum(1 for cls in classes if not row & cls)
            if free <= (row & unc).bit_count():
                return False
        return True

    def _expand(self, classes: tuple[int, ...], unc: int, mover: int) -> bool:
        if self.memo and self._safe(classes, unc):
            return True
        maker_to_move = mover == 0
        for v, i in self._moves(classes, unc):
            child = classes[:i] + (classes[i] | 1 << v,) + classes[i + 1:]
            rest = unc & ~(1 << v)
            if self._kills(child, rest, v):
                value = False
            elif not rest:
                value = True
            else:
                value = self.maker_wins(child, rest, 1 - mover)
            if value == maker_to_move:
                return value
        return not maker_to_move


def _position(st: GameState) -> tuple[list[int], tuple[int, ...], int, int]:
    adj = st.graph.adj
    return adj, tuple(st.classes), st.uncolored, 0 if st.to_move is MAKER else 1


@dataclass
class Solver:
    """Exact minimax over the coloring game with size limits."""

    n_limit: int = N_LIMIT
    k_limit: int = K_LIMIT
    table_limit: int = TABLE_LIMIT
    canonical: bool = True
    memo: bool = True
    last_stats: dict[str, Any] = field(default_factory=dict)

    def _check(self, n: int, k: int) -> None:
        if n > self.n_limit:
            raise CapacityError(f"exact solver limited to n <= {self.n_limit}, got {n}")
        if k > self.k_limit:
            raise CapacityError(f"exact solver limited to k <= {self.k_limit}, got {k}")

    def solve_position(self, st: GameState) -> Player:
        self._check(st.n, st.k)
        status = st.status()
        if status.over:
            return MAKER if status.kind == "maker_win" else BREAKER
        adj, classes, unc, mover = _position(st)
        search = _Search(adj, st.k, self.canonical, self.memo, self.table_limit)
        win = search.maker_wins(classes, unc, mover)
        self.last_stats = {"nodes": search.nodes, "table_size": len(search.table), "overflowed": search.overflowed}
        return MAKER if win else BREAKER

    def solve(self, g: Graph, k: int, first: Player | str = MAKER) -> Player:
        return self.solve_position(new_game(g, k, first))

    def game_chromatic(self, g: Graph, kmax: int | None = None, first: Player | str = MAKER) -> "SolveReport":
        if kmax is None:
            kmax = min(g.max_degree + 1, self.k_limit)
        self._check(g.n, kmax)
        winners: dict[int, str] = {}
        nodes: dict[int, int] = {}
        tables: dict[int, int] = {}
        for k in range(1, kmax + 1):
            winners[k] = self.solve(g, k, first).value
            nodes[k] = self.last_stats.get("nodes", 0)
            tables[k] = self.last_stats.get("table_size", 0)
        least = next((k for k in range(1, kmax + 1) if winners[k] == MAKER.value), None)
        return SolveReport(winners=winners, least_k=least, kmax=kmax, nodes=nodes, table_sizes=tables)


@dataclass
class SolveReport:
    winners: dict[int, str]
    least_k: int | None
    kmax: int
    nodes: dict[int, int]
    table_sizes: dict[int, int]

    @property
    def monotone(self) -> bool:
        seen_win = False
        for k in sorted(self.winners):
            if self.winners[k] == MAKER.value:
                seen_win = True
            elif seen_win:
                return False
        return True

    def to_json(self) -> dict[str, Any]:
        d = asdict(self)
        d["winners"] = {str(k): v for k, v in self.winners.items()}
        d["nodes"] = {str(k): v for k, v in self.nodes.items()}
        d["table_sizes"] = {str(k): v for k, v in self.table_sizes.items()}
        d["monotone"] = self.monotone
        return d


def solve_position(st: GameState, **limits) -> Player:
    return Solver(**limits).solve_position(st)


def game_chromatic_exact(g: Graph, kmax: int | None = None, first: Player | str = MAKER, **limits) -> SolveReport:
    return Solver(**limits).game_chromatic(g, kmax, first)


def naive_winner(st: GameState) -> Player:
    """Plain recursion over the engine itself: no table, no color symmetry.

    Exponential; meant as a reference on tiny instances.
    """
    status = st.status()
    if status.over:
        return MAKER if status.kind == "maker_win" else BREAKER
    me = st.to_move
    for mv in st.legal_moves():
        child = st.copy().apply_move(mv)
        if naive_winner(child) is me:
            return me
    return me.other


def naive_winner_bits(g: Graph, k: int, first: Player | str = MAKER) -> Player:
    """Same reference recursion on bitsets; no memo, all colors tried."""
    search = _Search(g.adj, k, canonical=False, memo=False)
    st = new_game(g, k, first)
    adj, classes, unc, mover = _position(st)
    return MAKER if search.maker_wins(classes, unc, mover) else BREAKER


def exhaustive_maker_vs(g: Graph, k: int, breaker, first: Player | str = MAKER, seed: int = 0) -> dict[str, int]:
    """Enumerate every Maker move sequence against a fixed Breaker strategy.

    The strategy object is deep-copied at each branch so stateful policies
    see a consistent history. Returns leaf counts by outcome.
    """
    import numpy as np

    st = new_game(g, k, first)
    breaker.start(st, np.random.default_rng(seed))
    counts = {"maker_win": 0, "breaker_win": 0, "leaves": 0}

    def walk(st: GameState, strat) -> None:
        status = st.status()
        if status.over:
            counts[status.kind] += 1
            counts["leaves"] += 1
            return
        if st.to_move is BREAKER:
            strat = copy.deepcopy(strat)
            mv = strat.next_move(st)
            walk(st.copy().apply_move(mv), strat)
            return
        for mv in st.legal_moves():
            walk(st.copy().apply_move(mv), strat)

    walk(st, breaker)
    return counts


def chromatic_number_exact(g: Graph, n_limit: int = 20) -> int:
    """Ordinary chromatic number by backtracking over ascending k."""
    n = g.n
    if n > n_limit:
        raise CapacityError(f"chromatic number limited to n <= {n_limit}, got {n}")
    if g.edge_count == 0:
        return 1
    adj = g.adj
    order = sorted(range(n), key=lambda v: -g.degree(v))

    def colorable(k: int) -> bool:
        classes = [0] * k

        def place(i: int, used: int) -> bool:
            if i == n:
                return True
            v = order[i]
            for c in range(min(used + 1, k)):
                if not adj[v] & classes[c]:
                    classes[c] |= 1 << v
                    if place(i + 1, max(used, c + 1)):
                        return True
                    classes[c] &= ~(1 << v)
            return False

        return place(0, 0)

    k = 2
    while not colorable(k):
        k += 1
    return k
