"""Independent rule checkers for the strategies.

Each checker wraps a strategy, recomputes what the rule demands from the raw
board before the move, and records any disagreement.
"""

import numpy as np

from colorgame.engine import MAKER
from colorgame.strategies import Strategy


class Watched(Strategy):
    def __init__(self, inner, check):
        super().__init__(inner.role)
        self.inner = inner
        self.check = check
        self.violations = []
        self.checked = 0

    def start(self, st, rng):
        super().start(st, rng)
        self.inner.start(st, rng)

    def next_move(self, st):
        mv = self.inner.next_move(st)
        problem = self.check(self.inner, st, mv)
        self.checked += 1
        if problem:
            self.violations.append(problem)
        return mv

    def diagnostics(self):
        return self.inner.diagnostics()


def raw_avail(st):
    """(n, k) availability from scratch, uncolored rows only."""
    g = st.graph
    out = np.zeros((st.n, st.k), dtype=bool)
    for v in range(st.n):
        if st.color_of[v]:
            continue
        used = set(st.color_of[g.neighbors(v)].tolist())
        out[v] = [c not in used for c in range(1, st.k + 1)]
    return out


def check_greedy(strat, st, mv):
    av = raw_avail(st)
    counts = av.sum(axis=1)
    unc = st.color_of == 0
    v, c = mv
    if not unc[v] or not av[v, c - 1]:
        return f"illegal greedy move {mv}"
    best = counts[unc].min()
    if counts[v] != best:
        return f"vertex {v} has a={counts[v]} but min is {best}"
    if strat.tie == "low" and v != int(np.flatnonzero(unc & (counts == best))[0]):
        return f"vertex {v} is not the lowest-index minimiser"
    if strat.color == "low" and c != int(np.flatnonzero(av[v])[0]) + 1:
        return f"color {c} is not the lowest available"
    return None


def check_elimination(strat, st, mv):
    """The reply to an eliminating color must maximise |N(v) & I| over candidates.

    Compares against the strategy's frozen I, taken from its trace and
    checked for independence and shrinkage separately.
    """
    if not strat.trace or strat.trace[-1]["vertex"] != mv.vertex or strat.trace[-1].get("_seen"):
        return None
    t = strat.trace[-1]
    t["_seen"] = True
    g = st.graph
    last = st.last_move(MAKER)
    if last is None or last.color != t["color"] or mv.color != t["color"]:
        return "eliminating move does not answer Maker's color"
    if st.class_sizes[t["color"] - 1] < strat.l1:
        return "elimination before l1"
    av = raw_avail(st)
    cand = [v for v in range(st.n) if st.color_of[v] == 0 and av[v, t["color"] - 1]]
    if cand != t["candidates"]:
        return "candidate set differs from raw availability"
    indep = set(t["indep_before"])
    if not indep <= set(cand):
        return "I is not inside the candidates"
    if any(g.has_edge(a, b) for a in indep for b in indep if a < b):
        return "I is not independent"
    hits = {v: sum(1 for u in g.neighbors(v).tolist() if u in indep) for v in cand}
    best = max(hits.values())
    if hits[mv.vertex] != best or t["hits"] != best:
        return f"vertex {mv.vertex} hits {hits[mv.vertex]} < {best}"
    if mv.vertex != min(v for v in cand if hits[v] == best):
        return "argmax tie not broken to lowest index"
    after = set(t["indep_after"])
    if after != indep - set(g.neighbors(mv.vertex).tolist()) or len(indep) - len(after) != best:
        return "I did not shrink by exactly |N(v) & I|"
    return None


def check_bipartite(strat, st, mv):
    part = st.graph.part
    bside = strat.breaker_side
    av = raw_avail(st)
    unc = st.color_of == 0
    on_m = unc & (part != bside)
    on_b = unc & (part == bside)
    live = []
    for c in range(1, st.k + 1):
        dead = av[on_m, c - 1].sum() < strat.threshold
        if dead != (c in strat.dead):
            return f"dead status of color {c} disagrees"
        if not dead and av[on_b, c - 1].any():
            live.append(c)
    v, c = mv
    if live:
        if part[v] != bside:
            return f"Breaker colored Maker-side vertex {v}"
        if c not in live:
            return f"Breaker used non-live color {c}"
        last = st.last_move(MAKER)
        if last is not None and part[last.vertex] != bside and last.color in live and c != last.color:
            return "Breaker did not answer in kind"
    elif on_b.any() and av[on_b].any() and part[v] != bside:
        return "Breaker left his side while moves remained there"
    return None
