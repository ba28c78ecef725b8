"""The coloring game referee.

Two players alternately color uncolored vertices with colors ``1..k`` keeping
the coloring proper. Maker wins once every vertex is colored; Breaker wins as
soon as some uncolored vertex has no available color. The dead-vertex check
runs after every accepted move, whoever made it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, NamedTuple

import numpy as np

from .errors import IllegalMove, ParameterError
from .graph import Graph


class Player(str, enum.Enum):
    MAKER = "maker"
    BREAKER = "breaker"

    @property
    def other(self) -> "Player":
        return Player.BREAKER if self is Player.MAKER else Player.MAKER


MAKER = Player.MAKER
BREAKER = Player.BREAKER


class Move(NamedTuple):
    vertex: int
    color: int


@dataclass(frozen=True)
class Status:
    kind: str  # "ongoing" | "maker_win" | "breaker_win"
    witness: int | None = None

    @property
    def over(self) -> bool:
        return self.kind != "ongoing"


ONGOING = Status("ongoing")


class GameState:
    """A partial proper coloring plus the per-vertex availability cache.

    ``avail[v, c-1]`` is True iff color ``c`` is absent from the colored
    neighborhood of ``v``; it is kept current for uncolored vertices only.
    """

    def __init__(self, graph: Graph, k: int, first: Player = MAKER):
        if k < 1:
            raise ParameterError("k must be >= 1")
        n = graph.n
        self.graph = graph
        self.k = k
        self.first = Player(first)
        self.to_move = self.first
        self.color_of = np.zeros(n, dtype=np.int32)
        self.classes = [0] * k
        self.class_sizes = np.zeros(k, dtype=np.int64)
        self.avail = np.ones((n, k), dtype=bool)
        self.avail_count = np.full(n, k, dtype=np.int64)
        self.uncolored = (1 << n) - 1
        self.uncolored_mask = np.ones(n, dtype=bool)
        self.n_uncolored = n
        self.history: list[tuple[Player, Move]] = []
        self.dead: int | None = None

    @property
    def n(self) -> int:
        return self.graph.n

    def copy(self) -> "GameState":
        st = GameState.__new__(GameState)
        st.__dict__.update(self.__dict__)
        st.color_of = self.color_of.copy()
        st.classes = list(self.classes)
        st.class_sizes = self.class_sizes.copy()
        st.avail = self.avail.copy()
        st.avail_count = self.avail_count.copy()
        st.uncolored_mask = self.uncolored_mask.copy()
        st.history = list(self.history)
        return st

    # -- queries ---------------------------------------------------------

    def available_colors(self, v: int) -> list[int]:
        if not self.uncolored_mask[v]:
            raise ParameterError(f"vertex {v} is already colored")
        return (np.flatnonzero(self.avail[v]) + 1).tolist()

    def a(self, v: int) -> int:
        """Number of available colors at uncolored ``v``."""
        return int(self.avail_count[v])

    def last_move(self, by: Player | None = None) -> Move | None:
        if not self.history:
            return None
        who, mv = self.history[-1]
        if by is not None and who is not by:
            return None
        return mv

    def is_legal(self, v: int, c: int) -> bool:
        return self._illegal_reason(v, c) is None

    def _illegal_reason(self, v: int, c: int) -> str | None:
        if self.status().over:
            return "game is over"
        if not (isinstance(v, (int, np.integer)) and 0 <= v < self.n):
            return f"vertex {v!r} out of range"
        if not (isinstance(c, (int, np.integer)) and 1 <= c <= self.k):
            return f"color {c!r} out of range 1..{self.k}"
        if not self.uncolored_mask[v]:
            return f"vertex {v} is already colored"
        if not self.avail[v, c - 1]:
            return f"color {c} not available at vertex {v}"
        return None

    def legal_moves(self) -> list[Move]:
        if self.status().over:
            return []
        vs, cs = np.nonzero(self.avail & self.uncolored_mask[:, None])
        return [Move(int(v), int(c) + 1) for v, c in zip(vs, cs)]

    def status(self) -> Status:
        if self.dead is not None:
            return Status("breaker_win", self.dead)
        if self.n_uncolored == 0:
            return Status("maker_win")
        return ONGOING

    # -- mutation --------------------------------------------------------

    def apply_move(self, move: Move | tuple[int, int]) -> "GameState":
        """Color ``move.vertex`` with ``move.color``; raises ``IllegalMove`` and
        leaves the state unchanged if the move is not legal."""
        v, c = move
        reason = self._illegal_reason(v, c)
        if reason is not None:
            raise IllegalMove(reason)
        v, c = int(v), int(c)
        self.color_of[v] = c
        self.uncolored &= ~(1 << v)
        self.uncolored_mask[v] = False
        self.n_uncolored -= 1
        self.classes[c - 1] |= 1 << v
        self.class_sizes[c - 1] += 1
        nb = self.graph.neighbors(v)
        nb = nb[self.uncolored_mask[nb]]
        hit = nb[self.avail[nb, c - 1]]
        if len(hit):
            self.avail[hit, c - 1] = False
            self.avail_count[hit] -= 1
            dead = hit[self.avail_count[hit] == 0]
            if len(dead):
                self.dead = int(dead.min())
        self.history.append((self.to_move, Move(v, c)))
        self.to_move = self.to_move.other
        return self

    # -- test support ----------------------------------------------------

    def check_invariants(self) -> None:
        """Recompute everything from scratch and compare; raises AssertionError."""
        g = self.graph
        col = self.color_of
        e = g.edges
        if len(e):
            both = (col[e[:, 0]] > 0) & (col[e[:, 1]] > 0)
            bad = both & (col[e[:, 0]] == col[e[:, 1]])
            assert not bad.any(), f"improper edge {e[np.argmax(bad)].tolist()}"
        assert int(self.class_sizes.sum()) + self.n_uncolored == self.n, "conservation"
        assert self.n_uncolored == int(self.uncolored_mask.sum()) == self.uncolored.bit_count()
        for c in range(1, self.k + 1):
            members = np.flatnonzero(col == c)
            assert self.class_sizes[c - 1] == len(members)
            assert self.classes[c - 1] == sum(1 << int(v) for v in members)
        for v in np.flatnonzero(self.uncolored_mask).tolist():
            seen = set(col[g.neighbors(v)].tolist())
            expect = [c not in seen for c in range(1, self.k + 1)]
            assert self.avail[v].tolist() == expect, f"stale availability at {v}"
            assert self.avail_count[v] == sum(expect)
        assert len(self.history) == self.n - self.n_uncolored
        who = self.first
        for mover, _ in self.history:
            assert mover is who, "turn order"
            who = who.other


def new_game(g: Graph, k: int, first: Player | str = MAKER) -> GameState:
    return GameState(g, k, Player(first))


def available_colors(st: GameState, v: int) -> list[int]:
    return st.available_colors(v)


def apply_move(st: GameState, m: Move | tuple[int, int]) -> GameState:
    return st.apply_move(m)


def terminal_status(st: GameState) -> Status:
    return st.status()


def naive_status(st: GameState) -> Status:
    """Full-board scan, independent of the incremental dead-vertex tracking."""
    g = st.graph
    for v in range(st.n):
        if st.color_of[v]:
            continue
        used = set(st.color_of[g.neighbors(v)].tolist())
        if all(c in used for c in range(1, st.k + 1)):
            return Status("breaker_win", v)
    if not (st.color_of == 0).any():
        return Status("maker_win")
    return ONGOING


@dataclass
class GameOutcome:
    winner: Player
    witness: int | None
    moves_played: int
    class_sizes: list[int]
    transcript: list[tuple[Player, Move]]
    diagnostics: dict[str, Any] = field(default_factory=dict)
    forfeit: str | None = None

    def to_json(self) -> dict[str, Any]:
        return {
            "winner": self.winner.value,
            "witness": self.witness,
            "moves_played": self.moves_played,
            "class_sizes": self.class_sizes,
            "forfeit": self.forfeit,
            "transcript": [
                {"mover": who.value, "vertex": mv.vertex, "color": mv.color}
                for who, mv in self.transcript
            ],
            "diagnostics": self.diagnostics,
        }


def strategy_rngs(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (maker, breaker) streams derived from one game seed."""
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1))
    a, b = ss.spawn(2)
    return np.random.default_rng(a), np.random.default_rng(b)


def play_game(g: Graph, k: int, maker, breaker, seed: int = 0, first: Player | str = MAKER,
              check: bool = False, observer=None) -> GameOutcome:
    """Play one game between two strategy objects.

    ``check=True`` runs the full invariant suite after every move.
    ``observer(state)`` is called after every accepted move.
    """
    st = new_game(g, k, first)
    rng_m, rng_b = strategy_rngs(seed)
    maker.start(st, rng_m)
    breaker.start(st, rng_b)
    forfeit = None
    while not st.status().over:
        role = st.to_move
        strat = maker if role is MAKER else breaker
        mv = strat.next_move(st)
        try:
            if mv is None:
                raise IllegalMove("strategy returned no move in an ongoing game")
            st.apply_move(mv)
        except IllegalMove as exc:
            forfeit = f"{role.value}: {exc.reason}"
            break
        if check:
            st.check_invariants()
        if observer is not None:
            observer(st)
    status = st.status()
    if forfeit is not None:
        winner = st.to_move.other
        witness = None
    else:
        winner = MAKER if status.kind == "maker_win" else BREAKER
        witness = status.witness
    diag = {"maker": maker.diagnostics(), "breaker": breaker.diagnostics()}
    if forfeit:
        diag["forfeit"] = forfeit
    return GameOutcome(
        winner=winner,
        witness=witness,
        moves_played=len(st.history),
        class_sizes=st.class_sizes.tolist(),
        transcript=list(st.history),
        diagnostics=diag,
        forfeit=forfeit,
    )
