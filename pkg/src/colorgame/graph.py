"""Simple undirected graphs with bitset adjacency, plus the instance generators.

Vertices are the integers ``0..n-1``. Each vertex has an adjacency row stored
as a Python ``int`` used as a fixed-width bitset (bit ``u`` set iff ``u`` is a
neighbor). Rows are materialised lazily from a CSR neighbor index so that very
sparse graphs with ``n ~ 1e5`` can be sampled without paying ``O(n^2)``.

Random generators use numpy's PCG64 (``numpy.random.default_rng(seed)``); the
same seed gives the same graph on the same build.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import CapacityError, ParameterError, ParseError

FAMILIES = (
    "gnp",
    "bipartite_gnp",
    "complete",
    "empty",
    "path",
    "tree_from_pruefer",
    "knn_minus_matching",
    "from_file",
)
BIPARTITE_FAMILIES = frozenset({"bipartite_gnp", "knn_minus_matching"})

EXACT_MIS_LIMIT = 40
# above this many vertices the dense matrix is not built implicitly
DENSE_LIMIT = 8192


def _bits_of(x: int) -> Iterator[int]:
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def _mask_to_int(mask: np.ndarray) -> int:
    return int.from_bytes(np.packbits(mask, bitorder="little").tobytes(), "little")


@dataclass(frozen=True)
class VertexSet:
    """An immutable subset of ``0..n-1`` backed by an int bitmask."""

    bits: int
    n: int

    @classmethod
    def of(cls, n: int, vertices: Iterable[int] = ()) -> "VertexSet":
        bits = 0
        for v in vertices:
            if not 0 <= v < n:
                raise ParameterError(f"vertex {v} out of range for n={n}")
            bits |= 1 << v
        return cls(bits, n)

    @classmethod
    def full(cls, n: int) -> "VertexSet":
        return cls((1 << n) - 1, n)

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "VertexSet":
        return cls(_mask_to_int(np.asarray(mask, dtype=bool)), len(mask))

    @property
    def size(self) -> int:
        return self.bits.bit_count()

    def __len__(self) -> int:
        return self.size

    def __iter__(self) -> Iterator[int]:
        return _bits_of(self.bits)

    def __contains__(self, v: int) -> bool:
        return 0 <= v < self.n and bool(self.bits >> v & 1)

    def to_list(self) -> list[int]:
        return list(_bits_of(self.bits))

    def to_mask(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=bool)
        out[self.to_list()] = True
        return out

    def __or__(self, other: "VertexSet") -> "VertexSet":
        return VertexSet(self.bits | other.bits, self.n)

    def __and__(self, other: "VertexSet") -> "VertexSet":
        return VertexSet(self.bits & other.bits, self.n)

    def __sub__(self, other: "VertexSet") -> "VertexSet":
        return VertexSet(self.bits & ~other.bits, self.n)

    def __repr__(self) -> str:
        return f"VertexSet({self.to_list()}, n={self.n})"


class Graph:
    """Immutable simple graph.

    ``part`` is an optional array of side labels (0 or 1) for bipartite
    instances; every edge then joins opposite sides.
    """

    __slots__ = ("n", "part", "_edges", "_indptr", "_indices", "_rows", "_matrix")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] | np.ndarray = (), part: Sequence[int] | None = None):
        if n < 1:
            raise ParameterError("n must be >= 1")
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        arr = arr.reshape(-1, 2)
        if len(arr):
            if arr.min() < 0 or arr.max() >= n:
                raise ParameterError("edge endpoint out of range")
            if np.any(arr[:, 0] == arr[:, 1]):
                raise ParameterError("self-loops are not allowed")
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        canon = np.stack([lo, hi], axis=1)
        if len(canon):
            canon = np.unique(canon, axis=0)
            if len(canon) != len(arr):
                raise ParameterError("duplicate edge")
        part_arr = None
        if part is not None:
            part_arr = np.asarray(part, dtype=np.int8)
            if part_arr.shape != (n,) or not np.isin(part_arr, (0, 1)).all():
                raise ParameterError("part must hold one 0/1 label per vertex")
            if len(canon) and np.any(part_arr[canon[:, 0]] == part_arr[canon[:, 1]]):
                raise ParameterError("bipartite graph has a same-side edge")
        self._init(n, canon, part_arr)

    def _init(self, n: int, canon: np.ndarray, part: np.ndarray | None) -> None:
        self.n = n
        self.part = part
        self._edges = canon
        src = np.concatenate([canon[:, 0], canon[:, 1]])
        dst = np.concatenate([canon[:, 1], canon[:, 0]])
        order = np.lexsort((dst, src))
        self._indices = dst[order]
        self._indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=self._indptr[1:])
        self._rows: list[int | None] = [None] * n
        self._matrix: np.ndarray | None = None

    @classmethod
    def _trusted(cls, n: int, canon: np.ndarray, part: np.ndarray | None = None) -> "Graph":
        """Build from lexsorted, deduplicated ``u < v`` pairs without re-validation."""
        g = cls.__new__(cls)
        g._init(n, canon.astype(np.int64, copy=False).reshape(-1, 2), part)
        return g

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    @property
    def edges(self) -> np.ndarray:
        return self._edges

    @property
    def is_bipartite_labelled(self) -> bool:
        return self.part is not None

    def neighbors(self, v: int) -> np.ndarray:
        return self._indices[self._indptr[v]:self._indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self._indptr[v + 1] - self._indptr[v])

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self._indptr)

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.n else 0

    def row(self, v: int) -> int:
        r = self._rows[v]
        if r is None:
            if self._matrix is not None:
                r = _mask_to_int(self._matrix[v])
            else:
                r = 0
                for u in self.neighbors(v).tolist():
                    r |= 1 << u
            self._rows[v] = r
        return r

    @property
    def adj(self) -> list[int]:
        """All adjacency rows as int bitsets."""
        return [self.row(v) for v in range(self.n)]

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.row(u) >> v & 1)

    def side(self, label: int) -> VertexSet:
        if self.part is None:
            raise ParameterError("graph carries no bipartition labels")
        return VertexSet.from_mask(self.part == label)

    @property
    def matrix(self) -> np.ndarray:
        """Dense boolean adjacency matrix, built on first use."""
        if self._matrix is None:
            m = np.zeros((self.n, self.n), dtype=bool)
            if len(self._edges):
                m[self._edges[:, 0], self._edges[:, 1]] = True
                m[self._edges[:, 1], self._edges[:, 0]] = True
            self._matrix = m
        return self._matrix

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        if self.n != other.n or not np.array_equal(self._edges, other._edges):
            return False
        if (self.part is None) != (other.part is None):
            return False
        return self.part is None or np.array_equal(self.part, other.part)

    def __hash__(self) -> int:
        return hash((self.n, self._edges.tobytes()))

    def __repr__(self) -> str:
        kind = "bipartite " if self.part is not None else ""
        return f"<{kind}Graph n={self.n} m={self.edge_count}>"


# ---------------------------------------------------------------------------
# generators


def _check_np(n: int, p: float) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n!r}")
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"p must lie in [0, 1], got {p!r}")


def _skip_sample(total: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Indices in ``[0, total)`` kept independently with probability ``p``.

    Geometric skipping: expected cost is proportional to the number kept.
    """
    if p <= 0.0 or total == 0:
        return np.zeros(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(total, dtype=np.int64)
    chunks = []
    pos = -1
    expected = total * p
    while True:
        size = int(expected + 6 * np.sqrt(expected + 1) + 64)
        gaps = rng.geometric(p, size=size).astype(np.int64)
        # tiny p can overflow int64 and come back non-positive; any gap past
        # the end is equivalent
        gaps[(gaps <= 0) | (gaps > total)] = total + 1
        idx = pos + np.cumsum(gaps)
        if idx[-1] >= total:
            chunks.append(idx[idx < total])
            break
        chunks.append(idx)
        pos = int(idx[-1])
        expected = (total - pos) * p
    return np.concatenate(chunks)


def _pair_from_index(idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Invert the enumeration ``idx = u(u-1)/2 + v`` over pairs ``v < u``."""
    u = ((1 + np.sqrt(1 + 8 * idx.astype(np.float64))) // 2).astype(np.int64)
    u -= (u * (u - 1) // 2) > idx
    u += ((u + 1) * u // 2) <= idx
    v = idx - u * (u - 1) // 2
    return v, u


def sample_gnp(n: int, p: float, seed: int) -> Graph:
    """G(n, p): every unordered pair is an edge independently with probability p."""
    _check_np(n, p)
    rng = np.random.default_rng(seed)
    idx = _skip_sample(n * (n - 1) // 2, p, rng)
    v, u = _pair_from_index(idx)
    canon = np.stack([v, u], axis=1)
    canon = canon[np.lexsort((canon[:, 1], canon[:, 0]))]
    return Graph._trusted(n, canon)


def sample_bipartite_gnp(n: int, p: float, seed: int) -> Graph:
    """B(n, p) on ``2n`` vertices; side 0 is ``0..n-1``, side 1 is ``n..2n-1``."""
    _check_np(n, p)
    rng = np.random.default_rng(seed)
    idx = _skip_sample(n * n, p, rng)
    canon = np.stack([idx // n, n + idx % n], axis=1)
    part = np.repeat(np.array([0, 1], dtype=np.int8), n)
    return Graph._trusted(2 * n, canon, part)


def complete_graph(n: int) -> Graph:
    iu = np.triu_indices(n, 1)
    return Graph._trusted(n, np.stack(iu, axis=1))


def empty_graph(n: int) -> Graph:
    return Graph._trusted(n, np.zeros((0, 2), dtype=np.int64))


def path_graph(n: int) -> Graph:
    a = np.arange(n - 1)
    return Graph._trusted(n, np.stack([a, a + 1], axis=1))


def knn_minus_matching(n: int) -> Graph:
    """K_{n,n} with the matching ``i <-> n+i`` removed."""
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    keep = i != j
    canon = np.stack([i[keep], n + j[keep]], axis=1)
    part = np.repeat(np.array([0, 1], dtype=np.int8), n)
    return Graph._trusted(2 * n, canon, part)


def pruefer_to_tree(seq: Sequence[int], n: int) -> Graph:
    if n < 1:
        raise ParameterError("n must be >= 1")
    seq = list(seq)
    if n == 1:
        if seq:
            raise ParameterError("Pruefer sequence of a 1-vertex tree must be empty")
        return empty_graph(1)
    if len(seq) != n - 2:
        raise ParameterError(f"Pruefer sequence for n={n} must have length {n - 2}, got {len(seq)}")
    if any(not 0 <= x < n for x in seq):
        raise ParameterError("Pruefer entries must lie in 0..n-1")
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    leaves = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    edges = []
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, x))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    edges.append((heapq.heappop(leaves), heapq.heappop(leaves)))
    return Graph(n, edges)


@dataclass(frozen=True)
class InstanceSpec:
    """Recipe for one graph instance.

    For ``knn_minus_matching`` and ``bipartite_gnp``, ``n`` counts one side.
    ``tree_from_pruefer`` uses ``pruefer`` if given, else a uniform random
    sequence drawn from ``seed``. ``from_file`` reads ``path``.
    """

    family: str
    n: int = 1
    p: float | None = None
    seed: int = 0
    pruefer: tuple[int, ...] | None = None
    path: str | None = None

    def __post_init__(self):
        fam = self.family.replace("-", "_")
        object.__setattr__(self, "family", fam)
        if fam not in FAMILIES:
            raise ParameterError(f"unknown family {self.family!r}")
        if fam == "from_file":
            if not self.path:
                raise ParameterError("from_file needs a path")
            return
        if self.n < 1:
            raise ParameterError("n must be >= 1")
        if fam in ("gnp", "bipartite_gnp"):
            if self.p is None:
                raise ParameterError(f"{fam} needs p")
            if not 0.0 <= self.p <= 1.0:
                raise ParameterError(f"p must lie in [0, 1], got {self.p!r}")

    @property
    def bipartite(self) -> bool:
        return self.family in BIPARTITE_FAMILIES


def make_named(spec: InstanceSpec) -> Graph:
    fam = spec.family
    if fam == "gnp":
        return sample_gnp(spec.n, spec.p, spec.seed)
    if fam == "bipartite_gnp":
        return sample_bipartite_gnp(spec.n, spec.p, spec.seed)
    if fam == "complete":
        return complete_graph(spec.n)
    if fam == "empty":
        return empty_graph(spec.n)
    if fam == "path":
        return path_graph(spec.n)
    if fam == "knn_minus_matching":
        return knn_minus_matching(spec.n)
    if fam == "tree_from_pruefer":
        seq = spec.pruefer
        if seq is None:
            rng = np.random.default_rng(spec.seed)
            seq = rng.integers(0, spec.n, size=max(spec.n - 2, 0)).tolist()
        return pruefer_to_tree(seq, spec.n)
    if fam == "from_file":
        return read_graph(spec.path)
    raise ParameterError(f"unknown family {fam!r}")


# ---------------------------------------------------------------------------
# set queries


def _union_rows(g: Graph, s: VertexSet) -> int:
    acc = 0
    for v in s:
        acc |= g.row(v)
    return acc


def neighbors_of_set(g: Graph, s: VertexSet) -> VertexSet:
    """N(S): vertices outside S adjacent to some vertex of S."""
    return VertexSet(_union_rows(g, s) & ~s.bits, g.n)


def non_neighbors_of_set(g: Graph, s: VertexSet, side: int | None = None) -> VertexSet:
    """Vertices neither in S nor adjacent to S, optionally restricted to one side."""
    full = (1 << g.n) - 1
    bits = full & ~(s.bits | _union_rows(g, s))
    if side is not None:
        bits &= g.side(side).bits
    return VertexSet(bits, g.n)


def induced_edge_count(g: Graph, s: VertexSet) -> int:
    return sum((g.row(v) & s.bits).bit_count() for v in s) // 2


def _induced_matrix(g: Graph, idx: np.ndarray) -> np.ndarray:
    if g._matrix is not None or g.n <= DENSE_LIMIT:
        return g.matrix[np.ix_(idx, idx)]
    local = np.full(g.n, -1, dtype=np.int64)
    local[idx] = np.arange(len(idx))
    sub = np.zeros((len(idx), len(idx)), dtype=bool)
    for i, v in enumerate(idx.tolist()):
        nb = local[g.neighbors(v)]
        sub[i, nb[nb >= 0]] = True
    return sub


def greedy_independent_indices(sub: np.ndarray) -> list[int]:
    """Min-degree greedy on a dense local adjacency matrix; lowest index wins ties."""
    m = len(sub)
    alive = np.ones(m, dtype=bool)
    deg = sub.sum(axis=1).astype(np.int64)
    big = np.iinfo(np.int64).max
    chosen = []
    while alive.any():
        v = int(np.argmin(np.where(alive, deg, big)))
        chosen.append(v)
        gone = alive & sub[v]
        gone[v] = True
        alive &= ~gone
        deg -= sub[gone].sum(axis=0)
    return chosen


def max_independent_bits(rows: Sequence[int], cand: int) -> int:
    """Maximum independent subset of ``cand`` given local int-bitset rows.

    Branch and bound: vertices of degree <= 1 are taken greedily (always safe),
    otherwise branch on a maximum-degree vertex.
    """
    best_bits = 0
    best_size = 0

    def expand(cur: int, size: int, cand: int) -> None:
        nonlocal best_bits, best_size
        while cand:
            if size + cand.bit_count() <= best_size:
                return
            low_v, low_d = -1, None
            hi_v, hi_d = -1, -1
            for v in _bits_of(cand):
                d = (rows[v] & cand).bit_count()
                if low_d is None or d < low_d:
                    low_v, low_d = v, d
                if d > hi_d:
                    hi_v, hi_d = v, d
            if low_d <= 1:
                cur |= 1 << low_v
                size += 1
                cand &= ~(rows[low_v] | 1 << low_v)
                continue
            expand(cur | 1 << hi_v, size + 1, cand & ~(rows[hi_v] | 1 << hi_v))
            cand &= ~(1 << hi_v)
        if size > best_size:
            best_bits, best_size = cur, size

    expand(0, 0, cand)
    return best_bits


def independent_set(g: Graph, t: VertexSet, mode: str = "greedy", limit: int = EXACT_MIS_LIMIT) -> VertexSet:
    """An independent subset of ``t``; maximum when ``mode='exact'``."""
    idx = np.array(t.to_list(), dtype=np.int64)
    if mode == "exact":
        if len(idx) > limit:
            raise CapacityError(f"exact independent set limited to {limit} vertices, got {len(idx)}")
        pos = {v: i for i, v in enumerate(idx.tolist())}
        rows = []
        for v in idx.tolist():
            r = 0
            for u in _bits_of(g.row(v) & t.bits):
                r |= 1 << pos[u]
            rows.append(r)
        local = max_independent_bits(rows, (1 << len(idx)) - 1)
        return VertexSet.of(g.n, (int(idx[i]) for i in _bits_of(local)))
    if mode != "greedy":
        raise ParameterError(f"unknown independent-set mode {mode!r}")
    if not len(idx):
        return VertexSet(0, g.n)
    chosen = greedy_independent_indices(_induced_matrix(g, idx))
    return VertexSet.of(g.n, (int(idx[i]) for i in chosen))


def is_independent(g: Graph, s: VertexSet) -> bool:
    return all(not (g.row(v) & s.bits) for v in s)


# ---------------------------------------------------------------------------
# edge-list text format
#
#   n <count> [bipartite <nLeft>]
#   u v
#   ...
#
# 0-indexed, whitespace separated. Blank lines and lines starting with '#'
# are ignored. With ``bipartite nLeft`` vertices 0..nLeft-1 form side 0.


def encode_graph(g: Graph) -> str:
    header = f"n {g.n}"
    if g.part is not None:
        n_left = int((g.part == 0).sum())
        if not (np.all(g.part[:n_left] == 0) and np.all(g.part[n_left:] == 1)):
            raise ParameterError("edge-list format needs side 0 to be a vertex prefix")
        header += f" bipartite {n_left}"
    lines = [header] + [f"{u} {v}" for u, v in g.edges.tolist()]
    return "\n".join(lines) + "\n"


def decode_graph(text: str) -> Graph:
    n = None
    part = None
    seen: set[tuple[int, int]] = set()
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tok = line.split()
        if n is None:
            if tok[0] != "n" or len(tok) not in (2, 4):
                raise ParseError("expected header 'n <count> [bipartite <nLeft>]'", lineno)
            try:
                n = int(tok[1])
                n_left = int(tok[3]) if len(tok) == 4 else None
            except ValueError:
                raise ParseError("non-integer in header", lineno) from None
            if n < 1:
                raise ParseError("vertex count must be >= 1", lineno)
            if len(tok) == 4:
                if tok[2] != "bipartite" or not 0 <= n_left <= n:
                    raise ParseError("bad bipartite clause", lineno)
                part = np.array([0] * n_left + [1] * (n - n_left), dtype=np.int8)
            continue
        if len(tok) != 2:
            raise ParseError("expected 'u v'", lineno)
        try:
            u, v = int(tok[0]), int(tok[1])
        except ValueError:
            raise ParseError("non-integer vertex", lineno) from None
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(f"vertex out of range 0..{n - 1}", lineno)
        if u == v:
            raise ParseError("self-loop", lineno)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise ParseError("duplicate edge", lineno)
        if part is not None and part[u] == part[v]:
            raise ParseError("edge inside one side of a bipartite graph", lineno)
        seen.add(key)
        edges.append(key)
    if n is None:
        raise ParseError("missing header", 1)
    return Graph(n, edges, part)


def write_graph(g: Graph, path: str | Path) -> None:
    Path(path).write_text(encode_graph(g))


def read_graph(path: str | Path) -> Graph:
    return decode_graph(Path(path).read_text())
