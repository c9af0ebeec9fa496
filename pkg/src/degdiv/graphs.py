"""Immutable bitset graphs and vertex sets.

A Graph stores one 64-bit-word-packed adjacency row per vertex; all the hot
kernels (diversity scans, degree restrictions) are numpy popcounts over those
rows. Vertex labels are dense integers 0..n-1 everywhere, including file I/O.

The text format is: first line "n m", then m lines "u v" with 0 <= u < v < n,
whitespace separated, LF line endings. The loader rejects loops, duplicate
edges and out-of-range labels.
"""

from __future__ import annotations

import hashlib
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .errors import PreconditionError
from .rng import stream

WORD_BITS = 64


def _word_count(n: int) -> int:
    return (n + WORD_BITS - 1) // WORD_BITS


def _mask_to_words(mask: int, n: int) -> np.ndarray:
    nbytes = _word_count(n) * 8
    return np.frombuffer(mask.to_bytes(nbytes, "little"), dtype=np.uint64)


def _words_to_mask(words: np.ndarray) -> int:
    return int.from_bytes(words.tobytes(), "little")


def _bools_to_mask(bits: np.ndarray) -> int:
    packed = np.packbits(bits.astype(bool), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


class VertexSet:
    """A subset of 0..n-1 stored as a bitmask."""

    __slots__ = ("n", "mask")

    def __init__(self, n: int, mask: int = 0):
        if n < 0:
            raise PreconditionError("vertex set needs n >= 0")
        if mask < 0 or mask >> n:
            raise PreconditionError("mask has bits outside 0..n-1")
        self.n = n
        self.mask = mask

    @classmethod
    def empty(cls, n: int) -> "VertexSet":
        return cls(n, 0)

    @classmethod
    def full(cls, n: int) -> "VertexSet":
        return cls(n, (1 << n) - 1)

    @classmethod
    def from_members(cls, n: int, members: Iterable[int]) -> "VertexSet":
        mask = 0
        for v in members:
            if not 0 <= v < n:
                raise PreconditionError(f"vertex {v} outside 0..{n - 1}")
            mask |= 1 << v
        return cls(n, mask)

    @classmethod
    def from_bools(cls, bits: np.ndarray) -> "VertexSet":
        return cls(len(bits), _bools_to_mask(np.asarray(bits)))

    @property
    def card(self) -> int:
        return self.mask.bit_count()

    def members(self) -> list[int]:
        return list(self)

    def to_words(self) -> np.ndarray:
        return _mask_to_words(self.mask, self.n)

    def to_bools(self) -> np.ndarray:
        raw = np.frombuffer(self.mask.to_bytes(_word_count(self.n) * 8, "little"), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.n].astype(bool)

    def complement(self) -> "VertexSet":
        return VertexSet(self.n, ((1 << self.n) - 1) ^ self.mask)

    def issubset(self, other: "VertexSet") -> bool:
        return self.n == other.n and self.mask & ~other.mask == 0

    def _check(self, other: "VertexSet") -> None:
        if self.n != other.n:
            raise PreconditionError("vertex sets over different universes")

    def __and__(self, other: "VertexSet") -> "VertexSet":
        self._check(other)
        return VertexSet(self.n, self.mask & other.mask)

    def __or__(self, other: "VertexSet") -> "VertexSet":
        self._check(other)
        return VertexSet(self.n, self.mask | other.mask)

    def __sub__(self, other: "VertexSet") -> "VertexSet":
        self._check(other)
        return VertexSet(self.n, self.mask & ~other.mask)

    def __xor__(self, other: "VertexSet") -> "VertexSet":
        self._check(other)
        return VertexSet(self.n, self.mask ^ other.mask)

    def __contains__(self, v: int) -> bool:
        return 0 <= v < self.n and (self.mask >> v) & 1 == 1

    def __iter__(self) -> Iterator[int]:
        m = self.mask
        while m:
            low = m & -m
            yield low.bit_length() - 1
            m ^= low

    def __len__(self) -> int:
        return self.card

    def __bool__(self) -> bool:
        return self.mask != 0

    def __eq__(self, other) -> bool:
        return isinstance(other, VertexSet) and self.n == other.n and self.mask == other.mask

    def __hash__(self) -> int:
        return hash((self.n, self.mask))

    def __repr__(self) -> str:
        if self.card <= 12:
            return f"VertexSet(n={self.n}, {{{', '.join(map(str, self))}}})"
        return f"VertexSet(n={self.n}, card={self.card})"


class Graph:
    """Immutable simple graph on vertices 0..n-1 with bit-packed rows."""

    def __init__(self, n: int, packed: np.ndarray):
        if n < 1:
            raise PreconditionError("graph needs n >= 1")
        self.n = n
        self._packed = packed
        self._packed.setflags(write=False)
        self._rows: list[Optional[int]] = [None] * n
        self._degrees = np.bitwise_count(packed).sum(axis=1, dtype=np.int64)
        self._caches: dict = {}

    # -- construction -------------------------------------------------------

    @classmethod
    def from_bool_matrix(cls, adj: np.ndarray) -> "Graph":
        adj = np.asarray(adj, dtype=bool)
        n = adj.shape[0]
        if adj.shape != (n, n):
            raise PreconditionError("adjacency matrix must be square")
        if adj.diagonal().any():
            raise PreconditionError("self-loops are not allowed")
        if not np.array_equal(adj, adj.T):
            raise PreconditionError("adjacency matrix must be symmetric")
        w = _word_count(n)
        by = np.packbits(adj, axis=1, bitorder="little")
        if by.shape[1] < w * 8:
            by = np.pad(by, ((0, 0), (0, w * 8 - by.shape[1])))
        packed = np.ascontiguousarray(by).view(np.uint64)
        return cls(n, packed)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        adj = np.zeros((n, n), dtype=bool)
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise PreconditionError(f"edge ({u},{v}) outside 0..{n - 1}")
            if u == v:
                raise PreconditionError(f"loop at vertex {u}")
            adj[u, v] = True
            adj[v, u] = True
        return cls.from_bool_matrix(adj)

    # -- basic accessors ----------------------------------------------------

    @property
    def packed(self) -> np.ndarray:
        return self._packed

    @property
    def degrees(self) -> np.ndarray:
        return self._degrees

    def row(self, u: int) -> int:
        """Neighbourhood of u as a Python int bitmask."""
        cached = self._rows[u]
        if cached is None:
            cached = _words_to_mask(self._packed[u])
            self._rows[u] = cached
        return cached

    def has_edge(self, u: int, v: int) -> bool:
        return bool((int(self._packed[u, v >> 6]) >> (v & 63)) & 1)

    def neighbourhood(self, u: int, within: Optional[VertexSet] = None) -> VertexSet:
        """N(u), optionally projected onto `within` (coordinates outside zeroed)."""
        mask = self.row(u)
        if within is not None:
            mask &= within.mask
        return VertexSet(self.n, mask)

    def degree(self, u: int) -> int:
        return int(self._degrees[u])

    def degree_within(self, u: int, s: VertexSet) -> int:
        return (self.row(u) & s.mask).bit_count()

    def degrees_within(self, s: VertexSet) -> np.ndarray:
        words = s.to_words()
        return np.bitwise_count(self._packed & words).sum(axis=1, dtype=np.int64)

    def max_degree(self) -> int:
        return int(self._degrees.max())

    def min_degree(self) -> int:
        return int(self._degrees.min())

    def average_degree(self) -> float:
        return float(self._degrees.mean())

    def edge_count(self) -> int:
        return int(self._degrees.sum()) // 2

    def edges(self) -> Iterator[tuple[int, int]]:
        for u in range(self.n):
            above = self.row(u) >> (u + 1)
            v = u + 1
            while above:
                low = above & -above
                yield (u, v + low.bit_length() - 1)
                above ^= low

    def vertices(self) -> VertexSet:
        return VertexSet.full(self.n)

    # -- derived graphs -----------------------------------------------------

    def complement(self) -> "Graph":
        raw = np.unpackbits(self._packed.view(np.uint8), axis=1, bitorder="little")[:, : self.n]
        comp = ~raw.astype(bool)
        np.fill_diagonal(comp, False)
        return Graph.from_bool_matrix(comp)

    def induced(self, s: VertexSet) -> tuple["Graph", list[int]]:
        """Subgraph on s with vertices relabelled 0..|s|-1 in increasing order.

        Returns the subgraph and the relabelling map (new index -> old label).
        """
        if s.n != self.n:
            raise PreconditionError("vertex set over a different universe")
        members = s.members()
        if not members:
            raise PreconditionError("induced subgraph needs a nonempty vertex set")
        idx = np.array(members)
        raw = np.unpackbits(self._packed[idx].view(np.uint8), axis=1, bitorder="little")[:, : self.n]
        sub = raw[:, idx].astype(bool)
        return Graph.from_bool_matrix(sub), members

    def fingerprint(self) -> str:
        digest = hashlib.sha256()
        digest.update(str(self.n).encode())
        digest.update(self._packed.tobytes())
        return digest.hexdigest()

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.edge_count()})"


# -- diversity (Hamming distance of neighbourhood vectors) -------------------


def diversity(g: Graph, u: int, v: int, s: Optional[VertexSet] = None) -> int:
    """|N^S(u) symmetric-difference N^S(v)|.

    u == v is rejected: callers that need it use the trivial zero directly.
    """
    if u == v:
        raise PreconditionError("diversity of a vertex with itself is trivially zero")
    x = g.row(u) ^ g.row(v)
    if s is not None:
        x &= s.mask
    return x.bit_count()


def diversity_row(g: Graph, v: int, s: Optional[VertexSet] = None) -> np.ndarray:
    """Vector of diversities from v to every vertex (including v, at zero)."""
    x = g.packed ^ g.packed[v]
    if s is not None:
        x = x & s.to_words()
    return np.bitwise_count(x).sum(axis=1, dtype=np.int64)


def diversity_block(g: Graph, vertices: Sequence[int], s: Optional[VertexSet] = None) -> np.ndarray:
    """Pairwise diversity matrix restricted to the given vertices."""
    idx = np.asarray(list(vertices), dtype=np.int64)
    sub = g.packed[idx]
    if s is not None:
        sub = sub & s.to_words()
    t = len(idx)
    out = np.zeros((t, t), dtype=np.int64)
    for i in range(t):
        out[i] = np.bitwise_count(sub ^ sub[i]).sum(axis=1, dtype=np.int64)
    return out


# -- generation ---------------------------------------------------------------


def generate_gnp(n: int, p: float, seed: int) -> Graph:
    """Seeded Erdos-Renyi graph: pair (u,v), u<v, is an edge iff its Philox
    draw is < p. Draw order is row-major over the upper triangle, so a given
    (n, p, seed) is bit-identical on every platform."""
    if n < 1:
        raise PreconditionError("generate_gnp needs n >= 1")
    if not 0.0 <= p <= 1.0:
        raise PreconditionError(f"edge probability {p} outside [0, 1]")
    rng = stream(seed, "gnp", n)
    adj = np.zeros((n, n), dtype=bool)
    for u in range(n - 1):
        draws = rng.random(n - 1 - u)
        hits = draws < p
        adj[u, u + 1 :] = hits
        adj[u + 1 :, u] = hits
    return Graph.from_bool_matrix(adj)


# -- text format ---------------------------------------------------------------


def dumps_graph(g: Graph) -> str:
    lines = [f"{g.n} {g.edge_count()}"]
    lines.extend(f"{u} {v}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


def loads_graph(text: str) -> Graph:
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines:
        raise PreconditionError("empty graph file")
    head = lines[0].split()
    if len(head) != 2:
        raise PreconditionError("first line must be 'n m'")
    n, m = int(head[0]), int(head[1])
    if n < 1:
        raise PreconditionError("graph needs n >= 1")
    if len(lines) - 1 != m:
        raise PreconditionError(f"declared {m} edges but found {len(lines) - 1}")
    seen: set[tuple[int, int]] = set()
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise PreconditionError(f"bad edge line: {ln!r}")
        u, v = int(parts[0]), int(parts[1])
        if u == v:
            raise PreconditionError(f"loop at vertex {u}")
        if not (0 <= u < v < n):
            raise PreconditionError(f"edge ({u},{v}) must satisfy 0 <= u < v < n")
        if (u, v) in seen:
            raise PreconditionError(f"duplicate edge ({u},{v})")
        seen.add((u, v))
        edges.append((u, v))
    return Graph.from_edges(n, edges)


def load_graph(path) -> Graph:
    with open(path, "r", encoding="utf8") as fh:
        return loads_graph(fh.read())


def save_graph(g: Graph, path) -> None:
    with open(path, "w", encoding="utf8", newline="\n") as fh:
        fh.write(dumps_graph(g))
