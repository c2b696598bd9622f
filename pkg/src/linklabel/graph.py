"""Signed directed graph data model.

A signed network is a directed graph whose edges carry a label from a small
alphabet (classically "+" / "-" for trust/distrust).  This module holds the
immutable graph snapshot every other part of the library reads from, plus the
ways of producing one: loading an edge-list file, generating a synthetic
role-structured graph, and sparsifying an existing graph by random edge
removal.

Normalization rules applied by every constructor path:

* self-loops are dropped,
* duplicate ordered pairs are collapsed, keeping the last occurrence
  (re-votes overwrite earlier votes),

so each ordered node pair carries at most one labeled edge.  This guarantees
that the per-label in-neighborhoods of a node are disjoint, which the
estimators' normalization relies on.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np


class EdgeListParseError(ValueError):
    """Raised for malformed edge-list input; carries the offending line number."""


class LabelAlphabet:
    """Ordered label alphabet; labels are dense indices 0..size-1.

    The order is fixed for the lifetime of a model: tie-breaking in the
    decision rule depends on it.
    """

    def __init__(self, names: Sequence[str]):
        names = tuple(str(n) for n in names)
        if len(names) < 2:
            raise ValueError("label alphabet needs at least 2 labels")
        if len(set(names)) != len(names):
            raise ValueError("label names must be distinct")
        self.names = names

    @property
    def size(self) -> int:
        return len(self.names)

    def index_of(self, name: str) -> int:
        return self.names.index(name)

    def __eq__(self, other) -> bool:
        return isinstance(other, LabelAlphabet) and self.names == other.names

    def __repr__(self) -> str:
        return f"LabelAlphabet({self.names!r})"


#: The classic trust/distrust alphabet.
SIGNED = LabelAlphabet(("+", "-"))


def _default_token_map(alphabet: LabelAlphabet) -> dict:
    tokens = {name: i for i, name in enumerate(alphabet.names)}
    if alphabet.names == SIGNED.names:
        tokens.update({"1": 0, "+1": 0, "-1": 1})
    return tokens


@dataclass
class LoadOptions:
    """Controls edge-list parsing.

    ``token_map`` maps sign tokens in the file to label indices; the default
    understands ``1``/``+1``/``+`` and ``-1``/``-``.  Supplying a larger
    alphabet plus its own token map makes the same loader read multi-label
    files.
    """

    alphabet: LabelAlphabet = field(default_factory=lambda: SIGNED)
    token_map: Optional[dict] = None

    def resolved_tokens(self) -> dict:
        return dict(self.token_map) if self.token_map is not None else _default_token_map(self.alphabet)


@dataclass
class LoadReport:
    """What the loader saw before and during normalization."""

    raw_lines: int = 0              # data lines parsed (comments excluded)
    raw_nodes: int = 0              # distinct external ids seen, incl. self-loop endpoints
    raw_label_counts: Optional[np.ndarray] = None   # per-label counts over raw data lines
    self_loops_dropped: int = 0
    duplicates_collapsed: int = 0

    @property
    def raw_edges(self) -> int:
        return self.raw_lines


class SignedGraph:
    """Immutable directed graph with labeled edges.

    Stores edges once, sorted by ``(src, dst)``, and derives CSR-style views:
    out-adjacency per node, and in-adjacency per node both pooled and split
    by label (each in-list strictly sorted by tail id).  Safe for concurrent
    readers; never mutated after construction.
    """

    def __init__(self, node_count, src, dst, lbl, alphabet, external_ids):
        # Inputs must already be normalized: unique ordered pairs, no
        # self-loops, sorted by (src, dst).
        self.node_count = int(node_count)
        self.alphabet = alphabet
        self.external_ids = list(external_ids)
        if len(self.external_ids) != self.node_count:
            raise ValueError("external id list does not match node count")
        self._ext_to_id = {e: i for i, e in enumerate(self.external_ids)}

        self._src = np.asarray(src, dtype=np.int64)
        self._dst = np.asarray(dst, dtype=np.int64)
        self._lbl = np.asarray(lbl, dtype=np.int64)
        self.edge_count = int(self._src.size)

        n, L = self.node_count, alphabet.size
        self._out_ptr = np.searchsorted(self._src, np.arange(n + 1))

        # In-adjacency pooled over labels, sorted by (dst, src).
        order1 = np.lexsort((self._src, self._dst))
        self._in_src = self._src[order1]
        self._in_ptr = np.searchsorted(self._dst[order1], np.arange(n + 1))

        # In-adjacency split by label, sorted by (dst, label, src).
        order2 = np.lexsort((self._src, self._lbl, self._dst))
        self._inl_src = self._src[order2]
        key = self._dst[order2] * L + self._lbl[order2]
        self._inl_ptr = np.searchsorted(key, np.arange(n * L + 1))

        self._tail_set_cache: dict = {}

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_edges(cls, node_count, edges, alphabet=None, external_ids=None):
        """Build a graph from an iterable of ``(src, dst, label)`` dense-id triples.

        Applies the standard normalization (self-loops dropped, duplicate
        ordered pairs collapsed last-wins).
        """
        alphabet = alphabet or SIGNED
        edges = list(edges)
        if edges:
            src = np.array([e[0] for e in edges], dtype=np.int64)
            dst = np.array([e[1] for e in edges], dtype=np.int64)
            lbl = np.array([e[2] for e in edges], dtype=np.int64)
        else:
            src = dst = lbl = np.empty(0, dtype=np.int64)
        src, dst, lbl, _, _ = normalize_edge_arrays(src, dst, lbl, node_count)
        if external_ids is None:
            width = max(1, len(str(max(node_count - 1, 0))))
            external_ids = [f"{i:0{width}d}" for i in range(node_count)]
        return cls(node_count, src, dst, lbl, alphabet, external_ids)

    def replace_edges(self, src, dst, lbl) -> "SignedGraph":
        """New graph with the same node universe and a different edge set.

        The arrays must already be normalized and sorted by ``(src, dst)``;
        used by sparsification, fold splitting and streaming, which never
        renumber nodes.
        """
        return SignedGraph(self.node_count, src, dst, lbl, self.alphabet, self.external_ids)

    # -- lookups ------------------------------------------------------------

    def node_of(self, external_id: str) -> int:
        try:
            return self._ext_to_id[external_id]
        except KeyError:
            raise KeyError(f"unknown node id {external_id!r}") from None

    def external_of(self, node: int) -> str:
        return self.external_ids[node]

    def has_node(self, external_id: str) -> bool:
        return external_id in self._ext_to_id

    def out_arrays(self, u: int):
        """(heads, labels) arrays of u's out-edges, sorted by head."""
        a, b = self._out_ptr[u], self._out_ptr[u + 1]
        return self._dst[a:b], self._lbl[a:b]

    def out_degree(self, u: int) -> int:
        return int(self._out_ptr[u + 1] - self._out_ptr[u])

    def in_tails(self, u: int, label: Optional[int] = None) -> np.ndarray:
        """Sorted array of tails pointing at ``u`` (with ``label`` if given)."""
        if label is None:
            return self._in_src[self._in_ptr[u]:self._in_ptr[u + 1]]
        L = self.alphabet.size
        k = u * L + label
        return self._inl_src[self._inl_ptr[k]:self._inl_ptr[k + 1]]

    def tail_set(self, u: int, label: Optional[int] = None) -> frozenset:
        """``in_tails`` as a cached frozenset, for fast intersections."""
        key = (u, label)
        s = self._tail_set_cache.get(key)
        if s is None:
            s = frozenset(self.in_tails(u, label).tolist())
            self._tail_set_cache[key] = s
        return s

    @property
    def edge_arrays(self):
        """(src, dst, label) arrays in canonical (src, dst) order."""
        return self._src, self._dst, self._lbl

    def edges(self) -> Iterator[tuple]:
        """Iterate ``(src, dst, label)`` as python ints, canonical order."""
        for s, d, l in zip(self._src.tolist(), self._dst.tolist(), self._lbl.tolist()):
            yield s, d, l

    def edge_map(self) -> dict:
        """Edges as a ``(src, dst) -> label`` dict."""
        return {(s, d): l for s, d, l in self.edges()}

    def label_counts(self) -> np.ndarray:
        return np.bincount(self._lbl, minlength=self.alphabet.size)

    def content_digest(self) -> str:
        """Stable digest over the dense structure, for artifact provenance."""
        h = hashlib.sha256()
        h.update(f"{self.node_count};{self.alphabet.names}".encode())
        h.update(self._src.tobytes())
        h.update(self._dst.tobytes())
        h.update(self._lbl.tobytes())
        return h.hexdigest()

    def validate(self) -> None:
        """Full cross-scan of the redundant adjacency views; raises on drift."""
        if self._src.size and not (np.all(np.diff(self._src * self.node_count + self._dst) > 0)):
            raise AssertionError("edges not strictly sorted/unique by (src, dst)")
        if np.any(self._src == self._dst):
            raise AssertionError("self-loop present")
        rebuilt = set()
        for u in range(self.node_count):
            for l in range(self.alphabet.size):
                t = self.in_tails(u, l)
                if t.size and np.any(np.diff(t) <= 0):
                    raise AssertionError(f"in-list of node {u} label {l} not strictly sorted")
                rebuilt.update((int(s), u, l) for s in t)
        direct = set(self.edges())
        if rebuilt != direct:
            raise AssertionError("in/out adjacency describe different edge sets")
        if self.edge_count != len(direct):
            raise AssertionError("edge_count out of sync")


def normalize_edge_arrays(src, dst, lbl, node_count):
    """Drop self-loops, collapse duplicate ordered pairs last-wins, sort.

    Returns ``(src, dst, lbl, n_self_loops, n_duplicates)`` with the edge
    arrays sorted by ``(src, dst)`` and unique per ordered pair.
    """
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    lbl = np.asarray(lbl, dtype=np.int64)
    keep = src != dst
    n_self = int(src.size - keep.sum())
    src, dst, lbl = src[keep], dst[keep], lbl[keep]
    if src.size == 0:
        return src, dst, lbl, n_self, 0
    key = src * max(node_count, 1) + dst
    order = np.lexsort((np.arange(src.size), key))   # stable within a pair
    key = key[order]
    last = np.ones(key.size, dtype=bool)
    last[:-1] = key[1:] != key[:-1]                  # last occurrence wins
    n_dup = int(key.size - last.sum())
    sel = order[last]
    return src[sel], dst[sel], lbl[sel], n_self, n_dup


# -- edge-list I/O ----------------------------------------------------------

NODE_COMMENT = "# node "


def load_edge_list(path, options: Optional[LoadOptions] = None):
    """Parse a whitespace-separated ``src dst sign`` edge list.

    Lines beginning with ``#`` are comments; the writer's ``# node <id>``
    registration lines are honored so that edge-free nodes survive a
    write/reload round trip.  Dense node ids are assigned by sorted external
    token, making the id space a pure function of the file's content.

    Args:
        path: file to read.
        options: alphabet and sign-token mapping; defaults to +/-.

    Returns:
        ``(SignedGraph, LoadReport)`` — the normalized graph plus counters
        for what normalization dropped or collapsed.

    Raises:
        EdgeListParseError: wrong arity or unknown sign token, naming the line.
        OSError: unreadable file.
    """
    options = options or LoadOptions()
    tokens = options.resolved_tokens()
    alphabet = options.alphabet

    ext_nodes = set()
    src_t, dst_t, lbl_t = [], [], []
    report = LoadReport(raw_label_counts=np.zeros(alphabet.size, dtype=np.int64))

    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith(NODE_COMMENT):
                    name = line[len(NODE_COMMENT):].strip()
                    if name:
                        ext_nodes.add(name)
                continue
            parts = line.split()
            if len(parts) != 3:
                raise EdgeListParseError(
                    f"{path}:{lineno}: expected 'src dst sign', got {len(parts)} fields")
            s_tok, d_tok, sign = parts
            try:
                label = tokens[sign]
            except KeyError:
                raise EdgeListParseError(
                    f"{path}:{lineno}: unknown sign token {sign!r}") from None
            ext_nodes.add(s_tok)
            ext_nodes.add(d_tok)
            src_t.append(s_tok)
            dst_t.append(d_tok)
            lbl_t.append(label)
            report.raw_lines += 1
            report.raw_label_counts[label] += 1

    external_ids = sorted(ext_nodes)
    report.raw_nodes = len(external_ids)
    idx = {e: i for i, e in enumerate(external_ids)}
    n = len(external_ids)

    src = np.fromiter((idx[t] for t in src_t), dtype=np.int64, count=len(src_t))
    dst = np.fromiter((idx[t] for t in dst_t), dtype=np.int64, count=len(dst_t))
    lbl = np.asarray(lbl_t, dtype=np.int64)
    src, dst, lbl, n_self, n_dup = normalize_edge_arrays(src, dst, lbl, n)
    report.self_loops_dropped = n_self
    report.duplicates_collapsed = n_dup
    return SignedGraph(n, src, dst, lbl, alphabet, external_ids), report


def write_edge_list(graph: SignedGraph, path) -> None:
    """Write the graph back in loader-compatible form.

    Edge-free nodes are registered via ``# node`` comment lines so the node
    universe round-trips exactly.
    """
    deg = np.zeros(graph.node_count, dtype=np.int64)
    src, dst, _ = graph.edge_arrays
    np.add.at(deg, src, 1)
    np.add.at(deg, dst, 1)
    with open(path, "w", encoding="utf-8") as fh:
        for u in np.flatnonzero(deg == 0):
            fh.write(f"{NODE_COMMENT}{graph.external_of(int(u))}\n")
        names = graph.alphabet.names
        for s, d, l in graph.edges():
            fh.write(f"{graph.external_of(s)} {graph.external_of(d)} {names[l]}\n")


# -- synthetic graphs and sparsification -------------------------------------

def generate_planted(n_nodes, n_roles, edge_prob, noise, seed, alphabet=None):
    """Generate a role-structured graph with a hidden planted partition.

    Nodes get roles round-robin (node ``i`` has role ``i % n_roles``); a
    role-pair label table is drawn from ``seed``; every ordered pair (u != v)
    carries an edge with probability ``edge_prob`` whose label is the table
    entry, replaced by a uniformly random *other* label with probability
    ``noise``.  At ``noise=0`` the role partition makes every cluster pair
    label-pure, so it is a known zero of the clustering objective.

    Returns:
        ``(SignedGraph, roles)`` where ``roles`` is the planted assignment.
    """
    alphabet = alphabet or SIGNED
    if n_roles < 2:
        raise ValueError("need at least 2 roles")
    if n_roles > n_nodes:
        raise ValueError("more roles than nodes")
    if not (0.0 <= edge_prob <= 1.0) or not (0.0 <= noise <= 1.0):
        raise ValueError("edge_prob and noise must lie in [0, 1]")
    L = alphabet.size
    rng = np.random.default_rng(seed)
    table = rng.integers(0, L, size=(n_roles, n_roles))
    roles = np.arange(n_nodes, dtype=np.int64) % n_roles

    mask = rng.random((n_nodes, n_nodes)) < edge_prob
    np.fill_diagonal(mask, False)
    src, dst = np.nonzero(mask)          # row-major: already (src, dst) sorted
    lbl = table[roles[src], roles[dst]]
    flip = rng.random(src.size) < noise
    # A uniformly random other label = add a nonzero offset mod L.
    offsets = rng.integers(1, L, size=src.size)
    lbl = np.where(flip, (lbl + offsets) % L, lbl)

    width = max(1, len(str(max(n_nodes - 1, 0))))
    external_ids = [f"{i:0{width}d}" for i in range(n_nodes)]
    g = SignedGraph(n_nodes, src.astype(np.int64), dst.astype(np.int64),
                    lbl.astype(np.int64), alphabet, external_ids)
    return g, roles


def sparsify(graph: SignedGraph, density: float, seed: int) -> SignedGraph:
    """Keep ``round(density * edge_count)`` uniformly sampled edges.

    Nodes are never removed and ids are never renumbered; deterministic for
    a given seed.
    """
    if not (0.0 < density <= 1.0):
        raise ValueError("density must lie in (0, 1]")
    keep = round(density * graph.edge_count)
    rng = np.random.default_rng(seed)
    sel = np.sort(rng.choice(graph.edge_count, size=keep, replace=False))
    src, dst, lbl = graph.edge_arrays
    return graph.replace_edges(src[sel], dst[sel], lbl[sel])


# -- prediction queries ------------------------------------------------------

@dataclass(frozen=True)
class PredictionQuery:
    """An edge whose label is to be predicted, tail (initiator) to head (receiver)."""

    initiator: int
    receiver: int


@dataclass
class Context:
    """The initiator's labeled out-edges, excluding any edge to the receiver.

    This is the conditioning information of every predictor.  Weights are
    uniform and sum to 1 when nonempty.
    """

    heads: np.ndarray
    labels: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return int(self.heads.size)

    def entries(self):
        return zip(self.heads.tolist(), self.labels.tolist())


def context_of(graph: SignedGraph, query: PredictionQuery) -> Context:
    """Context of a query; empty contexts are valid and trigger fallback downstream."""
    i, j = query.initiator, query.receiver
    if i == j:
        raise ValueError("initiator and receiver must differ")
    if not (0 <= i < graph.node_count and 0 <= j < graph.node_count):
        raise ValueError("query node out of range")
    heads, labels = graph.out_arrays(i)
    m = heads != j
    heads, labels = heads[m], labels[m]
    k = heads.size
    weights = np.full(k, 1.0 / k) if k else np.empty(0)
    return Context(heads, labels, weights)


def graph_stats(graph: SignedGraph, report: Optional[LoadReport] = None) -> dict:
    """Node/edge counts and per-label shares, raw (pre-normalization) and normalized."""
    counts = graph.label_counts()
    total = counts.sum()
    stats = {
        "nodes": graph.node_count,
        "edges": graph.edge_count,
        "labels": list(graph.alphabet.names),
        "label_counts": counts.tolist(),
        "label_shares": (counts / total).tolist() if total else [0.0] * graph.alphabet.size,
    }
    if report is not None:
        raw = report.raw_label_counts
        raw_total = raw.sum()
        stats["raw"] = {
            "nodes": report.raw_nodes,
            "edges": report.raw_edges,
            "label_counts": raw.tolist(),
            "label_shares": (raw / raw_total).tolist() if raw_total else [0.0] * graph.alphabet.size,
            "self_loops_dropped": report.self_loops_dropped,
            "duplicates_collapsed": report.duplicates_collapsed,
        }
    return stats
