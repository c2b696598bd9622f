"""Exact co-occurrence statistics behind all predictors.

Two count families are provided:

* node-level: how many nodes point at both of two given nodes with given
  labels (intersection sizes of in-neighborhood tail sets), served either
  on demand from the graph or from a precomputed sparse table;
* cluster-level: given a partition, how many nodes of one cluster have at
  least one edge into each of two given clusters with given labels.

Both families support an "any label" selector (the ``ANY`` sentinel) with
set-union semantics. At node level the per-label tail sets partition the
pooled tail set (one edge per ordered pair), so summing per-label counts
reproduces the ANY count. At cluster level that identity does NOT hold: a
single node can carry several labels into the same cluster, so ANY is a
genuine union, never a sum.

The precomputed node-level table and the cluster table can be kept in sync
with a live edge stream through ``apply_edge_batch``, whose per-edge cost is
proportional to the tail's out-degree rather than to the graph size.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .graph import SignedGraph

#: Label selector meaning "any label" (set union over labels).
ANY = -1

#: Default cap on sum(out_degree^2), the true pair-enumeration cost of a
#: precomputed table build.
DEFAULT_PAIR_BUDGET = 2_000_000


class BudgetExceededError(RuntimeError):
    """Raised when a precomputed build would exceed its pair budget."""

    def __init__(self, projected_cost: int, budget: int):
        self.projected_cost = projected_cost
        self.budget = budget
        super().__init__(
            f"precomputed count table needs {projected_cost} ordered edge pairs, "
            f"budget is {budget}; pass override=True to force, or use the "
            f"on_demand strategy")


def nam_count(graph: SignedGraph, m: int, l: int, n: int, lp: int) -> int:
    """Count nodes with an edge into ``m`` labeled ``l`` and one into ``n`` labeled ``lp``.

    ``l`` and ``lp`` may be ``ANY``, selecting the pooled (union) tail set.
    Computed by intersecting the cached tail sets of the two endpoints.

    Args:
        graph: the graph to count in.
        m, n: head nodes.
        l, lp: label indices or ANY.

    Returns:
        Exact intersection size.
    """
    a = graph.tail_set(m, None if l == ANY else l)
    b = graph.tail_set(n, None if lp == ANY else lp)
    if len(a) > len(b):
        a, b = b, a
    return len(a & b)


def _bump4(table: dict, h1, l1, h2, l2, sign: int) -> None:
    # One ordered out-edge pair feeds the concrete key plus its 3 ANY
    # projections. Decrements prune zeros so the table stays identical to a
    # fresh build.
    for k in ((h1, l1, h2, l2), (h1, ANY, h2, l2),
              (h1, l1, h2, ANY), (h1, ANY, h2, ANY)):
        v = table.get(k, 0) + sign
        if v:
            table[k] = v
        else:
            table.pop(k, None)


class CooccurrenceCounts:
    """Node-pair co-pointing counts with two interchangeable strategies.

    ``on_demand`` answers each query by set intersection over the immutable
    graph; ``precomputed`` holds a sparse table built by enumerating every
    tail's ordered out-edge pairs, which also makes incremental stream
    updates possible.

    With a ``node_filter``, the precomputed table only stores entries whose
    BOTH head nodes pass the predicate; queries outside the filtered set
    silently return 0, so filtered tables must only be queried for nodes of
    interest.
    """

    def __init__(self, graph: SignedGraph, strategy: str, table: Optional[dict] = None,
                 node_filter: Optional[Callable[[int], bool]] = None,
                 projected_pair_cost: Optional[int] = None):
        if strategy not in ("on_demand", "precomputed"):
            raise ValueError(f"unknown strategy {strategy!r}")
        self.graph = graph
        self.strategy = strategy
        self.table = table if table is not None else ({} if strategy == "precomputed" else None)
        self.node_filter = node_filter
        self.projected_pair_cost = projected_pair_cost
        self._allowed_cache: dict = {}

    @classmethod
    def on_demand(cls, graph: SignedGraph) -> "CooccurrenceCounts":
        return cls(graph, "on_demand")

    @classmethod
    def precomputed(cls, graph: SignedGraph, node_filter=None,
                    budget: int = DEFAULT_PAIR_BUDGET, override: bool = False):
        return build_precomputed_nam(graph, node_filter=node_filter,
                                     budget=budget, override=override)

    def _allowed(self, node: int) -> bool:
        if self.node_filter is None:
            return True
        ok = self._allowed_cache.get(node)
        if ok is None:
            ok = bool(self.node_filter(node))
            self._allowed_cache[node] = ok
        return ok

    def count(self, m: int, l: int, n: int, lp: int) -> int:
        """Exact count for (m, l, n, lp); absent precomputed keys are 0."""
        if self.strategy == "on_demand":
            return nam_count(self.graph, m, l, n, lp)
        return self.table.get((m, l, n, lp), 0)


def projected_pair_cost(graph: SignedGraph) -> int:
    """sum(out_degree^2): the exact number of ordered out-edge pairs enumerated."""
    src, _, _ = graph.edge_arrays
    deg = np.bincount(src, minlength=graph.node_count)
    return int(np.sum(deg.astype(np.int64) ** 2))


def build_precomputed_nam(graph: SignedGraph, node_filter=None,
                          budget: int = DEFAULT_PAIR_BUDGET,
                          override: bool = False) -> CooccurrenceCounts:
    """Build the full sparse co-pointing table in one pass over tails.

    For each tail node the ordered pairs of its out-edges (self-pairs
    included) are enumerated and counted under the concrete key and its ANY
    projections. The enumeration cost is sum(out_degree^2), which is
    reported on the result and guarded by ``budget``.

    Args:
        graph: the graph to index.
        node_filter: optional predicate over head node ids; only pairs whose
            both heads pass are stored.
        budget: maximum allowed ordered-pair count.
        override: build even when the budget is exceeded.

    Returns:
        A precomputed CooccurrenceCounts with ``projected_pair_cost`` set.

    Raises:
        BudgetExceededError: projected cost exceeds budget and not overridden.
    """
    cost = projected_pair_cost(graph)
    if cost > budget and not override:
        raise BudgetExceededError(cost, budget)
    counts = CooccurrenceCounts(graph, "precomputed", table={},
                                node_filter=node_filter, projected_pair_cost=cost)
    table = counts.table
    for w in range(graph.node_count):
        heads, labels = graph.out_arrays(w)
        if heads.size == 0:
            continue
        out = list(zip(heads.tolist(), labels.tolist()))
        if node_filter is not None:
            out = [(h, l) for h, l in out if counts._allowed(h)]
        for h1, l1 in out:
            for h2, l2 in out:
                _bump4(table, h1, l1, h2, l2, +1)
    return counts


# -- cluster-level counts -----------------------------------------------------

def _incidence_set(heads, labels, assignment) -> set:
    """Distinct (head cluster, label) incidences of one node's out-edges, plus ANY."""
    d = set()
    for h, l in zip(heads.tolist(), labels.tolist()):
        c = int(assignment[h])
        d.add((c, l))
        d.add((c, ANY))
    return d


def cam_count(graph: SignedGraph, partition, s: int, m: int, l: int, n: int, lp: int) -> int:
    """Count cluster-s nodes with an edge into cluster ``m`` labeled ``l`` and one into ``n`` labeled ``lp``.

    Direct single-pass computation from the partition; ``l``/``lp`` may be
    ANY. Unlike the node-level counts, per-label counts here may exceed the
    ANY count when nodes carry several labels into the same cluster.
    """
    assignment = partition.assignment
    want1, want2 = (m, l), (n, lp)
    total = 0
    for v in np.flatnonzero(assignment == s):
        heads, labels = graph.out_arrays(int(v))
        if heads.size == 0:
            continue
        d = _incidence_set(heads, labels, assignment)
        if want1 in d and want2 in d:
            total += 1
    return total


class ClusterCounts:
    """Sparse table of cluster-level co-incidence counts.

    Keys are (s, m, l, n, lp): how many nodes assigned to cluster ``s`` have
    at least one edge into cluster ``m`` with label ``l`` and at least one
    into cluster ``n`` with label ``lp`` (ANY = any label). Entries never
    exceed the size of cluster ``s``.
    """

    def __init__(self, graph: SignedGraph, partition, table: Optional[dict] = None):
        self.graph = graph
        self.partition = partition
        self.table = table if table is not None else {}

    @classmethod
    def from_partition(cls, graph: SignedGraph, partition) -> "ClusterCounts":
        """Build the full table in one pass: each node contributes the ordered
        pairs of its distinct (target cluster, label) incidences."""
        cc = cls(graph, partition, table={})
        assignment = partition.assignment
        table = cc.table
        for v in range(graph.node_count):
            heads, labels = graph.out_arrays(v)
            if heads.size == 0:
                continue
            s = int(assignment[v])
            d = list(_incidence_set(heads, labels, assignment))
            for a in d:
                for b in d:
                    k = (s, a[0], a[1], b[0], b[1])
                    table[k] = table.get(k, 0) + 1
        return cc

    def count(self, s: int, m: int, l: int, n: int, lp: int) -> int:
        return self.table.get((s, m, l, n, lp), 0)

    def _apply_incidences(self, s: int, d: Iterable, sign: int) -> None:
        d = list(d)
        table = self.table
        for a in d:
            for b in d:
                k = (s, a[0], a[1], b[0], b[1])
                v = table.get(k, 0) + sign
                if v:
                    table[k] = v
                else:
                    table.pop(k, None)


# -- snapshots ---------------------------------------------------------------

NAM_SNAPSHOT_HEADER = "nam-snapshot v1"
CAM_SNAPSHOT_HEADER = "cam-snapshot v1"


def save_nam_snapshot(counts: CooccurrenceCounts, path) -> None:
    """Write a precomputed node-level table as versioned text, sorted keys.

    Plain integers only, so files are identical across platforms. A filter
    predicate, if any, is not persisted; reloaded tables answer exactly the
    keys that were stored.
    """
    if counts.strategy != "precomputed":
        raise ValueError("only precomputed count tables can be snapshotted")
    g = counts.graph
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{NAM_SNAPSHOT_HEADER}\n")
        fh.write(f"nodes {g.node_count} labels {g.alphabet.size}\n")
        for (m, l, n, lp), c in sorted(counts.table.items()):
            fh.write(f"{m} {l} {n} {lp} {c}\n")


def load_nam_snapshot(path, graph: SignedGraph) -> CooccurrenceCounts:
    """Reload a node-level snapshot against the graph it was built from."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != NAM_SNAPSHOT_HEADER:
            raise ValueError(f"{path}: not a nam-snapshot v1 file (header {header!r})")
        meta = fh.readline().split()
        if len(meta) != 4 or meta[0] != "nodes" or meta[2] != "labels":
            raise ValueError(f"{path}: malformed snapshot metadata line")
        n, L = int(meta[1]), int(meta[3])
        if n != graph.node_count or L != graph.alphabet.size:
            raise ValueError(
                f"{path}: snapshot is for {n} nodes / {L} labels, graph has "
                f"{graph.node_count} / {graph.alphabet.size}")
        table = {}
        for lineno, line in enumerate(fh, start=3):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 5:
                raise ValueError(f"{path}:{lineno}: expected 5 fields")
            m, l, nn, lp, c = (int(p) for p in parts)
            table[(m, l, nn, lp)] = c
    return CooccurrenceCounts(graph, "precomputed", table=table)


def save_cam_snapshot(cluster_counts: ClusterCounts, path) -> None:
    """Write a cluster-level table as versioned text, sorted keys."""
    part = cluster_counts.partition
    g = cluster_counts.graph
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{CAM_SNAPSHOT_HEADER}\n")
        fh.write(f"clusters {part.K} labels {g.alphabet.size}\n")
        for (s, m, l, n, lp), c in sorted(cluster_counts.table.items()):
            fh.write(f"{s} {m} {l} {n} {lp} {c}\n")


def load_cam_snapshot(path, graph: SignedGraph, partition) -> ClusterCounts:
    """Reload a cluster-level snapshot against its graph and partition."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != CAM_SNAPSHOT_HEADER:
            raise ValueError(f"{path}: not a cam-snapshot v1 file (header {header!r})")
        meta = fh.readline().split()
        if len(meta) != 4 or meta[0] != "clusters" or meta[2] != "labels":
            raise ValueError(f"{path}: malformed snapshot metadata line")
        k, L = int(meta[1]), int(meta[3])
        if k != partition.K or L != graph.alphabet.size:
            raise ValueError(
                f"{path}: snapshot is for {k} clusters / {L} labels, got "
                f"{partition.K} / {graph.alphabet.size}")
        table = {}
        for lineno, line in enumerate(fh, start=3):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 6:
                raise ValueError(f"{path}:{lineno}: expected 6 fields")
            s, m, l, n, lp, c = (int(p) for p in parts)
            table[(s, m, l, n, lp)] = c
    return ClusterCounts(graph, partition, table=table)


# -- streaming updates ---------------------------------------------------------

@dataclass
class BatchReport:
    """Summary of one applied edge batch."""

    added: int = 0                   # brand-new ordered pairs
    relabeled: int = 0               # existing pairs whose label changed
    unchanged: int = 0               # restatements of an existing edge
    self_loops_dropped: int = 0
    collapsed_in_batch: int = 0      # within-batch duplicate pairs (last wins)
    new_nodes: int = 0
    new_node_ids: list = field(default_factory=list)


def apply_edge_batch(counts: CooccurrenceCounts, cluster_counts: ClusterCounts,
                     graph: SignedGraph, new_edges, auto_intern: bool = True):
    """Fold a batch of labeled edges into the graph and both count structures.

    Batch edges are ``(src_external_id, dst_external_id, label_index)``
    triples and pass the loader's normalization: self-loops are dropped,
    within-batch duplicates collapse last-wins, and a pair that already
    exists in the graph has its old label retracted from the counts before
    the new one is added. After the call every count equals what a
    from-scratch build on the extended graph would produce; existing cluster
    assignments are untouched and brand-new nodes are placed on the cluster
    whose objective delta is smallest (largest cluster when edge-free).

    The caller must hold exclusive access: ``counts``, ``cluster_counts``
    and its partition are mutated in place and rebound to the returned
    graph.

    Args:
        counts: node-level counts; a precomputed table is updated in place,
            an on_demand instance is merely rebound to the new graph.
        cluster_counts: cluster-level table, updated in place; its partition
            gains assignments for new nodes.
        graph: the current graph snapshot.
        new_edges: iterable of (src, dst, label) with external string ids.
        auto_intern: when False, unknown external ids raise instead of
            creating nodes.

    Returns:
        (new_graph, BatchReport)
    """
    partition = cluster_counts.partition
    alphabet = graph.alphabet
    L = alphabet.size
    report = BatchReport()

    # Phase 0: normalize the batch (drop self-loops, last label per pair wins).
    effective: dict = {}
    for s_ext, d_ext, label in new_edges:
        label = int(label)
        if not (0 <= label < L):
            raise ValueError(f"label index {label} out of range for alphabet size {L}")
        if s_ext == d_ext:
            report.self_loops_dropped += 1
            continue
        if (s_ext, d_ext) in effective:
            report.collapsed_in_batch += 1
        effective[(s_ext, d_ext)] = label

    # Intern external ids; new nodes take dense ids in first-appearance order.
    n_old = graph.node_count
    pending: dict = {}
    for s_ext, d_ext in effective:
        for tok in (s_ext, d_ext):
            if not graph.has_node(tok) and tok not in pending:
                if not auto_intern:
                    raise ValueError(f"unknown node id {tok!r} and auto_intern is disabled")
                pending[tok] = n_old + len(pending)
                report.new_node_ids.append(tok)
    report.new_nodes = len(pending)
    n_new = n_old + len(pending)

    def dense(tok):
        return pending[tok] if tok in pending else graph.node_of(tok)

    # Phase 1: the final edge map and the new graph snapshot.
    edge_map = graph.edge_map()
    changes = []    # (u, v, old_label_or_None, new_label)
    for (s_ext, d_ext), label in effective.items():
        u, v = dense(s_ext), dense(d_ext)
        old = edge_map.get((u, v))
        if old == label:
            report.unchanged += 1
            continue
        if old is None:
            report.added += 1
        else:
            report.relabeled += 1
        changes.append((u, v, old, label))
        edge_map[(u, v)] = label

    items = sorted(edge_map.items())
    src = np.array([k[0] for k, _ in items], dtype=np.int64)
    dst = np.array([k[1] for k, _ in items], dtype=np.int64)
    lbl = np.array([lab for _, lab in items], dtype=np.int64)
    external_ids = graph.external_ids + report.new_node_ids
    new_graph = SignedGraph(n_new, src, dst, lbl, alphabet, external_ids)

    # Phase 2: node-level table, one retract/add per changed pair against the
    # evolving out-adjacency of its tail (cost O(out_degree) per edge).
    if counts.strategy == "precomputed":
        table = counts.table
        out_nbrs: dict = {}

        def nbrs_of(u):
            d = out_nbrs.get(u)
            if d is None:
                if u < n_old:
                    heads, labels = graph.out_arrays(u)
                    d = dict(zip(heads.tolist(), labels.tolist()))
                else:
                    d = {}
                out_nbrs[u] = d
            return d

        def pair_ok(h1, h2):
            return counts._allowed(h1) and counts._allowed(h2)

        for u, v, old, label in changes:
            d = nbrs_of(u)
            if old is not None:
                del d[v]
                if pair_ok(v, v):
                    _bump4(table, v, old, v, old, -1)
                for h, lh in d.items():
                    if pair_ok(v, h):
                        _bump4(table, v, old, h, lh, -1)
                    if pair_ok(h, v):
                        _bump4(table, h, lh, v, old, -1)
            if pair_ok(v, v):
                _bump4(table, v, label, v, label, +1)
            for h, lh in d.items():
                if pair_ok(v, h):
                    _bump4(table, v, label, h, lh, +1)
                if pair_ok(h, v):
                    _bump4(table, h, lh, v, label, +1)
            d[v] = label

    # Phase 3a: partition pair counts for changed edges between existing nodes.
    assignment_old = partition.assignment
    for u, v, old, label in changes:
        if u < n_old and v < n_old:
            cu, cv = int(assignment_old[u]), int(assignment_old[v])
            if old is not None:
                partition.add_edge_count(cu, cv, old, -1)
            partition.add_edge_count(cu, cv, label, +1)

    # Phase 3b: place new nodes, in dense-id order, on the objective-greedy
    # cluster; each incident edge is committed exactly once, when its later
    # endpoint is assigned.
    if report.new_nodes:
        partition.extend(report.new_nodes)
        incident: dict = {w: [] for w in range(n_old, n_new)}
        for (u, v), label in edge_map.items():
            if u >= n_old:
                incident[u].append((u, v, label))
            if v >= n_old:
                incident[v].append((u, v, label))
        assignment = partition.assignment
        for w in range(n_old, n_new):
            ready = []
            for u, v, label in incident[w]:
                other = v if u == w else u
                if other == w or assignment[other] >= 0:
                    ready.append((u, v, label))
            if not ready:
                best = partition.largest_cluster()
            else:
                deltas = np.empty(partition.K)
                for c in range(partition.K):
                    groups: dict = {}
                    for u, v, label in ready:
                        cu = c if u == w else int(assignment[u])
                        cv = c if v == w else int(assignment[v])
                        vec = groups.get((cu, cv))
                        if vec is None:
                            vec = [0] * L
                            groups[(cu, cv)] = vec
                        vec[label] += 1
                    deltas[c] = partition.delta_add_counts(groups)
                best = int(np.argmin(deltas))
            partition.assign_new(w, best)
            for u, v, label in ready:
                cu = best if u == w else int(assignment[u])
                cv = best if v == w else int(assignment[v])
                partition.add_edge_count(cu, cv, label, +1)

    # Phase 4: cluster-level table, per changed tail: subtract its old
    # incidence pairs, add the new ones under the final assignment.
    assignment = partition.assignment
    changed_tails = sorted({u for u, _, _, _ in changes})
    for u in changed_tails:
        if u < n_old:
            heads, labels = graph.out_arrays(u)
            if heads.size:
                old_d = _incidence_set(heads, labels, assignment)
                cluster_counts._apply_incidences(int(assignment[u]), old_d, -1)
        heads, labels = new_graph.out_arrays(u)
        if heads.size:
            new_d = _incidence_set(heads, labels, assignment)
            cluster_counts._apply_incidences(int(assignment[u]), new_d, +1)

    counts.graph = new_graph
    cluster_counts.graph = new_graph
    partition.graph = new_graph
    return new_graph, report
