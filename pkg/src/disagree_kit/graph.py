"""Undirected weighted graphs: representation, I/O, validation, two-step graph.

Nodes are dense 0-based integers after loading; the loader relabels
arbitrary ids and records the mapping in ``node_labels``. Degrees follow
the convention that a self-loop contributes its weight once, which makes
the two-step graph degree-preserving.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Iterator

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, DuplicateEdgeError, ParseError, ResourceError

if TYPE_CHECKING:  # pragma: no cover
    from .spectral import SpectralSummary

#: Largest node count admitted to dense materializations (two-step graph,
#: full eigendecompositions). Beyond this, use the sampling estimators.
DENSE_NODE_CAP = 20_000


class WeightedGraph:
    """Immutable undirected weighted graph in CSR adjacency form.

    ``edge_u/edge_v/edge_w`` hold the canonical undirected edge list with
    ``edge_u <= edge_v``, sorted lexicographically; self-loops appear once.
    ``indptr/indices/weights`` are the per-node sorted neighbor arrays.
    """

    __slots__ = ("n", "edge_u", "edge_v", "edge_w", "indptr", "indices",
                 "weights", "degrees", "d_sum", "w_min", "w_max",
                 "node_labels", "_pi")

    def __init__(self, n, edge_u, edge_v, edge_w, node_labels=None):
        self.n = int(n)
        eu = np.asarray(edge_u, dtype=np.int64)
        ev = np.asarray(edge_v, dtype=np.int64)
        ew = np.asarray(edge_w, dtype=np.float64)
        # canonical form: u <= v, lexicographic order
        swap = eu > ev
        eu, ev = np.where(swap, ev, eu), np.where(swap, eu, ev)
        order = np.lexsort((ev, eu))
        self.edge_u = eu[order]
        self.edge_v = ev[order]
        self.edge_w = ew[order]
        # Symmetrize into CSR rows; loops enter their row once.
        loop = self.edge_u == self.edge_v
        rows = np.concatenate([self.edge_u, self.edge_v[~loop]])
        cols = np.concatenate([self.edge_v, self.edge_u[~loop]])
        vals = np.concatenate([self.edge_w, self.edge_w[~loop]])
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        self.indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.add.at(self.indptr, rows + 1, 1)
        np.cumsum(self.indptr, out=self.indptr)
        self.indices = cols
        self.weights = vals
        self.degrees = np.zeros(self.n, dtype=np.float64)
        np.add.at(self.degrees, rows, vals)
        self.d_sum = float(self.degrees.sum())
        if len(self.edge_w):
            self.w_min = float(self.edge_w.min())
            self.w_max = float(self.edge_w.max())
        else:
            self.w_min = self.w_max = float("nan")
        self.node_labels = (None if node_labels is None
                            else np.asarray(node_labels, dtype=np.int64))
        self._pi = None
        for arr in (self.edge_u, self.edge_v, self.edge_w, self.indptr,
                    self.indices, self.weights, self.degrees):
            arr.setflags(write=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, float]], *,
                   allow_self_loops: bool = False,
                   node_labels=None) -> "WeightedGraph":
        """Build a graph from (u, v, w) triples; rejects duplicates."""
        n = int(n)
        if n < 1:
            raise DomainError("graph needs at least one node")
        us, vs, ws = [], [], []
        for u, v, w in edges:
            u, v, w = int(u), int(v), float(w)
            if not (0 <= u < n and 0 <= v < n):
                raise DomainError(f"edge ({u}, {v}) out of range for n={n}")
            if w <= 0.0 or not np.isfinite(w):
                raise DomainError(f"edge ({u}, {v}) has nonpositive weight {w}")
            if u == v and not allow_self_loops:
                raise DomainError(f"self-loop at node {u} is not allowed here")
            if u > v:
                u, v = v, u
            us.append(u)
            vs.append(v)
            ws.append(w)
        if not us and n > 1:
            raise DomainError("edge list is empty")
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        ws = np.asarray(ws, dtype=np.float64)
        order = np.lexsort((vs, us))
        us, vs, ws = us[order], vs[order], ws[order]
        if len(us) > 1:
            dup = (us[1:] == us[:-1]) & (vs[1:] == vs[:-1])
            if dup.any():
                k = int(np.flatnonzero(dup)[0])
                raise DuplicateEdgeError(
                    f"duplicate undirected edge ({us[k]}, {vs[k]})")
        return cls(n, us, vs, ws, node_labels=node_labels)

    # -- bookkeeping ---------------------------------------------------

    @property
    def m(self) -> int:
        """Number of undirected edges, self-loops counted once."""
        return len(self.edge_u)

    @property
    def has_self_loops(self) -> bool:
        return bool((self.edge_u == self.edge_v).any())

    @property
    def is_unit_weighted(self) -> bool:
        return bool(np.all(self.edge_w == 1.0))

    def stationary(self) -> np.ndarray:
        """Stationary distribution pi_i = d_i / d_sum of the random walk."""
        if self._pi is None:
            if self.n == 1:
                pi = np.ones(1)
            else:
                if self.d_sum <= 0 or (self.degrees <= 0).any():
                    raise DomainError("stationary distribution needs d_i > 0")
                pi = self.degrees / self.d_sum
            pi.setflags(write=False)
            self._pi = pi
        return self._pi

    def neighbors(self, u: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.indptr[u], self.indptr[u + 1]
        return self.indices[lo:hi], self.weights[lo:hi]

    def adjacency_csr(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.weights, self.indices, self.indptr),
                             shape=(self.n, self.n))

    def adjacency_dense(self) -> np.ndarray:
        return self.adjacency_csr().toarray()

    def transition_dense(self) -> np.ndarray:
        return self.adjacency_dense() / self.degrees[:, None]

    def edges(self) -> Iterator[tuple[int, int, float]]:
        for u, v, w in zip(self.edge_u, self.edge_v, self.edge_w):
            yield int(u), int(v), float(w)

    def __repr__(self):
        return f"WeightedGraph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class GraphValidation:
    """Connectivity and bipartiteness report.

    ``lcc_node_map`` maps original node ids onto dense ids of the largest
    connected component; it is None when the graph is connected. Ties on
    component size go to the component containing the smallest node id.
    """

    connected: bool
    bipartite: bool
    component_count: int
    lcc_node_map: dict[int, int] | None


def validate(g: WeightedGraph) -> GraphValidation:
    """BFS 2-coloring: components and bipartiteness in one pass."""
    color = np.full(g.n, -1, dtype=np.int8)
    comp = np.full(g.n, -1, dtype=np.int64)
    bipartite = True
    n_comp = 0
    for start in range(g.n):
        if comp[start] >= 0:
            continue
        comp[start] = n_comp
        color[start] = 0
        frontier = [start]
        while frontier:
            nxt = []
            for u in frontier:
                nbrs, _ = g.neighbors(u)
                for v in nbrs:
                    if v == u:
                        bipartite = False  # self-loop is an odd cycle
                        continue
                    if comp[v] < 0:
                        comp[v] = n_comp
                        color[v] = 1 - color[u]
                        nxt.append(int(v))
                    elif color[v] == color[u]:
                        bipartite = False
            frontier = nxt
        n_comp += 1
    connected = n_comp == 1
    lcc_map = None
    if not connected:
        sizes = np.bincount(comp, minlength=n_comp)
        best = int(np.argmax(sizes))  # first max: smallest min-node-id tie-break
        members = np.flatnonzero(comp == best)
        lcc_map = {int(old): new for new, old in enumerate(members)}
    return GraphValidation(connected=connected, bipartite=bipartite,
                           component_count=n_comp, lcc_node_map=lcc_map)


def restrict_to_lcc(g: WeightedGraph,
                    validation: GraphValidation | None = None) -> WeightedGraph:
    """Relabel onto the largest connected component; identity when connected."""
    if validation is None:
        validation = validate(g)
    if validation.connected:
        return g
    mapping = validation.lcc_node_map
    keep = np.array([u in mapping for u in range(g.n)])
    mask = keep[g.edge_u] & keep[g.edge_v]
    lut = np.full(g.n, -1, dtype=np.int64)
    for old, new in mapping.items():
        lut[old] = new
    labels_src = g.node_labels if g.node_labels is not None else np.arange(g.n)
    members = sorted(mapping, key=mapping.get)
    return WeightedGraph(len(mapping), lut[g.edge_u[mask]],
                         lut[g.edge_v[mask]], g.edge_w[mask],
                         node_labels=labels_src[members])


# -- edge-list I/O -----------------------------------------------------

def load_bundled(name: str) -> WeightedGraph:
    """Load one of the packaged fixture graphs ("zachary" or "path5")."""
    from importlib.resources import files

    resource = files("disagree_kit.data") / f"{name}.tsv"
    if not resource.is_file():
        raise DomainError(f"no bundled graph named {name!r}")
    return load_edge_list(io.StringIO(resource.read_text(encoding="utf-8")))


def load_edge_list(source, format: str = "auto", *,
                   allow_self_loops: bool = False) -> WeightedGraph:
    """Parse a whitespace-separated edge list.

    One edge per line as ``u v`` or ``u v w`` with nonnegative integer
    ids and positive weights; ``#`` lines are comments. Node ids are
    relabeled to dense 0-based integers (mapping kept in
    ``node_labels``). Duplicate undirected edges are rejected.
    """
    if format not in ("auto", "tsv-unweighted", "tsv-weighted"):
        raise DomainError(f"unknown edge-list format {format!r}")
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    elif isinstance(source, bytes):
        lines = io.StringIO(source.decode("utf-8")).readlines()
    else:
        lines = source.readlines()

    raw = []
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if format == "tsv-unweighted" and len(parts) != 2:
            raise ParseError("expected 'u v'", line_no)
        if format == "tsv-weighted" and len(parts) != 3:
            raise ParseError("expected 'u v w'", line_no)
        if len(parts) not in (2, 3):
            raise ParseError("expected 'u v' or 'u v w'", line_no)
        try:
            u = int(parts[0])
            v = int(parts[1])
        except ValueError:
            raise ParseError(f"node ids must be integers: {stripped!r}",
                             line_no) from None
        if u < 0 or v < 0:
            raise ParseError("node ids must be nonnegative", line_no)
        if len(parts) == 3:
            try:
                w = float(parts[2])
            except ValueError:
                raise ParseError(f"weight must be a number: {parts[2]!r}",
                                 line_no) from None
            if not np.isfinite(w) or w <= 0.0:
                raise DomainError(
                    f"line {line_no}: weight must be positive, got {w}")
        else:
            w = 1.0
        raw.append((u, v, w))
    if not raw:
        raise DomainError("edge list is empty")

    ids = sorted({u for u, _, _ in raw} | {v for _, v, _ in raw})
    lut = {orig: i for i, orig in enumerate(ids)}
    edges = [(lut[u], lut[v], w) for u, v, w in raw]
    labels = np.asarray(ids, dtype=np.int64)
    if np.array_equal(labels, np.arange(len(ids))):
        labels = None
    return WeightedGraph.from_edges(len(ids), edges,
                                    allow_self_loops=allow_self_loops,
                                    node_labels=labels)


def edge_list_text(g: WeightedGraph) -> str:
    """Canonical serialization: sorted edges, weights omitted when all 1."""
    labels = g.node_labels if g.node_labels is not None else np.arange(g.n)
    out = []
    if g.is_unit_weighted:
        for u, v, _ in g.edges():
            out.append(f"{labels[u]}\t{labels[v]}\n")
    else:
        for u, v, w in g.edges():
            out.append(f"{labels[u]}\t{labels[v]}\t{w!r}\n")
    return "".join(out)


def dump_edge_list(g: WeightedGraph, target) -> None:
    text = edge_list_text(g)
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        target.write(text)


# -- two-step graph ----------------------------------------------------

def two_step_graph(g: WeightedGraph, *,
                   cap: int = DENSE_NODE_CAP) -> WeightedGraph:
    """Graph whose random walk takes two steps of the walk on ``g``.

    The adjacency entry (u, w) is sum_v a_uv * a_vw / d_v, so the
    transition matrix is P^2 and every node keeps its degree from ``g``
    (self-loop weight counted once). Requires a connected non-bipartite
    base graph: for bipartite inputs the two-step walk is reducible.
    """
    if g.n > cap:
        raise ResourceError(
            f"two-step graph materialization capped at {cap} nodes (n={g.n})")
    if g.n == 1:
        raise DomainError("two-step graph needs at least one edge")
    check = validate(g)
    if not check.connected:
        raise DomainError("two-step graph requires a connected base graph")
    if check.bipartite:
        raise DomainError("two-step graph requires a non-bipartite base graph")
    a = g.adjacency_csr()
    two = (a @ sp.diags(1.0 / g.degrees) @ a).tocoo()
    keep = two.row <= two.col
    labels = None if g.node_labels is None else g.node_labels.copy()
    return WeightedGraph(g.n, two.row[keep], two.col[keep], two.data[keep],
                         node_labels=labels)


def partial_mean_hitting_time(g: WeightedGraph, target: int,
                              spectral: "SpectralSummary", *,
                              two_step: bool = False,
                              allow_bipartite_pseudoinverse: bool = False
                              ) -> float:
    """Expected hitting time of ``target`` from a stationary random start.

    Computed spectrally as (1/pi_t) * sum_{k>=2} psi_kt^2 / (1 - lambda_k)
    on ``g`` itself, or with 1 - lambda_k^2 for the two-step graph of
    ``g`` when ``two_step`` is set. The bypass flag additionally drops
    the -1 eigenspace so the two-step variant stays finite on bipartite
    input (pseudoinverse semantics).
    """
    if not (0 <= target < g.n):
        raise DomainError(f"target {target} out of range for n={g.n}")
    if g.n == 1:
        return 0.0
    if spectral.eigenvectors.shape[0] != g.n:
        raise DomainError("spectral summary does not belong to this graph")
    lam = spectral.eigenvalues
    psi_t = spectral.eigenvectors[target, :]
    if allow_bipartite_pseudoinverse:
        if not two_step:
            raise DomainError("the pseudoinverse bypass applies to the "
                              "two-step variant only")
        mask = lam * lam < 1.0 - 1e-9
    else:
        mask = np.ones(g.n, dtype=bool)
        mask[0] = False
    denom = (1.0 - lam[mask] ** 2) if two_step else (1.0 - lam[mask])
    pi_t = g.stationary()[target]
    return float(np.sum(psi_t[mask] ** 2 / denom) / pi_t)
