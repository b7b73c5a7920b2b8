"""
Phased weighted graphs and the gauge algebra acting on them.

A PhasedGraph stores every edge once, on its canonical orientation n < m,
with magnitude J >= 0 and phase theta in (-pi, pi]. The Hamiltonian entry
H[n][m] is J * exp(i * theta); traversing the edge m -> n picks up -theta.
"""

from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from chiralwalk.errors import DimensionError, InvalidArgumentError
from chiralwalk.utils.logger import logger

TWO_PI = 2.0 * np.pi

EdgeKey = Tuple[int, int]


def wrap_phase(theta: float) -> float:
    """Reduce a phase into (-pi, pi]; values already in range are returned untouched."""
    theta = float(theta)
    if -np.pi < theta <= np.pi:
        return theta
    return float(np.pi - np.mod(np.pi - theta, TWO_PI))


def canonical_key(n: int, m: int) -> EdgeKey:
    return (n, m) if n < m else (m, n)


class Edge(BaseModel):
    """Single undirected edge stored on its canonical orientation"""

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=0)
    m: int = Field(..., ge=0)
    J: float = Field(1.0, ge=0.0, description="Coupling magnitude")
    theta: float = Field(0.0, description="Phase of H[n][m] in radians")

    @model_validator(mode="before")
    @classmethod
    def canonicalize(cls, data):
        if isinstance(data, dict) and "n" in data and "m" in data:
            data = dict(data)
            if data["n"] == data["m"]:
                raise ValueError(f"Self-loop on site {data['n']} is not allowed")
            theta = data.get("theta", 0.0)
            if data["n"] > data["m"]:
                data["n"], data["m"] = data["m"], data["n"]
                theta = -theta
            data["theta"] = wrap_phase(theta)
        return data

    @property
    def key(self) -> EdgeKey:
        return (self.n, self.m)


class PhasedGraph(BaseModel):
    """Undirected graph with per-edge magnitude and phase; the walk's configuration space"""

    model_config = ConfigDict(frozen=True)

    n_sites: int = Field(..., gt=0)
    edges: Tuple[Edge, ...] = Field(default_factory=tuple)
    marks: Dict[str, int] = Field(
        default_factory=dict,
        description="Named sites, e.g. {'S': 0, 'E': 16}"
    )

    @model_validator(mode="after")
    def check_structure(self):
        seen = set()
        for edge in self.edges:
            if edge.m >= self.n_sites:
                raise ValueError(f"Edge {edge.key} references a site outside [0, {self.n_sites})")
            if edge.key in seen:
                raise ValueError(f"Duplicate edge {edge.key}")
            seen.add(edge.key)
        for name, site in self.marks.items():
            if not 0 <= site < self.n_sites:
                raise ValueError(f"Marked site {name}={site} outside [0, {self.n_sites})")
        return self

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def phases(self) -> np.ndarray:
        return np.array([edge.theta for edge in self.edges], dtype=float)

    def edge_keys(self) -> List[EdgeKey]:
        return [edge.key for edge in self.edges]

    def edge_index(self, n: int, m: int) -> int:
        key = canonical_key(n, m)
        for idx, edge in enumerate(self.edges):
            if edge.key == key:
                return idx
        raise InvalidArgumentError(f"Edge {key} not in graph")

    def has_edge(self, n: int, m: int) -> bool:
        key = canonical_key(n, m)
        return any(edge.key == key for edge in self.edges)

    def oriented_phase(self, u: int, v: int) -> float:
        """Phase picked up by the entry H[u][v] (traversal v -> u in the amplitude, u -> v in loop sums)."""
        edge = self.edges[self.edge_index(u, v)]
        return edge.theta if (u, v) == edge.key else -edge.theta

    def incident_edges(self, site: int) -> List[EdgeKey]:
        return [edge.key for edge in self.edges if site in edge.key]

    def with_phases(self, phases: Dict[EdgeKey, float]) -> "PhasedGraph":
        """
        Copy with the given edges' phases replaced.

        Keys may be given in either orientation; a key (m, n) with m > n sets
        the phase of H[m][n], i.e. stores -value on the canonical edge.
        """
        updates = {}
        for (u, v), value in phases.items():
            key = canonical_key(u, v)
            if not self.has_edge(*key):
                raise InvalidArgumentError(f"Edge {key} not in graph")
            updates[key] = value if (u, v) == key else -value
        edges = tuple(
            Edge(n=e.n, m=e.m, J=e.J, theta=updates.get(e.key, e.theta)) for e in self.edges
        )
        return PhasedGraph(n_sites=self.n_sites, edges=edges, marks=self.marks)

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n_sites))
        for edge in self.edges:
            graph.add_edge(edge.n, edge.m, J=edge.J, theta=edge.theta)
        return graph

    @classmethod
    def from_networkx(cls, graph: nx.Graph, marks: Optional[Dict[str, int]] = None) -> "PhasedGraph":
        """Build from a graph whose nodes are 0..N-1; edges sorted canonically, J/theta attributes optional."""
        n_sites = graph.number_of_nodes()
        if sorted(graph.nodes()) != list(range(n_sites)):
            raise InvalidArgumentError("networkx graph nodes must be labelled 0..N-1")
        edges = []
        for u, v, data in graph.edges(data=True):
            # the theta attribute always refers to the canonical orientation
            n, m = canonical_key(u, v)
            edges.append(Edge(n=n, m=m, J=data.get("J", 1.0), theta=data.get("theta", 0.0)))
        edges.sort(key=lambda e: e.key)
        return cls(n_sites=n_sites, edges=tuple(edges), marks=marks or {})

    def to_json(self) -> str:
        return self.model_dump_json()

    @classmethod
    def from_json(cls, payload: str) -> "PhasedGraph":
        return cls.model_validate_json(payload)


class GaugeTransform(BaseModel):
    """Per-site phases alpha_n of the diagonal unitary |n> -> exp(i alpha_n) |n>"""

    model_config = ConfigDict(frozen=True)

    alphas: Tuple[float, ...]

    @classmethod
    def identity(cls, n_sites: int) -> "GaugeTransform":
        return cls(alphas=(0.0,) * n_sites)

    def inverse(self) -> "GaugeTransform":
        return GaugeTransform(alphas=tuple(-a for a in self.alphas))

    def unitary(self) -> np.ndarray:
        return np.diag(np.exp(1j * np.asarray(self.alphas, dtype=float)))


class LoopBasis(BaseModel):
    """Fundamental cycle basis with the total phase around each oriented cycle"""

    cycles: List[List[EdgeKey]] = Field(default_factory=list)
    sums: List[float] = Field(default_factory=list)


def apply_gauge(g: PhasedGraph, u: GaugeTransform) -> PhasedGraph:
    """Apply H -> U H U^dagger: every canonical edge phase becomes theta_nm + alpha_n - alpha_m."""
    if len(u.alphas) != g.n_sites:
        raise DimensionError(f"Gauge has {len(u.alphas)} phases, graph has {g.n_sites} sites")
    edges = tuple(
        Edge(n=e.n, m=e.m, J=e.J, theta=e.theta + u.alphas[e.n] - u.alphas[e.m])
        for e in g.edges
    )
    return PhasedGraph(n_sites=g.n_sites, edges=edges, marks=g.marks)


def _bfs_forest(g: PhasedGraph) -> Tuple[List[EdgeKey], Dict[int, Optional[int]]]:
    """BFS spanning forest rooted at the lowest site of each component; returns oriented tree edges and parents."""
    graph = g.to_networkx()
    parent: Dict[int, Optional[int]] = {}
    tree_edges: List[EdgeKey] = []
    for root in range(g.n_sites):
        if root in parent:
            continue
        parent[root] = None
        for p, c in nx.bfs_edges(graph, root):
            parent[c] = p
            tree_edges.append((p, c))
    return tree_edges, parent


def eliminate_tree_phases(g: PhasedGraph) -> Tuple[PhasedGraph, GaugeTransform]:
    """
    Gauge every spanning-tree edge to zero phase.

    Works component by component, so disconnected graphs need no special
    handling. The non-tree edges end up carrying the loop sums of their
    fundamental cycles.
    """
    tree_edges, _ = _bfs_forest(g)
    alphas = np.zeros(g.n_sites)
    for p, c in tree_edges:
        # theta'(p->c) = phi(p->c) + alpha_p - alpha_c = 0
        alphas[c] = alphas[p] + g.oriented_phase(p, c)

    gauge = GaugeTransform(alphas=tuple(float(a) for a in alphas))
    reduced = apply_gauge(g, gauge)
    logger.debug(
        f"Eliminated phases on {len(tree_edges)} tree edges; "
        f"{g.n_edges - len(tree_edges)} loop edges remain"
    )
    return reduced, gauge


def _path_to_root(site: int, parent: Dict[int, Optional[int]]) -> List[int]:
    path = [site]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return path


def loop_sums(g: PhasedGraph) -> LoopBasis:
    """Fundamental cycles of a BFS spanning forest and the phase summed around each."""
    tree_edges, parent = _bfs_forest(g)
    tree_keys = {canonical_key(p, c) for p, c in tree_edges}

    cycles: List[List[EdgeKey]] = []
    sums: List[float] = []
    for edge in g.edges:
        if edge.key in tree_keys:
            continue
        u, v = edge.key
        up_u = _path_to_root(u, parent)
        up_v = _path_to_root(v, parent)
        on_u = set(up_u)
        lca = next(site for site in up_v if site in on_u)

        # u -> v, then v up to the common ancestor, then down to u
        cycle = [(u, v)]
        climb = up_v[: up_v.index(lca) + 1]
        cycle.extend(zip(climb[:-1], climb[1:]))
        descend = list(reversed(up_u[: up_u.index(lca) + 1]))
        cycle.extend(zip(descend[:-1], descend[1:]))

        cycles.append(cycle)
        sums.append(wrap_phase(sum(g.oriented_phase(a, b) for a, b in cycle)))

    return LoopBasis(cycles=cycles, sums=sums)


def is_bipartite(g: PhasedGraph) -> Tuple[bool, Optional[List[int]]]:
    """Bipartiteness test; the two-coloring (0/1 per site) is returned when it exists."""
    graph = g.to_networkx()
    if not nx.is_bipartite(graph):
        return False, None
    coloring = nx.bipartite.color(graph)
    return True, [coloring[site] for site in range(g.n_sites)]


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

def generate_cycle(N: int, J: float = 1.0, phi_per_edge: float = 0.0) -> PhasedGraph:
    """
    Regular polygon with H[n][n+1] = J exp(i phi) around the cycle.

    The closing edge (N-1 -> 0) is stored canonically as (0, N-1) with -phi,
    so every oriented step n -> n+1 carries phi and the loop sum is N * phi.
    """
    if N < 3:
        raise InvalidArgumentError(f"A cycle needs at least 3 sites, got {N}")
    edges = [Edge(n=n, m=n + 1, J=J, theta=phi_per_edge) for n in range(N - 1)]
    edges.insert(0, Edge(n=0, m=N - 1, J=J, theta=-phi_per_edge))
    edges.sort(key=lambda e: e.key)
    return PhasedGraph(n_sites=N, edges=tuple(edges))


def generate_path(N: int, J: float = 1.0) -> PhasedGraph:
    if N < 2:
        raise InvalidArgumentError(f"A path needs at least 2 sites, got {N}")
    edges = tuple(Edge(n=n, m=n + 1, J=J) for n in range(N - 1))
    return PhasedGraph(n_sites=N, edges=edges, marks={"S": 0, "E": N - 1})


def generate_triangle_chain(n_triangles: int, theta_control: float = 0.0) -> PhasedGraph:
    """
    Sawtooth chain of corner-sharing triangles.

    Base sites are 0, 2, ..., 2n and apex sites 1, 3, ..., 2n-1; triangle i
    is (2i, 2i+1, 2i+2). The control edge of each triangle is the apex edge
    (2i+1, 2i+2), so the loop 2i -> 2i+2 -> 2i+1 -> 2i carries -theta and
    theta = -pi/2 drives transport from S = 0 towards E = 2n.
    """
    if n_triangles < 1:
        raise InvalidArgumentError(f"Need at least one triangle, got {n_triangles}")
    edges = []
    for i in range(n_triangles):
        base, apex, nxt = 2 * i, 2 * i + 1, 2 * i + 2
        edges.append(Edge(n=base, m=apex))
        edges.append(Edge(n=base, m=nxt))
        edges.append(Edge(n=apex, m=nxt, theta=theta_control))
    n_sites = 2 * n_triangles + 1
    return PhasedGraph(n_sites=n_sites, edges=tuple(edges), marks={"S": 0, "E": n_sites - 1})


def triangle_chain_control_edges(n_triangles: int) -> List[EdgeKey]:
    return [(2 * i + 1, 2 * i + 2) for i in range(n_triangles)]


def generate_watts_strogatz(N: int, k: int, p: float, rng_seed: int, tries: int = 1000) -> PhasedGraph:
    """Connected Watts-Strogatz graph; the whole graph is resampled until connected."""
    if not (N > k >= 2) or k % 2 != 0:
        raise InvalidArgumentError(f"Need N > k >= 2 with k even, got N={N}, k={k}")
    if not 0.0 <= p <= 1.0:
        raise InvalidArgumentError(f"Rewiring probability must lie in [0, 1], got {p}")
    try:
        graph = nx.connected_watts_strogatz_graph(N, k, p, tries=tries, seed=rng_seed)
    except nx.NetworkXError as e:
        raise InvalidArgumentError(f"No connected Watts-Strogatz graph after {tries} tries: {e}") from e
    return PhasedGraph.from_networkx(graph)


def generate_barabasi_albert(N: int, m: int, rng_seed: int) -> PhasedGraph:
    """
    Preferential-attachment graph grown from the complete graph on m nodes.

    Edge count is m*(N-m) + m*(m-1)/2. For m = 1 the seed is the single
    edge K2 (a lone node has no degree to attach to), which gives the same
    N-1 edge count.
    """
    if not N > m >= 1:
        raise InvalidArgumentError(f"Need N > m >= 1, got N={N}, m={m}")
    initial = nx.complete_graph(m) if m >= 2 else None
    graph = nx.barabasi_albert_graph(N, m, seed=rng_seed, initial_graph=initial)
    return PhasedGraph.from_networkx(graph)


def _random_phases(graph: nx.Graph, rng: np.random.Generator, j_range: Sequence[float]) -> nx.Graph:
    for u, v in graph.edges():
        graph.edges[u, v]["J"] = float(rng.uniform(*j_range))
        graph.edges[u, v]["theta"] = float(rng.uniform(-np.pi, np.pi))
    return graph


def random_connected_graph(n: int, p_edge: float, rng_seed: int, j_range=(0.5, 1.5)) -> PhasedGraph:
    """Connected G(n, p) graph with random magnitudes and phases."""
    rng = np.random.default_rng(rng_seed)
    while True:
        graph = nx.gnp_random_graph(n, p_edge, seed=int(rng.integers(2**31)))
        if nx.is_connected(graph):
            break
    return PhasedGraph.from_networkx(_random_phases(graph, rng, j_range))


def random_tree(n: int, rng_seed: int, j_range=(0.5, 1.5)) -> PhasedGraph:
    rng = np.random.default_rng(rng_seed)
    graph = nx.random_labeled_tree(n, seed=int(rng.integers(2**31)))
    return PhasedGraph.from_networkx(_random_phases(graph, rng, j_range))


def random_bipartite_graph(n_left: int, n_right: int, p_edge: float, rng_seed: int, j_range=(0.5, 1.5)) -> PhasedGraph:
    """Connected random bipartite graph; sites 0..n_left-1 form one side."""
    rng = np.random.default_rng(rng_seed)
    while True:
        graph = nx.bipartite.random_graph(n_left, n_right, p_edge, seed=int(rng.integers(2**31)))
        if nx.is_connected(graph):
            break
    graph = nx.Graph(graph)
    for node in graph.nodes:
        graph.nodes[node].clear()
    return PhasedGraph.from_networkx(_random_phases(graph, rng, j_range))
