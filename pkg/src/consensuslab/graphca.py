"""Majority dynamics on arbitrary undirected graphs via geodesic shells.

Node values live in numpy uint8 arrays indexed by node id.  A shell rule
weights each node's geodesic shells out to radius R and moves the node to
the weighted-majority value, keeping its own value on an exact tie.
Weights are rationals; internally they are scaled to integers so tie
detection is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

import networkx as nx
import numpy as np

from .analysis import TransitionGraph, transition_graph_from_successors
from .seeding import SeedLike, rng_for

MAX_GRAPH_STG_NODES = 20


@dataclass(frozen=True)
class NodeGraph:
    """Undirected graph on nodes 0..n-1 without self-loops or multi-edges."""

    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph needs at least one node")
        canon = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) references a missing node")
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            canon.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", tuple(sorted(canon)))

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(sorted(a)) for a in adj)

    @property
    def num_edges(self) -> int:
        return len(self.edges)


def ring_graph(n: int) -> NodeGraph:
    if n < 3:
        raise ValueError("a ring needs n >= 3")
    return NodeGraph(n, tuple((i, (i + 1) % n) for i in range(n)))


def complete_graph(n: int) -> NodeGraph:
    return NodeGraph(n, tuple((u, v) for u in range(n) for v in range(u + 1, n)))


def lattice_graph(h: int, w: int) -> NodeGraph:
    """h x w grid with 4-neighbor edges, non-periodic; node id = row*w + col."""
    if h < 1 or w < 1:
        raise ValueError("lattice dimensions must be >= 1")
    edges = []
    for r in range(h):
        for c in range(w):
            if c + 1 < w:
                edges.append((r * w + c, r * w + c + 1))
            if r + 1 < h:
                edges.append((r * w + c, (r + 1) * w + c))
    return NodeGraph(h * w, tuple(edges))


def gnm_graph(n: int, m: int, seed: int) -> NodeGraph:
    """Uniform random graph with n nodes and m edges."""
    g = nx.gnm_random_graph(n, m, seed=seed)
    return NodeGraph(n, tuple(g.edges()))


def regular_graph(degree: int, n: int, seed: int) -> NodeGraph:
    """Random degree-regular graph (degree * n must be even)."""
    g = nx.random_regular_graph(degree, n, seed=seed)
    return NodeGraph(n, tuple(g.edges()))


def geodesic_shells(graph: NodeGraph, node: int, radius: int) -> list[frozenset[int]]:
    """Nodes at graph distance exactly 0..radius from `node`, by BFS.

    Always returns radius+1 sets; shells beyond the reachable part are
    empty.
    """
    if not 0 <= node < graph.n:
        raise ValueError(f"node {node} not in graph of size {graph.n}")
    if radius < 0:
        raise ValueError("radius must be >= 0")
    shells = [frozenset([node])]
    seen = {node}
    frontier = [node]
    for _ in range(radius):
        nxt = []
        for u in frontier:
            for v in graph.neighbors[u]:
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        shells.append(frozenset(nxt))
        frontier = nxt
    return shells


@dataclass(frozen=True)
class ShellRule:
    """Weighted shell majority with the keep-own-value tie policy."""

    radius: int
    weights: tuple[Fraction, ...] = ()

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError("radius must be >= 1")
        weights = self.weights or tuple(Fraction(1) for _ in range(self.radius + 1))
        weights = tuple(Fraction(w) for w in weights)
        if len(weights) != self.radius + 1:
            raise ValueError(f"need {self.radius + 1} weights (shells 0..{self.radius})")
        if any(w < 0 for w in weights):
            raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "weights", weights)

    @property
    def integer_weights(self) -> tuple[int, ...]:
        scale = math.lcm(*(w.denominator for w in self.weights))
        return tuple(int(w * scale) for w in self.weights)


@lru_cache(maxsize=128)
def _ball_index(graph: NodeGraph, rule: ShellRule):
    # Flattened per-node balls for one reduceat pass: member node ids,
    # aligned integer shell weights, segment starts, and per-node weight
    # totals.
    iw = rule.integer_weights
    members: list[int] = []
    weights: list[int] = []
    starts: list[int] = []
    totals = np.zeros(graph.n, dtype=np.int64)
    for u in range(graph.n):
        starts.append(len(members))
        for d, shell in enumerate(geodesic_shells(graph, u, rule.radius)):
            for v in sorted(shell):
                members.append(v)
                weights.append(iw[d])
                totals[u] += iw[d]
    return (np.array(members, dtype=np.int64), np.array(weights, dtype=np.int64),
            np.array(starts, dtype=np.int64), totals)


def as_values(graph: NodeGraph, values) -> np.ndarray:
    vals = np.asarray(values, dtype=np.uint8)
    if vals.shape != (graph.n,):
        raise ValueError(f"need one value per node ({graph.n})")
    if vals.max(initial=0) > 1:
        raise ValueError("node values must be 0 or 1")
    return vals


def step_graph(graph: NodeGraph, values, rule: ShellRule) -> np.ndarray:
    """Simultaneous weighted-shell-majority update of every node."""
    vals = as_values(graph, values)
    members, weights, starts, totals = _ball_index(graph, rule)
    ones = np.add.reduceat(weights * vals[members].astype(np.int64), starts)
    return np.where(2 * ones > totals, 1,
                    np.where(2 * ones < totals, 0, vals)).astype(np.uint8)


def run_graph(graph: NodeGraph, values, rule: ShellRule,
              max_steps: int) -> tuple[np.ndarray, int, str]:
    """Iterate step_graph to a fixed point, a cycle, or the step cap.

    Returns (final values, steps, kind) with kind in {"fixed", "cycle",
    "running"}.
    """
    current = as_values(graph, values)
    seen = {current.tobytes(): 0}
    for step in range(1, max_steps + 1):
        nxt = step_graph(graph, current, rule)
        if np.array_equal(nxt, current):
            return current, step - 1, "fixed"
        key = nxt.tobytes()
        if key in seen:
            return nxt, step, "cycle"
        seen[key] = step
        current = nxt
    return current, max_steps, "running"


def packed_graph_successors(graph: NodeGraph, rule: ShellRule) -> np.ndarray:
    """Successor of every packed value assignment (node i at bit i)."""
    if graph.n > MAX_GRAPH_STG_NODES:
        raise ValueError(f"state enumeration limited to n <= {MAX_GRAPH_STG_NODES}")
    members, weights, starts, totals = _ball_index(graph, rule)
    states = np.arange(1 << graph.n, dtype=np.int64)
    succ = np.zeros(1 << graph.n, dtype=np.int64)
    bounds = list(starts) + [len(members)]
    for u in range(graph.n):
        ones = np.zeros(1 << graph.n, dtype=np.int64)
        for k in range(bounds[u], bounds[u + 1]):
            ones += weights[k] * ((states >> int(members[k])) & 1)
        own = (states >> u) & 1
        bit = np.where(2 * ones > totals[u], 1, np.where(2 * ones < totals[u], 0, own))
        succ |= bit << u
    return succ


def graph_stg(graph: NodeGraph, rule: ShellRule) -> TransitionGraph:
    """Exact transition graph over all 2^n value assignments."""
    return transition_graph_from_successors(packed_graph_successors(graph, rule))


def graph_success_rate(graph: NodeGraph, rule: ShellRule, trials: int, p: float,
                       seed: int, max_steps: int | None = None) -> float:
    """Fraction of trials reaching the uniform state of their initial majority.

    Initial values are drawn independently (probability p of 1) from one
    stream per trial, so two topologies with equal node counts see
    identical initial assignments under the same seed.  Trials whose
    initial values split exactly evenly are excluded from the denominator.
    """
    if max_steps is None:
        max_steps = 10 * graph.n
    successes = 0
    counted = 0
    for t in range(trials):
        rng = rng_for(seed, t)
        values = (rng.random(graph.n) < p).astype(np.uint8)
        ones = int(values.sum())
        if 2 * ones == graph.n:
            continue
        counted += 1
        majority = 1 if 2 * ones > graph.n else 0
        final, _, kind = run_graph(graph, values, rule, max_steps)
        if kind == "fixed" and (final == majority).all():
            successes += 1
    if counted == 0:
        raise ValueError("every trial was an exact tie; nothing to score")
    return successes / counted


def graph_to_dot(graph: NodeGraph, values=None) -> str:
    """Undirected DOT text, optionally shading nodes by value."""
    lines = ["graph g {", "  node [shape=circle];"]
    if values is not None:
        vals = as_values(graph, values)
        for u in range(graph.n):
            fill = "gray75" if vals[u] else "white"
            lines.append(f'  {u} [style=filled fillcolor="{fill}"];')
    for u, v in graph.edges:
        lines.append(f"  {u} -- {v};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def edge_list_text(graph: NodeGraph) -> str:
    """One "u v" pair per line, 0-based."""
    return "".join(f"{u} {v}\n" for u, v in graph.edges)


def parse_edge_list(text: str, n: int | None = None) -> NodeGraph:
    """Inverse of edge_list_text; n defaults to 1 + the largest node id."""
    edges = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"bad edge line: {line!r}")
        edges.append((int(parts[0]), int(parts[1])))
    if n is None:
        n = 1 + max((max(u, v) for u, v in edges), default=-1)
    return NodeGraph(n, tuple(edges))
