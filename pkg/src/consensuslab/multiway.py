"""Multiway branching over noise flips and asynchronous updates.

States are packed n-bit integers (cell 0 in the least significant bit).
A multiway graph holds every state reached under all nondeterministic
choices, with edge multiplicities counting how many distinct choices
connect the same pair of states.  Terminal states are states that were
expanded and produced no outgoing edge; states discovered but never
expanded (depth or node budget reached) are pending, not terminal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .rules import Rule1D, as_cells, pack_state
from .stochastic import BlockRule

MAX_MULTIWAY_CELLS = 20
MAX_BLOCK_MULTIWAY_CELLS = 14
DEFAULT_NODE_BUDGET = 10 ** 6


@dataclass
class MultiwayGraph:
    """Branching evolution with merged states and edge multiplicities."""

    n: int
    initial: int
    layer: dict[int, int]
    edges: dict[tuple[int, int], int]
    expanded: frozenset[int]
    pending: frozenset[int]
    truncated: bool

    @property
    def states(self) -> frozenset[int]:
        return frozenset(self.layer)

    @property
    def terminals(self) -> frozenset[int]:
        has_out = {src for src, _ in self.edges}
        return frozenset(s for s in self.expanded if s not in has_out)

    @property
    def confluent(self) -> bool:
        """Whole reachable set explored and exactly one terminal state."""
        return not self.truncated and not self.pending and len(self.terminals) == 1


def _build_multiway(n: int, initial: int, branch, generations: int | None,
                    max_nodes: int) -> MultiwayGraph:
    # branch(state) yields child states, one per nondeterministic choice;
    # repeats accumulate multiplicity.  Breadth-first by layer; iteration
    # order is fixed (sorted frontier) so results never depend on hashing.
    layer = {initial: 0}
    edges: dict[tuple[int, int], int] = {}
    expanded: set[int] = set()
    frontier = [initial]
    truncated = False
    gen = 0
    while frontier and (generations is None or gen < generations):
        nxt: set[int] = set()
        for state in sorted(frontier):
            expanded.add(state)
            for child in branch(state):
                key = (state, child)
                edges[key] = edges.get(key, 0) + 1
                if child not in layer:
                    if len(layer) >= max_nodes:
                        truncated = True
                        continue
                    layer[child] = gen + 1
                    nxt.add(child)
        frontier = list(nxt)
        gen += 1
    pending = frozenset(s for s in layer if s not in expanded)
    return MultiwayGraph(n=n, initial=initial, layer=layer, edges=edges,
                         expanded=frozenset(expanded), pending=pending,
                         truncated=truncated)


def _packed_step_table(rule: Rule1D, n: int):
    from .analysis import packed_successors
    return packed_successors(rule, n)


def _cell_update(state: int, cell: int, rule: Rule1D, n: int) -> int:
    idx = 0
    for o in rule.offsets:
        idx = (idx << 1) | ((state >> ((cell + o) % n)) & 1)
    bit = int(rule.table[idx])
    return (state & ~(1 << cell)) | (bit << cell)


def multiway_noise(rule: Rule1D, initial, generations: int,
                   max_nodes: int = DEFAULT_NODE_BUDGET) -> MultiwayGraph:
    """Branch over all n single-cell noise flips, each followed by one
    synchronous rule step.

    Every expanded state has total outgoing multiplicity n (one per
    flipped cell), with choices that land on the same child merged.
    """
    cells = as_cells(initial)
    n = cells.size
    if n > MAX_MULTIWAY_CELLS:
        raise ValueError(f"multiway expansion limited to n <= {MAX_MULTIWAY_CELLS}")
    succ = _packed_step_table(rule, n)

    def branch(state: int):
        for cell in range(n):
            yield int(succ[state ^ (1 << cell)])

    return _build_multiway(n, pack_state(cells), branch, generations, max_nodes)


def multiway_async_ca(rule: Rule1D, initial, generations: int | None = None,
                      max_nodes: int = DEFAULT_NODE_BUDGET) -> MultiwayGraph:
    """Branch over every single-cell update that changes the state.

    Terminal states are exactly the asynchronous fixed points: states
    where recomputing any cell reproduces its value.
    """
    cells = as_cells(initial)
    n = cells.size
    if n > MAX_MULTIWAY_CELLS:
        raise ValueError(f"multiway expansion limited to n <= {MAX_MULTIWAY_CELLS}")

    def branch(state: int):
        for cell in range(n):
            child = _cell_update(state, cell, rule, n)
            if child != state:
                yield child

    return _build_multiway(n, pack_state(cells), branch, generations, max_nodes)


def multiway_async_block(block_rule: BlockRule, initial,
                         generations: int | None = None,
                         max_nodes: int = DEFAULT_NODE_BUDGET) -> MultiwayGraph:
    """Branch over every line pair position whose block update changes the
    state; run to closure by default."""
    cells = as_cells(initial)
    n = cells.size
    # n == 1 has no pairs: the initial state is the lone terminal.
    if n > MAX_BLOCK_MULTIWAY_CELLS:
        raise ValueError(f"block multiway limited to n <= {MAX_BLOCK_MULTIWAY_CELLS}")

    def branch(state: int):
        for i in range(n - 1):
            a = (state >> i) & 1
            b = (state >> (i + 1)) & 1
            na, nb = block_rule.apply(a, b)
            if (na, nb) != (a, b):
                yield (state & ~(0b11 << i)) | (na << i) | (nb << (i + 1))

    return _build_multiway(n, pack_state(cells), branch, generations, max_nodes)


@dataclass(frozen=True)
class CausalGraph:
    """Dependency DAG among single-cell update events."""

    events: tuple[tuple[int, int], ...]
    edges: tuple[tuple[int, int], ...] = field(default=())

    def in_degree(self, event_index: int) -> int:
        return sum(1 for e, _ in self.edges if e == event_index)


def causal_graph(update_log, offsets, n: int) -> CausalGraph:
    """Causal dependencies of an asynchronous update log.

    Event j depends on event i when i is the most recent earlier event
    writing one of the cells j reads (the cells at `offsets` from j's
    cell, cyclically).  Edges run from each event to its dependencies, so
    they always point strictly backward.
    """
    events = tuple((int(c), int(r)) for c, r in update_log)
    last_writer: dict[int, int] = {}
    edges: list[tuple[int, int]] = []
    for j, (cell, _) in enumerate(events):
        deps = set()
        for o in offsets:
            read = (cell + o) % n
            if read in last_writer:
                deps.add(last_writer[read])
        edges.extend((j, i) for i in sorted(deps))
        last_writer[cell] = j
    return CausalGraph(events=events, edges=tuple(edges))


def _state_label(state: int, n: int) -> str:
    return "".join(str((state >> i) & 1) for i in range(n))


def multiway_to_dot(mw: MultiwayGraph) -> str:
    """DOT digraph; edge penwidth equals multiplicity, terminals doubled."""
    lines = ["digraph multiway {", "  node [shape=box fontname=monospace];"]
    terminals = mw.terminals
    for state in sorted(mw.layer):
        attrs = " [peripheries=2]" if state in terminals else ""
        lines.append(f'  "{_state_label(state, mw.n)}"{attrs};')
    for (src, dst), mult in sorted(mw.edges.items()):
        lines.append(f'  "{_state_label(src, mw.n)}" -> "{_state_label(dst, mw.n)}"'
                     f" [penwidth={mult}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def causal_to_dot(cg: CausalGraph) -> str:
    """DOT digraph of events labeled cell@row, edges to dependencies."""
    lines = ["digraph causal {", "  node [shape=circle];"]
    for j, (cell, row) in enumerate(cg.events):
        lines.append(f'  {j} [label="{cell}@{row}"];')
    for j, i in cg.edges:
        lines.append(f"  {j} -> {i};")
    lines.append("}")
    return "\n".join(lines) + "\n"
