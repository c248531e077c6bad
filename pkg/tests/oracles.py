"""Independent reference implementations the tests freeze values against.

Everything here works on plain adjacency structures (dicts of sets,
explicit box coordinates) rather than the library's bitmask rows, so a
disagreement points at a real derivation mismatch, not a shared bug.
"""
from __future__ import annotations

from itertools import product
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

Adj = Dict[int, Set[int]]


def adjacency_of(rel) -> Adj:
    """Plain adjacency view of a relation's rows."""
    return {
        x: {y for y in range(rel.size) if rel.rows[x] >> y & 1}
        for x in range(rel.size)
    }


def floyd_warshall(n: int, adj: Adj) -> Set[Tuple[int, int]]:
    """Transitive closure by the triple loop; pairs need at least one edge."""
    reach = [[y in adj.get(x, set()) for y in range(n)] for x in range(n)]
    for k in range(n):
        for i in range(n):
            if reach[i][k]:
                row_k = reach[k]
                row_i = reach[i]
                for j in range(n):
                    if row_k[j]:
                        row_i[j] = True
    return {(i, j) for i in range(n) for j in range(n) if reach[i][j]}


def compose_adj(n: int, outer: Adj, inner: Adj) -> Adj:
    """Apply inner first, then outer."""
    return {
        x: {z for y in inner.get(x, set()) for z in outer.get(y, set())}
        for x in range(n)
    }


def image_of(adj: Adj, cells: Iterable[int]) -> Set[int]:
    out: Set[int] = set()
    for x in cells:
        out |= adj.get(x, set())
    return out


def star_of(n: int, adj: Adj, cells: Set[int]) -> Set[int]:
    """Cells whose whole image lands inside ``cells``."""
    return {x for x in range(n) if adj.get(x, set()) <= cells}


def star_depth(n: int, adj: Adj, cells: Set[int], depth: int) -> Set[int]:
    acc = star_of(n, adj, cells)
    for _ in range(depth - 1):
        acc = star_of(n, adj, cells | acc)
    return acc


def longest_path_inside(n: int, adj: Adj, region: Set[int], cap: int) -> int:
    """Largest edge count of a path all of whose cells sit in the region,
    truncated at ``cap`` (a cycle makes paths unbounded)."""
    current = set(region)
    steps = 0
    while current and steps < cap:
        current = {
            y for x in current for y in adj.get(x, set()) if y in region
        }
        steps += 1
    return steps if not current else cap


def forward_viable(n: int, adj: Adj, region: Set[int]) -> Set[int]:
    """Cells with an infinite forward path inside the region."""
    keep = set(region)
    while True:
        nxt = {x for x in keep if adj.get(x, set()) & keep}
        if nxt == keep:
            return keep
        keep = nxt


def backward_viable(n: int, adj: Adj, region: Set[int]) -> Set[int]:
    rev: Adj = {x: set() for x in range(n)}
    for x, row in adj.items():
        for y in row:
            rev[y].add(x)
    return forward_viable(n, rev, region)


def scc_partition(n: int, adj: Adj) -> Set[frozenset]:
    """Kosaraju's two-pass algorithm; singletons only when cyclic."""
    order: List[int] = []
    seen = [False] * n
    for root in range(n):
        if seen[root]:
            continue
        stack: List[Tuple[int, Iterable[int]]] = [(root, iter(sorted(adj.get(root, set()))))]
        seen[root] = True
        while stack:
            node, it = stack[-1]
            advanced = False
            for w in it:
                if not seen[w]:
                    seen[w] = True
                    stack.append((w, iter(sorted(adj.get(w, set())))))
                    advanced = True
                    break
            if not advanced:
                order.append(node)
                stack.pop()
    rev: Adj = {x: set() for x in range(n)}
    for x, row in adj.items():
        for y in row:
            rev[y].add(x)
    comp_of = [-1] * n
    comps: List[Set[int]] = []
    for root in reversed(order):
        if comp_of[root] != -1:
            continue
        comp: Set[int] = set()
        frontier = [root]
        comp_of[root] = len(comps)
        while frontier:
            v = frontier.pop()
            comp.add(v)
            for w in rev[v]:
                if comp_of[w] == -1:
                    comp_of[w] = len(comps)
                    frontier.append(w)
        comps.append(comp)
    return {frozenset(c) for c in comps}


def cyclic_classes(n: int, adj: Adj) -> Set[frozenset]:
    """Strongly connected classes that carry a cycle."""
    out = set()
    for comp in scc_partition(n, adj):
        cells = set(comp)
        if len(cells) > 1:
            out.add(frozenset(cells))
        else:
            (x,) = cells
            if x in adj.get(x, set()):
                out.add(frozenset(cells))
    return out


# -- box geometry ----------------------------------------------------------


def boxes_of(space) -> List[Tuple[Tuple[float, ...], Tuple[float, ...]]]:
    return [space.cell_box(c) for c in range(space.cell_count)]


def box_gap(a, b) -> float:
    """Sup-norm distance between two axis boxes; zero when they touch."""
    gap = 0.0
    for (lo_a, hi_a), (lo_b, hi_b) in zip(zip(*a), zip(*b)):
        gap = max(gap, lo_a - hi_b, lo_b - hi_a)
    return max(gap, 0.0)


def center_of(box) -> Tuple[float, ...]:
    lo, hi = box
    return tuple((a + b) / 2 for a, b in zip(lo, hi))


def center_hausdorff(space, left: Set[int], right: Set[int]) -> float:
    """Two-sided center distance with the empty convention diameter + 1."""
    if not left or not right:
        if not left and not right:
            return 0.0
        return space.diameter + 1.0
    boxes = boxes_of(space)

    def directed(src: Set[int], dst: Set[int]) -> float:
        worst = 0.0
        for s in src:
            cs = center_of(boxes[s])
            best = min(
                max(abs(a - b) for a, b in zip(cs, center_of(boxes[t])))
                for t in dst
            )
            worst = max(worst, best)
        return worst

    return max(directed(left, right), directed(right, left))


def touching_neighbors(space, cell: int) -> Set[int]:
    """Cells whose multi-index offset is at most one on every axis."""
    multi = space.multi_index(cell)
    out = set()
    for offsets in product(*[(-1, 0, 1)] * space.dim):
        cand = tuple(m + o for m, o in zip(multi, offsets))
        if all(0 <= c < d for c, d in zip(cand, space.divisions)):
            out.add(space.index_of(cand))
    return out


def closure_set(space, cells: Set[int]) -> Set[int]:
    out = set(cells)
    for c in cells:
        out |= touching_neighbors(space, c)
    return out


def interior_set(space, cells: Set[int]) -> Set[int]:
    everything = set(range(space.cell_count))
    return everything - closure_set(space, everything - cells)


def dilation_adj(space, eps: float) -> Adj:
    """Pairs of cells whose boxes sit within eps; touching at eps zero."""
    boxes = boxes_of(space)
    n = space.cell_count
    out: Adj = {x: set() for x in range(n)}
    for x in range(n):
        for y in range(n):
            if box_gap(boxes[x], boxes[y]) <= eps + 1e-9:
                out[x].add(y)
    return out


# -- index pair brute force ------------------------------------------------


def exit_slice(space, n: int, adj: Adj, p1: Set[int]) -> Set[int]:
    spilled = image_of(adj, p1) - p1
    return p1 & closure_set(space, spilled)


def valid_exit_sets(space, n: int, adj: Adj, p1: Set[int]) -> List[Set[int]]:
    """Every subset of p1 passing the four index pair conditions."""
    restricted = {
        x: {y for y in row if y in p1} if x in p1 else set()
        for x, row in adj.items()
    }
    inner = interior_set(space, p1)
    core = forward_viable(n, restricted, p1) & backward_viable(n, restricted, p1)
    delta = exit_slice(space, n, adj, p1)
    members = sorted(p1)
    out: List[Set[int]] = []
    for mask in range(1 << len(members)):
        p2 = {members[i] for i in range(len(members)) if mask >> i & 1}
        if not image_of(restricted, p2) <= p2:
            continue
        if not core <= inner - p2:
            continue
        if not delta <= p2:
            continue
        out.append(p2)
    return out


# -- perturbation certificates --------------------------------------------


def check_perturbation(
    space, orig, new, region_cells: Set[int], eps: float
) -> Tuple[bool, bool, Optional[int], bool]:
    """Re-derive a perturbation certificate from box arithmetic alone.

    Returns (forward containment, backward containment, annihilation
    steps or None, surjectivity of the new relation).
    """
    boxes = boxes_of(space)
    n = orig.size
    orig_adj = adjacency_of(orig)
    new_adj = adjacency_of(new)

    def contained(small: Adj, big: Adj) -> bool:
        for x in range(n):
            for y in small.get(x, set()):
                if not any(
                    box_gap(boxes[z], boxes[y]) <= eps + 1e-9
                    for z in big.get(x, set())
                ):
                    return False
        return True

    fwd = contained(new_adj, orig_adj)
    bwd = contained(orig_adj, new_adj)

    current = set(region_cells)
    depth: Optional[int] = None
    for k in range(len(region_cells) + 1):
        if not current:
            depth = k
            break
        current = {
            y for x in current for y in new_adj.get(x, set()) if y in region_cells
        }
    covered = set()
    for x in range(n):
        covered |= new_adj.get(x, set())
    return fwd, bwd, depth, covered == set(range(n))


# -- hybrid time domains ---------------------------------------------------


def is_maximal_chain(
    anchors: Sequence[Tuple[int, int]], t_units: int, n_max: int
) -> bool:
    """Is the anchor set a maximal chain of the rectangle lattice?

    Points are (flow steps, jump count) integers; the rectangle is
    [0, t_units] x [0, n_max].  A chain is pairwise comparable; maximal
    means every rectangle point outside it is incomparable to some
    member.
    """
    pts = list(anchors)
    for t, n in pts:
        if not (0 <= t <= t_units and 0 <= n <= n_max):
            return False

    def comparable(a, b) -> bool:
        return (a[0] <= b[0] and a[1] <= b[1]) or (b[0] <= a[0] and b[1] <= a[1])

    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if not comparable(pts[i], pts[j]):
                return False
    members = set(pts)
    for t in range(t_units + 1):
        for n in range(n_max + 1):
            p = (t, n)
            if p in members:
                continue
            if all(comparable(p, q) for q in members):
                return False
    return True
