"""Round-up triples/quadruples: detection, classification, witnesses.

A round-up triple is a set of three same-class vertices such that no vertex
is adjacent to exactly two of them and their common neighbourhood is
nonempty.  A round-up quadruple is a set of four vertices such that every
vertex adjacent to at least two of them is adjacent to at least three, the
common neighbourhood of all four is nonempty, and so is the common
neighbourhood of each three minus that of all four.  Triples are encoded as
quadruples with the last member repeated.

Quadruples are classified into geometric configuration types (I, II, II*,
III, III*, IV, V(t), VI(t)) by passing to the residue of the common
intersection.  On top of that the module provides near-lines, the
graph-only separation predicates used by reconstruction, and the
constructive machinery for producing a common neighbour of two j-spaces
with prescribed brick dimensions (allowed values, avoiding witnesses).

Opposition graphs (weyl family, k = -1, a = -1) have no literal round-up
triples; for those the census evaluates the clauses on the reverse graph
(bipartite complement minus the identity pairs), which matches the simple
non-bipartite complement.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

from .algebra import (
    Subspace,
    canonicalize,
    empty_subspace,
    join,
    meet,
    reduce_against,
)
from .graphs import BipartiteGraph, GraphSpec, _lift_label, as_label
from .polar import BudgetError, PolarSpace, TypeLabel, t_dim


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

VALID_TAGS = ("I", "II", "IIstar", "III", "IIIstar", "IV", "V", "VI", "UNCLASSIFIED")


@dataclass(frozen=True)
class QuadrupleType:
    tag: str
    t: int | None = None

    def __post_init__(self):
        if self.tag not in VALID_TAGS:
            raise ValueError(f"unknown quadruple type tag {self.tag!r}")
        if self.tag == "V" and (self.t is None or self.t < 1):
            raise ValueError("type V needs a parameter t >= 1")
        if self.tag == "VI" and (self.t is None or self.t < 0):
            raise ValueError("type VI needs a parameter t >= 0")
        if self.tag not in ("V", "VI") and self.t is not None:
            raise ValueError(f"type {self.tag} takes no parameter")

    def __str__(self):
        if self.t is not None:
            return f"{self.tag}({self.t})"
        return self.tag


UNCLASSIFIED = QuadrupleType("UNCLASSIFIED")


@dataclass(frozen=True)
class Quadruple:
    """A round-up quadruple of vertex ids (triple when members[2]==members[3])."""

    members: tuple[int, int, int, int]
    subspaces: tuple = ()
    S: Subspace | None = None
    qtype: QuadrupleType = UNCLASSIFIED

    @property
    def is_triple(self) -> bool:
        return self.members[2] == self.members[3]

    @property
    def distinct(self) -> tuple[int, ...]:
        return self.members[:3] if self.is_triple else self.members


@dataclass(frozen=True)
class MutualPosition:
    """Intersection / collinear part / semi-opposite part of a pair of j-spaces.

    ``P1``/``P2`` are fixed complements of S inside the projections, ``Q1``/``Q2``
    complements of the projections inside the members, so that
    J_c = <S, P_c, Q_c> and s + p* + q* + 2 = |j|.
    """

    S: Subspace
    s: int
    P1: Subspace
    P2: Subspace
    p_star: int
    Q1: Subspace
    Q2: Subspace
    q_star: int
    P: Subspace
    proj1: Subspace  # proj of J2 onto J1
    proj2: Subspace


@dataclass(frozen=True)
class AllowedValues:
    x: int
    tuples: tuple[tuple[int, int, int, int], ...]
    k: int
    a: int | None
    b: int | None
    p_star: int
    q_star: int
    s: int

    def __iter__(self):
        return iter(self.tuples)

    def __contains__(self, v):
        return tuple(v) in self.tuples

    def __len__(self):
        return len(self.tuples)


@dataclass(frozen=True)
class WitnessReport:
    witness: Subspace | None
    note: str = ""
    exceptions: tuple = ()

    @property
    def found(self) -> bool:
        return self.witness is not None


class ConstructionError(RuntimeError):
    pass


@dataclass(frozen=True)
class ConstructionReport:
    I: Subspace
    x: int
    values: tuple[int, int, int, int]
    exceptions: tuple = ()
    notes: tuple = ()


# ---------------------------------------------------------------------------
# literal clause evaluation
# ---------------------------------------------------------------------------

def _masks(graph: BipartiteGraph, members, cls: int):
    if cls == 2:
        cols = graph.col_masks()
        return [cols[m] for m in members]
    return [graph.rows[m] for m in members]


def _exempt_mask(graph: BipartiteGraph, members, cls: int) -> int:
    # when both classes carry the same labels, each member has a copy among
    # the vertices of the opposite class; those copies are not outside
    # witnesses for the universal clause
    if graph.c1_labels is graph.c2_labels or graph.c1_labels == graph.c2_labels:
        ex = 0
        for v in members:
            ex |= 1 << v
        return ex
    return 0


def is_roundup_triple(graph: BipartiteGraph, j1: int, j2: int, j3: int, cls: int = 2) -> bool:
    """Literal clause check: nobody adjacent to exactly two, common neighbour exists."""
    if len({j1, j2, j3}) != 3:
        raise ValueError("round-up triples need three distinct vertices")
    m1, m2, m3 = _masks(graph, (j1, j2, j3), cls)
    exactly_two = (m1 & m2 & ~m3) | (m1 & m3 & ~m2) | (m2 & m3 & ~m1)
    return exactly_two == 0 and (m1 & m2 & m3) != 0


def is_roundup_encoded_triple(graph: BipartiteGraph, j1: int, j2: int, j3: int,
                              cls: int = 2) -> bool:
    """The quadruple clauses in the degenerate (repeated-member) limit.

    Copies of the members are exempt from the universal clause (a member
    cannot be adjacent to itself, so it would spuriously count as adjacent
    to exactly two), but remain valid witnesses for the residual clauses.
    """
    if len({j1, j2, j3}) != 3:
        raise ValueError("round-up triples need three distinct vertices")
    m1, m2, m3 = _masks(graph, (j1, j2, j3), cls)
    ex = _exempt_mask(graph, (j1, j2, j3), cls)
    all3 = m1 & m2 & m3
    exactly_two = (m1 & m2 & ~m3) | (m1 & m3 & ~m2) | (m2 & m3 & ~m1)
    if exactly_two & ~ex:
        return False
    if not all3:
        return False
    return bool(m1 & m2 & ~all3) and bool(m1 & m3 & ~all3) and bool(m2 & m3 & ~all3)


def is_roundup_quadruple(graph: BipartiteGraph, j1: int, j2: int, j3: int, j4: int,
                         cls: int = 2) -> bool:
    if len({j1, j2, j3, j4}) != 4:
        raise ValueError("round-up quadruples need four distinct vertices")
    ms = _masks(graph, (j1, j2, j3, j4), cls)
    ex = _exempt_mask(graph, (j1, j2, j3, j4), cls)
    at_least_2 = 0
    for a, b in itertools.combinations(range(4), 2):
        at_least_2 |= ms[a] & ms[b]
    at_least_3 = 0
    for a, b, c in itertools.combinations(range(4), 3):
        at_least_3 |= ms[a] & ms[b] & ms[c]
    if at_least_2 & ~at_least_3 & ~ex:
        return False
    common = ms[0] & ms[1] & ms[2] & ms[3]
    if not common:
        return False
    for a, b, c in itertools.combinations(range(4), 3):
        if not (ms[a] & ms[b] & ms[c]) & ~common:
            return False
    return True


def is_roundup(graph: BipartiteGraph, members, cls: int = 2,
               triple_mode: str | None = None) -> bool:
    """Dispatch on the triple-as-quadruple encoding (members[2] == members[3]).

    Whether a repeated-member tuple uses the standalone triple clauses, the
    degenerate quadruple clauses, or either depends on the graph's census
    regime unless overridden via ``triple_mode``.
    """
    members = tuple(members)
    if triple_mode is None:
        spec = graph.meta.get("spec")
        if spec is not None:
            plan = census_plan(spec)
            triple_mode = plan["triple_mode"]
            if plan["use_reverse"]:
                graph = reverse_graph(graph)
        else:
            triple_mode = "standalone"
    if len(members) == 4 and members[2] != members[3]:
        return is_roundup_quadruple(graph, *members, cls=cls)
    trip = members[:3]
    hit = False
    if triple_mode in ("standalone", "both"):
        hit = is_roundup_triple(graph, *trip, cls=cls)
    if not hit and triple_mode in ("encoded", "both"):
        hit = is_roundup_encoded_triple(graph, *trip, cls=cls)
    return hit


def reverse_graph(graph: BipartiteGraph) -> BipartiteGraph:
    """Bipartite complement minus identity pairs when both classes coincide.

    This is the bipartite rendering of the complement of the simple graph:
    used for clause evaluation on opposition-type graphs.
    """
    comp = graph.complement()
    if graph.c1_labels != graph.c2_labels:
        return comp
    idx = {lab: i for i, lab in enumerate(graph.c1_labels)}
    rows = list(comp.rows)
    for a, lab in enumerate(graph.c1_labels):
        rows[a] &= ~(1 << idx[lab])
    return BipartiteGraph(comp.c1_labels, comp.c2_labels, tuple(rows),
                          {**comp.meta, "reversed": True})


# ---------------------------------------------------------------------------
# census plumbing
# ---------------------------------------------------------------------------

def census_plan(spec: GraphSpec) -> dict:
    """How the round-up census treats a graph of the given spec.

    use_reverse: evaluate clauses on the reverse graph (opposition regime);
    arities:     which arities are enumerated;
    vi_mode:     label hyperbolic-space triples VI(t) rather than II*/III*;
    triple_mode: standalone triple clauses, the degenerate quadruple clauses,
                 or either (the exact family admits triples of both shapes:
                 pairwise-adjacent members only satisfy the degenerate
                 clauses, pairwise non-adjacent members only the standalone
                 ones).
    """
    use_reverse = False
    vi_mode = False
    arities = (3, 4)
    triple_mode = "encoded"
    if spec.family == "atleast":
        arities = (3,)
        triple_mode = "standalone"
    elif spec.family == "exact":
        triple_mode = "both"
    elif spec.family == "weyl" and spec.k == -1:
        if spec.a == -1:
            use_reverse = True
            arities = (3,)
            vi_mode = True
            triple_mode = "standalone"
        elif spec.b == -1:
            arities = (3,)
            vi_mode = True
            triple_mode = "standalone"
    return {"use_reverse": use_reverse, "arities": arities, "vi_mode": vi_mode,
            "triple_mode": triple_mode}


def _census_graph(graph: BipartiteGraph, plan: dict) -> BipartiteGraph:
    return reverse_graph(graph) if plan["use_reverse"] else graph


def _anchor_min_dim(spec: GraphSpec) -> int:
    # every quadruple has a common intersection of dimension >= k; in the
    # opposition regime the (reverse) triples share an intersection of
    # dimension j-1
    if spec.family == "weyl" and spec.k == -1 and spec.a == -1:
        return spec.j.dim - 1
    return max(spec.k, -1)


def enumerate_quadruples(graph: BipartiteGraph, space: PolarSpace,
                         mode: str = "pruned", cls: int = 2,
                         budget: int = 2_000_000) -> list[Quadruple]:
    """Census of all round-up quadruples (triples encoded with members[2]==[3]).

    A censused configuration satisfies the clause checks and is anchored:
    all pairwise intersections coincide and have at least the minimal
    dimension for the regime.  pruned mode buckets pairs by their common
    intersection before running the clauses; brute_tiny checks every
    3-/4-subset independently of the bucketing and is budget gated.
    """
    if mode not in ("pruned", "brute_tiny"):
        raise ValueError(f"unknown mode {mode!r}")
    spec = graph.meta["spec"]
    plan = census_plan(spec)
    g = _census_graph(graph, plan)
    subs = g.c2_labels if cls == 2 else g.c1_labels
    m = len(subs)
    masks = _masks(g, range(m), cls)
    same_labels = g.c1_labels == g.c2_labels
    tmode = plan["triple_mode"]

    def exm(ids):
        if not same_labels:
            return 0
        e = 0
        for i in ids:
            e |= 1 << i
        return e

    found: dict[tuple, tuple] = {}

    def record(ids):
        ids = tuple(sorted(ids))
        if len(ids) == 3:
            key = ids + (ids[2],)
        else:
            key = ids
        found[key] = key

    kmin = _anchor_min_dim(spec)

    def anchored(ids):
        S = meet(subs[ids[0]], subs[ids[1]])
        if S.proj_dim < kmin:
            return False
        for a, b in itertools.combinations(ids, 2):
            if meet(subs[a], subs[b]).rows != S.rows:
                return False
        return True

    if mode == "brute_tiny":
        total = (comb(m, 3) if 3 in plan["arities"] else 0) + (
            comb(m, 4) if 4 in plan["arities"] else 0)
        if total > budget:
            raise BudgetError(f"brute census of {total} subsets exceeds budget {budget}")
        if 3 in plan["arities"]:
            for ids in itertools.combinations(range(m), 3):
                if _triple_ok(masks, ids, exm(ids), tmode) and anchored(ids):
                    record(ids)
        if 4 in plan["arities"]:
            for ids in itertools.combinations(range(m), 4):
                if _quad_ok(masks, ids, exm(ids)) and anchored(ids):
                    record(ids)
    else:
        buckets: dict[tuple, list[tuple[int, int]]] = {}
        pair_meet: dict[tuple[int, int], Subspace] = {}
        for u, v in itertools.combinations(range(m), 2):
            S = meet(subs[u], subs[v])
            if S.proj_dim >= kmin:
                pair_meet[(u, v)] = S
                buckets.setdefault(S.rows, []).append((u, v))
        checked = 0
        for rows_key, pairs in buckets.items():
            verts = sorted({v for p in pairs for v in p})
            pairset = set(pairs)
            adj = {v: 0 for v in verts}
            for u, v in pairs:
                adj[u] |= 1 << v
                adj[v] |= 1 << u
            nv = len(verts)
            for ia in range(nv):
                u = verts[ia]
                for ib in range(ia + 1, nv):
                    v = verts[ib]
                    if not (adj[u] >> v) & 1:
                        continue
                    for ic in range(ib + 1, nv):
                        w = verts[ic]
                        if not ((adj[u] >> w) & 1 and (adj[v] >> w) & 1):
                            continue
                        checked += 1
                        if checked > budget:
                            raise BudgetError("pruned census exceeded budget")
                        if 3 in plan["arities"] and _triple_ok(
                                masks, (u, v, w), exm((u, v, w)), tmode):
                            record((u, v, w))
                        if 4 in plan["arities"]:
                            for idd in range(ic + 1, nv):
                                z = verts[idd]
                                if ((adj[u] >> z) & 1 and (adj[v] >> z) & 1
                                        and (adj[w] >> z) & 1):
                                    if _quad_ok(masks, (u, v, w, z),
                                                exm((u, v, w, z))):
                                        record((u, v, w, z))

    out = []
    for key in sorted(found):
        members = key
        mem_subs = tuple(subs[i] for i in members)
        qt, S = classify_quadruple(space, mem_subs, spec=spec)
        out.append(Quadruple(members, mem_subs, S, qt))
    return out


def _triple_ok(masks, ids, ex=0, mode="standalone"):
    m1, m2, m3 = masks[ids[0]], masks[ids[1]], masks[ids[2]]
    exactly_two = (m1 & m2 & ~m3) | (m1 & m3 & ~m2) | (m2 & m3 & ~m1)
    if mode in ("standalone", "both"):
        if exactly_two == 0 and (m1 & m2 & m3) != 0:
            return True
        if mode == "standalone":
            return False
    if exactly_two & ~ex:
        return False
    all3 = m1 & m2 & m3
    if not all3:
        return False
    return bool(m1 & m2 & ~all3) and bool(m1 & m3 & ~all3) and bool(m2 & m3 & ~all3)


def _quad_ok(masks, ids, ex=0):
    ms = [masks[i] for i in ids]
    at2 = 0
    for a, b in itertools.combinations(range(4), 2):
        at2 |= ms[a] & ms[b]
    at3 = 0
    for a, b, c in itertools.combinations(range(4), 3):
        at3 |= ms[a] & ms[b] & ms[c]
    if at2 & ~at3 & ~ex:
        return False
    common = ms[0] & ms[1] & ms[2] & ms[3]
    if not common:
        return False
    for a, b, c in itertools.combinations(range(4), 3):
        if not (ms[a] & ms[b] & ms[c]) & ~common:
            return False
    return True


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

def _residue(space: PolarSpace, S: Subspace):
    cache = getattr(space, "_roundup_residue_cache", None)
    if cache is None:
        cache = {}
        space._roundup_residue_cache = cache
    key = S.rows
    if key not in cache:
        cache[key] = space.residue(S)
    return cache[key]


def _on_singular_line(space: PolarSpace, pts) -> bool:
    L = pts[0]
    for p in pts[1:]:
        L = join(L, p)
    return L.proj_dim == 1 and space.is_singular(L)


def _pairwise_opposite(space: PolarSpace, subs) -> bool:
    for u, v in itertools.combinations(subs, 2):
        if not space.relative_position(u, v)["opposite"]:
            return False
    return True


def _defines_hyperbolic(space: PolarSpace, subs, expect_dim: int) -> bool:
    """Pairwise opposite subspaces spanning a hyperbolic (expect_dim)-space."""
    if not _pairwise_opposite(space, subs):
        return False
    span = subs[0]
    for u in subs[1:]:
        span = join(span, u)
    if span.proj_dim != expect_dim:
        return False
    if subs[0].proj_dim == 0:
        dp = set(space.double_perp(subs[0], subs[1]))
        if len(dp) < 3:
            return False
        return all(space.point_index(p.rows[0]) in dp for p in subs)
    # every point collinear with two of them must be collinear with all
    perps = [space.point_mask(u, perp=True) for u in subs]
    at2 = 0
    for a, b in itertools.combinations(range(len(subs)), 2):
        at2 |= perps[a] & perps[b]
    allm = perps[0]
    for p in perps[1:]:
        allm &= p
    return (at2 & ~allm) == 0


def _transversal_closed(space: PolarSpace, lines) -> bool:
    """No singular line meets exactly two or three of the given lines."""
    pmasks = [space.point_mask(L) for L in lines]
    for M in space.enumerate_singular(1):
        mm = space.point_mask(M)
        cnt = sum(1 for pm in pmasks if mm & pm)
        if 1 < cnt < len(lines):
            return False
    return True


def _grid_span(space: PolarSpace, L1: Subspace, L2: Subspace) -> bool:
    """Whether two opposite lines span a hyperbolic 3-space (a grid)."""
    span = join(L1, L2)
    count = sum(1 for p in space.enumerate_singular(0) if span.contains_subspace(p))
    return count == (space.q + 1) ** 2


def classify_quadruple(space: PolarSpace, members, spec: GraphSpec | None = None):
    """Classify a quadruple of subspaces; returns (QuadrupleType, S).

    ``members`` are the four subspaces, with the triple convention
    members[2] == members[3].  The predicates are tested in the fixed order
    I, IV, II*/II, III*/III, V(t), VI(t); in the VI regimes (weyl, k = -1
    with a = -1 or b = -1) the II*/III*/V steps are skipped so that
    hyperbolic-space triples come out as VI(t).
    """
    members = tuple(members)
    if len(members) == 3:
        members = members + (members[2],)
    distinct = []
    for msub in members:
        if msub not in distinct:
            distinct.append(msub)
    arity = len(distinct)
    if arity < 3:
        raise ValueError("a quadruple needs at least three distinct members")

    vi_mode = False
    if spec is not None and spec.family == "weyl" and spec.k == -1:
        vi_mode = spec.a == -1 or spec.b == -1

    meets = [meet(u, v) for u, v in itertools.combinations(distinct, 2)]
    S = meets[0]
    if any(mm != S for mm in meets[1:]):
        return UNCLASSIFIED, None
    res, up, down = _residue(space, S)
    Jp = [up(u) for u in distinct]
    s = S.proj_dim
    jdim = distinct[0].proj_dim
    td = jdim - s - 1
    n = space.n

    if td == 0:
        # members are points of the residue
        if _on_singular_line(res, Jp):
            return QuadrupleType("I"), S
        if arity == 4:
            for rest in itertools.combinations(range(4), 3):
                other = next(i for i in range(4) if i not in rest)
                three = [Jp[i] for i in rest]
                if _on_singular_line(res, three) and all(
                    res.relative_position(Jp[other], t)["opposite"] for t in three
                ):
                    return QuadrupleType("IV"), S
        if _pairwise_opposite(res, Jp):
            if not vi_mode:
                if jdim < n - 1:
                    dp = set(res.double_perp(Jp[0], Jp[1]))
                    if len(dp) >= 3 and all(
                        res.point_index(p.rows[0]) in dp for p in Jp
                    ):
                        return QuadrupleType("IIstar"), S
                    return QuadrupleType("II"), S
                return QuadrupleType("II"), S
            if _defines_hyperbolic(res, Jp, 1):
                return QuadrupleType("VI", 0), S
        if vi_mode and arity == 3 and _defines_hyperbolic(res, Jp, 2 * td + 1):
            return QuadrupleType("VI", td), S
        return UNCLASSIFIED, S

    if td == 1 and not vi_mode:
        if _pairwise_opposite(res, Jp) and _transversal_closed(res, Jp):
            if jdim < n - 1 and _grid_span(res, Jp[0], Jp[1]):
                return QuadrupleType("IIIstar"), S
            return QuadrupleType("III"), S

    if not vi_mode:
        vt = _try_type_v(space, res, up, distinct, Jp, S, td, spec)
        if vt is not None:
            return vt, S

    if vi_mode and arity == 3 and td >= 0:
        if _defines_hyperbolic(res, Jp, 2 * td + 1):
            return QuadrupleType("VI", td), S

    return UNCLASSIFIED, S


def _try_type_v(space, res, up, distinct, Jp, S, td, spec):
    if td < 1:
        return None
    if spec is not None and spec.family == "weyl":
        if not 1 <= td <= spec.j.dim - spec.k - 1:
            return None
    # the projections of the members onto each other must all span the same
    # residue point over S, and those points must sit on a residue line
    xs = []
    for d, Jd in enumerate(distinct):
        other = distinct[(d + 1) % len(distinct)]
        U = space.proj(Jd, other)
        SU = join(S, U)
        if SU.proj_dim != S.proj_dim + 1:
            return None
        xs.append(up(SU))
    L = xs[0]
    for x in xs[1:]:
        L = join(L, x)
    if L.proj_dim != 1 or not res.is_singular(L):
        return None
    res2, up2, _ = _residue(res, L)
    Ts = []
    for x, J in zip(xs, Jp):
        lifted = join(L, J)
        if not res.is_singular(lifted) or lifted.proj_dim != J.proj_dim + 1:
            return None
        Ts.append(up2(lifted))
    if any(T.proj_dim != td - 1 for T in Ts):
        return None
    if td == 1:
        if _defines_hyperbolic(res2, Ts, 1):
            return QuadrupleType("V", td)
        return None
    if _defines_hyperbolic(res2, Ts, 2 * td - 1):
        return QuadrupleType("V", td)
    return None


# ---------------------------------------------------------------------------
# (RU1)
# ---------------------------------------------------------------------------

def ru1_holds(space: PolarSpace, members) -> bool:
    """Each point lying in at most one member and collinear with two members
    is collinear with one of the remaining two, for every index permutation."""
    members = tuple(members)
    if len(members) == 3:
        members = members + (members[2],)
    contain = [space.point_mask(m) for m in members]
    perp = [space.point_mask(m, perp=True) for m in members]
    multi = 0
    for a, b in itertools.combinations(range(4), 2):
        if members[a] != members[b]:
            multi |= contain[a] & contain[b]
    for (u, r) in itertools.combinations(range(4), 2):
        if members[u] == members[r]:
            continue
        v, w = (i for i in range(4) if i not in (u, r))
        bad = perp[u] & perp[r] & ~(perp[v] | perp[w]) & ~multi
        if bad:
            return False
    return True


# ---------------------------------------------------------------------------
# near-lines
# ---------------------------------------------------------------------------

def _containing_quadruples(masks, m, j1, j2, arities, same_labels=False,
                           triple_mode="standalone"):
    """All clause-passing 3-/4-sets through a fixed pair, as sorted tuples."""
    def exm(ids):
        if not same_labels:
            return 0
        e = 0
        for i in ids:
            e |= 1 << i
        return e

    out = []
    if 3 in arities:
        for w in range(m):
            if w in (j1, j2):
                continue
            ids = (j1, j2, w)
            if _triple_ok(masks, ids, exm(ids), triple_mode):
                out.append(tuple(sorted(ids)))
    if 4 in arities:
        for w, z in itertools.combinations(range(m), 2):
            if len({j1, j2, w, z}) != 4:
                continue
            ids = (j1, j2, w, z)
            if _quad_ok(masks, ids, exm(ids)):
                out.append(tuple(sorted(ids)))
    return out


def near_line_members(graph: BipartiteGraph, j1: int, j2: int, cls: int = 2,
                      arities=(3, 4)) -> frozenset[int]:
    """Graph-only near-line: union of all quadruples containing the pair."""
    plan = census_plan(graph.meta["spec"]) if "spec" in graph.meta else {
        "use_reverse": False, "arities": arities, "vi_mode": False,
        "triple_mode": "encoded"}
    g = _census_graph(graph, plan)
    m = g.n2 if cls == 2 else g.n1
    masks = _masks(g, range(m), cls)
    same = g.c1_labels == g.c2_labels
    members: set[int] = set()
    for quad in _containing_quadruples(masks, m, j1, j2, plan["arities"],
                                       same, plan["triple_mode"]):
        members.update(quad)
    return frozenset(members)


def near_line(graph: BipartiteGraph, space: PolarSpace, j1: int, j2: int,
              cls: int = 2):
    """Near-line of a pair: (member ids, set of quadruple types).

    Only censused (anchored) quadruples contribute, so the result matches
    ``enumerate_quadruples`` restricted to configurations through the pair.
    """
    spec = graph.meta["spec"]
    plan = census_plan(spec)
    g = _census_graph(graph, plan)
    subs = g.c2_labels if cls == 2 else g.c1_labels
    m = len(subs)
    masks = _masks(g, range(m), cls)
    same = g.c1_labels == g.c2_labels
    kmin = _anchor_min_dim(spec)

    def anchored(ids):
        S = meet(subs[ids[0]], subs[ids[1]])
        if S.proj_dim < kmin:
            return False
        return all(meet(subs[a], subs[b]).rows == S.rows
                   for a, b in itertools.combinations(ids, 2))

    quads = [q for q in _containing_quadruples(
        masks, m, j1, j2, plan["arities"], same, plan["triple_mode"])
        if anchored(q)]
    if not quads:
        raise ValueError("the pair is not contained in any round-up quadruple")
    members: set[int] = set()
    types: set[QuadrupleType] = set()
    for quad in quads:
        members.update(quad)
        mem_subs = tuple(subs[i] for i in quad)
        qt, _ = classify_quadruple(space, mem_subs, spec=spec)
        types.add(qt)
    return frozenset(members), frozenset(types)


# ---------------------------------------------------------------------------
# separation predicates (graph-only)
# ---------------------------------------------------------------------------

class _GraphOnly:
    """Shared graph-only scaffolding: clause masks, gamma-prime adjacency and
    cached near-lines.  Consumes nothing but the abstract graph."""

    def __init__(self, graph: BipartiteGraph, cls: int = 2, arities=None):
        spec = graph.meta.get("spec")
        plan = census_plan(spec) if spec is not None else {
            "use_reverse": False, "arities": (3, 4), "vi_mode": False,
            "triple_mode": "encoded"}
        if arities is not None:
            plan = {**plan, "arities": arities}
        self.plan = plan
        self.g = _census_graph(graph, plan)
        self.cls = cls
        self.m = self.g.n2 if cls == 2 else self.g.n1
        self.masks = _masks(self.g, range(self.m), cls)
        self.same = self.g.c1_labels == self.g.c2_labels
        self.tmode = plan["triple_mode"]
        self._near: dict[tuple[int, int], frozenset[int]] = {}
        self._gp: dict[int, int] = {}

    def _exm(self, ids):
        if not self.same:
            return 0
        e = 0
        for i in ids:
            e |= 1 << i
        return e

    def triple(self, a, b, c):
        ids = (a, b, c)
        return len({a, b, c}) == 3 and _triple_ok(
            self.masks, ids, self._exm(ids), self.tmode)

    def quad(self, a, b, c, d):
        if c == d:
            return self.triple(a, b, c)
        ids = (a, b, c, d)
        return len({a, b, c, d}) == 4 and _quad_ok(self.masks, ids, self._exm(ids))

    def near(self, a, b) -> frozenset[int]:
        key = (min(a, b), max(a, b))
        if key not in self._near:
            members: set[int] = set()
            for quad in _containing_quadruples(self.masks, self.m, a, b,
                                               self.plan["arities"], self.same,
                                               self.tmode):
                members.update(quad)
            self._near[key] = frozenset(members)
        return self._near[key]

    def gp_adjacent(self, a, b) -> bool:
        return a != b and len(self.near(a, b)) > 0

    def gp_neighbours(self, v) -> list[int]:
        if v not in self._gp:
            mask = 0
            for u in range(self.m):
                if u != v and self.gp_adjacent(v, u):
                    mask |= 1 << u
            self._gp[v] = mask
        out, mask = [], self._gp[v]
        while mask:
            low = mask & -mask
            out.append(low.bit_length() - 1)
            mask ^= low
        return out


def prec(graph: BipartiteGraph, line1, line2, cls: int = 2, arities=None,
         ctx: "_GraphOnly | None" = None):
    """(weak, strict) comparison of two near-lines sharing one element.

    weak: some J outside both lines, adjacent to all of line1, such that every
    near-line through J meeting line1 also meets line2; strict: weak and every
    such witness J carries a near-line meeting line2 but not line1.
    """
    L1, L2 = frozenset(line1), frozenset(line2)
    if L1 == L2:
        raise ValueError("the two near-lines must be distinct")
    if len(L1 & L2) != 1:
        raise ValueError("the two near-lines must share exactly one element")
    go = ctx if ctx is not None else _GraphOnly(graph, cls, arities)
    weak = False
    strict = True
    for J in range(go.m):
        if J in L1 or J in L2:
            continue
        if not all(go.gp_adjacent(J, x) for x in L1):
            continue
        ok = True
        bypass = False
        for X in go.gp_neighbours(J):
            NL = go.near(J, X)
            if NL & L1 and not NL & L2:
                ok = False
            if NL & L2 and not NL & L1:
                bypass = True
        if ok:
            weak = True
            if not bypass:
                strict = False
    return weak, weak and strict


def typeIII_witness(graph: BipartiteGraph, J: int, Jstar: int, cls: int = 2,
                    arities=None, ctx=None) -> bool:
    """Whether some near-line through Jstar avoiding J has J adjacent to all
    its members except one or two."""
    go = ctx if ctx is not None else _GraphOnly(graph, cls, arities)
    for X in go.gp_neighbours(Jstar):
        if X == J:
            continue
        NL = go.near(Jstar, X)
        if J in NL:
            continue
        missed = [v for v in NL if not go.gp_adjacent(J, v)]
        if 1 <= len(missed) <= 2:
            return True
    return False


def geqk_pair_witness(graph: BipartiteGraph, j3: int, j4: int, cls: int = 2,
                      ctx=None) -> bool:
    """Detects pairs covered by two triples whose merge fails: there are
    J1, J2 with {J1,J2,j3} and {J1,J2,j4} triples but {J1,j3,j4} not."""
    go = ctx if ctx is not None else _GraphOnly(graph, cls, arities=(3,))
    for a, b in itertools.combinations(range(go.m), 2):
        if {a, b} & {j3, j4}:
            continue
        if go.triple(a, b, j3) and go.triple(a, b, j4) and not go.triple(a, j3, j4):
            return True
    return False


def exactk_4tuple_closure(graph: BipartiteGraph, j1: int, j2: int, cls: int = 2,
                          ctx=None) -> bool:
    """Whether every 4-subset of the near-line of the pair is a quadruple."""
    go = ctx if ctx is not None else _GraphOnly(graph, cls, arities=(4,))
    NL = go.near(j1, j2)
    if not NL:
        raise ValueError("the pair is not contained in any round-up quadruple")
    for four in itertools.combinations(sorted(NL), 4):
        if not go.quad(*four):
            return False
    return True


def Vt_witness(graph: BipartiteGraph, j1: int, j2: int, j3: int, j4: int,
               cls: int = 2, ctx=None) -> bool:
    """Whether some Jstar != j4 makes {j1,j2,j3,Jstar} a quadruple while
    {j1,j2,j4,Jstar} is not."""
    go = ctx if ctx is not None else _GraphOnly(graph, cls)
    for js in range(go.m):
        if js in (j1, j2, j3, j4):
            continue
        if go.quad(j1, j2, j3, js) and not go.quad(j1, j2, j4, js):
            return True
    return False


def VI_distinguisher(graph: BipartiteGraph, j1: int, j2: int, j3: int,
                     cls: int = 2, ctx=None) -> bool:
    """True when no j4 != j3 has {j1,j2,j4} a triple while {j1,j3,j4} is not."""
    go = ctx if ctx is not None else _GraphOnly(graph, cls, arities=(3,))
    for j4 in range(go.m):
        if j4 in (j1, j2, j3):
            continue
        if go.triple(j1, j2, j4) and not go.triple(j1, j3, j4):
            return False
    return True


SEPARATION_PREDICATES = {
    "prec": prec,
    "typeIII_witness": typeIII_witness,
    "geqk_pair_witness": geqk_pair_witness,
    "exactk_4tuple_closure": exactk_4tuple_closure,
    "Vt_witness": Vt_witness,
    "VI_distinguisher": VI_distinguisher,
}


def separation_predicates(graph: BipartiteGraph, space: PolarSpace | None = None):
    """Bundle of the graph-only predicates; the space argument is accepted for
    symmetry with the rest of the module but deliberately unused."""
    return dict(SEPARATION_PREDICATES)


# ---------------------------------------------------------------------------
# mutual position and allowed values
# ---------------------------------------------------------------------------

def _complement_in(field, big: Subspace, small: Subspace) -> Subspace:
    """A complement of ``small`` inside ``big`` (small must lie in big)."""
    rows = []
    for r in big.rows:
        red = reduce_against(field, small.rows, r)
        if red is not None:
            red = reduce_against(field, tuple(rows), red)
            if red is not None:
                rows.append(red)
    return canonicalize(field, big.ambient_dim, rows)


def mutual_position(space: PolarSpace, J1: Subspace, J2: Subspace) -> MutualPosition:
    S = meet(J1, J2)
    proj1 = space.proj(J1, J2)
    proj2 = space.proj(J2, J1)
    f = space.field
    P1 = _complement_in(f, proj1, S)
    P2 = _complement_in(f, proj2, S)
    Q1 = _complement_in(f, J1, proj1)
    Q2 = _complement_in(f, J2, proj2)
    p_star = P1.proj_dim
    q_star = Q1.proj_dim
    assert P2.proj_dim == p_star and Q2.proj_dim == q_star
    assert S.proj_dim + p_star + q_star + 2 == J1.proj_dim
    P = join(proj1, proj2)
    return MutualPosition(S, S.proj_dim, P1, P2, p_star, Q1, Q2, q_star, P,
                          proj1, proj2)


def allowed_values(space: PolarSpace, spec: GraphSpec, J1: Subspace, J2: Subspace,
                   x: int) -> AllowedValues:
    """All brick-dimension tuples (p1,q1,p2,q2) compatible with a common
    neighbour whose intersections with J1, J2 meet their intersection in an
    x-dimensional subspace."""
    mp = mutual_position(space, J1, J2)
    k = spec.k
    s = mp.s
    admissible = {k} if s >= k else set()
    if s >= k >= 0:
        admissible.add(k - 1)
    if s < k and k >= 0:
        admissible.add(s)
    if x not in admissible:
        raise ValueError(f"x={x} is inadmissible for s={s}, k={k}")
    if spec.family == "weyl":
        a, b = spec.a, spec.b
        pmax, qmax = min(a, mp.p_star), min(b, mp.q_star)
    else:
        a = b = None
        pmax, qmax = mp.p_star, mp.q_star
    target = k - x - 1
    singles = [
        (p, q)
        for p in range(-1, pmax + 1)
        for q in range(-1, qmax + 1)
        if p + q + 1 == target
    ]
    tuples = tuple(
        sorted(
            (p1, q1, p2, q2)
            for (p1, q1) in singles
            for (p2, q2) in singles
            if q1 + q2 + 1 <= mp.q_star
        )
    )
    return AllowedValues(x, tuples, k, a, b, mp.p_star, mp.q_star, s)


def _pair_adjacent(space: PolarSpace, spec: GraphSpec, I: Subspace, J: Subspace) -> bool:
    d = meet(I, J).proj_dim
    if spec.family == "atleast":
        return d >= spec.k
    if spec.family == "exact":
        return d == spec.k
    return d == spec.k and _lift_label(space, I, J) == spec.ell


def realized_values(space: PolarSpace, spec: GraphSpec, J1: Subspace, J2: Subspace,
                    x: int, candidates=None):
    """Brute-force set of realized (p1,q1,p2,q2) over the common neighbours
    whose intersection bricks have dimension exactly k and meet S in an
    x-dimensional subspace."""
    mp = mutual_position(space, J1, J2)
    k = spec.k
    out = set()
    if candidates is None:
        candidates = space.subspaces_of_type(spec.i)
    for I in candidates:
        if not (_pair_adjacent(space, spec, I, J1) and _pair_adjacent(space, spec, I, J2)):
            continue
        K1, K2 = meet(I, J1), meet(I, J2)
        if K1.proj_dim != k or K2.proj_dim != k:
            continue
        X1, X2 = meet(K1, mp.S), meet(K2, mp.S)
        if X1 != X2 or X1.proj_dim != x:
            continue
        p1 = meet(K1, mp.proj1).proj_dim - x - 1
        p2 = meet(K2, mp.proj2).proj_dim - x - 1
        q1 = k - x - p1 - 2
        q2 = k - x - p2 - 2
        out.add((p1, q1, p2, q2))
    return out


# ---------------------------------------------------------------------------
# avoiding witnesses
# ---------------------------------------------------------------------------

def _avoid_ok(W: Subspace, fav, allow_point=()):
    hits = []
    for F in fav:
        d = meet(W, F).proj_dim
        if d == -1:
            continue
        if d == 0 and any(F == G for G in allow_point):
            hits.append(F)
            continue
        return None
    return tuple(hits)


def find_opposite_avoiding(space: PolarSpace, j, F=(), Fprime=()) -> WitnessReport:
    """A subspace opposite every member of F that avoids Fprime.

    In a hyperbolic space with j maximal the witness lives in the family
    that can be opposite F, and members of Fprime from the other maximal
    family are met in exactly a point rather than avoided.
    """
    jl = as_label(space, j)
    F = tuple(F)
    Fprime = tuple(Fprime)
    hyp_mss = space.kind == "hyperbolic" and jl.dim == space.n - 1
    if hyp_mss:
        if space.n % 2 == 1:
            tl = TypeLabel("max_double_prime" if jl.tag == "max_prime" else "max_prime",
                           jl.dim)
        else:
            tl = jl
        # generators in the witness's own family can never be avoided: any
        # two of them share at least a point, so they are met in exactly one
        exact_point = tuple(G for G in Fprime
                            if G.proj_dim == space.n - 1
                            and space.type_of(G).tag == tl.tag)
        plain = tuple(G for G in Fprime if G not in exact_point)
    else:
        tl = jl
        exact_point = ()
        plain = Fprime
    for W in space.subspaces_of_type(tl):
        if any(W == Fm for Fm in F):
            continue
        if not all(space.relative_position(W, Fm)["opposite"] for Fm in F):
            continue
        if any(meet(W, G).proj_dim >= 0 for G in plain):
            continue
        if exact_point and not all(meet(W, G).proj_dim == 0 for G in exact_point):
            continue
        note = "hyperbolic maximal family exception" if exact_point else ""
        return WitnessReport(W, note, exact_point)
    return WitnessReport(None, "search exhausted, no witness in this finite space")


def _iter_collinear(space: PolarSpace, U: Subspace, V: Subspace, w: int):
    if w == -1:
        yield empty_subspace(space.q, U.ambient_dim)
        return
    perp = meet(space.perp_subspace(U), space.perp_subspace(V))
    for W in space.enumerate_singular(w):
        if not perp.contains_subspace(W):
            continue
        if meet(W, U).proj_dim >= 0 or meet(W, V).proj_dim >= 0:
            continue
        yield W


def find_collinear_avoiding(space: PolarSpace, U: Subspace, V: Subspace, w: int,
                            Fprime=()) -> WitnessReport:
    """A w-space inside both perps, disjoint from U, V and from Fprime.

    Feasible only for w <= n - |j| - 2; the hyperbolic boundary case may
    force meeting some members of Fprime in a point, which is reported.
    """
    jdim = U.proj_dim
    bound = space.n - jdim - 2
    if w > bound:
        raise ValueError(f"w={w} exceeds the bound n-|j|-2={bound}")
    Fprime = tuple(Fprime)
    best_exc = None
    for W in _iter_collinear(space, U, V, w):
        hits = _avoid_ok(W, Fprime)
        if hits == ():
            return WitnessReport(W)
        if hits is not None and best_exc is None:
            boundary = (space.kind == "hyperbolic"
                        and space.lift(U, V).proj_dim == space.n - 2
                        and w == bound)
            if boundary:
                best_exc = WitnessReport(W, "hyperbolic boundary exception", hits)
    if best_exc is not None:
        return best_exc
    return WitnessReport(None, "search exhausted, no witness in this finite space")


def find_semiopposite_collinear(space: PolarSpace, U: Subspace, V: Subspace, i,
                                Fprime=()) -> WitnessReport:
    """An i-space collinear with U, disjoint from it and semi-opposite V."""
    il = as_label(space, i)
    lift = space.lift(U, V)
    tdim = lift.proj_dim
    if il.dim > tdim - U.proj_dim - 1:
        raise ValueError(
            f"|i|={il.dim} exceeds the bound |t|-|j|-1={tdim - U.proj_dim - 1}")
    Fprime = tuple(Fprime)
    Uperp = space.perp_subspace(U)
    hyp_exc = (space.kind == "hyperbolic" and U.proj_dim < tdim == space.n - 1)
    exc_members = ()
    if hyp_exc:
        other_tag = ("max_double_prime"
                     if space.type_of(lift).tag == "max_prime" else "max_prime")
        exc_members = tuple(G for G in Fprime
                            if G.proj_dim == space.n - 1
                            and space.type_of(G).tag == other_tag
                            and G.contains_subspace(U))
    plain = tuple(G for G in Fprime if G not in exc_members)
    for W in space.subspaces_of_type(il):
        if not Uperp.contains_subspace(W):
            continue
        if meet(W, U).proj_dim >= 0:
            continue
        if not space.relative_position(W, V)["semi_opposite"]:
            continue
        if any(meet(W, G).proj_dim >= 0 for G in plain):
            continue
        if exc_members and not all(meet(W, G).proj_dim == 0 for G in exc_members):
            continue
        note = "hyperbolic maximal family exception" if exc_members else ""
        return WitnessReport(W, note, exc_members)
    return WitnessReport(None, "search exhausted, no witness in this finite space")


# ---------------------------------------------------------------------------
# the three-step construction
# ---------------------------------------------------------------------------

def _subspaces_within(space: PolarSpace, big: Subspace, d: int):
    """All d-dimensional subspaces of a (small) singular subspace."""
    if d == -1:
        return [empty_subspace(space.q, big.ambient_dim)]
    f = space.field
    vecs = [v for v in big.vectors() if any(v)]
    seen = {}
    for combo in itertools.combinations(vecs, d + 1):
        Su = canonicalize(f, big.ambient_dim, combo)
        if Su.proj_dim == d:
            seen[Su.rows] = Su
    return list(seen.values())


def _k_pairs(space, mp, x, k, values, spec_a, spec_b, limit=60):
    """Candidate (K1, K2) brick pairs for the requested x."""
    f = space.field
    out = []
    if x == k:
        for K in _subspaces_within(space, mp.S, k):
            out.append((K, K))
            if len(out) >= limit:
                break
        return out
    if x == k - 1:
        for Kminus in _subspaces_within(space, mp.S, k - 1):
            z1_pool = (mp.P1 if spec_b == -1 else
                       (mp.Q1 if spec_a == -1 else join(mp.P1, mp.Q1)))
            z2_pool = (mp.P2 if spec_b == -1 else
                       (mp.Q2 if spec_a == -1 else join(mp.P2, mp.Q2)))
            for z1 in _subspaces_within(space, z1_pool, 0):
                zp = space.perp_subspace(z1)
                for z2 in _subspaces_within(space, z2_pool, 0):
                    if not zp.contains_subspace(z2):
                        continue
                    K1 = join(Kminus, z1)
                    K2 = join(Kminus, z2)
                    if space.is_singular(join(K1, K2)):
                        out.append((K1, K2))
                        if len(out) >= limit:
                            return out
        return out
    # x == s: both bricks contain S entirely
    p1, q1, p2, q2 = values
    for Pp1 in _subspaces_within(space, mp.P1, p1):
        for Qp1 in _subspaces_within(space, mp.Q1, q1):
            K1 = join(join(mp.S, Pp1), Qp1)
            qperp = space.perp_subspace(Qp1) if q1 >= 0 else None
            for Pp2 in _subspaces_within(space, mp.P2, p2):
                for Qp2 in _subspaces_within(space, mp.Q2, q2):
                    if qperp is not None and q2 >= 0 and not qperp.contains_subspace(Qp2):
                        continue
                    K2 = join(join(mp.S, Pp2), Qp2)
                    if space.is_singular(join(K1, K2)):
                        out.append((K1, K2))
                        if len(out) >= limit:
                            return out
    return out


def construct_adjacent(space: PolarSpace, spec: GraphSpec, J1: Subspace,
                       J2: Subspace, x: int, F=(), values=None,
                       limit: int = 40) -> ConstructionReport:
    """Build a common neighbour of J1 and J2 out of the K/A/B bricks.

    The result lies in N_(x)(J1, J2): it is adjacent to both inputs under the
    spec and its intersections with them meet S in an x-space.  Members of F
    are avoided (intersection of dimension < k) whenever the avoiding
    hypotheses admit it; otherwise the best candidate is returned with the
    failures listed in ``exceptions``.
    """
    av = allowed_values(space, spec, J1, J2, x)
    if values is None:
        pool = list(av.tuples)
    else:
        if tuple(values) not in av:
            raise ConstructionError(f"{values} is not an allowed tuple for x={x}")
        pool = [tuple(values)]
    if not pool:
        raise ConstructionError("no admissible brick dimensions for this pair")
    mp = mutual_position(space, J1, J2)
    k = spec.k
    idim = spec.i.dim
    if spec.family == "weyl":
        a_target, b_target = spec.a, spec.b
    else:
        a_target = b_target = None
    F = tuple(F)
    notes = []
    best = None

    for vals in pool:
        p1, q1, p2, q2 = vals
        if p1 > p2:  # keep the convention p1 <= p2 by swapping the roles
            vals = (p2, q2, p1, q1)
            p1, q1, p2, q2 = vals
            swap = True
        else:
            swap = False
        A1_, A2_ = (J2, J1) if swap else (J1, J2)
        mpo = mutual_position(space, A1_, A2_)
        for K1, K2 in _k_pairs(space, mpo, x, k, vals,
                               a_target if a_target is not None else 0,
                               b_target if b_target is not None else 0,
                               limit=limit):
            Kspan = join(K1, K2)
            base_q1 = max(q1, q2) if x != k else -1
            if a_target is not None:
                a_eff = a_target
            else:
                # without a lift constraint, take the largest collinear part
                # that still leaves room for the semi-opposite bricks
                a_eff = min(space.n - J1.proj_dim - 2, idim - k - 1 - (base_q1 + 1) - 1)
                a_eff = max(a_eff, -1)
            if x == k:
                a_prime = a_eff
            else:
                a_prime = a_eff - max(p1, p2) - 1
            rep = find_collinear_avoiding(space, A1_, A2_, a_prime, Fprime=F) \
                if a_prime >= 0 else WitnessReport(
                    empty_subspace(space.q, J1.ambient_dim))
            if not rep.found:
                notes.append(f"no collinear brick of dimension {a_prime}")
                continue
            Aminus = rep.witness
            if not space.perp_subspace(Kspan).contains_subspace(Aminus):
                alt = None
                for cand in _iter_collinear(space, A1_, A2_, a_prime):
                    if space.perp_subspace(Kspan).contains_subspace(cand) and \
                            _avoid_ok(cand, F) is not None:
                        alt = cand
                        break
                if alt is None:
                    continue
                Aminus = alt
            base_spans = []
            if x == k or p2 == p1:
                base_spans.append(join(Kspan, Aminus))
            else:
                # an extra brick balances the unequal collinear parts
                Jp2_ = join(A2_, Aminus)
                Jp1_ = join(A1_, Aminus)
                cnt = 0
                for C in _iter_semiopposite(space, Jp2_, Jp1_, p2 - p1 - 1):
                    cand = join(join(Kspan, Aminus), C)
                    if space.is_singular(cand):
                        base_spans.append(cand)
                        cnt += 1
                        if cnt >= limit:
                            break
                if not base_spans:
                    notes.append("no balancing brick for unequal collinear parts")
                    continue
            for Istar in base_spans:
                if not space.is_singular(Istar):
                    continue
                b_prime = idim - Istar.proj_dim - 1
                if b_prime < -1:
                    continue
                cands = [Istar] if b_prime == -1 else itertools.islice(
                    _iter_extensions(space, Istar, b_prime), limit)
                for I in cands:
                    if I.proj_dim != idim:
                        continue
                    if not (_pair_adjacent(space, spec, I, J1)
                            and _pair_adjacent(space, spec, I, J2)):
                        continue
                    X1 = meet(meet(I, J1), mp.S)
                    X2 = meet(meet(I, J2), mp.S)
                    if X1 != X2 or X1.proj_dim != x:
                        continue
                    exc = tuple(Fm for Fm in F if meet(I, Fm).proj_dim >= k)
                    report = ConstructionReport(I, x, vals, exc, tuple(notes))
                    if not exc:
                        return report
                    if best is None:
                        best = report
    if best is not None:
        return best
    raise ConstructionError(
        "no brick combination yields an adjacent i-space; " + "; ".join(notes[:4]))


def _iter_semiopposite(space: PolarSpace, U: Subspace, V: Subspace, d: int):
    """Singular d-spaces collinear with U, disjoint from it, semi-opposite V."""
    if d == -1:
        yield empty_subspace(space.q, U.ambient_dim)
        return
    Uperp = space.perp_subspace(U)
    for W in space.enumerate_singular(d):
        if not Uperp.contains_subspace(W):
            continue
        if meet(W, U).proj_dim >= 0:
            continue
        if space.relative_position(W, V)["semi_opposite"]:
            yield W


def _iter_extensions(space: PolarSpace, Istar: Subspace, b_prime: int):
    """Singular supersets of Istar exceeding it by b_prime + 1 dimensions."""
    res, up, down = _residue(space, Istar)
    for W in res.enumerate_singular(b_prime):
        I = down(W)
        if I.proj_dim == Istar.proj_dim + b_prime + 1:
            yield I
