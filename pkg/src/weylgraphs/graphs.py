"""Bipartite graphs on singular subspaces of a polar space.

Three families on classes Omega_i x Omega_j:

  weyl     (I,J) adjacent iff dim(I cap J) = k and t(I^J) = ell
  exact    (I,J) adjacent iff dim(I cap J) = k
  atleast  (I,J) adjacent iff dim(I cap J) >= k

plus Grassmann graphs G_t / G'_t on a single class, multipartite incidence
graphs, the trivial/equivalent-case classifier, and the two exceptional
graph isomorphisms (parabolic-in-hyperbolic MSS opposition, and symplectic
point opposition as point/hyperplane opposition of the ambient projective
space).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .algebra import Subspace, canonicalize, join, meet
from .polar import (
    PolarSpace,
    TypeLabel,
    build_polar_space,
    t_dim,
    t_max_double_prime,
    t_max_prime,
    t_pair_max,
)


# ---------------------------------------------------------------------------
# graph containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BipartiteGraph:
    c1_labels: tuple
    c2_labels: tuple
    rows: tuple[int, ...]  # bitmask over C2, one per C1 vertex
    meta: dict = dc_field(default_factory=dict, compare=False)

    def __post_init__(self):
        assert len(self.rows) == len(self.c1_labels)

    @property
    def n1(self) -> int:
        return len(self.c1_labels)

    @property
    def n2(self) -> int:
        return len(self.c2_labels)

    def num_edges(self) -> int:
        return sum(r.bit_count() for r in self.rows)

    def degrees1(self) -> list[int]:
        return [r.bit_count() for r in self.rows]

    def col_masks(self) -> list[int]:
        cached = getattr(self, "_cols", None)
        if cached is not None:
            return cached
        cols = [0] * self.n2
        for a, r in enumerate(self.rows):
            bit = 1 << a
            j = 0
            while r:
                if r & 1:
                    cols[j] |= bit
                r >>= 1
                j += 1
        object.__setattr__(self, "_cols", cols)
        return cols

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for a, r in enumerate(self.rows):
            j = 0
            while r:
                if r & 1:
                    out.append((a, j))
                r >>= 1
                j += 1
        return out

    def complement(self) -> "BipartiteGraph":
        full = (1 << self.n2) - 1
        return BipartiteGraph(
            self.c1_labels, self.c2_labels,
            tuple(full & ~r for r in self.rows),
            {**self.meta, "complemented": True},
        )

    def swapped(self) -> "BipartiteGraph":
        return BipartiteGraph(
            self.c2_labels, self.c1_labels, tuple(self.col_masks()),
            {**self.meta, "swapped": True},
        )

    def is_matching(self) -> bool:
        return all(r.bit_count() <= 1 for r in self.rows) and all(
            c.bit_count() <= 1 for c in self.col_masks()
        )

    def is_perfect_matching(self) -> bool:
        return (
            self.n1 == self.n2
            and all(r.bit_count() == 1 for r in self.rows)
            and all(c.bit_count() == 1 for c in self.col_masks())
        )

    def is_complete(self) -> bool:
        full = (1 << self.n2) - 1
        return all(r == full for r in self.rows)


@dataclass(frozen=True)
class Graph:
    """Plain graph with a symmetric bitmask adjacency."""

    labels: tuple
    rows: tuple[int, ...]
    meta: dict = dc_field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return len(self.labels)

    def num_edges(self) -> int:
        return sum(r.bit_count() for r in self.rows) // 2

    def degree(self, v: int) -> int:
        return self.rows[v].bit_count()

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for a, r in enumerate(self.rows):
            r >>= a + 1
            j = a + 1
            while r:
                if r & 1:
                    out.append((a, j))
                r >>= 1
                j += 1
        return out


# ---------------------------------------------------------------------------
# graph specifications
# ---------------------------------------------------------------------------

FAMILIES = ("weyl", "exact", "atleast")


def as_label(space: PolarSpace, value) -> TypeLabel:
    """Normalize an int or TypeLabel to the space's type conventions."""
    if isinstance(value, TypeLabel):
        if (
            space.kind == "hyperbolic"
            and value.tag == "dim"
            and value.dim == space.n - 1
        ):
            raise ValueError("dimension n-1 in a hyperbolic space needs a family label")
        return value
    d = int(value)
    if space.kind == "hyperbolic":
        if d == space.n - 1:
            raise ValueError("dimension n-1 in a hyperbolic space needs a family label")
        if d == space.n - 2:
            return t_pair_max(space.n)
    return t_dim(d)


@dataclass(frozen=True)
class GraphSpec:
    family: str
    i: TypeLabel
    j: TypeLabel
    k: int
    ell: TypeLabel | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if (self.family == "weyl") != (self.ell is not None):
            raise ValueError("ell is required exactly for the weyl family")
        if self.k < -1:
            raise ValueError("k must be >= -1")

    @property
    def a(self) -> int:
        if self.family != "weyl":
            raise ValueError("a is defined for the weyl family only")
        return self.ell.dim - self.j.dim - 1

    @property
    def b(self) -> int:
        if self.family != "weyl":
            raise ValueError("b is defined for the weyl family only")
        return self.i.dim + self.j.dim - self.k - self.ell.dim - 1

    def describe(self) -> str:
        if self.family == "weyl":
            return f"Gamma[{self.i},{self.j};{self.k},{self.ell}]"
        if self.family == "exact":
            return f"Gamma[{self.i},{self.j};{self.k}]"
        return f"Gamma[{self.i},{self.j};>={self.k}]"


def make_spec(space: PolarSpace, family: str, i, j, k: int, ell=None) -> GraphSpec:
    li, lj = as_label(space, i), as_label(space, j)
    lell = None
    if family == "weyl":
        if ell is None:
            raise ValueError("the weyl family requires ell")
        lell = as_label(space, ell)
        if (
            space.kind == "hyperbolic"
            and lell.dim == space.n - 1
            and not (li.dim == space.n - 1 and lj.dim == space.n - 1)
        ):
            raise ValueError("a family-labelled ell requires |i| = |j| = n-1")
    elif ell is not None:
        raise ValueError(f"the {family} family takes no ell")
    return GraphSpec(family, li, lj, k, lell)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def _lift_label(space: PolarSpace, I: Subspace, J: Subspace) -> TypeLabel:
    lift = join(I, space.proj(J, I))
    if space.kind == "hyperbolic":
        return space.type_of(lift)
    return t_dim(lift.proj_dim)


def build_graph(space: PolarSpace, spec: GraphSpec) -> BipartiteGraph:
    c1 = space.subspaces_of_type(spec.i)
    c2 = space.subspaces_of_type(spec.j)
    rows = []
    for I in c1:
        mask = 0
        for b, J in enumerate(c2):
            d = meet(I, J).proj_dim
            if spec.family == "atleast":
                ok = d >= spec.k
            elif spec.family == "exact":
                ok = d == spec.k
            else:
                ok = d == spec.k and _lift_label(space, I, J) == spec.ell
            if ok:
                mask |= 1 << b
        rows.append(mask)
    return BipartiteGraph(
        tuple(c1), tuple(c2), tuple(rows),
        {"spec": spec, "kind": space.kind, "n": space.n, "q": space.q},
    )


# ---------------------------------------------------------------------------
# classification of parameter tuples
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Classification:
    tag: str  # nontrivial | empty | matching | complete_bipartite | co_matching
    #           | equivalent_to | exceptional_case_1 | exceptional_case_2
    target: GraphSpec | None = None
    complement: bool = False
    note: str = ""


def _same_family(x: TypeLabel, y: TypeLabel) -> bool:
    return x.tag == y.tag


def classify_spec(space: PolarSpace, spec: GraphSpec) -> Classification:
    """Rule-driven classification of trivial and equivalent parameter
    tuples, plus the two exceptional nontrivial cases."""
    n = space.n
    ai, aj, k = spec.i.dim, spec.j.dim, spec.k
    hyp = space.kind == "hyperbolic"

    # basic nonemptiness
    if k > min(ai, aj):
        return Classification("empty")
    if spec.family == "weyl":
        al = spec.ell.dim
        if not (max(ai, aj) <= al <= ai + aj - k):
            return Classification("empty")

    # meeting in dimension n-1 means equality of MSS
    if k == n - 1:
        if ai == aj == n - 1:
            if hyp and not _same_family(spec.i, spec.j):
                return Classification("empty")
            return Classification("matching")
        return Classification("empty")

    if spec.family == "atleast":
        if k == -1:
            return Classification("complete_bipartite")
        if k == ai == aj:
            return Classification("matching")
    else:
        if k == ai == aj:
            # forces I = J (and in the weyl family ell = i = j)
            if hyp and ai == n - 1 and not _same_family(spec.i, spec.j):
                return Classification("empty")
            return Classification("matching")
        if spec.family == "exact" and k + 1 == ai == aj == 0:
            return Classification("co_matching")

    # the two exceptional nontrivial cases
    if spec.family == "weyl" and k == -1:
        if (
            space.kind == "parabolic"
            and ai == aj == n - 1
            and spec.ell.dim == n - 1
        ):
            return Classification("exceptional_case_1")
        if space.kind == "symplectic" and ai == aj == 0 and spec.ell.dim == 0:
            return Classification("exceptional_case_2")

    # MSS classes
    if ai == aj == n - 1:
        if hyp:
            same = _same_family(spec.i, spec.j)
            parity_ok = (n - k) % 2 == (1 if same else 0)
            if spec.family in ("weyl", "exact"):
                if spec.family == "weyl" and spec.ell != spec.i:
                    return Classification("empty", note="requires ell = i")
                if not parity_ok:
                    return Classification("empty", note="family parity")
                if spec.family == "weyl":
                    return Classification(
                        "equivalent_to",
                        GraphSpec("exact", spec.i, spec.j, k),
                        note="ell carries no information for MSS classes",
                    )
                if k <= 0:
                    return Classification(
                        "equivalent_to",
                        GraphSpec("atleast", spec.i, spec.j, k + 2),
                        complement=True,
                        note="bipartite complement of the >=(k+2) graph",
                    )
                return Classification("nontrivial")
            # atleast family: the family parity bounds the intersection
            # dimension from below
            mindim = 0 if (same == (n % 2 == 1)) else -1
            if k <= mindim:
                return Classification("complete_bipartite")
            if not parity_ok:
                return Classification(
                    "equivalent_to",
                    GraphSpec("atleast", spec.i, spec.j, k + 1),
                    note="intersecting in exactly a k-space does not occur",
                )
            return Classification("nontrivial")
        if spec.family == "weyl":
            return Classification(
                "equivalent_to",
                GraphSpec("exact", spec.i, spec.j, k),
                note="ell = n-1 is forced for MSS classes",
            )

    note = ""
    if hyp and n == 4 and spec.family == "weyl":
        quad = (ai, aj, k, spec.ell.dim, spec.ell.tag)
        if quad[:4] == (1, 1, 0, 1):
            note = "triality-equivalent to the (1,1;-1,ell) graphs with |ell|=3"
    return Classification("nontrivial", note=note)


def classify_brute(space: PolarSpace, spec: GraphSpec) -> str:
    """Shape inspection of the actually built graph, used to cross-check the
    rule-driven classifier on small instances."""
    g = build_graph(space, spec)
    if g.num_edges() == 0:
        return "empty"
    if g.is_perfect_matching():
        return "matching"
    if g.is_complete():
        return "complete_bipartite"
    if g.complement().is_perfect_matching():
        return "co_matching"
    return "nontrivial"


# ---------------------------------------------------------------------------
# Grassmann graphs
# ---------------------------------------------------------------------------

def grassmann(space: PolarSpace, t, prime: bool = False) -> Graph:
    """G_t (prime=False): maximal intersection and singular span of the
    right dimension; G'_t (prime=True): maximal intersection only."""
    lt = as_label(space, t) if not isinstance(t, TypeLabel) else t
    verts = space.subspaces_of_type(lt)
    d = lt.dim
    if space.kind == "hyperbolic" and lt.tag in ("max_prime", "max_double_prime"):
        maxint = space.n - 3
    else:
        maxint = d - 1
    liftdim = min(d + 1, space.n - 1)
    rows = [0] * len(verts)
    for a, U in enumerate(verts):
        for b in range(a + 1, len(verts)):
            V = verts[b]
            if meet(U, V).proj_dim != maxint:
                continue
            if not prime:
                lift = join(U, space.proj(V, U))
                if lift.proj_dim != liftdim:
                    continue
            rows[a] |= 1 << b
            rows[b] |= 1 << a
    return Graph(tuple(verts), tuple(rows),
                 {"t": lt, "prime": prime, "kind": space.kind, "n": space.n,
                  "q": space.q})


def incidence_graph(space: PolarSpace, typeset) -> Graph:
    """Multipartite incidence: containment between distinct types, with the
    oriflamme rule (two MSS of different families are incident when meeting
    in an (n-2)-space)."""
    if not typeset:
        raise ValueError("typeset must be nonempty")
    labels = [as_label(space, t) if not isinstance(t, TypeLabel) else t for t in typeset]
    verts: list[tuple[int, Subspace]] = []
    for ci, lt in enumerate(labels):
        verts.extend((ci, U) for U in space.subspaces_of_type(lt))
    rows = [0] * len(verts)
    n = space.n
    for a, (ca, U) in enumerate(verts):
        for b in range(a + 1, len(verts)):
            cb, V = verts[b]
            if ca == cb:
                continue
            la, lb = labels[ca], labels[cb]
            if (
                space.kind == "hyperbolic"
                and la.tag in ("max_prime", "max_double_prime")
                and lb.tag in ("max_prime", "max_double_prime")
            ):
                inc = la.tag != lb.tag and meet(U, V).proj_dim == n - 2
            else:
                inc = U.contains_subspace(V) or V.contains_subspace(U)
            if inc:
                rows[a] |= 1 << b
                rows[b] |= 1 << a
    return Graph(tuple(verts), tuple(rows),
                 {"typeset": tuple(labels), "classes": tuple(
                     sum(1 for ci, _ in verts if ci == t) for t in range(len(labels)))})


# ---------------------------------------------------------------------------
# exceptional isomorphism 1: parabolic MSS opposition inside hyperbolic
# ---------------------------------------------------------------------------

def parabolic_in_hyperbolic_embedding(par: PolarSpace, hyp: PolarSpace):
    """Coordinate inclusion of the standard parabolic rank-n space as a
    hyperplane section of the standard hyperbolic rank-(n+1) space:
    e_{+-i} -> f_{+-i} and the middle coordinate x_0 -> f_{n+1} + f_{-(n+1)}."""
    if par.kind != "parabolic" or hyp.kind != "hyperbolic":
        raise ValueError("expected a parabolic and a hyperbolic space")
    if hyp.n != par.n + 1 or hyp.q != par.q:
        raise ValueError("rank/field mismatch for the embedding")
    n = par.n

    def embed(v):
        # parabolic coords: [e_{-n}..e_{-1}] [x0] [e_1..e_n]
        # hyperbolic coords: [f_{-(n+1)} f_{-n}..f_{-1}] [f_1..f_n f_{n+1}]
        out = [0] * (2 * n + 2)
        out[0] = v[n]            # f_{-(n+1)} = x0
        out[2 * n + 1] = v[n]    # f_{n+1} = x0
        for idx in range(n):     # e_{-n+idx}
            out[1 + idx] = v[idx]
        for idx in range(n):     # e_{idx+1}
            out[n + 1 + idx] = v[n + 1 + idx]
        return tuple(out)

    return embed


def special1_isomorphism(par: PolarSpace, hyp: PolarSpace) -> dict:
    """Explicit isomorphism between the MSS-opposition graph of the
    parabolic space and the one of the surrounding hyperbolic space, through
    the maps sending an MSS to the unique big-space MSS of the prescribed
    family containing it.  Families for the two classes agree exactly when
    n is odd.  Returns a report with the bijections and an 'ok' flag."""
    n = par.n
    embed = parabolic_in_hyperbolic_embedding(par, hyp)
    f = hyp.field
    big_mss = hyp.enumerate_singular(n)
    fam_of = {M: hyp.mss_family(M) for M in big_mss}
    fam1 = 0
    fam2 = 0 if n % 2 == 1 else 1

    par_mss = par.enumerate_singular(n - 1)
    beta: dict[int, list[Subspace]] = {fam1: [], fam2: []}
    for r, fam in ((1, fam1), (2, fam2)):
        images = []
        for X in par_mss:
            emb = canonicalize(f, 2 * n + 2, [embed(row) for row in X.rows])
            containing = [M for M in big_mss
                          if fam_of[M] == fam and M.contains_subspace(emb)]
            if len(containing) != 1:
                return {"ok": False, "error": f"no unique family-{fam} MSS over a class-{r} vertex"}
            images.append(containing[0])
        beta[r] = images

    b1, b2 = beta[1], beta[2]
    ok = len(set(b1)) == len(par_mss) and len(set(b2)) == len(par_mss)
    mism = 0
    for a, I in enumerate(par_mss):
        for b, J in enumerate(par_mss):
            small = meet(I, J).proj_dim == -1
            big = meet(b1[a], b2[b]).proj_dim == -1
            if small != big:
                mism += 1
    return {
        "ok": ok and mism == 0,
        "mismatched_pairs": mism,
        "classes": (len(par_mss), len(par_mss)),
        "families": (fam1, fam2),
        "beta1": b1,
        "beta2": b2,
        "pairs_checked": len(par_mss) ** 2,
    }


# ---------------------------------------------------------------------------
# exceptional isomorphism 2: symplectic point opposition
# ---------------------------------------------------------------------------

def special2_isomorphism(sym: PolarSpace) -> dict:
    """The point-opposition graph of a symplectic space equals the
    point/hyperplane opposition graph of the ambient projective space: the
    second-class map sends x to the hyperplane of points equal to or
    collinear with x."""
    if sym.kind != "symplectic":
        raise ValueError("expected a symplectic space")
    pts = sym.points
    P = len(pts)
    # beta2(x) = x-perp as a hyperplane, i.e. the dual coefficient vector
    from .algebra import normalize_vector

    hyperplanes = [normalize_vector(sym.field, sym.form.dual_vector(v)) for v in pts]
    ok = len(set(hyperplanes)) == P
    mism = 0
    f = sym.field
    for a, p in enumerate(pts):
        for b in range(P):
            opp = not (sym.perp_rows[a] >> b) & 1
            # p notin H iff the hyperplane form does not vanish at p
            h = hyperplanes[b]
            acc = 0
            for c, x in zip(h, p):
                if c and x:
                    acc = f.add(acc, f.mul(c, x))
            not_in_h = acc != 0
            if opp != not_in_h:
                mism += 1
        # x in beta2(x) always
        h = hyperplanes[a]
        acc = 0
        for c, x in zip(h, p):
            if c and x:
                acc = f.add(acc, f.mul(c, x))
        if acc != 0:
            ok = False
    return {
        "ok": ok and mism == 0,
        "mismatched_pairs": mism,
        "classes": (P, P),
        "beta2": hyperplanes,
        "pairs_checked": P * P,
    }
