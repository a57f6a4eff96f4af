"""Coxeter groups of types B_n and D_n as signed permutations, chamber
complexes of polar spaces, and Weyl distances.

Elements of W(B_n) act on {-n,...,-1,1,...,n} with w(-i) = -w(i); W(D_n) is
the index-2 subgroup with an even number of sign changes.  Generators follow
the convention s_i = (i, i+1) for i < n, s_n = sign change in the last slot,
and for D the extra generator s_n' = s_n s_{n-1} s_n.

Chambers of a polar space are maximal flags; in the hyperbolic case the
oriflamme convention replaces the (n-2)-space by the ordered pair of maximal
singular subspaces through it, one per family.  The Weyl distance between
chambers is the ordered product of panel generators along a minimal gallery;
between subspaces it is the minimal-length element over all containing
chamber pairs.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .algebra import Subspace, join, meet
from .polar import PolarSpace, TypeLabel, t_dim, t_empty, t_pair_max

UNSET = 0xFFFF


# ---------------------------------------------------------------------------
# signed permutations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SignedPerm:
    """Automorphism of the n-cross-polytope: img[i-1] is the (signed) image
    of i, and -i maps to -img[i-1].  ctype records which group the element
    is considered in; D elements must have an even number of sign changes."""

    ctype: str
    img: tuple[int, ...]

    def __post_init__(self):
        n = len(self.img)
        if self.ctype not in ("B", "D"):
            raise ValueError(f"coxeter type must be B or D, got {self.ctype!r}")
        if sorted(abs(x) for x in self.img) != list(range(1, n + 1)):
            raise ValueError(f"not a signed permutation: {self.img}")
        if self.ctype == "D" and sum(1 for x in self.img if x < 0) % 2:
            raise ValueError(f"odd number of sign changes in type D: {self.img}")

    @property
    def n(self) -> int:
        return len(self.img)

    def apply(self, x: int) -> int:
        if x > 0:
            return self.img[x - 1]
        return -self.img[-x - 1]

    def __mul__(self, other: "SignedPerm") -> "SignedPerm":
        # (self*other)(x) = self(other(x)); a word s_a s_b is the product
        # s_a * s_b
        if self.n != other.n:
            raise ValueError("size mismatch")
        ctype = self.ctype if self.ctype == other.ctype else "B"
        return SignedPerm(ctype, tuple(self.apply(other.apply(i)) for i in range(1, self.n + 1)))

    def inverse(self) -> "SignedPerm":
        inv = [0] * self.n
        for i, x in enumerate(self.img, start=1):
            if x > 0:
                inv[x - 1] = i
            else:
                inv[-x - 1] = -i
        return SignedPerm(self.ctype, tuple(inv))

    def is_identity(self) -> bool:
        return all(x == i for i, x in enumerate(self.img, start=1))

    @staticmethod
    def identity(ctype: str, n: int) -> "SignedPerm":
        return SignedPerm(ctype, tuple(range(1, n + 1)))


def coxeter_generators(ctype: str, n: int) -> list[SignedPerm]:
    """s_1..s_n for B, s_1..s_{n-1}, s_n' for D."""
    if ctype == "B":
        if n < 2:
            raise ValueError("type B needs n >= 2")
    elif ctype == "D":
        if n < 3:
            raise ValueError("type D needs n >= 3")
    else:
        raise ValueError(f"coxeter type must be B or D, got {ctype!r}")
    gens = []
    for i in range(1, n):
        img = list(range(1, n + 1))
        img[i - 1], img[i] = img[i], img[i - 1]
        gens.append(SignedPerm(ctype, tuple(img)))
    if ctype == "B":
        img = list(range(1, n + 1))
        img[n - 1] = -n
        gens.append(SignedPerm("B", tuple(img)))
    else:
        # s_n' = s_n s_{n-1} s_n: swaps n-1 <-> -n and n <-> -(n-1)
        img = list(range(1, n + 1))
        img[n - 2], img[n - 1] = -n, -(n - 1)
        gens.append(SignedPerm("D", tuple(img)))
    return gens


def coxeter_matrix(ctype: str, n: int) -> list[list[int]]:
    """Orders m_ij of products of the standard generators."""
    m = [[2] * n for _ in range(n)]
    for i in range(n):
        m[i][i] = 1
    if ctype == "B":
        for i in range(n - 1):
            m[i][i + 1] = m[i + 1][i] = 3
        m[n - 2][n - 1] = m[n - 1][n - 2] = 4
    else:
        for i in range(n - 2):
            m[i][i + 1] = m[i + 1][i] = 3
        # the fork: s_n' braids with s_{n-2} and commutes with s_{n-1}
        if n >= 3:
            m[n - 3][n - 1] = m[n - 1][n - 3] = 3
        m[n - 2][n - 1] = m[n - 1][n - 2] = 2
    return m


# -- length ------------------------------------------------------------------

def _mirror(w: SignedPerm) -> tuple[int, ...]:
    """Conjugate by the position reversal i <-> n+1-i, so that the classical
    inversion statistics (stated for the sign change in the first slot)
    apply to our generators, whose sign change sits in the last slot."""
    n = w.n
    out = []
    for i in range(1, n + 1):
        x = w.apply(n + 1 - i)
        out.append((n + 1 - abs(x)) * (1 if x > 0 else -1))
    return tuple(out)


def _stat_length(w: SignedPerm) -> int:
    v = _mirror(w)
    n = len(v)
    inv = sum(1 for i in range(n) for j in range(i + 1, n) if v[i] > v[j])
    nsp = sum(1 for i in range(n) for j in range(i + 1, n) if v[i] + v[j] < 0)
    if w.ctype == "D":
        return inv + nsp
    neg = sum(1 for x in v if x < 0)
    return inv + neg + nsp


def length(w: SignedPerm) -> int:
    """Word length over the standard generators, by greedy descent."""
    gens = coxeter_generators(w.ctype, w.n)
    steps = 0
    cur = w
    cur_len = _stat_length(cur)
    while not cur.is_identity():
        for g in gens:
            cand = cur * g
            cl = _stat_length(cand)
            if cl < cur_len:
                cur, cur_len = cand, cl
                break
        else:
            raise AssertionError(f"no descent at non-identity element {cur}")
        steps += 1
    return steps


def right_descents(w: SignedPerm) -> list[int]:
    """0-based generator indices g with length(w*g) < length(w)."""
    lw = _stat_length(w)
    gens = coxeter_generators(w.ctype, w.n)
    return [k for k, g in enumerate(gens) if _stat_length(w * g) < lw]


def left_descents(w: SignedPerm) -> list[int]:
    lw = _stat_length(w)
    gens = coxeter_generators(w.ctype, w.n)
    return [k for k, g in enumerate(gens) if _stat_length(g * w) < lw]


def longest_word(ctype: str, n: int) -> list[int]:
    """Explicit reduced word (0-based generator indices) for w_0."""
    word = []
    if ctype == "B":
        # (s_n...s_1)(s_n...s_2)...(s_n) then (s_{n-1}...s_1)...(s_{n-1})
        for j in range(1, n + 1):
            word.extend(range(n - 1, j - 2, -1))
        for j in range(1, n):
            word.extend(range(n - 2, j - 2, -1))
    else:
        # blocks r = 1..n-1: s_r..s_{n-1}, s_n', s_{n-2}..s_r
        for r in range(1, n):
            word.extend(range(r - 1, n - 1))
            word.append(n - 1)
            word.extend(range(n - 3, r - 2, -1))
    return word


def longest_element(ctype: str, n: int) -> SignedPerm:
    gens = coxeter_generators(ctype, n)
    return reduce(lambda a, b: a * b, (gens[k] for k in longest_word(ctype, n)))


def reduced_word(w: SignedPerm, first: int | None = None, last: int | None = None) -> list[int]:
    """A reduced word for w as 0-based generator indices.  When first/last
    are given the word is forced to start/end with those generators (they
    must be descents on the corresponding side)."""
    gens = coxeter_generators(w.ctype, w.n)
    prefix: list[int] = []
    suffix: list[int] = []
    if first is not None:
        if first not in left_descents(w):
            raise ValueError(f"generator {first} is not a left descent")
        w = gens[first] * w
        prefix.append(first)
        if last is not None and w.is_identity():
            # a single letter is both the first and the last one
            if first == last:
                return prefix
            raise ValueError("length-1 word cannot end with a different generator")
    if last is not None:
        if last not in right_descents(w):
            raise ValueError(f"generator {last} is not a right descent")
        w = w * gens[last]
        suffix.append(last)
    middle: list[int] = []
    while not w.is_identity():
        ds = left_descents(w)
        if not ds:
            raise AssertionError("stuck extracting a reduced word")
        middle.append(ds[0])
        w = gens[ds[0]] * w
    return prefix + middle + suffix


# ---------------------------------------------------------------------------
# Weyl invariant
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeylInvariant:
    t_U: TypeLabel
    t_W: TypeLabel
    t_meet: TypeLabel
    t_lift: TypeLabel

    def as_tuple(self):
        return (self.t_U, self.t_W, self.t_meet, self.t_lift)


def _label(space: PolarSpace, U: Subspace, mode: str) -> TypeLabel:
    if mode == "B" or space.kind != "hyperbolic":
        return t_empty() if U.proj_dim == -1 else t_dim(U.proj_dim)
    return space.type_of(U)


def weyl_invariant(space: PolarSpace, U: Subspace, W: Subspace, mode: str | None = None) -> WeylInvariant:
    if mode is None:
        mode = _mode_for(space, U, W)
    rp = space.relative_position(U, W)
    return WeylInvariant(
        _label(space, U, mode),
        _label(space, W, mode),
        _label(space, rp["meet"], mode),
        _label(space, rp["U_lift_V"], mode),
    )


def _mode_for(space: PolarSpace, U: Subspace, W: Subspace) -> str:
    """Oriflamme chambers unless an input is a next-to-maximal subspace of a
    hyperbolic space, which only lives in the non-thick B_n flag complex."""
    if space.kind != "hyperbolic":
        return "B"
    if U.proj_dim == space.n - 2 or W.proj_dim == space.n - 2:
        return "B"
    return "D"


# ---------------------------------------------------------------------------
# chambers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Chamber:
    """slots[t] is the subspace moved by panel type t.  For B-type complexes
    slot t holds the dimension-t element of a maximal flag; for D-type
    (oriflamme) the first n-2 slots hold dimensions 0..n-3 and the last two
    hold the MSS of family 0 and family 1."""

    ctype: str
    slots: tuple[Subspace, ...]


def make_chamber(space: PolarSpace, subspaces, ctype: str | None = None) -> Chamber:
    n = space.n
    if ctype is None:
        ctype = "D" if space.kind == "hyperbolic" and n >= 3 else "B"
    subs = sorted(subspaces, key=lambda U: U.proj_dim)
    if ctype == "B":
        if [U.proj_dim for U in subs] != list(range(n)):
            raise ValueError("a B-type chamber needs one subspace of each dimension 0..n-1")
        for a, b in zip(subs, subs[1:]):
            if not b.contains_subspace(a):
                raise ValueError("chamber flag is not nested")
        return Chamber("B", tuple(subs))
    if space.kind != "hyperbolic":
        raise ValueError("oriflamme chambers need a hyperbolic space")
    if [U.proj_dim for U in subs] != list(range(n - 2)) + [n - 1, n - 1]:
        raise ValueError("an oriflamme chamber needs dimensions 0..n-3 and two MSS")
    M1, M2 = subs[-2], subs[-1]
    if space.mss_family(M1) == space.mss_family(M2):
        raise ValueError("the two MSS must come from different families")
    if space.mss_family(M1) == 1:
        M1, M2 = M2, M1
    core = meet(M1, M2)
    if core.proj_dim != n - 2:
        raise ValueError("the two MSS must meet in dimension n-2")
    for U in subs[: n - 2]:
        if not core.contains_subspace(U):
            raise ValueError("chain members must lie in both MSS")
        # nesting among the chain
    for a, b in zip(subs[: n - 2], subs[1 : n - 2]):
        if not b.contains_subspace(a):
            raise ValueError("chamber flag is not nested")
    return Chamber("D", tuple(subs[: n - 2]) + (M1, M2))


class ChamberComplex:
    """All chambers of a polar space with panel adjacency, the matching
    Coxeter group, and cached minimal-gallery Weyl distances."""

    def __init__(self, space: PolarSpace, ctype: str | None = None):
        if ctype is None:
            ctype = "D" if space.kind == "hyperbolic" and space.n >= 3 else "B"
        if ctype == "D" and (space.kind != "hyperbolic" or space.n < 3):
            raise ValueError("D-type chambers need a hyperbolic space of rank >= 3")
        self.space = space
        self.ctype = ctype
        self.n = space.n
        self.generators = coxeter_generators(ctype, self.n)
        self._enumerate_chambers()
        self._enumerate_group()
        self._delta: np.ndarray | None = None
        self._lock = threading.Lock()

    # -- enumeration -------------------------------------------------------

    def _enumerate_chambers(self):
        space, n = self.space, self.n
        if self.ctype == "B":
            flags = [(p,) for p in space.enumerate_singular(0)]
            for d in range(1, n):
                flags = [
                    f + (U,)
                    for f in flags
                    for U in space.enumerate_singular(d)
                    if U.contains_subspace(f[-1])
                ]
            self.chambers = [Chamber("B", f) for f in flags]
        else:
            mss = space.enumerate_singular(n - 1)
            fam0 = [M for M in mss if space.mss_family(M) == 0]
            pairs = []
            for M1 in fam0:
                for M2 in mss:
                    if space.mss_family(M2) == 1 and meet(M1, M2).proj_dim == n - 2:
                        pairs.append((M1, M2, meet(M1, M2)))
            chambers = []
            for M1, M2, core in pairs:
                chains: list[tuple] = [()]
                for d in range(n - 2):
                    chains = [
                        c + (U,)
                        for c in chains
                        for U in space.enumerate_singular(d)
                        if core.contains_subspace(U)
                        and (not c or U.contains_subspace(c[-1]))
                    ]
                chambers.extend(Chamber("D", c + (M1, M2)) for c in chains)
            self.chambers = chambers
        self.chambers.sort(key=lambda C: tuple(U.rows for U in C.slots))
        self.chamber_index = {C: i for i, C in enumerate(self.chambers)}
        # panel classes
        self.num_panels = self.n
        self._panel_classes = []
        for t in range(self.num_panels):
            groups: dict[tuple, list[int]] = {}
            for i, C in enumerate(self.chambers):
                key = tuple(U.rows for s, U in enumerate(C.slots) if s != t)
                groups.setdefault(key, []).append(i)
            self._panel_classes.append(groups)

    def _enumerate_group(self):
        gens = self.generators
        ident = SignedPerm.identity(self.ctype, self.n)
        elements = [ident]
        index = {ident: 0}
        lengths = [0]
        frontier = [ident]
        while frontier:
            nxt = []
            for w in frontier:
                for g in gens:
                    wg = w * g
                    if wg not in index:
                        index[wg] = len(elements)
                        elements.append(wg)
                        lengths.append(lengths[index[w]] + 1)
                        nxt.append(wg)
            frontier = nxt
        self.group_elements = elements
        self.group_index = index
        self.group_lengths = np.array(lengths, dtype=np.int16)
        order = len(elements)
        self._dtype = np.uint8 if order < 255 else np.uint16
        mult = np.empty((order, order), dtype=self._dtype)
        for a, wa in enumerate(elements):
            for b, wb in enumerate(elements):
                mult[a, b] = index[wa * wb]
        self.mult_table = mult
        self.gen_indices = [index[g] for g in gens]

    def group_order(self) -> int:
        return len(self.group_elements)

    # -- gallery distances -------------------------------------------------

    def panel_neighbors(self, i: int, t: int) -> list[int]:
        C = self.chambers[i]
        key = tuple(U.rows for s, U in enumerate(C.slots) if s != t)
        return [j for j in self._panel_classes[t][key] if j != i]

    def chamber_delta_bfs(self, i: int, tie_break: str = "panel") -> np.ndarray:
        """Single-source minimal-gallery products, with explicit deterministic
        tie-breaking (smallest panel type, then smallest chamber index)."""
        S = len(self.chambers)
        unset = UNSET
        delta = np.full(S, unset, dtype=np.uint32)
        delta[i] = self.group_index[SignedPerm.identity(self.ctype, self.n)]
        layer = [i]
        seen = {i}
        while layer:
            found: dict[int, tuple[int, int]] = {}
            for c in sorted(layer):
                for t in range(self.num_panels):
                    for nb in self.panel_neighbors(c, t):
                        if nb in seen:
                            continue
                        cand = (t, c)
                        if nb not in found or cand < found[nb]:
                            found[nb] = cand
            for nb, (t, c) in found.items():
                delta[nb] = self.mult_table[delta[c], self.gen_indices[t]]
            seen.update(found)
            layer = list(found)
        return delta

    def delta_matrix(self) -> np.ndarray:
        """All-pairs chamber Weyl distances as group-element indices."""
        with self._lock:
            if self._delta is not None:
                return self._delta
            S = len(self.chambers)
            # partner maps: for each panel type, the cyclic shifts inside
            # each panel class give bijections covering all panel neighbors
            partner_maps = []
            for t in range(self.num_panels):
                classes = list(self._panel_classes[t].values())
                msize = max(len(c) for c in classes)
                for c in classes:
                    assert len(c) == msize or len(c) == min(len(x) for x in classes)
                shifts = []
                for s in range(1, msize):
                    m = np.arange(S, dtype=np.int32)
                    for cls in classes:
                        k = len(cls)
                        for a, src in enumerate(cls):
                            m[src] = cls[(a + s) % k]
                    shifts.append(m)
                partner_maps.append(shifts)

            ident_idx = self.group_index[SignedPerm.identity(self.ctype, self.n)]
            D = np.zeros((S, S), dtype=self._dtype)
            dist = np.full((S, S), 0xFF, dtype=np.uint8)
            np.fill_diagonal(dist, 0)
            D[np.arange(S), np.arange(S)] = ident_idx
            frontier = np.eye(S, dtype=bool)
            layer = 0
            gen_cols = [self.mult_table[:, g] for g in self.gen_indices]
            while frontier.any():
                layer += 1
                new_frontier = np.zeros((S, S), dtype=bool)
                for t in range(self.num_panels):
                    for pm in partner_maps[t]:
                        inv = np.empty(S, dtype=np.int32)
                        inv[pm] = np.arange(S, dtype=np.int32)
                        src = frontier[:, inv]
                        mask = src & (dist == 0xFF)
                        if not mask.any():
                            continue
                        vals = gen_cols[t][D[:, inv]]
                        D[mask] = vals[mask]
                        dist[mask] = layer
                        new_frontier |= mask
                frontier = new_frontier
            self._delta = D
            self._dist = dist
            return D

    def gallery_dist_matrix(self) -> np.ndarray:
        self.delta_matrix()
        return self._dist

    def chamber_weyl_distance(self, C: Chamber, C2: Chamber) -> SignedPerm:
        i = self.chamber_index.get(C)
        j = self.chamber_index.get(C2)
        if i is None or j is None:
            raise ValueError("chamber does not belong to this complex")
        if self._delta is not None:
            return self.group_elements[int(self._delta[i, j])]
        row = self.chamber_delta_bfs(i)
        return self.group_elements[int(row[j])]

    # -- subspace distances ------------------------------------------------

    def chambers_through(self, U: Subspace) -> list[int]:
        d = U.proj_dim
        out = []
        if self.ctype == "D" and d == self.n - 1:
            fam = self.space.mss_family(U)
            slot = self.n - 2 + fam
            for i, C in enumerate(self.chambers):
                if C.slots[slot] == U:
                    out.append(i)
            return out
        for i, C in enumerate(self.chambers):
            if C.slots[d] == U:
                out.append(i)
        return out

    def subspace_weyl_distance(self, U: Subspace, W: Subspace) -> tuple[SignedPerm, WeylInvariant]:
        if not (self.space.is_singular(U) and self.space.is_singular(W)):
            raise ValueError("inputs must be singular subspaces")
        D = self.delta_matrix()
        rows = self.chambers_through(U)
        cols = self.chambers_through(W)
        if not rows or not cols:
            raise ValueError("subspace is not a flag element of this complex")
        sub = D[np.ix_(rows, cols)]
        lens = self.group_lengths[sub]
        m = lens.min()
        winners = np.unique(sub[lens == m])
        assert len(winners) == 1, "minimal double-coset element is not unique"
        w = self.group_elements[int(winners[0])]
        inv = weyl_invariant(self.space, U, W, mode=self.ctype)
        return w, inv


# ---------------------------------------------------------------------------
# per-space cache
# ---------------------------------------------------------------------------

_complex_cache: dict[tuple[int, str], ChamberComplex] = {}
_cache_lock = threading.Lock()


def get_chamber_complex(space: PolarSpace, ctype: str | None = None) -> ChamberComplex:
    if ctype is None:
        ctype = "D" if space.kind == "hyperbolic" and space.n >= 3 else "B"
    key = (id(space), ctype)
    with _cache_lock:
        cc = _complex_cache.get(key)
        if cc is None:
            cc = ChamberComplex(space, ctype)
            _complex_cache[key] = cc
    return cc


def chamber_weyl_distance(space: PolarSpace, C: Chamber, C2: Chamber) -> SignedPerm:
    if C.ctype != C2.ctype:
        raise ValueError("chambers of different complexes")
    return get_chamber_complex(space, C.ctype).chamber_weyl_distance(C, C2)


def subspace_weyl_distance(space: PolarSpace, U: Subspace, W: Subspace) -> tuple[SignedPerm, WeylInvariant]:
    mode = _mode_for(space, U, W)
    return get_chamber_complex(space, mode).subspace_weyl_distance(U, W)


# ---------------------------------------------------------------------------
# invariant characterization (exhaustive verification)
# ---------------------------------------------------------------------------

def incident(space: PolarSpace, U: Subspace, W: Subspace, mode: str = "B") -> bool:
    """Whether U and W lie in a common chamber.  With oriflamme chambers two
    maximal subspaces of different families are incident when they meet in
    dimension n-2; otherwise incidence is containment."""
    if mode == "D" and U.proj_dim == W.proj_dim == space.n - 1:
        if U == W:
            return True
        if space.mss_family(U) != space.mss_family(W):
            return meet(U, W).proj_dim == space.n - 2
        return False
    return U.contains_subspace(W) or W.contains_subspace(U)


def _invariant_pair(space: PolarSpace, U: Subspace, W: Subspace, mode: str):
    """(invariant of (U,W), invariant of (W,U)) from one relative position."""
    rp = space.relative_position(U, W)
    tU = _label(space, U, mode)
    tW = _label(space, W, mode)
    tmeet = _label(space, rp["meet"], mode)
    lift_uw = _label(space, rp["U_lift_V"], mode)
    lift_wu = _label(space, join(W, rp["proj_U_V"]), mode)
    return (
        WeylInvariant(tU, tW, tmeet, lift_uw),
        WeylInvariant(tW, tU, tmeet, lift_wu),
    )


def verify_invariant_characterization(space: PolarSpace) -> dict:
    """Exhaustively check, over every ordered non-flag pair of singular
    subspaces, that the minimal-length Weyl distance and the four-type
    invariant tuple determine each other; flag pairs must yield the
    identity.  Hyperbolic next-to-maximal subspaces are routed through the
    non-thick B-type flag complex, everything else through the default
    complex.  Returns a report dict with an 'ok' flag."""
    n = space.n
    if space.kind == "hyperbolic" and n >= 3:
        jobs = [("D", [d for d in range(n) if d != n - 2], False),
                ("B", list(range(n)), True)]
    else:
        jobs = [("B", list(range(n)), False)]
    report = {"ok": True, "pairs": 0, "flag_pairs": 0, "classes": 0, "violations": []}
    for mode, dims, need_special in jobs:
        cc = get_chamber_complex(space, mode)
        D = cc.delta_matrix()
        lens = cc.group_lengths
        inv_index = {w: i for i, w in enumerate(cc.group_elements)}
        inverse_of = [inv_index[w.inverse()] for w in cc.group_elements]
        subs = [U for d in dims for U in space.enumerate_singular(d)]
        through = [np.array(cc.chambers_through(U), dtype=np.int32) for U in subs]
        delta_by_inv: dict = {}
        inv_by_delta: dict = {}
        for a in range(len(subs)):
            Ua = subs[a]
            rows = D[through[a]]
            for b in range(a, len(subs)):
                Ub = subs[b]
                if need_special and Ua.proj_dim != n - 2 and Ub.proj_dim != n - 2:
                    continue
                sub = rows[:, through[b]]
                sl = lens[sub]
                m = sl.min()
                winners = np.unique(sub[sl == m])
                if len(winners) != 1:
                    report["ok"] = False
                    report["violations"].append(("nonunique", a, b))
                    continue
                widx = int(winners[0])
                is_flag = incident(space, Ua, Ub, mode)
                if is_flag:
                    report["flag_pairs"] += 1
                    if m != 0:
                        report["ok"] = False
                        report["violations"].append(("flag_not_identity", a, b))
                    continue
                report["pairs"] += 2 if a != b else 1
                iv_ab, iv_ba = _invariant_pair(space, Ua, Ub, mode)
                for key, val in (((mode, iv_ab), widx), ((mode, iv_ba), inverse_of[widx])):
                    delta_by_inv.setdefault(key, set()).add(val)
                    inv_by_delta.setdefault((mode, val), set()).add(key[1])
        for key, vals in delta_by_inv.items():
            if len(vals) != 1:
                report["ok"] = False
                report["violations"].append(("invariant_to_many_deltas", key))
        for key, vals in inv_by_delta.items():
            if len(vals) != 1:
                report["ok"] = False
                report["violations"].append(("delta_to_many_invariants", key))
        report["classes"] += len(delta_by_inv)
    return report
