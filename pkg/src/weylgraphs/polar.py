"""Finite classical polar spaces from sesquilinear/quadratic forms.

A space is built over GF(q)^N in a standard basis
e_{-n},...,e_{-1}, (anisotropic part), e_1,...,e_n
with coordinates 0..n-1 for e_{-n}..e_{-1}, then the anisotropic block, then
n+d..N-1 for e_1..e_n.  The five supported kinds:

  symplectic  f(x,x') = sum_i (x_{-i} x'_i - x_i x'_{-i}),   all points singular
  hyperbolic  Q(v) = sum_i x_{-i} x_i
  parabolic   Q(v) = sum_i x_{-i} x_i + x_0^2
  elliptic    Q(v) = sum_i x_{-i} x_i + q0(y,z), q0 irreducible binary quadratic
  hermitian   h(u,v) = sum_i (u_{-i}^s v_i + u_i^s v_{-i}),  points h(v,v)=0

Residues are produced in coordinates as the sub-quotient perp(S)/S with the
restricted form, so every residue is again a fully featured space of the same
kind.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

from .algebra import (
    FieldSpec,
    Subspace,
    Vector,
    canonicalize,
    empty_subspace,
    get_field,
    join,
    meet,
    normalize_vector,
    reduce_against,
    vec_addmul,
)

KINDS = ("symplectic", "hyperbolic", "parabolic", "elliptic", "hermitian")
STRICTLY_ORTHOGONAL = ("hyperbolic", "parabolic", "elliptic")


# ---------------------------------------------------------------------------
# Type labels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TypeLabel:
    """Type of a building element: a plain dimension, one of the two maximal
    families of a hyperbolic space, the flag type of an (n-2)-space there,
    or the empty subspace."""

    tag: str  # 'empty' | 'dim' | 'max_prime' | 'max_double_prime' | 'pair_max'
    dim: int  # the numeric dimension |t|

    def __repr__(self):
        if self.tag == "empty":
            return "t(-1)"
        if self.tag == "dim":
            return f"t({self.dim})"
        if self.tag == "max_prime":
            return f"t({self.dim}')"
        if self.tag == "max_double_prime":
            return f"t({self.dim}'')"
        return f"t({{{self.dim}',{self.dim}''}})"


def t_empty() -> TypeLabel:
    return TypeLabel("empty", -1)


def t_dim(d: int) -> TypeLabel:
    return TypeLabel("empty", -1) if d == -1 else TypeLabel("dim", d)


def t_max_prime(n: int) -> TypeLabel:
    return TypeLabel("max_prime", n - 1)


def t_max_double_prime(n: int) -> TypeLabel:
    return TypeLabel("max_double_prime", n - 1)


def t_pair_max(n: int) -> TypeLabel:
    return TypeLabel("pair_max", n - 2)


# ---------------------------------------------------------------------------
# Forms
# ---------------------------------------------------------------------------

def _least_irreducible_binary_quadratic(f: FieldSpec) -> tuple[int, int]:
    """(b, c) with t^2 + b t + c irreducible over GF(q), least (c, b)."""
    for c in range(f.q):
        for b in range(f.q):
            has_root = any(
                f.add(f.add(f.mul(t, t), f.mul(b, t)), c) == 0 for t in range(f.q)
            )
            if not has_root:
                return b, c
    raise AssertionError("no irreducible quadratic (impossible over a finite field)")


@dataclass(frozen=True)
class FormSpec:
    """Form data pinned to a concrete basis of GF(q)^N.

    quad: upper-triangular matrix G of the quadratic form, Q(v) = sum_{i<=j}
    G[i][j] v_i v_j (unused for symplectic and hermitian).
    bil: matrix A of the induced (sesqui)linear form, f(u,v) = u* A v where
    u* applies sigma entrywise in the hermitian case.
    """

    kind: str
    rank_n: int
    q: int
    ambient_dim: int
    quad: tuple[tuple[int, ...], ...] | None
    bil: tuple[tuple[int, ...], ...]

    @property
    def field(self) -> FieldSpec:
        return get_field(self.q)

    @property
    def uses_sigma(self) -> bool:
        return self.kind == "hermitian"

    def q_value(self, v: Vector) -> int:
        f = self.field
        if self.kind == "symplectic":
            return 0
        if self.kind == "hermitian":
            # h(v, v); zero iff the point is on the variety
            return self.f_value(v, v)
        acc = 0
        G = self.quad
        for i, vi in enumerate(v):
            if not vi:
                continue
            row = G[i]
            for j in range(i, len(v)):
                if row[j] and v[j]:
                    acc = f.add(acc, f.mul(f.mul(vi, v[j]), row[j]))
        return acc

    def f_value(self, u: Vector, v: Vector) -> int:
        f = self.field
        A = self.bil
        sigma = f.frobenius if self.uses_sigma else (lambda x: x)
        acc = 0
        for i, ui in enumerate(u):
            if not ui:
                continue
            usi = sigma(ui)
            row = A[i]
            for j, vj in enumerate(v):
                if vj and row[j]:
                    acc = f.add(acc, f.mul(f.mul(usi, vj), row[j]))
        return acc

    def dual_vector(self, u: Vector) -> Vector:
        """Coefficient vector c with f(u, x) = sum_t c_t x_t."""
        f = self.field
        A = self.bil
        sigma = f.frobenius if self.uses_sigma else (lambda x: x)
        n = self.ambient_dim
        out = [0] * n
        for i, ui in enumerate(u):
            if not ui:
                continue
            usi = sigma(ui)
            row = A[i]
            for j in range(n):
                if row[j]:
                    out[j] = f.add(out[j], f.mul(usi, row[j]))
        return tuple(out)


def make_form(kind: str, n: int, q: int) -> FormSpec:
    """Standard-basis form of the given kind and rank."""
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    if n < 1:
        raise ValueError("rank must be at least 1")
    f = get_field(q)
    aniso = {"symplectic": 0, "hyperbolic": 0, "parabolic": 1, "elliptic": 2, "hermitian": 0}[kind]
    if kind == "hermitian" and not f.has_sigma:
        raise ValueError(f"hermitian form needs a square field order, got q={q}")
    N = 2 * n + aniso
    neg_idx = lambda i: n - i          # e_{-i}
    pos_idx = lambda i: n + aniso + i - 1  # e_i

    if kind == "symplectic":
        A = [[0] * N for _ in range(N)]
        for i in range(1, n + 1):
            A[neg_idx(i)][pos_idx(i)] = 1
            A[pos_idx(i)][neg_idx(i)] = f.neg(1)
        return FormSpec(kind, n, q, N, None, tuple(map(tuple, A)))

    if kind == "hermitian":
        A = [[0] * N for _ in range(N)]
        for i in range(1, n + 1):
            A[neg_idx(i)][pos_idx(i)] = 1
            A[pos_idx(i)][neg_idx(i)] = 1
        return FormSpec(kind, n, q, N, None, tuple(map(tuple, A)))

    # the three orthogonal kinds
    G = [[0] * N for _ in range(N)]
    for i in range(1, n + 1):
        a, b = neg_idx(i), pos_idx(i)
        G[min(a, b)][max(a, b)] = 1
    if kind == "parabolic":
        G[n][n] = 1
    elif kind == "elliptic":
        b_c, c_c = _least_irreducible_binary_quadratic(f)
        G[n][n] = 1          # y^2
        G[n][n + 1] = b_c    # b*y*z
        G[n + 1][n + 1] = c_c  # c*z^2
    # polarization
    A = [[0] * N for _ in range(N)]
    for i in range(N):
        for j in range(N):
            if i < j:
                A[i][j] = G[i][j]
            elif i > j:
                A[i][j] = G[j][i]
            else:
                A[i][i] = f.add(G[i][i], G[i][i])  # 2*G_ii, zero in char 2
    return FormSpec(kind, n, q, N, tuple(map(tuple, G)), tuple(map(tuple, A)))


def form_from_gram(kind: str, n: int, q: int, quad, bil) -> FormSpec:
    return FormSpec(kind, n, q, len(bil), quad, bil)


# ---------------------------------------------------------------------------
# Polar space
# ---------------------------------------------------------------------------

class BudgetError(RuntimeError):
    pass


class PolarSpace:
    """Full inventory of a finite polar space: points, collinearity bitmasks,
    singular subspaces per dimension, oriflamme labels when hyperbolic."""

    def __init__(self, form: FormSpec, max_points: int = 20000):
        self.form = form
        self.n = form.rank_n
        self.q = form.q
        self.field = form.field
        self.kind = form.kind
        self._pt_index: dict[Vector, int] = {}
        self._inventory: dict[int, list[Subspace]] = {}
        self._index_of: dict[int, dict[Subspace, int]] = {}
        self._point_mask_cache: dict[Subspace, int] = {}
        self._perp_cache: dict[Subspace, Subspace] = {}
        self._mss_family: dict[Subspace, int] | None = None
        self._build_points(max_points)

    # -- construction ------------------------------------------------------

    def _build_points(self, max_points: int) -> None:
        form = self.form
        pts: list[Vector] = []
        for v in _projective_points(self.field, form.ambient_dim):
            if form.kind == "symplectic" or form.q_value(v) == 0:
                pts.append(v)
                if len(pts) > max_points:
                    raise BudgetError(f"point budget {max_points} exceeded")
        pts.sort()
        self.points: list[Vector] = pts
        self._pt_index = {v: i for i, v in enumerate(pts)}
        # collinearity bitmasks; bit i of perp_rows[j] set iff f(p_i, p_j) = 0
        # (a point is collinear with itself)
        P = len(pts)
        rows = []
        for i in range(P):
            mask = 0
            dual = form.dual_vector(pts[i])
            f = self.field
            for j in range(P):
                w = pts[j]
                acc = 0
                for t, c in enumerate(dual):
                    if c and w[t]:
                        acc = f.add(acc, f.mul(c, w[t]))
                if acc == 0:
                    mask |= 1 << j
            rows.append(mask)
        self.perp_rows: list[int] = rows
        self.all_points_mask: int = (1 << P) - 1

    def num_points(self) -> int:
        return len(self.points)

    def point_subspace(self, i: int) -> Subspace:
        return self.enumerate_singular(0)[i]

    def point_index(self, v: Vector) -> int:
        return self._pt_index[normalize_vector(self.field, v)]

    # -- inventory ---------------------------------------------------------

    def enumerate_singular(self, d: int) -> list[Subspace]:
        """All singular subspaces of projective dimension d, canonically sorted."""
        if d < -1 or d > self.n - 1:
            raise ValueError(f"dimension {d} out of range for rank {self.n}")
        if d == -1:
            return [empty_subspace(self.q, self.form.ambient_dim)]
        if d in self._inventory:
            return self._inventory[d]
        if d == 0:
            subs = [
                Subspace(self.form.ambient_dim, self.q, (v,)) for v in self.points
            ]
        else:
            lower = self.enumerate_singular(d - 1)
            found = set()
            for U in lower:
                cand = self.point_mask(U, perp=True) & ~self.point_mask(U)
                j = 0
                m = cand
                while m:
                    if m & 1:
                        W = join(U, Subspace(self.form.ambient_dim, self.q, (self.points[j],)))
                        found.add(W)
                    m >>= 1
                    j += 1
            subs = sorted(found, key=lambda s: s.rows)
        self._inventory[d] = subs
        self._index_of[d] = {s: i for i, s in enumerate(subs)}
        return subs

    def index_of(self, d: int, U: Subspace) -> int:
        self.enumerate_singular(d)
        return self._index_of[d][U]

    def point_mask(self, U: Subspace, perp: bool = False) -> int:
        """Bitmask of space points on U, or of points collinear with U."""
        if not perp:
            key = U
            cached = self._point_mask_cache.get(key)
            if cached is not None:
                return cached
            mask = 0
            for v in U.projective_points():
                idx = self._pt_index.get(v)
                if idx is not None:
                    mask |= 1 << idx
            self._point_mask_cache[key] = mask
            return mask
        mask = self.all_points_mask
        for v in U.projective_points():
            idx = self._pt_index.get(v)
            if idx is not None:
                mask &= self.perp_rows[idx]
        return mask

    # -- perp and relative position ---------------------------------------

    def perp_subspace(self, U: Subspace) -> Subspace:
        """U-perp as a linear subspace of the ambient space (not nec. singular)."""
        cached = self._perp_cache.get(U)
        if cached is not None:
            return cached
        duals = [self.form.dual_vector(r) for r in U.rows]
        K = _kernel(self.field, self.form.ambient_dim, duals)
        self._perp_cache[U] = K
        return K

    def is_singular(self, U: Subspace) -> bool:
        form = self.form
        for r in U.rows:
            if form.kind != "symplectic" and form.q_value(r) != 0:
                return False
        for a, b in itertools.combinations(U.rows, 2):
            if form.f_value(a, b) != 0:
                return False
        return True

    def proj(self, V: Subspace, U: Subspace) -> Subspace:
        """proj_V(U) = V intersect U-perp."""
        return meet(V, self.perp_subspace(U))

    def lift(self, U: Subspace, V: Subspace) -> Subspace:
        """U^V = span of U and proj_V(U)."""
        return join(U, self.proj(V, U))

    def relative_position(self, U: Subspace, V: Subspace) -> dict:
        if not (self.is_singular(U) and self.is_singular(V)):
            raise ValueError("relative_position needs singular subspaces")
        pVU = self.proj(V, U)
        pUV = self.proj(U, V)
        lift_UV = join(U, pVU)
        semi = pVU.vdim == 0 or pUV.vdim == 0
        opp = pVU.vdim == 0 and pUV.vdim == 0
        return {
            "meet": meet(U, V),
            "proj_V_U": pVU,
            "proj_U_V": pUV,
            "U_lift_V": lift_UV,
            "opposite": opp,
            "semi_opposite": semi,
            "collinear": self.perp_subspace(U).contains_subspace(V),
        }

    # -- types and oriflamme ----------------------------------------------

    def mss_family(self, M: Subspace) -> int:
        """0 for the family of the reference MSS, 1 for the other (hyperbolic)."""
        if self.kind != "hyperbolic":
            raise ValueError("MSS families only exist in hyperbolic spaces")
        if self._mss_family is None:
            mss = self.enumerate_singular(self.n - 1)
            ref = mss[0]
            fam = {}
            for M2 in mss:
                inter = meet(ref, M2)
                fam[M2] = 0 if (self.n - 1 - inter.proj_dim) % 2 == 0 else 1
            self._mss_family = fam
        return self._mss_family[M]

    @property
    def oriflamme_ref(self) -> Subspace:
        return self.enumerate_singular(self.n - 1)[0]

    def type_of(self, U: Subspace) -> TypeLabel:
        d = U.proj_dim
        if d == -1:
            return t_empty()
        if self.kind == "hyperbolic" and d == self.n - 1:
            return (
                t_max_prime(self.n) if self.mss_family(U) == 0 else t_max_double_prime(self.n)
            )
        if self.kind == "hyperbolic" and d == self.n - 2:
            return t_pair_max(self.n)
        return t_dim(d)

    def type_set(self) -> list[TypeLabel]:
        if self.kind == "hyperbolic":
            return [t_dim(d) for d in range(self.n - 2)] + [
                t_max_prime(self.n),
                t_max_double_prime(self.n),
            ]
        return [t_dim(d) for d in range(self.n)]

    def subspaces_of_type(self, t: TypeLabel) -> list[Subspace]:
        if t.tag == "empty":
            return self.enumerate_singular(-1)
        if t.tag == "dim":
            if self.kind == "hyperbolic" and t.dim >= self.n - 2:
                if t.dim == self.n - 2:
                    return self.enumerate_singular(self.n - 2)
                raise ValueError("dimension n-1 in a hyperbolic space needs a family label")
            return self.enumerate_singular(t.dim)
        if t.tag == "pair_max":
            return self.enumerate_singular(self.n - 2)
        fam = 0 if t.tag == "max_prime" else 1
        return [M for M in self.enumerate_singular(self.n - 1) if self.mss_family(M) == fam]

    # -- residues ----------------------------------------------------------

    def residue(self, S: Subspace):
        """(residue space, up map, down map).

        up maps a singular subspace of self containing S to the corresponding
        subspace of the residue; down is its inverse.
        """
        if S.proj_dim > self.n - 2:
            raise ValueError("residue of a maximal singular subspace is undefined")
        if S.proj_dim == -1:
            ident = lambda U: U
            return self, ident, ident
        if not self.is_singular(S):
            raise ValueError("residue base must be singular")
        f = self.field
        N = self.form.ambient_dim
        Sperp = self.perp_subspace(S)
        # complement of S inside S-perp, in echelon form
        comp_rows = []
        for r in Sperp.rows:
            red = reduce_against(f, S.rows, r)
            if red is not None:
                red = reduce_against(f, tuple(comp_rows), red)
                if red is not None:
                    comp_rows.append(red)
        C = canonicalize(f, N, comp_rows)
        basis = C.rows
        M = len(basis)
        pivots = [next(i for i, c in enumerate(r) if c) for r in basis]
        k = S.proj_dim

        kind = self.kind
        if kind in ("symplectic", "hermitian"):
            quad = None
        else:
            quad = tuple(
                tuple(
                    self.form.q_value(basis[a]) if a == b
                    else (self.form.f_value(basis[a], basis[b]) if a < b else 0)
                    for b in range(M)
                )
                for a in range(M)
            )
        bil = tuple(
            tuple(self.form.f_value(basis[a], basis[b]) for b in range(M))
            for a in range(M)
        )
        res_form = form_from_gram(kind, self.n - k - 1, self.q, quad, bil)
        res = PolarSpace(res_form)

        def up(U: Subspace) -> Subspace:
            coords = []
            for r in U.rows:
                red = reduce_against(f, S.rows, r)
                if red is None:
                    continue
                coords.append(tuple(red[p] for p in pivots))
            return canonicalize(res.q, M, coords)

        def down(Ur: Subspace) -> Subspace:
            lifted = list(S.rows)
            for cr in Ur.rows:
                v = tuple([0] * N)
                for a, c in enumerate(cr):
                    if c:
                        v = vec_addmul(f, v, c, basis[a])
                lifted.append(v)
            return canonicalize(f, N, lifted)

        return res, up, down

    # -- hyperbolic subspaces ---------------------------------------------

    def double_perp(self, U: Subspace, V: Subspace) -> list[int]:
        """{U,V}^perp-perp as a list of point indices."""
        rp = self.relative_position(U, V)
        if not rp["opposite"]:
            raise ValueError("double perp needs opposite subspaces")
        common = self.point_mask(U, perp=True) & self.point_mask(V, perp=True)
        result = self.all_points_mask
        j = 0
        m = common
        while m:
            if m & 1:
                result &= self.perp_rows[j]
            m >>= 1
            j += 1
        return _mask_to_indices(result)

    def summary(self) -> dict:
        out = {"kind": self.kind, "rank": self.n, "q": self.q,
               "points": len(self.points)}
        for d in range(1, self.n):
            out[f"dim_{d}"] = len(self.enumerate_singular(d))
        if self.kind == "hyperbolic":
            mss = self.enumerate_singular(self.n - 1)
            out["families"] = (
                sum(1 for M in mss if self.mss_family(M) == 0),
                sum(1 for M in mss if self.mss_family(M) == 1),
            )
        return out


def build_polar_space(kind: str, n: int, q: int, max_points: int = 20000) -> PolarSpace:
    return PolarSpace(make_form(kind, n, q), max_points=max_points)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _projective_points(f: FieldSpec, N: int):
    """Canonical representatives of all 1-spaces of GF(q)^N: first nonzero
    coordinate equals 1, enumerated with the leading 1 moving right."""
    for lead in range(N):
        tail = N - lead - 1
        for combo in itertools.product(range(f.q), repeat=tail):
            yield tuple([0] * lead + [1] + list(combo))


def _kernel(f: FieldSpec, N: int, rows: list[Vector]) -> Subspace:
    """Nullspace {x : row . x = 0 for all rows}."""
    R = canonicalize(f, N, rows)
    pivots = [next(i for i, c in enumerate(r) if c) for r in R.rows]
    free = [i for i in range(N) if i not in pivots]
    basis = []
    for fr in free:
        v = [0] * N
        v[fr] = 1
        for r, p in zip(R.rows, pivots):
            v[p] = f.neg(r[fr])
        basis.append(tuple(v))
    return canonicalize(f, N, basis)


def _mask_to_indices(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out
