"""Finite-field arithmetic GF(p^k) and exact linear algebra over it.

Field elements are integer indices 0..q-1.  An index encodes the coefficient
vector of a polynomial residue in base p, constant term first: index e has
coefficients c_i = (e // p**i) % p.  Multiplication goes through log/antilog
tables, which is the fastest thing available at these sizes (q <= 9).

Subspaces of GF(q)^N are stored as reduced row echelon matrices, which makes
equality of subspaces equality of representations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

SUPPORTED_Q = (2, 3, 4, 5, 7, 8, 9)


def _factor_prime_power(q: int) -> tuple[int, int]:
    for p in (2, 3, 5, 7):
        if q % p == 0:
            k = 0
            m = q
            while m % p == 0:
                m //= p
                k += 1
            if m != 1:
                raise ValueError(f"q={q} is not a prime power in the supported set")
            return p, k
    raise ValueError(f"q={q} is not a prime power in the supported set")


def _poly_from_index(e: int, p: int) -> list[int]:
    coeffs = []
    while e:
        coeffs.append(e % p)
        e //= p
    return coeffs


def _poly_mul_mod(a: list[int], b: list[int], modulus: list[int], p: int) -> list[int]:
    # Schoolbook product followed by reduction mod the monic modulus.
    prod = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    deg_m = len(modulus) - 1
    while len(prod) > deg_m:
        lead = prod.pop()
        if lead:
            for i in range(deg_m):
                prod[len(prod) - deg_m + i] = (prod[len(prod) - deg_m + i] - lead * modulus[i]) % p
    return prod


def _poly_to_index(coeffs: list[int], p: int) -> int:
    e = 0
    for c in reversed(coeffs):
        e = e * p + c
    return e


def _is_irreducible(modulus: list[int], p: int) -> bool:
    """Exhaustive trial division by monic polynomials of lower degree."""
    k = len(modulus) - 1
    if k == 1:
        return True
    # Any factorization contains a monic factor of degree <= k // 2.
    for deg in range(1, k // 2 + 1):
        for idx in range(p**deg):
            divisor = _poly_from_index(idx, p)
            divisor += [0] * (deg - len(divisor)) + [1]
            if _poly_divides(divisor, modulus, p):
                return False
    return True


def _poly_divides(d: list[int], f: list[int], p: int) -> bool:
    rem = list(f)
    deg_d = len(d) - 1
    while len(rem) > deg_d:
        lead = rem.pop()
        if lead:
            for i in range(deg_d):
                rem[len(rem) - deg_d + i] = (rem[len(rem) - deg_d + i] - lead * d[i]) % p
    return not any(rem)


def _least_irreducible_modulus(p: int, k: int) -> tuple[int, ...]:
    """Monic irreducible of degree k minimizing the base-p index of its
    non-leading coefficients (constant term first)."""
    if k == 1:
        return (0, 1)
    for idx in range(p**k):
        coeffs = _poly_from_index(idx, p)
        coeffs += [0] * (k - len(coeffs)) + [1]
        if _is_irreducible(coeffs, p):
            return tuple(coeffs)
    raise AssertionError("no irreducible polynomial found (impossible)")


@dataclass(frozen=True)
class FieldSpec:
    """GF(p^k) with precomputed arithmetic tables."""

    p: int
    k: int
    modulus: tuple[int, ...]
    q: int
    add_table: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)
    mul_table: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)
    inv_table: tuple[int, ...] = field(repr=False, compare=False)
    neg_table: tuple[int, ...] = field(repr=False, compare=False)
    frob_table: tuple[int, ...] | None = field(repr=False, compare=False)

    def add(self, a: int, b: int) -> int:
        return self.add_table[a][b]

    def sub(self, a: int, b: int) -> int:
        return self.add_table[a][self.neg_table[b]]

    def mul(self, a: int, b: int) -> int:
        return self.mul_table[a][b]

    def neg(self, a: int) -> int:
        return self.neg_table[a]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no multiplicative inverse")
        return self.inv_table[a]

    def frobenius(self, a: int) -> int:
        if self.frob_table is None:
            raise ValueError(f"GF({self.q}) has no order-2 automorphism (odd extension degree)")
        return self.frob_table[a]

    @property
    def has_sigma(self) -> bool:
        return self.frob_table is not None

    def pow(self, a: int, e: int) -> int:
        r = 1
        for _ in range(e):
            r = self.mul(r, a)
        return r


@lru_cache(maxsize=None)
def get_field(q: int) -> FieldSpec:
    if q not in SUPPORTED_Q:
        raise ValueError(f"unsupported field size {q}; supported: {SUPPORTED_Q}")
    p, k = _factor_prime_power(q)
    modulus = _least_irreducible_modulus(p, k)

    def add(a: int, b: int) -> int:
        ca, cb = _poly_from_index(a, p), _poly_from_index(b, p)
        n = max(len(ca), len(cb))
        ca += [0] * (n - len(ca))
        cb += [0] * (n - len(cb))
        return _poly_to_index([(x + y) % p for x, y in zip(ca, cb)], p)

    def mul(a: int, b: int) -> int:
        return _poly_to_index(
            _poly_mul_mod(_poly_from_index(a, p), _poly_from_index(b, p), list(modulus), p), p
        )

    add_table = tuple(tuple(add(a, b) for b in range(q)) for a in range(q))
    mul_table = tuple(tuple(mul(a, b) for b in range(q)) for a in range(q))
    neg_table = tuple(next(b for b in range(q) if add_table[a][b] == 0) for a in range(q))
    inv_table = tuple(
        next((b for b in range(q) if mul_table[a][b] == 1), 0) for a in range(q)
    )
    frob_table = None
    if k % 2 == 0:
        # x -> x^r with r = p^(k/2), square-and-multiply through the table
        r = p ** (k // 2)
        frob = []
        for a in range(q):
            result = 1
            base, e = a, r
            while e:
                if e & 1:
                    result = mul_table[result][base]
                base = mul_table[base][base]
                e >>= 1
            frob.append(result)
        frob_table = tuple(frob)
        # sanity: involution
        assert all(frob_table[frob_table[a]] == a for a in range(q))

    return FieldSpec(
        p=p, k=k, modulus=modulus, q=q,
        add_table=add_table, mul_table=mul_table,
        inv_table=inv_table, neg_table=neg_table, frob_table=frob_table,
    )


def field_op(spec: FieldSpec, op: str, a: int, b: int | None = None) -> int:
    """Dispatch wrapper around the FieldSpec methods."""
    if not (0 <= a < spec.q) or (b is not None and not (0 <= b < spec.q)):
        raise ValueError("element index out of range")
    if op == "add":
        if b is None:
            raise ValueError("add needs two operands")
        return spec.add(a, b)
    if op == "mul":
        if b is None:
            raise ValueError("mul needs two operands")
        return spec.mul(a, b)
    if op == "inv":
        return spec.inv(a)
    if op == "frobenius":
        return spec.frobenius(a)
    raise ValueError(f"unknown op {op!r}")


# ---------------------------------------------------------------------------
# Vectors and subspaces
# ---------------------------------------------------------------------------

Vector = tuple[int, ...]


def vec_add(f: FieldSpec, u: Vector, v: Vector) -> Vector:
    at = f.add_table
    return tuple(at[a][b] for a, b in zip(u, v))


def vec_scale(f: FieldSpec, c: int, u: Vector) -> Vector:
    mt = f.mul_table[c]
    return tuple(mt[a] for a in u)


def vec_addmul(f: FieldSpec, u: Vector, c: int, v: Vector) -> Vector:
    """u + c*v in one pass."""
    at, mt = f.add_table, f.mul_table[c]
    return tuple(at[a][mt[b]] for a, b in zip(u, v))


@dataclass(frozen=True)
class Subspace:
    """Row space of a reduced echelon matrix over GF(q).

    The empty subspace (zero rows) is a legitimate value with proj_dim -1.
    """

    ambient_dim: int
    q: int
    rows: tuple[Vector, ...]

    @property
    def proj_dim(self) -> int:
        return len(self.rows) - 1

    @property
    def vdim(self) -> int:
        return len(self.rows)

    @property
    def field(self) -> FieldSpec:
        return get_field(self.q)

    def __contains__(self, v: Vector) -> bool:
        return reduce_against(self.field, self.rows, v) is None

    def contains_subspace(self, other: "Subspace") -> bool:
        f = self.field
        return all(reduce_against(f, self.rows, r) is None for r in other.rows)

    def vectors(self):
        """All vectors of the subspace, zero included."""
        f = self.field
        n = self.ambient_dim
        out = [tuple([0] * n)]
        for r in self.rows:
            out = [vec_addmul(f, v, c, r) for v in out for c in range(self.q)]
        return out

    def projective_points(self):
        """Canonical representatives (first nonzero entry 1) of the 1-spaces."""
        f = self.field
        seen = set()
        for v in self.vectors():
            if any(v):
                w = normalize_vector(f, v)
                seen.add(w)
        return sorted(seen)


def normalize_vector(f: FieldSpec, v: Vector) -> Vector:
    """Scale so that the first nonzero coordinate equals 1."""
    for c in v:
        if c:
            if c == 1:
                return v
            return vec_scale(f, f.inv(c), v)
    return v


def reduce_against(f: FieldSpec, rows: tuple[Vector, ...], v: Vector) -> Vector | None:
    """Reduce v against echelon rows; None if v lies in their span."""
    for r in rows:
        piv = next(i for i, c in enumerate(r) if c)
        if v[piv]:
            v = vec_addmul(f, v, f.neg(v[piv]), r)
    return v if any(v) else None


def canonicalize(q_or_field, ambient_dim: int, row_vectors) -> Subspace:
    """Reduced row echelon form of the span of the given rows."""
    f = q_or_field if isinstance(q_or_field, FieldSpec) else get_field(q_or_field)
    rows: list[list[int]] = [list(r) for r in row_vectors]
    for r in rows:
        if len(r) != ambient_dim:
            raise ValueError("row length does not match ambient dimension")
    echelon: list[Vector] = []
    pivots: list[int] = []
    for r in rows:
        v = tuple(r)
        red = reduce_against(f, tuple(echelon), v)
        if red is None:
            continue
        piv = next(i for i, c in enumerate(red) if c)
        red = vec_scale(f, f.inv(red[piv]), red)
        echelon.append(red)
        pivots.append(piv)
        order = sorted(range(len(echelon)), key=lambda i: pivots[i])
        echelon = [echelon[i] for i in order]
        pivots = [pivots[i] for i in order]
    # back-substitution: zeros above every pivot
    for i in range(len(echelon) - 1, -1, -1):
        piv = pivots[i]
        for jj in range(i):
            c = echelon[jj][piv]
            if c:
                echelon[jj] = vec_addmul(f, echelon[jj], f.neg(c), echelon[i])
    return Subspace(ambient_dim=ambient_dim, q=f.q, rows=tuple(echelon))


def empty_subspace(q: int, ambient_dim: int) -> Subspace:
    return Subspace(ambient_dim=ambient_dim, q=q, rows=())


def span_of_vector(q: int, v: Vector) -> Subspace:
    return canonicalize(q, len(v), [v])


def join(U: Subspace, V: Subspace) -> Subspace:
    if U.ambient_dim != V.ambient_dim or U.q != V.q:
        raise ValueError("ambient mismatch")
    return canonicalize(U.q, U.ambient_dim, list(U.rows) + list(V.rows))


def meet(U: Subspace, V: Subspace) -> Subspace:
    """Intersection of row spaces via the Zassenhaus block trick."""
    if U.ambient_dim != V.ambient_dim or U.q != V.q:
        raise ValueError("ambient mismatch")
    f = U.field
    n = U.ambient_dim
    zero = tuple([0] * n)
    block = [r + r for r in U.rows] + [r + zero for r in V.rows]
    reduced = canonicalize(f, 2 * n, block)
    inter_rows = [r[n:] for r in reduced.rows if not any(r[:n])]
    return canonicalize(f, n, inter_rows)
