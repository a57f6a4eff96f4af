import itertools

import pytest

from weylgraphs.algebra import get_field, join, meet
from weylgraphs.polar import (
    KINDS,
    PolarSpace,
    build_polar_space,
    make_form,
    t_dim,
    t_empty,
    t_max_double_prime,
    t_max_prime,
)


# ---------------------------------------------------------------------------
# counting oracle: classical product formulas, independent of the enumerator
# ---------------------------------------------------------------------------

def expected_singular_count(kind, n, q, d):
    """Number of singular subspaces of projective dimension d, from the
    product formula for polar spaces of rank n with parameter e."""
    if kind == "hermitian":
        r = round(q ** 0.5)
        assert r * r == q
        num = 1
        den = 1
        for i in range(d + 1):
            num *= (r ** (2 * (n - i)) - 1) * (r ** (2 * (n - 1 - i) + 1) + 1)
            den *= r ** (2 * (i + 1)) - 1
        return num // den
    e = {"symplectic": 1, "hyperbolic": 0, "parabolic": 1, "elliptic": 2}[kind]
    num = 1
    den = 1
    for i in range(d + 1):
        num *= (q ** (n - i) - 1) * (q ** (e + n - 1 - i) + 1)
        den *= q ** (i + 1) - 1
    return num // den


SMALL_SPACES = [
    ("symplectic", 2, 2),
    ("symplectic", 2, 3),
    ("symplectic", 3, 2),
    ("hyperbolic", 2, 2),
    ("hyperbolic", 2, 3),
    ("hyperbolic", 3, 2),
    ("hyperbolic", 3, 3),
    ("parabolic", 2, 3),
    ("parabolic", 3, 2),
    ("elliptic", 2, 2),
    ("elliptic", 2, 3),
    ("hermitian", 2, 4),
    ("hermitian", 2, 9),
]


@pytest.fixture(scope="module")
def spaces():
    return {key: build_polar_space(*key) for key in SMALL_SPACES}


@pytest.mark.parametrize("key", SMALL_SPACES)
def test_counts_match_product_formula(key, spaces):
    kind, n, q = key
    sp = spaces[key]
    for d in range(n):
        got = len(sp.enumerate_singular(d))
        assert got == expected_singular_count(kind, n, q, d), (key, d)


def test_frozen_counts():
    sp = build_polar_space("symplectic", 3, 2)
    assert [len(sp.enumerate_singular(d)) for d in range(3)] == [63, 315, 135]
    hyp = build_polar_space("hyperbolic", 3, 2)
    assert hyp.num_points() == 35
    mss = hyp.enumerate_singular(2)
    assert len(mss) == 30
    fams = [hyp.mss_family(M) for M in mss]
    assert fams.count(0) == 15 and fams.count(1) == 15
    par = build_polar_space("parabolic", 3, 2)
    assert par.num_points() == 63
    assert len(par.enumerate_singular(2)) == 135
    herm = build_polar_space("hermitian", 3, 4)
    assert herm.num_points() == 693


def test_q_plus_7_2_counts():
    sp = build_polar_space("hyperbolic", 4, 2)
    assert sp.num_points() == 135
    mss = sp.enumerate_singular(3)
    assert len(mss) == 270
    fams = [sp.mss_family(M) for M in mss]
    assert fams.count(0) == 135 and fams.count(1) == 135


# ---------------------------------------------------------------------------
# polar space axioms on tiny instances
# ---------------------------------------------------------------------------

TINY = [("symplectic", 2, 2), ("hyperbolic", 2, 2), ("hyperbolic", 3, 2),
        ("parabolic", 2, 3), ("elliptic", 2, 2), ("hermitian", 2, 4)]


@pytest.mark.parametrize("key", TINY)
def test_axiom_one_point_or_hyperplane(key, spaces):
    # for a point x and a singular U not through x, the points of U collinear
    # with x form either all of U or a hyperplane of U
    sp = spaces[key]
    n = sp.n
    for U in sp.enumerate_singular(n - 1):
        umask = sp.point_mask(U)
        for i in range(sp.num_points()):
            inter = umask & sp.perp_rows[i]
            cnt = bin(inter).count("1")
            full = bin(umask).count("1")
            hyper = (full * (sp.q - 1) // (sp.q ** n - 1)) * (sp.q ** (n - 1) - 1) // (sp.q - 1)
            assert cnt in (full, hyper), key


@pytest.mark.parametrize("key", TINY)
def test_axiom_every_subspace_below_a_maximal(key, spaces):
    sp = spaces[key]
    n = sp.n
    mss = sp.enumerate_singular(n - 1)
    for d in range(n - 1):
        for U in sp.enumerate_singular(d):
            assert any(M.contains_subspace(U) for M in mss), key


@pytest.mark.parametrize("key", TINY)
def test_axiom_two_disjoint_maximals(key, spaces):
    sp = spaces[key]
    mss = sp.enumerate_singular(sp.n - 1)
    M0 = mss[0]
    assert any(meet(M0, M).proj_dim == -1 for M in mss[1:]), key


@pytest.mark.parametrize("key", TINY)
def test_subspaces_of_singular_are_singular(key, spaces):
    sp = spaces[key]
    for U in sp.enumerate_singular(sp.n - 1):
        assert sp.is_singular(U)
        pts = U.projective_points()
        for a, b in itertools.combinations(pts, 2):
            L = join(
                sp.point_subspace(sp.point_index(a)),
                sp.point_subspace(sp.point_index(b)),
            )
            assert sp.is_singular(L)


# ---------------------------------------------------------------------------
# relative position
# ---------------------------------------------------------------------------

def test_relative_position_symplectic_lines():
    sp = build_polar_space("symplectic", 2, 2)
    lines = sp.enumerate_singular(1)
    for U in lines[:6]:
        for V in lines:
            rp = sp.relative_position(U, V)
            inter = rp["meet"]
            assert inter == meet(U, V)
            # proj_V(U) always contains the intersection
            assert rp["proj_V_U"].contains_subspace(inter)
            if rp["opposite"]:
                assert inter.proj_dim == -1
            if U == V:
                assert rp["collinear"] or sp.kind == "symplectic"


def test_projection_codim_bound():
    # proj_V(U) is never empty when dim U + dim V >= n - 1 fails to force it;
    # in a rank-2 space two disjoint lines always have opposite or a common
    # collinear point structure
    sp = build_polar_space("hyperbolic", 2, 2)
    lines = sp.enumerate_singular(1)
    for U in lines:
        for V in lines:
            rp = sp.relative_position(U, V)
            if meet(U, V).proj_dim == 0:
                assert not rp["opposite"]


# ---------------------------------------------------------------------------
# types and oriflamme
# ---------------------------------------------------------------------------

def test_type_of_plain():
    sp = build_polar_space("symplectic", 3, 2)
    assert sp.type_of(sp.enumerate_singular(-1)[0]) == t_empty()
    assert sp.type_of(sp.enumerate_singular(0)[0]) == t_dim(0)
    assert sp.type_of(sp.enumerate_singular(2)[0]) == t_dim(2)
    assert sp.type_set() == [t_dim(0), t_dim(1), t_dim(2)]


def test_hyperbolic_families_adjacency_parity():
    # two MSS meet in dim n-2 iff they are in different families, and more
    # generally family parity matches intersection-codimension parity
    sp = build_polar_space("hyperbolic", 3, 2)
    mss = sp.enumerate_singular(2)
    for M1 in mss:
        for M2 in mss:
            inter = meet(M1, M2)
            same = (sp.n - 1 - inter.proj_dim) % 2 == 0
            assert (sp.mss_family(M1) == sp.mss_family(M2)) == same
    labels = {sp.type_of(M).tag for M in mss}
    assert labels == {"max_prime", "max_double_prime"}
    assert sp.type_set()[-2:] == [t_max_prime(3), t_max_double_prime(3)]


def test_subspaces_of_type_families():
    sp = build_polar_space("hyperbolic", 3, 2)
    a = sp.subspaces_of_type(t_max_prime(3))
    b = sp.subspaces_of_type(t_max_double_prime(3))
    assert len(a) == len(b) == 15
    assert not (set(a) & set(b))


# ---------------------------------------------------------------------------
# residues
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("key,d", [
    (("symplectic", 3, 2), 0),
    (("hyperbolic", 3, 2), 0),
    (("parabolic", 3, 2), 0),
    (("hermitian", 2, 4), 0),
    (("symplectic", 3, 2), 1),
])
def test_residue_kind_rank_and_bijection(key, d, spaces):
    sp = spaces[key]
    S = sp.enumerate_singular(d)[1]
    res, up, down = sp.residue(S)
    assert res.kind == sp.kind
    assert res.n == sp.n - d - 1
    # the map U -> up(U) is a bijection from singular (d+1)-spaces through S
    # onto residue points, with inverse down
    through = [U for U in sp.enumerate_singular(d + 1) if U.contains_subspace(S)]
    images = {up(U) for U in through}
    assert len(images) == len(through) == res.num_points()
    for U in through:
        assert down(up(U)) == U
    # incidence is preserved both ways at the next level
    if d + 2 <= sp.n - 1:
        planes = [W for W in sp.enumerate_singular(d + 2) if W.contains_subspace(S)]
        assert len(planes) == len(res.enumerate_singular(1))
        for W in planes[:10]:
            assert down(up(W)) == W
            for U in through[:10]:
                assert W.contains_subspace(U) == up(W).contains_subspace(up(U))


def test_rank1_residue_two_points_iff_hyperbolic():
    for kind, n, q in [("symplectic", 2, 2), ("hyperbolic", 2, 2),
                       ("parabolic", 2, 3), ("elliptic", 2, 2),
                       ("hermitian", 2, 4)]:
        sp = build_polar_space(kind, n, q)
        S = sp.enumerate_singular(n - 2)[0]
        res, _, _ = sp.residue(S)
        if kind == "hyperbolic":
            assert res.num_points() == 2
        else:
            assert res.num_points() > 2


def test_residue_of_empty_is_identity():
    sp = build_polar_space("symplectic", 2, 2)
    res, up, down = sp.residue(sp.enumerate_singular(-1)[0])
    assert res is sp
    p = sp.enumerate_singular(0)[3]
    assert up(p) == p and down(p) == p


# ---------------------------------------------------------------------------
# special structure
# ---------------------------------------------------------------------------

def test_char2_parabolic_is_symplectic():
    # projecting away the middle coordinate identifies Q(2n,2) with W(2n-1,2)
    n, q = 3, 2
    par = build_polar_space("parabolic", n, q)
    sym = build_polar_space("symplectic", n, q)
    f = get_field(q)

    def proj(v):
        return tuple(v[:n] + v[n + 1:])

    mapped = {}
    for i, v in enumerate(par.points):
        w = proj(v)
        assert any(w), "radical point should not be singular"
        mapped[i] = sym.point_index(w)
    assert sorted(mapped.values()) == list(range(sym.num_points()))
    for i in range(par.num_points()):
        for j in range(i + 1, par.num_points()):
            a = bool(par.perp_rows[i] >> j & 1)
            b = bool(sym.perp_rows[mapped[i]] >> mapped[j] & 1)
            assert a == b


def test_double_perp_of_opposite_points_is_hyperbolic_line():
    # in a strictly orthogonal space the double perp of two non-collinear
    # points has exactly 2 points; in the symplectic space it is q+1
    sp = build_polar_space("hyperbolic", 3, 2)
    pts = sp.enumerate_singular(0)
    x = pts[0]
    y = next(p for i, p in enumerate(pts)
             if not (sp.perp_rows[0] >> i) & 1)
    dp = sp.double_perp(x, y)
    assert len(dp) == 2

    sym = build_polar_space("symplectic", 2, 3)
    pts = sym.enumerate_singular(0)
    x = pts[0]
    j, y = next((i, p) for i, p in enumerate(pts)
                if not (sym.perp_rows[0] >> i) & 1)
    assert len(sym.double_perp(x, y)) == sym.q + 1


def test_make_form_validation():
    with pytest.raises(ValueError):
        make_form("unitary", 2, 4)
    with pytest.raises(ValueError):
        make_form("hermitian", 2, 2)
    with pytest.raises(ValueError):
        make_form("symplectic", 0, 2)
    assert set(KINDS) == {
        "symplectic", "hyperbolic", "parabolic", "elliptic", "hermitian"
    }
