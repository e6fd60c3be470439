import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from sp4lab.quartic import (
    FIXED_TYPES,
    IDENTITY4,
    PHI0,
    STAB_II,
    CyclotomicNumber,
    DegenerateInvolution,
    QuarticPoint,
    act,
    classify_permutation_fixed_locus,
    compose,
    conjugates_to_phi0,
    cycle_string,
    iinverse,
    imul,
    ineg,
    involution_normal_form,
    is_integer_symplectic,
    is_singular,
    on_quartic,
    parse_cycles,
    parse_number,
    perm_inverse,
    perm_order,
    random_gamma1,
    reid_tai,
    sign,
    stab_ii_relations,
    stabilizer,
    tangent_action_determinant,
    tangent_weights,
)

THETA = "0, theta, theta^2, theta^3, theta^4, 1"


def theta_point():
    return QuarticPoint.parse(THETA)


def Z(m=20):
    return CyclotomicNumber.zeta(m)


# ---------------------------------------------------------------- cyclotomic numbers

coeff_lists = st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=4), max_size=12)


@seed(1)
@settings(max_examples=80)
@given(coeff_lists, coeff_lists, coeff_lists)
def test_field_laws(a, b, c):
    x, y, w = (CyclotomicNumber(v) for v in (a, b, c))
    assert x * (y + w) == x * y + x * w
    assert (x * y) * w == x * (y * w)
    assert x + y == y + x
    if not y.is_zero():
        assert (x / y) * y == x
        assert y * y.inverse() == 1


def test_roots_of_unity():
    z = Z()
    assert z ** 20 == 1 and z ** 10 == -1
    i = parse_number("i")
    assert i * i == -1
    theta = parse_number("theta")
    assert sum((theta ** k for k in range(1, 5)), theta ** 0) == 0
    assert parse_number("omega", 60) == parse_number("w", 60)
    assert parse_number("omega", 3) ** 2 + parse_number("omega", 3) + 1 == 0
    with pytest.raises(ValueError):
        parse_number("omega")  # cube roots of unity are not in the default Q(zeta_20)


def test_lift():
    t = CyclotomicNumber.root_of_unity(5, 1, 5)
    assert t.lift(20) == parse_number("theta", 20)
    with pytest.raises(ValueError):
        t.lift(12)


def test_field_mismatch():
    with pytest.raises(ValueError):
        CyclotomicNumber.zeta(5) + CyclotomicNumber.zeta(4)


def test_grammar():
    assert parse_number("-1/3 + 2*z") == Fraction(-1, 3) + 2 * Z()
    assert parse_number("(1+i)^2") == 2 * parse_number("i")
    assert parse_number("theta**-1") == parse_number("theta^4")
    assert parse_number("7") == 7
    assert str(parse_number("z^2 - 1")) == "-1 + z^2"


@pytest.mark.parametrize("text", ["theta^x", "foo", "1.5", "2 +", "z % 2", "[1]"])
def test_grammar_errors(text):
    with pytest.raises(ValueError):
        parse_number(text)


def test_grammar_error_reports_column():
    with pytest.raises(ValueError, match="column"):
        parse_number("1 + bar")


# ---------------------------------------------------------------- points

def test_theta_point_on_quartic():
    assert on_quartic(theta_point())
    assert QuarticPoint.parse("(0:theta:theta^2:theta^3:theta^4:1)") == theta_point()


def test_points_off_quartic():
    assert not on_quartic(QuarticPoint((-1, 1, 0, 0, 0, 0)))
    assert not on_quartic(QuarticPoint((1, 1, 1, 1, 1, -5)))
    assert not on_quartic(QuarticPoint((1, 1, 1, -1, -1, -1)))


def test_point_validation():
    with pytest.raises(ValueError):
        QuarticPoint((0, 0, 0, 0, 0, 0))
    with pytest.raises(ValueError):
        QuarticPoint((1, 0, 0, 0, 0, 0))
    with pytest.raises(ValueError):
        QuarticPoint.parse("1, -1, 0")


def test_singular_points():
    # (1,-1,1,-1,0,0) is one of the fixed points in Sing V
    assert is_singular(QuarticPoint((1, -1, 1, -1, 0, 0)))
    assert not is_singular(theta_point())


# ---------------------------------------------------------------- permutations

def test_cycle_notation_round_trip():
    for s in itertools.permutations(range(6)):
        assert parse_cycles(cycle_string(s)) == s
    assert sign(parse_cycles("(1,2)")) == -1
    assert perm_order(parse_cycles("(1,2)(3,4,5)")) == 6
    with pytest.raises(ValueError):
        parse_cycles("(1,1)")


def test_action_convention():
    # the coordinate in slot 1 moves to slot 2
    assert act(parse_cycles("(1,2,3)"), ("a", "b", "c", "d", "e", "f")) == (
        "c", "a", "b", "d", "e", "f")


# ---------------------------------------------------------------- stabilizers

def test_theta_stabilizer_has_5_cycle():
    x = theta_point()
    stab = stabilizer(x)
    fives = [s for s in stab if perm_order(s.sigma) == 5]
    assert fives
    for s in fives:
        assert s.lam ** 5 == 1 and s.lam != 1
        assert act(s.sigma, x.coords) == x.scaled(s.lam)


def test_divisor_point_has_transposition():
    x = QuarticPoint((-9, -9, -7, 2, 9, 14))
    assert on_quartic(x)
    stab = stabilizer(x)
    t = [s for s in stab if s.sigma == parse_cycles("(1,2)")]
    assert len(t) == 1 and t[0].lam == 1


def test_trivial_stabilizer():
    x = QuarticPoint((-7, -5, -3, 0, 7, 8))
    assert on_quartic(x)
    assert [cycle_string(s.sigma) for s in stabilizer(x)] == ["()"]


def test_stabilizer_rejects_off_quartic():
    with pytest.raises(ValueError):
        stabilizer(QuarticPoint((1, 1, 1, -1, -1, -1)))


@pytest.mark.parametrize("point", [THETA, "1, -1, 1, -1, 0, 0", "-9, -9, -7, 2, 9, 14",
                                   "1, z^3, z, -1 - z - z^2 - z^3, z^2, 0"])
def test_stabilizer_is_a_group(point):
    x = QuarticPoint.parse(point, 20 if "z" not in point else 5)
    stab = {s.sigma: s.lam for s in stabilizer(x)}
    for s, ls in stab.items():
        assert perm_inverse(s) in stab
        assert stab[perm_inverse(s)] == ls.inverse()
        for t, lt in stab.items():
            st_ = compose(s, t)
            assert st_ in stab and stab[st_] == ls * lt


# ---------------------------------------------------------------- tangent action

def smooth_points():
    return [theta_point(), QuarticPoint((-9, -9, -7, 2, 9, 14)),
            QuarticPoint.parse("1, z^3, z, -1 - z - z^2 - z^3, z^2, 0", 5)]


def test_tangent_identity():
    x = theta_point()
    e = next(s for s in stabilizer(x) if cycle_string(s.sigma) == "()")
    assert tangent_action_determinant(x, e) == 1


def test_tangent_determinant_closed_form():
    for x in smooth_points():
        for s in stabilizer(x):
            det = tangent_action_determinant(x, s)
            assert det == sign(s.sigma) * s.lam.inverse()
            assert det ** (2 * x.m) == 1
            if sign(s.sigma) == 1 and s.lam == 1:
                assert det == 1


def test_theta_point_terminal():
    x = theta_point()
    for s in stabilizer(x):
        if perm_order(s.sigma) != 5:
            continue
        w, r = tangent_weights(x, s)
        assert r == 5
        assert reid_tai([(a, r) for a in w], terminal=True)


def test_tangent_rejects_singular():
    x = QuarticPoint((1, -1, 1, -1, 0, 0))
    s = stabilizer(x)[0]
    with pytest.raises(ValueError):
        tangent_action_determinant(x, s)


def test_reid_tai():
    assert reid_tai([(1, 5), (2, 5), (2, 5)])
    assert not reid_tai([(1, 5), (1, 5), (1, 5)])
    assert reid_tai([(1, 2), (1, 2), (0, 2)])
    assert not reid_tai([(1, 2), (1, 2), (0, 2)], terminal=True)


# ---------------------------------------------------------------- fixed loci

def cases(t):
    return {c.lam: c for c in classify_permutation_fixed_locus(t)}


def test_classify_three_three_cycle():
    c = cases("(1,2,3)(4,5,6)")["1"]
    assert c.eigen_point == ("1", "1", "1", "-1", "-1", "-1")
    assert c.components == []


def test_classify_transposition():
    c = cases("(1,2)")["1"]
    assert [(x.dimension, x.label) for x in c.components] == [(2, "divisor x1=x2")]


def test_classify_five_cycle():
    cs = cases("(1,2,3,4,5)")
    assert cs["1"].components == []
    for lam in ("e(1/5)", "e(2/5)", "e(3/5)", "e(4/5)"):
        labels = [x.label for x in cs[lam].components]
        assert labels == ["theta-orbit"]


def test_classify_involutions():
    cs = cases("(1,2)(3,4)(5,6)")
    assert [x.label for x in cs["1"].components] == ["Sing V"]
    assert all(x.label.startswith("image of E") for x in cs["-1"].components)
    assert len(cs["-1"].components) == 4


def test_classify_all_types_run():
    for t in FIXED_TYPES:
        assert classify_permutation_fixed_locus(t)
    with pytest.raises(ValueError):
        classify_permutation_fixed_locus("(1,2,3,4)")


def test_classified_points_are_fixed():
    # isolated points really are fixed with the stated eigenvalue, and stay fixed after relabeling
    rng = random.Random(5)
    for t in FIXED_TYPES:
        sigma = parse_cycles(t)
        for c in classify_permutation_fixed_locus(t):
            for comp in c.components:
                if comp.point is None:
                    continue
                r = c.field
                x = QuarticPoint(tuple(parse_number(v, r) for v in comp.point))
                lam = CyclotomicNumber.root_of_unity(c.order, c.k, r)
                assert on_quartic(x)
                assert act(sigma, x.coords) == x.scaled(lam)
                tau = tuple(rng.sample(range(6), 6))
                y = QuarticPoint(act(tau, x.coords))
                conj = compose(compose(tau, sigma), perm_inverse(tau))
                assert {s.sigma: s.lam for s in stabilizer(y)}[conj] == lam


# ---------------------------------------------------------------- involution normal form

def test_normal_form_of_phi0():
    nf = involution_normal_form(PHI0)
    assert nf.basis == tuple(tuple(int(i == j) for j in range(4)) for i in range(4))
    assert nf.degenerate == (True, True)
    assert conjugates_to_phi0(PHI0, nf)


def test_normal_form_degenerate_raise():
    with pytest.raises(DegenerateInvolution):
        involution_normal_form(PHI0, degenerate="raise")


def test_normal_form_of_minus_phi0():
    m = ineg(PHI0)
    assert conjugates_to_phi0(m, involution_normal_form(m))


def skew(u, v):
    return u[0] * v[2] + u[1] * v[3] - u[2] * v[0] - u[3] * v[1]


def test_normal_form_random_conjugates():
    rng = random.Random(20)
    for _ in range(20):
        g = random_gamma1(rng)
        assert is_integer_symplectic(g)
        m = imul(imul(g, PHI0), iinverse(g))
        nf = involution_normal_form(m)
        e1, e2, e3, e4 = nf.basis
        assert skew(e1, e3) == 1 and skew(e2, e4) == 1
        assert skew(e1, e2) == skew(e1, e4) == skew(e3, e2) == skew(e3, e4) == 0
        for k, e in enumerate(nf.basis):
            me = tuple(sum(m[i][j] * e[j] for j in range(4)) for i in range(4))
            assert me == tuple((-1) ** k * v for v in e)
        assert conjugates_to_phi0(m, nf)


@pytest.mark.parametrize("m", [
    IDENTITY4,
    ineg(IDENTITY4),
    ((1, 1, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, -1, 1)),  # not 1 mod 2
    ((1, 0, 2, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)),  # not an involution
    ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 3)),  # not symplectic
])
def test_normal_form_rejects(m):
    with pytest.raises(ValueError):
        involution_normal_form(m)


# ---------------------------------------------------------------- (i, i) stabilizer

def test_stab_ii():
    rep = stab_ii_relations()
    assert all(rep.relations.values()), rep.relations
    assert rep.order == 16
    assert rep.nonabelian
    assert rep.ok


def test_stab_ii_matrices_symplectic():
    for g in STAB_II.values():
        assert is_integer_symplectic(g)
