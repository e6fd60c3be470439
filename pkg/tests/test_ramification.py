import random
from math import gcd
from fractions import Fraction
from functools import lru_cache

import pytest

from sp4lab import atlas
from sp4lab.chain import Subgroup, orbit
from sp4lab.experiments import random_subgroup
from sp4lab.ramification import (
    IDENTITIES,
    REPAIRED,
    bound_check,
    bound_expression,
    bound_value,
    check_identity,
    delta_at_triple,
    mult_bound_at_triple,
    mult_exact_at_triple,
    ram_E,
    ram_F,
    ram_group_line,
    ram_line,
    ram_line_in_divisor,
    ram_v,
    ramification_report,
    verdict_from_report,
    verify_identities,
)
from sp4lab.symplectic import (
    IDENTITY,
    apply,
    inverse,
    mul,
    neg,
    phi0,
    psi,
    reduce,
    transvection,
)
from sp4lab.ramification import _boundD, _boundE, _boundF


@lru_cache(maxsize=None)
def full(n):
    return Subgroup.full(n)


def center(n):
    return Subgroup(n, [neg(IDENTITY, n)])


def conj(g, x, n):
    return mul(mul(g, x, n), inverse(g, n), n)


# ---------------------------------------------------------------- ram_v

def test_ram_v_full_and_center():
    n = 5
    for d in atlas.enumerate_D(n)[:40]:
        assert ram_v(full(n), d.v) == 1
        assert ram_v(center(n), d.v) == Fraction(1, n)


def test_ram_v_partial():
    p = 3
    n = p * p
    h = Subgroup(n, [neg(IDENTITY, n), transvection((0, 1, 0, 0), p, n)])
    assert ram_v(h, (0, 1, 0, 0)) == Fraction(1, p)
    assert ram_v(h, (0, n - 1, 0, 0)) == Fraction(1, p)
    assert ram_v(h, (1, 0, 0, 0)) == Fraction(1, n)


def test_ram_v_needs_prime_power():
    with pytest.raises(ValueError):
        ram_v(center(6), (0, 1, 0, 0))


def test_ram_v_conjugation_covariance():
    rng = random.Random(4)
    for n in (3, 5, 9):
        for idx in range(3):
            h, _ = random_subgroup(n, 2, idx)
            for _ in range(5):
                g = full(n).random_element(rng)
                gi = inverse(g, n)
                hg = Subgroup(n, [conj(gi, x, n) for x in h.generators])
                v = atlas.enumerate_D(n)[rng.randrange(len(atlas.enumerate_D(n)))].v
                assert ram_v(h, apply(g, v, n)) == ram_v(hg, v)


# ---------------------------------------------------------------- E and F

def test_ram_E_F_extremes():
    n = 3
    for e in atlas.enumerate_E(n):
        assert ram_E(full(n), e) == 1
        assert ram_E(center(n), e) == 0
    for f in atlas.enumerate_F(n)[:50]:
        assert ram_F(full(n), f) == 1
        assert ram_F(center(n), f) == 0


def test_ram_E_standard_phi():
    n = 5
    h = Subgroup(n, [phi0(n), neg(IDENTITY, n)])
    hits = [e for e in atlas.enumerate_E(n) if ram_E(h, e)]
    # H is abelian, so the only H-conjugate of the standard pair is itself
    assert hits == [atlas.standard_E(n)]


def test_ram_F_standard_psi():
    n = 5
    h = Subgroup(n, [psi(0, n), neg(IDENTITY, n)])
    hits = [f for f in atlas.enumerate_F(n) if ram_F(h, f)]
    assert hits == [atlas.standard_F(n)]


def test_ram_E_level_mismatch():
    with pytest.raises(ValueError):
        ram_E(center(5), atlas.standard_E(3))


# ---------------------------------------------------------------- lines

def test_ram_line_full():
    n = 5
    for line in atlas.lines(n)[:20]:
        assert ram_line(full(n), line) == 1


def test_ram_line_in_divisor_printed_element():
    n = 5
    line = atlas.standard_line(n)
    u = reduce([[1, 0, 1, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], n)
    h = Subgroup(n, [neg(IDENTITY, n), u])
    # the a-entry is measured modulo Ram(v) for v = (0,1,0,0), the standard divisor
    side = atlas.standard_D(n)
    assert side in (line.a, line.b)
    assert ram_line_in_divisor(h, line, side) == 1
    assert ram_line(h, line) == 1


@pytest.mark.parametrize("a,c", [(3, 0), (3, 1), (1, 3), (0, 1), (6, 2)])
def test_ram_line_in_divisor_gcd_oracle(a, c):
    n = 9
    line = atlas.standard_line(n)
    assert (line.a.v, line.b.v) == ((0, 1, 0, 0), (1, 0, 0, 0))
    u = reduce([[1, 0, a, 0], [0, 1, 0, c], [0, 0, 1, 0], [0, 0, 0, 1]], n)
    h = Subgroup(n, [neg(IDENTITY, n), u])
    # inverse of the least gcd(a, n) over the elements of H of the printed shape
    g = min(gcd(k * a, n) for k in range(n))
    assert ram_line_in_divisor(h, line, line.a) == Fraction(1, g)


def test_ram_group_line_is_direct_sum():
    n = 5
    line = atlas.standard_line(n)
    a, b = line.a.v, line.b.v
    prods = {mul(transvection(a, i, n), transvection(b, j, n), n)
             for i in range(n) for j in range(n)}
    assert len(prods) == n * n
    for i in range(n):
        for j in range(n):
            ta, tb = transvection(a, i, n), transvection(b, j, n)
            assert mul(ta, tb, n) == mul(tb, ta, n)
    assert len(ram_group_line(full(n), line)) == n * n


def test_ram_line_invariant_under_h_conjugation():
    rng = random.Random(12)
    for n in (3, 9):
        h, _ = random_subgroup(n, 5, 1)
        for _ in range(1000 if n == 3 else 20):
            line = atlas.standard_line(n).act(full(n).random_element(rng))
            g = h.random_element(rng)
            assert ram_line(h, line) == ram_line(h, line.act(g))


def test_ram_line_at_most_one_sided_values():
    for n in (4, 9):
        for idx in range(3):
            h, _ = random_subgroup(n, 9, idx)
            rng = random.Random(idx)
            for _ in range(30):
                line = atlas.standard_line(n).act(full(n).random_element(rng))
                rl = ram_line(h, line)
                assert rl <= max(ram_line_in_divisor(h, line, line.a),
                                 ram_line_in_divisor(h, line, line.b))


# ---------------------------------------------------------------- triple points

def test_delta_trivial_and_full():
    n = 5
    pt = atlas.standard_triple(n)
    assert delta_at_triple(center(n), pt) == Fraction(1, n)
    vs = [d.v for d in pt.vs]
    h = Subgroup(n, [neg(IDENTITY, n)] + [transvection(v, 1, n) for v in vs])
    # every character acts, so only the pure n-th powers are invariant
    assert delta_at_triple(h, pt) == 1
    assert mult_bound_at_triple(h, pt) == 1
    from sp4lab.ramification import ram_weights_triple
    assert len(ram_weights_triple(h, pt)) == n**3


def test_delta_weights_111():
    n = 3
    pt = atlas.standard_triple(n)
    g = IDENTITY
    for d in pt.vs:
        g = mul(g, transvection(d.v, 1, n), n)
    h = Subgroup(n, [neg(IDENTITY, n), g])
    assert delta_at_triple(h, pt) == 1
    assert mult_bound_at_triple(h, pt) == Fraction(n**3, n)
    assert mult_exact_at_triple(h, pt) <= mult_bound_at_triple(h, pt)


def test_delta_monotone():
    n = 3
    pt = atlas.standard_triple(n)
    vs = [d.v for d in pt.vs]
    small = Subgroup(n, [neg(IDENTITY, n), transvection(vs[0], 1, n)])
    big = Subgroup(n, small.generators + [transvection(vs[1], 1, n)])
    assert delta_at_triple(small, pt) <= delta_at_triple(big, pt)


# ---------------------------------------------------------------- report

@pytest.mark.parametrize("n,idx", [(3, 0), (3, 1), (4, 2), (5, 3)])
def test_report_agrees_with_direct_invariants(n, idx):
    h, _ = random_subgroup(n, 21, idx)
    rep = ramification_report(h)
    rng = random.Random(idx)
    for d, r in rng.sample(rep.D, 10):
        assert r == ram_v(h, d.v)
    for line, rl, ra, rb in rng.sample(rep.lines(), 15):
        assert rl == ram_line(h, line)
        assert (ra, rb) == (ram_line_in_divisor(h, line, line.a),
                            ram_line_in_divisor(h, line, line.b))
    for pt, d, mb, me in rng.sample(rep.triples(), 8):
        assert (d, mb, me) == (delta_at_triple(h, pt), mult_bound_at_triple(h, pt),
                               mult_exact_at_triple(h, pt))
    assert len(rep.lines()) == rep.line_count == len(atlas.lines(n))
    assert len(rep.triples()) == rep.triple_count == len(atlas.triple_points(n))
    for mean in (rep.mean_D, rep.mean_E, rep.mean_F, rep.mean_line):
        assert 0 <= mean <= 1


def test_report_star_sum_one_point_per_orbit():
    n = 3
    h, _ = random_subgroup(n, 21, 1)
    rep = ramification_report(h)
    seen = set()
    total = 0
    for pt in atlas.triple_points(n):
        if pt in seen:
            continue
        orb = orbit(pt, h.generators, lambda g, x: x.act(g))
        seen.update(orb)
        total += mult_exact_at_triple(h, pt)
    assert rep.star_mult == Fraction(total, len(atlas.triple_points(n)))


def test_report_ram_values_are_p_powers():
    n = 9
    h, _ = random_subgroup(n, 3, 0)
    rep = ramification_report(h)
    allowed = {Fraction(1, 9), Fraction(1, 3), Fraction(1)}
    assert {r for _, r in rep.D} <= allowed


def test_report_needs_center_and_prime_power():
    with pytest.raises(ValueError):
        ramification_report(Subgroup(5, [phi0(5)]))
    with pytest.raises(ValueError):
        ramification_report(center(6))


def test_monotone_in_subgroup():
    n = 3
    small = Subgroup(n, [neg(IDENTITY, n), transvection((0, 1, 0, 0), 1, n)])
    big = Subgroup(n, small.generators + [phi0(n)])
    a, b = ramification_report(small), ramification_report(big)
    for (d1, r1), (d2, r2) in zip(a.D, b.D):
        assert d1 == d2 and r1 <= r2
    for (e1, r1), (e2, r2) in zip(a.E, b.E):
        assert r1 <= r2
    for x, y in zip(a.lines(), b.lines()):
        assert x[0] == y[0] and x[1] <= y[1]
    for x, y in zip(a.triples(), b.triples()):
        assert x[1] <= y[1]


# ---------------------------------------------------------------- bounds

def test_bound_full_group():
    for fam in ("D", "E", "DD", "F", "DDD"):
        v = bound_check(full(3).with_center(), fam)
        assert v.index == 1
        assert v.satisfied
    assert bound_check(full(3).with_center(), "D").epsilon == 1


def test_bound_transvection_closure():
    n = 3
    vs = [d.v for d in atlas.enumerate_D(n)]
    h = Subgroup(n, [transvection(v, 1, n) for v in vs]).with_center()
    v = bound_check(h, "D")
    assert v.epsilon == 1 and v.index == 1 and v.satisfied


def test_bound_value_shape():
    assert bound_value("D", Fraction(1), 2) == 2**5 * 2**72
    assert bound_value("D", Fraction(1), 3) == 2**5 * 3**45  # 3^45 < 2^72 < 3^46
    assert bound_expression("D", Fraction(1, 2), 2) == "2^5 * (1/2)^-2 * 2^114"
    inner, floor = 2**(11170 + 5950), 1
    while floor * 5 <= inner:
        floor *= 5
    assert bound_value("DDD", Fraction(1, 2), 5) == 2**69 * 2**34 * floor


def test_bound_strictness():
    from sp4lab.ramification import BOUND_SHAPES
    assert [BOUND_SHAPES[f][4] for f in ("D", "E", "DD", "F", "DDD")] == [
        True, True, False, False, False]


def test_bound_vacuous_at_zero():
    n = 3
    h = center(n)
    rep = ramification_report(h)
    assert rep.mean_E == 0
    v = verdict_from_report(rep, "E")
    assert v.vacuous and v.satisfied and v.bound is None


def test_bound_check_rejects():
    with pytest.raises(ValueError):
        bound_check(Subgroup(5, [phi0(5)]), "D")
    with pytest.raises(ValueError):
        verdict_from_report(ramification_report(center(3)), "Q")


@pytest.mark.slow
def test_small_sweep_satisfied():
    for n in (3, 5):
        for idx in range(5):
            h, _ = random_subgroup(n, 77, idx)
            rep = ramification_report(h)
            for fam in ("D", "E", "DD", "F", "DDD"):
                assert verdict_from_report(rep, fam).satisfied


# ---------------------------------------------------------------- identities

def test_boundE_printed_entry():
    p = {"x1": 1, "z1": 2, "x2": 3, "z2": 4}
    lhs, rhs = _boundE(p, 9)
    assert rhs[7] == 2  # 8 (4 - 6) = -16 = 2 mod 9
    assert lhs == rhs


def test_boundF_printed_matrix():
    lhs, rhs = _boundF({"b1": 1, "b2": 0}, 5)
    assert rhs == reduce([[1, 0, 1, 0], [0, 1, 0, -1], [0, 0, 1, 0], [0, 0, 0, 1]], 5)
    assert lhs == rhs


def test_boundD_printed_right_side():
    _, rhs = _boundD({"x": 0, "y": 0, "z": 1, "b": 1, "alpha": 1}, 5)
    assert rhs == reduce([[1, 0, 0, 0], [-1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 0, 1]], 5)


@pytest.mark.parametrize("n", [9, 25])
@pytest.mark.parametrize("name", sorted(IDENTITIES))
def test_printed_identities_hold(n, name):
    res = {r.name: r for r in verify_identities(n, 1000, 7)}[name]
    assert res.failures == 0, res.counterexamples


@pytest.mark.parametrize("n", [9, 25, 7])
@pytest.mark.parametrize("name", sorted(REPAIRED))
def test_repaired_identities_hold(n, name):
    rng = random.Random(name)
    names = REPAIRED[name][0]
    for _ in range(1000):
        params = {v: rng.randrange(n) for v in names}
        assert check_identity(name, params, n)


def test_verify_identities_is_seeded():
    a = verify_identities(9, 200, 3, include_repaired=True)
    b = verify_identities(9, 200, 3, include_repaired=True)
    assert a == b
    assert [r.name for r in a] == sorted(IDENTITIES, key=list(IDENTITIES).index) + list(REPAIRED)
    with pytest.raises(ValueError):
        verify_identities(2, 10, 0)
