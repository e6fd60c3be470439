"""Acceptance checks, one test per criterion.

Each test prints a single PASS or FAIL line; run with ``pytest tests/test_acceptance.py -s``
to see them.
"""

import io
import itertools
import random
from fractions import Fraction

import pytest

from sp4lab import cli
from sp4lab.atlas import BoundaryAtlas, d_count_formula, enumerate_D, line_count_formula, lines
from sp4lab.chain import Subgroup, orbit
from sp4lab.congruence import LevelSplit, crt_join, crt_split, verify_kernel_generation
from sp4lab.experiments import run_sweep
from sp4lab.quartic import (
    PHI0,
    QuarticPoint,
    conjugates_to_phi0,
    iinverse,
    imul,
    involution_normal_form,
    on_quartic,
    perm_order,
    random_gamma1,
    reid_tai,
    stab_ii_relations,
    stabilizer,
    tangent_weights,
)
from sp4lab.ramification import verify_identities
from sp4lab.symplectic import is_symplectic, mul, skew_form, standard_generators
from sp4lab.toric import ToricSingularity, census, mult_exact, mult_upper_bound


def verdict(k, text, ok):
    print(f"\n{'PASS' if ok else 'FAIL'} criterion {k}: {text}")
    assert ok, text


def test_criterion_1_counts():
    counts = {n: len(enumerate_D(n)) for n in (3, 4, 5)}
    ok = counts == {3: 40, 4: 120, 5: 312}
    ok &= all(d_count_formula(n) == c for n, c in counts.items())
    n = 3
    ds = [d.v for d in enumerate_D(n)]
    pairs = sum(1 for v, w in itertools.combinations(ds, 2) if skew_form(v, w, n) == 0)
    ok &= len(lines(n)) == line_count_formula(n) == pairs == 240
    verdict(1, f"|D| = {counts}, |lines(3)| = {len(lines(3))}, pair scan = {pairs}", ok)


def test_criterion_2_transitivity():
    bad = []
    for n in (3, 4, 5):
        at = BoundaryAtlas(n)
        gens = standard_generators(n)
        for name in ("D", "cusp", "E", "F", "line", "triple"):
            orb = orbit(at.standard(name), gens, lambda g, x: x.act(g))
            if set(orb) != set(at.family(name)):
                bad.append((n, name))
    verdict(2, f"single orbits for six families at n = 3, 4, 5; failures {bad}", not bad)


def test_criterion_3_identities():
    failing = {}
    for n in (9, 25):
        for r in verify_identities(n, 10_000, 2024):
            if r.failures:
                failing[f"{r.name}@{n}"] = r.failures
    verdict(3, f"10^4 random checks per identity at n = 9, 25; failures {failing}", not failing)


def test_criterion_4_sweep():
    rows = run_sweep((3, 5, 9), 67, seed=4)
    bad = [(r.level, r.index_in_sweep) for r in rows if not r.satisfied]
    verdict(4, f"{len(rows)} seeded subgroups, {len(bad)} with a violated bound", len(rows) >= 200
            and not bad)


def test_criterion_5_toric():
    ok = mult_exact(ToricSingularity.make(2, [(1, 1, 1)])) == 4
    rng = random.Random(5)
    worse = 0
    for _ in range(1000):
        n = rng.choice((2, 3, 4, 5, 6, 7, 8, 9))
        ws = [tuple(rng.randrange(n) for _ in range(3)) for _ in range(rng.randint(1, 2))]
        h = ToricSingularity.make(n, ws)
        if mult_exact(h) > mult_upper_bound(h):
            worse += 1
    cen = [census(p, s, Fraction(e)) for p, s in ((2, 3), (3, 2)) for e in ("1/2", "1/4")]
    cen_ok = all(c.satisfied for c in cen)
    verdict(5, f"mult(Z/2; 1,1,1) ok = {ok}, bound violations {worse}/1000, "
               f"census counts {[(c.p, c.s, str(c.epsilon), c.count) for c in cen]}",
            ok and worse == 0 and cen_ok)


def test_criterion_6_quartic():
    x = QuarticPoint.parse("0, theta, theta^2, theta^3, theta^4, 1")
    ok = on_quartic(x)
    fives = [s for s in stabilizer(x) if perm_order(s.sigma) == 5]
    ok &= bool(fives)
    for s in fives:
        w, r = tangent_weights(x, s)
        ok &= reid_tai([(a, r) for a in w], terminal=True)
    ok &= stab_ii_relations().ok
    rng = random.Random(6)
    trips = 0
    for _ in range(20):
        g = random_gamma1(rng)
        m = imul(imul(g, PHI0), iinverse(g))
        trips += conjugates_to_phi0(m, involution_normal_form(m))
    verdict(6, f"theta point, 5-cycle terminal, stab order 16, normal forms {trips}/20",
            ok and trips == 20)


def test_criterion_7_congruence():
    split = LevelSplit.of(15, 5)
    full = Subgroup.full(15)
    rng = random.Random(7)
    good = split.orders_multiply()
    for _ in range(1000):
        g, h = full.random_element(rng), full.random_element(rng)
        a, b = crt_split(g, split)
        good &= crt_join(a, b, split) == g and is_symplectic(a, 3) and is_symplectic(b, 5)
        gh = crt_split(mul(g, h, 15), split)
        ga, gb = crt_split(h, split)
        good &= gh == (mul(a, ga, 3), mul(b, gb, 5))
    ks = [verify_kernel_generation(p, 2) for p in (5, 7)]
    verdict(7, f"crt round trips at 15 ok = {bool(good)}, kernel layers "
               f"{[(k.p, k.rank, k.layer_dimension) for k in ks]}",
            good and all(k.ok for k in ks))


def _bytes(argv):
    out = io.StringIO()
    code = cli.run(argv, out)
    return code, out.getvalue()


@pytest.mark.parametrize("fmt", ["json", "csv"])
def test_criterion_8_thread_invariance(fmt):
    commands = [
        ["verify-identities", "--level", "9", "--trials", "500", "--seed", "8"],
        ["bound-check", "--sweep", "3", "--levels", "3,5", "--seed", "8"],
        ["toric", "census", "--p", "3", "--s", "2", "--epsilon", "1/4"],
    ]
    diffs = []
    for c in commands:
        one = _bytes(c + ["--format", fmt, "--threads", "1"])
        three = _bytes(c + ["--format", fmt, "--threads", "3"])
        if one != three:
            diffs.append(c[0])
    verdict(8, f"{fmt} output identical for 1 and 3 workers; differing {diffs}", not diffs)
