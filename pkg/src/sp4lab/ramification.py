"""Ramification invariants of a subgroup H, index-bound verdicts and the matrix identities
behind them."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Sequence

from . import atlas
from .atlas import (
    CuspPoint,
    DivisorD,
    DivisorE,
    DivisorF,
    LineLD,
    TriplePoint,
    combine,
    e_involution,
    lagrangian_planes,
    make_line,
    plane_coords,
)
from .chain import Subgroup
from .modular import howell_form, inv_mod, p_floor, prime_power
from .symplectic import (
    Element,
    Vector,
    apply,
    canon_pm,
    identity,
    inverse,
    mul,
    neg,
    reduce,
    sp4_order,
    symplectic_completion,
    transvection,
)
from .toric import ToricSingularity, delta, mult_exact, mult_upper_bound

FAMILIES = ("D", "E", "DD", "F", "DDD")


def _need_prime_power(n: int) -> tuple[int, int]:
    pp = prime_power(n)
    if pp is None:
        raise ValueError(f"level {n} is not a prime power")
    return pp


def _need_center(h: Subgroup) -> None:
    if not h.contains(neg(identity(h.level), h.level)):
        raise ValueError("the subgroup must contain -1")


# ---------------------------------------------------------------- direct invariants

def ram_group_v(h: Subgroup, v: Vector) -> list[int]:
    """All alpha with r_{v, alpha} in H."""
    n = h.level
    return [a for a in range(n) if h.contains(transvection(v, a, n))]


def ram_v(h: Subgroup, v: Vector) -> Fraction:
    """|Ram_H(v)| / n."""
    _need_prime_power(h.level)
    return Fraction(len(ram_group_v(h, v)), h.level)


def ram_E(h: Subgroup, e: DivisorE) -> int:
    if e.level != h.level:
        raise ValueError("level mismatch")
    g = e_involution(e)
    return int(h.contains(g) or h.contains(neg(g, h.level)))


def ram_F(h: Subgroup, f: DivisorF) -> int:
    if f.level != h.level:
        raise ValueError("level mismatch")
    return int(h.contains(f.g) or h.contains(neg(f.g, h.level)))


def ram_group_line(h: Subgroup, line: LineLD) -> list[tuple[int, int]]:
    """Pairs (alpha, beta) with r_{a,alpha} r_{b,beta} in H."""
    n = h.level
    a, b = line.a.v, line.b.v
    ta = [transvection(a, k, n) for k in range(n)]
    tb = [transvection(b, k, n) for k in range(n)]
    return [(i, j) for i in range(n) for j in range(n) if h.contains(mul(ta[i], tb[j], n))]


def _max_order(pairs, n: int) -> int:
    return max(n // gcd(gcd(a, b), n) for a, b in pairs)


def ram_line(h: Subgroup, line: LineLD) -> Fraction:
    """Maximal order of an element of Ram_H(l), divided by n."""
    n = h.level
    _need_prime_power(n)
    return Fraction(_max_order(ram_group_line(h, line), n), n)


def ram_line_in_divisor(h: Subgroup, line: LineLD, side: DivisorD) -> Fraction:
    """|Ram_H(l)| / (|Ram_H(l) meet Ram_G(v_side)| n)."""
    n = h.level
    _need_prime_power(n)
    pairs = ram_group_line(h, line)
    if side == line.a:
        inside = [p for p in pairs if p[1] == 0]
    elif side == line.b:
        inside = [p for p in pairs if p[0] == 0]
    else:
        raise ValueError("side is not one of the line's divisors")
    return Fraction(len(pairs), len(inside) * n)


def _triple_frame(vs: Sequence[Vector], n: int) -> tuple[Vector, Vector, Vector]:
    """Order the triple as (x, y, z) with z = x + y exactly (after fixing signs)."""
    a, b, c = vs
    for s1 in (1, -1):
        for s2 in (1, -1):
            if all((s1 * p + s2 * q - r) % n == 0 for p, q, r in zip(a, b, c)):
                return a, tuple(s2 * s1 * q % n for q in b), c
    raise ValueError("not a triple point")


def ram_weights_triple(h: Subgroup, point: TriplePoint) -> list[tuple[int, int, int]]:
    """Weights (alpha, beta, gamma) with r_{a,alpha} r_{b,beta} r_{c,gamma} in H."""
    n = h.level
    vs = [d.v for d in point.vs]
    t = [[transvection(v, k, n) for k in range(n)] for v in vs]
    out = []
    for i in range(n):
        for j in range(n):
            ij = mul(t[0][i], t[1][j], n)
            for k in range(n):
                if h.contains(mul(ij, t[2][k], n)):
                    out.append((i, j, k))
    return out


def ram_toric_triple(h: Subgroup, point: TriplePoint) -> ToricSingularity:
    return ToricSingularity.make(h.level, ram_weights_triple(h, point))


def delta_at_triple(h: Subgroup, point: TriplePoint) -> Fraction:
    _need_prime_power(h.level)
    return delta(ram_toric_triple(h, point))


def mult_bound_at_triple(h: Subgroup, point: TriplePoint) -> Fraction:
    _need_prime_power(h.level)
    return mult_upper_bound(ram_toric_triple(h, point))


def mult_exact_at_triple(h: Subgroup, point: TriplePoint) -> int:
    _need_prime_power(h.level)
    return mult_exact(ram_toric_triple(h, point))


# ---------------------------------------------------------------- report

@dataclass
class PlaneData:
    """Ramification data on one H-orbit of isotropic planes, computed at a representative."""

    basis: tuple
    orbit_size: int
    h1: tuple  # Howell generators of H meet U_W, as (s11, s12, s22)
    line_values: list  # per coordinate line: (ram_line, ram_in_x, ram_in_y)
    triple_values: list  # per coordinate triple: (delta, mult_bound, mult_exact)
    triple_orbits: list  # per Stab_H(W)-orbit on coordinate triples: a member index
    transversal: dict = field(repr=False, default_factory=dict)


@dataclass
class RamificationReport:
    level: int
    order: int
    index: int
    D: list
    E: list
    F: list
    planes: list
    line_coords: list
    triple_coords: list
    mean_D: Fraction
    mean_E: Fraction
    mean_F: Fraction
    mean_line: Fraction
    mean_delta: Fraction
    mean_mult_bound: Fraction
    mean_mult_exact: Fraction
    star_mult: Fraction  # sum over H-orbits of triple points of mult, over the number of points
    line_count: int
    triple_count: int

    def lines(self) -> list:
        """Per-line rows (LineLD, ram_line, ram in side a, ram in side b)."""
        n = self.level
        out = []
        for pd in self.planes:
            for basis, t in pd.transversal.items():
                for (x, y), (rl, rx, ry) in zip(self.line_coords, pd.line_values):
                    vx = apply(t, combine(pd.basis, x, n), n)
                    vy = apply(t, combine(pd.basis, y, n), n)
                    line = make_line(vx, vy, n)
                    if line.a.v == canon_pm(vx, n):
                        out.append((line, rl, rx, ry))
                    else:
                        out.append((line, rl, ry, rx))
        return sorted(out)

    def triples(self) -> list:
        """Per-point rows (TriplePoint, delta, mult bound, exact mult)."""
        n = self.level
        out = []
        for pd in self.planes:
            for basis, t in pd.transversal.items():
                for coords, vals in zip(self.triple_coords, pd.triple_values):
                    vs = [apply(t, combine(pd.basis, c, n), n) for c in coords]
                    out.append((atlas.make_triple(vs, n),) + tuple(vals))
        return sorted(out)


def _coordinate_lines(n: int) -> list:
    return atlas._plane_line_coords(n)


def _coordinate_triples(n: int) -> list:
    def cpm(v):
        return min(v, ((-v[0]) % n, (-v[1]) % n))

    out = set()
    for x, y in _coordinate_lines(n):
        for s in (1, -1):
            z = ((x[0] + s * y[0]) % n, (x[1] + s * y[1]) % n)
            out.add(tuple(sorted(cpm(v) for v in (x, y, z))))
    return sorted(out)


def _sym_of(g_w: Element, g_wi: Element, h: Element, n: int) -> tuple[int, int, int]:
    u = mul(mul(g_wi, h, n), g_w, n)
    return u[2], u[3], u[7]


def _gl2_inverse(x, y, n):
    det = (x[0] * y[1] - x[1] * y[0]) % n
    di = inv_mod(det, n)
    return ((y[1] * di % n, -y[0] * di % n), (-x[1] * di % n, x[0] * di % n))


def _transform(s: tuple[int, int, int], xi, n: int) -> tuple[int, int, int]:
    """S' = X^-1 S X^-T for S = [[s11, s12], [s12, s22]]; returns (s'11, s'12, s'22)."""
    a, b, c = s
    (p, q), (r, t) = xi
    m11 = p * a + q * b
    m12 = p * b + q * c
    m21 = r * a + t * b
    m22 = r * b + t * c
    return ((m11 * p + m12 * q) % n, (m11 * r + m12 * t) % n, (m21 * r + m22 * t) % n)


def _span_elements(rows, n: int) -> list[tuple[int, int, int]]:
    return ToricSingularity(n, tuple(rows)).elements() if rows else [(0, 0, 0)]


def _triple_signs(t, n):
    x, y, z = t
    for e1 in (1, -1):
        for e2 in (1, -1):
            if ((e1 * x[0] + e2 * y[0] - z[0]) % n, (e1 * x[1] + e2 * y[1] - z[1]) % n) == (0, 0):
                return e1 * e2
    raise ValueError("not a coordinate triple")


def _plane_orbits(h: Subgroup) -> list[tuple[tuple, dict, list]]:
    """H-orbits on Lagrangian planes: (representative, transversal, Stab_H(W) generators)."""
    n = h.level
    seen: set = set()
    out = []
    gens = h.generators
    one = identity(n)
    for w in lagrangian_planes(n):
        if w in seen:
            continue
        trans = {w: one}
        queue = [w]
        stab = set()
        i = 0
        while i < len(queue):
            cur = queue[i]
            i += 1
            t = trans[cur]
            for s in gens:
                img = atlas.act_plane(s, cur, n)
                st = mul(s, t, n)
                if img not in trans:
                    trans[img] = st
                    queue.append(img)
                else:
                    sg = mul(inverse(trans[img], n), st, n)
                    if sg != one:
                        stab.add(sg)
        seen.update(trans)
        out.append((w, trans, sorted(stab)))
    return out


def _gl2_of(g: Element, basis, n: int):
    """Matrix of g restricted to the plane, in its canonical basis (columns)."""
    c1 = plane_coords(basis, apply(g, basis[0], n), n)
    c2 = plane_coords(basis, apply(g, basis[1], n), n)
    return (c1, c2)


def _triple_orbit_reps(triples, mats, n):
    def cpm(v):
        return min(v, ((-v[0]) % n, (-v[1]) % n))

    index = {t: i for i, t in enumerate(triples)}
    seen = [False] * len(triples)
    reps = []
    for i, t in enumerate(triples):
        if seen[i]:
            continue
        reps.append(i)
        seen[i] = True
        stack = [t]
        while stack:
            cur = stack.pop()
            for c1, c2 in mats:
                img = tuple(sorted(cpm(((c1[0] * v[0] + c2[0] * v[1]) % n,
                                        (c1[1] * v[0] + c2[1] * v[1]) % n)) for v in cur))
                j = index[img]
                if not seen[j]:
                    seen[j] = True
                    stack.append(img)
    return reps


def _plane_values(h1, n, linv, tinv, tsigns, toric_cache):
    """Per coordinate line and triple values for a given H meet U_W."""
    elems = _span_elements(h1, n)
    line_vals = []
    for xi in linv:
        pairs = []
        for s in elems:
            a, b, c = _transform(s, xi, n)
            if b == 0:
                pairs.append((a, c))
        on_x = sum(1 for p in pairs if p[1] == 0)
        on_y = sum(1 for p in pairs if p[0] == 0)
        line_vals.append((Fraction(_max_order(pairs, n), n),
                          Fraction(len(pairs), on_x * n), Fraction(len(pairs), on_y * n)))
    triple_vals = []
    for xi, eps in zip(tinv, tsigns):
        ws = []
        for s in h1:
            a, b, c = _transform(s, xi, n)
            u = eps * b
            ws.append(((a - u) % n, (c - u) % n, u % n))
        tor = ToricSingularity.make(n, ws)
        if tor not in toric_cache:
            toric_cache[tor] = (delta(tor), mult_upper_bound(tor), mult_exact(tor))
        triple_vals.append(toric_cache[tor])
    return line_vals, triple_vals


def ramification_report(h: Subgroup) -> RamificationReport:
    """All ramification invariants of H (level a prime power, H containing -1)."""
    n = h.level
    _need_prime_power(n)
    _need_center(h)
    order = h.order()
    index_ = sp4_order(n) // order

    d_rows = [(d, Fraction(len(ram_group_v(h, d.v)), n)) for d in atlas.enumerate_D(n)]
    e_rows = [(e, ram_E(h, e)) for e in atlas.enumerate_E(n)]
    f_rows = [(f, ram_F(h, f)) for f in atlas.enumerate_F(n)]

    lcoords = _coordinate_lines(n)
    tcoords = _coordinate_triples(n)
    tsigns = [_triple_signs(t, n) for t in tcoords]
    linv = [_gl2_inverse(x, y, n) for x, y in lcoords]
    tinv = [_gl2_inverse(t[0], t[1], n) for t in tcoords]
    planes = []
    by_h1: dict = {}
    by_mats: dict = {}
    toric_cache: dict = {}
    for rep, trans, stab in _plane_orbits(h):
        g_w = symplectic_completion(rep[0], rep[1], n)
        g_wi = inverse(g_w, n)
        svecs = [_sym_of(g_w, g_wi, s, n) for s in h.pointwise_stabilizer(rep)]
        h1 = howell_form(svecs, n) if svecs else ()
        if h1 not in by_h1:
            by_h1[h1] = _plane_values(h1, n, linv, tinv, tsigns, toric_cache)
        line_vals, triple_vals = by_h1[h1]
        mats = tuple(sorted({_gl2_of(g, rep, n) for g in stab}))
        if mats not in by_mats:
            by_mats[mats] = _triple_orbit_reps(tcoords, mats, n)
        planes.append(PlaneData(rep, len(trans), h1, line_vals, triple_vals, by_mats[mats], trans))

    n_planes = sum(p.orbit_size for p in planes)
    line_count = n_planes * len(lcoords)
    triple_count = n_planes * len(tcoords)
    sums = {k: (sum(v[0] for v in lv), sum(v[0] for v in tv), sum(v[1] for v in tv),
                sum(v[2] for v in tv)) for k, (lv, tv) in by_h1.items()}
    sum_line = sum(p.orbit_size * sums[p.h1][0] for p in planes)
    sum_delta = sum(p.orbit_size * sums[p.h1][1] for p in planes)
    sum_mb = sum(p.orbit_size * sums[p.h1][2] for p in planes)
    sum_me = sum(p.orbit_size * sums[p.h1][3] for p in planes)
    star = sum(p.triple_values[i][2] for p in planes for i in p.triple_orbits)

    def mean(rows):
        return Fraction(sum(r[1] for r in rows), len(rows))

    return RamificationReport(
        level=n, order=order, index=index_, D=d_rows, E=e_rows, F=f_rows, planes=planes,
        line_coords=lcoords, triple_coords=tcoords,
        mean_D=mean(d_rows), mean_E=mean(e_rows), mean_F=mean(f_rows),
        mean_line=Fraction(sum_line, line_count), mean_delta=Fraction(sum_delta, triple_count),
        mean_mult_bound=Fraction(sum_mb, triple_count),
        mean_mult_exact=Fraction(sum_me, triple_count),
        star_mult=Fraction(star, triple_count),
        line_count=line_count, triple_count=triple_count,
    )


# ---------------------------------------------------------------- bounds

@dataclass(frozen=True)
class BoundVerdict:
    family: str
    epsilon: Fraction
    bound: Fraction | None  # None when the printed expression is undefined ([x]_p with x < 1)
    index: int
    strict: bool
    satisfied: bool
    vacuous: bool = False
    bound_expr: str | None = None  # the bound written as 2^a * eps^-k * p^e


# (power of 2, power of eps^-1, inner power of 2, inner power of eps^-1, strict)
BOUND_SHAPES = {
    "D": (5, 2, 72, 42, True),
    "E": (7, 2, 246, 130, True),
    "DD": (11, 2, 1020, 350, False),
    "F": (13, 2, 1722, 702, False),
    "DDD": (69, 34, 11170, 5950, False),
}


def bound_value(family: str, eps: Fraction, p: int) -> Fraction | None:
    """c1 eps^-k1 [c2 eps^-k2]_p exactly; None if the bracket argument is below 1."""
    a, k1, b, k2, _ = BOUND_SHAPES[family]
    eps = Fraction(eps)
    inner = Fraction(2) ** b * eps ** -k2
    if inner < 1:
        return None
    return Fraction(2) ** a * eps ** -k1 * p_floor(inner, p).value


def bound_expression(family: str, eps: Fraction, p: int) -> str | None:
    """The exact bound as a short power-product string."""
    a, k1, b, k2, _ = BOUND_SHAPES[family]
    eps = Fraction(eps)
    inner = Fraction(2) ** b * eps ** -k2
    if inner < 1:
        return None
    return f"2^{a} * ({eps})^-{k1} * {p}^{p_floor(inner, p).exponent}"


def family_epsilon(report: RamificationReport, family: str) -> Fraction:
    return {
        "D": report.mean_D, "E": report.mean_E, "DD": report.mean_line,
        "F": report.mean_F, "DDD": report.star_mult,
    }[family]


def verdict_from_report(report: RamificationReport, family: str) -> BoundVerdict:
    if family not in BOUND_SHAPES:
        raise ValueError(f"unknown family {family!r}")
    p, _ = _need_prime_power(report.level)
    eps = family_epsilon(report, family)
    strict = BOUND_SHAPES[family][4]
    if eps == 0:
        return BoundVerdict(family, eps, None, report.index, strict, True, vacuous=True)
    bound = bound_value(family, eps, p)
    if bound is None:
        return BoundVerdict(family, eps, None, report.index, strict, False)
    ok = report.index < bound if strict else report.index <= bound
    return BoundVerdict(family, eps, bound, report.index, strict, ok,
                        bound_expr=bound_expression(family, eps, p))


def bound_check(h: Subgroup, family: str, report: RamificationReport | None = None) -> BoundVerdict:
    """Compare |G:H| with the printed bound evaluated at the achieved family mean."""
    _need_prime_power(h.level)
    _need_center(h)
    report = report or ramification_report(h)
    return verdict_from_report(report, family)


# ---------------------------------------------------------------- identities

def _r(x, y, z, al, n):
    return reduce([[1 + al * x * z, 0, -al * x * x, -al * x * y],
                   [al * y * z, 1, -al * x * y, -al * y * y],
                   [al * z * z, 0, 1 - al * x * z, -al * y * z],
                   [0, 0, 0, 1]], n)


def _boundD(p, n, corrected=False):
    x, y, z, b, al = p["x"], p["y"], p["z"], p["b"], p["alpha"]
    r = _r(x, y, z, al, n)
    tb = reduce([[1, 0, 0, b], [0, 1, b, 0], [0, 0, 1, 0], [0, 0, 0, 1]], n)
    if corrected:
        corner = b * al * z * (-2 * y - b * z - b * al * x * z * z)
    else:
        corner = b * al * z * (-2 * y + b * z + b * al * x * z * z)
    m = reduce([[1, 0, 0, -b - b * al * x * z], [0, 1, -b - b * al * x * z, corner],
                [0, 0, 1, 0], [0, 0, 0, 1]], n)
    lhs = mul(mul(mul(r, tb, n), inverse(r, n), n), m, n)
    rhs = reduce([[1, 0, 0, 0], [-b * al * z * z, 1, 0, 0], [0, 0, 1, b * al * z * z],
                  [0, 0, 0, 1]], n)
    return lhs, rhs


def _phi_xz(x, z, n):
    return reduce([[1, 0, 0, -2 * x], [-2 * z, -1, 2 * x, 0], [0, 0, 1, -2 * z], [0, 0, 0, -1]], n)


def _boundE(p, n):
    x1, z1, x2, z2 = p["x1"], p["z1"], p["x2"], p["z2"]
    t = mul(mul(_phi_xz(x1, z1, n), _phi_xz(0, 0, n), n), _phi_xz(x2, z2, n), n)
    lhs = mul(t, t, n)
    rhs = reduce([[1, 0, 0, 0], [0, 1, 0, 8 * (x1 * z2 - x2 * z1)], [0, 0, 1, 0], [0, 0, 0, 1]], n)
    return lhs, rhs


def _rho1(d, e, f, a0, c, n):
    return reduce([[1 + d * f * a0, 0, -d * d * a0, -d * e * a0],
                   [e * f * a0, 1, -d * e * a0, -e * a0 * a0 + c],
                   [f * f * a0, 0, 1 - d * f * a0, -e * f * a0],
                   [0, 0, 0, 1]], n)


def _boundDD(p, n, sign=-1):
    X, st = p["x"], p["star"]
    rho = reduce([[1, 0, 0, X], [0, 1, X, st], [0, 0, 1, 0], [0, 0, 0, 1]], n)
    r1 = _rho1(p["d"], p["e"], p["f"], p["a0"], p["c"], n)
    r1i, rhoi = inverse(r1, n), inverse(rho, n)
    lhs = identity(n)
    for m in (r1, rho, r1i, rhoi, r1, rhoi, r1i, rho):
        lhs = mul(lhs, m, n)
    rhs = reduce([[1, 0, 0, 0], [0, 1, 0, sign * 2 * X * X * p["f"] ** 2 * p["a0"]],
                  [0, 0, 1, 0], [0, 0, 0, 1]], n)
    return lhs, rhs


def _psi_b(b, n):
    return reduce([[0, 1, 0, b], [1, 0, -b, 0], [0, 0, 0, 1], [0, 0, 1, 0]], n)


def _boundF(p, n):
    b1, b2 = p["b1"], p["b2"]
    lhs = mul(_psi_b(b1, n), _psi_b(b2, n), n)
    rhs = reduce([[1, 0, b1 - b2, 0], [0, 1, 0, b2 - b1], [0, 0, 1, 0], [0, 0, 0, 1]], n)
    return lhs, rhs


IDENTITIES = {
    "boundD": (("x", "y", "z", "b", "alpha"), _boundD),
    "boundE": (("x1", "z1", "x2", "z2"), _boundE),
    "boundDD": (("x", "star", "d", "e", "f", "a0", "c"), _boundDD),
    "boundF": (("b1", "b2"), _boundF),
}

# Variants with the misprints repaired: the fourth factor's corner entry in the
# first identity, and the sign of the result in the third.
REPAIRED = {
    "boundD_repaired": (IDENTITIES["boundD"][0], lambda p, n: _boundD(p, n, corrected=True)),
    "boundDD_repaired": (IDENTITIES["boundDD"][0], lambda p, n: _boundDD(p, n, sign=1)),
}


def check_identity(name: str, params: dict, n: int) -> bool:
    table = {**IDENTITIES, **REPAIRED}
    _, fn = table[name]
    lhs, rhs = fn(params, n)
    return lhs == rhs


@dataclass
class IdentityResult:
    name: str
    level: int
    trials: int
    failures: int
    counterexamples: list  # first few failing parameter dicts


def verify_identities(n: int, trials: int, seed: int, include_repaired: bool = False,
                      keep: int = 5) -> list[IdentityResult]:
    """Evaluate each identity on ``trials`` seeded random parameter draws mod n."""
    if n < 3:
        raise ValueError("level must be at least 3")
    table = dict(IDENTITIES)
    if include_repaired:
        table.update(REPAIRED)
    out = []
    for k, (name, (names, fn)) in enumerate(table.items()):
        rng = random.Random(f"{seed}:{n}:{name}")
        fails = []
        count = 0
        for _ in range(trials):
            params = {v: rng.randrange(n) for v in names}
            lhs, rhs = fn(params, n)
            if lhs != rhs:
                count += 1
                if len(fails) < keep:
                    fails.append(params)
        out.append(IdentityResult(name, n, trials, count, fails))
    return out
