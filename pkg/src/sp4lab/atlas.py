"""Boundary-stratum combinatorics of level n: +-vectors, cusps, E-pairs,
F-involutions, lines and triple points, with the natural Sp(4, Z/n) action."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd
from typing import Iterator, Sequence

from .modular import crt, factorize, free_basis, inv_mod, pivot_columns, prime_power_parts
from .symplectic import (
    Element,
    Vector,
    apply,
    canon_pm,
    inverse,
    is_primitive,
    mul,
    pcanon,
    phi0,
    psi,
    skew_form,
    standard_generators,
    symplectic_completion,
)

Basis = tuple  # two 4-tuples


def _check(n: int) -> None:
    if n < 3:
        raise ValueError(f"boundary strata need level n >= 3, got {n}")


# ---------------------------------------------------------------- planes

def plane_basis(vectors: Sequence[Vector], n: int) -> Basis | None:
    """Canonical basis of the span, or None if it is not a free rank-2 summand."""
    return free_basis(list(vectors), n, 2)


@lru_cache(maxsize=200_000)
def _pivots(basis: Basis, n: int) -> tuple:
    return tuple(pivot_columns(basis, n))


def plane_coords(basis: Basis, y: Vector, n: int) -> tuple[int, int]:
    """Coordinates of y in the canonical basis (valid when y lies in the plane)."""
    piv = _pivots(basis, n)
    qs = [q for q, _ in piv]
    c1 = crt([y[j[0]] % q for q, j in piv], qs)
    c2 = crt([y[j[1]] % q for q, j in piv], qs)
    return c1, c2


def in_plane(basis: Basis, y: Vector, n: int) -> bool:
    c1, c2 = plane_coords(basis, y, n)
    w1, w2 = basis
    return all((c1 * a + c2 * b - z) % n == 0 for a, b, z in zip(w1, w2, y))


def combine(basis: Basis, c: Sequence[int], n: int) -> Vector:
    w1, w2 = basis
    return tuple((c[0] * a + c[1] * b) % n for a, b in zip(w1, w2))


def _rref_free_planes(q: int) -> Iterator[Basis]:
    """All free rank-2 summands of (Z/q)^4, q a prime power, as canonical bases.

    Rows have a 1 at their pivot, 0 at the other pivot, arbitrary entries after
    the pivot and multiples of p before it.
    """
    p = min(factorize(q))
    mult = range(0, q, p)
    full = range(q)

    def rows(j, other):
        choices = []
        for k in range(4):
            if k == j:
                choices.append((1,))
            elif k == other:
                choices.append((0,))
            else:
                choices.append(full if k > j else mult)
        return itertools.product(*choices)

    for j1, j2 in itertools.combinations(range(4), 2):
        for r1 in rows(j1, j2):
            for r2 in rows(j2, j1):
                yield r1, r2


def free_planes(n: int, predicate=None) -> list[Basis]:
    """All free rank-2 summands of (Z/n)^4 satisfying ``predicate(basis, q)``
    componentwise, sorted."""
    parts = prime_power_parts(n)
    comps = []
    for q in parts:
        comps.append([b for b in _rref_free_planes(q) if predicate is None or predicate(b, q)])
    out = []
    for combo in itertools.product(*comps):
        out.append(tuple(
            tuple(crt([c[i][k] for c in combo], parts) for k in range(4)) for i in range(2)
        ))
    return sorted(out)


def lagrangian_planes(n: int) -> list[Basis]:
    return free_planes(n, lambda b, q: skew_form(b[0], b[1], q) == 0)


def act_plane(g: Element, basis: Basis, n: int) -> Basis:
    return plane_basis([apply(g, basis[0], n), apply(g, basis[1], n)], n)


# ---------------------------------------------------------------- strata types

@dataclass(frozen=True, order=True)
class DivisorD:
    """A primitive +-vector, stored as the lexicographically smaller sign."""

    v: Vector
    level: int

    def act(self, g: Element) -> "DivisorD":
        return DivisorD(canon_pm(apply(g, self.v, self.level), self.level), self.level)


def divisor_d(v: Sequence[int], n: int) -> DivisorD:
    v = tuple(x % n for x in v)
    if not is_primitive(v, n):
        raise ValueError(f"{v} is not primitive mod {n}")
    return DivisorD(canon_pm(v, n), n)


@dataclass(frozen=True, order=True)
class CuspPoint:
    """An isotropic plane W with a nondegenerate form f up to sign; f_value = +-f(w1, w2)."""

    basis: Basis
    f_value: int
    level: int

    def pair(self) -> tuple[Vector, Vector]:
        """A basis (a, b) of W with f(a, b) = 1."""
        n = self.level
        w1, w2 = self.basis
        ci = inv_mod(self.f_value, n)
        return w1, tuple(ci * x % n for x in w2)

    def act(self, g: Element) -> "CuspPoint":
        a, b = self.pair()
        n = self.level
        return cusp_from_pair(apply(g, a, n), apply(g, b, n), n)


def cusp_from_pair(a: Vector, b: Vector, n: int) -> CuspPoint:
    """The cusp (span(a,b), +-f) with f(a, b) = 1."""
    basis = plane_basis([a, b], n)
    if basis is None:
        raise ValueError("vectors do not span a free plane")
    if skew_form(a, b, n):
        raise ValueError("plane is not isotropic")
    x1, x2 = plane_coords(basis, a, n)
    y1, y2 = plane_coords(basis, b, n)
    det = (x1 * y2 - x2 * y1) % n
    c = inv_mod(det, n)
    return CuspPoint(basis, min(c, n - c) if n > 1 else 0, n)


@dataclass(frozen=True, order=True)
class DivisorE:
    """An unordered orthogonal splitting V = W1 + W2 into nondegenerate planes."""

    w1: Basis
    w2: Basis
    level: int

    def act(self, g: Element) -> "DivisorE":
        n = self.level
        return make_e(act_plane(g, self.w1, n), act_plane(g, self.w2, n), n)


def make_e(w1: Basis, w2: Basis, n: int) -> DivisorE:
    if w1 > w2:
        w1, w2 = w2, w1
    return DivisorE(w1, w2, n)


@dataclass(frozen=True, order=True)
class DivisorF:
    """An involution class in Sp/{+-1} conjugate to the standard psi."""

    g: Element
    level: int

    def act(self, h: Element) -> "DivisorF":
        n = self.level
        return DivisorF(pcanon(mul(mul(h, self.g, n), inverse(h, n), n), n), n)


@dataclass(frozen=True, order=True)
class LineLD:
    a: DivisorD
    b: DivisorD
    cusp: CuspPoint

    def act(self, g: Element) -> "LineLD":
        return make_line(apply(g, self.a.v, self.a.level), apply(g, self.b.v, self.a.level),
                         self.a.level)


def make_line(a: Vector, b: Vector, n: int) -> LineLD:
    a, b = canon_pm(a, n), canon_pm(b, n)
    cusp = cusp_from_pair(a, b, n)
    da, db = DivisorD(a, n), DivisorD(b, n)
    if da > db:
        da, db = db, da
    return LineLD(da, db, cusp)


@dataclass(frozen=True, order=True)
class TriplePoint:
    vs: tuple  # three DivisorD, sorted
    cusp: CuspPoint

    def act(self, g: Element) -> "TriplePoint":
        n = self.cusp.level
        return make_triple([apply(g, d.v, n) for d in self.vs], n)


def make_triple(vs: Sequence[Vector], n: int) -> TriplePoint:
    if not is_triple(vs, n):
        raise ValueError("vectors do not form a triple point")
    ds = tuple(sorted(DivisorD(canon_pm(v, n), n) for v in vs))
    return TriplePoint(ds, cusp_from_pair(ds[0].v, ds[1].v, n))


def is_line(a: Vector, b: Vector, n: int) -> bool:
    """v_a, v_b span an isotropic free plane (so f(v_a, v_b) = +-1 for its cusp)."""
    if not (is_primitive(a, n) and is_primitive(b, n)) or skew_form(a, b, n):
        return False
    return plane_basis([a, b], n) is not None


def is_triple(vs: Sequence[Vector], n: int) -> bool:
    a, b, c = [tuple(x % n for x in v) for v in vs]
    if not is_line(a, b, n):
        return False
    basis = plane_basis([a, b], n)
    if not in_plane(basis, c, n):
        return False
    ca, cb, cc = (plane_coords(basis, v, n) for v in (a, b, c))

    def det(x, y):
        return (x[0] * y[1] - x[1] * y[0]) % n

    d = det(ca, cb)
    for x, y in ((ca, cc), (cb, cc)):
        if det(x, y) not in (d, (-d) % n):
            return False
    return any(
        all((s1 * p + s2 * q + r) % n == 0 for p, q, r in zip(a, b, c))
        for s1 in (1, -1) for s2 in (1, -1)
    )


# ---------------------------------------------------------------- enumerations

def enumerate_D(n: int) -> list[DivisorD]:
    _check(n)
    out = []
    for v in itertools.product(range(n), repeat=4):
        if is_primitive(v, n) and v <= tuple(-x % n for x in v):
            out.append(DivisorD(v, n))
    return out


def enumerate_cusps(n: int) -> list[CuspPoint]:
    _check(n)
    units = sorted({min(c, n - c) for c in range(1, n) if gcd(c, n) == 1})
    return sorted(CuspPoint(b, c, n) for b in lagrangian_planes(n) for c in units)


def _plane_line_coords(n: int) -> list[tuple[Vector, Vector]]:
    """Unordered +-pairs of coordinate vectors forming a basis of (Z/n)^2."""
    def cpm(x):
        return min(x, ((-x[0]) % n, (-x[1]) % n))

    seen = set()
    out = []
    vecs = [(x, y) for x in range(n) for y in range(n) if gcd(gcd(x, y), n) == 1]
    for x in vecs:
        if cpm(x) != x:
            continue
        for y in vecs:
            if cpm(y) != y or y <= x:
                continue
            if gcd((x[0] * y[1] - x[1] * y[0]) % n, n) == 1:
                key = (x, y)
                if key not in seen:
                    seen.add(key)
                    out.append(key)
    return out


def lines(n: int) -> list[LineLD]:
    _check(n)
    coords = _plane_line_coords(n)
    out = []
    for basis in lagrangian_planes(n):
        for x, y in coords:
            out.append(make_line(combine(basis, x, n), combine(basis, y, n), n))
    return sorted(out)


def triple_points(n: int) -> list[TriplePoint]:
    _check(n)
    coords = _plane_line_coords(n)
    trip = set()
    for x, y in coords:
        for s in (1, -1):
            z = ((x[0] + s * y[0]) % n, (x[1] + s * y[1]) % n)
            trip.add(tuple(sorted(min(v, ((-v[0]) % n, (-v[1]) % n)) for v in (x, y, z))))
    out = []
    for basis in lagrangian_planes(n):
        for t in trip:
            vs = [canon_pm(combine(basis, c, n), n) for c in t]
            ds = tuple(sorted(DivisorD(v, n) for v in vs))
            out.append(TriplePoint(ds, cusp_from_pair(ds[0].v, ds[1].v, n)))
    return sorted(out)


def _projector(w: Basis, n: int) -> Element:
    """Symplectic projection onto a nondegenerate plane W = span(w1, w2)."""
    w1, w2 = w
    om = inv_mod(skew_form(w1, w2, n), n)
    cols = []
    for e in ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)):
        a, b = skew_form(e, w2, n), skew_form(e, w1, n)
        cols.append(tuple(om * (a * p - b * q) % n for p, q in zip(w1, w2)))
    return tuple(cols[j][i] for i in range(4) for j in range(4))


def complement(w: Basis, n: int) -> Basis:
    """The orthogonal complement of a nondegenerate plane."""
    p = _projector(w, n)
    vecs = []
    for j in range(4):
        col = [p[4 * i + j] for i in range(4)]
        e = [int(i == j) for i in range(4)]
        vecs.append(tuple((e[i] - col[i]) % n for i in range(4)))
    return plane_basis(vecs, n)


def enumerate_E(n: int) -> list[DivisorE]:
    _check(n)
    out = set()
    for w in free_planes(n, lambda b, q: gcd(skew_form(b[0], b[1], q), q) == 1):
        out.add(make_e(w, complement(w, n), n))
    return sorted(out)


def e_involution(e: DivisorE) -> Element:
    """The involution +1 on W1 and -1 on W2, as a canonical class mod +-1."""
    n = e.level
    w1, w2 = e.w1, e.w2
    if any(skew_form(a, b, n) for a in w1 for b in w2):
        raise ValueError("the two planes are not orthogonal")
    if gcd(skew_form(w1[0], w1[1], n), n) != 1 or gcd(skew_form(w2[0], w2[1], n), n) != 1:
        raise ValueError("the planes are not nondegenerate complements")
    p = _projector(w1, n)
    g = tuple((2 * x - (k % 5 == 0)) % n for k, x in enumerate(p))
    return pcanon(g, n)


def standard_D(n: int) -> DivisorD:
    return divisor_d((0, 1, 0, 0), n)


def standard_cusp(n: int) -> CuspPoint:
    return cusp_from_pair((1, 0, 0, 0), (0, 1, 0, 0), n)


def standard_E(n: int) -> DivisorE:
    return make_e(((1, 0, 0, 0), (0, 0, 1, 0)), ((0, 1, 0, 0), (0, 0, 0, 1)), n)


def standard_F(n: int) -> DivisorF:
    return DivisorF(pcanon(psi(0, n), n), n)


def standard_line(n: int) -> LineLD:
    return make_line((1, 0, 0, 0), (0, 1, 0, 0), n)


def standard_triple(n: int) -> TriplePoint:
    return make_triple([(0, 1, 0, 0), (-1, 1, 0, 0), (1, 0, 0, 0)], n)


def enumerate_F(n: int) -> list[DivisorF]:
    _check(n)
    start = standard_F(n)
    seen = {start}
    frontier = [start]
    gens = standard_generators(n)
    while frontier:
        nxt = []
        for f in frontier:
            for g in gens:
                h = f.act(g)
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
        frontier = nxt
    return sorted(seen)


def f_through_line(line: LineLD) -> list[DivisorF]:
    """The n involution divisors containing a line: conjugates of psi_b, b in Z/n."""
    n = line.a.level
    a, b = line.a.v, line.b.v
    if not is_line(a, b, n):
        raise ValueError("invalid line")
    g = symplectic_completion(a, b, n)
    gi = inverse(g, n)
    return sorted({DivisorF(pcanon(mul(mul(g, psi(t, n), n), gi, n), n), n) for t in range(n)})


def incidence_D_cusp(d: DivisorD, q: CuspPoint) -> bool:
    if d.level != q.level:
        raise ValueError("level mismatch")
    return in_plane(q.basis, d.v, d.level)


def incidence_E_D(e: DivisorE, d: DivisorD) -> bool:
    if d.level != e.level:
        raise ValueError("level mismatch")
    return in_plane(e.w1, d.v, d.level) or in_plane(e.w2, d.v, d.level)


FAMILIES = ("D", "cusp", "E", "F", "line", "triple")


@dataclass
class BoundaryAtlas:
    """Lazily enumerated strata of level n with incidence indexes."""

    level: int
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        _check(self.level)

    def family(self, name: str) -> list:
        if name not in self._cache:
            fn = {
                "D": enumerate_D, "cusp": enumerate_cusps, "E": enumerate_E,
                "F": enumerate_F, "line": lines, "triple": triple_points,
            }.get(name)
            if fn is None:
                raise ValueError(f"unknown family {name!r}; choose from {FAMILIES}")
            self._cache[name] = fn(self.level)
        return self._cache[name]

    def count(self, name: str) -> int:
        return len(self.family(name))

    def standard(self, name: str):
        return {
            "D": standard_D, "cusp": standard_cusp, "E": standard_E,
            "F": standard_F, "line": standard_line, "triple": standard_triple,
        }[name](self.level)

    def cusps_of(self, d: DivisorD) -> list[CuspPoint]:
        return [q for q in self.family("cusp") if incidence_D_cusp(d, q)]

    def divisors_at(self, q: CuspPoint) -> list[DivisorD]:
        return [d for d in self.family("D") if incidence_D_cusp(d, q)]

    def E_through(self, d: DivisorD) -> list[DivisorE]:
        return [e for e in self.family("E") if incidence_E_D(e, d)]


def _memoize(fn):
    """Cache a level -> list enumeration; callers receive a fresh list."""
    cached = lru_cache(maxsize=16)(lambda n: tuple(fn(n)))

    def wrapper(n: int) -> list:
        return list(cached(n))

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


enumerate_D = _memoize(enumerate_D)
enumerate_cusps = _memoize(enumerate_cusps)
enumerate_E = _memoize(enumerate_E)
enumerate_F = _memoize(enumerate_F)
lines = _memoize(lines)
triple_points = _memoize(triple_points)
lagrangian_planes = _memoize(lagrangian_planes)


def act(g: Element, obj):
    """Apply a group element to any stratum object."""
    return obj.act(g)


def line_count_formula(n: int) -> int:
    """2^-3 n^7 (1 - p^-4)(1 - p^-2), extended multiplicatively over n's prime powers."""
    from .modular import factorize

    num = n ** 7
    for p in factorize(n):
        num = num // p ** 6 * (p ** 4 - 1) * (p ** 2 - 1)
    return num // 8


def d_count_formula(n: int) -> int:
    from .modular import factorize

    num = n ** 4
    for p in factorize(n):
        num = num // p ** 4 * (p ** 4 - 1)
    return num // 2
