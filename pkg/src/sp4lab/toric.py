"""Quotients of affine 3-space by finite abelian diagonal groups.

A group H1 in (Z/n)^3 acts by x_i -> zeta^{w_i} x_i for each weight vector w.
Monomials x^l are invariant when l . w = 0 mod n for every generator.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Callable, Hashable, Sequence

import numpy as np
from scipy.spatial import ConvexHull

from .modular import howell_form, is_prime, p_floor

MULT_CAP = 32


@dataclass(frozen=True)
class ToricSingularity:
    """Modulus n and a canonical (Howell) generating set of H1 in (Z/n)^3."""

    n: int
    weights: tuple

    @classmethod
    def make(cls, n: int, weights: Sequence[Sequence[int]]) -> "ToricSingularity":
        if n < 1:
            raise ValueError("modulus must be positive")
        rows = [tuple(int(x) % n for x in w) for w in weights if len(w) == 3]
        if len(rows) != len(weights):
            raise ValueError("weights must be triples")
        return cls(n, howell_form(rows, n) if rows else ())

    def order(self) -> int:
        out = 1
        for row in self.weights:
            piv = next(x for x in row if x)
            out *= self.n // piv
        return out

    def elements(self) -> list[tuple[int, int, int]]:
        n = self.n
        out = {(0, 0, 0)}
        for w in self.weights:
            k = n // next(x for x in w if x)
            out = {tuple((e[i] + j * w[i]) % n for i in range(3)) for e in out for j in range(k)}
        return sorted(out)

    def invariant(self, l: Sequence[int]) -> bool:
        n = self.n
        return all((l[0] * w[0] + l[1] * w[1] + l[2] * w[2]) % n == 0 for w in self.weights)


def _as_toric(h: ToricSingularity | tuple) -> ToricSingularity:
    if isinstance(h, ToricSingularity):
        return h
    n, weights = h
    return ToricSingularity.make(n, weights)


def min_invariant_degree(h: ToricSingularity) -> int:
    """Least total degree of a nonconstant invariant monomial (at most n)."""
    n = h.n
    if not h.weights:
        return 1
    ws = h.weights
    for d in range(1, n + 1):
        for l1 in range(d + 1):
            for l2 in range(d - l1 + 1):
                l3 = d - l1 - l2
                if all((l1 * w[0] + l2 * w[1] + l3 * w[2]) % n == 0 for w in ws):
                    return d
    raise AssertionError("pure n-th powers are always invariant")


def delta(h: ToricSingularity) -> Fraction:
    """(1/n) times the least degree of a nonzero invariant monomial."""
    h = _as_toric(h)
    return Fraction(min_invariant_degree(h), h.n)


def mult_upper_bound(h: ToricSingularity) -> Fraction:
    h = _as_toric(h)
    return Fraction(h.n ** 3) * delta(h) / h.order()


def _pareto_minimal(h: ToricSingularity) -> list[tuple[int, int, int]]:
    """Minimal nonzero invariant exponents in the box [0, n]^3 (componentwise order)."""
    n = h.n
    inf = n + 1
    low = [[inf] * (n + 1) for _ in range(n + 1)]  # least z with (x, y, z) invariant, nonzero
    for x in range(n + 1):
        for y in range(n + 1):
            for z in range(0 if (x or y) else 1, n + 1):
                if h.invariant((x, y, z)):
                    low[x][y] = z
                    break
    pref = [[inf] * (n + 1) for _ in range(n + 1)]
    out = []
    for x in range(n + 1):
        for y in range(n + 1):
            before = min(pref[x - 1][y] if x else inf, pref[x][y - 1] if y else inf)
            if low[x][y] < before:
                out.append((x, y, low[x][y]))
            pref[x][y] = min(low[x][y], before)
    return out


def _exact_hull_volume6(points: list[tuple[int, int, int]]) -> int:
    """Six times the volume of the convex hull of integer points, exactly.

    Qhull supplies the facet triangulation; every facet is then re-checked with
    integer arithmetic before the volume is summed from integer determinants.
    """
    arr = np.array(points, dtype=float)
    hull = ConvexHull(arr)
    pts = [tuple(int(x) for x in p) for p in points]
    o = pts[hull.vertices[0]]
    total = 0
    for simplex in hull.simplices:
        a, b, c = (pts[i] for i in simplex)
        u = [a[i] - o[i] for i in range(3)]
        v = [b[i] - o[i] for i in range(3)]
        w = [c[i] - o[i] for i in range(3)]
        det = (u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0])
               + u[2] * (v[0] * w[1] - v[1] * w[0]))
        # exact supporting-plane check for the facet
        e1 = [b[i] - a[i] for i in range(3)]
        e2 = [c[i] - a[i] for i in range(3)]
        nrm = (e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2],
               e1[0] * e2[1] - e1[1] * e2[0])
        if nrm != (0, 0, 0):
            side = {(sum(nrm[i] * (p[i] - a[i]) for i in range(3)) > 0) -
                    (sum(nrm[i] * (p[i] - a[i]) for i in range(3)) < 0) for p in pts}
            if 1 in side and -1 in side:
                raise ArithmeticError("hull facet failed exact verification")
        total += abs(det)
    return total


def mult_exact(h: ToricSingularity) -> int:
    """Multiplicity of C^3/H1: normalized volume of R>=0^3 minus conv(K - 0), over |H1|."""
    h = _as_toric(h)
    n = h.n
    if n > MULT_CAP:
        raise ValueError(f"modulus {n} exceeds the exact-multiplicity cap {MULT_CAP}")
    return _mult_exact_cached(n, h.weights)


@lru_cache(maxsize=100_000)
def _mult_exact_cached(n: int, weights: tuple) -> int:
    h = ToricSingularity(n, weights)
    minimal = _pareto_minimal(h)
    pts = set()
    for k in minimal:
        for mask in range(8):
            pts.add(tuple(n if mask >> i & 1 else k[i] for i in range(3)))
    vol6 = 6 * n ** 3 - _exact_hull_volume6(sorted(pts))
    num, rem = divmod(vol6, h.order())
    if rem:
        raise ArithmeticError(f"non-integral multiplicity {vol6}/{h.order()}")
    return num


# ---------------------------------------------------------------- census

def delta_uvw(u: int, v: int, w: int, p: int, s: int) -> Fraction:
    """delta of the cyclic group generated by (u, v, w) mod p^s."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    return delta(ToricSingularity.make(p ** s, [(u, v, w)]))


def _min_degree_cyclic(u: int, v: int, w: int, n: int) -> int:
    """Least l1+l2+l3 > 0 with l1 u + l2 v + l3 w = 0 mod n, via one congruence per (l1, l2)."""
    g = gcd(w, n)
    m = n // g
    winv = pow(w // g, -1, m) if m > 1 else 0
    best = n
    for l1 in range(n + 1):
        if l1 >= best:
            break
        for l2 in range(n + 1 - l1):
            if l1 + l2 >= best:
                break
            r = (-(l1 * u + l2 * v)) % n
            if r % g:
                continue
            l3 = (r // g) * winv % m if m > 1 else 0
            if l1 == l2 == 0 and l3 == 0:
                l3 = m
            best = min(best, l1 + l2 + l3)
    return best


def projective_triples(p: int, s: int) -> list[tuple[int, int, int]]:
    """Nonzero triples mod p^s, one per unit-scaling class (the lexicographic minimum)."""
    n = p ** s
    units = [a for a in range(1, n) if a % p]
    out = []
    for t in itertools.product(range(n), repeat=3):
        if not any(t):
            continue
        if all(t <= tuple(a * x % n for x in t) for a in units):
            out.append(t)
    return out


def census_bound(p: int, eps: Fraction) -> int:
    """2^2 eps^-8 [4 eps^-5]_p, as an exact rational (an integer for eps = 1/k)."""
    eps = Fraction(eps)
    return Fraction(4) * eps ** -8 * p_floor(4 * eps ** -5, p).value


@dataclass(frozen=True)
class CensusResult:
    p: int
    s: int
    epsilon: Fraction
    count: int
    bound: Fraction
    satisfied: bool


def census(p: int, s: int, epsilon: Fraction, partitions: int = 1,
           mapper: Callable | None = None) -> CensusResult:
    """Count projective triples (u:v:w) mod p^s with delta >= epsilon."""
    n = p ** s
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if n > 2 ** 10:
        raise ValueError(f"p^s = {n} exceeds the census cap 2^10")
    epsilon = Fraction(epsilon)
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    triples = projective_triples(p, s)
    chunks = [triples[i::partitions] for i in range(partitions)]
    args = [(c, n, epsilon) for c in chunks]
    counts = list((mapper or map)(_census_chunk, args))
    count = sum(counts)
    bound = census_bound(p, epsilon)
    return CensusResult(p, s, epsilon, count, bound, count <= bound)


def _census_chunk(arg) -> int:
    triples, n, eps = arg
    return sum(1 for t in triples if Fraction(_min_degree_cyclic(*t, n), n) >= eps)


# ---------------------------------------------------------------- solvable chains

@dataclass
class SolvableChain:
    """Subgroups H_0 < ... < H_t of a finite group, each given by generators.

    ``mul`` composes two elements and ``one`` is the identity; permutations as
    tuples (composition (a*b)(i) = a[b[i]]) are the default.
    """

    groups: list[list[Hashable]]
    mul: Callable = field(default=lambda a, b: tuple(a[i] for i in b))
    one: Hashable | None = None
    exponents: list[int] = field(default_factory=list)

    def __post_init__(self):
        if self.one is None:
            sample = next((g for grp in self.groups for g in grp), None)
            if sample is None:
                raise ValueError("cannot infer the identity of an empty chain")
            self.one = tuple(range(len(sample)))


def closure_elements(gens: Sequence[Hashable], mul: Callable, one: Hashable) -> set:
    out = {one}
    frontier = [one]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = mul(x, g)
                if y not in out:
                    out.add(y)
                    nxt.append(y)
        frontier = nxt
    return out


def k_constant(chain: SolvableChain) -> int:
    """Product of the exponents of the abelian layers H_i / H_{i-1}."""
    mul, one = chain.mul, chain.one
    layers = [closure_elements(g, mul, one) for g in chain.groups]
    if len(layers[0]) != 1:
        layers.insert(0, {one})
    exps = []
    for lo, hi in zip(layers, layers[1:]):
        if not lo <= hi:
            raise ValueError("chain is not increasing")
        inv = {x: next(y for y in hi if mul(x, y) == one) for x in hi}
        for x in hi:
            for y in lo:
                if mul(mul(x, y), inv[x]) not in lo:
                    raise ValueError("a layer is not normal in the next")
        for x in hi:
            for y in hi:
                if mul(mul(x, y), mul(inv[x], inv[y])) not in lo:
                    raise ValueError("non-abelian quotient detected")
        e = 1
        for x in hi:
            k, z = 1, x
            while z not in lo:
                z = mul(z, x)
                k += 1
            e = e * k // gcd(e, k)
        exps.append(e)
    chain.exponents = exps
    out = 1
    for e in exps:
        out *= e
    return out


def abelian_exponent(h: ToricSingularity) -> int:
    e = 1
    for el in h.elements():
        k = h.n // gcd(gcd(gcd(el[0], el[1]), el[2]), h.n)
        e = e * k // gcd(e, k)
    return e


def verify_klem(h: ToricSingularity, l: int, N: int, cap: int | None = None) -> bool:
    """Every invariant monomial of degree >= k l + N (up to ``cap``) is a product of
    at least l invariant monomials of positive degree, with k the exponent of H1."""
    h = _as_toric(h)
    k = abelian_exponent(h)
    lo = k * l + N
    cap = cap if cap is not None else lo + h.n
    if cap > 64:
        raise ValueError(f"degree cap {cap} is too large")
    monos = [m for d in range(1, cap + 1) for m in _monomials_of_degree(d) if h.invariant(m)]
    best: dict[tuple, int] = {(0, 0, 0): 0}
    for m in monos:  # increasing degree, so every proper divisor is already scored
        top = 0
        for a in monos:
            if sum(a) >= sum(m):
                break
            rest = (m[0] - a[0], m[1] - a[1], m[2] - a[2])
            if min(rest) >= 0 and rest in best:
                top = max(top, best[rest] + 1)
        best[m] = max(top, 1)
    return all(best[m] >= l for m in monos if sum(m) >= lo)


def _monomials_of_degree(d: int):
    for a in range(d + 1):
        for b in range(d - a + 1):
            yield (a, b, d - a - b)


def min_age(h: ToricSingularity) -> Fraction:
    """Least age sum(a_j)/n over non-identity elements."""
    n = h.n
    ages = [Fraction(sum(e), n) for e in h.elements() if any(e)]
    return min(ages) if ages else Fraction(0)


def reid_check(h: ToricSingularity) -> bool:
    """n * delta >= least age, for a cyclic group of prime order acting in SL.

    The age is taken as the fraction sum(a_j)/n; see min_age.
    """
    h = _as_toric(h)
    if not is_prime(h.n) or h.order() != h.n:
        raise ValueError("need a cyclic group of prime order")
    if any(sum(e) % h.n for e in h.elements()):
        raise ValueError("the action is not in SL")
    return min_invariant_degree(h) >= min_age(h)
