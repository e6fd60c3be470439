"""Arithmetic in Sp(4, Z/n).

Group elements are 16-tuples of residues in row-major order; vectors are
4-tuples. Keeping them as plain tuples makes them hashable and fast.
"""

from __future__ import annotations

import random
from math import gcd
from typing import Sequence

from .modular import MAX_LEVEL, factorize

Element = tuple  # 16 residues, row-major
Vector = tuple  # 4 residues

IDENTITY = (1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1)


def check_level(n: int) -> int:
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"level must be a positive integer, got {n!r}")
    if n > MAX_LEVEL:
        raise ValueError(f"level {n} exceeds the cap {MAX_LEVEL}")
    return n


def identity(n: int) -> Element:
    return tuple(x % n for x in IDENTITY)


def reduce(m: Sequence, n: int) -> Element:
    """Flatten a 4x4 nested list (or 16 entries) and reduce mod n."""
    flat = [x for row in m for x in row] if len(m) == 4 else list(m)
    if len(flat) != 16:
        raise ValueError("expected a 4x4 matrix")
    return tuple(int(x) % n for x in flat)


def as_rows(g: Element) -> list[list[int]]:
    return [list(g[4 * i:4 * i + 4]) for i in range(4)]


def mul(a: Element, b: Element, n: int) -> Element:
    a0, a1, a2, a3, a4, a5, a6, a7, a8, a9, a10, a11, a12, a13, a14, a15 = a
    b0, b1, b2, b3, b4, b5, b6, b7, b8, b9, b10, b11, b12, b13, b14, b15 = b
    return (
        (a0 * b0 + a1 * b4 + a2 * b8 + a3 * b12) % n,
        (a0 * b1 + a1 * b5 + a2 * b9 + a3 * b13) % n,
        (a0 * b2 + a1 * b6 + a2 * b10 + a3 * b14) % n,
        (a0 * b3 + a1 * b7 + a2 * b11 + a3 * b15) % n,
        (a4 * b0 + a5 * b4 + a6 * b8 + a7 * b12) % n,
        (a4 * b1 + a5 * b5 + a6 * b9 + a7 * b13) % n,
        (a4 * b2 + a5 * b6 + a6 * b10 + a7 * b14) % n,
        (a4 * b3 + a5 * b7 + a6 * b11 + a7 * b15) % n,
        (a8 * b0 + a9 * b4 + a10 * b8 + a11 * b12) % n,
        (a8 * b1 + a9 * b5 + a10 * b9 + a11 * b13) % n,
        (a8 * b2 + a9 * b6 + a10 * b10 + a11 * b14) % n,
        (a8 * b3 + a9 * b7 + a10 * b11 + a11 * b15) % n,
        (a12 * b0 + a13 * b4 + a14 * b8 + a15 * b12) % n,
        (a12 * b1 + a13 * b5 + a14 * b9 + a15 * b13) % n,
        (a12 * b2 + a13 * b6 + a14 * b10 + a15 * b14) % n,
        (a12 * b3 + a13 * b7 + a14 * b11 + a15 * b15) % n,
    )


def apply(g: Element, v: Vector, n: int) -> Vector:
    x0, x1, x2, x3 = v
    return (
        (g[0] * x0 + g[1] * x1 + g[2] * x2 + g[3] * x3) % n,
        (g[4] * x0 + g[5] * x1 + g[6] * x2 + g[7] * x3) % n,
        (g[8] * x0 + g[9] * x1 + g[10] * x2 + g[11] * x3) % n,
        (g[12] * x0 + g[13] * x1 + g[14] * x2 + g[15] * x3) % n,
    )


def inverse(g: Element, n: int) -> Element:
    """Inverse of a symplectic element: [[A,B],[C,D]] -> [[tD,-tB],[-tC,tA]]."""
    (a00, a01, b00, b01,
     a10, a11, b10, b11,
     c00, c01, d00, d01,
     c10, c11, d10, d11) = g
    return (
        d00, d10, -b00 % n, -b10 % n,
        d01, d11, -b01 % n, -b11 % n,
        -c00 % n, -c10 % n, a00, a10,
        -c01 % n, -c11 % n, a01, a11,
    )


def power(g: Element, k: int, n: int) -> Element:
    if k < 0:
        g, k = inverse(g, n), -k
    out = identity(n)
    while k:
        if k & 1:
            out = mul(out, g, n)
        g = mul(g, g, n)
        k >>= 1
    return out


def element_order(g: Element, n: int) -> int:
    e = identity(n)
    h, k = g, 1
    while h != e:
        h = mul(h, g, n)
        k += 1
    return k


def neg(g: Element, n: int) -> Element:
    return tuple(-x % n for x in g)


def pcanon(g: Element, n: int) -> Element:
    """Canonical representative of the class of g in Sp/{+-1}."""
    return min(g, neg(g, n))


def _blocks(m: Sequence[Sequence[int]]):
    a = [[m[0][0], m[0][1]], [m[1][0], m[1][1]]]
    b = [[m[0][2], m[0][3]], [m[1][2], m[1][3]]]
    c = [[m[2][0], m[2][1]], [m[3][0], m[3][1]]]
    d = [[m[2][2], m[2][3]], [m[3][2], m[3][3]]]
    return a, b, c, d


def _mt(x, y):
    """x times transpose of y, 2x2."""
    return [[sum(x[i][k] * y[j][k] for k in range(2)) for j in range(2)] for i in range(2)]


def is_symplectic(m: Sequence, n: int) -> bool:
    """Block test A tB = B tA, C tD = D tC, A tD - B tC = 1 modulo n."""
    if n < 1:
        raise ValueError("modulus must be >= 1")
    flat = [x for row in m for x in row] if len(m) == 4 else list(m)
    rows = [flat[4 * i:4 * i + 4] for i in range(4)]
    a, b, c, d = _blocks(rows)
    ab, ba = _mt(a, b), _mt(b, a)
    cd, dc = _mt(c, d), _mt(d, c)
    ad, bc = _mt(a, d), _mt(b, c)
    for i in range(2):
        for j in range(2):
            if (ab[i][j] - ba[i][j]) % n or (cd[i][j] - dc[i][j]) % n:
                return False
            if (ad[i][j] - bc[i][j] - (i == j)) % n:
                return False
    return True


def skew_form(u: Sequence[int], v: Sequence[int], n: int) -> int:
    """<u,v> = u1 v3 + u2 v4 - u3 v1 - u4 v2 mod n."""
    if len(u) != 4 or len(v) != 4:
        raise ValueError("vectors must have four coordinates")
    return (u[0] * v[2] + u[1] * v[3] - u[2] * v[0] - u[3] * v[1]) % n


def is_primitive(v: Sequence[int], n: int) -> bool:
    """True iff v has additive order exactly n."""
    return gcd(gcd(gcd(v[0], v[1]), gcd(v[2], v[3])), n) == 1


def canon_pm(v: Vector, n: int) -> Vector:
    """Lexicographically smaller of v and -v."""
    w = tuple(-x % n for x in v)
    return min(tuple(x % n for x in v), w)


def transvection(v: Sequence[int], alpha: int, n: int) -> Element:
    """r_{v,alpha}: w -> w + alpha <v,w> v."""
    v = tuple(x % n for x in v)
    if not is_primitive(v, n):
        raise ValueError(f"{v} is not primitive mod {n}")
    # <v, e_j> for j = 1..4
    f = (-v[2], -v[3], v[0], v[1])
    return tuple(((i == j) + alpha * v[i] * f[j]) % n for i in range(4) for j in range(4))


def unipotent(s11: int, s12: int, s22: int, n: int) -> Element:
    """The block matrix [[1, S], [0, 1]] for symmetric S."""
    return (1, 0, s11 % n, s12 % n,
            0, 1, s12 % n, s22 % n,
            0, 0, 1, 0,
            0, 0, 0, 1)


J = (0, 0, 1, 0, 0, 0, 0, 1, -1, 0, 0, 0, 0, -1, 0, 0)


def standard_generators(n: int) -> list[Element]:
    """A generating set of Sp(4, Z/n): three unipotents and the form matrix J."""
    return [unipotent(1, 0, 0, n), unipotent(0, 0, 1, n), unipotent(0, 1, 0, n),
            tuple(x % n for x in J)]


def phi0(n: int) -> Element:
    """diag(1, -1, 1, -1)."""
    return reduce([[1, 0, 0, 0], [0, -1, 0, 0], [0, 0, 1, 0], [0, 0, 0, -1]], n)


def psi(b: int, n: int) -> Element:
    """The involution with blocks [[0,1],[1,0]] and translation parameter b."""
    return reduce([[0, 1, 0, b], [1, 0, -b, 0], [0, 0, 0, 1], [0, 0, 1, 0]], n)


def sp4_order(n: int) -> int:
    """|Sp(4, Z/n)| = n^10 prod_{p | n} (1 - p^-2)(1 - p^-4)."""
    out = n ** 10
    for p in factorize(n) if n > 1 else {}:
        out = out // p ** 6 * (p ** 2 - 1) * (p ** 4 - 1)
    return out


def symplectic_completion(a: Vector, b: Vector, n: int) -> Element:
    """A symplectic g with g e1 = a, g e2 = b, for a, b spanning an isotropic free plane."""
    from .modular import solve_2x2_dual

    fa = (-a[2], -a[3], a[0], a[1])  # row of <a, .>
    fb = (-b[2], -b[3], b[0], b[1])
    u1, u2 = solve_2x2_dual([fa, fb], n)
    t = skew_form(u1, u2, n)
    u2 = tuple((u2[k] + t * a[k]) % n for k in range(4))
    cols = [a, b, u1, u2]
    g = tuple(cols[j][i] % n for i in range(4) for j in range(4))
    return g


def random_vector(rng: random.Random, n: int) -> Vector:
    return tuple(rng.randrange(n) for _ in range(4))


def random_primitive(rng: random.Random, n: int) -> Vector:
    while True:
        v = random_vector(rng, n)
        if is_primitive(v, n):
            return v
