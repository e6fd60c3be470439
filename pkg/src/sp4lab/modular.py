"""Integer and Z/n helpers: factorization, CRT, Howell normal form, free summands."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

MAX_LEVEL = 255


def factorize(n: int) -> dict[int, int]:
    """Prime factorization by trial division (levels are small)."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_prime(p: int) -> bool:
    return p >= 2 and factorize(p) == {p: 1}


def prime_power(n: int) -> tuple[int, int] | None:
    """Return (p, t) with n = p**t, or None if n is not a prime power."""
    f = factorize(n) if n > 1 else {}
    if len(f) != 1:
        return None
    (p, t), = f.items()
    return p, t


def prime_power_parts(n: int) -> list[int]:
    return [p ** t for p, t in sorted(factorize(n).items())] if n > 1 else []


def egcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        return -a, -s0, -t0
    return a, s0, t0


def inv_mod(a: int, n: int) -> int:
    if n == 1:
        return 0
    return pow(a % n, -1, n)


def is_unit(a: int, n: int) -> bool:
    return gcd(a % n, n) == 1


def crt(residues: Sequence[int], moduli: Sequence[int]) -> int:
    """Combine residues modulo pairwise coprime moduli."""
    x, m = 0, 1
    for r, q in zip(residues, moduli):
        g, s, _ = egcd(m, q)
        if g != 1:
            raise ValueError(f"moduli {m} and {q} are not coprime")
        x = (x + (r - x) * s % q * m) % (m * q)
        m *= q
    return x


def unit_normalizer(a: int, n: int) -> tuple[int, int]:
    """Return (u, g) with u a unit mod n and u*a = g = gcd(a, n) mod n."""
    a %= n
    g = gcd(a, n)
    if a == 0:
        return 1, n
    m = n // g
    u = inv_mod(a // g, m) if m > 1 else 0
    while gcd(u, n) != 1:
        u += m
    return u % n, g


def howell_form(rows: Iterable[Sequence[int]], n: int) -> tuple[tuple[int, ...], ...]:
    """Howell normal form of the Z/n-span of ``rows``.

    Two generating sets span the same submodule iff their forms are equal.
    """
    mat = [[x % n for x in r] for r in rows]
    if not mat:
        return ()
    width = len(mat[0])
    r = 0
    for col in range(width):
        i = r
        while i < len(mat):
            if mat[i][col]:
                if r >= len(mat) or i == r:
                    pass
                elif mat[r][col] == 0:
                    mat[r], mat[i] = mat[i], mat[r]
                else:
                    a, b = mat[r][col], mat[i][col]
                    g, s, t = egcd(a, b)
                    ra, rb = mat[r], mat[i]
                    mat[r] = [(s * x + t * y) % n for x, y in zip(ra, rb)]
                    mat[i] = [((a // g) * y - (b // g) * x) % n for x, y in zip(ra, rb)]
            i += 1
        if r >= len(mat) or mat[r][col] == 0:
            continue
        u, g = unit_normalizer(mat[r][col], n)
        mat[r] = [u * x % n for x in mat[r]]
        ann = [(n // g) * x % n for x in mat[r]]
        if any(ann):
            mat.append(ann)
        for k in range(r):
            q = mat[k][col] // g
            if q:
                mat[k] = [(x - q * y) % n for x, y in zip(mat[k], mat[r])]
        r += 1
    return tuple(tuple(row) for row in mat[:r])


def span_contains(form: Sequence[Sequence[int]], v: Sequence[int], n: int) -> bool:
    """Membership of v in the module with Howell form ``form``."""
    return howell_form(list(form) + [list(v)], n) == tuple(map(tuple, form))


def unit_rref(rows: Sequence[Sequence[int]], q: int) -> tuple[tuple[int, ...], ...] | None:
    """Reduced echelon form over Z/q (q a prime power) using only unit pivots.

    Returns None unless the span is a free direct summand; then the result is
    its unique reduced basis.
    """
    p = min(factorize(q))
    mat = [[x % q for x in r] for r in rows]
    if not mat:
        return ()
    r = 0
    for col in range(len(mat[0])):
        piv = next((i for i in range(r, len(mat)) if mat[i][col] % p), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        u = inv_mod(mat[r][col], q)
        mat[r] = [u * x % q for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][col]:
                c = mat[i][col]
                mat[i] = [(x - c * y) % q for x, y in zip(mat[i], mat[r])]
        r += 1
    if any(any(row) for row in mat[r:]):
        return None
    return tuple(tuple(row) for row in mat[:r])


def free_basis(gens: Sequence[Sequence[int]], n: int, rank: int) -> tuple[tuple[int, ...], ...] | None:
    """Canonical basis of a free rank-``rank`` summand spanned by ``gens``.

    Per prime power the unit-pivot echelon form is unique; the components are
    glued by CRT. Returns None if the span is not a free summand of that rank.
    """
    parts = prime_power_parts(n)
    comps = []
    for q in parts:
        h = unit_rref(gens, q)
        if h is None or len(h) != rank:
            return None
        comps.append(h)
    if not parts:
        return tuple(tuple(0 for _ in gens[0]) for _ in range(rank))
    width = len(gens[0])
    return tuple(
        tuple(crt([c[i][j] for c in comps], parts) for j in range(width)) for i in range(rank)
    )


def pivot_columns(gens: Sequence[Sequence[int]], n: int) -> list[tuple[int, tuple[int, ...]]]:
    """For each prime power q | n, the pivot columns of the unit-pivot echelon basis mod q."""
    out = []
    for q in prime_power_parts(n):
        h = unit_rref(gens, q)
        if h is None:
            raise ValueError("span is not a free summand")
        pr = min(factorize(q))
        out.append((q, tuple(next(j for j, x in enumerate(row) if x % pr) for row in h)))
    return out


@dataclass(frozen=True)
class PPowerFloor:
    """[x]_p, the largest power of p not exceeding x."""

    p: int
    exponent: int

    @property
    def value(self) -> int:
        return self.p ** self.exponent

    def __int__(self) -> int:
        return self.value


def p_floor(x: Fraction | int, p: int) -> PPowerFloor:
    x = Fraction(x)
    if x < 1:
        raise ValueError(f"p_floor needs x >= 1, got {x}")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    m = x.numerator // x.denominator  # p-powers are integers, so [x]_p = [floor x]_p
    t = max(0, int((m.bit_length() - 1) * math.log(2) / math.log(p)) - 1)
    while p ** (t + 1) <= m:
        t += 1
    while p ** t > m:
        t -= 1
    return PPowerFloor(p, t)


def solve_2x2_dual(rows: Sequence[Sequence[int]], n: int) -> list[list[int]]:
    """Right inverse of a 2x4 matrix whose rows span a free summand over Z/n.

    Returns columns u0, u1 (as 4-lists) with rows[i] . u_j = delta_ij.
    """
    parts = prime_power_parts(n)
    cols_per_part = []
    for q in parts:
        p = next(iter(factorize(q)))
        found = None
        for c1 in range(4):
            for c2 in range(c1 + 1, 4):
                det = rows[0][c1] * rows[1][c2] - rows[0][c2] * rows[1][c1]
                if det % p:
                    found = (c1, c2, det)
                    break
            if found:
                break
        if found is None:
            raise ValueError("rows do not span a free rank-2 summand")
        c1, c2, det = found
        di = inv_mod(det, q)
        # inverse of [[r0c1, r0c2],[r1c1, r1c2]]
        a, b = rows[0][c1], rows[0][c2]
        c, d = rows[1][c1], rows[1][c2]
        inv = [[d * di % q, -b * di % q], [-c * di % q, a * di % q]]
        us = []
        for j in range(2):
            u = [0, 0, 0, 0]
            u[c1] = inv[0][j]
            u[c2] = inv[1][j]
            us.append(u)
        cols_per_part.append(us)
    if not parts:
        return [[0] * 4, [0] * 4]
    return [
        [crt([cp[j][k] for cp in cols_per_part], parts) for k in range(4)] for j in range(2)
    ]
