"""Congruence structure in finite quotients: CRT splitting, p-projections and the
kernel layers K_{i-1}/K_i of Sp(4, Z/p^i) -> Sp(4, Z/p^{i-1})."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from math import gcd

from .chain import Subgroup
from .modular import crt, factorize, howell_form, is_prime
from .symplectic import (
    Element,
    check_level,
    identity,
    inverse,
    is_symplectic,
    mul,
    sp4_order,
    standard_generators,
    unipotent,
)


@dataclass(frozen=True)
class LevelSplit:
    """n = m * p^t with gcd(m, p) = 1."""

    n: int
    p: int
    m: int
    t: int

    @classmethod
    def of(cls, n: int, p: int) -> "LevelSplit":
        check_level(n)
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        t = factorize(n).get(p, 0) if n > 1 else 0
        q = p ** t
        m = n // q
        if gcd(m, p) != 1:
            raise ValueError("non-coprime factorization")
        return cls(n, p, m, t)

    @property
    def q(self) -> int:
        return self.p ** self.t

    def orders(self) -> tuple[int, int]:
        return sp4_order(self.m), sp4_order(self.q)

    def orders_multiply(self) -> bool:
        a, b = self.orders()
        return a * b == sp4_order(self.n)


def crt_split(g: Element, split: LevelSplit) -> tuple[Element, Element]:
    """(g mod m, g mod p^t)."""
    if len(g) != 16:
        raise ValueError("expected 16 entries")
    return tuple(x % split.m for x in g), tuple(x % split.q for x in g)


def crt_join(gm: Element, gq: Element, split: LevelSplit) -> Element:
    """Inverse of crt_split."""
    return tuple(crt([a, b], [split.m, split.q]) for a, b in zip(gm, gq))


def p_projection(h: Subgroup, p: int) -> Subgroup:
    """The image of H in the p-primary component Sp(4, Z/p^t)."""
    split = LevelSplit.of(h.level, p)
    if split.t == 0:
        raise ValueError(f"{p} does not divide the level {h.level}")
    gens = [crt_split(g, split)[1] for g in h.generators]
    return Subgroup(split.q, gens, h.ceiling)


def level_kernel_generators(n: int, p: int) -> list[Element]:
    """Generators of the kernel of Sp(4, Z/n) -> Sp(4, Z/(n / p^t)), the p-part of the CRT split."""
    split = LevelSplit.of(n, p)
    one_m = identity(split.m)
    return [crt_join(one_m, g, split) for g in standard_generators(split.q)]


# ---------------------------------------------------------------- kernel layers

_J = (0, 0, 1, 0, 0, 0, 0, 1, -1, 0, 0, 0, 0, -1, 0, 0)
_UPPER = [(i, j) for i in range(4) for j in range(i, 4)]


def _transpose(x):
    return tuple(x[4 * j + i] for i in range(4) for j in range(4))


@dataclass(frozen=True)
class KernelLayer:
    """K_{i-1}/K_i inside Sp(4, Z/p^i), identified with sp4(F_p).

    An element 1 + p^(i-1) X has X in sp4(F_p), i.e. J X symmetric; its
    coordinates are the ten upper-triangular entries of S = J X mod p.
    """

    p: int
    i: int

    def __post_init__(self):
        if not is_prime(self.p) or self.i < 2:
            raise ValueError("need a prime p and i >= 2")
        check_level(self.p ** self.i)

    @property
    def modulus(self) -> int:
        return self.p ** self.i

    def linear_condition_rows(self) -> list[list[int]]:
        """The map X -> tX J + J X on 4x4 matrices over F_p, one row per output entry."""
        p = self.p
        rows = []
        for a in range(4):
            for b in range(4):
                row = [0] * 16
                for k in range(16):
                    x = [0] * 16
                    x[k] = 1
                    xtj = mul(_transpose(tuple(x)), _J, p)
                    jx = mul(_J, tuple(x), p)
                    row[k] = (xtj[4 * a + b] + jx[4 * a + b]) % p
                rows.append(row)
        return rows

    def dimension(self) -> int:
        """dim of {X : tX J + J X = 0} over F_p."""
        rank = len(howell_form(self.linear_condition_rows(), self.p))
        return 16 - rank

    def coords(self, g: Element) -> tuple[int, ...]:
        """Layer coordinates of g in K_{i-1}."""
        p, q = self.p, self.modulus
        low = p ** (self.i - 1)
        one = identity(q)
        diff = [(a - b) % q for a, b in zip(g, one)]
        if any(d % low for d in diff):
            raise ValueError("element is not in K_{i-1}")
        x = tuple(d // low % p for d in diff)
        s = mul(_J, x, p)
        return tuple(s[4 * i + j] for i, j in _UPPER)

    def element(self, coords) -> Element:
        """1 + p^(i-1) X for the layer vector (inverse of coords)."""
        p, q = self.p, self.modulus
        s = [0] * 16
        for (i, j), c in zip(_UPPER, coords):
            s[4 * i + j] = s[4 * j + i] = c % p
        # X = J^-1 S = -J S
        x = mul(tuple(-v % p for v in _J), tuple(s), p)
        low = p ** (self.i - 1)
        return tuple((int(a == b) + low * v) % q
                     for (a, b), v in zip(((r, c) for r in range(4) for c in range(4)), x))


@dataclass
class KernelGenResult:
    p: int
    i: int
    layer_dimension: int
    rank: int
    conjugates_used: int
    mode: str

    @property
    def ok(self) -> bool:
        return self.rank == self.layer_dimension == 10


def _random_word(gens, n, rng, length):
    g = identity(n)
    for _ in range(length):
        s = rng.choice(gens)
        g = mul(g, s if rng.random() < 0.5 else inverse(s, n), n)
    return g


def verify_kernel_generation(p: int, i: int = 2, seed: int = 0, max_samples: int = 2000,
                             exhaustive: bool = False) -> KernelGenResult:
    """Do the Sp(4, Z/p^i)-conjugates of u = 1 + p^(i-1) E13 span K_{i-1}/K_i?

    Sampled mode conjugates by seeded random words and stops at full rank.
    Exhaustive mode takes the whole conjugation orbit of u, generated by
    breadth-first search with the standard generators.
    """
    if p < 5:
        raise ValueError("need p >= 5")
    layer = KernelLayer(p, i)
    q = layer.modulus
    dim = layer.dimension()
    u = unipotent(p ** (i - 1), 0, 0, q)
    rows: list = []
    rank = 0
    used = 0

    def add(g):
        nonlocal rows, rank
        rows = list(howell_form(rows + [layer.coords(g)], p))
        rank = len(rows)

    if exhaustive:
        gens = standard_generators(q)
        gens = gens + [inverse(g, q) for g in gens]
        seen = {layer.coords(u)}
        queue = deque([u])
        add(u)
        while queue:
            x = queue.popleft()
            for g in gens:
                y = mul(mul(g, x, q), inverse(g, q), q)
                c = layer.coords(y)
                if c not in seen:
                    seen.add(c)
                    queue.append(y)
                    if rank < dim:
                        add(y)
        used = len(seen)
        mode = "exhaustive"
    else:
        rng = random.Random(f"kernel:{p}:{i}:{seed}")
        gens = standard_generators(q)
        add(u)
        used = 1
        while rank < dim and used < max_samples:
            g = _random_word(gens, q, rng, 24)
            add(mul(mul(g, u, q), inverse(g, q), q))
            used += 1
        mode = "sampled"
    return KernelGenResult(p, i, dim, rank, used, mode)


def is_in_sp4(g: Element, n: int) -> bool:
    return is_symplectic(g, n)
