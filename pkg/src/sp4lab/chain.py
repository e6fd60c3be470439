"""Subgroups of Sp(4, Z/n) with a Schreier-Sims stabilizer chain on V = (Z/n)^4."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

from .symplectic import (
    Element,
    Vector,
    apply,
    check_level,
    identity,
    inverse,
    is_symplectic,
    mul,
    neg,
    reduce,
    sp4_order,
)

DEFAULT_CEILING = 4_000_000
_BASIS = ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1))


class CeilingExceeded(RuntimeError):
    def __init__(self, depth: int, points: int, ceiling: int):
        super().__init__(
            f"stabilizer chain exceeded {ceiling} stored points at depth {depth} ({points} stored)"
        )
        self.depth = depth
        self.points = points


class StabChain:
    """Base points, strong generators per level and transversals (with inverses)."""

    def __init__(self, n: int, base: Sequence[Vector], ceiling: int = DEFAULT_CEILING):
        self.n = n
        self.one = identity(n)
        self.ceiling = ceiling
        self.base: list[Vector] = []
        self.gens: list[list[Element]] = []
        self.trans: list[dict[Vector, tuple[Element, Element]]] = []
        self.stored = 0
        for b in base:
            self._new_level(tuple(b))

    def _new_level(self, point: Vector) -> None:
        self.base.append(point)
        self.gens.append([])
        self.trans.append({point: (self.one, self.one)})
        self.stored += 1

    def order(self) -> int:
        out = 1
        for t in self.trans:
            out *= len(t)
        return out

    def sift(self, g: Element, start: int = 0) -> tuple[Element, int]:
        n = self.n
        for i in range(start, len(self.base)):
            y = apply(g, self.base[i], n)
            t = self.trans[i].get(y)
            if t is None:
                return g, i
            g = mul(t[1], g, n)
        return g, len(self.base)

    def contains(self, g: Element) -> bool:
        h, j = self.sift(g)
        return j == len(self.base) and h == self.one

    def _extend_orbit(self, level: int, s: Element) -> None:
        n = self.n
        tr = self.trans[level]
        gens = self.gens[level]
        queue = deque()
        for x, (u, _) in list(tr.items()):
            y = apply(s, x, n)
            if y not in tr:
                su = mul(s, u, n)
                tr[y] = (su, inverse(su, n))
                queue.append(y)
        self.stored += len(queue)
        while queue:
            x = queue.popleft()
            u = tr[x][0]
            for g in gens:
                y = apply(g, x, n)
                if y not in tr:
                    gu = mul(g, u, n)
                    tr[y] = (gu, inverse(gu, n))
                    queue.append(y)
                    self.stored += 1
            if self.stored > self.ceiling:
                raise CeilingExceeded(level, self.stored, self.ceiling)

    def add_strong(self, h: Element, lo: int, hi: int) -> None:
        """Add h as a strong generator on levels lo..hi, creating level hi if needed."""
        if hi == len(self.base):
            moved = next(e for e in _BASIS if apply(h, e, self.n) != e)
            self._new_level(moved)
        for level in range(lo, hi + 1):
            self.gens[level].append(h)
            self._extend_orbit(level, h)

    def random_element(self, rng: random.Random) -> Element:
        """Uniform random element: a product of random coset representatives."""
        g = self.one
        for tr in reversed(self.trans):
            keys = list(tr)
            u = tr[keys[rng.randrange(len(keys))]][0]
            g = mul(u, g, self.n)
        return g

    def complete(self) -> None:
        """Deterministic Schreier-Sims: check every Schreier generator."""
        n = self.n
        done: list[set] = [set() for _ in self.base]
        i = len(self.base) - 1
        while i >= 0:
            while len(done) < len(self.base):
                done.append(set())
            tr = self.trans[i]
            gens = self.gens[i]
            raised = None
            for x in list(tr):
                ux = tr[x][0]
                for k, s in enumerate(gens):
                    if (x, k) in done[i]:
                        continue
                    y = apply(s, x, n)
                    su = mul(s, ux, n)
                    uy, uyi = tr[y]
                    if su != uy:
                        h, j = self.sift(mul(uyi, su, n), i + 1)
                        if h != self.one:
                            self.add_strong(h, i + 1, j)
                            raised = j
                            break
                    done[i].add((x, k))
                if raised is not None:
                    break
            if raised is not None:
                i = raised
            else:
                i -= 1


def _random_fill(chain: StabChain, source: Callable[[], Element], target: int | None,
                 patience: int) -> None:
    """Sift random elements into the chain until its order reaches target,
    or until ``patience`` consecutive elements sift to the identity."""
    quiet = 0
    while target is None or chain.order() < target:
        h, j = chain.sift(source())
        if h == chain.one:
            quiet += 1
            if quiet >= patience:
                return
            continue
        quiet = 0
        chain.add_strong(h, 0, j)


class _ProductReplacement:
    def __init__(self, gens: Sequence[Element], n: int, rng: random.Random):
        self.n = n
        self.rng = rng
        state = list(gens) or [identity(n)]
        while len(state) < 10:
            state = state + state
        self.state = state[:max(10, len(gens))]
        self.acc = identity(n)
        for _ in range(60):
            self()

    def __call__(self) -> Element:
        s = self.state
        i, j = self.rng.sample(range(len(s)), 2)
        if self.rng.random() < 0.5:
            s[i] = mul(s[i], s[j] if self.rng.random() < 0.5 else inverse(s[j], self.n), self.n)
        else:
            s[i] = mul(s[j] if self.rng.random() < 0.5 else inverse(s[j], self.n), s[i], self.n)
        self.acc = mul(self.acc, s[i], self.n)
        return self.acc


@dataclass
class Subgroup:
    """A subgroup of Sp(4, Z/n) given by generators; the chain is built on demand."""

    level: int
    generators: list[Element]
    ceiling: int = DEFAULT_CEILING
    _chain: StabChain | None = field(default=None, repr=False, compare=False)
    _rebased: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        n = check_level(self.level)
        gens = []
        for idx, g in enumerate(self.generators):
            g = reduce(g, n)
            if not is_symplectic(g, n):
                raise ValueError(f"generator {idx} is not symplectic mod {n}")
            gens.append(g)
        self.generators = gens

    @classmethod
    def full(cls, n: int, **kw) -> "Subgroup":
        from .symplectic import standard_generators

        return cls(n, standard_generators(n), **kw)

    def with_center(self) -> "Subgroup":
        """The subgroup generated by H and -1."""
        return Subgroup(self.level, self.generators + [neg(identity(self.level), self.level)],
                        self.ceiling)

    @property
    def chain(self) -> StabChain:
        if self._chain is None:
            self._chain = self._build()
        return self._chain

    def closure(self) -> "Subgroup":
        self.chain
        return self

    def _build(self) -> StabChain:
        n = self.level
        gens = sorted(set(g for g in self.generators if g != identity(n)))
        chain = StabChain(n, [], self.ceiling)
        if not gens:
            return chain
        rng = random.Random(0x5EED)
        pr = _ProductReplacement(gens, n, rng)
        for g in gens:
            h, j = chain.sift(g)
            if h != chain.one:
                chain.add_strong(h, 0, j)
        _random_fill(chain, pr, sp4_order(n), patience=25)
        if chain.order() < sp4_order(n):
            chain.complete()
        return chain

    def order(self) -> int:
        return self.chain.order()

    def contains(self, g: Element) -> bool:
        g = reduce(g, self.level)
        return self.chain.contains(g)

    def __contains__(self, g: Element) -> bool:
        return self.contains(g)

    def is_subgroup_of(self, other: "Subgroup") -> bool:
        if other.level != self.level:
            raise ValueError("level mismatch")
        return all(other.contains(g) for g in self.generators)

    def index_in(self, other: "Subgroup") -> int:
        """|other : self| for self contained in other."""
        if not self.is_subgroup_of(other):
            raise ValueError("subgroup is not contained in the ambient group")
        return other.order() // self.order()

    def random_element(self, rng: random.Random) -> Element:
        return self.chain.random_element(rng)

    def rebased(self, prefix: Sequence[Vector]) -> StabChain:
        """A complete chain whose base starts with ``prefix``."""
        key = tuple(tuple(v) for v in prefix)
        if key not in self._rebased:
            src = self.chain
            target = src.order()
            ch = StabChain(self.level, key, self.ceiling)
            rng = random.Random(0xBA5E)
            _random_fill(ch, lambda: src.random_element(rng), target, patience=10 ** 9)
            if len(self._rebased) > 64:
                self._rebased.clear()
            self._rebased[key] = ch
        return self._rebased[key]

    def pointwise_stabilizer(self, points: Sequence[Vector]) -> list[Element]:
        """Generators of the subgroup fixing every vector in ``points``."""
        ch = self.rebased(points)
        k = len(points)
        return list(ch.gens[k]) if len(ch.gens) > k else []

    def elements(self) -> list[Element]:
        """All elements (small groups only)."""
        out = [self.chain.one]
        n = self.level
        for tr in reversed(self.chain.trans):
            out = [mul(u, g, n) for u, _ in tr.values() for g in out]
        return out


def index(ambient: Subgroup, sub: Subgroup) -> int:
    """|ambient : sub|."""
    return sub.index_in(ambient)


def orbit(start: Hashable, gens: Iterable, act: Callable[[object, Hashable], Hashable],
          compose: Callable | None = None, one=None) -> dict:
    """Breadth-first orbit; with ``compose`` also returns transversal elements.

    Returns a dict mapping each orbit point to an element carrying start to it
    (or None when compose is not given). Insertion order is deterministic.
    """
    gens = list(gens)
    out = {start: one}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        u = out[x]
        for g in gens:
            y = act(g, x)
            if y not in out:
                out[y] = compose(g, u) if compose else None
                queue.append(y)
    return out
