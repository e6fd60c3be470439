"""Seeded random subgroups and the index-bound sweep.

Every subgroup is drawn from its own RNG stream keyed by (seed, level, index), so
results do not depend on how the work is split across processes.
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .chain import Subgroup
from .ramification import FAMILIES, BoundVerdict, ramification_report, verdict_from_report
from .symplectic import (
    Element,
    inverse,
    mul,
    phi0,
    psi,
    random_primitive,
    transvection,
    unipotent,
)

POOLS = ("transvection", "phi0-conjugate", "psi-conjugate", "unipotent", "random")


def _conjugate(g: Element, x: Element, n: int) -> Element:
    return mul(mul(g, x, n), inverse(g, n), n)


def pool_element(kind: str, n: int, rng: random.Random, full: Subgroup) -> Element:
    if kind == "transvection":
        return transvection(random_primitive(rng, n), rng.randrange(1, n), n)
    if kind == "phi0-conjugate":
        return _conjugate(full.random_element(rng), phi0(n), n)
    if kind == "psi-conjugate":
        return _conjugate(full.random_element(rng), psi(rng.randrange(n), n), n)
    if kind == "unipotent":
        g = unipotent(rng.randrange(n), rng.randrange(n), rng.randrange(n), n)
        return _conjugate(full.random_element(rng), g, n)
    if kind == "random":
        return full.random_element(rng)
    raise ValueError(f"unknown pool {kind!r}")


_FULL: dict[int, Subgroup] = {}


def _full(n: int) -> Subgroup:
    if n not in _FULL:
        _FULL[n] = Subgroup.full(n)
    return _FULL[n]


def random_subgroup(n: int, seed, index: int, max_gens: int = 3) -> tuple[Subgroup, list[str]]:
    """A seeded random subgroup with -1 adjoined, and the pools its generators came from."""
    rng = random.Random(f"subgroup:{seed}:{n}:{index}")
    k = rng.randint(1, max_gens)
    # the uniform "random" pool mostly yields the whole group, so draw it rarely
    kinds = rng.choices(POOLS, weights=(4, 3, 3, 3, 1), k=k)
    gens = [pool_element(kind, n, rng, _full(n)) for kind in kinds]
    return Subgroup(n, gens).with_center(), kinds


@dataclass
class SweepRow:
    level: int
    index_in_sweep: int
    pools: list
    generators: list
    order: int
    index: int
    verdicts: list = field(default_factory=list)  # verdict_dict per family

    @property
    def satisfied(self) -> bool:
        return all(v["satisfied"] for v in self.verdicts)


def sweep_one(args) -> SweepRow:
    n, seed, idx, families = args
    h, kinds = random_subgroup(n, seed, idx)
    report = ramification_report(h)
    # plain dicts: the exact bounds are too large to pickle through str()
    verdicts = [verdict_dict(verdict_from_report(report, f)) for f in families]
    return SweepRow(n, idx, kinds, [list(g) for g in h.generators], report.order, report.index,
                    verdicts)


def run_sweep(levels: Sequence[int], count: int, seed, threads: int = 1,
              families: Sequence[str] = FAMILIES) -> list[SweepRow]:
    """``count`` subgroups per level; results in (level, index) order for any thread count."""
    tasks = [(n, seed, i, tuple(families)) for n in levels for i in range(count)]
    return parallel_map(sweep_one, tasks, threads)


def parallel_map(fn: Callable, tasks: list, threads: int = 1) -> list:
    """map() over a process pool; output order follows the task order."""
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks, chunksize=1))


def verdict_dict(v: BoundVerdict) -> dict:
    def frac(x):
        return None if x is None else str(Fraction(x))

    return {"family": v.family, "epsilon": frac(v.epsilon), "bound": v.bound_expr,
            "index": v.index, "strict": v.strict, "satisfied": v.satisfied,
            "vacuous": v.vacuous}


def sweep_row_dict(row: SweepRow) -> dict:
    return {"level": row.level, "sample": row.index_in_sweep, "pools": row.pools,
            "generators": row.generators, "order": row.order, "index": row.index,
            "verdicts": row.verdicts, "satisfied": row.satisfied}
