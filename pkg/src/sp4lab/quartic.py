"""The singular quartic V: (sum x_i^2)^2 = 4 sum x_i^4 in the hyperplane sum x_i = 0 of P^5.

Points carry exact coordinates in a cyclotomic field Q(zeta_m). The module also
covers permutation stabilizers, fixed loci of the six basic permutation types,
tangent-space actions with the Reid-Tai age test, and an integer normal form for
involutions in the level-2 congruence subgroup.
"""

from __future__ import annotations

import ast
import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm
from typing import Sequence

from .modular import egcd

# ---------------------------------------------------------------- polynomials over Q
# Dense coefficient lists, lowest degree first, Fraction entries.


def _trim(p: list) -> list:
    while p and p[-1] == 0:
        p.pop()
    return p


def _pmul(a: list, b: list) -> list:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def _psub(a: list, b: list) -> list:
    out = [Fraction(0)] * max(len(a), len(b))
    for i, x in enumerate(a):
        out[i] += x
    for i, y in enumerate(b):
        out[i] -= y
    return _trim(out)


def _pdivmod(a: list, b: list) -> tuple[list, list]:
    a = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    lead = b[-1]
    while len(a) >= len(b) and a:
        k = len(a) - len(b)
        c = a[-1] / lead
        q[k] = c
        for i, y in enumerate(b):
            a[i + k] -= c * y
        _trim(a)
    return _trim(q), a


@lru_cache(maxsize=None)
def cyclotomic_poly(m: int) -> tuple:
    """Integer coefficients of the m-th cyclotomic polynomial, lowest first."""
    if m < 1:
        raise ValueError("m must be positive")
    num = [Fraction(-1)] + [Fraction(0)] * (m - 1) + [Fraction(1)]  # x^m - 1
    for d in range(1, m):
        if m % d == 0:
            num, r = _pdivmod(num, [Fraction(c) for c in cyclotomic_poly(d)])
            assert not r
    return tuple(int(c) for c in num)


# ---------------------------------------------------------------- cyclotomic numbers

class CyclotomicNumber:
    """An exact element of Q(zeta_m), stored as its reduced coefficient vector."""

    __slots__ = ("m", "coeffs")

    def __init__(self, coeffs: Sequence, m: int = 20):
        phi = [Fraction(c) for c in cyclotomic_poly(m)]
        _, r = _pdivmod(_trim([Fraction(c) for c in coeffs]), phi)
        self.m = m
        self.coeffs = tuple(r)

    @classmethod
    def rational(cls, q, m: int = 20) -> "CyclotomicNumber":
        return cls([Fraction(q)], m)

    @classmethod
    def zeta(cls, m: int = 20, k: int = 1) -> "CyclotomicNumber":
        """zeta_m^k with zeta_m = exp(2 pi i / m)."""
        k %= m
        return cls([0] * k + [1], m)

    @classmethod
    def root_of_unity(cls, order: int, k: int = 1, m: int = 20) -> "CyclotomicNumber":
        """exp(2 pi i k / order) inside Q(zeta_m)."""
        if m % order:
            raise ValueError(f"Q(zeta_{m}) does not contain the {order}-th roots of unity")
        return cls.zeta(m, k * (m // order))

    def _coerce(self, other) -> "CyclotomicNumber":
        if isinstance(other, CyclotomicNumber):
            if other.m != self.m:
                raise ValueError(f"field mismatch: zeta_{self.m} vs zeta_{other.m}")
            return other
        if isinstance(other, (int, Fraction)):
            return CyclotomicNumber.rational(other, self.m)
        return NotImplemented

    def lift(self, m2: int) -> "CyclotomicNumber":
        """The same number viewed in Q(zeta_m2), for m dividing m2."""
        if m2 % self.m:
            raise ValueError(f"{self.m} does not divide {m2}")
        step = m2 // self.m
        out = [Fraction(0)] * (step * len(self.coeffs))
        for i, c in enumerate(self.coeffs):
            out[i * step] = c
        return CyclotomicNumber(out, m2)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        other = self._coerce(other) if not isinstance(other, CyclotomicNumber) else other
        if other is NotImplemented:
            return False
        return self.m == other.m and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash((self.m, self.coeffs))

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = list(self.coeffs), list(other.coeffs)
        n = max(len(a), len(b))
        a += [0] * (n - len(a))
        b += [0] * (n - len(b))
        return CyclotomicNumber([x + y for x, y in zip(a, b)], self.m)

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicNumber([-c for c in self.coeffs], self.m)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return CyclotomicNumber(_pmul(list(self.coeffs), list(other.coeffs)), self.m)

    __rmul__ = __mul__

    def inverse(self) -> "CyclotomicNumber":
        """Multiplicative inverse by the extended Euclidean algorithm in Q[x]."""
        if not self.coeffs:
            raise ZeroDivisionError("inverse of zero")
        phi = [Fraction(c) for c in cyclotomic_poly(self.m)]
        r0, r1 = phi, list(self.coeffs)
        s0, s1 = [], [Fraction(1)]
        while r1:
            q, r = _pdivmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, _psub(s0, _pmul(q, s1))
        # r0 is a nonzero constant because phi is irreducible
        c = r0[0]
        return CyclotomicNumber([x / c for x in s0], self.m)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = CyclotomicNumber.rational(1, self.m)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __repr__(self) -> str:
        return f"CyclotomicNumber({self}, m={self.m})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            mono = "" if k == 0 else ("z" if k == 1 else f"z^{k}")
            if not mono:
                terms.append(str(c))
            elif c == 1:
                terms.append(mono)
            elif c == -1:
                terms.append("-" + mono)
            else:
                terms.append(f"{c}*{mono}")
        return " + ".join(terms).replace("+ -", "- ")

    def to_json(self) -> dict:
        return {"m": self.m, "coeffs": [str(c) for c in self.coeffs]}


def _c(x, m: int) -> CyclotomicNumber:
    return x if isinstance(x, CyclotomicNumber) else CyclotomicNumber.rational(x, m)


# ---------------------------------------------------------------- expression grammar

_NAMED = {"i": 4, "theta": 5, "omega": 3, "w": 3}


def parse_number(text: str, m: int = 20) -> CyclotomicNumber:
    """Parse an exact expression such as ``theta^2``, ``-1/3 + 2*z`` or ``(1+i)^2``.

    Allowed: integers, + - * /, ^ or ** with integer exponents, parentheses,
    ``z`` (zeta_m), ``i``, ``theta`` (exp(2 pi i/5)) and ``omega`` or ``w``
    (exp(2 pi i/3)).
    """
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse {text!r}: {exc.msg} at column {exc.offset}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int) \
                and not isinstance(node.value, bool):
            return CyclotomicNumber.rational(node.value, m)
        if isinstance(node, ast.Name):
            if node.id == "z":
                return CyclotomicNumber.zeta(m)
            if node.id in _NAMED:
                return CyclotomicNumber.root_of_unity(_NAMED[node.id], 1, m)
            raise ValueError(f"unknown name {node.id!r} at column {node.col_offset}")
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                exp = node.right
                sign = 1
                if isinstance(exp, ast.UnaryOp) and isinstance(exp.op, ast.USub):
                    exp, sign = exp.operand, -1
                if not (isinstance(exp, ast.Constant) and isinstance(exp.value, int)):
                    raise ValueError(f"exponent must be an integer at column {node.col_offset}")
                return ev(node.left) ** (sign * exp.value)
            ops = {ast.Add: lambda a, b: a + b, ast.Sub: lambda a, b: a - b,
                   ast.Mult: lambda a, b: a * b, ast.Div: lambda a, b: a / b}
            for kind, fn in ops.items():
                if isinstance(node.op, kind):
                    return fn(ev(node.left), ev(node.right))
        raise ValueError(f"unsupported syntax at column {getattr(node, 'col_offset', 0)}")

    return ev(tree)


# ---------------------------------------------------------------- points

@dataclass(frozen=True)
class QuarticPoint:
    """Homogeneous coordinates (x1 : ... : x6) with sum x_i = 0."""

    coords: tuple

    def __post_init__(self):
        if len(self.coords) != 6:
            raise ValueError("a point needs six coordinates")
        ms = {c.m for c in self.coords if isinstance(c, CyclotomicNumber)}
        m = lcm(*ms) if ms else 20
        cs = tuple(_c(c, m) if not isinstance(c, CyclotomicNumber) else c.lift(m)
                   for c in self.coords)
        object.__setattr__(self, "coords", cs)
        if all(c.is_zero() for c in cs):
            raise ValueError("the zero vector is not a point")
        total = cs[0]
        for c in cs[1:]:
            total = total + c
        if not total.is_zero():
            raise ValueError("coordinates must sum to zero")

    @property
    def m(self) -> int:
        return self.coords[0].m

    @classmethod
    def parse(cls, text: str, m: int = 20) -> "QuarticPoint":
        """Parse ``"0, theta, theta^2, theta^3, theta^4, 1"`` (colons also accepted)."""
        parts = [p for p in text.replace(":", ",").strip().strip("()").split(",")]
        if len(parts) != 6:
            raise ValueError(f"expected 6 coordinates, got {len(parts)}")
        return cls(tuple(parse_number(p.strip(), m) for p in parts))

    def scaled(self, lam: CyclotomicNumber) -> tuple:
        return tuple(lam * c for c in self.coords)

    def __str__(self) -> str:
        return "(" + " : ".join(str(c) for c in self.coords) + ")"


def _power_sums(xs) -> tuple:
    s2 = sum((x * x for x in xs[1:]), xs[0] * xs[0])
    s4 = sum((x * x * x * x for x in xs[1:]), xs[0] ** 4)
    return s2, s4


def quartic_value(x: QuarticPoint) -> CyclotomicNumber:
    """(sum x_i^2)^2 - 4 sum x_i^4."""
    s2, s4 = _power_sums(x.coords)
    return s2 * s2 - 4 * s4


def on_quartic(x: QuarticPoint) -> bool:
    return quartic_value(x).is_zero()


def gradient(x: QuarticPoint) -> tuple:
    s2, _ = _power_sums(x.coords)
    return tuple(4 * s2 * c - 16 * c * c * c for c in x.coords)


def is_singular(x: QuarticPoint) -> bool:
    """Singular on V: the gradient is proportional to (1, ..., 1) (Lagrange condition)."""
    if not on_quartic(x):
        raise ValueError("point is not on the quartic")
    g = gradient(x)
    return all(gi == g[0] for gi in g)


# ---------------------------------------------------------------- permutations

Perm = tuple  # images of 0..5


def act(sigma: Perm, xs: Sequence) -> tuple:
    """sigma moves the coordinate in slot i to slot sigma(i)."""
    out = [None] * 6
    for i, j in enumerate(sigma):
        out[j] = xs[i]
    return tuple(out)


def compose(s: Perm, t: Perm) -> Perm:
    """(s t)(i) = s(t(i)); acting by s t is acting by t first."""
    return tuple(s[t[i]] for i in range(6))


def perm_inverse(s: Perm) -> Perm:
    out = [0] * 6
    for i, j in enumerate(s):
        out[j] = i
    return tuple(out)


def cycles(s: Perm) -> list[tuple]:
    seen, out = set(), []
    for i in range(6):
        if i in seen:
            continue
        c = [i]
        seen.add(i)
        j = s[i]
        while j != i:
            c.append(j)
            seen.add(j)
            j = s[j]
        out.append(tuple(c))
    return out


def sign(s: Perm) -> int:
    return (-1) ** sum(len(c) - 1 for c in cycles(s))


def perm_order(s: Perm) -> int:
    return lcm(*(len(c) for c in cycles(s)))


def cycle_string(s: Perm) -> str:
    cs = [c for c in cycles(s) if len(c) > 1]
    return "".join("(" + ",".join(str(i + 1) for i in c) + ")" for c in cs) or "()"


def parse_cycles(text: str) -> Perm:
    """Parse 1-based cycle notation such as ``(1,2)(3,4)``."""
    s = list(range(6))
    text = text.replace(" ", "")
    if text in ("", "()", "e", "id"):
        return tuple(s)
    if not (text.startswith("(") and text.endswith(")")):
        raise ValueError(f"bad cycle notation {text!r}")
    used = set()
    for chunk in text[1:-1].split(")("):
        idx = [int(t) - 1 for t in chunk.split(",")]
        if any(not 0 <= i < 6 for i in idx) or used & set(idx) or len(set(idx)) != len(idx):
            raise ValueError(f"bad cycle notation {text!r}")
        used |= set(idx)
        for a, b in zip(idx, idx[1:] + idx[:1]):
            s[a] = b
    return tuple(s)


@dataclass(frozen=True)
class StabilizerElement:
    """A permutation with sigma(x) = lam * x."""

    sigma: Perm
    lam: CyclotomicNumber

    def __str__(self) -> str:
        return f"{cycle_string(self.sigma)} lambda={self.lam}"


def _proportional(ys, xs):
    """lam with ys = lam * xs, or None."""
    k = next(i for i, x in enumerate(xs) if not x.is_zero())
    if ys[k].is_zero():
        return None
    for i in range(6):
        if ys[i] * xs[k] != xs[i] * ys[k]:
            return None
    return ys[k] / xs[k]


def stabilizer(x: QuarticPoint) -> list[StabilizerElement]:
    """All sigma in S6 with sigma(x) proportional to x, scanning all 720 permutations."""
    if not on_quartic(x):
        raise ValueError("point is not on the quartic")
    out = []
    for s in itertools.permutations(range(6)):
        lam = _proportional(act(s, x.coords), x.coords)
        if lam is not None:
            out.append(StabilizerElement(s, lam))
    return out


# ---------------------------------------------------------------- exact linear algebra

def _rref(rows: list[list], m: int) -> tuple[list[list], list[int]]:
    rows = [list(r) for r in rows]
    piv = []
    r = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        k = next((i for i in range(r, len(rows)) if not rows[i][c].is_zero()), None)
        if k is None:
            continue
        rows[r], rows[k] = rows[k], rows[r]
        inv = rows[r][c].inverse()
        rows[r] = [v * inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and not rows[i][c].is_zero():
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        piv.append(c)
        r += 1
    return rows[:r], piv


def _nullspace(rows: list[list], ncols: int, m: int) -> list[list]:
    red, piv = _rref(rows, m) if rows else ([], [])
    zero, one = CyclotomicNumber.rational(0, m), CyclotomicNumber.rational(1, m)
    out = []
    for f in (c for c in range(ncols) if c not in piv):
        v = [zero] * ncols
        v[f] = one
        for row, p in zip(red, piv):
            v[p] = -row[f]
        out.append(v)
    return out


def _solve_in_basis(basis: list[list], v: list, m: int) -> list:
    """Coordinates of v in the given (independent) basis."""
    k = len(basis)
    rows = [[basis[j][i] for j in range(k)] + [v[i]] for i in range(len(v))]
    red, piv = _rref(rows, m)
    if piv and piv[-1] == k:
        raise ValueError("vector not in span")
    out = [CyclotomicNumber.rational(0, m)] * k
    for row, p in zip(red, piv):
        out[p] = row[k]
    return out


def _det(mat: list[list], m: int) -> CyclotomicNumber:
    mat = [list(r) for r in mat]
    n = len(mat)
    det = CyclotomicNumber.rational(1, m)
    for c in range(n):
        k = next((i for i in range(c, n) if not mat[i][c].is_zero()), None)
        if k is None:
            return CyclotomicNumber.rational(0, m)
        if k != c:
            mat[c], mat[k] = mat[k], mat[c]
            det = -det
        det = det * mat[c][c]
        inv = mat[c][c].inverse()
        for i in range(c + 1, n):
            if not mat[i][c].is_zero():
                f = mat[i][c] * inv
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[c])]
    return det


def tangent_matrix(x: QuarticPoint, s: StabilizerElement) -> list[list]:
    """Matrix of the induced action on T_x V = {u : sum u = 0, grad Q(x).u = 0} / <x>.

    The projective map [u] -> [sigma(u)] fixes [x]; its differential there is
    u -> sigma(u) / lam modulo x.
    """
    m = x.m
    if act(s.sigma, x.coords) != x.scaled(s.lam):
        raise ValueError("the element does not stabilize the point")
    if is_singular(x):
        raise ValueError("the point is singular on V")
    one = CyclotomicNumber.rational(1, m)
    w = _nullspace([[one] * 6, list(gradient(x))], 6, m)
    if len(w) != 4:
        raise ValueError("degenerate tangent computation")
    # basis of W starting with x: replace one basis vector by x
    xs = list(x.coords)
    coords_x = _solve_in_basis(w, xs, m)
    j = next(i for i, c in enumerate(coords_x) if not c.is_zero())
    basis = [xs] + [w[i] for i in range(4) if i != j]
    inv_lam = s.lam.inverse()
    cols = []
    for b in basis[1:]:
        img = [inv_lam * c for c in act(s.sigma, b)]
        cols.append(_solve_in_basis(basis, img, m)[1:])
    return [[cols[j][i] for j in range(3)] for i in range(3)]


def tangent_action_determinant(x: QuarticPoint, s: StabilizerElement) -> CyclotomicNumber:
    return _det(tangent_matrix(x, s), x.m)


def tangent_weights(x: QuarticPoint, s: StabilizerElement) -> tuple[list[int], int]:
    """Eigenvalue exponents (a_1, a_2, a_3) and the order r of the tangent action,
    with eigenvalues exp(2 pi i a_j / r)."""
    m = x.m
    mat = tangent_matrix(x, s)
    ident = [[CyclotomicNumber.rational(int(i == j), m) for j in range(3)] for i in range(3)]
    p, r = mat, 1
    while p != ident:
        p = [[sum((p[i][k] * mat[k][j] for k in range(1, 3)), p[i][0] * mat[0][j])
              for j in range(3)] for i in range(3)]
        r += 1
        if r > 2 * m:
            raise ValueError("tangent action has no finite order in this field")
    if m % r:
        raise ValueError(f"Q(zeta_{m}) lacks the {r}-th roots of unity")
    weights = []
    for a in range(r):
        mu = CyclotomicNumber.root_of_unity(r, a, m)
        shifted = [[mat[i][j] - (mu if i == j else 0) for j in range(3)] for i in range(3)]
        weights += [a] * len(_nullspace(shifted, 3, m))
    if len(weights) != 3:
        raise ValueError("tangent action is not diagonalizable over the field")
    return weights, r


def ages(weights: Sequence[tuple[int, int]]) -> list[Fraction]:
    """Ages of g^k, k = 1..r-1, for g with eigenvalues exp(2 pi i a_j / r_j)."""
    if not weights:
        return []
    r = lcm(*(rj for _, rj in weights))
    scaled = [a * (r // rj) for a, rj in weights]
    out = []
    for k in range(1, r):
        if all(k * a % r == 0 for a in scaled):
            continue  # acts trivially
        out.append(Fraction(sum(k * a % r for a in scaled), r))
    return out


def reid_tai(weights: Sequence[tuple[int, int]], terminal: bool = False) -> bool:
    """Every non-identity element has age >= 1 (canonical); > 1 when terminal=True."""
    return all(a > 1 if terminal else a >= 1 for a in ages(weights))


# ---------------------------------------------------------------- fixed loci of the basic types

FIXED_TYPES = ("(1,2)", "(1,2)(3,4)", "(1,2)(3,4)(5,6)", "(1,2,3)", "(1,2,3)(4,5,6)",
               "(1,2,3,4,5)")


@dataclass
class FixedComponent:
    dimension: int  # projective dimension
    equation: str  # defining equation in the eigenspace parameters ("" for the whole locus)
    label: str
    point: tuple | None = None  # for isolated points, as strings
    contained_in: tuple = ()  # every hyperplane x_a+x_b+x_c=0 or x_a=x_b containing it


@dataclass
class FixedCase:
    sigma: str
    lam: str  # exp(2 pi i k / r) written as "1", "-1" or "e(k/r)"
    order: int
    k: int
    eigen_dimension: int  # projective dimension of {sigma(x) = lam x, sum x = 0}
    components: list  # of FixedComponent; empty when the locus misses V
    eigen_point: tuple | None = None  # the eigenspace itself when it is a single point
    field: int = 1  # points are written in Q(zeta_field), z = exp(2 pi i / field)


def _lam_label(k: int, r: int) -> str:
    f = Fraction(k, r)
    if f == 0:
        return "1"
    if f == Fraction(1, 2):
        return "-1"
    return f"e({f.numerator}/{f.denominator})"


def classify_permutation_fixed_locus(sigma_type: str) -> list[FixedCase]:
    """Fixed points of sigma on V, for each eigenvalue lam, with geometric labels.

    Labels, tested in this order: "Sing V" (every point singular), "image of E"
    (inside a hyperplane x_a + x_b + x_c = 0), "divisor x_a=x_b" (inside such a
    hyperplane), "theta-orbit" (an isolated point of the form sigma(0:t:t^2:t^3:t^4:1)
    up to scale), otherwise "other".
    """
    import sympy

    if sigma_type.replace(" ", "") not in FIXED_TYPES:
        raise ValueError(f"unlisted permutation type {sigma_type!r}; expected one of {FIXED_TYPES}")
    sigma = parse_cycles(sigma_type)
    r = perm_order(sigma)
    cyc = cycles(sigma)
    z = sympy.Symbol("z")
    phi = sympy.Poly(list(reversed(cyclotomic_poly(r))), z)
    out = []
    for k in range(r):
        # lam = zeta_r^k; sigma(x) = lam x forces x_{c_{j+1}} = lam^{-1} x_{c_j} on each cycle
        usable = [c for c in cyc if (k * len(c)) % r == 0]
        params = sympy.symbols(f"a0:{len(usable)}")
        xs = [sympy.Integer(0)] * 6
        for a, c in zip(params, usable):
            for j, idx in enumerate(c):
                xs[idx] = a * z ** ((-k * j) % r)
        # sum x = 0: a cycle sums to len(c) * a when lam = 1 and to 0 otherwise
        free = list(params)
        if k == 0:
            last = params[-1]
            sol = sympy.solve(sum(len(c) * a for a, c in zip(params, usable)), last)[0]
            xs = [sympy.expand(x.subs(last, sol)) for x in xs]
            free = free[:-1]
        dim = len(free) - 1
        case = FixedCase(sigma_type, _lam_label(k, r), r, k, dim, [], field=r)
        if dim < 0:
            out.append(case)
            continue
        if dim == 0:
            case.eigen_point = tuple(map(str, _isolated_point(xs, free, None, r, z)))

        def red(expr):
            """Split a polynomial in z and the parameters into rational parts z^0..z^(deg-1)."""
            p = sympy.Poly(sympy.expand(expr), z, *free)
            p = p.rem(sympy.Poly(phi.as_expr(), z, *free))
            parts = {}
            for mon, c in p.terms():
                parts.setdefault(mon[0], 0)
                parts[mon[0]] += c * sympy.prod(v ** e for v, e in zip(free, mon[1:]))
            return [sympy.expand(v) for v in parts.values() if sympy.expand(v) != 0]

        s2 = sum(x ** 2 for x in xs)
        s4 = sum(x ** 4 for x in xs)
        qparts = red(s2 ** 2 - 4 * s4)
        grad = [4 * s2 * x - 16 * x ** 3 for x in xs]
        tests_sing = [g - grad[0] for g in grad[1:]]
        tests_e = {f"x{a+1}+x{b+1}+x{c+1}=0": xs[a] + xs[b] + xs[c]
                   for a, b, c in itertools.combinations(range(6), 3) if a == 0}
        tests_d = {f"x{a+1}=x{b+1}": xs[a] - xs[b] for a, b in itertools.combinations(range(6), 2)}

        if not qparts:
            factors = [(None, 1)]  # the whole eigenspace lies on V
        else:
            g = qparts[0]
            for extra in qparts[1:]:
                g = sympy.gcd(g, extra)
            if not g.free_symbols:
                out.append(case)  # no point of the eigenspace is on V
                continue
            factors = [(f, e) for f, e in sympy.factor_list(g, *free)[1]]

        for f, _ in factors:
            def vanishes(expr, f=f):
                for part in red(expr):
                    if f is None:
                        return False
                    if sympy.reduced(part, [f], *free)[1] != 0:
                        return False
                return True

            cdim = dim if f is None else dim - 1
            if cdim < 0:
                continue  # the factor has no projective zeros
            inside = tuple(name for name, t in {**tests_e, **tests_d}.items() if vanishes(t))
            label = "other"
            if all(vanishes(t) for t in tests_sing):
                label = "Sing V"
            else:
                hit = next((name for name, t in tests_e.items() if vanishes(t)), None)
                if hit:
                    label = f"image of E ({hit})"
                else:
                    hit = next((name for name, t in tests_d.items() if vanishes(t)), None)
                    if hit:
                        label = f"divisor {hit}"
            point = None
            if cdim == 0:
                point = _isolated_point(xs, free, f, r, z)
                if label == "other" and _is_theta_point(point):
                    label = "theta-orbit"
            eq = "" if f is None else f"{f} = 0"
            case.components.append(FixedComponent(
                cdim, eq, label, None if point is None else tuple(map(str, point)), inside))
        out.append(case)
    return out


def _isolated_point(xs, free, f, r, z) -> tuple:
    """Exact coordinates (in Q(zeta_r')) of a zero-dimensional fixed component."""
    import sympy

    if f is None:
        vals = {free[0]: 1} if free else {}
    else:
        # linear factor in two parameters, or a single free parameter
        var = next(v for v in reversed(free) if v in f.free_symbols)
        sol = sympy.solve(f, var, dict=True)[0]
        vals = {v: 1 for v in free if v != var}
        vals[var] = sol[var].subs(vals)
    out = []
    for x in xs:
        p = sympy.Poly(sympy.expand(x.subs(vals)), z)
        coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(p.all_coeffs())]
        out.append(CyclotomicNumber(coeffs, r))
    return tuple(out)


def _is_theta_point(xs: tuple) -> bool:
    """One zero coordinate and the others, up to scale, exactly the five 5th roots of unity."""
    zeros = [x for x in xs if x.is_zero()]
    rest = [x for x in xs if not x.is_zero()]
    if len(zeros) != 1:
        return False
    ratios = [y / rest[0] for y in rest]
    return len(set(ratios)) == 5 and all((q ** 5) == 1 for q in ratios)


# ---------------------------------------------------------------- integer symplectic matrices

IntMatrix = tuple  # 4x4 nested tuples of ints

PHI0 = ((1, 0, 0, 0), (0, -1, 0, 0), (0, 0, 1, 0), (0, 0, 0, -1))
_J = ((0, 0, 1, 0), (0, 0, 0, 1), (-1, 0, 0, 0), (0, -1, 0, 0))


def imul(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(4)) for j in range(4))
                 for i in range(4))


def itranspose(a: IntMatrix) -> IntMatrix:
    return tuple(tuple(a[j][i] for j in range(4)) for i in range(4))


def ineg(a: IntMatrix) -> IntMatrix:
    return tuple(tuple(-v for v in row) for row in a)


def is_integer_symplectic(a: IntMatrix) -> bool:
    return imul(imul(itranspose(a), _J), a) == _J


def iinverse(a: IntMatrix) -> IntMatrix:
    """Inverse of an integer symplectic matrix: -J tA J."""
    return ineg(imul(imul(_J, itranspose(a)), _J))


IDENTITY4 = tuple(tuple(int(i == j) for j in range(4)) for i in range(4))


def random_gamma1(rng: random.Random, length: int = 16) -> IntMatrix:
    """A random word in the standard generators of Sp(4, Z) and their inverses."""
    gens = [
        ((1, 0, 1, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)),
        ((1, 0, 0, 0), (0, 1, 0, 1), (0, 0, 1, 0), (0, 0, 0, 1)),
        ((1, 0, 0, 1), (0, 1, 1, 0), (0, 0, 1, 0), (0, 0, 0, 1)),
        _J,
    ]
    gens += [iinverse(g) for g in gens]
    g = IDENTITY4
    for _ in range(length):
        g = imul(g, rng.choice(gens))
    return g


def _skew(u, v) -> int:
    return u[0] * v[2] + u[1] * v[3] - u[2] * v[0] - u[3] * v[1]


def _matvec(a: IntMatrix, v) -> tuple:
    return tuple(sum(a[i][k] * v[k] for k in range(4)) for i in range(4))


class DegenerateInvolution(ValueError):
    """The gcd used by the normal-form construction vanishes."""


_SWAP = ((0, 1, 0, 0), (1, 0, 0, 0), (0, 0, 0, 1), (0, 0, 1, 0))


def _plus_pair(M: IntMatrix, degenerate: str) -> tuple[tuple, tuple, bool]:
    """e1, e3 in Ker(M - 1) with <e1, e3> = 1, by the Bezout construction.

    The third value reports whether d = gcd(b/2, a3/2, (a1-1)/2) vanished. Then
    b = a3 = 0 and a1 = 1, and Ker(M - 1) is spanned by (1, 0, 0, -c/2) and
    (0, 0, 1, a2/2), which already pair to 1.
    """
    a1, a2, b = M[0][0], M[0][1], M[0][3]
    a3, c = M[1][0], M[2][1]
    d = gcd(gcd(b // 2, a3 // 2), (a1 - 1) // 2)
    if d == 0:
        if degenerate == "raise":
            raise DegenerateInvolution("d = gcd(b/2, a3/2, (a1-1)/2) vanishes")
        return (1, 0, 0, -c // 2), (0, 0, 1, a2 // 2), True
    # alpha b/2 + beta (a1-1)/2 + gamma (-a3/2) = d
    g1, x1, y1 = egcd(b // 2, (a1 - 1) // 2)
    g2, x2, y2 = egcd(g1, -a3 // 2)
    alpha, beta, gamma = x2 * x1, x2 * y1, y2
    assert alpha * (b // 2) + beta * ((a1 - 1) // 2) + gamma * (-a3 // 2) == d == g2
    e1 = (b // (2 * d), 0, a3 // (2 * d), (1 - a1) // (2 * d))
    v1 = (0, -b // 2, (a1 + 1) // 2, a2 // 2)
    v2 = (a2 // 2, (1 - a1) // 2, c // 2, 0)
    v3 = ((a1 + 1) // 2, a3 // 2, 0, -c // 2)
    e3 = tuple(alpha * p + beta * q + gamma * s for p, q, s in zip(v1, v2, v3))
    return e1, e3, False


def involution_shape(M: IntMatrix) -> dict:
    """Check M is a nontrivial involution in the level-2 subgroup and read off its entries."""
    M = tuple(tuple(int(v) for v in row) for row in M)
    if len(M) != 4 or any(len(r) != 4 for r in M):
        raise ValueError("expected a 4x4 integer matrix")
    if not is_integer_symplectic(M):
        raise ValueError("matrix is not symplectic over Z")
    if any((M[i][j] - (i == j)) % 2 for i in range(4) for j in range(4)):
        raise ValueError("matrix is not congruent to 1 mod 2")
    if M in (IDENTITY4, ineg(IDENTITY4)):
        raise ValueError("matrix is +-1")
    if imul(M, M) != IDENTITY4:
        raise ValueError("matrix is not an involution")
    a1, a2, b = M[0][0], M[0][1], M[0][3]
    a3, c = M[1][0], M[2][1]
    shape = ((a1, a2, 0, b), (a3, -a1, -b, 0), (0, c, a1, a3), (-c, 0, a2, -a1))
    if M != shape:
        raise ValueError("matrix does not have the trace-zero involution shape")
    return {"a1": a1, "a2": a2, "a3": a3, "b": b, "c": c}


@dataclass
class NormalForm:
    basis: tuple  # e1, e2, e3, e4
    degenerate: tuple  # (d vanished for the +1 pair, d vanished for the -1 pair)

    def matrix(self) -> IntMatrix:
        return basis_matrix(self.basis)


def involution_normal_form(M: IntMatrix, degenerate: str = "direct") -> NormalForm:
    """Integer basis e1..e4 with M e_i = (-1)^(i+1) e_i and <e1,e3> = <e2,e4> = 1.

    The matrix with columns e1..e4 conjugates M to phi0. The -1 pair comes from
    the +1 pair of -S M S, where S swaps e1<->e2 and e3<->e4, mapped back by S.
    A vanishing gcd is reported in ``degenerate``; pass ``degenerate="raise"``
    to turn it into DegenerateInvolution instead.
    """
    involution_shape(M)
    M = tuple(tuple(int(v) for v in row) for row in M)
    e1, e3, deg_plus = _plus_pair(M, degenerate)
    f1, f3, deg_minus = _plus_pair(ineg(imul(imul(_SWAP, M), _SWAP)), degenerate)
    e2, e4 = _matvec(_SWAP, f1), _matvec(_SWAP, f3)
    basis = (e1, e2, e3, e4)
    for i, e in enumerate(basis):
        sgn = 1 if i % 2 == 0 else -1
        if _matvec(M, e) != tuple(sgn * v for v in e):
            raise AssertionError("eigenvector check failed")
    if _skew(e1, e3) != 1 or _skew(e2, e4) != 1:
        raise AssertionError("pairing check failed")
    return NormalForm(basis, (deg_plus, deg_minus))


def basis_matrix(basis: Sequence[Sequence[int]]) -> IntMatrix:
    return tuple(tuple(basis[j][i] for j in range(4)) for i in range(4))


def conjugates_to_phi0(M: IntMatrix, basis) -> bool:
    g = basis_matrix(basis.basis if isinstance(basis, NormalForm) else basis)
    return is_integer_symplectic(g) and imul(imul(iinverse(g), M), g) == PHI0


# ---------------------------------------------------------------- the (i, i) stabilizer

STAB_II = {
    "phi": ((0, 1, 0, 0), (1, 0, 0, 0), (0, 0, 0, 1), (0, 0, 1, 0)),
    "alpha": ((1, 0, 0, 0), (0, 0, 0, 1), (0, 0, 1, 0), (0, -1, 0, 0)),
    "beta": ((0, 0, 1, 0), (0, 1, 0, 0), (-1, 0, 0, 0), (0, 0, 0, 1)),
}


def pm_canon(a: IntMatrix) -> IntMatrix:
    """Representative of a modulo +-1: the first nonzero entry is positive."""
    first = next(v for row in a for v in row if v)
    return a if first > 0 else ineg(a)


def pm_closure(gens: Sequence[IntMatrix], cap: int = 10_000) -> set:
    one = pm_canon(IDENTITY4)
    seen = {one}
    frontier = [one]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = pm_canon(imul(x, g))
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
                    if len(seen) > cap:
                        raise ValueError("closure exceeded the cap")
        frontier = nxt
    return seen


@dataclass
class StabIIReport:
    relations: dict
    order: int
    nonabelian: bool

    @property
    def ok(self) -> bool:
        return all(self.relations.values()) and self.order == 16 and self.nonabelian


def stab_ii_relations() -> StabIIReport:
    """Relations among phi, alpha, beta modulo +-1 and the order of the group they generate."""
    phi, al, be = STAB_II["phi"], STAB_II["alpha"], STAB_II["beta"]

    def eq(a, b):
        return pm_canon(a) == pm_canon(b)

    def pw(a, k):
        out = IDENTITY4
        for _ in range(k):
            out = imul(out, a)
        return out

    one = IDENTITY4
    rel = {
        "alpha beta = beta alpha": eq(imul(al, be), imul(be, al)),
        "alpha^2 = beta^2": eq(pw(al, 2), pw(be, 2)),
        "phi alpha = beta phi": eq(imul(phi, al), imul(be, phi)),
        "phi^2 = 1": eq(pw(phi, 2), one),
        "alpha^4 = 1": eq(pw(al, 4), one),
        "beta^4 = 1": eq(pw(be, 4), one),
        "all symplectic": all(is_integer_symplectic(g) for g in (phi, al, be)),
    }
    group = pm_closure([phi, al, be])
    return StabIIReport(rel, len(group), not eq(imul(phi, al), imul(al, phi)))
