"""Finite formal characters and vector partition functions.

A formal character is a finitely supported integer function on the weight
lattice. The infinite geometric-series characters attached to a polarized
weight list are never materialized; their multiplicity function is
evaluated pointwise by an exact deletion recursion, so every value that
leaves this module is an integer computed in exact arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .lattice import (
    NotPolarizing,
    Weight,
    WeightList,
    dot,
    is_zero,
    primitive,
    rational,
    vec_add,
    vec_scale,
    vec_sub,
    zero_vector,
)


class UngradedSupport(ValueError):
    """The convolution has no finiteness grading for the given direction."""


class FormalCharacter:
    """Finitely supported integer-valued function on the weight lattice."""

    __slots__ = ("rank", "_terms")

    def __init__(self, rank: int, terms=None):
        self.rank = rank
        self._terms = {}
        if terms:
            for w, c in dict(terms).items():
                if c:
                    self._terms[tuple(w)] = int(c)

    @classmethod
    def zero(cls, rank: int) -> "FormalCharacter":
        return cls(rank)

    @classmethod
    def unit(cls, rank: int) -> "FormalCharacter":
        return cls(rank, {zero_vector(rank): 1})

    @classmethod
    def term(cls, rank: int, w, c: int = 1) -> "FormalCharacter":
        return cls(rank, {tuple(w): c})

    def coeff(self, w) -> int:
        return self._terms.get(tuple(w), 0)

    def items(self):
        return sorted(self._terms.items())

    def support(self):
        return sorted(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __eq__(self, other) -> bool:
        return isinstance(other, FormalCharacter) and self.rank == other.rank and self._terms == other._terms

    def __add__(self, other) -> "FormalCharacter":
        out = dict(self._terms)
        for w, c in other._terms.items():
            out[w] = out.get(w, 0) + c
        return FormalCharacter(self.rank, out)

    def __neg__(self) -> "FormalCharacter":
        return FormalCharacter(self.rank, {w: -c for w, c in self._terms.items()})

    def __sub__(self, other) -> "FormalCharacter":
        return self + (-other)

    def __mul__(self, other) -> "FormalCharacter":
        out = {}
        for w1, c1 in self._terms.items():
            for w2, c2 in other._terms.items():
                w = vec_add(w1, w2)
                out[w] = out.get(w, 0) + c1 * c2
        return FormalCharacter(self.rank, out)

    def scale(self, c: int) -> "FormalCharacter":
        return FormalCharacter(self.rank, {w: c * v for w, v in self._terms.items()})

    def restrict(self, box: "Box") -> "FormalCharacter":
        return FormalCharacter(self.rank, {w: c for w, c in self._terms.items() if box.contains(w)})

    def total(self) -> int:
        return sum(self._terms.values())

    def __repr__(self) -> str:
        return f"FormalCharacter({self.rank}, {dict(self.items())})"


def fc_multiply(a: FormalCharacter, b: FormalCharacter) -> FormalCharacter:
    """Convolution product of two finite characters."""
    return a * b


def one_minus_product(rank: int, weights) -> FormalCharacter:
    """Expanded product of factors (1 - e_w) over the given weights."""
    out = FormalCharacter.unit(rank)
    for w in weights:
        out = out * (FormalCharacter.unit(rank) - FormalCharacter.term(rank, w))
    return out


@dataclass(frozen=True)
class Box:
    """Axis-aligned integer box of lattice points, bounds inclusive."""

    lo: Weight
    hi: Weight

    def __post_init__(self):
        if len(self.lo) != len(self.hi) or any(a > b for a, b in zip(self.lo, self.hi)):
            raise ValueError("invalid box bounds")

    @classmethod
    def centered(cls, rank: int, radius: int) -> "Box":
        return cls((-radius,) * rank, (radius,) * rank)

    @property
    def rank(self) -> int:
        return len(self.lo)

    def contains(self, w) -> bool:
        return all(a <= x <= b for a, x, b in zip(self.lo, w, self.hi))

    def points(self):
        yield from product(*(range(a, b + 1) for a, b in zip(self.lo, self.hi)))

    def shrink(self, margin: int) -> "Box":
        lo = tuple(a + margin for a in self.lo)
        hi = tuple(b - margin for b in self.hi)
        return Box(lo, hi)

    def shell(self):
        for w in self.points():
            if any(x == a or x == b for a, x, b in zip(self.lo, w, self.hi)):
                yield w

    def size(self) -> int:
        n = 1
        for a, b in zip(self.lo, self.hi):
            n *= b - a + 1
        return n


# ---------------------------------------------------------------------------
# partition function


def _direction_vector(y) -> Weight:
    ry = rational(y)
    if is_zero(ry):
        raise NotPolarizing(None)
    return primitive(ry)


_KPF_TABLES: dict[tuple, tuple] = {}


def _kpf_table(phi: WeightList, ydir: Weight):
    key = (phi.rank, phi.weights, ydir)
    tab = _KPF_TABLES.get(key)
    if tab is None:
        order = []
        for w in phi.weights:
            p = dot(w, ydir)
            if p == 0:
                raise NotPolarizing(w)
            order.append((w, p))
        order.sort(key=lambda wp: (-abs(wp[1]), wp[0]))
        has_neg = [False] * (len(order) + 1)
        for i in range(len(order) - 1, -1, -1):
            has_neg[i] = has_neg[i + 1] or order[i][1] < 0
        tab = (tuple(order), tuple(has_neg), {})
        _KPF_TABLES[key] = tab
    return tab


def kpf_eval(phi: WeightList, y, lam) -> int:
    """Multiplicity of the geometric-series character of a polarized list at a lattice point.

    Follows the deletion recursion obtained by multiplying the series by a
    single factor (1 - e_w); memoized, exact, and zero outside the pointed
    support cone.
    """
    ydir = _direction_vector(y)
    order, has_neg, memo = _kpf_table(phi, ydir)
    lam = tuple(int(x) for x in lam)
    zero = zero_vector(phi.rank)
    m = len(order)

    def base(i, pt):
        if i == m:
            return 1 if pt == zero else 0
        g = dot(pt, ydir)
        if g < 0:
            return 0
        if g == 0:
            return 1 if pt == zero and not has_neg[i] else 0
        return None

    def deps(i, pt):
        w, p = order[i]
        if p > 0:
            return (i, vec_sub(pt, w)), (i + 1, pt)
        psi = vec_scale(-1, w)
        shifted = vec_sub(pt, psi)
        return (i, shifted), (i + 1, shifted)

    target = (0, lam)
    stack = [target]
    while stack:
        s = stack.pop()
        if s in memo:
            continue
        b = base(*s)
        if b is not None:
            memo[s] = b
            continue
        d0, d1 = deps(*s)
        missing = [d for d in (d0, d1) if d not in memo]
        if missing:
            stack.append(s)
            stack.extend(missing)
        else:
            i = s[0]
            if order[i][1] > 0:
                memo[s] = memo[d0] + memo[d1]
            else:
                memo[s] = memo[d0] - memo[d1]
    return memo[target]


def theta_on_box(phi: WeightList, y, box: Box) -> FormalCharacter:
    """Restriction of the polarized series to a box, sharing one memo table."""
    vals = {}
    for w in box.points():
        c = kpf_eval(phi, y, w)
        if c:
            vals[w] = c
    return FormalCharacter(phi.rank, vals)


def brute_force_kpf(phi: WeightList, y, lam) -> int:
    """Independent oracle for kpf_eval: direct enumeration of series exponents.

    Expands the reoriented geometric series by depth-first search over
    exponent tuples; used only by tests.
    """
    ydir = _direction_vector(y)
    from .lattice import polarize as _pol

    plus, minus = _pol(phi, ydir)
    sign = (-1) ** len(minus)
    shift = zero_vector(phi.rank)
    for w in minus:
        shift = vec_sub(shift, w)
    gens = list(plus.weights) + [vec_scale(-1, w) for w in minus.weights]
    target = vec_sub(tuple(int(x) for x in lam), shift)
    tgrade = dot(target, ydir)
    grades = [dot(g, ydir) for g in gens]

    def count(i, rest, rgrade):
        if rgrade < 0:
            return 0
        if i == len(gens):
            return 1 if is_zero(rest) else 0
        total = 0
        k = 0
        while k * grades[i] <= rgrade:
            total += count(i + 1, vec_sub(rest, vec_scale(k, gens[i])), rgrade - k * grades[i])
            k += 1
        return total

    return sign * count(0, target, tgrade)


# ---------------------------------------------------------------------------
# polarized series and graded convolution


@dataclass(frozen=True)
class PolarizedSeries:
    """Symbolic geometric-series character: sign, shift, and reoriented generators."""

    phi: WeightList
    direction: Weight
    sign: int = field(compare=False)
    shift: Weight = field(compare=False)
    gens: tuple[Weight, ...] = field(compare=False)
    _cone: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def of(cls, phi: WeightList, y) -> "PolarizedSeries":
        from .lattice import polarize as _pol

        if phi:
            ydir = _direction_vector(y)
            plus, minus = _pol(phi, ydir)
        else:
            ydir = zero_vector(phi.rank)
            plus = minus = WeightList.of(phi.rank, [])
        shift = zero_vector(phi.rank)
        for w in minus:
            shift = vec_sub(shift, w)
        gens = tuple(list(plus.weights) + [vec_scale(-1, w) for w in minus.weights])
        return cls(phi, ydir, (-1) ** len(minus), shift, gens)

    def multiplicity(self, lam) -> int:
        if not self.phi:
            return 1 if is_zero(lam) else 0
        return kpf_eval(self.phi, self.direction, lam)

    def cone_levels(self, grade: Weight, cap: int):
        """Lattice points of the generator cone bucketed by grade value, up to cap."""
        key = tuple(grade)
        cached = self._cone.get(key)
        if cached is not None and cached[0] >= cap:
            return cached[1]
        new_cap = max(cap, 2 * cached[0] if cached else cap)
        pts = {zero_vector(self.phi.rank)}
        for g in self.gens:
            p = dot(g, grade)
            snapshot = list(pts)
            for pt in snapshot:
                base = dot(pt, grade)
                k = 1
                while base + k * p <= new_cap:
                    pts.add(vec_add(pt, vec_scale(k, g)))
                    k += 1
        levels: dict[int, list] = {}
        for pt in pts:
            levels.setdefault(dot(pt, grade), []).append(pt)
        self._cone[key] = (new_cap, levels)
        return levels


def graded_convolution_eval(series: PolarizedSeries, qp, grade, lam) -> int:
    """Multiplicity of (series x quasi-polynomial character) at a point.

    The grading direction must be strictly positive on every reoriented
    generator and constant on the support translates of the
    quasi-polynomial, which makes the convolution sum provably finite.
    """
    lam = tuple(int(x) for x in lam)
    if not series.gens:
        return qp.value(lam)
    if is_zero(rational(grade)):
        raise UngradedSupport("zero grading direction with nonempty series")
    grade_int = primitive(grade)
    for g in series.gens:
        if dot(g, grade_int) <= 0:
            raise UngradedSupport(f"generator {g} not graded positively")
    for b in qp.carrier_basis:
        if dot(b, grade_int) != 0:
            raise UngradedSupport(f"carrier direction {b} pairs with the grading")
    c = dot(vec_sub(lam, qp.offset), grade_int)
    if c < 0:
        return 0
    levels = series.cone_levels(grade_int, c)
    total = 0
    for nu in levels.get(c, ()):
        coeff = series.multiplicity(nu)
        if coeff:
            v = qp.value(vec_sub(lam, nu))
            if v:
                total += coeff * v
    return total
