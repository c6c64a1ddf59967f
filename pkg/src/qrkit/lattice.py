"""Exact lattice, subspace, and chamber primitives.

Everything in this package runs on integers and `fractions.Fraction`;
floating point is banned. Weights are integer tuples in a fixed basis of
the weight lattice, direction vectors in the dual space pair with weights
through the plain dot product, and a positive definite Gram matrix
supplies the geometry whenever orthogonal projections are needed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import gcd, lcm

Weight = tuple[int, ...]
RationalVector = tuple[Fraction, ...]


class NotPolarizing(ValueError):
    """A direction vector pairs to zero with some list element."""

    def __init__(self, weight):
        self.weight = weight
        super().__init__(f"direction pairs to zero with {weight}")


class NotRegular(ValueError):
    """The point lies on a hyperplane spanned by list elements."""


class OnWall(ValueError):
    """The point sits on an affine wall of the alcove arrangement."""

    def __init__(self, point_id, hyperplane):
        self.point_id = point_id
        self.hyperplane = hyperplane
        super().__init__(f"on wall {hyperplane} attached to {point_id}")


class NotGeneric(ValueError):
    """A point violates one of the genericity conditions for a subspace."""

    def __init__(self, subspace, reason):
        self.subspace = subspace
        self.reason = reason
        super().__init__(f"{reason} (subspace of dim {subspace.dim})")


class ExhaustedRetries(RuntimeError):
    """The perturbation search ran out of attempts."""


def dot(u, v):
    """Exact dot product; lengths must agree."""
    if len(u) != len(v):
        raise ValueError("dimension mismatch")
    return sum(a * b for a, b in zip(u, v))


def rational(v) -> RationalVector:
    return tuple(Fraction(x) for x in v)


def vec_add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vec_scale(c, v):
    return tuple(c * x for x in v)


def zero_vector(rank: int) -> Weight:
    return (0,) * rank


def is_zero(v) -> bool:
    return all(x == 0 for x in v)


def primitive(v) -> Weight:
    """Scale a nonzero rational vector to a primitive integer vector, keeping orientation."""
    den = lcm(*(Fraction(x).denominator for x in v)) if v else 1
    ints = [int(Fraction(x) * den) for x in v]
    g = gcd(*ints) if any(ints) else 1
    if g == 0:
        raise ValueError("zero vector has no primitive form")
    return tuple(x // g for x in ints)


def as_integer_vector(v) -> Weight:
    """Cast exact rationals with denominator one back to an integer tuple."""
    out = []
    for x in v:
        f = Fraction(x)
        if f.denominator != 1:
            raise ValueError(f"non-integer coordinate {x}")
        out.append(f.numerator)
    return tuple(out)


# ---------------------------------------------------------------------------
# exact linear algebra


def rref(rows):
    """Reduced row echelon form over the rationals.

    Returns (rows, pivots) where rows have leading coefficient one and
    zeros above and below each pivot.
    """
    m = [[Fraction(x) for x in row] for row in rows]
    pivots = []
    r = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        lead = m[r][c]
        m[r] = [x / lead for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def solve_exact(rows, rhs):
    """Solve A x = b exactly; returns None when inconsistent.

    Free variables, if any, are set to zero.
    """
    n = len(rows[0]) if rows else 0
    aug = [list(row) + [b] for row, b in zip(rows, rhs)]
    red, pivots = rref(aug)
    sol = [Fraction(0)] * n
    for row, p in zip(red, pivots):
        if p == n:
            return None
        sol[p] = row[n]
    return tuple(sol)


def integer_kernel(rows, n):
    """Basis of the saturated lattice {x in Z^n : A x = 0} via unimodular column reduction."""
    m = len(rows)
    cols = [[rows[i][j] for i in range(m)] for j in range(n)]
    u = [[1 if i == j else 0 for i in range(n)] for j in range(n)]
    p = 0
    for r in range(m):
        while True:
            live = [j for j in range(p, n) if cols[j][r] != 0]
            if not live:
                break
            j0 = min(live, key=lambda j: abs(cols[j][r]))
            cols[p], cols[j0] = cols[j0], cols[p]
            u[p], u[j0] = u[j0], u[p]
            done = True
            for j in range(p + 1, n):
                if cols[j][r] == 0:
                    continue
                q = cols[j][r] // cols[p][r]
                cols[j] = [a - q * b for a, b in zip(cols[j], cols[p])]
                u[j] = [a - q * b for a, b in zip(u[j], u[p])]
                if cols[j][r] != 0:
                    done = False
            if done:
                p += 1
                break
    return [tuple(u[j]) for j in range(p, n)]


def hnf_rows(vectors):
    """Canonical row form of an integer lattice basis (positive pivots, reduced above)."""
    rows = [list(v) for v in vectors if not is_zero(v)]
    if not rows:
        return ()
    n = len(rows[0])
    out = []
    for c in range(n):
        live = [r for r in rows if r[c] != 0]
        if not live:
            continue
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[c]))
            piv = live[0]
            for r in live[1:]:
                q = r[c] // piv[c]
                for j in range(n):
                    r[j] -= q * piv[j]
            live = [r for r in live if r[c] != 0]
        piv = live[0]
        if piv[c] < 0:
            for j in range(n):
                piv[j] = -piv[j]
        rows = [r for r in rows if r is not piv and not is_zero(r)]
        for prev in out:
            q = prev[c] // piv[c]
            if q:
                for j in range(n):
                    prev[j] -= q * piv[j]
        out.append(piv)
    return tuple(tuple(r) for r in out)


# ---------------------------------------------------------------------------
# Gram matrices


@dataclass(frozen=True)
class Gram:
    """Positive definite scalar product on the rational span of the weight lattice."""

    entries: tuple[tuple[Fraction, ...], ...]

    @classmethod
    def from_rows(cls, rows) -> "Gram":
        ent = tuple(tuple(Fraction(x) for x in row) for row in rows)
        g = cls(ent)
        if not g.is_symmetric():
            raise ValueError("Gram matrix must be symmetric")
        if not g.is_positive_definite():
            raise ValueError("Gram matrix must be positive definite")
        return g

    @classmethod
    def identity(cls, rank: int) -> "Gram":
        return cls(tuple(tuple(Fraction(1 if i == j else 0) for j in range(rank)) for i in range(rank)))

    @property
    def rank(self) -> int:
        return len(self.entries)

    def is_symmetric(self) -> bool:
        n = self.rank
        return all(self.entries[i][j] == self.entries[j][i] for i in range(n) for j in range(n))

    def is_positive_definite(self) -> bool:
        # leading principal minors via fraction-free expansion
        n = self.rank
        for k in range(1, n + 1):
            if _det([row[:k] for row in self.entries[:k]]) <= 0:
                return False
        return True

    def pair(self, u, v) -> Fraction:
        gv = self.apply(v)
        return sum(Fraction(a) * b for a, b in zip(u, gv))

    def apply(self, v) -> RationalVector:
        """Matrix action G.v; pairing with the result by plain dot equals self.pair."""
        return tuple(sum(row[j] * Fraction(v[j]) for j in range(self.rank)) for row in self.entries)


def _det(rows):
    m = [[Fraction(x) for x in row] for row in rows]
    n = len(m)
    sign = 1
    for c in range(n):
        pr = next((i for i in range(c, n) if m[i][c] != 0), None)
        if pr is None:
            return Fraction(0)
        if pr != c:
            m[c], m[pr] = m[pr], m[c]
            sign = -sign
        for i in range(c + 1, n):
            f = m[i][c] / m[c][c]
            m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    out = Fraction(sign)
    for i in range(n):
        out *= m[i][i]
    return out


def det_int(rows) -> int:
    """Determinant of a square integer matrix, exact."""
    d = _det(rows)
    return int(d)


# ---------------------------------------------------------------------------
# weight lists


@dataclass(frozen=True)
class WeightList:
    """Finite multiset of nonzero weights, kept in canonical lexicographic order."""

    rank: int
    weights: tuple[Weight, ...]

    @classmethod
    def of(cls, rank: int, items) -> "WeightList":
        ws = []
        for it in items:
            w = tuple(int(x) for x in it)
            if len(w) != rank:
                raise ValueError(f"weight {w} has wrong length for rank {rank}")
            if is_zero(w):
                raise ValueError("weight lists may not contain zero")
            ws.append(w)
        return cls(rank, tuple(sorted(ws)))

    @classmethod
    def from_pairs(cls, rank: int, pairs) -> "WeightList":
        ws = []
        for w, m in pairs:
            if m < 1:
                raise ValueError("multiplicities must be positive")
            ws.extend([tuple(int(x) for x in w)] * m)
        return cls.of(rank, ws)

    def pairs(self):
        out = []
        for w in self.support():
            out.append((w, self.weights.count(w)))
        return tuple(out)

    def support(self) -> tuple[Weight, ...]:
        seen = []
        for w in self.weights:
            if not seen or seen[-1] != w:
                seen.append(w)
        return tuple(seen)

    def __len__(self) -> int:
        return len(self.weights)

    def __iter__(self):
        return iter(self.weights)

    def __bool__(self) -> bool:
        return bool(self.weights)

    def remove_one(self, w: Weight) -> "WeightList":
        ws = list(self.weights)
        ws.remove(tuple(w))
        return WeightList(self.rank, tuple(ws))

    def restrict(self, s: "Subspace") -> "WeightList":
        """Sublist of elements lying in the subspace (multiplicities kept)."""
        return WeightList(self.rank, tuple(w for w in self.weights if s.contains(w)))

    def exclude(self, s: "Subspace") -> "WeightList":
        """Sublist of elements outside the subspace (multiplicities kept)."""
        return WeightList(self.rank, tuple(w for w in self.weights if not s.contains(w)))


def polarize(phi: WeightList, y) -> tuple[WeightList, WeightList]:
    """Split a list by the sign of the pairing with y (plain dot in lattice coordinates)."""
    plus, minus = [], []
    for w in phi:
        p = dot(w, rational(y))
        if p > 0:
            plus.append(w)
        elif p < 0:
            minus.append(w)
        else:
            raise NotPolarizing(w)
    return WeightList(phi.rank, tuple(sorted(plus))), WeightList(phi.rank, tuple(sorted(minus)))


def is_polarizing(phi: WeightList, y) -> bool:
    ry = rational(y)
    return all(dot(w, ry) != 0 for w in phi.support())


# ---------------------------------------------------------------------------
# subspaces


@dataclass(frozen=True)
class Subspace:
    """Rational subspace in canonical form: primitive integer RREF rows."""

    rank: int
    rows: tuple[Weight, ...]
    _qrows: tuple[RationalVector, ...] = field(compare=False, repr=False, default=())
    _pivots: tuple[int, ...] = field(compare=False, repr=False, default=())

    @classmethod
    def span(cls, rank: int, vectors) -> "Subspace":
        vs = [rational(v) for v in vectors if not is_zero(v)]
        if not vs:
            return cls(rank, (), (), ())
        qrows, pivots = rref(vs)
        rows = tuple(primitive(r) for r in qrows)
        return cls(rank, rows, tuple(tuple(r) for r in qrows), tuple(pivots))

    @property
    def dim(self) -> int:
        return len(self.rows)

    def _ensure_q(self):
        if self.dim and not self._qrows:
            qrows, pivots = rref([rational(r) for r in self.rows])
            object.__setattr__(self, "_qrows", tuple(tuple(r) for r in qrows))
            object.__setattr__(self, "_pivots", tuple(pivots))

    def reduce(self, v) -> RationalVector:
        """Residual of v after eliminating pivot coordinates; canonical coset key mod the subspace."""
        self._ensure_q()
        res = list(rational(v))
        for row, p in zip(self._qrows, self._pivots):
            f = res[p]
            if f != 0:
                res = [a - f * b for a, b in zip(res, row)]
        return tuple(res)

    def contains(self, v) -> bool:
        return is_zero(self.reduce(v))


def rational_subspaces(phi: WeightList) -> frozenset[Subspace]:
    """All subspaces spanned by sublists, the zero space and the full span included."""
    support = phi.support()
    out = {Subspace.span(phi.rank, ())}
    maxdim = Subspace.span(phi.rank, support).dim
    for size in range(1, maxdim + 1):
        for combo in combinations(support, size):
            out.add(Subspace.span(phi.rank, combo))
    return frozenset(out)


def orthogonal_project(gamma, s: Subspace, g: Gram):
    """Orthogonal projection onto the subspace under the Gram product.

    Returns (gamma_s, y) with y = gamma_s - gamma, so gamma = gamma_s - y
    and y is Gram-orthogonal to the subspace.
    """
    gamma = rational(gamma)
    if s.dim == 0:
        zero = tuple(Fraction(0) for _ in gamma)
        return zero, vec_sub(zero, gamma)
    basis = [rational(r) for r in s.rows]
    normal = [[g.pair(bi, bj) for bj in basis] for bi in basis]
    rhs = [g.pair(bi, gamma) for bi in basis]
    coeffs = solve_exact(normal, rhs)
    gamma_s = tuple(sum(c * b[i] for c, b in zip(coeffs, basis)) for i in range(len(gamma)))
    return gamma_s, vec_sub(gamma_s, gamma)


def sublattice_basis(s: Subspace) -> tuple[Weight, ...]:
    """Canonical basis of the saturated lattice of integer points in the subspace."""
    if s.dim == 0:
        return ()
    ann = integer_kernel([list(r) for r in s.rows], s.rank)
    if not ann:
        ker = [tuple(1 if i == j else 0 for j in range(s.rank)) for i in range(s.rank)]
    else:
        ker = integer_kernel([list(a) for a in ann], s.rank)
    return hnf_rows(ker)


def basis_coordinates(basis, v):
    """Coordinates of v in an integer basis; None if v is outside the span."""
    if not basis:
        return () if is_zero(v) else None
    n = len(basis[0])
    rows = [[Fraction(basis[j][i]) for j in range(len(basis))] for i in range(n)]
    sol = solve_exact(rows, rational(v))
    if sol is None:
        return None
    recon = tuple(sum(sol[j] * basis[j][i] for j in range(len(basis))) for i in range(n))
    if recon != rational(v):
        return None
    return sol


# ---------------------------------------------------------------------------
# arrangements, topes


@dataclass(frozen=True)
class Arrangement:
    """Hyperplane data of a weight list inside its span, in saturated-basis coordinates."""

    phi: WeightList
    span: Subspace
    basis: tuple[Weight, ...]
    normals: tuple[Weight, ...]  # primitive normals in basis coordinates, canonical order
    walls: tuple[Subspace, ...]


_ARRANGEMENTS: dict[WeightList, Arrangement] = {}


def arrangement_of(phi: WeightList) -> Arrangement:
    if phi in _ARRANGEMENTS:
        return _ARRANGEMENTS[phi]
    span = Subspace.span(phi.rank, phi.support())
    basis = sublattice_basis(span)
    d = span.dim
    walls, normals = [], []
    if d >= 1:
        for s in rational_subspaces(phi):
            if s.dim != d - 1:
                continue
            if s.dim == 0:
                coord_rows = []
            else:
                coord_rows = [
                    list(as_integer_vector(vec_scale(lcm(*(c.denominator for c in bc)), bc)))
                    for bc in (basis_coordinates(basis, r) for r in s.rows)
                ]
            if coord_rows:
                ker = integer_kernel(coord_rows, d)
            else:
                ker = [tuple(1 if i == j else 0 for j in range(d)) for i in range(d)]
            if len(ker) != 1:
                raise AssertionError("hyperplane normal is not unique")
            n = primitive(ker[0])
            lead = next(x for x in n if x != 0)
            if lead < 0:
                n = tuple(-x for x in n)
            walls.append(s)
            normals.append(n)
    order = sorted(range(len(normals)), key=lambda i: normals[i])
    arr = Arrangement(
        phi,
        span,
        basis,
        tuple(normals[i] for i in order),
        tuple(walls[i] for i in order),
    )
    _ARRANGEMENTS[phi] = arr
    return arr


@dataclass(frozen=True)
class TopeId:
    """Chamber of the span of a list, identified by its sign vector with a stored witness."""

    phi_rank: int
    phi_weights: tuple[Weight, ...]
    signs: tuple[int, ...]
    witness: RationalVector = field(compare=False)


def is_regular(gamma, phi: WeightList) -> bool:
    """True iff gamma lies in the span and on no hyperplane spanned by list elements."""
    arr = arrangement_of(phi)
    if not arr.span.contains(gamma):
        return False
    if arr.span.dim == 0:
        return True
    coords = basis_coordinates(arr.basis, gamma)
    return all(dot(n, coords) != 0 for n in arr.normals)


def tope_of(gamma, phi: WeightList) -> TopeId:
    """Sign vector of a regular point against every spanned hyperplane."""
    arr = arrangement_of(phi)
    gamma = rational(gamma)
    if not arr.span.contains(gamma):
        raise NotRegular(f"{gamma} is outside the span")
    coords = basis_coordinates(arr.basis, gamma) if arr.span.dim else ()
    signs = []
    for n in arr.normals:
        p = dot(n, coords)
        if p == 0:
            raise NotRegular(f"{gamma} lies on a spanned hyperplane")
        signs.append(1 if p > 0 else -1)
    return TopeId(phi.rank, phi.weights, tuple(signs), gamma)


# ---------------------------------------------------------------------------
# generic points for the decomposition conditions


def validate_generic(phi: WeightList, g: Gram, gamma) -> None:
    """Check the two chamber conditions for every spanned subspace; raise NotGeneric on failure."""
    gamma = rational(gamma)
    span = Subspace.span(phi.rank, phi.support())
    if not span.contains(gamma):
        raise NotGeneric(span, "point is outside the span of the list")
    for s in rational_subspaces(phi):
        gamma_s, y = orthogonal_project(gamma, s, g)
        inside = phi.restrict(s)
        if not is_regular(gamma_s, inside):
            raise NotGeneric(s, "projection is not regular for the restricted list")
        outside = phi.exclude(s)
        for w in outside.support():
            if g.pair(w, y) == 0:
                raise NotGeneric(s, f"orthogonal component fails to polarize {w}")


_PRIMES = (97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151)


def generic_point(phi: WeightList, g: Gram, near, seed: int, radius=Fraction(1), max_tries: int = 128):
    """Deterministic rational perturbation of `near` inside span(phi) passing validate_generic.

    The input is first projected onto the span; prime-denominator offsets
    are then tried until every condition holds exactly.
    """
    near, _ = orthogonal_project(rational(near), Subspace.span(phi.rank, phi.support()), g)
    basis = sublattice_basis(Subspace.span(phi.rank, phi.support()))
    rng = random.Random(seed)
    radius = Fraction(radius)
    for attempt in range(max_tries):
        if attempt == 0:
            cand = near
        else:
            q = _PRIMES[attempt % len(_PRIMES)] * (1 + attempt // len(_PRIMES))
            step = radius / (1 + attempt // 4)
            cand = near
            for b in basis:
                cand = vec_add(cand, vec_scale(Fraction(rng.randint(-3, 3), q) * step, rational(b)))
        try:
            validate_generic(phi, g, cand)
            return cand
        except NotGeneric:
            continue
    raise ExhaustedRetries(f"no generic point near {near} after {max_tries} attempts")
