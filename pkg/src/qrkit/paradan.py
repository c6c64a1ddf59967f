"""Decomposition of partition generating series over spanned subspaces.

The generating series of a polarized list splits into one term per
subspace spanned by a sublist: a lower-dimensional series polarized by the
orthogonal component of a generic anchor point, times the chamber
quasi-polynomial of the restricted list. Both the decomposition and an
exact box-verification of the identity live here.
"""

from __future__ import annotations

from dataclasses import dataclass

from .characters import Box, PolarizedSeries, theta_on_box
from .lattice import (
    Gram,
    NotPolarizing,
    RationalVector,
    Subspace,
    WeightList,
    dot,
    is_polarizing,
    orthogonal_project,
    primitive,
    rational_subspaces,
    tope_of,
    vec_add,
    vec_scale,
    zero_vector,
)
from .quasipoly import QuasiPolynomial, cached_quasipoly, unit_quasipoly


@dataclass(frozen=True)
class ParadanTerm:
    """One subspace summand: series over the excluded part times a chamber quasi-polynomial."""

    subspace: Subspace
    series: PolarizedSeries
    delta: QuasiPolynomial
    grade: tuple | None
    gamma_s: RationalVector
    y_s: RationalVector

    def value(self, lam) -> int:
        from .characters import graded_convolution_eval

        if not self.series.gens:
            return self.delta.value(lam)
        return graded_convolution_eval(self.series, self.delta, self.grade, lam)


def paradan_decompose(phi: WeightList, y, gamma, g: Gram) -> list[ParadanTerm]:
    """One term per subspace spanned by a sublist; the anchor point must be generic.

    The anchor is validated exactly against both conditions (regular
    projection, polarizing orthogonal component) for every subspace before
    any term is built.
    """
    if not is_polarizing(phi, y):
        raise NotPolarizing(next(w for w in phi if dot(w, y) == 0))
    from .lattice import validate_generic

    validate_generic(phi, g, gamma)
    terms = []
    for s in sorted(rational_subspaces(phi), key=lambda s: (s.dim, s.rows)):
        gamma_s, y_s = orthogonal_project(gamma, s, g)
        inside = phi.restrict(s)
        outside = phi.exclude(s)
        if s.dim == 0:
            delta = unit_quasipoly(phi.rank)
        else:
            delta = cached_quasipoly(inside, y, tope_of(gamma_s, inside))
        if outside:
            grade = primitive(g.apply(y_s))
            series = PolarizedSeries.of(outside, grade)
        else:
            grade = None
            series = PolarizedSeries.of(outside, zero_vector(phi.rank))
        terms.append(ParadanTerm(s, series, delta, grade, gamma_s, y_s))
    return terms


@dataclass(frozen=True)
class ParadanReport:
    ok: bool
    points_checked: int
    mismatches: tuple
    halfspace_ok: bool
    terms: tuple


def _lattice_points_in_box(basis, lo, hi, shift):
    """Integer points shift + sum t_j b_j inside the box, via the staircase of an HNF basis."""
    d = len(basis)
    if d == 0:
        return [tuple(shift)] if all(a <= x <= b for a, x, b in zip(lo, shift, hi)) else []
    pivots = [next(j for j, x in enumerate(b) if x != 0) for b in basis]
    out = []

    def rec(i, cur):
        if i == d:
            if all(a <= x <= b for a, x, b in zip(lo, cur, hi)):
                out.append(tuple(cur))
            return
        p = pivots[i]
        step = basis[i][p]
        tmin = -((cur[p] - lo[p]) // step)
        tmax = (hi[p] - cur[p]) // step
        for t in range(tmin, tmax + 1):
            rec(i + 1, vec_add(cur, vec_scale(t, basis[i])))

    rec(0, tuple(shift))
    return out


def _term_table(term: ParadanTerm, box: Box) -> dict:
    """Values of one term on every box point, batched by support structure."""
    rank = box.rank
    out: dict = {}
    if not term.series.gens:
        for lam in box.points():
            v = term.delta.value(lam)
            if v:
                out[lam] = v
        return out
    if term.delta.dim == 0:
        for lam in box.points():
            v = term.series.multiplicity(lam)
            if v:
                out[lam] = v
        return out
    grade = term.grade
    cap = sum(max(a * gi, b * gi) for a, b, gi in zip(box.lo, box.hi, grade))
    if cap < 0:
        return out
    levels = term.series.cone_levels(grade, cap)
    basis = term.delta.carrier_basis
    for level_pts in levels.values():
        for nu in level_pts:
            coeff = term.series.multiplicity(nu)
            if not coeff:
                continue
            for lam in _lattice_points_in_box(basis, box.lo, box.hi, nu):
                v = term.delta.value(tuple(a - b for a, b in zip(lam, nu)))
                if v:
                    out[lam] = out.get(lam, 0) + coeff * v
    return {k: v for k, v in out.items() if v}


def paradan_verify(phi: WeightList, y, gamma, g: Gram, box: Box) -> ParadanReport:
    """Exact check that the subspace decomposition reproduces the partition function on a box.

    Also confirms the half-space support of every proper-subspace term:
    such a term must vanish wherever the anchor's orthogonal component
    pairs negatively.
    """
    terms = paradan_decompose(phi, y, gamma, g)
    lhs = theta_on_box(phi, y, box)
    total: dict = {}
    halfspace_ok = True
    span_dim = Subspace.span(phi.rank, phi.support()).dim
    for term in terms:
        table = _term_table(term, box)
        if term.subspace.dim != span_dim:
            for lam, v in table.items():
                if v and dot(lam, term.grade) < 0:
                    halfspace_ok = False
        for lam, v in table.items():
            total[lam] = total.get(lam, 0) + v
    mismatches = []
    for lam in box.points():
        got = total.get(lam, 0)
        want = lhs.coeff(lam)
        if got != want:
            mismatches.append((lam, want, got))
    return ParadanReport(
        ok=not mismatches and halfspace_ok,
        points_checked=box.size(),
        mismatches=tuple(mismatches),
        halfspace_ok=halfspace_ok,
        terms=tuple(terms),
    )
