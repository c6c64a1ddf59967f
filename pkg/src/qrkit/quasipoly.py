"""Quasi-polynomial chamber characters and quasi-polynomial fitting.

The multiplicity function of a polarized series agrees, on each chamber of
the spanned hyperplane arrangement, with a unique quasi-polynomial on the
lattice points of the span. Values of that extension are computed here by
exact one-dimensional polynomial extrapolation along a chamber-interior
direction whose step lies in the lattice generated by every basis sublist;
every evaluation carries a held-out consistency sample so a wrong period
can never pass silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import lcm

from .lattice import (
    Subspace,
    TopeId,
    Weight,
    WeightList,
    arrangement_of,
    as_integer_vector,
    basis_coordinates,
    det_int,
    dot,
    is_zero,
    primitive,
    rational,
    solve_exact,
    vec_add,
    vec_scale,
    vec_sub,
    zero_vector,
)
from .characters import kpf_eval


class ValidationFailed(RuntimeError):
    """A held-out sample disagreed with the fitted polynomial."""

    def __init__(self, point):
        self.point = point
        super().__init__(f"validation failed at {point}")


class NonIntegerValue(ArithmeticError):
    """Internal consistency violation: a lattice evaluation was fractional."""


class NoFit(ValueError):
    """No quasi-polynomial within the allowed period and degree fits the data."""


def _difference_vanishes(values, order: int) -> bool:
    d = list(values)
    for _ in range(order):
        d = [b - a for a, b in zip(d, d[1:])]
    return all(x == 0 for x in d)


def _extrapolate_to_zero(ts, vs) -> Fraction:
    """Lagrange value at t = 0 of the polynomial through the points (ts, vs)."""
    total = Fraction(0)
    for i, (ti, vi) in enumerate(zip(ts, vs)):
        w = Fraction(1)
        for j, tj in enumerate(ts):
            if j != i:
                w *= Fraction(-tj, ti - tj)
        total += vi * w
    return total


def _monomials(nvars: int, degree: int):
    if nvars == 0:
        return [()]
    out = []
    for exps in product(range(degree + 1), repeat=nvars):
        if sum(exps) <= degree:
            out.append(exps)
    return sorted(out)


def _solve_poly(points, values, nvars: int, degree: int):
    """Exact polynomial through the sample points, or None when inconsistent.

    Uses every point as an equation; consistency of an overdetermined
    system is part of the answer.
    """
    monos = _monomials(nvars, degree)
    rows = []
    for pt in points:
        rows.append([_mono_eval(m, pt) for m in monos])
    aug = [row + [Fraction(v)] for row, v in zip(rows, values)]
    n = len(monos)
    red = [r[:] for r in aug]
    pivots = []
    r = 0
    for c in range(n):
        pr = next((i for i in range(r, len(red)) if red[i][c] != 0), None)
        if pr is None:
            continue
        red[r], red[pr] = red[pr], red[r]
        lead = red[r][c]
        red[r] = [x / lead for x in red[r]]
        for i in range(len(red)):
            if i != r and red[i][c] != 0:
                f = red[i][c]
                red[i] = [a - f * b for a, b in zip(red[i], red[r])]
        pivots.append(c)
        r += 1
    for i in range(r, len(red)):
        if red[i][n] != 0:
            return None
    coeffs = {m: Fraction(0) for m in monos}
    for row, p in zip(red, pivots):
        coeffs[monos[p]] = row[n]
    return {m: c for m, c in coeffs.items() if c}


def _mono_eval(mono, pt) -> Fraction:
    out = Fraction(1)
    for e, x in zip(mono, pt):
        if e:
            out *= Fraction(x) ** e
    return out


def poly_eval(poly, pt) -> Fraction:
    return sum((c * _mono_eval(m, pt) for m, c in poly.items()), Fraction(0))


@dataclass(frozen=True)
class QuasiPolynomial:
    """Quasi-polynomial character supported on a translate of a saturated sublattice.

    `period` is the guaranteed scalar period (least common multiple of the
    basis determinants); coset polynomials are materialized on demand.
    Evaluation is exact and always lands on an integer.
    """

    rank: int
    carrier: Subspace
    carrier_basis: tuple[Weight, ...]
    offset: Weight
    period: int
    degree: int
    phi: WeightList
    direction: Weight
    _line: tuple = field(compare=False, repr=False, default=())
    _values: dict = field(default_factory=dict, compare=False, repr=False)
    _cosets: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def dim(self) -> int:
        return len(self.carrier_basis)

    def _ambient(self, coords) -> Weight:
        v = zero_vector(self.rank)
        for c, b in zip(coords, self.carrier_basis):
            v = vec_add(v, vec_scale(c, b))
        return vec_add(v, self.offset)

    def value(self, lam) -> int:
        """Exact multiplicity at a lattice point; zero off the carrier translate."""
        lam = tuple(int(x) for x in lam)
        cached = self._values.get(lam)
        if cached is not None:
            return cached
        x = vec_sub(lam, self.offset)
        if self.dim == 0:
            out = 1 if is_zero(x) else 0
            self._values[lam] = out
            return out
        if not self.carrier.contains(x):
            self._values[lam] = 0
            return 0
        coords = basis_coordinates(self.carrier_basis, x)
        c = as_integer_vector(coords)
        out = self._value_at_coords(c)
        self._values[lam] = out
        return out

    def _value_at_coords(self, c) -> int:
        normals, signs, v, step = self._line
        t0 = 0
        for n, s in zip(normals, signs):
            a = s * dot(n, c)
            if a <= 0:
                b = s * dot(n, vec_scale(step, v))
                t0 = max(t0, (-a) // b + 1)
        if t0 == 0:
            return kpf_eval(self.phi, self.direction, self._ambient_nooffset(c))
        deg = self.degree
        for attempt in range(2):
            ts = [t0 + i for i in range(deg + 2)]
            vs = [
                kpf_eval(self.phi, self.direction, self._ambient_nooffset(vec_add(c, vec_scale(t * step, v))))
                for t in ts
            ]
            if _difference_vanishes(vs, deg + 1):
                val = _extrapolate_to_zero(ts[: deg + 1], vs[: deg + 1])
                if val.denominator != 1:
                    raise NonIntegerValue(f"fractional value {val} at {c}")
                return int(val)
            t0 = 2 * t0 + deg + 2
        raise ValidationFailed(self._ambient(c))

    def _ambient_nooffset(self, coords) -> Weight:
        v = zero_vector(self.rank)
        for c, b in zip(coords, self.carrier_basis):
            v = vec_add(v, vec_scale(c, b))
        return v

    def coset_polynomial(self, residue):
        """Polynomial (in carrier coordinates) of one coset of the period sublattice."""
        residue = tuple(int(r) % self.period for r in residue)
        if len(residue) != self.dim:
            raise ValueError("residue has wrong length")
        cached = self._cosets.get(residue)
        if cached is not None:
            return cached
        pts = []
        vals = []
        for z in product(range(self.degree + 1), repeat=self.dim):
            c = tuple(r + self.period * zz for r, zz in zip(residue, z))
            pts.append(c)
            vals.append(self._value_at_coords(c))
        poly = _solve_poly(pts, vals, self.dim, self.degree)
        if poly is None:
            raise ValidationFailed(residue)
        self._cosets[residue] = poly
        return poly


def unit_quasipoly(rank: int, offset=None) -> QuasiPolynomial:
    """The character of a single lattice point (the zero-dimensional carrier case)."""
    off = zero_vector(rank) if offset is None else tuple(int(x) for x in offset)
    return QuasiPolynomial(
        rank=rank,
        carrier=Subspace.span(rank, ()),
        carrier_basis=(),
        offset=off,
        period=1,
        degree=0,
        phi=WeightList.of(rank, []),
        direction=zero_vector(rank),
    )


def quasipoly_on_tope(phi: WeightList, y, tope: TopeId) -> QuasiPolynomial:
    """The unique quasi-polynomial agreeing with the polarized series on a chamber.

    The chamber must belong to the arrangement of `phi`; the returned
    object evaluates anywhere on the lattice of the span.
    """
    if not phi:
        return unit_quasipoly(phi.rank)
    if (tope.phi_rank, tope.phi_weights) != (phi.rank, phi.weights):
        raise ValueError("chamber does not belong to this list")
    arr = arrangement_of(phi)
    basis = arr.basis
    d = len(basis)
    phi_b = [as_integer_vector(basis_coordinates(basis, w)) for w in phi.weights]
    support_b = sorted(set(phi_b))
    period = 1
    line_step = 1
    witness_b = basis_coordinates(basis, tope.witness)
    v = primitive(witness_b)
    for sigma in combinations(support_b, d):
        det = det_int([list(r) for r in sigma])
        if det == 0:
            continue
        period = lcm(period, abs(det))
        rows = [[Fraction(sigma[j][i]) for j in range(d)] for i in range(d)]
        x = solve_exact(rows, rational(v))
        line_step = lcm(line_step, *(xi.denominator for xi in x))
    for n, s in zip(arr.normals, tope.signs):
        if s * dot(n, v) <= 0:
            raise ValueError("witness direction escapes the chamber")
    qp = QuasiPolynomial(
        rank=phi.rank,
        carrier=arr.span,
        carrier_basis=basis,
        offset=zero_vector(phi.rank),
        period=period,
        degree=len(phi) - d,
        phi=phi,
        direction=primitive(y),
        _line=(arr.normals, tope.signs, v, line_step),
    )
    # construction-time probes; each evaluation revalidates with a held-out sample
    probes = [zero_vector(d), vec_scale(-1, v), v, tuple(1 for _ in range(d))]
    for c in probes:
        qp._value_at_coords(tuple(int(x) for x in c))
    return qp


def qp_eval(qp: QuasiPolynomial, lam) -> int:
    return qp.value(lam)


_QP_CACHE: dict[tuple, QuasiPolynomial] = {}


def cached_quasipoly(phi: WeightList, y, tope: TopeId) -> QuasiPolynomial:
    """Value-semantic cache for chamber quasi-polynomials."""
    key = (phi.rank, phi.weights, primitive(y) if phi else None, tope.signs if phi else None)
    qp = _QP_CACHE.get(key)
    if qp is None:
        qp = quasipoly_on_tope(phi, y, tope)
        _QP_CACHE[key] = qp
    return qp


# ---------------------------------------------------------------------------
# one- and two-variable quasi-polynomial fitting


@dataclass(frozen=True)
class QuasiPolynomial1D:
    """Integer-valued quasi-polynomial on Z: one coefficient tuple per residue."""

    period: int
    polys: tuple[tuple[Fraction, ...], ...]

    def value(self, k: int) -> int:
        coeffs = self.polys[k % self.period]
        out = Fraction(0)
        for c in reversed(coeffs):
            out = out * k + c
        if out.denominator != 1:
            raise NonIntegerValue(f"fractional prediction at {k}")
        return int(out)

    @property
    def degree(self) -> int:
        return max((len(p) - 1 for p in self.polys), default=0)


def qp_fit_1d(samples, max_period: int, max_degree: int) -> QuasiPolynomial1D:
    """Minimal (period, degree) quasi-polynomial through consecutive integer samples.

    The first half of the samples is fitted, the second half verified
    exactly; raises NoFit when nothing within the bounds works.
    """
    pts = sorted((int(k), int(v)) for k, v in samples)
    ks = [k for k, _ in pts]
    if any(b - a != 1 for a, b in zip(ks, ks[1:])):
        raise ValueError("samples must sit at consecutive integers")
    half = max(1, len(pts) // 2)
    fit, check = pts[:half], pts[half:]
    return _fit_ranges(fit, check, max_period, max_degree)


def _fit_ranges(fit, check, max_period: int, max_degree: int) -> QuasiPolynomial1D:
    for period in range(1, max_period + 1):
        for degree in range(0, max_degree + 1):
            buckets: dict[int, list] = {}
            for k, val in fit:
                buckets.setdefault(k % period, []).append((k, val))
            if len(buckets) < period:
                continue
            if any(len(b) < degree + 1 for b in buckets.values()):
                continue
            polys = {}
            ok = True
            for r, pts in buckets.items():
                poly = _solve_poly([(k,) for k, _ in pts], [v for _, v in pts], 1, degree)
                if poly is None:
                    ok = False
                    break
                coeffs = [Fraction(0)] * (degree + 1)
                for m, c in poly.items():
                    coeffs[m[0]] = c
                polys[r] = tuple(coeffs)
            if not ok:
                continue
            cand = QuasiPolynomial1D(period, tuple(polys[r] for r in range(period)))
            try:
                if all(cand.value(k) == v for k, v in check):
                    return cand
            except NonIntegerValue:
                continue
    raise NoFit(f"no quasi-polynomial with period <= {max_period}, degree <= {max_degree}")


def fit_quasipoly_2d(samples: dict, max_period: int, max_degree: int):
    """Minimal (period, degree) fit of an integer function sampled on a 2-D grid.

    Fits on the lower half of the first axis and verifies on the rest;
    returns (period, degree, coset polynomial map) or raises NoFit.
    """
    keys = sorted(samples)
    k_values = sorted({k for k, _ in keys})
    split = k_values[len(k_values) // 2]
    fit = [(pt, samples[pt]) for pt in keys if pt[0] < split]
    check = [(pt, samples[pt]) for pt in keys if pt[0] >= split]
    for period in range(1, max_period + 1):
        for degree in range(0, max_degree + 1):
            buckets: dict[tuple, list] = {}
            for pt, val in fit:
                buckets.setdefault((pt[0] % period, pt[1] % period), []).append((pt, val))
            need = len(_monomials(2, degree))
            if any(len(b) < need for b in buckets.values()) or not buckets:
                continue
            polys = {}
            ok = True
            for r, pts in buckets.items():
                poly = _solve_poly([p for p, _ in pts], [v for _, v in pts], 2, degree)
                if poly is None:
                    ok = False
                    break
                polys[r] = poly
            if not ok:
                continue
            good = True
            for pt, val in check:
                r = (pt[0] % period, pt[1] % period)
                if r not in polys:
                    good = False
                    break
                if poly_eval(polys[r], pt) != val:
                    good = False
                    break
            if good and check:
                return period, degree, polys
    raise NoFit(f"no 2-D quasi-polynomial with period <= {max_period}, degree <= {max_degree}")
