"""Exponential and trace sums on affine plane curves over F_{q^m}.

A degree-p cyclic cover attached to a function f has character values that
are p-th roots of unity; the sum over curve points is stored as exact counts
per absolute-trace value (the integer group ring Z[Z/p]).  The linear piece
of its expansion at the place above p recovers the prime-field trace sum,
and a basis sweep plus the nondegenerate trace pairing recovers the relative
trace sum in F_q.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

from .errors import (DomainError, InconsistentInputError, InternalError,
                     ParameterError, ResourceCapError)
from .fields import GF, Tower, invert_matrix, poly_eval, poly_trim

FEval = Union["PlaneCurve", Callable[[int, int], int]]


class PlaneCurve:
    """A nonzero bivariate polynomial over F_q with sparse term storage.

    Terms map (i, j) -> nonzero F_q index, i the x-degree and j the y-degree.
    Instances are treated as immutable.
    """

    def __init__(self, terms: dict):
        clean = {}
        for (i, j), coeff in terms.items():
            if i < 0 or j < 0:
                raise ParameterError("negative exponent in curve polynomial")
            if coeff:
                clean[(int(i), int(j))] = coeff
        if not clean:
            raise ParameterError("the zero polynomial does not define a curve")
        self.terms = clean
        self.degree = max(i + j for i, j in clean)
        self.deg_y = max(j for _, j in clean)
        self.deg_x = max(i for i, _ in clean)

    def __eq__(self, other):
        return isinstance(other, PlaneCurve) and self.terms == other.terms

    def __repr__(self):
        return f"PlaneCurve({sorted(self.terms.items())})"

    def is_monic_in_y(self) -> bool:
        lead = [(i, j) for i, j in self.terms if j == self.deg_y]
        return lead == [(0, self.deg_y)] and self.terms[(0, self.deg_y)] == 1

    def eval_at(self, K: GF, a: int, b: int) -> int:
        acc = 0
        for (i, j), coeff in self.terms.items():
            acc = K.add(acc, K.mul(coeff, K.mul(K.pow_(a, i), K.pow_(b, j))))
        return acc

    def y_coeffs_at(self, K: GF, a: int) -> tuple:
        """Coefficients of F(a, y) as a univariate polynomial in y over K."""
        out = [0] * (self.deg_y + 1)
        for (i, j), coeff in self.terms.items():
            out[j] = K.add(out[j], K.mul(coeff, K.pow_(a, i)))
        return tuple(out)

    def x_coeff_polys(self) -> list:
        """For each y-power j, the x-polynomial coefficient, little-endian."""
        out = [[0] * (self.deg_x + 1) for _ in range(self.deg_y + 1)]
        for (i, j), coeff in self.terms.items():
            out[j][i] = coeff
        return [list(poly_trim(row)) for row in out]

    def to_json(self) -> dict:
        return {"terms": [{"i": i, "j": j, "coeff": c}
                          for (i, j), c in sorted(self.terms.items())]}

    @classmethod
    def from_json(cls, data: dict, decode=None) -> "PlaneCurve":
        terms = {}
        for t in data["terms"]:
            c = t["coeff"] if decode is None else decode(t["coeff"])
            terms[(t["i"], t["j"])] = c
        return cls(terms)


def curve_points(tower: Tower, F: PlaneCurve, m: Optional[int] = None,
                 max_enum: Optional[int] = None) -> list:
    """All affine solutions of F = 0 over the tower's top level, (a, b) pairs.

    Deterministic order: a then b, ascending by index.  The tower must have
    been built with the wanted extension degree; m, when given, is checked
    against it.
    """
    if m is not None and m != tower.m:
        raise ParameterError("tower extension degree does not match m")
    cap = max_enum or 10 ** 7
    if tower.top_size ** 2 > cap:
        raise ResourceCapError("point enumeration square exceeds the cap")
    top = tower.top
    pts = []
    for a in range(tower.top_size):
        coeffs = F.y_coeffs_at(top, a)
        for b in range(tower.top_size):
            if poly_eval(top, coeffs, b) == 0:
                pts.append((a, b))
    return pts


@dataclass
class PSum:
    """Exact counts per absolute-trace value: an element of Z[Z/p]."""

    p: int
    counts: list

    def mass(self) -> int:
        return sum(self.counts)

    def canonical(self) -> tuple:
        """Coordinates in the basis of the first p-1 powers (their sum is -1)."""
        last = self.counts[-1]
        return tuple(c - last for c in self.counts[:-1])

    def __eq__(self, other):
        return isinstance(other, PSum) and self.p == other.p \
            and self.canonical() == other.canonical()


def _as_eval(F_or_callable: FEval, K: GF):
    if isinstance(F_or_callable, PlaneCurve):
        return lambda a, b: F_or_callable.eval_at(K, a, b)
    return F_or_callable


def s_m_points(tower: Tower, points: Sequence, f: FEval) -> PSum:
    """Exponential sum over a precomputed point list, as trace-value counts."""
    top = tower.top
    tr = tower.abs_trace_top_map
    fe = _as_eval(f, top)
    counts = [0] * tower.p
    for a, b in points:
        counts[tr[fe(a, b)]] += 1
    return PSum(tower.p, counts)


def s_m_f(tower: Tower, F: PlaneCurve, f: FEval, m: Optional[int] = None,
          max_enum: Optional[int] = None) -> PSum:
    return s_m_points(tower, curve_points(tower, F, m, max_enum), f)


def t_m_points(tower: Tower, points: Sequence, f: FEval) -> int:
    """Exact sum of relative traces of f over the point list, in F_q."""
    top = tower.top
    rel = tower.rel_trace_map
    fe = _as_eval(f, top)
    mid = tower.mid
    acc = 0
    for a, b in points:
        acc = mid.add(acc, rel[fe(a, b)])
    return acc


def t_m_f(tower: Tower, F: PlaneCurve, f: FEval, m: Optional[int] = None,
          max_enum: Optional[int] = None) -> int:
    return t_m_points(tower, curve_points(tower, F, m, max_enum), f)


def varpi_coefficient(s: PSum) -> int:
    """Linear coefficient of the local expansion: sum of c * counts[c] mod p.

    Writing each p-th root of unity as (1 - w)^c, the sum is
    mass - (sum_c c*counts[c]) * w modulo w^2, so this value is the total
    absolute trace of f over the points, as an element of F_p.
    """
    return sum(c * n for c, n in enumerate(s.counts)) % s.p


def coordinate_basis(tower: Tower) -> tuple:
    """The power basis (1, t, ..., t^(r-1)) of F_q over F_p, as indices."""
    return tuple(tower.p ** i for i in range(tower.r))


def recover_tm_from_l_data(tower: Tower, per_basis: Sequence[int],
                           basis: Optional[Sequence[int]] = None) -> int:
    """The unique T in F_q with absolute trace of gamma_i * T as prescribed.

    per_basis[i] is an F_p value, the linear coefficient extracted from the
    sum for gamma_i * f.  Inverts the trace pairing through the dual basis
    (Gram matrix of absolute traces over the prime field).
    """
    basis = coordinate_basis(tower) if basis is None else tuple(basis)
    if len(per_basis) != len(basis) or len(basis) != tower.r:
        raise ParameterError("need one value per basis element")
    mid, base = tower.mid, tower.base
    tr = tower.abs_trace_mid_map
    gram = [[tr[mid.mul(gi, gj)] for gj in basis] for gi in basis]
    gram_inv = invert_matrix(base, gram)
    if gram_inv is None:
        raise InternalError("trace pairing Gram matrix is singular")
    # dual basis: delta_j = sum_i gram_inv[i][j] * gamma_i
    acc = 0
    for j, v in enumerate(per_basis):
        if v % tower.p == 0:
            continue
        dual_j = 0
        for i, gi in enumerate(basis):
            dual_j = mid.add(dual_j, mid.mul(gram_inv[i][j], gi))
        acc = mid.add(acc, mid.mul(v % tower.p, dual_j))
    return acc


def t_m_via_pathway(tower: Tower, points: Sequence, f: FEval,
                    basis: Optional[Sequence[int]] = None) -> int:
    """Relative-trace sum recovered from exponential sums only.

    Computes the exponential sum for gamma * f over each basis element
    gamma, extracts the linear coefficients, and inverts the trace pairing.
    This is the protocol route; ``t_m_points`` is its direct counterpart.
    """
    basis = coordinate_basis(tower) if basis is None else tuple(basis)
    top = tower.top
    fe = _as_eval(f, top)
    vals = []
    for gamma in basis:
        s = s_m_points(tower, points, lambda a, b: top.mul(gamma, fe(a, b)))
        vals.append(varpi_coefficient(s))
    return recover_tm_from_l_data(tower, vals, basis)
