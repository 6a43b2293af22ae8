"""Exact character sums over punctured projective lines, and their reductions.

This is the independent oracle side of the build: sums of roots of unity are
accumulated in the integer group ring Z[Z/N] (N = q-1) with no relations
applied, canonicalized against the N-th cyclotomic polynomial only when two
algebraic numbers are compared, and reduced to F_q through the fixed
identification generator_q <-> exponent 1.

Orientation convention: a point class with unit-group exponents (e1, e2)
contributes exponent -(b*e1 + c*e2) to the sum for the pair (b, c).  The
sign is the arithmetic-versus-geometric Frobenius orientation; it is the one
under which the reduced linear coefficients agree with the semilinear
operator eigenvalue formulas, and it is pinned by the congruence suite.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .errors import DomainError, InternalError, ParameterError, ResourceCapError
from .fields import Tower, build_field

INF = None  # the infinite point of the projective line


# ---- integer group ring Z[Z/N] and cyclotomic canonicalization ---------------

@functools.lru_cache(maxsize=None)
def cyclotomic_polynomial(N: int) -> tuple:
    """Coefficients (little-endian, monic) of the N-th cyclotomic polynomial."""
    if N == 1:
        return (-1, 1)
    poly = [-1] + [0] * (N - 1) + [1]  # x^N - 1
    for d in range(1, N):
        if N % d == 0:
            poly = _int_poly_div_exact(poly, cyclotomic_polynomial(d))
    return tuple(poly)


def _int_poly_div_exact(num, den) -> list:
    num = list(num)
    dd = len(den) - 1
    out = [0] * (len(num) - dd)
    for i in range(len(num) - 1, dd - 1, -1):
        c = num[i]
        if c == 0:
            continue
        out[i - dd] = c
        for j, dj in enumerate(den):
            num[i - dd + j] -= c * dj
    if any(num):
        raise InternalError("inexact cyclotomic division")
    return out


class CyclotomicSum:
    """An element of Z[Z/N]: integer counts per exponent, exact and unreduced.

    Equality and ``is_zero`` compare canonical forms (reduction modulo the
    N-th cyclotomic polynomial), so they decide equality of the underlying
    algebraic numbers.
    """

    __slots__ = ("modulus", "counts")

    def __init__(self, modulus: int, counts=None):
        self.modulus = modulus
        self.counts = [0] * modulus if counts is None else list(counts)
        if len(self.counts) != modulus:
            raise ParameterError("counts length must equal the modulus")

    @classmethod
    def unit(cls, modulus: int, e: int) -> "CyclotomicSum":
        s = cls(modulus)
        s.counts[e % modulus] = 1
        return s

    def add_term(self, e: int, c: int = 1) -> None:
        self.counts[e % self.modulus] += c

    def mass(self) -> int:
        return sum(self.counts)

    def _check(self, other: "CyclotomicSum") -> None:
        if self.modulus != other.modulus:
            raise ParameterError("mixed cyclotomic moduli")

    def __add__(self, other):
        self._check(other)
        return CyclotomicSum(self.modulus, [a + b for a, b in zip(self.counts, other.counts)])

    def __neg__(self):
        return CyclotomicSum(self.modulus, [-a for a in self.counts])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        self._check(other)
        N = self.modulus
        out = [0] * N
        for i, a in enumerate(self.counts):
            if a == 0:
                continue
            for j, b in enumerate(other.counts):
                if b:
                    out[(i + j) % N] += a * b
        return CyclotomicSum(N, out)

    def conjugate(self) -> "CyclotomicSum":
        N = self.modulus
        return CyclotomicSum(N, [self.counts[-i % N] for i in range(N)])

    def canonical(self) -> tuple:
        """Residue modulo the N-th cyclotomic polynomial, as a fixed-length tuple."""
        phi = cyclotomic_polynomial(self.modulus)
        deg = len(phi) - 1
        rem = list(self.counts)
        for i in range(len(rem) - 1, deg - 1, -1):
            c = rem[i]
            if c == 0:
                continue
            for j, pj in enumerate(phi):
                rem[i - deg + j] -= c * pj
        return tuple(rem[:deg])

    def is_zero(self) -> bool:
        return not any(self.canonical())

    def __eq__(self, other):
        if not isinstance(other, CyclotomicSum):
            return NotImplemented
        self._check(other)
        return self.canonical() == other.canonical()

    def __repr__(self):
        return f"CyclotomicSum(N={self.modulus}, counts={self.counts})"

    def to_json(self) -> dict:
        return {"N": self.modulus, "counts": list(self.counts)}


# ---- point classes on the punctured line --------------------------------------

class AbelJacobiClass(NamedTuple):
    e1: int
    e2: int


def aj_class(tower: Tower, lam: int, t) -> AbelJacobiClass:
    """Unit-group exponents of the class of a point t of the punctured line.

    t is a top-level index or INF; the tower's top level is the field of
    definition of the point.  The class of a point over an extension is the
    norm of the coordinate pair, so the two coordinates are
    norm(1 - 1/t) and norm(1 - lam/t), recorded by discrete log.
    """
    mid, top = tower.mid, tower.top
    if t is INF:
        return AbelJacobiClass(0, 0)
    if t == 0 or t == 1 or t == lam:
        raise DomainError("point lies in the removed set")
    inv_t = top.inv(t)
    u = top.sub_(1, inv_t)
    v = top.sub_(1, top.mul(lam, inv_t))
    return AbelJacobiClass(tower.dlog(tower.norm_map[u]), tower.dlog(tower.norm_map[v]))


@functools.lru_cache(maxsize=None)
def _class_histogram(p: int, r: int, lam: int, n: int) -> tuple:
    """Counts of points of U(F_{q^n}) per class (e1, e2), as nested tuples."""
    tower = build_field(p, r, n)
    q = tower.q
    N = q - 1
    H = [[0] * N for _ in range(N)]
    top = tower.top
    norm = tower.norm_map
    log = tower.mid._log
    one = 1
    for t in range(tower.top_size):
        if t == 0 or t == 1 or t == lam:
            continue
        inv_t = top.inv(t)
        u = top.sub_(one, inv_t)
        v = top.sub_(one, top.mul(lam, inv_t))
        H[log[norm[u]]][log[norm[v]]] += 1
    H[0][0] += 1  # the infinite point, class (0, 0)
    return tuple(tuple(row) for row in H)


def s_n(p: int, r: int, lam: int, bc: tuple, n: int, max_enum: Optional[int] = None) -> CyclotomicSum:
    """Character sum over the points of U(F_{q^n}) for the pair bc = (b, c)."""
    q = p ** r
    if n < 1:
        raise ParameterError("n must be positive")
    if q ** n > (max_enum or 10 ** 6):
        raise ResourceCapError(f"enumeration of {q ** n} points exceeds the cap")
    _check_lambda(q, lam)
    b, c = bc
    N = q - 1
    H = _class_histogram(p, r, lam, n)
    out = CyclotomicSum(N)
    counts = out.counts
    for e1 in range(N):
        row = H[e1]
        for e2 in range(N):
            h = row[e2]
            if h:
                counts[-(b * e1 + c * e2) % N] += h
    if out.mass() != q ** n - 2:
        raise InternalError("character sum lost points")
    return out


def _check_lambda(q: int, lam: int) -> None:
    if not 0 <= lam < q or lam in (0, 1):
        raise ParameterError(f"lambda must lie in F_q minus {{0, 1}}, got {lam}")


# ---- L-numerators -------------------------------------------------------------

def ramified_points(bc: tuple, q: int) -> tuple:
    """Which of the three modulus points (0, 1, lambda) the pair ramifies at."""
    b, c = bc
    N = q - 1
    return ((b + c) % N != 0, b % N != 0, c % N != 0)


def l_degree(bc: tuple, q: int) -> int:
    """Numerator degree: number of ramified modulus points minus two."""
    b, c = bc
    N = q - 1
    if b % N == 0 and c % N == 0:
        raise DomainError("the trivial pair has no polynomial L-function")
    return sum(ramified_points(bc, q)) - 2


@dataclass(frozen=True)
class LNumeratorExact:
    """Exact L-numerator: coefficients in Z[Z/N], constant coefficient 1."""

    modulus: int
    coeffs: tuple  # tuple of CyclotomicSum

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


def _missing_point_exponent(tower: Tower, lam: int, bc: tuple) -> int:
    """Character value exponent at the unramified modulus point.

    For a pair unramified at one of the three modulus points the sum over
    the punctured line misses that point's Euler factor.  The character
    factors through the smaller class group there, and its value on the
    Frobenius at the missing point is a root of unity computed from the
    coordinate functions; returned as an exponent with the package-wide
    orientation.
    """
    mid = tower.mid
    b, c = bc
    N = tower.q - 1
    ram0, ram1, ram_lam = ramified_points(bc, tower.q)
    if not ram0:
        w = mid.div(1, lam)  # (t-1)/(t-lam) at t = 0
        return -(b * tower.dlog(w)) % N
    if not ram1:
        w = mid.sub_(1, lam)  # (t-lam)/t at t = 1
        return -(c * tower.dlog(w)) % N
    if not ram_lam:
        w = mid.div(mid.sub_(lam, 1), lam)  # (t-1)/t at t = lam
        return -(b * tower.dlog(w)) % N
    raise InternalError("no missing point for a full-conductor pair")


def l_numerator_exact(p: int, r: int, lam: int, bc: tuple) -> LNumeratorExact:
    """Exact numerator of the abelian L-function for the pair bc.

    Degree comes from the conductor support.  Degree-one numerators are
    1 + S_1 T.  Degree-zero numerators are 1; their point sum is not zero
    but the character value at the single unramified modulus point, which
    is checked here (the sum over the puncture complement misses exactly
    that Euler factor).  In both cases S_2 = -S_1^2 must hold exactly.
    """
    q = p ** r
    N = q - 1
    b, c = bc
    if b % N == 0 and c % N == 0:
        raise DomainError("the trivial pair has no polynomial L-function")
    deg = l_degree(bc, q)
    s1 = s_n(p, r, lam, bc, 1)
    s2 = s_n(p, r, lam, bc, 2)
    if not (s2 + s1 * s1).is_zero():
        raise InternalError(f"second power sum inconsistent for bc={bc}, lam={lam}")
    if deg == 0:
        tower = build_field(p, r, 1)
        e = _missing_point_exponent(tower, lam, bc)
        if not (s1 + CyclotomicSum.unit(N, e)).is_zero():
            raise InternalError(f"missing-factor check failed for bc={bc}, lam={lam}")
        one = CyclotomicSum.unit(N, 0)
        return LNumeratorExact(N, (one,))
    one = CyclotomicSum.unit(N, 0)
    return LNumeratorExact(N, (one, s1))


# ---- reduction to F_q ----------------------------------------------------------

def reduce_cyc_mod_p(tower: Tower, cs: CyclotomicSum) -> int:
    """Image in F_q under exponent e -> generator_q ** e, counts mod p."""
    if cs.modulus != tower.q - 1:
        raise ParameterError("modulus does not match the tower")
    mid = tower.mid
    acc = 0
    for e, cnt in enumerate(cs.counts):
        k = cnt % tower.p
        if k:
            acc = mid.add(acc, mid.mul(k, mid._exp[e]))
    return acc


def reduce_numerator_mod_p(tower: Tower, numer: LNumeratorExact) -> tuple:
    """Coefficient tuple over F_q of the reduced numerator, trailing zeros cut."""
    coeffs = [reduce_cyc_mod_p(tower, cs) for cs in numer.coeffs]
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    if coeffs[0] != 1:
        raise InternalError("reduced numerator lost its constant term")
    return tuple(coeffs)
