"""Power sums of a multiset of field elements, and recovery of the multiset.

In characteristic p the elementary symmetric functions are rational, not
polynomial, in the power sums; the recovery goes through the logarithmic
derivative, reconstructed as a rational function from the power-sum series
and read off by partial fractions.  Multiplicities are only defined mod p,
so inputs are constrained to 1 <= n_i < p (shifting p copies between roots
provably does not change any power sum).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import (DomainError, InconsistentInputError, InternalError,
                     ParameterError)
from .fields import (GF, poly_derivative, poly_eval, poly_mul, poly_trim,
                     solve_linear)


@dataclass(frozen=True)
class MultisetSpec:
    """Distinct roots with multiplicities 1 <= n_i < p."""

    roots: tuple
    mults: tuple

    def __post_init__(self):
        if len(self.roots) != len(self.mults):
            raise ParameterError("roots and multiplicities differ in length")
        if len(set(self.roots)) != len(self.roots):
            raise ParameterError("roots must be distinct")
        if any(m < 1 for m in self.mults):
            raise ParameterError("multiplicities must be positive")

    @property
    def total(self) -> int:
        return sum(self.mults)

    def sorted_(self) -> "MultisetSpec":
        pairs = sorted(zip(self.roots, self.mults))
        return MultisetSpec(tuple(r for r, _ in pairs), tuple(m for _, m in pairs))


def raw_power_sums(K: GF, roots: Sequence[int], mults: Sequence[int],
                   up_to: int) -> list:
    """sum_i n_i * root_i^j for j = 1..up_to; multiplicities unrestricted."""
    out = []
    cur = list(roots)
    for _ in range(up_to):
        acc = 0
        for m, v in zip(mults, cur):
            acc = K.add(acc, K.mul(K.scalar(m), v))
        out.append(acc)
        cur = [K.mul(v, r) for v, r in zip(cur, roots)]
    return out


def power_sums_of(K: GF, spec: MultisetSpec, up_to: int) -> list:
    if any(m >= K.p for m in spec.mults):
        raise ParameterError("multiplicities must be below p")
    return raw_power_sums(K, spec.roots, spec.mults, up_to)


def elementary_from_spec(K: GF, spec: MultisetSpec) -> list:
    """e_1..e_n of the multiset, from the product of (1 - root*T) factors."""
    G = (1,)
    for r, m in zip(spec.roots, spec.mults):
        for _ in range(m):
            G = poly_mul(K, G, (1, K.neg(r)))
    n = spec.total
    coeffs = list(G) + [0] * (n + 1 - len(G))
    # G = sum (-1)^i e_i T^i
    sign = 1
    out = []
    for i in range(1, n + 1):
        sign = K.neg(sign)
        out.append(K.mul(sign, coeffs[i]))
    return out


def newton_check(K: GF, e: Sequence[int], ps: Sequence[int]) -> bool:
    """Verify the two power-sum recurrences against given e_1..e_n, p_1..p_K.

    k*e_k = sum_{i=1..k} (-1)^(i-1) e_{k-i} p_i for k <= n, and the same
    alternating sum over i = k-n..k vanishes for k > n.
    """
    n = len(e)
    ee = [1] + list(e)  # e_0 = 1

    def term(i: int, k: int) -> int:
        v = K.mul(ee[k - i], ps[i - 1])
        return v if i % 2 == 1 else K.neg(v)

    for k in range(1, len(ps) + 1):
        if k <= n:
            lhs = K.mul(K.scalar(k), ee[k])
            rhs = 0
            for i in range(1, k + 1):
                rhs = K.add(rhs, term(i, k))
        else:
            lhs = 0
            rhs = 0
            for i in range(k - n, k + 1):
                rhs = K.add(rhs, term(i, k))
        if lhs != rhs:
            return False
    return True


def rational_from_series(K: GF, series: Sequence[int], d_num: int, d_den: int):
    """A/B with deg A <= d_num, deg B <= d_den, B(0) = 1, matching the series.

    Solves the linear system from coefficients d_num+1 .. d_num+d_den and
    verifies the remaining window; needs len(series) > d_num + d_den.
    Returns (A, B) or None.  Free variables resolve to zero, so a shorter
    true denominator is found as-is.
    """
    L = len(series) - 1
    if L < d_num + d_den:
        raise ParameterError("series too short for the requested degrees")
    rows = []
    rhs = []
    for t in range(d_num + 1, d_num + d_den + 1):
        rows.append([series[t - u] if t - u <= L else 0 for u in range(1, d_den + 1)])
        rhs.append(K.neg(series[t]))
    sol = solve_linear(K, rows, rhs) if rows else []
    if sol is None:
        return None
    B = poly_trim([1] + list(sol))
    # full-window verification: conv(B, series)[t] must vanish above d_num
    for t in range(d_num + 1, L + 1):
        acc = series[t]
        for u in range(1, min(t, len(B) - 1) + 1):
            acc = K.add(acc, K.mul(B[u], series[t - u]))
        if acc != 0:
            return None
    A = []
    for t in range(d_num + 1):
        acc = series[t]
        for u in range(1, min(t, len(B) - 1) + 1):
            acc = K.add(acc, K.mul(B[u], series[t - u]))
        A.append(acc)
    return poly_trim(A), B


def reconstruct(K: GF, ps: Sequence[int], n: int) -> MultisetSpec:
    """The unique in-range multiset of size n with the given power sums.

    ps must cover j = 1..|K|-1 (one full period); it is then extended
    periodically so the rational reconstruction window always suffices.
    The denominator degree is searched upward, the roots are read off by
    exhaustive evaluation, and each multiplicity comes from the residue of
    the logarithmic derivative at the corresponding pole.
    """
    if n < 1:
        raise ParameterError("n must be positive")
    if len(ps) < K.size - 1:
        raise ParameterError("need power sums through one full period")
    period = K.size - 1
    ps = list(ps)
    while len(ps) < 2 * n + 1:
        ps.append(ps[len(ps) - period])
    series = [K.neg(v) for v in ps]  # log-derivative series: -p_{j+1} at T^j
    for s in range(1, n + 1):
        found = rational_from_series(K, series[: max(2 * s + 1, len(series))], s - 1, s)
        if found is None:
            continue
        A, B = found
        spec = _spec_from_rational(K, A, B, n)
        if spec is not None:
            return spec
    raise InconsistentInputError("no in-range multiset matches the power sums")


def _spec_from_rational(K: GF, A, B, n: int) -> Optional[MultisetSpec]:
    roots = []
    for u in range(1, K.size):
        if poly_eval(K, B, u) == 0:
            roots.append(K.inv(u))
    if len(roots) != len(B) - 1:
        return None  # denominator has repeated or missing roots
    check = (1,)
    for r in roots:
        check = poly_mul(K, check, (1, K.neg(r)))
    if tuple(check) != tuple(B):
        return None
    Bp = poly_derivative(K, B)
    out_roots = []
    out_mults = []
    total = 0
    for r in roots:
        u = K.inv(r)
        num = poly_eval(K, A, u)
        den = poly_eval(K, Bp, u)
        if den == 0:
            return None
        val = K.div(num, den)  # the multiplicity mod p, as a prime-field element
        if val == 0 or val >= K.p:
            return None
        out_roots.append(r)
        out_mults.append(val)
        total += val
    if total > n:
        return None
    if total < n:
        mult0 = n - total
        if mult0 >= K.p:
            return None
        out_roots.append(0)
        out_mults.append(mult0)
    spec = MultisetSpec(tuple(out_roots), tuple(out_mults)).sorted_()
    return spec
