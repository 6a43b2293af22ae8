"""Multinomial coefficients mod p and the digit conditions on character indices.

Everything here is integer combinatorics: the unit-index conditions that
control which twisted differentials survive the semilinear operator, and the
exhaustive searches that classify the distinguished character pairs.  No
field tables are needed; q = p^r enters only through base-p digits.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

from .errors import DomainError, ParameterError
from .fields import is_prime


@dataclass(frozen=True)
class CondParams:
    """Ambient size data: p odd prime, q = p^r, k = (q-1)/2."""

    p: int
    r: int

    def __post_init__(self):
        if self.p % 2 == 0 or not is_prime(self.p):
            raise ParameterError("p must be an odd prime")
        if self.r < 1:
            raise ParameterError("r must be positive")

    @property
    def q(self) -> int:
        return self.p ** self.r

    @property
    def k(self) -> int:
        return (self.q - 1) // 2


@dataclass(frozen=True)
class CharPair:
    """A character index pair, stored reduced mod q-1."""

    b: int
    c: int


@functools.lru_cache(maxsize=None)
def _fact_mod(p: int) -> tuple:
    out = [1] * p
    for i in range(1, p):
        out[i] = out[i - 1] * i % p
    return tuple(out)


def alpha(m: int, n: int, params: CondParams) -> int:
    """(q-1)! / (m! n! (q-1-m-n)!) mod p, via base-p digits.

    Every digit of q-1 is p-1, so the digit sums never carry and the
    coefficient factors as a product of one-digit multinomials; a carry in
    m + n at any digit forces the value to 0 mod p.
    """
    p, r, q = params.p, params.r, params.q
    if m < 0 or n < 0 or m + n > q - 1:
        raise DomainError(f"need 0 <= m, n with m + n <= q - 1, got ({m}, {n})")
    fact = _fact_mod(p)
    out = 1
    for _ in range(r):
        dm, dn = m % p, n % p
        if dm + dn > p - 1:
            return 0
        num = fact[p - 1]
        den = fact[dm] * fact[dn] % p * fact[p - 1 - dm - dn] % p
        out = out * num % p * pow(den, p - 2, p) % p
        m //= p
        n //= p
    return out


def alpha_exact(m: int, n: int, params: CondParams) -> int:
    """Big-integer oracle for alpha: exact multinomial, then reduced mod p."""
    q = params.q
    if m < 0 or n < 0 or m + n > q - 1:
        raise DomainError(f"need 0 <= m, n with m + n <= q - 1, got ({m}, {n})")
    return math.comb(q - 1, m) * math.comb(q - 1 - m, n) % params.p


def cond_n(n: int, params: CondParams) -> bool:
    """0 < 2n < q-1 and each partial remainder n mod p^i stays below p^i / 2."""
    p, r, q = params.p, params.r, params.q
    if not 0 < 2 * n < q - 1:
        return False
    for i in range(1, r):
        if 2 * (n % p ** i) >= p ** i:
            return False
    return True


def cond_bc(b: int, c: int, params: CondParams) -> bool:
    """Nonvanishing condition on the reduced pair (b', c').

    Zero components are rejected outright: the literal display would accept
    them (the empty product is 1), but the condition stands for a surviving
    twisted differential and pairs with a zero component never contribute one.
    """
    q = params.q
    b_, c_ = b % (q - 1), c % (q - 1)
    if b_ == 0 or c_ == 0:
        return False
    if b_ + c_ >= q - 1:
        return False
    return alpha(b_, c_, params) != 0


def check_condn_symmetry(params: CondParams) -> dict:
    """Exhaustively verify the two symmetry laws of the digit condition.

    (1) cond_n(n) iff cond_n(k - n), over a window of integers n;
    (2) cond_n(n) iff cond_bc(n, n), for 0 < n < q-1.
    """
    q, k = params.q, params.k
    counterexamples = []
    for n in range(-q, 2 * q):
        if cond_n(n, params) != cond_n(k - n, params):
            counterexamples.append(["reflect", n])
    for n in range(1, q - 1):
        if cond_n(n, params) != cond_bc(n, n, params):
            counterexamples.append(["diagonal", n])
    return {"q": q, "counterexamples": counterexamples}


def find_witness(b: int, params: CondParams):
    """Smallest n with cond_n(n) and (n*b mod q-1) >= (q-1)/2, or None.

    Defined for b not congruent to 0 or a power of p mod q-1; those classes
    never admit a witness and are a precondition violation.
    """
    q = params.q
    b_ = b % (q - 1)
    excluded = {0} | {pow(params.p, i, q - 1) for i in range(params.r)}
    if b_ in excluded:
        raise DomainError(f"b = {b} is congruent to 0 or a power of p mod q-1")
    for n in range(1, params.k):
        if cond_n(n, params) and (n * b_) % (q - 1) >= params.k:
            return n
    return None


def check_equalpowers(params: CondParams) -> dict:
    """For b = p^m1, c = p^m2 with m1 < m2 < r, check the (p+1)/2 separator.

    At n = (p+1)/2 the diagonal condition fails while the skewed condition
    holds, so distinct power pairs are told apart.  q = 9 is the known
    exception and is reported rather than asserted.
    """
    p, r, q = params.p, params.r, params.q
    if r < 2:
        return {"q": q, "status": "vacuous", "pairs": [], "failures": []}
    if q == 9:
        return {"q": q, "status": "exceptional", "pairs": [], "failures": []}
    n = (p + 1) // 2
    pairs = []
    failures = []
    for m1 in range(r):
        for m2 in range(m1 + 1, r):
            b, c = p ** m1, p ** m2
            pairs.append([b, c])
            if cond_n(n, params):
                failures.append([b, c, "cond_n unexpectedly holds"])
            if not cond_bc(n * b, n * c, params):
                failures.append([b, c, "cond_bc unexpectedly fails"])
    return {"q": q, "status": "ok", "pairs": pairs, "failures": failures}


def classify_chars(params: CondParams) -> frozenset:
    """All coprime pairs (b, c) whose condition pattern matches the diagonal.

    Scans 0 < b, c < q-1 with gcd(b, q-1) = gcd(c, q-1) = 1 and keeps the
    pairs with cond_n(n) iff cond_bc(n*b, n*c) for every 0 < 2n < q-1.
    (Quantifying n beyond k-1 wrongly empties the set: cond_n never reduces
    n, so already n = q breaks the equivalence for every pair.)
    """
    q = params.q
    units = [b for b in range(1, q - 1) if math.gcd(b, q - 1) == 1]
    ns = range(1, params.k)
    diag = [cond_n(n, params) for n in ns]
    out = set()
    for b in units:
        for c in units:
            if all(d == cond_bc(n * b, n * c, params) for d, n in zip(diag, ns)):
                out.add((b, c))
    return frozenset(out)


def expected_classification(params: CondParams) -> frozenset:
    """The predicted classification: diagonal powers of p, plus the q=9 extras."""
    q = params.q
    out = {(params.p ** i % (q - 1), params.p ** i % (q - 1)) for i in range(params.r)}
    if q == 9:
        out |= {(1, 3), (3, 1)}
    return frozenset(out)
