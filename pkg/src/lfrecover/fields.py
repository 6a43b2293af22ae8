"""Deterministic finite field towers with table-driven arithmetic.

A tower is F_p < F_q < F_{q^m} with q = p^r.  Each level stores its elements
as integer indices: the element with little-endian coordinate vector
(c_0, ..., c_{k-1}) over the level below has index sum(c_i * s^i), where s is
the size of the level below.  Subfield embeddings along the tower are then
the identity map on indices, and the prime subfield of every level is the
index range [0, p).

Construction is deterministic.  The defining modulus of each extension is the
lexicographically smallest monic irreducible polynomial, comparing
coefficients low degree first, each coefficient by the canonical order of the
level below.  The multiplicative generator is the first element of full order
in the same canonical order.  Two builds of the same (p, r, m) agree exactly.

Multiplication, inversion and powers run on discrete-log tables; addition
uses a Zech logarithm table.  Every table is O(field size), which is fine at
desk scale; the tower constructor refuses sizes above the configured cap.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from .errors import DomainError, InternalError, ParameterError, ResourceCapError

MAX_ENUM = 10 ** 6


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def _prime_factors(n: int) -> tuple:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return tuple(out)


class GF:
    """A finite field of size p^k backed by exp/log/Zech tables.

    Elements are plain integer indices in [0, size).  Build prime fields as
    GF(p) and extensions as GF(p, k, sub=..., modulus=...) where ``modulus``
    is the full little-endian coefficient tuple of a monic irreducible of
    degree k over ``sub``.  Towers are normally built through ``build_field``
    rather than directly.
    """

    def __init__(self, p: int, k: int = 1, sub: Optional["GF"] = None,
                 modulus: Optional[Sequence[int]] = None):
        self.p = p
        self.sub = sub
        if sub is None:
            if k != 1 or not is_prime(p):
                raise ParameterError(f"prime field needs prime p, got p={p}, k={k}")
            self.k = 1
            self.size = p
            self.modulus = None
        else:
            if k < 1:
                raise ParameterError("extension degree must be positive")
            self.k = k
            self.size = sub.size ** k
            mod = tuple(modulus)
            if len(mod) != k + 1 or mod[-1] != 1:
                raise ParameterError("modulus must be monic of the stated degree")
            self.modulus = mod
        self._n1 = self.size - 1
        self._build_tables()

    # ---- coordinates ----------------------------------------------------

    def coords(self, a: int) -> tuple:
        if self.sub is None:
            return (a,)
        s = self.sub.size
        out = []
        for _ in range(self.k):
            a, c = divmod(a, s)
            out.append(c)
        return tuple(out)

    def from_coords(self, cs: Sequence[int]) -> int:
        if self.sub is None:
            return cs[0]
        s = self.sub.size
        a = 0
        for c in reversed(cs):
            a = a * s + c
        return a

    # ---- construction-time raw arithmetic (no tables needed) ------------

    def _add_raw(self, a: int, b: int) -> int:
        if self.sub is None:
            return (a + b) % self.p
        sub = self.sub
        return self.from_coords([sub.add(x, y) for x, y in zip(self.coords(a), self.coords(b))])

    def _mul_raw(self, a: int, b: int) -> int:
        if self.sub is None:
            return (a * b) % self.p
        sub = self.sub
        k = self.k
        ca, cb = self.coords(a), self.coords(b)
        prod = [0] * (2 * k - 1)
        for i, x in enumerate(ca):
            if x == 0:
                continue
            for j, y in enumerate(cb):
                if y:
                    prod[i + j] = sub.add(prod[i + j], sub.mul(x, y))
        mod = self.modulus
        for i in range(2 * k - 2, k - 1, -1):
            c = prod[i]
            if c == 0:
                continue
            for j in range(k + 1):
                prod[i - k + j] = sub.sub_(prod[i - k + j], sub.mul(c, mod[j]))
        return self.from_coords(prod[:k])

    def _pow_raw(self, a: int, e: int) -> int:
        if self.sub is None:
            return pow(a, e, self.p)
        acc = 1
        base = a
        while e:
            if e & 1:
                acc = self._mul_raw(acc, base)
            base = self._mul_raw(base, base)
            e >>= 1
        return acc

    def _inc(self, a: int) -> int:
        # a + 1 without the Zech table; used while building it
        if self.sub is None:
            return (a + 1) % self.p
        s = self.sub.size
        c0 = a % s
        return a - c0 + self.sub.add(c0, 1)

    # ---- tables ----------------------------------------------------------

    def _build_tables(self) -> None:
        size = self.size
        if self.sub is None:
            self.canonical = list(range(size))
            self.canon_rank = list(range(size))
        else:
            rank = self.sub.canon_rank
            self.canonical = sorted(range(size),
                                    key=lambda a: tuple(rank[c] for c in self.coords(a)))
            cr = [0] * size
            for pos, a in enumerate(self.canonical):
                cr[a] = pos
            self.canon_rank = cr

        n1 = self._n1
        fac = _prime_factors(n1) if n1 > 1 else ()
        gen = None
        for a in self.canonical:
            if a == 0:
                continue
            if all(self._pow_raw(a, n1 // f) != 1 for f in fac):
                gen = a
                break
        if gen is None:
            raise InternalError("no multiplicative generator found")
        self.generator = gen

        exp = [1] * max(n1, 1)
        cur = 1
        for i in range(1, n1):
            cur = self._mul_raw(cur, gen)
            exp[i] = cur
        self._exp = exp
        log = [-1] * size
        for e, v in enumerate(exp):
            if log[v] != -1:
                raise InternalError("generator order too small")
            log[v] = e
        self._log = log
        zech = [-1] * max(n1, 1)
        for t in range(n1):
            v = self._inc(exp[t])
            zech[t] = log[v] if v else -1
        self._zech = zech
        if self.sub is None:
            self._neg = [(self.p - a) % self.p for a in range(size)]
        else:
            sub = self.sub
            self._neg = [self.from_coords([sub.neg(c) for c in self.coords(a)])
                         for a in range(size)]

    # ---- field operations -------------------------------------------------

    def add(self, a: int, b: int) -> int:
        if self.sub is None:
            return (a + b) % self.p
        if a == 0:
            return b
        if b == 0:
            return a
        la = self._log[a]
        z = self._zech[(self._log[b] - la) % self._n1]
        if z < 0:
            return 0
        return self._exp[(la + z) % self._n1]

    def neg(self, a: int) -> int:
        return self._neg[a]

    def sub_(self, a: int, b: int) -> int:
        return self.add(a, self._neg[b])

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp[(self._log[a] + self._log[b]) % self._n1]

    def inv(self, a: int) -> int:
        if a == 0:
            raise DomainError("zero is not invertible")
        return self._exp[-self._log[a] % self._n1]

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow_(self, a: int, e: int) -> int:
        if a == 0:
            if e == 0:
                return 1
            if e < 0:
                raise DomainError("zero to a negative power")
            return 0
        return self._exp[(self._log[a] * e) % self._n1]

    def scalar(self, n: int) -> int:
        """Index of the prime-subfield element n * 1."""
        return n % self.p

    def elements(self) -> Iterator[int]:
        return iter(self.canonical)

    def __repr__(self) -> str:
        return f"GF(size={self.size})"


# ---- polynomials over a GF -------------------------------------------------
# Polynomials are trimmed little-endian tuples of element indices; () is zero.

def poly_trim(f: Sequence[int]) -> tuple:
    f = list(f)
    while f and f[-1] == 0:
        f.pop()
    return tuple(f)


def poly_deg(f: Sequence[int]) -> int:
    return len(f) - 1


def poly_add(K: GF, f: Sequence[int], g: Sequence[int]) -> tuple:
    if len(f) < len(g):
        f, g = g, f
    out = list(f)
    for i, c in enumerate(g):
        out[i] = K.add(out[i], c)
    return poly_trim(out)


def poly_neg(K: GF, f: Sequence[int]) -> tuple:
    return tuple(K.neg(c) for c in f)


def poly_sub(K: GF, f: Sequence[int], g: Sequence[int]) -> tuple:
    return poly_add(K, f, poly_neg(K, g))


def poly_mul(K: GF, f: Sequence[int], g: Sequence[int]) -> tuple:
    if not f or not g:
        return ()
    out = [0] * (len(f) + len(g) - 1)
    for i, x in enumerate(f):
        if x == 0:
            continue
        for j, y in enumerate(g):
            if y:
                out[i + j] = K.add(out[i + j], K.mul(x, y))
    return poly_trim(out)


def poly_divmod(K: GF, f: Sequence[int], g: Sequence[int]) -> tuple:
    g = poly_trim(g)
    if not g:
        raise DomainError("division by the zero polynomial")
    rem = list(poly_trim(f))
    dg = len(g) - 1
    inv_lead = K.inv(g[-1])
    quot = [0] * max(len(rem) - dg, 0)
    while len(rem) - 1 >= dg and rem:
        c = K.mul(rem[-1], inv_lead)
        shift = len(rem) - 1 - dg
        quot[shift] = c
        for j in range(dg + 1):
            rem[shift + j] = K.sub_(rem[shift + j], K.mul(c, g[j]))
        while rem and rem[-1] == 0:
            rem.pop()
    return poly_trim(quot), poly_trim(rem)


def poly_eval(K: GF, f: Sequence[int], a: int) -> int:
    acc = 0
    for c in reversed(f):
        acc = K.add(K.mul(acc, a), c)
    return acc


def poly_derivative(K: GF, f: Sequence[int]) -> tuple:
    return poly_trim([K.mul(K.scalar(i + 1), c) for i, c in enumerate(f[1:])])


def lagrange_interpolate(K: GF, xs: Sequence[int], ys: Sequence[int]) -> tuple:
    out: tuple = ()
    for i, xi in enumerate(xs):
        basis: tuple = (1,)
        denom = 1
        for j, xj in enumerate(xs):
            if j == i:
                continue
            basis = poly_mul(K, basis, (K.neg(xj), 1))
            denom = K.mul(denom, K.sub_(xi, xj))
        c = K.mul(ys[i], K.inv(denom))
        out = poly_add(K, out, tuple(K.mul(c, b) for b in basis))
    return out


def monic_polys(K: GF, deg: int) -> Iterator[tuple]:
    """All monic degree-deg polynomials over K in canonical order."""
    for tail in itertools.product(K.canonical, repeat=deg):
        yield tail + (1,)


def is_irreducible_monic(K: GF, f: Sequence[int]) -> bool:
    deg = len(f) - 1
    if deg < 1:
        return False
    if deg == 1:
        return True
    for d in range(1, deg // 2 + 1):
        for g in monic_polys(K, d):
            if not poly_divmod(K, f, g)[1]:
                return False
    return True


def find_irreducible(K: GF, deg: int) -> tuple:
    """First monic irreducible of the given degree in canonical order."""
    if deg < 1:
        raise ParameterError("degree must be positive")
    for f in monic_polys(K, deg):
        if is_irreducible_monic(K, f):
            return f
    raise InternalError(f"no irreducible of degree {deg} found")


# ---- linear algebra over a GF ----------------------------------------------

def solve_linear(K: GF, rows: Sequence[Sequence[int]], rhs: Sequence[int]):
    """One solution of rows * x = rhs with free variables set to 0, or None."""
    n_eq = len(rows)
    n_var = len(rows[0]) if n_eq else 0
    aug = [list(r) + [v] for r, v in zip(rows, rhs)]
    pivots = []
    r = 0
    for c in range(n_var):
        piv = next((i for i in range(r, n_eq) if aug[i][c] != 0), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = K.inv(aug[r][c])
        aug[r] = [K.mul(inv, v) for v in aug[r]]
        for i in range(n_eq):
            if i != r and aug[i][c] != 0:
                factor = aug[i][c]
                aug[i] = [K.sub_(vi, K.mul(factor, vr)) for vi, vr in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
    for i in range(r, n_eq):
        if aug[i][n_var] != 0:
            return None
    x = [0] * n_var
    for row_i, c in enumerate(pivots):
        x[c] = aug[row_i][n_var]
    return x


def invert_matrix(K: GF, rows: Sequence[Sequence[int]]):
    """Inverse of a square matrix over K, or None if singular."""
    n = len(rows)
    aug = [list(r) + [1 if i == j else 0 for j in range(n)] for i, r in enumerate(rows)]
    for c in range(n):
        piv = next((i for i in range(c, n) if aug[i][c] != 0), None)
        if piv is None:
            return None
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = K.inv(aug[c][c])
        aug[c] = [K.mul(inv, v) for v in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                factor = aug[i][c]
                aug[i] = [K.sub_(vi, K.mul(factor, vc)) for vi, vc in zip(aug[i], aug[c])]
    return [row[n:] for row in aug]


# ---- the tower ---------------------------------------------------------------

class Tower:
    """F_p < F_q < F_{q^m} with deterministic moduli and generators.

    The levels are ``base`` (F_p), ``mid`` (F_q) and ``top`` (F_{q^m}); the
    top is always built as a degree-m extension of the mid level, so mid
    indices are valid top indices and the coefficient embedding is free.
    """

    def __init__(self, p: int, r: int, m: int = 1, max_enum: Optional[int] = None):
        cap = MAX_ENUM if max_enum is None else max_enum
        if not isinstance(p, int) or not isinstance(r, int) or not isinstance(m, int):
            raise ParameterError("p, r, m must be integers")
        if p == 2 or p % 2 == 0:
            raise ParameterError("p must be odd")
        if not is_prime(p):
            raise ParameterError(f"p must be prime, got {p}")
        if r < 1 or m < 1:
            raise ParameterError("r and m must be positive")
        if p ** (r * m) > cap:
            raise ResourceCapError(f"tower size {p ** (r * m)} exceeds cap {cap}")
        self.p, self.r, self.m = p, r, m
        self.q = p ** r
        self.top_size = self.q ** m
        self.base = GF(p)
        self.modulus_q = find_irreducible(self.base, r)
        self.mid = GF(p, r, sub=self.base, modulus=self.modulus_q)
        self.modulus_top = find_irreducible(self.mid, m)
        self.top = GF(p, m, sub=self.mid, modulus=self.modulus_top)

    @property
    def generator_q(self) -> int:
        return self.mid.generator

    def dlog(self, a: int) -> int:
        """Discrete log of a nonzero mid element w.r.t. the fixed generator."""
        if a == 0:
            raise DomainError("discrete log of zero")
        return self.mid._log[a]

    @functools.cached_property
    def frob_p_mid(self) -> list:
        return [self.mid.pow_(a, self.p) for a in range(self.q)]

    @functools.cached_property
    def frob_p_top(self) -> list:
        return [self.top.pow_(a, self.p) for a in range(self.top_size)]

    @functools.cached_property
    def frob_q_top(self) -> list:
        return [self.top.pow_(a, self.q) for a in range(self.top_size)]

    @functools.cached_property
    def rel_trace_map(self) -> list:
        top, frob = self.top, self.frob_q_top
        out = []
        for a in range(self.top_size):
            acc, cur = a, a
            for _ in range(self.m - 1):
                cur = frob[cur]
                acc = top.add(acc, cur)
            if acc >= self.q:
                raise InternalError("relative trace left the middle level")
            out.append(acc)
        return out

    @functools.cached_property
    def abs_trace_top_map(self) -> list:
        top, frob = self.top, self.frob_p_top
        out = []
        for a in range(self.top_size):
            acc, cur = a, a
            for _ in range(self.r * self.m - 1):
                cur = frob[cur]
                acc = top.add(acc, cur)
            if acc >= self.p:
                raise InternalError("absolute trace left the prime level")
            out.append(acc)
        return out

    @functools.cached_property
    def abs_trace_mid_map(self) -> list:
        mid, frob = self.mid, self.frob_p_mid
        out = []
        for a in range(self.q):
            acc, cur = a, a
            for _ in range(self.r - 1):
                cur = frob[cur]
                acc = mid.add(acc, cur)
            if acc >= self.p:
                raise InternalError("absolute trace left the prime level")
            out.append(acc)
        return out

    @functools.cached_property
    def norm_map(self) -> list:
        top = self.top
        s = (self.top_size - 1) // (self.q - 1)
        out = [0] * self.top_size
        for a in range(1, self.top_size):
            v = top._exp[(top._log[a] * s) % top._n1]
            if v >= self.q:
                raise InternalError("norm left the middle level")
            out[a] = v
        return out

    def __repr__(self) -> str:
        return f"Tower(p={self.p}, r={self.r}, m={self.m})"


@functools.lru_cache(maxsize=None)
def build_field(p: int, r: int, m: int = 1) -> Tower:
    """Deterministic tower for (p, r, m); repeated calls share one instance."""
    return Tower(p, r, m)


def fresh_tower(p: int, r: int, m: int = 1) -> Tower:
    """Uncached construction, for determinism checks."""
    return Tower(p, r, m)


# ---- element wrapper and tower-level operations ------------------------------

_LEVEL_RANK = {"base": 0, "mid": 1, "top": 2}


@dataclass(frozen=True)
class TowerElement:
    """A field element tagged with its tower level.

    Thin wrapper for the public operation surface; hot loops work on raw
    indices with the GF tables directly.
    """

    tower: Tower
    level: str
    index: int

    def __post_init__(self):
        if self.level not in _LEVEL_RANK:
            raise ParameterError(f"unknown level {self.level!r}")
        if not 0 <= self.index < self._gf.size:
            raise ParameterError("element index out of range")

    @property
    def _gf(self) -> GF:
        return {"base": self.tower.base, "mid": self.tower.mid, "top": self.tower.top}[self.level]

    def embed(self, level: str) -> "TowerElement":
        if _LEVEL_RANK[level] < _LEVEL_RANK[self.level]:
            raise ParameterError("cannot embed downward")
        return TowerElement(self.tower, level, self.index)

    def _pair(self, other: "TowerElement") -> tuple:
        if self.tower is not other.tower:
            raise ParameterError("elements from different towers")
        lvl = max(self.level, other.level, key=lambda s: _LEVEL_RANK[s])
        return lvl, self.embed(lvl), other.embed(lvl)

    def __add__(self, other):
        lvl, a, b = self._pair(other)
        return TowerElement(self.tower, lvl, a._gf.add(a.index, b.index))

    def __sub__(self, other):
        lvl, a, b = self._pair(other)
        return TowerElement(self.tower, lvl, a._gf.sub_(a.index, b.index))

    def __mul__(self, other):
        lvl, a, b = self._pair(other)
        return TowerElement(self.tower, lvl, a._gf.mul(a.index, b.index))

    def __truediv__(self, other):
        lvl, a, b = self._pair(other)
        return TowerElement(self.tower, lvl, a._gf.div(a.index, b.index))

    def __neg__(self):
        return TowerElement(self.tower, self.level, self._gf.neg(self.index))

    def __pow__(self, e: int):
        return TowerElement(self.tower, self.level, self._gf.pow_(self.index, e))


@dataclass(frozen=True)
class MuElement:
    """Exponent e standing for generator_q ** e in the group of units of F_q."""

    exponent: int
    order: int

    def __post_init__(self):
        object.__setattr__(self, "exponent", self.exponent % self.order)


def frobenius_p(x: TowerElement) -> TowerElement:
    t = x.tower
    if x.level == "base":
        return x
    arr = t.frob_p_mid if x.level == "mid" else t.frob_p_top
    return TowerElement(t, x.level, arr[x.index])


def frobenius_q(x: TowerElement) -> TowerElement:
    if x.level != "top":
        return x
    return TowerElement(x.tower, "top", x.tower.frob_q_top[x.index])


def abs_trace(x: TowerElement) -> TowerElement:
    t = x.tower
    if x.level == "base":
        return TowerElement(t, "base", t.base.mul(t.base.scalar(t.r * t.m), x.index))
    if x.level == "mid":
        v = t.base.mul(t.base.scalar(t.m), t.abs_trace_mid_map[x.index])
        return TowerElement(t, "base", v)
    return TowerElement(t, "base", t.abs_trace_top_map[x.index])


def rel_trace(x: TowerElement) -> TowerElement:
    t = x.tower
    y = x.embed("top")
    return TowerElement(t, "mid", t.rel_trace_map[y.index])


def norm_to_q(x: TowerElement) -> TowerElement:
    t = x.tower
    y = x.embed("top")
    return TowerElement(t, "mid", t.norm_map[y.index])


def discrete_log(x: TowerElement) -> MuElement:
    t = x.tower
    if x.level == "top":
        if x.index >= t.q:
            raise DomainError("element does not lie in F_q")
        x = TowerElement(t, "mid", x.index)
    y = x.embed("mid")
    return MuElement(t.dlog(y.index), t.q - 1)


def mu_value(tower: Tower, mu: MuElement) -> TowerElement:
    return TowerElement(tower, "mid", tower.mid._exp[mu.exponent % (tower.q - 1)])


def enumerate_level(tower: Tower, level: str) -> Iterator[TowerElement]:
    gf = {"base": tower.base, "mid": tower.mid, "top": tower.top}[level]
    for idx in gf.elements():
        yield TowerElement(tower, level, idx)


# ---- canonical JSON encoding --------------------------------------------------

def _encode_gf(K: GF, idx: int):
    if K.sub is None:
        return idx
    parts = [_encode_gf(K.sub, c) for c in K.coords(idx)]
    return parts[0] if K.k == 1 else parts


def _decode_gf(K: GF, data) -> int:
    if K.sub is None:
        if not isinstance(data, int) or not 0 <= data < K.p:
            raise ParameterError(f"bad coefficient {data!r}")
        return data
    if K.k == 1:
        return _decode_gf(K.sub, data)
    if not isinstance(data, list) or len(data) != K.k:
        raise ParameterError("coordinate list has wrong length")
    return K.from_coords([_decode_gf(K.sub, d) for d in data])


def encode_element(x: TowerElement):
    """Little-endian nested coordinate encoding; length-1 levels flatten."""
    return _encode_gf(x._gf, x.index)


def decode_element(tower: Tower, level: str, data) -> TowerElement:
    gf = {"base": tower.base, "mid": tower.mid, "top": tower.top}[level]
    return TowerElement(tower, level, _decode_gf(gf, data))


def field_params_json(tower: Tower) -> dict:
    mid_enc = lambda idx: _encode_gf(tower.mid, idx)  # noqa: E731
    return {
        "p": tower.p,
        "r": tower.r,
        "m": tower.m,
        "q": tower.q,
        "modulus": list(tower.modulus_q),
        "modulus_top": [mid_enc(c) for c in tower.modulus_top],
        "generator": mid_enc(tower.generator_q),
    }
