"""Recovery of a monic-in-y plane curve equation from trace-sum data.

The pipeline: certify an auxiliary irreducible h(x) of degree m > d whose
roots see the full fiber of the curve (every root a has deg_y-many distinct
y-roots over F_{q^m}); collect the trace sums that encode the moments
a^i b^j over those solutions; divide by m and invert the Vandermonde system
in the conjugate roots of h; reconstruct each fiber polynomial from its
power sums; and lift the coefficients back to F_q[x] through the
isomorphism of F_q[x]/(h) with F_{q^m}.

Two oracle modes answer the sum queries: ``direct`` enumerates solutions,
``protocol`` consumes only trace sums produced by the exponential-sum
pathway, which is the data an L-function provides.
"""

from __future__ import annotations

import functools
import itertools
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .errors import (DomainError, InconsistentInputError, InternalError,
                     NotFoundError, ParameterError)
from .fields import (GF, Tower, build_field, invert_matrix, lagrange_interpolate,
                     monic_polys, is_irreducible_monic, poly_add, poly_deg,
                     poly_eval, poly_mul, poly_trim)
from .expsums import (PlaneCurve, coordinate_basis, curve_points, s_m_points,
                      t_m_points, t_m_via_pathway, varpi_coefficient)


@dataclass
class RecoveryConfig:
    m_cap: int = 8
    protocol_sample: int = 5
    protocol_gdeg: int = 2
    seed: int = 0
    max_enum: int = 10 ** 6


# ---- absolute irreducibility probes -------------------------------------------

def _root_polys_over_ext(p: int, r: int, curve: PlaneCurve, ext: int):
    """A y-root of the curve in K[x] with K = F_{q^ext}, or None.

    A factorization of a monic-in-y polynomial always contains a factor
    that is linear in y over the splitting field, so root-freeness over the
    right extensions decides irreducibility for deg_y <= 3.  Candidate root
    polynomials have degree at most the total degree and are enumerated by
    interpolation through per-point root sets.
    """
    d = curve.degree
    tower = build_field(p, r, ext)
    K = tower.top
    xs = list(range(min(K.size, d + 1)))
    root_sets = []
    for a in xs:
        coeffs = curve.y_coeffs_at(K, a)
        roots_a = [b for b in range(K.size) if poly_eval(K, coeffs, b) == 0]
        if not roots_a:
            return None
        root_sets.append(roots_a)
    if K.size >= d + 1:
        for combo in itertools.product(*root_sets):
            u = lagrange_interpolate(K, xs, list(combo))
            if poly_deg(u) <= d and _is_y_root(K, curve, u):
                return u
        return None
    # fewer points than degrees of freedom: candidates are an interpolant
    # plus any multiple of the vanishing polynomial of the whole field
    vanish: tuple = (1,)
    for a in xs:
        vanish = poly_mul(K, vanish, (K.neg(a), 1))
    tail_len = d + 1 - K.size
    for combo in itertools.product(*root_sets):
        w = lagrange_interpolate(K, xs, list(combo))
        for tail in itertools.product(range(K.size), repeat=tail_len):
            u = poly_add(K, w, poly_mul(K, vanish, poly_trim(tail)))
            if poly_deg(u) <= d and _is_y_root(K, curve, u):
                return u
    return None


def _is_y_root(K: GF, curve: PlaneCurve, u) -> bool:
    """Whether F(x, u(x)) vanishes identically."""
    pows = [(1,)]
    for _ in range(curve.deg_y):
        pows.append(poly_mul(K, pows[-1], u))
    acc: tuple = ()
    for (i, j), coeff in curve.terms.items():
        term = tuple(K.mul(coeff, c) for c in pows[j])
        term = (0,) * i + term
        acc = poly_add(K, acc, term)
    return not acc


def absolute_irreducibility_probe(p: int, r: int, curve: PlaneCurve,
                                  exts=(1, 2)) -> bool:
    """No y-root over F_{q^e} for each probe extension e."""
    if curve.deg_y < 2:
        return True
    return all(_root_polys_over_ext(p, r, curve, e) is None for e in exts)


# ---- the recovery instance ------------------------------------------------------

@dataclass
class RecoveryInstance:
    """A curve to recover, plus which oracle the pipeline may consult.

    The constructor checks monic-in-y shape and runs the desk-scale
    irreducibility probes (over F_q and one quadratic extension); full
    absolute irreducibility remains the caller's contract.
    """

    tower: Tower  # the (p, r, 1) base tower
    curve: PlaneCurve
    oracle_mode: str = "direct"
    config: RecoveryConfig = field(default_factory=RecoveryConfig)

    def __post_init__(self):
        if self.oracle_mode not in ("direct", "protocol"):
            raise ParameterError("oracle_mode must be 'direct' or 'protocol'")
        if not self.curve.is_monic_in_y():
            raise ParameterError("curve must be monic in y")
        if any(c >= self.tower.q for c in self.curve.terms.values()):
            raise ParameterError("curve coefficient outside F_q")
        if not absolute_irreducibility_probe(self.tower.p, self.tower.r, self.curve):
            raise InconsistentInputError("curve fails the irreducibility probes")


@dataclass
class HCertificate:
    """An admitted (m, h): all fiber solutions over h's roots are rational.

    ``roots`` is the Frobenius orbit of one root of h inside F_{q^m}, and
    ``solution_count`` equals m * deg_y by construction.
    """

    m: int
    h: tuple  # full monic coefficient tuple over F_q
    tower: Tower  # the (p, r, m) tower
    roots: tuple  # top-level indices, Frobenius orbit order
    n_y: int
    solution_count: int


def _h_roots(tower: Tower, h) -> Optional[tuple]:
    """The Frobenius orbit of roots of h in the top level, or None."""
    top = tower.top
    first = next((a for a in range(tower.top_size)
                  if poly_eval(top, h, a) == 0), None)
    if first is None:
        return None
    roots = [first]
    frob = tower.frob_q_top
    cur = frob[first]
    while cur != first:
        roots.append(cur)
        cur = frob[cur]
    if len(roots) != poly_deg(h):
        return None
    return tuple(roots)


def _distinct_y_roots(tower: Tower, curve: PlaneCurve, a: int) -> list:
    top = tower.top
    coeffs = curve.y_coeffs_at(top, a)
    return [b for b in range(tower.top_size) if poly_eval(top, coeffs, b) == 0]


def _candidate_ms(inst: RecoveryInstance):
    m = inst.curve.degree + 1
    while m <= inst.config.m_cap:
        if m % inst.tower.p != 0:
            yield m
        m += 1


@functools.lru_cache(maxsize=None)
def _irreducible_monics(p: int, r: int, deg: int) -> tuple:
    K = build_field(p, r, 1).mid
    return tuple(h for h in monic_polys(K, deg) if is_irreducible_monic(K, h))


def find_h(inst: RecoveryInstance) -> HCertificate:
    """First (m, h) in canonical order whose fiber count certifies the curve."""
    n_y = inst.curve.deg_y
    for m in _candidate_ms(inst):
        tower_m = build_field(inst.tower.p, inst.tower.r, m)
        points = _protocol_points(inst, tower_m) if inst.oracle_mode == "protocol" else None
        for h in _irreducible_monics(inst.tower.p, inst.tower.r, m):
            roots = _h_roots(tower_m, h)
            if roots is None:
                raise InternalError("irreducible h without a full root orbit")
            if inst.oracle_mode == "direct":
                count = 0
                ok = True
                for a in roots:
                    ys = _distinct_y_roots(tower_m, inst.curve, a)
                    count += len(ys)
                    if len(ys) != n_y:
                        ok = False
                        break
                if not ok:
                    continue
            else:
                count = _protocol_solution_count(inst, tower_m, points, h, m)
                if count != m * n_y:
                    continue
            return HCertificate(m, tuple(h), tower_m, roots, n_y, m * n_y)
    raise NotFoundError(f"no certified h found with m <= {inst.config.m_cap}")


def _protocol_points(inst: RecoveryInstance, tower_m: Tower) -> list:
    return curve_points(tower_m, inst.curve, max_enum=inst.config.max_enum)


def _protocol_solution_count(inst: RecoveryInstance, tower_m: Tower,
                             points: list, h, m: int) -> int:
    """Count fiber solutions using only trace-sum queries.

    For each section s of degree < m, the query function is nonzero exactly
    on the Frobenius orbit of (a, s(a)) when that orbit lies on the curve;
    the trace sum is then m^2, else 0.  Accepted sections biject with
    rational fiber solutions over a fixed root of h, each orbit carrying m
    of the m * deg_y required solutions.
    """
    top = tower_m.top
    hits = 0
    m_sq = top.mul(top.scalar(m), top.scalar(m))
    # the indicator vanishes off the roots of h (1 - h(a)^(size-1) is zero
    # there), and zero values add nothing, so sum over the on-h sublist
    on_h = [(a, b) for a, b in points if poly_eval(top, h, a) == 0]
    for s_tail in itertools.product(range(inst.tower.q), repeat=m):
        s = poly_trim(s_tail)

        def f(a, b, s=s):
            return 1 if top.sub_(b, poly_eval(top, s, a)) == 0 else 0

        t = t_m_via_pathway(tower_m, on_h, f)
        if t not in (0, m_sq):
            raise InternalError("fiber indicator sum outside {0, m^2}")
        if t == m_sq:
            hits += 1
    return m * hits


# ---- moments -------------------------------------------------------------------

def _cert_solutions(inst: RecoveryInstance, cert: HCertificate) -> list:
    out = []
    for a in cert.roots:
        for b in _distinct_y_roots(cert.tower, inst.curve, a):
            out.append((a, b))
    if len(out) != cert.solution_count:
        raise InternalError("certificate solution count drifted")
    return out


def moment(inst: RecoveryInstance, cert: HCertificate, i: int, j: int,
           rng: Optional[random.Random] = None,
           points: Optional[list] = None) -> int:
    """The trace-sum value m * sum over fiber solutions of a^i b^j, in F_q.

    Direct mode enumerates the solutions.  Protocol mode evaluates the
    trace sum of the masked monomial through the exponential-sum pathway,
    over a sample of auxiliary polynomials g, and takes the majority value
    (the mask needs some g making the cover nondegenerate; on rational
    points the g-dependent factor is identically one, and the votes are
    expected to be unanimous).
    """
    if not 0 <= i < cert.m:
        raise ParameterError("need 0 <= i < m")
    if not 0 <= j <= cert.tower.top_size - 1:
        raise ParameterError("j outside the power-sum window")
    top = cert.tower.top
    if inst.oracle_mode == "direct":
        acc = 0
        for a, b in _cert_solutions(inst, cert):
            acc = top.add(acc, top.mul(top.pow_(a, i), top.pow_(b, j)))
        acc = top.mul(top.scalar(cert.m), acc)
        if acc >= inst.tower.q:
            raise InternalError("moment value left F_q")
        return acc
    return _protocol_moment(inst, cert, i, j, rng, points)


def _protocol_moment(inst: RecoveryInstance, cert: HCertificate, i: int, j: int,
                     rng: Optional[random.Random],
                     points: Optional[list] = None) -> int:
    cfg = inst.config
    rng = rng or random.Random(cfg.seed)
    tower_m = cert.tower
    top = tower_m.top
    if points is None:
        points = curve_points(tower_m, inst.curve, max_enum=cfg.max_enum)
    # f vanishes off the roots of h, and zero values contribute nothing to
    # any trace sum, so the sum may be taken over the on-h sublist exactly.
    on_h = [(a, b) for a, b in points if poly_eval(top, cert.h, a) == 0]
    size_exp = tower_m.top_size
    sample = cfg.protocol_sample
    for _ in range(2):  # one escalation on a tied vote
        votes = Counter()
        for _ in range(sample):
            g = _random_bivariate(inst, rng, cfg.protocol_gdeg)

            def f(a, b, g=g):
                mask = top.add(1, top.mul(
                    top.sub_(top.pow_(a, size_exp), a), g.eval_at(top, a, b)))
                return top.mul(top.mul(top.pow_(a, i), top.pow_(b, j)), mask)

            votes[t_m_via_pathway(tower_m, on_h, f)] += 1
        ranked = votes.most_common()
        if len(ranked) == 1 or ranked[0][1] > ranked[1][1]:
            return ranked[0][0]
        sample *= 2
    raise InconsistentInputError(f"tied moment vote at (i, j) = ({i}, {j})")


def _random_bivariate(inst: RecoveryInstance, rng: random.Random, deg: int) -> PlaneCurve:
    q = inst.tower.q
    terms = {}
    for i in range(deg + 1):
        for j in range(deg + 1 - i):
            terms[(i, j)] = rng.randrange(q)
    terms[(0, 0)] = terms.get((0, 0), 0) or 1  # keep it nonzero
    return PlaneCurve(terms)


def all_moments(inst: RecoveryInstance, cert: HCertificate) -> list:
    """moments[i][j] for 0 <= i < m, 0 <= j <= q^m - 1, with a j=0 sanity check.

    Direct mode runs one incremental sweep over the fiber solutions (the
    same double sum as ``moment``, factored); protocol mode queries every
    cell through the pathway with a shared point list.
    """
    if inst.oracle_mode == "direct":
        out = _direct_moment_sweep(inst, cert)
    else:
        rng = random.Random(inst.config.seed)
        points = curve_points(cert.tower, inst.curve, max_enum=inst.config.max_enum)
        out = [[moment(inst, cert, i, j, rng, points)
                for j in range(cert.tower.top_size)] for i in range(cert.m)]
    mid = inst.tower.mid
    expect = mid.mul(mid.scalar(cert.m * cert.m), mid.scalar(cert.n_y))
    if out[0][0] != expect:
        raise InconsistentInputError("certificate fails the counting moment")
    return out


def _direct_moment_sweep(inst: RecoveryInstance, cert: HCertificate) -> list:
    top = cert.tower.top
    add, mul, pow_ = top.add, top.mul, top.pow_
    m = cert.m
    sols = _cert_solutions(inst, cert)
    a_pows = [[pow_(a, i) for i in range(m)] for a, _ in sols]
    b_vals = [b for _, b in sols]
    n_j = cert.tower.top_size
    m_scalar = top.scalar(m)
    q = inst.tower.q
    out = [[0] * n_j for _ in range(m)]
    b_pows = [1] * len(sols)
    for j in range(n_j):
        acc = [0] * m
        for s, bp in enumerate(b_pows):
            ap = a_pows[s]
            for i in range(m):
                acc[i] = add(acc[i], mul(ap[i], bp))
        for i in range(m):
            v = mul(m_scalar, acc[i])
            if v >= q:
                raise InternalError("moment value left F_q")
            out[i][j] = v
        for s in range(len(sols)):
            b_pows[s] = mul(b_pows[s], b_vals[s])
    return out


def vandermonde_solve(cert: HCertificate, values: list) -> dict:
    """Per-root power sums s_j(a) from the moment table.

    Divides by m and solves the m x m Vandermonde system in the conjugate
    roots of h for every j.  Returns {root index: [s_0(a), ..., s_{N-1}(a)]}.
    """
    tower = cert.tower
    top = tower.top
    m = cert.m
    inv_m = top.inv(top.scalar(m))
    V = [[top.pow_(a, i) for a in cert.roots] for i in range(m)]
    V_inv = invert_matrix(top, V)
    if V_inv is None:
        raise InternalError("Vandermonde matrix in distinct roots is singular")
    n_j = tower.top_size
    out = {a: [0] * n_j for a in cert.roots}
    for j in range(n_j):
        rhs = [top.mul(inv_m, values[i][j]) for i in range(m)]
        for k, a in enumerate(cert.roots):
            acc = 0
            for i in range(m):
                acc = top.add(acc, top.mul(V_inv[k][i], rhs[i]))
            out[a][j] = acc
    return out


def per_root_poly(K: GF, s_values, n_y: int) -> tuple:
    """Monic fiber polynomial from the power sums of its roots.

    s_values[j] = s_j(a) for j >= 1 (index 0 is the counting value and is
    ignored); the certificate forces n_y distinct simple roots.
    """
    from .powersums import reconstruct

    spec = reconstruct(K, s_values[1:], n_y)
    if any(m != 1 for m in spec.mults):
        raise InconsistentInputError("fiber polynomial has a repeated root")
    poly = (1,)
    for rt in spec.roots:
        poly = poly_mul(K, poly, (K.neg(rt), 1))
    return poly


def reassemble_f(inst: RecoveryInstance, cert: HCertificate, fiber_polys: dict) -> PlaneCurve:
    """Lift fiber coefficients through F_q[x]/(h) and rebuild the bivariate F.

    Uses one root's fiber polynomial for the lift (the others must be its
    Frobenius conjugates and are checked).  Each y-coefficient of the fiber
    polynomial is written in the basis of powers of the root, giving the
    x-polynomial coefficient directly; degrees above the declared total
    degree flag an inconsistent certificate.
    """
    tower = cert.tower
    top, mid = tower.top, inst.tower.mid
    m = cert.m
    a0 = cert.roots[0]
    poly0 = fiber_polys[a0]
    frob = tower.frob_q_top
    for k, a in enumerate(cert.roots[1:], start=1):
        expected = tuple(_frob_iter(frob, c, k) for c in poly0)
        if tuple(fiber_polys[a]) != expected:
            raise InconsistentInputError("fiber polynomials are not conjugate")
    # change of basis: columns are the mid-level coordinates of a0^k
    basis_cols = [top.coords(top.pow_(a0, k)) for k in range(m)]
    P = [[basis_cols[k][row] for k in range(m)] for row in range(m)]
    P_inv = invert_matrix(mid, P)
    if P_inv is None:
        raise InternalError("powers of the certified root do not span")
    d = inst.curve.degree
    n_y = cert.n_y
    terms = {(0, n_y): 1}
    for j in range(n_y):
        coords = top.coords(poly0[j])
        lift = [0] * m
        for row in range(m):
            acc = 0
            for col in range(m):
                acc = mid.add(acc, mid.mul(P_inv[row][col], coords[col]))
            lift[row] = acc
        lift = poly_trim(lift)
        if poly_deg(lift) > d:
            raise InconsistentInputError("lifted coefficient exceeds the degree bound")
        for i, c in enumerate(lift):
            if c:
                terms[(i, j)] = c
    return PlaneCurve(terms)


def _frob_iter(frob: list, v: int, k: int) -> int:
    for _ in range(k):
        v = frob[v]
    return v


def verify_frobenius_equivariance(cert: HCertificate, srows: dict) -> None:
    """Check s_j(a^q) = s_j(a)^q across the whole root orbit and window."""
    frob = cert.tower.frob_q_top
    roots = cert.roots
    for k in range(len(roots)):
        a, a_next = roots[k], roots[(k + 1) % len(roots)]
        if any(frob[v] != w for v, w in zip(srows[a], srows[a_next])):
            raise InconsistentInputError("per-root sums are not Frobenius equivariant")


def recover_curve(inst: RecoveryInstance):
    """Run the full pipeline; returns (recovered curve, certificate)."""
    cert = find_h(inst)
    values = all_moments(inst, cert)
    srows = vandermonde_solve(cert, values)
    verify_frobenius_equivariance(cert, srows)
    K = cert.tower.top
    frob = cert.tower.frob_q_top
    fiber = {cert.roots[0]: per_root_poly(K, srows[cert.roots[0]], cert.n_y)}
    # equivariance forces the conjugate fibers; reassemble re-checks them
    for k in range(1, len(cert.roots)):
        prev = fiber[cert.roots[k - 1]]
        fiber[cert.roots[k]] = tuple(frob[c] for c in prev)
    return reassemble_f(inst, cert, fiber), cert


# ---- the Legendre shortcut -------------------------------------------------------

def legendre_curve(tower: Tower, lam: int) -> PlaneCurve:
    """y^2 - x(x-1)(x-lam) over F_q, monic in y."""
    if lam in (0, 1) or not 0 <= lam < tower.q:
        raise ParameterError("lambda must avoid 0 and 1")
    mid = tower.mid
    # x(x-1)(x-lam) = x^3 - (1+lam)x^2 + lam x
    terms = {(0, 2): 1, (3, 0): mid.neg(1), (2, 0): mid.add(1, lam)}
    if lam:
        terms[(1, 0)] = mid.neg(lam)
    return PlaneCurve(terms)


def legendre_t1_pathway(tower: Tower, curve: PlaneCurve) -> int:
    """T_1 of x * (1 - y^(q-1)) on the curve, through the pathway only."""
    points = curve_points(tower, curve, max_enum=10 ** 6)
    top = tower.top
    q = tower.q

    def f(a, b):
        return a if b == 0 else 0  # 1 - b^(q-1) is the vanishing indicator

    return t_m_via_pathway(tower, points, f)


def legendre_recover(tower: Tower, curve: PlaneCurve) -> int:
    """Recover lambda of a promised Legendre curve from one trace sum."""
    if tower.m != 1:
        raise ParameterError("expected the base tower (m = 1)")
    t1 = legendre_t1_pathway(tower, curve)
    lam = tower.mid.sub_(t1, 1)
    if lam in (0, 1):
        raise InconsistentInputError("recovered lambda is degenerate")
    return lam


# ---- curve generation for suites --------------------------------------------------

def enumerate_recoverable_curves(p: int, r: int, max_degree: int = 3) -> list:
    """Every monic-in-y absolutely irreducible curve of total degree <= max.

    Runs the instance probes plus a cubic-extension probe for deg_y = 3
    (norm-form cubics are irreducible over F_q and its quadratic extension
    but split over the cubic one, so the quadratic probe alone misses them).
    """
    q = p ** r
    tower = build_field(p, r, 1)
    out = []
    for n_y in range(1, max_degree + 1):
        coeff_degs = [max_degree - j for j in range(n_y)]
        spaces = [itertools.product(range(q), repeat=dx + 1) for dx in coeff_degs]
        for combo in itertools.product(*spaces):
            terms = {(0, n_y): 1}
            for j, coeffs in enumerate(combo):
                for i, c in enumerate(coeffs):
                    if c:
                        terms[(i, j)] = c
            curve = PlaneCurve(terms)
            if curve.degree > max_degree:
                continue
            if _curve_is_recoverable(p, r, curve):
                out.append(curve)
    return out


def _curve_is_recoverable(p: int, r: int, curve: PlaneCurve) -> bool:
    # the certificate needs deg_y distinct fiber roots, so the curve must be
    # separable in y; for irreducible F that is just dF/dy != 0 (in char p
    # the inseparable ones are the polynomials in y^p, and their fibers have
    # a single root of multiplicity p, putting them beyond the pipeline)
    if all(j % p == 0 for _, j in curve.terms):
        return False
    if curve.deg_y >= 2 and not absolute_irreducibility_probe(p, r, curve):
        return False
    if curve.deg_y == 3 and _root_polys_over_ext(p, r, curve, 3) is not None:
        return False
    return True


def random_recoverable_curve(p: int, r: int, rng: random.Random,
                             max_degree: int = 3) -> PlaneCurve:
    q = p ** r
    while True:
        n_y = rng.randint(1, max_degree)
        terms = {(0, n_y): 1}
        for j in range(n_y):
            dx = max_degree - j
            for i in range(dx + 1):
                c = rng.randrange(q)
                if c:
                    terms[(i, j)] = c
        curve = PlaneCurve(terms)
        if curve.degree <= max_degree and _curve_is_recoverable(p, r, curve):
            return curve
