"""q-products, theta functions and the named structure series.

Two expansion mechanisms coexist:

* :func:`poch_expand` expands Pochhammer-type ratios as series in an
  auxiliary variable x (the w/z of operator products): the x**m log
  coefficient is a closed-form geometric sum, so each series coefficient is
  an exact Scalar in the deformation parameters.

* the "adic" machinery expands products of binomial factors (1 - monomial)
  as series in ONE RING VARIABLE (the base of the suite: p, q, p/q or t),
  with coefficients rational in the remaining variables including the
  argument x.  That is the exact-arithmetic reading of "in the analytic
  continuation sense": identities mixing x and 1/x become decidable
  order by order.

Exponents of the series variable are kept in raw root units (multiples of
the ring's L per natural power).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

from wqp.scalars import Ring, Scalar, TruncSeries, ZExponent

__all__ = [
    "PochSpec",
    "ThetaSpec",
    "poch_expand",
    "poch_x_series",
    "f_mn",
    "f_skao",
    "theta_factors",
    "theta_expand",
    "adic_expand",
    "family_factors",
    "phi_n",
    "phi_n_simple",
    "gamma_n",
    "TaggedFn",
    "psi_screen",
    "phi_screen",
    "psi_wakimoto",
    "phi_wakimoto",
]


# -- x-adic Pochhammer expansion (Lemma-style exp/log mechanism) ---------------


@dataclass(frozen=True)
class PochSpec:
    """(x | num_1..num_k; base) / (x | den_1..den_l; base) to a given order.

    Multipliers and base are Scalar monomials; ``var`` is the auxiliary
    series variable.  The x**m log coefficient is
    (sum_j den_j**m - sum_i num_i**m) / (m (1 - base**m)).
    """

    nums: tuple
    dens: tuple
    base: Scalar
    var: str = "x"
    order: int = 20


def poch_x_series(ring: Ring, var: str, factors, base: Scalar,
                  order: int) -> TruncSeries:
    """prod_j (x | M_j; base)**e_j expanded in x; factors = [(M_j, e_j)]."""
    one = ring.one
    coeffs = {}
    for n in range(1, order):
        tot = ring.zero
        bn = base ** n
        for M, e in factors:
            tot = tot + (M ** n) * (-e)
        if not tot.is_zero():
            tot = tot / (n * (one - bn))
        if not tot.is_zero():
            coeffs[n] = tot
    return TruncSeries(ring, var, coeffs, order).exp()


def poch_expand(spec: PochSpec) -> TruncSeries:
    ring = spec.base.ring
    factors = [(M, 1) for M in spec.nums] + [(M, -1) for M in spec.dens]
    return poch_x_series(ring, spec.var, factors, spec.base, spec.order)


def f_mn(m: int, N: int, ring: Ring, order: int = 20, var: str = "x") -> TruncSeries:
    """The structure series of the T_1 T_m relations for sl_N.

    Numerator multipliers {p^{m-1} q, p^m q^{-1}, p^{N-1}, p^N}, denominator
    multipliers {p^{m-1}, p^m, p^{N-1} q, p^N q^{-1}}, base p^N.
    """
    if not 1 <= m <= N - 1:
        raise ValueError(f"f_mn needs 1 <= m <= N-1, got m={m}, N={N}")
    q = ring.pow_frac("Q", 1)
    p = ring.pow_frac("P", 1)
    spec = PochSpec(
        nums=(p ** (m - 1) * q, p ** m / q, p ** (N - 1), p ** N),
        dens=(p ** (m - 1), p ** m, p ** (N - 1) * q, p ** N / q),
        base=p ** N, var=var, order=order)
    return poch_expand(spec)


def f_skao(ring: Ring, order: int = 20, var: str = "x") -> TruncSeries:
    """The rank-one structure series exp(sum (1/m)(1-q^m)(1-(p/q)^m)/(1+p^m) x^m)."""
    one = ring.one
    q = ring.pow_frac("Q", 1)
    p = ring.pow_frac("P", 1)
    coeffs = {}
    for n in range(1, order):
        v = (one - q ** n) * (one - (p / q) ** n) / ((one + p ** n) * n)
        if not v.is_zero():
            coeffs[n] = v
    return TruncSeries(ring, var, coeffs, order).exp()


# -- base-adic product expansion ------------------------------------------------


def adic_expand(ring: Ring, var: str, factors, order_raw: int,
                prefactor: Scalar | None = None) -> TruncSeries:
    """Expand prod (1 - M)**e adically in the ring variable ``var``.

    ``factors`` is an iterable of (M, e) with M a monomial Scalar carrying
    any powers of var, x and the rest; the raw var-exponent of M grades the
    expansion.  Factors with vanishing var-power fold into the coefficient
    prefactor as exact rational functions; negative var-powers are rewritten
    through (1 - M) = (-M)(1 - 1/M).
    """
    iv = ring._idx[var]
    out = TruncSeries.from_coeff(prefactor if prefactor is not None else ring.one,
                                 var, order_raw)
    pre = ring.one
    for M, e in factors:
        if len(M.num) != 1 or M.dint != 1 or M.dfac:
            raise ValueError(f"adic factor must be monomial: {M}")
        (key, coeff), = M.num.items()
        k = ring.unpack(key)[iv]
        if k < 0:
            pre = pre * ((-M) ** e)
            M = M.inverse()
            k = -k
        if k == 0:
            pre = pre * (ring.one - M) ** e
            continue
        # (1 - M)^e as a polynomial/series in var up to order_raw
        coeffs = {0: ring.one}
        if e > 0:
            for j in range(1, e + 1):
                if j * k >= order_raw:
                    break
                coeffs[j * k] = ring.from_int((-1) ** j * comb(e, j)) * M ** j
        else:
            f = -e
            j = 1
            while j * k < order_raw:
                coeffs[j * k] = ring.from_int(comb(f + j - 1, j)) * M ** j
                j += 1
        out = out * TruncSeries(ring, var, coeffs, order_raw)
    if not pre.is_one():
        out = out * pre
    return out


def family_factors(ring: Ring, var: str, xexp: int, mult: Scalar,
                   base: Scalar | None, e: int, order_raw: int):
    """Materialise the factor family (x**xexp | mult; base)**e for adic_expand.

    A family whose base has negative var-degree is flipped through
    (x|M;T) = (x|M/T; 1/T)^{-1} first.
    """
    x = ring.gen("x", xexp) if xexp else ring.one
    if base is None:
        yield (mult * x, e)
        return
    iv = ring._idx[var]

    def var_deg(s: Scalar) -> int:
        (key, _), = s.num.items()
        return ring.unpack(key)[iv]

    t0 = var_deg(base)
    if t0 == 0:
        raise ValueError("Pochhammer base without series-variable degree")
    if t0 < 0:
        mult = mult / base
        base = base.inverse()
        e = -e
        t0 = -t0
    m0 = var_deg(mult)
    k = 0
    while m0 + k * t0 < order_raw:
        yield (mult * base ** k * x, e)
        k += 1


# -- theta functions --------------------------------------------------------------


@dataclass(frozen=True)
class ThetaSpec:
    """theta_a(c x): period a, argument multiplier c, series variable, order."""

    period: Scalar
    argmult: Scalar
    var: str
    order: int  # natural units


def theta_factors(ring: Ring, period: Scalar, argmult: Scalar, e: int,
                  order_raw: int, var: str, xexp: int = 1):
    """The triple-product factors of theta_period(argmult * x**xexp)**e.

    theta_a(y) = prod_{n>=0}(1 - y a^n) prod_{n>=1}(1 - y^{-1} a^n)
                 prod_{n>=1}(1 - a^n).
    """
    yield from family_factors(ring, var, xexp, argmult, period, e, order_raw)
    yield from family_factors(ring, var, -xexp, argmult.inverse() * period,
                              period, e, order_raw)
    yield from family_factors(ring, var, 0, period, period, e, order_raw)


def theta_expand(spec: ThetaSpec) -> TruncSeries:
    ring = spec.period.ring
    order_raw = spec.order * ring.L
    fac = list(theta_factors(ring, spec.period, spec.argmult, 1, order_raw, spec.var))
    return adic_expand(ring, spec.var, fac, order_raw)


def theta_ratio(ring: Ring, var: str, period: Scalar, upper, lower,
                order: int) -> TruncSeries:
    """prod theta_period(u x) / prod theta_period(l x), expanded adically."""
    order_raw = order * ring.L
    fac = []
    for u in upper:
        fac += list(theta_factors(ring, period, u, 1, order_raw, var))
    for l in lower:
        fac += list(theta_factors(ring, period, l, -1, order_raw, var))
    return adic_expand(ring, var, fac, order_raw)


# -- the elliptic exchange functions -----------------------------------------------


@lru_cache(maxsize=None)
def elliptic_ring(extra: tuple = (), L: int = 2) -> Ring:
    return Ring(("x", "Q", "P") + tuple(extra), L=L)


def phi_n(N: int, ring: Ring, order: int = 20) -> TruncSeries:
    """The exchange function of the diagonal series, eight-theta form.

    theta-period p^N; series in P with coefficients rational in x, q.
    """
    if N < 2:
        raise ValueError("need N >= 2")
    one = ring.one
    q = ring.pow_frac("Q", 1)
    p = ring.pow_frac("P", 1)
    period = p ** N
    upper = (one, p, p ** (N - 1) * q, p ** N / q)
    lower = (q, p / q, p ** (N - 1), p ** N)
    return theta_ratio(ring, "P", period, upper, lower, order)


def phi_n_simple(N: int, ring: Ring, order: int = 20) -> TruncSeries:
    """The same function in its six-theta form (an identity that is checked)."""
    q = ring.pow_frac("Q", 1)
    p = ring.pow_frac("P", 1)
    period = p ** N
    upper = (p, q.inverse(), q / p)
    lower = (p.inverse(), q, p / q)
    return theta_ratio(ring, "P", period, upper, lower, order)


def gamma_n(N: int, ring: Ring, order: int = 20) -> TruncSeries:
    """The symmetric-form kernel: theta(x) theta(xq) / (theta(xp) theta(x p^{-1} q))."""
    one = ring.one
    q = ring.pow_frac("Q", 1)
    p = ring.pow_frac("P", 1)
    period = p ** N
    return theta_ratio(ring, "P", period, (one, q), (p, q / p), order)


@dataclass
class TaggedFn:
    """A base-adic series together with a formal x**tag prefactor and sign."""

    tag: ZExponent
    series: TruncSeries

    def __eq__(self, other):
        return self.tag == other.tag and self.series == other.series


def psi_screen(A: int, ring: Ring, order: int = 20, minus: bool = False) -> TaggedFn:
    """Exchange function of like-sign screening currents for a Cartan entry A.

    (-1)^(A-1) x^(A - A beta - 1) theta_q(x p^{A/2}) / theta_q(x^{-1} p^{A/2});
    series in q.  The minus variant substitutes q -> p/q and beta -> 1/beta:
    the ring then carries U = (p/q)^{1/L} in place of P, with p eliminated
    via p = u q, and the series runs in U.
    """
    if A not in (2, -1, 0):
        raise ValueError("Cartan entry must be one of 2, -1, 0")
    half = Fraction(A, 2)
    if not minus:
        base_var = "Q"
        period = ring.pow_frac("Q", 1)
        mult = ring.pow_frac("P", half)
        tag = ZExponent(A - 1, -A)
    else:
        base_var = "U"
        period = ring.pow_frac("U", 1)
        # p = u q: p^{A/2} = u^{A/2} q^{A/2}
        mult = ring.pow_frac("U", half) * ring.pow_frac("Q", half)
        tag = ZExponent(A - 1, 0, -A)
    order_raw = order * ring.L
    fac = list(theta_factors(ring, period, mult, 1, order_raw, base_var, xexp=1))
    fac += list(theta_factors(ring, period, mult, -1, order_raw, base_var, xexp=-1))
    series = adic_expand(ring, base_var, fac, order_raw,
                         prefactor=ring.from_int((-1) ** (A - 1)))
    return TaggedFn(tag, series)


def phi_screen(A: int, ring: Ring, order: int = 20, minus: bool = False) -> TaggedFn:
    """The half of the screening exchange function:
    x^{-beta A/2} theta_q(x p^{A/2}) / theta_q(x q^{A/2})."""
    if A not in (2, -1, 0):
        raise ValueError("Cartan entry must be one of 2, -1, 0")
    half = Fraction(A, 2)
    if not minus:
        base_var = "Q"
        period = ring.pow_frac("Q", 1)
        multp = ring.pow_frac("P", half)
        multq = ring.pow_frac("Q", half)
        tag = ZExponent(0, -half)
    else:
        base_var = "U"
        period = ring.pow_frac("U", 1)
        multp = ring.pow_frac("U", half) * ring.pow_frac("Q", half)
        multq = ring.pow_frac("Q", half)
        tag = ZExponent(0, 0, -half)
    order_raw = order * ring.L
    fac = list(theta_factors(ring, period, multp, 1, order_raw, base_var))
    fac += list(theta_factors(ring, period, multq, -1, order_raw, base_var))
    return TaggedFn(tag, adic_expand(ring, base_var, fac, order_raw))


@lru_cache(maxsize=None)
def wakimoto_ring(L: int = 2) -> Ring:
    """(x, Q, T) with t = q^{2 nu} an independent base variable."""
    return Ring(("x", "Q", "T"), L=L)


def psi_wakimoto(A: int, ring: Ring, order: int = 20) -> TaggedFn:
    """Exchange function of the quantum-affine screening currents.

    - x^{-A/nu - 1} theta_t(x q^{-A}) / theta_t(x^{-1} q^{-A}), series in t;
    the tag components are (r, s*nu, u/nu) here.
    """
    period = ring.pow_frac("T", 1)
    mult = ring.pow_frac("Q", -A)
    order_raw = order * ring.L
    fac = list(theta_factors(ring, period, mult, 1, order_raw, "T", xexp=1))
    fac += list(theta_factors(ring, period, mult, -1, order_raw, "T", xexp=-1))
    series = adic_expand(ring, "T", fac, order_raw, prefactor=ring.from_int(-1))
    return TaggedFn(ZExponent(-1, 0, -A), series)


def phi_wakimoto(A: int, ring: Ring, order: int = 20) -> TaggedFn:
    """x^{-A/(2 nu)} theta_t(x q^{-A}) / theta_t(x), series in t."""
    period = ring.pow_frac("T", 1)
    mult = ring.pow_frac("Q", -A)
    order_raw = order * ring.L
    fac = list(theta_factors(ring, period, mult, 1, order_raw, "T"))
    fac += list(theta_factors(ring, period, ring.one, -1, order_raw, "T"))
    return TaggedFn(ZExponent(0, 0, Fraction(-A, 2)),
                    adic_expand(ring, "T", fac, order_raw))
