"""Exact coefficient arithmetic for the deformation parameters.

Everything downstream computes with elements of a rational-function field
over the integers.  The field variables are roots of the natural deformation
parameters: a :class:`Ring` with ``L = 4`` and names ``("Q", "P")`` works
with ``Q = q**(1/4)`` and ``P = p**(1/4)``, so that half-integer powers such
as ``p**(n/2)`` are honest Laurent monomials.

A :class:`Scalar` is ``num / (dint * prod f_i**m_i)``: an expanded sparse
Laurent numerator over a positive integer times canonically keyed
denominator factors.  Keeping the denominator factored makes
common-denominator addition and factor cancellation cheap; no polynomial
gcd runs during arithmetic.  Equality is decided by cross-multiplication,
independent of normalisation state.  Monomials are packed into single
integer keys (one bit field per variable), which keeps the hot loops in the
optional Cython kernel fast; the pure-Python fallback implements the same
contracts.

Two companions live here as well:

* :class:`ZExponent` -- a formal exponent ``r + s*beta + u/beta`` used for
  powers of spectral variables that never enter the coefficient field.
* :class:`TruncSeries` -- Laurent series in one extra variable, truncated at
  a fixed order, with Scalar coefficients.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd as _igcd
from typing import Callable, Iterable, Mapping

try:
    from wqp import _polycore as _pc
except ImportError:  # pragma: no cover - exercised only without a compiler
    from wqp import _polyops as _pc

_pack = _pc.pack
_unpack = _pc.unpack
_padd = _pc.padd
_pneg = _pc.pneg
_pscale = _pc.pscale
_pmul = _pc.pmul
_pmonmul = _pc.pmonmul
_picontent = _pc.picontent
_pmins = _pc.pmins
_pdiv_exact = _pc.pdiv_exact

__all__ = [
    "Ring",
    "Scalar",
    "ZExponent",
    "TruncSeries",
    "scalar_sum",
    "series_expand_rational",
]


@lru_cache(maxsize=None)
def _sympy_ring(names: tuple):
    from sympy.polys.rings import ring as _ring
    from sympy import ZZ

    R, *gens = _ring(list(names), ZZ)
    return R


def _pgcd(a: dict, b: dict, ring: "Ring") -> dict:
    """gcd of two Laurent polynomials, defined up to a monomial (cold path)."""
    if not a:
        return dict(b)
    if not b:
        return dict(a)
    nv = ring.nv
    ta = {_unpack(k, nv): c for k, c in a.items()}
    tb = {_unpack(k, nv): c for k, c in b.items()}
    mins = [0] * nv
    for p in (ta, tb):
        for m in p:
            for i, e in enumerate(m):
                if e < mins[i]:
                    mins[i] = e
    ta = {tuple(e - s for e, s in zip(m, mins)): c for m, c in ta.items()}
    tb = {tuple(e - s for e, s in zip(m, mins)): c for m, c in tb.items()}
    comp = [0] * nv
    for p in (ta, tb):
        for m in p:
            for i, e in enumerate(m):
                comp[i] = _igcd(comp[i], e)
    comp = [c if c > 0 else 1 for c in comp]
    R = _sympy_ring(ring.names)
    fa = R.from_dict({tuple(e // g for e, g in zip(m, comp)): c for m, c in ta.items()})
    fb = R.from_dict({tuple(e // g for e, g in zip(m, comp)): c for m, c in tb.items()})
    g = fa.gcd(fb)
    return {
        ring.pack(tuple(e * c for e, c in zip(m, comp))): int(v)
        for m, v in g.items()
    }


class Ring:
    """A Laurent rational-function field context.

    ``names`` lists the field variables; ``L`` is the root order, i.e. the
    first variable of a (Q, P) ring stands for ``q**(1/L)``.  All exponent
    bookkeeping is integer in these root variables.
    """

    __slots__ = ("names", "L", "nv", "osum", "_idx", "zero", "one", "_minus_one")

    def __init__(self, names: Iterable[str], L: int = 2):
        self.names = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate ring variable names")
        if L < 1:
            raise ValueError("root order L must be positive")
        self.L = L
        self.nv = len(self.names)
        self.osum = _pc.offsum(self.nv)
        self._idx = {n: i for i, n in enumerate(self.names)}
        self.zero = Scalar(self, {})
        self.one = Scalar(self, {self.osum: 1})
        self._minus_one = Scalar(self, {self.osum: -1})

    def __repr__(self):
        return f"Ring({', '.join(self.names)}; L={self.L})"

    def __eq__(self, other):
        return (
            isinstance(other, Ring)
            and self.names == other.names
            and self.L == other.L
        )

    def __hash__(self):
        return hash((self.names, self.L))

    # -- monomial packing ----------------------------------------------------

    def pack(self, exps) -> int:
        return _pack(exps, self.nv)

    def unpack(self, key: int) -> tuple:
        return _unpack(key, self.nv)

    def key(self, **exps: int) -> int:
        m = [0] * self.nv
        for n, e in exps.items():
            m[self._idx[n]] = e
        return _pack(m, self.nv)

    # -- constructors ----------------------------------------------------------

    def monomial(self, coeff: int = 1, **exps: int) -> "Scalar":
        if coeff == 0:
            return self.zero
        return Scalar(self, {self.key(**exps): coeff})

    def gen(self, name: str, power: int = 1) -> "Scalar":
        return self.monomial(1, **{name: power})

    def from_int(self, c: int) -> "Scalar":
        if c == 0:
            return self.zero
        return Scalar(self, {self.osum: c})

    def from_fraction(self, fr: Fraction | int) -> "Scalar":
        fr = Fraction(fr)
        if fr == 0:
            return self.zero
        return Scalar(self, {self.osum: fr.numerator}, fr.denominator)

    def pow_frac(self, name: str, e: Fraction | int) -> "Scalar":
        """The natural-units power ``v**e`` as a monomial, v in (q, p, ...).

        ``e * L`` must be an integer; this is how fractional powers such as
        ``p**(1/2)`` enter the field.
        """
        e = Fraction(e) * self.L
        if e.denominator != 1:
            raise ValueError(
                f"exponent {e / self.L} not representable at root order L={self.L}"
            )
        return self.monomial(1, **{name: int(e)})

    def mon_frac(self, **exps: Fraction | int) -> "Scalar":
        m = [0] * self.nv
        for n, e in exps.items():
            e = Fraction(e) * self.L
            if e.denominator != 1:
                raise ValueError(
                    f"exponent {e / self.L} of {n} not representable at L={self.L}"
                )
            m[self._idx[n]] = int(e)
        return Scalar(self, {_pack(m, self.nv): 1})


def _grlex_key_t(m: tuple):
    return (sum(m), m)


def _pstr(p: dict, ring: Ring) -> str:
    if not p:
        return "0"
    names = ring.names
    terms = {ring.unpack(k): c for k, c in p.items()}
    parts = []
    for m in sorted(terms, key=_grlex_key_t, reverse=True):
        c = terms[m]
        vars_ = "*".join(
            f"{n}^{e}" if e != 1 else n for n, e in zip(names, m) if e != 0
        )
        if vars_:
            if c == 1:
                term = vars_
            elif c == -1:
                term = f"-{vars_}"
            else:
                term = f"{c}*{vars_}"
        else:
            term = str(c)
        if parts and not term.startswith("-"):
            parts.append("+" + term)
        else:
            parts.append(term)
    return "".join(parts)


def _canon_factor(p: dict, ring: Ring):
    """Normalise a polynomial to a canonical denominator-factor key.

    Returns (key, content, delta, sign) with
    ``p == sign * content * X^shift * key`` and ``delta = pack(shift) - osum``;
    key is None when p is a single term (pure monomial).
    """
    if not p:
        raise ZeroDivisionError("zero cannot be a denominator factor")
    mins = _pmins(p, ring.nv)
    delta = ring.pack(mins) - ring.osum
    c = _picontent(p)
    sign = 1 if p[max(p)] > 0 else -1
    sc = sign * c
    q = {k - delta: v // sc for k, v in p.items()}
    if len(q) == 1:
        return None, c, delta, sign
    key = tuple(sorted(q.items()))
    return key, c, delta, sign


def _expand_factors(ring: Ring, dint: int, dfac: tuple) -> dict:
    out = {ring.osum: dint}
    for key, mult in dfac:
        fp = dict(key)
        for _ in range(mult):
            out = _pmul(out, fp, ring.osum)
    return out


class Scalar:
    """An exact rational function over a :class:`Ring`.

    Immutable; all operations return fresh objects.
    """

    __slots__ = ("ring", "num", "dint", "dfac")

    def __init__(self, ring: Ring, num: dict, dint: int = 1, dfac: tuple = ()):
        if dint == 0:
            raise ZeroDivisionError("zero denominator")
        if not num:
            dint, dfac = 1, ()
        elif dint < 0:
            num = _pneg(num)
            dint = -dint
        self.ring = ring
        self.num = num
        self.dint = dint
        self.dfac = dfac

    # -- basics -------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.num

    def is_one(self) -> bool:
        return self == self.ring.one

    def __bool__(self):
        return bool(self.num)

    def _chk(self, other: "Scalar"):
        if self.ring is not other.ring and self.ring != other.ring:
            raise ValueError(f"ring mismatch: {self.ring} vs {other.ring}")

    def den_poly(self) -> dict:
        """The denominator, expanded."""
        return _expand_factors(self.ring, self.dint, self.dfac)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.from_fraction(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        self._chk(other)
        if self.dint == other.dint and self.dfac == other.dfac:
            return self.num == other.num
        da = dict(self.dfac)
        db = dict(other.dfac)
        for k in list(da):
            if k in db:
                m = min(da[k], db[k])
                da[k] -= m
                db[k] -= m
        g = _igcd(self.dint, other.dint)
        lhs = _pmul(self.num,
                    _expand_factors(self.ring, other.dint // g,
                                    tuple(x for x in db.items() if x[1])),
                    self.ring.osum)
        rhs = _pmul(other.num,
                    _expand_factors(self.ring, self.dint // g,
                                    tuple(x for x in da.items() if x[1])),
                    self.ring.osum)
        return lhs == rhs

    __hash__ = None  # not hashable: equality ignores normalisation state

    def __repr__(self):
        return f"Scalar({self})"

    def __str__(self):
        num = _pstr(self.num, self.ring)
        if self.dint == 1 and not self.dfac:
            return num
        return f"({num})/({_pstr(self.den_poly(), self.ring)})"

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.from_fraction(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        self._chk(other)
        if not other.num:
            return self
        if not self.num:
            return other
        if self.dfac == other.dfac and self.dint == other.dint:
            return Scalar(self.ring, _padd(self.num, other.num),
                          self.dint, self.dfac)
        g = _igcd(self.dint, other.dint)
        dint = self.dint // g * other.dint
        da, db = dict(self.dfac), dict(other.dfac)
        lcm: dict = dict(da)
        for k, m in db.items():
            if lcm.get(k, 0) < m:
                lcm[k] = m
        num_a = _pscale(self.num, other.dint // g)
        num_b = _pscale(other.num, self.dint // g)
        osum = self.ring.osum
        for k, m in lcm.items():
            pad_a = m - da.get(k, 0)
            pad_b = m - db.get(k, 0)
            if pad_a or pad_b:
                fp = dict(k)
                for _ in range(pad_a):
                    num_a = _pmul(num_a, fp, osum)
                for _ in range(pad_b):
                    num_b = _pmul(num_b, fp, osum)
        return Scalar(self.ring, _padd(num_a, num_b), dint,
                      tuple(sorted(lcm.items())))

    __radd__ = __add__

    def __neg__(self):
        return Scalar(self.ring, _pneg(self.num), self.dint, self.dfac)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.from_fraction(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            if other == 0:
                return self.ring.zero
            return Scalar(self.ring, _pscale(self.num, other), self.dint,
                          self.dfac)._cancel_int()
        if isinstance(other, Fraction):
            other = self.ring.from_fraction(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        self._chk(other)
        if not self.num or not other.num:
            return self.ring.zero
        return Scalar(self.ring, _pmul(self.num, other.num, self.ring.osum),
                      self.dint * other.dint,
                      Scalar._merge_fac(self.dfac, other.dfac))

    __rmul__ = __mul__

    @staticmethod
    def _merge_fac(a: tuple, b: tuple) -> tuple:
        if not a:
            return b
        if not b:
            return a
        d = dict(a)
        for k, m in b:
            d[k] = d.get(k, 0) + m
        return tuple(sorted(d.items()))

    def _den_mul_poly(self, p: dict) -> "Scalar":
        """self / p for a raw polynomial p."""
        key, c, delta, sign = _canon_factor(p, self.ring)
        num = _pmonmul(self.num, -delta, sign)
        dfac = self.dfac if key is None else Scalar._merge_fac(self.dfac, ((key, 1),))
        return Scalar(self.ring, num, self.dint * c, dfac)

    def __truediv__(self, other):
        if isinstance(other, int):
            if other == 0:
                raise ZeroDivisionError("Scalar division by zero")
            return Scalar(self.ring, self.num, self.dint * other,
                          self.dfac)._cancel_int()
        if isinstance(other, Fraction):
            other = self.ring.from_fraction(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        self._chk(other)
        if other.is_zero():
            raise ZeroDivisionError("Scalar division by zero")
        out = self._den_mul_poly(other.num)
        if other.dint != 1 or other.dfac:
            back = _expand_factors(self.ring, other.dint, other.dfac)
            out = Scalar(out.ring, _pmul(out.num, back, self.ring.osum),
                         out.dint, out.dfac)
        return out.cancelled()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def inverse(self) -> "Scalar":
        if self.is_zero():
            raise ZeroDivisionError("Scalar inverse of zero")
        return self.ring.one / self

    def __pow__(self, e: int) -> "Scalar":
        if e < 0:
            return self.inverse() ** (-e)
        out = self.ring.one
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base if e > 1 else base
            e >>= 1
        return out

    # -- normalisation -------------------------------------------------------

    def _cancel_int(self) -> "Scalar":
        if self.dint == 1 or not self.num:
            return self
        g = _igcd(_picontent(self.num), self.dint)
        if g == 1:
            return self
        return Scalar(self.ring, {k: c // g for k, c in self.num.items()},
                      self.dint // g, self.dfac)

    def cancelled(self) -> "Scalar":
        """Divide the numerator by denominator factors where possible.

        Opportunistic: a bounded exact-division attempt per factor.  Called
        automatically after division; client code calls it at structural
        points (kernel values, merged operators) where cancellation pays off.
        """
        if not self.num or not self.dfac:
            return self._cancel_int()
        ring = self.ring
        num = self.num
        nv = ring.nv
        fac: dict = {}
        for key, mult in self.dfac:
            fp = dict(key)
            while mult:
                if len(num) < len(fp):
                    break
                q = _pdiv_exact(num, fp, ring.osum, nv, 2 * len(num) + 32)
                if q is None:
                    break
                num = q
                mult -= 1
            if mult:
                fac[key] = mult
        return Scalar(ring, num, self.dint,
                      tuple(sorted(fac.items())))._cancel_int()

    def reduced(self) -> "Scalar":
        """Full normalisation: factor cancellation plus a polynomial gcd pass."""
        s = self.cancelled()
        if not s.num or not s.dfac:
            return s
        ring = s.ring
        den = _expand_factors(ring, 1, s.dfac)
        g = _pgcd(s.num, den, ring)
        if len(g) > 1:
            qn = _pdiv_exact(s.num, g, ring.osum, ring.nv, 1 << 30)
            qd = _pdiv_exact(den, g, ring.osum, ring.nv, 1 << 30)
            if qn is not None and qd is not None:
                return Scalar(ring, qn, s.dint, ())._den_mul_poly(qd)._cancel_int()
        return s

    def canonical_str(self) -> str:
        """Deterministic "num/den" string: fully reduced, graded-lex order."""
        r = self.reduced()
        ring = r.ring
        num = r.num
        den = r.den_poly()
        mins = _pmins(den, ring.nv)
        if any(mins):
            delta = ring.pack(mins) - ring.osum
            num = _pmonmul(num, -delta)
            den = _pmonmul(den, -delta)
        if den[max(den)] < 0:
            num, den = _pneg(num), _pneg(den)
        if den == {ring.osum: 1}:
            return _pstr(num, ring)
        return f"({_pstr(num, ring)})/({_pstr(den, ring)})"

    # -- substitution & evaluation -------------------------------------------

    def map_vars(self, target: Ring, var_map: Mapping[str, Mapping[str, int]]) -> "Scalar":
        """Monomial substitution: each source variable goes to a target monomial.

        ``var_map["Qn"] = {"Q": n}`` sends ``Qn -> Q**n`` (n may be negative).
        Unmapped variables must exist in the target ring under the same name.
        """
        cols = []
        for n in self.ring.names:
            tgt = var_map.get(n)
            if tgt is None:
                if n not in target._idx:
                    raise ValueError(f"variable {n} not mapped and absent from target")
                tgt = {n: 1}
            col = [0] * target.nv
            for tn, te in tgt.items():
                col[target._idx[tn]] += te
            cols.append(tuple(col))

        nv = self.ring.nv

        def conv(p):
            out: dict = {}
            for kk, c in p.items():
                m = _unpack(kk, nv)
                tm = [0] * target.nv
                for e, col in zip(m, cols):
                    if e:
                        for i, ce in enumerate(col):
                            if ce:
                                tm[i] += e * ce
                tk = target.pack(tm)
                s = out.get(tk, 0) + c
                if s:
                    out[tk] = s
                elif tk in out:
                    del out[tk]
            return out

        out = Scalar(target, conv(self.num), self.dint)
        for key, mult in self.dfac:
            fp = conv(dict(key))
            if not fp:
                raise ZeroDivisionError("substitution collapsed a denominator factor")
            for _ in range(mult):
                out = out._den_mul_poly(fp)
        return out.cancelled()

    def subs_natural(self, **subs: str) -> "Scalar":
        """Substitute whole natural variables, e.g. ``subs_natural(P="Q")`` for p -> q."""
        return self.map_vars(self.ring, {src: {dst: 1} for src, dst in subs.items()})

    def eval_natural(self, **values: Fraction | int) -> Fraction:
        """Exact evaluation at rational points of the natural variables.

        Every exponent must be a multiple of L (the value of ``Q`` itself at
        ``q = 4`` would be irrational).
        """
        ring = self.ring
        L = ring.L

        def ev(p: dict) -> Fraction:
            tot = Fraction(0)
            for k, c in p.items():
                f = Fraction(c)
                for name, e in zip(ring.names, _unpack(k, ring.nv)):
                    if e == 0:
                        continue
                    if e % L:
                        raise ValueError(f"exponent of {name} not a multiple of L")
                    f *= Fraction(values[name]) ** (e // L)
                tot += f
            return tot

        den = ev(self.den_poly())
        if den == 0:
            raise ZeroDivisionError("denominator vanishes at evaluation point")
        return ev(self.num) / den

    def eval_numeric(self, point: Mapping[str, object]):
        """Evaluate at numeric root-variable values (mpmath numbers)."""
        ring = self.ring

        def ev(p: dict):
            tot = 0
            for k, c in p.items():
                f = c
                for name, e in zip(ring.names, _unpack(k, ring.nv)):
                    if e:
                        f = f * point[name] ** e
                tot = tot + f
            return tot

        val = ev(self.num) / self.dint
        for key, mult in self.dfac:
            val = val / ev(dict(key)) ** mult
        return val


def scalar_sum(terms, ring: Ring | None = None) -> Scalar:
    """Sum many Scalars with a single common-denominator pass."""
    terms = [t for t in terms if t.num]
    if not terms:
        if ring is None:
            raise ValueError("scalar_sum of no nonzero terms needs an explicit ring")
        return ring.zero
    if len(terms) == 1:
        return terms[0]
    ring = terms[0].ring
    lcm: dict = {}
    for t in terms:
        for k, m in t.dfac:
            if lcm.get(k, 0) < m:
                lcm[k] = m
    dint = 1
    for t in terms:
        dint = dint // _igcd(dint, t.dint) * t.dint
    total: dict = {}
    osum = ring.osum
    for t in terms:
        num = _pscale(t.num, dint // t.dint)
        have = dict(t.dfac)
        for k, m in lcm.items():
            pad = m - have.get(k, 0)
            if pad:
                fp = dict(k)
                for _ in range(pad):
                    num = _pmul(num, fp, osum)
        total = _padd(total, num)
    return Scalar(ring, total, dint, tuple(sorted(lcm.items())))._cancel_int()


# --------------------------------------------------------------------------


class ZExponent:
    """Formal exponent r + s*beta + u/beta of a spectral variable.

    beta is transcendental: equality is componentwise.  Products guard
    against beta**2 terms, which have no home in the coefficient field.
    """

    __slots__ = ("r", "s", "u")

    def __init__(self, r=0, s=0, u=0):
        self.r = Fraction(r)
        self.s = Fraction(s)
        self.u = Fraction(u)

    def __repr__(self):
        return f"ZExponent({self.r}, {self.s}, {self.u})"

    def __str__(self):
        parts = []
        if self.r:
            parts.append(str(self.r))
        if self.s:
            parts.append(f"{self.s}*b")
        if self.u:
            parts.append(f"{self.u}/b")
        return " + ".join(parts) if parts else "0"

    def __eq__(self, other):
        if isinstance(other, int):
            other = ZExponent(other)
        if not isinstance(other, ZExponent):
            return NotImplemented
        return (self.r, self.s, self.u) == (other.r, other.s, other.u)

    def __hash__(self):
        return hash((self.r, self.s, self.u))

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ZExponent(other)
        return ZExponent(self.r + other.r, self.s + other.s, self.u + other.u)

    __radd__ = __add__

    def __neg__(self):
        return ZExponent(-self.r, -self.s, -self.u)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ZExponent(other)
        return self + (-other)

    def __mul__(self, other):
        """Product of exponents; beta**2 or 1/beta**2 terms are an error."""
        if isinstance(other, (int, Fraction)):
            return ZExponent(self.r * other, self.s * other, self.u * other)
        if self.s * other.s or self.u * other.u:
            raise ValueError(f"exponent product leaves the field: {self} * {other}")
        return ZExponent(
            self.r * other.r + self.s * other.u + self.u * other.s,
            self.r * other.s + self.s * other.r,
            self.r * other.u + self.u * other.r,
        )

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not (self.r or self.s or self.u)

    def residue_eligible(self) -> bool:
        """True when the exponent is a plain integer."""
        return self.s == 0 and self.u == 0 and self.r.denominator == 1

    def int_part(self) -> int:
        if not self.residue_eligible():
            raise ValueError(f"exponent {self} is not a plain integer")
        return int(self.r)


# --------------------------------------------------------------------------


class TruncSeries:
    """A truncated Laurent series sum_{e < order} c_e * var**e.

    ``var`` may be an auxiliary symbol (the usual w/z of operator products)
    or one of the ring variables (base-adic expansions); in the latter case
    coefficients carry no power of ``var`` themselves.  An optional
    :class:`ZExponent` tag records a formal prefactor ``var**tag`` that is
    never expanded.
    """

    __slots__ = ("ring", "var", "coeffs", "order", "tag")

    def __init__(self, ring: Ring, var: str, coeffs: dict, order: int,
                 tag: ZExponent | None = None):
        self.ring = ring
        self.var = var
        self.order = order
        self.coeffs = {e: c for e, c in coeffs.items() if e < order and not c.is_zero()}
        self.tag = tag

    # -- constructors --------------------------------------------------------

    @classmethod
    def one(cls, ring: Ring, var: str, order: int) -> "TruncSeries":
        return cls(ring, var, {0: ring.one}, order)

    @classmethod
    def from_coeff(cls, c: Scalar, var: str, order: int) -> "TruncSeries":
        return cls(c.ring, var, {0: c}, order)

    # -- helpers -------------------------------------------------------------

    def _low(self) -> int | None:
        return min(self.coeffs) if self.coeffs else None

    def __repr__(self):
        terms = ", ".join(f"{e}: {c}" for e, c in sorted(self.coeffs.items()))
        t = f", tag={self.tag}" if self.tag is not None else ""
        return f"TruncSeries[{self.var} < {self.order}{t}]({terms})"

    def _chk(self, other: "TruncSeries"):
        if self.var != other.var or self.ring != other.ring:
            raise ValueError("series mismatch: different variable or ring")

    def coeff(self, e: int) -> Scalar:
        if e >= self.order:
            raise ValueError(f"coefficient {e} beyond truncation order {self.order}")
        return self.coeffs.get(e, self.ring.zero)

    def truncate(self, order: int) -> "TruncSeries":
        return TruncSeries(self.ring, self.var,
                           {e: c for e, c in self.coeffs.items() if e < order},
                           min(order, self.order), self.tag)

    # -- ring operations -------------------------------------------------------

    @staticmethod
    def _merge_tags(a, b, op="add"):
        ta = a.tag if a.tag is not None else ZExponent()
        tb = b.tag if b.tag is not None else ZExponent()
        if op == "add":
            if ta != tb:
                raise ValueError(f"cannot add series with different tags {ta}, {tb}")
            return a.tag if a.tag is not None else b.tag
        t = ta + tb if op == "mul" else ta - tb
        if a.tag is None and b.tag is None:
            return None
        return t

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = TruncSeries.from_coeff(self.ring.from_fraction(other),
                                           self.var, self.order)
        self._chk(other)
        tag = TruncSeries._merge_tags(self, other, "add")
        order = min(self.order, other.order)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out[e] + c if e in out else c
        return TruncSeries(self.ring, self.var, out, order, tag)

    __radd__ = __add__

    def __neg__(self):
        return TruncSeries(self.ring, self.var,
                           {e: -c for e, c in self.coeffs.items()},
                           self.order, self.tag)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = TruncSeries.from_coeff(self.ring.from_fraction(other),
                                           self.var, self.order)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.from_fraction(other)
        if isinstance(other, Scalar):
            return TruncSeries(self.ring, self.var,
                               {e: c * other for e, c in self.coeffs.items()},
                               self.order, self.tag)
        self._chk(other)
        tag = TruncSeries._merge_tags(self, other, "mul")
        la, lb = self._low(), other._low()
        if la is None or lb is None:
            order = min(
                self.order + (lb if lb is not None else 0),
                other.order + (la if la is not None else 0),
            )
            return TruncSeries(self.ring, self.var, {}, order, tag)
        order = min(self.order + lb, other.order + la)
        out: dict = {}
        for ea, ca in self.coeffs.items():
            for eb, cb in other.coeffs.items():
                e = ea + eb
                if e >= order:
                    continue
                out[e] = out[e] + ca * cb if e in out else ca * cb
        return TruncSeries(self.ring, self.var, out, order, tag)

    __rmul__ = __mul__

    def inverse(self) -> "TruncSeries":
        low = self._low()
        if low is None:
            raise ZeroDivisionError("inverse of zero series")
        lead = self.coeffs[low]
        # self = lead * x^low * (1 + r); invert the unit part by recursion
        n = self.order - low
        inv_lead = lead.inverse()
        unit = {e - low: c * inv_lead for e, c in self.coeffs.items()}
        out = {0: self.ring.one}
        for k in range(1, n):
            acc = self.ring.zero
            for j in range(0, k):
                u = unit.get(k - j)
                if u is not None and j in out:
                    acc = acc + out[j] * u
            if not acc.is_zero():
                out[k] = -acc
        coeffs = {e - low: c * inv_lead for e, c in out.items()}
        tag = None if self.tag is None else -self.tag
        return TruncSeries(self.ring, self.var, coeffs, n - low, tag)

    def __truediv__(self, other):
        if isinstance(other, Scalar):
            return self * other.inverse()
        return self * other.inverse()

    def __pow__(self, e: int) -> "TruncSeries":
        if e < 0:
            return self.inverse() ** (-e)
        out = TruncSeries.one(self.ring, self.var, self.order)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base if e > 1 else base
            e >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, TruncSeries):
            return NotImplemented
        self._chk(other)
        ta = self.tag if self.tag is not None else ZExponent()
        tb = other.tag if other.tag is not None else ZExponent()
        if ta != tb:
            return False
        order = min(self.order, other.order)
        keys = ({e for e in self.coeffs if e < order}
                | {e for e in other.coeffs if e < order})
        zero = self.ring.zero
        return all(self.coeffs.get(e, zero) == other.coeffs.get(e, zero)
                   for e in keys)

    __hash__ = None

    def first_difference(self, other) -> tuple | None:
        """Lowest order where the two series differ, for failure reports."""
        order = min(self.order, other.order)
        keys = sorted({e for e in self.coeffs if e < order}
                      | {e for e in other.coeffs if e < order})
        zero = self.ring.zero
        for e in keys:
            a, b = self.coeffs.get(e, zero), other.coeffs.get(e, zero)
            if a != b:
                return e, a, b
        return None

    # -- analysis helpers ------------------------------------------------------

    def shift_arg(self, mult: Scalar) -> "TruncSeries":
        """Substitute var -> var * mult; the var**tag prefactor, if any, is
        the caller's responsibility (it would pick up mult**tag)."""
        out = {}
        for e, c in self.coeffs.items():
            out[e] = c * mult ** e
        return TruncSeries(self.ring, self.var, out, self.order, self.tag)

    def exp(self) -> "TruncSeries":
        """exp of a series with strictly positive valuation."""
        if self.tag is not None and not self.tag.is_zero():
            raise ValueError("exp of a tagged series")
        low = self._low()
        if low is not None and low <= 0:
            raise ValueError("exp needs positive lowest order")
        order = self.order
        out = {0: self.ring.one}
        # d/dx exp(C) = C' exp(C):  k*F_k = sum_j j*C_j*F_{k-j}
        for k in range(1, order):
            acc = self.ring.zero
            for j, cj in self.coeffs.items():
                if 0 < j <= k and (k - j) in out:
                    acc = acc + (cj * j) * out[k - j]
            if not acc.is_zero():
                out[k] = acc / k
        return TruncSeries(self.ring, self.var, out, order)

    def map_coeffs(self, f: Callable[[Scalar], Scalar],
                   ring: Ring | None = None) -> "TruncSeries":
        return TruncSeries(ring or self.ring, self.var,
                           {e: f(c) for e, c in self.coeffs.items()},
                           self.order, self.tag)


def series_expand_rational(f: Scalar, var: str, order: int) -> TruncSeries:
    """Laurent expansion at 0 of a rational function in one of its ring variables.

    The remaining variables stay in the coefficients; the denominator's
    lowest slice in ``var`` must be nonzero (no essential singularities can
    occur for rational f).
    """
    ring = f.ring
    iv = ring._idx[var]

    def split(p: dict) -> dict:
        out: dict = {}
        nv = ring.nv
        for k, c in p.items():
            m = _unpack(k, nv)
            e = m[iv]
            mm = m[:iv] + (0,) + m[iv + 1:]
            out.setdefault(e, {})[ring.pack(mm)] = c
        return out

    nsl = split(f.num)
    dsl = split(f.den_poly())
    d0 = min(dsl)
    lead = Scalar(ring, dsl[d0])
    if not nsl:
        return TruncSeries(ring, var, {}, order)
    n0 = min(nsl)
    low = n0 - d0
    # c_k solves: num_{k+d0} = sum_j den_{d0+j} * c_{k-j}
    coeffs: dict = {}
    for k in range(low, order):
        rhs = Scalar(ring, nsl.get(k + d0, {}))
        for j in sorted(dsl):
            if j == d0:
                continue
            prev = coeffs.get(k - (j - d0))
            if prev is not None:
                rhs = rhs - Scalar(ring, dsl[j]) * prev
        c = rhs / lead
        if not c.is_zero():
            coeffs[k] = c
    return TruncSeries(ring, var, coeffs, order)
