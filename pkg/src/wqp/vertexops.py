"""Normal-ordered exponential operators and their calculus.

A :class:`FreeFieldOp` is

    pref * e^{sum_j (alpha_j Q_j + gamma_j Q_j / beta)}
         * z^{sum_j zpow_j a_j[0] + zconst}
         * q^{sum_j qpow_j a_j[0]}
         * :exp( sum_{n != 0} b[n] z^{-n} ):,   b[n] = sum_j modes_j(n) a_j[n],

with the mode coefficients kept symbolic in n (mode-ring Scalars evaluated
by exponent scaling).  The normal-ordering convention, fixed once and used
everywhere: lattice shifts leftmost, then z-powers of zero modes, then
q-powers, then creation, then annihilation exponentials.

Products at proportional arguments merge exactly into a single operator;
products at independent arguments contract to a scalar series (the operator
product expansion) times the normal-ordered composite.  Mode coefficients
of an operator act on Fock vectors through a cached, weight-independent
recursion; the weight enters only through the zero-mode eigenvalue.
"""

from __future__ import annotations

from fractions import Fraction

from wqp.fock import FockSpace, FockVector, Weight, mono_mul
from wqp.heisenberg import ModeAlgebra
from wqp.scalars import Ring, Scalar, TruncSeries, ZExponent, scalar_sum

__all__ = [
    "FreeFieldOp",
    "OperatorExpr",
    "contract_series",
    "contract_zero_modes",
    "pairing_mode_scalar",
    "recognize_poch_families",
    "exchange_factors",
    "merge_nop",
    "mode_matrix",
    "diff_shift",
    "total_difference",
]


def _log_q(qexp: Fraction, pexp: Fraction) -> ZExponent:
    """log of the monomial q**qexp p**pexp in units of log q (p = q**(1-beta))."""
    return ZExponent(qexp + pexp, -pexp)


def q_power_scalar(ring: Ring, e: ZExponent) -> Scalar:
    """q**e as a Scalar via q**beta = q/p; the 1/beta part must vanish."""
    if e.u:
        raise ValueError(f"q**({e}) has a 1/beta part and leaves the field")
    out = ring.one
    if e.r:
        out = out * ring.pow_frac("Q", e.r)
    if e.s:
        out = out * ring.pow_frac("Q", e.s) * ring.pow_frac("P", -e.s)
    return out


def mon_pow_zexp(ring: Ring, qexp: Fraction, pexp: Fraction, e: ZExponent) -> Scalar:
    """(q**qexp p**pexp) ** e as a Scalar, exact or an error."""
    return q_power_scalar(ring, e * _log_q(qexp, pexp))


class FreeFieldOp:
    """One normal-ordered exponential vertex operator."""

    __slots__ = ("space", "pref", "alphas", "gammas", "zpow", "zconst",
                 "qpow", "modes", "_gcache", "_crecache", "_core")

    def __init__(self, space: FockSpace, pref: Scalar, alphas, gammas,
                 zpow, zconst: ZExponent, qpow, modes):
        l = space.l
        self.space = space
        self.pref = pref
        self.alphas = tuple(Fraction(a) for a in alphas)
        self.gammas = tuple(Fraction(g) for g in gammas)
        self.zpow = tuple(zpow)
        self.zconst = zconst
        self.qpow = tuple(qpow)
        self.modes = tuple(modes)
        if not (len(self.alphas) == len(self.gammas) == len(self.zpow)
                == len(self.qpow) == len(self.modes) == l):
            raise ValueError("component count must match the rank")
        self._gcache: dict = {}
        self._crecache: dict = {(): {(): space.ring.one}}
        self._core: dict = {}

    @classmethod
    def identity(cls, space: FockSpace) -> "FreeFieldOp":
        l = space.l
        z = ZExponent()
        return cls(space, space.ring.one, (0,) * l, (0,) * l,
                   (z,) * l, z, (z,) * l, (space.ma.mode.zero,) * l)

    def is_identity_data(self) -> bool:
        """Structural identity test: trivial prefactor, zero modes, zero exponent."""
        return (self.pref.is_one()
                and not any(self.alphas) and not any(self.gammas)
                and all(z.is_zero() for z in self.zpow)
                and self.zconst.is_zero()
                and all(z.is_zero() for z in self.qpow)
                and all(m.is_zero() for m in self.modes))

    def inverse(self) -> "FreeFieldOp":
        """The operator with all exponent data negated, :X^{-1}:."""
        return FreeFieldOp(
            self.space, self.pref.inverse(),
            tuple(-a for a in self.alphas), tuple(-g for g in self.gammas),
            tuple(-z for z in self.zpow), -self.zconst,
            tuple(-z for z in self.qpow), tuple(-m for m in self.modes))

    def data_equal(self, other: "FreeFieldOp") -> bool:
        """Exact operator-data equality (mode functions compared symbolically)."""
        return (self.pref == other.pref
                and self.alphas == other.alphas
                and self.gammas == other.gammas
                and self.zpow == other.zpow
                and self.zconst == other.zconst
                and self.qpow == other.qpow
                and all(a == b for a, b in zip(self.modes, other.modes)))

    # -- zero-mode values -------------------------------------------------------

    def weight_shift(self):
        return self.space.lattice_shift_deltas(self.alphas, self.gammas)

    def q_eigenvalue(self, weight: Weight) -> Scalar:
        return weight.q_power(self.space.ring, self.qpow)

    def z_value(self, weight: Weight) -> ZExponent:
        """Exponent of the spectral variable contributed by zero modes."""
        return weight.z_power(self.zpow, self.zconst)

    # -- pairing data -------------------------------------------------------------

    def ann_pair(self, j: int, n: int) -> Scalar:
        """g_j(n) = [annihilation part at z^{-n}, a_j[-n]] for n > 0."""
        key = (j, n)
        v = self._gcache.get(key)
        if v is None:
            ma = self.space.ma
            terms = []
            for i in range(self.space.l):
                mi = self.modes[i]
                if mi.is_zero():
                    continue
                G = self.space.kernel.G[i][j]
                if G.is_zero():
                    continue
                terms.append(ma.at(mi * G, n))
            v = scalar_sum(terms, self.space.ring)
            if not v.is_zero():
                v = (v / n).cancelled()
            self._gcache[key] = v
        return v

    def cre_coeff(self, j: int, n: int) -> Scalar:
        """Coefficient of a_j[-n] in the exponent, i.e. modes_j at -n (n > 0)."""
        key = (j, n)
        v = self._crecache.get(key)
        if v is None:
            v = self.space.ma.at(self.modes[j], -n).cancelled()
            self._crecache[key] = v
        return v

    # -- Fock action ----------------------------------------------------------------

    def creation_block(self, d: int) -> dict:
        """Degree-d part of exp(sum_{n>0} b[-n] z^n) applied to the vacuum."""
        blk = self._crecache.get(("F", d))
        if blk is not None:
            return blk
        ring = self.space.ring
        if d == 0:
            blk = {(): ring.one}
        else:
            acc: dict = {}
            for n in range(1, d + 1):
                prev = self.creation_block(d - n)
                if not prev:
                    continue
                for j in range(self.space.l):
                    c = self.cre_coeff(j, n)
                    if c.is_zero():
                        continue
                    cn = c * Fraction(n, d)
                    for m, co in prev.items():
                        mm = mono_mul(m, j, n)
                        add = cn * co
                        acc.setdefault(mm, []).append(add)
            blk = {m: scalar_sum(cs, ring) for m, cs in acc.items()}
            blk = {m: c for m, c in blk.items() if not c.is_zero()}
        self._crecache[("F", d)] = blk
        return blk

    def apply_core(self, k: int, mono: tuple) -> dict:
        """Weight-independent mode action on one creation monomial.

        Returns the coefficient dict of (coefficient of z^{-k} of the
        exponential part) applied to mono; the full action is
        pref * q_eigenvalue * this, at the lattice-shifted weight.
        """
        key = (k, mono)
        out = self._core.get(key)
        if out is not None:
            return out
        if not mono:
            out = self.creation_block(-k) if k <= 0 else {}
        else:
            (j, n) = mono[0]
            rest = mono[1:]
            out = {}
            for m2, c in self.apply_core(k, rest).items():
                mm = mono_mul(m2, j, n)
                out[mm] = out[mm] + c if mm in out else c
            g = self.ann_pair(j, n)
            if not g.is_zero():
                for m2, c in self.apply_core(k - n, rest).items():
                    gc = g * c
                    out[m2] = out[m2] + gc if m2 in out else gc
            out = {m: c for m, c in out.items() if not c.is_zero()}
        self._core[key] = out
        return out

    def apply(self, k: int, vec: FockVector) -> FockVector:
        """The relative mode z^{-k} applied to a Fock vector.

        The full operator is sum_k z^{z_value(weight) - k} apply(k, .).
        """
        space = self.space
        w = vec.weight
        qe = self.pref * self.q_eigenvalue(w)
        dm, ds = self.weight_shift()
        new_w = w.shifted(dm, ds)
        acc: dict = {}
        for mono, c in vec.terms.items():
            cc = c * qe
            for m2, v in self.apply_core(k, mono).items():
                acc.setdefault(m2, []).append(cc * v)
        ring = space.ring
        terms = {m: scalar_sum(cs, ring) for m, cs in acc.items()}
        return FockVector(space, new_w, terms)


class OperatorExpr:
    """A finite Scalar combination of FreeFieldOps (one spectral variable)."""

    __slots__ = ("space", "terms")

    def __init__(self, space: FockSpace, terms):
        self.space = space
        self.terms = tuple(terms)

    def __add__(self, other: "OperatorExpr") -> "OperatorExpr":
        return OperatorExpr(self.space, self.terms + other.terms)

    def scale(self, c: Scalar) -> "OperatorExpr":
        return OperatorExpr(self.space, tuple((c * co, op) for co, op in self.terms))

    def apply(self, k: int, vec: FockVector) -> FockVector:
        """Mode z^{-k} of the expression on a vector (residue-graded terms only)."""
        out = None
        for co, op in self.terms:
            if any(not z.is_zero() for z in op.zpow) or not op.zconst.is_zero():
                raise ValueError("mode-indexed apply needs residue-graded terms")
            v = op.apply(k, vec).scale(co)
            out = v if out is None else out + v
        return out if out is not None else self.space.zero_vector(vec.weight)


def merge_nop(parts) -> FreeFieldOp:
    """Merge :X_1(z m_1) X_2(z m_2) ...: into one operator.

    ``parts`` is a list of (op, qexp, pexp): each factor is evaluated at the
    argument z * q**qexp p**pexp.  Exponent data adds, with each multiplier
    absorbed into the mode coefficients (m**-n), the zero-mode z-powers
    (a q-power factor m**(zpow_j a_j[0])) and the z-constant (a Scalar).
    """
    parts = list(parts)
    if not parts:
        raise ValueError("merge_nop needs at least one factor")
    space = parts[0][0].space
    ring = space.ring
    ma = space.ma
    l = space.l
    pref = ring.one
    alphas = [Fraction(0)] * l
    gammas = [Fraction(0)] * l
    zpow = [ZExponent()] * l
    zconst = ZExponent()
    qpow = [ZExponent()] * l
    modes = [ma.mode.zero] * l
    for op, qe, pe in parts:
        if op.space is not space:
            raise ValueError("operators from different Fock spaces")
        qe, pe = Fraction(qe), Fraction(pe)
        pref = pref * op.pref
        trivial = qe == 0 and pe == 0
        if not trivial:
            pref = pref * mon_pow_zexp(ring, qe, pe, op.zconst)
            logm = _log_q(qe, pe)
        for j in range(l):
            alphas[j] += op.alphas[j]
            gammas[j] += op.gammas[j]
            zpow[j] = zpow[j] + op.zpow[j]
            qpow[j] = qpow[j] + op.qpow[j]
            if not trivial and not op.zpow[j].is_zero():
                qpow[j] = qpow[j] + op.zpow[j] * logm
            if not op.modes[j].is_zero():
                mj = op.modes[j]
                if not trivial:
                    mj = mj * ma.mode.mon_frac(Qn=-qe, Pn=-pe)
                modes[j] = modes[j] + mj
        zconst = zconst + op.zconst
    modes = [m.cancelled() for m in modes]
    return FreeFieldOp(space, pref, alphas, gammas, zpow, zconst, qpow, modes)


# -- contraction -----------------------------------------------------------------


def pairing_mode_scalar(op1: FreeFieldOp, op2: FreeFieldOp) -> Scalar:
    """n * [b1[n], b2[-n]] as a mode-ring Scalar (the 1/n kept implicit)."""
    space = op1.space
    ma = space.ma
    terms = []
    for i in range(space.l):
        mi = op1.modes[i]
        if mi.is_zero():
            continue
        for j in range(space.l):
            mj = op2.modes[j]
            if mj.is_zero() or space.kernel.G[i][j].is_zero():
                continue
            terms.append(mi * ma.invert_mode(mj) * space.kernel.G[i][j])
    return scalar_sum(terms, ma.mode).cancelled()


def contract_zero_modes(op1: FreeFieldOp, op2: FreeFieldOp):
    """Scalar factor and z-tag from moving op1's zero modes past op2's lattice.

    Returns (factor, ztag): op1(z) op2(w) = factor * z**ztag * (pairing
    series) * :op1 op2:.
    """
    space = op1.space
    ring = space.ring
    dm, ds = space.lattice_shift_deltas(op2.alphas, op2.gammas)
    ztag = ZExponent()
    qtot = ZExponent()
    for j in range(space.l):
        shift = ZExponent(dm[j], ds[j])
        if shift.is_zero():
            continue
        if not op1.zpow[j].is_zero():
            ztag = ztag + op1.zpow[j] * shift
        if not op1.qpow[j].is_zero():
            qtot = qtot + op1.qpow[j] * shift
    return q_power_scalar(ring, qtot), ztag


def contract_series(op1: FreeFieldOp, op2: FreeFieldOp, order: int,
                    var: str = "x"):
    """The scalar OPE factor of op1(z) op2(w), expanded in x = w/z.

    Returns (series, ztag): op1(z) op2(w) = z**ztag * series(w/z) * :op1 op2:.
    The zero-mode exchange Scalar is folded into the series; the residual
    power of z is returned separately since it is not a power of w/z.
    """
    space = op1.space
    ring = space.ring
    ma = space.ma
    pairG = pairing_mode_scalar(op1, op2)
    coeffs = {}
    for n in range(1, order):
        v = ma.at(pairG, n)
        if not v.is_zero():
            coeffs[n] = (v / n).cancelled()
    series = TruncSeries(ring, var, coeffs, order).exp()
    factor, ztag = contract_zero_modes(op1, op2)
    return series * factor, ztag


def recognize_poch_families(pairG: Scalar, ma: ModeAlgebra, hints=()):
    """Decompose a pairing n*kappa(n) into Pochhammer product data.

    Returns a list of (mult, base, e): mult and base are (qexp, pexp)
    Fraction pairs for monomials M and T, and the pairing series
    exp(sum_n kappa(n) x^n) equals prod (x | M; T)_infinity ** e, where a
    None base means the single factor (1 - M x) ** e.

    The decomposition hinges on writing n*kappa(n) = sum_j c_j M_j^n / (1 - T^n)
    for one monomial T: candidate bases are tried by clearing (1 - T) and
    testing for polynomiality.  ``hints`` supplies (qexp, pexp) candidates to
    try first (the suite usually knows its base).
    """
    s = pairG.cancelled()
    if s.is_zero():
        return []
    mode = ma.mode
    iQ, iP = mode._idx["Qn"], mode._idx["Pn"]
    L = mode.L

    def nat(monkey) -> tuple:
        m = mode.unpack(monkey)
        for i, e in enumerate(m):
            if i not in (iQ, iP) and e:
                raise ValueError("pairing involves a non-deformation variable")
        return Fraction(m[iQ], L), Fraction(m[iP], L)

    def families(sc: Scalar, base):
        out = []
        for k, c in sc.num.items():
            if c % sc.dint:
                raise ValueError("pairing numerator is not integral")
            out.append((nat(k), base, -(c // sc.dint)))
        return out

    if not s.dfac:
        return families(s, None)

    # candidate bases: caller hints, then monomial ratios inside the factors
    cands = [(Fraction(a), Fraction(b)) for a, b in hints]
    for key, _m in s.dfac:
        ks = sorted(dict(key))
        base_key = ks[0]
        for other in ks[1:]:
            delta = other - base_key + mode.osum
            qe, pe = nat(delta)
            for cand in ((qe, pe), (2 * qe, 2 * pe)):
                if cand not in cands and cand != (0, 0):
                    cands.append(cand)
    one = mode.one
    for qe, pe in cands:
        T = mode.mon_frac(Qn=qe, Pn=pe)
        h = (s * (one - T)).cancelled()
        if not h.dfac:
            return families(h, (qe, pe))
    raise ValueError(f"pairing is not of Pochhammer shape: {s}")


def _sub_dict(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, c in b.items():
        s = out.get(k, 0) - c
        if s:
            out[k] = s
        else:
            del out[k]
    return out


def exchange_factors(op1: FreeFieldOp, op2: FreeFieldOp):
    """Data of the exchange function op1(z)op2(w) -> op2(w)op1(z).

    Returns (tag, scalar, factors): the exchange function, in the analytic
    continuation sense, is x**tag * scalar * prod over factors, where each
    factor is (xexp, mult, base, e) standing for (x**xexp | M; T)**e with
    x = w/z.  The z- and w-tags of the two orders must agree for the ratio
    to be a function of w/z alone.
    """
    f12, t12 = contract_zero_modes(op1, op2)
    f21, t21 = contract_zero_modes(op2, op1)
    if t12 != t21:
        raise ValueError("zero-mode tags do not combine to a function of w/z")
    fam12 = recognize_poch_families(pairing_mode_scalar(op1, op2), op1.space.ma)
    fam21 = recognize_poch_families(pairing_mode_scalar(op2, op1), op1.space.ma)
    factors = [(1, mult, base, e) for mult, base, e in fam12]
    factors += [(-1, mult, base, -e) for mult, base, e in fam21]
    return -t12, f12 / f21, factors


def mode_matrix(expr: OperatorExpr, k: int, weight: Weight, dmax: int) -> dict:
    """Columns of the mode z^{-k} of expr on the basis up to degree dmax."""
    space = expr.space
    out = {}
    for mono in space.basis_up_to(dmax):
        vec = FockVector(space, weight, {mono: space.ring.one})
        out[mono] = expr.apply(k, vec)
    return out


# -- difference operators -----------------------------------------------------


def diff_shift(f: TruncSeries, qexp: Fraction, pexp: Fraction) -> TruncSeries:
    """D_a f for the monomial a = q**qexp p**pexp: substitute x -> x a."""
    mult = f.ring.mon_frac(Q=qexp, P=pexp)
    out = f.shift_arg(mult)
    if f.tag is not None and not f.tag.is_zero():
        out = out * mon_pow_zexp(f.ring, qexp, pexp, f.tag)
    return out


def total_difference(f: TruncSeries, qexp: Fraction, pexp: Fraction) -> TruncSeries:
    """The divided difference [f(x) - f(xa)] / (x (1 - a)).

    Term by term: x**e -> x**(e-1) (1 - a**e)/(1 - a); series that are total
    differences have no residue term.
    """
    ring = f.ring
    a = ring.mon_frac(Q=qexp, P=pexp)
    if a.is_one():
        raise ZeroDivisionError("total difference needs a != 1")
    denom = (ring.one - a).inverse()
    tag = f.tag if f.tag is not None else ZExponent()
    out = {}
    for e, c in f.coeffs.items():
        ee = tag + e
        val = c * (ring.one - mon_pow_zexp(ring, qexp, pexp, ee)) * denom
        if not val.is_zero():
            out[e - 1] = val
    return TruncSeries(ring, f.var, out, f.order - 1,
                       tag=f.tag if f.tag is not None and not f.tag.is_zero() else None)
