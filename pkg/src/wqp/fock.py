"""Graded Fock modules over the deformed Heisenberg algebras.

A basis monomial is a sorted tuple of (node, n) pairs with n >= 1, standing
for the creation product a_node[-n]...; its degree is the sum of the n's.
Vectors are finite Scalar combinations of monomials over a weight-labelled
highest-weight vector.  Weights may be concrete (eigenvalue m + s*beta per
node) or symbolic: then the eigenvalue of a_j[0] is an indeterminate mu_j
entering the coefficient field only through q**mu_j = W_j, plus a tracked
integer offset and beta part from lattice shifts.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from wqp.heisenberg import BracketKernel, CartanMatrix, ModeAlgebra
from wqp.scalars import Ring, Scalar, ZExponent, scalar_sum

__all__ = ["Weight", "FockSpace", "FockVector", "basis_enumerate", "graded_dims"]

Mono = tuple  # tuple[tuple[int, int], ...]


def mono_degree(m: Mono) -> int:
    return sum(n for _, n in m)


def mono_mul(m: Mono, node: int, n: int) -> Mono:
    """Insert one creation factor, keeping the canonical sort."""
    entry = (node, n)
    out = list(m)
    for i, x in enumerate(out):
        if entry <= x:
            out.insert(i, entry)
            break
    else:
        out.append(entry)
    return tuple(out)


@lru_cache(maxsize=None)
def basis_enumerate(l: int, d: int) -> tuple:
    """All creation monomials of degree exactly d over l nodes.

    Deterministic order: generated so that factors are sorted by
    (node, mode); listed lexicographically.
    """
    if d == 0:
        return ((),)

    out = []

    def rec(remaining, start, acc):
        if remaining == 0:
            out.append(tuple(acc))
            return
        for node in range(l):
            for n in range(1, remaining + 1):
                if (node, n) < start:
                    continue
                acc.append((node, n))
                rec(remaining - n, (node, n), acc)
                acc.pop()

    rec(d, (0, 1), [])
    return tuple(sorted(out))


def graded_dims(l: int, dmax: int) -> list[int]:
    """Coefficients of prod_{n>=1} (1-x^n)^{-l} up to degree dmax."""
    dims = [0] * (dmax + 1)
    dims[0] = 1
    # multiply by each Euler factor l times
    for n in range(1, dmax + 1):
        for _ in range(l):
            for d in range(n, dmax + 1):
                dims[d] += dims[d - n]
    return dims


class Weight:
    """Zero-mode eigenvalue label: per node, m + s*beta (or mu_j + m + s*beta).

    ``symbolic`` weights expose q**mu_j as the ring variable W_j; m then
    tracks the integer offset accumulated from e^{-Q/beta} shifts.
    """

    __slots__ = ("mvals", "svals", "symbolic")

    def __init__(self, mvals, svals=None, symbolic: bool = False):
        self.mvals = tuple(Fraction(x) for x in mvals)
        self.svals = (tuple(Fraction(x) for x in svals)
                      if svals is not None else (Fraction(0),) * len(self.mvals))
        if len(self.svals) != len(self.mvals):
            raise ValueError("weight component length mismatch")
        self.symbolic = symbolic

    @classmethod
    def symbolic_generic(cls, l: int) -> "Weight":
        return cls((0,) * l, None, symbolic=True)

    def __eq__(self, other):
        return (isinstance(other, Weight)
                and self.mvals == other.mvals
                and self.svals == other.svals
                and self.symbolic == other.symbolic)

    def __hash__(self):
        return hash((self.mvals, self.svals, self.symbolic))

    def __repr__(self):
        def comp(j):
            parts = []
            if self.symbolic:
                parts.append(f"mu{j + 1}")
            if self.mvals[j] or not parts:
                parts.append(str(self.mvals[j]))
            if self.svals[j]:
                parts.append(f"{self.svals[j]}*b")
            return "+".join(parts)

        return "Weight(" + ", ".join(comp(j) for j in range(len(self.mvals))) + ")"

    def eigenvalue(self, j: int) -> ZExponent:
        """The a_j[0] eigenvalue m + s*beta; concrete weights only."""
        if self.symbolic:
            raise ValueError("symbolic weight has no closed-form eigenvalue")
        return ZExponent(self.mvals[j], self.svals[j])

    def shifted(self, dm, ds) -> "Weight":
        return Weight(tuple(a + b for a, b in zip(self.mvals, dm)),
                      tuple(a + b for a, b in zip(self.svals, ds)),
                      self.symbolic)

    def q_power(self, ring: Ring, zetas) -> Scalar:
        """The Scalar q**(sum_j zeta_j * mu_j) for ZExponent multipliers zeta.

        Uses q**beta = q/p; symbolic components require plain-rational zetas
        and produce W_j powers.
        """
        total = ZExponent()
        out = ring.one
        for j, z in enumerate(zetas):
            if z.is_zero():
                continue
            if self.symbolic:
                if z.s or z.u:
                    raise ValueError(
                        "beta-dependent zero-mode power on a symbolic weight")
                out = out * ring.pow_frac(f"W{j + 1}", z.r)
            total = total + z * ZExponent(self.mvals[j], self.svals[j])
        if total.u:
            raise ValueError(f"q**(1/beta) power {total} leaves the field")
        if total.r:
            out = out * ring.pow_frac("Q", total.r)
        if total.s:
            out = out * ring.pow_frac("Q", total.s) * ring.pow_frac("P", -total.s)
        return out

    def z_power(self, zetas, const: ZExponent) -> ZExponent:
        """The spectral-variable exponent sum_j zeta_j*mu_j + const."""
        total = const
        for j, z in enumerate(zetas):
            if z.is_zero():
                continue
            if self.symbolic:
                raise ValueError("z power of a symbolic weight is not residue-graded")
            total = total + z * ZExponent(self.mvals[j], self.svals[j])
        return total


class FockSpace:
    """Bundles the ring, Cartan data and oscillator kernel for one algebra."""

    def __init__(self, cartan: CartanMatrix, ma: ModeAlgebra,
                 kernel: BracketKernel):
        self.cartan = cartan
        self.ma = ma
        self.ring = ma.base
        self.kernel = kernel
        self.l = cartan.l

    def zero_vector(self, weight: Weight) -> "FockVector":
        return FockVector(self, weight, {})

    def vacuum(self, weight: Weight) -> "FockVector":
        return FockVector(self, weight, {(): self.ring.one})

    def basis(self, d: int) -> tuple:
        return basis_enumerate(self.l, d)

    def basis_up_to(self, d: int):
        for deg in range(d + 1):
            yield from basis_enumerate(self.l, deg)

    def lattice_shift_deltas(self, alphas, gammas):
        """Weight shifts of e^{sum_j alpha_j Q_j + gamma_j Q_j/beta}.

        [a_i[0], Q_j] = A_ij beta, so component i moves by
        sum_j A_ij (alpha_j beta + gamma_j).
        """
        dm = [Fraction(0)] * self.l
        ds = [Fraction(0)] * self.l
        for i in range(self.l):
            for j in range(self.l):
                A = self.cartan[i, j]
                if A:
                    dm[i] += A * gammas[j]
                    ds[i] += A * alphas[j]
        return tuple(dm), tuple(ds)


class FockVector:
    """A finite Scalar combination of creation monomials at one weight."""

    __slots__ = ("space", "weight", "terms")

    def __init__(self, space: FockSpace, weight: Weight, terms: dict):
        self.space = space
        self.weight = weight
        self.terms = {m: c for m, c in terms.items() if not c.is_zero()}

    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self):
        return sorted({mono_degree(m) for m in self.terms})

    def __repr__(self):
        if not self.terms:
            return "FockVector(0)"
        bits = []
        for m in sorted(self.terms, key=lambda m: (mono_degree(m), m)):
            mono = "".join(f"a{j + 1}[-{n}]" for j, n in m) or "v"
            bits.append(f"({self.terms[m]})*{mono}")
        return " + ".join(bits)

    def __add__(self, other: "FockVector") -> "FockVector":
        if self.weight != other.weight:
            raise ValueError("cannot add vectors of different weights")
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out[m] + c if m in out else c
        return FockVector(self.space, self.weight, out)

    def __sub__(self, other: "FockVector") -> "FockVector":
        return self + other.scale(self.space.ring._minus_one)

    def scale(self, c: Scalar) -> "FockVector":
        if c.is_zero():
            return FockVector(self.space, self.weight, {})
        return FockVector(self.space, self.weight,
                          {m: c * v for m, v in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, FockVector):
            return NotImplemented
        if self.weight != other.weight:
            return False
        keys = set(self.terms) | set(other.terms)
        zero = self.space.ring.zero
        return all(self.terms.get(m, zero) == other.terms.get(m, zero)
                   for m in keys)

    __hash__ = None

    def coeff(self, mono: Mono) -> Scalar:
        return self.terms.get(mono, self.space.ring.zero)

    def truncate(self, dmax: int) -> tuple["FockVector", bool]:
        """Drop components above degree dmax; flags whether anything dropped."""
        keep = {m: c for m, c in self.terms.items() if mono_degree(m) <= dmax}
        return FockVector(self.space, self.weight, keep), len(keep) != len(self.terms)

    # -- oscillator action -----------------------------------------------------

    def apply_mode(self, i: int, n: int):
        """Act with a_i[n].

        n < 0 appends a creation factor; n > 0 contracts against matching
        creation factors through the bracket kernel; n = 0 returns the pair
        (eigenvalue as a formal m + s*beta exponent, self) since the raw
        eigenvalue is not a Scalar.
        """
        space = self.space
        if n == 0:
            return self.weight.eigenvalue(i), self
        out: dict = {}
        if n < 0:
            for m, c in self.terms.items():
                mm = mono_mul(m, i, -n)
                out[mm] = out[mm] + c if mm in out else c
            return FockVector(space, self.weight, out)
        for m, c in self.terms.items():
            seen = set()
            for idx, (j, nn) in enumerate(m):
                if nn != n or (j, nn) in seen:
                    continue
                seen.add((j, nn))
                mult = sum(1 for x in m if x == (j, nn))
                k = space.kernel.at(i, j, n)
                if k.is_zero():
                    continue
                rest = list(m)
                del rest[idx]
                mm = tuple(rest)
                add = (mult * k) * c
                out[mm] = out[mm] + add if mm in out else add
        return FockVector(space, self.weight, out)

    def shift_weight(self, kind: str, i: int) -> "FockVector":
        """Apply a lattice operator e^{Q_i} (kind "Q") or e^{-Q_i/beta}."""
        l = self.space.l
        alphas = [Fraction(0)] * l
        gammas = [Fraction(0)] * l
        if kind == "Q":
            alphas[i] = Fraction(1)
        elif kind == "-Q/beta":
            gammas[i] = Fraction(-1)
        else:
            raise ValueError(f"unknown lattice operator kind {kind!r}")
        dm, ds = self.space.lattice_shift_deltas(alphas, gammas)
        return FockVector(self.space, self.weight.shifted(dm, ds), self.terms)

    def sum_terms(self, parts) -> "FockVector":
        """Accumulate many same-weight vectors with one common-denominator pass."""
        acc: dict = {}
        for v in parts:
            for m, c in v.terms.items():
                acc.setdefault(m, []).append(c)
        ring = self.space.ring
        return FockVector(self.space, self.weight,
                          {m: scalar_sum(cs, ring) for m, cs in acc.items()})
