"""Presentation data for the deformed Heisenberg algebras.

The oscillator brackets [a_i[n], a_j[m]] = K_ij(n) delta_{n,-m} are closed
forms in q**n and p**n.  We keep that n-dependence symbolic: kernels and
basis-change coefficients live in a companion "mode ring" whose variables
Qn, Pn stand for Q**n, P**n, and evaluating at a concrete mode is an exact
monomial substitution (n may be negative).  The same machinery covers the
classical Poisson kernels, where the overall factor h = log q stays inert.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from wqp.scalars import Ring, Scalar, scalar_sum

__all__ = [
    "CartanMatrix",
    "ModeAlgebra",
    "BracketKernel",
    "quantum_kernel",
    "classical_kernel",
    "lambda_from_a",
    "lambda_zero_modes",
    "lambda_bracket",
    "lambda_bracket_closed",
    "classical_lambda_bracket_closed",
]


class CartanMatrix:
    """A simply-laced Cartan matrix: symmetric, 2 on the diagonal, 0/-1 off it."""

    __slots__ = ("rows", "l")

    def __init__(self, rows):
        rows = tuple(tuple(int(x) for x in r) for r in rows)
        l = len(rows)
        if any(len(r) != l for r in rows):
            raise ValueError("Cartan matrix must be square")
        for i in range(l):
            if rows[i][i] != 2:
                raise ValueError("diagonal entries must equal 2")
            for j in range(l):
                if rows[i][j] != rows[j][i]:
                    raise ValueError("matrix must be symmetric")
                if i != j and rows[i][j] not in (0, -1):
                    raise ValueError("off-diagonal entries must be 0 or -1")
        self.rows = rows
        self.l = l

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        return isinstance(other, CartanMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"CartanMatrix({list(map(list, self.rows))})"

    @classmethod
    def sl(cls, N: int) -> "CartanMatrix":
        """Type A_{N-1}, the Cartan matrix of sl_N."""
        if N < 2:
            raise ValueError("sl_N needs N >= 2")
        l = N - 1
        return cls([[2 if i == j else (-1 if abs(i - j) == 1 else 0)
                     for j in range(l)] for i in range(l)])

    @classmethod
    def d(cls, l: int) -> "CartanMatrix":
        """Type D_l (l >= 4): a fork at the last node."""
        if l < 4:
            raise ValueError("D_l needs l >= 4")
        rows = [[0] * l for _ in range(l)]
        edges = [(i, i + 1) for i in range(l - 2)] + [(l - 3, l - 1)]
        for i in range(l):
            rows[i][i] = 2
        for i, j in edges:
            rows[i][j] = rows[j][i] = -1
        return cls(rows)

    def components(self):
        """Connected components of the Dynkin diagram, as index lists."""
        seen = set()
        comps = []
        for start in range(self.l):
            if start in seen:
                continue
            stack, comp = [start], []
            while stack:
                v = stack.pop()
                if v in seen:
                    continue
                seen.add(v)
                comp.append(v)
                stack.extend(w for w in range(self.l)
                             if w != v and self.rows[v][w] != 0)
            comps.append(sorted(comp))
        return comps


class ModeAlgebra:
    """Base ring plus its mode ring (variables standing for n-th powers).

    ``scaled`` maps mode-ring variable names to the base variables they are
    powers of; ``inert`` lists variables shared verbatim by both rings.
    """

    def __init__(self, base: Ring, scaled: dict[str, str], inert: tuple = ()):
        self.base = base
        self.scaled = dict(scaled)
        self.inert = tuple(inert)
        self.mode = Ring(tuple(scaled) + self.inert, base.L)

    @classmethod
    def qp(cls, base: Ring) -> "ModeAlgebra":
        return cls(base, {"Qn": "Q", "Pn": "P"})

    def __repr__(self):
        return f"ModeAlgebra({self.mode} -> {self.base})"

    def at(self, s: Scalar, n: int) -> Scalar:
        """Evaluate a mode-ring Scalar at mode n (exact substitution)."""
        vm = {mv: {bv: n} for mv, bv in self.scaled.items()}
        return s.map_vars(self.base, vm)

    def invert_mode(self, s: Scalar) -> Scalar:
        """The substitution n -> -n inside the mode ring."""
        vm = {mv: {mv: -1} for mv in self.scaled}
        return s.map_vars(self.mode, vm)

    def mode_mon(self, **nat_exps) -> Scalar:
        """A mode-ring monomial in natural units, e.g. mode_mon(Pn=Fraction(1,2))."""
        return self.mode.mon_frac(**nat_exps)


class BracketKernel:
    """The delta-coefficient of a Heisenberg bracket, symbolic in the mode.

    ``G[i][j]`` is a mode-ring Scalar; the bracket is
    ``[a_i[n], a_j[m]] = (G_ij at n) / n**inv_n * delta_{n,-m}``.
    """

    def __init__(self, ma: ModeAlgebra, G, inv_n: bool):
        self.ma = ma
        self.G = G
        self.inv_n = inv_n
        self._cache: dict = {}

    def at(self, i: int, j: int, n: int) -> Scalar:
        """Kernel value; n = 0 returns 0 (zero modes commute)."""
        if n == 0:
            return self.ma.base.zero
        key = (i, j, n)
        v = self._cache.get(key)
        if v is None:
            v = self.ma.at(self.G[i][j], n)
            if self.inv_n:
                v = v / n
            v = v.cancelled()
            self._cache[key] = v
        return v


def quantum_kernel(cartan: CartanMatrix, ma: ModeAlgebra) -> BracketKernel:
    """Oscillator kernel (1/n)(1-q^n)(p^{An/2}-p^{-An/2})(1-(p/q)^n)/(1-p^n)."""
    mode = ma.mode
    qn = ma.mode_mon(Qn=1)
    pn = ma.mode_mon(Pn=1)
    one = mode.one
    G = []
    for i in range(cartan.l):
        row = []
        for j in range(cartan.l):
            A = cartan[i, j]
            if A == 0:
                row.append(mode.zero)
                continue
            half = Fraction(A, 2)
            v = (one - qn) * (ma.mode_mon(Pn=half) - ma.mode_mon(Pn=-half)) \
                * (one - pn / qn) / (one - pn)
            row.append(v.cancelled())
        G.append(row)
    return BracketKernel(ma, G, inv_n=True)


def classical_kernel(cartan: CartanMatrix, ma: ModeAlgebra) -> BracketKernel:
    """Poisson kernel h (q^{nA/2} - q^{-nA/2}); h stays a formal variable."""
    mode = ma.mode
    h = mode.gen("h")
    G = []
    for i in range(cartan.l):
        row = []
        for j in range(cartan.l):
            A = cartan[i, j]
            if A == 0:
                row.append(mode.zero)
                continue
            half = Fraction(A, 2)
            row.append(h * (ma.mode_mon(Qn=half) - ma.mode_mon(Qn=-half)))
        G.append(row)
    return BracketKernel(ma, G, inv_n=False)


def _solve(rows, rhs):
    """Gaussian elimination over the Scalar fraction field.

    rows: square matrix, rhs: matrix with one row per equation; returns the
    solution matrix (unknowns x rhs-columns).
    """
    n = len(rows)
    A = [list(r) for r in rows]
    B = [list(r) for r in rhs]
    for col in range(n):
        piv = next((r for r in range(col, n) if not A[r][col].is_zero()), None)
        if piv is None:
            raise ZeroDivisionError("singular system in the lambda base change")
        if piv != col:
            A[col], A[piv] = A[piv], A[col]
            B[col], B[piv] = B[piv], B[col]
        inv = A[col][col].inverse()
        A[col] = [x * inv for x in A[col]]
        B[col] = [x * inv for x in B[col]]
        for r in range(n):
            if r == col:
                continue
            f = A[r][col]
            if f.is_zero():
                continue
            A[r] = [x - f * y for x, y in zip(A[r], A[col])]
            B[r] = [x - f * y for x, y in zip(B[r], B[col])]
    return B


def lambda_from_a(N: int, ma: ModeAlgebra, base_var: str = "Pn"):
    """Solve the diagonalising base change for sl_N, symbolically in the mode.

    The defining system is ``lam_i - lam_{i+1} = base^{ni/2} a_i`` for
    i = 1..N-1 together with ``sum_i base^{(1-i)n} lam_i = 0``.  Returns the
    N x (N-1) coefficient matrix c with ``lam_i[n] = sum_j c[i][j] a_j[n]``,
    entries in the mode ring (``base_var`` is Pn for the quantum algebra and
    Qn for the classical one).
    """
    mode = ma.mode
    zero, one = mode.zero, mode.one

    def bpow(e: Fraction) -> Scalar:
        return ma.mode_mon(**{base_var: e})

    rows = []
    rhs = []
    for i in range(1, N):
        row = [zero] * N
        row[i - 1] = one
        row[i] = -one
        rows.append(row)
        r = [zero] * (N - 1)
        r[i - 1] = bpow(Fraction(i, 2))
        rhs.append(r)
    rows.append([bpow(Fraction(1 - i)) for i in range(1, N + 1)])
    rhs.append([zero] * (N - 1))
    sol = _solve(rows, rhs)
    return [[c.cancelled() for c in row] for row in sol]


def lambda_zero_modes(N: int):
    """The degenerate n = 0 system: differences a_i[0], plain sum zero.

    Returns the rational N x (N-1) matrix with lam_i[0] = sum_j c[i][j] a_j[0].
    """
    # lam_i[0] = sum_{k>=i} a_k[0] - (1/N) sum_k k*a_k[0]
    out = []
    for i in range(1, N + 1):
        row = []
        for j in range(1, N):
            row.append((1 if j >= i else 0) - Fraction(j, N))
        out.append(row)
    return out


def lambda_bracket(N: int, ma: ModeAlgebra, kernel: BracketKernel, coeffs,
                   i: int, j: int) -> Scalar:
    """[lam_i[n], lam_j[-n]] by conjugating the oscillator kernel.

    Symbolic in n; the result is the mode-ring Scalar G with bracket value
    G(n)/n (quantum) or G(n) (classical).
    """
    terms = []
    for k in range(N - 1):
        ck = coeffs[i][k]
        if ck.is_zero():
            continue
        for l in range(N - 1):
            cl = coeffs[j][l]
            if cl.is_zero() or kernel.G[k][l].is_zero():
                continue
            terms.append(ck * ma.invert_mode(cl) * kernel.G[k][l])
    return scalar_sum(terms, ma.mode).cancelled()


def lambda_bracket_closed(N: int, ma: ModeAlgebra, i: int, j: int) -> Scalar:
    """The closed-form lambda kernel of the quantum algebra (sans the 1/n).

    Diagonal: -(1-q^n)(1-p^{n(N-1)})(1-(p/q)^n)/(1-p^{nN});
    i < j:     (1-q^n)(1-p^n)(1-(p/q)^n) p^{-n}/(1-p^{nN});
    i > j by antisymmetry under (i,n) <-> (j,-n).
    """
    one = ma.mode.one
    qn = ma.mode_mon(Qn=1)
    pn = ma.mode_mon(Pn=1)
    if i == j:
        v = -(one - qn) * (one - pn ** (N - 1)) * (one - pn / qn) / (one - pn ** N)
    elif i < j:
        v = (one - qn) * (one - pn) * (one - pn / qn) / (pn * (one - pn ** N))
    else:
        # kernel(i,j,n) = -kernel(j,i,-n); the closed form is even under
        # mode inversion combined with the sign of 1/n, see lambda_bracket
        v = ma.invert_mode(lambda_bracket_closed(N, ma, j, i))
    return v.cancelled()


def classical_lambda_bracket_closed(N: int, ma: ModeAlgebra, i: int, j: int) -> Scalar:
    """Closed-form classical lambda kernel: the Poisson analogue."""
    one = ma.mode.one
    qn = ma.mode_mon(Qn=1)
    h = ma.mode.gen("h")
    if i == j:
        v = -h * (one - qn) * (one - qn ** (N - 1)) / (one - qn ** N)
    elif i < j:
        v = h * (one - qn) ** 2 / (qn * (one - qn ** N))
    else:
        v = -ma.invert_mode(classical_lambda_bracket_closed(N, ma, j, i))
    return v.cancelled()


@lru_cache(maxsize=None)
def sl_rings(N: int, weights: tuple = ()) -> ModeAlgebra:
    """The standard (Q, P[, W...]) ring for sl_N with L = 2N."""
    base = Ring(("Q", "P") + tuple(weights), L=2 * N)
    return ModeAlgebra.qp(base)
