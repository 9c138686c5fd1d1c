"""Pure-Python sparse polynomial kernels (fallback for the Cython core).

Polynomials are dicts mapping packed monomial keys to nonzero ints.  A key
packs all Laurent exponents of a monomial into one integer: variable i
occupies a ``FIELD_BITS``-wide slot holding ``exponent + OFFSET``.  Monomial
multiplication is then a single integer add (minus the constant ``offsum``),
and the lexicographic order by raw key value is an admissible term order for
exact division.
"""

FIELD_BITS = 25
OFFSET = 1 << 24
_EXP_LIMIT = 1 << 22  # |exponent| bound enforced at pack time


def pack(exps, nv):
    k = 0
    for i in range(nv - 1, -1, -1):
        e = exps[i]
        if not -_EXP_LIMIT < e < _EXP_LIMIT:
            raise OverflowError(f"exponent {e} out of packing range")
        k = (k << FIELD_BITS) | (e + OFFSET)
    return k


def unpack(k, nv):
    out = []
    mask = (1 << FIELD_BITS) - 1
    for _ in range(nv):
        out.append((k & mask) - OFFSET)
        k >>= FIELD_BITS
    return tuple(out)


def offsum(nv):
    k = 0
    for i in range(nv):
        k |= OFFSET << (FIELD_BITS * i)
    return k


def padd(a, b):
    if not a:
        return dict(b)
    if not b:
        return dict(a)
    if len(a) < len(b):
        a, b = b, a
    out = dict(a)
    for k, c in b.items():
        s = out.get(k, 0) + c
        if s:
            out[k] = s
        else:
            del out[k]
    return out


def pneg(a):
    return {k: -c for k, c in a.items()}


def pscale(a, c):
    if c == 0:
        return {}
    if c == 1:
        return dict(a)
    return {k: c * v for k, v in a.items()}


def pmul(a, b, osum):
    if not a or not b:
        return {}
    if len(a) > len(b):
        a, b = b, a
    out = {}
    get = out.get
    for ka, ca in a.items():
        base = ka - osum
        for kb, cb in b.items():
            k = base + kb
            s = get(k, 0) + ca * cb
            if s:
                out[k] = s
            elif k in out:
                del out[k]
    return out


def pmonmul(a, delta, c=1):
    """Multiply by c * X^mon where delta = pack(mon) - offsum."""
    if c == 0:
        return {}
    return {k + delta: c * v for k, v in a.items()}


def picontent(a):
    from math import gcd

    g = 0
    for c in a.values():
        g = gcd(g, c)
        if g == 1:
            return 1
    return g or 1


def pmins(a, nv):
    """Per-variable minimum exponents."""
    mask = (1 << FIELD_BITS) - 1
    mins = [None] * nv
    for k in a:
        for i in range(nv):
            e = ((k >> (FIELD_BITS * i)) & mask) - OFFSET
            if mins[i] is None or e < mins[i]:
                mins[i] = e
    return mins


def pdiv_exact(a, b, osum, nv, cap):
    """Exact Laurent division a / b; None when it does not divide.

    ``cap`` bounds reduction steps so failing opportunistic cancellations
    stay cheap; bailing out is safe (the caller just keeps the fraction).
    """
    if not a:
        return {}
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    mask = (1 << FIELD_BITS) - 1
    sa = pmins(a, nv)
    sb = pmins(b, nv)
    da = osum - pack(sa, nv)
    db = osum - pack(sb, nv)
    a = {k + da: c for k, c in a.items()}
    b = {k + db: c for k, c in b.items()} if db else b
    bl = max(b)
    blc = b[bl]
    rem = dict(a)
    quo = {}
    while rem:
        cap -= 1
        if cap < 0:
            return None
        al = max(rem)
        alc = rem[al]
        if alc % blc:
            return None
        qk = al - bl + osum
        # leading-term divisibility: every field of qk must be >= OFFSET
        t = qk
        for _ in range(nv):
            if (t & mask) < OFFSET:
                return None
            t >>= FIELD_BITS
        qc = alc // blc
        quo[qk] = qc
        base = qk - osum
        for kb, cb in b.items():
            k = base + kb
            s = rem.get(k, 0) - qc * cb
            if s:
                rem[k] = s
            elif k in rem:
                del rem[k]
    shift = pack(sa, nv) - pack(sb, nv)
    return {k + shift: c for k, c in quo.items()} if shift else quo
