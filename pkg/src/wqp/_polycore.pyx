# cython: language_level=3, boundscheck=False, wraparound=False
# distutils: language = c++
"""Cython build of the sparse polynomial kernels.

Same contracts as wqp._polyops; see there for the packed-key layout.
Hot operations run over int64 keys/coefficients in a C++ hash map and fall
back to exact PyObject arithmetic whenever anything would overflow, so the
results are always exact.
"""

from cpython.dict cimport PyDict_Next, PyDict_SetItem
from cpython.object cimport PyObject
from cpython.long cimport PyLong_AsLongLongAndOverflow
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector
from cython.operator cimport dereference as deref, preincrement as preinc

ctypedef long long i64

cdef extern from *:
    ctypedef signed long long i128 "__int128"

cdef i64 _I64MAX = 0x7fffffffffffffff
cdef i64 _I64MIN = -_I64MAX - 1

FIELD_BITS = 15
OFFSET = 1 << 14
_EXP_LIMIT = 1 << 13


def pack(exps, Py_ssize_t nv):
    cdef Py_ssize_t i
    k = 0
    for i in range(nv - 1, -1, -1):
        e = exps[i]
        if not -_EXP_LIMIT < e < _EXP_LIMIT:
            raise OverflowError(f"exponent {e} out of packing range")
        k = (k << FIELD_BITS) | (e + OFFSET)
    return k


def unpack(k, Py_ssize_t nv):
    cdef Py_ssize_t i
    mask = (1 << FIELD_BITS) - 1
    out = []
    for i in range(nv):
        out.append((k & mask) - OFFSET)
        k >>= FIELD_BITS
    return tuple(out)


def offsum(Py_ssize_t nv):
    cdef Py_ssize_t i
    k = 0
    for i in range(nv):
        k |= OFFSET << (FIELD_BITS * i)
    return k


cdef bint _to_vecs(dict a, vector[i64]* ks, vector[i64]* cs):
    """Extract keys/coeffs as int64; False when anything does not fit."""
    cdef PyObject *pk
    cdef PyObject *pv
    cdef Py_ssize_t pos = 0
    cdef int ov
    cdef i64 k, c
    ks.reserve(len(a))
    cs.reserve(len(a))
    while PyDict_Next(a, &pos, &pk, &pv):
        k = PyLong_AsLongLongAndOverflow(<object>pk, &ov)
        if ov:
            return False
        c = PyLong_AsLongLongAndOverflow(<object>pv, &ov)
        if ov:
            return False
        ks.push_back(k)
        cs.push_back(c)
    return True


def padd(dict a, dict b):
    if not a:
        return dict(b)
    if not b:
        return dict(a)
    if len(a) < len(b):
        a, b = b, a
    cdef dict out = dict(a)
    cdef PyObject *pk
    cdef PyObject *pv
    cdef Py_ssize_t pos = 0
    while PyDict_Next(b, &pos, &pk, &pv):
        k = <object>pk
        c = <object>pv
        s = out.get(k, 0) + c
        if s:
            out[k] = s
        else:
            del out[k]
    return out


def pneg(dict a):
    cdef dict out = {}
    for k, c in a.items():
        out[k] = -c
    return out


def pscale(dict a, c):
    if c == 0:
        return {}
    if c == 1:
        return dict(a)
    cdef dict out = {}
    for k, v in a.items():
        out[k] = c * v
    return out


cdef dict _pmul_obj(dict a, dict b, osum):
    cdef dict out = {}
    for ka, ca in a.items():
        base = ka - osum
        for kb, cb in b.items():
            k = base + kb
            s = out.get(k, 0) + ca * cb
            if s:
                out[k] = s
            elif k in out:
                del out[k]
    return out


cdef _pmul_fast(vector[i64]& ka, vector[i64]& ca,
                vector[i64]& kb, vector[i64]& cb, i64 osum):
    cdef unordered_map[i64, i64] m
    cdef size_t i, j, na = ka.size(), nb = kb.size()
    cdef i64 base, k
    cdef i128 prod, s
    cdef unordered_map[i64, i64].iterator it
    m.reserve(na * nb if na * nb < 4096 else 4096)
    for i in range(na):
        base = ka[i] - osum
        for j in range(nb):
            k = base + kb[j]
            prod = (<i128>ca[i]) * (<i128>cb[j])
            it = m.find(k)
            if it == m.end():
                if prod > <i128>_I64MAX or prod < <i128>_I64MIN:
                    return None
                m[k] = <i64>prod
            else:
                s = (<i128>deref(it).second) + prod
                if s > <i128>_I64MAX or s < <i128>_I64MIN:
                    return None
                deref(it).second = <i64>s
    cdef dict out = {}
    it = m.begin()
    while it != m.end():
        if deref(it).second != 0:
            out[deref(it).first] = deref(it).second
        preinc(it)
    return out


def pmul(dict a, dict b, osum):
    if not a or not b:
        return {}
    if len(a) > len(b):
        a, b = b, a
    cdef int ov
    cdef i64 os_ = PyLong_AsLongLongAndOverflow(osum, &ov)
    cdef vector[i64] ka, ca, kb, cb
    if not ov:
        if _to_vecs(a, &ka, &ca) and _to_vecs(b, &kb, &cb):
            out = _pmul_fast(ka, ca, kb, cb, os_)
            if out is not None:
                return out
    return _pmul_obj(a, b, osum)


def pmonmul(dict a, delta, c=1):
    if c == 0:
        return {}
    cdef dict out = {}
    if c == 1:
        for k, v in a.items():
            out[k + delta] = v
    else:
        for k, v in a.items():
            out[k + delta] = c * v
    return out


def picontent(dict a):
    from math import gcd
    g = 0
    for c in a.values():
        g = gcd(g, c)
        if g == 1:
            return 1
    return g or 1


def pmins(a, Py_ssize_t nv):
    cdef Py_ssize_t i
    mask = (1 << FIELD_BITS) - 1
    mins = [None] * nv
    for k in a:
        for i in range(nv):
            e = ((k >> (FIELD_BITS * i)) & mask) - OFFSET
            if mins[i] is None or e < mins[i]:
                mins[i] = e
    return mins


def pdiv_exact(dict a, dict b, osum, Py_ssize_t nv, long cap):
    cdef Py_ssize_t i
    if not a:
        return {}
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    mask = (1 << FIELD_BITS) - 1
    sa = pmins(a, nv)
    sb = pmins(b, nv)
    da = osum - pack(sa, nv)
    db = osum - pack(sb, nv)
    cdef dict aa = {}
    for k, c in a.items():
        aa[k + da] = c
    cdef dict bb
    if db:
        bb = {}
        for k, c in b.items():
            bb[k + db] = c
    else:
        bb = dict(b)
    bl = max(bb)
    blc = bb[bl]
    cdef dict rem = aa
    cdef dict quo = {}
    while rem:
        cap -= 1
        if cap < 0:
            return None
        al = max(rem)
        alc = rem[al]
        if alc % blc:
            return None
        qk = al - bl + osum
        t = qk
        for i in range(nv):
            if (t & mask) < OFFSET:
                return None
            t >>= FIELD_BITS
        qc = alc // blc
        quo[qk] = qc
        base = qk - osum
        for kb, cb in bb.items():
            k = base + kb
            s = rem.get(k, 0) - qc * cb
            if s:
                rem[k] = s
            elif k in rem:
                del rem[k]
    shift = pack(sa, nv) - pack(sb, nv)
    if shift:
        return {k + shift: c for k, c in quo.items()}
    return quo
