# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=False
"""Compiled clause-plan interpreter; same contract as ``_kernel_py``."""

from libc.stdint cimport int64_t, uint32_t

cdef enum:
    SCAN = 1
    ENUM = 2
    SOLVE = 3
    CHECK = 4
    EMIT = 5
    MAXARITY = 64

cdef struct Ctx:
    const int64_t* code
    const int64_t* polys
    int64_t* vals
    uint32_t* slots
    int nbody
    uint32_t* masks
    const int64_t* rel_off
    int64_t* items
    const int64_t* item_off
    int64_t* counts
    int64_t lo
    int64_t w
    int cap
    int changed


cdef inline int64_t evalpoly(Ctx* c, int64_t off) nogil:
    cdef int64_t n = c.polys[off]
    cdef int64_t p = off + 1
    cdef int64_t s = 0, t, d, i, j
    for i in range(n):
        t = c.polys[p]
        d = c.polys[p + 1]
        for j in range(d):
            t *= c.vals[c.polys[p + 2 + j]]
        s += t
        p += 2 + d
    return s


cpdef uint32_t combine_dims_c(list slots, int cap):
    cdef uint32_t buf[MAXARITY]
    cdef int i
    for i in range(len(slots)):
        buf[i] = slots[i]
    return combine(buf, len(slots), cap)


cdef uint32_t combine(uint32_t* slots, int n, int cap) nogil:
    cdef uint32_t m1, m2, n1, n2, s, r
    cdef int i, a, d, in1, in2
    if n == 0:
        return 1
    m1 = slots[0]
    m2 = 0
    for i in range(1, n):
        s = slots[i]
        n1 = 0
        n2 = 0
        for a in range(cap + 1):
            in1 = (m1 >> a) & 1
            in2 = (m2 >> a) & 1
            if not (in1 or in2):
                continue
            for d in range(cap + 1):
                if not ((s >> d) & 1):
                    continue
                if d > a:
                    n1 |= (<uint32_t>1) << d
                elif d == a:
                    n2 |= (<uint32_t>1) << a
                elif in1:
                    n1 |= (<uint32_t>1) << a
                else:
                    n2 |= (<uint32_t>1) << a
        m1 = n1
        m2 = n2
    r = m1 | (m2 << 1)
    if r >> (cap + 1):
        r = (r & ((((<uint32_t>1) << (cap + 1)) - 1))) | ((<uint32_t>1) << cap)
    return r


cdef void step(Ctx* c, int64_t pc) nogil:
    cdef int64_t op = c.code[pc]
    cdef int64_t rel, slot, n, nxt, base, rbase, i, idx, x, p, var, v, s, div, pos
    cdef int64_t tup[MAXARITY]
    cdef int ok
    cdef uint32_t old, new
    if op == SCAN:
        rel = c.code[pc + 1]
        slot = c.code[pc + 2]
        n = c.code[pc + 3]
        nxt = pc + 4 + 2 * n
        base = c.item_off[rel]
        rbase = c.rel_off[rel]
        i = 0
        while i < c.counts[rel]:
            idx = c.items[base + i]
            i += 1
            x = idx
            p = n - 1
            while p >= 0:
                tup[p] = x % c.w + c.lo
                x = x // c.w
                p -= 1
            ok = 1
            for p in range(n):
                var = c.code[pc + 4 + 2 * p]
                if c.code[pc + 5 + 2 * p]:
                    if c.vals[var] != tup[p]:
                        ok = 0
                        break
                else:
                    c.vals[var] = tup[p]
            if ok:
                c.slots[slot] = c.masks[rbase + idx]
                step(c, nxt)
    elif op == ENUM:
        var = c.code[pc + 1]
        for v in range(c.lo, c.lo + c.w):
            c.vals[var] = v
            step(c, pc + 2)
    elif op == SOLVE:
        var = c.code[pc + 1]
        div = c.code[pc + 2]
        s = evalpoly(c, c.code[pc + 3])
        if s % div == 0:
            v = s // div
            if c.lo <= v < c.lo + c.w:
                c.vals[var] = v
                step(c, pc + 4)
    elif op == CHECK:
        s = evalpoly(c, c.code[pc + 1])
        op = c.code[pc + 2]
        if (op == 0 and s == 0) or (op == 1 and s <= 0) or (op == 2 and s < 0):
            step(c, pc + 3)
    elif op == EMIT:
        rel = c.code[pc + 1]
        n = c.code[pc + 2]
        idx = 0
        for p in range(n):
            idx = idx * c.w + c.vals[c.code[pc + 3 + p]] - c.lo
        pos = c.rel_off[rel] + idx
        old = c.masks[pos]
        new = old | combine(c.slots, c.nbody, c.cap)
        if new != old:
            c.masks[pos] = new
            if old == 0:
                c.items[c.item_off[rel] + c.counts[rel]] = idx
                c.counts[rel] += 1
            c.changed = 1


def run_clause(const int64_t[::1] code, const int64_t[::1] polys, int nvars, int nbody,
               uint32_t[::1] masks, const int64_t[::1] rel_off, int64_t[::1] items,
               const int64_t[::1] item_off, int64_t[::1] counts, int64_t lo, int64_t w, int cap):
    """Apply one clause plan to the relations; return 1 if any mask grew."""
    cdef int64_t vals[256]
    cdef uint32_t slots[MAXARITY]
    cdef Ctx c
    if nvars > 256 or nbody > MAXARITY:
        raise ValueError("clause too large for the compiled kernel")
    c.code = &code[0]
    c.polys = &polys[0]
    c.vals = vals
    c.slots = slots
    c.nbody = nbody
    c.masks = &masks[0]
    c.rel_off = &rel_off[0]
    c.items = &items[0]
    c.item_off = &item_off[0]
    c.counts = &counts[0]
    c.lo = lo
    c.w = w
    c.cap = cap
    c.changed = 0
    with nogil:
        step(&c, 0)
    return c.changed
