"""Pure-Python clause-plan interpreter; mirrors ``_kernel.pyx`` step for step."""
from __future__ import annotations

SCAN, ENUM, SOLVE, CHECK, EMIT = 1, 2, 3, 4, 5


def combine_dims(slots, cap: int) -> int:
    """Dimension mask of a node whose subtrees have the dimension masks in slots."""
    if not slots:
        return 1
    m1, m2 = slots[0], 0
    for s in slots[1:]:
        n1 = n2 = 0
        ds = [d for d in range(cap + 1) if s >> d & 1]
        for a in range(cap + 1):
            in1, in2 = m1 >> a & 1, m2 >> a & 1
            if not (in1 or in2):
                continue
            for d in ds:
                if d > a:
                    n1 |= 1 << d
                elif d == a:
                    n2 |= 1 << a
                elif in1:
                    n1 |= 1 << a
                else:
                    n2 |= 1 << a
        m1, m2 = n1, n2
    r = m1 | (m2 << 1)
    if r >> (cap + 1):
        r = (r & ((1 << (cap + 1)) - 1)) | (1 << cap)
    return r


def run_clause(code, polys, nvars, nbody, masks, rel_off, items, item_off, counts, lo, w, cap) -> int:
    """Apply one clause plan to the relations; return 1 if any mask grew."""
    code = code.tolist()
    polys = polys.tolist()
    m = masks.tolist()
    it = items.tolist()
    cnt = counts.tolist()
    roff = rel_off.tolist()
    ioff = item_off.tolist()
    hi = lo + w - 1
    vals = [0] * nvars
    slots = [0] * nbody
    changed = False

    def evalpoly(off: int) -> int:
        n = polys[off]
        p = off + 1
        s = 0
        for _ in range(n):
            t = polys[p]
            d = polys[p + 1]
            for j in range(d):
                t *= vals[polys[p + 2 + j]]
            s += t
            p += 2 + d
        return s

    def step(pc: int) -> None:
        nonlocal changed
        op = code[pc]
        if op == SCAN:
            rel, slot, n = code[pc + 1], code[pc + 2], code[pc + 3]
            args = code[pc + 4:pc + 4 + 2 * n]
            nxt = pc + 4 + 2 * n
            base, rbase = ioff[rel], roff[rel]
            tup = [0] * n
            i = 0
            while i < cnt[rel]:
                idx = it[base + i]
                i += 1
                x = idx
                for p in range(n - 1, -1, -1):
                    tup[p] = x % w + lo
                    x //= w
                ok = True
                for p in range(n):
                    var = args[2 * p]
                    if args[2 * p + 1]:
                        if vals[var] != tup[p]:
                            ok = False
                            break
                    else:
                        vals[var] = tup[p]
                if ok:
                    slots[slot] = m[rbase + idx]
                    step(nxt)
        elif op == ENUM:
            var = code[pc + 1]
            for v in range(lo, hi + 1):
                vals[var] = v
                step(pc + 2)
        elif op == SOLVE:
            var, div = code[pc + 1], code[pc + 2]
            s = evalpoly(code[pc + 3])
            if s % div == 0:
                v = s // div
                if lo <= v <= hi:
                    vals[var] = v
                    step(pc + 4)
        elif op == CHECK:
            s = evalpoly(code[pc + 1])
            rel = code[pc + 2]
            if (s == 0) if rel == 0 else (s <= 0) if rel == 1 else (s < 0):
                step(pc + 3)
        elif op == EMIT:
            rel, n = code[pc + 1], code[pc + 2]
            idx = 0
            for p in range(n):
                idx = idx * w + vals[code[pc + 3 + p]] - lo
            pos = roff[rel] + idx
            old = m[pos]
            new = old | combine_dims(slots, cap)
            if new != old:
                m[pos] = new
                if old == 0:
                    it[ioff[rel] + cnt[rel]] = idx
                    cnt[rel] += 1
                changed = True
        else:
            raise ValueError(f"bad plan opcode {op}")

    step(0)
    if changed:
        masks[:] = m
        items[:] = it
        counts[:] = cnt
    return int(changed)
