"""Pure-Python hom-counting kernel (fallback for the compiled one).

Inputs are bitmask encodings: ``src[e]`` is the set of source reds in source
blue e, ``tgt[f]`` the set of target reds in target blue f, ``allowed[e]``
lists the target blues e may map to, and ``red_init[v]`` is the set of target
reds v may map to.  With ``equality`` the image of every source blue's content
must be all of its target blue's content; otherwise inclusion suffices.
"""


def count(src, n_red, tgt, allowed, red_init, equality):
    nb = len(src)
    members = [[v for v in range(n_red) if src[e] >> v & 1] for e in range(nb)]
    cur = list(red_init)
    h_e = [0] * nb
    total = 0

    if equality:
        # edges touching each red, and how many of their reds come later
        touching = [[e for e in range(nb) if src[e] >> v & 1] for v in range(n_red)]
        size = [len(m) for m in members]

    def leaf_inclusion():
        p = 1
        for v in range(n_red):
            p *= cur[v].bit_count()
            if not p:
                return 0
        return p

    def leaf_equality():
        need = [tgt[h_e[e]] for e in range(nb)]
        covered = [0] * nb
        left = list(size)

        def assign(v):
            if v == n_red:
                return 1
            acc = 0
            opts = cur[v]
            while opts:
                bit = opts & -opts
                opts ^= bit
                ok = True
                saved = []
                for e in touching[v]:
                    saved.append(covered[e])
                    covered[e] |= bit
                    left[e] -= 1
                    if (need[e] & ~covered[e]).bit_count() > left[e]:
                        ok = False
                if ok:
                    acc += assign(v + 1)
                for e, old in zip(touching[v], saved):
                    covered[e] = old
                    left[e] += 1
            return acc

        return assign(0)

    leaf = leaf_equality if equality else leaf_inclusion

    def rec(d):
        nonlocal total
        if d == nb:
            total += leaf()
            return
        mem = members[d]
        for f in allowed[d]:
            tm = tgt[f]
            saved = []
            ok = True
            for v in mem:
                nm = cur[v] & tm
                saved.append(cur[v])
                cur[v] = nm
                if not nm:
                    ok = False
                    break
            if ok:
                h_e[d] = f
                rec(d + 1)
            for v, old in zip(mem, saved):
                cur[v] = old

    rec(0)
    return total
