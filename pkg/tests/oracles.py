"""Independent oracles: own coproduct, own word lists, dense numpy rank over F2."""
import itertools

import numpy as np

from cobarforge.may import d1


def oracle_coproduct(m):
    """Stable ∇ of an exponent tuple, as a dict {(left, right): coeff mod 2}."""
    terms = {((), ()): 1}
    for i, e in enumerate(m):
        for _ in range(e):
            gen = {}
            for k in range(i + 1):
                left = tuple(2 ** k if j == i - k else 0 for j in range(i + 1)) if i - k else ()
                right = tuple(1 if j == k else 0 for j in range(k + 1)) if k else ()
                gen[(left, right)] = 1
            new = {}
            for (a, b), _c in terms.items():
                for (c, d), _e in gen.items():
                    key = (oracle_mul(a, c), oracle_mul(b, d))
                    new[key] = new.get(key, 0) ^ 1
            terms = {k: v for k, v in new.items() if v}
    return terms


def oracle_mul(a, b):
    n = max(len(a), len(b))
    r = [(a[j] if j < len(a) else 0) + (b[j] if j < len(b) else 0) for j in range(n)]
    while r and r[-1] == 0:
        r.pop()
    return tuple(r)


def oracle_letters(max_dim):
    out = []
    for e in itertools.product(*[range(max_dim // (2 ** i - 1) + 1) for i in range(1, 5)]):
        m = oracle_mul((0,) + e, ())
        d = sum(x * (2 ** i - 1) for i, x in enumerate(m))
        if 0 < d <= max_dim and not m[:1] == (1,):
            out.append(m)
    return out


def oracle_words(s, t, letters):
    if s == 0:
        return [()] if t == 0 else []
    dims = {m: sum(x * (2 ** i - 1) for i, x in enumerate(m)) for m in letters}
    return [(x,) + rest for x in letters if dims[x] <= t for rest in oracle_words(s - 1, t - dims[x], letters)]


def oracle_matrix(s, t, letters):
    src, tgt = oracle_words(s, t, letters), oracle_words(s + 1, t, letters)
    idx = {w: j for j, w in enumerate(tgt)}
    a = np.zeros((len(tgt), len(src)), dtype=np.uint8)
    for c, w in enumerate(src):
        for k, x in enumerate(w):
            for (l, r), _ in oracle_coproduct(x).items():
                if l and r:
                    a[idx[w[:k] + (l, r) + w[k + 1:]], c] ^= 1
    return a


def rank_mod2(a):
    a = a.copy() % 2
    r = 0
    rows, cols = a.shape
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i, c]), None)
        if piv is None:
            continue
        a[[r, piv]] = a[[piv, r]]
        hit = a[:, c].astype(bool)
        hit[r] = False
        a[hit] ^= a[r]
        r += 1
    return r


def d1_matrix(src, tgt, extra=()):
    """Dense matrix of d1 from src to tgt, with optional extra target columns appended."""
    idx = {w: j for j, w in enumerate(tgt)}
    cols = [d1(w) for w in src] + list(extra)
    a = np.zeros((len(tgt), len(cols)), dtype=np.uint8)
    for c, img in enumerate(cols):
        for t in img:
            a[idx[t], c] ^= 1
    return a
