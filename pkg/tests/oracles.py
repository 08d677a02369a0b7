"""Independent oracles used to freeze expected values in the test suite.

Everything here is deliberately brute-force and written without importing the
package under test, so agreement is evidence rather than tautology.
"""

from __future__ import annotations

import itertools
import unicodedata


def enumerate_best_of_n(
    sel: dict[int, float],
    ev: dict[int, float],
    n: int,
    higher_better: bool = True,
) -> float:
    """Exact E[eval score of best-of-n] by enumerating every size-n subset."""
    indices = sorted(sel)
    total = 0.0
    count = 0
    for subset in itertools.combinations(indices, n):
        best = None
        for idx in subset:
            val = sel[idx] if higher_better else -sel[idx]
            if best is None or val > sel_best:
                best, sel_best = idx, val
        total += ev[best]
        count += 1
    return total / count


def hypergeometric_mass_exact(m: int, n: int) -> bool:
    """Check sum_k C(m-k, n-1) == C(m, n) with incremental big-int updates.

    C(j, n-1) for j = n-1 .. m-1 is built by multiplicative recurrence, so the
    full 1 <= n <= m <= 2048 sweep stays quadratic overall.
    """
    total = 0
    c = 1  # C(n-1, n-1)
    for j in range(n - 1, m):
        total += c
        c = c * (j + 1) // (j + 2 - n)  # C(j+1, n-1)
    import math

    return total == math.comb(m, n)


# --- chrF++ brute-force oracle ----------------------------------------------


def _words(line: str) -> list[str]:
    toks: list[str] = []
    cur = ""
    for ch in line:
        if ch.isspace():
            if cur:
                toks.append(cur)
            cur = ""
        elif unicodedata.category(ch).startswith("P"):
            if cur:
                toks.append(cur)
            cur = ""
            toks.append(ch)
        else:
            cur += ch
    if cur:
        toks.append(cur)
    return toks


def _ngram_dict(seq, n):
    d: dict[tuple, int] = {}
    for i in range(len(seq) - n + 1):
        g = tuple(seq[i : i + n])
        d[g] = d.get(g, 0) + 1
    return d


def _seg_stats(hyp: str, ref: str) -> list[tuple[int, int, int]]:
    hs = "".join(hyp.split())
    rs = "".join(ref.split())
    stats = []
    for n in range(1, 7):
        hd, rd = _ngram_dict(list(hs), n), _ngram_dict(list(rs), n)
        match = sum(min(c, rd.get(g, 0)) for g, c in hd.items())
        stats.append((sum(hd.values()), sum(rd.values()), match))
    hw, rw = _words(hyp), _words(ref)
    for n in range(1, 3):
        hd, rd = _ngram_dict(hw, n), _ngram_dict(rw, n)
        match = sum(min(c, rd.get(g, 0)) for g, c in hd.items())
        stats.append((sum(hd.values()), sum(rd.values()), match))
    return stats


def chrfpp_oracle(hyps: list[str], refs: list[str], beta: float = 2.0) -> float:
    """Corpus chrF++ (char order 6, word order 2) from corpus-summed counts."""
    totals = [(0, 0, 0)] * 8
    for h, r in zip(hyps, refs):
        totals = [
            (a + x, b + y, c + z) for (a, b, c), (x, y, z) in zip(totals, _seg_stats(h, r))
        ]
    prec = rec = 0.0
    effective = 0
    for h_count, r_count, match in totals:
        if h_count > 0 and r_count > 0:
            prec += match / h_count
            rec += match / r_count
            effective += 1
    if effective == 0:
        return 0.0
    prec /= effective
    rec /= effective
    if prec + rec == 0:
        return 0.0
    return 100 * (1 + beta**2) * prec * rec / (beta**2 * prec + rec)
