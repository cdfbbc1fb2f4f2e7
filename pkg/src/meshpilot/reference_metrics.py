"""Brute-force reference implementations of the three text metrics.

Deliberately naive and independent of :mod:`meshpilot.metrics`: n-grams are
counted with list scans, and METEOR alignments are found by enumerating every
one-to-one partial matching. Only suitable for short token sequences; used by
the test suite and by ``meshpilot selftest`` as an oracle.
"""

from __future__ import annotations

import math


def ref_tokenize(text):
    cleaned = "".join(ch if ("a" <= ch <= "z" or "0" <= ch <= "9" or ch == ".") else " "
                      for ch in text.lower())
    tokens = []
    for piece in cleaned.split(" "):
        while piece.startswith("."):
            piece = piece[1:]
        while piece.endswith("."):
            piece = piece[:-1]
        if piece != "":
            tokens.append(piece)
    return tokens


def ref_rouge1(hyp, ref):
    if len(hyp) == 0 and len(ref) == 0:
        return 1.0, 1.0, 1.0
    if len(hyp) == 0 or len(ref) == 0:
        return 0.0, 0.0, 0.0
    pool = list(ref)
    overlap = 0
    for tok in hyp:
        if tok in pool:
            pool.remove(tok)
            overlap += 1
    p = overlap / len(hyp)
    r = overlap / len(ref)
    f = 0.0 if p + r == 0 else 2 * p * r / (p + r)
    return p, r, f


def _grams(tokens, n):
    return [" ".join(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


def ref_bleu(hyp, ref):
    if len(hyp) == 0:
        return 1.0 if len(ref) == 0 else 0.0
    if len(ref) == 0:
        return 0.0
    order = min(4, len(hyp), len(ref))
    precisions = []
    for n in range(1, order + 1):
        hg, rg = _grams(hyp, n), _grams(ref, n)
        clipped = sum(min(hg.count(g), rg.count(g)) for g in set(hg))
        if clipped == 0:
            return 0.0
        precisions.append(clipped / len(hg))
    geo = 1.0
    for p in precisions:
        geo *= p
    geo = geo ** (1.0 / order)
    bp = 1.0 if len(hyp) >= len(ref) else math.exp(1 - len(ref) / len(hyp))
    return bp * geo


def _all_matchings(hyp, ref):
    """Yield every one-to-one partial matching as a list of (i, j) pairs."""
    def rec(i, used):
        if i == len(hyp):
            yield []
            return
        for rest in rec(i + 1, used):
            yield rest
        for j, tok in enumerate(ref):
            if tok == hyp[i] and j not in used:
                for rest in rec(i + 1, used | {j}):
                    yield [(i, j)] + rest
    yield from rec(0, frozenset())


def _count_chunks(pairs):
    pairs = sorted(pairs)
    chunks = 0
    for k, (i, j) in enumerate(pairs):
        if k == 0 or not (pairs[k - 1][0] == i - 1 and pairs[k - 1][1] == j - 1):
            chunks += 1
    return chunks


def ref_alignment(hyp, ref):
    """Return (matches, chunks) over all maximum matchings, minimising chunks."""
    best = (0, 0)
    for pairs in _all_matchings(hyp, ref):
        m, c = len(pairs), _count_chunks(pairs)
        if m > best[0] or (m == best[0] and c < best[1]):
            best = (m, c)
    return best


def ref_meteor(hyp, ref):
    m, chunks = ref_alignment(hyp, ref)
    if m == 0:
        return 0.0
    p = m / len(hyp)
    r = m / len(ref)
    fmean = 10 * p * r / (r + 9 * p)
    penalty = 0.5 * (chunks / m) ** 3
    return fmean * (1 - penalty)


def ref_scores(hyp_text, ref_text):
    """Return ``(rouge1_p, rouge1_r, rouge1_f, meteor, bleu)`` for two strings."""
    h, r = ref_tokenize(hyp_text), ref_tokenize(ref_text)
    return (*ref_rouge1(h, r), ref_meteor(h, r), ref_bleu(h, r))
