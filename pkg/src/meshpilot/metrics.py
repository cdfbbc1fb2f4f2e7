"""Sentence-level ROUGE-1, BLEU and METEOR over one shared tokenizer.

All three compare a single hypothesis against a single reference. BLEU is
unsmoothed with the n-gram order capped by the shorter sequence; METEOR uses
exact unigram matching only, with the alignment chosen by exhaustive search
for the fewest chunks among maximum-cardinality matchings.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

from .errors import AlignmentSizeError

MAX_ALIGN_TOKENS = 64
BLEU_MAX_ORDER = 4
METEOR_BETA = 3
METEOR_GAMMA = 0.5

_NON_TOKEN = re.compile(r"[^a-z0-9.]")

Tokens = Union[str, Sequence[str]]


def tokenize(text: str) -> list[str]:
    """Lowercase, keep ``[a-z0-9.]`` runs, strip edge dots.

    >>> tokenize("Set Network Throughput to 0.1 Mb/s for all nodes")
    ['set', 'network', 'throughput', 'to', '0.1', 'mb', 's', 'for', 'all', 'nodes']
    """
    out = []
    for tok in _NON_TOKEN.sub(" ", text.lower()).split():
        tok = tok.strip(".")
        if tok:
            out.append(tok)
    return out


def _toks(x: Tokens) -> list[str]:
    return tokenize(x) if isinstance(x, str) else list(x)


@dataclass(frozen=True)
class MetricScore:
    rouge1_p: float
    rouge1_r: float
    rouge1_f: float
    meteor: float
    bleu: float

    @classmethod
    def zero(cls) -> MetricScore:
        return cls(0.0, 0.0, 0.0, 0.0, 0.0)

    def as_dict(self) -> dict[str, float]:
        return {
            "rouge1_p": self.rouge1_p,
            "rouge1_r": self.rouge1_r,
            "rouge1_f": self.rouge1_f,
            "meteor": self.meteor,
            "bleu": self.bleu,
        }


def rouge1(hyp: Tokens, ref: Tokens) -> tuple[float, float, float]:
    """Clipped unigram overlap as ``(precision, recall, f1)``."""
    h, r = _toks(hyp), _toks(ref)
    if not h and not r:
        return 1.0, 1.0, 1.0
    if not h or not r:
        return 0.0, 0.0, 0.0
    overlap = sum((Counter(h) & Counter(r)).values())
    p = overlap / len(h)
    rec = overlap / len(r)
    if p + rec == 0:
        return p, rec, 0.0
    # 2PR/(P+R) with P=m/|h|, R=m/|r| reduces to 2m/(|h|+|r|)
    return p, rec, 2 * overlap / (len(h) + len(r))


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def modified_precision(hyp: Sequence[str], ref: Sequence[str], n: int) -> tuple[int, int]:
    """Clipped n-gram matches and total hypothesis n-grams."""
    h = _ngrams(hyp, n)
    clipped = sum((h & _ngrams(ref, n)).values())
    return clipped, max(len(hyp) - n + 1, 0)


def bleu(hyp: Tokens, ref: Tokens) -> float:
    h, r = _toks(hyp), _toks(ref)
    if not h:
        return 1.0 if not r else 0.0
    if not r:
        return 0.0
    order = min(BLEU_MAX_ORDER, len(h), len(r))
    log_sum = 0.0
    for n in range(1, order + 1):
        matched, total = modified_precision(h, r, n)
        if matched == 0:
            return 0.0
        log_sum += math.log(matched / total)
    bp = 1.0 if len(h) >= len(r) else math.exp(1 - len(r) / len(h))
    return bp * math.exp(log_sum / order)


@dataclass(frozen=True)
class Alignment:
    matches: int
    chunks: int
    pairs: tuple[tuple[int, int], ...] = ()


def align_unigrams(hyp: Tokens, ref: Tokens) -> Alignment:
    """Maximum one-to-one exact matching with the fewest chunks.

    A chunk is a maximal run of pairs ``(i, j), (i+1, j+1), ...``. Search is a
    memoised dynamic program over hypothesis positions, keyed on the set of
    used reference positions and the reference index paired with the previous
    hypothesis token. Among equally good alignments the one that pairs each
    hypothesis token with the leftmost available reference token wins.
    """
    h, r = _toks(hyp), _toks(ref)
    if len(h) + len(r) > MAX_ALIGN_TOKENS:
        raise AlignmentSizeError(
            f"{len(h)} + {len(r)} tokens exceeds the exhaustive-search bound {MAX_ALIGN_TOKENS}"
        )
    positions = {}
    for j, tok in enumerate(r):
        positions.setdefault(tok, []).append(j)
    candidates = [tuple(positions.get(tok, ())) for tok in h]

    # f(i, used, prev) -> (-matches, chunks) for hyp[i:], given ref mask `used`
    # and prev = ref index matched by hyp[i-1] (or -2 when unmatched)
    @lru_cache(maxsize=None)
    def best(i: int, used: int, prev: int) -> tuple[int, int]:
        if i == len(h):
            return (0, 0)
        neg_m, ch = best(i + 1, used, -2)
        result = (neg_m, ch)
        for j in candidates[i]:
            if used >> j & 1:
                continue
            sub_m, sub_ch = best(i + 1, used | (1 << j), j)
            cand = (sub_m - 1, sub_ch + (0 if j == prev + 1 else 1))
            if cand < result:
                result = cand
        return result

    target = best(0, 0, -2)
    pairs = []
    used, prev = 0, -2
    for i in range(len(h)):
        want = best(i, used, prev)
        chosen = None
        for j in candidates[i]:
            if used >> j & 1:
                continue
            sub_m, sub_ch = best(i + 1, used | (1 << j), j)
            if (sub_m - 1, sub_ch + (0 if j == prev + 1 else 1)) == want:
                chosen = j
                break
        if chosen is None:
            prev = -2
        else:
            pairs.append((i, chosen))
            used |= 1 << chosen
            prev = chosen
    best.cache_clear()
    return Alignment(matches=-target[0], chunks=target[1], pairs=tuple(pairs))


def meteor(hyp: Tokens, ref: Tokens) -> float:
    """Exact-match METEOR: recall-weighted harmonic mean times fragmentation discount."""
    h, r = _toks(hyp), _toks(ref)
    al = align_unigrams(h, r)
    m = al.matches
    if m == 0:
        return 0.0
    # 10PR/(R+9P) with P=m/|h|, R=m/|r| reduces to 10m/(|h|+9|r|)
    fmean = 10 * m / (len(h) + 9 * len(r))
    penalty = METEOR_GAMMA * al.chunks**METEOR_BETA / m**METEOR_BETA
    return fmean * (1 - penalty)


def score(hypothesis: str, reference: str) -> MetricScore:
    h, r = tokenize(hypothesis), tokenize(reference)
    p, rec, f = rouge1(h, r)
    return MetricScore(rouge1_p=p, rouge1_r=rec, rouge1_f=f, meteor=meteor(h, r), bleu=bleu(h, r))
