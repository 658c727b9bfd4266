"""Guess-random-additive-noise decoders: hard GRAND, ORBGRAND, SGRAND-AB.

All three share the same contract: test putative noise-effect patterns in a
fixed order, query codebook membership after removing each pattern, and stop
at the first member found.  A query is one membership test (the all-zero
pattern counts), and at most ``budget`` tests are performed; running out of
budget abandons rather than raising.

Membership tests run on packed-integer syndromes (see codes.pack_columns):
applying a pattern is a handful of XORs on Python ints, which keeps the
per-query cost flat even at millions of queries.  Query counts double as the
race clock for the recycling scheduler, so exactly one count per membership
test and nothing else.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .channel import bpsk_demodulate
from .codes import LinearCode


@dataclass
class DecodeOutcome:
    codeword: np.ndarray | None   # None iff abandoned
    message: np.ndarray | None
    queries: int
    abandoned: bool


def _found(code: LinearCode, hard: np.ndarray, positions, queries: int) -> DecodeOutcome:
    cw = hard.copy()
    for p in positions:
        cw[p] ^= 1
    try:
        msg = code.message_from_codeword(cw)
    except ValueError:
        msg = None
    return DecodeOutcome(codeword=cw, message=msg, queries=queries, abandoned=False)


def _abandoned(queries: int) -> DecodeOutcome:
    return DecodeOutcome(codeword=None, message=None, queries=queries, abandoned=True)


# ---------------------------------------------------------------------------
# Hard GRAND: patterns by Hamming weight, lexicographic by flip positions
# within a weight class.


def grand_hard(code: LinearCode, hard_bits, budget: int = 10**6) -> DecodeOutcome:
    hard = np.asarray(hard_bits, dtype=np.uint8)
    s0 = code.syndrome_int(hard)
    cols = code.h_cols
    n = code.n
    queries = 0
    for w in range(n + 1):
        for pat in combinations(range(n), w):
            if queries >= budget:
                return _abandoned(queries)
            s = s0
            for p in pat:
                s ^= cols[p]
            queries += 1
            if s == 0:
                return _found(code, hard, pat, queries)
    return _abandoned(queries)  # unreachable when H has full rank


# ---------------------------------------------------------------------------
# ORBGRAND: patterns by logistic weight (sum of flipped reliability ranks,
# rank 1 = least reliable).  A weight-w pattern is an integer partition of w
# into distinct parts <= n; within one weight, partitions are emitted
# largest-part-first in descending lexicographic order.


def _distinct_partitions(total: int, max_part: int):
    if total == 0:
        yield ()
        return
    for first in range(min(total, max_part), 0, -1):
        if first * (first + 1) // 2 < total:
            break
        for rest in _distinct_partitions(total - first, first - 1):
            yield (first,) + rest


_orb_cache: dict[int, list[list[tuple[int, ...]]]] = {}


def _orb_patterns(n: int, weight: int) -> list[tuple[int, ...]]:
    """Rank patterns of one logistic weight for block length n (cached)."""
    per_weight = _orb_cache.setdefault(n, [[()]])
    while len(per_weight) <= weight:
        w = len(per_weight)
        per_weight.append(list(_distinct_partitions(w, n)))
    return per_weight[weight]


def orbgrand(code: LinearCode, y, budget: int = 10**6) -> DecodeOutcome:
    y = np.asarray(y, dtype=np.float64)
    hard = bpsk_demodulate(y)
    s0 = code.syndrome_int(hard)
    n = code.n
    order = np.argsort(np.abs(y), kind="stable")
    col_of_rank = [0] + [code.h_cols[j] for j in order]
    queries = 0
    max_weight = n * (n + 1) // 2
    for w in range(max_weight + 1):
        for ranks in _orb_patterns(n, w):
            if queries >= budget:
                return _abandoned(queries)
            s = s0
            for r in ranks:
                s ^= col_of_rank[r]
            queries += 1
            if s == 0:
                pat = [order[r - 1] for r in ranks]
                return _found(code, hard, pat, queries)
    return _abandoned(queries)


# ---------------------------------------------------------------------------
# SGRAND-AB: exact maximum-likelihood ordering via a best-first frontier.
#
# Patterns are subsets of reliability ranks {1..n}.  A pattern's cost is the
# sum of |y| over flipped positions; on a binary-input symmetric channel the
# pattern likelihood is monotone decreasing in that cost, so popping a
# min-heap yields noise effects from most to least likely.  From a popped
# pattern whose largest rank is j, two children are pushed: the pattern
# extended with rank j+1, and the pattern with j replaced by j+1.  Every
# subset is reached exactly once and children never cost less than parents,
# so the first codebook member popped is a maximum-likelihood decision.
# Equal-cost entries pop in lexicographic rank-vector order (the heap
# compares the rank tuple after the cost), keeping races deterministic.


def sgrandab(code: LinearCode, y, budget: int = 10**6) -> DecodeOutcome:
    y = np.asarray(y, dtype=np.float64)
    hard = bpsk_demodulate(y)
    s0 = code.syndrome_int(hard)
    n = code.n
    abs_y = np.abs(y)
    order = np.argsort(abs_y, kind="stable")
    wt = [0.0] + [float(abs_y[j]) for j in order]        # cost by rank
    col = [0] + [code.h_cols[j] for j in order]          # H column by rank
    heap = [(0.0, (), s0)]
    queries = 0
    push = heapq.heappush
    while heap:
        if queries >= budget:
            return _abandoned(queries)
        cost, ranks, s = heapq.heappop(heap)
        queries += 1
        if s == 0:
            pat = [order[r - 1] for r in ranks]
            return _found(code, hard, pat, queries)
        last = ranks[-1] if ranks else 0
        if last < n:
            nxt = last + 1
            push(heap, (cost + wt[nxt], ranks + (nxt,), s ^ col[nxt]))
            if ranks:
                push(heap, (cost - wt[last] + wt[nxt],
                            ranks[:-1] + (nxt,),
                            s ^ col[last] ^ col[nxt]))
    return _abandoned(queries)


# ---------------------------------------------------------------------------
# Brute-force maximum-likelihood reference (exhaustive over 2^k messages).


def all_codewords(code: LinearCode) -> np.ndarray:
    """Full codebook, shape (2^k, n); row i encodes the k-bit binary of i
    (most significant bit first)."""
    k = code.k
    msgs = ((np.arange(2**k)[:, None] >> np.arange(k - 1, -1, -1)) & 1)
    return (msgs.astype(np.uint8) @ code.G.astype(np.uint32) % 2).astype(np.uint8)


def ml_oracle(code: LinearCode, y, codebook: np.ndarray | None = None) -> np.ndarray:
    """Exhaustive maximum-likelihood decision via the correlation metric.

    Returns the codeword maximising sum_i y_i * (1 - 2 c_i), which equals
    the min-Euclidean-distance (and hence ML) decision for BPSK on additive
    symmetric noise.  Ties break to the lexicographically smallest codeword.
    """
    if code.k > 20:
        raise ValueError(f"exhaustive oracle limited to k <= 20, got k={code.k}")
    y = np.asarray(y, dtype=np.float64)
    if codebook is None:
        codebook = all_codewords(code)
    corr = (1.0 - 2.0 * codebook) @ y
    best = np.flatnonzero(corr == corr.max())
    if len(best) > 1:
        rows = sorted(best, key=lambda i: codebook[i].tolist())
        return codebook[rows[0]].copy()
    return codebook[best[0]].copy()


def correlation_metric(y, codeword) -> float:
    """sum_i y_i (1 - 2 c_i): higher is more likely under symmetric noise."""
    y = np.asarray(y, dtype=np.float64)
    c = np.asarray(codeword, dtype=np.float64)
    return float(np.dot(y, 1.0 - 2.0 * c))


def _grand_on_soft(code, y, budget: int = 10**6) -> DecodeOutcome:
    return grand_hard(code, bpsk_demodulate(y), budget)


# Uniform soft-input registry used by the recycling schemes and the harness.
DECODERS = {
    "grand": _grand_on_soft,
    "orbgrand": orbgrand,
    "sgrandab": sgrandab,
}
