"""Noise recycling: estimate a decoded channel's noise and lend it to
neighbours, in predetermined order or by racing.

Decoder callables here all take (code, soft_vector, budget) and return a
DecodeOutcome; see grand.DECODERS.  The race clock is the membership-query
count, never wall time, so every scheme is deterministic given its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelBundle, bpsk_demodulate, bpsk_modulate, scale_by_rho
from .grand import DecodeOutcome

DEFAULT_BUDGET = 10**6


@dataclass
class RecyclingResult:
    outcomes: list          # per-channel DecodeOutcome, final decisions
    correct: list           # per-channel bool vs the transmitted codewords
    winner: int | None      # racing only; None elsewhere or if all abandoned

    @property
    def queries(self) -> list:
        return [o.queries for o in self.outcomes]


def estimate_noise(y, decoded) -> np.ndarray:
    """z_hat = y - modulated(decoded codeword), elementwise and exact."""
    y = np.asarray(y, dtype=np.float64)
    x_hat = bpsk_modulate(decoded)
    if y.shape != x_hat.shape:
        raise ValueError(f"length mismatch: y has {y.shape}, decoded {x_hat.shape}")
    return y - x_hat


def recycle(y, z_hat, rho: float) -> np.ndarray:
    """Remove the correlated part of a neighbour's noise estimate: y - rho*z_hat.

    The product rho*z_hat is snapped to the noise lattice (the same snap the
    noise generator applies), which is what makes the residual equal the
    stored innovation bit-for-bit when the neighbour decoded correctly.
    """
    y = np.asarray(y, dtype=np.float64)
    z_hat = np.asarray(z_hat, dtype=np.float64)
    if y.shape != z_hat.shape:
        raise ValueError(f"length mismatch: y has {y.shape}, z_hat {z_hat.shape}")
    return y - scale_by_rho(z_hat, rho)


def _estimate_from_outcome(y, outcome: DecodeOutcome) -> np.ndarray:
    """Noise estimate from a decode, falling back to the hard-decision word
    when the decoder abandoned (keeps the estimate's magnitude bounded)."""
    if outcome.codeword is not None:
        return estimate_noise(y, outcome.codeword)
    return estimate_noise(y, bpsk_demodulate(y))


def _is_correct(outcome: DecodeOutcome, sent_row) -> bool:
    if outcome.codeword is None:
        return False
    return bool(np.array_equal(outcome.codeword, bpsk_demodulate(sent_row)))


def decode_independent(bundle: ChannelBundle, codes, decoders,
                       budget: int = DEFAULT_BUDGET) -> RecyclingResult:
    """Baseline: every channel decoded from its raw received vector."""
    m = bundle.params.m
    _check_lists(m, codes, decoders)
    outcomes = [decoders[i](codes[i], bundle.received[i], budget)
                for i in range(m)]
    correct = [_is_correct(outcomes[i], bundle.sent[i]) for i in range(m)]
    return RecyclingResult(outcomes=outcomes, correct=correct, winner=None)


def decode_predetermined(bundle: ChannelBundle, codes, decoders, rho: float,
                         budget: int = DEFAULT_BUDGET) -> RecyclingResult:
    """Channel 1 decoded raw; channel j >= 2 decoded from
    recycle(y_j, z_hat_{j-1}, rho).  Estimates propagate even when a decode
    is wrong or abandoned; block errors are counted per channel."""
    m = bundle.params.m
    _check_lists(m, codes, decoders)
    outcomes = []
    correct = []
    z_hat = None
    for i in range(m):
        y = bundle.received[i]
        y_in = y if i == 0 else recycle(y, z_hat, rho)
        out = decoders[i](codes[i], y_in, budget)
        # estimate against the raw received vector so z_hat targets this
        # channel's own noise, not the already-cleaned residual
        z_hat = _estimate_from_outcome(y, out)
        outcomes.append(out)
        correct.append(_is_correct(out, bundle.sent[i]))
    return RecyclingResult(outcomes=outcomes, correct=correct, winner=None)


def decode_racing(bundle: ChannelBundle, code, race_decoder, lag_decoder,
                  rho: float, budget: int = DEFAULT_BUDGET) -> RecyclingResult:
    """Race all channels, then recycle outward from the winner.

    Every channel runs the race decoder on its raw received vector; the
    winner is the channel needing the fewest codebook queries (ties to the
    lowest index).  The race is evaluated channel-by-channel with a shrinking
    budget — a later channel only needs to beat the current leader, so it is
    cut off at leader_queries - 1 — which reproduces exactly the outcome of
    stepping all decoders in lockstep, at a fraction of the queries.

    The lag pass then walks outward from winner i: at offset j, channel i-j
    is decoded from recycle(y_{i-j}, z_hat_{i-j+1}, rho) and channel i+j from
    recycle(y_{i+j}, z_hat_{i+j-1}, rho), each producing the estimate for the
    next step.  Offsets are processed in increasing order, lower index first
    within an offset (the two directions are data-independent).

    If no channel finds a codeword within the full budget there is no winner
    and no lag pass; every channel reports its abandoned race outcome.
    """
    m = bundle.params.m
    winner = None
    winner_outcome = None
    cap = budget
    race_abandoned = []
    for i in range(m):
        out = race_decoder(code, bundle.received[i], cap)
        race_abandoned.append(out if out.abandoned else None)
        if not out.abandoned:
            winner = i
            winner_outcome = out
            cap = out.queries - 1   # strictly fewer queries to take the lead
            if cap <= 0:
                break
    if winner is None:
        outcomes = [race_abandoned[i] for i in range(m)]
        return RecyclingResult(outcomes=outcomes,
                               correct=[False] * m,
                               winner=None)

    outcomes: list = [None] * m
    outcomes[winner] = winner_outcome
    z_hat = [None] * m
    z_hat[winner] = _estimate_from_outcome(bundle.received[winner], winner_outcome)
    for j in range(1, max(m - 1 - winner, winner) + 1):
        for i in (winner - j, winner + j):
            if i < 0 or i >= m or outcomes[i] is not None:
                continue
            neighbour = i + 1 if i < winner else i - 1
            y = bundle.received[i]
            out = lag_decoder(code, recycle(y, z_hat[neighbour], rho), budget)
            outcomes[i] = out
            z_hat[i] = _estimate_from_outcome(y, out)
    correct = [_is_correct(outcomes[i], bundle.sent[i]) for i in range(m)]
    return RecyclingResult(outcomes=outcomes, correct=correct, winner=winner)


def _check_lists(m: int, codes, decoders):
    if len(codes) != m or len(decoders) != m:
        raise ValueError(
            f"need {m} codes and decoders, got {len(codes)} and {len(decoders)}")
