"""Gauss-Markov correlated noise across orthogonal channels, BPSK, Eb/N0 helpers.

The noise model: m orthogonal channels share one additive real noise process.
Element j of channel i's noise vector follows the first-order recursion

    z[i][j] = rho * z[i-1][j] + xi[i][j]

with innovations xi[i][j] ~ N(0, (1 - rho^2) * sigma^2) drawn independently,
so every entry is marginally N(0, sigma^2).  Row 1 is drawn directly at the
marginal variance, which makes the chain stationary from the first channel.

All noise-domain reals produced here live on a fixed lattice of spacing
2**-GRID_BITS.  Sums and differences of lattice values (and of the +-1 BPSK
symbols, which are lattice points) are then exact in float64, so identities
like ``received - sent == noise`` and the recycling identity
``recycle(y2, z1, rho) - x2 == xi2`` hold bit-for-bit rather than merely to
rounding error.  The lattice spacing (~1.5e-8) is far below any noise scale
of interest and does not affect statistics at simulation tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Noise lattice: every stored noise-domain value is an integer multiple of
# 2**-GRID_BITS.  Magnitudes stay far below 2**26, so lattice sums need at
# most ~52 significand bits and are exact in float64.
GRID_BITS = 26
_GRID = float(2**GRID_BITS)


def snap(values):
    """Round to the nearest noise-lattice point (scalar or array)."""
    return np.rint(np.asarray(values, dtype=np.float64) * _GRID) / _GRID


def scale_by_rho(values, rho: float):
    """Multiply by the correlation factor and re-snap to the lattice.

    Used both when generating the Gauss-Markov recursion and when removing
    a recycled estimate, so the two sides compute the identical product.
    """
    return snap(np.asarray(values, dtype=np.float64) * rho)


@dataclass(frozen=True)
class GmParams:
    """Parameters of the Gauss-Markov noise process over m channels."""

    m: int
    n: int
    rho: float
    sigma: float

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"channel count m must be >= 1, got {self.m}")
        if self.n < 1:
            raise ValueError(f"block length n must be >= 1, got {self.n}")
        if not abs(self.rho) < 1:
            raise ValueError(f"|rho| must be < 1, got {self.rho}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")


@dataclass
class NoiseMatrix:
    """Sampled noise: z[i] is channel i's noise row, xi[i] its innovation row.

    Row 0 of ``xi`` equals row 0 of ``z`` (no predecessor).  For i >= 1 the
    stored rows satisfy ``z[i] == scale_by_rho(z[i-1], rho) + xi[i]`` exactly.
    """

    z: np.ndarray
    xi: np.ndarray


@dataclass
class ChannelBundle:
    """One trial's transmission record: sent symbols, noise, received values."""

    params: GmParams
    sent: np.ndarray      # (m, n) BPSK symbols in {+1, -1}
    noise: NoiseMatrix
    received: np.ndarray  # (m, n), received[i] = sent[i] + noise.z[i]


def gm_noise_sample(params: GmParams, rng: np.random.Generator) -> NoiseMatrix:
    """Draw one m-by-n Gauss-Markov noise matrix with stored innovations."""
    m, n = params.m, params.n
    rho, sigma = params.rho, params.sigma
    sigma_inn = sigma * math.sqrt(1.0 - rho * rho)
    z = np.empty((m, n))
    xi = np.empty((m, n))
    xi[0] = snap(rng.standard_normal(n) * sigma)
    z[0] = xi[0]
    for i in range(1, m):
        xi[i] = snap(rng.standard_normal(n) * sigma_inn)
        z[i] = scale_by_rho(z[i - 1], rho) + xi[i]
    return NoiseMatrix(z=z, xi=xi)


def bpsk_modulate(codeword) -> np.ndarray:
    """Map bits to unit-energy BPSK symbols: 0 -> +1, 1 -> -1."""
    bits = np.asarray(codeword)
    return 1.0 - 2.0 * bits.astype(np.float64)


def bpsk_demodulate(symbols) -> np.ndarray:
    """Hard decisions inverting bpsk_modulate: negative -> 1, else 0."""
    return (np.asarray(symbols) < 0).astype(np.uint8)


def ebn0_to_sigma(ebn0_db: float, rate: float) -> float:
    """Noise std for a target Eb/N0 in dB at the given code rate.

    Convention: unit-energy real BPSK, noise variance sigma^2 per real
    dimension, energy per information bit 1/rate, so
    sigma^2 = 1 / (2 * rate * 10**(ebn0_db / 10)).
    """
    if not 0 < rate <= 1:
        raise ValueError(f"rate must be in (0, 1], got {rate}")
    return math.sqrt(1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0)))


def transmit(params: GmParams, sent, noise: NoiseMatrix) -> ChannelBundle:
    """Form received = sent + noise for all m channels, keeping constituents."""
    sent = np.asarray(sent, dtype=np.float64)
    if sent.shape != (params.m, params.n):
        raise ValueError(
            f"sent shape {sent.shape} does not match (m, n)=({params.m}, {params.n})"
        )
    if noise.z.shape != sent.shape:
        raise ValueError(
            f"noise shape {noise.z.shape} does not match sent shape {sent.shape}"
        )
    received = sent + noise.z
    return ChannelBundle(params=params, sent=sent, noise=noise, received=received)
