"""Closed-form achievable rates for noise recycling on Gauss-Markov noise.

All rates are in bits per channel use (base-2 logs).  The lead channel sees
the full marginal noise variance; every later channel, after removing the
correlated part of its predecessor's noise, sees only the innovation
variance (1 - rho^2) * sigma^2, which boosts its capacity accordingly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass


def capacity(snr: float) -> float:
    """AWGN capacity 0.5 * log2(1 + snr) at linear SNR = P / sigma^2."""
    if snr < 0:
        raise ValueError(f"snr must be >= 0, got {snr}")
    return 0.5 * math.log2(1.0 + snr)


def recycled_capacity(snr: float, rho: float) -> float:
    """Capacity of a channel whose correlated noise part was recycled away:
    the effective noise variance shrinks by (1 - rho^2)."""
    if not abs(rho) < 1:
        raise ValueError(f"|rho| must be < 1, got {rho}")
    return capacity(snr / (1.0 - rho * rho))


def average_rate(snr: float, rho: float, m: int) -> float:
    """Per-channel average when one lead is followed by m-1 recycled channels:
    (C1 + (m-1) * C2) / m."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    c1 = capacity(snr)
    c2 = recycled_capacity(snr, rho)
    return (c1 + (m - 1) * c2) / m


@dataclass(frozen=True)
class RatePoint:
    snr: float    # linear P / sigma^2
    rho: float
    m: int
    c1: float
    c2: float
    avg: float


def region_table(snr_grid, rho_grid, m_list) -> list[RatePoint]:
    """Cartesian-product evaluation over the three parameter grids."""
    if not len(snr_grid) or not len(rho_grid) or not len(m_list):
        raise ValueError("all grids must be non-empty")
    points = []
    for snr in snr_grid:
        for rho in rho_grid:
            c1 = capacity(snr)
            c2 = recycled_capacity(snr, rho)
            for m in m_list:
                avg = (c1 + (m - 1) * c2) / m
                points.append(RatePoint(snr=snr, rho=rho, m=m,
                                        c1=c1, c2=c2, avg=avg))
    return points


def write_region_csv(points, path) -> None:
    """Emit snr_db,rho,m,c1,c2,avg rows (snr reported in dB)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["snr_db", "rho", "m", "c1", "c2", "avg"])
        for p in points:
            snr_db = 10.0 * math.log10(p.snr) if p.snr > 0 else float("-inf")
            w.writerow([f"{snr_db:.6g}", f"{p.rho:.6g}", p.m,
                        f"{p.c1:.12g}", f"{p.c2:.12g}", f"{p.avg:.12g}"])
