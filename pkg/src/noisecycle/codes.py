"""Binary linear codes: systematic random codes, CRC, polar / CRC-aided polar.

Everything is over GF(2) with numpy uint8 matrices.  For decoder hot loops a
code's parity-check columns are packed into Python integers once (one int per
codeword position, bit s of column j set iff H[s, j] = 1) so a syndrome is a
single int and flipping position j is one XOR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


# ---------------------------------------------------------------------------
# GF(2) matrix helpers


def gf2_rref(a: np.ndarray):
    """Reduced row echelon form over GF(2). Returns (R, pivot_columns)."""
    r = np.array(a, dtype=np.uint8) & 1
    rows, cols = r.shape
    pivots = []
    lead = 0
    for col in range(cols):
        if lead >= rows:
            break
        sel = None
        for i in range(lead, rows):
            if r[i, col]:
                sel = i
                break
        if sel is None:
            continue
        if sel != lead:
            r[[lead, sel]] = r[[sel, lead]]
        for i in range(rows):
            if i != lead and r[i, col]:
                r[i] ^= r[lead]
        pivots.append(col)
        lead += 1
    return r, pivots


def gf2_nullspace(a: np.ndarray) -> np.ndarray:
    """Basis (rows) of {x : a @ x = 0 mod 2}; shape (cols - rank, cols)."""
    r, pivots = gf2_rref(a)
    cols = r.shape[1]
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((len(free), cols), dtype=np.uint8)
    for bi, fc in enumerate(free):
        basis[bi, fc] = 1
        for ri, pc in enumerate(pivots):
            if r[ri, fc]:
                basis[bi, pc] = 1
    return basis


def gf2_matmul(a, b) -> np.ndarray:
    return (np.asarray(a, dtype=np.uint8).astype(np.uint32) @
            np.asarray(b, dtype=np.uint8).astype(np.uint32)) % 2


def pack_columns(h: np.ndarray) -> list[int]:
    """Pack each column of H into a Python int (bit s <-> row s)."""
    rows, cols = h.shape
    out = []
    for j in range(cols):
        v = 0
        for s in range(rows):
            if h[s, j]:
                v |= 1 << s
        out.append(v)
    return out


# ---------------------------------------------------------------------------
# Linear block code container


@dataclass
class LinearCode:
    """An [n, k] binary linear code with generator and parity-check matrices."""

    n: int
    k: int
    G: np.ndarray
    H: np.ndarray
    name: str = "linear"
    h_cols: list[int] = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.G = np.asarray(self.G, dtype=np.uint8) & 1
        self.H = np.asarray(self.H, dtype=np.uint8) & 1
        if self.G.shape != (self.k, self.n):
            raise ValueError(f"G shape {self.G.shape} != ({self.k}, {self.n})")
        if self.H.shape[1] != self.n:
            raise ValueError(f"H has {self.H.shape[1]} columns, expected {self.n}")
        if gf2_matmul(self.G, self.H.T).any():
            raise ValueError("G H^T != 0: not a valid generator/check pair")
        if not self.h_cols:
            self.h_cols = pack_columns(self.H)

    @property
    def rate(self) -> float:
        return self.k / self.n

    def encode(self, message) -> np.ndarray:
        msg = np.asarray(message, dtype=np.uint8)
        if msg.shape != (self.k,):
            raise ValueError(f"message shape {msg.shape} != ({self.k},)")
        return gf2_matmul(msg, self.G).astype(np.uint8)

    def syndrome_int(self, word) -> int:
        """Syndrome of a hard-decision word as a packed integer."""
        s = 0
        cols = self.h_cols
        for j, b in enumerate(np.asarray(word, dtype=np.uint8)):
            if b:
                s ^= cols[j]
        return s

    def is_codeword(self, word) -> bool:
        return self.syndrome_int(word) == 0

    def message_from_codeword(self, codeword) -> np.ndarray:
        """Recover the message: info-set slice for CA-polar codes (attached
        spec), identity prefix for systematic ones."""
        cw = np.asarray(codeword, dtype=np.uint8)
        spec = getattr(self, "spec", None)
        if spec is not None:
            return ca_polar_extract(spec, cw)
        if not np.array_equal(self.G[:, : self.k], np.eye(self.k, dtype=np.uint8)):
            raise ValueError("code is neither CA-polar nor systematic")
        return cw[: self.k].copy()


def systematic_code(parity: np.ndarray, name: str = "linear") -> LinearCode:
    """Build an [n, k] code from its k x (n-k) parity block: G = [I | P]."""
    p = np.asarray(parity, dtype=np.uint8) & 1
    k, r = p.shape
    n = k + r
    G = np.concatenate([np.eye(k, dtype=np.uint8), p], axis=1)
    H = np.concatenate([p.T, np.eye(r, dtype=np.uint8)], axis=1)
    return LinearCode(n=n, k=k, G=G, H=H, name=name)


def rlc(n: int, k: int, rng: np.random.Generator) -> LinearCode:
    """Systematic random linear code: parity block i.i.d. Bernoulli(1/2)."""
    if not 0 < k < n:
        raise ValueError(f"need 0 < k < n, got k={k}, n={n}")
    parity = rng.integers(0, 2, size=(k, n - k), dtype=np.uint8)
    return systematic_code(parity, name=f"rlc[{n},{k}]")


# ---------------------------------------------------------------------------
# CRC


@dataclass(frozen=True)
class CrcSpec:
    """CRC defined by a binary polynomial given as an integer bit mask.

    ``poly`` includes the leading term: degree = poly.bit_length() - 1.
    Bits are processed MSB-first with zero initial register and no final
    XOR or reflection.
    """

    poly: int

    @property
    def degree(self) -> int:
        return self.poly.bit_length() - 1

    def checksum_bits(self, bits) -> np.ndarray:
        """Remainder of bits * x^degree modulo poly, MSB first."""
        deg = self.degree
        top = 1 << deg
        mask = top - 1
        reg = 0
        for b in np.asarray(bits, dtype=np.uint8):
            reg = (reg << 1) | int(b)
            if reg & top:
                reg ^= self.poly
        for _ in range(deg):
            reg <<= 1
            if reg & top:
                reg ^= self.poly
        reg &= mask
        return np.array([(reg >> (deg - 1 - i)) & 1 for i in range(deg)],
                        dtype=np.uint8)

    def append(self, bits) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.uint8)
        return np.concatenate([bits, self.checksum_bits(bits)])

    def check(self, bits) -> bool:
        """True iff bits = message||checksum is CRC-consistent."""
        bits = np.asarray(bits, dtype=np.uint8)
        if len(bits) <= self.degree:
            return False
        msg, tail = bits[: -self.degree], bits[-self.degree:]
        return bool(np.array_equal(self.checksum_bits(msg), tail))


# CRC-8 (poly x^8 + x^2 + x + 1) for blocks up to 128; a degree-11 poly with
# good short-block distance for 256.
CRC8 = CrcSpec(poly=0x107)
CRC11 = CrcSpec(poly=0xE21)


def crc_for_blocklength(n: int) -> CrcSpec:
    return CRC8 if n <= 128 else CRC11


# ---------------------------------------------------------------------------
# Polar transform and CRC-aided polar codes


def polar_transform(bits) -> np.ndarray:
    """Apply the n x n binary polar transform (n a power of two), in place
    butterfly form.  The transform is its own inverse over GF(2)."""
    u = np.asarray(bits, dtype=np.uint8).copy()
    n = len(u)
    if n & (n - 1):
        raise ValueError(f"length must be a power of two, got {n}")
    h = 1
    while h < n:
        for start in range(0, n, 2 * h):
            u[start:start + h] ^= u[start + h:start + 2 * h]
        h *= 2
    return u


@lru_cache(maxsize=None)
def _bhattacharyya(n: int, sigma_design: float) -> tuple[float, ...]:
    """Per-position Bhattacharyya parameters for length n, natural order.

    Gaussian-approximation seed Z0 = exp(-1/(2 sigma^2)) for unit-energy
    BPSK, then the standard recursion: the minus (degraded) half first,
    z_minus = 2z - z^2, z_plus = z^2.
    """
    z = [math.exp(-1.0 / (2.0 * sigma_design * sigma_design))]
    while len(z) < n:
        nxt = []
        for v in z:
            nxt.append(2.0 * v - v * v)
        for v in z:
            nxt.append(v * v)
        z = nxt
    return tuple(z)


@dataclass
class CaPolarSpec:
    """CRC-aided polar code layout: which transform inputs carry data."""

    n: int
    k: int                 # user-message bits
    crc: CrcSpec
    info_set: np.ndarray   # sorted positions for message+CRC bits, len k+deg

    @property
    def payload_len(self) -> int:
        return self.k + self.crc.degree


def ca_polar_spec(n: int, k: int, sigma_design: float) -> CaPolarSpec:
    """Choose the k + crc_degree most reliable polar inputs at design sigma."""
    crc = crc_for_blocklength(n)
    payload = k + crc.degree
    if payload >= n:
        raise ValueError(f"k + crc degree = {payload} must be < n = {n}")
    z = np.array(_bhattacharyya(n, sigma_design))
    info = np.sort(np.argsort(z, kind="stable")[:payload])
    return CaPolarSpec(n=n, k=k, crc=crc, info_set=info)


def ca_polar_encode(spec: CaPolarSpec, message) -> np.ndarray:
    msg = np.asarray(message, dtype=np.uint8)
    if msg.shape != (spec.k,):
        raise ValueError(f"message shape {msg.shape} != ({spec.k},)")
    u = np.zeros(spec.n, dtype=np.uint8)
    u[spec.info_set] = spec.crc.append(msg)
    return polar_transform(u)


def ca_polar_code(n: int, k: int, sigma_design: float) -> LinearCode:
    """Materialise the CRC-aided polar code as a LinearCode.

    G rows are encodings of unit messages; H is a GF(2) nullspace basis of G,
    so membership tests capture both the polar structure and the CRC
    constraint at once.
    """
    spec = ca_polar_spec(n, k, sigma_design)
    G = np.zeros((k, n), dtype=np.uint8)
    e = np.zeros(k, dtype=np.uint8)
    for i in range(k):
        e[:] = 0
        e[i] = 1
        G[i] = ca_polar_encode(spec, e)
    H = gf2_nullspace(G)
    code = LinearCode(n=n, k=k, G=G, H=H, name=f"capolar[{n},{k}]")
    code.spec = spec  # keep the layout around for encode-side reuse
    return code


def ca_polar_extract(spec: CaPolarSpec, codeword) -> np.ndarray:
    """Message bits from a CA-polar codeword (transform is involutive)."""
    u = polar_transform(codeword)
    return u[spec.info_set][: spec.k].copy()
