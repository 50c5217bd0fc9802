"""Symbol mapping, block modulation with cyclic prefix, and the receiver front end."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .transforms import FORWARD, INVERSE, GdfntParams, gdfnt_apply, gdfnt_matrix


class Mode(str, Enum):
    GOCDM = "GOCDM"
    OCDM = "OCDM"
    OFDM = "OFDM"
    SC = "SC"


@dataclass(frozen=True)
class Constellation:
    """Unit-energy constellation; ``points[i]`` carries the bit label of integer ``i`` (MSB first)."""

    points: np.ndarray
    name: str = ""

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex)
        order = pts.size
        if order < 2 or order & (order - 1):
            raise ValueError(f"constellation order must be a power of two, got {order}")
        object.__setattr__(self, "points", pts)

    @property
    def order(self) -> int:
        return self.points.size

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.order))

    @property
    def labels(self) -> np.ndarray:
        """``(order, bits_per_symbol)`` array of bit labels."""
        k = self.bits_per_symbol
        idx = np.arange(self.order)
        return (idx[:, None] >> np.arange(k - 1, -1, -1)) & 1

    def slice(self, z: np.ndarray) -> np.ndarray:
        """Index of the nearest point for each sample; ties go to the lowest index."""
        z = np.asarray(z, dtype=complex)
        dist = np.abs(z[..., None] - self.points) ** 2
        return np.argmin(dist, axis=-1)


_QAM4 = np.array([1 + 1j, -1 + 1j, 1 - 1j, -1 - 1j]) / np.sqrt(2)  # labels 00, 01, 10, 11


def constellation(order: int) -> Constellation:
    """Built-in Gray-labelled constellations (BPSK and 4-QAM)."""
    if order == 2:
        return Constellation(np.array([1.0, -1.0]), "BPSK")
    if order == 4:
        return Constellation(_QAM4, "4-QAM")
    raise ValueError(f"no built-in constellation of order {order}")


QAM4 = constellation(4)


@dataclass(frozen=True)
class FrameParams:
    mode: Mode
    M: int
    N: int
    G: int = 0
    Ts: float = 1.0
    constellation: Constellation = field(default=QAM4)

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.M < 1 or self.N < 1:
            raise ValueError("M and N must be positive")
        if self.G < 0:
            raise ValueError("CP length must be nonnegative")
        if self.Ts <= 0:
            raise ValueError("sampling interval must be positive")
        if self.mode is Mode.OCDM and self.M != 1:
            raise ValueError("OCDM requires M = 1")
        if self.mode is Mode.SC and self.N != 1:
            raise ValueError("SC requires N = 1")

    @property
    def MN(self) -> int:
        return self.M * self.N

    @property
    def T(self) -> float:
        return self.MN * self.Ts

    @property
    def delta_f(self) -> float:
        return 1.0 / self.T

    @property
    def gdfnt(self) -> GdfntParams:
        return GdfntParams(self.M, self.N)

    @property
    def label(self) -> str:
        if self.mode is Mode.GOCDM:
            return f"GOCDM(M={self.M},N={self.N})"
        return f"{self.mode.value}({self.MN})"


@dataclass(frozen=True)
class TxBlock:
    x: np.ndarray
    s: np.ndarray
    s_cp: np.ndarray


def transform(p: FrameParams, a: np.ndarray, direction: str = FORWARD) -> np.ndarray:
    """Mode transform along the last axis (receiver direction by default)."""
    a = np.asarray(a, dtype=complex)
    if a.shape[-1] != p.MN:
        raise ValueError(f"expected length {p.MN}, got {a.shape[-1]}")
    if p.mode is Mode.OFDM:
        op = np.fft.fft if direction == FORWARD else np.fft.ifft
        return op(a, axis=-1, norm="ortho")
    if p.mode is Mode.SC:
        return a.copy()
    return gdfnt_apply(p.gdfnt, a, direction)


def transform_matrix(p: FrameParams) -> np.ndarray:
    """Dense forward transform of the mode (unitary, ``MN x MN``)."""
    if p.mode is Mode.OFDM:
        return np.fft.fft(np.eye(p.MN), axis=0, norm="ortho")
    if p.mode is Mode.SC:
        return np.eye(p.MN, dtype=complex)
    return gdfnt_matrix(p.gdfnt)


def map_bits(bits: np.ndarray, c: Constellation = QAM4) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64)
    k = c.bits_per_symbol
    if bits.ndim != 1 or bits.size % k:
        raise ValueError(f"bit vector length {bits.size} is not a multiple of {k}")
    idx = bits.reshape(-1, k) @ (1 << np.arange(k - 1, -1, -1))
    return c.points[idx]


def symbols_to_bits(indices: np.ndarray, c: Constellation = QAM4) -> np.ndarray:
    """Inverse of :func:`map_bits` given constellation indices."""
    return c.labels[np.asarray(indices)].reshape(-1)


def add_cp(s: np.ndarray, G: int) -> np.ndarray:
    if G > s.shape[-1]:
        raise ValueError("CP longer than the block")
    return np.concatenate([s[..., s.shape[-1] - G:], s], axis=-1)


def modulate(p: FrameParams, x: np.ndarray) -> TxBlock:
    x = np.asarray(x, dtype=complex)
    if x.shape != (p.MN,):
        raise ValueError(f"expected {p.MN} symbols, got shape {x.shape}")
    s = transform(p, x, INVERSE)
    return TxBlock(x=x, s=s, s_cp=add_cp(s, p.G))


def rx_front(p: FrameParams, r_cp: np.ndarray) -> np.ndarray:
    """Strip the CP and take the received block to the symbol domain."""
    r_cp = np.asarray(r_cp, dtype=complex)
    if r_cp.shape[-1] != p.G + p.MN:
        raise ValueError(f"expected {p.G + p.MN} samples, got {r_cp.shape[-1]}")
    return transform(p, r_cp[..., p.G:], FORWARD)


def papr(s: np.ndarray) -> float | np.ndarray:
    """Peak-to-average power ratio (linear) along the last axis."""
    power = np.abs(np.asarray(s)) ** 2
    if power.shape[-1] == 0:
        raise ValueError("empty block")
    mean = power.mean(axis=-1)
    if np.any(mean == 0):
        raise ValueError("zero-energy block")
    out = power.max(axis=-1) / mean
    return float(out) if np.ndim(out) == 0 else out
