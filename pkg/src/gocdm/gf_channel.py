"""Effective channel in the generalized Fresnel (GF) domain.

The exact matrix is ``Theta H Theta^H``.  For chirp modes the conjugation has
closed-form structure: a cyclic delay commutes with the transform, and an
integer Doppler of ``K`` bins becomes a cyclic shift by ``K*M`` with a
quadratic phase.  A fractional Doppler is expanded over integer Dopplers, and
the resulting virtual paths are grouped by their net cyclic shift, giving a
matrix with exactly ``L`` nonzeros per row and per column.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import ChannelRealization, dense_h
from .transforms import GdfntParams, gdfnt_matrix
from .waveform import FrameParams, Mode, transform

DENSE_LIMIT = 4096


@dataclass(frozen=True)
class VirtualPath:
    path: int
    offset: int
    coeff: complex
    shift: int


@dataclass(frozen=True)
class SparseGfChannel:
    """Row-indexed sparse matrix ``H[p, (p - d[l]) mod MN] = coeff[p, l]``."""

    d: np.ndarray
    coeff: np.ndarray
    MN: int

    def __post_init__(self):
        d = np.asarray(self.d, dtype=np.int64) % self.MN
        coeff = np.asarray(self.coeff, dtype=complex)
        if d.ndim != 1 or d.size < 1:
            raise ValueError("need at least one shift group")
        if np.unique(d).size != d.size:
            raise ValueError("shift groups must be distinct")
        if coeff.shape != (self.MN, d.size):
            raise ValueError(f"coeff must have shape {(self.MN, d.size)}, got {coeff.shape}")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "coeff", coeff)

    @property
    def L(self) -> int:
        return self.d.size

    def columns(self) -> np.ndarray:
        """``(MN, L)`` column index of each stored entry (the ``b_p`` vectors)."""
        return (np.arange(self.MN)[:, None] - self.d[None, :]) % self.MN

    def to_dense(self) -> np.ndarray:
        H = np.zeros((self.MN, self.MN), dtype=complex)
        rows = np.repeat(np.arange(self.MN), self.L)
        H[rows, self.columns().ravel()] = self.coeff.ravel()
        return H

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        return np.sum(self.coeff * x[self.columns()], axis=1)

    def rows(self):
        """Iterate ``(p, l, d_l, value)`` over every stored entry."""
        for p in range(self.MN):
            for ell in range(self.L):
                yield p, ell, int(self.d[ell]), self.coeff[p, ell]


def index_vectors(sg: SparseGfChannel, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Symbols feeding observation ``p`` and observations fed by symbol ``p``."""
    if not 0 <= p < sg.MN:
        raise IndexError(f"index {p} outside [0, {sg.MN})")
    return (p - sg.d) % sg.MN, (p + sg.d) % sg.MN


def dense_heff(p: FrameParams, ch: ChannelRealization) -> np.ndarray:
    """Exact effective channel ``T H T^H`` for the mode's transform ``T``."""
    if p.MN != ch.MN:
        raise ValueError("frame and channel block lengths differ")
    if p.MN > DENSE_LIMIT:
        raise MemoryError(f"dense effective channel refused for MN={p.MN}")
    H = dense_h(ch)
    TH = transform(p, H.T).T
    return np.conj(transform(p, np.conj(TH)))


def basis_offsets(B: int, MN: int) -> np.ndarray:
    """Integer-Doppler offsets ``-B..B`` clipped to the ``MN`` distinct basis vectors."""
    return np.arange(max(-B, -(MN // 2)), min(B, (MN - 1) // 2) + 1)


def lambda_coeffs(kappa: float, B: int, MN: int) -> tuple[np.ndarray, np.ndarray]:
    """Offsets ``b`` and weights of ``exp(j 2 pi kappa n / MN)`` on ``exp(j 2 pi b n / MN)``.

    A zero ``kappa`` is exactly the ``b = 0`` basis vector and yields the single
    weight 1.
    """
    if B < 0:
        raise ValueError("truncation B must be nonnegative")
    if kappa == 0:
        return np.zeros(1, dtype=int), np.ones(1, dtype=complex)
    b = basis_offsets(B, MN)
    num = np.exp(2j * np.pi * kappa) - 1
    den = np.exp(2j * np.pi * (kappa - b) / MN) - 1
    return b, num / den / MN


def _fresnel_phase_index(n: np.ndarray, N: int) -> np.ndarray:
    # n^2 for even N; odd N carries the half-sample offset of its kernel -> n(n-1).
    # Both are 2N-periodic in n, so wrapped and unwrapped block indices agree.
    return n * n if N % 2 == 0 else n * (n - 1)


def virtual_paths(p: FrameParams, ch: ChannelRealization, B: int | Sequence[int]) -> list[VirtualPath]:
    """Expand every path into integer-Doppler virtual paths ``(i, b)``."""
    Bs = [int(B)] * len(ch.paths) if np.isscalar(B) else [int(b) for b in B]
    if len(Bs) != len(ch.paths):
        raise ValueError("need one truncation per path")
    out = []
    for i, (pth, Bi) in enumerate(zip(ch.paths, Bs)):
        offsets, lam = lambda_coeffs(pth.kappa, Bi, ch.MN)
        for b, w in zip(offsets, lam):
            shift = (pth.delay + (pth.k + int(b)) * p.M) % ch.MN
            out.append(VirtualPath(i, int(b), complex(w), int(shift)))
    return out


def sparse_heff(p: FrameParams, ch: ChannelRealization, B: int | Sequence[int] = 0) -> SparseGfChannel:
    """Sparse GF-domain channel built directly from the path parameters.

    Chirp modes (GOCDM, OCDM, SC) use the closed form; OFDM takes the
    diagonals of the exact matrix at the shifts its Doppler expansion occupies.
    """
    if p.MN != ch.MN:
        raise ValueError("frame and channel block lengths differ")
    if p.mode is Mode.OFDM:
        return _sparse_ofdm(p, ch, B)

    M, N, MN = p.M, p.N, p.MN
    rows = np.arange(MN)
    row_block = _fresnel_phase_index(rows // M, N)
    row_sub = rows % M

    groups: dict[int, np.ndarray] = defaultdict(lambda: np.zeros(MN, dtype=complex))
    for vp in virtual_paths(p, ch, B):
        pth = ch.paths[vp.path]
        K = pth.k + vp.offset
        cols = (rows - vp.shift) % MN
        col_block = _fresnel_phase_index((cols + pth.delay) // M, N)
        phase = np.pi * (row_block - col_block) / N + 2 * np.pi * K * row_sub / MN
        groups[vp.shift] += pth.gain * vp.coeff * np.exp(1j * phase)

    d = np.array(sorted(groups), dtype=np.int64)
    coeff = np.stack([groups[s] for s in d], axis=1)
    return SparseGfChannel(d, coeff, MN)


def sparse_from_dense(H: np.ndarray, shifts) -> SparseGfChannel:
    """Keep the cyclic diagonals ``H[p, p - d]`` for the given shifts."""
    MN = H.shape[0]
    d = np.unique(np.asarray(shifts, dtype=np.int64) % MN)
    rows = np.arange(MN)
    coeff = H[rows[:, None], (rows[:, None] - d[None, :]) % MN]
    return SparseGfChannel(d, coeff, MN)


def _sparse_ofdm(p: FrameParams, ch: ChannelRealization, B) -> SparseGfChannel:
    # A Doppler of K bins is a cyclic frequency shift by +K; delays only add per-bin phase.
    Bs = [int(B)] * len(ch.paths) if np.isscalar(B) else [int(b) for b in B]
    shifts = set()
    for pth, Bi in zip(ch.paths, Bs):
        offsets, _ = lambda_coeffs(pth.kappa, Bi, ch.MN)
        shifts.update(int(pth.k + b) for b in offsets)
    return sparse_from_dense(dense_heff(p, ch), sorted(shifts))


def relative_error(sg: SparseGfChannel, H_exact: np.ndarray) -> float:
    """Frobenius error of the sparse reconstruction relative to the exact matrix."""
    return float(np.linalg.norm(sg.to_dense() - H_exact) / np.linalg.norm(H_exact))


def verify_lemma1(M: int, N: int) -> float:
    """Max deviation of ``Pi Theta^H`` from ``Theta^H Pi`` (cyclic shift commutes)."""
    Th = gdfnt_matrix(GdfntParams(M, N)).conj().T
    Pi = np.roll(np.eye(M * N), 1, axis=0)
    return float(np.max(np.abs(Pi @ Th - Th @ Pi)))
