"""Discrete Fresnel transforms and their Kronecker generalization.

The generalized transform of size ``M*N`` is ``Phi_N (x) I_M``: every row of the
column-major ``M x N`` reshape of a block goes through the same ``N``-point
Fresnel transform.  Dense matrices are built only for oracles and small
problems; :func:`gdfnt_apply` is the production path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FORWARD = "forward"
INVERSE = "inverse"


@dataclass(frozen=True)
class GdfntParams:
    M: int
    N: int

    def __post_init__(self):
        if int(self.M) != self.M or int(self.N) != self.N or self.M < 1 or self.N < 1:
            raise ValueError(f"M and N must be positive integers, got M={self.M}, N={self.N}")

    @property
    def size(self) -> int:
        return self.M * self.N


def _check_direction(direction: str) -> None:
    if direction not in (FORWARD, INVERSE):
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def dfnt_matrix(N: int) -> np.ndarray:
    """Unitary ``N``-point DFnT matrix.

    Entry ``(n, n')`` is ``exp(-j pi/4) exp(j pi (n' - n + h)^2 / N) / sqrt(N)``
    with ``h = 0`` for even ``N`` and ``h = 1/2`` for odd ``N``.
    """
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    n = np.arange(N)
    diff = n[None, :] - n[:, None] + (0.0 if N % 2 == 0 else 0.5)
    return np.exp(-1j * np.pi / 4) * np.exp(1j * np.pi * diff**2 / N) / np.sqrt(N)


def gdfnt_matrix(params: GdfntParams) -> np.ndarray:
    """Dense ``MN x MN`` generalized transform ``Phi_N (x) I_M``."""
    return np.kron(dfnt_matrix(params.N), np.eye(params.M))


def chirp_vectors(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Diagonals ``theta1``, ``theta2`` with ``Phi_N = diag(theta2) F_N diag(theta1)``."""
    m = np.arange(N)
    chirp = np.exp(1j * np.pi * m**2 / N)
    return np.exp(-1j * np.pi / 4) * chirp, chirp


def dfnt_via_fft(N: int, a: np.ndarray, direction: str = FORWARD, axis: int = -1) -> np.ndarray:
    """Apply the even-``N`` DFnT (or its inverse) along ``axis`` with one FFT."""
    _check_direction(direction)
    if N < 2 or N % 2:
        raise ValueError(f"FFT factorization needs an even N, got {N}")
    a = np.asarray(a, dtype=complex)
    if a.shape[axis] != N:
        raise ValueError(f"expected length {N} along axis {axis}, got {a.shape[axis]}")
    theta1, theta2 = chirp_vectors(N)
    shape = [1] * a.ndim
    shape[axis] = N
    theta1 = theta1.reshape(shape)
    theta2 = theta2.reshape(shape)
    if direction == FORWARD:
        return theta2 * np.fft.fft(theta1 * a, axis=axis, norm="ortho")
    return np.conj(theta1) * np.fft.ifft(np.conj(theta2) * a, axis=axis, norm="ortho")


def dfnt_apply(N: int, a: np.ndarray, direction: str = FORWARD, axis: int = -1) -> np.ndarray:
    """``N``-point DFnT along ``axis``; FFT path for even ``N``, dense product otherwise."""
    _check_direction(direction)
    a = np.asarray(a, dtype=complex)
    if N % 2 == 0:
        return dfnt_via_fft(N, a, direction, axis)
    phi = dfnt_matrix(N)
    if direction == INVERSE:
        phi = phi.conj().T
    return np.moveaxis(np.tensordot(phi, np.moveaxis(a, axis, 0), axes=(1, 0)), 0, axis)


def gdfnt_apply(params: GdfntParams, a: np.ndarray, direction: str = FORWARD) -> np.ndarray:
    """``Theta a`` (forward) or ``Theta^H a`` (inverse) without building ``Theta``.

    ``a`` may carry leading batch dimensions; the transform acts on the last
    axis, which must have length ``M*N``.
    """
    _check_direction(direction)
    a = np.asarray(a, dtype=complex)
    if a.shape[-1] != params.size:
        raise ValueError(f"expected last axis of length {params.size}, got {a.shape[-1]}")
    # Column-major M x N reshape == row-major N x M; the DFnT then runs along N.
    blocks = a.reshape(a.shape[:-1] + (params.N, params.M))
    out = dfnt_apply(params.N, blocks, direction, axis=-2)
    return out.reshape(a.shape)
