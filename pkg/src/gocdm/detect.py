"""Symbol detectors for the GF-domain model ``y = H x + w``.

``mp_detect`` runs damped loopy message passing on the factor graph of a
:class:`~gocdm.gf_channel.SparseGfChannel`: observation nodes approximate the
interference from their other ``L - 1`` neighbours as Gaussian, variable nodes
combine the resulting likelihoods.  Messages are stored edge-wise in
``(MN, L, order)`` arrays indexed by observation row and shift group, and every
iteration is a Jacobi update over all edges at once.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .gf_channel import SparseGfChannel
from .waveform import Constellation

ML_MAX_BITS = 16


@dataclass(frozen=True)
class MpConfig:
    damping: float = 0.6
    max_iter: int = 20
    gamma: float = 0.99
    epsilon: float = 0.05
    sigma2: float = 1e-3
    B: int = 0

    def __post_init__(self):
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")


@dataclass
class MpState:
    pmf: np.ndarray  # (MN, L, order): message from symbol cols[p, l] to observation p
    mu: np.ndarray  # (MN, L)
    sigma2: np.ndarray  # (MN, L)
    posterior: np.ndarray  # (MN, order), combined over all L observations
    eta: float = 0.0
    eta_max: float = 0.0
    iteration: int = 0


@dataclass(frozen=True)
class MpResult:
    x_hat: np.ndarray
    indices: np.ndarray
    iterations: int
    eta: float


def interference_moments(pmf: np.ndarray, sg: SparseGfChannel, c: Constellation,
                         sigma2: float) -> tuple[np.ndarray, np.ndarray]:
    """Leave-one-out Gaussian interference mean and variance for every edge.

    ``pmf`` is ``(MN, L, order)``: the message from symbol ``(p - d[l]) mod MN``
    into observation ``p``.
    """
    return _moments(np.moveaxis(pmf, -1, 0), sg.coeff, c.points, sigma2)


def _moments(pmf_m, coeff, alpha, sigma2):
    # pmf_m is (order, MN, L)
    mean_sym = np.tensordot(alpha, pmf_m, axes=1)
    energy_sym = np.tensordot(_abs2(alpha), pmf_m, axes=1)
    mean = coeff * mean_sym
    var = np.maximum(_abs2(coeff) * energy_sym - _abs2(mean), 0.0)
    mu = mean.sum(axis=1, keepdims=True) - mean
    sig = np.maximum(var.sum(axis=1, keepdims=True) - var, 0.0) + sigma2
    return mu, sig


def _abs2(z: np.ndarray) -> np.ndarray:
    return z.real * z.real + z.imag * z.imag


def _normalize_logs(logits: np.ndarray) -> np.ndarray:
    # Softmax over axis 0; max-subtracted so no row underflows to all zeros.
    w = np.exp(logits - logits.max(axis=0))
    w /= w.sum(axis=0)
    return w


def mp_detect(y: np.ndarray, sg: SparseGfChannel, c: Constellation, cfg: MpConfig = MpConfig(),
              callback: Callable[[MpState], None] | None = None) -> MpResult:
    """Damped message-passing detection with confidence-driven early stopping.

    The returned estimate is the hard decision of the iteration that reached
    the highest fraction ``eta`` of confident symbols; the first iteration
    always produces an estimate so a result exists even if ``eta`` stays 0.
    """
    y = np.asarray(y, dtype=complex)
    MN, L, order = sg.MN, sg.L, c.order
    if y.shape != (MN,):
        raise ValueError(f"expected {MN} observations, got {y.shape}")

    cols = sg.columns()  # symbol feeding edge (p, l)
    rows_of_sym = (np.arange(MN)[:, None] + sg.d[None, :]) % MN  # observation of edge (v, l)
    ell = np.arange(L)[None, :]
    alpha = c.points
    coeff = sg.coeff
    hyp = coeff[None] * alpha[:, None, None]  # (order, MN, L)

    # Internal layout puts the constellation axis first: (order, MN, L).
    pmf = np.full((order, MN, L), 1.0 / order)
    state = MpState(
        pmf=np.moveaxis(pmf, 0, -1),
        mu=np.zeros((MN, L), dtype=complex),
        sigma2=np.full((MN, L), cfg.sigma2),
        posterior=np.full((MN, order), 1.0 / order),
    )
    best = None

    for it in range(1, cfg.max_iter + 1):
        mu, sig = _moments(pmf, coeff, alpha, cfg.sigma2)
        resid = (y[:, None] - mu)[None] - hyp
        loglik = _abs2(resid) * (-1.0 / sig)  # edge-indexed

        per_sym = loglik[:, rows_of_sym, ell]  # symbol-indexed (order, v, l)
        total = per_sym.sum(axis=2)
        extrinsic = _normalize_logs(total[:, :, None] - per_sym)

        pmf = cfg.damping * extrinsic[:, cols, ell] + (1 - cfg.damping) * pmf
        posterior = _normalize_logs(total)

        eta = float(np.mean(posterior.max(axis=0) >= cfg.gamma))
        state.pmf = np.moveaxis(pmf, 0, -1)
        state.mu, state.sigma2 = mu, sig
        state.posterior = posterior.T
        state.iteration, state.eta = it, eta

        stop = False
        if eta > state.eta_max or best is None:
            state.eta_max = max(eta, state.eta_max)
            best = np.argmax(posterior, axis=0)
        elif eta < state.eta_max - cfg.epsilon:
            stop = True
        if callback is not None:
            callback(state)
        if stop or eta >= 1.0:
            break

    return MpResult(alpha[best], best, state.iteration, state.eta_max)


def mmse_equalize(y: np.ndarray, H: np.ndarray, N0: float, c: Constellation) -> np.ndarray:
    """Linear MMSE estimate ``H^H (H H^H + N0 I)^-1 y`` sliced to the constellation (indices)."""
    z = mmse_filter(y, H, N0)
    return c.slice(z)


def mmse_filter(y: np.ndarray, H: np.ndarray, N0: float) -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    gram = H @ H.conj().T + N0 * np.eye(H.shape[0])
    return H.conj().T @ np.linalg.solve(gram, y)


def ml_bruteforce(y: np.ndarray, H: np.ndarray | SparseGfChannel, c: Constellation,
                  chunk: int = 4096) -> np.ndarray:
    """Exhaustive ML detection; returns constellation indices."""
    if isinstance(H, SparseGfChannel):
        H = H.to_dense()
    H = np.asarray(H, dtype=complex)
    n = H.shape[1]
    if n * c.bits_per_symbol > ML_MAX_BITS:
        raise ValueError(f"search space 2^{n * c.bits_per_symbol} exceeds 2^{ML_MAX_BITS}")
    y = np.asarray(y, dtype=complex)
    best_idx, best_metric = None, np.inf
    # itertools.product is lexicographic, so argmin keeps the lowest-index tie.
    hyps = itertools.product(range(c.order), repeat=n)
    while True:
        block = np.array(list(itertools.islice(hyps, chunk)))
        if block.size == 0:
            break
        metric = np.sum(np.abs(y[None, :] - c.points[block] @ H.T) ** 2, axis=1)
        i = int(np.argmin(metric))
        if metric[i] < best_metric:
            best_metric, best_idx = metric[i], block[i]
    return best_idx
