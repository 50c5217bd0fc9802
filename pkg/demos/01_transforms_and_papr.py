"""The GDFnT, its FFT fast path, and why GOCDM has lower PAPR than OCDM.

Run: python demos/01_transforms_and_papr.py
"""

import numpy as np

from gocdm.harness import ccdf, papr_samples
from gocdm.transforms import FORWARD, GdfntParams, dfnt_matrix, dfnt_via_fft, gdfnt_apply, gdfnt_matrix
from gocdm.waveform import QAM4, FrameParams, Mode, modulate, rx_front

rng = np.random.default_rng(0)

# Theta_{M,N} = Phi_N kron I_M is unitary for every (M, N).
prm = GdfntParams(M=4, N=8)
theta = gdfnt_matrix(prm)
print("unitarity error:", np.abs(theta @ theta.conj().T - np.eye(prm.size)).max())

# For even N the DFnT factors into chirp * FFT * chirp.
a = rng.standard_normal(64) + 1j * rng.standard_normal(64)
print("FFT path vs matrix:", np.abs(dfnt_via_fft(64, a) - dfnt_matrix(64) @ a).max())
print("fast GDFnT vs matrix:", np.abs(gdfnt_apply(prm, a[:32], FORWARD) - theta @ a[:32]).max())

# One block through modulator and receiver front end, ideal channel.
p = FrameParams(Mode.GOCDM, 8, 16, G=8)
x = QAM4.points[rng.integers(0, 4, p.MN)]
tx = modulate(p, x)
print("round trip error:", np.abs(rx_front(p, tx.s_cp) - x).max())

# Each symbol of GOCDM(M, N) only spreads over N chirp samples, so fewer large peaks line up.
grid = np.array([6.0, 8.0, 10.0])
print("\nPr(PAPR > t) for t =", grid, "dB, 20000 blocks, MN = 128")
for mode, M, N in [(Mode.GOCDM, 16, 8), (Mode.GOCDM, 8, 16), (Mode.OCDM, 1, 128), (Mode.SC, 128, 1)]:
    f = FrameParams(mode, M, N)
    print(f"  {f.label:18s}", np.round(ccdf(papr_samples(f, 20_000, rng), grid), 4))
