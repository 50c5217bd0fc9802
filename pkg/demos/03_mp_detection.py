"""Message-passing detection on the sparse factor graph, compared with MMSE and brute-force ML.

Run: python demos/03_mp_detection.py
"""

import numpy as np

from gocdm.channel import EVA_TABLE4, apply_channel_cp, draw_channel
from gocdm.detect import MpConfig, ml_bruteforce, mmse_equalize, mp_detect
from gocdm.gf_channel import SparseGfChannel, dense_heff, sparse_heff
from gocdm.harness import default_frame, ebn0_to_n0
from gocdm.waveform import QAM4, modulate, rx_front

rng = np.random.default_rng(5)

# Tiny graph: MP against exhaustive ML over all 4^4 hypotheses.
sg = SparseGfChannel(np.array([0, 1, 3]), (rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))) / 2, 4)
idx = rng.integers(0, 4, 4)
y = sg.matvec(QAM4.points[idx])
print("sent   ", idx, "\nMP     ", mp_detect(y, sg, QAM4).indices, "\nML     ", ml_bruteforce(y, sg, QAM4))

# A full EVA block at 12 dB. The callback shows the convergence indicator per iteration.
p = default_frame(EVA_TABLE4)
ch = draw_channel(EVA_TABLE4, p, rng)
idx = rng.integers(0, 4, p.MN)
N0 = ebn0_to_n0(12.0, p)
y = rx_front(p, apply_channel_cp(ch, modulate(p, QAM4.points[idx]).s_cp, p.G, N0, rng))

sg = sparse_heff(p, ch, B=5)
print(f"\n{p.label}: {sg.L} shift groups, {sg.L * p.MN} nonzeros of {p.MN ** 2}")
res = mp_detect(y, sg, QAM4, MpConfig(sigma2=N0, B=5),
                callback=lambda s: print(f"  iteration {s.iteration:2d}: eta = {s.eta:.3f}"))
mmse = mmse_equalize(y, dense_heff(p, ch), N0, QAM4)
print("MP symbol errors:  ", int(np.sum(res.indices != idx)), "after", res.iterations, "iterations")
print("MMSE symbol errors:", int(np.sum(mmse != idx)))
