"""From a physical channel draw to the sparse GF-domain matrix used by the detector.

Run: python demos/02_sparse_channel.py
"""

import numpy as np

from gocdm.channel import UWA_TABLE2, apply_channel, draw_channel, make_channel, spreads
from gocdm.gf_channel import dense_heff, relative_error, sparse_heff
from gocdm.harness import default_frame
from gocdm.waveform import FrameParams, Mode, QAM4, modulate, rx_front

S_t, S_f, prod = spreads(UWA_TABLE2)
print(f"UWA profile: S_t = {S_t * 1e3:.1f} ms, S_f = {S_f:.1f} Hz, S_t*S_f = {prod:.2f} (overspread)")

p = default_frame(UWA_TABLE2)  # GOCDM(8, 16) with a 48-sample CP
ch = draw_channel(UWA_TABLE2, p, np.random.default_rng(3))
print(f"{p.label}: {len(ch.paths)} paths, delays {ch.delays.tolist()}")
print("normalized Dopplers:", np.round(ch.dopplers, 2).tolist())

# With integer Dopplers the sparse construction is exact.
p_small = FrameParams(Mode.GOCDM, 4, 8)
ch_int = make_channel([1.0, 0.6j, -0.3], [0, 2, 5], [0, 1, -2], 32)
print("\ninteger Doppler, sparse vs dense:", relative_error(sparse_heff(p_small, ch_int), dense_heff(p_small, ch_int)))

# Fractional Doppler leaks over neighbouring bins; B sets how many are kept per path.
H = dense_heff(p, ch)
for B in (0, 1, 2, 5, 10, 20):
    sg = sparse_heff(p, ch, B)
    print(f"B = {B:2d}: {sg.L:3d} shift groups, relative error {relative_error(sg, H):.3f}")

# The sparse matrix describes the same input-output map as the time-domain channel.
x = QAM4.points[np.random.default_rng(4).integers(0, 4, p.MN)]
y = rx_front(p, np.concatenate([np.zeros(p.G), apply_channel(ch, modulate(p, x).s)]))
print("\n|y - H_eff x| / |y| =", np.linalg.norm(y - H @ x) / np.linalg.norm(y))
