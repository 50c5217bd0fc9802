"""Generalized orthogonal chirp division multiplexing (GOCDM) simulation toolkit."""

from .channel import (
    EVA_TABLE4, UWA_TABLE2, ChannelProfile, ChannelRealization, PathRealization,
    apply_channel, apply_channel_cp, dense_h, draw_channel, load_profile, make_channel, spreads,
)
from .detect import MpConfig, MpResult, ml_bruteforce, mmse_equalize, mp_detect
from .gf_channel import (
    SparseGfChannel, dense_heff, index_vectors, lambda_coeffs, sparse_heff, verify_lemma1,
)
from .transforms import GdfntParams, dfnt_matrix, dfnt_via_fft, gdfnt_apply, gdfnt_matrix
from .waveform import QAM4, Constellation, FrameParams, Mode, map_bits, modulate, papr, rx_front

__version__ = "0.1.0"
