"""Multi-lag multi-Doppler linear time-variant channel.

Each path acts on the CP-free block as ``h * Lambda^(k + kappa) * Pi^l``: a
cyclic delay of ``l`` samples followed by a Doppler ramp of ``k + kappa``
bins.  Profiles are delay/power tables plus the kinematics that set the
maximum Doppler ``V f_c / C``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .waveform import FrameParams


@dataclass(frozen=True)
class ChannelProfile:
    name: str
    fc: float  # carrier, Hz
    C: float  # propagation speed, m/s
    V: float  # relative speed, m/s
    bandwidth: float  # Hz; sampling interval is 1/bandwidth
    taps: tuple[tuple[float, float], ...]  # (delay s, power dB)
    guard: float | None = None  # CP duration in s

    def __post_init__(self):
        if not self.taps:
            raise ValueError(f"profile {self.name!r} has no taps")
        object.__setattr__(self, "taps", tuple((float(d), float(pw)) for d, pw in self.taps))

    @property
    def v_max(self) -> float:
        return self.V * self.fc / self.C

    @property
    def Ts(self) -> float:
        return 1.0 / self.bandwidth

    @property
    def delays(self) -> np.ndarray:
        return np.array([d for d, _ in self.taps])

    @property
    def powers(self) -> np.ndarray:
        """Linear tap powers normalized to unit sum."""
        lin = 10.0 ** (np.array([pw for _, pw in self.taps]) / 10.0)
        return lin / lin.sum()

    @property
    def cp_length(self) -> int:
        if self.guard is None:
            return int(np.max(self.delay_samples()))
        return _round_half_up(self.guard * self.bandwidth)

    def delay_samples(self) -> np.ndarray:
        return np.array([_round_half_up(d * self.bandwidth) for d in self.delays])


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


UWA_TABLE2 = ChannelProfile(
    name="uwa_table2",
    fc=24e3,
    C=1500.0,
    V=40.0 / 3.6,
    bandwidth=3.2e3,
    taps=(
        (0.0, 0.0), (0.6e-3, -0.6), (1.3e-3, -1.0), (2.2e-3, -1.3), (6.9e-3, -2.8),
        (7.5e-3, -4.2), (8.1e-3, -3.5), (13.1e-3, -6.2), (13.8e-3, -7.3), (14.7e-3, -8.1),
    ),
    guard=15e-3,
)

EVA_TABLE4 = ChannelProfile(
    name="eva_table4",
    fc=5e9,
    C=3e8,
    V=500.0 / 3.6,
    bandwidth=15.36e6,
    taps=(
        (0.0, 0.0), (30e-9, -1.5), (150e-9, -1.4), (310e-9, -3.6), (370e-9, -0.6),
        (710e-9, -9.1), (1090e-9, -7.0), (1730e-9, -12.0), (2510e-9, -16.9),
    ),
    guard=2.6e-6,
)

BUILTIN_PROFILES = {p.name: p for p in (UWA_TABLE2, EVA_TABLE4)}


def profile_from_dict(d: dict, name: str = "custom") -> ChannelProfile:
    return ChannelProfile(
        name=d.get("name", name),
        fc=float(d["fc"]),
        C=float(d["C"]),
        V=float(d["V"]),
        bandwidth=float(d["bandwidth"]),
        taps=tuple(tuple(t) for t in d["taps"]),
        guard=None if d.get("guard") is None else float(d["guard"]),
    )


def load_profile(spec: str | Path | dict) -> ChannelProfile:
    """Resolve a built-in profile name, a YAML profile file, or a mapping."""
    if isinstance(spec, dict):
        return profile_from_dict(spec)
    if str(spec) in BUILTIN_PROFILES:
        return BUILTIN_PROFILES[str(spec)]
    path = Path(spec)
    if not path.exists():
        raise ValueError(f"unknown profile {spec!r}")
    with open(path) as fh:
        return profile_from_dict(yaml.safe_load(fh), name=path.stem)


def spreads(profile: ChannelProfile) -> tuple[float, float, float]:
    """Delay spread ``S_t`` (s), Doppler spread ``S_f`` (Hz) and their product."""
    S_t = float(np.max(profile.delays))
    S_f = 2.0 * profile.v_max
    return S_t, S_f, S_t * S_f


@dataclass(frozen=True)
class PathRealization:
    gain: complex  # equivalent gain, delay-dependent Doppler phase folded in
    delay: int
    k: int
    kappa: float

    @property
    def doppler(self) -> float:
        """Normalized Doppler ``k + kappa`` in units of the subcarrier spacing."""
        return self.k + self.kappa


@dataclass(frozen=True)
class ChannelRealization:
    paths: tuple[PathRealization, ...]
    MN: int
    physical_doppler: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.paths:
            raise ValueError("channel needs at least one path")
        object.__setattr__(self, "paths", tuple(self.paths))

    @property
    def gains(self) -> np.ndarray:
        return np.array([pth.gain for pth in self.paths], dtype=complex)

    @property
    def delays(self) -> np.ndarray:
        return np.array([pth.delay for pth in self.paths], dtype=int)

    @property
    def dopplers(self) -> np.ndarray:
        return np.array([pth.doppler for pth in self.paths])

    @property
    def max_delay(self) -> int:
        return int(self.delays.max())

    def check_cp(self, G: int) -> None:
        if self.max_delay > G:
            raise ValueError(f"path delay {self.max_delay} exceeds CP length {G}")


def split_doppler(nu: float) -> tuple[int, float]:
    """Split a normalized Doppler into ``k`` integer and ``kappa`` in (-0.5, 0.5]."""
    k = int(math.ceil(nu - 0.5))
    return k, nu - k


def make_channel(gains, delays, dopplers, MN: int) -> ChannelRealization:
    """Build a realization from equivalent gains, sample delays and normalized Dopplers."""
    paths = []
    for h, l, nu in zip(np.atleast_1d(gains), np.atleast_1d(delays), np.atleast_1d(dopplers)):
        k, kappa = split_doppler(float(nu))
        paths.append(PathRealization(complex(h), int(l), k, kappa))
    return ChannelRealization(tuple(paths), MN)


def draw_channel(profile: ChannelProfile, p: FrameParams, rng: np.random.Generator) -> ChannelRealization:
    """Draw one Rayleigh block-fading realization of ``profile`` for frame ``p``."""
    if not math.isclose(p.Ts, profile.Ts, rel_tol=1e-9):
        raise ValueError(f"frame Ts={p.Ts} does not match profile bandwidth (Ts={profile.Ts})")
    delays = profile.delay_samples()
    if delays.max() > p.G:
        raise ValueError(f"profile delay {delays.max()} samples exceeds CP length {p.G}")
    P = delays.size
    gains = np.sqrt(profile.powers / 2) * (rng.standard_normal(P) + 1j * rng.standard_normal(P))
    theta = rng.uniform(-np.pi / 2, np.pi / 2, P)
    v = profile.v_max * np.cos(theta)
    paths = []
    for h, l, vi in zip(gains, delays, v):
        k, kappa = split_doppler(vi * p.T)
        h_eq = h * np.exp(-2j * np.pi * (k + kappa) * l / p.MN)
        paths.append(PathRealization(complex(h_eq), int(l), k, kappa))
    return ChannelRealization(tuple(paths), p.MN, physical_doppler=v)


def awgn(shape, N0: float, rng: np.random.Generator) -> np.ndarray:
    """Circular complex Gaussian noise with variance ``N0`` per sample."""
    if N0 < 0:
        raise ValueError("noise variance must be nonnegative")
    if N0 == 0:
        return np.zeros(shape, dtype=complex)
    return np.sqrt(N0 / 2) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def apply_channel(ch: ChannelRealization, s: np.ndarray, N0: float = 0.0,
                  rng: np.random.Generator | None = None) -> np.ndarray:
    """CP-free received block ``r = H s + w``."""
    s = np.asarray(s, dtype=complex)
    MN = ch.MN
    if s.shape != (MN,):
        raise ValueError(f"expected block of length {MN}, got {s.shape}")
    n = np.arange(MN)
    r = np.zeros(MN, dtype=complex)
    for pth in ch.paths:
        r += pth.gain * np.exp(2j * np.pi * pth.doppler * n / MN) * np.roll(s, pth.delay)
    if N0 > 0:
        if rng is None:
            raise ValueError("an rng is required when N0 > 0")
        r += awgn(MN, N0, rng)
    return r


def apply_channel_cp(ch: ChannelRealization, s_cp: np.ndarray, G: int, N0: float = 0.0,
                     rng: np.random.Generator | None = None) -> np.ndarray:
    """Linear (non-cyclic) channel on a CP-carrying block; output keeps the CP slots.

    Samples before the block start are taken as silence, so the first ``G``
    outputs are not meaningful; the last ``MN`` equal :func:`apply_channel`
    whenever every delay is at most ``G``.
    """
    s_cp = np.asarray(s_cp, dtype=complex)
    MN = ch.MN
    if s_cp.shape != (G + MN,):
        raise ValueError(f"expected {G + MN} samples, got {s_cp.shape}")
    ch.check_cp(G)
    n = np.arange(-G, MN)
    r = np.zeros(G + MN, dtype=complex)
    for pth in ch.paths:
        delayed = np.zeros(G + MN, dtype=complex)
        delayed[pth.delay:] = s_cp[:G + MN - pth.delay]
        r += pth.gain * np.exp(2j * np.pi * pth.doppler * n / MN) * delayed
    if N0 > 0:
        if rng is None:
            raise ValueError("an rng is required when N0 > 0")
        r += awgn(G + MN, N0, rng)
    return r


def dense_h(ch: ChannelRealization) -> np.ndarray:
    """Time-domain channel matrix ``sum_i h_i Lambda^(nu_i) Pi^(l_i)``."""
    MN = ch.MN
    n = np.arange(MN)
    eye = np.eye(MN, dtype=complex)
    H = np.zeros((MN, MN), dtype=complex)
    for pth in ch.paths:
        ramp = np.exp(2j * np.pi * pth.doppler * n / MN)
        H += pth.gain * ramp[:, None] * np.roll(eye, pth.delay, axis=0)
    return H
