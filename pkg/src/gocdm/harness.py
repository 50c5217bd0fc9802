"""Monte Carlo drivers: PAPR CCDF, BER sweeps and channel dumps.

All randomness flows from one master seed.  Trial ``t`` at grid point ``i``
uses ``SeedSequence(seed, spawn_key=(i, t))`` for its channel, bits and noise,
and every waveform replays the same streams (common random numbers), so
waveform comparisons are paired.
"""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from .channel import ChannelProfile, apply_channel_cp, draw_channel, load_profile
from .detect import MpConfig, mmse_equalize, mp_detect
from .gf_channel import dense_heff, sparse_heff
from .waveform import Constellation, FrameParams, Mode, constellation, modulate, rx_front, papr

log = logging.getLogger(__name__)

# Block length and fractional-Doppler truncation used with each built-in profile.
PROFILE_DEFAULTS = {
    "uwa_table2": {"MN": 128, "B": 10, "M": 8},
    "eva_table4": {"MN": 256, "B": 5, "M": 8},
}


def fmt(x: float) -> str:
    return f"{x:.9g}"


@dataclass(frozen=True)
class WaveformSpec:
    mode: Mode
    M: int = 1
    N: int = 1

    @classmethod
    def from_dict(cls, d: dict) -> "WaveformSpec":
        mode = Mode(str(d["mode"]).upper())
        M, N = int(d.get("M", 1)), int(d.get("N", 1))
        if mode is Mode.SC and "MN" in d:
            M, N = int(d["MN"]), 1
        return cls(mode, M, N)

    def frame(self, G: int = 0, Ts: float = 1.0, c: Constellation | None = None) -> FrameParams:
        return FrameParams(self.mode, self.M, self.N, G, Ts, c if c is not None else constellation(4))

    @property
    def label(self) -> str:
        return self.frame().label


@dataclass(frozen=True)
class DetectorSpec:
    kind: str  # "MP" or "MMSE"
    mp: MpConfig = field(default_factory=MpConfig)
    sigma2_inflation: float = 0.0

    @classmethod
    def from_dict(cls, d: dict) -> "DetectorSpec":
        kind = str(d["kind"]).upper()
        if kind not in ("MP", "MMSE"):
            raise ValueError(f"unknown detector {kind!r}")
        keys = ("damping", "max_iter", "gamma", "epsilon", "B")
        mp = MpConfig(**{k: d[k] for k in keys if k in d})
        return cls(kind, mp, float(d.get("sigma2_inflation", 0.0)))

    @property
    def label(self) -> str:
        """Short name; knobs that differ from the defaults are spelled out so labels stay unique."""
        if self.kind == "MMSE":
            return "MMSE"
        parts = [f"B={self.mp.B}"]
        base = MpConfig()
        for name in ("damping", "max_iter", "gamma", "epsilon"):
            if getattr(self.mp, name) != getattr(base, name):
                parts.append(f"{name}={fmt(getattr(self.mp, name))}")
        if self.sigma2_inflation:
            parts.append(f"inflation={fmt(self.sigma2_inflation)}")
        return f"MP({','.join(parts)})"


@dataclass(frozen=True)
class ExperimentConfig:
    waveforms: tuple[WaveformSpec, ...]
    profile: str | dict | None = None
    detectors: tuple[DetectorSpec, ...] = (DetectorSpec("MMSE"),)
    ebn0_db: tuple[float, ...] = (10.0,)
    blocks: int = 100
    seed: int = 0
    out: str | None = None
    order: int = 4
    papr_blocks: int = 100_000
    papr_step_db: float = 0.1
    papr_max_db: float = 14.0
    threads: int = 1

    def __post_init__(self):
        if not self.waveforms:
            raise ValueError("no waveforms configured")
        if not self.ebn0_db:
            raise ValueError("Eb/N0 grid is empty")
        if self.blocks < 1 or self.papr_blocks < 1:
            raise ValueError("block counts must be positive")
        labels = [d.label for d in self.detectors]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate detector configurations: {labels}")
        wlabels = [w.label for w in self.waveforms]
        if len(set(wlabels)) != len(wlabels):
            raise ValueError(f"duplicate waveforms: {wlabels}")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return cls(
            waveforms=tuple(WaveformSpec.from_dict(w) for w in d["waveforms"]),
            profile=d.get("profile"),
            detectors=tuple(DetectorSpec.from_dict(x) for x in d.get("detectors", [{"kind": "MMSE"}])),
            ebn0_db=tuple(float(v) for v in d.get("ebn0_db", [10.0])),
            blocks=int(d.get("blocks", 100)),
            seed=int(d.get("seed", 0)),
            out=d.get("out"),
            order=int(d.get("constellation", 4)),
            papr_blocks=int(d.get("papr_blocks", 100_000)),
            papr_step_db=float(d.get("papr_step_db", 0.1)),
            papr_max_db=float(d.get("papr_max_db", 14.0)),
            threads=int(d.get("threads", 1)),
        )

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(yaml.safe_load(fh))

    @property
    def constellation(self) -> Constellation:
        return constellation(self.order)

    def channel_profile(self) -> ChannelProfile:
        if self.profile is None:
            raise ValueError("experiment has no channel profile")
        return load_profile(self.profile)

    def frames(self) -> list[FrameParams]:
        """Frames with CP and sampling interval taken from the profile."""
        if self.profile is None:
            return [w.frame(c=self.constellation) for w in self.waveforms]
        prof = self.channel_profile()
        G = prof.cp_length
        frames = [w.frame(G, prof.Ts, self.constellation) for w in self.waveforms]
        for f in frames:
            if prof.delay_samples().max() > f.G:
                raise ValueError(f"{f.label}: profile delay exceeds CP length {f.G}")
            if prof.delay_samples().max() >= f.MN:
                raise ValueError(f"{f.label}: profile delay exceeds the block length")
        return frames


@dataclass(frozen=True)
class TrialRecord:
    seed: tuple[int, ...]
    waveform: str
    detector: str
    ebn0_db: float
    bit_errors: int
    bits: int
    papr: float
    iterations: int

    def __post_init__(self):
        if not 0 <= self.bit_errors <= self.bits:
            raise ValueError("bit errors out of range")


def ebn0_to_n0(ebn0_db: float, p: FrameParams) -> float:
    """Noise variance for a target Eb/N0, charging the CP to the bit energy."""
    eb = (p.MN + p.G) / (p.MN * p.constellation.bits_per_symbol)
    return eb / 10.0 ** (ebn0_db / 10.0)


def trial_streams(master: int, point: int, trial: int) -> tuple[np.random.Generator, ...]:
    """Fresh (channel, bits, noise) generators; same output on every call."""
    return tuple(
        np.random.default_rng(np.random.SeedSequence(master, spawn_key=(point, trial, j)))
        for j in range(3)
    )


# --------------------------------------------------------------------------- PAPR


def papr_samples(p: FrameParams, blocks: int, rng: np.random.Generator, chunk: int = 8192) -> np.ndarray:
    """PAPR in dB of ``blocks`` random blocks (CP excluded)."""
    from .waveform import transform
    from .transforms import INVERSE

    out = np.empty(blocks)
    c = p.constellation
    for start in range(0, blocks, chunk):
        n = min(chunk, blocks - start)
        x = c.points[rng.integers(0, c.order, size=(n, p.MN))]
        s = transform(p, x, INVERSE)
        out[start:start + n] = 10 * np.log10(papr(s))
    return out


def ccdf(samples_db: np.ndarray, grid_db: np.ndarray) -> np.ndarray:
    """Empirical ``Pr(PAPR > t)`` on a threshold grid."""
    srt = np.sort(samples_db)
    return 1.0 - np.searchsorted(srt, grid_db, side="right") / srt.size


def run_papr(cfg: ExperimentConfig) -> list[tuple[str, float, float]]:
    grid = np.round(np.arange(0.0, cfg.papr_max_db + 1e-9, cfg.papr_step_db), 10)
    rows = []
    for w_idx, p in enumerate(cfg.frames()):
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(w_idx,)))
        prob = ccdf(papr_samples(p, cfg.papr_blocks, rng), grid)
        rows.extend((p.label, float(t), float(pr)) for t, pr in zip(grid, prob))
    return rows


def papr_csv(rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["waveform", "papr0_db", "prob"])
    for label, t, pr in rows:
        wr.writerow([label, fmt(t), fmt(pr)])
    return buf.getvalue()


# --------------------------------------------------------------------------- BER


def _count_bit_errors(c: Constellation, sent: np.ndarray, got: np.ndarray) -> int:
    return int(np.sum(c.labels[sent] != c.labels[got]))


def run_trial(cfg: ExperimentConfig, prof: ChannelProfile, frames: Sequence[FrameParams],
              point: int, trial: int) -> list[TrialRecord]:
    """One block per waveform through one channel draw, detected by every detector."""
    ebn0 = cfg.ebn0_db[point]
    records = []
    for p in frames:
        ch_rng, bit_rng, noise_rng = trial_streams(cfg.seed, point, trial)
        c = p.constellation
        ch = draw_channel(prof, p, ch_rng)
        idx = bit_rng.integers(0, c.order, p.MN)
        tx = modulate(p, c.points[idx])
        N0 = ebn0_to_n0(ebn0, p)
        y = rx_front(p, apply_channel_cp(ch, tx.s_cp, p.G, N0, noise_rng))
        block_papr = papr(tx.s)
        H = None
        for det in cfg.detectors:
            if det.kind == "MMSE":
                if H is None:
                    H = dense_heff(p, ch)
                est, iters = mmse_equalize(y, H, N0, c), 0
            else:
                mp = replace(det.mp, sigma2=N0 + det.sigma2_inflation)
                res = mp_detect(y, sparse_heff(p, ch, det.mp.B), c, mp)
                est, iters = res.indices, res.iterations
            records.append(TrialRecord(
                seed=(cfg.seed, point, trial), waveform=p.label, detector=det.label, ebn0_db=ebn0,
                bit_errors=_count_bit_errors(c, idx, est), bits=p.MN * c.bits_per_symbol,
                papr=block_papr, iterations=iters,
            ))
    return records


@dataclass(frozen=True)
class BerRow:
    waveform: str
    detector: str
    ebn0_db: float
    bit_errors: int
    bits: int
    blocks: int
    mean_iterations: float

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits


def aggregate(records: Sequence[TrialRecord], cfg: ExperimentConfig, frames) -> list[BerRow]:
    acc: dict[tuple, list] = {}
    for r in records:
        key = (r.waveform, r.detector, r.ebn0_db)
        e = acc.setdefault(key, [0, 0, 0, 0])
        e[0] += r.bit_errors
        e[1] += r.bits
        e[2] += 1
        e[3] += r.iterations
    rows = []
    for p in frames:
        for det in cfg.detectors:
            for ebn0 in cfg.ebn0_db:
                e = acc[(p.label, det.label, ebn0)]
                rows.append(BerRow(p.label, det.label, ebn0, e[0], e[1], e[2], e[3] / e[2]))
    return rows


def run_ber(cfg: ExperimentConfig, threads: int | None = None) -> list[BerRow]:
    prof = cfg.channel_profile()
    frames = cfg.frames()
    threads = threads or cfg.threads
    jobs = [(i, t) for i in range(len(cfg.ebn0_db)) for t in range(cfg.blocks)]
    log.info("BER sweep: %d waveforms x %d points x %d blocks", len(frames), len(cfg.ebn0_db), cfg.blocks)

    def work(job):
        return run_trial(cfg, prof, frames, *job)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            per_job = list(pool.map(work, jobs))  # map preserves job order
    else:
        per_job = [work(j) for j in jobs]
    records = [r for recs in per_job for r in recs]
    return aggregate(records, cfg, frames)


def ber_csv(rows: Sequence[BerRow]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["waveform", "detector", "ebn0_db", "ber", "blocks", "mean_iterations"])
    for r in rows:
        wr.writerow([r.waveform, r.detector, fmt(r.ebn0_db), fmt(r.ber), r.blocks, fmt(r.mean_iterations)])
    return buf.getvalue()


# --------------------------------------------------------------------------- chan-dump


def default_frame(profile: ChannelProfile, M: int | None = None, N: int | None = None) -> FrameParams:
    d = PROFILE_DEFAULTS.get(profile.name, {"MN": 128, "M": 8})
    M = M if M is not None else d["M"]
    N = N if N is not None else d["MN"] // M
    return FrameParams(Mode.GOCDM, M, N, profile.cp_length, profile.Ts)


def chan_dump(profile: ChannelProfile, p: FrameParams, seed: int, B: int | None = None) -> tuple[str, str]:
    """Draw one realization; return (sparse-channel CSV, path-table CSV)."""
    if B is None:
        B = PROFILE_DEFAULTS.get(profile.name, {}).get("B", 0)
    ch = draw_channel(profile, p, np.random.default_rng(seed))
    sg = sparse_heff(p, ch, B)

    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["p", "group", "d", "real", "imag"])
    for row, ell, d, v in sg.rows():
        wr.writerow([row, ell, d, fmt(v.real), fmt(v.imag)])

    pbuf = io.StringIO()
    wr = csv.writer(pbuf, lineterminator="\n")
    wr.writerow(["path", "gain_real", "gain_imag", "delay", "k", "kappa"])
    for i, pth in enumerate(ch.paths):
        wr.writerow([i, fmt(pth.gain.real), fmt(pth.gain.imag), pth.delay, pth.k, fmt(pth.kappa)])
    return buf.getvalue(), pbuf.getvalue()
