"""A short BER sweep through the harness, the same path `gocdm-sim ber` takes.

Run: python demos/04_ber_sweep.py
The full-size sweeps are in demos/configs; for example
    gocdm-sim ber --config demos/configs/uwa_ber.yaml --out uwa_ber.csv
"""

from pathlib import Path

from gocdm.harness import ExperimentConfig, ber_csv, run_ber

cfg = ExperimentConfig.load(Path(__file__).parent / "configs" / "uwa_ber.yaml")
# Shrink the run so the demo finishes in well under a minute.
cfg = ExperimentConfig.from_dict({
    "profile": cfg.profile,
    "waveforms": [{"mode": w.mode.value, "M": w.M, "N": w.N} for w in cfg.waveforms],
    "detectors": [{"kind": "MMSE"}],
    "ebn0_db": [4, 8, 12],
    "blocks": 200,
    "seed": cfg.seed,
})
print(ber_csv(run_ber(cfg)), end="")
