"""Synthetic two-sensor vibration streams for seven blade conditions.

Each trial is a deterministic sum of rotor harmonics, class-specific
sidebands around the rotor frequency, and seeded Gaussian noise.  Defect
classes perturb the harmonic amplitudes and add a sideband pair; the
outer sensor (mounted on the arm carrying the blade) sees the defect
components amplified, so defect information is stronger on sensor 2.
"""

import csv
import json
import math
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path

import numpy as np

N_SENSORS = 2
N_AXES = 3
CENTER_SENSOR = 1
OUTER_SENSOR = 2

# Per-axis response of the mounted accelerometers: relative gain and a
# fixed phase offset per harmonic index, so the three axes carry the same
# spectral content at different levels.
AXIS_GAINS = (1.0, 0.8, 0.6)


class ConditionClass(IntEnum):
    NORMAL = 0
    D1_CRACK_HIGH = 1
    D2_CRACK_LOW = 2
    D3_CLIP_HIGH = 3
    D4_CLIP_LOW = 4
    D5_LATERAL_HIGH = 5
    D6_LATERAL_LOW = 6


# 27-trial campaign composition: 8 normal, 4 of defect 1, 3 of each other.
CAMPAIGN_COMPOSITION = {
    ConditionClass.NORMAL: 8,
    ConditionClass.D1_CRACK_HIGH: 4,
    ConditionClass.D2_CRACK_LOW: 3,
    ConditionClass.D3_CLIP_HIGH: 3,
    ConditionClass.D4_CLIP_LOW: 3,
    ConditionClass.D5_LATERAL_HIGH: 3,
    ConditionClass.D6_LATERAL_LOW: 3,
}


class ConfigError(ValueError):
    """Invalid signal configuration; message names the offending field."""


@dataclass(frozen=True)
class ClassSignature:
    """Spectral fingerprint of one blade condition.

    harmonics: absolute amplitudes (g) of rotor harmonics 1..5.
    sideband pair sits at rotor_freq +/- sideband_offset_hz.
    outer_gain multiplies the defect components (deviation from the
    normal harmonics plus the sidebands) on the outer sensor.
    """

    harmonics: tuple[float, float, float, float, float]
    sideband_offset_hz: float = 0.0
    sideband_amp_g: float = 0.0
    outer_gain: float = 1.6


_NORMAL_HARMONICS = (0.50, 0.20, 0.10, 0.0, 0.0)

DEFAULT_SIGNATURES: dict[ConditionClass, ClassSignature] = {
    ConditionClass.NORMAL: ClassSignature(_NORMAL_HARMONICS),
    ConditionClass.D1_CRACK_HIGH: ClassSignature((0.65, 0.30, 0.15, 0.0, 0.0), 8.0, 0.20),
    ConditionClass.D2_CRACK_LOW: ClassSignature((0.575, 0.25, 0.125, 0.0, 0.0), 8.0, 0.10),
    ConditionClass.D3_CLIP_HIGH: ClassSignature((0.35, 0.32, 0.10, 0.0, 0.0), 12.0, 0.18),
    ConditionClass.D4_CLIP_LOW: ClassSignature((0.425, 0.26, 0.10, 0.0, 0.0), 12.0, 0.09),
    ConditionClass.D5_LATERAL_HIGH: ClassSignature((0.60, 0.12, 0.22, 0.0, 0.0), 16.0, 0.16),
    ConditionClass.D6_LATERAL_LOW: ClassSignature((0.55, 0.16, 0.16, 0.0, 0.0), 16.0, 0.08),
}


@dataclass(frozen=True)
class SignalConfig:
    sample_rate_hz: float = 800.0
    trial_duration_s: float = 60.0
    rotor_freq_hz: float = 120.0
    noise_sigma_g: float = 0.02
    seed: int = 42
    signatures: dict[ConditionClass, ClassSignature] = field(
        default_factory=lambda: dict(DEFAULT_SIGNATURES)
    )

    @property
    def n_samples(self) -> int:
        return int(round(self.sample_rate_hz * self.trial_duration_s))

    def validate(self) -> None:
        if self.sample_rate_hz <= 0:
            raise ConfigError("sample_rate_hz must be positive")
        if self.trial_duration_s <= 0:
            raise ConfigError("trial_duration_s must be positive")
        n = self.sample_rate_hz * self.trial_duration_s
        if abs(n - round(n)) > 1e-9:
            raise ConfigError("trial_duration_s: sample_rate_hz * trial_duration_s must be an integer sample count")
        if not 0 < self.rotor_freq_hz < self.sample_rate_hz / 2:
            raise ConfigError("rotor_freq_hz must lie below the Nyquist frequency")
        if self.noise_sigma_g < 0:
            raise ConfigError("noise_sigma_g must be non-negative")
        if set(self.signatures) != set(ConditionClass):
            raise ConfigError("signatures must cover all seven condition classes")
        for cls, sig in self.signatures.items():
            if any(a < 0 for a in sig.harmonics):
                raise ConfigError(f"signatures[{cls.name}].harmonics must be non-negative")
            if sig.sideband_amp_g < 0:
                raise ConfigError(f"signatures[{cls.name}].sideband_amp_g must be non-negative")
            if sig.outer_gain < 0:
                raise ConfigError(f"signatures[{cls.name}].outer_gain must be non-negative")


@dataclass
class Trial:
    trial_id: int
    condition: ConditionClass
    data: np.ndarray  # shape (2 sensors, 3 axes, n_samples), acceleration in g
    sample_rate_hz: float

    @property
    def n_samples(self) -> int:
        return self.data.shape[2]


def _component_table(cfg: SignalConfig, condition: ConditionClass, sensor: int):
    """List of (freq_hz, amplitude_g) sinusoid components for one sensor."""
    sig = cfg.signatures[condition]
    normal = cfg.signatures[ConditionClass.NORMAL].harmonics
    gain = sig.outer_gain if sensor == OUTER_SENSOR else 1.0
    comps = []
    for h, (amp, base) in enumerate(zip(sig.harmonics, normal), start=1):
        eff = base + gain * (amp - base)
        if eff > 0:
            comps.append((h * cfg.rotor_freq_hz, eff))
    if sig.sideband_amp_g > 0 and sig.sideband_offset_hz > 0:
        sb = gain * sig.sideband_amp_g
        comps.append((cfg.rotor_freq_hz - sig.sideband_offset_hz, sb))
        comps.append((cfg.rotor_freq_hz + sig.sideband_offset_hz, sb))
    return comps


def _phase(freq_index: int, axis: int) -> float:
    # Fixed, deterministic spread so axes are not simply scaled copies.
    return 2.0 * math.pi * ((freq_index * 0.17 + axis * 0.31) % 1.0)


def synthesize_trial(cfg: SignalConfig, condition: ConditionClass, trial_seed: int) -> Trial:
    """Deterministic (cfg, condition, trial_seed) -> 2x3xN stream in g."""
    cfg.validate()
    n = cfg.n_samples
    t = np.arange(n) / cfg.sample_rate_hz
    data = np.zeros((N_SENSORS, N_AXES, n))
    for s_idx, sensor in enumerate((CENTER_SENSOR, OUTER_SENSOR)):
        comps = _component_table(cfg, condition, sensor)
        for axis in range(N_AXES):
            sigacc = np.zeros(n)
            for k, (freq, amp) in enumerate(comps):
                sigacc += amp * AXIS_GAINS[axis] * np.sin(
                    2.0 * math.pi * freq * t + _phase(k, axis)
                )
            if cfg.noise_sigma_g > 0:
                # Dedicated stream per (trial, sensor, axis): shortening the
                # duration only truncates the noise, never reshuffles it.
                rng = np.random.default_rng([trial_seed & 0xFFFFFFFFFFFFFFFF, sensor, axis])
                sigacc += cfg.noise_sigma_g * rng.standard_normal(n)
            data[s_idx, axis] = sigacc
    return Trial(trial_id=0, condition=condition, data=data, sample_rate_hz=cfg.sample_rate_hz)


def analytic_signal_energy(cfg: SignalConfig, condition: ConditionClass) -> float:
    """Noise-free total energy sum(x^2) over all sensors/axes of one trial."""
    n = cfg.n_samples
    total = 0.0
    for sensor in (CENTER_SENSOR, OUTER_SENSOR):
        comps = _component_table(cfg, condition, sensor)
        for axis in range(N_AXES):
            total += sum((amp * AXIS_GAINS[axis]) ** 2 / 2.0 * n for _, amp in comps)
    return total


def campaign_schedule() -> list[ConditionClass]:
    """Condition of each of the 27 trials, in trial order."""
    out = []
    for cls, count in CAMPAIGN_COMPOSITION.items():
        out.extend([cls] * count)
    return out


def synthesize_campaign(cfg: SignalConfig) -> list[Trial]:
    """27 trials (8 normal, 4 D1, 3 each D2..D6); trial seed = cfg.seed + index."""
    cfg.validate()
    trials = []
    for i, cls in enumerate(campaign_schedule()):
        trial = synthesize_trial(cfg, cls, cfg.seed + i)
        trial.trial_id = i
        trials.append(trial)
    return trials


def write_trial_csv(trial: Trial, path: str | Path) -> None:
    """Export one trial as rows of t_us,sensor_id,ax_g,ay_g,az_g."""
    t_us = np.round(np.arange(trial.n_samples) / trial.sample_rate_hz * 1e6).astype(np.int64)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_us", "sensor_id", "ax_g", "ay_g", "az_g"])
        for i in range(trial.n_samples):
            for s_idx, sensor in enumerate((CENTER_SENSOR, OUTER_SENSOR)):
                w.writerow(
                    [t_us[i], sensor]
                    + [repr(float(trial.data[s_idx, a, i])) for a in range(N_AXES)]
                )


def read_trial_csv(path: str | Path, sample_rate_hz: float = 800.0) -> dict[int, np.ndarray]:
    """Read a trial CSV back into per-sensor (n, 3) arrays in g."""
    per_sensor: dict[int, list[list[float]]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            sensor = int(row["sensor_id"])
            per_sensor.setdefault(sensor, []).append(
                [float(row["ax_g"]), float(row["ay_g"]), float(row["az_g"])]
            )
    return {s: np.array(rows) for s, rows in per_sensor.items()}


def write_campaign_manifest(trials: list[Trial], path: str | Path) -> None:
    manifest = {str(t.trial_id): t.condition.name for t in trials}
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
