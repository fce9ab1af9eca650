import numpy as np
import pytest

from rotorcm import simgen
from rotorcm.features import wpt_energies
from rotorcm.simgen import ClassSignature, ConditionClass, ConfigError, SignalConfig


def silent_config(**kw):
    """All harmonic amplitudes zero, no noise."""
    sigs = {c: ClassSignature((0, 0, 0, 0, 0)) for c in ConditionClass}
    return SignalConfig(noise_sigma_g=0.0, signatures=sigs, **kw)


def single_tone_config(amp=0.5):
    """Normal class carries only the fundamental at 120 Hz."""
    sigs = {c: ClassSignature((amp, 0, 0, 0, 0)) for c in ConditionClass}
    return SignalConfig(noise_sigma_g=0.0, trial_duration_s=10.0, signatures=sigs)


def test_zero_amplitude_zero_noise_gives_zero_streams():
    trial = simgen.synthesize_trial(silent_config(), ConditionClass.NORMAL, 1)
    assert np.all(trial.data == 0.0)


def test_pure_fundamental_dft_peak():
    # DFT oracle: a pure sinusoid of amplitude a over a bin-aligned length
    # has one-sided peak magnitude N*a/2 at the bin nearest 120 Hz.
    amp = 0.5
    cfg = single_tone_config(amp)
    trial = simgen.synthesize_trial(cfg, ConditionClass.NORMAL, 3)
    n = trial.n_samples
    x = trial.data[0, 0]  # center sensor, x axis (unit axis gain)
    mag = np.abs(np.fft.rfft(x))
    freqs = np.fft.rfftfreq(n, d=1 / cfg.sample_rate_hz)
    peak = int(np.argmax(mag))
    assert freqs[peak] == pytest.approx(120.0, abs=freqs[1])
    assert mag[peak] == pytest.approx(n * amp / 2, rel=1e-9)
    others = np.delete(mag, peak)
    assert others.max() < 1e-6 * mag[peak]


def test_determinism_bit_identical():
    cfg = SignalConfig(trial_duration_s=2.0)
    a = simgen.synthesize_trial(cfg, ConditionClass.D3_CLIP_HIGH, 17)
    b = simgen.synthesize_trial(cfg, ConditionClass.D3_CLIP_HIGH, 17)
    assert a.data.tobytes() == b.data.tobytes()


def test_noise_prefix_stable_under_duration_change():
    short = SignalConfig(trial_duration_s=2.0)
    long = SignalConfig(trial_duration_s=4.0)
    a = simgen.synthesize_trial(short, ConditionClass.NORMAL, 5)
    b = simgen.synthesize_trial(long, ConditionClass.NORMAL, 5)
    # Sinusoid part is identical on the shared prefix; so must be the noise.
    assert np.array_equal(a.data, b.data[:, :, : a.n_samples])


def test_campaign_composition():
    cfg = SignalConfig(trial_duration_s=1.0)
    trials = simgen.synthesize_campaign(cfg)
    assert len(trials) == 27
    hist = {}
    for t in trials:
        hist[t.condition] = hist.get(t.condition, 0) + 1
    assert hist == simgen.CAMPAIGN_COMPOSITION
    assert [t.trial_id for t in trials] == list(range(27))


def test_campaign_stream_lengths():
    cfg = SignalConfig(trial_duration_s=10.0)
    trials = simgen.synthesize_campaign(cfg)
    assert all(t.data.shape == (2, 3, 8000) for t in trials)


def test_energy_matches_analytic_sum():
    cfg = SignalConfig(noise_sigma_g=0.0, trial_duration_s=5.0)
    for cls in ConditionClass:
        trial = simgen.synthesize_trial(cfg, cls, 9)
        energy = float(np.sum(trial.data**2))
        expected = simgen.analytic_signal_energy(cfg, cls)
        assert energy == pytest.approx(expected, rel=1e-6)


def test_outer_sensor_amplifies_defect_components():
    cfg = SignalConfig(noise_sigma_g=0.0, trial_duration_s=2.0)
    trial = simgen.synthesize_trial(cfg, ConditionClass.D1_CRACK_HIGH, 0)
    # Sideband energy is stronger on the outer sensor.
    n = trial.n_samples
    freqs = np.fft.rfftfreq(n, d=1 / cfg.sample_rate_hz)
    sb_bin = int(np.argmin(np.abs(freqs - 128.0)))
    center = np.abs(np.fft.rfft(trial.data[0, 0]))[sb_bin]
    outer = np.abs(np.fft.rfft(trial.data[1, 0]))[sb_bin]
    assert outer > center * 1.2


def test_class_separability_wpt_profiles():
    cfg = SignalConfig(noise_sigma_g=0.0, trial_duration_s=2.0)
    profiles = {}
    for cls in ConditionClass:
        trial = simgen.synthesize_trial(cfg, cls, 0)
        profiles[cls] = np.concatenate(
            [wpt_energies(trial.data[s, a])[4:] for s in range(2) for a in range(3)]
        )
    classes = list(ConditionClass)
    for i, a in enumerate(classes):
        for b in classes[i + 1 :]:
            assert np.linalg.norm(profiles[a] - profiles[b]) > 0


@pytest.mark.parametrize(
    "kwargs,fieldname",
    [
        (dict(sample_rate_hz=-1.0), "sample_rate_hz"),
        (dict(trial_duration_s=0.0), "trial_duration_s"),
        (dict(trial_duration_s=1.0001), "trial_duration_s"),
        (dict(rotor_freq_hz=500.0), "rotor_freq_hz"),
        (dict(noise_sigma_g=-0.1), "noise_sigma_g"),
    ],
)
def test_config_errors_name_field(kwargs, fieldname):
    cfg = SignalConfig(**kwargs)
    with pytest.raises(ConfigError, match=fieldname):
        simgen.synthesize_trial(cfg, ConditionClass.NORMAL, 0)


def test_trial_csv_roundtrip(tmp_path):
    cfg = SignalConfig(trial_duration_s=1.0)
    trial = simgen.synthesize_trial(cfg, ConditionClass.NORMAL, 0)
    path = tmp_path / "trial.csv"
    simgen.write_trial_csv(trial, path)
    streams = simgen.read_trial_csv(path)
    assert np.array_equal(streams[1], trial.data[0].T)
    assert np.array_equal(streams[2], trial.data[1].T)


def test_manifest(tmp_path):
    import json

    cfg = SignalConfig(trial_duration_s=1.0)
    trials = simgen.synthesize_campaign(cfg)
    path = tmp_path / "manifest.json"
    simgen.write_campaign_manifest(trials, path)
    manifest = json.loads(path.read_text())
    assert len(manifest) == 27
    assert manifest["0"] == "NORMAL"
