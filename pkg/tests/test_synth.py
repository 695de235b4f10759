import numpy as np
import pytest

from ppg2ecg.errors import InvalidConfig
from ppg2ecg.spectral import dct_forward
from ppg2ecg.synth import (
    BAND,
    GRID,
    CouplingModel,
    SynthConfig,
    coupling_matrix,
    ecg_template,
    generate,
    idct_at,
    ppg_template,
)


def test_same_seed_same_session():
    cfg = SynthConfig(seed=9, duration_s=30.0, noise_std=0.05, ppg_delay=20)
    (a, ta), (b, tb) = generate(cfg), generate(cfg)
    assert a.ppg.samples.tobytes() == b.ppg.samples.tobytes()
    assert a.ecg.samples.tobytes() == b.ecg.samples.tobytes()
    assert np.array_equal(ta.r_peaks, tb.r_peaks)
    c, _ = generate(SynthConfig(seed=10, duration_s=30.0, noise_std=0.05, ppg_delay=20))
    assert not np.array_equal(a.ppg.samples, c.ppg.samples)


def test_fixed_rate_gives_600_cycles():
    s, truth = generate(SynthConfig(hr_jitter=0.0, seed=0))
    assert len(s.ecg) == 480 * 300
    assert np.all(np.diff(truth.r_peaks) == 240)
    assert truth.n_cycles == 600


def test_truth_fields(clean_session):
    s, truth = clean_session
    assert truth.ppg_delay == 60
    assert truth.F_true.shape == (8, BAND)
    assert len(truth.r_peaks) - 2 <= truth.n_cycles <= len(truth.r_peaks)
    assert np.all(np.diff(truth.r_peaks) > 0)
    # onsets are R peaks moved by the injected delay
    assert set((truth.r_peaks + 60).tolist()) >= set(truth.onsets[truth.onsets >= 60 + truth.r_peaks[0]].tolist())
    assert s.age is not None and s.weight is not None


def test_ecg_peaks_at_r(clean_session):
    s, truth = clean_session
    x = s.ecg.samples
    for r in truth.r_peaks[1:-1]:
        seg = x[r - 20:r + 21]
        assert np.argmax(seg) == 20


def test_coupled_cycles_are_exactly_linear():
    rng = np.random.default_rng(0)
    model = CouplingModel(8, 0.15, 0.2, rng)
    for _ in range(20):
        x, y = model.draw(rng)
        assert x[0] == 0 and y[0] == pytest.approx(0, abs=1e-12)
        assert np.linalg.norm(x) == pytest.approx(np.sqrt(GRID), rel=1e-12)
        assert np.linalg.norm(y) == pytest.approx(np.sqrt(GRID), rel=1e-12)
        assert np.allclose(y[:BAND], x[:8] @ model.F, atol=1e-12)
        assert not y[BAND:].any()


def test_coupling_matrix_is_seeded():
    a = coupling_matrix(rng=np.random.default_rng(3))
    b = coupling_matrix(rng=np.random.default_rng(3))
    assert np.array_equal(a, b) and a.shape == (8, BAND)


def test_idct_at_matches_grid_inverse(rng):
    c = rng.standard_normal(GRID)
    from ppg2ecg.spectral import dct_inverse

    assert np.allclose(idct_at(c, np.arange(GRID)), dct_inverse(c), atol=1e-10)


def test_templates_have_landmarks_at_phase_zero():
    p = np.arange(GRID, dtype=float)
    assert np.argmax(ecg_template(p)) == 0
    ppg = ppg_template(np.arange(-30, 31, dtype=float))
    assert np.argmin(ppg) == 30


def test_template_coupling_repeats_shapes():
    s, truth = generate(SynthConfig(coupling="template", hr_jitter=0.0, duration_s=20.0))
    r = truth.r_peaks
    x = s.ecg.samples - s.ecg.samples.mean()
    assert truth.F_true is None
    assert np.corrcoef(x[r[1]:r[2]], x[r[2]:r[3]])[0, 1] > 0.99


@pytest.mark.parametrize(
    "bad",
    [
        dict(hr_jitter=0.3),
        dict(fs=0.0),
        dict(coupling="nonlinear"),
        dict(noise_std=-1.0),
        dict(n_couple=2),
        dict(ppg_variation=0.0),
        dict(ppg_delay=-1),
        dict(hr_mean=400.0),
    ],
)
def test_invalid_config(bad):
    with pytest.raises(InvalidConfig):
        SynthConfig(**bad)


def test_config_dict_round_trip():
    cfg = SynthConfig(seed=3, artifact_intervals=[(10, 20)])
    assert SynthConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(InvalidConfig):
        SynthConfig.from_dict({"bogus": 1})
