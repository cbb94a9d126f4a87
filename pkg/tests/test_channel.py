import numpy as np
import pytest

from chaoscodes.channel import avg_symbol_energy, awgn, sample_source, snr_to_sigma2, trial_rng
from chaoscodes.codes import CodeSpec, encode


def test_source_reproducible():
    assert sample_source(1, np.random.default_rng(42)) == sample_source(1, np.random.default_rng(42))
    assert trial_rng(7, 3).random() == trial_rng(7, 3).random()
    assert trial_rng(7, 3).random() != trial_rng(7, 4).random()


def test_source_moments():
    x = sample_source(1_000_000, np.random.default_rng(0))
    assert abs(x.mean()) < 0.005
    assert abs(x.var() / (1 / 3) - 1) < 0.02
    assert x.min() >= -1 and x.max() <= 1


def test_awgn_noiseless_and_reproducible():
    cw = encode(CodeSpec("tent", 5), [0.3])
    assert np.array_equal(awgn(cw, 0.0, np.random.default_rng(1)).received, cw.symbols)
    a = awgn(cw, 0.1, np.random.default_rng(2)).received
    b = awgn(cw, 0.1, np.random.default_rng(2)).received
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        awgn(cw, -1.0, np.random.default_rng(2))


def test_awgn_variance_and_independence():
    obs = awgn(np.zeros(1_000_000), 0.25, np.random.default_rng(4))
    z = obs.received
    assert obs.sigma2 == 0.25
    assert abs(z.var() / 0.25 - 1) < 0.01
    assert abs(np.corrcoef(z[:-1], z[1:])[0, 1]) < 0.01


def test_energy_uncoded_tent():
    assert avg_symbol_energy(CodeSpec("tent", 1)) == pytest.approx(1 / 3, rel=0.02)


def test_energy_deterministic_and_stable():
    spec = CodeSpec("tent", 11)
    e = avg_symbol_energy(spec)
    assert 0 < e <= 1
    assert avg_symbol_energy(spec, 5) == avg_symbol_energy(spec, 5)
    bt = CodeSpec("baker-turbo", 3)
    vals = [avg_symbol_energy(bt, s) for s in (1, 2, 3)]
    assert all(0 < v <= 1 for v in vals)
    assert max(vals) / min(vals) - 1 < 0.02


@pytest.mark.parametrize("snr, factor", [(0, 1.0), (10, 0.1), (-10, 10.0)])
def test_snr_to_sigma2(snr, factor):
    spec = CodeSpec("tent-turbo", 6, puncture_systematic=True)
    assert snr_to_sigma2(snr, spec) == pytest.approx(avg_symbol_energy(spec) * factor, rel=1e-12)


def test_infinite_snr_is_noiseless():
    assert snr_to_sigma2(float("inf"), CodeSpec("tent", 3)) == 0.0
