import numpy as np
import pytest

from deppart.partition import canonical_labels, is_compatible
from deppart.synth import SynthConfig, generate, generate_replicates, lag1_autocorrelation


def test_sim1_shapes_and_truth():
    d = generate(SynthConfig.sim1(0.5), 0)
    assert d.Y.shape == (50, 5) and d.labels.shape == (5, 50) and d.mu.shape == (50, 5)
    for t in range(5):
        assert tuple(d.labels[t]) == canonical_labels(d.labels[t])
        assert np.array_equal(d.mu[:, t], d.atoms[t][d.labels[t] - 1])
        if t:
            assert is_compatible(tuple(d.labels[t]), tuple(d.labels[t - 1]), d.gammas[t])
    assert not d.gammas[0].any()
    resid = d.Y - d.mu
    assert abs(resid.std() - 1.0) < 0.15


def test_alpha_extremes():
    d = generate(SynthConfig.sim1(1.0), 1)
    assert (d.labels == d.labels[0]).all()
    d = generate(SynthConfig.sim1(0.0), 1)
    assert not d.gammas.any()


def test_generate_is_deterministic():
    a = generate_replicates(SynthConfig.sim2(0.9, 0.75, n_replicates=3), 42)
    b = generate_replicates(SynthConfig.sim2(0.9, 0.75, n_replicates=3), 42)
    for x, y in zip(a, b):
        assert np.array_equal(x.Y, y.Y) and np.array_equal(x.labels, y.labels)
    assert not np.array_equal(a[0].Y, a[1].Y)


def test_sim2_inherits_atoms_at_full_persistence():
    d = generate(SynthConfig.sim2(1.0, 0.0), 3)
    # phi1 = 0: fresh atoms every period even though partitions never change
    assert (d.labels == d.labels[0]).all()
    d = generate(SynthConfig(mode="sim2", m=5, T=4, alpha=1.0, tau=1.0, phi1=0.999999, sigma=1.0), 3)
    for t in range(1, 4):
        assert np.allclose(d.atoms[t], 0.999999 * d.atoms[t - 1], atol=0.02)


def test_sim2_independent_case_centred_at_zero():
    reps = generate_replicates(SynthConfig.sim2(0.0, 0.0, n_replicates=200), 7)
    r = np.array([lag1_autocorrelation(d.Y).mean() for d in reps])
    assert abs(r.mean()) < 3 * r.std(ddof=1) / np.sqrt(len(r))


def test_lag1_autocorrelation_known_series():
    y = np.array([[1.0, -1.0, 1.0, -1.0], [2.0, 2.0, 2.0, 2.0]])
    r = lag1_autocorrelation(y)
    assert r[0] == pytest.approx(-1.0) and r[1] == pytest.approx(1.0)


@pytest.mark.parametrize("kw", [dict(mode="x"), dict(alpha=1.5), dict(sigma=0.0), dict(phi1=1.0), dict(m=0)])
def test_invalid_config(kw):
    with pytest.raises(ValueError):
        SynthConfig(**kw).validate()
