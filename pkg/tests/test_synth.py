import numpy as np
import pytest
from scipy import stats

from bica.errors import InvalidData, InvalidSpec, RankDeficient
from bica.linalg import center_whiten
from bica.synth import KINDS, FIXED_MIXING_3X3, SourceSpec, gen_sources, mix, parse_kinds, random_mixing


def test_fixed_matrix_columnwise():
    np.testing.assert_array_equal(FIXED_MIXING_3X3[:, 0], [0.8, 0.3, -0.3])
    np.testing.assert_array_equal(FIXED_MIXING_3X3[:, 2], [0.3, 0.2, 0.3])


def test_uniform_kurtosis():
    s = gen_sources([SourceSpec("uniform")], 100000, 1)[0]
    assert stats.kurtosis(s, fisher=False) == pytest.approx(1.8, abs=0.1)


@pytest.mark.parametrize("kind", KINDS)
def test_standardized_exactly(kind):
    s = gen_sources([SourceSpec(kind)], 5000, 2)[0]
    assert abs(s.mean()) < 1e-12
    assert s.var(ddof=1) == pytest.approx(1.0, abs=1e-12)


def test_gmm_bimodal():
    s = gen_sources([SourceSpec("gmm")], 20000, 3)[0]
    hist, edges = np.histogram(s, bins=41, range=(-2, 2))
    assert hist[20] < 0.2 * hist.max()


def test_determinism_and_decorrelation():
    specs = parse_kinds("uniform,laplace,gmm")
    a = gen_sources(specs, 10000, 5)
    np.testing.assert_array_equal(a, gen_sources(specs, 10000, 5))
    c = np.corrcoef(a)
    assert np.abs(c - np.eye(3)).max() < 4 / np.sqrt(10000)


def test_parse_kinds():
    specs = parse_kinds("uniform, gmm(w=0.3/0.7,mu=-1/0.5,sd=0.4/0.4), student_t(5)")
    assert [s.kind for s in specs] == ["uniform", "gmm", "student_t"]
    assert specs[1].weights == (0.3, 0.7) and specs[2].nu == 5.0


@pytest.mark.parametrize("text", ["", "cauchy", "gmm(w=0.2/0.2)", "uniform(3)", "gmm(x=1)",
                                  "student_t(abc)"])
def test_bad_specs(text):
    with pytest.raises(InvalidSpec):
        gen_sources(text, 1000, 0)


def test_small_n():
    with pytest.raises(InvalidData):
        gen_sources([SourceSpec("uniform")], 50, 0)


def test_mix_roundtrip(rng):
    s = rng.standard_normal((3, 100))
    np.testing.assert_array_equal(mix(s, np.eye(3)), s)
    np.testing.assert_allclose(np.linalg.inv(FIXED_MIXING_3X3) @ mix(s, FIXED_MIXING_3X3), s, atol=1e-10)
    with pytest.raises(RankDeficient):
        mix(s[:2], np.ones((2, 2)))


def test_random_mixing_conditioned():
    for seed in range(20):
        assert np.linalg.cond(random_mixing(3, seed)) < 100


def test_whitened_true_rotation_recovers():
    s = gen_sources("uniform,laplace,gmm", 10000, 6)
    A = random_mixing(3, 9)
    wr = center_whiten(mix(s, A))
    # whitened-space unmixing: orthonormalize inv(A) @ inv(transform)
    R = np.linalg.inv(A) @ np.linalg.inv(wr.transform)
    u, _, vt = np.linalg.svd(R)
    y = (u @ vt) @ wr.whitened
    rho = np.abs(np.diag(np.corrcoef(s, y)[:3, 3:]))
    assert np.all(rho > 0.999)
