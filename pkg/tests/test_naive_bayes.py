import numpy as np
import pytest

from mocap_har.errors import EmptyData
from mocap_har.models.naive_bayes import GaussianNB, train_gaussian_nb


def test_symmetric_means():
    rng = np.random.default_rng(0)
    X = np.concatenate([rng.normal(-10, 1, 50), rng.normal(10, 1, 50)])[:, None]
    y = np.repeat([1, 2], 50)
    nb = train_gaussian_nb(X, y)
    assert list(nb.predict(np.array([[-10.0], [10.0]]))) == [1, 2]


def test_frequency_priors():
    nb = GaussianNB().fit(np.array([[0.0], [1.0], [2.0], [3.0]]), ["A", "A", "A", "B"])
    assert nb.priors[list(nb.classes).index("A")] == 0.75


def test_zero_variance_feature():
    X = np.array([[1.0, 5.0], [2.0, 5.0], [8.0, 5.0], [9.0, 5.0]])
    nb = GaussianNB().fit(X, [0, 0, 1, 1])
    P = nb.predict_proba(np.array([[1.5, 5.0], [8.5, 6.0]]))
    assert np.all(np.isfinite(P))
    assert list(nb.predict(np.array([[1.5, 5.0]]))) == [0]


def test_matches_closed_form_posterior():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(30, 3))
    y = rng.integers(0, 3, size=30)
    nb = GaussianNB().fit(X, y)
    z = rng.normal(size=3)
    logp = []
    for c in range(3):
        R = X[y == c]
        mu, var = R.mean(0), R.var(0)
        logp.append(np.log(np.mean(y == c))
                    + np.sum(-0.5 * np.log(2 * np.pi * var) - (z - mu) ** 2 / (2 * var)))
    logp = np.array(logp)
    want = np.exp(logp - logp.max())
    want /= want.sum()
    np.testing.assert_allclose(nb.predict_proba(z[None])[0], want, rtol=1e-10)


def test_empty():
    with pytest.raises(EmptyData):
        GaussianNB().fit(np.zeros((0, 2)), [])
