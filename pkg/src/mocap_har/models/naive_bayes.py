import numpy as np

from ..errors import EmptyData


class GaussianNB:
    """Gaussian naive Bayes with frequency priors.

    Per-class variances are floored at ``var_floor`` times the largest
    feature variance of the training data, so constant features never divide
    by zero.
    """

    def __init__(self, var_floor=1e-9):
        self.var_floor = var_floor

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        if X.ndim != 2 or X.shape[0] == 0 or len(y) != X.shape[0]:
            raise EmptyData("naive Bayes needs a non-empty labelled matrix")
        self.classes = np.unique(y)
        floor = self.var_floor * X.var(axis=0).max()
        floor = max(floor, np.finfo(np.float64).tiny)
        self.means = np.empty((len(self.classes), X.shape[1]))
        self.vars = np.empty_like(self.means)
        self.priors = np.empty(len(self.classes))
        for k, c in enumerate(self.classes):
            rows = X[y == c]
            self.means[k] = rows.mean(axis=0)
            self.vars[k] = np.maximum(rows.var(axis=0), floor)
            self.priors[k] = len(rows) / len(y)
        return self

    def joint_log_likelihood(self, X):
        X = np.asarray(X, dtype=np.float64)
        out = np.empty((X.shape[0], len(self.classes)))
        for k in range(len(self.classes)):
            ll = -0.5 * np.sum(np.log(2 * np.pi * self.vars[k])
                               + (X - self.means[k]) ** 2 / self.vars[k], axis=1)
            out[:, k] = np.log(self.priors[k]) + ll
        return out

    def predict_proba(self, X):
        jll = self.joint_log_likelihood(X)
        jll -= jll.max(axis=1, keepdims=True)
        p = np.exp(jll)
        return p / p.sum(axis=1, keepdims=True)

    def predict(self, X):
        return self.classes[self.joint_log_likelihood(X).argmax(axis=1)]


def train_gaussian_nb(X, y):
    return GaussianNB().fit(X, y)
