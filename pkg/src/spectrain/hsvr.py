"""Epsilon-insensitive SVR with Gaussian kernels and the hierarchical cascade.

A single SVR layer predicts sum_i coef_i * exp(-gamma ||x - x_i||^2) + b;
the hierarchical model stacks layers at ascending gamma (coarse to fine),
each layer fitting the residual left by the coarser ones.  The dual is
solved by maximal-violating-pair SMO (see ``_smo``); dual coefficients obey
|coef_i| <= C and the KKT conditions hold within the solver tolerance at
convergence.
"""

import json
from dataclasses import dataclass

import numpy as np

from ._smo import smo_sweep
from .errors import InvalidInput, NumericalFailure

# Coarse layers fitting residuals far outside the tube need a few hundred
# thousand pair updates at n=512; each is O(n), so 1e6 stays in seconds.
MAX_SMO_ITER = 1_000_000


@dataclass
class SvrModel:
    support_xs: np.ndarray   # (k, d)
    dual_coefs: np.ndarray   # (k,), alpha - alpha*
    bias: float
    gamma: float
    eps: float
    C: float
    kkt_violation: float = 0.0
    iterations: int = 0


@dataclass
class HsvrModel:
    layers: list
    ladder: object = None

    def __post_init__(self):
        gammas = [l.gamma for l in self.layers]
        if any(b <= a for a, b in zip(gammas, gammas[1:])):
            raise InvalidInput("layer scales must be strictly increasing")


def _as_points(xs):
    X = np.asarray(xs, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    return X


def _kernel_matrix(X, Z, gamma):
    d2 = np.sum(X**2, axis=1)[:, None] + np.sum(Z**2, axis=1)[None, :] - 2.0 * X @ Z.T
    np.maximum(d2, 0.0, out=d2)
    return np.exp(-gamma * d2)


def fit_svr(xs, ys, gamma, eps, C, kkt_tol=None, max_iter=MAX_SMO_ITER):
    """Fit one epsilon-SVR layer by SMO.

    ``kkt_tol`` bounds the final KKT violation in function-value units;
    the default 1e-3*C is capped at eps/4 so the stopping slack stays below
    the tube width on tight tubes.  Raises NumericalFailure (with the best
    iterate attached as ``.partial``) if the iteration cap is hit first.
    """
    X = _as_points(xs)
    y = np.asarray(ys, dtype=np.float64)
    if X.shape[0] != y.size or X.shape[0] < 2:
        raise InvalidInput("need at least two matching samples")
    if gamma <= 0 or C <= 0 or eps < 0:
        raise InvalidInput("require gamma > 0, C > 0, eps >= 0")
    if kkt_tol is None:
        kkt_tol = 1e-3 * C
        if eps > 0:
            kkt_tol = min(kkt_tol, 0.25 * eps)

    K = _kernel_matrix(X, X, gamma)
    beta, b, violation, it = smo_sweep(K, y, float(eps), float(C),
                                       float(kkt_tol), int(max_iter))
    sv = beta != 0.0
    model = SvrModel(
        support_xs=X[sv].copy(),
        dual_coefs=beta[sv].copy(),
        bias=float(b),
        gamma=float(gamma),
        eps=float(eps),
        C=float(C),
        kkt_violation=float(violation),
        iterations=int(it),
    )
    if violation > kkt_tol:
        err = NumericalFailure(
            f"SMO hit the {max_iter}-pair cap at violation {violation:.3g} > {kkt_tol:.3g}"
        )
        err.partial = model
        raise err
    return model


def predict(model, xs):
    """Kernel-expansion value(s); scalar in -> scalar out."""
    scalar = np.isscalar(xs)
    X = _as_points(np.atleast_1d(np.asarray(xs, dtype=np.float64)))
    if isinstance(model, HsvrModel):
        out = np.zeros(X.shape[0])
        for layer in model.layers:
            out += predict(layer, X)
        return float(out[0]) if scalar else out
    if model.support_xs.shape[0] == 0:
        out = np.full(X.shape[0], model.bias)
    else:
        out = _kernel_matrix(X, model.support_xs, model.gamma) @ model.dual_coefs + model.bias
    return float(out[0]) if scalar else out


def default_C(ys):
    """Large enough that the tube, not the box, binds on clean signals."""
    return 100.0 * max(np.ptp(ys), 1e-12)


def fit_hsvr(signal, ladder, eps, C=None, kkt_tol=None):
    """Residual cascade: layer 0 fits ys at the coarsest scale, layer l the
    residual of layers < l at scale l."""
    if not ladder.scales:
        raise InvalidInput("ladder has no scales")
    xs, ys = signal.xs, signal.ys
    if C is None:
        C = default_C(ys)
    layers = []
    residual = ys.copy()
    for gamma in ladder.scales:
        layer = fit_svr(xs, residual, gamma, eps, C, kkt_tol=kkt_tol)
        residual = residual - predict(layer, xs)
        layers.append(layer)
    return HsvrModel(layers=layers, ladder=ladder)


def evaluate(model, dense_signal):
    """Error metrics against a densely sampled reference signal."""
    pred = predict(model, dense_signal.xs)
    err = np.abs(pred - dense_signal.ys)
    return {
        "mae": float(err.mean()),
        "rmse": float(np.sqrt(np.mean(err**2))),
        "max_err": float(err.max()),
    }


def model_to_json(model):
    if isinstance(model, HsvrModel):
        doc = {"layers": [model_to_json(l) for l in model.layers]}
        if model.ladder is not None:
            doc["ladder"] = model.ladder.to_json()
        return doc
    return {
        "support_xs": model.support_xs.tolist(),
        "dual_coefs": model.dual_coefs.tolist(),
        "bias": model.bias,
        "gamma": model.gamma,
        "eps": model.eps,
        "C": model.C,
    }


def model_from_json(doc):
    if "layers" in doc:
        return HsvrModel(layers=[model_from_json(l) for l in doc["layers"]])
    return SvrModel(
        support_xs=np.asarray(doc["support_xs"], dtype=np.float64),
        dual_coefs=np.asarray(doc["dual_coefs"], dtype=np.float64),
        bias=float(doc["bias"]),
        gamma=float(doc["gamma"]),
        eps=float(doc["eps"]),
        C=float(doc["C"]),
    )


def save_model(model, path):
    with open(path, "w") as f:
        json.dump(model_to_json(model), f)


def load_model(path):
    with open(path) as f:
        return model_from_json(json.load(f))
