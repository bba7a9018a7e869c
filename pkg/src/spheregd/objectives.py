"""Smoothed-sparsity objectives on the sphere and their gradients.

Two objectives share the scalar surrogate mu * log(cosh(t / mu)): the
separable model summing over the coordinates of q, and the data-driven one
averaging over columns y of a data matrix.  Monte-Carlo estimators for the
infinite-data quantities take an explicit generator, so callers can shard
sampling across seeded streams and merge by sample-count weighting.
"""

import warnings

import numpy as np

from .sphere import chart_to_sphere, tangent_project

_LOG2 = float(np.log(2.0))


def check_mu(mu):
    """Validate the smoothing parameter.

    Errors when mu <= 0; warns (does not error) at mu >= 1/16, where the
    positivity guarantee for the outward gradient projection no longer holds.
    """
    if mu <= 0.0:
        raise ValueError("mu must be positive")
    if mu >= 1.0 / 16.0:
        warnings.warn(
            f"mu = {mu} >= 1/16: outward-projection positivity is not guaranteed",
            RuntimeWarning,
            stacklevel=2,
        )


def check_theta(theta, lo=0.0, hi=1.0):
    if not (lo <= theta <= hi):
        raise ValueError(f"theta = {theta} outside [{lo}, {hi}]")


def log_cosh(t, mu):
    """mu * log(cosh(t/mu)), evaluated as |t| - mu log 2 + mu log1p(e^{-2|t|/mu}).

    The direct form overflows once |t|/mu exceeds ~700; this one never does.
    """
    a = np.abs(np.asarray(t, dtype=float)) / mu
    return mu * (a - _LOG2 + np.log1p(np.exp(-2.0 * a)))


def sep_value(q, mu):
    """Separable objective: sum_i mu log cosh(q_i / mu)."""
    return float(np.sum(log_cosh(q, mu)))


def sep_euclid_grad(q, mu):
    """Euclidean gradient of the separable objective: tanh(q / mu) elementwise."""
    return np.tanh(np.asarray(q, dtype=float) / mu)


def sep_riem_grad(q, mu):
    """Riemannian gradient: the Euclidean one projected onto the tangent space."""
    return tangent_project(q, sep_euclid_grad(q, mu))


def sep_objective(mu):
    """Oracle q -> (value, Riemannian gradient) for the separable objective."""
    check_mu(mu)

    def oracle(q):
        g = np.tanh(q / mu)
        return float(np.sum(log_cosh(q, mu))), g - (q @ g) * q

    return oracle


def sep_chart_grad(w, mu):
    """Gradient of the separable objective in chart coordinates:
    tanh(w_i/mu) - tanh(q_n/mu) w_i / q_n."""
    w = np.asarray(w, dtype=float)
    qn = chart_to_sphere(w)[-1]
    return np.tanh(w / mu) - np.tanh(qn / mu) * (w / qn)


def sep_projected_grad(w, i, mu):
    """Outward-direction slope of the separable objective at q(w), coordinate i.

    Closed form tanh(|w_i|/mu) - tanh(q_n/mu) |w_i| / q_n; the odd symmetry of
    tanh folds both signs of w_i into the same expression.  w_i = 0 has no
    outward direction and raises.
    """
    w = np.asarray(w, dtype=float)
    if w[i] == 0.0:
        raise ValueError("w_i = 0: coordinate sign undefined")
    qn = chart_to_sphere(w)[-1]
    a = abs(float(w[i]))
    return float(np.tanh(a / mu) - np.tanh(qn / mu) * a / qn)


def _check_data(q, Y):
    q = np.asarray(q, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2 or Y.shape[0] != q.shape[0]:
        raise ValueError(f"data matrix shape {Y.shape} incompatible with point of length {q.shape[0]}")
    return q, Y


def dl_value(q, Y, mu):
    """Data objective: average of mu log cosh(q'y_k / mu) over columns y_k."""
    q, Y = _check_data(q, Y)
    return float(np.mean(log_cosh(Y.T @ q, mu)))


def dl_euclid_grad(q, Y, mu):
    """Euclidean gradient of the data objective: (1/p) sum tanh(q'y_k/mu) y_k."""
    q, Y = _check_data(q, Y)
    return Y @ np.tanh(Y.T @ q / mu) / Y.shape[1]


def dl_riem_grad(q, Y, mu):
    return tangent_project(q, dl_euclid_grad(q, Y, mu))


def dl_objective(Y, mu):
    """Oracle q -> (value, Riemannian gradient) for the data objective."""
    check_mu(mu)
    Y = np.asarray(Y, dtype=float)
    YT = Y.T.copy()
    p = Y.shape[1]

    def oracle(q):
        corr = YT @ q
        val = float(np.mean(log_cosh(corr, mu)))
        g = Y @ np.tanh(corr / mu) / p
        return val, g - (q @ g) * q

    return oracle


def dl_projected_grad(w, i, Y, mu):
    """Finite-sample outward-direction slope at q(w) for data Y:
    (1/p) sum_k tanh(q'y_k/mu) (sign(w_i) y_{k,i} - |w_i|/q_n y_{k,n})."""
    w = np.asarray(w, dtype=float)
    if w[i] == 0.0:
        raise ValueError("w_i = 0: coordinate sign undefined")
    q = chart_to_sphere(w)
    _, Y = _check_data(q, Y)
    si = 1.0 if w[i] > 0 else -1.0
    t = np.tanh(Y.T @ q / mu)
    proj = si * Y[i, :] - (abs(float(w[i])) / q[-1]) * Y[-1, :]
    return float(np.mean(t * proj))


def _sech2(x):
    """sech(x)^2 = 4 e^{-2|x|} / (1 + e^{-2|x|})^2, overflow-safe."""
    e = np.exp(-2.0 * np.abs(x))
    return 4.0 * e / (1.0 + e) ** 2


def dl_pop_projected_grad_estimate(w, i, mu, theta, num_samples, rng, block=200_000):
    """Estimate the infinite-data outward slope at q(w) by conditioned sampling.

    Conditioning on the gating bits of the two distinguished coordinates
    cancels their common part, leaving

        |w_i| theta (1-theta) / mu
            * E[ sech^2((X + |w_i| v)/mu) - sech^2((X + q_n v')/mu) ],

    where X collects the remaining coordinates' Bernoulli-Gaussian
    contributions and v, v' are standard normals.  This removes the gating
    variance at the two special coordinates relative to projecting a naive
    full-gradient sample.  Returns (mean, standard error).
    """
    check_theta(theta)
    if num_samples < 1:
        raise ValueError("need num_samples >= 1")
    w = np.asarray(w, dtype=float)
    if w[i] == 0.0:
        raise ValueError("w_i = 0: coordinate sign undefined")
    q = chart_to_sphere(w)
    n = q.size
    qn = q[-1]
    wi = abs(float(w[i]))
    keep = [j for j in range(n) if j != i and j != n - 1]
    qo = q[keep]
    pref = wi * theta * (1.0 - theta) / mu

    total = 0.0
    total_sq = 0.0
    done = 0
    while done < num_samples:
        m = int(min(block, num_samples - done))
        V = rng.standard_normal((m, qo.size))
        gate = rng.random((m, qo.size)) < theta
        X = (V * gate) @ qo
        vi = rng.standard_normal(m)
        vn = rng.standard_normal(m)
        vals = pref * (_sech2((X + wi * vi) / mu) - _sech2((X + qn * vn) / mu))
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        done += m

    mean = total / num_samples
    if num_samples == 1:
        return mean, 0.0
    var = max(0.0, (total_sq / num_samples - mean * mean)) * num_samples / (num_samples - 1)
    return mean, float(np.sqrt(var / num_samples))


def dl_pop_grad_estimate(q, mu, theta, num_samples, rng, block=100_000):
    """Plain Monte-Carlo estimate of the infinite-data Euclidean gradient
    E[tanh(q'x / mu) x] over Bernoulli-Gaussian x."""
    check_theta(theta)
    if num_samples < 1:
        raise ValueError("need num_samples >= 1")
    q = np.asarray(q, dtype=float)
    acc = np.zeros(q.size)
    done = 0
    while done < num_samples:
        m = int(min(block, num_samples - done))
        X = rng.standard_normal((m, q.size))
        X *= rng.random((m, q.size)) < theta
        acc += np.tanh(X @ q / mu) @ X
        done += m
    return acc / num_samples


def default_sep_mu(n):
    """Default smoothing for separable runs: 0.1 / (sqrt(n) log n)."""
    return 0.1 / (np.sqrt(n) * np.log(n))


def default_sep_eta(n, mu):
    """Default separable step size: min(0.01/n, mu/2)."""
    return min(0.01 / n, mu / 2.0)


def default_dl_eta(n, p, theta, s):
    """Default data-objective step size: 0.05 theta s / (n log(n p))."""
    return 0.05 * theta * s / (n * np.log(n * p))
