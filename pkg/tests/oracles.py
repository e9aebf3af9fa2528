"""Independent reference computations shared by the tests."""

from __future__ import annotations

import numpy as np


def central_diff(f, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central finite-difference gradient of scalar ``f`` at ``x``."""
    x = np.array(x, dtype=np.float64)
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        old = x[i]
        x[i] = old + h
        fp = f(x)
        x[i] = old - h
        fm = f(x)
        x[i] = old
        g[i] = (fp - fm) / (2 * h)
    return g


def rel_err(a: np.ndarray, b: np.ndarray, floor: float = 1e-6) -> float:
    """Largest elementwise relative error, with an absolute floor on the scale."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    return float((np.abs(a - b) / scale).max()) if a.size else 0.0


def tanh_mlp(x: np.ndarray, weights: list[tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    """Plain numpy tanh MLP: tanh after every layer, scalar output per row."""
    h = x
    for w, b in weights:
        h = np.tanh(h @ w + b)
    return h[:, 0]


def mlp_input_grad(x: np.ndarray, weights) -> np.ndarray:
    """Hand-derived d(sum D)/dx for :func:`tanh_mlp`."""
    acts = [x]
    h = x
    for w, b in weights:
        h = np.tanh(h @ w + b)
        acts.append(h)
    g = np.ones((x.shape[0], 1))
    for (w, _), out in zip(reversed(weights), reversed(acts[1:])):
        g = (g * (1 - out ** 2)) @ w.T
    return g


def gp_value(x: np.ndarray, weights) -> float:
    """mean_b (||grad_x D(x_b)|| - 1)^2 evaluated without autodiff."""
    g = mlp_input_grad(x, weights)
    return float(((np.sqrt((g ** 2).sum(axis=1)) - 1) ** 2).mean())


# ---------------------------------------------------------------------------
# set-metric oracles: isomorphism classes and Python bit sets, no canonical SMILES


def iso_classes(graphs) -> list[int]:
    """Class label per graph, grouping by labelled graph isomorphism."""
    from conftest import isomorphic

    reps, labels = [], []
    for g in graphs:
        for k, r in enumerate(reps):
            if isomorphic(g, r):
                labels.append(k)
                break
        else:
            reps.append(g)
            labels.append(len(reps) - 1)
    return labels


def bitset_tanimoto(a: set[int], b: set[int]) -> float:
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def quantile_grid_w1(a, b, n_grid: int = 200_000) -> float:
    """Midpoint-rule integral of |Qa(t) - Qb(t)| over (0, 1)."""
    t = (np.arange(n_grid) + 0.5) / n_grid
    qa = np.sort(a)[np.minimum((t * len(a)).astype(int), len(a) - 1)]
    qb = np.sort(b)[np.minimum((t * len(b)).astype(int), len(b) - 1)]
    return float(np.mean(np.abs(qa - qb)))


def cdf_w1(a, b) -> float:
    """Exact W1 as the integral of |Fa(x) - Fb(x)| between consecutive sample points."""
    a, b = sorted(a), sorted(b)
    xs = sorted(set(a) | set(b))
    total = 0.0
    for lo, hi in zip(xs, xs[1:]):
        fa = sum(v <= lo for v in a) / len(a)
        fb = sum(v <= lo for v in b) / len(b)
        total += abs(fa - fb) * (hi - lo)
    return total
