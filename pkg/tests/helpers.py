"""Shared test utilities: independent oracles and random model generators."""

import itertools

import numpy as np


def lcp_enumeration_oracle(refl, x, tol=1e-10):
    """Solve the complementarity step by trying every active set.

    For each subset S of coordinates, solve refl[S, S] @ push_S = -x_S and
    accept the first subset whose push and resulting state are both
    nonnegative. M-matrix inputs make the solution unique, so first-found is
    the solution. Completely independent of the production sweep routine.
    """
    d = len(x)
    for size in range(d + 1):
        for subset in itertools.combinations(range(d), size):
            idx = np.array(subset, dtype=int)
            push = np.zeros(d)
            if idx.size:
                try:
                    push_s = np.linalg.solve(refl[np.ix_(idx, idx)], -x[idx])
                except np.linalg.LinAlgError:
                    continue
                if push_s.min() < -tol:
                    continue
                push[idx] = push_s
            y = x + refl @ push
            if y.min() >= -tol:
                return y, push
    raise AssertionError("enumeration oracle found no feasible active set")


def random_substochastic_reflection(rng, d, max_row_sum=0.9):
    """Reflection matrix I - Q.T with Q nonnegative and row sums <= max_row_sum."""
    q = rng.random((d, d))
    scale = rng.uniform(0.1, max_row_sum, size=d)
    q *= (scale / q.sum(axis=1))[:, None]
    return np.eye(d) - q.T


def zero_brownian_path(d, level, step, num_steps):
    """GridPath of an identically-zero standard Brownian motion."""
    from rbm_mlmc.paths import GridPath

    return GridPath(level=level, step=step, horizon=num_steps * step,
                    values=np.zeros((num_steps + 1, d)))
