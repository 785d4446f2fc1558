"""Pure-Python (numpy) exact MVA lattice kernel.

Walks the population lattice in layers of equal total population, keeping
only two layers of total-queue-length tables in memory.  The class with the
largest population is kept implicit (its count is total minus the explicit
counts), so the per-layer table covers the product of the remaining
populations only.
"""

from __future__ import annotations

import numpy as np


def mva_lattice(demand: np.ndarray, think: np.ndarray, population: np.ndarray):
    """Exact multi-class MVA over all population vectors <= `population`.

    demand: (K, C) service demands at queueing (PS) centers.
    think:  (C,) think times.
    population: (C,) integer class populations.

    Returns (throughput (C,), residence (K, C)) at the full population.
    """
    demand = np.ascontiguousarray(demand, dtype=np.float64)
    think = np.ascontiguousarray(think, dtype=np.float64)
    population = np.ascontiguousarray(population, dtype=np.int64)
    K, C = demand.shape
    if C == 0:
        return np.zeros(0), np.zeros((K, 0))

    implicit = int(np.argmax(population))
    explicit = [c for c in range(C) if c != implicit]
    dims = [int(population[c]) + 1 for c in explicit]
    plane = int(np.prod(dims)) if dims else 1

    # Flat index = sum over explicit classes of n_c * stride_c.
    strides = {}
    acc = 1
    for c, dim in zip(reversed(explicit), reversed(dims)):
        strides[c] = acc
        acc *= dim

    idx = np.arange(plane)
    counts = {}
    for c in explicit:
        counts[c] = (idx // strides[c]) % (int(population[c]) + 1)
    sum_explicit = np.zeros(plane, dtype=np.int64)
    for c in explicit:
        sum_explicit += counts[c]

    final_flat = sum(int(population[c]) * strides[c] for c in explicit)
    total = int(population.sum())

    q_prev = np.zeros((plane, K))
    q_cur = np.zeros((plane, K))
    shifted = np.zeros((plane, K))
    x_final = np.zeros(C)
    r_final = np.zeros((K, C))

    for t in range(1, total + 1):
        n_implicit = t - sum_explicit
        valid = (n_implicit >= 0) & (n_implicit <= population[implicit])
        q_cur[:] = 0.0
        for c in range(C):
            if c == implicit:
                n_c = n_implicit
                q_at_minus = q_prev
            else:
                n_c = counts[c]
                s = strides[c]
                shifted[:s] = 0.0
                shifted[s:] = q_prev[:-s]
                q_at_minus = shifted
            active = valid & (n_c > 0)
            if not active.any():
                continue
            resid = demand[:, c] * (1.0 + q_at_minus)  # (plane, K)
            denom = think[c] + resid.sum(axis=1)
            with np.errstate(divide="ignore", invalid="ignore"):
                x = np.where(active, n_c / denom, 0.0)
            q_cur += x[:, None] * resid
            if t == total:
                x_final[c] = x[final_flat]
                r_final[:, c] = resid[final_flat]
        q_prev, q_cur = q_cur, q_prev

    return x_final, r_final
