"""Discrete-event simulation oracle for closed networks.

Exponential service at processor-sharing centers and exponential think times
make the network a continuous-time Markov chain, so the next transition is an
exponential race over per-center completion rates.  Each class visits every
center where it places demand once per cycle, which matches the product-form
ground truth the analytic solvers target.

Estimates come with batch-means 95% confidence half-widths.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import InvalidModelError
from .qn import QnModel, SimResult, SolverResult

# Two-sided 97.5% Student-t quantiles by degrees of freedom.
_T975 = {
    1: 12.706, 2: 4.303, 3: 3.182, 4: 2.776, 5: 2.571, 6: 2.447, 7: 2.365,
    8: 2.306, 9: 2.262, 10: 2.228, 11: 2.201, 12: 2.179, 13: 2.160, 14: 2.145,
    15: 2.131, 16: 2.120, 17: 2.110, 18: 2.101, 19: 2.093, 20: 2.086,
    21: 2.080, 22: 2.074, 23: 2.069, 24: 2.064, 25: 2.060, 26: 2.056,
    27: 2.052, 28: 2.048, 29: 2.045, 30: 2.042,
}


def _t975(df: int) -> float:
    if df < 1:
        return float("inf")
    if df in _T975:
        return _T975[df]
    if df <= 40:
        return 2.021
    if df <= 60:
        return 2.0
    return 1.96


def _mean_hw(samples: list[float]) -> tuple[float, float]:
    n = len(samples)
    mean = sum(samples) / n
    if n < 2:
        return mean, float("inf")
    var = sum((s - mean) ** 2 for s in samples) / (n - 1)
    return mean, _t975(n - 1) * (var / n) ** 0.5


@dataclass
class _Cell:
    """Lazy time integral of a piecewise-constant quantity."""

    value: float = 0.0
    last: float = 0.0
    acc: float = 0.0

    def settle(self, now: float) -> None:
        self.acc += self.value * (now - self.last)
        self.last = now

    def take(self) -> float:
        out = self.acc
        self.acc = 0.0
        return out


def simulate(
    qn: QnModel,
    horizon: float,
    warmup: float,
    seed: int,
    batches: int = 20,
) -> SimResult:
    """Simulate the closed network for `horizon` model-seconds.

    Statistics are collected after `warmup` over `batches` equal windows;
    identical seeds give bit-identical results.
    """
    qn.validate()
    if not (horizon > warmup >= 0):
        raise ValueError("need horizon > warmup >= 0")
    if batches < 2:
        raise ValueError("need at least 2 batches")

    rng = random.Random(seed)
    class_ids = qn.class_ids()
    C = len(class_ids)
    ps = qn.ps_centers()
    K = len(ps)
    delay = qn.delay_center()
    demand = [[float(qn.demand[qn.centers.index(k)][j]) for j in range(C)] for k in ps]
    think = [c.think_time for c in qn.classes]
    pop = [c.population for c in qn.classes]

    visits = []  # per class: ordered list of PS center indices with demand
    for j in range(C):
        route = [i for i in range(K) if demand[i][j] > 0]
        if not route:
            raise InvalidModelError([])
        visits.append(route)
    next_stop: list[dict[int, int | None]] = []
    for j in range(C):
        route = visits[j]
        nxt: dict[int, int | None] = {}
        for pos, i in enumerate(route):
            nxt[i] = route[pos + 1] if pos + 1 < len(route) else None
        next_stop.append(nxt)

    # Occupancy state and lazy integrals.
    n = [[0] * C for _ in range(K)]
    thinking = [0] * C
    q_cells = [[_Cell() for _ in range(C)] for _ in range(K)]
    busy_cells = [_Cell() for _ in range(K)]
    think_cells = [_Cell() for _ in range(C)]
    all_cells = [c for row in q_cells for c in row] + busy_cells + think_cells

    for j in range(C):
        if think[j] > 0:
            thinking[j] = pop[j]
            think_cells[j].value = pop[j]
        else:
            first = visits[j][0]
            n[first][j] = pop[j]
            q_cells[first][j].value = pop[j]
            busy_cells[first].value = 1.0
    n_total = [sum(n[i]) for i in range(K)]

    blen = (horizon - warmup) / batches
    boundaries = [warmup + b * blen for b in range(batches)] + [horizon]
    completions = [[0] * C for _ in range(batches)]
    q_batch = [[[0.0] * C for _ in range(K)] for _ in range(batches)]
    busy_batch = [[0.0] * K for _ in range(batches)]
    think_batch = [[0.0] * C for _ in range(batches)]

    t = 0.0
    cur_batch = -1  # -1 = warmup, discarded
    next_boundary_idx = 0

    def settle_all(now: float, collect: bool) -> None:
        for cell in all_cells:
            cell.settle(now)
        if collect and cur_batch >= 0:
            for i in range(K):
                busy_batch[cur_batch][i] += busy_cells[i].take()
                for j in range(C):
                    q_batch[cur_batch][i][j] += q_cells[i][j].take()
            for j in range(C):
                think_batch[cur_batch][j] += think_cells[j].take()
        else:
            for cell in all_cells:
                cell.take()

    while True:
        rate_centers = []
        total_rate = 0.0
        for i in range(K):
            if n_total[i] > 0:
                w = sum(n[i][j] / demand[i][j] for j in range(C) if n[i][j] > 0)
                r = w / n_total[i]
            else:
                r = 0.0
            rate_centers.append(r)
            total_rate += r
        think_rate = sum(thinking[j] / think[j] for j in range(C) if thinking[j] > 0 and think[j] > 0)
        total_rate += think_rate
        if total_rate <= 0:
            raise InvalidModelError([])

        t_new = t + rng.expovariate(total_rate)

        while next_boundary_idx < len(boundaries) and boundaries[next_boundary_idx] <= t_new:
            settle_all(boundaries[next_boundary_idx], collect=True)
            cur_batch += 1
            next_boundary_idx += 1
        if t_new >= horizon:
            break
        t = t_new

        u = rng.random() * total_rate
        src_center = None
        for i in range(K):
            if u < rate_centers[i]:
                src_center = i
                break
            u -= rate_centers[i]

        if src_center is not None:
            i = src_center
            v = rng.random() * sum(n[i][j] / demand[i][j] for j in range(C) if n[i][j] > 0)
            cls = C - 1
            for j in range(C):
                if n[i][j] > 0:
                    v -= n[i][j] / demand[i][j]
                    if v < 0:
                        cls = j
                        break
            q_cells[i][cls].settle(t)
            busy_cells[i].settle(t)
            n[i][cls] -= 1
            n_total[i] -= 1
            q_cells[i][cls].value = n[i][cls]
            busy_cells[i].value = 1.0 if n_total[i] > 0 else 0.0

            dest = next_stop[cls][i]
            if dest is None:
                if cur_batch >= 0:
                    completions[cur_batch][cls] += 1
                if think[cls] > 0:
                    think_cells[cls].settle(t)
                    thinking[cls] += 1
                    think_cells[cls].value = thinking[cls]
                    continue
                dest = visits[cls][0]
            q_cells[dest][cls].settle(t)
            busy_cells[dest].settle(t)
            n[dest][cls] += 1
            n_total[dest] += 1
            q_cells[dest][cls].value = n[dest][cls]
            busy_cells[dest].value = 1.0
        else:
            v = rng.random() * think_rate
            cls = C - 1
            for j in range(C):
                if thinking[j] > 0 and think[j] > 0:
                    v -= thinking[j] / think[j]
                    if v < 0:
                        cls = j
                        break
            think_cells[cls].settle(t)
            thinking[cls] -= 1
            think_cells[cls].value = thinking[cls]
            dest = visits[cls][0]
            q_cells[dest][cls].settle(t)
            busy_cells[dest].settle(t)
            n[dest][cls] += 1
            n_total[dest] += 1
            q_cells[dest][cls].value = n[dest][cls]
            busy_cells[dest].value = 1.0

    # Point estimates and half-widths from batch means.
    x_mean: dict[str, float] = {}
    x_hw: dict[str, float] = {}
    for j, cid in enumerate(class_ids):
        samples = [completions[b][j] / blen for b in range(batches)]
        m, hw = _mean_hw(samples)
        x_mean[cid] = m
        x_hw[cid] = hw

    u_mean: dict[str, float] = {}
    u_hw: dict[str, float] = {}
    for i, center in enumerate(ps):
        samples = [busy_batch[b][i] / blen for b in range(batches)]
        m, hw = _mean_hw(samples)
        u_mean[center.id] = m
        u_hw[center.id] = hw

    residence: dict[str, dict[str, float]] = {}
    queue: dict[str, dict[str, float]] = {}
    queue[delay.id] = {}
    residence[delay.id] = {}
    for j, cid in enumerate(class_ids):
        qd = sum(think_batch[b][j] for b in range(batches)) / (horizon - warmup)
        queue[delay.id][cid] = qd
        residence[delay.id][cid] = think[j]
    for i, center in enumerate(ps):
        residence[center.id] = {}
        queue[center.id] = {}
        for j, cid in enumerate(class_ids):
            qv = sum(q_batch[b][i][j] for b in range(batches)) / (horizon - warmup)
            queue[center.id][cid] = qv
            residence[center.id][cid] = qv / x_mean[cid] if x_mean[cid] > 0 else float("inf")

    cycle = {
        cid: (pop[j] / x_mean[cid] if x_mean[cid] > 0 else float("inf"))
        for j, cid in enumerate(class_ids)
    }
    result = SolverResult(
        class_ids=tuple(class_ids),
        center_ids=tuple(qn.center_ids()),
        populations={c.id: c.population for c in qn.classes},
        think_times={c.id: c.think_time for c in qn.classes},
        throughput=x_mean,
        cycle_time=cycle,
        server_side_response={cid: cycle[cid] - think[j] for j, cid in enumerate(class_ids)},
        residence=residence,
        queue_length=queue,
        utilization=u_mean,
        method="sim",
        approximate=True,
        converged=True,
        iterations=0,
    )
    return SimResult(
        result=result,
        half_width_throughput=x_hw,
        half_width_utilization=u_hw,
        seed=seed,
        warmup=warmup,
        horizon=horizon,
        batches=batches,
    )
