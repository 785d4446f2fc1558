"""Analytic solvers for closed multi-class product-form networks.

`solve_exact_mva` runs the full population-vector recursion (compiled kernel
when available); `solve_amva` is the Bard-Schweitzer fixed point for
populations where the exact lattice is too large.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .errors import BudgetExceededError
from .qn import QnModel, SolverResult

DEFAULT_LATTICE_BUDGET = 10**7


def _assemble_result(
    qn: QnModel,
    x: np.ndarray,
    residence_ps: np.ndarray,
    method: str,
    approximate: bool = False,
    converged: bool = True,
    iterations: int = 0,
) -> SolverResult:
    class_ids = qn.class_ids()
    ps = qn.ps_centers()
    delay = qn.delay_center()
    think = np.array([c.think_time for c in qn.classes])
    pop = np.array([c.population for c in qn.classes], dtype=float)

    cycle = np.where(x > 0, pop / np.where(x > 0, x, 1.0), np.inf)
    residence: dict[str, dict[str, float]] = {}
    queue: dict[str, dict[str, float]] = {}
    utilization: dict[str, float] = {}

    residence[delay.id] = {c: float(z) for c, z in zip(class_ids, think)}
    queue[delay.id] = {c: float(xc * z) for c, xc, z in zip(class_ids, x, think)}

    demand_ps = qn.ps_demand_array()
    for i, center in enumerate(ps):
        residence[center.id] = {c: float(residence_ps[i, j]) for j, c in enumerate(class_ids)}
        queue[center.id] = {c: float(x[j] * residence_ps[i, j]) for j, c in enumerate(class_ids)}
        utilization[center.id] = float(np.dot(x, demand_ps[i]))

    return SolverResult(
        class_ids=tuple(class_ids),
        center_ids=tuple(qn.center_ids()),
        populations={c.id: c.population for c in qn.classes},
        think_times={c.id: c.think_time for c in qn.classes},
        throughput={c: float(xc) for c, xc in zip(class_ids, x)},
        cycle_time={c: float(r) for c, r in zip(class_ids, cycle)},
        server_side_response={c: float(r - z) for c, r, z in zip(class_ids, cycle, think)},
        residence=residence,
        queue_length=queue,
        utilization=utilization,
        method=method,
        approximate=approximate,
        converged=converged,
        iterations=iterations,
    )


def solve_exact_mva(qn: QnModel, lattice_budget: int = DEFAULT_LATTICE_BUDGET) -> SolverResult:
    """Exact MVA over every population vector up to the full population."""
    qn.validate()
    size = qn.lattice_size()
    if size > lattice_budget:
        raise BudgetExceededError(
            f"population lattice has {size} vectors (> budget {lattice_budget}); use solve_amva"
        )
    demand = qn.ps_demand_array()
    think = np.array([c.think_time for c in qn.classes])
    pop = np.array([c.population for c in qn.classes], dtype=np.int64)
    x, residence = kernels.mva_lattice(demand, think, pop)
    return _assemble_result(qn, np.asarray(x), np.asarray(residence), method="mva-exact")


def _amva_core(
    demand: np.ndarray,
    think: np.ndarray,
    pop: np.ndarray,
    frac_shift: np.ndarray,
    tolerance: float,
    max_iterations: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, bool, int]:
    """Fixed point on queue lengths at population `pop`.

    An arriving class-c customer sees queue sum_j (pop_j - d_jc) *
    (Q_kj/pop_j + frac_shift[k,j,c]); frac_shift = 0 is plain
    Bard-Schweitzer, the linearizer feeds estimated fraction changes.
    Returns (X, residence, Q, converged, iterations).
    """
    K, C = demand.shape
    q = np.zeros((K, C))
    active = pop > 0
    for j in range(C):
        if active[j]:
            nz = demand[:, j] > 0
            q[nz, j] = pop[j] / (nz.sum() + 1)

    safe_pop = np.where(active, pop, 1.0)
    delta_jc = np.eye(C)
    resid = np.zeros((K, C))
    x = np.zeros(C)
    converged = False
    it = 0
    for it in range(1, max_iterations + 1):
        frac = q / safe_pop[None, :]  # (K, C)
        seen = np.einsum("jc,kjc->kc", (pop[:, None] - delta_jc) * active[:, None],
                         frac[:, :, None] + frac_shift)
        resid = demand * (1.0 + seen)
        with np.errstate(divide="ignore", invalid="ignore"):
            x = np.where(active, pop / (think + resid.sum(axis=0)), 0.0)
        q_new = x[None, :] * resid
        delta = np.abs(q_new - q)
        scale = np.maximum(np.abs(q), 1e-12)
        q = q_new
        if (delta / scale).max() < tolerance:
            converged = True
            break
    return x, resid, q, converged, it


def solve_amva(
    qn: QnModel,
    tolerance: float = 1e-8,
    max_iterations: int = 10000,
    variant: str = "linearizer",
) -> SolverResult:
    """Approximate MVA.

    `variant="bard-schweitzer"` is the plain fixed point; the default
    "linearizer" refines it with estimated queue-fraction changes at the
    populations N - e_c (Chandy-Neuse style), which keeps throughput errors
    well under the bare fixed point's knee-region bias.
    """
    qn.validate()
    if not tolerance > 0:
        raise ValueError("tolerance must be > 0")
    if variant not in ("linearizer", "bard-schweitzer"):
        raise ValueError(f"unknown AMVA variant '{variant}'")
    demand = qn.ps_demand_array()  # (K, C)
    think = np.array([c.think_time for c in qn.classes])
    pop = np.array([c.population for c in qn.classes], dtype=float)
    K, C = demand.shape

    zero_shift = np.zeros((K, C, C))
    if variant == "bard-schweitzer":
        x, resid, _, converged, it = _amva_core(demand, think, pop, zero_shift, tolerance, max_iterations)
        return _assemble_result(
            qn, x, resid, method="amva-bard-schweitzer", approximate=True, converged=converged, iterations=it
        )

    frac_shift = zero_shift
    total_iters = 0
    converged = True
    for _ in range(3):
        _, _, q_full, ok, it = _amva_core(demand, think, pop, frac_shift, tolerance, max_iterations)
        total_iters += it
        converged = converged and ok
        frac_full = q_full / np.where(pop > 0, pop, 1.0)[None, :]
        new_shift = np.zeros((K, C, C))
        for c in range(C):
            reduced = pop.copy()
            reduced[c] -= 1
            _, _, q_red, ok, it = _amva_core(demand, think, reduced, frac_shift, tolerance, max_iterations)
            total_iters += it
            converged = converged and ok
            frac_red = q_red / np.where(reduced > 0, reduced, 1.0)[None, :]
            new_shift[:, :, c] = np.where(reduced[None, :] > 0, frac_red - frac_full, 0.0)
        frac_shift = new_shift
    x, resid, _, ok, it = _amva_core(demand, think, pop, frac_shift, tolerance, max_iterations)
    total_iters += it
    converged = converged and ok
    return _assemble_result(
        qn, x, resid, method="amva-linearizer", approximate=True, converged=converged, iterations=total_iters
    )


def solve(qn: QnModel, solver: str = "auto", lattice_budget: int = DEFAULT_LATTICE_BUDGET) -> SolverResult:
    """Solve with an explicit method, or exact-within-budget else AMVA."""
    if solver == "exact":
        return solve_exact_mva(qn, lattice_budget)
    if solver == "amva":
        return solve_amva(qn)
    if solver == "auto":
        if qn.lattice_size() <= lattice_budget:
            return solve_exact_mva(qn, lattice_budget)
        return solve_amva(qn)
    raise ValueError(f"unknown solver '{solver}'")


def asymptotic_bounds(qn: QnModel) -> dict[str, dict[str, float]]:
    """Optimistic per-class bounds with other classes' load held at zero.

    X_c <= min(1 / max_k D[k][c], N_c / (sum_k D[k][c] + Z_c)).
    """
    qn.validate()
    demand = qn.ps_demand_array()
    out: dict[str, dict[str, float]] = {}
    for j, cls in enumerate(qn.classes):
        col = demand[:, j]
        d_max = float(col.max())
        d_sum = float(col.sum())
        x_upper = min(1.0 / d_max, cls.population / (d_sum + cls.think_time))
        r_lower = max(d_sum, cls.population * d_max - cls.think_time)
        out[cls.id] = {"throughput_upper": x_upper, "response_lower": r_lower}
    return out


def bottleneck(result: SolverResult) -> str:
    """Queueing center with maximum utilization; ties go to the smallest id."""
    if not result.utilization:
        raise ValueError("result has no queueing centers")
    return min(result.utilization, key=lambda k: (-result.utilization[k], k))


def server_side_response(result: SolverResult, class_id: str) -> float:
    """Cycle time minus think time for one class."""
    return result.cycle_time[class_id] - result.think_times[class_id]


def throughput_from_cycle(population: int, cycle_time: float) -> float:
    """Little's law over the closed cycle: N / R."""
    if not cycle_time > 0:
        raise ValueError("cycle time must be > 0")
    return population / cycle_time
