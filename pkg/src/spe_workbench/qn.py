"""Closed multi-class queueing network model and result containers."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidModelError, SchemaError
from .model import Violation

DELAY = "delay"
QUEUEING_PS = "ps"

RESULT_SCHEMA = "spe-result/1"


@dataclass(frozen=True)
class QnClass:
    id: str
    population: int
    think_time: float


@dataclass(frozen=True)
class QnCenter:
    id: str
    kind: str  # DELAY or QUEUEING_PS


@dataclass(frozen=True)
class QnModel:
    classes: tuple[QnClass, ...]
    centers: tuple[QnCenter, ...]
    # demand[i][j]: aggregate service demand of class j at center i, seconds.
    # The delay-center row mirrors the class think times.
    demand: tuple[tuple[float, ...], ...]

    def class_ids(self) -> list[str]:
        return [c.id for c in self.classes]

    def center_ids(self) -> list[str]:
        return [k.id for k in self.centers]

    def ps_centers(self) -> list[QnCenter]:
        return [k for k in self.centers if k.kind == QUEUEING_PS]

    def delay_center(self) -> QnCenter:
        for k in self.centers:
            if k.kind == DELAY:
                return k
        raise InvalidModelError([Violation("NO_DELAY", "/centers", "no delay center")])

    def demand_of(self, center_id: str, class_id: str) -> float:
        i = self.center_ids().index(center_id)
        j = self.class_ids().index(class_id)
        return self.demand[i][j]

    def lattice_size(self) -> int:
        size = 1
        for c in self.classes:
            size *= c.population + 1
        return size

    def validate(self) -> None:
        problems: list[Violation] = []
        delays = [k for k in self.centers if k.kind == DELAY]
        if len(delays) != 1:
            problems.append(Violation("DELAY_COUNT", "/centers", f"expected exactly one delay center, got {len(delays)}"))
        ids = self.center_ids()
        if len(set(ids)) != len(ids):
            problems.append(Violation("DUP_ID", "/centers", "duplicate center ids"))
        cids = self.class_ids()
        if len(set(cids)) != len(cids):
            problems.append(Violation("DUP_ID", "/classes", "duplicate class ids"))
        if len(self.demand) != len(self.centers):
            problems.append(Violation("SHAPE", "/demand", "demand rows must match centers"))
        for i, row in enumerate(self.demand):
            if len(row) != len(self.classes):
                problems.append(Violation("SHAPE", f"/demand/{i}", "demand row length must match classes"))
            for j, d in enumerate(row):
                if d < 0 or not math.isfinite(d):
                    problems.append(Violation("DEMAND", f"/demand/{i}/{j}", f"demand {d} must be finite and >= 0"))
        for j, cls in enumerate(self.classes):
            if cls.population < 1:
                problems.append(Violation("POPULATION", f"/classes/{cls.id}", "population must be >= 1"))
            if cls.think_time < 0:
                problems.append(Violation("THINK_TIME", f"/classes/{cls.id}", "think time must be >= 0"))
            if not problems and not any(
                row[j] > 0 for row, k in zip(self.demand, self.centers) if k.kind == QUEUEING_PS
            ):
                problems.append(
                    Violation("ZERO_DEMAND_CLASS", f"/classes/{cls.id}", "class places no demand on any queueing center")
                )
        if problems:
            raise InvalidModelError(problems)

    def ps_demand_array(self) -> np.ndarray:
        """(K, C) demand matrix restricted to queueing centers."""
        rows = [row for row, k in zip(self.demand, self.centers) if k.kind == QUEUEING_PS]
        return np.array(rows, dtype=np.float64).reshape(len(rows), len(self.classes))


@dataclass(frozen=True)
class SolverResult:
    class_ids: tuple[str, ...]
    center_ids: tuple[str, ...]
    populations: dict[str, int]
    think_times: dict[str, float]
    throughput: dict[str, float]
    cycle_time: dict[str, float]
    server_side_response: dict[str, float]
    residence: dict[str, dict[str, float]]  # center -> class -> seconds
    queue_length: dict[str, dict[str, float]]
    utilization: dict[str, float]  # queueing centers only
    method: str = "mva-exact"
    approximate: bool = False
    converged: bool = True
    iterations: int = 0


@dataclass(frozen=True)
class SimResult:
    result: SolverResult
    half_width_throughput: dict[str, float]
    half_width_utilization: dict[str, float]
    seed: int
    warmup: float
    horizon: float
    batches: int


def qn_to_json(qn: QnModel) -> dict:
    return {
        "classes": [
            {"id": c.id, "population": c.population, "thinkTimeSec": c.think_time} for c in qn.classes
        ],
        "centers": [{"id": k.id, "kind": k.kind} for k in qn.centers],
        "demand": [
            {"center": k.id, "values": {c.id: row[j] for j, c in enumerate(qn.classes)}}
            for k, row in zip(qn.centers, qn.demand)
        ],
    }


def qn_from_json(doc: dict) -> QnModel:
    try:
        classes = tuple(
            QnClass(id=c["id"], population=int(c["population"]), think_time=float(c["thinkTimeSec"]))
            for c in doc["classes"]
        )
        centers = tuple(QnCenter(id=k["id"], kind=k["kind"]) for k in doc["centers"])
        by_center = {row["center"]: row["values"] for row in doc["demand"]}
        demand = tuple(
            tuple(float(by_center[k.id][c.id]) for c in classes) for k in centers
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed QN document: {exc!r}", "/") from exc
    return QnModel(classes=classes, centers=centers, demand=demand)


def result_to_json(res: SolverResult) -> dict:
    return {
        "version": RESULT_SCHEMA,
        "method": res.method,
        "approximate": res.approximate,
        "converged": res.converged,
        "iterations": res.iterations,
        "classes": [
            {
                "id": c,
                "population": res.populations[c],
                "thinkTimeSec": res.think_times[c],
                "throughputPerSec": res.throughput[c],
                "cycleTimeSec": res.cycle_time[c],
                "serverSideResponseSec": res.server_side_response[c],
            }
            for c in res.class_ids
        ],
        "centers": [
            {
                "id": k,
                "utilization": res.utilization.get(k),
                "residenceSec": res.residence[k],
                "queueLength": res.queue_length[k],
            }
            for k in res.center_ids
        ],
    }


def result_from_json(doc: dict) -> SolverResult:
    classes = doc["classes"]
    centers = doc["centers"]
    return SolverResult(
        class_ids=tuple(c["id"] for c in classes),
        center_ids=tuple(k["id"] for k in centers),
        populations={c["id"]: int(c["population"]) for c in classes},
        think_times={c["id"]: float(c["thinkTimeSec"]) for c in classes},
        throughput={c["id"]: float(c["throughputPerSec"]) for c in classes},
        cycle_time={c["id"]: float(c["cycleTimeSec"]) for c in classes},
        server_side_response={c["id"]: float(c["serverSideResponseSec"]) for c in classes},
        residence={k["id"]: {c: float(v) for c, v in k["residenceSec"].items()} for k in centers},
        queue_length={k["id"]: {c: float(v) for c, v in k["queueLength"].items()} for k in centers},
        utilization={k["id"]: float(k["utilization"]) for k in centers if k["utilization"] is not None},
        method=doc.get("method", "mva-exact"),
        approximate=bool(doc.get("approximate", False)),
        converged=bool(doc.get("converged", True)),
        iterations=int(doc.get("iterations", 0)),
    )
