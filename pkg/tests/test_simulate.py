import pytest

from spe_workbench.errors import InvalidModelError
from spe_workbench.mva import solve_exact_mva
from spe_workbench.qn import DELAY, QUEUEING_PS, QnCenter, QnClass, QnModel
from spe_workbench.simulate import simulate


def hand_net():
    return QnModel(
        classes=(QnClass("c", 2, 0.0),),
        centers=(QnCenter("t", DELAY), QnCenter("a", QUEUEING_PS), QnCenter("b", QUEUEING_PS)),
        demand=((0.0,), (1.0,), (2.0,)),
    )


def test_sim_covers_exact_on_hand_net():
    sim = simulate(hand_net(), horizon=1e6, warmup=1e5, seed=3)
    x = sim.result.throughput["c"]
    hw = sim.half_width_throughput["c"]
    assert abs(x - 3.0 / 7.0) <= hw
    assert hw < 0.01


def test_zero_demand_center_idle():
    qn = QnModel(
        classes=(QnClass("c", 3, 1.0),),
        centers=(QnCenter("t", DELAY), QnCenter("a", QUEUEING_PS), QnCenter("idle", QUEUEING_PS)),
        demand=((1.0,), (0.5,), (0.0,)),
    )
    sim = simulate(qn, horizon=5000.0, warmup=500.0, seed=9)
    assert sim.result.utilization["idle"] == 0.0
    assert sim.result.queue_length["idle"]["c"] == 0.0


def test_same_seed_bit_identical():
    a = simulate(hand_net(), horizon=20000.0, warmup=2000.0, seed=42)
    b = simulate(hand_net(), horizon=20000.0, warmup=2000.0, seed=42)
    assert a.result == b.result
    assert a.half_width_throughput == b.half_width_throughput
    assert a.half_width_utilization == b.half_width_utilization


def test_different_seed_differs():
    a = simulate(hand_net(), horizon=20000.0, warmup=2000.0, seed=42)
    b = simulate(hand_net(), horizon=20000.0, warmup=2000.0, seed=43)
    assert a.result.throughput != b.result.throughput


def test_multiclass_estimates_match_exact():
    qn = QnModel(
        classes=(QnClass("x", 5, 2.0), QnClass("y", 3, 0.0)),
        centers=(QnCenter("t", DELAY), QnCenter("a", QUEUEING_PS), QnCenter("b", QUEUEING_PS)),
        demand=((2.0, 0.0), (0.7, 0.3), (0.4, 1.1)),
    )
    sim = simulate(qn, horizon=60000.0, warmup=6000.0, seed=11)
    exact = solve_exact_mva(qn)
    for cid in ("x", "y"):
        # generous: 3 half-widths, this is a smoke check not the acceptance suite
        assert abs(sim.result.throughput[cid] - exact.throughput[cid]) <= 3 * sim.half_width_throughput[cid]
    for k in ("a", "b"):
        assert abs(sim.result.utilization[k] - exact.utilization[k]) <= 3 * sim.half_width_utilization[k] + 0.01


def test_horizon_must_exceed_warmup():
    with pytest.raises(ValueError):
        simulate(hand_net(), horizon=10.0, warmup=10.0, seed=1)


def test_invalid_model_rejected():
    qn = QnModel(
        classes=(QnClass("c", 1, 0.0),),
        centers=(QnCenter("t", DELAY), QnCenter("a", QUEUEING_PS)),
        demand=((0.0,), (0.0,)),
    )
    with pytest.raises(InvalidModelError):
        simulate(qn, horizon=100.0, warmup=0.0, seed=1)
