import math

import numpy as np
import pytest

from noregret import continuous as C
from noregret import geometry as G
from noregret.environments import PayoffStream
from noregret.errors import InvalidInputError
from noregret.schedules import ParameterSchedule as PS

E = math.e
EW1 = (PS.constant(1.0), G.entropy(2))


def _run(P, sched, reg, nodes=None):
    return C.InterpolatedRun(np.asarray(P, dtype=float), sched, reg, nodes)


def test_staircase_interpolation():
    P = [[1, 0], [0, 1], [2, 2]]
    run = _run(P, PS.harmonic(1.0), G.entropy(2))
    np.testing.assert_array_equal(run.u_t(0.5), [1, 0])
    np.testing.assert_array_equal(run.u_t(1.0), [1, 0])
    np.testing.assert_array_equal(run.u_t(1.0001), [0, 1])
    assert run.eta_t(0.3) == 1.0 and run.eta_t(1.0) == 1.0
    assert run.eta_t(2.0) == 0.5 and run.eta_t(2.99) == 0.5


def test_payoff_integral_examples():
    assert C.continuous_payoff_integral(_run(np.zeros((4, 3)), PS.inv_sqrt(1.0), G.entropy(3))) == 0.0
    run = _run([[1, 0]], *EW1)
    exact = math.log(E + 1) - math.log(2)
    assert C.continuous_payoff_integral(run) == pytest.approx(exact, abs=1e-8)


def test_payoff_integral_node_doubling():
    P = PayoffStream(dim=4, seed=3).generate(40)
    for sched in (PS.inv_sqrt(1.0), PS.constant(0.5)):
        a = C.continuous_payoff_integral(_run(P, sched, G.entropy(4), 64))
        b = C.continuous_payoff_integral(_run(P, sched, G.entropy(4), 128))
        assert abs(a - b) < 1e-9


def test_refinement_shrinks_self_difference():
    P = PayoffStream(dim=3, seed=8).generate(20)
    vals = [C.continuous_payoff_integral(_run(P, PS.constant(1.0), G.entropy(3), m))
            for m in (4, 8, 16, 32, 64, 128, 256)]
    diffs = np.abs(np.diff(vals))
    assert np.all(diffs[1:] <= diffs[:-1])
    assert diffs[-1] < 1e-9


def test_continuous_regret_examples():
    run = _run(np.zeros((3, 2)), PS.inv_sqrt(1.0), G.entropy(2))
    assert C.continuous_regret(run) == 0.0
    assert C.continuous_bound(run) == pytest.approx(math.log(2) * math.sqrt(3))
    run = _run([[1, 0]], *EW1)
    r = C.continuous_regret(run)
    assert r == pytest.approx(1 - (math.log(E + 1) - math.log(2)), abs=1e-8)
    assert r == pytest.approx(0.380, abs=5e-4)
    assert r <= math.log(2)


def test_continuous_regret_random_inv_sqrt():
    P = PayoffStream(dim=5, seed=12).generate(100)
    run = _run(P, PS.inv_sqrt(1.0), G.entropy(5))
    assert C.continuous_regret(run) <= C.continuous_bound(run) + C.BOUND_SLACK


def test_interval_gap_examples():
    run = _run([[0.4, 0.1], [0, 0]], PS.constant(1.0), G.entropy(2))
    g = C.interval_gap(run, 2)
    assert g.lhs == 0.0 and g.rhs == 0.0
    g = C.interval_gap(_run([[1, 0]], *EW1), 1)
    expected = math.log((E + 1) / 2) - 0.5
    assert g.lhs == pytest.approx(expected, abs=1e-8)
    assert g.rhs == pytest.approx(expected, abs=1e-15)
    with pytest.raises(IndexError):
        C.interval_gap(run, 3)
    with pytest.raises(IndexError):
        C.interval_gap(run, 0)


def test_interval_gap_identity_ew_prime():
    P = PayoffStream(dim=6, seed=21).generate(50)
    run = _run(P, PS.inv_sqrt(1.0), G.entropy(6))
    assert max(g.abs_diff for g in C.interval_gaps(run)) < 1e-6


def test_batched_gaps_match_single():
    P = PayoffStream(dim=3, seed=1).generate(10)
    run = _run(P, PS.power(1.0, 0.4), G.entropy(3))
    for g in C.interval_gaps(run):
        single = C.interval_gap(run, g.k)
        assert single.lhs == pytest.approx(g.lhs, abs=1e-13)
        assert single.rhs == pytest.approx(g.rhs, abs=1e-13)


@pytest.mark.parametrize("body", [
    G.ConvexBody.simplex(4),
    G.ConvexBody.box(np.zeros(4), np.ones(4)),
    G.ConvexBody.ball(np.zeros(4), 1.0),
])
def test_euclidean_identity_with_kinks(body):
    P = PayoffStream(dim=4, seed=17, norm_tag=body.norm_tag).generate(30)
    run = _run(P, PS.inv_sqrt(1.0), G.euclidean(body))
    assert run.nodes_per_interval == 256
    assert max(g.abs_diff for g in C.interval_gaps(run)) < 1e-5


def test_gap_bound_examples():
    assert C.gap_bound_check(_run(np.zeros((5, 2)), PS.constant(1.0), G.entropy(2))) == (0.0, 0.0)
    gap, bound = C.gap_bound_check(_run([[1, 0]], *EW1))
    assert bound == 0.5
    assert gap == pytest.approx(0.5 - (1 - math.log((E + 1) / 2)), abs=1e-8)
    assert gap <= bound
    P = PayoffStream(dim=4, seed=30).generate(200)
    gap, bound = C.gap_bound_check(_run(P, PS.constant(0.1), G.entropy(4)))
    assert bound == pytest.approx(0.1 * (np.abs(P).max(axis=1) ** 2).sum() / 2)
    assert gap <= bound + 1e-6


def test_invalid_runs():
    with pytest.raises(InvalidInputError):
        _run([[1, 0]], PS.constant(1.0), G.entropy(2), nodes=3)
    with pytest.raises(InvalidInputError):
        _run([[1, 0, 0]], PS.constant(1.0), G.entropy(2))
    with pytest.raises(InvalidInputError):
        C.continuous_payoff_integral(_run(np.zeros((0, 2)), PS.constant(1.0), G.entropy(2)))
