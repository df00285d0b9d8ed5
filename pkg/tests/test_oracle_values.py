"""Frozen reference outputs; any change here means the numerics moved."""
import math

import numpy as np

from noregret import geometry as G
from noregret import optimize as O
from noregret import regret as rg
from noregret import strategies as S
from noregret.environments import PayoffStream, SplitMix64, replication_seed, sample_action
from noregret.schedules import ParameterSchedule as PS


def test_splitmix_frozen():
    rng = SplitMix64(42)
    assert [rng.next_u64() for _ in range(3)] == [
        13679457532755275413, 2949826092126892291, 5139283748462763858]
    assert SplitMix64(7).next_float() == 0.3898297483912715
    assert replication_seed(5, 3) == 11409396526365357622


def test_iid_stream_frozen():
    P = PayoffStream(dim=3, seed=11).generate(2)
    assert P.tolist() == [
        [-0.36751121415818355, -0.47526969645256356, 0.27608468403669706],
        [0.009228062421573258, -0.6696148987593606, 0.10387538442353406],
    ]


def test_sample_action_frozen():
    assert sample_action([0.2, 0.3, 0.5], 123) == 2


def test_ew_adversarial_frozen():
    st = S.make_named("EW", eta=0.5, d=3)
    tr = S.play_sequence(st, PayoffStream(dim=3, kind="adversarial_best_response", seed=0), 5)
    np.testing.assert_allclose(tr.actions[-1], [0.4223187982515182, 0.4223187982515182,
                                                0.15536240349696362], rtol=0, atol=1e-15)
    path = rg.regret_path(st.reg.body, tr.actions, tr.payoffs)
    np.testing.assert_allclose(path, [0, 1.3333333333333333, 0.9094502180991624,
                                      0.5987254111052351, 1.9320587444385684,
                                      1.5081756292043975], rtol=0, atol=1e-14)
    reg, sched = G.entropy(3), PS.inv_sqrt(1.0)
    assert math.isclose(rg.bound_thm3(reg, sched, tr.payoffs), 3.9055788335796273, rel_tol=1e-13)
    norms = rg.dual_norms(reg, tr.payoffs)
    assert math.isclose(rg.bound_thm2(reg, sched, 5, norms=norms), 4.348800283566602, rel_tol=1e-13)


def test_meb_frozen():
    ball = G.min_enclosing_ball([[0, 0], [2, 0], [0, 2]])
    np.testing.assert_allclose(ball.center, [0.9999989999129925, 0.9999989999129926], atol=1e-12)
    assert math.isclose(ball.radius, 1.4142135623738021, rel_tol=1e-12)


def test_variable_parameter_frozen():
    prog = O.quadratic_ball_problem([0.3, -0.2, 0.5])
    res = O.variable_parameter_solve(prog, G.euclidean(prog.body), 100)
    assert math.isclose(res.f_avg[-1], 0.007796049072585187, rel_tol=1e-12)
    assert math.isclose(res.f_best[-1], 0.0024893222765598466, rel_tol=1e-12)
