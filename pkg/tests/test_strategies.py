import math

import numpy as np
import pytest

from noregret import geometry as G
from noregret import strategies as S
from noregret.environments import PayoffStream
from noregret.errors import InvalidInputError
from noregret.schedules import ParameterSchedule as PS

E = math.e


def test_init_examples():
    np.testing.assert_allclose(S.make_named("EW", eta=1.0, d=3).x, [1 / 3] * 3)
    box = G.ConvexBody.box([0, 0], [1, 1])
    st = S.init(G.euclidean(box, [0.5, 0.5]), PS.constant(1.0))
    np.testing.assert_allclose(st.x, [0.5, 0.5])
    st = S.init(G.euclidean(G.ConvexBody.simplex(2)), PS.constant(1.0))
    np.testing.assert_allclose(st.x, [0.5, 0.5])
    assert st.n == 0 and not st.U.any()


def test_step_examples():
    st = S.make_named("EW", eta=1.0, d=2)
    np.testing.assert_allclose(S.step(st, [1, 0]), [E / (E + 1), 1 / (E + 1)], atol=1e-15)
    st = S.make_named("OGD_L", eta=1.0, body=G.ConvexBody.ball([0, 0], 1.0))
    np.testing.assert_allclose(S.step(st, [3, 4]), [0.6, 0.8], atol=1e-15)
    st = S.make_named("EW", eta=0.4, d=3)
    S.step(st, [0.3, -0.2, 0.5])
    x = st.x.copy()
    np.testing.assert_array_equal(S.step(st, [0, 0, 0]), x)


def test_step_rejects_bad_payoffs():
    st = S.make_named("EW", eta=1.0, d=2)
    with pytest.raises(InvalidInputError):
        S.step(st, [1, 2, 3])
    with pytest.raises(InvalidInputError):
        S.step(st, [np.nan, 0])


def test_invariant_x_matches_choice_map():
    reg = G.euclidean(G.ConvexBody.simplex(4))
    st = S.init(reg, PS.power(0.8, 0.3))
    rng = np.random.default_rng(0)
    for _ in range(20):
        S.step(st, rng.uniform(-1, 1, 4))
        np.testing.assert_array_equal(st.x, G.choice_map(reg, st.schedule.value_at(st.n) * st.U))


def test_make_named_missing_params():
    with pytest.raises(InvalidInputError, match="eta"):
        S.make_named("EW", d=3)
    with pytest.raises(InvalidInputError, match="'d'"):
        S.make_named("EW", eta=1.0)
    with pytest.raises(InvalidInputError, match="alpha"):
        S.make_named("VSFP", eta=1.0, reg=G.entropy(2))
    with pytest.raises(InvalidInputError, match="reg"):
        S.make_named("SFP", eta=1.0)
    with pytest.raises(InvalidInputError):
        S.make_named("FTL", eta=1.0, d=2)


def test_vsfp_half_equals_ew_prime():
    stream = PayoffStream(dim=5, seed=9)
    a = S.play_sequence(S.make_named("VSFP", eta=0.9, alpha=0.5, reg=G.entropy(5)), stream.clone(), 300)
    b = S.play_sequence(S.make_named("EW_PRIME", eta=0.9, d=5), stream.clone(), 300)
    np.testing.assert_allclose(a.actions, b.actions, atol=1e-12, rtol=0)


def test_sfp_large_eta_approaches_best_response():
    st = S.make_named("SFP", eta=1e3, reg=G.entropy(3))
    S.step(st, [0.1, 0.3, 0.2])
    assert st.x[1] > 1 - 1e-6


def test_play_sequence_examples():
    st = S.make_named("EW", eta=1.0, d=2)
    tr = S.play_sequence(st, PayoffStream.fixed(np.zeros((0, 2)), dim=2))
    assert tr.actions.shape == (1, 2) and len(tr.pairs()) == 1
    st = S.make_named("EW", eta=1.0, d=2)
    tr = S.play_sequence(st, PayoffStream.fixed([[1, 0], [0, 1]]))
    np.testing.assert_allclose(tr.actions[-1], [0.5, 0.5])
    st = S.make_named("EW", eta=0.1, d=3)
    tr = S.play_sequence(st, PayoffStream.fixed(np.tile([0.2, 0.5, 0.1], (1000, 1))))
    assert np.abs(tr.actions[-1] - [0, 1, 0]).sum() < 0.01


def test_fast_and_stepwise_paths_agree():
    for kind in ("iid_uniform", "adversarial_best_response"):
        for reg in (G.entropy(4), G.euclidean(G.ConvexBody.simplex(4))):
            for sched in (PS.inv_sqrt(0.7), PS.constant(0.2), PS.harmonic(3.0)):
                fast = S.play_sequence(S.init(reg, sched), PayoffStream(dim=4, kind=kind, seed=3), 150)
                st = S.init(reg, sched)
                stream = PayoffStream(dim=4, kind=kind, seed=3)
                X = [st.x.copy()]
                for _ in range(150):
                    X.append(S.step(st, stream.next_payoff(st.x)).copy())
                np.testing.assert_allclose(fast.actions, np.array(X), atol=1e-14, rtol=0)


def test_determinism_bit_identical():
    runs = [S.play_sequence(S.make_named("EW_PRIME", eta=1.0, d=6), PayoffStream(dim=6, seed=4), 500)
            for _ in range(2)]
    assert np.array_equal(runs[0].actions, runs[1].actions)


def test_ew_shift_invariance():
    rng = np.random.default_rng(2)
    P = rng.uniform(-1, 1, (100, 4))
    c = rng.normal(size=(100, 1))
    a = S.play_sequence(S.make_named("EW", eta=0.5, d=4), PayoffStream.fixed(P))
    b = S.play_sequence(S.make_named("EW", eta=0.5, d=4), PayoffStream.fixed(P + c, M=10.0))
    np.testing.assert_allclose(a.actions, b.actions, atol=1e-12)


def test_doubling_resets_score():
    st = S.init(G.entropy(2), PS.doubling(1.0))
    # stage 2 opens a block, so x_2 is played from a fresh score
    np.testing.assert_array_equal(S.step(st, [1, 0]), [0.5, 0.5])
    assert st.n == 1 and not st.U.any()
    S.step(st, [0, 1])
    np.testing.assert_array_equal(st.U, [0, 1])
    S.step(st, [0, 1])
    assert st.n == 3 and not st.U.any()


def test_stream_dimension_mismatch():
    with pytest.raises(InvalidInputError):
        S.play_sequence(S.make_named("EW", eta=1.0, d=3), PayoffStream(dim=4), 5)
