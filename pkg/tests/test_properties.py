"""Randomized invariants checked with hypothesis."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from noregret import geometry as G
from noregret import regret as rg
from noregret import strategies as S
from noregret.environments import PayoffStream
from noregret.schedules import ParameterSchedule as PS
from noregret.schedules import partial_sums, values

D = 4
vec = arrays(float, D, elements=st.floats(-20, 20, allow_nan=False))

REGS = {
    "entropy": G.entropy(D),
    "euclid_simplex": G.euclidean(G.ConvexBody.simplex(D)),
    "euclid_box": G.euclidean(G.ConvexBody.box(-np.ones(D), np.ones(D))),
    "euclid_ball": G.euclidean(G.ConvexBody.ball(np.zeros(D), 1.5)),
    "minimal_box": G.minimal_depth_regularizer(G.ConvexBody.box(np.zeros(D), np.ones(D))),
}
reg_names = st.sampled_from(sorted(REGS))


def _dual(reg, v):
    return G.norm(v, G.dual_tag(reg.body.norm_tag))


@given(reg_names, vec)
def test_choice_lies_in_body(name, y):
    reg = REGS[name]
    assert reg.body.contains(G.choice_map(reg, y), tol=1e-9)


@given(reg_names, vec, vec)
def test_fenchel_young(name, y, w):
    reg = REGS[name]
    x = G.choice_map(reg, y)
    hstar = G.conjugate_value(reg, y)
    assert hstar == pytest.approx(y @ x - G.regularizer_value(reg, x), abs=1e-9 * (1 + abs(hstar)))
    z = G.choice_map(reg, w)
    assert hstar >= y @ z - G.regularizer_value(reg, z) - 1e-9 * (1 + abs(hstar))


@given(vec, st.floats(-1e3, 1e3, allow_nan=False))
def test_logit_shift_invariance(y, c):
    np.testing.assert_allclose(G.logit_choice(y + c), G.logit_choice(y), atol=1e-12)


@given(reg_names, vec, vec)
def test_choice_map_lipschitz(name, y1, y2):
    reg = REGS[name]
    gap = G.norm(G.choice_map(reg, y1) - G.choice_map(reg, y2), reg.body.norm_tag)
    assert gap <= _dual(reg, y1 - y2) / reg.K + 1e-9


@given(reg_names, vec, vec)
def test_bregman_sandwich(name, y1, y2):
    reg = REGS[name]
    b = G.bregman_conjugate(reg, y1, y2)
    assert -1e-9 <= b <= _dual(reg, y1 - y2) ** 2 / (2 * reg.K) + 1e-9 * (1 + abs(b))


@given(vec)
def test_simplex_projection_optimality(y):
    p = G.project_simplex(y)
    np.testing.assert_allclose(G.project_simplex(p), p, atol=1e-12)
    for z in np.eye(D):
        assert (y - p) @ (z - p) <= 1e-9


schedules = st.one_of(
    st.builds(PS.constant, st.floats(0.01, 10)),
    st.builds(PS.inv_sqrt, st.floats(0.01, 10)),
    st.builds(PS.harmonic, st.floats(0.01, 10)),
    st.builds(PS.power, st.floats(0.01, 10), st.floats(0.05, 0.95)),
)


@given(schedules, st.integers(1, 300))
def test_schedule_monotone(sched, n):
    v = values(sched, n)
    assert np.all(v > 0) and np.all(np.diff(v) <= 0)
    assert v[0] == v[1]
    s = partial_sums(sched, n)
    assert np.all(np.diff(s) > 0)


@settings(max_examples=25)
@given(reg_names, schedules, st.integers(0, 2**32 - 1),
       st.sampled_from(["iid_uniform", "adversarial_best_response"]))
def test_dominance_chain_random(name, sched, seed, kind):
    reg = REGS[name]
    n = 40
    stream = PayoffStream(dim=D, M=1.0, kind=kind, norm_tag=reg.body.norm_tag, seed=seed)
    tr = S.play_sequence(S.init(reg, sched), stream, n)
    emp = rg.regret_path(reg.body, tr.actions, tr.payoffs)
    t3 = rg.bound_thm3_path(reg, sched, tr.payoffs)
    t2 = rg.bound_thm2_path(reg, sched, n, norms=rg.dual_norms(reg, tr.payoffs))
    t2m = rg.bound_thm2_path(reg, sched, n, M=1.0)
    tol = 1e-8 * (1 + np.abs(t2m))
    assert np.all(emp <= t3 + tol)
    assert np.all(t3 <= t2 + tol)
    assert np.all(t2 <= t2m + tol)


@given(st.integers(0, 2**32 - 1), st.permutations(range(12)))
def test_max_regret_order_invariant(seed, perm):
    rng = np.random.default_rng(seed)
    U = rng.uniform(-1, 1, (12, 3))
    X = rng.dirichlet(np.ones(3), 12)
    body = G.ConvexBody.simplex(3)
    a, b = rg.RegretLedger(body), rg.RegretLedger(body)
    for k in range(12):
        a.record(U[k], X[k])
        b.record(U[perm[k]], X[perm[k]])
    assert rg.max_regret(a) == pytest.approx(rg.max_regret(b), abs=1e-12)
