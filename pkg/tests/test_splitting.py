import json
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from splitflow.dirac1d import keyframe_path
from splitflow.fleet import FleetConfig, random_lagrangian, random_operator_path
from splitflow.hsymp import Lagrangian, gap_distance, make_space, same_subspace, standard_J
from splitflow.pathindex import LagrangianPath, maslov_index
from splitflow.scenarios import (ScenarioConfig, corollary_path, cylinder_path, domain_wall_path,
                                 kernel_crossing_path, ker_geodesic, make_scenario, random_ker_lagrangian,
                                 rotating_ker_path, rotating_path, threeterm_fixture)
from splitflow.splitting import (HypothesisError, IdentityError, SplitScenario, auto_connector, build_eleven_paths,
                                 check_hypothesis, connector_sums, geodesic, verify_3term, verify_bunke, verify_loops,
                                 verify_splitting, verify_wbound, verify_yoshida)

SP1 = make_space(standard_J(1))
E1 = Lagrangian(np.array([[1.0], [0.0]], dtype=complex), SP1)
E2 = Lagrangian(np.array([[0.0], [1.0]], dtype=complex), SP1)


def constant_scenario(seed=0):
    D = random_operator_path(seed)(0.0)
    bs = D.boundary_space().space
    rng = np.random.default_rng(seed)
    bx, by = random_lagrangian(bs, rng), random_lagrangian(bs, rng)
    return SplitScenario(keyframe_path([D, D]), lambda t: bx, lambda t: by, seed=seed, name="constant")


# --- connectors ----------------------------------------------------------------------

def test_connector_equal_endpoints_is_constant():
    p = auto_connector(E1, E1)
    assert all(gap_distance(p(t), E1) < 1e-12 for t in np.linspace(0, 1, 5))


def test_connector_quarter_rotation():
    p = geodesic(E1, E2)
    assert gap_distance(p(0.0), E1) < 1e-12 and gap_distance(p(1.0), E2) < 1e-12
    # halfway along the quarter turn sits the diagonal line
    diag = Lagrangian(np.array([[1.0], [1.0]], dtype=complex) / np.sqrt(2), SP1)
    anti = Lagrangian(np.array([[1.0], [-1.0]], dtype=complex) / np.sqrt(2), SP1)
    assert min(gap_distance(p(0.5), diag), gap_distance(p(0.5), anti)) < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 3), st.sampled_from(["geodesic", "winding", "detour"]))
def test_connector_modes_hit_endpoints(seed, n, mode):
    sp = make_space(standard_J(n))
    rng = np.random.default_rng(seed)
    a, b = random_lagrangian(sp, rng), random_lagrangian(sp, rng)
    p = auto_connector(a, b, mode, rng=rng)
    assert gap_distance(p(0.0), a) < 1e-9 and gap_distance(p(1.0), b) < 1e-9


def test_connector_rejections():
    with pytest.raises(HypothesisError):
        auto_connector(E1, E2, "constant")
    with pytest.raises(ValueError):
        auto_connector(E1, E2, "bogus")


# --- eleven paths and the master identity --------------------------------------------

def test_constant_scenario_all_zero():
    rep = verify_splitting(constant_scenario())
    assert rep.sf_total == 0 and rep.residual == 0
    assert rep.sf_X == rep.sf_Y == rep.mu_rev == 0
    # individual stretch terms may cross, but the mu-terms cancel
    assert sum(rep.mu.values()) == 0


def test_chain_and_connector_endpoints():
    sc = constant_scenario()
    paths = build_eleven_paths(sc)
    assert len(paths.L) == len(paths.M) == 11
    for seq in (paths.L, paths.M):
        assert all(gap_distance(a(1.0), b(0.0)) < 1e-9 for a, b in zip(seq[:-1], seq[1:]))
    # a constant connector cannot join the adiabatic limit to an unrelated B_Y(0)
    with pytest.raises(HypothesisError, match="equal endpoints"):
        build_eleven_paths(replace(sc, connector="constant"))


def test_loop_scenario_composite_closes():
    p = corollary_path(0, "invertible", loop=True)
    bs = p(0.0).boundary_space().space
    rng = np.random.default_rng(0)
    bx = rotating_path(bs, random_lagrangian(bs, rng), 1)
    by = rotating_path(bs, random_lagrangian(bs, rng), -1)
    paths = build_eleven_paths(SplitScenario(p, bx, by))
    assert gap_distance(paths.L[0](0.0), paths.L[-1](1.0)) < 1e-9
    assert gap_distance(paths.M[0](0.0), paths.M[-1](1.0)) < 1e-9


@pytest.mark.parametrize("seed", [0, 5])
def test_random_scenario_residual_zero(seed):
    rep = verify_splitting(make_scenario(seed))
    assert rep.residual == 0
    assert rep.sf_X_oracle == rep.sf_X and rep.sf_Y_oracle == rep.sf_Y


def test_report_serialization():
    rep = verify_splitting(constant_scenario(1))
    d = json.loads(rep.to_json())
    assert d["residual"] == 0 and set(d["mu"]) == {"1", "2", "4", "5", "7", "8", "10", "11"}
    assert rep.to_json() == verify_splitting(constant_scenario(1)).to_json()
    assert "residual" in rep.to_table()


def test_connector_sums_invariant():
    sums = connector_sums(make_scenario(3, ScenarioConfig("rotating")))
    assert len(set(sums.values())) == 1


# --- hypotheses ----------------------------------------------------------------------

def test_gap_and_trans_on_cylinder():
    p = cylinder_path(0)
    bs = p(0.0).boundary_space().space
    rng = np.random.default_rng(0)
    B = random_lagrangian(bs, rng)
    sc = SplitScenario(p, lambda t: B, lambda t: B)
    assert check_hypothesis(sc, "gap")[0]
    ok, diag = check_hypothesis(sc, "trans")
    assert ok  # the limits are P^- and P^+ of S_Σ
    assert check_hypothesis(sc, "L2ker")[0]


def test_l2ker_fails_on_domain_wall():
    p = domain_wall_path(0)
    bs = p(0.0).boundary_space().space
    B = random_lagrangian(bs, np.random.default_rng(0))
    ok, diag = check_hypothesis(SplitScenario(p, lambda t: B, lambda t: B), "L2ker")
    assert not ok and any(diag["dims"].values())


def test_unknown_hypothesis():
    with pytest.raises(ValueError):
        check_hypothesis(constant_scenario(), "nope")


# --- corollaries ---------------------------------------------------------------------

def test_bunke_and_rejection():
    assert verify_bunke(corollary_path(1, "invertible")).residual == 0
    with pytest.raises(HypothesisError, match="ker S"):
        verify_bunke(kernel_crossing_path(0))


def test_bunke_yoshida_agree_when_both_apply():
    p = cylinder_path(2)
    b, y = verify_bunke(p), verify_yoshida(p)
    assert b.lhs == y.lhs == 0 and y.terms == {"mu(L~X,L~Y)": 0}


def test_yoshida_fixture_and_rejections():
    assert verify_yoshida(corollary_path(2, "kernel")).residual == 0
    with pytest.raises(HypothesisError, match="L2ker"):
        verify_yoshida(corollary_path(0, "invertible"))
    with pytest.raises(HypothesisError, match="dim ker"):
        verify_yoshida(kernel_crossing_path(1))


def test_3term_and_mispinned():
    p = corollary_path(1, "kernel")
    AX, AY, lam = threeterm_fixture(p, np.random.default_rng(1), "swap")
    assert verify_3term(p, AX, AY, lam).residual == 0
    bad = random_ker_lagrangian(1, np.random.default_rng(7))
    with pytest.raises(HypothesisError, match="mis-pinned"):
        verify_3term(p, lambda t: bad, AY, lam)


def test_loops_constant_and_rotating():
    p = corollary_path(3, "invertible", loop=True)
    bs = p(0.0).boundary_space().space
    rng = np.random.default_rng(3)
    B = random_lagrangian(bs, rng)
    rep = verify_loops(p, lambda t: B, lambda t: B)
    assert rep.residual == 0
    rep = verify_loops(p, rotating_path(bs, random_lagrangian(bs, rng), 1),
                       rotating_path(bs, random_lagrangian(bs, rng), 2))
    assert rep.residual == 0 and any(rep.terms.values())
    with pytest.raises(HypothesisError, match="loop"):
        verify_loops(corollary_path(3, "invertible"), lambda t: B, lambda t: B)


def test_wbound_constant_and_rotating():
    D = corollary_path(4, "kernel")(0.5)
    rng = np.random.default_rng(4)
    a = random_ker_lagrangian(1, rng)
    rep = verify_wbound(D, lambda t: a)
    assert rep.lhs == 0 and not any(rep.terms.values())
    rep = verify_wbound(D, rotating_ker_path(a, 1, 1))
    assert rep.residual == 0 and abs(rep.lhs) == 1
    rep = verify_wbound(D, ker_geodesic(a, random_ker_lagrangian(1, rng), 1))
    assert rep.residual == 0


def test_maslov_of_constant_boundary_pair_is_zero():
    assert maslov_index(LagrangianPath.constant(E1), LagrangianPath.constant(E2)) == 0
    assert same_subspace(E1, E1)


def test_integers_are_tolerance_robust():
    sc = make_scenario(2)
    a, b = verify_splitting(sc, tol=1e-6), verify_splitting(sc, tol=1e-4)
    assert (a.sf_total, a.sf_X, a.sf_Y, a.mu_rev, a.mu) == (b.sf_total, b.sf_X, b.sf_Y, b.mu_rev, b.mu)


@pytest.mark.parametrize("w", [0.1, 0.25])
def test_identity_is_collar_width_independent(w):
    rep = verify_splitting(make_scenario(1, ScenarioConfig(fleet=FleetConfig(w=w))))
    assert rep.residual == 0
