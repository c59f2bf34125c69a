import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from splitflow.fleet import FleetConfig, random_lagrangian
from splitflow.hsymp import gap_distance, is_lagrangian, make_space, same_subspace, standard_J
from splitflow.scenarios import (KINDS, ScenarioConfig, corollary_path, cylinder_path, domain_wall_path,
                                 integer_loop, kernel_crossing_path, kernel_embedding, kernel_space, ker_geodesic,
                                 make_scenario, random_ker_lagrangian, rotating_ker_path, rotating_path, scenario_fleet,
                                 smooth_lagrangian_path, threeterm_fixture)


def min_abs_eig(path, key, ts=np.linspace(0, 1, 21)):
    return min(np.min(np.abs(np.linalg.eigvalsh(getattr(path(t), key)))) for t in ts)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 3), st.floats(0.5, 4.0))
def test_smooth_path_is_lagrangian(seed, n, speed):
    sp = make_space(standard_J(n))
    f = smooth_lagrangian_path(sp, np.random.default_rng(seed), speed=speed)
    assert all(is_lagrangian(sp, f(t).frame) for t in (0.0, 0.4, 1.0))


@pytest.mark.parametrize("k", [-2, 1, 3])
def test_rotating_path_closes(k):
    sp = make_space(standard_J(2))
    B = random_lagrangian(sp, np.random.default_rng(k + 5))
    p = rotating_path(sp, B, k)
    assert gap_distance(p(0.0), B) < 1e-12 and gap_distance(p(1.0), B) < 1e-10


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31))
def test_integer_loop_closes(seed):
    sp = make_space(standard_J(2))
    f = integer_loop(sp, np.random.default_rng(seed))
    assert gap_distance(f(0.0), f(1.0)) < 1e-9


def test_make_scenario_kinds_and_determinism():
    with pytest.raises(ValueError):
        make_scenario(0, ScenarioConfig("bogus"))
    for kind in KINDS:
        a, b = make_scenario(4, ScenarioConfig(kind)), make_scenario(4, ScenarioConfig(kind))
        D0, E0 = a.path(0.3), b.path(0.3)
        assert np.array_equal(D0.S_p, E0.S_p) and np.array_equal(D0.S_q, E0.S_q)
        assert same_subspace(a.bx(0.6), b.bx(0.6))


def test_scenario_fleet_cycles():
    fleet = scenario_fleet(8)
    assert len(fleet) == 8
    assert fleet[3].path(0.0).space.n == 2 and fleet[0].path(0.0).space.n == 1


@pytest.mark.parametrize("seed", [0, 3])
def test_corollary_path_kinds(seed):
    inv = corollary_path(seed, "invertible")
    assert min_abs_eig(inv, "S_p") > 0.2 and min_abs_eig(inv, "S_q") > 0.2
    ker = corollary_path(seed, "kernel")
    assert all(np.count_nonzero(ker(t).S_p) == 0 for t in (0.0, 0.5, 1.0))
    loop = corollary_path(seed, "invertible", loop=True)
    assert np.allclose(loop(0.0).S_q, loop(1.0).S_q)


def test_kernel_crossing_has_kernel_midway():
    p = kernel_crossing_path(0)
    assert np.min(np.abs(np.linalg.eigvalsh(p(0.5).S_q))) < 1e-12
    assert np.allclose(p(1.0).S_q, -p(0.0).S_q)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_cylinder_path_is_constant_in_x(seed):
    p = cylinder_path(seed, cfg=FleetConfig())
    for t in (0.0, 0.37, 1.0):
        D = p(t)
        assert np.array_equal(D.S_p, D.S_q)
        assert all(np.array_equal(a, D.S_p) for a in D.x_pieces + D.y_pieces)
    assert min_abs_eig(p, "S_p") > 1e-3


def test_domain_wall_shape():
    D = domain_wall_path(0)(0.5)
    assert np.allclose(D.S_q, -D.S_p)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 2))
def test_ker_helpers(seed, n):
    rng = np.random.default_rng(seed)
    ks, E = kernel_space(n), kernel_embedding(n)
    a, b = random_ker_lagrangian(n, rng), random_ker_lagrangian(n, rng)
    assert is_lagrangian(ks, E.conj().T @ a)  # frames are ambient, supported on the p-fibre
    g = ker_geodesic(a, b, n)
    assert is_lagrangian(ks, E.conj().T @ g(0.5))
    assert np.linalg.norm(g(1.0) @ g(1.0).conj().T - b @ b.conj().T) < 1e-9
    rot = rotating_ker_path(a, n, 1)
    assert np.linalg.norm(rot(1.0) @ rot(1.0).conj().T - a @ a.conj().T) < 1e-9


@pytest.mark.parametrize("mode", ["kernel", "full", "swap"])
def test_threeterm_fixture_modes(mode):
    p = corollary_path(1, "kernel")
    AX, AY, lam = threeterm_fixture(p, np.random.default_rng(0), mode)
    assert lam(0.5) > 0
    assert AX(0.0).shape[0] == AY(1.0).shape[0]
    with pytest.raises(ValueError):
        threeterm_fixture(p, np.random.default_rng(0), "bogus")
