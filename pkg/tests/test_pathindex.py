import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from splitflow.acceptance import pair_with_intersection
from splitflow.fleet import random_lagrangian, structured_tangential
from splitflow.hsymp import Lagrangian, gap_distance, make_space, rotate, spectral_split, standard_J
from splitflow.pathindex import (HermitianPath, LagrangianPath, PathError, concatenate, convert_convention,
                                 maslov_index, reverse, spectral_flow, stabilized_maslov)
from splitflow.scenarios import smooth_lagrangian_path

SP1 = make_space(standard_J(1))
E1 = Lagrangian(np.array([[1.0], [0.0]], dtype=complex), SP1)
E2 = Lagrangian(np.array([[0.0], [1.0]], dtype=complex), SP1)
const = LagrangianPath.constant


def rot_path(L, a, b):
    return LagrangianPath(lambda t: rotate(L, a + (b - a) * t), L.space)


def test_normalization():
    # the rotating path in the second slot counts dim(L ∩ M) = 1
    assert maslov_index(const(E1), rot_path(E1, -0.1, 0.1)) == 1
    # antisymmetry: the same rotation in the first slot counts -1
    assert maslov_index(rot_path(E1, -0.1, 0.1), const(E1)) == -1


def test_constant_transverse_is_zero():
    assert maslov_index(const(E1), const(E2)) == 0


def test_half_turn():
    # one crossing of the shifted path near t = pi - eps
    assert maslov_index(const(E1), rot_path(E1, 0.0, np.pi)) == 1
    assert maslov_index(rot_path(E1, 0.0, np.pi), const(E1)) == -1


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 3))
def test_calibration_random(seed, n):
    sp = make_space(standard_J(n))
    rng = np.random.default_rng(seed)
    k = int(rng.integers(0, n + 1))
    L, M = pair_with_intersection(sp, rng, k)
    assert maslov_index(const(L), LagrangianPath(lambda s: rotate(M, 0.1 * s - 0.05), sp)) == k


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 2))
def test_additivity_and_reversal(seed, n):
    sp = make_space(standard_J(n))
    rng = np.random.default_rng(seed)
    f, g = smooth_lagrangian_path(sp, rng, speed=3.0), smooth_lagrangian_path(sp, rng, speed=3.0)
    L, M = LagrangianPath(f, sp), LagrangianPath(g, sp)
    total = maslov_index(L, M)
    first = maslov_index(LagrangianPath(lambda t: f(t / 2), sp), LagrangianPath(lambda t: g(t / 2), sp))
    second = maslov_index(LagrangianPath(lambda t: f(0.5 + t / 2), sp), LagrangianPath(lambda t: g(0.5 + t / 2), sp))
    assert total == first + second
    assert maslov_index(reverse(L), reverse(M)) == -total


def test_concatenate_and_reverse():
    c = rot_path(E1, 0.0, 1.0)
    loop = concatenate([c, reverse(c)])
    assert gap_distance(loop(1.0), c(0.0)) < 1e-12
    rr = reverse(reverse(c))
    assert all(gap_distance(rr(t), c(t)) < 1e-12 for t in np.linspace(0, 1, 7))
    with pytest.raises(PathError):
        concatenate([c, c])


def test_spectral_flow_examples():
    assert spectral_flow(HermitianPath(lambda t: np.diag([t - 0.5, 5.0]))) == 1
    assert spectral_flow(HermitianPath(lambda t: np.diag([1.0, -1.0]))) == 0
    # one branch falls through eps, the other rises through it
    assert spectral_flow(HermitianPath(lambda t: np.diag([0.5 - t, t - 0.5]))) == 0


def test_spectral_flow_starting_on_kernel():
    # eigenvalue 0 at t = 0 sits below eps and rises: counted once
    assert spectral_flow(HermitianPath(lambda t: np.diag([t, -1.0]))) == 1
    assert spectral_flow(HermitianPath(lambda t: np.diag([-t, -1.0]))) == 0


def test_stabilized_trivial_split():
    S = np.zeros((2, 2), dtype=complex)
    split = spectral_split(SP1, S, 1.0)
    L, M = rot_path(E1, -0.1, 0.1), const(E1)
    assert stabilized_maslov(L, M, split) == maslov_index(L, M)
    assert stabilized_maslov(const(E2), const(E1), split) == 0


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31))
def test_stabilized_agrees(seed):
    sp = make_space(standard_J(3))
    rng = np.random.default_rng(seed)
    S = structured_tangential(sp, rng, [0.0, 2.0, 3.0])
    split = spectral_split(sp, S, 1.0)
    red = split.reduced_space
    f, g = smooth_lagrangian_path(red, rng, speed=4.0), smooth_lagrangian_path(red, rng, speed=4.0)
    L, M = LagrangianPath(f, red), LagrangianPath(g, red)
    assert stabilized_maslov(L, M, split) == maslov_index(L, M)


def test_convert_convention():
    assert convert_convention(2, -1, 1, 0, 1, 0) == -1
    with pytest.raises(ValueError):
        convert_convention(0, 2, 0, 0, 0, 0)


def test_random_lagrangian_helper_is_lagrangian():
    L = random_lagrangian(SP1, np.random.default_rng(0))
    assert L.frame.shape == (2, 1)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31))
def test_reparam_and_perturbation_invariance(seed):
    sp = make_space(standard_J(1))
    rng = np.random.default_rng(seed)
    f, g = smooth_lagrangian_path(sp, rng, speed=3.0), smooth_lagrangian_path(sp, rng, speed=3.0)
    L, M = LagrangianPath(f, sp), LagrangianPath(g, sp)
    mu = maslov_index(L, M)
    assert maslov_index(L.reparam(lambda t: t * t), M.reparam(lambda t: t * t)) == mu
    # endpoint-fixing wiggle of size sin(pi t) * 0.02
    wiggle = LagrangianPath(lambda t: rotate(f(t), 0.02 * np.sin(np.pi * t)), sp)
    assert maslov_index(wiggle, M) == mu


def _hermitian_loop(seed, m=3):
    rng = np.random.default_rng(seed)
    A, B = (rng.normal(size=(m, m)) for _ in range(2))
    A, B = A + A.T, B + B.T
    return lambda t: A * np.cos(2 * np.pi * t) + B * np.sin(2 * np.pi * t) + 0.3 * np.eye(m)


@pytest.mark.parametrize("seed", range(4))
def test_spectral_flow_loop_basepoint(seed):
    h = _hermitian_loop(seed)
    base = spectral_flow(HermitianPath(h))
    for s in (0.25, 0.6):
        H0 = h(s)
        if np.min(np.abs(np.linalg.eigvalsh(H0))) < 1e-3:
            continue
        assert spectral_flow(HermitianPath(lambda t: h((t + s) % 1.0))) == base


@pytest.mark.parametrize("seed", range(4))
def test_spectral_flow_additive(seed):
    h = _hermitian_loop(seed)
    mid = 0.5
    if np.min(np.abs(np.linalg.eigvalsh(h(mid)))) < 1e-3:
        pytest.skip("junction not invertible")
    whole = spectral_flow(HermitianPath(lambda t: h(0.9 * t)))
    a = spectral_flow(HermitianPath(lambda t: h(mid * t)))
    b = spectral_flow(HermitianPath(lambda t: h(mid + (0.9 - mid) * t)))
    assert whole == a + b
