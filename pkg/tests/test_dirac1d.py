import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from splitflow.dirac1d import (ModelDiracOperator, ModelGeometry, OperatorPath, cauchy_data, eigenvalues_closed,
                               eigenvalues_with_boundary, kernel_dim_boundary, kernel_dim_closed, keyframe_path,
                               make_aps_condition, sf_oracle_boundary, sf_oracle_closed, stretched, transfer_matrix)
from splitflow.fleet import FleetConfig, random_lagrangian, random_operator, random_operator_path
from splitflow.hsymp import (SymplecticError, gap_distance, intersection_dim, is_lagrangian, make_space,
                             spectral_split, standard_J)
from splitflow.pathindex import LagrangianPath, maslov_index

SP1 = make_space(standard_J(1))
S = np.diag([1.0, -1.0]).astype(complex)
Z = np.zeros((2, 2), dtype=complex)


def const_op(A, c=2.0, q=1.0, w=0.25):
    return ModelDiracOperator(ModelGeometry(c, 0.0, q, w), SP1, A, A, (A,), (A,))


def test_geometry_validation():
    with pytest.raises(ValueError):
        ModelGeometry(2.0, 0.0, 0.3, 0.25)


def test_collar_matrices_checked():
    with pytest.raises(SymplecticError):
        const_op(np.array([[1.0, 1.0], [0.0, -1.0]], dtype=complex))


def test_transfer_constant_and_zero():
    D = const_op(S)
    assert np.allclose(transfer_matrix(D, 0.0, 0.7), expm(-0.7 * S), atol=1e-12)
    assert np.allclose(transfer_matrix(const_op(Z), 0.0, 1.3), np.eye(2), atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(-2, 2))
def test_transfer_composition(seed, u, v, lam):
    rng = np.random.default_rng(seed)
    D = random_operator(SP1, ModelGeometry(3.0, 0.0, 1.4, 0.25), rng, FleetConfig())
    a, b = sorted((3 * u, 3 * v))
    c = 3.0
    T = transfer_matrix(D, b, c, lam) @ transfer_matrix(D, a, b, lam)
    assert np.allclose(T, transfer_matrix(D, a, c, lam), atol=1e-10)


def test_cauchy_data_collar_graph():
    D = const_op(S, c=2.0, q=1.0)
    L = cauchy_data(D, "X")
    T = expm(-1.0 * S)
    x = np.eye(2)
    expected = np.vstack([x, T @ x])
    assert L.frame.shape == (4, 2)
    assert is_lagrangian(D.boundary_space().space, L.frame)
    P = L.projector
    assert np.linalg.norm(P @ expected - expected) < 1e-12


def test_cauchy_data_stretch_converges():
    rng = np.random.default_rng(3)
    D = random_operator(SP1, ModelGeometry(3.0, 0.0, 1.4, 0.25), rng, FleetConfig())
    lim = cauchy_data(D, "X", np.inf)
    gaps = [gap_distance(cauchy_data(D, "X", r), lim) for r in (1.0, 2.0, 4.0)]
    assert gaps[2] < gaps[1] < gaps[0]
    # the flow and direct collar formulas agree
    direct = cauchy_data(stretched(D, 1.5), "X")
    assert gap_distance(direct, cauchy_data(D, "X", 1.5)) < 1e-9


def test_eigenvalues_constant_S():
    D = const_op(S, c=2.0)
    ev = eigenvalues_closed(D, (-2.0, 2.0))
    assert [(round(l, 8), m) for l, m in ev] == [(-1.0, 1), (1.0, 1)]
    assert eigenvalues_closed(D, (-0.5, 0.5)) == []


@pytest.mark.parametrize("c", [2.0, 3.0, 5.0])
def test_eigenvalues_free_operator(c):
    D = const_op(Z, c=c, q=1.0)
    ev = eigenvalues_closed(D, (0.1, 7.0))
    expect = [2 * np.pi * k / c for k in range(1, 10) if 2 * np.pi * k / c < 7.0]
    assert [m for _, m in ev] == [2] * len(expect)
    assert np.allclose([l for l, _ in ev], expect, atol=1e-7)


def test_kernel_dims():
    assert kernel_dim_closed(const_op(S)) == 0
    assert kernel_dim_closed(const_op(Z)) == 2


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31))
def test_kernel_matches_eigen_multiplicity(seed):
    rng = np.random.default_rng(seed)
    D = random_operator(SP1, ModelGeometry(3.0, 0.0, 1.4, 0.25), rng, FleetConfig())
    mult = sum(m for l, m in eigenvalues_closed(D, (-1e-3, 1e-3)))
    assert mult == kernel_dim_closed(D)


def test_boundary_eigenvalue_multiplicity():
    D = const_op(S, c=2.0)
    B = random_lagrangian(D.boundary_space().space, np.random.default_rng(1))
    ev = eigenvalues_with_boundary(D, B, (-3.0, 3.0))
    assert ev
    for lam, mult in ev:
        assert intersection_dim(cauchy_data(D, "X", lam=lam), B, tol=1e-6) == mult
    # a window below the first eigenvalue is empty
    assert eigenvalues_with_boundary(D, B, (-3.0, ev[0][0] - 1e-3)) == []


def test_aps_condition():
    D = const_op(S)
    bs = D.boundary_space().space
    split = spectral_split(bs, D.S_sigma, 0.0)
    B = make_aps_condition(split, np.zeros((0, 0)), "X")
    assert gap_distance(B.L, type(B.L)(split.Pplus, bs)) < 1e-12
    sp2 = make_space(standard_J(2))
    Sz = np.zeros((4, 4), dtype=complex)
    split2 = spectral_split(sp2, Sz, 1.0)
    v = np.array([[1.0], [1.0], [0.0], [0.0]]) / np.sqrt(2)
    v = np.hstack([v, np.array([[1.0], [-1.0], [0.0], [0.0]]) / np.sqrt(2)])
    assert is_lagrangian(sp2, make_aps_condition(split2, v).L.frame)
    with pytest.raises(SymplecticError):
        make_aps_condition(split2, np.hstack([v[:, :1], split2.reduced_space.J @ v[:, :1]]))


def test_sf_constant_path():
    D = const_op(S)
    assert sf_oracle_closed(keyframe_path([D, D])) == 0


def test_sf_engineered_crossing():
    # gamma J shifts the spectrum by -gamma: the +1 eigenvalue descends through eps
    ops = [ModelDiracOperator(ModelGeometry(2.0, 0.0, 1.0, 0.25), SP1, S, S, (S + g * SP1.J,), (S + g * SP1.J,))
           for g in (0.0, 2.0)]
    sf = sf_oracle_closed(keyframe_path(ops))
    assert sf == -1
    ops.reverse()
    assert sf_oracle_closed(keyframe_path(ops)) == 1


@settings(max_examples=6, deadline=None)
@given(st.integers(0, 2**31))
def test_oracle_matches_nicolaescu(seed):
    path = random_operator_path(seed, FleetConfig(gamma_sweep=True))
    space = path(0.0).boundary_space().space
    lx = LagrangianPath(lambda t: cauchy_data(path(t), "X"), space)
    ly = LagrangianPath(lambda t: cauchy_data(path(t), "Y"), space)
    assert sf_oracle_closed(path) == maslov_index(lx, ly)


@settings(max_examples=4, deadline=None)
@given(st.integers(0, 2**31))
def test_boundary_oracle_matches_maslov(seed):
    path = random_operator_path(seed, FleetConfig(gamma_sweep=True))
    space = path(0.0).boundary_space().space
    B = random_lagrangian(space, np.random.default_rng(seed))
    mu = maslov_index(LagrangianPath(lambda t: cauchy_data(path(t), "X"), space), LagrangianPath.constant(B))
    assert sf_oracle_boundary(path, lambda t: B, "X") == mu


def test_operator_path_cache():
    calls = []
    p = OperatorPath(lambda t: calls.append(t) or const_op(S))
    p(0.5), p(0.5)
    assert calls == [0.5]
