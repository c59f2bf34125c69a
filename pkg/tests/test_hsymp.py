import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from splitflow.fleet import random_lagrangian, structured_tangential
from splitflow.hsymp import (Lagrangian, ResonanceError, SymplecticError, direct_sum_lagrangian, gap_distance,
                             intersection_dim, is_lagrangian, lagrangian, make_space, min_angle, rotate,
                             same_subspace, spectral_split, standard_J, symplectic_reduce)

SP1 = make_space(standard_J(1))
e1, e2 = np.array([[1.0], [0.0]]), np.array([[0.0], [1.0]])
line = lambda v: lagrangian(SP1, np.asarray(v, dtype=complex))


def test_make_space_standard():
    assert SP1.n == 1 and SP1.dim == 2


@pytest.mark.parametrize("J", [np.eye(2), np.diag([1j, 1j])])
def test_make_space_rejects(J):
    with pytest.raises(SymplecticError):
        make_space(J)


def test_is_lagrangian_examples():
    assert is_lagrangian(SP1, e1)
    assert is_lagrangian(SP1, (e1 + e2) / np.sqrt(2))
    assert not is_lagrangian(SP1, np.hstack([e1, e2]))


def test_intersection_dim_examples():
    assert intersection_dim(line(e1), line(e1)) == 1
    assert intersection_dim(line(e1), line(e2)) == 0
    assert intersection_dim(line(e1), line(e1 + e2)) == 0


@given(st.floats(-3.0, 3.0))
def test_gap_of_lines(theta):
    L = line(np.cos(theta) * e1 + np.sin(theta) * e2)
    assert gap_distance(line(e1), L) == pytest.approx(abs(np.sin(theta)), abs=1e-12)


def test_rotate_examples():
    assert same_subspace(rotate(line(e1), 0.0), line(e1))
    assert same_subspace(rotate(line(e1), np.pi / 2), line(e2))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 3), st.floats(-4, 4), st.floats(-4, 4))
def test_rotate_group_law(seed, n, s, t):
    sp = make_space(standard_J(n))
    L = random_lagrangian(sp, np.random.default_rng(seed))
    assert gap_distance(rotate(rotate(L, s), t), rotate(L, s + t)) < 1e-10
    assert is_lagrangian(sp, rotate(L, t).frame)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 3))
def test_split_decomposition(seed, n):
    sp = make_space(standard_J(n))
    rng = np.random.default_rng(seed)
    S = structured_tangential(sp, rng, rng.choice([0.0, 0.7, 1.5], size=n))
    split = spectral_split(sp, S, 1.0)
    assert split.Pplus.shape[1] == split.Pminus.shape[1]
    assert split.Pplus.shape[1] + split.Pminus.shape[1] + split.Hnu.shape[1] == sp.dim
    # J maps P^+ onto P^-
    assert np.linalg.norm(sp.J @ split.Pplus - split.Pminus @ (split.Pminus.conj().T @ sp.J @ split.Pplus)) < 1e-9


def test_direct_sum_examples():
    sp = make_space(standard_J(2))
    S = np.diag([1.0, 2.0, -1.0, -2.0]).astype(complex)  # anticommutes with standard J
    split = spectral_split(sp, S, 0.0)
    assert is_lagrangian(sp, split.Pminus)
    split1 = spectral_split(sp, S, 1.5)
    red = split1.reduced_space
    L = random_lagrangian(red, np.random.default_rng(0))
    assert is_lagrangian(sp, split1.stabilize_minus(L.frame).frame)
    with pytest.raises(SymplecticError):
        direct_sum_lagrangian(sp, [split1.Pminus, split1.Hnu])


def test_symplectic_reduce_examples():
    S = np.diag([1.0, -1.0]).astype(complex)
    L = line(e1 + e2)
    red = symplectic_reduce(L, spectral_split(SP1, S, 2.0))
    assert red.shape[1] == 1 and abs(abs(red[0, 0]) - abs(red[1, 0])) < 1e-12
    assert symplectic_reduce(L, spectral_split(SP1, S, 0.0)).shape[1] == 0
    with pytest.raises(ResonanceError):
        symplectic_reduce(line(e1), spectral_split(SP1, S, 0.0))


def test_min_angle_transverse_lines():
    assert min_angle(line(e1), line(e2)) == pytest.approx(np.pi / 2)
    assert isinstance(line(e1), Lagrangian)
