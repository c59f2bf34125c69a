"""Seeded random operators and operator paths for cross-oracle experiments."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dirac1d import ModelDiracOperator, ModelGeometry, OperatorPath, keyframe_path
from .hsymp import HermitianSymplecticSpace, Lagrangian, lagrangian, make_space, standard_J


def random_hermitian(rng: np.random.Generator, m: int) -> np.ndarray:
    h = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    return (h + h.conj().T) / 2


def random_anticommuting(space: HermitianSymplecticSpace, rng: np.random.Generator,
                         scale: float = 1.0) -> np.ndarray:
    h = random_hermitian(rng, space.dim)
    J = space.J
    return scale * (h + J @ h @ J) / 2


def random_potential(space: HermitianSymplecticSpace, rng: np.random.Generator, scale: float = 1.0,
                     alpha: float = 0.0, gamma: float = 0.0) -> np.ndarray:
    """A_h + i alpha + gamma J with A_h Hermitian and J-anticommuting."""
    m = space.dim
    return (random_anticommuting(space, rng, scale) + 1j * alpha * np.eye(m)
            + gamma * space.J)


def random_lagrangian(space: HermitianSymplecticSpace, rng: np.random.Generator) -> Lagrangian:
    n = space.n
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return space.from_unitary(q * (np.diag(r) / np.abs(np.diag(r))))


@dataclass(frozen=True)
class FleetConfig:
    n: int = 1
    circumference: float = 3.0
    p: float = 0.0
    q: float = 1.4
    w: float = 0.25
    cells: int = 2
    keyframes: int = 3
    scale: float = 1.0
    gamma_range: float = 1.5
    gamma_sweep: bool = False  # keyframe gammas run monotonically across [-range, range]


def random_operator(space, geometry, rng, cfg: FleetConfig, gamma: float | None = None):
    g = rng.uniform(-cfg.gamma_range, cfg.gamma_range) if gamma is None else gamma
    pieces = lambda: tuple(random_potential(space, rng, cfg.scale, rng.normal() * 0.5, g)
                           for _ in range(cfg.cells))
    return ModelDiracOperator(geometry, space,
                              random_anticommuting(space, rng, cfg.scale),
                              random_anticommuting(space, rng, cfg.scale),
                              pieces(), pieces())


def random_operator_path(seed: int, cfg: FleetConfig = FleetConfig()) -> OperatorPath:
    rng = np.random.default_rng(seed)
    space = make_space(standard_J(cfg.n))
    geo = ModelGeometry(cfg.circumference, cfg.p, cfg.q, cfg.w)
    gammas = [None] * cfg.keyframes
    if cfg.gamma_sweep:
        gammas = list(np.linspace(-cfg.gamma_range, cfg.gamma_range, cfg.keyframes) * rng.choice([-1, 1]))
    ops = [random_operator(space, geo, rng, cfg, gamma=g) for g in gammas]
    return keyframe_path(ops, name=f"fleet-{seed}")


def structured_tangential(space: HermitianSymplecticSpace, rng: np.random.Generator,
                          sigmas) -> np.ndarray:
    """J-anticommuting Hermitian S with eigenvalues ±sigmas (zeros give ker S)."""
    qp, qm = space.kahler
    n = space.n
    u = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))[0]
    v = np.linalg.qr(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))[0]
    B = u @ np.diag(np.asarray(sigmas, dtype=float)) @ v.conj().T
    S = qm @ B @ qp.conj().T
    return S + S.conj().T


@dataclass
class GradedFixture:
    """Λ = g Λ0 with g symplectic, unipotent and raising S-levels, so the graded limit is Λ0."""
    L: Lagrangian
    S: np.ndarray
    nu: float
    expected: Lagrangian  # P^-_nu ⊕ W ⊕ L̃ ⊕ JV
    resonant_levels: list[float]


def graded_fixture(space: HermitianSymplecticSpace, rng: np.random.Generator, sigmas,
                   nu: float, mix: float = 0.5) -> GradedFixture:
    from scipy.linalg import expm
    from .hsymp import eigen_clusters, orth, spectral_split
    S = structured_tangential(space, rng, sigmas)
    split = spectral_split(space, S, nu)
    J = space.J
    parts = [split.Pminus]
    K = split.kernel
    if K.shape[1]:
        red = HermitianSymplecticSpace(K.conj().T @ J @ K)
        parts.append(K @ random_lagrangian(red, rng).frame)
    resonant = []
    zero = split._zero
    for lam in sorted({round(l, 9) for l, _ in split.clusters if zero < l <= nu + zero}):
        E = split.eigenspace(-lam)
        d = E.shape[1]
        k = int(rng.integers(0, d + 1))
        Q = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))[0]
        W, V = E @ Q[:, :k], E @ Q[:, k:]
        parts += [W, J @ V]
        if V.shape[1]:
            resonant.append(float(lam))
    L0 = orth(np.hstack([p for p in parts if p.shape[1]]))
    # level-raising Hermitian generator: blocks (a, b) only when mu_a + mu_b < 0
    clusters = eigen_clusters(S)
    H = np.zeros((space.dim, space.dim), dtype=complex)
    for ma, Ea in clusters:
        for mb, Eb in clusters:
            if ma + mb < -zero and ma <= mb:
                B = mix * (rng.normal(size=(Ea.shape[1], Eb.shape[1])) + 1j * rng.normal(size=(Ea.shape[1], Eb.shape[1])))
                blk = Ea @ B @ Eb.conj().T
                H += blk + blk.conj().T if ma != mb else (blk + blk.conj().T) / 2
    g = expm(J @ H)
    return GradedFixture(lagrangian(space, g @ L0), S, nu, lagrangian(space, L0), resonant)
