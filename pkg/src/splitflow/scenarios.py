"""Seeded scenario generators for the splitting formula and its corollaries."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import expm

from .dirac1d import ModelDiracOperator, ModelGeometry, OperatorPath, cauchy_data, keyframe_path
from .fleet import FleetConfig, random_hermitian, random_lagrangian, random_operator, structured_tangential
from .hsymp import HermitianSymplecticSpace, Lagrangian, intersect_frames, make_space, orth, standard_J
from .splitting import SplitScenario, geodesic

KINDS = ("generic", "nontransverse", "rotating", "stretched", "pinned", "resonant", "kill")


def smooth_lagrangian_path(space: HermitianSymplecticSpace, rng: np.random.Generator,
                           start: Lagrangian | None = None, speed: float = 1.0):
    """t -> U0 exp(i t K) as a Lagrangian path."""
    U0 = (start or random_lagrangian(space, rng)).unitary
    K = speed * random_hermitian(rng, space.n)
    return lambda t: space.from_unitary(U0 @ expm(1j * t * K))


def rotating_path(space: HermitianSymplecticSpace, B0: Lagrangian, k: int):
    """t -> exp(pi k t J) B0; a loop for integer k."""
    return lambda t: Lagrangian(expm(np.pi * k * t * space.J) @ B0.frame, space)


def zero_operator(space, geometry, cells: int = 2) -> ModelDiracOperator:
    z = np.zeros((space.dim, space.dim), dtype=complex)
    return ModelDiracOperator(geometry, space, z, z, (z,) * cells, (z,) * cells)


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str = "generic"
    fleet: FleetConfig = FleetConfig()
    r: float = 0.0
    connector: str = "geodesic"


def _ops(seed: int, cfg: ScenarioConfig):
    rng = np.random.default_rng(seed)
    space = make_space(standard_J(cfg.fleet.n))
    geo = ModelGeometry(cfg.fleet.circumference, cfg.fleet.p, cfg.fleet.q, cfg.fleet.w)
    ops = [random_operator(space, geo, rng, cfg.fleet) for _ in range(cfg.fleet.keyframes)]
    return rng, space, geo, ops


def make_scenario(seed: int, cfg: ScenarioConfig = ScenarioConfig()) -> SplitScenario:
    if cfg.kind not in KINDS:
        raise ValueError(f"unknown scenario kind {cfg.kind!r}")
    if cfg.kind == "resonant":
        return resonant_scenario(seed, cfg)
    rng, space, geo, ops = _ops(seed, cfg)
    if cfg.kind == "nontransverse":
        ops[0] = zero_operator(space, geo, cfg.fleet.cells)
    path = keyframe_path(ops, name=f"{cfg.kind}-{seed}")
    bs = ops[0].boundary_space().space
    bx = smooth_lagrangian_path(bs, rng)
    by = smooth_lagrangian_path(bs, rng)
    connector = cfg.connector
    if cfg.kind == "rotating":
        bx = rotating_path(bs, random_lagrangian(bs, rng), int(rng.integers(1, 3)))
        by = rotating_path(bs, random_lagrangian(bs, rng), -int(rng.integers(1, 3)))
    elif cfg.kind == "pinned":
        # boundary conditions that start on the Cauchy data: fully non-transverse endpoints
        bx = geodesic(cauchy_data(ops[0], "X"), random_lagrangian(bs, rng))
        by = geodesic(random_lagrangian(bs, rng), cauchy_data(ops[-1], "Y"))
    sc = SplitScenario(path, bx, by, r=cfg.r, connector=connector, seed=seed, name=f"{cfg.kind}-{seed}")
    if cfg.kind == "kill":
        sc = with_kill_boundary(sc, rng)
    return sc


def resonant_scenario(seed: int, cfg: ScenarioConfig = ScenarioConfig()) -> SplitScenario:
    """Domain wall on X at t = 0: S_q = -S_p with commuting interior, so Λ_X(0) meets P^+.

    B_X(0) = P^+, B_Y(0) = P^- and L2 is the rotation path C, the canonical confusing case.
    """
    rng, space, geo, ops = _ops(seed, replace(cfg, fleet=replace(cfg.fleet, n=1)))
    s = np.diag([1.0, -1.0]).astype(complex)
    wall = ModelDiracOperator(geo, space, s, -s, (s, -s), ops[0].y_pieces)
    ops[0] = wall
    path = keyframe_path(ops, name=f"resonant-{seed}")
    bsp = wall.boundary_space()
    split = bsp.split(0.0)
    bs = bsp.space
    Pp = Lagrangian(split.Pplus, bs)
    Pm = Lagrangian(split.Pminus, bs)
    bx = smooth_lagrangian_path(bs, rng, start=Pp)
    by = smooth_lagrangian_path(bs, rng, start=Pm)
    return SplitScenario(path, bx, by, connector="rotation", connector_M5=cfg.connector,
                         nu0=1.5, seed=seed, name=f"resonant-{seed}")


def scenario_fleet(count: int, base_seed: int = 0) -> list[SplitScenario]:
    """A mixed fleet cycling through the scenario kinds, with n = 2 every fourth entry."""
    out = []
    for i in range(count):
        kind = KINDS[i % len(KINDS)]
        fleet = FleetConfig(n=2 if i % 4 == 3 and kind != "resonant" else 1)
        r = 1.0 if kind == "stretched" else 0.0
        conn = ("geodesic", "winding", "detour")[i % 3]
        out.append(make_scenario(base_seed + i, ScenarioConfig(kind, fleet, r, conn)))
    return out


# --- corollary fixtures ----------------------------------------------------------------

def _min_abs_eig(ops, key, samples: int = 17) -> float:
    worst = np.inf
    for a, b in zip(ops[:-1], ops[1:]):
        for s in np.linspace(0, 1, samples):
            S = (1 - s) * getattr(a, key) + s * getattr(b, key)
            worst = min(worst, float(np.min(np.abs(np.linalg.eigvalsh(S)))))
    return worst


def corollary_path(seed: int, kind: str = "invertible", n: int = 1, loop: bool = False,
                   cfg: FleetConfig = FleetConfig(), margin: float = 0.3) -> OperatorPath:
    """Keyframed path with S_p, S_q invertible throughout (kind='invertible') or with
    S_p = 0 and S_q invertible, so that ker S_Σ is the whole fibre at p (kind='kernel')."""
    rng = np.random.default_rng(seed)
    space = make_space(standard_J(n))
    geo = ModelGeometry(cfg.circumference, cfg.p, cfg.q, cfg.w)
    for _ in range(200):
        ops = [random_operator(space, geo, rng, cfg) for _ in range(cfg.keyframes)]
        if kind == "kernel":
            z = np.zeros_like(ops[0].S_p)
            ops = [replace(op, S_p=z) for op in ops]
        if loop:
            ops.append(ops[0])
        keys = ("S_q",) if kind == "kernel" else ("S_p", "S_q")
        if all(_min_abs_eig(ops, k) > margin for k in keys):
            return keyframe_path(ops, name=f"{kind}-{seed}")
    raise RuntimeError("could not draw a path with invertible tangential operators")


def kernel_crossing_path(seed: int, n: int = 1, cfg: FleetConfig = FleetConfig()) -> OperatorPath:
    """S_q(t) runs linearly from S to -S, so ker S_Σ(1/2) != 0."""
    rng = np.random.default_rng(seed)
    space = make_space(standard_J(n))
    geo = ModelGeometry(cfg.circumference, cfg.p, cfg.q, cfg.w)
    op = random_operator(space, geo, rng, cfg)
    return keyframe_path([op, replace(op, S_q=-op.S_q)], name=f"kernel-crossing-{seed}")


def cylinder_path(seed: int, n: int = 1, cfg: FleetConfig = FleetConfig(), margin: float = 0.3) -> OperatorPath:
    """A(x) ≡ S(t) on the whole circle with S(t) invertible.

    Λ_X is the graph of e^{-ℓS} and never meets P^+ = E^-(S) ⊕ E^+(S), so L2ker holds for
    every t; both bunke and yoshida apply and predict SF = 0.
    """
    rng = np.random.default_rng(seed)
    space = make_space(standard_J(n))
    geo = ModelGeometry(cfg.circumference, cfg.p, cfg.q, cfg.w)
    ops = []
    for _ in range(cfg.keyframes):
        S = structured_tangential(space, rng, rng.uniform(margin, 2.0, n))
        ops.append(ModelDiracOperator(geo, space, S, S, (S,) * cfg.cells, (S,) * cfg.cells))
    # straight-line interpolation must stay invertible
    for a, b in zip(ops[:-1], ops[1:]):
        for u in np.linspace(0, 1, 33):
            if np.min(np.abs(np.linalg.eigvalsh((1 - u) * a.S_p + u * b.S_p))) < 1e-3:
                return cylinder_path(seed + 10_000, n, cfg, margin)
    return keyframe_path(ops, name=f"cylinder-{seed}")


def kernel_embedding(n: int) -> np.ndarray:
    """Ambient frame of the p-fibre, which is ker S_Σ when S_p = 0 and S_q is invertible."""
    return np.vstack([np.eye(2 * n), np.zeros((2 * n, 2 * n))]).astype(complex)


def kernel_space(n: int) -> HermitianSymplecticSpace:
    return make_space(standard_J(n))


def ker_geodesic(a: np.ndarray, b: np.ndarray, n: int):
    """Geodesic between two Lagrangians of ker S_Σ, both given as ambient frames."""
    E = kernel_embedding(n)
    ks = kernel_space(n)
    g = geodesic(Lagrangian(orth(E.conj().T @ a), ks), Lagrangian(orth(E.conj().T @ b), ks))
    return lambda t: E @ g(t).frame


def random_ker_lagrangian(n: int, rng: np.random.Generator) -> np.ndarray:
    return kernel_embedding(n) @ random_lagrangian(kernel_space(n), rng).frame


def rotating_ker_path(A0: np.ndarray, n: int, turns: float = 1.0):
    """t -> e^{pi turns t J} A0 inside ker S_Σ."""
    E = kernel_embedding(n)
    J = standard_J(n)
    a0 = E.conj().T @ A0
    return lambda t: E @ (expm(np.pi * turns * t * J) @ a0)


def _disjoint(a: np.ndarray, b: np.ndarray) -> bool:
    return intersect_frames(a, b).shape[1] == 0


def threeterm_fixture(path: OperatorPath, rng: np.random.Generator, mode: str = "kernel"):
    """(A_X, A_Y, lam) for verify_3term on a kernel path.

    mode 'kernel': lam below the spectrum of |S_q|, so H_lam = ker S; 'full': lam above it, so H_lam is
    everything; 'swap': the corollary case A_Y(i) = L̃_X(i), A_X(i) = L̃_Y(i).
    """
    from .splitting import _boundary_frame, ltilde_X, ltilde_Y
    n = path(0.0).space.n
    eigs = [np.abs(np.linalg.eigvalsh(path(t).S_q)) for t in np.linspace(0, 1, 33)]
    lo, hi = min(e.min() for e in eigs), max(e.max() for e in eigs)
    lx0, ly1 = ltilde_X(path(0.0)), ltilde_Y(path(1.0))
    if mode == "swap":
        gy = ker_geodesic(lx0, ltilde_X(path(1.0)), n)
        gx = ker_geodesic(ltilde_Y(path(0.0)), ly1, n)
        return gx, gy, (lambda t: 0.5 * lo)
    for _ in range(100):
        rx, ry = random_ker_lagrangian(n, rng), random_ker_lagrangian(n, rng)
        if _disjoint(rx, ry) and _disjoint(rx, lx0) and _disjoint(ly1, ry):
            break
    gy, gx = ker_geodesic(lx0, ry, n), ker_geodesic(rx, ly1, n)
    if mode == "kernel":
        return gx, gy, (lambda t: 0.5 * lo)
    if mode == "full":
        pm = lambda t: _boundary_frame(path, t, "minus")
        pp = lambda t: _boundary_frame(path, t, "plus")
        return (lambda t: orth(np.hstack([gx(t), pp(t)]))), (lambda t: orth(np.hstack([pm(t), gy(t)]))), \
            (lambda t: hi + 1.0)
    raise ValueError(mode)


def integer_loop(space: HermitianSymplecticSpace, rng: np.random.Generator, max_winding: int = 2):
    """t -> U0 exp(2 pi i t K) with K Hermitian of integer spectrum: a smooth loop."""
    U0 = random_lagrangian(space, rng).unitary
    Q = np.linalg.qr(rng.normal(size=(space.n, space.n)) + 1j * rng.normal(size=(space.n, space.n)))[0]
    K = Q @ np.diag(rng.integers(-max_winding, max_winding + 1, space.n)) @ Q.conj().T
    return lambda t: space.from_unitary(U0 @ expm(2j * np.pi * t * K))


def ltilde_touching_path(cfg: FleetConfig = FleetConfig()) -> OperatorPath:
    """Constant path whose L̃_X and L̃_Y coincide: a quarter turn of the J-rotation on Y
    carries P^-(S_q) onto the X-side line."""
    space = make_space(standard_J(1))
    geo = ModelGeometry(cfg.circumference, cfg.p, cfg.q, cfg.w)
    s = np.diag([1.0, -1.0]).astype(complex)
    z = np.zeros((2, 2), dtype=complex)
    g = np.pi / (2 * (geo.y_length - 2 * geo.w))
    D = ModelDiracOperator(geo, space, z, s, (z, z), (g * space.J, g * space.J))
    return keyframe_path([D, D], name="ltilde-touching")


def domain_wall_path(seed: int, cfg: FleetConfig = FleetConfig()) -> OperatorPath:
    """Resonant domain wall on X (Λ_X meets P^+) with S invertible and constant, so of the
    hypotheses only L2ker fails."""
    rng = np.random.default_rng(seed)
    space = make_space(standard_J(1))
    geo = ModelGeometry(cfg.circumference, cfg.p, cfg.q, cfg.w)
    s = np.diag([1.0, -1.0]).astype(complex)
    ys = lambda: tuple(random_operator(space, geo, rng, replace(cfg, n=1)).y_pieces)
    wall = ModelDiracOperator(geo, space, s, -s, (s, -s), ys())
    return keyframe_path([wall, replace(wall, y_pieces=ys())], name=f"domain-wall-{seed}")


def with_kill_boundary(sc: SplitScenario, rng: np.random.Generator) -> SplitScenario:
    """Boundary paths with B_Y(0) = P^-_{nu0} ⊕ L_X(0), B_X(1) = L_Y(1) ⊕ P^+_{nu1}, constant connectors."""
    from .splitting import endpoint_data
    ends = endpoint_data(sc)
    bs = ends.graded_X0.adiabatic.space
    by0 = smooth_lagrangian_path(bs, rng, start=ends.graded_X0.adiabatic)
    bx0 = smooth_lagrangian_path(bs, rng, start=ends.graded_Y1.adiabatic)
    return replace(sc, by=by0, bx=lambda t: bx0(1.0 - t), connector="constant", connector_M5=None)
