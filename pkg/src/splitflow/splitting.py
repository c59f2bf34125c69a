"""The eleven-term splitting formula and its corollaries.

SF(D) = SF(D_X, B_X) + SF(D_Y, B_Y) + mu(B_Y(1-t), B_X(1-t)) + sum_{i != 3,6,9} mu(L_i, M_i)

Every term is computed independently; the residual is reported, never assumed.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.linalg import expm, schur
from scipy.optimize import minimize_scalar

from .adiabatic import (GradedAdiabaticData, admissible_levels, graded_adiabatic_limit,
                        nonresonance_level, rotation_path_C, stretch_path)
from .dirac1d import (ModelDiracOperator, OperatorPath, _potential_distance, cauchy_data, sf_oracle_boundary,
                      sf_oracle_closed, stretched)
from .hsymp import (HermitianSymplecticSpace, Lagrangian, SpectralSplit, SymplecticError,
                    eigen_clusters, frame_gap, gap_distance, intersect_frames, intersection_dim, min_angle,
                    orth, same_subspace, spectral_split, symplectic_reduce)
from .pathindex import CrossingLog, LagrangianPath, concatenate, maslov_index

LPath = Callable[[float], Lagrangian]
TERMS = (1, 2, 4, 5, 7, 8, 10, 11)


class IdentityError(AssertionError):
    """An identity that the theory guarantees failed; carries crossing logs."""

    def __init__(self, message: str, logs: dict | None = None):
        super().__init__(message)
        self.logs = logs or {}


class HypothesisError(ValueError):
    """A verifier's hypotheses do not hold for the given input."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


# --- connectors ----------------------------------------------------------------------

def _unitary_log_path(space: HermitianSymplecticSpace, ua: np.ndarray, ub: np.ndarray,
                      extra_turns: int = 0) -> Callable[[float], Lagrangian]:
    T, Z = schur(ua.conj().T @ ub, output="complex")
    theta = np.angle(np.diag(T))
    if extra_turns:
        theta = theta.copy()
        theta[0] += 2 * np.pi * extra_turns

    def f(t):
        u = ua @ (Z * np.exp(1j * t * theta)) @ Z.conj().T
        return space.from_unitary(u)
    return f


def geodesic(a: Lagrangian, b: Lagrangian, extra_turns: int = 0, name: str = "geodesic") -> LagrangianPath:
    """Interpolate the graph unitaries through the principal logarithm of U_a^* U_b."""
    if same_subspace(a, b) and not extra_turns:
        return LagrangianPath.constant(a, name)
    f = _unitary_log_path(a.space, a.unitary, b.unitary, extra_turns)
    return LagrangianPath(lambda t: a if t == 0 else (b if t == 1 else f(t)), a.space, name)


def _common_level(split_fn: Callable[[float], SpectralSplit], levels: list[float], a: Lagrangian,
                  b: Lagrangian, side: str) -> SpectralSplit:
    for nu in levels:
        sp = split_fn(nu)
        P = sp.Pminus if side == "minus" else sp.Pplus
        if all(P.shape[1] == 0 or intersect_frames(L.frame, P).shape[1] == P.shape[1] for L in (a, b)):
            return sp
    raise HypothesisError("connector endpoints are in different structural classes")


def structured_connector(a: Lagrangian, b: Lagrangian, S: np.ndarray, side: str,
                         nu_min: float = 0.0) -> LagrangianPath:
    """Geodesic inside H_nu keeping the common P^-_nu (side='minus') or P^+_nu summand fixed."""
    space = a.space
    zero = 1e-10 * max(1.0, float(np.linalg.norm(S, 2)))
    pos = [lam for lam, _ in eigen_clusters(S) if lam > zero]
    cands = sorted({nu_min} | {0.5 * (x + y) for x, y in zip(pos, pos[1:] + [pos[-1] * 2 + 1])} if pos else {nu_min})
    cands = [nu for nu in cands if nu >= nu_min]
    sp = _common_level(lambda nu: spectral_split(space, S, nu), cands, a, b, side)
    red = sp.reduced_space

    def reduce(L):
        meet = intersect_frames(L.frame, sp.Hnu)
        return Lagrangian(orth(sp.to_reduced(meet)), red)

    ra, rb = reduce(a), reduce(b)
    if sp.Hnu.shape[1] == 0:
        return LagrangianPath.constant(a, "structured")
    g = geodesic(ra, rb)
    stab = sp.stabilize_minus if side == "minus" else sp.stabilize_plus
    return LagrangianPath(lambda t: a if t == 0 else (b if t == 1 else stab(g(t).frame)), space, "structured")


def auto_connector(a: Lagrangian, b: Lagrangian, mode: str = "geodesic", *, S: np.ndarray | None = None,
                   side: str = "minus", rng: np.random.Generator | None = None,
                   rotation: LagrangianPath | None = None) -> LagrangianPath:
    """Path of Lagrangians from a to b.

    modes: geodesic, winding (one extra full turn), detour (through a random
    Lagrangian), structured (fixed P^-/P^+ summand), constant, rotation (given path).
    """
    if mode == "geodesic":
        return geodesic(a, b)
    if mode == "winding":
        return geodesic(a, b, extra_turns=1, name="winding")
    if mode == "detour":
        from .fleet import random_lagrangian
        mid = random_lagrangian(a.space, rng or np.random.default_rng(0))
        return concatenate([geodesic(a, mid), geodesic(mid, b)])
    if mode == "structured":
        if S is None:
            raise ValueError("structured connector needs S")
        return structured_connector(a, b, S, side)
    if mode == "constant":
        if not same_subspace(a, b):
            raise HypothesisError("constant connector needs equal endpoints",
                                  {"gap": gap_distance(a, b)})
        return LagrangianPath.constant(a, "constant")
    if mode == "rotation":
        if rotation is None:
            raise ValueError("rotation connector needs a path")
        if not (same_subspace(rotation(0.0), a) and same_subspace(rotation(1.0), b)):
            raise HypothesisError("rotation path endpoints do not match the connector endpoints",
                                  {"gap0": gap_distance(rotation(0.0), a),
                                   "gap1": gap_distance(rotation(1.0), b)})
        return rotation
    raise ValueError(f"unknown connector mode {mode!r}")


# --- scenarios and the eleven paths --------------------------------------------------

@dataclass
class SplitScenario:
    path: OperatorPath
    bx: LPath
    by: LPath
    r: float = 0.0
    connector: str = "geodesic"
    connector_M5: str | None = None
    nu0: float | None = None
    nu1: float | None = None
    seed: int | None = None
    name: str = ""

    def operator(self, t: float) -> ModelDiracOperator:
        D = self.path(t)
        return stretched(D, self.r) if self.r else D

    def stretched_path(self) -> OperatorPath:
        if not self.r:
            return self.path
        return OperatorPath(lambda t: stretched(self.path(t), self.r), self.path.speed, self.path.name)


@dataclass
class EndpointData:
    nu0: float
    nu1: float
    graded_X0: GradedAdiabaticData
    graded_Y1: GradedAdiabaticData


@dataclass
class ElevenPaths:
    L: list[LagrangianPath]
    M: list[LagrangianPath]
    ends: EndpointData


def _side_limit(L0: Lagrangian, S: np.ndarray, nu: float | None) -> GradedAdiabaticData:
    nu = nonresonance_level(L0, S) if nu is None else nu
    return graded_adiabatic_limit(L0, S, nu)


def endpoint_data(sc: SplitScenario) -> EndpointData:
    D0, D1 = sc.operator(0.0), sc.operator(1.0)
    gx = _side_limit(cauchy_data(D0, "X"), D0.S_sigma, sc.nu0)
    gy = _side_limit(cauchy_data(D1, "Y"), -D1.S_sigma, sc.nu1)
    return EndpointData(gx.nu0, gy.nu0, gx, gy)


def build_eleven_paths(sc: SplitScenario, tol: float = 1e-6) -> ElevenPaths:
    D = sc.operator
    space = D(0.0).boundary_space().space
    ends = endpoint_data(sc)
    D0, D1 = D(0.0), D(1.0)
    rng = np.random.default_rng(sc.seed if sc.seed is not None else 0)
    lamX = LagrangianPath(lambda t: cauchy_data(D(t), "X"), space, "Λ_X")
    lamY = LagrangianPath(lambda t: cauchy_data(D(t), "Y"), space, "Λ_Y")
    BX = LagrangianPath(sc.bx, space, "B_X")
    BY = LagrangianPath(sc.by, space, "B_Y")
    const = LagrangianPath.constant

    L1 = stretch_path(lambda r: cauchy_data(D0, "X"), D0.S_sigma, ends.nu0, name="stretch_X(0)")
    M4 = stretch_path(lambda r: cauchy_data(D1, "Y"), -D1.S_sigma, ends.nu1, name="stretch_Y(1)")
    L2 = auto_connector(ends.graded_X0.adiabatic, BY(0.0), sc.connector, S=D0.S_sigma, side="minus",
                        rng=rng, rotation=rotation_path_C(ends.graded_X0) if sc.connector == "rotation" else None)
    mode5 = sc.connector_M5 or sc.connector
    M5 = auto_connector(ends.graded_Y1.adiabatic, BX(1.0), mode5, S=D1.S_sigma, side="plus",
                        rng=rng, rotation=rotation_path_C(ends.graded_Y1) if mode5 == "rotation" else None)
    L = [L1, L2, BY, const(BY(1.0)), const(BY(1.0)), BY.reverse(), L2.reverse(), L1.reverse(),
         lamX, const(lamX(1.0)), const(lamX(1.0))]
    M = [const(lamY(0.0)), const(lamY(0.0)), lamY, M4, M5, BX.reverse(), const(BX(0.0)),
         const(BX(0.0)), BX, M5.reverse(), M4.reverse()]
    for seq, start, end in ((L, lamX(0.0), lamX(1.0)), (M, lamY(0.0), lamY(1.0))):
        if gap_distance(seq[0](0.0), start) > tol or gap_distance(seq[-1](1.0), end) > tol:
            raise IdentityError("composite path endpoints do not match the Cauchy data")
        for a, b in zip(seq[:-1], seq[1:]):
            d = gap_distance(a(1.0), b(0.0))
            if d > tol:
                raise IdentityError(f"eleven-path chain broken at {a.name!r} -> {b.name!r} (gap {d:.3g})")
    return ElevenPaths(L, M, ends)


@dataclass
class SplittingReport:
    sf_total: int
    sf_X: int
    sf_Y: int
    mu_rev: int
    mu: dict[int, int]
    residual: int
    nu0: float
    nu1: float
    r: float
    seed: int | None = None
    name: str = ""
    sf_X_oracle: int | None = None
    sf_Y_oracle: int | None = None
    nicolaescu: int | None = None
    logs: dict[str, CrossingLog] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k != "logs"}
        d["mu"] = {str(k): v for k, v in sorted(self.mu.items())}
        d["crossings"] = {k: [list(r) for r in log.records] for k, log in sorted(self.logs.items())}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, default=_json_default)

    def to_table(self) -> str:
        rows = [("SF(D)", self.sf_total), ("SF(D_X, B_X)", self.sf_X), ("SF(D_Y, B_Y)", self.sf_Y),
                ("mu(B_Y(1-t), B_X(1-t))", self.mu_rev)]
        rows += [(f"mu(L{i}, M{i})", self.mu[i]) for i in TERMS]
        rows.append(("residual", self.residual))
        width = max(len(k) for k, _ in rows)
        head = f"scenario {self.name or '-'}  seed={self.seed}  r={self.r:g}  nu0={self.nu0:g}  nu1={self.nu1:g}"
        return "\n".join([head] + [f"  {k:<{width}}  {v:>4d}" for k, v in rows]) + "\n"


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    raise TypeError(type(o))


def verify_splitting(sc: SplitScenario, check_oracles: bool = True, tol: float = 1e-6) -> SplittingReport:
    paths = build_eleven_paths(sc, tol)
    mus, logs = {}, {}
    for i, (Li, Mi) in enumerate(zip(paths.L, paths.M), start=1):
        mus[i], logs[f"mu{i}"] = maslov_index(Li, Mi, return_log=True)
    sp = sc.stretched_path()
    sf_total = sf_oracle_closed(sp)
    sf_X, sf_Y = mus[9], mus[3]
    report = SplittingReport(sf_total, sf_X, sf_Y, mus[6], {i: mus[i] for i in TERMS}, 0,
                             paths.ends.nu0, paths.ends.nu1, sc.r, sc.seed, sc.name, logs=logs)
    if check_oracles:
        report.sf_X_oracle = sf_oracle_boundary(sp, sc.bx, "X")
        report.sf_Y_oracle = sf_oracle_boundary(sp, sc.by, "Y")
        if (report.sf_X_oracle, report.sf_Y_oracle) != (sf_X, sf_Y):
            raise IdentityError(
                f"boundary oracle disagrees with Maslov index: X {report.sf_X_oracle} vs {sf_X}, "
                f"Y {report.sf_Y_oracle} vs {sf_Y}", logs)
    report.residual = sf_total - (sf_X + sf_Y + mus[6] + sum(mus[i] for i in TERMS))
    return report


# --- hypotheses ----------------------------------------------------------------------

def _grid(n: int = 33) -> np.ndarray:
    return np.linspace(0.0, 1.0, n)


def check_hypothesis(sc: SplitScenario, which: str, *, lam: Callable[[float], float] | None = None,
                     r_grid=(1.0, 2.0, 4.0, 8.0), tol: float = 1e-8) -> tuple[bool, dict]:
    """Evaluate one of: trans, const, kill, confusing, L2ker, gap.  Returns (holds, diagnostics)."""
    D = sc.operator
    diag: dict = {"hypothesis": which}
    if which == "trans":
        ends = endpoint_data(sc)
        d0 = intersection_dim(ends.graded_X0.adiabatic, _limit_Y(sc, 0.0))
        d1 = intersection_dim(_limit_X(sc, 1.0), ends.graded_Y1.adiabatic)
        diag.update(dim0=d0, dim1=d1)
        return d0 == 0 and d1 == 0, diag
    if which == "const":
        ok = True
        for i in (0.0, 1.0):
            lim = intersection_dim(_limit_X(sc, i), _limit_Y(sc, i))
            dims = [intersection_dim(cauchy_data(D(i), "X", r), cauchy_data(D(i), "Y", r)) for r in r_grid]
            diag[f"t={i:g}"] = {"limit": lim, "r_sweep": dict(zip(map(float, r_grid), dims))}
            ok &= all(d == lim for d in dims)
        return ok, diag
    if which == "kill":
        ends = endpoint_data(sc)
        g0 = gap_distance(sc.by(0.0), ends.graded_X0.adiabatic)
        g1 = gap_distance(sc.bx(1.0), ends.graded_Y1.adiabatic)
        diag.update(gap_BY0=g0, gap_BX1=g1)
        return g0 < 1e-6 and g1 < 1e-6, diag
    if which == "confusing":
        D0 = D(0.0)
        split = spectral_split(D0.boundary_space().space, D0.S_sigma, 0.0)
        Lt = _ltilde(cauchy_data(D0, "X"), D0.S_sigma)
        # with ker S = 0 the reduced Lagrangian is empty and the target is P^- itself
        target = split.stabilize_minus(split.to_reduced(Lt)) if Lt.shape[1] else split.Pminus
        g0 = frame_gap(sc.by(0.0).frame, getattr(target, "frame", target))
        bx = sc.bx(0.0)
        contains = intersect_frames(bx.frame, split.Pplus).shape[1] == split.Pplus.shape[1]
        inside = intersect_frames(bx.frame, np.hstack([split.kernel, split.Pplus])).shape[1] == bx.frame.shape[1]
        diag.update(gap_BY0=g0, BX0_contains_Pplus=bool(contains), BX0_in_ker_plus=bool(inside))
        return g0 < 1e-6 and contains and inside, diag
    if which == "L2ker":
        dims = {}
        for i in (0.0, 1.0):
            Di = D(i)
            sp = spectral_split(Di.boundary_space().space, Di.S_sigma, 0.0)
            dims[f"X{i:g}"] = intersect_frames(cauchy_data(Di, "X").frame, sp.Pplus).shape[1] if sp.Pplus.shape[1] else 0
            dims[f"Y{i:g}"] = intersect_frames(cauchy_data(Di, "Y").frame, sp.Pminus).shape[1] if sp.Pminus.shape[1] else 0
        diag["dims"] = dims
        return all(v == 0 for v in dims.values()), diag
    if which == "gap":
        margins = []
        for t in _grid():
            w = np.abs(np.linalg.eigvalsh(D(t).S_sigma))
            lt = lam(t) if lam is not None else 0.5 * (w[w > tol].min() if np.any(w > tol) else 1.0)
            margins.append(float(np.min(np.abs(w - lt))))
        diag["min_margin"] = min(margins)
        return diag["min_margin"] > 1e-6, diag
    raise ValueError(f"unknown hypothesis {which!r}")


def _limit_X(sc: SplitScenario, t: float) -> Lagrangian:
    Dt = sc.operator(t)
    return _side_limit(cauchy_data(Dt, "X"), Dt.S_sigma, None).adiabatic


def _limit_Y(sc: SplitScenario, t: float) -> Lagrangian:
    Dt = sc.operator(t)
    return _side_limit(cauchy_data(Dt, "Y"), -Dt.S_sigma, None).adiabatic


def _ltilde(L: Lagrangian, S: np.ndarray) -> np.ndarray:
    """Limiting values of extended L^2 solutions: proj_ker S (L ∩ (ker S ⊕ P^+)), ambient frame."""
    split = spectral_split(L.space, S, 0.0)
    if split.kernel.shape[1] == 0:
        return split.kernel
    upper = np.hstack([split.kernel, split.Pplus])
    meet = intersect_frames(L.frame, upper)
    return orth(split.kernel @ (split.kernel.conj().T @ meet))


def ltilde_X(D: ModelDiracOperator) -> np.ndarray:
    return _ltilde(cauchy_data(D, "X"), D.S_sigma)


def ltilde_Y(D: ModelDiracOperator) -> np.ndarray:
    return _ltilde(cauchy_data(D, "Y"), -D.S_sigma)


# --- corollaries ---------------------------------------------------------------------

R_CAP = 64.0


@dataclass
class CorollaryReport:
    theorem: str
    lhs: int
    terms: dict[str, int]
    r0: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def residual(self) -> int:
        return self.lhs - sum(self.terms.values())

    def to_dict(self) -> dict:
        return {"theorem": self.theorem, "lhs": self.lhs, "terms": dict(sorted(self.terms.items())),
                "residual": self.residual, "r0": self.r0, "diagnostics": self.diagnostics}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, default=_json_default)


def _stretch_path(path: OperatorPath, r: float) -> OperatorPath:
    if not r:
        return path
    return OperatorPath(lambda t: stretched(path(t), r), path.speed, f"{path.name}^r")


ANGLE_MIN = 1e-6


def ray_crossings(pair: Callable[[float], tuple[Lagrangian, Lagrangian]], r: float) -> CrossingLog:
    """Crossings of the pair along the stretch ray r' = r + s/(1-s), s in [0, 1]."""
    at = lambda s: pair(np.inf if s >= 1.0 else r + s / (1.0 - s))
    space = pair(r)[0].space
    _, log = maslov_index(LagrangianPath(lambda s: at(s)[0], space), LagrangianPath(lambda s: at(s)[1], space),
                          return_log=True)
    return log


def find_r0(pair: Callable[[float, float], tuple[Lagrangian, Lagrangian]], cap: float = R_CAP) -> float:
    """Smallest r = 1, 2, 4, ... <= cap such that pair(t, r') is transverse for all r' >= r, t in {0, 1}.

    Transversality on the whole ray is checked with the Maslov engine (no crossings) plus
    the two ends of the ray.
    """
    r = 1.0
    while r <= cap:
        ok = True
        for t in (0.0, 1.0):
            f = lambda rr, t=t: pair(t, rr)
            if min(min_angle(*f(r)), min_angle(*f(np.inf))) <= ANGLE_MIN or ray_crossings(f, r).records:
                ok = False
                break
        if ok:
            return r
        r *= 2
    raise HypothesisError("transversality not achieved", {"cap": cap})


def _cauchy_pair(path: OperatorPath) -> Callable[[float, float], tuple[Lagrangian, Lagrangian]]:
    return lambda t, r: (cauchy_data(path(t), "X", r), cauchy_data(path(t), "Y", r))


def _kernel_dims(path: OperatorPath, n: int = 33) -> list[int]:
    return [spectral_split(path(t).boundary_space().space, path(t).S_sigma, 0.0).kernel.shape[1]
            for t in _grid(n)]


def _l2ker_dims(D: ModelDiracOperator) -> tuple[int, int]:
    sp = spectral_split(D.boundary_space().space, D.S_sigma, 0.0)
    dx = intersect_frames(cauchy_data(D, "X").frame, sp.Pplus).shape[1] if sp.Pplus.shape[1] else 0
    dy = intersect_frames(cauchy_data(D, "Y").frame, sp.Pminus).shape[1] if sp.Pminus.shape[1] else 0
    return dx, dy


def _require(ok: bool, message: str, **diag) -> None:
    if not ok:
        raise HypothesisError(message, diag)


def _assert_identity(rep: CorollaryReport) -> CorollaryReport:
    if rep.residual:
        raise IdentityError(f"{rep.theorem}: {rep.lhs} != {rep.terms} (residual {rep.residual})",
                            {"report": rep.to_dict()})
    return rep


def _boundary_frame(path: OperatorPath, t: float, which: str, level: float = 0.0) -> np.ndarray:
    D = path(t)
    sp = spectral_split(D.boundary_space().space, D.S_sigma, level)
    return sp.Pplus if which == "plus" else sp.Pminus


def verify_bunke(path: OperatorPath, cap: float = R_CAP) -> CorollaryReport:
    """SF(D, M^r) = SF(D_{X^r}; P^+) + SF(D_{Y^r}; P^-) for invertible S."""
    kd = _kernel_dims(path)
    _require(max(kd) == 0, "ker S(t) must vanish", kernel_dims=kd)
    for t in (0.0, 1.0):
        _require(_l2ker_dims(path(t)) == (0, 0), "L2ker fails at an endpoint", t=t, dims=_l2ker_dims(path(t)))
    r0 = find_r0(_cauchy_pair(path), cap)
    pr = _stretch_path(path, r0)
    space = path(0.0).boundary_space().space
    bx = lambda t: Lagrangian(_boundary_frame(path, t, "plus"), space)
    by = lambda t: Lagrangian(_boundary_frame(path, t, "minus"), space)
    terms = {"SF(X;P+)": sf_oracle_boundary(pr, bx, "X"), "SF(Y;P-)": sf_oracle_boundary(pr, by, "Y")}
    return _assert_identity(CorollaryReport("bunke", sf_oracle_closed(pr), terms, r0))


def _ltilde_path(path: OperatorPath, side: str) -> Callable[[float], np.ndarray]:
    return (lambda t: ltilde_X(path(t))) if side == "X" else (lambda t: ltilde_Y(path(t)))


def _reduced_transverse(a: np.ndarray, b: np.ndarray) -> bool:
    return a.shape[1] == 0 or intersect_frames(a, b).shape[1] == 0


def _stabilized_mu(path: OperatorPath, AX: Callable[[float], np.ndarray], AY: Callable[[float], np.ndarray],
                   lam: Callable[[float], float] = lambda t: 0.0) -> tuple[int, CrossingLog]:
    """mu(A_X, A_Y) in H_lam(t), computed ambiently as mu(P^-_lam ⊕ A_X, A_Y ⊕ P^+_lam)."""
    space = path(0.0).boundary_space().space
    L = LagrangianPath(lambda t: Lagrangian(orth(np.hstack([_boundary_frame(path, t, "minus", lam(t)), AX(t)])),
                                            space), space, "P-+A_X")
    M = LagrangianPath(lambda t: Lagrangian(orth(np.hstack([AY(t), _boundary_frame(path, t, "plus", lam(t))])),
                                            space), space, "A_Y+P+")
    return maslov_index(L, M, return_log=True)


def _l2ker_defect(path: OperatorPath, side: str, t: float) -> float:
    """1 - cos(smallest angle) between Λ_side(t) and P^±(t); zero iff they meet."""
    which = "plus" if side == "X" else "minus"
    P = _boundary_frame(path, t, which)
    if not P.shape[1]:
        return 1.0
    return 1.0 - float(np.linalg.norm(cauchy_data(path(t), side).frame.conj().T @ P, 2))


def _check_l2ker_all(path: OperatorPath, samples: int = 129) -> None:
    """Λ_X(t) ∩ P^+(t) = 0 and Λ_Y(t) ∩ P^-(t) = 0 for every t.

    Intersections occur at isolated t, so a grid alone misses them.  When ker S = 0 the
    P^± are Lagrangian and the Maslov engine sees every crossing; otherwise the angle
    defect is minimized around each sampled local minimum.
    """
    bad = [float(t) for t in _grid() if _l2ker_dims(path(t)) != (0, 0)]
    _require(not bad, "L2ker fails", times=bad)
    space = path(0.0).boundary_space().space
    lagrangian_P = max(_kernel_dims(path)) == 0
    for side, which in (("X", "plus"), ("Y", "minus")):
        if lagrangian_P:
            lam = LagrangianPath(lambda t, side=side: cauchy_data(path(t), side), space)
            bc = LagrangianPath(lambda t, which=which: Lagrangian(_boundary_frame(path, t, which), space), space)
            _, log = maslov_index(lam, bc, return_log=True)
            _require(not log.records, "L2ker fails", side=side, crossings=log.records)
            continue
        ts = np.linspace(0.0, 1.0, samples)
        d = np.array([_l2ker_defect(path, side, t) for t in ts])
        for i in np.flatnonzero((d[1:-1] <= d[:-2]) & (d[1:-1] <= d[2:])) + 1:
            res = minimize_scalar(lambda t: _l2ker_defect(path, side, t), bounds=(ts[i - 1], ts[i + 1]),
                                  method="bounded", options={"xatol": 1e-10})
            _require(res.fun > 1e-8, "L2ker fails", side=side, t=float(res.x), defect=float(res.fun))


def _check_ltilde_transverse(path: OperatorPath) -> None:
    for t in (0.0, 1.0):
        D = path(t)
        _require(_reduced_transverse(ltilde_X(D), ltilde_Y(D)), "L̃_X and L̃_Y meet at an endpoint", t=t)


def verify_yoshida(path: OperatorPath, cap: float = R_CAP) -> CorollaryReport:
    """SF(D, M^r) = mu(L̃_X, L̃_Y)."""
    kd = _kernel_dims(path)
    _require(len(set(kd)) == 1, "dim ker S(t) is not constant", kernel_dims=kd)
    _check_l2ker_all(path)
    _check_ltilde_transverse(path)
    r0 = find_r0(_cauchy_pair(path), cap)
    pr = _stretch_path(path, r0)
    mu, log = _stabilized_mu(path, _ltilde_path(path, "X"), _ltilde_path(path, "Y"))
    rep = CorollaryReport("yoshida", sf_oracle_closed(pr), {"mu(L~X,L~Y)": mu}, r0,
                          {"kernel_dim": kd[0], "crossings": log.records})
    return _assert_identity(rep)


def _level_part(path: OperatorPath, t: float, lam: float, which: str) -> np.ndarray:
    """P^∓(t) ∩ H_lam(t): eigenvectors of S(t) with eigenvalue in [-lam, 0) or (0, lam]."""
    D = path(t)
    S = D.S_sigma
    zero = 1e-10 * max(1.0, float(np.linalg.norm(S, 2)))
    frames = [f for mu, f in eigen_clusters(S)
              if zero < (-mu if which == "minus" else mu) <= lam]
    return np.hstack(frames) if frames else np.zeros((S.shape[0], 0), dtype=complex)


def verify_3term(path: OperatorPath, AX: Callable[[float], np.ndarray], AY: Callable[[float], np.ndarray],
                 lam: Callable[[float], float], cap: float = R_CAP) -> CorollaryReport:
    """SF(D, M^r) = SF(D_X, A_X ⊕ P^+_lam) + SF(D_Y, P^-_lam ⊕ A_Y) + mu(A_X, A_Y).

    A_X, A_Y return ambient frames of Lagrangians of H_lam(t).
    """
    _check_l2ker_all(path)
    ok, diag = check_hypothesis(SplitScenario(path, None, None), "gap", lam=lam)
    _require(ok, "lambda(t) meets the spectrum of S(t)", **diag)
    _check_ltilde_transverse(path)
    pin_Y0 = orth(np.hstack([_level_part(path, 0.0, lam(0.0), "minus"), ltilde_X(path(0.0))]))
    pin_X1 = orth(np.hstack([ltilde_Y(path(1.0)), _level_part(path, 1.0, lam(1.0), "plus")]))
    _require(frame_gap(AY(0.0), pin_Y0) < 1e-6, "A_Y(0) is mis-pinned", gap=frame_gap(AY(0.0), pin_Y0))
    _require(frame_gap(AX(1.0), pin_X1) < 1e-6, "A_X(1) is mis-pinned", gap=frame_gap(AX(1.0), pin_X1))
    for t in (0.0, 1.0):
        _require(_reduced_transverse(AX(t), AY(t)), "A_X and A_Y meet at an endpoint", t=t)
    r0 = find_r0(_cauchy_pair(path), cap)
    pr = _stretch_path(path, r0)
    space = path(0.0).boundary_space().space
    bx = lambda t: Lagrangian(orth(np.hstack([AX(t), _boundary_frame(path, t, "plus", lam(t))])), space)
    by = lambda t: Lagrangian(orth(np.hstack([_boundary_frame(path, t, "minus", lam(t)), AY(t)])), space)
    mu, _ = _stabilized_mu(path, AX, AY, lam)
    terms = {"SF(X;A_X+P+)": sf_oracle_boundary(pr, bx, "X"),
             "SF(Y;P-+A_Y)": sf_oracle_boundary(pr, by, "Y"), "mu(A_X,A_Y)": mu}
    return _assert_identity(CorollaryReport("3term", sf_oracle_closed(pr), terms, r0))


def verify_loops(path: OperatorPath, bx: LPath, by: LPath, tol: float = 1e-9) -> CorollaryReport:
    """SF(D_X; B_X) + SF(D_Y; B_Y) + mu(B_X, B_Y) = 0 for loops, with no further hypotheses."""
    D0, D1 = path(0.0), path(1.0)
    _require(D0.geometry == D1.geometry and _potential_distance(D0, D1) < tol
             and np.allclose(D0.S_p, D1.S_p) and np.allclose(D0.S_q, D1.S_q), "D is not a loop")
    _require(gap_distance(bx(0.0), bx(1.0)) < 1e-8, "B_X is not a loop")
    _require(gap_distance(by(0.0), by(1.0)) < 1e-8, "B_Y is not a loop")
    space = D0.boundary_space().space
    mu, log = maslov_index(LagrangianPath(bx, space, "B_X"), LagrangianPath(by, space, "B_Y"), return_log=True)
    terms = {"SF(X;B_X)": sf_oracle_boundary(path, bx, "X"), "SF(Y;B_Y)": sf_oracle_boundary(path, by, "Y"),
             "mu(B_X,B_Y)": mu}
    return _assert_identity(CorollaryReport("loops", 0, terms, 0.0, {"crossings": log.records}))


def verify_wbound(D: ModelDiracOperator, A: Callable[[float], np.ndarray], nu: float | None = None,
                  reduce: bool = True, cap: float = R_CAP) -> CorollaryReport:
    """SF(D, A ⊕ P^+) = mu(L̃_X, A) + mu(M(t), A(0) ⊕ P^+) + mu(M(1-t), A(1) ⊕ P^+).

    M is the stretch path from Λ_X to P^-_nu ⊕ L_X.  With ``reduce`` and both
    transversality clauses, also checks SF(D^r, B) = mu(L̃_X, A) after stretching.
    """
    bsp = D.boundary_space()
    space, S = bsp.space, D.S_sigma
    split = spectral_split(space, S, 0.0)
    for t in (0.0, 1.0):
        a = A(t)
        _require(a.shape[1] * 2 == split.kernel.shape[1] and
                 intersect_frames(a, split.kernel).shape[1] == a.shape[1], "A(t) is not a Lagrangian of ker S", t=t)
    B = lambda t: Lagrangian(orth(np.hstack([A(t), split.Pplus])), space)
    const_path = OperatorPath(lambda t: D, lambda a, b: 0.0, "const")
    sf = sf_oracle_boundary(const_path, B, "X")
    lam = cauchy_data(D, "X")
    Lt = _ltilde(lam, S)
    mu_red, _ = maslov_index(LagrangianPath.constant(Lagrangian(orth(np.hstack([split.Pminus, Lt])), space)),
                             LagrangianPath(B, space), return_log=True)
    Mpath = stretch_path(lambda r: lam, S, nu, name="M")
    m0 = maslov_index(Mpath, LagrangianPath.constant(B(0.0)))
    m1 = maslov_index(Mpath.reverse(), LagrangianPath.constant(B(1.0)))
    rep = _assert_identity(CorollaryReport("wbound", sf, {"mu(L~X,A)": mu_red, "mu(M,B0)": m0, "mu(M^-1,B1)": m1},
                                           0.0))
    if reduce:
        limit = Mpath(1.0)
        clauses = [intersection_dim(limit, B(t)) == 0 for t in (0.0, 1.0)]
        rep.diagnostics["transversality_clauses"] = clauses
        if all(clauses):
            r0 = find_r0(lambda t, r: (cauchy_data(D, "X", r), B(t)), cap)
            sf_r = sf_oracle_boundary(_stretch_path(const_path, r0), B, "X")
            rep.diagnostics.update(r0=r0, sf_stretched=sf_r)
            if sf_r != mu_red:
                raise IdentityError(f"wbound reduced: SF(D^r,B)={sf_r} != mu(L~X,A)={mu_red}", rep.to_dict())
    return rep


def verify_nicolaescu(path: OperatorPath, flip: bool = False, bpath: LPath | None = None,
                      side: str = "X", strict: bool = True) -> CorollaryReport:
    """SF(D) = mu(Λ_X, Λ_Y) on the circle, or SF(D, B) = mu(Λ_X, B) / mu(B, Λ_Y) with a boundary.

    ``flip`` evaluates the Maslov side with the opposite sign of J_Σ (negative control).
    """
    space = path(0.0).boundary_space(flip).space
    reframe = lambda L: Lagrangian(L.frame, space)
    lam = {s: LagrangianPath(lambda t, s=s: cauchy_data(path(t), s, flip=flip), space, f"Λ_{s}") for s in "XY"}
    if bpath is None:
        mu = maslov_index(lam["X"], lam["Y"])
        sf = sf_oracle_closed(path)
        theorem = "nicolaescu"
    else:
        B = LagrangianPath(lambda t: reframe(bpath(t)), space, "B")
        mu = maslov_index(lam["X"], B) if side == "X" else maslov_index(B, lam["Y"])
        sf = sf_oracle_boundary(path, bpath, side)
        theorem = f"nicolaescu-{side}"
    rep = CorollaryReport(theorem, sf, {"mu": mu}, 0.0, {"flip": flip})
    return _assert_identity(rep) if strict else rep


def connector_sums(sc: SplitScenario, modes=("geodesic", "winding", "detour")) -> dict[str, tuple[int, int]]:
    """(mu2 + mu7, mu5 + mu10) for each connector mode; these depend only on the endpoints."""
    out = {}
    for mode in modes:
        paths = build_eleven_paths(replace(sc, connector=mode, connector_M5=mode))
        mu = [maslov_index(L, M) for L, M in zip(paths.L, paths.M)]
        out[mode] = (mu[1] + mu[6], mu[4] + mu[9])
    return out


def sttt_r0(sc: SplitScenario, cap: float = R_CAP) -> float:
    """Smallest r = 1, 2, 4, ... with mu_1 = mu_11 = 0 guaranteed at stretch r.

    Sufficient condition, per endpoint t: sup_{r' >= r} gap(Λ_X^{r'}, lim_X) +
    sup_{r' >= r} gap(Λ_Y^{r'}, lim_Y) < 1 - cos(angle(lim_X, lim_Y)), the sup taken
    on a doubling grid up to 64 r.  Requires Hypothesis trans.
    """
    ok, diag = check_hypothesis(sc, "trans")
    _require(ok, "Hypothesis trans fails", **diag)
    lims = {t: (_limit_X(sc, t), _limit_Y(sc, t)) for t in (0.0, 1.0)}
    r = 1.0
    while r <= cap:
        good = True
        for t, (lx, ly) in lims.items():
            D = sc.operator(t)
            grid = [r * 2.0 ** k for k in range(7)]
            gx = max(gap_distance(cauchy_data(D, "X", rr), lx) for rr in grid)
            gy = max(gap_distance(cauchy_data(D, "Y", rr), ly) for rr in grid)
            if gx + gy >= 1.0 - np.cos(min_angle(lx, ly)):
                good = False
                break
        if good:
            return r
        r *= 2
    raise HypothesisError("transversality not achieved", {"cap": cap})
