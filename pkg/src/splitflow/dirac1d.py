"""Model Dirac operators D = J(d/dx + A(x)) on a circle cut at two points p < q.

X is the arc [p, q], Y the arc [q, p + c].  A is constant (= S_p, S_q) on collars of
half-width w around the cuts and piecewise constant (or a smooth callable) in
between.  Eigen-solutions satisfy psi' = -(A + lam J) psi.

Boundary space Σ = fiber(p) ⊕ fiber(q) carries J_Σ = J ⊕ (-J), the form of Green's
formula on X, and S_Σ = (-S_p) ⊕ S_q, the tangential operator read in the outward
normal of X (so stretched Cauchy data of X grow along P^-(S_Σ)).  Cauchy data:
Λ_X = {(psi(p), psi(q)) : psi solves on X}, Λ_Y = {(psi(p + c), psi(q))}.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .hsymp import (HermitianSymplecticSpace, frame_gap, Lagrangian, SpectralSplit, SymplecticError,
                    check_anticommuting, flow_lagrangian, intersection_dim, is_lagrangian,
                    lagrangian, spectral_split)

Field = Callable[[float], np.ndarray]


BOUNDARY_STEP = 0.25
TRACK_WINDOW = 1.0


class AmbiguousCount(RuntimeError):
    """A counting contour passed (numerically) through an eigenvalue."""


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True)
class ModelGeometry:
    circumference: float
    p: float
    q: float
    w: float

    def __post_init__(self):
        c, p, q, w = self.circumference, self.p, self.q, self.w
        if not (c > 0 and w > 0 and 0 <= p < q < c):
            raise ValueError("need c > 0, w > 0 and 0 <= p < q < c")
        if q - p < 2 * w - 1e-12 or c - (q - p) < 2 * w - 1e-12:
            raise ValueError("collars overlap: both arcs must be at least 2w long")

    @property
    def x_length(self) -> float:
        return self.q - self.p

    @property
    def y_length(self) -> float:
        return self.circumference - self.x_length


def _split_potential(J: np.ndarray, A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(J-anticommuting part, J-commuting part)."""
    JAJ = J @ A @ J
    return (A + JAJ) / 2, (A - JAJ) / 2


def check_potential(space: HermitianSymplecticSpace, A: np.ndarray, tol: float = 1e-9) -> None:
    """D = J(d/dx + A) is symmetric iff JA is Hermitian."""
    JA = space.J @ A
    if np.linalg.norm(JA - JA.conj().T) > tol * max(1.0, np.linalg.norm(A)):
        raise SymplecticError("J A is not Hermitian")


@dataclass(frozen=True, eq=False)
class ModelDiracOperator:
    geometry: ModelGeometry
    space: HermitianSymplecticSpace
    S_p: np.ndarray
    S_q: np.ndarray
    x_pieces: tuple = ()
    y_pieces: tuple = ()
    x_field: Field | None = None
    y_field: Field | None = None

    def __post_init__(self):
        for S in (self.S_p, self.S_q):
            check_anticommuting(self.space, S)
        for A in (*self.x_pieces, *self.y_pieces):
            check_potential(self.space, A)
        g = self.geometry
        for pieces, fld, length in ((self.x_pieces, self.x_field, g.x_length),
                                    (self.y_pieces, self.y_field, g.y_length)):
            if length - 2 * g.w > 1e-12 and not pieces and fld is None:
                raise ValueError("arc interior needs pieces or a field")

    def segments(self) -> list[tuple[float, float, object]]:
        """(start, end, potential) around the circle from p to p + c."""
        g = self.geometry
        p, q, c, w = g.p, g.q, g.circumference, g.w
        segs: list[tuple[float, float, object]] = [(p, p + w, self.S_p)]
        segs += self._interior(p + w, q - w, self.x_pieces, self.x_field)
        segs += [(q - w, q, self.S_q), (q, q + w, self.S_q)]
        segs += self._interior(q + w, p + c - w, self.y_pieces, self.y_field)
        segs.append((p + c - w, p + c, self.S_p))
        return [s for s in segs if s[1] - s[0] > 1e-15]

    @staticmethod
    def _interior(a, b, pieces, fld):
        if b - a <= 1e-15:
            return []
        if fld is not None:
            return [(a, b, fld)]
        edges = np.linspace(a, b, len(pieces) + 1)
        return [(edges[i], edges[i + 1], A) for i, A in enumerate(pieces)]

    def boundary_space(self, flip: bool = False) -> "BoundarySpace":
        return BoundarySpace(_boundary_symplectic(self.space, flip), self.S_sigma)

    @property
    def S_sigma(self) -> np.ndarray:
        m = self.space.dim
        S = np.zeros((2 * m, 2 * m), dtype=complex)
        S[:m, :m] = -self.S_p
        S[m:, m:] = self.S_q
        return S

    def sup_potential(self) -> float:
        return max(np.linalg.norm(np.asarray(A), 2) for *_, A in self.segments()
                   if not callable(A))


@lru_cache(maxsize=None)
def _boundary_symplectic(fiber: HermitianSymplecticSpace, flip: bool) -> HermitianSymplecticSpace:
    m = fiber.dim
    J = np.zeros((2 * m, 2 * m), dtype=complex)
    sign = -1.0 if flip else 1.0
    J[:m, :m] = sign * fiber.J
    J[m:, m:] = -sign * fiber.J
    return HermitianSymplecticSpace(J)


@dataclass(frozen=True, eq=False)
class BoundarySpace:
    space: HermitianSymplecticSpace
    S: np.ndarray

    def split(self, nu: float) -> SpectralSplit:
        return spectral_split(self.space, self.S, nu)


# --- transfer matrices ---------------------------------------------------------------

def _segment_exp(J: np.ndarray, A: np.ndarray, length: float, lam: np.ndarray) -> np.ndarray:
    """exp(-length (A + lam J)) for each lam, closed form when A = A_h + i alpha + gamma J."""
    m = J.shape[0]
    A = np.asarray(A, dtype=complex)
    anti, comm = _split_potential(J, A)
    ialpha = np.trace(comm) / m
    gamma = -np.trace(J @ comm).real / m
    closed = (np.linalg.norm(comm - ialpha * np.eye(m) - gamma * J) < 1e-12 * max(1.0, np.linalg.norm(A))
              and np.linalg.norm(anti - anti.conj().T) < 1e-12 * max(1.0, np.linalg.norm(A)))
    if not closed:
        mats = -length * (A[None] + lam[:, None, None] * J[None])
        return expm(mats)
    s2, V = np.linalg.eigh(anti @ anti)
    s2 = np.clip(s2.real, 0.0, None)
    lp = lam + gamma
    z = length ** 2 * (s2[None, :] - lp[:, None] ** 2)
    k = np.sqrt(z.astype(complex))
    small = np.abs(z) < 1e-8
    ksafe = np.where(small, 1.0, k)
    ch = np.cosh(k)
    sh = np.where(small, 1.0 + z / 6.0, np.sinh(ksafe) / ksafe)
    Vh = V.conj().T
    C = np.einsum("ij,kj,jl->kil", V, ch, Vh)
    Sh = np.einsum("ij,kj,jl->kil", V, sh, Vh)
    M = anti[None] + lp[:, None, None] * J[None]
    E = C - length * M @ Sh
    return E * np.exp(-length * ialpha)[..., None, None]


def _field_transfer(J: np.ndarray, fld: Field, a: float, b: float, lam: np.ndarray,
                    tol: float = 1e-12) -> np.ndarray:
    m = J.shape[0]
    out = []
    for l in lam:
        def rhs(x, y, l=l):
            Y = y.reshape(m, m)
            return (-(np.asarray(fld(x)) + l * J) @ Y).ravel()
        sol = solve_ivp(rhs, (a, b), np.eye(m, dtype=complex).ravel(), method="DOP853",
                        rtol=tol, atol=tol)
        if not sol.success:
            raise OracleError(f"integration failed: {sol.message}")
        out.append(sol.y[:, -1].reshape(m, m))
    return np.array(out)


def transfer_matrix(D: ModelDiracOperator, a: float, b: float, lam=0.0) -> np.ndarray:
    """T with psi(b) = T psi(a); coordinates in [p, p + c]; lam scalar or array (complex ok)."""
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=complex))
    if np.all(lam_arr.imag == 0):
        lam_arr = lam_arr.real
    if b < a:
        raise ValueError("need a <= b")
    J = D.space.J
    m = J.shape[0]
    T = np.broadcast_to(np.eye(m, dtype=complex), (len(lam_arr), m, m)).copy()
    for s, e, A in D.segments():
        lo, hi = max(s, a), min(e, b)
        if hi - lo <= 1e-15:
            continue
        if callable(A):
            E = _field_transfer(J, A, lo, hi, lam_arr)
        else:
            E = _segment_exp(J, A, hi - lo, lam_arr)
        T = E @ T
    return T if np.ndim(lam) else T[0]


def arc_transfer(D: ModelDiracOperator, side: str, lam=0.0) -> np.ndarray:
    g = D.geometry
    if side == "X":
        return transfer_matrix(D, g.p, g.q, lam)
    if side == "Y":
        return transfer_matrix(D, g.q, g.p + g.circumference, lam)
    raise ValueError("side must be 'X' or 'Y'")


def monodromy(D: ModelDiracOperator, lam=0.0) -> np.ndarray:
    g = D.geometry
    return transfer_matrix(D, g.p, g.p + g.circumference, lam)


def graph_frame(T: np.ndarray, top: bool = True) -> np.ndarray:
    """Orthonormal frame of {(x, Tx)} (top=True) or {(Tx, x)}, via the SVD of T."""
    U, sig, Vh = np.linalg.svd(T)
    norm = np.sqrt(1.0 + sig ** 2)
    base = Vh.conj().T / norm
    image = U * (sig / norm)
    return np.vstack([base, image]) if top else np.vstack([image, base])


def cauchy_data(D: ModelDiracOperator, side: str, r: float = 0.0, lam: float = 0.0,
                flip: bool = False) -> Lagrangian:
    """Cauchy data space of the arc stretched by r at each end (r = inf gives the limit)."""
    bs = D.boundary_space(flip)
    if r > 0 and lam == 0:
        base = cauchy_data(D, side, 0.0, 0.0, flip)
        S = bs.S if side == "X" else -bs.S
        return flow_lagrangian(base, S, r)
    if np.isinf(r):
        raise ValueError("r = inf requires lam = 0")
    T = arc_transfer(D, side, lam)
    if r > 0:
        J = D.space.J
        Ep = expm(-r * (D.S_p + lam * J))
        Eq = expm(-r * (D.S_q + lam * J))
        T = Eq @ T @ Ep if side == "X" else Ep @ T @ Eq
    frame = graph_frame(T, top=(side == "X"))
    if not is_lagrangian(bs.space, frame, 1e-8):
        raise SymplecticError("Cauchy data is not Lagrangian: sign convention fault")
    return Lagrangian(frame, bs.space)


def stretched(D: ModelDiracOperator, r: float) -> ModelDiracOperator:
    """The operator on M^r: each collar lengthened by r on both sides of its cut."""
    g = D.geometry
    geo = ModelGeometry(g.circumference + 4 * r, g.p, g.q + 2 * r, g.w + r)
    return replace(D, geometry=geo)


def kernel_dim_closed(D: ModelDiracOperator) -> int:
    return intersection_dim(cauchy_data(D, "X"), cauchy_data(D, "Y"))


def kernel_dim_boundary(D: ModelDiracOperator, B: Lagrangian, side: str = "X") -> int:
    return intersection_dim(cauchy_data(D, side), B)


@dataclass(frozen=True, eq=False)
class BoundaryCondition:
    L: Lagrangian
    side: str
    nu: float | None = None
    interior: np.ndarray | None = None


def make_aps_condition(split: SpectralSplit, interior: np.ndarray, side: str = "X") -> BoundaryCondition:
    """interior ⊕ P^+_nu on X, P^-_nu ⊕ interior on Y; interior in reduced coordinates."""
    interior = np.asarray(interior, dtype=complex)
    interior = interior.reshape(split.Hnu.shape[1], -1) if interior.size else np.zeros((split.Hnu.shape[1], 0))
    if interior.shape[1] and not is_lagrangian(split.reduced_space, interior, 1e-8):
        raise SymplecticError("interior part is not Lagrangian in H_nu")
    L = split.stabilize_plus(interior) if side == "X" else split.stabilize_minus(interior)
    return BoundaryCondition(L, side, split.nu, interior)


# --- eigenvalue oracle by the argument principle -------------------------------------

def _closed_det(D: ModelDiracOperator):
    m = D.space.dim

    def h(lam):
        return np.linalg.det(monodromy(D, lam) - np.eye(m))
    return h


def _boundary_det(D: ModelDiracOperator, B: Lagrangian, side: str):
    m = D.space.dim
    eye = np.eye(m)

    def g(lam):
        T = arc_transfer(D, side, lam)
        top = np.broadcast_to(eye, T.shape) if side == "X" else T
        bot = T if side == "X" else np.broadcast_to(eye, T.shape)
        F = np.concatenate([top, bot], axis=-2)
        Bf = np.broadcast_to(B.frame, (T.shape[0],) + B.frame.shape)
        return np.linalg.det(np.concatenate([F, Bf], axis=-1))
    return g


def count_zeros(fn, a: float, b: float, max_points: int = 20000) -> int:
    """Zeros of an entire fn with only real zeros in (a, b), by winding around a rectangle."""
    if not b > a:
        raise ValueError("empty window")
    eta = float(np.clip(0.5 * (b - a), 1e-6, 1.0))
    corners = np.array([a - 1j * eta, b - 1j * eta, b + 1j * eta, a + 1j * eta, a - 1j * eta])

    def point(s):
        k = np.minimum(np.floor(s).astype(int), 3)
        f = s - k
        return corners[k] + f * (corners[k + 1] - corners[k])

    s = np.linspace(0.0, 4.0, 129)
    vals = fn(point(s))
    for _ in range(60):
        if np.any(vals == 0) or not np.all(np.isfinite(vals)):
            raise AmbiguousCount("contour hits a zero")
        dphi = np.angle(vals[1:] / vals[:-1])
        ratio = np.abs(np.log(np.abs(vals[1:]) / np.abs(vals[:-1])))
        bad = np.nonzero((np.abs(dphi) > 0.4) | (ratio > 1.0))[0]
        if bad.size == 0:
            total = dphi.sum() / (2 * np.pi)
            k = int(round(total))
            if abs(total - k) > 1e-6:
                raise AmbiguousCount(f"non-integer winding {total}")
            return k
        if s.size + bad.size > max_points or np.min(s[bad + 1] - s[bad]) < 1e-13:
            raise AmbiguousCount("contour refinement stalled near a zero")
        mids = 0.5 * (s[bad] + s[bad + 1])
        s = np.insert(s, bad + 1, mids)
        vals = np.insert(vals, bad + 1, fn(point(mids)))
    raise AmbiguousCount("contour refinement did not converge")


def _locate(fn, lo: float, hi: float, resolution: float) -> list[tuple[float, int]]:
    total = count_zeros(fn, lo, hi)
    out = []
    stack = [(lo, hi, total)]
    while stack:
        a, b, k = stack.pop()
        if k == 0:
            continue
        if b - a < resolution:
            out.append((0.5 * (a + b), k))
            continue
        mid = 0.5 * (a + b)
        for shift in (0.0, 0.137, -0.291, 0.411):
            m = mid + shift * (b - a) * 0.5
            try:
                k1 = count_zeros(fn, a, m)
                break
            except AmbiguousCount:
                continue
        else:
            raise OracleError(f"cannot isolate roots in ({a}, {b})")
        stack.append((a, m, k1))
        stack.append((m, b, k - k1))
    return sorted(out)


def _safe_window(fn, lo: float, hi: float) -> tuple[float, float]:
    for nudge in (0.0, 1e-7, -2e-7, 3e-6, -5e-5):
        try:
            count_zeros(fn, lo + nudge, hi - nudge)
            return lo + nudge, hi - nudge
        except AmbiguousCount:
            continue
    raise OracleError("window edges sit on eigenvalues")


def eigenvalues_closed(D: ModelDiracOperator, window: tuple[float, float],
                       resolution: float = 1e-9) -> list[tuple[float, int]]:
    """Eigenvalues in the window as (lambda, multiplicity)."""
    fn = _closed_det(D)
    lo, hi = _safe_window(fn, *window)
    return _locate(fn, lo, hi, resolution)


def eigenvalues_with_boundary(D: ModelDiracOperator, B: Lagrangian, window: tuple[float, float],
                              side: str = "X", resolution: float = 1e-9) -> list[tuple[float, int]]:
    fn = _boundary_det(D, B, side)
    lo, hi = _safe_window(fn, *window)
    return _locate(fn, lo, hi, resolution)


# --- operator paths and spectral flow oracles ---------------------------------------

class OperatorPath:
    """t -> ModelDiracOperator on [0, 1] with a bound on the eigenvalue speed."""

    def __init__(self, func: Callable[[float], ModelDiracOperator],
                 speed: Callable[[float, float], float] | None = None, name: str = ""):
        self._func = func
        self._speed = speed
        self.name = name
        self._cache: dict[float, ModelDiracOperator] = {}

    def __call__(self, t: float) -> ModelDiracOperator:
        t = float(t)
        if t not in self._cache:
            self._cache[t] = self._func(t)
        return self._cache[t]

    def speed(self, t0: float, t1: float) -> float:
        """Upper bound for |d lambda/dt| on [t0, t1] (sup of |dA/dt|)."""
        if self._speed is not None:
            return self._speed(t0, t1)
        ts = np.linspace(t0, t1, 5)
        best = 0.0
        for a, b in zip(ts[:-1], ts[1:]):
            best = max(best, _potential_distance(self(a), self(b)) / (b - a))
        return 2.0 * best + 1e-12


def _potential_distance(D0: ModelDiracOperator, D1: ModelDiracOperator) -> float:
    pairs = zip(D0.segments(), D1.segments())
    return max((float(np.linalg.norm(np.asarray(A0) - np.asarray(A1), 2))
                for (_, _, A0), (_, _, A1) in pairs if not (callable(A0) or callable(A1))), default=0.0)


def _lerp_op(D0: ModelDiracOperator, D1: ModelDiracOperator, s: float) -> ModelDiracOperator:
    mix = lambda a, b: (1 - s) * np.asarray(a) + s * np.asarray(b)
    return replace(D0, S_p=mix(D0.S_p, D1.S_p), S_q=mix(D0.S_q, D1.S_q),
                   x_pieces=tuple(mix(a, b) for a, b in zip(D0.x_pieces, D1.x_pieces)),
                   y_pieces=tuple(mix(a, b) for a, b in zip(D0.y_pieces, D1.y_pieces)))


def keyframe_path(ops: Sequence[ModelDiracOperator], name: str = "") -> OperatorPath:
    """Piecewise-linear interpolation in t between keyframes (same geometry and cells)."""
    ops = list(ops)
    if len(ops) < 2:
        ops = ops * 2
    K = len(ops) - 1
    for D in ops[1:]:
        if (D.geometry != ops[0].geometry or len(D.x_pieces) != len(ops[0].x_pieces)
                or len(D.y_pieces) != len(ops[0].y_pieces)):
            raise ValueError("keyframes must share geometry and cell layout")
    rates = [K * _potential_distance(a, b) for a, b in zip(ops[:-1], ops[1:])]

    def f(t):
        k = min(int(np.floor(t * K)), K - 1)
        return _lerp_op(ops[k], ops[k + 1], t * K - k)

    def speed(t0, t1):
        k0 = min(int(np.floor(t0 * K)), K - 1)
        k1 = min(int(np.ceil(t1 * K)), K)
        return max(rates[k0:max(k1, k0 + 1)]) + 1e-12

    return OperatorPath(f, speed, name)


@dataclass
class OracleReport:
    sf: int
    eps: float
    intervals: list[tuple[float, float, int]] = field(default_factory=list)


def _choose_eps(fn, k0: int) -> float:
    eps = 1e-2
    while eps > 1e-9:
        try:
            if count_zeros(fn, -eps, eps) == k0 and count_zeros(fn, -4 * eps, 4 * eps) == k0:
                return eps
        except AmbiguousCount:
            pass
        eps /= 4
    raise OracleError("no admissible eps: near-zero eigenvalues do not match the kernel")


def _sf_by_counting(det_at: Callable[[float], Callable], kernel0: int, kernel1: int,
                    speed: Callable[[float, float], float] | None, n0: int = 16,
                    margin: float = 0.05,
                    step_ok: Callable[[float, float], bool] | None = None) -> OracleReport:
    eps = min(_choose_eps(det_at(0.0), kernel0), _choose_eps(det_at(1.0), kernel1))
    fns: dict[float, Callable] = {}

    def fn(t):
        if t not in fns:
            fns[t] = det_at(t)
        return fns[t]

    candidates = [-0.45, -0.62, -0.81, -1.03, -1.27, -1.55, -1.86, -2.2, -2.6]

    def gap_ok(t, a, half):
        try:
            return count_zeros(fn(t), a - half, a + half) == 0
        except AmbiguousCount:
            return False

    located: dict[tuple[float, float], list[float]] = {}

    def near(t, a):
        if (t, a) not in located:
            f = fn(t)
            lo, hi = _safe_window(f, a - TRACK_WINDOW, a + TRACK_WINDOW)
            located[t, a] = [lam for lam, m in _locate(f, lo, hi, 1e-2) for _ in range(m)]
        return located[t, a]

    def tracked(t0, t1, a):
        # without a speed bound: eigenvalues near the cut must visibly stay on their side
        try:
            e0, e1 = near(t0, a), near(t1, a)
        except (OracleError, AmbiguousCount):
            return False
        inner = [(x, e1) for x in e0 if abs(x - a) < TRACK_WINDOW / 2]
        inner += [(y, e0) for y in e1 if abs(y - a) < TRACK_WINDOW / 2]
        if not inner:
            return True
        if any(not other for _, other in inner):
            return False
        move = max(min(abs(x - y) for y in other) for x, other in inner)
        return move < min(TRACK_WINDOW / 4, 0.5 * min(abs(x - a) for x, _ in inner))

    report = OracleReport(0, eps)
    stack = [(i / n0, (i + 1) / n0) for i in reversed(range(n0))]
    while stack:
        t0, t1 = stack.pop()
        half = speed(t0, t1) * (t1 - t0) + 1e-9 if speed else margin
        checks = [t0] if speed else [t0, 0.5 * (t0 + t1), t1]
        a = None
        if half < 0.2:
            for cand in candidates:
                if all(gap_ok(t, cand, half) for t in checks):
                    a = cand
                    break
        coarse = not speed and (t1 - t0 > 1 / 32 or (step_ok is not None and not step_ok(t0, t1)))
        if a is None or coarse or (not speed and not tracked(t0, t1, a)):
            if t1 - t0 < 1e-6:
                raise OracleError(f"no spectral gap near t={t0}")
            tm = 0.5 * (t0 + t1)
            stack += [(tm, t1), (t0, tm)]
            continue
        try:
            c = count_zeros(fn(t0), a, eps) - count_zeros(fn(t1), a, eps)
        except AmbiguousCount:
            tm = 0.5 * (t0 + t1) + 1e-3 * (t1 - t0)
            stack += [(tm, t1), (t0, tm)]
            continue
        report.intervals.append((t0, t1, c))
        report.sf += c
    return report


def sf_oracle_closed(path: OperatorPath, report: bool = False):
    """SF of D(t) on the circle by eigenvalue counting."""
    res = _sf_by_counting(lambda t: _closed_det(path(t)), kernel_dim_closed(path(0.0)),
                          kernel_dim_closed(path(1.0)), path.speed)
    return res if report else res.sf


def sf_oracle_boundary(path: OperatorPath, bpath: Callable[[float], Lagrangian], side: str = "X",
                       report: bool = False):
    """SF of (D(t) on the arc, B(t)) by eigenvalue counting; step control is heuristic."""
    def step_ok(t0, t1):
        # fast-moving boundary conditions drive fast eigenvalues: cap their motion per step
        return frame_gap(bpath(t0).frame, bpath(t1).frame) <= BOUNDARY_STEP

    res = _sf_by_counting(lambda t: _boundary_det(path(t), bpath(t), side),
                          kernel_dim_boundary(path(0.0), bpath(0.0), side),
                          kernel_dim_boundary(path(1.0), bpath(1.0), side), None, step_ok=step_ok)
    return res if report else res.sf


def eigencurves(path: OperatorPath, ts: Sequence[float], window: tuple[float, float]):
    """Rows (t, branch_id, lambda) with branches numbered by order within the window."""
    rows = []
    for t in ts:
        k = 0
        for lam, mult in eigenvalues_closed(path(t), window, resolution=1e-7):
            for _ in range(mult):
                rows.append((float(t), k, lam))
                k += 1
    return rows
