"""Adiabatic limits of stretched Cauchy data.

Everything here is phrased for the X side: Λ^r = e^{-rS}Λ grows along P^-(S) and
lim Λ^r = P^-_nu0 ⊕ L_X.  The Y side is the same computation with S replaced by -S.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .hsymp import (TOL_RANK, Lagrangian, SpectralSplit, SymplecticError, direct_sum_lagrangian,
                    eigen_clusters, flow_frame, frame_gap, intersect_frames, lagrangian, orth,
                    spectral_split)
from .pathindex import LagrangianPath

TOL_CONV = 1e-8


def _meets(frame: np.ndarray, sub: np.ndarray, tol: float = TOL_RANK) -> bool:
    return sub.shape[1] > 0 and intersect_frames(frame, sub, tol).shape[1] > 0


def _above(S: np.ndarray, level: float) -> np.ndarray:
    """Frame of the eigenspaces of S with eigenvalue > level."""
    frames = [f for lam, f in eigen_clusters(S) if lam > level]
    return np.hstack(frames) if frames else np.zeros((S.shape[0], 0), dtype=complex)


def admissible_levels(L: Lagrangian, S: np.ndarray) -> list[float]:
    """Gap-midpoint values nu >= 0 in the nonresonance range, smallest first."""
    zero = 1e-10 * max(1.0, float(np.linalg.norm(S, 2)))
    pos = [lam for lam, _ in eigen_clusters(S) if lam > zero]
    out = []
    if not _meets(L.frame, _above(S, zero)):
        out.append(0.0)
    for k, lam in enumerate(pos):
        if _meets(L.frame, _above(S, lam + zero)):
            continue
        nxt = pos[k + 1] if k + 1 < len(pos) else lam + max(1.0, lam)
        out.append(0.5 * (lam + nxt))
    return out


def nonresonance_level(L: Lagrangian, S: np.ndarray) -> float:
    """Smallest admissible nu (0, or the midpoint of the gap above the level)."""
    return admissible_levels(L, S)[0]


@dataclass
class GradedAdiabaticData:
    nu0: float
    split: SpectralSplit
    levels: list[float]
    Ltilde: np.ndarray
    W: list[np.ndarray]
    V: list[np.ndarray]
    Vprime: list[np.ndarray]
    LX: np.ndarray
    adiabatic: Lagrangian

    @property
    def reduced_LX(self) -> np.ndarray:
        return self.split.to_reduced(self.LX)

    def to_json(self) -> str:
        enc = lambda a: [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(a)]
        return json.dumps({
            "nu0": self.nu0,
            "levels": self.levels,
            "dim_W": [w.shape[1] for w in self.W],
            "dim_V": [v.shape[1] for v in self.V],
            "dim_Ltilde": self.Ltilde.shape[1],
            "Ltilde": enc(self.Ltilde),
            "LX": enc(self.LX),
        })


def _peel(Z: np.ndarray, block: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Split Z into (its projection onto block, the part of Z with zero block component)."""
    if Z.shape[1] == 0 or block.shape[1] == 0:
        return np.zeros((block.shape[0], 0), dtype=complex), Z
    R = block.conj().T @ Z
    U, sig, Vh = np.linalg.svd(R, full_matrices=True)
    k = int(np.sum(sig > tol))
    W = block @ U[:, :k]
    rest = Z @ Vh[k:].conj().T
    return W, orth(rest, tol) if rest.shape[1] else rest


def graded_adiabatic_limit(L: Lagrangian, S: np.ndarray, nu0: float,
                           tol: float = TOL_RANK) -> GradedAdiabaticData:
    """Peel Λ ∩ (H ⊕ P^+) along the filtration by eigenvalues of S (lowest first)."""
    space = L.space
    split = spectral_split(space, S, nu0)
    if _meets(L.frame, split.Pplus, tol):
        raise SymplecticError(f"nu0={nu0} is below the nonresonance level")
    upper = np.hstack([split.Hnu, split.Pplus])
    Z = intersect_frames(L.frame, upper, tol)
    zero = split._zero
    inside = [(lam, f) for lam, f in split.clusters if abs(lam) <= nu0 + zero]
    pos = [lam for lam, _ in inside if lam > zero]
    neg_blocks = {round(-lam, 12): f for lam, f in inside if lam < -zero}
    W, Vp = [], []
    Ltilde = np.zeros((space.dim, 0), dtype=complex)
    for lam, block in inside:
        piece, Z = _peel(Z, block, tol)
        if lam < -zero:
            W.append(piece)
        elif lam > zero:
            Vp.append(piece)
        else:
            Ltilde = piece
    if Z.shape[1]:
        raise SymplecticError("Λ meets P^+_nu0 after peeling")
    W = W[::-1]  # W[i] sits in E_{i+1}^-
    V = []
    for i, lam in enumerate(pos):
        E = neg_blocks[round(lam, 12)]
        comp = E - W[i] @ (W[i].conj().T @ E) if W[i].shape[1] else E
        Vi = orth(comp, tol)
        JV = space.J @ Vi
        if Vi.shape[1] != Vp[i].shape[1] or (Vi.shape[1] and frame_gap(JV, Vp[i]) > 1e3 * tol):
            raise SymplecticError(f"V'_{i + 1} != J V_{i + 1}: Lagrangian dimension count violated")
        V.append(Vi)
    parts = W[::-1] + [Ltilde] + [space.J @ v for v in V]
    LX = np.hstack([p for p in parts]) if parts else np.zeros((space.dim, 0), dtype=complex)
    adiabatic = direct_sum_lagrangian(space, [split.Pminus, LX])
    return GradedAdiabaticData(nu0, split, pos, Ltilde, W, V, Vp, orth(LX), adiabatic)


def dynamical_adiabatic_limit(L: Lagrangian, S: np.ndarray, nu0: float, r_max: float = 1e4,
                              tol_conv: float = TOL_CONV) -> np.ndarray:
    """lim e^{-rS} Λ̃ in H_nu0 by doubling r until two successive doublings agree.

    Returns the limit as an ambient frame inside H_nu0.
    """
    split = spectral_split(L.space, S, nu0)
    from .hsymp import symplectic_reduce
    coords = symplectic_reduce(L, split)
    SH = split.Hnu.conj().T @ S @ split.Hnu
    r = 0.5
    prev = flow_frame(coords, SH, r)
    streak = 0
    while r < r_max:
        r *= 2
        cur = flow_frame(coords, SH, r)
        streak = streak + 1 if frame_gap(prev, cur) < tol_conv else 0
        prev = cur
        if streak >= 2:
            return split.from_reduced(cur)
    raise SymplecticError(f"dynamical adiabatic limit did not converge by r={r_max}")


def stretch_param(t: float) -> float:
    """r(t) = t/(1-t): r(0) = 0 and r -> inf as t -> 1."""
    return np.inf if t >= 1.0 else t / (1.0 - t)


def stretch_path(cauchy: Callable[[float], Lagrangian], S: np.ndarray, nu0: float | None = None,
                 r_of_t: Callable[[float], float] = stretch_param, name: str = "stretch") -> LagrangianPath:
    """t -> Λ^{r(t)} = e^{-r(t)S}Λ^0 for t < 1, the adiabatic limit at t = 1.

    ``cauchy(r)`` returns the Cauchy data space at stretch r (only r = 0 is used when
    the limit is computed algebraically).
    """
    base = cauchy(0.0)
    nu = nonresonance_level(base, S) if nu0 is None else nu0
    limit = graded_adiabatic_limit(base, S, nu).adiabatic

    def f(t):
        r = r_of_t(t)
        if np.isinf(r):
            return limit
        return Lagrangian(flow_frame(base.frame, S, r), base.space)

    return LagrangianPath(f, base.space, name)


def rotation_path_C(data: GradedAdiabaticData) -> LagrangianPath:
    """C(t) = P^-_nu0 ⊕ L̃ ⊕ (W_i ⊕ e^{-(1-t)(π/2)J} V_i), from the adiabatic limit to P^- ⊕ L̃."""
    space = data.split.space
    J = space.J
    fixed = [data.split.Pminus, data.Ltilde] + list(data.W)

    def f(t):
        th = -(1.0 - t) * np.pi / 2
        rot = [np.cos(th) * v + np.sin(th) * (J @ v) for v in data.V]
        return direct_sum_lagrangian(space, fixed + rot)

    return LagrangianPath(f, space, "C")


# --- the graph operator k_r and the Calderon projection ------------------------------

@dataclass
class GraphOperator:
    """Λ^r = {v + k v : v in span(domain)}, k: span(domain) -> span(codomain)."""
    r: float
    k: np.ndarray
    domain: np.ndarray
    codomain: np.ndarray

    def frame(self) -> np.ndarray:
        return self.domain + self.codomain @ self.k


def graph_operator_k(L0: Lagrangian, split: SpectralSplit, r: float) -> GraphOperator:
    """k_r by a direct solve, with domain M_r ⊕ P^- where M_r = e^{rS} proj_H(Λ^0 ∩ (H ⊕ P^+))."""
    from .hsymp import symplectic_reduce
    J, S = split.space.J, split.S
    Lred = split.from_reduced(symplectic_reduce(L0, split))
    SH = split.Hnu.conj().T @ S @ split.Hnu
    Mr = split.from_reduced(flow_frame(split.to_reduced(Lred), SH, -r)) if Lred.shape[1] else Lred
    dom = orth(np.hstack([Mr, split.Pminus]))
    cod = orth(np.hstack([J @ Mr, split.Pplus]))
    Fr = flow_frame(L0.frame, S, r) if r >= 0 else orth(_expm_h(-r, S) @ L0.frame)
    a = dom.conj().T @ Fr
    b = cod.conj().T @ Fr
    if np.linalg.svd(a, compute_uv=False).min() < TOL_RANK:
        raise SymplecticError("Λ^r is not transverse to J M_r ⊕ P^+: transversality lemma violated")
    return GraphOperator(r, b @ np.linalg.inv(a), dom, cod)


def _expm_h(t: float, S: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(S)
    return (v * np.exp(t * w)) @ v.conj().T


def propagate_k(g: GraphOperator, split: SpectralSplit, r: float) -> GraphOperator:
    """k_r = e^{-(r-a)S_+} k_a e^{(r-a)S_-} from anchor a = g.r; requires H_nu = 0."""
    if split.Hnu.shape[1]:
        raise SymplecticError("propagation formula needs H_nu = 0")
    d = r - g.r
    S = split.S
    Sm = split.Pminus.conj().T @ S @ split.Pminus
    Sp = split.Pplus.conj().T @ S @ split.Pplus
    k_eig = k_matrix(g, split)
    k_new = _expm_h(-d, Sp) @ k_eig @ _expm_h(d, Sm)
    return GraphOperator(r, k_new, split.Pminus, split.Pplus)


def projection_from_graph(g: GraphOperator) -> np.ndarray:
    """Orthogonal projection onto the graph, via the (Id + k*k)^{-1} block formula."""
    k = g.k
    inv = np.linalg.inv(np.eye(k.shape[1]) + k.conj().T @ k)
    top = np.hstack([inv, inv @ k.conj().T])
    bot = np.hstack([k @ inv, k @ inv @ k.conj().T])
    blocks = np.vstack([top, bot])
    basis = np.hstack([g.domain, g.codomain])
    return basis @ blocks @ basis.conj().T


def projection_from_Q(g: GraphOperator) -> np.ndarray:
    """Same projection from the skew projector Q = [[1, 0], [k, 0]]."""
    m1, m2 = g.domain.shape[1], g.codomain.shape[1]
    Q = np.zeros((m1 + m2, m1 + m2), dtype=complex)
    Q[:m1, :m1] = np.eye(m1)
    Q[m1:, :m1] = g.k
    I = np.eye(m1 + m2)
    P = Q @ Q.conj().T @ np.linalg.inv(Q @ Q.conj().T + (I - Q.conj().T) @ (I - Q))
    basis = np.hstack([g.domain, g.codomain])
    return basis @ P @ basis.conj().T


def k_matrix(g: GraphOperator, split: SpectralSplit) -> np.ndarray:
    """k_r written in the fixed bases P^-_nu -> P^+_nu (only meaningful when H_nu = 0)."""
    A = split.Pminus.conj().T @ g.domain
    C = split.Pplus.conj().T @ g.codomain
    return C @ g.k @ np.linalg.inv(A)
