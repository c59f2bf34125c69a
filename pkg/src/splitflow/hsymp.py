"""Hermitian symplectic linear algebra on finite-dimensional complex spaces.

A space is C^{2n} with a unitary complex structure J (J^2 = -1) and the form
omega(x, y) = <x, J y>.  Subspaces are carried as orthonormal frames (columns);
two frames describe the same subspace when their gap distance is below
``TOL_RANK``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.linalg import expm

TOL_ALG = 1e-10
TOL_RANK = 1e-8
TOL_GAP = 1e-6


class SymplecticError(ValueError):
    """Raised when an object violates a symplectic structural constraint."""


class ResonanceError(SymplecticError):
    """Raised when a Lagrangian meets P^+_nu, i.e. nu is below the nonresonance range."""


def standard_J(n: int) -> np.ndarray:
    """The block complex structure [[0, -I], [I, 0]] on C^{2n}."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, -eye], [eye, zero]]).astype(complex)


def orth(vectors: np.ndarray, tol: float = TOL_RANK) -> np.ndarray:
    """Orthonormal basis of the column span, rank decided by relative singular values."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=complex))
    if vectors.shape[1] == 0:
        return np.zeros((vectors.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(vectors, full_matrices=False)
    scale = max(1.0, s[0]) if s.size else 1.0
    rank = int(np.sum(s > tol * scale))
    return u[:, :rank]


def null_space(matrix: np.ndarray, tol: float = TOL_RANK) -> np.ndarray:
    matrix = np.atleast_2d(matrix)
    if matrix.shape[0] == 0:
        return np.eye(matrix.shape[1], dtype=complex)
    _, s, vh = np.linalg.svd(matrix, full_matrices=True)
    scale = max(1.0, s[0]) if s.size else 1.0
    rank = int(np.sum(s > tol * scale))
    return vh[rank:].conj().T


def intersect_frames(a: np.ndarray, b: np.ndarray, tol: float = TOL_RANK) -> np.ndarray:
    """Orthonormal frame of span(a) ∩ span(b) for orthonormal frames a, b."""
    if a.shape[1] == 0 or b.shape[1] == 0:
        return np.zeros((a.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(a.conj().T @ b, full_matrices=False)
    k = int(np.sum(s > 1.0 - tol))
    return orth(a @ u[:, :k])


def projector(frame: np.ndarray) -> np.ndarray:
    return frame @ frame.conj().T


def frame_gap(a: np.ndarray, b: np.ndarray) -> float:
    """Operator norm of the difference of the orthogonal projections."""
    if a.shape[1] != b.shape[1]:
        return 1.0
    d = projector(a) - projector(b)
    return float(np.linalg.norm(d, 2)) if d.size else 0.0


@dataclass(frozen=True, eq=False)
class HermitianSymplecticSpace:
    J: np.ndarray

    @property
    def dim(self) -> int:
        return self.J.shape[0]

    @property
    def n(self) -> int:
        return self.dim // 2

    def omega(self, x: np.ndarray, y: np.ndarray) -> complex:
        return complex(np.vdot(x, self.J @ y))

    @cached_property
    def kahler(self) -> tuple[np.ndarray, np.ndarray]:
        """Orthonormal bases (Q_plus, Q_minus) of the +i and -i eigenspaces of J."""
        w, v = np.linalg.eigh(1j * self.J)
        # J v = i v  <=>  (iJ) v = -v
        return v[:, w < 0], v[:, w > 0]

    def graph_unitary(self, frame: np.ndarray) -> np.ndarray:
        """Unitary U: E_+ -> E_- whose graph is the Lagrangian spanned by ``frame``."""
        qp, qm = self.kahler
        return (qm.conj().T @ frame) @ np.linalg.inv(qp.conj().T @ frame)

    def from_unitary(self, u: np.ndarray) -> "Lagrangian":
        qp, qm = self.kahler
        return Lagrangian((qp + qm @ u) / np.sqrt(2.0), self)

    def rotation(self, t: float) -> np.ndarray:
        return expm(t * self.J)


def make_space(J: np.ndarray, tol: float = TOL_ALG) -> HermitianSymplecticSpace:
    J = np.asarray(J, dtype=complex)
    if J.ndim != 2 or J.shape[0] != J.shape[1] or J.shape[0] % 2:
        raise SymplecticError("J must be a square matrix of even size")
    eye = np.eye(J.shape[0])
    if np.linalg.norm(J @ J + eye) > tol * J.shape[0]:
        raise SymplecticError("J^2 != -Id")
    if np.linalg.norm(J.conj().T @ J - eye) > tol * J.shape[0]:
        raise SymplecticError("J is not unitary")
    if abs(np.trace(-1j * J)) > 0.5:
        raise SymplecticError("+i and -i eigenspaces of J have unequal dimension")
    return HermitianSymplecticSpace(J)


def is_isotropic(space: HermitianSymplecticSpace, frame: np.ndarray, tol: float = TOL_ALG) -> bool:
    frame = orth(frame)
    return bool(np.linalg.norm(frame.conj().T @ space.J @ frame) <= tol * max(1, frame.shape[1]))


def is_lagrangian(space: HermitianSymplecticSpace, vectors: np.ndarray, tol: float = TOL_ALG) -> bool:
    frame = orth(vectors)
    if frame.shape[1] != space.n:
        return False
    if not is_isotropic(space, frame, tol):
        return False
    full = np.hstack([frame, space.J @ frame])
    return np.linalg.matrix_rank(full, tol=TOL_RANK) == space.dim


@dataclass(frozen=True, eq=False)
class Lagrangian:
    frame: np.ndarray
    space: HermitianSymplecticSpace = field(repr=False)

    def __post_init__(self):
        f = np.asarray(self.frame, dtype=complex)
        q, _ = np.linalg.qr(f)
        object.__setattr__(self, "frame", q)

    @cached_property
    def projector(self) -> np.ndarray:
        return projector(self.frame)

    @cached_property
    def unitary(self) -> np.ndarray:
        return self.space.graph_unitary(self.frame)

    def validate(self, tol: float = TOL_ALG) -> "Lagrangian":
        if not is_lagrangian(self.space, self.frame, tol):
            raise SymplecticError("subspace is not Lagrangian")
        return self


def lagrangian(space: HermitianSymplecticSpace, vectors: np.ndarray, tol: float = 1e-8) -> Lagrangian:
    """Build and validate a Lagrangian from spanning vectors."""
    frame = orth(vectors)
    if frame.shape[1] != space.n:
        raise SymplecticError(f"span has dimension {frame.shape[1]}, expected {space.n}")
    return Lagrangian(frame, space).validate(tol)


def intersection_dim(l1: Lagrangian, l2: Lagrangian, tol: float = TOL_RANK) -> int:
    s = np.linalg.svd(l1.frame.conj().T @ l2.frame, compute_uv=False)
    return int(np.sum(s > 1.0 - tol))


def min_angle(l1: Lagrangian, l2: Lagrangian) -> float:
    """Smallest principal angle; zero iff the Lagrangians meet."""
    s = np.linalg.svd(l1.frame.conj().T @ l2.frame, compute_uv=False)
    return float(np.arccos(np.clip(s.max(), -1.0, 1.0))) if s.size else np.pi / 2


def gap_distance(l1: Lagrangian, l2: Lagrangian) -> float:
    return frame_gap(l1.frame, l2.frame)


def same_subspace(l1: Lagrangian, l2: Lagrangian, tol: float = TOL_RANK) -> bool:
    return gap_distance(l1, l2) < tol


def rotate(L: Lagrangian, t: float) -> Lagrangian:
    return Lagrangian(L.space.rotation(t) @ L.frame, L.space)


def direct_sum_lagrangian(space: HermitianSymplecticSpace, parts: Sequence[np.ndarray],
                          tol: float = 1e-8) -> Lagrangian:
    """Concatenate frames of mutually orthogonal pieces and validate the result."""
    frames = [np.asarray(p, dtype=complex) for p in parts if np.asarray(p).shape[1] > 0]
    if not frames:
        raise SymplecticError("empty direct sum")
    return lagrangian(space, np.hstack(frames), tol)


def eigen_clusters(S: np.ndarray, tol: float = TOL_ALG) -> list[tuple[float, np.ndarray]]:
    """Eigenvalue clusters of a Hermitian matrix as (mean eigenvalue, orthonormal frame)."""
    w, v = np.linalg.eigh(S)
    width = tol * max(1.0, float(np.abs(w).max()) if w.size else 1.0)
    clusters: list[list[int]] = []
    for i in range(len(w)):
        if clusters and w[i] - w[clusters[-1][-1]] <= width:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return [(float(np.mean(w[idx])), v[:, idx]) for idx in clusters]


@dataclass(frozen=True, eq=False)
class SpectralSplit:
    """The decomposition P^-_nu ⊕ H_nu ⊕ P^+_nu of a J-anticommuting Hermitian S."""
    space: HermitianSymplecticSpace
    S: np.ndarray
    nu: float
    clusters: list[tuple[float, np.ndarray]]

    def _stack(self, pred) -> np.ndarray:
        frames = [f for lam, f in self.clusters if pred(lam)]
        if not frames:
            return np.zeros((self.space.dim, 0), dtype=complex)
        return np.hstack(frames)

    @cached_property
    def Pminus(self) -> np.ndarray:
        return self._stack(lambda lam: lam < -self.nu - self._zero)

    @cached_property
    def Pplus(self) -> np.ndarray:
        return self._stack(lambda lam: lam > self.nu + self._zero)

    @cached_property
    def Hnu(self) -> np.ndarray:
        return self._stack(lambda lam: abs(lam) <= self.nu + self._zero)

    @property
    def _zero(self) -> float:
        return TOL_ALG * max(1.0, float(np.linalg.norm(self.S, 2)))

    @cached_property
    def kernel(self) -> np.ndarray:
        return self._stack(lambda lam: abs(lam) <= self._zero)

    @cached_property
    def reduced_space(self) -> HermitianSymplecticSpace:
        h = self.Hnu
        return HermitianSymplecticSpace(h.conj().T @ self.space.J @ h)

    def to_reduced(self, frame: np.ndarray) -> np.ndarray:
        return self.Hnu.conj().T @ frame

    def from_reduced(self, coords: np.ndarray) -> np.ndarray:
        return self.Hnu @ coords

    def positive_levels(self) -> list[float]:
        return [lam for lam, _ in self.clusters if lam > self._zero]

    def eigenspace(self, lam: float) -> np.ndarray:
        for mu, f in self.clusters:
            if abs(mu - lam) <= 10 * self._zero:
                return f
        return np.zeros((self.space.dim, 0), dtype=complex)

    def stabilize_minus(self, coords: np.ndarray) -> Lagrangian:
        """P^-_nu ⊕ L for L given in reduced coordinates."""
        return direct_sum_lagrangian(self.space, [self.Pminus, self.from_reduced(coords)])

    def stabilize_plus(self, coords: np.ndarray) -> Lagrangian:
        """L ⊕ P^+_nu for L given in reduced coordinates."""
        return direct_sum_lagrangian(self.space, [self.from_reduced(coords), self.Pplus])


def check_anticommuting(space: HermitianSymplecticSpace, S: np.ndarray, tol: float = 1e-9) -> None:
    S = np.asarray(S)
    scale = max(1.0, float(np.linalg.norm(S)))
    if np.linalg.norm(S - S.conj().T) > tol * scale:
        raise SymplecticError("S is not Hermitian")
    if np.linalg.norm(S @ space.J + space.J @ S) > tol * scale:
        raise SymplecticError("S does not anticommute with J")


def spectral_split(space: HermitianSymplecticSpace, S: np.ndarray, nu: float,
                   tol_gap: float = TOL_GAP) -> SpectralSplit:
    """Split by |eigenvalue| <= nu.  nu must sit in a spectral gap (nu = 0 may meet ker S)."""
    S = np.asarray(S, dtype=complex)
    check_anticommuting(space, S)
    if nu < 0:
        raise SymplecticError("nu must be nonnegative")
    clusters = eigen_clusters(S)
    zero = TOL_ALG * max(1.0, float(np.linalg.norm(S, 2)))
    for lam, _ in clusters:
        if abs(lam) <= zero:
            continue
        if abs(abs(lam) - nu) < tol_gap:
            raise SymplecticError(f"nu={nu} is within {tol_gap} of the eigenvalue {lam}")
    return SpectralSplit(space, S, float(nu), clusters)


def symplectic_reduce(L: Lagrangian, split: SpectralSplit, tol: float = TOL_RANK) -> np.ndarray:
    """proj_H(L ∩ (H ⊕ P^+)) as a frame in the reduced coordinates of H_nu."""
    if split.Pplus.shape[1] and intersect_frames(L.frame, split.Pplus, tol).shape[1]:
        raise ResonanceError("L meets P^+_nu: nu is below the nonresonance level")
    upper = np.hstack([split.Hnu, split.Pplus])
    meet = intersect_frames(L.frame, upper, tol)
    coords = orth(split.to_reduced(meet), tol)
    if 2 * coords.shape[1] != split.Hnu.shape[1]:
        raise SymplecticError("reduction is not half-dimensional")
    return coords


def flow_frame(frame: np.ndarray, S: np.ndarray, r: float, tol: float = TOL_RANK) -> np.ndarray:
    """Orthonormal frame of e^{-rS} span(frame), stable for large r (r = inf allowed).

    Columns are sorted into growth groups (most negative eigenvalue of S first) by
    a column echelon form in the eigenbasis of S; each group is rescaled by its own
    leading factor so nothing overflows.
    """
    frame = np.asarray(frame, dtype=complex)
    if frame.shape[0] == 0 or frame.shape[1] == 0:
        return frame
    clusters = eigen_clusters(np.asarray(S, dtype=complex))
    levels = [lam for lam, _ in clusters]
    basis = np.hstack([f for _, f in clusters])
    sizes = [f.shape[1] for _, f in clusters]
    starts = np.cumsum([0] + sizes)
    y = basis.conj().T @ orth(frame, tol)
    out = []
    for g, lam in enumerate(levels):
        if y.shape[1] == 0:
            break
        rows = slice(starts[g], starts[g + 1])
        _, sig, vh = np.linalg.svd(y[rows], full_matrices=True)
        k = int(np.sum(sig > tol * max(1.0, sig.max() if sig.size else 1.0)))
        if k == 0:
            continue
        v = vh.conj().T
        piv, y = y @ v[:, :k], y @ v[:, k:]
        piv[: starts[g]] = 0.0
        scale = np.ones(basis.shape[0])
        for h in range(g + 1, len(levels)):
            d = levels[h] - lam
            scale[starts[h]:starts[h + 1]] = 0.0 if np.isinf(r) else np.exp(-r * d)
        out.append(scale[:, None] * piv)
    if y.shape[1]:
        raise SymplecticError("frame lost rank during stretching")
    q, _ = np.linalg.qr(basis @ np.hstack(out))
    return q


def flow_lagrangian(L: Lagrangian, S: np.ndarray, r: float) -> Lagrangian:
    return Lagrangian(flow_frame(L.frame, S, r), L.space)
