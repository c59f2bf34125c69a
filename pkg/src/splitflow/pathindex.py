"""Maslov index of Lagrangian pairs and spectral flow of Hermitian paths.

Conventions
-----------
Maslov index: mu(L1, L2) := mu(e^{eps J} L1, L2) for small eps > 0, counted so that
mu(L, e^{tJ} M), t in [-eps, eps], equals dim(L ∩ M) for constant L, M.

Each Lagrangian is the graph of a unitary U: E_+ -> E_- (the +-i eigenspaces of
J).  The pair (L, M) meets exactly where W = U_M^* U_L has eigenvalue 1, and
e^{sJ} L multiplies W by e^{-2is}.  The index is the net number of
counterclockwise passages of eigenvalues of e^{-2i eps} W through 1, read off
from the unwrapped phase of det W.

Spectral flow: SF(H) := SF(H - eps), eps below the smallest positive eigenvalue
of H(0) and H(1); the count is up-crossings of eps minus down-crossings.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .hsymp import (TOL_RANK, HermitianSymplecticSpace, Lagrangian, SpectralSplit,
                    SymplecticError, gap_distance)

STEP_CAP = 0.2
EPS_CAP = 1e-9
EPS_START = 1e-3
PHASE_ZERO = 1e-7
MIN_WIDTH = 1e-10
LOCALIZE_WIDTH = 1e-6


class PathError(ValueError):
    """Discontinuous input path or mismatched concatenation."""


class ConventionError(ValueError):
    """No admissible epsilon for the endpoint convention."""


@dataclass
class CrossingLog:
    records: list[tuple[float, int, int]] = field(default_factory=list)

    @property
    def total(self) -> int:
        return sum(sign * mult for _, sign, mult in self.records)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t_star", "sign", "multiplicity"])
        for t, s, m in self.records:
            w.writerow([f"{t:.17g}", s, m])
        return buf.getvalue()


class LagrangianPath:
    """A continuous path t -> Lagrangian on [0, 1], evaluated lazily and cached."""

    def __init__(self, func: Callable[[float], Lagrangian], space: HermitianSymplecticSpace,
                 name: str = ""):
        self._func = func
        self.space = space
        self.name = name
        self._cache: dict[float, Lagrangian] = {}

    def __call__(self, t: float) -> Lagrangian:
        t = float(t)
        hit = self._cache.get(t)
        if hit is None:
            hit = self._func(t)
            if hit.space is not self.space and hit.frame.shape[0] != self.space.dim:
                raise PathError("path leaves its parent space")
            self._cache[t] = hit
        return hit

    @classmethod
    def constant(cls, L: Lagrangian, name: str = "") -> "LagrangianPath":
        return cls(lambda t: L, L.space, name)

    def reverse(self) -> "LagrangianPath":
        return LagrangianPath(lambda t: self(1.0 - t), self.space, self.name + "^-1")

    def reparam(self, phi: Callable[[float], float]) -> "LagrangianPath":
        return LagrangianPath(lambda t: self(phi(t)), self.space, self.name)

    def max_step(self, ts: Sequence[float]) -> float:
        return max((gap_distance(self(a), self(b)) for a, b in zip(ts[:-1], ts[1:])), default=0.0)


def concatenate(paths: Sequence[LagrangianPath], tol: float = 1e-6) -> LagrangianPath:
    """Composite path, piece k running over [k/N, (k+1)/N]."""
    paths = list(paths)
    if not paths:
        raise PathError("nothing to concatenate")
    for a, b in zip(paths[:-1], paths[1:]):
        d = gap_distance(a(1.0), b(0.0))
        if d > tol:
            raise PathError(f"endpoint mismatch {d:.3g} between {a.name!r} and {b.name!r}")
    n = len(paths)

    def f(t: float) -> Lagrangian:
        k = min(int(np.floor(t * n)), n - 1)
        return paths[k](t * n - k)

    return LagrangianPath(f, paths[0].space, "*".join(p.name for p in paths))


def reverse(path: LagrangianPath) -> LagrangianPath:
    return path.reverse()


def _relative_unitary(L: Lagrangian, M: Lagrangian) -> np.ndarray:
    return M.unitary.conj().T @ L.unitary


def _phases(w: np.ndarray) -> np.ndarray:
    return np.angle(np.linalg.eigvals(w))


def choose_maslov_eps(w0: np.ndarray, w1: np.ndarray, zero: float = PHASE_ZERO) -> float:
    """Largest convenient eps so that e^{-2is} W(i) avoids 1 for 0 < s <= eps."""
    phases = np.concatenate([_phases(w0), _phases(w1)])
    positive = phases[phases > zero]
    eps = EPS_START
    if positive.size:
        eps = min(eps, 0.25 * float(positive.min()))
    while eps >= EPS_CAP:
        ok = True
        for w in (w0, w1):
            shifted = np.angle(np.exp(-2j * eps) * np.linalg.eigvals(w))
            near = np.abs(shifted) < 0.5 * eps
            if near.any():
                ok = False
        if ok:
            return eps
        eps /= 2
    raise ConventionError("no admissible epsilon: degenerate endpoint family")


class _Sampler:
    """Adaptive grid on [0, 1] for a matrix-valued function with a step test."""

    def __init__(self, value: Callable[[float], object], too_far: Callable[[object, object], bool],
                 n0: int = 17, min_width: float = MIN_WIDTH):
        self.value = value
        self.too_far = too_far
        self.ts = list(np.linspace(0.0, 1.0, n0))
        self.vals = [value(t) for t in self.ts]
        self.min_width = min_width

    def refine(self) -> None:
        i = 0
        while i < len(self.ts) - 1:
            if self.too_far(self.vals[i], self.vals[i + 1]):
                a, b = self.ts[i], self.ts[i + 1]
                if b - a < self.min_width:
                    raise PathError(f"refinement does not converge near t={a:.12g}: discontinuous path?")
                mid = 0.5 * (a + b)
                self.ts.insert(i + 1, mid)
                self.vals.insert(i + 1, self.value(mid))
            else:
                i += 1


def _wrap_count(v0: np.ndarray, v1: np.ndarray) -> float:
    """Counterclockwise passages through 1 between two nearby unitaries."""
    e0, e1 = np.linalg.eigvals(v0), np.linalg.eigvals(v1)
    d = np.angle(np.prod(e1) / np.prod(e0))
    th0 = np.mod(np.angle(e0), 2 * np.pi).sum()
    th1 = np.mod(np.angle(e1), 2 * np.pi).sum()
    return (d - (th1 - th0)) / (2 * np.pi)


def maslov_index(L: LagrangianPath, M: LagrangianPath, *, eps: float | None = None,
                 step_cap: float = STEP_CAP, return_log: bool = False, localize: bool = True):
    """Maslov index mu(L, M) with the e^{eps J} endpoint convention.

    Returns the integer, or (integer, CrossingLog) when ``return_log``.
    """
    if L.space.dim != M.space.dim:
        raise SymplecticError("paths live in different spaces")
    m = L.space.n
    kappa = min(0.5, 1.0 / m)

    def value(t):
        a, b = L(t), M(t)
        return a, b, _relative_unitary(a, b)

    def too_far(x, y):
        if np.linalg.norm(x[2] - y[2], 2) > kappa:
            return True
        return gap_distance(x[0], y[0]) > step_cap or gap_distance(x[1], y[1]) > step_cap

    sampler = _Sampler(value, too_far)
    sampler.refine()
    ws = [v[2] for v in sampler.vals]
    if eps is None:
        eps = choose_maslov_eps(ws[0], ws[-1])
    rot = np.exp(-2j * eps)
    vs = [rot * w for w in ws]
    counts = [_wrap_count(a, b) for a, b in zip(vs[:-1], vs[1:])]
    total = sum(counts)
    mu = int(round(total))
    if abs(total - mu) > 1e-6:
        raise PathError(f"non-integer crossing count {total}")
    if not return_log:
        return mu
    log = CrossingLog()
    for (a, b), c in zip(zip(sampler.ts[:-1], sampler.ts[1:]), counts):
        c = int(round(c))
        if c == 0:
            continue
        if localize:
            log.records.extend(_localize(lambda t: rot * value(t)[2], a, b, c))
        else:
            log.records.append((0.5 * (a + b), int(np.sign(c)), abs(c)))
    return mu, log


def _localize(vfun, a: float, b: float, count: int, depth: int = 40):
    va, vb = vfun(a), vfun(b)
    stack = [(a, b, va, vb, count, 0)]
    out = []
    while stack:
        a, b, va, vb, c, d = stack.pop()
        if b - a < LOCALIZE_WIDTH or d >= depth:
            out.append((0.5 * (a + b), int(np.sign(c)), abs(c)))
            continue
        mid = 0.5 * (a + b)
        vm = vfun(mid)
        c1 = int(round(_wrap_count(va, vm)))
        c2 = c - c1
        if c1:
            stack.append((a, mid, va, vm, c1, d + 1))
        if c2:
            stack.append((mid, b, vm, vb, c2, d + 1))
    return sorted(out)


def stabilized_maslov(L: LagrangianPath, M: LagrangianPath, split: SpectralSplit, **kw) -> int:
    """mu(P^-_nu ⊕ L, M ⊕ P^+_nu) for paths L, M of Lagrangians in the reduced space H_nu."""
    space = split.space
    Ls = LagrangianPath(lambda t: split.stabilize_minus(L(t).frame), space, "P-+" + L.name)
    Ms = LagrangianPath(lambda t: split.stabilize_plus(M(t).frame), space, M.name + "+P+")
    return maslov_index(Ls, Ms, **kw)


def convert_convention(mu: int, e: int, sigma0: int, sigma1: int, dim0: int, dim1: int) -> int:
    """mu' = e*mu + sigma0*dim(L(0)∩M(0)) + sigma1*dim(L(1)∩M(1))."""
    if e not in (1, -1) or sigma0 not in (-1, 0, 1) or sigma1 not in (-1, 0, 1):
        raise ValueError("e must be +-1 and sigma_i in {-1, 0, 1}")
    return e * mu + sigma0 * dim0 + sigma1 * dim1


# --- spectral flow of finite Hermitian paths -------------------------------------------

class HermitianPath:
    def __init__(self, func: Callable[[float], np.ndarray], name: str = ""):
        self._func = func
        self.name = name

    def __call__(self, t: float) -> np.ndarray:
        h = np.asarray(self._func(float(t)), dtype=complex)
        if np.linalg.norm(h - h.conj().T) > 1e-10 * max(1.0, np.linalg.norm(h)):
            raise ValueError("path sample is not Hermitian")
        return h


def choose_sf_eps(*endpoint_spectra: np.ndarray, zero: float = 1e-9) -> float:
    pos = np.concatenate([w[w > zero] for w in endpoint_spectra])
    if pos.size == 0:
        return EPS_START
    return min(EPS_START, 0.5 * float(pos.min()))


def spectral_flow(H: HermitianPath, *, return_log: bool = False, return_curves: bool = False,
                  step: float = 0.05):
    """Net number of eigenvalues crossing eps upward along H(t)."""
    def value(t):
        return np.linalg.eigvalsh(H(t))

    def too_far(x, y):
        return np.abs(x - y).max() > step

    sampler = _Sampler(value, too_far, n0=33)
    sampler.refine()
    spectra = sampler.vals
    eps = choose_sf_eps(spectra[0], spectra[-1])
    below = [int(np.sum(w < eps)) for w in spectra]
    sf = below[0] - below[-1]
    if not (return_log or return_curves):
        return sf
    out = [sf]
    if return_log:
        log = CrossingLog()
        for (a, b), na, nb in zip(zip(sampler.ts[:-1], sampler.ts[1:]), below[:-1], below[1:]):
            c = na - nb
            if c:
                log.records.extend(_localize_sf(H, eps, a, b, c))
        out.append(log)
    if return_curves:
        out.append((np.array(sampler.ts), np.array(spectra)))
    return tuple(out)


def _localize_sf(H, eps, a, b, c):
    def below(t):
        return int(np.sum(np.linalg.eigvalsh(H(t)) < eps))
    out = []
    stack = [(a, b, below(a), below(b))]
    while stack:
        a, b, na, nb = stack.pop()
        c = na - nb
        if c == 0:
            continue
        if b - a < LOCALIZE_WIDTH:
            out.append((0.5 * (a + b), int(np.sign(c)), abs(c)))
            continue
        mid = 0.5 * (a + b)
        nm = below(mid)
        stack.append((a, mid, na, nm))
        stack.append((mid, b, nm, nb))
    return sorted(out)
