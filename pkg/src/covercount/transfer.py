"""Three-parameter transfer operators: leading eigenvalues, the critical
exponent, the pressure surface with its Hessian data, and spectral-radius
scans on the critical line.

Toy shifts use their exact k x k weight matrices.  Schottky codings in the
half-plane model are discretized by Chebyshev collocation on the real trace
of each disk; the branch maps send every admissible interval strictly inside
the target interval, so polynomial interpolation converges geometrically and
the leading eigenvalue is certified by node doubling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from . import schottky as sk
from .errors import (BracketFailed, DiscretizationUnstable, HessianNotPD,
                     HolonomyUnavailable, NotConverged, ValidationError)
from .hyperbolic import Model
from .shift import MarkovShift

RESIDUAL_TOL = 1e-8
DOUBLING_TOL = 1e-8


class CollocationGrid:
    """Chebyshev nodes (first kind) on each disk's real interval, with the
    branch images, log-derivatives and interpolation blocks precomputed."""

    def __init__(self, group, nodes_per_disk: int):
        if nodes_per_disk < 8:
            raise ValidationError("collocation needs nodes_per_disk >= 8")
        if group.model != Model.H2:
            raise ValidationError("collocation is implemented for the H2 model only")
        self.group = group
        self.nodes_per_disk = nodes_per_disk
        n = group.n_symbols
        N = nodes_per_disk
        k = np.arange(N)
        ref = np.cos(np.pi * (2 * k + 1) / (2 * N))
        self.bary_w = (-1.0) ** k * np.sin(np.pi * (2 * k + 1) / (2 * N))
        self.nodes = []
        for a in range(n):
            dk = group.disks[a]
            self.nodes.append(dk.center.real + dk.radius * ref)
        self._logd = {}
        self._interp = {}
        for a in range(n):
            ma = group.symbol_matrix(a)
            ca, da = ma[2], ma[3]
            for b in range(n):
                if b == sk.inverse_index(a):
                    continue
                x = self.nodes[b]
                den = ca * x + da
                self._logd[(a, b)] = -2.0 * np.log(np.abs(den))
                y = (ma[0] * x + ma[1]) / den
                self._interp[(a, b)] = self.interp_values(a, y.real)

    def interp_values(self, a: int, pts: np.ndarray) -> np.ndarray:
        """Barycentric Lagrange basis values on disk a's nodes at pts."""
        pts = np.atleast_1d(np.asarray(pts, dtype=float))
        diff = pts[:, None] - self.nodes[a][None, :]
        hit = np.isclose(diff, 0.0, atol=1e-300)
        with np.errstate(divide="ignore", invalid="ignore"):
            L = self.bary_w[None, :] / diff
        L[~np.isfinite(L)] = 0.0
        rows_hit = hit.any(axis=1)
        L[rows_hit] = hit[rows_hit].astype(float)
        return L / L.sum(axis=1, keepdims=True)

    def log_deriv(self, a: int, b: int) -> np.ndarray:
        return self._logd[(a, b)]

    def interp_block(self, a: int, b: int) -> np.ndarray:
        return self._interp[(a, b)]


@dataclass
class OperatorSpec:
    """Shift plus its discretization; collocation grids cached per node count."""

    shift: MarkovShift
    nodes_per_disk: Optional[int] = None
    _grids: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.shift.analytic:
            if self.nodes_per_disk is None:
                self.nodes_per_disk = 16
            if self.shift.group is None:
                raise ValidationError("analytic shift without group data")
        else:
            if self.nodes_per_disk is not None:
                raise ValidationError("exact toy operators take no collocation nodes")

    @property
    def kind(self) -> str:
        return "Collocation" if self.shift.analytic else "ExactMatrix"

    def grid(self, nodes: Optional[int] = None) -> CollocationGrid:
        nodes = nodes or self.nodes_per_disk
        if nodes not in self._grids:
            self._grids[nodes] = CollocationGrid(self.shift.group, nodes)
        return self._grids[nodes]

    def dim(self) -> int:
        if self.shift.analytic:
            return self.shift.k * self.nodes_per_disk
        return self.shift.k

    def fingerprint(self) -> str:
        return self.shift.fingerprint()


def _twist_weights(shift: MarkovShift, v, u) -> np.ndarray:
    """exp(<u, f> + i <v, f>) per transition, from the integer cocycle."""
    d = shift.d
    v = np.zeros(d) if v is None else np.asarray(v, dtype=float)
    u = np.zeros(d) if u is None else np.asarray(u, dtype=float)
    if v.shape != (d,) or u.shape != (d,):
        raise ValidationError(f"twist vectors must have dimension {d}")
    expo = shift.f @ (u + 1j * v)
    return np.exp(expo)


def build_matrix(spec: OperatorSpec, s: complex, v=None, p: int = 0, u=None,
                 nodes: Optional[int] = None) -> np.ndarray:
    """Dense matrix of L_{s,v,p} (with an optional real twist u) acting on
    coefficient vectors."""
    shift = spec.shift
    if not shift.analytic:
        w = _twist_weights(shift, v, u) * np.exp(-s * shift.tau)
        if p != 0:
            if shift.theta is None:
                raise HolonomyUnavailable("shift carries no holonomy data")
            w = w * np.exp(1j * p * shift.theta)
        W = shift.transition * w
        return W.T.astype(complex)
    if p != 0:
        raise HolonomyUnavailable("collocation operators carry no holonomy characters")
    grid = spec.grid(nodes)
    n = shift.k
    N = grid.nodes_per_disk
    d = shift.d
    v = np.zeros(d) if v is None else np.asarray(v, dtype=float)
    u = np.zeros(d) if u is None else np.asarray(u, dtype=float)
    group = shift.group
    M = np.zeros((n * N, n * N), dtype=complex)
    for a in range(n):
        hom = np.asarray(group.symbol_homology(a), dtype=float)
        cw = math.fsum(u * hom) + 1j * float(v @ hom) if d else 0.0
        for b in range(n):
            if shift.transition[a, b] == 0:
                continue
            wvec = np.exp(s * grid.log_deriv(a, b) + cw)
            M[b * N:(b + 1) * N, a * N:(a + 1) * N] = wvec[:, None] * grid.interp_block(a, b)
    return M


def apply(spec: OperatorSpec, s: complex, v, p: int, gvec, u=None) -> np.ndarray:
    """L_{s,v,p} g on coefficient vectors (values at nodes / symbol values)."""
    return build_matrix(spec, s, v, p, u) @ np.asarray(gvec, dtype=complex)


def _interpolate_between_grids(spec: OperatorSpec, h: np.ndarray,
                               n_from: int, n_to: int) -> np.ndarray:
    """Evaluate per-disk node values on a finer node set; doubling-check seed."""
    gfrom, gto = spec.grid(n_from), spec.grid(n_to)
    nsym = spec.shift.k
    out = np.zeros(nsym * n_to, dtype=complex)
    for a in range(nsym):
        block = h[a * n_from:(a + 1) * n_from]
        out[a * n_to:(a + 1) * n_to] = gfrom.interp_values(a, gto.nodes[a]) @ block
    return out


@dataclass
class SpectralResult:
    s: complex
    v: tuple
    p: int
    u: tuple
    lam: complex
    h: np.ndarray
    rho: Optional[np.ndarray]
    residual: float
    discretization: object = None  # CollocationGrid or None for exact


def _dense_leading(M: np.ndarray):
    vals, vecs = np.linalg.eig(M)
    i = int(np.argmax(np.abs(vals)))
    return vals[i], vecs[:, i]


def _dominant(M: np.ndarray, v0: Optional[np.ndarray] = None):
    """Dominant eigenpair: power iteration seeded by v0 (or ones), Arnoldi
    when the modulus gap is too small, dense eig as the last resort."""
    n = M.shape[0]
    if v0 is None:
        v0 = np.ones(n, dtype=complex) + 1e-3 * np.linspace(0.0, 1.0, n)
    z = v0 / np.linalg.norm(v0)
    lam = 0.0 + 0j
    for _ in range(60):
        w = M @ z
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0 + 0j, z, 0.0
        z = w / nw
        lam_new = np.vdot(z, M @ z)
        res = float(np.linalg.norm(M @ z - lam_new * z))
        if res < 1e-12 * max(1.0, abs(lam_new)):
            return lam_new, z, res
        lam = lam_new
    if n > 16:
        from scipy.sparse.linalg import ArpackNoConvergence, eigs
        try:
            k = min(3, n - 2)
            vals, vecs = eigs(M, k=k, v0=np.asarray(v0, dtype=complex), which="LM",
                              maxiter=5000, tol=1e-14)
            i = int(np.argmax(np.abs(vals)))
            lam, z = vals[i], vecs[:, i]
            res = float(np.linalg.norm(M @ z - lam * z) / np.linalg.norm(z))
            if res < 1e-10 * max(1.0, abs(lam)):
                return lam, z / np.linalg.norm(z), res
        except ArpackNoConvergence:
            pass
    lam, z = _dense_leading(M)
    res = float(np.linalg.norm(M @ z - lam * z) / np.linalg.norm(z))
    return lam, z, res


def leading_eigenvalue(spec: OperatorSpec, s: complex, v=None, p: int = 0,
                       u=None, want_measure: bool = False,
                       check_stability: bool = True) -> SpectralResult:
    """Dominant eigenvalue with certified residual.

    Power iteration with a dense-eig fallback when the gap is too small; for
    collocation the value must be stable under doubling nodes_per_disk.
    """
    M = build_matrix(spec, s, v, p, u)
    lam, h, res = _dominant(M)
    if not res < RESIDUAL_TOL:
        raise NotConverged(f"residual {res:.3e}")
    if spec.shift.analytic and check_stability:
        M2 = build_matrix(spec, s, v, p, u, nodes=2 * spec.nodes_per_disk)
        v0 = _interpolate_between_grids(spec, h, spec.nodes_per_disk,
                                        2 * spec.nodes_per_disk)
        lam2, _, _ = _dominant(M2, v0=v0)
        if abs(lam - lam2) > DOUBLING_TOL * max(abs(lam2), 1e-12):
            raise DiscretizationUnstable(
                f"lambda moved {abs(lam - lam2):.2e} under node doubling")
    rho = None
    is_perron = (abs(complex(s).imag) == 0.0
                 and (v is None or not np.any(np.asarray(v)))
                 and p == 0)
    if is_perron:
        lam = complex(lam.real, 0.0)
        h = np.real(h)
        h = h / h[int(np.argmax(np.abs(h)))]
        if want_measure and np.min(h) <= 0:
            raise NotConverged("Perron eigenfunction is not strictly positive")
    if want_measure:
        lamL, rho_vec, resL = _dominant(M.T)
        rho = rho_vec
        if is_perron:
            rho = np.real(rho)
            rho = rho / rho.sum()  # rho(1) = 1
            h = h / float(rho @ h)  # nu = h d rho is a probability
    dtup = spec.grid() if spec.shift.analytic else None
    vv = tuple(np.atleast_1d(v).tolist()) if v is not None else (0.0,) * spec.shift.d
    uu = tuple(np.atleast_1d(u).tolist()) if u is not None else (0.0,) * spec.shift.d
    return SpectralResult(s=s, v=vv, p=p, u=uu, lam=lam, h=h, rho=rho,
                          residual=float(res), discretization=dtup)


def _lead_lam_real(spec: OperatorSpec, s: float, u=None) -> float:
    """Leading eigenvalue on the real axis (positive operator), fast path."""
    r = leading_eigenvalue(spec, s, v=None, p=0, u=u, check_stability=False)
    return float(np.real(r.lam))


def _solve_pressure_root(spec: OperatorSpec, u=None, lo: float = 1e-3) -> float:
    """Unique s with lambda(s; u) = 1 by bracket expansion + Brent.

    The upper bracket stops at the first crossing, where the eigenvalue is
    O(1) and the discretization is well resolved.
    """
    f_lo = _lead_lam_real(spec, lo, u)
    while lo > 1e-12 and f_lo <= 1.0:
        lo *= 0.5
        f_lo = _lead_lam_real(spec, lo, u)
    if f_lo <= 1.0:
        raise BracketFailed(f"lambda({lo}) = {f_lo} <= 1 at the lower bracket")
    hi = max(4.0 * lo, 0.5)
    f_hi = _lead_lam_real(spec, hi, u)
    while f_hi >= 1.0:
        hi *= 2.0
        if hi > 1e6:
            raise BracketFailed("no upper bracket below 1e6")
        f_hi = _lead_lam_real(spec, hi, u)
    if not f_hi > 0.0:
        raise BracketFailed(f"eigenvalue {f_hi} at s = {hi} is not positive")

    def logf(s: float) -> float:
        lam = _lead_lam_real(spec, s, u)
        if lam <= 0.0:
            raise BracketFailed(f"eigenvalue {lam} at s = {s} is not positive")
        return math.log(lam)

    root = brentq(logf, lo, hi, xtol=1e-14, rtol=8.9e-16, maxiter=200)
    return float(root)


def critical_exponent(spec: OperatorSpec) -> float:
    """delta: the root of lambda(s, 0, 0) = 1."""
    delta = _solve_pressure_root(spec)
    if spec.shift.analytic:
        # certify the root's eigenvalue against node doubling
        leading_eigenvalue(spec, delta, check_stability=True)
    return delta


def pressure(spec: OperatorSpec, u) -> float:
    """P(u): the root of lambda(P(u); weights e^{<u,f>}) = 1; P(0) = delta."""
    u = np.asarray(u, dtype=float)
    return _solve_pressure_root(spec, u=u)


@dataclass
class PressureSurface:
    delta: float
    samples: dict
    gradient: np.ndarray
    hessian: np.ndarray
    sigma: float
    c0: float
    fd_step: float


def pressure_surface(spec: OperatorSpec, fd_step: float = 1e-3,
                     extra_grid: Optional[Sequence] = None) -> PressureSurface:
    """delta, Richardson-extrapolated gradient/Hessian of P at 0, and the
    Gaussian constants sigma = det(Hess)^{1/d}, C0 = (2 pi / sigma)^{d/2}."""
    d = spec.shift.d
    if d < 1:
        raise ValidationError("pressure surface needs homology dimension d >= 1")
    cache: dict = {}

    def P(uvec) -> float:
        key = tuple(round(float(x), 12) for x in uvec)
        if key not in cache:
            cache[key] = pressure(spec, np.asarray(uvec, dtype=float))
        return cache[key]

    delta = P(np.zeros(d))

    def grad_hess(h: float):
        e = np.eye(d)
        grad = np.array([(P(h * e[i]) - P(-h * e[i])) / (2 * h) for i in range(d)])
        H = np.zeros((d, d))
        for i in range(d):
            H[i, i] = (P(h * e[i]) - 2 * delta + P(-h * e[i])) / h ** 2
            for j in range(i + 1, d):
                val = (P(h * (e[i] + e[j])) - P(h * (e[i] - e[j]))
                       - P(-h * (e[i] - e[j])) + P(-h * (e[i] + e[j]))) / (4 * h ** 2)
                H[i, j] = H[j, i] = val
        return grad, H

    g1, H1 = grad_hess(fd_step)
    g2, H2 = grad_hess(fd_step / 2)
    grad = (4 * g2 - g1) / 3
    H = (4 * H2 - H1) / 3
    H = (H + H.T) / 2
    if np.max(np.abs(grad)) >= 1e-4:
        raise ValidationError(f"pressure gradient at 0 is {grad}, expected ~0")
    eigs = np.linalg.eigvalsh(H)
    if eigs.min() <= 0:
        raise HessianNotPD(f"Hessian eigenvalues {eigs}")
    sigma = float(np.linalg.det(H) ** (1.0 / d))
    c0 = float((2 * math.pi / sigma) ** (d / 2.0))
    if extra_grid is not None:
        for uvec in extra_grid:
            P(np.asarray(uvec, dtype=float))
    return PressureSurface(delta=delta, samples=dict(cache), gradient=grad,
                           hessian=H, sigma=sigma, c0=c0, fd_step=fd_step)


@dataclass
class ScanRow:
    t: float
    v: tuple
    p: int
    abs_lambda: float
    violation: bool


@dataclass
class ScanReport:
    delta: float
    margin: float
    rows: list

    @property
    def violations(self) -> list:
        return [r for r in self.rows if r.violation]

    def max_abs_lambda(self) -> float:
        return max(r.abs_lambda for r in self.rows)


def spectral_radius_scan(spec: OperatorSpec, delta: float, t_grid: Sequence[float],
                         v_grid: Sequence, p_list: Sequence[int] = (0,),
                         margin: float = 1e-3) -> ScanReport:
    """|lambda(delta + i t, v, p)| over the grid; any point other than
    (0, 0, trivial) reaching 1 - margin is flagged as a violation."""
    d = spec.shift.d
    rows = []
    for t in sorted(float(t) for t in t_grid):
        for v in v_grid:
            vv = tuple(np.atleast_1d(np.asarray(v, dtype=float)).tolist())
            if len(vv) != d:
                raise ValidationError(f"scan twist {vv} has wrong dimension")
            for p in p_list:
                r = leading_eigenvalue(spec, complex(delta, t), v=vv, p=p,
                                       check_stability=spec.shift.analytic)
                mod = float(abs(r.lam))
                trivial = (abs(t) < 1e-15 and not any(abs(x) > 1e-15 for x in vv)
                           and p == 0)
                rows.append(ScanRow(t=t, v=vv, p=p, abs_lambda=mod,
                                    violation=(not trivial) and mod > 1.0 - margin))
    rows.sort(key=lambda r: (r.t, r.v, r.p))
    return ScanReport(delta=delta, margin=margin, rows=rows)
