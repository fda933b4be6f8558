"""Subshifts of finite type with roof, Z^d cocycle and holonomy data, plus the
Gibbs/Parry sampler used for the cocycle CLT experiments.

Two flavours share one type: hand-built toy shifts carry per-transition
tables with closed-form thermodynamics, and Schottky boundary codings carry
an analytic roof (the log-derivative of the expanding boundary map).  All
per-transition data is indexed (first symbol, second symbol); the cocycle
increment of y = (y0, y1, ...) is the homology vector of the entering letter
y0, and the roof at y is log |(branch_{y0}^{-1})'| at the coded point.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import schottky as sk
from .errors import NotAtCriticalExponent, ValidationError
from .hyperbolic import fixed_points
from .schottky import SchottkyGroup


@dataclass(frozen=True)
class MarkovShift:
    """Aperiodic SFT with 2-block roof/cocycle/holonomy data."""

    k: int
    transition: np.ndarray           # (k, k) 0/1
    f: np.ndarray                    # (k, k, d) integer cocycle increments
    tau: Optional[np.ndarray] = None           # (k, k) roof; None for analytic
    theta: Optional[np.ndarray] = None         # (k, k) holonomy angles
    source: str = "Toy"              # "Toy" | "SchottkyCoding"
    group: Optional[SchottkyGroup] = None
    aperiodicity_power: int = field(default=0, compare=False)

    def __post_init__(self):
        A = np.asarray(self.transition, dtype=np.int64)
        object.__setattr__(self, "transition", A)
        object.__setattr__(self, "f", np.asarray(self.f, dtype=np.int64))
        if self.tau is not None:
            tau = np.asarray(self.tau, dtype=float)
            if np.min(tau[A > 0]) <= 0:
                raise ValidationError("roof must be positive on admissible transitions")
            object.__setattr__(self, "tau", tau)
        if self.theta is not None:
            object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))
        object.__setattr__(self, "aperiodicity_power", _aperiodicity_power(A))

    @property
    def d(self) -> int:
        return self.f.shape[2]

    @property
    def analytic(self) -> bool:
        return self.tau is None

    def fingerprint(self) -> str:
        blob = {
            "k": self.k,
            "A": self.transition.tolist(),
            "f": self.f.tolist(),
            "tau": None if self.tau is None else self.tau.tolist(),
            "theta": None if self.theta is None else self.theta.tolist(),
            "source": self.source,
            "group": None if self.group is None else self.group.fingerprint(),
        }
        return hashlib.sha256(json.dumps(blob, sort_keys=True).encode()).hexdigest()


def _aperiodicity_power(A: np.ndarray) -> int:
    """Smallest N <= k^2 with A^N > 0 entrywise; raises if none exists."""
    k = A.shape[0]
    P = (A > 0).astype(np.int8)
    M = P.copy()
    for n in range(1, k * k + 1):
        if np.all(M > 0):
            return n
        M = ((M @ P) > 0).astype(np.int8)
    raise ValidationError("transition matrix is not aperiodic")


def toy_full_shift(k: int, c: float, f_values: Sequence[Sequence[int]],
                   theta_values: Optional[Sequence[float]] = None) -> MarkovShift:
    """Full shift on k symbols, constant roof c, per-symbol cocycle values."""
    if k < 2:
        raise ValidationError("toy full shift needs k >= 2")
    if c <= 0:
        raise ValidationError("roof constant must be positive")
    fv = np.asarray(f_values, dtype=np.int64)
    if fv.ndim == 1:
        fv = fv[:, None]
    if fv.shape[0] != k:
        raise ValidationError("need one cocycle value per symbol")
    d = fv.shape[1]
    A = np.ones((k, k), dtype=np.int64)
    tau = np.full((k, k), float(c))
    f = np.zeros((k, k, d), dtype=np.int64)
    for a in range(k):
        f[a, :, :] = fv[a]
    theta = None
    if theta_values is not None:
        theta = np.zeros((k, k))
        for a in range(k):
            theta[a, :] = theta_values[a]
    return MarkovShift(k=k, transition=A, f=f, tau=tau, theta=theta, source="Toy")


def toy_from_json(data: dict) -> MarkovShift:
    A = np.asarray(data["transition"], dtype=np.int64)
    k = A.shape[0]
    tau = np.asarray(data["tau"], dtype=float)
    f = np.asarray(data["f"], dtype=np.int64)
    if f.ndim == 2:  # per-symbol table
        full = np.zeros((k, k, f.shape[1]), dtype=np.int64)
        for a in range(k):
            full[a, :, :] = f[a]
        f = full
    theta = np.asarray(data["theta"], dtype=float) if data.get("theta") is not None else None
    return MarkovShift(k=k, transition=A, f=f, tau=tau, theta=theta, source="Toy")


def toy_to_json(shift: MarkovShift) -> dict:
    return {
        "transition": shift.transition.tolist(),
        "tau": shift.tau.tolist(),
        "f": shift.f.tolist(),
        "theta": None if shift.theta is None else shift.theta.tolist(),
    }


def from_schottky(group: SchottkyGroup) -> MarkovShift:
    """Boundary coding of a Schottky group: 2g symbols, transitions forbid a
    letter followed by its inverse, analytic roof, per-letter homology."""
    n = group.n_symbols
    A = np.ones((n, n), dtype=np.int64)
    for a in range(n):
        A[a, sk.inverse_index(a)] = 0
    d = group.d
    f = np.zeros((n, n, d), dtype=np.int64)
    for a in range(n):
        f[a, :, :] = np.asarray(group.symbol_homology(a), dtype=np.int64)
    theta = None  # analytic holonomy lives on the group, queried per point
    return MarkovShift(k=n, transition=A, f=f, tau=None, theta=theta,
                       source="SchottkyCoding", group=group)


# -- periodic data of the coding -------------------------------------------


def periodic_point(group: SchottkyGroup, word: Sequence[int]) -> complex:
    """Attracting fixed point of the word's evaluation: the boundary point
    coded by the periodic symbol sequence word^infinity."""
    return fixed_points(group.evaluate(word))[0]


def _roof_term(group: SchottkyGroup, letter: int, x: complex) -> complex:
    """Complex roof log (branch_letter^{-1})'(x) = -2 Log(-c x + a)."""
    a, _, c, _ = group.symbol_matrix(sk.sym_index(letter))
    den = -c * x + a
    return complex(-2.0 * math.log(abs(den)), -2.0 * math.atan2(den.imag, den.real))


def cycle_roof_sum(group: SchottkyGroup, word: Sequence[int]) -> float:
    """tau_n along the periodic coding of a cyclically reduced word.

    Each rotation's branch derivative is evaluated at its own attracting
    fixed point; this avoids iterating the expanding map.  By the chain rule
    the total equals the translation length of the word's conjugacy class.
    """
    if not sk.is_cyclically_reduced(word):
        raise ValidationError("cycle roof sums need a cyclically reduced word")
    total = 0.0
    for r in range(len(word)):
        rot = tuple(word[r:]) + tuple(word[:r])
        total += _roof_term(group, rot[0], periodic_point(group, rot)).real
    return total


def cycle_holonomy_sum(group: SchottkyGroup, word: Sequence[int]) -> float:
    """theta_n along the periodic coding, wrapped to (-pi, pi]."""
    total = 0.0
    for r in range(len(word)):
        rot = tuple(word[r:]) + tuple(word[:r])
        total += _roof_term(group, rot[0], periodic_point(group, rot)).imag
    out = math.fmod(total, 2.0 * math.pi)
    if out > math.pi:
        out -= 2.0 * math.pi
    elif out <= -math.pi:
        out += 2.0 * math.pi
    return out


# -- Parry chain and cocycle sampling ---------------------------------------


@dataclass(frozen=True)
class ParryChain:
    """Symbol-level Markov chain of the equilibrium state at s = delta."""

    stationary: np.ndarray
    transitions: np.ndarray
    delta: float

    def __post_init__(self):
        P = np.asarray(self.transitions, dtype=float)
        if np.max(np.abs(P.sum(axis=1) - 1.0)) > 1e-12:
            raise ValidationError("chain rows must sum to 1")
        pi = np.asarray(self.stationary, dtype=float)
        if np.max(np.abs(pi @ P - pi)) > 1e-10:
            raise ValidationError("stationary vector fails pi P = pi")


@dataclass(frozen=True)
class CocycleSample:
    n: int
    tau_n: float
    f_n: np.ndarray


def parry_chain(shift: MarkovShift, spectral) -> ParryChain:
    """Markov chain p(a -> b) = B[a,b] rho_b / (lambda rho_a) from RPF data
    at s = delta, with rho the eigenvector of the weight matrix B and the
    stationary law proportional to h * rho."""
    lam = spectral.lam
    if abs(lam - 1.0) > 1e-8 or abs(complex(lam).imag) > 1e-8:
        raise NotAtCriticalExponent(f"leading eigenvalue {lam} != 1")
    if shift.analytic:
        pi, P = _schottky_symbol_chain(shift, spectral)
    else:
        delta = float(complex(spectral.s).real)
        B = np.exp(-delta * shift.tau) * shift.transition
        rho = np.abs(np.real(spectral.rho))
        h = np.abs(np.real(spectral.h))
        P = B * rho[None, :] / rho[:, None]
        P /= P.sum(axis=1, keepdims=True)
        pi = h * rho
        pi /= pi.sum()
    return ParryChain(stationary=pi, transitions=P, delta=float(complex(spectral.s).real))


def _schottky_symbol_chain(shift: MarkovShift, spectral) -> tuple[np.ndarray, np.ndarray]:
    """Marginalize collocation eigendata of nu = h d rho to cylinder masses
    nu([a]), nu([ab]) and form p(a -> b) = nu([ab]) / nu([a])."""
    disc = spectral.discretization
    h = np.real(spectral.h)
    ell = np.real(spectral.rho)  # quadrature weights of the eigenmeasure
    n = shift.k
    N = disc.nodes_per_disk
    delta = float(complex(spectral.s).real)
    nu_a = np.array([float(np.dot(ell[a * N:(a + 1) * N], h[a * N:(a + 1) * N]))
                     for a in range(n)])
    nu_ab = np.zeros((n, n))
    for a in range(n):
        for b in range(n):
            if shift.transition[a, b] == 0:
                continue
            x = disc.nodes[b]
            w = np.exp(delta * disc.log_deriv(a, b))
            hvals = disc.interp_block(a, b) @ h[a * N:(a + 1) * N]
            nu_ab[a, b] = float(np.dot(ell[b * N:(b + 1) * N], w * hvals))
    P = nu_ab / nu_ab.sum(axis=1, keepdims=True)
    pi = nu_a / nu_a.sum()
    return pi, P


def sample_cocycle(chain: ParryChain, shift: MarkovShift, n: int,
                   rng_seed: int, spectral=None) -> CocycleSample:
    """One equilibrium trajectory of n steps; see sample_cocycle_batch."""
    tau_n, f_n = sample_cocycle_batch(chain, shift, n, 1, rng_seed, spectral=spectral)
    return CocycleSample(n=n, tau_n=float(tau_n[0]), f_n=f_n[0])


def sample_cocycle_batch(chain: ParryChain, shift: MarkovShift, n: int,
                         n_traj: int, master_seed: int, spectral=None,
                         batch: int = 2048) -> tuple[np.ndarray, np.ndarray]:
    """(tau_n, f_n) over n_traj trajectories of n steps each.

    Trajectory i draws its randomness from default_rng([master_seed, i]), so
    results do not depend on batching or parallel schedule.  Toy shifts run
    the exact finite-state chain.  Schottky codings run the equilibrium
    process exactly: random inverse branches weighted by
    |branch'|^delta h(branch x) / h(x) with h the RPF eigenfunction, which
    reverses to the shift with marginal nu; the roof increments are the
    analytic branch derivatives along the trajectory.
    """
    if n == 0:
        return np.zeros(n_traj), np.zeros((n_traj, shift.d), dtype=np.int64)
    taus = np.zeros(n_traj)
    fs = np.zeros((n_traj, shift.d), dtype=np.int64)
    for lo in range(0, n_traj, batch):
        hi = min(lo + batch, n_traj)
        seeds = [np.random.default_rng([master_seed, i]) for i in range(lo, hi)]
        if shift.analytic:
            t, f = _sample_schottky(chain, shift, n, seeds, spectral)
        else:
            t, f = _sample_toy(chain, shift, n, seeds)
        taus[lo:hi] = t
        fs[lo:hi] = f
    return taus, fs


def _uniform_block(rngs, count: int) -> np.ndarray:
    return np.stack([r.random(count) for r in rngs], axis=0)


def sample_trajectory(chain: ParryChain, shift: MarkovShift, n: int,
                      rng_seed: int, spectral=None) -> list[tuple]:
    """Per-step dump rows (step, symbol, tau_cum, f_cum...) of one trajectory."""
    rng = np.random.default_rng([rng_seed, 0])
    cum_pi = np.cumsum(chain.stationary)
    state = int(np.searchsorted(cum_pi, rng.random()))
    rows = []
    tau_cum = 0.0
    f_cum = np.zeros(shift.d, dtype=np.int64)
    if shift.analytic:
        # follow the same backward branch chain as the batch sampler
        group = shift.group
        disc = spectral.discretization
        h = np.real(spectral.h)
        N = disc.nodes_per_disk
        x = group.disks[state].center
        for step in range(n):
            weights = []
            for b in range(shift.k):
                if state == (b ^ 1):
                    weights.append(0.0)
                    continue
                mb = group.symbol_matrix(b)
                den = mb[2] * x + mb[3]
                y = (mb[0] * x + mb[1]) / den
                hy = float(disc.interp_values(b, np.array([y.real]))[0]
                           @ h[b * N:(b + 1) * N])
                weights.append(abs(den) ** (-2.0 * chain.delta) * hy)
            cum = np.cumsum(weights)
            b = int(np.searchsorted(cum, rng.random() * cum[-1]))
            b = min(b, shift.k - 1)
            mb = group.symbol_matrix(b)
            den = mb[2] * x + mb[3]
            tau_cum += 2.0 * math.log(abs(den))
            f_cum = f_cum + np.asarray(group.symbol_homology(b), dtype=np.int64)
            x = (mb[0] * x + mb[1]) / den
            state = b
            rows.append((step, sk.letter_of_index(b), tau_cum, *f_cum.tolist()))
        return rows
    cum_p = np.cumsum(chain.transitions, axis=1)
    for step in range(n):
        nxt = int(np.searchsorted(cum_p[state], rng.random()))
        nxt = min(nxt, shift.k - 1)
        tau_cum += float(shift.tau[state, nxt])
        f_cum = f_cum + shift.f[state, nxt]
        rows.append((step, nxt, tau_cum, *f_cum.tolist()))
        state = nxt
    return rows


def _sample_toy(chain: ParryChain, shift: MarkovShift, n: int, rngs):
    m = len(rngs)
    cum_p = np.cumsum(chain.transitions, axis=1)
    cum_pi = np.cumsum(chain.stationary)
    u0 = np.array([r.random() for r in rngs])
    state = np.searchsorted(cum_pi, u0)
    tau_n = np.zeros(m)
    f_n = np.zeros((m, shift.d), dtype=np.int64)
    chunk = 1024
    done = 0
    while done < n:
        take = min(chunk, n - done)
        u = _uniform_block(rngs, take)
        for j in range(take):
            nxt = (cum_p[state] < u[:, j][:, None]).sum(axis=1)
            nxt = np.minimum(nxt, shift.k - 1)
            tau_n += shift.tau[state, nxt]
            f_n += shift.f[state, nxt]
            state = nxt
        done += take
    return tau_n, f_n


def _sample_schottky(chain: ParryChain, shift: MarkovShift, n: int, rngs, spectral):
    """Backward h-weighted branch chain; Birkhoff sums read along it equal
    forward sums under the equilibrium measure."""
    if spectral is None:
        raise ValidationError("schottky sampling needs the spectral result at delta")
    group = shift.group
    disc = spectral.discretization
    delta = chain.delta
    h = np.real(spectral.h)
    N = disc.nodes_per_disk
    nsym = shift.k
    m = len(rngs)
    mats = np.array([group.symbol_matrix(a) for a in range(nsym)])  # (nsym, 4)
    f_sym = np.array([group.symbol_homology(a) for a in range(nsym)], dtype=np.int64)
    if group.d == 0:
        f_sym = f_sym.reshape(nsym, 0)

    # start at equilibrium symbol marginals, on the disk centers, and burn in
    cum_pi = np.cumsum(chain.stationary)
    u0 = np.array([r.random() for r in rngs])
    sym = np.minimum(np.searchsorted(cum_pi, u0), nsym - 1).astype(np.int64)
    x = np.array([group.disks[a].center for a in sym], dtype=complex)
    burn = 192
    tau_n = np.zeros(m)
    f_n = np.zeros((m, group.d), dtype=np.int64)
    chunk = 1024
    total = n + burn
    done = 0
    while done < total:
        take = min(chunk, total - done)
        u = _uniform_block(rngs, take)
        rows = np.arange(m)
        for j in range(take):
            # candidate branches b != inverse(sym): weights |gamma_b'(x)|^delta h(gamma_b x)
            weights = np.zeros((m, nsym))
            ys = np.zeros((m, nsym), dtype=complex)
            for b in range(nsym):
                allowed = sym != (b ^ 1)
                mb = mats[b]
                with np.errstate(divide="ignore", invalid="ignore"):
                    den = mb[2] * x + mb[3]
                    y = (mb[0] * x + mb[1]) / den
                ys[:, b] = y
                hy = np.zeros(m)
                hy[allowed] = disc.interp_values(b, y[allowed].real) @ h[b * N:(b + 1) * N]
                weights[allowed, b] = np.abs(den[allowed]) ** (-2.0 * delta) * hy[allowed]
            cum = np.cumsum(weights, axis=1)
            pick = (cum < (u[:, j] * cum[:, -1])[:, None]).sum(axis=1)
            pick = np.minimum(pick, nsym - 1)
            mb = mats[pick]
            den = mb[:, 2] * x + mb[:, 3]
            step_tau = 2.0 * np.log(np.abs(den))
            x = ys[rows, pick]
            sym = pick
            if done + j >= burn:
                tau_n += step_tau
                f_n += f_sym[pick]
        done += take
    return tau_n, f_n
