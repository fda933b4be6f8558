"""Schottky groups: ping-pong validation, reduced-word orbit enumeration with
geometric pruning, the Z^d homology cocycle, and primitive conjugacy classes.

Symbols are letters {1,-1,2,-2,...,g,-g}; letter k > 0 is generator k, -k its
inverse.  The symbol index order 1 < -1 < 2 < -2 < ... is used for canonical
rotations and for deterministic enumeration order.  Disk j of letter a is the
disk the letter maps INTO: letter a sends the exterior of disk(-a) onto the
interior of disk(a).
"""

from __future__ import annotations

import cmath
import hashlib
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, NamedTuple, Optional, Sequence

import numpy as np

from . import hyperbolic as hyp
from .errors import (BudgetExceeded, DisksOverlap, PairingBroken,
                     RankDeficientHomology, ValidationError)
from .hyperbolic import Model, MoebiusMap

PAIRING_TOL = 1e-8
MARGIN_PAD = 0.10


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float


def sym_index(letter: int) -> int:
    """1,-1,2,-2,... -> 0,1,2,3,..."""
    return 2 * (abs(letter) - 1) + (0 if letter > 0 else 1)


def letter_of_index(idx: int) -> int:
    k = idx // 2 + 1
    return k if idx % 2 == 0 else -k


def inverse_index(idx: int) -> int:
    return idx ^ 1


def word_key(word: Sequence[int]) -> tuple[int, ...]:
    return tuple(sym_index(a) for a in word)


def is_reduced(word: Sequence[int]) -> bool:
    return all(word[i + 1] != -word[i] for i in range(len(word) - 1))


def is_cyclically_reduced(word: Sequence[int]) -> bool:
    if not word:
        return False
    return is_reduced(word) and word[0] != -word[-1]


def reduce_concat(w1: Sequence[int], w2: Sequence[int]) -> tuple[int, ...]:
    out = list(w1)
    for a in w2:
        if out and out[-1] == -a:
            out.pop()
        else:
            out.append(a)
    return tuple(out)


def word_inverse(word: Sequence[int]) -> tuple[int, ...]:
    return tuple(-a for a in reversed(word))


def rotations(word: Sequence[int]) -> Iterable[tuple[int, ...]]:
    w = tuple(word)
    for i in range(len(w)):
        yield w[i:] + w[:i]


def canonical_rotation(word: Sequence[int]) -> tuple[int, ...]:
    return min(rotations(word), key=word_key)


def is_primitive(word: Sequence[int]) -> bool:
    """Not a proper power of a shorter cyclic word."""
    n = len(word)
    for p in range(1, n):
        if n % p == 0 and all(word[k] == word[(k + p) % n] for k in range(n)):
            return False
    return True


def exponent_vector(word: Sequence[int], g: int) -> np.ndarray:
    vec = np.zeros(g, dtype=np.int64)
    for a in word:
        vec[abs(a) - 1] += 1 if a > 0 else -1
    return vec


class OrbitRecord(NamedTuple):
    word: tuple[int, ...]
    displacement: float
    homology: tuple[int, ...]


class GeodesicRecord(NamedTuple):
    word: tuple[int, ...]
    length: float
    homology: tuple[int, ...]
    holonomy: float


def _rank_over_q(mat: Sequence[Sequence[int]]) -> int:
    rows = [[Fraction(int(x)) for x in row] for row in mat]
    rank, ncols = 0, len(rows[0]) if rows else 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = rows[rank][col]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                f = rows[r][col] / inv
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def _mobius_image_circle(m: tuple[complex, complex, complex, complex],
                         q: complex, r: float) -> tuple[complex, float]:
    """Image of the circle |z - q| = r (pole outside) under a det-1 map."""
    a, b, c, d = m
    if abs(c) < 1e-14:
        center = (a * q + b) / d
        return center, abs(a / d) * r
    pole = -d / c
    if abs(pole - q) <= r:
        raise ValueError("pole inside the disk")
    zstar = q + r * r / (pole - q).conjugate()
    center = (a * zstar + b) / (c * zstar + d)
    edge = (a * (q + r) + b) / (c * (q + r) + d)
    return center, abs(edge - center)


class SchottkyGroup:
    """Validated Schottky data; immutable once constructed."""

    def __init__(self, generators: Sequence[MoebiusMap],
                 disks_minus: Sequence[Disk], disks_plus: Sequence[Disk],
                 homology_matrix: Sequence[Sequence[int]],
                 model: Model = Model.H2):
        self.model = Model(model)
        self.generators = tuple(generators)
        self.g = len(self.generators)
        # disk per symbol index: letter a maps into disk(sym_index(a))
        disks: list[Disk] = []
        for i in range(self.g):
            disks.append(disks_plus[i])
            disks.append(disks_minus[i])
        self.disks = tuple(disks)
        hom = np.asarray(homology_matrix, dtype=np.int64)
        if hom.size == 0:
            hom = hom.reshape(0, self.g)
        self.homology_matrix = hom
        self.d = hom.shape[0]
        # matrices per symbol index, as raw (a, b, c, d) tuples
        mats: list[tuple[complex, complex, complex, complex]] = []
        for gen in self.generators:
            mats.append(gen.entries)
            mats.append(hyp.inverse(gen).entries)
        self._mats = tuple(mats)
        # homology increment per symbol index
        cols = []
        for i in range(self.g):
            col = tuple(int(x) for x in hom[:, i]) if self.d else ()
            cols.append(col)
            cols.append(tuple(-x for x in col))
        self._hom = tuple(cols)
        self.validate()
        self._orbit_margin: Optional[float] = None

    # -- validation -------------------------------------------------------

    def validate(self) -> None:
        n = 2 * self.g
        if self.g < 2:
            raise ValidationError("need at least 2 generators for a nonelementary group")
        overlaps = [(i, j) for i in range(n) for j in range(i + 1, n)
                    if abs(self.disks[i].center - self.disks[j].center)
                    <= self.disks[i].radius + self.disks[j].radius]
        if overlaps:
            raise DisksOverlap(overlaps)
        if not (0 <= self.d <= self.g):
            raise ValidationError(f"homology dimension {self.d} outside [0, {self.g}]")
        if self.homology_matrix.shape[1] != self.g:
            raise ValidationError("homology matrix must have one column per generator")
        if self.d > 0 and _rank_over_q(self.homology_matrix.tolist()) < self.d:
            raise RankDeficientHomology(_rank_over_q(self.homology_matrix.tolist()), self.d)
        for i, gen in enumerate(self.generators):
            dminus = self.disks[sym_index(-(i + 1))]
            dplus = self.disks[sym_index(i + 1)]
            if gen.model != self.model:
                raise ValidationError(f"generator {i + 1} has wrong model tag")
            for k in range(16):
                z = dminus.center + dminus.radius * cmath.exp(2j * math.pi * k / 16)
                w = hyp.apply_boundary(gen, z)
                if abs(abs(w - dplus.center) - dplus.radius) > PAIRING_TOL:
                    raise PairingBroken(i + 1, f"(boundary point {k} maps off the paired circle)")
            far = dminus.center + 1e7 * dminus.radius
            if abs(hyp.apply_boundary(gen, far) - dplus.center) >= dplus.radius:
                raise PairingBroken(i + 1, "(exterior does not map inside the paired disk)")
        if self.model == Model.H2:
            for i, dk in enumerate(self.disks):
                if abs(dk.center.imag) > 1e-12:
                    raise ValidationError(f"H2 disk {i} must be centered on the real axis")
        for dk in self.disks:
            if abs(dk.center) ** 2 + 1.0 <= dk.radius ** 2:
                raise ValidationError("base point o lies inside a Schottky half-space")

    # -- symbol data ------------------------------------------------------

    @property
    def n_symbols(self) -> int:
        return 2 * self.g

    def symbol_matrix(self, idx: int) -> tuple[complex, complex, complex, complex]:
        return self._mats[idx]

    def symbol_homology(self, idx: int) -> tuple[int, ...]:
        return self._hom[idx]

    def abelianize(self, word: Sequence[int]) -> tuple[int, ...]:
        if self.d == 0:
            return ()
        vec = self.homology_matrix @ exponent_vector(word, self.g)
        return tuple(int(x) for x in vec)

    def kernel_membership(self, word: Sequence[int]) -> bool:
        return all(x == 0 for x in self.abelianize(word))

    def evaluate(self, word: Sequence[int]) -> MoebiusMap:
        m = _eval_raw(self._mats, word)
        return MoebiusMap(*m, self.model, normalize=False)

    def fingerprint(self) -> str:
        blob = {
            "model": self.model.value,
            "generators": [[[x.real, x.imag] for x in g.entries] for g in self.generators],
            "disks": [[dk.center.real, dk.center.imag, dk.radius] for dk in self.disks],
            "homology": self.homology_matrix.tolist(),
        }
        return hashlib.sha256(json.dumps(blob, sort_keys=True).encode()).hexdigest()

    # -- pruning geometry --------------------------------------------------

    def _phi_model_distance(self, c_idx: int, region_pts: Iterable[tuple[complex, float]]) -> float:
        best = 0.0
        for z, t in region_pts:
            ch = 1.0 + (abs(z) ** 2 + (t - 1.0) ** 2) / (2.0 * t)
            best = max(best, math.acosh(max(ch, 1.0)))
        return best

    def orbit_margin(self) -> float:
        """Uniform displacement dip bound: every reduced descendant of w
        satisfies d(o, u o) >= d(o, w o) - orbit_margin()."""
        if self._orbit_margin is not None:
            return self._orbit_margin
        best = 0.0
        for c in range(self.n_symbols):
            dc = self.disks[c]
            phi = (1.0, -(dc.center + dc.radius), 1.0, -(dc.center - dc.radius))
            # normalize to det 1 for the half-space action
            det = phi[0] * phi[3] - phi[1] * phi[2]
            s = cmath.sqrt(det)
            phi_map = MoebiusMap(phi[0] / s, phi[1] / s, phi[2] / s, phi[3] / s, Model.H3)
            zo, to = hyp.apply_halfspace(phi_map, 0j, 1.0)
            for b in range(self.n_symbols):
                if b == c:
                    continue
                db = self.disks[b]
                w0, r0 = _mobius_image_circle(phi_map.entries, db.center, db.radius)
                if self.model == Model.H2:
                    # projection arc endpoints on the model axis {(0, s)}
                    for sproj in (abs(abs(w0) - r0), abs(w0) + r0):
                        if sproj <= 0:
                            continue
                        ch = 1.0 + (abs(zo) ** 2 + (to - sproj) ** 2) / (2.0 * to * sproj)
                        best = max(best, math.acosh(max(ch, 1.0)))
                else:
                    # 2d projection region on the model plane {(iy, s)}
                    for y in np.linspace(w0.imag - r0, w0.imag + r0, 41):
                        rho = math.sqrt(max(r0 ** 2 - (y - w0.imag) ** 2, 0.0))
                        for sproj in (max(abs(abs(w0.real) - rho), 1e-9), abs(w0.real) + rho):
                            ch = 1.0 + (abs(zo - 1j * y) ** 2 + (to - sproj) ** 2) / (2.0 * to * sproj)
                            best = max(best, math.acosh(max(ch, 1.0)))
        self._orbit_margin = best + (0.0 if self.model == Model.H2 else MARGIN_PAD)
        return self._orbit_margin

    def min_cycle_step(self) -> float:
        """Lower bound on the per-letter length gain of cyclic words:
        tau >= -log sup |gamma_a'| over any admissible source disk."""
        worst = -math.inf
        for a in range(self.n_symbols):
            ma = self._mats[a]
            _, _, c, d = ma
            for b in range(self.n_symbols):
                if b == inverse_index(a):
                    continue
                db = self.disks[b]
                if abs(c) < 1e-14:
                    sup = 1.0 / abs(d) ** 2
                else:
                    gap = abs(db.center + d / c) - db.radius
                    if gap <= 0:
                        raise ValidationError("pole inside an admissible disk")
                    sup = 1.0 / (abs(c) * gap) ** 2
                worst = max(worst, math.log(sup))
        step = -worst
        if step <= 0:
            raise ValidationError("disks too weakly contracted for class enumeration")
        return step


def _eval_raw(mats, word) -> tuple[complex, complex, complex, complex]:
    a, b, c, d = 1.0 + 0j, 0j, 0j, 1.0 + 0j
    for letter in word:
        ma, mb, mc, md = mats[sym_index(letter)]
        a, b, c, d = (a * ma + b * mc, a * mb + b * md,
                      c * ma + d * mc, c * mb + d * md)
    return a, b, c, d


def _frob2(m) -> float:
    a, b, c, d = m
    return (a.real * a.real + a.imag * a.imag + b.real * b.real + b.imag * b.imag
            + c.real * c.real + c.imag * c.imag + d.real * d.real + d.imag * d.imag)


def validate(group: SchottkyGroup) -> None:
    """Re-run the construction-time checks (they raise on violation)."""
    group.validate()


def enumerate_orbit(group: SchottkyGroup, T: float,
                    emit: Optional[Callable[[OrbitRecord], None]] = None,
                    budget: Optional[int] = None,
                    threads: int = 1) -> int:
    """Emit every reduced word with displacement <= T exactly once.

    Depth-first with the shadow-projection prune: the displacement of any
    reduced descendant is at least the parent displacement minus the group's
    orbit margin, so subtrees rooted above T + margin are dead.
    """
    margin = group.orbit_margin()
    cosh_T = math.cosh(T)
    cosh_cut = math.cosh(T + margin)
    count = 0
    zero = (0,) * group.d
    if emit is not None:
        emit(OrbitRecord((), 0.0, zero))
    count += 1
    mats = group._mats
    n = group.n_symbols

    def run_shard(first_idx: int) -> list[OrbitRecord]:
        out: list[OrbitRecord] = []
        root_m = mats[first_idx]
        stack = [((letter_of_index(first_idx),), root_m, first_idx)]
        while stack:
            word, m, last = stack.pop()
            ch = _frob2(m) / 2.0
            if ch <= cosh_T:
                out.append(OrbitRecord(word, math.acosh(max(ch, 1.0)),
                                       group.abelianize(word)))
                if budget is not None and len(out) > budget:
                    raise BudgetExceeded(budget)
            if ch > cosh_cut:
                continue
            bad = inverse_index(last)
            for idx in range(n):
                if idx == bad:
                    continue
                ma, mb, mc, md = mats[idx]
                a, b, c, d = m
                child = (a * ma + b * mc, a * mb + b * md,
                         c * ma + d * mc, c * mb + d * md)
                stack.append((word + (letter_of_index(idx),), child, idx))
        out.sort(key=lambda rec: (len(rec.word), word_key(rec.word)))
        return out

    shards: list[list[OrbitRecord]]
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            shards = list(pool.map(run_shard, range(n)))
    else:
        shards = [run_shard(i) for i in range(n)]
    for shard in shards:
        for rec in shard:
            count += 1
            if budget is not None and count > budget:
                raise BudgetExceeded(budget)
            if emit is not None:
                emit(rec)
    return count


def enumerate_orbit_bruteforce(group: SchottkyGroup, T: float, max_len: int) -> list[OrbitRecord]:
    """Prune-free oracle: every reduced word of length <= max_len, filtered by
    displacement <= T.  Exponential in max_len; cross-check use only."""
    out: list[OrbitRecord] = []
    mats = group._mats
    n = group.n_symbols

    def rec_walk(word, m, last):
        ch = _frob2(m) / 2.0
        if ch <= math.cosh(T):
            out.append(OrbitRecord(word, math.acosh(max(ch, 1.0)), group.abelianize(word)))
        if len(word) >= max_len:
            return
        for idx in range(n):
            if last is not None and idx == inverse_index(last):
                continue
            ma, mb, mc, md = mats[idx]
            a, b, c, d = m
            child = (a * ma + b * mc, a * mb + b * md, c * ma + d * mc, c * mb + d * md)
            rec_walk(word + (letter_of_index(idx),), child, idx)

    rec_walk((), (1.0 + 0j, 0j, 0j, 1.0 + 0j), None)
    return out


def _invariants_raw(m, model: Model) -> tuple[float, float]:
    """(length, holonomy) of a loxodromic raw matrix (det 1)."""
    tr = m[0] + m[3]
    disc = cmath.sqrt(tr * tr - 4.0)
    lam = (tr + disc) / 2.0
    if abs(lam) < 1.0:
        lam = (tr - disc) / 2.0
    length = 2.0 * math.log(max(abs(lam), 1.0))
    if model == Model.H2:
        return length, 0.0
    theta = math.fmod(2.0 * cmath.phase(lam), 2.0 * math.pi)
    if theta > math.pi:
        theta -= 2.0 * math.pi
    elif theta <= -math.pi:
        theta += 2.0 * math.pi
    return length, theta


def primitive_classes(group: SchottkyGroup, L: float,
                      emit: Optional[Callable[[GeodesicRecord], None]] = None,
                      budget: Optional[int] = None) -> int:
    """Emit every oriented primitive conjugacy class with length <= L once.

    Classes are cyclically reduced words up to rotation; the canonical
    representative is the lexicographically least rotation in the symbol
    order 1 < -1 < 2 < -2 < ...  Orientation-reversed classes are distinct.

    Pruning: for a partial word p extended by letter b, every completion w
    satisfies |w'(fix)| <= sup_{D_b} |p'|, since the remaining letters only
    contract further; so length(w) >= -log sup_{D_b} |p'|, an exact bound
    read off the partial product in O(1).
    """
    group.min_cycle_step()  # validates that all admissible steps contract
    mats = group._mats
    n = group.n_symbols
    count = 0
    for first_idx in range(n):
        stack = [((letter_of_index(first_idx),), mats[first_idx], first_idx)]
        while stack:
            word, m, last = stack.pop()
            if last != inverse_index(first_idx):
                # cyclically admissible candidate rooted at its first letter
                length, theta = _invariants_raw(m, group.model)
                if 0.0 < length <= L and word == canonical_rotation(word) \
                        and is_primitive(word):
                    count += 1
                    if budget is not None and count > budget:
                        raise BudgetExceeded(budget)
                    if emit is not None:
                        emit(GeodesicRecord(word, length, group.abelianize(word), theta))
            a, b, c, d = m
            bad = inverse_index(last)
            for idx in range(first_idx, n):  # letters below first_idx never canonical
                if idx == bad:
                    continue
                dk = group.disks[idx]
                if abs(c) > 1e-14:
                    gap = abs(dk.center + d / c) - dk.radius
                    min_len = 2.0 * math.log(abs(c) * gap)
                else:
                    min_len = 2.0 * math.log(abs(d))
                if min_len > L:
                    continue
                ma, mb, mc, md = mats[idx]
                child = (a * ma + b * mc, a * mb + b * md,
                         c * ma + d * mc, c * mb + d * md)
                stack.append((word + (letter_of_index(idx),), child, idx))
    return count
