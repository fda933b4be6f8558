"""Censuses: binned orbit/geodesic statistics compared against the predicted
asymptotics (local-mixing orbit law, prime geodesic theorem with homology,
holonomy equidistribution, vector-orbit counting)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import schottky as sk
from . import hyperbolic as hyp
from .errors import InsufficientData, ValidationError
from .schottky import SchottkyGroup


@dataclass(frozen=True)
class Prediction:
    """Growth-law inputs; sigma enters only the absolute geodesic constant."""

    delta: float
    sigma: float
    d: int
    mode: str = "UpToConstant"  # or "Absolute"

    def __post_init__(self):
        if self.delta <= 0 or self.sigma <= 0 or self.d < 0:
            raise ValidationError("prediction needs delta > 0, sigma > 0, d >= 0")


@dataclass
class CensusReport:
    kind: str
    checkpoints: np.ndarray
    counts: dict                      # class key -> cumulative counts
    predictions: dict                 # class key -> predicted reals
    ratios: dict                      # class key -> observed / predicted
    totals: np.ndarray
    meta: dict = field(default_factory=dict)

    def table_rows(self):
        rows = []
        for key in sorted(self.counts):
            cts = self.counts[key]
            preds = self.predictions.get(key)
            rats = self.ratios.get(key)
            for i, T in enumerate(self.checkpoints):
                rows.append({
                    "checkpoint": float(T),
                    "class": "|".join(str(x) for x in key) if isinstance(key, tuple) else str(key),
                    "count": float(cts[i]),
                    "predicted": float(preds[i]) if preds is not None else float("nan"),
                    "ratio": float(rats[i]) if rats is not None else float("nan"),
                })
        return rows


def checkpoints_linear(t_min: float, t_max: float, count: int) -> np.ndarray:
    """Equal steps in T, i.e. geometric spacing of the expected counts e^T."""
    if count < 2 or t_max <= t_min:
        raise ValidationError("need at least two increasing checkpoints")
    return np.linspace(t_min, t_max, count)


def _safe_ratio(counts, preds):
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(preds > 0, counts / np.where(preds > 0, preds, 1.0), np.nan)
    return out


def _fit_constant(checkpoints, counts, law, calibration_half=True) -> float:
    """One multiplicative constant, least squares in log space on the first
    half of the checkpoints (falling back to all of them for sparse classes)."""
    n = len(checkpoints)

    def window_logs(idx):
        return [math.log(counts[i] / law(checkpoints[i]))
                for i in idx if counts[i] > 0 and law(checkpoints[i]) > 0]

    logs = window_logs(range(n // 2) if calibration_half else range(n))
    if not logs:
        logs = window_logs(range(n))
    if not logs:
        raise InsufficientData("no positive counts to calibrate against")
    return math.exp(sum(logs) / len(logs))


def orbit_by_homology(group: SchottkyGroup, prediction: Prediction, T_max: float,
                      checkpoints: Sequence[float],
                      classes: Optional[Sequence[tuple]] = None,
                      budget: Optional[int] = None,
                      threads: int = 1) -> CensusReport:
    """N_xi(T) for requested homology classes vs c e^{delta T} / T^{d/2}."""
    if group.d < 1:
        raise ValidationError("orbit census by homology needs d >= 1")
    cps = np.asarray(sorted(float(t) for t in checkpoints))
    if cps[-1] > T_max:
        raise ValidationError("checkpoints exceed T_max")
    ncp = len(cps)
    by_class: dict = {}
    totals = np.zeros(ncp, dtype=np.int64)

    def take(rec: sk.OrbitRecord):
        i = int(np.searchsorted(cps, rec.displacement, side="left"))
        if i == ncp:
            return
        arr = by_class.get(rec.homology)
        if arr is None:
            arr = by_class.setdefault(rec.homology, np.zeros(ncp, dtype=np.int64))
        arr[i] += 1
        totals[i] += 1

    sk.enumerate_orbit(group, T_max, emit=take, budget=budget, threads=threads)
    for arr in by_class.values():
        np.cumsum(arr, out=arr)
    np.cumsum(totals, out=totals)

    delta, d = prediction.delta, prediction.d
    law = lambda T: math.exp(delta * T) / T ** (d / 2.0) if T > 0 else 0.0
    wanted = [tuple(int(x) for x in c) for c in classes] if classes is not None else sorted(by_class)
    counts, preds, ratios = {}, {}, {}
    for key in wanted:
        cts = by_class.get(key, np.zeros(ncp, dtype=np.int64))
        counts[key] = cts
        c = _fit_constant(cps, cts, law)
        pr = np.array([c * law(T) for T in cps])
        preds[key] = pr
        ratios[key] = _safe_ratio(cts, pr)
    meta = {"delta": delta, "d": d, "constant_mode": "UpToConstant",
            "group": group.fingerprint(), "all_classes": {key: by_class[key] for key in sorted(by_class)}}
    return CensusReport("OrbitByHomology", cps, counts, preds, ratios, totals, meta)


def geodesics_by_homology(group: SchottkyGroup, prediction: Prediction, L_max: float,
                          checkpoints: Sequence[float],
                          budget: Optional[int] = None) -> CensusReport:
    """Primitive-class counts: the trivial class against the absolute law
    e^{delta L} / ((2 pi sigma)^{d/2} delta L^{d/2+1}); for d = 0 the total
    count against e^{delta L} / (delta L)."""
    cps = np.asarray(sorted(float(t) for t in checkpoints))
    ncp = len(cps)
    by_class: dict = {}
    totals = np.zeros(ncp, dtype=np.int64)

    def take(rec: sk.GeodesicRecord):
        i = int(np.searchsorted(cps, rec.length, side="left"))
        if i == ncp:
            return
        arr = by_class.get(rec.homology)
        if arr is None:
            arr = by_class.setdefault(rec.homology, np.zeros(ncp, dtype=np.int64))
        arr[i] += 1
        totals[i] += 1

    sk.primitive_classes(group, float(cps[-1]), emit=take, budget=budget)
    for arr in by_class.values():
        np.cumsum(arr, out=arr)
    np.cumsum(totals, out=totals)

    delta, sigma, d = prediction.delta, prediction.sigma, prediction.d
    if d == 0:
        law = lambda L: math.exp(delta * L) / (delta * L)
        zero_counts = totals.copy()
    else:
        coef = (2.0 * math.pi * sigma) ** (d / 2.0)
        law = lambda L: math.exp(delta * L) / (coef * delta * L ** (d / 2.0 + 1.0))
        zero_counts = by_class.get((0,) * d, np.zeros(ncp, dtype=np.int64))
    key = (0,) * d
    preds = {key: np.array([law(L) for L in cps])}
    counts = dict(by_class) if d else {key: zero_counts}
    ratios = {key: _safe_ratio(zero_counts, preds[key])}
    meta = {"delta": delta, "sigma": sigma, "d": d, "constant_mode": "Absolute",
            "group": group.fingerprint()}
    return CensusReport("GeodesicByHomology", cps, counts, preds, ratios, totals, meta)


def holonomy_equidistribution(group: SchottkyGroup, L_max: float,
                              p_list: Sequence[int],
                              checkpoints: Sequence[float],
                              budget: Optional[int] = None) -> CensusReport:
    """Normalized character sums |sum e^{i p theta_C}| / #classes per
    checkpoint; class functions with zero mean must equidistribute to 0."""
    if group.model != hyp.Model.H3:
        raise ValidationError("holonomy census needs the H3 model")
    cps = np.asarray(sorted(float(t) for t in checkpoints))
    ncp = len(cps)
    sums = {int(p): np.zeros(ncp, dtype=complex) for p in p_list}
    totals = np.zeros(ncp, dtype=np.int64)

    def take(rec: sk.GeodesicRecord):
        i = int(np.searchsorted(cps, rec.length, side="left"))
        if i == ncp:
            return
        totals[i] += 1
        for p in sums:
            sums[p][i] += np.exp(1j * p * rec.holonomy)

    sk.primitive_classes(group, float(cps[-1]), emit=take, budget=budget)
    np.cumsum(totals, out=totals)
    counts, preds, ratios = {}, {}, {}
    for p in sorted(sums):
        csum = np.cumsum(sums[p])
        counts[p] = np.abs(csum)
        preds[p] = totals.astype(float)
        ratios[p] = _safe_ratio(np.abs(csum), totals.astype(float))
    meta = {"group": group.fingerprint(), "p_list": sorted(int(p) for p in p_list)}
    return CensusReport("HolonomyHistogram", cps, counts, preds, ratios, totals, meta)


def vector_orbit(group: SchottkyGroup, prediction: Prediction, w0: Sequence[float],
                 T_max: float, checkpoints: Sequence[float],
                 norm: str = "euclidean", disp_pad: float = 4.0,
                 budget: Optional[int] = None,
                 threads: int = 1) -> CensusReport:
    """#{v in w0 Gamma : ||v|| <= T} for the kernel subgroup (f = 0 words)
    under the adjoint SO(2,1) action, vs c T^delta / (log T)^{d/2}.

    Words are enumerated out to displacement log(T_max / floor) + disp_pad;
    vectors are deduplicated, and coincidences from distinct words are
    reported in meta["stabilizer_hits"] rather than double counted.
    """
    if group.model != hyp.Model.H2:
        raise ValidationError("vector orbit census needs the H2 model")
    w0 = np.asarray(w0, dtype=float)
    if w0.shape != (3,):
        raise ValidationError("w0 must be a 3-vector")
    cps = np.asarray(sorted(float(t) for t in checkpoints))
    ncp = len(cps)
    if cps[-1] > T_max * (1.0 + 1e-12):
        raise ValidationError("checkpoints exceed T_max")
    norm_fn = {"euclidean": lambda v: float(np.linalg.norm(v)),
               "sup": lambda v: float(np.max(np.abs(v)))}[norm]
    w0n = norm_fn(w0)
    disp_cap = math.log(T_max / w0n) + disp_pad if T_max > w0n else disp_pad
    seen: dict = {}
    hits = 0
    new_counts = np.zeros(ncp, dtype=np.int64)

    def take(rec: sk.OrbitRecord):
        nonlocal hits
        if any(rec.homology):
            return
        mat = group.evaluate(rec.word)
        vec = w0 @ hyp.adjoint_so21(mat)
        r = norm_fn(vec)
        if r > cps[-1]:
            return
        key = tuple(np.round(vec / max(r, 1e-12), 9)) + (round(r, 9),)
        if key in seen:
            hits += 1
            return
        seen[key] = True
        new_counts[int(np.searchsorted(cps, r, side="left"))] += 1

    sk.enumerate_orbit(group, disp_cap, emit=take, budget=budget, threads=threads)
    counts_arr = np.cumsum(new_counts)
    delta, d = prediction.delta, prediction.d
    law = lambda T: T ** delta / (math.log(T) ** (d / 2.0)) if T > 1.0 else 0.0
    try:
        c = _fit_constant(cps, counts_arr, law)
    except InsufficientData:
        c = 0.0  # nothing in range (e.g. all checkpoints below ||w0||)
    key = "vectors"
    preds = {key: np.array([c * law(T) for T in cps])}
    ratios = {key: _safe_ratio(counts_arr, preds[key])}
    meta = {"delta": delta, "d": d, "norm": norm, "w0": w0.tolist(),
            "disp_cap": disp_cap, "stabilizer_hits": hits,
            "constant_mode": "UpToConstant", "group": group.fingerprint()}
    return CensusReport("VectorNorm", cps, {key: counts_arr}, preds, ratios,
                        counts_arr, meta)


@dataclass
class GrowthFit:
    exponent: float
    log_power: float
    constant: float
    plateau: float


def fit_growth(xs: Sequence[float], counts: Sequence[float],
               fix_exponent: Optional[float] = None,
               fix_log_power: Optional[float] = None) -> GrowthFit:
    """Least squares for log N = const + exponent * x + log_power * log x.

    Either coefficient may be pinned.  The plateau diagnostic is the max
    pairwise relative deviation of the corrected counts over the last three
    checkpoints.
    """
    xs = np.asarray(xs, dtype=float)
    counts = np.asarray(counts, dtype=float)
    if len(xs) < 5:
        raise InsufficientData("growth fits need >= 5 checkpoints")
    if np.any(counts <= 0):
        raise InsufficientData("growth fits need positive counts")
    if np.any(xs <= 0):
        raise InsufficientData("growth fits need positive checkpoints")
    y = np.log(counts)
    cols = [np.ones_like(xs)]
    if fix_exponent is None:
        cols.append(xs)
    else:
        y = y - fix_exponent * xs
    if fix_log_power is None:
        cols.append(np.log(xs))
    else:
        y = y - fix_log_power * np.log(xs)
    A = np.column_stack(cols)
    sol, *_ = np.linalg.lstsq(A, y, rcond=None)
    const = float(sol[0])
    i = 1
    if fix_exponent is None:
        exponent = float(sol[i]); i += 1
    else:
        exponent = float(fix_exponent)
    log_power = float(sol[i]) if fix_log_power is None else float(fix_log_power)
    corrected = counts * np.exp(-exponent * xs) * xs ** (-log_power)
    tail = corrected[-3:]
    plateau = float(tail.max() / tail.min() - 1.0)
    return GrowthFit(exponent=exponent, log_power=log_power,
                     constant=math.exp(const), plateau=plateau)
