"""The acceptance suite: one named check per criterion, each returning a
result record with pass/fail, measured values, and elapsed time.  Both the
pytest suite and `covercount verify-all` run these."""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from . import census as cen
from . import schottky as sk
from . import shift as sh
from . import stats as st
from . import transfer as tr
from .groupfile import load_any, load_group
from .hyperbolic import geodesic_invariants
from .reporting import ReportWriter


@dataclass
class CriterionResult:
    cid: str
    name: str
    passed: bool
    details: dict
    seconds: float


@dataclass
class Budget:
    """Run sizes; 'small' is the reference scale the criteria are stated at."""

    name: str = "small"
    orbit_T: float = 13.0
    slope_T: float = 12.5
    geodesic_lo: float = 6.0
    geodesic_L: float = 18.5
    geodesic_checkpoints: int = 16
    holonomy_L: float = 17.0
    vector_logT: float = 13.5
    clt_traj: int = 10_000
    clt_steps: int = 10_000
    coding_len: int = 8

    @classmethod
    def preset(cls, name: str) -> "Budget":
        if name == "small":
            return cls()
        if name == "smoke":  # development only; NOT the acceptance scale
            return cls(name="smoke", orbit_T=10.0, slope_T=10.0, geodesic_lo=5.0,
                       geodesic_L=14.0, geodesic_checkpoints=10,
                       holonomy_L=14.0, vector_logT=11.0, clt_traj=1200,
                       clt_steps=2000, coding_len=5)
        raise ValueError(f"unknown budget {name!r}")


class Workspace:
    """Lazy shared fixture data (groups, shifts, spectra) for the criteria."""

    def __init__(self, budget: Budget, seed: int = 1):
        self.budget = budget
        self.seed = seed

    @cached_property
    def toy2(self):
        return load_any("fixture:toy2")

    @cached_property
    def toy2_spec(self):
        return tr.OperatorSpec(self.toy2)

    @cached_property
    def group_b(self):
        return load_group("fixture:b")

    @cached_property
    def shift_b(self):
        return sh.from_schottky(self.group_b)

    @cached_property
    def spec_b(self):
        return tr.OperatorSpec(self.shift_b, nodes_per_disk=24)

    @cached_property
    def delta_b(self) -> float:
        return tr.critical_exponent(self.spec_b)

    @cached_property
    def surface_b(self):
        return tr.pressure_surface(self.spec_b)

    @cached_property
    def group_c(self):
        return load_group("fixture:c")

    @cached_property
    def spec_c(self):
        return tr.OperatorSpec(sh.from_schottky(self.group_c), nodes_per_disk=20)

    @cached_property
    def delta_c(self) -> float:
        return tr.critical_exponent(self.spec_c)

    @cached_property
    def surface_c(self):
        return tr.pressure_surface(self.spec_c)

    @cached_property
    def group_d0(self):
        return load_group("fixture:d0")


def _result(cid, name, passed, details, t0) -> CriterionResult:
    return CriterionResult(cid, name, bool(passed), details, round(time.time() - t0, 3))


def c01_toy_closed_forms(ws: Workspace) -> CriterionResult:
    t0 = time.time()
    spec = ws.toy2_spec
    delta = tr.critical_exponent(spec)
    d_err = abs(delta - math.log(2.0))
    p_err = max(abs(tr.pressure(spec, [u]) - math.log(2.0 * math.cosh(u)))
                for u in np.linspace(-1.0, 1.0, 9))
    surf = tr.pressure_surface(spec)
    s_err = abs(surf.sigma - 1.0)
    c_err = abs(surf.c0 - math.sqrt(2.0 * math.pi))
    passed = d_err < 1e-12 and p_err < 1e-10 and s_err < 1e-6 and c_err < 1e-6
    return _result("C1", "toy closed forms (delta, P, sigma, C0)", passed,
                   {"delta_err": d_err, "pressure_err": p_err,
                    "sigma_err": s_err, "c0_err": c_err}, t0)


def c02_coding_correctness(ws: Workspace) -> CriterionResult:
    t0 = time.time()
    group = ws.group_b
    letters = [sk.letter_of_index(i) for i in range(group.n_symbols)]
    worst, n_classes = 0.0, 0
    for n in range(1, ws.budget.coding_len + 1):
        for word in itertools.product(letters, repeat=n):
            if not sk.is_cyclically_reduced(word):
                continue
            if word != sk.canonical_rotation(word) or not sk.is_primitive(word):
                continue
            n_classes += 1
            ell = geodesic_invariants(group.evaluate(word)).length
            worst = max(worst, abs(sh.cycle_roof_sum(group, word) - ell))
    return _result("C2", "roof sums equal translation lengths", worst < 1e-6,
                   {"max_error": worst, "classes_checked": n_classes,
                    "max_word_length": ws.budget.coding_len}, t0)


def _orbit_report(ws: Workspace, group, delta, sigma, T):
    cps = cen.checkpoints_linear(5.0, T, 12)
    pred = cen.Prediction(delta=delta, sigma=sigma, d=group.d)
    return cps, cen.orbit_by_homology(group, pred, T, cps)


def c03_two_method_delta(ws: Workspace) -> CriterionResult:
    t0 = time.time()
    details = {}
    passed = True
    for tag, group, delta in (("b", ws.group_b, ws.delta_b),
                              ("c", ws.group_c, ws.delta_c)):
        T = ws.budget.slope_T
        cps, rep = _orbit_report(ws, group, delta, 1.0, T)
        half = len(cps) // 2
        fit = cen.fit_growth(cps[half:], rep.totals[half:], fix_log_power=0.0)
        err = abs(fit.exponent - delta)
        details[f"delta_{tag}"] = delta
        details[f"slope_{tag}"] = fit.exponent
        details[f"err_{tag}"] = err
        passed = passed and err < 2e-2
    return _result("C3", "transfer delta vs orbit-growth slope", passed, details, t0)


def c04_pressure_structure(ws: Workspace) -> CriterionResult:
    t0 = time.time()
    details = {}
    passed = True
    for tag, spec, delta, surf in (("b", ws.spec_b, ws.delta_b, ws.surface_b),
                                   ("c", ws.spec_c, ws.delta_c, ws.surface_c)):
        lam = tr.leading_eigenvalue(spec, delta).lam
        lam_err = abs(lam - 1.0)
        grad_inf = float(np.max(np.abs(surf.gradient)))
        spd = float(np.min(np.linalg.eigvalsh(surf.hessian)))
        d = spec.shift.d
        sym_err = 0.0
        for u in np.eye(d) * 0.4:
            sym_err = max(sym_err, abs(tr.pressure(spec, u) - tr.pressure(spec, -u)))
        if d > 1:
            u = np.full(d, 0.3)
            sym_err = max(sym_err, abs(tr.pressure(spec, u) - tr.pressure(spec, -u)))
        ok = lam_err < 1e-8 and grad_inf < 1e-4 and spd > 0 and sym_err < 1e-8
        details[tag] = {"lambda_err": lam_err, "grad_inf": grad_inf,
                        "hessian_min_eig": spd, "pressure_symmetry_err": sym_err,
                        "sigma": surf.sigma}
        passed = passed and ok
    return _result("C4", "pressure surface structure and symmetry", passed, details, t0)


def c05_spectral_gap_scan(ws: Workspace) -> CriterionResult:
    t0 = time.time()
    spec48 = tr.OperatorSpec(ws.shift_b, nodes_per_disk=48)
    delta = tr.critical_exponent(spec48)
    t_grid = np.linspace(0.05, 5.0, 25)
    v_grid = [[x] for x in np.linspace(0.0, 2.0 * math.pi, 16, endpoint=False)]
    rep = tr.spectral_radius_scan(spec48, delta, t_grid, v_grid, p_list=[0])
    gap_ok = rep.max_abs_lambda() <= 1.0 - 1e-3 and not rep.violations
    # arithmetic positive control: constant roof c = 1 must be flagged at 2 pi / c
    toy_delta = tr.critical_exponent(ws.toy2_spec)
    control = tr.spectral_radius_scan(ws.toy2_spec, toy_delta,
                                      [2.0 * math.pi], [[0.0]], p_list=[0])
    flagged = any(abs(r.t - 2.0 * math.pi) < 1e-12 and r.violation for r in control.rows)
    return _result("C5", "spectral gap scan + arithmetic control",
                   gap_ok and flagged,
                   {"max_abs_lambda": rep.max_abs_lambda(),
                    "violations": len(rep.violations),
                    "control_flagged": flagged}, t0)


def c06_local_mixing_counts(ws: Workspace) -> CriterionResult:
    t0 = time.time()
    T = ws.budget.orbit_T
    delta = ws.delta_b
    cps, rep = _orbit_report(ws, ws.group_b, delta, ws.surface_b.sigma, T)
    c0 = rep.counts[(0,)]
    corr = c0 * np.exp(-delta * cps) * np.sqrt(cps)
    plateau = float(corr[-3:].max() / corr[-3:].min() - 1.0)
    allc = rep.meta["all_classes"]
    symmetric = all(np.array_equal(allc[key], allc[tuple(-x for x in key)])
                    for key in allc)
    return _result("C6", "local-mixing orbit law and count symmetry",
                   plateau < 0.10 and symmetric,
                   {"plateau": plateau, "symmetric": symmetric,
                    "N0_top": int(c0[-1]), "T_max": T}, t0)


def c07_prime_geodesic_theorem(ws: Workspace) -> CriterionResult:
    t0 = time.time()
    L = ws.budget.geodesic_L
    delta, sigma = ws.delta_b, ws.surface_b.sigma
    cps = cen.checkpoints_linear(ws.budget.geodesic_lo, L,
                                 ws.budget.geodesic_checkpoints)
    pred = cen.Prediction(delta=delta, sigma=sigma, d=1)
    rep = cen.geodesics_by_homology(ws.group_b, pred, L, cps)
    ratios = rep.ratios[(0,)]
    top_ok = 0.7 <= ratios[-1] <= 1.3
    trend_p = st.trend_test(np.abs(ratios - 1.0))
    # d = 0 control: same disks, trivial cover, classical e^{dL}/(dL) law
    group0 = sk.SchottkyGroup(ws.group_b.generators,
                              [ws.group_b.disks[sk.sym_index(-(i + 1))] for i in range(ws.group_b.g)],
                              [ws.group_b.disks[sk.sym_index(i + 1)] for i in range(ws.group_b.g)],
                              [], ws.group_b.model)
    rep0 = cen.geodesics_by_homology(group0, cen.Prediction(delta=delta, sigma=1.0, d=0), L, cps)
    control = float(rep0.ratios[()][-1])
    control_ok = 0.7 <= control <= 1.3
    passed = top_ok and trend_p < 0.05 and control_ok
    return _result("C7", "prime geodesic theorem with homology (absolute constant)",
                   passed,
                   {"top_ratio": float(ratios[-1]), "trend_p": float(trend_p),
                    "d0_control_ratio": control, "N0_top": int(rep.counts[(0,)][-1]),
                    "sigma": sigma, "L_max": L}, t0)


def c08_clt_homology_cocycle(ws: Workspace) -> CriterionResult:
    t0 = time.time()
    spec = ws.spec_b
    delta = ws.delta_b
    sr = tr.leading_eigenvalue(spec, delta, want_measure=True)
    chain = sh.parry_chain(ws.shift_b, sr)
    tau, f = sh.sample_cocycle_batch(chain, ws.shift_b, ws.budget.clt_steps,
                                     ws.budget.clt_traj, ws.seed, spectral=sr,
                                     batch=4096)
    z = f[:, 0] / np.sqrt(tau)
    sigma = ws.surface_b.sigma
    var_err = abs(float(z.var()) / sigma - 1.0)
    chk = st.clt_check(z, np.array([[sigma]]))
    passed = var_err < 0.10 and chk.min_ks_p() > 0.01
    return _result("C8", "CLT for the homology cocycle", passed,
                   {"var_rel_err": var_err, "ks_p": chk.min_ks_p(),
                    "chi2_p": chk.chi2_p, "trajectories": ws.budget.clt_traj,
                    "steps": ws.budget.clt_steps, "sigma": sigma}, t0)


def c09_holonomy_equidistribution(ws: Workspace) -> CriterionResult:
    t0 = time.time()
    L = ws.budget.holonomy_L
    cps = cen.checkpoints_linear(9.0, L, 8)
    rep = cen.holonomy_equidistribution(ws.group_d0, L, [1, 2, 3], cps)
    tops = {p: float(rep.ratios[p][-1]) for p in (1, 2, 3)}
    passed = all(v < 0.1 for v in tops.values())
    return _result("C9", "holonomy character sums equidistribute", passed,
                   {"top_ratios": tops, "classes": int(rep.totals[-1]), "L_max": L}, t0)


def c10_vector_orbit(ws: Workspace) -> CriterionResult:
    t0 = time.time()
    delta = ws.delta_b
    cps = np.exp(np.linspace(6.0, ws.budget.vector_logT, 12))
    pred = cen.Prediction(delta=delta, sigma=1.0, d=1)
    rep = cen.vector_orbit(ws.group_b, pred, [1.0, 0.0, 1.0], float(cps[-1]), cps,
                           disp_pad=4.0)
    cts = rep.counts["vectors"]
    half = len(cps) // 2
    fit = cen.fit_growth(np.log(cps)[half:], cts[half:], fix_log_power=-0.5)
    exp_err = abs(fit.exponent - delta)
    corr = cts * cps ** (-delta) * np.sqrt(np.log(cps))
    plateau = float(corr[-3:].max() / corr[-3:].min() - 1.0)
    passed = exp_err < 0.05 and plateau < 0.15
    return _result("C10", "vector-orbit counting exponent and plateau", passed,
                   {"exponent": fit.exponent, "exponent_err": exp_err,
                    "plateau": plateau, "top_count": int(cts[-1]),
                    "stabilizer_hits": rep.meta["stabilizer_hits"]}, t0)


def c11_determinism(ws: Workspace, out_dir=None) -> CriterionResult:
    import tempfile
    t0 = time.time()
    base = out_dir or tempfile.mkdtemp(prefix="covercount-det-")
    hashes = []
    for run in ("run1", "run2"):
        w = ReportWriter(f"{base}/{run}", "determinism-probe",
                         {"seed": ws.seed, "budget": ws.budget.name})
        spec = tr.OperatorSpec(load_any("fixture:toy2"))
        delta = tr.critical_exponent(spec)
        sr = tr.leading_eigenvalue(spec, delta, want_measure=True)
        chain = sh.parry_chain(load_any("fixture:toy2"), sr)
        tau, f = sh.sample_cocycle_batch(chain, load_any("fixture:toy2"),
                                         500, 64, ws.seed)
        group = load_group("fixture:b")
        cps = cen.checkpoints_linear(4.0, 8.0, 6)
        rep = cen.orbit_by_homology(group, cen.Prediction(delta, 1.0, 1), 8.0, cps)
        w.write_json("summary.json", {
            "delta": delta,
            "tau_head": tau[:8].tolist(),
            "f_head": f[:8, 0].tolist(),
            "totals": rep.totals.tolist(),
        })
        from .reporting import census_csv_rows
        w.write_csv("orbit.csv", *census_csv_rows(rep))
        manifest = w.finish({"group": group.fingerprint()})
        hashes.append(manifest["manifest_sha256"])
    passed = hashes[0] == hashes[1]
    return _result("C11", "byte-identical report manifests across reruns", passed,
                   {"hashes": hashes}, t0)


ALL_CRITERIA: list[Callable[[Workspace], CriterionResult]] = [
    c01_toy_closed_forms,
    c02_coding_correctness,
    c03_two_method_delta,
    c04_pressure_structure,
    c05_spectral_gap_scan,
    c06_local_mixing_counts,
    c07_prime_geodesic_theorem,
    c08_clt_homology_cocycle,
    c09_holonomy_equidistribution,
    c10_vector_orbit,
    c11_determinism,
]


def run_all(budget: str = "small", seed: int = 1,
            progress: Optional[Callable[[CriterionResult], None]] = None) -> list[CriterionResult]:
    """Run every criterion; an exception fails that criterion, not the suite."""
    from .errors import CovercountError
    ws = Workspace(Budget.preset(budget), seed=seed)
    results = []
    for i, fn in enumerate(ALL_CRITERIA, 1):
        t0 = time.time()
        try:
            res = fn(ws)
        except CovercountError as exc:
            res = CriterionResult(f"C{i}", fn.__name__, False,
                                  {"error": f"{type(exc).__name__}: {exc}"},
                                  round(time.time() - t0, 3))
        results.append(res)
        if progress is not None:
            progress(res)
    return results
