"""Experiment suites.  Each returns a SuiteResult with named checks, CSV tables and plot data."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import constructions as cons
from .config import RunConfig
from .estimator import (
    EstimatorConfig,
    displacement_energy,
    estimate_energy,
    flux0_check,
)
from .functionals import calabi, hofer_length, hoferlike_length, scaling_law
from .hodge import harmonic_projection, hodge_decompose, norm_equivalence_constants
from .isotopy import (
    GeneratorPath,
    compose_paths,
    concatenate_generators,
    concatenate_left,
    flux_cohomological,
    flux_definition,
    harmonic_flow_generator,
    harmonic_generator,
    integrate_generator,
    loop_residual,
)
from .lattice import duality_bounds, iterate_distances, energy_floor
from .torus import TorusGrid, exterior_derivative


@dataclass
class SuiteResult:
    name: str
    checks: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    plots: dict = field(default_factory=dict)

    def check(self, criterion: str, passed: bool, **detail):
        self.checks.append({"criterion": criterion, "pass": bool(passed), **detail})

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c["pass"]]


def _rng(cfg: RunConfig, salt: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, salt])


def _map(fn, items, parallel: int):
    """Ordered map; fans out to processes when ``parallel`` > 1."""
    items = list(items)
    if parallel <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=parallel) as ex:
        return list(ex.map(fn, items))


def random_generator(rng: np.random.Generator, grid: TorusGrid, T: int,
                     hamiltonian: bool = False, amp: float = 0.02, modes: int = 3,
                     max_gradient: float = 2.0) -> GeneratorPath:
    """Smooth random generator: a few Fourier modes with (1, t, sin pi t) time profiles.

    U is scaled down when needed so that sup |DX| <= ``max_gradient``; the
    flows then stretch by at most about e^max_gradient and stay resolved.
    """
    ks = rng.integers(-2, 3, size=(modes, 2))
    ks[np.all(ks == 0, axis=1)] = (1, 0)
    coef = rng.uniform(-amp, amp, size=(modes, 3))
    phase = rng.uniform(0.0, 2.0 * np.pi, size=modes)
    h = rng.uniform(-0.3, 0.3, size=(3, 2))
    X, Y = grid.mesh
    t = np.linspace(0.0, 1.0, T + 1)
    prof = coef[:, 0, None] + coef[:, 1, None] * t + coef[:, 2, None] * np.sin(np.pi * t)
    spatial = np.stack([np.cos(2.0 * np.pi * (k[0] * X + k[1] * Y) + ph) for k, ph in zip(ks, phase)])
    U = np.einsum("mt,mxy->txy", prof, spatial)
    # DX is the Hessian of U up to sign and order; sup over entries, exact for these modes
    grad = 0.0
    for a, b in ((0, 0), (0, 1), (1, 1)):
        w = (2.0 * np.pi) ** 2 * ks[:, a] * ks[:, b]
        grad = max(grad, float(np.max(np.abs(np.einsum("mt,mxy->txy", prof * w[:, None], spatial)))))
    if grad > max_gradient:
        U *= max_gradient / grad
    if hamiltonian:
        H = np.zeros((T + 1, 2))
    else:
        H = h[0] + h[1] * t[:, None] + h[2] * np.sin(np.pi * t)[:, None]
    return GeneratorPath.build(U, H)


def estimator_config(cfg: RunConfig) -> EstimatorConfig:
    e = cfg["estimator"]
    return EstimatorConfig(M_cut=e["M_cut"], n_temporal=e["temporal"], budget=e["budget"],
                           restarts=e["restarts"], seed=e["seed"],
                           endpoint_tol=cfg["tolerances"]["endpoint"],
                           substeps=cfg["grid"]["substeps"])


# ---------------------------------------------------------------------------

def suite_hodge(cfg: RunConfig, parallel: int = 1) -> SuiteResult:
    res = SuiteResult("hodge")
    grid = TorusGrid(cfg.N)
    rng = _rng(cfg, 1)
    X, Y = grid.mesh
    tol = cfg["tolerances"]["closed"]
    rows = []
    for i in range(100):
        k = rng.integers(-6, 7, size=(6, 2))
        c = rng.normal(size=6) / (1.0 + np.sum(k * k, axis=1))
        ph = rng.uniform(0.0, 2.0 * np.pi, size=6)
        U = sum(ci * np.cos(2.0 * np.pi * (kk[0] * X + kk[1] * Y) + p) for ci, kk, p in zip(c, k, ph))
        U = U - U.mean()
        H = rng.uniform(-1.0, 1.0, size=2)
        alpha = exterior_derivative(U) + H[:, None, None]
        dec = hodge_decompose(alpha, tol)
        dU = exterior_derivative(dec.U)
        ortho = abs(float(np.mean(dU[0] * dec.H[0] + dU[1] * dec.H[1])))
        P = harmonic_projection(alpha)
        idem = float(np.max(np.abs(harmonic_projection(P) - P)))
        again = hodge_decompose(dec.harmonic_form())
        idem = max(idem, float(np.max(np.abs(again.H - dec.H))), float(np.max(np.abs(again.U))))
        rows.append({"form": i, "reconstruction": dec.residual, "orthogonality": ortho,
                     "idempotence": idem, "H_error": float(np.max(np.abs(dec.H - H)))})
    L0, L1 = norm_equivalence_constants()
    res.tables["forms"] = rows
    res.plots["residuals"] = [{"form": r["form"], "reconstruction": r["reconstruction"],
                               "orthogonality": r["orthogonality"]} for r in rows]
    res.check("reconstruction <= 1e-8", max(r["reconstruction"] for r in rows) <= 1e-8,
              worst=max(r["reconstruction"] for r in rows))
    res.check("orthogonality <= 1e-9", max(r["orthogonality"] for r in rows) <= 1e-9,
              worst=max(r["orthogonality"] for r in rows))
    res.check("projection idempotent", max(r["idempotence"] for r in rows) <= 1e-12,
              worst=max(r["idempotence"] for r in rows))
    res.check("harmonic part recovered", max(r["H_error"] for r in rows) <= 1e-12,
              worst=max(r["H_error"] for r in rows))
    res.check("L0 = L1 = 1 within 1e-5", abs(L0 - 1.0) <= 1e-5 and abs(L1 - 1.0) <= 1e-5, L0=L0, L1=L1)
    return res


def _flux_row(args):
    i, gen = args
    path = integrate_generator(gen)
    return i, path, flux_definition(path), flux_cohomological(gen)


def suite_flux(cfg: RunConfig, parallel: int = 1) -> SuiteResult:
    res = SuiteResult("flux")
    grid = TorusGrid(cfg.N)
    rng = _rng(cfg, 2)
    gens = [random_generator(rng, grid, cfg.T, hamiltonian=(i % 3 == 0)) for i in range(30)]
    out = _map(_flux_row, list(enumerate(gens)), parallel)
    rows = []
    for i, path, fd, fc in out:
        rows.append({"path": i, "hamiltonian": gens[i].is_hamiltonian(), "flux_def_a": fd.a,
                     "flux_def_b": fd.b, "flux_coh_a": fc.a, "flux_coh_b": fc.b,
                     "difference": (fd - fc).norm})
    paths = [o[1] for o in out]
    comp_rows = []
    for k in range(0, 30, 2):
        phi, psi = paths[k], paths[k + 1]
        comp = flux_definition(compose_paths(psi, phi))
        conc = flux_definition(concatenate_left(psi, phi))
        expect = flux_cohomological(gens[k]) + flux_cohomological(gens[k + 1])
        comp_rows.append({"pair": k // 2, "composition_a": comp.a, "composition_b": comp.b,
                          "additivity_error": (comp - expect).norm,
                          "concatenation_error": (conc - comp).norm})
    res.tables["paths"] = rows
    res.tables["pairs"] = comp_rows
    res.plots["flux_agreement"] = [{"path": r["path"], "difference": r["difference"]} for r in rows]
    worst = max(r["difference"] for r in rows)
    res.check("flux_definition = flux_cohomological within 1e-5", worst <= 1e-5, worst=worst)
    ham = max(np.hypot(r["flux_def_a"], r["flux_def_b"]) for r in rows if r["hamiltonian"])
    res.check("Hamiltonian paths have flux <= 1e-5", ham <= 1e-5, worst=float(ham))
    add = max(r["additivity_error"] for r in comp_rows)
    res.check("flux additive under composition within 1e-5", add <= 1e-5, worst=add)
    cc = max(r["concatenation_error"] for r in comp_rows)
    res.check("concatenation flux = composition flux within 1e-5", cc <= 1e-5, worst=cc)
    return res


def suite_loop(cfg: RunConfig, parallel: int = 1) -> SuiteResult:
    res = SuiteResult("loop")
    grid = TorusGrid(cfg.N)
    tol = cfg["tolerances"]["loop"]
    rows = []
    for n in range(-2, 3):
        for m in range(-2, 3):
            for dn, dm in ((0.0, 0.0), (0.5, 0.0), (0.0, 0.5)):
                cls = (n + dn, m + dm)
                gen = harmonic_flow_generator(grid, cfg.T, *cls)
                r = loop_residual(integrate_generator(gen, cfg["grid"]["substeps"]))
                rows.append({"n": cls[0], "m": cls[1], "integer": dn == dm == 0.0, "residual": r})
    res.tables["classes"] = rows
    res.plots["residual"] = rows
    ints = [r["residual"] for r in rows if r["integer"]]
    halves = [r["residual"] for r in rows if not r["integer"]]
    res.check(f"integer classes are loops (residual <= {tol:g})", max(ints) <= tol, worst=max(ints))
    res.check("half-integer classes are not loops (residual >= 0.1)", min(halves) >= 0.1,
              worst=min(halves))
    return res


def suite_lengths(cfg: RunConfig, parallel: int = 1) -> SuiteResult:
    res = SuiteResult("lengths")
    grid = TorusGrid(cfg.N)
    rng = _rng(cfg, 4)
    ps = (1.0, 1.5, 2.0, 4.0, np.inf)
    rows, add_rows, cal_rows = [], [], []
    for i in range(50):
        gen = random_generator(rng, grid, cfg.T)
        vals = [hoferlike_length(gen, p).value for p in ps]
        f = flux_cohomological(gen).norm
        rows.append({"gen": i, **{f"l_1_{'inf' if np.isinf(p) else p}": v for p, v in zip(ps, vals)},
                     "flux_norm": f, "monotone": bool(np.all(np.diff(vals) >= -1e-12)),
                     "floor_margin": vals[2] - f})
    for i in range(10):
        a = random_generator(rng, grid, cfg.T)
        b = random_generator(rng, grid, cfg.T)
        whole = concatenate_generators(b, a)
        for p in (2.0, np.inf):
            lhs = hoferlike_length(whole, p).value
            rhs = hoferlike_length(a, p).value + hoferlike_length(b, p).value
            add_rows.append({"pair": i, "p": "inf" if np.isinf(p) else p, "concatenated": lhs,
                             "sum": rhs, "error": abs(lhs - rhs)})
    for i in range(100):
        gen = random_generator(rng, grid, cfg.T, hamiltonian=True, amp=0.05)
        # offsets that make every U_t + c_t vanish at some node
        idx = rng.integers(0, cfg.N, size=(cfg.T + 1, 2))
        off = -gen.U[np.arange(cfg.T + 1), idx[:, 0], idx[:, 1]]
        cal = calabi(gen, off)
        cal_rows.append({"gen": i, "calabi": cal, "hofer": hofer_length(gen).value})
    res.tables["exponents"] = rows
    res.tables["additivity"] = add_rows
    res.tables["calabi"] = cal_rows
    res.plots["floor"] = [{"flux_norm": r["flux_norm"], "l_1_2": r["l_1_2.0"]} for r in rows]
    worst_add = max(r["error"] for r in add_rows)
    res.check("concatenation additivity within 1e-3", worst_add <= 1e-3, worst=worst_add)
    res.check("l^(1,p) monotone in p", all(r["monotone"] for r in rows))
    floor = min(r["floor_margin"] for r in rows)
    res.check("||Flux|| <= l_HL^(1,2) + 1e-8", floor >= -1e-8, worst_margin=floor)
    cmargin = min(r["hofer"] - abs(r["calabi"]) for r in cal_rows)
    res.check("|Cal| <= l_H + 1e-9", cmargin >= -1e-9, worst_margin=cmargin)
    return res


def suite_scaling(cfg: RunConfig, parallel: int = 1) -> SuiteResult:
    res = SuiteResult("scaling")
    grid = TorusGrid(cfg.N)
    rng = _rng(cfg, 5)
    rows = []
    for i in range(5):
        gen = random_generator(rng, grid, cfg.T)
        for c in (0.5, 2.0, 5.0):
            for n in (1, 2, 3):
                r = scaling_law(gen, c, n)
                rows.append({"gen": i, "c": c, "n": n, "original": r.original,
                             "rescaled": r.rescaled, "ratio": r.rescaled / r.original,
                             "low": r.predicted_low, "high": r.predicted_high,
                             "exact_error": abs(r.rescaled - r.exact_dim2) if n == 1 else None})
    res.tables["scaling"] = rows
    res.plots["ratio"] = [{"c": r["c"], "n": r["n"], "ratio": r["ratio"]} for r in rows]
    e1 = max(r["exact_error"] for r in rows if r["n"] == 1)
    res.check("n = 1: rescaled = c * original within 1e-10", e1 <= 1e-10, worst=e1)
    inside = all(r["low"] - 1e-12 <= r["rescaled"] <= r["high"] + 1e-12 for r in rows if r["n"] > 1)
    res.check("n = 2, 3: rescaled within [min, max] bracket", inside)
    return res


TWOPARAM_CORPUS = {
    "constant-dy": lambda t: (0.0 * t, 1.0 + 0.0 * t),
    "constant-mixed": lambda t: (0.3 + 0.0 * t, -0.2 + 0.0 * t),
    "half-turn": lambda t: (np.cos(np.pi * t), np.sin(np.pi * t)),
    "linear": lambda t: (0.5 * t, 0.5 * (1.0 - t)),
    "wobble": lambda t: (0.5 * np.sin(2.0 * np.pi * t), 0.2 + 0.0 * t),
    "quadratic": lambda t: (0.2 + 0.3 * t * t, -0.4 * t),
    "full-turn": lambda t: (0.3 * np.cos(2.0 * np.pi * t), 0.3 * np.sin(2.0 * np.pi * t)),
    "beat": lambda t: (0.7 + 0.0 * t, 0.7 * np.cos(3.0 * np.pi * t)),
    "decay": lambda t: (0.4 * np.exp(-t), 0.1 + 0.0 * t),
    "fast": lambda t: (0.25 * (1.0 + np.sin(4.0 * np.pi * t)), 0.25 * np.cos(4.0 * np.pi * t)),
}


def _twoparam_row(args):
    name, S, N = args
    t = np.linspace(0.0, 1.0, S + 1)
    a, b = TWOPARAM_CORPUS[name](t)
    fam = cons.build_family(np.stack([a, b], axis=1), N=N)
    g = cons.gronwall_check(fam)
    o = cons.osc_bound_check(fam)
    x_norm = float(np.max(np.hypot(a, b)))
    return {"family": name, "sup_V": g["sup_V"], "N_hat": g["N_hat"], "K_hat": g["K_hat"],
            "gronwall_bound": g["bound"], "limit_case": g["limit_case"], "gronwall_pass": g["pass"],
            "osc": o["osc"], "osc_bound": o["bound"], "osc_pass": o["pass"], "sup_X": x_norm,
            "constant": bool(np.ptp(a) == 0.0 and np.ptp(b) == 0.0)}


def suite_twoparam(cfg: RunConfig, parallel: int = 1) -> SuiteResult:
    res = SuiteResult("twoparam")
    S = cfg["grid"]["S"]
    N = min(cfg.N, 64)
    rows = _map(_twoparam_row, [(name, S, N) for name in TWOPARAM_CORPUS], parallel)
    res.tables["families"] = rows
    res.plots["gronwall"] = [{"family": r["family"], "sup_V": r["sup_V"],
                              "bound": r["gronwall_bound"]} for r in rows]
    res.check("Gronwall bound holds", all(r["gronwall_pass"] for r in rows))
    res.check("osc F <= 4 L0 supV supX_HL + 1e-6", all(r["osc_pass"] for r in rows))
    const = [abs(r["sup_V"] - r["sup_X"] / 4.0) for r in rows if r["constant"]]
    res.check("constant X gives sup|V| = |X| / 4", max(const) <= 1e-6, worst=max(const))
    return res


def suite_fragment(cfg: RunConfig, parallel: int = 1) -> SuiteResult:
    res = SuiteResult("fragment")
    grid = TorusGrid(cfg.N)
    T = cfg.T
    t = np.linspace(0.0, 1.0, T + 1)
    H = np.stack([np.cos(np.pi * t), np.sin(np.pi * t)], axis=1)
    plan = cons.fragment(H, K=50, eps=0.01)
    fc = cons.fragment_flux_check(plan)
    supH = float(np.max(np.hypot(H[:, 0], H[:, 1])))
    rows = []
    for k in range(1, plan.K + 1):
        lk = hoferlike_length(cons.piece_generator(plan, k, grid), 2.0, "(inf,p)").value
        rows.append({"k": k, "weight": plan.weights[k - 1], "l_inf_HL": lk,
                     "predicted": plan.weights[k - 1] * supH,
                     "flux_distance": float(fc["distance"][k - 1])})
    rec = cons.fragment_recovery_error(plan, grid, cfg["grid"]["substeps"])
    res.tables["pieces"] = rows
    res.plots["piece_lengths"] = [{"k": r["k"], "l_inf_HL": r["l_inf_HL"]} for r in rows]
    res.check("weights sum to 1 within 1e-12", abs(fc["weight_sum"] - 1.0) <= 1e-12,
              weight_sum=fc["weight_sum"])
    res.check("harmonic parts sum to the family", fc["harmonic_sum_error"] <= 1e-14,
              error=fc["harmonic_sum_error"])
    per = max(abs(r["l_inf_HL"] - r["predicted"]) for r in rows)
    res.check("per-piece l_inf_HL = nu_k sup|H| within 1e-12", per <= 1e-12, worst=per)
    res.check("recovered generator of composed pieces matches H within 2e-3",
              rec["harmonic_error"] <= 2e-3, error=rec["harmonic_error"])
    lens = np.array([r["l_inf_HL"] for r in rows])
    res.check("piece lengths decrease monotonically to below eps",
              bool(np.all(np.diff(lens) <= 0.0) and lens[plan.N0 - 1:].max() <= plan.eps * supH),
              N0=plan.N0, last=float(lens[-1]))
    return res


def flux0_targets(grid: TorusGrid, T: int):
    """Hamiltonian seeds with Hofer lengths spread over [0.2, 1.5]."""
    def gen(f):
        return GeneratorPath.from_functions(grid, T, U=f)
    tau = 2.0 * np.pi
    return [
        ("shear-y-0.2", gen(lambda t, x, y: 0.1 * np.cos(tau * y))),
        ("shear-x-0.5", gen(lambda t, x, y: 0.25 * np.sin(tau * x))),
        ("diagonal-0.7", gen(lambda t, x, y: 0.35 * np.cos(tau * (x + y)))),
        ("cells-0.8", gen(lambda t, x, y: 0.4 * np.cos(tau * x) * np.cos(tau * y))),
        ("ramp-1.2", gen(lambda t, x, y: (0.3 + 0.6 * t) * np.cos(tau * y))),
    ]


def _flux0_one(args):
    name, seed, ecfg = args
    return flux0_check([(name, seed)], config=ecfg)["targets"][0]


def suite_flux0(cfg: RunConfig, parallel: int = 1) -> SuiteResult:
    res = SuiteResult("flux0")
    grid = TorusGrid(cfg.N)
    ecfg = estimator_config(cfg)
    targets = flux0_targets(grid, cfg.T)
    rows = _map(_flux0_one, [(n, s, ecfg) for n, s in targets], parallel)
    table, att = [], []
    for r in rows:
        pp = r["per_p"]["2"]
        table.append({"target": r["target"], "seed_length": r["seed_length"], "E_H": r["E_H"],
                      "E_HL": pp["E_HL"], "difference": pp["E_HL"] - r["E_H"],
                      "E_HL_no_attachment": pp["E_HL_no_attachment"],
                      "endpoint_error": r["E_H_endpoint_error"], "seed": ecfg.seed})
        for a in pp["attachments"]:
            att.append({"target": r["target"], "gamma": f"{a['gamma'][0]},{a['gamma'][1]}",
                        "value": a["value"], "value_sup": a["value_sup"],
                        "endpoint_error": a["endpoint_error"]})
    res.tables["targets"] = table
    res.tables["attachments"] = att
    res.plots["energies"] = [{"target": r["target"], "E_H": r["E_H"], "E_HL": r["E_HL"]} for r in table]
    worst = max(abs(r["difference"]) for r in table)
    res.check("|E_HL - E_H| <= 5e-2", worst <= 5e-2, worst=worst)
    mono = all(r["per_p"]["2"]["argmin_stable"] and r["per_p"]["2"]["attachments_above_min_norm"]
               for r in rows)
    res.check("nonzero attachments cost at least the attachment-free estimate", mono)
    return res


def suite_displace(cfg: RunConfig, parallel: int = 1) -> SuiteResult:
    res = SuiteResult("displace")
    grid = TorusGrid(min(cfg.N, 64))
    regions = [("strip-0.2", {"kind": "strip", "height": 0.2}),
               ("disk-0.1", {"kind": "disk", "radius": 0.1}),
               ("annulus-0.05-0.12", {"kind": "annulus", "r_in": 0.05, "r_out": 0.12})]
    rows = []
    for name, reg in regions:
        r = displacement_energy(reg, grid=grid)
        rows.append({"region": name, "upper": r["upper"], "lower": r["lower"], "gap": r["gap"],
                     "translation": r["candidates"]["translation"],
                     "shear": r["candidates"].get("shear"), "m_second": r["m_second"]})
    res.tables["regions"] = rows
    res.plots["bounds"] = [{"region": r["region"], "upper": r["upper"], "lower": r["lower"]} for r in rows]
    s = rows[0]
    res.check("strip 0.2: upper <= 0.25 + 5e-2", s["upper"] <= 0.25 + 5e-2, upper=s["upper"])
    res.check("strip 0.2: lower = 0.5 min{1, m''} > 0",
              s["lower"] == 0.5 * min(1.0, s["m_second"]) and s["lower"] > 0.0, lower=s["lower"])
    res.check("strip 0.2: upper >= lower", s["upper"] >= s["lower"])
    return res


DUALITY_FLUXES = ((0.3, 0.1), (float(np.sqrt(2.0) / 10.0), 0.0), (0.25, -0.35))


def suite_duality(cfg: RunConfig, parallel: int = 1) -> SuiteResult:
    res = SuiteResult("duality")
    grid = TorusGrid(cfg.N)
    ecfg = estimator_config(cfg)
    rows = []
    for f in DUALITY_FLUXES:
        seed = harmonic_generator(grid, 16, *f)
        const = hoferlike_length(seed, 2.0).value
        target = integrate_generator(seed).endpoint
        est = estimate_energy(target, "hoferlike", 2.0, seed_gen=seed, config=ecfg)
        rep = duality_bounds(f, [const, est.value])
        rows.append({"flux_a": f[0], "flux_b": f[1], "flux_norm": rep.flux_norm,
                     "constant_path": const, "estimate": est.value, "estimate_sup": est.value_sup,
                     "A_hat": rep.A_hat, "B_hat": rep.B_hat, "best_upper_ratio": rep.best_upper_ratio,
                     "floor_margin": est.value - est.flux.norm})
    res.tables["duality"] = rows
    res.plots["ratios"] = [{"flux_norm": r["flux_norm"], "A_hat": r["A_hat"], "B_hat": r["B_hat"]}
                           for r in rows]
    worst = max(abs(r["constant_path"] - r["flux_norm"]) for r in rows)
    res.check("constant harmonic path value = ||flux|| within 1e-6", worst <= 1e-6, worst=worst)
    res.check("best upper ratio <= 1", all(r["best_upper_ratio"] <= 1.0 + 1e-12 for r in rows))
    res.check("estimates respect the flux floor", all(r["floor_margin"] >= -1e-6 for r in rows))
    return res


ITERATE_FLUXES = {
    "sqrt2/10": ((float(np.sqrt(2.0) / 10.0), 0.0), False),
    "1/pi,sqrt3/7": ((float(1.0 / np.pi), float(np.sqrt(3.0) / 7.0)), False),
    "1/2": ((0.5, 0.0), True),
    "1/4,1/2": ((0.25, 0.5), True),
    "1/3": ((1.0 / 3.0, 0.0), True),
}


def suite_iterates(cfg: RunConfig, parallel: int = 1) -> SuiteResult:
    res = SuiteResult("iterates")
    rows = []
    k_max = 20
    for name, (f, torsion) in ITERATE_FLUXES.items():
        d = iterate_distances(f, k_max)
        for k, dk in enumerate(d, start=1):
            kf = np.array(f) * k
            hits = bool(np.allclose(kf, np.round(kf), atol=1e-12, rtol=0.0))
            fl = energy_floor(dk)
            rows.append({"flux": name, "k": k, "distance": dk, "floor_raw": fl["raw"],
                         "floor_prefactored": fl["prefactored"], "hits_lattice": hits,
                         "torsion": torsion})
    res.tables["iterates"] = rows
    res.plots["floors"] = [{"flux": r["flux"], "k": r["k"], "floor": r["floor_raw"]} for r in rows]
    irr = [r["distance"] for r in rows if not r["torsion"]]
    res.check("irrational flux: every floor positive for k <= 20", min(irr) > 0.0, smallest=min(irr))
    hit = [r["distance"] for r in rows if r["hits_lattice"]]
    miss = [r["distance"] for r in rows if r["torsion"] and not r["hits_lattice"]]
    res.check("floors vanish exactly when k flux is a lattice point",
              bool(hit) and max(hit) <= 1e-12 and min(miss) > 1e-6,
              largest_hit=max(hit), smallest_miss=min(miss))
    return res


SUITE_FUNCS = {
    "hodge": suite_hodge,
    "flux": suite_flux,
    "lengths": suite_lengths,
    "loop": suite_loop,
    "scaling": suite_scaling,
    "fragment": suite_fragment,
    "twoparam": suite_twoparam,
    "flux0": suite_flux0,
    "displace": suite_displace,
    "duality": suite_duality,
    "iterates": suite_iterates,
}


def run(name: str, cfg: RunConfig, parallel: int = 1) -> SuiteResult:
    if name not in SUITE_FUNCS:
        raise KeyError(f"unknown suite {name!r}")
    return SUITE_FUNCS[name](cfg, parallel)


__all__ = ["SuiteResult", "SUITE_FUNCS", "run", "random_generator", "flux0_targets",
           "estimator_config"]
