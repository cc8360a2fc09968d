"""Check suites assembled into reports; shared by the CLI and the acceptance tests."""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import charclass as cc
from . import compatible as cj
from . import geometry as geo
from . import maps, winding
from ._accel import backend_name
from .errors import PreconditionError, RskError
from .report import CheckResult, Report

SUITES = ("geometry", "maps", "retraction", "charclass", "invariant")
# default sample counts where the generic 10^4 would be needlessly slow
SUITE_SAMPLES = {"retraction": 500}

DEFAULT_TOLERANCES = {
    "involution": 1e-12,
    "analytic": 1e-8,
    "fd": 1e-5,
    "differential": 1e-6,
    "equivariance": 1e-9,
    "torus": 1e-9,
    "jacobian": 1e-3,
    "square": 1e-8,
    "anti_invariance": 1e-7,
    "retraction": 1e-8,
    "scale": 1e-8,
}

TWIST_NOTE = "twist read as z -> z exp(i m Arg w) on the band; the imaginary unit is required for f to preserve L"
BASIS_NOTE = ("A = {z0} x S2 and gamma_A = w-circle (class (0,1)), B = S2 x {w0} and gamma_B = z-circle (class (1,0)); "
              "gamma_A oriented by increasing Arg w")


@dataclass
class RunConfig:
    seed: int = 0
    samples: int | None = None
    m: int = 2
    delta: float = 0.5
    grid: int = 256
    k_max: int = 5
    tolerances: dict = field(default_factory=dict)
    dump_curves: str | None = None

    def validate(self) -> "RunConfig":
        if int(self.m) != self.m or self.m % 2:
            raise PreconditionError("m must be even")
        if self.samples is not None and self.samples < 100:
            raise PreconditionError("samples must be at least 100")
        if self.k_max < 0:
            raise PreconditionError("k-max must be non-negative")
        if not 0.0 < self.delta < 5.0:
            raise PreconditionError("delta must lie in (0, 5)")
        if self.grid < 8:
            raise PreconditionError("grid must be at least 8")
        for k, v in self.tolerances.items():
            if k not in DEFAULT_TOLERANCES:
                raise PreconditionError(f"unknown tolerance {k!r}")
            if not v > 0.0:
                raise PreconditionError(f"tolerance {k} must be positive")
        return self

    def tol(self, key: str) -> float:
        return float(self.tolerances.get(key, DEFAULT_TOLERANCES[key]))

    def n(self, suite: str) -> int:
        return self.samples if self.samples is not None else SUITE_SAMPLES.get(suite, 10_000)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["tolerances"] = {k: self.tol(k) for k in sorted(DEFAULT_TOLERANCES)}
        d.pop("dump_curves")
        d["backend"] = backend_name()
        return d


def suite_rng(seed: int, suite: str) -> np.random.Generator:
    """Independent PCG64 stream per suite, so ``all`` matches the single suites."""
    return np.random.default_rng([int(seed), SUITES.index(suite)])


# --------------------------------------------------------------------------
# geometry
# --------------------------------------------------------------------------

def geometry_suite(cfg: RunConfig, rng) -> list:
    n = cfg.n("geometry")
    out = []
    X = geo.random_sphere(rng, n)
    X = X[np.abs(X[:, 2]) < 1.0 - 1e-3]
    back = geo.cartesian_batch(geo.stereo_batch(X))
    err = float(np.max(np.abs(back - X)))
    Z = geo.stereo_batch(X)
    err_z = float(np.max(np.abs(geo.stereo_batch(geo.cartesian_batch(Z)) - Z) / (1.0 + np.abs(Z))))
    out.append(CheckResult("geometry", "chart_roundtrip", max(err, err_z) <= 1e-10, X.shape[0], max(err, err_z),
                           tolerance=1e-10))

    ref = {0: (0.0, 0.0, -1.0), 1: (1.0, 0.0, 0.0), 2: (0.8, 0.0, 0.6), geo.INF: (0.0, 0.0, 1.0)}
    err = max(float(np.max(np.abs(np.array(geo.stereo_to_cartesian(z).array) - v))) for z, v in ref.items())
    out.append(CheckResult("geometry", "chart_examples", err <= 1e-15, len(ref), err, tolerance=1e-15))

    P, Q = geo.random_points(rng, n)
    M = geo.form_matrix(P, Q)
    skew = float(np.max(maps.fro(M + np.swapaxes(M, 1, 2))))
    pf = float(np.min(np.abs(geo.pfaffian4(M))))
    out.append(CheckResult("geometry", "product_form_nondegenerate", skew <= 1e-12 and pf > 0.5, n, skew,
                           value={"min_abs_pfaffian": pf}, tolerance=1e-12))

    f = maps.twist(cfg.m, cfg.delta)
    B = geo.frame(P, Q)
    S = B[:, 0] + 0.3 * B[:, 2]
    T = B[:, 1] - 0.7 * B[:, 3]
    a = 1.7
    lhs = maps.push_tangent(f, P, Q, a * S + T)
    rhs = a * maps.push_tangent(f, P, Q, S) + maps.push_tangent(f, P, Q, T)
    err = float(np.max(np.abs(lhs - rhs)))
    out.append(CheckResult("geometry", "differential_linearity", err <= 1e-9, n, err, tolerance=1e-9,
                           params={"f": f.name}))

    for spec in (maps.identity(), maps.sigma_q22(), maps.sigma_q40(), f, maps.reflect_f(),
                 maps.power(f, 3), maps.inverse(f)):
        out.append(maps.check_differential_modes(spec, n, rng, tol=cfg.tol("differential")))

    # chain rule in finite-difference mode
    g = maps.compose(f, maps.reflect_f())
    U = np.einsum("ni,nik->nk", rng.standard_normal((n, 4)), B)
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    ev = lambda spec: (lambda a_, b_: maps.evaluate(spec, a_, b_))  # noqa: E731
    whole = geo.fd_differential(ev(g), P, Q, U)
    P1, Q1 = maps.evaluate(maps.reflect_f(), P, Q)
    inner = geo.fd_differential(ev(maps.reflect_f()), P, Q, U)
    outer = geo.fd_differential(ev(f), P1, Q1, inner)
    err = float(np.max(np.abs(whole - outer)))
    out.append(CheckResult("geometry", "chain_rule_fd", err <= cfg.tol("differential"), n, err,
                           tolerance=cfg.tol("differential"), params={"f": g.name}))

    M = geo.pullback_matrix(maps.identity(), P, Q)
    err = float(np.max(maps.fro(M - geo.OMEGA0)))
    out.append(CheckResult("geometry", "pullback_identity", err <= 1e-12, n, err, tolerance=1e-12))
    M = geo.pullback_matrix(f, P, Q)
    dets = np.linalg.det(M)
    out.append(CheckResult("geometry", "pullback_twist_nondegenerate", float(np.min(np.abs(dets))) > 1e-10, n,
                           value={"min_abs_det": float(np.min(np.abs(dets))),
                                  "max_distance_from_omega": float(np.max(maps.fro(M - geo.OMEGA0)))},
                           params={"f": f.name}))
    out.append(CheckResult("geometry", "unhoused_canonical_class", True, value="not computed",
                           notes=["monotonicity is encoded only by the equal-area product form"]))
    return out


# --------------------------------------------------------------------------
# maps
# --------------------------------------------------------------------------

def counterexample(res: CheckResult, name: str) -> CheckResult:
    """Wrap a check that is expected to fail: the entry passes iff the inner check fails."""
    return CheckResult(res.module, name, not res.passed, res.samples, res.max_residual, res.value,
                       res.tolerance, dict(res.params), list(res.notes) + ["expected to fail"])


def maps_suite(cfg: RunConfig, rng) -> list:
    n = cfg.n("maps")
    f = maps.twist(cfg.m, cfg.delta)
    s22, s40 = maps.sigma_q22(), maps.sigma_q40()
    out = []
    for s in (s22, s40):
        out.append(maps.check_involution(s, n, rng, tol=cfg.tol("involution")))
        out.append(maps.check_antisymplectic(s, n, rng, "analytic", tol=cfg.tol("analytic")))
        out.append(maps.check_antisymplectic(s, n, rng, "finite_difference", tol=cfg.tol("fd")))
        out.append(maps.fixed_locus_scan(s, rng, samples=n))
    out.append(maps.check_involution(maps.reflect_f(), n, rng, tol=cfg.tol("involution")))
    out.append(counterexample(maps.check_antisymplectic(f, min(n, 1000), rng), "twist_not_antisymplectic"))

    out.append(maps.check_equivariance(f, s22, n, rng, tol=cfg.tol("equivariance")))
    out.append(maps.check_equivariance(maps.reflect_f(), s40, n, rng, tol=cfg.tol("equivariance")))
    eq = maps.check_equivariance(maps.reflect_f(), s22, n, rng, tol=cfg.tol("equivariance"))
    eq.notes.append("both maps act by orthogonal linear maps on each factor, so they commute")
    out.append(eq)
    out.append(counterexample(maps.check_equivariance(f, s40, n, rng, tol=cfg.tol("equivariance")),
                              "twist_not_equivariant_q40"))

    for k in sorted({1, cfg.k_max} - {0}):
        out.append(maps.check_twist_on_torus(cfg.m, cfg.delta, k=k, tol=cfg.tol("torus")))
    out.append(maps.check_twist_poles(cfg.m, cfg.delta, n, rng))
    out.append(maps.check_jacobian(f, n_side=max(10, int(round(math.sqrt(n)))), tol=cfg.tol("jacobian")))

    pf_n = min(n, 2000)
    for k in range(0, cfg.k_max + 1):
        out.append(maps.pushforward_form_check(f, k, s22, pf_n, rng, tol=cfg.tol("fd")))

    for spec in (maps.identity(), f, maps.reflect_f(), maps.power(f, cfg.k_max)):
        out.append(h2_entry(spec, cfg.grid))

    out.append(maps.check_quotient_diagram(n, rng))
    out.append(maps.check_g_fixes_diagonal(n, rng))
    out.append(maps.check_projection_commutes(n, rng, onto="second"))
    proj = maps.check_projection_commutes(n, rng, onto="first")
    out.append(counterexample(proj, "projection_first_factor_not_g_equivariant"))
    for r in out:
        if "Twist" in str(r.params.get("f", "")) and TWIST_NOTE not in r.notes:
            r.notes.append(TWIST_NOTE)
    return out


def h2_entry(spec, grid: int) -> CheckResult:
    try:
        mat, info = maps.h2_action_degrees(spec, grid=grid)
    except RskError as e:
        return CheckResult("maps", "h2_action", False, params={"f": spec.name}, notes=[f"{e.code}: {e}"])
    ok = mat.tolist() == [[1, 0], [0, 1]]
    return CheckResult("maps", "h2_action", ok, max_residual=info["residue"], value=mat, tolerance=0.1,
                       params={"f": spec.name, "grid": info["grid"]}, notes=[BASIS_NOTE])


# --------------------------------------------------------------------------
# retraction
# --------------------------------------------------------------------------

def retraction_suite(cfg: RunConfig, rng) -> list:
    n = cfg.n("retraction")
    out = cj.retraction_suite(rng, samples=n, tol_square=cfg.tol("square"), tol_anti=cfg.tol("anti_invariance"),
                              tol_retract=cfg.tol("retraction"), tol_scale=cfg.tol("scale"))
    m = min(n, 1000)
    round_J = cj.endo_field(cj.round_metric_field(), "J")
    out.append(cj.check_anti_invariance_J(round_J, maps.sigma_q22(), m, rng, tol=1e-9, label="J_round"))
    for s in (maps.sigma_q22(), maps.sigma_q40()):
        g = cj.symmetrize_metric(cj.random_metric_field(rng), s)
        out.append(cj.check_metric_invariance(g, s, m, rng))
        for role, sign in (("J", -1), ("A", -1), ("sqrt", 1), ("inv_sqrt", 1)):
            out.append(cj.check_anti_invariance_J(cj.endo_field(g, role), s, m, rng, sign=sign,
                                                  tol=cfg.tol("anti_invariance"), label=f"{role}_field"))
        raw = cj.endo_field(cj.random_metric_field(rng), "J")
        out.append(counterexample(cj.check_anti_invariance_J(raw, s, m, rng, label="J_unsymmetrized"),
                                  "unsymmetrized_metric_not_anti_invariant"))

    s = maps.sigma_q40()
    P, Q = geo.random_points(rng, 1)
    g0 = cj.symmetrize_metric(cj.random_metric_field(rng), s)
    g1 = cj.symmetrize_metric(cj.random_metric_field(rng), s)
    min_eig, lip = cj.path_continuity(g0(P, Q)[0], g1(P, Q)[0], geo.form_matrix(P, Q)[0])
    out.append(CheckResult("compatible_j", "metric_path_continuity", min_eig > 0.0 and lip < 1e3, 101,
                           value={"min_eigenvalue": min_eig, "lipschitz_estimate": lip},
                           notes=["only convexity-path continuity is checked, not contractibility"]))
    return out


# --------------------------------------------------------------------------
# characteristic classes and homology
# --------------------------------------------------------------------------

def random_swclass(rng, ring, rank: int):
    def hom(d):
        monos = [m for m in itertools.product(*(range(b if b else 7) for b in ring.bounds))
                 if ring.degree(m) == d]
        return ring.element([m for m in monos if rng.random() < 0.5])

    return cc.SWClass(rank, (ring.one(),) + tuple(hom(i) for i in range(1, rank + 1)))


ORACLE_RING = "ring a:1 b:1 c:2 / a^4 b^3 c^2"


def oracle_agreement(rng, trials: int = 200) -> CheckResult:
    ring = cc.RingSpec.parse(ORACLE_RING, top_degree=6)
    bad = 0
    closed_bad = 0
    for _ in range(trials):
        E = random_swclass(rng, ring, int(rng.integers(0, 5)))
        L = random_swclass(rng, ring, 1)
        if cc.tensor_by_line(E, L) != cc.splitting_oracle(E, L):
            bad += 1
        if not cc.check_closed_forms(E, L):
            closed_bad += 1
    return CheckResult("charclass", "tensor_by_line_vs_splitting_oracle", bad == 0 and closed_bad == 0, trials,
                       value={"mismatches": bad, "closed_form_mismatches": closed_bad}, params={"ring": ORACLE_RING})


def charclass_suite(cfg: RunConfig, rng) -> list:
    out = []
    d = cc.mapping_torus_breakdown(True)
    w3 = cc.mapping_torus_w3(True)
    w3_id = cc.w3_identity_torus()
    idb = cc.stiefel.identity_torus_breakdown()
    a, b = d["ring"].gen("a"), d["ring"].gen("b")
    out.append(CheckResult(
        "charclass", "w3_obstruction", w3 == a**2 * b and w3_id == 0 and idb["chi_Z"] == 2,
        value={"w3_mapping_torus": str(w3), "w3_identity": w3_id, "chi_Z": idb["chi_Z"],
               "untwisted_w3": str(cc.mapping_torus_w3(False))},
        params={"ring": cc.RING_RP2_S1},
    ))
    out.append(CheckResult(
        "charclass", "w3_intermediate_steps", True,
        value={k: str(v) for k, v in d.items() if k != "ring"},
    ))
    ring = d["ring"]
    TQ = cc.SWClass.from_total(2, d["w_TQ"])
    L = cc.SWClass(1, (ring.one(), b))
    TQL = cc.tensor_by_line(TQ, L)
    cf = cc.closed_forms(TQ, L)
    ok = (TQL[2] == TQ[2] + TQ[1] * L[1] and TQL[1] == TQ[1] and cf["top"] == TQL[2] and cf["first"] == TQL[1])
    out.append(CheckResult("charclass", "twisted_tangent_classes", ok,
                           value={"w1": str(TQL[1]), "w2": str(TQL[2])}))
    stable = True
    for r in range(0, 4):
        big = cc.whitney_sum(cc.whitney_sum(TQ, cc.SWClass.trivial(ring, r)), TQL)
        stable &= big[3] == w3
    out.append(CheckResult("charclass", "trivial_summand_stability", stable, value={"ranks": [0, 1, 2, 3]}))
    out.append(oracle_agreement(rng))
    hom = cc.homology_checks()
    out += hom
    return out


# --------------------------------------------------------------------------
# the winding invariant
# --------------------------------------------------------------------------

def invariant_suite(cfg: RunConfig, rng) -> list:
    out = []
    f = maps.twist(cfg.m, cfg.delta)
    classes = {}
    dump = Path(cfg.dump_curves) if cfg.dump_curves else None
    if dump:
        dump.mkdir(parents=True, exist_ok=True)
    gamma_a = winding.curve_gamma_A()
    for k in range(cfg.k_max + 1):
        spec = maps.power(f, k)
        try:
            cls = winding.pushed_class(spec, gamma_a)
        except RskError as e:
            out.append(CheckResult("invariant_gamma", "pushed_class", False, params={"m": cfg.m, "k": k},
                                   notes=[f"{e.code}: {e}"]))
            continue
        classes[k] = tuple(cls)
        out.append(CheckResult("invariant_gamma", "pushed_class", classes[k] == (k * cfg.m, 1),
                               value=list(classes[k]), params={"m": cfg.m, "k": k},
                               notes=["class stable under doubling of the sampling"]))
        if dump:
            winding.push_curve(spec, gamma_a).to_csv(dump / f"gamma_A_m{cfg.m}_k{k}.csv")
    vals = list(classes.values())
    out.append(CheckResult("invariant_gamma", "classes_pairwise_distinct",
                           len(set(vals)) == len(vals) == cfg.k_max + 1,
                           value={str(k): list(v) for k, v in classes.items()}, params={"m": cfg.m}))

    gb = winding.pushed_class(maps.power(f, max(cfg.k_max, 1)), winding.curve_gamma_B())
    out.append(CheckResult("invariant_gamma", "gamma_B_fixed", tuple(gb) == (1, 0), value=list(gb),
                           params={"m": cfg.m, "k": max(cfg.k_max, 1)}))
    rev = winding.winding_class(gamma_a.reversed())
    out.append(CheckResult("invariant_gamma", "reversed_gamma_A", tuple(rev) == (0, -1), value=list(rev)))

    # homotopy invariance over random perturbations
    bad = 0
    for _ in range(20):
        for base, expect in ((gamma_a, (cfg.m, 1)), (winding.curve_gamma_B(), (1, 0))):
            c = winding.perturbed_curve(base, rng)
            if tuple(winding.pushed_class(f, c)) != expect:
                bad += 1
    out.append(CheckResult("invariant_gamma", "perturbation_invariance", bad == 0, 40, value={"mismatches": bad},
                           params={"m": cfg.m}))

    try:
        winding.push_curve(maps.reflect_f(), gamma_a, sigma=maps.sigma_q40())
        na = CheckResult("invariant_gamma", "reflect_f_torus_precondition", False,
                         notes=["expected a precondition error"])
    except PreconditionError as e:
        na = CheckResult("invariant_gamma", "reflect_f_torus_precondition", True, value="not applicable",
                         notes=[f"skipped: {e}"])
    out.append(na)

    out.append(h2_entry(f, cfg.grid))
    out[-1].module = "invariant_gamma"
    out.append(maps.check_equivariance(f, maps.sigma_q22(), min(cfg.n("invariant"), 10_000), rng,
                                       tol=cfg.tol("equivariance")))
    out[-1].module = "invariant_gamma"
    for r in out:
        if r.check in ("pushed_class", "classes_pairwise_distinct"):
            r.notes += [TWIST_NOTE, BASIS_NOTE]
    return out


RUNNERS = {
    "geometry": geometry_suite,
    "maps": maps_suite,
    "retraction": retraction_suite,
    "charclass": charclass_suite,
    "invariant": invariant_suite,
}


def run(suite: str, cfg: RunConfig) -> Report:
    cfg.validate()
    names = SUITES if suite == "all" else (suite,)
    if suite != "all" and suite not in RUNNERS:
        raise PreconditionError(f"unknown suite {suite!r}")
    report = Report(suite, cfg.seed, cfg.as_dict())
    for name in names:
        for entry in RUNNERS[name](cfg, suite_rng(cfg.seed, name)):
            report.add(entry)
    return report
