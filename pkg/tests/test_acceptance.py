"""Exit criteria of the build, one test per criterion, each reporting a pass/fail line."""
import math
import time

import numpy as np
import pytest

from kcmlab.bootstrap.closure import closure
from kcmlab.bootstrap.regions import Box, Configuration, Torus
from kcmlab.bootstrap.sampling import BoxPolicy, sample_bootstrap_tau
from kcmlab.errors import InfiniteStableSet
from kcmlab.family.difficulty import classify, difficulty, family_difficulty, refined_class
from kcmlab.family.directions import Direction
from kcmlab.family.family import parse_family, stable_set, zoo
from kcmlab.family.quasistable import quasi_stable_set
from kcmlab.geometry.bisection import bisect_snail, bisection_identities, type_i_violations
from kcmlab.geometry.events import spanning_preconditions, verify_supergood_spans
from kcmlab.geometry.strip import HelpingSets, WConsecutive, default_placements, verify_strip_lemma
from kcmlab.geometry.tokens import east_min_tokens
from kcmlab.harness.estimate import GeometryParams, estimate_alpha, estimate_event_prob
from kcmlab.harness.run import trial_seed
from kcmlab.kcm.constraints import UNCONSTRAINED, Boundary
from kcmlab.kcm.dynamics import KcmParams, run_kcm, sample_tau0_kcm
from kcmlab.kcm.exact import SmallSystem, exact_gamma, exact_variance_tools
from kcmlab.poincare import convexity_suite, fa1f_suite, two_block_suite

import conftest
from geometry_cases import DESK, U0, desk, random_type_i_cases
from oracles import grid_closure

pytestmark = pytest.mark.acceptance

E1, E2 = Direction(1, 0), Direction(0, 1)
AXES = {E1, -E1, E2, -E2}
MASTER_SEED = 0
FINGERPRINTS: dict[int, str] = {}


def report(n: int, title: str, ok: bool, detail: str, elapsed: float, limit: float):
    ok = bool(ok) and elapsed < limit
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {title} ({detail}; {elapsed:.1f}s of {limit:g}s)"
    print(line)
    conftest.ACCEPTANCE_LINES.append(line)
    assert ok, line


class timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.s = time.perf_counter() - self.t0


# ------------------------------------------------------------------ 1

def test_criterion_01_family_fixtures():
    with timer() as t:
        unbalanced, two, duarte = zoo("unbalanced_rooted"), zoo("two_neighbour"), zoo("duarte")
        S = stable_set(unbalanced)
        c = classify(unbalanced)
        unbalanced_ok = (set(S.isolated_points) == AXES and not S.arcs
                   and difficulty(E1, unbalanced).value == 1
                   and all(difficulty(u, unbalanced).value == 2 for u in (-E1, E2, -E2))
                   and family_difficulty(unbalanced)[0] == 1 and c.kind == "Critical" and c.alpha == 1
                   and refined_class(unbalanced) == 3)
        S2 = stable_set(two)
        c2 = classify(two)
        two_ok = (set(S2.isolated_points) == AXES and not S2.arcs
                  and all(difficulty(u, two).value == 1 for u in AXES)
                  and c2.kind == "Critical" and c2.alpha == 1 and refined_class(two) == 0)
        D = stable_set(duarte)
        cd = classify(duarte)
        try:
            refined_class(duarte)
            raised = False
        except InfiniteStableSet:
            raised = True
        duarte_ok = (D.isolated_points == (E1,) and len(D.arcs) == 1
                     and {D.arcs[0].start, D.arcs[0].end} == {E2, -E2} and D.arcs[0].contains(-E1)
                     and cd.kind == "Critical" and not cd.stable_set_finite and raised)
        super_ok = classify(parse_family("1 0")).kind == "Supercritical"
        sub_ok = classify(parse_family("1 0; -1 0")).kind == "Subcritical"
    parts = dict(unbalanced=unbalanced_ok, two_neighbour=two_ok, duarte=duarte_ok, supercritical=super_ok, subcritical=sub_ok)
    report(1, "family analysis fixtures", all(parts.values()),
           " ".join(f"{k}={'ok' if v else 'BAD'}" for k, v in parts.items()), t.s, 5.0)


# ------------------------------------------------------------------ 2

def test_criterion_02_closure_oracle():
    mismatches = 0
    runs = 0
    with timer() as t:
        for name in ("two_neighbour", "duarte", "unbalanced_rooted"):
            fam = zoo(name)
            for region in (Box(0, 0, 32, 32), Torus(32, 32)):
                for seed in range(100):
                    rng = np.random.default_rng(seed)
                    p = rng.uniform(0.05, 0.3)
                    cfg = Configuration(region, (rng.random(region.mask.shape) < p) & region.mask)
                    naive = grid_closure(cfg.infected_sites(), region.bbox, fam.rules, region.wraps)
                    mismatches += closure(cfg, fam).infected_sites() != naive
                    runs += 1
    report(2, "closure engine equals naive fixed point", mismatches == 0,
           f"{runs} runs, {mismatches} mismatches", t.s, 10.0)


# ------------------------------------------------------------------ 3

BOOT_QS = (0.20, 0.15, 0.12, 0.10, 0.08)


def run_bootstrap_scaling():
    fam = zoo("two_neighbour")
    policy = BoxPolicy(64, 4096)
    samples = [sample_bootstrap_tau(fam, q, policy, trial_seed(MASTER_SEED, t))
               for q in BOOT_QS for t in range(50)]
    est = estimate_alpha(samples)
    truncated = sum(s.truncated for s in samples) / len(samples)
    fp = repr([(s.q, s.seed, s.tau, s.truncated, s.box) for s in samples]) + repr(est.slope)
    return est, truncated, fp


def test_criterion_03_bootstrap_scaling():
    with timer() as t:
        est, truncated, fp = run_bootstrap_scaling()
    FINGERPRINTS[3] = fp
    report(3, "bootstrap log log tau slope", 0.6 <= est.slope <= 1.4 and truncated <= 0.05,
           f"slope {est.slope:.4f} +- {est.stderr:.4f}, truncated {100 * truncated:.1f}%", t.s, 600.0)


# ------------------------------------------------------------------ 4

def run_kcm_checks():
    fam = zoo("two_neighbour")
    q = 0.4
    dens = np.array([run_kcm(KcmParams(q, Torus(64, 64), 50.0, trial_seed(MASTER_SEED, s)), fam).final.mean()
                     for s in range(200)])
    # sites are iid Bernoulli(q) under the stationary measure
    sigma_i = math.sqrt(q * (1 - q) / (64 * 64 * len(dens)))
    qu, n = 0.3, 10_000
    start = Configuration(Torus(3, 3))
    hits = sum(int(run_kcm(KcmParams(qu, Torus(3, 3), 20.0, trial_seed(MASTER_SEED, s)), UNCONSTRAINED,
                           initial=start).final[0]) for s in range(n))
    sigma_ii = math.sqrt(qu * (1 - qu) / n)
    medians = {}
    for qq in (0.3, 0.4, 0.5):
        taus = [sample_tau0_kcm(KcmParams(qq, Torus(64, 64), 1e4), fam, trial_seed(MASTER_SEED, s))
                for s in range(30)]
        medians[qq] = float(np.median([x.tau if x.finite else math.inf for x in taus]))
    fp = repr(dens.tolist()) + repr(hits) + repr(medians)
    return dens.mean(), sigma_i, hits / n, sigma_ii, medians, fp


def test_criterion_04_kcm_correctness():
    with timer() as t:
        d, s1, m, s2, med, fp = run_kcm_checks()
    FINGERPRINTS[4] = fp
    ok_i = abs(d - 0.4) <= 3 * s1
    ok_ii = abs(m - 0.3) <= 3 * s2
    ok_iii = med[0.3] >= med[0.4] >= med[0.5]
    report(4, "KCM stationarity, marginals, monotone tau", ok_i and ok_ii and ok_iii,
           f"density {d:.5f} (3sigma {3 * s1:.5f}), marginal {m:.4f} (3sigma {3 * s2:.4f}), "
           f"medians {med[0.3]:.3g} >= {med[0.4]:.3g} >= {med[0.5]:.3g}", t.s, 300.0)


# ------------------------------------------------------------------ 5

def test_criterion_05_strip_lemma():
    failures = []
    checks = 0
    with timer() as t:
        for name in ("two_neighbour", "unbalanced_rooted"):
            fam = zoo(name)
            qs = quasi_stable_set(fam, U0)
            for w in (3, 4, 5):
                for i, u in enumerate(qs.directions):
                    checks += 1
                    if not verify_strip_lemma(i, w, w * w + 10, WConsecutive(), fam, qs):
                        failures.append(f"{name} w={w} u={u} consecutive")
        fam = zoo("unbalanced_rooted")
        qs = quasi_stable_set(fam, U0)
        for i, u in enumerate(qs.directions):
            Z = tuple(difficulty(u, fam).witness)
            for w in (3, 4, 5):
                anchors = default_placements(qs, i, w, w * w + 10, Z, 3)
                checks += 1
                if not verify_strip_lemma(i, w, w * w + 10, HelpingSets(anchors, Z), fam, qs):
                    failures.append(f"u={u} w={w} helping sets")
    report(5, "strip lemma closure checks", not failures,
           f"{checks} checks, failures: {', '.join(failures) or 'none'}", t.s, 5.0)


# ------------------------------------------------------------------ 6

def run_supergood_spanning():
    out = {}
    for name in ("two_neighbour", "unbalanced_rooted"):
        fam, reg, checker = desk(name, DESK)
        good = 0
        seeds = []
        for t in range(100):
            seed = trial_seed(MASTER_SEED, t)
            x = checker.sample_supergood(0.3, np.random.default_rng(seed))
            good += verify_supergood_spans(checker.configuration(x), reg, fam, checker=checker)
            seeds.append(int(np.flatnonzero(x).sum()))
        pre = spanning_preconditions(reg)
        out[name] = (good, pre[0] if pre else "none", seeds)
    return out


def test_criterion_06_supergood_spans():
    with timer() as t:
        out = run_supergood_spanning()
    FINGERPRINTS[6] = repr(out)
    ok = all(g == 100 for g, _, _ in out.values())
    detail = ", ".join(f"{k} {g}/100" + ("" if g == 100 else f" (first failed precondition: {p})")
                       for k, (g, p, _) in out.items())
    report(6, "super-good configurations span the snail", ok, detail, t.s, 30.0)


# ------------------------------------------------------------------ 7

def test_criterion_07_bisection():
    bad = 0
    with timer() as t:
        for hat, ref, i in random_type_i_cases(20):
            b = bisect_snail(hat, ref, i)
            ok = (bisection_identities(hat, b, i) == (True, True)
                  and not type_i_violations(b.tilde, ref, i) and not type_i_violations(b.bar, ref, i))
            bad += not ok
    report(7, "bisection identities", bad == 0, f"20 specs, {bad} failures", t.s, 5.0)


# ------------------------------------------------------------------ 8

def run_inequality_suites():
    conv = convexity_suite(np.random.default_rng(MASTER_SEED + 1), 1000)
    two = two_block_suite(np.random.default_rng(MASTER_SEED + 2), 1000)
    fa = fa1f_suite(np.random.default_rng(MASTER_SEED + 3), 1000, c=8.0)
    return conv, two, fa


def test_criterion_08_functional_inequalities():
    with timer() as t:
        conv, two, fa = run_inequality_suites()
    FINGERPRINTS[8] = repr([(s.instances, s.violations, s.worst) for s in (conv, two, fa)])
    ok = (conv.violations == two.violations == fa.violations == 0
          and min(conv.instances, two.instances, fa.instances) == 1000 and fa.worst <= 8)
    report(8, "convexity, two-block and FA1f bounds", ok,
           f"violations {conv.violations}/{two.violations}/{fa.violations}, "
           f"measured FA1f exponent constant {fa.worst:.3f}", t.s, 120.0)


# ------------------------------------------------------------------ 9

def run_gamma_checks():
    g_free = exact_gamma(SmallSystem(Box(0, 0, 4, 1), UNCONSTRAINED, 0.3)).gamma
    sys4 = SmallSystem(Box(0, 0, 4, 1), parse_family("1 0"), 0.3, Boundary("infected"))
    res = exact_gamma(sys4)
    rng = np.random.default_rng(MASTER_SEED)
    worst = 0.0
    bad = 0
    for _ in range(1000):
        r = exact_variance_tools(sys4, rng.standard_normal(1 << sys4.n))
        worst = max(worst, r.conditioned_variance / r.dirichlet_form)
        bad += r.conditioned_variance > res.gamma * (1 + 1e-9) * r.dirichlet_form
    ext = exact_variance_tools(sys4, res.f)
    attained = ext.conditioned_variance / ext.dirichlet_form
    return g_free, res.gamma, bad, worst, attained


def test_criterion_09_gamma():
    with timer() as t:
        g_free, gamma, bad, worst, attained = run_gamma_checks()
    FINGERPRINTS[9] = repr((g_free, gamma, bad, worst, attained))
    ok = g_free == 1.0 and bad == 0 and abs(attained - gamma) <= 1e-6 * gamma
    report(9, "Poincare constant on tiny systems", ok,
           f"unconstrained {g_free!r}, east gamma {gamma:.10g}, random f max ratio {worst:.6g}, "
           f"{bad} violations, extremal ratio {attained:.10g}", t.s, 60.0)


# ------------------------------------------------------------------ 10

TOKENS = [1, 2, 2, 3, 3, 3, 3, 4, 4, 4, 4, 4, 4, 4, 4, 5]


def test_criterion_10_token_game():
    with timer() as t:
        f = {n: east_min_tokens(n) for n in range(1, 17)}
    band = [f[n] - math.log2(n) for n in f]
    ok = (list(f.values()) == TOKENS and f[1] == 1
          and all(f[n] <= f[n + 1] for n in range(1, 16))
          and all(f[2 * n] <= f[n] + 1 for n in range(1, 9))
          and 0 < min(band) and max(band) <= 1)
    report(10, "East token game", ok, f"f(16)={f[16]}, band [{min(band):.3f}, {max(band):.3f}]", t.s, 30.0)


# ------------------------------------------------------------------ 11

def run_event_probabilities():
    fam = zoo("two_neighbour")
    q = 0.3
    g = GeometryParams(fam, R=6, L=200, rbar=(2, 0, 0), w=3)
    gt = estimate_event_prob("G(T)", g, q, 2000, MASTER_SEED)
    sg = [estimate_event_prob("SG(B)", GeometryParams(fam, R=R, L=60, rbar=(10, 2, 0), w=3), q, 2000, MASTER_SEED)
          for R in (6, 9, 12)]
    return gt, sg


def test_criterion_11_event_directions():
    with timer() as t:
        gt, sg = run_event_probabilities()
    FINGERPRINTS[11] = repr((gt.hits, gt.p_hat, [(e.hits, e.log_p) for e in sg]))
    logs = [e.log_p for e in sg]
    ok = gt.p_hat > 0.9 and logs[0] > logs[1] > logs[2]
    report(11, "event probability directions", ok,
           f"G(T) {gt.p_hat:.4f} +- {gt.stderr:.4f}, log SG(B) at R=6,9,12: "
           + ", ".join(f"{x:.1f}" for x in logs), t.s, 120.0)


# ------------------------------------------------------------------ 12

RERUNS = {
    3: lambda: run_bootstrap_scaling()[2],
    4: lambda: run_kcm_checks()[5],
    6: lambda: repr(run_supergood_spanning()),
    8: lambda: repr([(s.instances, s.violations, s.worst) for s in run_inequality_suites()]),
    9: lambda: repr(run_gamma_checks()),
    11: lambda: (lambda r: repr((r[0].hits, r[0].p_hat, [(e.hits, e.log_p) for e in r[1]])))(run_event_probabilities()),
}


def test_criterion_12_determinism():
    differ = []
    with timer() as t:
        for n, rerun in RERUNS.items():
            first = FINGERPRINTS.get(n) or rerun()
            if rerun() != first:
                differ.append(str(n))
    report(12, "stochastic criteria rerun identically", not differ,
           f"criteria {sorted(RERUNS)} compared, differing: {', '.join(differ) or 'none'}", t.s, 1200.0)
