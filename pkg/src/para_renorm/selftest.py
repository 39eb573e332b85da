"""A fixed, seeded invariant suite whose report is byte-identical across runs."""

from __future__ import annotations

import cmath
from fractions import Fraction

import numpy as np

from .config import RunConfig


def _cf_checks():
    from .gauss_dynamics import gauss_step
    from .mcf import convergents, evaluate, expand
    n = bad = 0
    for q in range(2, 61):
        for p in range(-q // 2, q // 2 + 1):
            x = Fraction(p, q)
            if p == 0 or x.denominator != q or abs(x) > Fraction(1, 2):
                continue
            n += 1
            cf = expand(x)
            cv = convergents(cf)
            tail = evaluate(cf.tail()) if len(cf) > 1 else Fraction(0)
            if evaluate(cf) != x or abs(cv.q[-1]) != q or not cv.product_ok \
                    or gauss_step(x) != -cf[0].eps * tail:
                bad += 1
    return {"name": "cf round trip, convergents, Gauss shift (q <= 60)",
            "ok": bad == 0, "cases": n, "violations": bad}


def _cone_checks():
    from .gauss_dynamics import cone_check, cone_lemma_applies
    from .mcf import random_cf
    rng = np.random.default_rng(7)
    bad = excluded = 0
    for _ in range(40):
        cf = random_cf(rng, 4, 30)
        if not cone_lemma_applies(cf):
            excluded += 1
        elif not cone_check(cf, 64, raise_on_fail=False).ok:
            bad += 1
    return {"name": "cylinder cone lemma (40 random cfs)", "ok": bad == 0, "violations": bad,
            "excluded_consecutive_twos": excluded}


def _index_checks(cfg: RunConfig):
    from .maps import MapSpec, fixed_point_data, sigma_of, newton_fixed_point
    worst_idx = worst_sigma = worst_beta = 0.0
    for a in (0.1, 0.05 - 0.01j, 0.08 - 0.03j, 0.05 + 0.02j, -0.07 + 0.01j, 0.12, -0.03 - 0.02j):
        m = MapSpec.quadratic(a)
        fp = fixed_point_data(m)
        closed = cmath.log(2 - m.lam) / (2j * cmath.pi)
        worst_idx = max(worst_idx, abs(fp.index), fp.index_residual)
        worst_sigma = max(worst_sigma, abs(newton_fixed_point(m, sigma_of(m) * 1.01) - sigma_of(m)))
        d = closed - fp.beta
        worst_beta = max(worst_beta, abs(d - round(d.real)))
    ok = (worst_idx <= cfg.tol("index") and worst_sigma <= cfg.tol("sigma")
          and worst_beta <= cfg.tol("beta"))
    return {"name": "index identity, sigma and beta oracles", "ok": ok,
            "max_index_error": worst_idx, "max_sigma_error": worst_sigma,
            "max_beta_error": worst_beta}


def _fatou_checks(cfg: RunConfig):
    from .fatou import build_fatou, grid_residual
    from .maps import MapSpec
    from .renorm import renorm_sample
    fa = build_fatou(MapSpec.quadratic(0.05 + 0.02j))
    g = grid_residual(fa)
    cv = abs(fa(fa.critical_value) - 1)
    rs = renorm_sample(fa)
    ok = (g.max <= cfg.tol("fatou_residual") and cv <= cfg.tol("fatou_cv")
          and rs.rel_error <= cfg.tol("renorm_rel"))
    return {"name": "Fatou coordinate and top renormalization at 0.05+0.02i", "ok": ok,
            "grid_residual": g.max, "cv_error": cv, "renorm_rel_error": rs.rel_error}


def _tower_checks(cfg: RunConfig):
    from .gauss_dynamics import qg_disk_check
    from .mcf import RationalSeq, qg_check
    from .tower import ALPHA_STAR, cantor_bisect, tower_run
    st = tower_run(ALPHA_STAR, "t", 50, "exact", 0.15)
    fixed = st.status == "depth_reached" and all(lv.alpha == ALPHA_STAR for lv in st.levels)
    term = tower_run(Fraction(1, 7), None, 5, "exact", 0.15)
    parabolic = term.status == "terminated_parabolic" and len(term.levels) == 2
    seq = RationalSeq((((20, 1),), ((400, 1),), ((160000, 1),)))
    qg = bool(qg_check(seq, 20)) and all(
        qg_disk_check(seq, k, 0.2, samples=64, interior=16, raise_on_fail=False).ok for k in (1, 2, 3))
    levels = cantor_bisect(None, 4, 0.15, mu_proxy=cfg.const("mu_proxy"))
    d = [float(lv.diameter) for lv in levels]
    return {"name": "towers, growth pipeline and Cantor decay",
            "ok": fixed and parabolic and qg,
            "fixed_point_tower": fixed, "rational_termination": parabolic, "qg_pipeline": qg,
            "cantor_ratios": [b / a for a, b in zip(d, d[1:])]}


def run_selftest(cfg: RunConfig | None = None) -> dict:
    cfg = cfg or RunConfig()
    checks = [_cf_checks(), _cone_checks(), _index_checks(cfg), _fatou_checks(cfg), _tower_checks(cfg)]
    return {"ok": all(c["ok"] for c in checks), "checks": checks, "config": cfg.to_json()}
