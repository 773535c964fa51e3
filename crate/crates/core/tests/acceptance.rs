//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

mod common;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{grid_max, grid_newton, max_prob_difference, same_sets, solver_union};
use tisgm_core::census::{critical_scan, total_at};
use tisgm_core::chain::{branch_w, build_transition, free_spectrum, ks_threshold, layout_law, spectrum, BranchLayout, MeasureId};
use tisgm_core::extremality::{g1_norm, g1_value, g_norm, g_value, msw_threshold, mu1_cubic_roots};
use tisgm_core::model::{derive, theta_c0, theta_cm_k2, Coupling};
use tisgm_core::rootfind::bracket_root;
use tisgm_core::tisgm::{all_spins, complement, edge_marginal, embed, residual, solve_all_m, sym_w1_discriminant, CaseTag, FullBoundaryLaw};
use tisgm_core::ModelParams;

type Outcome = (bool, String);

fn p(theta: f64) -> ModelParams {
    ModelParams::new(2, 5, theta).unwrap()
}

fn near(x: f64, want: f64, tol: f64) -> bool {
    (x - want).abs() <= tol
}

const TABLE_INTERVALS: [(f64, f64, usize); 13] = [
    (1.0, 1.5587, 1),
    (1.5587, 5.8416, 81),
    (5.8416, 6.3360, 121),
    (6.3360, 6.4174, 161),
    (6.4174, 7.7897, 141),
    (7.7897, 8.3376, 221),
    (8.3376, 8.3589, 261),
    (8.3589, 9.8989, 245),
    (9.8989, 10.3633, 255),
    (10.3633, 11.7125, 275),
    (11.7125, 11.9160, 295),
    (11.9160, 11.9871, 295),
    (11.9871, 20.0, 335),
];

const TABLE_POINTS: [(f64, usize); 9] = [
    (1.5587, 41),
    (5.8416, 101),
    (6.3360, 141),
    (6.4174, 151),
    (7.7897, 181),
    (8.3589, 263),
    (9.8989, 250),
    (11.7125, 285),
    (11.9160, 280),
];

const CRITICAL: [f64; 12] =
    [1.5587, 5.8416, 6.3360, 6.4174, 7.7897, 8.3376, 8.3589, 9.8989, 10.3633, 11.7125, 11.9160, 11.9871];

fn table_counts() -> Outcome {
    let pp = p(2.0);
    let scanned: Vec<f64> = critical_scan(&pp, 1.01, 15.0, 1e-3).unwrap().iter().map(|c| c.theta).collect();
    let mut bad = vec![];
    for (lo, hi, want) in TABLE_INTERVALS {
        let mid = 0.5 * (lo + hi);
        let got = total_at(&pp, mid).unwrap();
        if got != want {
            bad.push(format!("({lo},{hi})@{mid:.4}: {got} != {want}"));
        }
    }
    for (at, want) in TABLE_POINTS {
        let theta = scanned.iter().copied().find(|t| near(*t, at, 2e-3)).unwrap_or(at);
        let got = total_at(&pp, theta).unwrap();
        if got != want {
            bad.push(format!("{theta:.6}: {got} != {want}"));
        }
    }
    (bad.is_empty(), format!("{} of 22 rows differ: {}", bad.len(), bad.join("; ")))
}

fn critical_values() -> Outcome {
    let cv = critical_scan(&p(2.0), 1.01, 15.0, 1e-3).unwrap();
    let got: Vec<f64> = cv.iter().map(|c| c.theta).collect();
    let missing: Vec<f64> = CRITICAL.iter().copied().filter(|t| !got.iter().any(|g| near(*g, *t, 2e-3))).collect();
    let extra: Vec<String> =
        got.iter().filter(|g| !CRITICAL.iter().any(|t| near(**g, *t, 2e-3))).map(|g| format!("{g:.4}")).collect();
    let ok = got.len() == 12 && missing.is_empty();
    (ok, format!("{} merged values; missing {missing:?}; extra [{}]", got.len(), extra.join(", ")))
}

fn closed_forms() -> Outcome {
    let mut errs = vec![];
    let b = bracket_root(|t| (t + 4.0) / (1.0 / t + 4.0) - 3.0, 1.5, 30.0, 1e-14).unwrap();
    errs.push((theta_c0(2, 5) - b).abs().max((b - (4.0 + 19f64.sqrt())).abs()));
    for (m, want) in [(1, 9.8989), (2, 11.7125)] {
        let c = theta_cm_k2(m, 5, Coupling::Ferromagnetic).unwrap();
        let b = bracket_root(|t| sym_w1_discriminant(m, t, 5), 2.0, want + 0.5, 1e-14).unwrap();
        errs.push((c - b).abs().max((c - want).abs()));
    }
    let b = bracket_root(|t| (t + 1.0 / t) / 2.0 - 6.0, 2.0, 30.0, 1e-14).unwrap();
    let cr = derive(&p(2.0)).theta_cr;
    errs.push((cr - b).abs().max((cr - (6.0 + 35f64.sqrt())).abs()).max((cr - 11.9160).abs()));
    let worst = errs.iter().copied().fold(0.0, f64::max);
    (worst < 1e-4, format!("max deviation {worst:.2e}"))
}

fn free_spectra() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut mult_ok = true;
    for q in [2, 3, 5, 7] {
        for theta in [1.5, 3.0, 10.0, 25.0] {
            let pp = ModelParams::new(2, q, theta).unwrap();
            let sp = spectrum(&build_transition(&FullBoundaryLaw::ones(q), &pp), 2).unwrap();
            for (val, mult) in free_spectrum(theta, q) {
                let n = sp.eigenvalues.iter().filter(|e| near(e.0, val, 1e-9) && e.1.abs() < 1e-9).count();
                mult_ok &= n == mult;
            }
            for e in &sp.eigenvalues {
                let d = free_spectrum(theta, q).iter().map(|(v, _)| (e.0 - v).abs()).fold(f64::MAX, f64::min);
                worst = worst.max(d).max(e.1.abs());
            }
        }
    }
    (mult_ok && worst < 1e-9, format!("max deviation {worst:.2e}, multiplicities {}", if mult_ok { "match" } else { "differ" }))
}

fn ks_thresholds() -> Outcome {
    let pp = p(2.0);
    let got = [
        (ks_threshold(MeasureId::Free, &pp, BranchLayout::Pinned).unwrap(), 19.61),
        (ks_threshold(MeasureId::MuStar, &pp, BranchLayout::Pinned).unwrap(), 11.76),
        (ks_threshold(MeasureId::MuStarStar, &pp, BranchLayout::Pinned).unwrap(), 12.28),
    ];
    let ok = got.iter().all(|(g, w)| near(*g, *w, 5e-2));
    (ok, format!("free {:.6}, mu_* {:.6}, mu^* {:.6}", got[0].0, got[1].0, got[2].0))
}

fn msw_thresholds() -> Outcome {
    let roots = mu1_cubic_roots(5).unwrap();
    let pp = p(2.0);
    let upper = msw_threshold(MeasureId::MuStarStar, &pp).unwrap();
    let lower = msw_threshold(MeasureId::MuStar, &pp).unwrap();
    let cubic_ok = roots.len() == 2 && near(roots[0], 0.097, 2e-3) && near(roots[1], 3.07, 2e-3);
    let ok = cubic_ok && near(upper, 8.3779, 2e-3) && near(lower, 8.3612, 2e-3);
    (
        ok,
        format!(
            "cubic roots {:?} (want 0.097, 3.07); mu^* {upper:.6} (want 8.3779); mu_* {lower:.6} (want 8.3612)",
            roots.iter().map(|r| format!("{r:.6}")).collect::<Vec<_>>()
        ),
    )
}

fn residual_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_res, mut worst_inv, mut n_sol): (f64, f64, usize) = (0.0, 0.0, 0);
    for _ in 0..200 {
        let q = rng.random_range(3..=5usize);
        let m = rng.random_range(1..=q / 2);
        let theta = if rng.random_bool(0.25) { rng.random_range(0.05..0.95) } else { rng.random_range(1.05..30.0) };
        let pp = ModelParams::new(2, q, theta).unwrap();
        for s in solve_all_m(m, &pp).unwrap() {
            n_sol += 1;
            worst_res = worst_res.max(residual(&s, &pp));
            let c = complement(&complement(&s, &pp), &pp);
            for (a, b) in c.uvw().iter().zip(s.uvw()) {
                worst_inv = worst_inv.max((a - b).abs() / b.max(1.0));
            }
        }
    }
    let pp = p(5.0);
    let mut worst_marg: f64 = 0.0;
    for s in solve_all_m(2, &pp).unwrap().into_iter().filter(|s| s.case_tag != CaseTag::Free) {
        let a = embed(&s, &[0, 1], false, 5).unwrap();
        let c = complement(&s, &pp);
        let mut b = FullBoundaryLaw { z_minus: vec![1.0; 5], z_plus: vec![c.w; 5] };
        for i in 2..5 {
            b.z_minus[i] = c.u;
            b.z_plus[i] = c.v;
        }
        for x in all_spins(5) {
            for y in all_spins(5) {
                worst_marg = worst_marg.max((edge_marginal(&a, &pp, (x, y)) - edge_marginal(&b, &pp, (x, y))).abs());
            }
        }
    }
    let ok = worst_res < 1e-9 && worst_inv < 1e-10 && worst_marg < 1e-10;
    (ok, format!("{n_sol} solutions, max residual {worst_res:.2e}, involution {worst_inv:.2e}, marginals {worst_marg:.2e}"))
}

fn grid_oracle() -> Outcome {
    let mut parts = vec![];
    let mut ok = true;
    for (m, theta) in [(1, 12.0), (2, 12.0), (1, 7.0)] {
        let pp = p(theta);
        let grid = grid_newton(m, &pp);
        let solv = solver_union(m, &pp);
        let same = same_sets(&grid, &solv);
        ok &= same;
        parts.push(format!("(5,{m},{theta}): grid {} solvers {}", grid.len(), solv.len()));
    }
    (ok, parts.join(", "))
}

fn norm_oracles() -> Outcome {
    let mut worst: f64 = 0.0;
    for a in [0.3, 0.8, 1.2, 2.0, 5.0] {
        let best = |f: &dyn Fn(f64, f64, f64, f64, f64) -> f64| {
            [a, 1.0 / a].iter().map(|&b| grid_max(|x, y, z, t| f(x, y, z, t, b), 0.05, 10.0)).fold(0.0, f64::max)
        };
        let g = best(&|x, y, z, t, b| g_value(x, y, z, t, a, b));
        let g1 = best(&|x, y, z, t, b| g1_value(x, y, z, t, a, b));
        worst = worst.max((g - g_norm(a)).abs()).max((g1 - g1_norm(a)).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut dominated = true;
    let mut margin = f64::MAX;
    for theta in [9.0, 12.0] {
        let bound = (theta * theta - 1.0) / (theta * theta + 1.0);
        for m in [MeasureId::MuStar, MeasureId::MuStarStar] {
            let w = branch_w(m, &p(theta)).unwrap();
            for layout in [BranchLayout::Pinned, BranchLayout::Uniform] {
                let d = max_prob_difference(&layout_law(w, 5, layout), theta, &mut rng);
                dominated &= d <= bound;
                margin = margin.min(bound - d);
            }
        }
    }
    (worst < 2e-2 && dominated, format!("norm grid deviation {worst:.2e}; bound margin {margin:.3e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Option<f64>); 9] = [
        ("table reproduction", table_counts, Some(10.0)),
        ("critical scan", critical_values, Some(5.0)),
        ("closed-form cross-checks", closed_forms, None),
        ("free spectral oracle", free_spectra, None),
        ("KS thresholds", ks_thresholds, None),
        ("MSW thresholds", msw_thresholds, None),
        ("residual property suite", residual_suite, None),
        ("grid+Newton oracle", grid_oracle, Some(60.0)),
        ("norm-bound oracles", norm_oracles, None),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let (ok, detail) = run();
        let secs = t0.elapsed().as_secs_f64();
        let in_time = limit.is_none_or(|l| secs < l);
        let pass = ok && in_time;
        if !pass {
            failed += 1;
        }
        let budget = limit.map(|l| format!(" (limit {l} s)")).unwrap_or_default();
        println!("{} {}. {name}: {detail} [{secs:.2} s{budget}]", if pass { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
