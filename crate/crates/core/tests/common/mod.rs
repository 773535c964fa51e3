#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use tisgm_core::extremality::conditional_law;
use tisgm_core::tisgm::{reduced_map, reduced_residual, solve_all_m, FullBoundaryLaw};
use tisgm_core::ModelParams;

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let m = nalgebra::Matrix3::from_fn(|r, c| a[r][c]);
    let x = m.lu().solve(&nalgebra::Vector3::new(b[0], b[1], b[2]))?;
    Some([x[0], x[1], x[2]])
}

/// Damped Newton on `log F(e^x) - x` from one start.
pub fn newton(start: [f64; 3], m: usize, pp: &ModelParams) -> Option<[f64; 3]> {
    let g = |x: [f64; 3]| {
        let f = reduced_map([x[0].exp(), x[1].exp(), x[2].exp()], m, pp);
        [f[0].ln() - x[0], f[1].ln() - x[1], f[2].ln() - x[2]]
    };
    let norm = |v: [f64; 3]| v.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let mut x = [start[0].ln(), start[1].ln(), start[2].ln()];
    let mut gx = g(x);
    for _ in 0..200 {
        if norm(gx) < 1e-14 {
            break;
        }
        let mut jac = [[0.0; 3]; 3];
        for c in 0..3 {
            let h = 1e-6;
            let (mut xp, mut xm) = (x, x);
            xp[c] += h;
            xm[c] -= h;
            let (gp, gm) = (g(xp), g(xm));
            for r in 0..3 {
                jac[r][c] = (gp[r] - gm[r]) / (2.0 * h);
            }
        }
        let dx = solve3(jac, [-gx[0], -gx[1], -gx[2]])?;
        let mut step = 1.0;
        loop {
            let nx = [x[0] + step * dx[0], x[1] + step * dx[1], x[2] + step * dx[2]];
            let ng = g(nx);
            if nx.iter().all(|v| v.is_finite() && v.abs() < 30.0) && norm(ng) < norm(gx) {
                x = nx;
                gx = ng;
                break;
            }
            step *= 0.5;
            if step < 1e-6 {
                return None;
            }
        }
    }
    let uvw = [x[0].exp(), x[1].exp(), x[2].exp()];
    (reduced_residual(uvw, m, pp) < 1e-11).then_some(uvw)
}

fn rel_close(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
    (0..3).all(|i| (a[i] - b[i]).abs() <= tol * a[i].abs().max(b[i].abs()))
}

fn push_unique(set: &mut Vec<[f64; 3]>, x: [f64; 3]) {
    if !set.iter().any(|y| rel_close(*y, x, 1e-6)) {
        set.push(x);
    }
}

fn swap_triple(x: [f64; 3]) -> [f64; 3] {
    [x[1] / x[2], x[0] / x[2], 1.0 / x[2]]
}

pub fn grid_newton(m: usize, pp: &ModelParams) -> Vec<[f64; 3]> {
    let n = 28;
    let pts: Vec<f64> = (0..n).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / (n - 1) as f64)).collect();
    let mut found = vec![];
    for &u in &pts {
        for &v in &pts {
            for &w in &pts {
                if let Some(x) = newton([u, v, w], m, pp) {
                    push_unique(&mut found, x);
                }
            }
        }
    }
    found
}

pub fn solver_union(m: usize, pp: &ModelParams) -> Vec<[f64; 3]> {
    let mut out = vec![];
    for s in solve_all_m(m, pp).unwrap() {
        push_unique(&mut out, s.uvw());
        push_unique(&mut out, swap_triple(s.uvw()));
    }
    out
}

pub fn same_sets(a: &[[f64; 3]], b: &[[f64; 3]]) -> bool {
    a.len() == b.len() && a.iter().all(|x| b.iter().any(|y| rel_close(*x, *y, 1e-6)))
}

pub fn grid_max<F: Fn(f64, f64, f64, f64) -> f64>(f: F, pitch: f64, hi: f64) -> f64 {
    let n = (hi / pitch).round() as usize;
    let mut best: f64 = 0.0;
    for a in 0..=n {
        for b in 0..=n {
            for c in 0..=n {
                let (y, z, t) = (a as f64 * pitch, b as f64 * pitch, c as f64 * pitch);
                best = best.max(f(1.0, y, z, t));
            }
        }
    }
    best
}

pub fn max_prob_difference(z: &FullBoundaryLaw, theta: f64, rng: &mut ChaCha8Rng) -> f64 {
    let n = 2 * z.q();
    let mut priors: Vec<Vec<f64>> = vec![];
    for a in 0..n {
        for b in (a + 1)..n {
            for s in 0..=50 {
                let mut pr = vec![0.0; n];
                pr[a] = s as f64 / 50.0;
                pr[b] = 1.0 - pr[a];
                priors.push(pr);
            }
        }
    }
    for _ in 0..4000 {
        let mut pr: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().ln()).collect();
        let s: f64 = pr.iter().sum();
        pr.iter_mut().for_each(|x| *x /= s);
        priors.push(pr);
    }
    let mut best: f64 = 0.0;
    for pr in &priors {
        let laws: Vec<Vec<f64>> = [-1i8, 1]
            .iter()
            .flat_map(|&k| (0..z.q()).map(move |i| (k, i)))
            .map(|(k, i)| conditional_law(z, theta, k, i, pr))
            .collect();
        for h in 0..n {
            let (lo, hi) = laws.iter().fold((f64::MAX, f64::MIN), |(lo, hi), l| (lo.min(l[h]), hi.max(l[h])));
            best = best.max(hi - lo);
        }
    }
    best
}

