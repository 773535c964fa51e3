//! Sufficient extremality test `k * kappa * gamma < 1` with the closed-form
//! kappa sums and norm bounds.

use serde::{Deserialize, Serialize};

use crate::chain::{
    branch_onset, branch_w, build_transition, first_crossing, layout_law, spectrum, BranchLayout, KsVerdict,
    MeasureId, TransitionMatrix,
};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::rootfind::{bracket_root, positive_roots, Polynomial, DEFAULT_TOL};
use crate::tisgm::FullBoundaryLaw;

/// Half the largest L1 distance between two rows.
pub fn kappa_of(pm: &TransitionMatrix) -> f64 {
    let mut best: f64 = 0.0;
    for a in &pm.rows {
        for b in &pm.rows {
            best = best.max(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum());
        }
    }
    0.5 * best
}

/// Normalizers `(Z1, Z2, Z4)` of the pinned-layout matrix.
pub fn normalizers(theta: f64, w: f64, q: usize) -> (f64, f64, f64) {
    let (t, ti, qf) = (theta, 1.0 / theta, q as f64);
    let z1 = t + ti + (qf - 1.0) * (w + 1.0);
    let z2 = t + qf + (ti + qf - 2.0) * w;
    let z4 = ti + qf + (t + qf - 2.0) * w;
    (z1, z2, z4)
}

/// Row-pair sums `S1..S6`; the q-dependent constants reduce to `3(w+1)`, `2(w+2)`, `3w+5` at q = 5.
pub fn s_sums(theta: f64, w: f64, q: usize) -> Result<[f64; 6]> {
    if theta <= 1.0 {
        return Err(Error::ThetaNotAboveOne(theta));
    }
    let (t, ti, qf) = (theta, 1.0 / theta, q as f64);
    let (z1, z2, z4) = normalizers(theta, w, q);
    let s1 = 2.0 * (t - ti) / z1;
    let s2 = 2.0 * (t - 1.0) * (t + w) / (t * z2);
    let s3 = 2.0 * (t - 1.0) * (t + w) / (t * z4);
    let s4 = (ti + 1.0) * (t / z1 - 1.0 / z4).abs()
        + (qf - 2.0) * (w + 1.0) * (1.0 / z1 - 1.0 / z4).abs()
        + (w + ti) * (1.0 / z1 - t / z4).abs();
    let s5 = ((qf - 3.0) * w + qf - 1.0) * (1.0 / z2 - 1.0 / z4).abs()
        + (1.0 + ti) * (t / z2 - 1.0 / z4).abs()
        + w * (1.0 + ti) * (1.0 / z2 - t / z4).abs();
    let s6 = ((qf - 2.0) * w + qf) * (1.0 / z2 - 1.0 / z4).abs()
        + (t / z2 - ti / z4).abs()
        + (ti * w / z2 - t * w / z4).abs();
    Ok([s1, s2, s3, s4, s5, s6])
}

/// Closed-form kappa: `max(S2, S3) / 2` for `w < 1`, `S6 / 2` for `w > 1`.
pub fn kappa_closed(theta: f64, w: f64, q: usize) -> Result<f64> {
    let s = s_sums(theta, w, q)?;
    Ok(if (w - 1.0).abs() < 1e-14 {
        kappa_free(theta, q)
    } else if w < 1.0 {
        0.5 * s[1].max(s[2])
    } else {
        0.5 * s[5]
    })
}

/// Kappa of the all-ones law, valid for any `theta > 0`.
pub fn kappa_free(theta: f64, q: usize) -> f64 {
    (theta - 1.0 / theta).abs() / (theta + 1.0 / theta + 2.0 * (q as f64 - 1.0))
}

fn p_c(c: f64) -> f64 {
    -c.powi(6) - 2.0 * c.powi(5) - c.powi(4) + 2.0 * c * c + 2.0 * c + 1.0
}

/// Positive root of `-c^6 - 2c^5 - c^4 + 2c^2 + 2c + 1`.
pub fn a_critical() -> f64 {
    bracket_root(p_c, 0.0, 2.0, 1e-14).expect("P(0) > 0 > P(2)")
}

/// Value of `a` at which the two norm branches meet (`a_critical()^2`).
pub fn norm_switch() -> f64 {
    a_critical().powi(2)
}

/// `sup |a x/(z+t+a x+y/a) - b x/(x+y+b z+t/b)|` over `x,y,z,t >= 0`, `b in {a, 1/a}`.
pub fn g_norm(a: f64) -> f64 {
    if a <= norm_switch() {
        g_norm_small(a)
    } else {
        a - 1.0
    }
}

pub fn g_norm_small(a: f64) -> f64 {
    let s = a.sqrt();
    (a * s - 1.0).abs() * (a + s + 1.0) / (a * (a + 1.0) * (s + 1.0))
}

pub fn g_value(x: f64, y: f64, z: f64, t: f64, a: f64, b: f64) -> f64 {
    (a * x / (z + t + a * x + y / a) - b * x / (x + y + b * z + t / b)).abs()
}

pub fn g1_norm(a: f64) -> f64 {
    (a - 1.0).abs() / (a + 1.0)
}

pub fn g1_value(x: f64, y: f64, z: f64, t: f64, a: f64, b: f64) -> f64 {
    (a * x / (z + t + a * x + y / a) - x / (x + y + b * z + t / b)).abs()
}

/// Bound on the boundary influence `gamma`.
pub fn gamma_bound(measure: MeasureId, theta: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(Error::InvalidParams(format!("theta must be positive, got {theta}")));
    }
    match measure {
        MeasureId::Free => Ok(if theta > norm_switch() { theta - 1.0 } else { g_norm_small(theta) }),
        _ => {
            if theta <= 1.0 {
                return Err(Error::ThetaNotAboveOne(theta));
            }
            Ok((theta * theta - 1.0) / (theta * theta + 1.0))
        }
    }
}

/// Law at `x` given the spin `(kappa, i)` at the neighbour and the law `prior` with that edge removed.
pub fn conditional_law(z: &FullBoundaryLaw, theta: f64, kappa: i8, i: usize, prior: &[f64]) -> Vec<f64> {
    let q = z.q();
    let mut out = vec![0.0; 2 * q];
    for (s, eps) in [-1i8, 1].into_iter().enumerate() {
        for j in 0..q {
            let e = if i == j { (kappa * eps) as i32 } else { 0 };
            out[s * q + j] = theta.powi(e) * z.get(eps, j) * prior[s * q + j];
        }
    }
    let tot: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= tot);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MswVerdict {
    Extreme,
    Inconclusive,
}

impl MswVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            MswVerdict::Extreme => "extreme",
            MswVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalityReport {
    pub theta: f64,
    pub measure_id: MeasureId,
    pub w: f64,
    pub kappa: f64,
    pub gamma_bound: f64,
    pub product: f64,
    pub lambda2: f64,
    pub msw_verdict: MswVerdict,
    pub ks_verdict: KsVerdict,
}

/// MSW product along a branch, without the spectral part.
pub fn msw_product(measure: MeasureId, p: &ModelParams) -> Result<(f64, f64, f64, f64)> {
    let w = branch_w(measure, p)?;
    let kappa = if measure == MeasureId::Free { kappa_free(p.theta, p.q) } else { kappa_closed(p.theta, w, p.q)? };
    let gamma = gamma_bound(measure, p.theta)?;
    Ok((w, kappa, gamma, p.k as f64 * kappa * gamma))
}

pub fn msw_check(measure: MeasureId, p: &ModelParams, layout: BranchLayout) -> Result<ExtremalityReport> {
    let (w, kappa, gamma, product) = msw_product(measure, p)?;
    let sp = spectrum(&build_transition(&layout_law(w, p.q, layout), p), p.k)?;
    Ok(ExtremalityReport {
        theta: p.theta,
        measure_id: measure,
        w,
        kappa,
        gamma_bound: gamma,
        product,
        lambda2: sp.lambda2,
        msw_verdict: if product < 1.0 { MswVerdict::Extreme } else { MswVerdict::Inconclusive },
        ks_verdict: sp.verdict,
    })
}

/// First theta above the branch onset where `k kappa gamma` reaches 1.
pub fn msw_threshold(measure: MeasureId, p: &ModelParams) -> Result<f64> {
    if measure == MeasureId::Free {
        return Err(Error::InvalidParams("use mu1_cubic_roots for the free measure".into()));
    }
    let f = |t: f64| msw_product(measure, &p.with_theta(t)).map(|r| r.3 - 1.0).unwrap_or(f64::NAN);
    first_crossing(f, branch_onset(p) + 1e-9, 200.0, 20000)
}

/// Positive roots of `2 theta^3 - 3 theta^2 - 2 q theta + 1`.
pub fn mu1_cubic_roots(q: usize) -> Result<Vec<f64>> {
    let c = Polynomial::new(vec![1.0, -2.0 * q as f64, -3.0, 2.0]);
    Ok(positive_roots(&c, DEFAULT_TOL)?.values())
}
