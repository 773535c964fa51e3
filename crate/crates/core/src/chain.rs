//! Tree-indexed Markov chain of a boundary law and the Kesten-Stigum test.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{big_theta, theta_c0, ModelParams};
use crate::rootfind::bracket_root;
use crate::tisgm::{solve_free, FullBoundaryLaw};

/// Row-stochastic `2q x 2q` matrix; state `(eta, i)` has index `i` for `eta = -1`
/// and `q + i` for `eta = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    pub q: usize,
    pub rows: Vec<Vec<f64>>,
}

impl TransitionMatrix {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |r, c| self.rows[r][c])
    }

    pub fn max_row_sum_error(&self) -> f64 {
        self.rows.iter().map(|r| (r.iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }
}

pub fn state_index(q: usize, eta: i8, i: usize) -> usize {
    if eta < 0 {
        i
    } else {
        q + i
    }
}

pub fn build_transition(z: &FullBoundaryLaw, p: &ModelParams) -> TransitionMatrix {
    let q = z.q();
    let mut rows = vec![vec![0.0; 2 * q]; 2 * q];
    for eta in [-1i8, 1] {
        for i in 0..q {
            let row = &mut rows[state_index(q, eta, i)];
            for eps in [-1i8, 1] {
                for j in 0..q {
                    let e = if i == j { (eta * eps) as i32 } else { 0 };
                    row[state_index(q, eps, j)] = p.theta.powi(e) * z.get(eps, j);
                }
            }
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x /= s);
        }
    }
    TransitionMatrix { q, rows }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KsVerdict {
    NonExtreme,
    Inconclusive,
}

impl KsVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            KsVerdict::NonExtreme => "non_extreme",
            KsVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    /// `(re, im)` pairs sorted by modulus, descending.
    pub eigenvalues: Vec<(f64, f64)>,
    pub lambda2: f64,
    pub ks_statistic: f64,
    pub verdict: KsVerdict,
}

const SCHUR_MAX_ITER: usize = 20_000;

/// `D^{1/2} P D^{-1/2}` with `D = diag(pi)` when the chain is reversible.
fn symmetrized(pm: &TransitionMatrix) -> Option<DMatrix<f64>> {
    let pi = stationary(pm).ok()?;
    if pi.iter().any(|x| !(*x > 0.0)) {
        return None;
    }
    let n = pm.dim();
    let mut s = DMatrix::<f64>::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let (f, r) = (pi[a] * pm.rows[a][b], pi[b] * pm.rows[b][a]);
            if (f - r).abs() > 1e-9 * f.max(r) + 1e-15 {
                return None;
            }
            s[(a, b)] = pm.rows[a][b] * (pi[a] / pi[b]).sqrt();
        }
    }
    Some((&s + s.transpose()) * 0.5)
}

pub fn spectrum(pm: &TransitionMatrix, k: usize) -> Result<SpectralReport> {
    let m = pm.to_dmatrix();
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Eigen("non-finite matrix entry".into()));
    }
    let mut eigenvalues: Vec<(f64, f64)> = match symmetrized(pm) {
        Some(s) => SymmetricEigen::new(s).eigenvalues.iter().map(|x| (*x, 0.0)).collect(),
        None => {
            let schur = Schur::try_new(m, f64::EPSILON, SCHUR_MAX_ITER)
                .ok_or_else(|| Error::Eigen(format!("Schur iteration did not converge in {SCHUR_MAX_ITER} steps")))?;
            schur.complex_eigenvalues().iter().map(|c| (c.re, c.im)).collect()
        }
    };
    if eigenvalues.iter().any(|(r, i)| !r.is_finite() || !i.is_finite()) {
        return Err(Error::Eigen("non-finite eigenvalue".into()));
    }
    let modulus = |e: &(f64, f64)| e.0.hypot(e.1);
    eigenvalues.sort_by(|a, b| modulus(b).total_cmp(&modulus(a)).then(b.0.total_cmp(&a.0)));
    let lambda2 = eigenvalues.get(1).map(modulus).unwrap_or(0.0);
    let ks_statistic = k as f64 * lambda2 * lambda2;
    let verdict = if ks_statistic > 1.0 { KsVerdict::NonExtreme } else { KsVerdict::Inconclusive };
    Ok(SpectralReport { eigenvalues, lambda2, ks_statistic, verdict })
}

/// Stationary distribution (left eigenvector for eigenvalue 1, summing to 1).
pub fn stationary(pm: &TransitionMatrix) -> Result<Vec<f64>> {
    let n = pm.dim();
    let mut a = pm.to_dmatrix().transpose() - DMatrix::<f64>::identity(n, n);
    let mut b = DVector::<f64>::zeros(n);
    for c in 0..n {
        a[(n - 1, c)] = 1.0;
    }
    b[n - 1] = 1.0;
    let x = a.lu().solve(&b).ok_or_else(|| Error::Eigen("singular stationary system".into()))?;
    Ok(x.iter().copied().collect())
}

/// Closed-form spectrum of the free-law chain as `(value, multiplicity)`.
pub fn free_spectrum(theta: f64, q: usize) -> Vec<(f64, usize)> {
    let den = theta * theta + 2.0 * (q as f64 - 1.0) * theta + 1.0;
    vec![
        (1.0, 1),
        ((theta - 1.0).powi(2) / den, q - 1),
        ((theta * theta - 1.0) / den, q),
    ]
}

/// `theta_1(q)` with the Kesten-Stigum region of the free law being outside `[1/theta_1, theta_1]`.
pub fn ks_theta1(q: usize) -> f64 {
    let a = q as f64 - 1.0;
    (a + (a * a + 1.0).sqrt()) / (2f64.sqrt() - 1.0)
}

pub fn ks_region_free(q: usize) -> (f64, f64) {
    let t = ks_theta1(q);
    (1.0 / t, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureId {
    /// All-ones boundary law.
    Free,
    /// Free branch with `w = z_* < 1`.
    MuStar,
    /// Free branch with `w = z^* > 1`.
    MuStarStar,
}

impl MeasureId {
    pub fn as_str(&self) -> &'static str {
        match self {
            MeasureId::Free => "free",
            MeasureId::MuStar => "mu_star",
            MeasureId::MuStarStar => "mu_star_star",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "free" => Some(MeasureId::Free),
            "mu_star" => Some(MeasureId::MuStar),
            "mu_star_star" => Some(MeasureId::MuStarStar),
            _ => None,
        }
    }
}

/// Placement of `w` in the boundary law of the `w != 1` free branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchLayout {
    /// `z_{-1,i} = 1`, `z_{1,1} = 1`, `z_{1,j} = w` for `j >= 2`.
    Pinned,
    /// `z_{-1,i} = 1`, `z_{1,j} = w` for all `j` (a fixed point of the map).
    Uniform,
}

/// `w` of the requested free branch at `p.theta`.
pub fn branch_w(measure: MeasureId, p: &ModelParams) -> Result<f64> {
    if measure == MeasureId::Free {
        return Ok(1.0);
    }
    let sols = solve_free(p);
    let pick = match measure {
        MeasureId::MuStar => sols.iter().find(|s| s.w < 1.0),
        _ => sols.iter().find(|s| s.w > 1.0),
    };
    pick.map(|s| s.w).ok_or(Error::BranchAbsent(p.theta))
}

pub fn layout_law(w: f64, q: usize, layout: BranchLayout) -> FullBoundaryLaw {
    let mut z_plus = vec![w; q];
    if layout == BranchLayout::Pinned {
        z_plus[0] = 1.0;
    }
    FullBoundaryLaw { z_minus: vec![1.0; q], z_plus }
}

pub fn measure_law(measure: MeasureId, p: &ModelParams, layout: BranchLayout) -> Result<FullBoundaryLaw> {
    Ok(layout_law(branch_w(measure, p)?, p.q, layout))
}

pub fn measure_spectrum(measure: MeasureId, p: &ModelParams, layout: BranchLayout) -> Result<SpectralReport> {
    spectrum(&build_transition(&measure_law(measure, p, layout)?, p), p.k)
}

/// Second eigenvalue of the `mu_star` chain (q = 5, pinned layout).
pub fn lambda1_mu_star(theta: f64, w: f64) -> f64 {
    (theta * theta - 1.0) / (theta * theta + 4.0 * theta * w + 4.0 * theta + 1.0)
}

/// Second eigenvalue of the `mu_star_star` chain (q = 5, pinned layout).
pub fn lambda4_mu_star_star(theta: f64, w: f64) -> f64 {
    let t = theta;
    let d1 = (3.0 * t + 1.0).powi(2) * t * t * w.powi(4)
        + 4.0 * (3.0 * t.powi(3) + 4.0 * t * t + 10.0 * t + 3.0) * t * w.powi(3)
        - 2.0 * (11.0 * t.powi(4) - 8.0 * t.powi(3) - 59.0 * t * t - 16.0 * t - 2.0) * w * w
        - 4.0 * (5.0 * t.powi(3) - 4.0 * t * t - 26.0 * t - 5.0) * t * w
        + (5.0 * t + 1.0).powi(2) * t * t;
    let m = (3.0 * t.powi(3) + 10.0 * t * t + 3.0 * t) * w * w
        + (t.powi(4) + 8.0 * t.powi(3) + 30.0 * t * t + 8.0 * t + 1.0) * w
        + 5.0 * t.powi(3)
        + 26.0 * t * t
        + 5.0 * t;
    (t - 1.0) / (2.0 * m) * ((3.0 * t + 1.0) * t * w * w + 2.0 * (t + 4.0) * t * t * w + 5.0 * t * t + t + d1.sqrt())
}

/// Lowest theta above which the free `w != 1` branches exist.
pub fn branch_onset(p: &ModelParams) -> f64 {
    if p.k == 2 {
        return theta_c0(2, p.q);
    }
    let kf = p.k as f64;
    let target = (kf + 1.0) / (kf - 1.0);
    // big_theta is increasing for theta > 1
    bracket_root(|t| big_theta(t, p.q) - target, 1.0, 1e6, 1e-13).unwrap_or(f64::NAN)
}

/// First sign change of `f` on a grid above `lo`, refined by bisection.
pub(crate) fn first_crossing<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> Result<f64> {
    let step = (hi - lo) / n as f64;
    let mut a = lo;
    let mut fa = f(a);
    for i in 1..=n {
        let b = lo + step * i as f64;
        let fb = f(b);
        if fa.is_finite() && fb.is_finite() && (fa > 0.0) != (fb > 0.0) {
            return bracket_root(&f, a, b, 1e-12);
        }
        a = b;
        fa = fb;
    }
    Err(Error::NoSignChange { lo, hi })
}

const ONSET_OFFSET: f64 = 1e-6;
const THRESHOLD_SCAN_HI: f64 = 200.0;

/// Theta where `k lambda_2^2` crosses 1 along a measure's branch.
pub fn ks_threshold(measure: MeasureId, p: &ModelParams, layout: BranchLayout) -> Result<f64> {
    let f = |t: f64| {
        measure_spectrum(measure, &p.with_theta(t), layout).map(|s| s.ks_statistic - 1.0).unwrap_or(f64::NAN)
    };
    let lo = if measure == MeasureId::Free { 1.0 + ONSET_OFFSET } else { branch_onset(p) + ONSET_OFFSET };
    first_crossing(f, lo, THRESHOLD_SCAN_HI, 4000)
}
