//! Translation-invariant boundary laws: the fixed-point map, the reduced
//! three-variable system on the invariant sets, and its case solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{big_theta, tau, ModelParams};
use crate::rootfind::{positive_roots, Polynomial, DEFAULT_TOL};

/// Acceptance threshold for a candidate fixed point.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Boundary law `z_{eps,i}`, normalized so that `z_{-1,q} = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullBoundaryLaw {
    pub z_minus: Vec<f64>,
    pub z_plus: Vec<f64>,
}

impl FullBoundaryLaw {
    pub fn q(&self) -> usize {
        self.z_minus.len()
    }

    pub fn ones(q: usize) -> Self {
        FullBoundaryLaw { z_minus: vec![1.0; q], z_plus: vec![1.0; q] }
    }

    /// Row `eta` (`-1` or `1`).
    pub fn row(&self, eta: i8) -> &[f64] {
        if eta < 0 {
            &self.z_minus
        } else {
            &self.z_plus
        }
    }

    pub fn get(&self, eta: i8, i: usize) -> f64 {
        self.row(eta)[i]
    }

    /// Divide every entry by `z_{-1,q}`.
    pub fn normalized(mut self) -> Self {
        let s = *self.z_minus.last().expect("empty law");
        self.z_minus.iter_mut().for_each(|x| *x /= s);
        self.z_plus.iter_mut().for_each(|x| *x /= s);
        self
    }

    /// Exchange the two rows and renormalize.
    pub fn swapped(&self) -> Self {
        FullBoundaryLaw { z_minus: self.z_plus.clone(), z_plus: self.z_minus.clone() }.normalized()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.z_minus.iter().chain(self.z_plus.iter()).copied()
    }

    /// Max relative entrywise distance.
    pub fn distance(&self, o: &Self) -> f64 {
        self.iter()
            .zip(o.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs() / a.abs().max(b.abs()).max(1.0)))
    }

    pub fn is_positive(&self) -> bool {
        self.iter().all(|x| x > 0.0 && x.is_finite())
    }
}

fn weight(theta: f64, e: i8, i: usize, j: usize) -> f64 {
    if i == j {
        if e > 0 {
            theta
        } else {
            1.0 / theta
        }
    } else {
        1.0
    }
}

/// `sum_{eta,j} theta^{eps eta delta_ij} z_{eta,j}`.
fn gibbs_sum(z: &FullBoundaryLaw, theta: f64, eps: i8, i: usize) -> f64 {
    let mut s = 0.0;
    for eta in [-1i8, 1] {
        for (j, zj) in z.row(eta).iter().enumerate() {
            s += weight(theta, eps * eta, i, j) * zj;
        }
    }
    s
}

/// One application of the boundary-law recursion.
pub fn fixed_point_map(z: &FullBoundaryLaw, p: &ModelParams) -> FullBoundaryLaw {
    let q = z.q();
    let den = gibbs_sum(z, p.theta, -1, q - 1);
    let k = p.k as i32;
    let row = |eps: i8| -> Vec<f64> {
        (0..q).map(|i| (gibbs_sum(z, p.theta, eps, i) / den).powi(k)).collect()
    };
    let mut out = FullBoundaryLaw { z_minus: row(-1), z_plus: row(1) };
    out.z_minus[q - 1] = 1.0;
    out
}

/// `||F(z) - z||_inf`.
pub fn law_residual(z: &FullBoundaryLaw, p: &ModelParams) -> f64 {
    let f = fixed_point_map(z, p);
    f.iter().zip(z.iter()).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    Free,
    SymW1,
    SymWne1,
    AsymW1,
    AsymWne1,
}

impl CaseTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseTag::Free => "free",
            CaseTag::SymW1 => "sym_w1",
            CaseTag::SymWne1 => "sym_wne1",
            CaseTag::AsymW1 => "asym_w1",
            CaseTag::AsymWne1 => "asym_wne1",
        }
    }
}

/// Solution `(u, v, w)` of the reduced system with `|M| = m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedSolution {
    pub m: usize,
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub case_tag: CaseTag,
    pub branch: u8,
    /// 2 when the defining root is (numerically) double.
    pub root_multiplicity: u8,
}

impl ReducedSolution {
    fn new(m: usize, u: f64, v: f64, w: f64, case_tag: CaseTag, branch: u8) -> Self {
        ReducedSolution { m, u, v, w, case_tag, branch, root_multiplicity: 1 }
    }

    pub fn uvw(&self) -> [f64; 3] {
        [self.u, self.v, self.w]
    }
}

/// Right-hand side of the reduced system for cardinality `m`.
pub fn reduced_map(uvw: [f64; 3], m: usize, p: &ModelParams) -> [f64; 3] {
    let [u, v, w] = uvw;
    let (th, ti) = (p.theta, 1.0 / p.theta);
    let (q, mf) = (p.q as f64, m as f64);
    let d = mf * u + mf * v + (ti + q - mf - 1.0) * w + th + q - mf - 1.0;
    let nu = (th + mf - 1.0) * u + (ti + mf - 1.0) * v + (q - mf) * w + (q - mf);
    let nv = (ti + mf - 1.0) * u + (th + mf - 1.0) * v + (q - mf) * w + (q - mf);
    let nw = mf * u + mf * v + (th + q - mf - 1.0) * w + ti + q - mf - 1.0;
    let k = p.k as i32;
    [(nu / d).powi(k), (nv / d).powi(k), (nw / d).powi(k)]
}

pub fn reduced_residual(uvw: [f64; 3], m: usize, p: &ModelParams) -> f64 {
    let f = reduced_map(uvw, m, p);
    (0..3).fold(0.0, |acc, i| acc.max((f[i] - uvw[i]).abs()))
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&a);
    if d.abs() < 1e-300 || !d.is_finite() {
        return None;
    }
    let mut x = [0.0; 3];
    for c in 0..3 {
        let mut ac = a;
        for r in 0..3 {
            ac[r][c] = b[r];
        }
        x[c] = det(&ac) / d;
    }
    Some(x)
}

/// One Newton step on `log G(e^x) - x = 0`.
fn newton_step(x: [f64; 3], m: usize, p: &ModelParams) -> Option<[f64; 3]> {
    let g = |x: [f64; 3]| -> [f64; 3] {
        let f = reduced_map([x[0].exp(), x[1].exp(), x[2].exp()], m, p);
        [f[0].ln() - x[0], f[1].ln() - x[1], f[2].ln() - x[2]]
    };
    let g0 = g(x);
    let mut jac = [[0.0; 3]; 3];
    for c in 0..3 {
        let h = 1e-7 * x[c].abs().max(1.0);
        let (mut xp, mut xm) = (x, x);
        xp[c] += h;
        xm[c] -= h;
        let (gp, gm) = (g(xp), g(xm));
        for r in 0..3 {
            jac[r][c] = (gp[r] - gm[r]) / (2.0 * h);
        }
    }
    let dx = solve3(jac, [-g0[0], -g0[1], -g0[2]])?;
    let nx = [x[0] + dx[0], x[1] + dx[1], x[2] + dx[2]];
    nx.iter().all(|v| v.is_finite()).then_some(nx)
}

/// Newton polish in log coordinates; keeps the input if no step improves it.
pub fn polish(uvw: [f64; 3], m: usize, p: &ModelParams) -> [f64; 3] {
    let mut best = uvw;
    let mut best_r = reduced_residual(uvw, m, p);
    let mut x = [uvw[0].ln(), uvw[1].ln(), uvw[2].ln()];
    for _ in 0..6 {
        if best_r < 1e-14 {
            break;
        }
        let Some(nx) = newton_step(x, m, p) else { break };
        let cand = [nx[0].exp(), nx[1].exp(), nx[2].exp()];
        let r = reduced_residual(cand, m, p);
        if r < best_r {
            best = cand;
            best_r = r;
            x = nx;
        } else {
            break;
        }
    }
    best
}

/// Polish and keep only residual-verified candidates.
fn accept(mut s: ReducedSolution, p: &ModelParams) -> Option<ReducedSolution> {
    if !s.uvw().iter().all(|x| *x > 0.0 && x.is_finite()) {
        return None;
    }
    if s.case_tag != CaseTag::Free {
        let x = polish(s.uvw(), s.m, p);
        let moved = (0..3).any(|i| (x[i] - s.uvw()[i]).abs() > 1e-3 * s.uvw()[i]);
        if !moved {
            [s.u, s.v, s.w] = x;
        }
    }
    (residual(&s, p) < RESIDUAL_TOL).then_some(s)
}

fn check_m(m: usize, p: &ModelParams) -> Result<()> {
    if m < 1 || m > p.m_max() {
        return Err(Error::MOutOfRange { m, max: p.m_max() });
    }
    Ok(())
}

/// Places `(u, v)` on `subset` and `(1, w)` elsewhere; free solutions ignore `subset`.
pub fn embed(sol: &ReducedSolution, subset: &[usize], swap_rows: bool, q: usize) -> Result<FullBoundaryLaw> {
    let mut z = FullBoundaryLaw { z_minus: vec![1.0; q], z_plus: vec![sol.w; q] };
    if sol.case_tag != CaseTag::Free {
        if subset.len() != sol.m || subset.iter().any(|&i| i >= q) {
            return Err(Error::InvalidParams(format!("subset {subset:?} does not match m = {}", sol.m)));
        }
        for &i in subset {
            z.z_minus[i] = sol.u;
            z.z_plus[i] = sol.v;
        }
    }
    if swap_rows {
        let d = (sol.u - sol.v).powi(2) + (sol.w - 1.0).powi(2);
        if d == 0.0 {
            return Err(Error::SwapOnSymmetric);
        }
        return Ok(z.swapped());
    }
    Ok(z.normalized())
}

/// Embedding on the first `m` coordinates.
pub fn embed_default(sol: &ReducedSolution, q: usize) -> FullBoundaryLaw {
    let subset: Vec<usize> = (0..sol.m).collect();
    embed(sol, &subset, false, q).expect("default embedding")
}

pub fn residual(sol: &ReducedSolution, p: &ModelParams) -> f64 {
    law_residual(&embed_default(sol, p.q), p)
}

/// Free solutions `(1, 1, w)`: `w = 1` plus `z_* < 1 < z^*` above the threshold.
pub fn solve_free(p: &ModelParams) -> Vec<ReducedSolution> {
    let mut out = vec![ReducedSolution::new(0, 1.0, 1.0, 1.0, CaseTag::Free, 0)];
    let bt = big_theta(p.theta, p.q);
    let k = p.k;
    // u^{k+1} - Theta u^k + Theta u - 1 divided by (u - 1)
    let mut c = vec![0.0; k + 2];
    c[0] = -1.0;
    c[1] = bt;
    c[k] = -bt;
    c[k + 1] = 1.0;
    let (quot, _) = Polynomial::new(c).div_rem(&Polynomial::new(vec![-1.0, 1.0]));
    let Ok(roots) = positive_roots(&quot, DEFAULT_TOL) else { return out };
    let mut branch = 1;
    for r in roots.roots {
        if (r.value - 1.0).abs() < 1e-7 {
            continue;
        }
        let w = r.value.powi(k as i32);
        let mut s = ReducedSolution::new(0, 1.0, 1.0, w, CaseTag::Free, branch);
        s.root_multiplicity = r.multiplicity as u8;
        if let Some(s) = accept(s, p) {
            out.push(s);
            branch += 1;
        }
    }
    out
}

/// Polynomial whose roots `z = u^{1/k}` give the `u = v`, `w = 1` solutions.
pub fn sym_w1_polynomial(m: usize, p: &ModelParams) -> Polynomial {
    let mut c = vec![0.0; p.k + 1];
    c[0] = (p.q - m) as f64;
    for cj in c.iter_mut().take(p.k).skip(1) {
        *cj = -(tau(p.theta) - 1.0);
    }
    c[p.k] = m as f64;
    Polynomial::new(c)
}

/// Closed-form roots for k = 2: `((theta - 1)^2 -+ sqrt(D)) / (4 m theta)`.
pub fn sym_w1_k2_closed(m: usize, theta: f64, q: usize) -> Option<[f64; 2]> {
    let d = sym_w1_discriminant(m, theta, q);
    if d < 0.0 {
        return None;
    }
    let s = d.sqrt();
    let den = 4.0 * m as f64 * theta;
    Some([((theta - 1.0).powi(2) - s) / den, ((theta - 1.0).powi(2) + s) / den])
}

pub fn sym_w1_discriminant(m: usize, theta: f64, q: usize) -> f64 {
    let (m, q) = (m as f64, q as f64);
    theta.powi(4) - 4.0 * theta.powi(3) + (16.0 * m * m - 16.0 * m * q + 6.0) * theta * theta - 4.0 * theta + 1.0
}

pub fn solve_sym_w1(m: usize, p: &ModelParams) -> Result<Vec<ReducedSolution>> {
    check_m(m, p)?;
    let roots = positive_roots(&sym_w1_polynomial(m, p), DEFAULT_TOL)?;
    let mut out = vec![];
    for (b, r) in roots.roots.iter().enumerate() {
        if (r.value - 1.0).abs() < 1e-7 {
            continue;
        }
        let u = r.value.powi(p.k as i32);
        let mut s = ReducedSolution::new(m, u, u, 1.0, CaseTag::SymW1, b as u8);
        s.root_multiplicity = r.multiplicity as u8;
        if let Some(s) = accept(s, p) {
            out.push(s);
        }
    }
    Ok(out)
}

fn require_k2_above_one(p: &ModelParams) -> Result<()> {
    if p.k != 2 {
        return Err(Error::InvalidParams(format!("case solver requires k = 2, got {}", p.k)));
    }
    Ok(())
}

/// `t(z)` as numerator / denominator polynomials in `z` (u = v = z^2, w = t^2).
pub fn sym_wne1_t_rational(m: usize, p: &ModelParams) -> (Polynomial, Polynomial) {
    let th = p.theta;
    let (q, m) = (p.q as f64, m as f64);
    let a = (m - q + 1.0) * th * th + (q + m - 2.0) * th + 1.0;
    let b = (q - m - 1.0) * th * th + (q - m) * th + 1.0;
    let num = Polynomial::new(vec![0.0, b, a]);
    let den = Polynomial::new(vec![(q - m) * th, (m - q + 1.0) * th - 1.0]).scale(th + 1.0);
    (num, den)
}

/// Quartic in `z` obtained by substituting `t(z)` into the `u` equation.
pub fn sym_wne1_quartic(m: usize, p: &ModelParams) -> Result<Polynomial> {
    let th = p.theta;
    let ti = 1.0 / th;
    let (q, mf) = (p.q as f64, m as f64);
    let (a, b) = sym_wne1_t_rational(m, p);
    let a2 = a.mul(&a);
    let b2 = b.mul(&b);
    let z2 = Polynomial::new(vec![0.0, 0.0, 1.0]);
    // z * den(z, t) - num(z, t), scaled by b(z)^2
    let den = z2
        .scale(2.0 * mf)
        .mul(&b2)
        .add(&a2.scale(ti + q - mf - 1.0))
        .add(&b2.scale(th + q - mf - 1.0));
    let num = z2
        .scale(th + ti + 2.0 * (mf - 1.0))
        .mul(&b2)
        .add(&a2.scale(q - mf))
        .add(&b2.scale(q - mf));
    let quintic = Polynomial::new(vec![0.0, 1.0]).mul(&den).sub(&num);
    // the zero of the t-denominator is an extraneous root
    let (quartic, rem) = quintic.div_rem(&b);
    let scale = quintic.max_abs_coeff();
    let quartic = Polynomial::new(
        quartic.coeffs().iter().map(|c| if c.abs() <= 1e-13 * scale { 0.0 } else { *c }).collect(),
    );
    if rem.max_abs_coeff() > 1e-8 * scale || quartic.degree() != 4 {
        return Err(Error::EliminationDegree(quartic.degree()));
    }
    Ok(quartic)
}

pub fn solve_sym_wne1(m: usize, p: &ModelParams) -> Result<Vec<ReducedSolution>> {
    require_k2_above_one(p)?;
    check_m(m, p)?;
    if p.theta <= 1.0 {
        return Ok(vec![]);
    }
    let quartic = sym_wne1_quartic(m, p)?;
    let (tn, td) = sym_wne1_t_rational(m, p);
    let roots = positive_roots(&quartic, DEFAULT_TOL)?;
    let mut out = vec![];
    for (b, r) in roots.roots.iter().enumerate() {
        let z = r.value;
        let t = tn.eval(z) / td.eval(z);
        if !(t > 0.0) || (t - 1.0).abs() < 1e-9 {
            continue;
        }
        let mut s = ReducedSolution::new(m, z * z, z * z, t * t, CaseTag::SymWne1, b as u8);
        s.root_multiplicity = r.multiplicity as u8;
        if let Some(s) = accept(s, p) {
            out.push(s);
        }
    }
    Ok(out)
}

/// `(h, g)` candidates of the `w = 1`, `u != v` case, with `g = z + s`, `h = z^2 + s^2`.
pub fn asym_w1_gh(m: usize, theta: f64, q: usize) -> Vec<(f64, f64)> {
    let (mf, qf) = (m as f64, q as f64);
    let ti = 1.0 / theta;
    let c = theta + ti + 2.0 * (qf - mf - 1.0);
    let d = theta - ti;
    let qa = mf * mf;
    let qb = 2.0 * mf * c - d * (theta + ti + 2.0 * mf - 2.0);
    let qc = c * c - 4.0 * (qf - mf) * d;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return vec![];
    }
    let s = disc.sqrt();
    [(-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)]
        .into_iter()
        .map(|h| (h, (mf * h + c) / d))
        .collect()
}

/// Discriminant of the quadratic in `h`.
pub fn asym_w1_discriminant(m: usize, theta: f64, q: usize) -> f64 {
    let (mf, qf) = (m as f64, q as f64);
    let ti = 1.0 / theta;
    let c = theta + ti + 2.0 * (qf - mf - 1.0);
    let d = theta - ti;
    let qb = 2.0 * mf * c - d * (theta + ti + 2.0 * mf - 2.0);
    qb * qb - 4.0 * mf * mf * (c * c - 4.0 * (qf - mf) * d)
}

pub fn solve_asym_w1(m: usize, p: &ModelParams) -> Result<Vec<ReducedSolution>> {
    require_k2_above_one(p)?;
    check_m(m, p)?;
    if p.theta <= 1.0 {
        return Ok(vec![]);
    }
    let mut out = vec![];
    for (b, (h, g)) in asym_w1_gh(m, p.theta, p.q).into_iter().enumerate() {
        let e = 2.0 * h - g * g;
        if !(h > 0.0 && g > 0.0) || e <= 1e-12 * h {
            continue;
        }
        let z = 0.5 * (g + e.sqrt());
        let s = 0.5 * (g - e.sqrt());
        if s <= 0.0 {
            continue;
        }
        if let Some(sol) = accept(ReducedSolution::new(m, z * z, s * s, 1.0, CaseTag::AsymW1, b as u8), p) {
            out.push(sol);
        }
    }
    Ok(out)
}

/// Sextics `(P, D)` of the elimination route for `u != v`, `w != 1`.
pub fn asym_wne1_sextics(m: usize, theta: f64, q: usize) -> (f64, f64) {
    let (m, q, t) = (m as f64, q as f64, theta);
    let big_p = t.powi(6) + 2.0 * (m - 1.0) * t.powi(5)
        + (m * m + 2.0 * m * q - 2.0 * q * q - 2.0 * m + 4.0 * q - 3.0) * t.powi(4)
        + 2.0 * (m * m - m * q + 2.0 * q * q - 6.0 * q + 6.0) * t.powi(3)
        + (m * m - 2.0 * m * q - 2.0 * q * q + 12.0 * q - 13.0) * t * t
        - 2.0 * (2.0 * q - 3.0) * t
        - 1.0;
    let big_d = t.powi(6) + 2.0 * (m - 1.0) * t.powi(5)
        + (m * m + 4.0 * m * q - 4.0 * q * q - 4.0 * m + 8.0 * q - 5.0) * t.powi(4)
        + 2.0 * (m * m - 2.0 * m * q + 4.0 * q * q + 2.0 * m - 12.0 * q + 10.0) * t.powi(3)
        + (m * m - 4.0 * m * q - 4.0 * q * q + 24.0 * q - 25.0) * t * t
        - 2.0 * (4.0 * q + m - 7.0) * t
        - 3.0;
    (big_p, big_d)
}

/// Unfiltered candidates `(u, v, w)` of the sextic elimination route.
pub fn asym_wne1_sextic_candidates(m: usize, theta: f64, q: usize) -> Vec<[f64; 3]> {
    let (big_p, big_d) = asym_wne1_sextics(m, theta, q);
    let (mf, qf, t) = (m as f64, q as f64, theta);
    let lin = (t + 1.0) * ((t - 1.0).powi(2) + t * mf);
    if big_d < 0.0 || t <= 1.0 {
        return vec![];
    }
    let sd = big_d.sqrt();
    let den = (t - 1.0).powi(2) * ((qf - 1.0) * t + 1.0).powi(2);
    let mut out = vec![];
    for sgn in [-1.0, 1.0] {
        let w = 0.5 * (big_p + sgn * lin * sd) / den;
        if !(w > 0.0) {
            continue;
        }
        let cw = ((1.0 / t + qf - 1.0) * w + qf - mf) / (t - 1.0 / t);
        let b = (cw + 1.0 / t).powi(2) + 2.0 / t + 1.0;
        let disc = b * b - 4.0 * cw * cw;
        if disc < 0.0 {
            continue;
        }
        let r1 = 0.5 * (b - disc.sqrt());
        let r2 = 0.5 * (b + disc.sqrt());
        out.push([r2, r1, w]);
        out.push([r1, r1, w]);
        out.push([r2, r2, w]);
    }
    out
}

/// Roots `t` of `t^2 - ((theta - 1/theta)/(1/theta + q - 1)) t + 1 = 0`, `t != 1`.
pub fn asym_wne1_exact_t(theta: f64, q: usize) -> Vec<f64> {
    let beta = (theta - 1.0 / theta) / (1.0 / theta + q as f64 - 1.0);
    let disc = beta * beta - 4.0;
    if disc <= 0.0 {
        return vec![];
    }
    let s = disc.sqrt();
    let big = 0.5 * (beta + s);
    vec![1.0 / big, big]
}

/// Case `u != v`, `w != 1`: residual-filtered sextic candidates plus the exact
/// `{z, s} = {1, t}` family.
pub fn solve_asym_wne1(m: usize, p: &ModelParams) -> Result<Vec<ReducedSolution>> {
    require_k2_above_one(p)?;
    check_m(m, p)?;
    if p.theta <= 1.0 {
        return Ok(vec![]);
    }
    let mut out: Vec<ReducedSolution> = vec![];
    let mut push = |s: ReducedSolution| {
        if let Some(s) = accept(s, p) {
            let dup = out.iter().any(|o| {
                (0..3).all(|i| (o.uvw()[i] - s.uvw()[i]).abs() <= 1e-8 * o.uvw()[i].max(1.0))
            });
            if !dup {
                out.push(s);
            }
        }
    };
    for (b, c) in asym_wne1_sextic_candidates(m, p.theta, p.q).into_iter().enumerate() {
        push(ReducedSolution::new(m, c[0], c[1], c[2], CaseTag::AsymWne1, 10 + b as u8));
    }
    for (b, t) in asym_wne1_exact_t(p.theta, p.q).into_iter().enumerate() {
        let w = t * t;
        push(ReducedSolution::new(m, w, 1.0, w, CaseTag::AsymWne1, 2 * b as u8));
        push(ReducedSolution::new(m, 1.0, w, w, CaseTag::AsymWne1, 2 * b as u8 + 1));
    }
    Ok(out)
}

/// Solution for cardinality `q - m` describing the same measure.
pub fn complement(sol: &ReducedSolution, p: &ModelParams) -> ReducedSolution {
    let s = if sol.case_tag == CaseTag::Free && sol.m == 0 { free_as_m_form(sol, 0) } else { *sol };
    ReducedSolution { m: p.q - s.m, u: 1.0 / s.u, v: s.w / s.u, w: s.v / s.u, ..s }
}

/// Residual of a reduced triple for an arbitrary cardinality `m` in `0..=q`.
pub fn residual_any_m(uvw: [f64; 3], m: usize, p: &ModelParams) -> f64 {
    let mut z = FullBoundaryLaw { z_minus: vec![1.0; p.q], z_plus: vec![uvw[2]; p.q] };
    for i in 0..m {
        z.z_minus[i] = uvw[0];
        z.z_plus[i] = uvw[1];
    }
    law_residual(&z.normalized(), p)
}

/// The free law `(1..1; w..w)` written as a triple on the `m`-invariant set.
pub fn free_as_m_form(sol: &ReducedSolution, m: usize) -> ReducedSolution {
    ReducedSolution { m, u: 1.0, v: sol.w, w: sol.w, ..*sol }
}

/// Every solver output for cardinality `m`, free solutions written in `m`-form.
pub fn solve_all_m(m: usize, p: &ModelParams) -> Result<Vec<ReducedSolution>> {
    let mut out: Vec<ReducedSolution> = solve_free(p).iter().map(|s| free_as_m_form(s, m)).collect();
    out.extend(solve_sym_w1(m, p)?);
    if p.k == 2 {
        out.extend(solve_sym_wne1(m, p)?);
        out.extend(solve_asym_w1(m, p)?);
        out.extend(solve_asym_wne1(m, p)?);
    }
    Ok(out)
}

/// Spin `(eta, i)` with `eta` in `{-1, 1}` and `i` in `0..q`.
pub type Spin = (i8, usize);

/// Two-site marginal `z_{eta,i} theta^{eta eps delta_ij} z_{eps,j} / Z`.
pub fn edge_marginal(z: &FullBoundaryLaw, p: &ModelParams, spins: (Spin, Spin)) -> f64 {
    let w = |a: Spin, b: Spin| z.get(a.0, a.1) * weight(p.theta, a.0 * b.0, a.1, b.1) * z.get(b.0, b.1);
    let mut total = 0.0;
    for a in all_spins(z.q()) {
        for b in all_spins(z.q()) {
            total += w(a, b);
        }
    }
    w(spins.0, spins.1) / total
}

pub fn all_spins(q: usize) -> impl Iterator<Item = Spin> {
    [-1i8, 1].into_iter().flat_map(move |e| (0..q).map(move |i| (e, i)))
}
