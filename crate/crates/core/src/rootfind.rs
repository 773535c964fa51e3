//! Positive real roots of real polynomials (Sturm isolation plus bisection)
//! and bracketed scalar root refinement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-11;

/// Relative threshold used by [`is_double_root`].
pub const DOUBLE_ROOT_REL: f64 = 1e-7;

const MAX_BISECTIONS: usize = 4000;

/// Real polynomial, coefficients in ascending degree order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial and trims exact trailing zeros.
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Polynomial { coeffs };
        p.trim(0.0);
        p
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![] }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c])
    }

    /// `prod (x - r_i)`.
    pub fn from_roots(roots: &[f64]) -> Self {
        roots
            .iter()
            .fold(Polynomial::constant(1.0), |acc, &r| acc.mul(&Polynomial::new(vec![-r, 1.0])))
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn trim(&mut self, eps: f64) {
        while let Some(&c) = self.coeffs.last() {
            if c.abs() <= eps {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| i as f64 * c)
                .collect(),
        )
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Polynomial::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&0.0) + o.coeffs.get(i).unwrap_or(&0.0))
                .collect(),
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    /// Euclidean division, returns (quotient, remainder).
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let mut r = self.coeffs.clone();
        let dn = d.degree();
        if self.coeffs.len() <= dn {
            return (Polynomial::zero(), self.clone());
        }
        let mut q = vec![0.0; self.coeffs.len() - dn];
        let lead = d.leading();
        for i in (0..q.len()).rev() {
            let c = r[i + dn] / lead;
            q[i] = c;
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[i + j] -= c * dc;
            }
            r[i + dn] = 0.0;
        }
        r.truncate(dn);
        (Polynomial::new(q), Polynomial::new(r))
    }

    /// Number of sign changes in the nonzero coefficient sequence.
    pub fn sign_changes(&self) -> usize {
        let signs: Vec<bool> = self.coeffs.iter().filter(|c| **c != 0.0).map(|c| *c > 0.0).collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }
}

/// Upper bound on the number of positive roots (Descartes' rule of signs).
pub fn descartes_positive_bound(p: &Polynomial) -> usize {
    p.sign_changes()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<Root>,
    pub tolerance: f64,
}

impl RootSet {
    pub fn values(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.value).collect()
    }

    pub fn count_with_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

/// `|p'(r)| <= 1e-7 * max|coeff| * max(1, |r|)^(deg - 1)`.
pub fn is_double_root(p: &Polynomial, r: f64) -> bool {
    let deg = p.degree();
    if deg < 2 {
        return false;
    }
    let scale = p.max_abs_coeff() * r.abs().max(1.0).powi(deg as i32 - 1);
    p.derivative().eval(r).abs() <= DOUBLE_ROOT_REL * scale
}

struct Sturm {
    seq: Vec<Polynomial>,
}

impl Sturm {
    fn new(p: &Polynomial) -> Self {
        let mut seq = vec![p.clone(), p.derivative()];
        let base = p.max_abs_coeff();
        while !seq.last().unwrap().is_zero() && seq.last().unwrap().degree() > 0 {
            let n = seq.len();
            let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
            let mut r = r.scale(-1.0);
            let eps = 1e-12 * seq[n - 2].max_abs_coeff().max(base * 1e-300);
            r.coeffs.iter_mut().for_each(|c| {
                if c.abs() <= eps {
                    *c = 0.0
                }
            });
            r.trim(0.0);
            if r.is_zero() {
                break;
            }
            // normalize to keep magnitudes tame; positive scaling keeps signs
            let m = r.max_abs_coeff();
            seq.push(r.scale(1.0 / m));
        }
        Sturm { seq }
    }

    fn variations_at(&self, x: f64) -> usize {
        let s: Vec<f64> = self.seq.iter().map(|p| p.eval(x)).filter(|v| *v != 0.0).collect();
        s.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count()
    }

    /// Variations just to the right of 0: sign of the lowest-order nonzero coefficient.
    fn variations_at_zero_plus(&self) -> usize {
        let s: Vec<f64> = self
            .seq
            .iter()
            .filter_map(|p| p.coeffs.iter().copied().find(|c| *c != 0.0))
            .collect();
        s.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count()
    }

    /// Distinct roots in (a, b].
    fn count(&self, a: f64, b: f64) -> usize {
        let va = if a == 0.0 { self.variations_at_zero_plus() } else { self.variations_at(a) };
        va.saturating_sub(self.variations_at(b))
    }
}

/// Cauchy bound on the modulus of all roots.
pub fn cauchy_bound(p: &Polynomial) -> f64 {
    let lead = p.leading().abs();
    1.0 + p.coeffs[..p.degree()].iter().fold(0.0f64, |m, c| m.max(c.abs() / lead))
}

/// All roots in (0, inf) to absolute accuracy `tol`, with multiplicity 1 or 2.
pub fn positive_roots(p: &Polynomial, tol: f64) -> Result<RootSet> {
    if p.is_zero() {
        return Err(Error::InvalidParams("zero polynomial".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("tol = {tol}")));
    }
    // strip roots at the origin
    let shift = p.coeffs.iter().position(|c| *c != 0.0).unwrap_or(0);
    let p = Polynomial::new(p.coeffs[shift..].to_vec());
    let mut out = RootSet { roots: vec![], tolerance: tol };
    if p.degree() == 0 {
        return Ok(out);
    }
    let sturm = Sturm::new(&p);
    let b = cauchy_bound(&p);
    let mut stack = vec![(0.0, b, sturm.count(0.0, b))];
    let mut intervals = vec![];
    let mut budget = MAX_BISECTIONS;
    while let Some((a, c, n)) = stack.pop() {
        if n == 0 {
            continue;
        }
        if n == 1 || c - a <= tol * 0.5 {
            intervals.push((a, c, n));
            continue;
        }
        budget = budget
            .checked_sub(1)
            .ok_or_else(|| Error::IsolationFailed(format!("{n} roots in [{a}, {c}]")))?;
        let mid = 0.5 * (a + c);
        let nl = sturm.count(a, mid);
        let nr = sturm.count(mid, c);
        stack.push((mid, c, nr));
        stack.push((a, mid, nl));
    }
    for (a, c, n) in intervals {
        let (fa, fc) = (p.eval(a), p.eval(c));
        let value = if fa == 0.0 && a > 0.0 {
            a
        } else if fa * fc < 0.0 {
            bisect(|x| p.eval(x), a, c, tol)
        } else {
            // even multiplicity (or a cluster): follow the derivative
            let dp = p.derivative();
            let (da, dc) = (dp.eval(a), dp.eval(c));
            if da * dc < 0.0 {
                bisect(|x| dp.eval(x), a, c, tol)
            } else {
                0.5 * (a + c)
            }
        };
        let mult = if n >= 2 || fa * fc > 0.0 || is_double_root(&p, value) { 2 } else { 1 };
        out.roots.push(Root { value, multiplicity: mult });
    }
    out.roots.sort_by(|x, y| x.value.total_cmp(&y.value));
    // merge numerically coincident roots
    let mut merged: Vec<Root> = vec![];
    for r in out.roots {
        match merged.last_mut() {
            Some(last) if (r.value - last.value).abs() <= 1e-7 * r.value.abs().max(1.0) => {
                last.value = 0.5 * (last.value + r.value);
                last.multiplicity = 2;
            }
            _ => merged.push(r),
        }
    }
    out.roots = merged;
    Ok(out)
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Bisection on a sign-changing bracket; the result stays inside `[lo, hi]`.
pub fn bracket_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo * fhi < 0.0) {
        return Err(Error::NoSignChange { lo, hi });
    }
    Ok(bisect(f, lo, hi, tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic(big: f64) -> Polynomial {
        Polynomial::new(vec![-1.0, big, -big, 1.0])
    }

    #[test]
    fn descartes_examples() {
        assert_eq!(descartes_positive_bound(&cubic(4.0)), 3);
        assert_eq!(descartes_positive_bound(&Polynomial::new(vec![1.0, 1.0])), 0);
    }

    #[test]
    fn perfect_square() {
        let r = positive_roots(&Polynomial::new(vec![1.0, -2.0, 1.0]), DEFAULT_TOL).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.roots[0].multiplicity, 2);
        assert!((r.roots[0].value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn free_cubic_three_roots() {
        let r = positive_roots(&cubic(4.0), DEFAULT_TOL).unwrap();
        assert_eq!(r.len(), 3);
        assert!(r.roots.iter().all(|x| x.multiplicity == 1));
        assert!(r.values().iter().any(|v| (v - 1.0).abs() < 1e-10));
    }

    #[test]
    fn extremality_cubic() {
        let p = Polynomial::new(vec![1.0, -10.0, -3.0, 2.0]);
        let v = positive_roots(&p, DEFAULT_TOL).unwrap().values();
        assert_eq!(v.len(), 2);
        assert!((v[0] - 0.097).abs() < 1e-3);
        assert!((v[1] - 3.07).abs() < 1e-2);
    }

    #[test]
    fn division_roundtrip() {
        let a = Polynomial::from_roots(&[1.0, 2.0, -3.0]);
        let b = Polynomial::new(vec![-2.0, 1.0]);
        let (q, r) = a.div_rem(&b);
        assert!(r.max_abs_coeff() < 1e-12);
        assert!(q.sub(&Polynomial::from_roots(&[1.0, -3.0])).max_abs_coeff() < 1e-12);
    }

    #[test]
    fn bracket_sqrt2() {
        let r = bracket_root(|x| x * x - 2.0, 1.0, 2.0, 1e-12).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        assert!(bracket_root(|x| x * x + 1.0, 0.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn bracket_deterministic() {
        let f = |x: f64| x.powi(3) - x - 1.0;
        let a = bracket_root(f, 1.0, 2.0, 1e-13).unwrap();
        let b = bracket_root(f, 1.0, 2.0, 1e-13).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn root_at_origin_ignored() {
        let p = Polynomial::from_roots(&[0.0, 2.0]);
        assert_eq!(positive_roots(&p, DEFAULT_TOL).unwrap().values().len(), 1);
    }
}
