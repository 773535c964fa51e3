//! Model parameters and closed-form critical values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sign of the coupling, read off from theta.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    Ferromagnetic,
    Antiferromagnetic,
    Boundary,
}

impl Coupling {
    pub fn of(theta: f64) -> Self {
        if theta > 1.0 {
            Coupling::Ferromagnetic
        } else if theta < 1.0 {
            Coupling::Antiferromagnetic
        } else {
            Coupling::Boundary
        }
    }
}

/// Branching order `k`, number of Potts states `q`, and `theta = exp(J beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub k: usize,
    pub q: usize,
    pub theta: f64,
}

impl ModelParams {
    pub fn new(k: usize, q: usize, theta: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParams(format!("k = {k} < 2")));
        }
        if q < 2 {
            return Err(Error::InvalidParams(format!("q = {q} < 2")));
        }
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::InvalidParams(format!("theta = {theta} not positive")));
        }
        Ok(ModelParams { k, q, theta })
    }

    pub fn with_theta(&self, theta: f64) -> Self {
        ModelParams { theta, ..*self }
    }

    pub fn coupling(&self) -> Coupling {
        Coupling::of(self.theta)
    }

    /// Largest admissible cardinality `m` of the distinguished coordinate set.
    pub fn m_max(&self) -> usize {
        self.q / 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub big_theta: f64,
    pub tau: f64,
    pub tau_c: f64,
    pub theta_cr: f64,
}

pub fn big_theta(theta: f64, q: usize) -> f64 {
    let q = q as f64;
    (theta + q - 1.0) / (1.0 / theta + q - 1.0)
}

pub fn tau(theta: f64) -> f64 {
    0.5 * (theta + 1.0 / theta)
}

/// `tau + sqrt(tau^2 - 1)`, the larger theta with the given tau.
fn theta_of_tau(t: f64) -> f64 {
    t + ((t - 1.0) * (t + 1.0)).sqrt()
}

pub fn derive(p: &ModelParams) -> DerivedParams {
    let k = p.k as f64;
    let tau_c = (k + p.q as f64 - 1.0) / (k - 1.0);
    DerivedParams {
        big_theta: big_theta(p.theta, p.q),
        tau: tau(p.theta),
        tau_c,
        theta_cr: theta_of_tau(tau_c),
    }
}

/// Threshold above which the free equation has three solutions.
pub fn theta_c0(k: usize, q: usize) -> f64 {
    let (k, q) = (k as f64, q as f64);
    (q - 1.0 + (k * k + q * (q - 2.0)).sqrt()) / (k - 1.0)
}

/// Theta at which the symmetric `w = 1` branch with cardinality `m` is born (k = 2).
pub fn theta_cm_k2(m: usize, q: usize, sign: Coupling) -> Result<f64> {
    if m < 1 || m > q / 2 {
        return Err(Error::MOutOfRange { m, max: q / 2 });
    }
    let p = (m * (q - m)) as f64;
    let hi = 1.0 + 2.0 * p.sqrt() + 2.0 * (p + p.sqrt()).sqrt();
    match sign {
        Coupling::Ferromagnetic => Ok(hi),
        Coupling::Antiferromagnetic => Ok(1.0 / hi),
        Coupling::Boundary => Err(Error::InvalidParams("coupling sign at theta = 1".into())),
    }
}

/// `|J| / ln theta_c`.
pub fn critical_temperature(j: f64, theta_c: f64) -> Result<f64> {
    if !(theta_c > 1.0) {
        return Err(Error::InvalidParams(format!("theta_c = {theta_c} <= 1")));
    }
    Ok(j.abs() / theta_c.ln())
}

/// `theta = exp(J / T)`.
pub fn theta_from_temperature(j: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParams(format!("temperature {t} not positive")));
    }
    Ok((j / t).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derive_at_one() {
        let d = derive(&ModelParams::new(2, 5, 1.0).unwrap());
        assert_eq!(d.big_theta, 1.0);
        assert_eq!(d.tau, 1.0);
        assert_eq!(d.tau_c, 6.0);
        assert!((d.theta_cr - (6.0 + 35f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn derive_big_theta_two() {
        let d = derive(&ModelParams::new(2, 5, 2.0).unwrap());
        assert!((d.big_theta - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn tau_at_theta_cr() {
        let d = derive(&ModelParams::new(2, 5, 6.0 + 35f64.sqrt()).unwrap());
        assert!((d.tau - 6.0).abs() < 1e-13);
    }

    #[test]
    fn theta_c0_values() {
        assert!((theta_c0(2, 5) - (4.0 + 19f64.sqrt())).abs() < 1e-14);
        assert!((theta_c0(2, 2) - 3.0).abs() < 1e-14);
        assert!((theta_c0(3, 5) - (2.0 + 6f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn theta_cm_values() {
        let f = Coupling::Ferromagnetic;
        assert!((theta_cm_k2(1, 5, f).unwrap() - 9.8989).abs() < 1e-4);
        assert!((theta_cm_k2(2, 5, f).unwrap() - 11.7125).abs() < 1e-4);
        assert!((theta_cm_k2(1, 2, f).unwrap() - (3.0 + 2.0 * 2f64.sqrt())).abs() < 1e-13);
        let a = theta_cm_k2(1, 5, Coupling::Antiferromagnetic).unwrap();
        assert!((a * theta_cm_k2(1, 5, f).unwrap() - 1.0).abs() < 1e-14);
        assert!(theta_cm_k2(3, 5, f).is_err());
        assert!(theta_cm_k2(0, 5, f).is_err());
    }

    #[test]
    fn temperatures() {
        assert!((critical_temperature(1.0, std::f64::consts::E).unwrap() - 1.0).abs() < 1e-15);
        assert!((critical_temperature(2.0, 2f64.exp()).unwrap() - 1.0).abs() < 1e-15);
        let t = critical_temperature(1.0, 4.0 + 19f64.sqrt()).unwrap();
        assert!((t - 0.4709).abs() < 1e-4);
        assert!(critical_temperature(1.0, 1.0).is_err());
    }

    #[test]
    fn coupling_sign() {
        assert_eq!(Coupling::of(2.0), Coupling::Ferromagnetic);
        assert_eq!(Coupling::of(0.5), Coupling::Antiferromagnetic);
        assert_eq!(Coupling::of(1.0), Coupling::Boundary);
    }
}
