//! Enumeration of all translation-invariant measures at a given theta, critical
//! value scans, and combinatorial lower bounds.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{big_theta, tau, theta_c0, theta_cm_k2, Coupling, ModelParams};
use crate::rootfind::bracket_root;
use crate::tisgm::{
    asym_w1_discriminant, asym_wne1_sextics, embed, solve_asym_w1, solve_asym_wne1,
    solve_free, solve_sym_w1, solve_sym_wne1, sym_w1_discriminant, CaseTag, FullBoundaryLaw,
    ReducedSolution,
};

/// Two boundary laws closer than this (relative, entrywise) are the same measure.
pub const LAW_DEDUP_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CensusEntry {
    pub solution: ReducedSolution,
    /// Number of distinct boundary laws this entry contributes.
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CensusReport {
    pub theta: f64,
    pub k: usize,
    pub q: usize,
    pub entries: Vec<CensusEntry>,
    pub total: usize,
    /// Keyed by `"<case_tag>/m=<m>"`.
    pub class_counts: BTreeMap<String, usize>,
    /// Set for k >= 3, where only the free and `u = v, w = 1` cases are solved.
    pub partial: bool,
}

/// Set of distinct boundary laws with approximate lookup.
#[derive(Default)]
pub struct LawSet {
    laws: Vec<FullBoundaryLaw>,
    buckets: HashMap<i64, Vec<usize>>,
}

impl LawSet {
    fn key(z: &FullBoundaryLaw) -> i64 {
        let s: f64 = z.iter().sum();
        (s.ln() * 1e5).round() as i64
    }

    /// Inserts `z` unless an equal law is present; returns whether it was new.
    pub fn insert(&mut self, z: FullBoundaryLaw) -> bool {
        let key = Self::key(&z);
        for k in [key - 1, key, key + 1] {
            if let Some(ids) = self.buckets.get(&k) {
                if ids.iter().any(|&i| self.laws[i].distance(&z) <= LAW_DEDUP_TOL) {
                    return false;
                }
            }
        }
        self.buckets.entry(key).or_default().push(self.laws.len());
        self.laws.push(z);
        true
    }

    pub fn len(&self) -> usize {
        self.laws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.laws.is_empty()
    }

    pub fn laws(&self) -> &[FullBoundaryLaw] {
        &self.laws
    }
}

/// All `m`-subsets of `0..q` in lexicographic order.
pub fn subsets(q: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, q: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..q {
            if q - i < m - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, q, m, cur, out);
            cur.pop();
        }
    }
    let mut out = vec![];
    rec(0, q, m, &mut vec![], &mut out);
    out
}

/// Every boundary law obtained from `sol` by choosing the coordinate set and row order.
pub fn orbit_laws(sol: &ReducedSolution, q: usize) -> Vec<FullBoundaryLaw> {
    let subs = if sol.case_tag == CaseTag::Free { vec![vec![]] } else { subsets(q, sol.m) };
    let mut out = vec![];
    for s in &subs {
        out.push(embed(sol, s, false, q).expect("valid subset"));
        // free laws are closed under the row swap as a family; their partner is another branch
        if sol.case_tag != CaseTag::Free {
            if let Ok(z) = embed(sol, s, true, q) {
                out.push(z);
            }
        }
    }
    out
}

/// Solver outputs for `m = 0..=floor(q/2)` in canonical order.
pub fn all_solutions(p: &ModelParams) -> Result<Vec<ReducedSolution>> {
    let mut sols = solve_free(p);
    for m in 1..=p.m_max() {
        sols.extend(solve_sym_w1(m, p)?);
        if p.k == 2 {
            sols.extend(solve_sym_wne1(m, p)?);
            sols.extend(solve_asym_w1(m, p)?);
            sols.extend(solve_asym_wne1(m, p)?);
        }
    }
    Ok(sols)
}

/// Distinct translation-invariant measures at `p.theta`.
pub fn enumerate(p: &ModelParams) -> Result<CensusReport> {
    let mut set = LawSet::default();
    let mut entries = vec![];
    let mut class_counts = BTreeMap::new();
    for sol in all_solutions(p)? {
        let new = orbit_laws(&sol, p.q).into_iter().filter(|z| set.insert(z.clone())).count();
        if new > 0 {
            *class_counts.entry(format!("{}/m={}", sol.case_tag.as_str(), sol.m)).or_insert(0) += new;
            entries.push(CensusEntry { solution: sol, multiplicity: new });
        }
    }
    Ok(CensusReport {
        theta: p.theta,
        k: p.k,
        q: p.q,
        total: set.len(),
        entries,
        class_counts,
        partial: p.k != 2,
    })
}

pub fn total_at(p: &ModelParams, theta: f64) -> Result<usize> {
    Ok(enumerate(&p.with_theta(theta))?.total)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalEvent {
    pub theta: f64,
    pub kind: String,
    /// Whether the census total differs on the two sides of `theta`.
    pub changes_count: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalValue {
    pub theta: f64,
    pub kind: String,
    pub cluster: Vec<CriticalEvent>,
    pub changes_count: bool,
    pub count_below: usize,
    pub count_above: usize,
}

enum EventFn {
    Continuous(Box<dyn Fn(f64) -> f64>),
    Count(Box<dyn Fn(f64) -> usize>),
}

fn event_functions(p: &ModelParams) -> Vec<(String, EventFn)> {
    let (k, q) = (p.k, p.q);
    let mut ev: Vec<(String, EventFn)> = vec![];
    let kf = k as f64;
    ev.push((
        "free_threshold".into(),
        EventFn::Continuous(Box::new(move |t| big_theta(t, q) - (kf + 1.0) / (kf - 1.0))),
    ));
    let tau_c = (kf + q as f64 - 1.0) / (kf - 1.0);
    ev.push(("tau_c".into(), EventFn::Continuous(Box::new(move |t| tau(t) - tau_c))));
    if k != 2 {
        return ev;
    }
    for m in 1..=q / 2 {
        ev.push((
            format!("sym_w1_discriminant/m={m}"),
            EventFn::Continuous(Box::new(move |t| sym_w1_discriminant(m, t, q))),
        ));
        let pp = *p;
        ev.push((
            format!("sym_wne1_count/m={m}"),
            EventFn::Count(Box::new(move |t| solve_sym_wne1(m, &pp.with_theta(t)).map(|s| s.len()).unwrap_or(0))),
        ));
        ev.push((
            format!("asym_w1_discriminant/m={m}"),
            EventFn::Continuous(Box::new(move |t| asym_w1_discriminant(m, t, q))),
        ));
        ev.push((
            format!("asym_w1_count/m={m}"),
            EventFn::Count(Box::new(move |t| solve_asym_w1(m, &pp.with_theta(t)).map(|s| s.len()).unwrap_or(0))),
        ));
        ev.push((
            format!("asym_wne1_sextic/m={m}"),
            EventFn::Continuous(Box::new(move |t| asym_wne1_sextics(m, t, q).1)),
        ));
    }
    ev
}

const SCAN_POINTS: usize = 6000;
const SIDE_OFFSET: f64 = 1e-6;

/// Raw event locations on `(theta_lo, theta_hi)`.
pub fn critical_events(p: &ModelParams, theta_lo: f64, theta_hi: f64) -> Result<Vec<CriticalEvent>> {
    if !(1.0 < theta_lo && theta_lo < theta_hi) {
        return Err(Error::InvalidParams(format!("need 1 < {theta_lo} < {theta_hi}")));
    }
    let grid: Vec<f64> = (0..=SCAN_POINTS)
        .map(|i| theta_lo + (theta_hi - theta_lo) * i as f64 / SCAN_POINTS as f64)
        .collect();
    let mut raw = vec![];
    for (kind, f) in event_functions(p) {
        match f {
            EventFn::Continuous(f) => {
                let vals: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
                for i in 0..SCAN_POINTS {
                    let (a, b) = (vals[i], vals[i + 1]);
                    if a.is_finite() && b.is_finite() && a != 0.0 && (a > 0.0) != (b > 0.0) {
                        let r = bracket_root(&f, grid[i], grid[i + 1], 1e-12)?;
                        raw.push((r, kind.clone()));
                    }
                }
            }
            EventFn::Count(f) => {
                let vals: Vec<usize> = grid.iter().map(|&t| f(t)).collect();
                for i in 0..SCAN_POINTS {
                    if vals[i] != vals[i + 1] {
                        let (mut lo, mut hi) = (grid[i], grid[i + 1]);
                        while hi - lo > 1e-11 {
                            let mid = 0.5 * (lo + hi);
                            if f(mid) == vals[i] {
                                lo = mid;
                            } else {
                                hi = mid;
                            }
                        }
                        raw.push((0.5 * (lo + hi), kind.clone()));
                    }
                }
            }
        }
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    raw.into_iter()
        .map(|(theta, kind)| {
            let below = total_at(p, theta - SIDE_OFFSET)?;
            let above = total_at(p, theta + SIDE_OFFSET)?;
            Ok(CriticalEvent { theta, kind, changes_count: below != above })
        })
        .collect()
}

/// Events merged into clusters whose members lie within `merge_tol` of their neighbor.
pub fn critical_scan(p: &ModelParams, theta_lo: f64, theta_hi: f64, merge_tol: f64) -> Result<Vec<CriticalValue>> {
    let events = critical_events(p, theta_lo, theta_hi)?;
    let mut clusters: Vec<Vec<CriticalEvent>> = vec![];
    for e in events {
        match clusters.last_mut() {
            Some(c) if e.theta - c.last().unwrap().theta <= merge_tol => c.push(e),
            _ => clusters.push(vec![e]),
        }
    }
    clusters
        .into_iter()
        .map(|cluster| {
            let theta = cluster.iter().map(|e| e.theta).sum::<f64>() / cluster.len() as f64;
            let lo = cluster.first().unwrap().theta - SIDE_OFFSET;
            let hi = cluster.last().unwrap().theta + SIDE_OFFSET;
            let count_below = total_at(p, lo)?;
            let count_above = total_at(p, hi)?;
            Ok(CriticalValue {
                theta,
                kind: cluster.iter().map(|e| e.kind.as_str()).collect::<Vec<_>>().join("+"),
                changes_count: count_below != count_above || cluster.iter().any(|e| e.changes_count),
                cluster,
                count_below,
                count_above,
            })
        })
        .collect()
}

/// Temperature regime relative to the critical temperatures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Above the highest critical temperature.
    Hot,
    /// Strictly between `T_{c,m+1}` and `T_{c,m}`.
    Between(usize),
    /// Exactly at `T_{c,m}`, `m >= 1`.
    AtCm(usize),
    /// Below `T_{c,floor(q/2)}` and away from `T_cr`.
    Cold,
    /// Exactly at `T_cr`.
    AtCr,
}

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Guaranteed number of measures in a regime (sign taken from `p.theta`).
pub fn lower_bound_counts(p: &ModelParams, regime: Regime) -> Result<usize> {
    let q = p.q;
    let half = q / 2;
    let base = match p.coupling() {
        Coupling::Ferromagnetic => 3usize,
        Coupling::Antiferromagnetic => 1,
        Coupling::Boundary => return Err(Error::InvalidParams("theta = 1 has no regime".into())),
    };
    let ferro = base == 3;
    let sum = |m: usize| (1..=m).map(|s| binom(q, s)).sum::<usize>();
    match regime {
        Regime::Hot => Ok(1),
        Regime::Between(m) => {
            let lo = if ferro { 0 } else { 1 };
            if m < lo || m + 1 > half {
                return Err(Error::InvalidParams(format!("no interval between T_c,{} and T_c,{m}", m + 1)));
            }
            Ok(base + 2 * sum(m))
        }
        Regime::AtCm(m) => {
            if m < 1 || m > half {
                return Err(Error::MOutOfRange { m, max: half });
            }
            Ok(base + binom(q, m) + 2 * sum(m - 1))
        }
        Regime::Cold => Ok(if ferro { (1 << q) + 1 } else { (1 << q) - 1 }),
        Regime::AtCr => {
            let mut n = 1usize << (q - 1);
            if q.is_multiple_of(2) {
                n -= binom(q - 1, half);
            }
            Ok(if ferro { n + 2 } else { n })
        }
    }
}

/// Regime of `p.theta` for k = 2, using the closed-form critical values.
pub fn regime_of(p: &ModelParams) -> Result<Regime> {
    if p.k != 2 {
        return Err(Error::InvalidParams("regime_of needs k = 2".into()));
    }
    let sign = p.coupling();
    if sign == Coupling::Boundary {
        return Err(Error::InvalidParams("theta = 1 has no regime".into()));
    }
    // work with theta >= 1 ordering; antiferromagnetic values are reciprocals
    let th = if sign == Coupling::Ferromagnetic { p.theta } else { 1.0 / p.theta };
    let eq = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b;
    let theta_cr = crate::model::derive(p).theta_cr;
    let half = p.q / 2;
    let mut cms = vec![f64::NAN];
    for m in 1..=half {
        cms.push(theta_cm_k2(m, p.q, Coupling::Ferromagnetic)?);
    }
    if eq(th, theta_cr) {
        return Ok(Regime::AtCr);
    }
    for (m, &c) in cms.iter().enumerate().skip(1) {
        if eq(th, c) {
            return Ok(Regime::AtCm(m));
        }
    }
    if th > cms[half] {
        return Ok(Regime::Cold);
    }
    let top = if sign == Coupling::Ferromagnetic { theta_c0(2, p.q) } else { cms[1] };
    if th < top {
        return Ok(Regime::Hot);
    }
    if sign == Coupling::Ferromagnetic && th < cms[1] {
        return Ok(Regime::Between(0));
    }
    for m in 1..half {
        if th > cms[m] && th < cms[m + 1] {
            return Ok(Regime::Between(m));
        }
    }
    Ok(Regime::Hot)
}

pub fn report_json(r: &CensusReport) -> Result<String> {
    serde_json::to_string_pretty(r).map_err(|e| Error::Output(e.to_string()))
}

/// Formats with 12 significant digits.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{:.11e}", x);
    let v: f64 = s.parse().unwrap();
    let mag = v.abs().log10().floor() as i32;
    if (-5..12).contains(&mag) {
        let dec = (11 - mag).max(0) as usize;
        let t = format!("{:.*}", dec, v);
        if t.contains('.') {
            t.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            t
        }
    } else {
        s
    }
}

pub const CENSUS_CSV_HEADER: [&str; 8] = ["theta", "m", "case_tag", "branch", "u", "v", "w", "multiplicity"];

/// One CSV row per entry.
pub fn report_csv(reports: &[CensusReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(vec![]);
    let err = |e: csv::Error| Error::Output(e.to_string());
    w.write_record(CENSUS_CSV_HEADER).map_err(err)?;
    for r in reports {
        for e in &r.entries {
            let s = &e.solution;
            w.write_record([
                fmt12(r.theta),
                s.m.to_string(),
                s.case_tag.as_str().to_string(),
                s.branch.to_string(),
                fmt12(s.u),
                fmt12(s.v),
                fmt12(s.w),
                e.multiplicity.to_string(),
            ])
            .map_err(err)?;
        }
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Output(e.to_string()))?).map_err(|e| Error::Output(e.to_string()))
}
