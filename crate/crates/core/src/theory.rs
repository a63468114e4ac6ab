//! Closed-form constants, limit sequences, martingale weights and regime
//! predicates for Model A, plus the summability check used for Model B.

use std::f64::consts::PI;
use std::fmt;

use serde::Serialize;

use crate::error::{check_probability, Error, Result};
use crate::graph::EvolvingGraph;
use crate::models::{ModelParams, ParamSchedule};

const EQ_TOL: f64 = 1e-12;

pub fn tau(p: f64, q: f64) -> Result<f64> {
    let (p, q) = (check_probability("p", p)?, check_probability("q", q)?);
    Ok(6.0 * q - 4.0 * p * q - 3.0 + p * p * q)
}

pub fn kappa(p: f64, q: f64) -> Result<f64> {
    let (p, q) = (check_probability("p", p)?, check_probability("q", q)?);
    Ok(4.0 * q - 2.0 * p * q - 2.0)
}

/// `u = 1 - 2q(1 - r)`.
pub fn u_const(q: f64, r: f64) -> f64 {
    1.0 - 2.0 * q * (1.0 - r)
}

/// `(rho0, rho1)`; undefined when `q = 1, r = 0`.
pub fn rho_interval(p: f64, q: f64, r: f64) -> Result<(f64, f64)> {
    let ModelParams { p, q, r } = ModelParams::new(p, q, r)?;
    let den = 1.0 - q * (1.0 - r);
    if den <= 0.0 {
        return Err(Error::Domain("rho interval needs q(1-r) < 1".into()));
    }
    Ok(((1.0 - q) / den, (3.0 * (1.0 - q) + p * q * (1.0 - r)) / (2.0 * den)))
}

/// `(theta0, theta1)` of the `p = 1` theorem.
pub fn theta_interval(q: f64, r: f64) -> Result<(f64, f64)> {
    let (q, r) = (check_probability("q", q)?, check_probability("r", r)?);
    let den = 2.0 - q * (1.0 - r);
    Ok(((2.0 * (1.0 - q) + q * (1.0 - r)) / den, (3.0 * (1.0 - q) + q * (1.0 - r)) / den))
}

/// Mean bounds on `E N_{m,0}/m` exactly as printed, with denominator `u`.
/// They disagree with the `u + 1` normalization of the rho interval and are
/// reported for reference only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum MeanBoundAsStated {
    Applicable { lower: f64, upper: f64, u: f64 },
    Inapplicable { u: f64 },
}

pub fn mean_bound_interval(p: f64, q: f64, r: f64) -> Result<MeanBoundAsStated> {
    let ModelParams { p, q, r } = ModelParams::new(p, q, r)?;
    let u = u_const(q, r);
    Ok(if u > 0.0 {
        MeanBoundAsStated::Applicable {
            lower: 2.0 * (1.0 - q) / u,
            upper: (3.0 * (1.0 - q) + p * q * (1.0 - r)) / u,
            u,
        }
    } else {
        MeanBoundAsStated::Inapplicable { u }
    })
}

/// A regime condition with the reasons it fails (empty when it holds).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Predicate {
    pub holds: bool,
    pub reasons: Vec<String>,
}

impl Predicate {
    fn from_failures(reasons: Vec<String>) -> Self {
        Self {
            holds: reasons.is_empty(),
            reasons,
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.holds {
            f.write_str("true")
        } else {
            write!(f, "false ({})", self.reasons.join("; "))
        }
    }
}

/// Conditions of the interval theorem: `q <= min{1, 1/(2(1-r))}` and `tau < 1`.
pub fn thm32_applicable(p: f64, q: f64, r: f64) -> Result<Predicate> {
    let t = tau(p, q)?;
    check_probability("r", r)?;
    let mut fails = Vec::new();
    if r < 1.0 {
        let cap = 1.0 / (2.0 * (1.0 - r));
        if q > cap {
            fails.push(format!("q > 1/(2(1-r)): q = {q} exceeds {cap} by {}", q - cap));
        }
    }
    if t >= 1.0 {
        fails.push(format!("tau >= 1: tau = {t}"));
    }
    Ok(Predicate::from_failures(fails))
}

/// The two corollary items, each including the theorem's own conditions.
pub fn corollary_flags(p: f64, q: f64, r: f64) -> Result<(Predicate, Predicate)> {
    let base = thm32_applicable(p, q, r)?;
    let mut item1 = base.reasons.clone();
    if r != 0.0 {
        item1.push(format!("r = {r} is not 0"));
    }
    if q > 0.5 {
        item1.push(format!("q = {q} exceeds 1/2"));
    }
    let mut item2 = base.reasons;
    let den = 3.0 - (p + 2.0) * (1.0 - r);
    let threshold = 1.0 / den;
    if !(den > 0.0 && q > threshold) {
        item2.push(format!("q <= 1/(3-(p+2)(1-r)): q = {q}, threshold {threshold}"));
    }
    Ok((Predicate::from_failures(item1), Predicate::from_failures(item2)))
}

/// Every constant and flag for one triple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeConstants {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub tau: f64,
    pub kappa: f64,
    pub u: f64,
    /// `2(1-q)`.
    pub v: f64,
    /// `3(1-q) + pq(1-r)`.
    pub big_v: f64,
    /// `None` when `q = 1, r = 0`.
    pub rho: Option<(f64, f64)>,
    pub theta: (f64, f64),
    /// `1 - q + qr`.
    pub u_prime: f64,
    /// `q(1-r) + 2(1-q)`.
    pub v_prime: f64,
    /// `q(1-r) + 3(1-q)`.
    pub big_v_prime: f64,
    pub mean_bound_as_stated: MeanBoundAsStated,
    pub thm32: Predicate,
    pub corollary_item1: Predicate,
    pub corollary_item2: Predicate,
    pub u_positive: Predicate,
    pub growth: (GrowthClass, GrowthClass),
}

impl RegimeConstants {
    pub fn new(p: f64, q: f64, r: f64) -> Result<Self> {
        let ModelParams { p, q, r } = ModelParams::new(p, q, r)?;
        let u = u_const(q, r);
        let (item1, item2) = corollary_flags(p, q, r)?;
        Ok(Self {
            p,
            q,
            r,
            tau: tau(p, q)?,
            kappa: kappa(p, q)?,
            u,
            v: 2.0 * (1.0 - q),
            big_v: 3.0 * (1.0 - q) + p * q * (1.0 - r),
            rho: rho_interval(p, q, r).ok(),
            theta: theta_interval(q, r)?,
            u_prime: 1.0 - q + q * r,
            v_prime: q * (1.0 - r) + 2.0 * (1.0 - q),
            big_v_prime: q * (1.0 - r) + 3.0 * (1.0 - q),
            mean_bound_as_stated: mean_bound_interval(p, q, r)?,
            thm32: thm32_applicable(p, q, r)?,
            corollary_item1: item1,
            corollary_item2: item2,
            u_positive: Predicate::from_failures(if u > 0.0 {
                vec![]
            } else {
                vec![format!("u = 1 - 2q(1-r) = {u} is not positive")]
            }),
            growth: psi_growth_class(p, q)?,
        })
    }
}

/// `a_0 = (1-r)/(1+r)`, `a_k = (r/(1+r))^k (1 + a_0)`.
pub fn limit_sequence_a(r: f64, k_max: usize) -> Result<Vec<f64>> {
    let r = check_probability("r", r)?;
    let a0 = (1.0 - r) / (1.0 + r);
    let ratio = r / (1.0 + r);
    Ok(std::iter::once(a0)
        .chain((1..=k_max).map(|k| ratio.powi(k as i32) * (1.0 + a0)))
        .collect())
}

/// Tail `sum_{k > k_max} a_k` in closed form.
pub fn limit_sequence_tail(r: f64, k_max: usize) -> Result<f64> {
    let r = check_probability("r", r)?;
    let ratio = r / (1.0 + r);
    let a0 = (1.0 - r) / (1.0 + r);
    Ok((1.0 + a0) * ratio.powi(k_max as i32 + 1) / (1.0 - ratio))
}

/// `ln Gamma(z)` remainder past Stirling's leading terms, for `z >= 20`.
fn stirling_series(z: f64) -> f64 {
    let z2 = z * z;
    (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * z2)) / z2) / z2) / z
}

/// `ln Gamma(x) - ln Gamma(x - a)` for `x > 0`, `x - a > 0`, accurate to a few
/// ulps of the result even when both gamma values are huge.
pub fn ln_gamma_ratio(x: f64, a: f64) -> f64 {
    let y = x - a;
    debug_assert!(x > 0.0 && y > 0.0);
    let shift = (20.0 - x.min(y)).ceil().max(0.0) as usize;
    let correction: f64 = (0..shift)
        .map(|i| {
            let i = i as f64;
            (x + i).ln() - (y + i).ln()
        })
        .sum();
    let (x, y) = (x + shift as f64, y + shift as f64);
    (x - 0.5) * (a / y).ln_1p() + a * y.ln() - a + stirling_series(x) - stirling_series(y) - correction
}

/// `ln Gamma(z)` for `z > 0`.
pub fn ln_gamma(z: f64) -> f64 {
    let shift = (20.0 - z).ceil().max(0.0) as usize;
    let correction: f64 = (0..shift).map(|i| (z + i as f64).ln()).sum();
    let z = z + shift as f64;
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + stirling_series(z) - correction
}

/// `c_m = Gamma(m) Gamma(m0 - u) / (Gamma(m - u) Gamma(m0))`, with `c_{m0} = 1`.
pub fn martingale_weight_c(m: usize, m0: usize, u: f64) -> Result<f64> {
    if m0 == 0 || m < m0 {
        return Err(Error::Domain(format!("c_m needs 1 <= m0 <= m, got m0 = {m0}, m = {m}")));
    }
    if !u.is_finite() || u >= m0 as f64 {
        return Err(Error::Domain(format!("c_m needs u < m0, got u = {u}, m0 = {m0}")));
    }
    Ok((ln_gamma_ratio(m as f64, u) - ln_gamma_ratio(m0 as f64, u)).exp())
}

/// `c_m` as the product `prod_{i=m0+1}^{m} (1 - u/(i-1))^{-1}`.
pub fn martingale_weight_c_product(m: usize, m0: usize, u: f64) -> Result<f64> {
    martingale_weight_c(m0, m0, u)?;
    let log: f64 = kahan((m0 + 1..=m).map(|i| -(-u / (i - 1) as f64).ln_1p()));
    Ok(log.exp())
}

/// `alpha_m = Gamma(m) Gamma(m0 + 1 - 2r) / (Gamma(m + 1 - 2r) Gamma(m0))`.
pub fn alpha_weight(m: usize, m0: usize, r: f64) -> Result<f64> {
    let r = check_probability("r", r)?;
    if m0 == 0 || m < m0 {
        return Err(Error::Domain(format!("alpha_m needs 1 <= m0 <= m, got m0 = {m0}, m = {m}")));
    }
    let a = 2.0 * r - 1.0;
    if m0 as f64 - a <= 0.0 {
        return Err(Error::Domain(format!("alpha_m is undefined for m0 = {m0}, r = {r}")));
    }
    Ok((ln_gamma_ratio(m as f64, a) - ln_gamma_ratio(m0 as f64, a)).exp())
}

/// `alpha_m` as the product `prod_{k=m0}^{m-1} (1 + (1-2r)/k)^{-1}`.
pub fn alpha_weight_product(m: usize, m0: usize, r: f64) -> Result<f64> {
    alpha_weight(m0, m0, r)?;
    let b = 1.0 - 2.0 * r;
    let log: f64 = kahan((m0..m).map(|k| -(b / k as f64).ln_1p()));
    Ok(log.exp())
}

fn kahan(it: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in it {
        let y = x - c;
        let t = s + y;
        c = (t - s) - y;
        s = t;
    }
    s
}

/// Upper-bound growth class of a moment of the expected degree distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class", content = "exponent", rename_all = "snake_case")]
pub enum GrowthClass {
    Bounded,
    Log,
    LogSquared,
    Power(f64),
    PowerLog(f64),
}

impl fmt::Display for GrowthClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrowthClass::Bounded => f.write_str("bounded"),
            GrowthClass::Log => f.write_str("log"),
            GrowthClass::LogSquared => f.write_str("log^2"),
            GrowthClass::Power(e) => write!(f, "m^{e}"),
            GrowthClass::PowerLog(e) => write!(f, "m^{e} log"),
        }
    }
}

fn sign(x: f64) -> i8 {
    if x.abs() <= EQ_TOL {
        0
    } else if x < 0.0 {
        -1
    } else {
        1
    }
}

/// `(psi1 class, psi2 class)` keyed on the signs of kappa and tau.
pub fn psi_growth_class(p: f64, q: f64) -> Result<(GrowthClass, GrowthClass)> {
    use GrowthClass::*;
    let (k, t) = (kappa(p, q)?, tau(p, q)?);
    let psi1 = match sign(k) {
        -1 => Bounded,
        0 => Log,
        _ => Power(k),
    };
    let psi2 = match (sign(k), sign(t)) {
        (-1, -1) => Bounded,
        (-1, 0) => Log,
        (-1, _) => Power(t),
        (0, -1) => Log,
        (0, 0) => LogSquared,
        (0, _) => Power(t),
        (_, -1 | 0) => Power(k),
        _ if (t - k).abs() <= EQ_TOL => PowerLog(t),
        _ => Power(t.max(k)),
    };
    Ok((psi1, psi2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesVerdict {
    Converges,
    Diverges,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop37Report {
    pub m0: usize,
    pub horizon: usize,
    /// Partial sums of `p_k(1-r_k) + 2(1-q_k)` for `k = m0..horizon`.
    pub partial_sums: Vec<f64>,
    /// First `k` where neither `r_k >= 1/2` nor `q_k <= 1/(2(1-r_k))` holds.
    pub side_condition_violation: Option<usize>,
    /// Heuristic from block sums; not a proof.
    pub verdict: SeriesVerdict,
}

impl Prop37Report {
    pub fn side_condition_holds(&self) -> bool {
        self.side_condition_violation.is_none()
    }
}

fn deterministic_params(schedule: &ParamSchedule, k: usize) -> Result<ModelParams> {
    if schedule.is_adaptive() {
        return Err(Error::Domain(
            "state-dependent schedules have no deterministic series".into(),
        ));
    }
    // Non-adaptive schedules ignore the graph argument.
    static EMPTY: std::sync::OnceLock<EvolvingGraph> = std::sync::OnceLock::new();
    let g = EMPTY.get_or_init(|| EvolvingGraph::from_edges(1, &[]).expect("one isolated vertex"));
    schedule.params_at(k, g)
}

/// Partial sums of the summability series and the per-step side condition.
pub fn prop37_condition(schedule: &ParamSchedule, m0: usize, horizon: usize) -> Result<Prop37Report> {
    if horizon < m0 {
        return Err(Error::Config(format!("horizon {horizon} is below m0 = {m0}")));
    }
    let mut partial_sums = Vec::with_capacity(horizon - m0 + 1);
    let mut terms = Vec::with_capacity(horizon - m0 + 1);
    let mut violation = None;
    let mut acc = 0.0;
    for k in m0..=horizon {
        let ModelParams { p, q, r } = deterministic_params(schedule, k)?;
        let term = p * (1.0 - r) + 2.0 * (1.0 - q);
        acc += term;
        terms.push(term);
        partial_sums.push(acc);
        if violation.is_none() && !(r >= 0.5 || q <= 1.0 / (2.0 * (1.0 - r))) {
            violation = Some(k);
        }
    }
    Ok(Prop37Report {
        m0,
        horizon,
        partial_sums,
        side_condition_violation: violation,
        verdict: block_verdict(&terms),
    })
}

/// Compares the last two dyadic blocks of terms: a summable tail shrinks
/// geometrically across blocks, a harmonic-like one does not.
fn block_verdict(terms: &[f64]) -> SeriesVerdict {
    let n = terms.len();
    if n < 8 {
        return SeriesVerdict::Inconclusive;
    }
    let late: f64 = terms[n / 2..].iter().sum();
    let early: f64 = terms[n / 4..n / 2].iter().sum();
    let total: f64 = terms.iter().sum();
    if late <= 1e-12 * total.max(1.0) || late <= 0.75 * early {
        SeriesVerdict::Converges
    } else if late >= 0.9 * early {
        SeriesVerdict::Diverges
    } else {
        SeriesVerdict::Inconclusive
    }
}

/// Cumulative bound on `E N_{m,0}` for Model B:
/// `N_{m0,0} + sum_{k=m0}^{m-1} (p_k q_k (1-r_k) + 2(1-q_k))`, indexed by `m - m0`.
pub fn prop37_isolated_bound(schedule: &ParamSchedule, n0: f64, m0: usize, m_max: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(m_max.saturating_sub(m0) + 1);
    let mut acc = n0;
    out.push(acc);
    for k in m0..m_max {
        let ModelParams { p, q, r } = deterministic_params(schedule, k)?;
        acc += p * q * (1.0 - r) + 2.0 * (1.0 - q);
        out.push(acc);
    }
    Ok(out)
}
