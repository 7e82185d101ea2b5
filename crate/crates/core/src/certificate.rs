//! The iterative doubling certificate: shrinking radii `r_j ↓ r/2`, cutoffs
//! `f_j`, the quantities
//!
//! ```text
//! P_j(B) = 1 / (C h(j) φ_Y(μ(B_j) / μ(2B))),   h(j) = j g(j),   C = 8 c c₁,
//! ```
//!
//! the per-step inequality `φ_X(μ(B_{j+1})/μ(2B)) ≤ 1/P_j(B)`, and the
//! growth chain `P_j ≥ P_1 e^{j−1}` that forces a contradiction when
//! `P_1 > e² D`. Products that overflow are carried as logarithms.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gain::{series_c1, GainFunction};
use crate::norms::RiSpace;
use crate::space::{Ball, MetricMeasureSpace};

/// Tolerance for the series `c₁`.
const C1_TOL: f64 = 1e-10;
/// Grid step for the exponential-gain test on `t ∈ [1, 50]`.
const EPA_STEP: f64 = 0.05;
const EPA_T_MAX: f64 = 50.0;
/// Exponents `m` for `D = 2^m` are scanned one by one up to this value and
/// then doubled.
const D_LINEAR_SCAN: u64 = 60;
const D_MAX_EXPONENT: u64 = 1 << 40;

#[derive(Debug, Clone)]
pub struct CertificateConfig {
    pub gain: GainFunction,
    pub c1: f64,
    /// Poincaré constant hypothesis.
    pub c: f64,
    /// `8 c c₁`.
    pub big_c: f64,
    /// `D = 2^{d_exponent}`.
    pub d_exponent: u64,
    pub ln_d: f64,
    pub j_max: usize,
}

impl CertificateConfig {
    pub fn new(gain: GainFunction, c: f64, j_max: usize) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("Poincaré constant must be positive, got {c}")));
        }
        if j_max == 0 {
            return Err(Error::InvalidParameter("j_max must be at least 1".into()));
        }
        let c1 = series_c1(&gain, C1_TOL)?.sum;
        let big_c = 8.0 * c * c1;
        let mut m = 0u64;
        loop {
            let ln_d = m as f64 * std::f64::consts::LN_2;
            if epa_margin(&gain, big_c, ln_d)? > 0.0 {
                return Ok(CertificateConfig { gain, c1, c, big_c, d_exponent: m, ln_d, j_max });
            }
            m = if m < D_LINEAR_SCAN { m + 1 } else { 2 * m };
            if m > D_MAX_EXPONENT {
                return Err(Error::GainTooWeak(gain.name().to_string()));
            }
        }
    }

    /// `h(j) = j g(j)`.
    pub fn h(&self, j: f64) -> f64 {
        j * self.gain.eval(j)
    }

    pub fn ln_h(&self, j: f64) -> Result<f64> {
        Ok(j.ln() + self.gain.ln_eval(j)?)
    }

    /// Smallest value of `ln[(1/(eC)) g(D e^t) / (t g(t))]` over the test grid.
    pub fn epa_margin(&self) -> Result<f64> {
        epa_margin(&self.gain, self.big_c, self.ln_d)
    }
}

fn epa_margin(g: &GainFunction, big_c: f64, ln_d: f64) -> Result<f64> {
    let steps = ((EPA_T_MAX - 1.0) / EPA_STEP).round() as usize;
    let mut worst = f64::INFINITY;
    for i in 0..=steps {
        let t = 1.0 + i as f64 * EPA_STEP;
        let v = -1.0 - big_c.ln() + g.ln_at_exp(ln_d + t)? - t.ln() - g.ln_at_exp(t.ln())?;
        worst = worst.min(v);
    }
    Ok(worst)
}

/// `r_1 = r`, `r_{j+1} = r_j − r / (2 c₁ h(j))`; returns `r_1, …, r_count`.
pub fn radii_sequence(r: f64, cfg: &CertificateConfig, count: usize) -> Result<Vec<f64>> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    let mut out = Vec::with_capacity(count);
    let mut rj = r;
    for j in 1..=count {
        out.push(rj);
        rj -= r / (2.0 * cfg.c1 * cfg.h(j as f64));
    }
    Ok(out)
}

/// `f_j`: 1 on the closed ball of radius `r_{j+1}`, 0 outside the closed
/// ball of radius `r_j`, linear in the distance between. `radii[0] = r_1`.
pub fn cutoff_function(space: &MetricMeasureSpace, center: usize, j: usize, radii: &[f64]) -> Result<Vec<f64>> {
    if j == 0 || j >= radii.len() {
        return Err(Error::InvalidParameter(format!("cutoff index {j} needs radii r_j and r_(j+1)")));
    }
    let (outer, inner) = (radii[j - 1], radii[j]);
    if !(inner < outer) {
        return Err(Error::InvalidParameter(format!("radii must decrease: r_{j} = {outer}, r_{} = {inner}", j + 1)));
    }
    if center >= space.len() {
        return Err(Error::IndexOutOfRange { index: center, n: space.len() });
    }
    Ok((0..space.len())
        .map(|i| {
            let d = space.d(center, i);
            if d <= inner {
                1.0
            } else if d > outer {
                0.0
            } else {
                (outer - d) / (outer - inner)
            }
        })
        .collect())
}

/// `2 c₁ h(j) / r`, the slope of `f_j`.
pub fn cutoff_gradient_bound(r: f64, cfg: &CertificateConfig, j: usize) -> f64 {
    2.0 * cfg.c1 * cfg.h(j as f64) / r
}

/// `ln P_j(B)` with `B_j` the closed ball of radius `r_j` and `2B` open.
pub fn ln_pj_value(space: &MetricMeasureSpace, ball: &Ball, j: usize, rj: f64, cfg: &CertificateConfig, y: &RiSpace) -> Result<f64> {
    let bj = space.measure_of(&Ball::closed(ball.center, rj))?;
    let two_b = space.measure_of(&Ball::open(ball.center, 2.0 * ball.radius))?;
    if !(two_b > 0.0) {
        return Err(Error::InvalidParameter("2B has zero measure".into()));
    }
    let phi = y.fundamental((bj / two_b).min(1.0));
    Ok(-cfg.big_c.ln() - cfg.ln_h(j as f64)? - phi.ln())
}

pub fn pj_value(space: &MetricMeasureSpace, ball: &Ball, j: usize, rj: f64, cfg: &CertificateConfig, y: &RiSpace) -> Result<f64> {
    Ok(ln_pj_value(space, ball, j, rj, cfg, y)?.exp())
}

#[derive(Debug, Clone, Serialize)]
pub struct KeyRecord {
    pub j: usize,
    pub r_j: f64,
    pub mu_bj: f64,
    pub p_j: f64,
    pub ln_p_j: f64,
    /// `φ_X(μ(B_{j+1}) / μ(2B))`.
    pub lhs: f64,
    /// `1 / P_j(B)`.
    pub rhs: f64,
    /// `ln rhs − ln lhs`; negative means violated.
    pub slack: f64,
    pub satisfied: bool,
}

/// Evaluates `φ_X(μ(B_{j+1})/μ(2B)) ≤ 1/P_j(B)` for `j = 1..=count` from
/// actual ball measures.
pub fn key_inequality_check(
    space: &MetricMeasureSpace,
    ball: &Ball,
    cfg: &CertificateConfig,
    x: &RiSpace,
    y: &RiSpace,
    count: usize,
) -> Result<Vec<KeyRecord>> {
    let radii = radii_sequence(ball.radius, cfg, count + 1)?;
    let two_b = space.measure_of(&Ball::open(ball.center, 2.0 * ball.radius))?;
    let mut out = Vec::with_capacity(count);
    for j in 1..=count {
        let rj = radii[j - 1];
        let mu_bj = space.measure_of(&Ball::closed(ball.center, rj))?;
        let mu_next = space.measure_of(&Ball::closed(ball.center, radii[j]))?;
        let ln_p = ln_pj_value(space, ball, j, rj, cfg, y)?;
        let lhs = x.fundamental((mu_next / two_b).min(1.0));
        let slack = -ln_p - lhs.ln();
        out.push(KeyRecord {
            j,
            r_j: rj,
            mu_bj,
            p_j: ln_p.exp(),
            ln_p_j: ln_p,
            lhs,
            rhs: (-ln_p).exp(),
            slack,
            satisfied: slack >= -1e-12,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct InductionReport {
    pub hypothesis_met: bool,
    /// Steps where `ln P_{j+1} < ln P_j + ln g(P_j) − ln C − ln h(j+1)`.
    pub inadmissible_steps: Vec<usize>,
    /// Indices `j` where `ln P_j < ln P_1 + j − 1` (beyond `1e-9`).
    pub bound_failures: Vec<usize>,
    pub certified_through: usize,
}

impl InductionReport {
    pub fn certified(&self) -> bool {
        self.hypothesis_met && self.inadmissible_steps.is_empty() && self.bound_failures.is_empty()
    }
}

/// The smallest sequence allowed by `P_{j+1} ≥ P_j g(P_j) / (C h(j+1))`,
/// in logarithms: `ln P_1, …, ln P_count`.
pub fn minimal_chain(ln_p1: f64, cfg: &CertificateConfig, count: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    let mut l = ln_p1;
    for j in 1..=count {
        out.push(l);
        l = l + cfg.gain.ln_at_exp(l.max(0.0))? - cfg.big_c.ln() - cfg.ln_h((j + 1) as f64)?;
    }
    Ok(out)
}

/// Replays the growth chain on `ln P_1, ln P_2, …`: each step must be
/// admissible, and then `ln P_j ≥ ln P_1 + j − 1` is checked in the log
/// scale to `1e-9`. Requires `P_1 > e² D`.
pub fn induction_step_check(ln_p: &[f64], cfg: &CertificateConfig) -> Result<InductionReport> {
    let Some(&l1) = ln_p.first() else {
        return Err(Error::InvalidParameter("empty P sequence".into()));
    };
    let hypothesis_met = l1 > 2.0 + cfg.ln_d;
    let mut report = InductionReport { hypothesis_met, inadmissible_steps: vec![], bound_failures: vec![], certified_through: 0 };
    if !hypothesis_met {
        return Ok(report);
    }
    for j in 1..=ln_p.len() {
        let l = ln_p[j - 1];
        if j >= 2 {
            let prev = ln_p[j - 2];
            let floor = prev + cfg.gain.ln_at_exp(prev.max(0.0))? - cfg.big_c.ln() - cfg.ln_h(j as f64)?;
            if l < floor - 1e-9 * floor.abs().max(1.0) {
                report.inadmissible_steps.push(j);
            }
        }
        if l < l1 + (j - 1) as f64 - 1e-9 {
            report.bound_failures.push(j);
        }
        if report.inadmissible_steps.is_empty() && report.bound_failures.is_empty() {
            report.certified_through = j;
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BallVerdict {
    /// `P_1 ≤ e² D`.
    DoublingConsistent,
    /// `P_1 > e² D` and the growth chain overtakes the cap
    /// `1 / (C h(j) φ_Y(μ(½B̄)/μ(2B)))`: the constants are contradictory.
    BlowUpDetected,
    /// `P_1 > e² D` and the chain stayed under the cap for every computed `j`.
    CapReached,
}

impl std::fmt::Display for BallVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BallVerdict::DoublingConsistent => "doubling-consistent",
            BallVerdict::BlowUpDetected => "blow-up-detected",
            BallVerdict::CapReached => "cap-reached",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BallCertificate {
    pub center: usize,
    pub radius: f64,
    pub records: Vec<KeyRecord>,
    pub ln_p1: f64,
    pub verdict: BallVerdict,
    /// First `j` where the chain bound `ln P_1 + j − 1` exceeds the cap.
    pub blow_up_at: Option<usize>,
}

impl BallCertificate {
    /// Rows `center, r, j, r_j, mu_Bj, P_j, slack`.
    pub fn csv_rows(&self) -> Vec<[f64; 7]> {
        self.records
            .iter()
            .map(|k| [self.center as f64, self.radius, k.j as f64, k.r_j, k.mu_bj, k.p_j, k.slack])
            .collect()
    }
}

pub fn certify_ball(
    space: &MetricMeasureSpace,
    ball: &Ball,
    cfg: &CertificateConfig,
    x: &RiSpace,
    y: &RiSpace,
) -> Result<BallCertificate> {
    let records = key_inequality_check(space, ball, cfg, x, y, cfg.j_max)?;
    let ln_p1 = records[0].ln_p_j;
    let mut blow_up_at = None;
    let verdict = if ln_p1 <= 2.0 + cfg.ln_d {
        BallVerdict::DoublingConsistent
    } else {
        let half = space.measure_of(&Ball::closed(ball.center, 0.5 * ball.radius))?;
        let two_b = space.measure_of(&Ball::open(ball.center, 2.0 * ball.radius))?;
        let ln_phi_half = y.fundamental((half / two_b).min(1.0)).ln();
        for j in 1..=cfg.j_max {
            let ln_cap = -cfg.big_c.ln() - cfg.ln_h(j as f64)? - ln_phi_half;
            if ln_p1 + (j - 1) as f64 > ln_cap {
                blow_up_at = Some(j);
                break;
            }
        }
        if blow_up_at.is_some() {
            BallVerdict::BlowUpDetected
        } else {
            BallVerdict::CapReached
        }
    };
    Ok(BallCertificate { center: ball.center, radius: ball.radius, records, ln_p1, verdict, blow_up_at })
}

#[derive(Debug, Clone, Serialize)]
pub struct DoublingVerdict {
    pub sup_p1: f64,
    pub ln_sup_p1: f64,
    pub argmax: Option<(usize, f64)>,
    /// `φ_Y⁻¹(1 / (C sup P_1))`, a lower bound for `μ(B̄)/μ(2B)` on the sweep.
    pub implied_ratio_lower: f64,
    /// Its reciprocal: the doubling constant implied by `sup P_1`.
    pub implied_doubling: f64,
    /// `max μ(2B)/μ(B̄)` over the same sweep.
    pub sweep_doubling: f64,
    /// `max μ(2B)/μ(B)` with open balls, from the space itself.
    pub direct_doubling: f64,
    pub consistent: bool,
    pub balls: usize,
}

/// `sup_B P_1(B)` over the sweep, the doubling bound it implies, and the
/// doubling constants measured directly.
pub fn doubling_verdict(space: &MetricMeasureSpace, y: &RiSpace, cfg: &CertificateConfig, balls: &[Ball]) -> Result<DoublingVerdict> {
    let vals: Vec<(f64, f64)> = balls
        .par_iter()
        .map(|b| -> Result<(f64, f64)> {
            let ln_p1 = ln_pj_value(space, b, 1, b.radius, cfg, y)?;
            let closed = space.measure_of(&Ball::closed(b.center, b.radius))?;
            let two_b = space.measure_of(&Ball::open(b.center, 2.0 * b.radius))?;
            Ok((ln_p1, two_b / closed))
        })
        .collect::<Result<_>>()?;
    let mut ln_sup = f64::NEG_INFINITY;
    let mut argmax = None;
    let mut sweep_doubling = 1.0f64;
    for (b, &(l, ratio)) in balls.iter().zip(&vals) {
        if l > ln_sup {
            ln_sup = l;
            argmax = Some((b.center, b.radius));
        }
        sweep_doubling = sweep_doubling.max(ratio);
    }
    if argmax.is_none() {
        return Err(Error::EmptyRadii);
    }
    let target = (-cfg.big_c.ln() - ln_sup).exp();
    let implied_ratio_lower = if target >= y.fundamental(1.0) { 1.0 } else { y.fundamental_inverse(target)? };
    let radii: Vec<f64> = balls.iter().map(|b| b.radius).collect();
    let direct_doubling = space.doubling_constant(&radii)?;
    let implied_doubling = 1.0 / implied_ratio_lower;
    Ok(DoublingVerdict {
        sup_p1: ln_sup.exp(),
        ln_sup_p1: ln_sup,
        argmax,
        implied_ratio_lower,
        implied_doubling,
        sweep_doubling,
        direct_doubling,
        consistent: implied_doubling >= sweep_doubling * (1.0 - 1e-9),
        balls: balls.len(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub balls: Vec<BallCertificate>,
    pub doubling: DoublingVerdict,
    pub c1: f64,
    pub c: f64,
    pub big_c: f64,
    pub ln_d: f64,
    pub j_max: usize,
}

impl CertificateReport {
    pub fn violations(&self) -> usize {
        self.balls.iter().flat_map(|b| &b.records).filter(|k| !k.satisfied).count()
    }
}

/// Runs [`certify_ball`] over the sweep (in parallel, results in sweep
/// order) and the [`doubling_verdict`].
pub fn certificate_sweep(
    space: &MetricMeasureSpace,
    x: &RiSpace,
    y: &RiSpace,
    cfg: &CertificateConfig,
    balls: &[Ball],
) -> Result<CertificateReport> {
    let per_ball: Vec<BallCertificate> =
        balls.par_iter().map(|b| certify_ball(space, b, cfg, x, y)).collect::<Result<_>>()?;
    let doubling = doubling_verdict(space, y, cfg, balls)?;
    Ok(CertificateReport { balls: per_ball, doubling, c1: cfg.c1, c: cfg.c, big_c: cfg.big_c, ln_d: cfg.ln_d, j_max: cfg.j_max })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChainLemma {
    /// `φ_X(a) ≤ 1/P_j` for `a = μ(B_{j+1})/μ(2B)`.
    pub porfin_holds: bool,
    /// `φ_X⁻¹(1/P_j) ≤ φ_Y⁻¹(1/(P_j g(P_j)))`.
    pub claim_holds: bool,
    /// `ln P_{j+1}` computed from `a`.
    pub ln_p_next: f64,
    /// `ln[P_j g(P_j) / (C h(j+1))]`.
    pub ln_required: f64,
}

impl ChainLemma {
    /// The implication: both premises give the growth step.
    pub fn holds(&self) -> bool {
        !(self.porfin_holds && self.claim_holds) || self.ln_p_next >= self.ln_required - 1e-9 * self.ln_required.abs().max(1.0)
    }
}

/// One step of the growth argument from raw inputs: `P_j ≥ 1` and the next
/// measure ratio `a ∈ (0, 1]`.
pub fn chain_lemma(x: &RiSpace, y: &RiSpace, gain: &GainFunction, big_c: f64, j: usize, ln_p: f64, a: f64) -> Result<ChainLemma> {
    if !(ln_p >= 0.0) || !(a > 0.0 && a <= 1.0) {
        return Err(Error::InvalidParameter(format!("need P_j >= 1 and a in (0, 1], got ln P_j = {ln_p}, a = {a}")));
    }
    let inv_p = (-ln_p).exp();
    let ln_g = gain.ln_at_exp(ln_p)?;
    let porfin_holds = x.fundamental(a) <= inv_p * (1.0 + 1e-12);
    let lhs = x.fundamental_inverse(inv_p.min(x.fundamental(1.0)))?;
    let rhs = y.fundamental_inverse((-ln_p - ln_g).exp().min(y.fundamental(1.0)))?;
    let claim_holds = lhs <= rhs * (1.0 + 1e-10);
    let next = (j + 1) as f64;
    let ln_h = next.ln() + gain.ln_eval(next)?;
    Ok(ChainLemma {
        porfin_holds,
        claim_holds,
        ln_p_next: -big_c.ln() - ln_h - y.fundamental(a).ln(),
        ln_required: ln_p + ln_g - big_c.ln() - ln_h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::WeightExpr;

    fn cfg_pow1(c: f64) -> CertificateConfig {
        CertificateConfig::new(GainFunction::pow(1.0).unwrap(), c, 30).unwrap()
    }

    #[test]
    fn constant_is_eight_c_c1() {
        let cfg = cfg_pow1(1.5);
        assert!((cfg.c1 - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-8);
        assert_eq!(cfg.big_c, 8.0 * 1.5 * cfg.c1);
        assert!(cfg.epa_margin().unwrap() > 0.0);
    }

    #[test]
    fn slow_gain_needs_huge_d() {
        let cfg = CertificateConfig::new(GainFunction::log_alpha(2.0).unwrap(), 1.0, 5).unwrap();
        assert!(cfg.d_exponent > 60);
        assert!(cfg.epa_margin().unwrap() > 0.0);
    }

    #[test]
    fn radii_for_quadratic_h() {
        let cfg = cfg_pow1(1.0);
        let r = radii_sequence(1.0, &cfg, 3).unwrap();
        let oracle = 1.0 - 3.0 / std::f64::consts::PI.powi(2);
        assert!((r[1] - oracle).abs() < 1e-8);
        assert!((cutoff_gradient_bound(1.0, &cfg, 1) - std::f64::consts::PI.powi(2) / 3.0).abs() < 1e-8);
        assert!((cutoff_gradient_bound(1.0, &cfg, 1) - 1.0 / (r[0] - r[1])).abs() < 1e-12);
    }

    #[test]
    fn radii_stay_above_half() {
        let cfg = cfg_pow1(1.0);
        let r = radii_sequence(2.0, &cfg, 5000).unwrap();
        assert!(r.windows(2).all(|w| w[1] < w[0]));
        assert!(r.iter().all(|&v| v > 1.0));
        assert!(r[4999] - 1.0 < 2.0 / (2.0 * cfg.c1) * (1.0 / 4998.0));
    }

    #[test]
    fn cutoff_values() {
        let s = MetricMeasureSpace::line_grid(0.0, 1.0, 5, &WeightExpr::Uniform).unwrap();
        let radii = [0.75, 0.25];
        let f = cutoff_function(&s, 0, 1, &radii).unwrap();
        assert_eq!(f, vec![1.0, 1.0, 0.5, 0.0, 0.0]);
        assert!(cutoff_function(&s, 0, 1, &[0.25, 0.75]).is_err());
    }

    #[test]
    fn pj_synthetic_values() {
        // four unit points: center, two inside r_1 = 1, one in 2B only
        let pts: Vec<Vec<f64>> = vec![vec![0.0], vec![5.0], vec![10.0], vec![15.0]];
        let s = MetricMeasureSpace::from_points(&pts, vec![1.0; 4]).unwrap();
        let mut cfg = cfg_pow1(1.0);
        cfg.big_c = 2.0;
        let ball = Ball::open(0, 8.0);
        // B̄_1 = {0, 5}, 2B = open radius 16 = all four; ratio 1/2 ... use r_1 = 4 for ratio 1/4
        let p = pj_value(&s, &ball, 1, 4.0, &cfg, &RiSpace::Lp(1.0)).unwrap();
        assert!((p - 2.0).abs() < 1e-12);
        cfg.big_c = 1.0;
        let p = pj_value(&s, &ball, 1, 4.0, &cfg, &RiSpace::Lp(2.0)).unwrap();
        assert!((p - 2.0).abs() < 1e-12);
    }

    #[test]
    fn minimal_chain_certifies() {
        let cfg = cfg_pow1(1.0);
        let l1 = 2.0 + cfg.ln_d + 0.01f64.ln_1p();
        let chain = minimal_chain(l1, &cfg, 30).unwrap();
        let rep = induction_step_check(&chain, &cfg).unwrap();
        assert!(rep.certified(), "{rep:?}");
        let rep = induction_step_check(&[cfg.ln_d + 1.0], &cfg).unwrap();
        assert!(!rep.hypothesis_met);
    }

    #[test]
    fn single_point_space() {
        let s = MetricMeasureSpace::from_points(&[vec![0.0]], vec![1.0]).unwrap();
        let cfg = cfg_pow1(1.0);
        let v = doubling_verdict(&s, &RiSpace::Lp(1.0), &cfg, &[Ball::open(0, 1.0)]).unwrap();
        assert!((v.sup_p1 - 1.0 / cfg.big_c).abs() < 1e-12 / cfg.big_c);
    }
}
