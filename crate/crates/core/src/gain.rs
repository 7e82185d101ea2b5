//! Gain functions and the asymptotic tests built on them: Ermakoff's
//! condition, the series `c₁ = Σ 1/(j g(j))`, the fundamental-function
//! claim inequality, the Young-function gain criterion, Zippin indices and
//! the iterated-logarithm example families.
//!
//! Asymptotic quantities are grid estimates; every report carries the grid
//! it was computed on.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::norms::RiSpace;
use crate::quad::integrate;
use crate::young::YoungFunction;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// An increasing `g : [1, ∞) → [1, ∞)` with `g(1) = 1`.
#[derive(Clone)]
pub struct GainFunction {
    kind: GainKind,
    name: String,
}

#[derive(Clone)]
pub enum GainKind {
    /// `(1 + ln t)^α`.
    LogAlpha(f64),
    /// `t^ε`.
    Pow(f64),
    /// `Ψ(1/t) / Ψ(1)` with `Ψ = φ_X / φ_Y`.
    PsiOf(Box<RiSpace>, Box<RiSpace>),
    /// `b(1/t) / b(1)` for a slowly varying example `b`.
    Example(SlowlyVarying),
    /// User-supplied evaluator; `ln_at_exp` is `s ↦ ln g(e^s)`.
    Custom { eval: ScalarFn, ln_at_exp: Option<ScalarFn> },
}

impl fmt::Debug for GainFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GainFunction").field("name", &self.name).finish()
    }
}

impl fmt::Display for GainFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl GainFunction {
    pub fn log_alpha(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("log_alpha needs alpha >= 0, got {alpha}")));
        }
        Ok(GainFunction { kind: GainKind::LogAlpha(alpha), name: format!("log_alpha({alpha})") })
    }

    pub fn pow(eps: f64) -> Result<Self> {
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::InvalidParameter(format!("pow needs eps >= 0, got {eps}")));
        }
        Ok(GainFunction { kind: GainKind::Pow(eps), name: format!("pow({eps})") })
    }

    /// `g(t) = Ψ(1/t)/Ψ(1)`, normalized so that `g(1) = 1`.
    pub fn psi_of(x: RiSpace, y: RiSpace) -> Result<Self> {
        if x.is_l_infinity() || y.is_l_infinity() {
            return Err(Error::InvalidParameter("psi_of needs fundamental functions vanishing at 0".into()));
        }
        let name = format!("psi_of({x},{y})");
        Ok(GainFunction { kind: GainKind::PsiOf(Box::new(x), Box::new(y)), name })
    }

    pub fn example(ex: SlowlyVarying) -> Result<Self> {
        ex.validate()?;
        let name = format!("example:{ex}/normalized");
        Ok(GainFunction { kind: GainKind::Example(ex), name })
    }

    pub fn custom(name: impl Into<String>, eval: ScalarFn, ln_at_exp: Option<ScalarFn>) -> Self {
        GainFunction { kind: GainKind::Custom { eval, ln_at_exp }, name: name.into() }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &GainKind {
        &self.kind
    }

    fn raw_ln_at_exp(&self, s: f64) -> Option<f64> {
        Some(match &self.kind {
            GainKind::LogAlpha(a) => a * s.ln_1p(),
            GainKind::Pow(e) => e * s,
            GainKind::PsiOf(x, y) => x.ln_fundamental_neg_exp(s) - y.ln_fundamental_neg_exp(s),
            GainKind::Example(ex) => ex.ln_at_neg_exp(s),
            GainKind::Custom { ln_at_exp, .. } => return ln_at_exp.as_ref().map(|f| f(s)),
        })
    }

    /// `ln g(e^s)` for `s ≥ 0`, without ever forming `e^s`.
    pub fn ln_at_exp(&self, s: f64) -> Result<f64> {
        match &self.kind {
            GainKind::Custom { ln_at_exp: None, .. } => Err(Error::MissingLogDomain(self.name.clone())),
            GainKind::Custom { ln_at_exp: Some(f), .. } => Ok(f(s)),
            _ => Ok(self.raw_ln_at_exp(s).unwrap() - self.raw_ln_at_exp(0.0).unwrap()),
        }
    }

    pub fn has_log_domain(&self) -> bool {
        !matches!(self.kind, GainKind::Custom { ln_at_exp: None, .. })
    }

    /// `g(t)` for `t ≥ 1`.
    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            GainKind::Custom { eval, .. } => eval(t),
            _ => self.ln_at_exp(t.ln()).unwrap().exp(),
        }
    }

    /// `ln g(t)` for `t ≥ 1`.
    pub fn ln_eval(&self, t: f64) -> Result<f64> {
        match &self.kind {
            GainKind::Custom { ln_at_exp: None, eval } => Ok(eval(t).ln()),
            _ => self.ln_at_exp(t.ln()),
        }
    }

    /// Checks `g(1) = 1`, `g ≥ 1` and monotonicity on a log grid of `[1, 1e12]`.
    pub fn validate(&self) -> Result<()> {
        if self.eval(1.0) != 1.0 {
            return Err(Error::InvalidParameter(format!("{}: g(1) = {} != 1", self.name, self.eval(1.0))));
        }
        let mut prev = 0.0f64;
        for i in 0..=240 {
            let s = 12.0 * 10f64.ln() * i as f64 / 240.0;
            let v = match self.ln_at_exp(s) {
                Ok(v) => v,
                Err(_) => self.eval(s.exp()).ln(),
            };
            if v < -1e-12 {
                return Err(Error::InvalidParameter(format!("{}: g < 1 at t = e^{s}", self.name)));
            }
            if v < prev - 1e-12 * prev.abs().max(1.0) {
                return Err(Error::InvalidParameter(format!("{}: g decreases near t = e^{s}", self.name)));
            }
            prev = v;
        }
        Ok(())
    }
}

/// Iterated logarithm `L_n(t)` on `(0, 1)` evaluated at `t = e^{-s}`:
/// `L_1 = 1 + s`, `L_{n+1} = 1 + ln L_n`.
pub fn iterated_log_neg_exp(n: usize, s: f64) -> f64 {
    let mut l = 1.0 + s;
    for _ in 1..n {
        l = 1.0 + l.ln();
    }
    l
}

/// `L_n(t)` for `t ∈ (0, 1]`.
pub fn iterated_log(n: usize, t: f64) -> f64 {
    iterated_log_neg_exp(n, -t.ln())
}

/// Decreasing slowly varying functions on `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SlowlyVarying {
    /// `exp(L_k / L_m)`, `k < m`.
    C { k: usize, m: usize },
    /// `exp(L_1^{α_1} ⋯ L_k^{α_k})`, `0 < α_j < 1`.
    D(Vec<f64>),
    /// `(L_1 ⋯ L_{m-1}) L_m^α`.
    B { m: usize, alpha: f64 },
    /// `L_n`.
    IteratedLog(usize),
}

impl fmt::Display for SlowlyVarying {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlowlyVarying::C { k, m } => write!(f, "c({k},{m})"),
            SlowlyVarying::D(a) => {
                let parts: Vec<String> = a.iter().map(|x| x.to_string()).collect();
                write!(f, "d({})", parts.join(","))
            }
            SlowlyVarying::B { m, alpha } => write!(f, "b({m},{alpha})"),
            SlowlyVarying::IteratedLog(n) => write!(f, "L({n})"),
        }
    }
}

impl SlowlyVarying {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            SlowlyVarying::C { k, m } if !(*k >= 1 && k < m) => bad(format!("c(k,m) needs 1 <= k < m, got ({k},{m})")),
            SlowlyVarying::D(a) if a.is_empty() || a.iter().any(|&x| !(x > 0.0 && x < 1.0)) => {
                bad(format!("d(α) needs 0 < α_j < 1, got {a:?}"))
            }
            SlowlyVarying::B { m, alpha } if *m < 1 || !(*alpha > 0.0) || !alpha.is_finite() => {
                bad(format!("b(m,α) needs m >= 1 and α > 0, got ({m},{alpha})"))
            }
            SlowlyVarying::IteratedLog(0) => bad("L_n needs n >= 1".into()),
            _ => Ok(()),
        }
    }

    /// `ln b(e^{-s})` for `s ≥ 0`.
    pub fn ln_at_neg_exp(&self, s: f64) -> f64 {
        let l = |n: usize| iterated_log_neg_exp(n, s);
        match self {
            SlowlyVarying::C { k, m } => l(*k) / l(*m),
            SlowlyVarying::D(a) => a.iter().enumerate().map(|(j, &aj)| l(j + 1).powf(aj)).product(),
            SlowlyVarying::B { m, alpha } => (1..*m).map(|j| l(j).ln()).sum::<f64>() + alpha * l(*m).ln(),
            SlowlyVarying::IteratedLog(n) => l(*n).ln(),
        }
    }

    /// `b(t)` for `t ∈ (0, 1]`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidParameter(format!("slowly varying examples live on (0, 1], got t = {t}")));
        }
        self.validate()?;
        Ok(self.ln_at_neg_exp(-t.ln()).exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErmakoffReport {
    pub gain: String,
    /// `ρ(2^{k_max})`.
    pub estimated_limit: f64,
    pub verdict: Verdict,
    /// `(t, ρ(t))` for `t = 2^k`, `k = 0..=k_max`.
    pub trace: Vec<(f64, f64)>,
    pub ln_trace: Vec<f64>,
    pub k_max: u32,
    pub pass_threshold: f64,
    pub fail_threshold: f64,
}

pub const ERMAKOFF_K_MAX: u32 = 40;
const ERMAKOFF_PASS: f64 = 1e-3;
const ERMAKOFF_FAIL: f64 = 0.1;
const ERMAKOFF_TAIL: usize = 10;

/// Estimates `lim_{t→∞} t g(t) / g(e^t)` along `t = 2^k`, `k = 0..=k_max`.
///
/// `ln ρ(t) = ln t + ln g(t) − ln g(e^t)` is evaluated entirely in the log
/// domain. Verdict: `pass` when the last ten values of `ln ρ` are
/// nonincreasing and the final ratio is below `1e-3`; `fail` when the final
/// ratio is at least `0.1` and the last doubling lowered `ln ρ` by less than
/// `0.01` (the trace has stabilized or grows); `inconclusive` otherwise.
pub fn ermakoff_test(g: &GainFunction, k_max: u32) -> Result<ErmakoffReport> {
    if !g.has_log_domain() {
        return Err(Error::MissingLogDomain(g.name().to_string()));
    }
    if k_max < 2 || k_max > 1000 {
        return Err(Error::InvalidParameter(format!("k_max must lie in [2, 1000], got {k_max}")));
    }
    let mut trace = Vec::with_capacity(k_max as usize + 1);
    let mut ln_trace = Vec::with_capacity(k_max as usize + 1);
    for k in 0..=k_max {
        let t = 2f64.powi(k as i32);
        let ln_rho = t.ln() + g.ln_at_exp(t.ln())? - g.ln_at_exp(t)?;
        ln_trace.push(ln_rho);
        trace.push((t, ln_rho.exp()));
    }
    let last = *ln_trace.last().unwrap();
    let prev = ln_trace[ln_trace.len() - 2];
    let final_ratio = last.exp();
    let tail = &ln_trace[ln_trace.len().saturating_sub(ERMAKOFF_TAIL)..];
    let decreasing = tail.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0));
    let verdict = if decreasing && final_ratio < ERMAKOFF_PASS {
        Verdict::Pass
    } else if final_ratio >= ERMAKOFF_FAIL && last - prev > -0.01 {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };
    Ok(ErmakoffReport {
        gain: g.name().to_string(),
        estimated_limit: final_ratio,
        verdict,
        trace,
        ln_trace,
        k_max,
        pass_threshold: ERMAKOFF_PASS,
        fail_threshold: ERMAKOFF_FAIL,
    })
}

/// Converts a slowly varying example into the gain `t ↦ b(1/t)/b(1)` and
/// runs [`ermakoff_test`].
pub fn ermakoff_for_example(ex: &SlowlyVarying, k_max: u32) -> Result<ErmakoffReport> {
    ermakoff_test(&GainFunction::example(ex.clone())?, k_max)
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesReport {
    /// Estimate of `Σ_{j≥1} 1/h(j)`, `h(j) = j g(j)`.
    pub sum: f64,
    pub partial_sum: f64,
    pub terms: u64,
    /// `∫_{N+1}^∞ dt/h(t)`: lower bound for the remainder.
    pub tail_lower: f64,
    /// `∫_N^∞ dt/h(t)`: upper bound for the remainder.
    pub tail_upper: f64,
}

impl SeriesReport {
    /// The integral-test bracket for the full sum.
    pub fn bracket(&self) -> (f64, f64) {
        (self.partial_sum + self.tail_lower, self.partial_sum + self.tail_upper)
    }
}

const SERIES_MAX_TERMS: u64 = 100_000_000;
const SERIES_MAX_PIECES: usize = 900;

/// `c₁ = Σ_{j≥1} 1/(j g(j))` to relative tolerance `tol`.
///
/// Partial sums run until the current term drops below `tol` times the
/// running sum; the remainder is bracketed by the integral test and the
/// midpoint of the bracket is returned. The tail integral is computed in
/// the variable `x = ln t` over doubling pieces; pieces that refuse to
/// shrink flag divergence.
pub fn series_c1(g: &GainFunction, tol: f64) -> Result<SeriesReport> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    let term = |j: f64| -> Result<f64> { Ok((-j.ln() - g.ln_eval(j)?).exp()) };
    let mut sum = 0.0;
    let mut n: u64 = 0;
    loop {
        n += 1;
        let t = term(n as f64)?;
        sum += t;
        if t < tol * sum {
            break;
        }
        if n >= SERIES_MAX_TERMS {
            return Err(Error::Divergent(g.name().to_string()));
        }
    }
    let nf = n as f64;
    // ∫_N^∞ dt / (t g(t)) = ∫_{ln N}^∞ exp(−ln g(e^x)) dx
    let integrand = |x: f64| -> f64 { (-g.ln_at_exp(x).unwrap_or(f64::INFINITY)).exp() };
    if !g.has_log_domain() {
        return Err(Error::MissingLogDomain(g.name().to_string()));
    }
    let mut a = nf.ln();
    let mut tail = 0.0;
    let mut converged = false;
    for _ in 0..SERIES_MAX_PIECES {
        let b = 2.0 * a + 1.0;
        let scale = (b - a) * integrand(a);
        let piece = integrate(integrand, a, b, 1e-3 * tol * scale.max(f64::MIN_POSITIVE));
        tail += piece;
        a = b;
        if piece <= 1e-3 * tol * (sum + tail) {
            converged = true;
            break;
        }
        if tail > 1e6 * sum {
            break;
        }
    }
    if !converged {
        return Err(Error::Divergent(g.name().to_string()));
    }
    let first_gap = integrate(integrand, nf.ln(), (nf + 1.0).ln(), 1e-3 * tol * term(nf)?);
    let tail_lower = (tail - first_gap).max(0.0);
    Ok(SeriesReport { sum: sum + 0.5 * (tail + tail_lower), partial_sum: sum, terms: n, tail_lower, tail_upper: tail })
}

/// `Ψ(t) = φ_X(t) / φ_Y(t)`.
pub fn psi_gain(x: &RiSpace, y: &RiSpace, t: f64) -> Result<f64> {
    let (fx, fy) = (x.fundamental(t), y.fundamental(t));
    if !(fx > 0.0 && fy > 0.0) {
        return Err(Error::InvalidParameter(format!("fundamental functions must be positive at t = {t}")));
    }
    Ok(fx / fy)
}

/// Relative slack used when comparing two sides of an inequality that may
/// hold with equality.
const CLAIM_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct ClaimReport {
    pub grid_len: usize,
    /// Points where `Ψ(t) < g(1/t)`.
    pub hypothesis_violations: Vec<f64>,
    /// Points where `t > φ_X(t)`.
    pub concavity_violations: Vec<f64>,
    /// `(t, φ_X⁻¹(t), φ_Y⁻¹(t / g(1/t)))` where the first exceeds the second.
    pub conclusion_violations: Vec<(f64, f64, f64)>,
    /// Points skipped because an argument left the range of `φ`.
    pub skipped: usize,
}

impl ClaimReport {
    pub fn hypothesis_holds(&self) -> bool {
        self.hypothesis_violations.is_empty() && self.concavity_violations.is_empty()
    }
}

/// Checks `φ_X⁻¹(t) ≤ φ_Y⁻¹(t / g(1/t))` on `grid ⊂ (0, 1)`, together with
/// its hypotheses `Ψ(t) ≥ g(1/t)` and `t ≤ φ_X(t)`, reported separately.
pub fn claim_check(x: &RiSpace, y: &RiSpace, g: &GainFunction, grid: &[f64]) -> Result<ClaimReport> {
    let mut report = ClaimReport {
        grid_len: grid.len(),
        hypothesis_violations: vec![],
        concavity_violations: vec![],
        conclusion_violations: vec![],
        skipped: 0,
    };
    let x_top = x.fundamental(1.0);
    let y_top = y.fundamental(1.0);
    for &t in grid {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidParameter(format!("claim grid must lie in (0, 1), got {t}")));
        }
        let u = -t.ln();
        let ln_g = g.ln_at_exp(u)?;
        let ln_psi = x.ln_fundamental_neg_exp(u) - y.ln_fundamental_neg_exp(u);
        if ln_psi < ln_g - CLAIM_SLACK * ln_g.abs().max(1.0) {
            report.hypothesis_violations.push(t);
        }
        if t > x.fundamental(t) * (1.0 + CLAIM_SLACK) {
            report.concavity_violations.push(t);
        }
        let arg = (t.ln() - ln_g).exp();
        if t > x_top || arg > y_top || arg <= 0.0 {
            report.skipped += 1;
            continue;
        }
        let lhs = x.fundamental_inverse(t)?;
        let rhs = y.fundamental_inverse(arg)?;
        if lhs > rhs * (1.0 + CLAIM_SLACK) {
            report.conclusion_violations.push((t, lhs, rhs));
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct YoungGainReport {
    pub grid_len: usize,
    /// `(t, ln A(t g(t)), ln Â(t))` where the first exceeds the second.
    pub violations: Vec<(f64, f64, f64)>,
    /// `(s, φ_{L^Â}⁻¹(s), φ_{L^A}⁻¹(s / g(1/s)))` where the first exceeds the second.
    pub consequence_violations: Vec<(f64, f64, f64)>,
    pub consequence_checked: usize,
}

impl YoungGainReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty() && self.consequence_violations.is_empty()
    }
}

/// Checks `A(t g(t)) ≤ Â(t)` for `t > 1` on the grid, in the log domain, and
/// the derived `φ_{L^Â}⁻¹(s) ≤ φ_{L^A}⁻¹(s / g(1/s))` at `s = 1/t` through
/// the fundamental-inverse route.
pub fn young_gain_check(a: &YoungFunction, a_hat: &YoungFunction, g: &GainFunction, grid: &[f64]) -> Result<YoungGainReport> {
    let x = RiSpace::Orlicz(*a_hat);
    let y = RiSpace::Orlicz(*a);
    let mut report =
        YoungGainReport { grid_len: grid.len(), violations: vec![], consequence_violations: vec![], consequence_checked: 0 };
    for &t in grid {
        if !(t > 1.0) {
            return Err(Error::InvalidParameter(format!("Young gain grid must lie in (1, ∞), got {t}")));
        }
        let ln_t = t.ln();
        let ln_g = g.ln_at_exp(ln_t)?;
        let lhs = a.ln_eval_exp(ln_t + ln_g);
        let rhs = a_hat.ln_eval_exp(ln_t);
        if lhs > rhs + CLAIM_SLACK * rhs.abs().max(1.0) {
            report.violations.push((t, lhs, rhs));
        }
        let s = 1.0 / t;
        let arg = s / ln_g.exp();
        if arg > 0.0 && s <= x.fundamental(1.0) && arg <= y.fundamental(1.0) && a_hat.eval(t).is_finite() {
            let l = x.fundamental_inverse(s)?;
            let r = y.fundamental_inverse(arg)?;
            report.consequence_checked += 1;
            if l > r * (1.0 + CLAIM_SLACK) {
                report.consequence_violations.push((s, l, r));
            }
        }
    }
    Ok(report)
}

/// A fundamental function accessed in the log domain: `u ↦ ln φ(e^{-u})`.
pub trait Fundamental: Sync {
    fn ln_phi_neg_exp(&self, u: f64) -> f64;

    fn phi(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            self.ln_phi_neg_exp(-t.ln()).exp()
        }
    }
}

impl Fundamental for RiSpace {
    fn ln_phi_neg_exp(&self, u: f64) -> f64 {
        self.ln_fundamental_neg_exp(u)
    }
}

/// `t^a (1 + ln⁺(1/t))^b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLogFundamental {
    pub power: f64,
    pub log_power: f64,
}

impl Fundamental for PowerLogFundamental {
    fn ln_phi_neg_exp(&self, u: f64) -> f64 {
        -self.power * u + if u > 0.0 { self.log_power * u.ln_1p() } else { 0.0 }
    }
}

/// Grid used for dilation functions and Zippin indices.
///
/// `t` runs over `e^{-iδ}` with `δ = depth / points`; dilations use `s =
/// e^{±mδ}` so that `ts` stays on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZippinResolution {
    pub depth: f64,
    pub points: usize,
    pub s_count: usize,
    /// Tolerance used for `0 ≤ lower ≤ upper ≤ 1`, the sandwich bounds and
    /// the index-gap criterion.
    pub slack: f64,
}

impl Default for ZippinResolution {
    fn default() -> Self {
        ZippinResolution { depth: 1e4, points: 20_000, s_count: 120, slack: 2e-2 }
    }
}

impl ZippinResolution {
    pub fn scaled(mut self, factor: usize) -> Self {
        self.points *= factor.max(1);
        self
    }

    fn delta(&self) -> f64 {
        self.depth / self.points as f64
    }

    /// Dilation exponents `m` (in units of `δ`), roughly geometric from 1 to
    /// `max`.
    fn steps(&self, max: usize) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.s_count)
            .map(|i| {
                let frac = i as f64 / (self.s_count - 1).max(1) as f64;
                (max as f64).powf(frac).round() as usize
            })
            .filter(|&m| m >= 1 && m <= max)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Tabulates `ln φ(e^{-iδ})` for `i = 0..=len`.
fn tabulate<F: Fundamental + ?Sized>(phi: &F, delta: f64, len: usize) -> Vec<f64> {
    use rayon::prelude::*;
    (0..=len).into_par_iter().map(|i| phi.ln_phi_neg_exp(i as f64 * delta)).collect()
}

/// `ln M(s)` for `s = e^{sign · m δ}` from a table of `ln φ`; the pair
/// `(t, ts)` ranges over all grid points with both in `(0, 1]` and `t` in
/// the first `base + 1` entries.
fn ln_dilation_from_table(table: &[f64], base: usize, m: usize, grow: bool) -> Option<f64> {
    let mut best = f64::NEG_INFINITY;
    if grow {
        // s > 1: ts = e^{-(i - m)δ}, need i ≥ m
        for i in m..=base.min(table.len() - 1) {
            best = best.max(table[i - m] - table[i]);
        }
    } else {
        for i in 0..=base {
            if i + m >= table.len() {
                break;
            }
            best = best.max(table[i + m] - table[i]);
        }
    }
    best.is_finite().then_some(best)
}

/// Grid estimate (a lower bound) of `M(s) = sup_t φ(ts)/φ(t)` with `t` and
/// `ts` in `(0, 1]`. `s` is snapped to the nearest grid dilation.
pub fn zippin_dilation<F: Fundamental + ?Sized>(phi: &F, s: f64, res: &ZippinResolution) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter(format!("dilation factor must be positive, got {s}")));
    }
    let delta = res.delta();
    let m = (s.ln().abs() / delta).round() as usize;
    if m == 0 {
        return Ok(1.0);
    }
    if m > res.points {
        return Err(Error::EmptyGrid(format!("no grid pair (t, ts) inside (0, 1] for s = {s}")));
    }
    let table = tabulate(phi, delta, res.points + m);
    ln_dilation_from_table(&table, res.points, m, s > 1.0)
        .map(f64::exp)
        .ok_or_else(|| Error::EmptyGrid(format!("no admissible grid points for s = {s}")))
}

#[derive(Debug, Clone, Serialize)]
pub struct ZippinReport {
    pub lower: f64,
    pub upper: f64,
    pub resolution: ZippinResolution,
    /// `(s, M(s))` over the dilation grid.
    pub dilations: Vec<(f64, f64)>,
    /// `0 ≤ lower ≤ upper ≤ 1` within the slack.
    pub ordered: bool,
    /// Sandwich bounds `s^β ≤ M(s)` on the whole grid and `M(s) ≤ s^{β ∓ slack}`
    /// at the extreme dilations.
    pub sandwich: bool,
}

/// Grid estimates of the lower and upper Zippin indices
/// `sup_{s<1} ln M(s)/ln s` and `inf_{s>1} ln M(s)/ln s`.
pub fn zippin_indices<F: Fundamental + ?Sized>(phi: &F, res: &ZippinResolution) -> Result<ZippinReport> {
    let delta = res.delta();
    let n = res.points;
    let table = tabulate(phi, delta, 2 * n);
    let mut dilations = Vec::new();
    let mut upper = f64::INFINITY;
    let mut lower = f64::NEG_INFINITY;
    let mut grow_pts = Vec::new();
    for m in res.steps(n / 2) {
        let ln_s = m as f64 * delta;
        if let Some(ln_m) = ln_dilation_from_table(&table, n, m, true) {
            upper = upper.min(ln_m / ln_s);
            dilations.push((ln_s.exp(), ln_m.exp()));
            grow_pts.push((ln_s, ln_m));
        }
    }
    let mut shrink_pts = Vec::new();
    for m in res.steps(n) {
        let ln_s = -(m as f64) * delta;
        if let Some(ln_m) = ln_dilation_from_table(&table, n, m, false) {
            lower = lower.max(ln_m / ln_s);
            dilations.push((ln_s.exp(), ln_m.exp()));
            shrink_pts.push((ln_s, ln_m));
        }
    }
    if !upper.is_finite() || !lower.is_finite() {
        return Err(Error::EmptyGrid("Zippin grid produced no admissible dilations".into()));
    }
    dilations.sort_by(|a, b| a.0.total_cmp(&b.0));
    let eps = res.slack;
    let ordered = lower >= -eps && lower <= upper + eps && upper <= 1.0 + eps;
    let tiny = 1e-12;
    let mut sandwich = grow_pts.iter().all(|&(ls, lm)| lm >= upper * ls - tiny * ls.abs())
        && shrink_pts.iter().all(|&(ls, lm)| lm >= lower * ls - tiny * ls.abs());
    if let Some(&(ls, lm)) = grow_pts.last() {
        sandwich &= lm <= (upper + eps) * ls;
    }
    if let Some(&(ls, lm)) = shrink_pts.last() {
        sandwich &= lm <= (lower - eps) * ls;
    }
    Ok(ZippinReport { lower, upper, resolution: *res, dilations, ordered, sandwich })
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexGapReport {
    pub upper_x: f64,
    pub lower_y: f64,
    pub satisfied: bool,
    /// Grid points where `Ψ(t) < t^{upper_X − lower_Y}`.
    pub psi_bound_violations: usize,
    pub psi_grid_len: usize,
    pub resolution: ZippinResolution,
}

/// Index-gap criterion: `upper(X) < lower(Y) − slack` gives the power gain
/// `Ψ(t) ≳ t^{upper(X) − lower(Y)}`, which is then checked on a grid.
pub fn index_gap_doubling_criterion(x: &RiSpace, y: &RiSpace, res: &ZippinResolution) -> Result<IndexGapReport> {
    let zx = zippin_indices(x, res)?;
    let zy = zippin_indices(y, res)?;
    let exponent = zx.upper - zy.lower;
    let grid: Vec<f64> = (1..=200).map(|i| 10f64.powf(-12.0 * i as f64 / 200.0)).collect();
    let mut violations = 0;
    for &t in &grid {
        let u = -t.ln();
        let ln_psi = x.ln_fundamental_neg_exp(u) - y.ln_fundamental_neg_exp(u);
        if ln_psi < -exponent * u - CLAIM_SLACK * (exponent * u).abs().max(1.0) {
            violations += 1;
        }
    }
    Ok(IndexGapReport {
        upper_x: zx.upper,
        lower_y: zy.lower,
        satisfied: zx.upper < zy.lower - res.slack,
        psi_bound_violations: violations,
        psi_grid_len: grid.len(),
        resolution: *res,
    })
}
