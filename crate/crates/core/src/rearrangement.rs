//! Distribution functions and decreasing rearrangements.
//!
//! Everything here is exact on finite spaces: rearrangements are step
//! functions and all integrals are finite sums.

use crate::error::{Error, Result};
use crate::space::{Ball, MetricMeasureSpace};

/// Right-continuous step function on `[0, domain_end)`.
///
/// The value on `[breaks[i], breaks[i + 1])` is `values[i]`; the function is
/// zero on `[breaks.last(), domain_end)` and beyond.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    breaks: Vec<f64>,
    values: Vec<f64>,
    domain_end: f64,
}

impl StepFunction {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>, domain_end: f64) -> Result<Self> {
        if breaks.is_empty() || breaks[0] != 0.0 {
            return Err(Error::InvalidParameter("step function breakpoints must start at 0".into()));
        }
        if values.len() + 1 != breaks.len() {
            return Err(Error::InvalidParameter(format!(
                "{} breakpoints need {} values, got {}",
                breaks.len(),
                breaks.len() - 1,
                values.len()
            )));
        }
        if breaks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("breakpoints must be strictly increasing".into()));
        }
        let last = *breaks.last().unwrap();
        if !(domain_end >= last) {
            return Err(Error::InvalidParameter(format!("domain end {domain_end} precedes last breakpoint {last}")));
        }
        Ok(StepFunction { breaks, values, domain_end })
    }

    /// `value` on `[0, len)`, zero on `[len, domain_end)`.
    pub fn indicator(len: f64, value: f64, domain_end: f64) -> Result<Self> {
        if len == 0.0 {
            return StepFunction::new(vec![0.0], vec![], domain_end);
        }
        StepFunction::new(vec![0.0, len], vec![value], domain_end)
    }

    /// The identically zero function on `[0, domain_end)`.
    pub fn zero(domain_end: f64) -> Self {
        StepFunction { breaks: vec![0.0], values: vec![], domain_end }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn domain_end(&self) -> f64 {
        self.domain_end
    }

    /// End of the last explicit piece.
    pub fn support_end(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.values.iter().enumerate().map(move |(i, &v)| (self.breaks[i], self.breaks[i + 1], v))
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        let k = self.breaks.partition_point(|&b| b <= t);
        if k == 0 || k > self.values.len() {
            0.0
        } else {
            self.values[k - 1]
        }
    }

    /// `∫ |u|` over the domain, as an exact finite sum.
    pub fn integral(&self) -> f64 {
        self.pieces().map(|(a, b, v)| v.abs() * (b - a)).sum()
    }

    /// `∫_0^t u`.
    pub fn integral_to(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for (a, b, v) in self.pieces() {
            if t <= a {
                break;
            }
            acc += v * (b.min(t) - a);
        }
        acc
    }

    /// `∫ ψ(u(s)) ds` with `ψ(0) = 0` assumed on the zero tail.
    pub fn integrate_composed<F: Fn(f64) -> f64>(&self, psi: F) -> f64 {
        self.pieces().map(|(a, b, v)| psi(v) * (b - a)).sum()
    }

    /// Lebesgue measure of `{s : u(s) > t}`.
    pub fn level_measure(&self, t: f64) -> f64 {
        self.pieces().filter(|&(_, _, v)| v > t).map(|(a, b, _)| b - a).sum()
    }

    pub fn is_nonincreasing_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0) && self.values.windows(2).all(|w| w[1] <= w[0])
    }

    /// Errors unless the function is a valid decreasing rearrangement.
    pub fn check_rearrangement(&self) -> Result<()> {
        if let Some(v) = self.values.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::NotRearrangement(format!("negative or NaN value {v}")));
        }
        if self.values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::NotRearrangement("values increase across a breakpoint".into()));
        }
        Ok(())
    }

    /// Multiplies every value by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        StepFunction { values: self.values.iter().map(|v| v * c).collect(), ..self.clone() }
    }

    /// Rows `(breakpoint, value)`; the final row marks where the function
    /// drops to zero.
    pub fn csv_rows(&self) -> Vec<[f64; 2]> {
        let mut rows: Vec<[f64; 2]> = self.pieces().map(|(a, _, v)| [a, v]).collect();
        rows.push([self.support_end(), 0.0]);
        rows
    }
}

/// Collects `(|f(i)|, weight[i])` over the optional restriction, checking
/// indices and the length of `f`.
fn masses(space: &MetricMeasureSpace, f: &[f64], restrict_to: Option<&[usize]>) -> Result<(Vec<(f64, f64)>, f64)> {
    if f.len() != space.len() {
        return Err(Error::InvalidParameter(format!(
            "function has {} values for a space with {} points",
            f.len(),
            space.len()
        )));
    }
    let w = space.weights();
    let mut out = Vec::new();
    match restrict_to {
        None => {
            for i in 0..f.len() {
                out.push((f[i].abs(), w[i]));
            }
        }
        Some(set) => {
            let mut seen = vec![false; space.len()];
            for &i in set {
                space.check_index(i)?;
                if std::mem::replace(&mut seen[i], true) {
                    continue;
                }
                out.push((f[i].abs(), w[i]));
            }
        }
    }
    if out.iter().any(|p| p.0.is_nan()) {
        return Err(Error::InvalidParameter("function contains NaN".into()));
    }
    // order-independent total: sum the weights in ascending order
    let mut ws: Vec<f64> = out.iter().map(|p| p.1).collect();
    ws.sort_by(f64::total_cmp);
    Ok((out, ws.iter().sum()))
}

/// Distinct nonzero levels of `|f|` in decreasing order with the mass at
/// each level. Masses inside a level are summed in ascending order so the
/// result depends only on the multiset of `(|f|, weight)` pairs.
fn levels(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.retain(|p| p.0 > 0.0);
    pts.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.total_cmp(&b.1)));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (v, w) in pts {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += w,
            _ => out.push((v, w)),
        }
    }
    out
}

/// `t ↦ μ{|f| > t}` over the (optionally restricted) space.
///
/// The result is a step function on `[0, max|f|)`, zero afterwards.
pub fn distribution(space: &MetricMeasureSpace, f: &[f64], restrict_to: Option<&[usize]>) -> Result<StepFunction> {
    let (pts, _) = masses(space, f, restrict_to)?;
    let lv = levels(pts);
    if lv.is_empty() {
        return Ok(StepFunction::zero(0.0));
    }
    // cumulative masses from the top level down
    let mut above = Vec::with_capacity(lv.len());
    let mut acc = 0.0;
    for &(_, w) in &lv {
        acc += w;
        above.push(acc);
    }
    let k = lv.len();
    let mut breaks = Vec::with_capacity(k + 1);
    let mut values = Vec::with_capacity(k);
    breaks.push(0.0);
    for i in (0..k).rev() {
        // on [v_{i+1}, v_i) the set {|f| > t} contains levels 0..=i
        values.push(above[i]);
        breaks.push(lv[i].0);
    }
    let end = lv[0].0;
    StepFunction::new(breaks, values, end)
}

/// The decreasing rearrangement `f*` on `(0, μ(restriction))`.
pub fn decreasing_rearrangement(
    space: &MetricMeasureSpace,
    f: &[f64],
    restrict_to: Option<&[usize]>,
) -> Result<StepFunction> {
    let (pts, total) = masses(space, f, restrict_to)?;
    let lv = levels(pts);
    let mut breaks = Vec::with_capacity(lv.len() + 1);
    let mut values = Vec::with_capacity(lv.len());
    breaks.push(0.0);
    let mut acc = 0.0;
    for (v, w) in lv {
        acc += w;
        breaks.push(acc);
        values.push(v);
    }
    let end = total.max(acc);
    StepFunction::new(breaks, values, end)
}

/// `s ↦ (f χ_B)*(s μ(B))` on `(0, 1)`.
pub fn localized_rearrangement(space: &MetricMeasureSpace, f: &[f64], ball: &Ball) -> Result<StepFunction> {
    let members = space.ball_members(ball)?;
    let mass = space.measure_of_set(&members)?;
    let star = decreasing_rearrangement(space, f, Some(&members))?;
    let mut breaks: Vec<f64> = star.breaks.iter().map(|b| b / mass).collect();
    // rescaling can round the final cumulative mass just past 1
    for b in breaks.iter_mut() {
        if *b > 1.0 {
            *b = 1.0;
        }
    }
    if breaks.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("degenerate rescaled breakpoints".into()));
    }
    StepFunction::new(breaks, star.values, 1.0)
}

/// Both sides of `∫_Ω ψ(|f|) dμ = ∫_0^{μ(Ω)} ψ(f*(s)) ds`, computed along
/// independent paths: a weighted sum over points and an exact step
/// integral of the rearrangement.
pub fn layer_cake<F: Fn(f64) -> f64>(space: &MetricMeasureSpace, f: &[f64], psi: F) -> Result<(f64, f64)> {
    if f.len() != space.len() {
        return Err(Error::InvalidParameter("function length does not match space".into()));
    }
    let direct: f64 = f.iter().zip(space.weights()).map(|(v, w)| psi(v.abs()) * w).sum();
    let star = decreasing_rearrangement(space, f, None)?;
    Ok((direct, star.integrate_composed(&psi)))
}
