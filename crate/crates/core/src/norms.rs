//! Rearrangement-invariant norms on step functions, fundamental functions,
//! and the localized norm `‖f‖_{X(B, μ_B)}`.
//!
//! Every norm here acts on a decreasing rearrangement `u` on `(0, T)`.
//! Lebesgue, Lorentz and Orlicz norms are exact finite sums (up to the
//! Luxemburg bisection); Lorentz–Zygmund weights are integrated per piece
//! with adaptive Gauss–Kronrod in the variable `u = ln(1/t)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::quad::{bisect_increasing, integrate, integrate_to_infinity};
use crate::rearrangement::{localized_rearrangement, StepFunction};
use crate::space::{Ball, MetricMeasureSpace};
use crate::young::YoungFunction;

/// Interior sample points per piece in the Marcinkiewicz supremum.
const MARCINKIEWICZ_REFINE: usize = 64;

/// A rearrangement-invariant space, identified by its norm functional.
#[derive(Debug, Clone, PartialEq)]
pub enum RiSpace {
    /// `L^p`, `1 ≤ p ≤ ∞`.
    Lp(f64),
    /// `‖t^{1/p - 1/q} u(t)‖_{L^q}`.
    Lorentz { p: f64, q: f64 },
    /// `‖t^{1/p - 1/q} (1 + ln⁺(1/t))^α u(t)‖_{L^q}`.
    LorentzZygmund { p: f64, q: f64, alpha: f64 },
    /// Orlicz space with the Luxemburg norm.
    Orlicz(YoungFunction),
    /// `M(X)`: `sup_t (1/t) ∫_0^t u · φ_X(t)`.
    Marcinkiewicz(Box<RiSpace>),
    /// `Λ(X)`: `∫ u dφ_X`.
    Lambda(Box<RiSpace>),
}

impl fmt::Display for RiSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RiSpace::Lp(p) => write!(f, "Lp({})", fmt_param(*p)),
            RiSpace::Lorentz { p, q } => write!(f, "Lorentz({},{})", fmt_param(*p), fmt_param(*q)),
            RiSpace::LorentzZygmund { p, q, alpha } => {
                write!(f, "LZ({},{},{})", fmt_param(*p), fmt_param(*q), alpha)
            }
            RiSpace::Orlicz(a) => write!(f, "Orlicz({a})"),
            RiSpace::Marcinkiewicz(x) => write!(f, "M(of={x})"),
            RiSpace::Lambda(x) => write!(f, "Lambda(of={x})"),
        }
    }
}

fn fmt_param(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        format!("{p}")
    }
}

fn lorentz_admissible(p: f64, q: f64) -> bool {
    (p > 1.0 && p < f64::INFINITY && q >= 1.0) || (p == 1.0 && q == 1.0) || (p == f64::INFINITY && q == f64::INFINITY)
}

impl RiSpace {
    pub fn lp(p: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::InvalidParameter(format!("Lp needs p >= 1, got {p}")));
        }
        Ok(RiSpace::Lp(p))
    }

    pub fn lorentz(p: f64, q: f64) -> Result<Self> {
        if !lorentz_admissible(p, q) {
            return Err(Error::InvalidParameter(format!(
                "Lorentz({p},{q}) needs 1<p<inf and 1<=q<=inf, or p=q=1, or p=q=inf"
            )));
        }
        Ok(RiSpace::Lorentz { p, q })
    }

    pub fn lorentz_zygmund(p: f64, q: f64, alpha: f64) -> Result<Self> {
        let ok = alpha.is_finite()
            && ((p > 1.0 && p < f64::INFINITY && q >= 1.0)
                || (p == 1.0 && q == 1.0 && alpha >= 0.0)
                || (p == f64::INFINITY && q == f64::INFINITY && alpha <= 0.0)
                || (p == f64::INFINITY && q >= 1.0 && alpha + 1.0 / q < 0.0));
        if !ok {
            return Err(Error::InvalidParameter(format!("LZ({p},{q},{alpha}) is not an admissible parameter set")));
        }
        Ok(RiSpace::LorentzZygmund { p, q, alpha })
    }

    pub fn orlicz(a: YoungFunction) -> Result<Self> {
        a.validate()?;
        Ok(RiSpace::Orlicz(a))
    }

    pub fn marcinkiewicz(of: RiSpace) -> Self {
        RiSpace::Marcinkiewicz(Box::new(of))
    }

    pub fn lambda(of: RiSpace) -> Self {
        RiSpace::Lambda(Box::new(of))
    }

    /// True for `L^∞`-like spaces whose fundamental function does not
    /// vanish at `0⁺`.
    pub fn is_l_infinity(&self) -> bool {
        match self {
            RiSpace::Lp(p) => p.is_infinite(),
            RiSpace::Lorentz { p, .. } => p.is_infinite(),
            RiSpace::LorentzZygmund { p, q, alpha } => p.is_infinite() && q.is_infinite() && *alpha == 0.0,
            RiSpace::Orlicz(_) => false,
            RiSpace::Marcinkiewicz(x) | RiSpace::Lambda(x) => x.is_l_infinity(),
        }
    }

    /// Whether the triangle inequality holds with constant 1.
    pub fn is_normed(&self) -> bool {
        match self {
            RiSpace::Lp(_) | RiSpace::Orlicz(_) | RiSpace::Marcinkiewicz(_) | RiSpace::Lambda(_) => true,
            RiSpace::Lorentz { p, q } | RiSpace::LorentzZygmund { p, q, .. } => q <= p,
        }
    }

    /// The norm of a decreasing rearrangement `u` on `(0, T)`.
    pub fn norm(&self, u: &StepFunction) -> Result<f64> {
        u.check_rearrangement()?;
        if u.values().is_empty() {
            return Ok(0.0);
        }
        Ok(match self {
            RiSpace::Lp(p) => lp_norm(u, *p),
            RiSpace::Lorentz { p, q } => lz_norm(u, *p, *q, 0.0),
            RiSpace::LorentzZygmund { p, q, alpha } => lz_norm(u, *p, *q, *alpha),
            RiSpace::Orlicz(a) => {
                let (vals, lens): (Vec<f64>, Vec<f64>) = u.pieces().map(|(s, e, v)| (v, e - s)).unzip();
                luxemburg(a, &vals, &lens)?
            }
            RiSpace::Marcinkiewicz(x) => marcinkiewicz_norm(u, |t| x.fundamental(t)),
            RiSpace::Lambda(x) => {
                let mut acc = 0.0;
                let mut prev = 0.0;
                for (_, b, v) in u.pieces() {
                    let phi_b = x.fundamental(b);
                    acc += v * (phi_b - prev);
                    prev = phi_b;
                }
                acc
            }
        })
    }

    /// `φ_X(t) = ‖χ_{[0,t)}‖_X` for `t > 0`.
    pub fn fundamental(&self, t: f64) -> f64 {
        if !(t > 0.0) {
            return 0.0;
        }
        match self {
            RiSpace::Lp(p) => {
                if p.is_infinite() {
                    1.0
                } else {
                    t.powf(1.0 / p)
                }
            }
            RiSpace::Orlicz(a) => 1.0 / a.inverse(1.0 / t),
            RiSpace::Marcinkiewicz(x) | RiSpace::Lambda(x) => x.fundamental(t),
            RiSpace::Lorentz { p, q } => lz_fundamental(*p, *q, 0.0, t),
            RiSpace::LorentzZygmund { p, q, alpha } => lz_fundamental(*p, *q, *alpha, t),
        }
    }

    /// `ln φ_X(e^{-u})`, usable for arbitrarily large `u ≥ 0`.
    pub fn ln_fundamental_neg_exp(&self, u: f64) -> f64 {
        match self {
            RiSpace::Lp(p) => {
                if p.is_infinite() {
                    0.0
                } else {
                    -u / p
                }
            }
            RiSpace::Orlicz(a) => -a.ln_inverse_exp(u),
            RiSpace::Marcinkiewicz(x) | RiSpace::Lambda(x) => x.ln_fundamental_neg_exp(u),
            RiSpace::Lorentz { p, q } => lz_ln_fundamental(*p, *q, 0.0, u),
            RiSpace::LorentzZygmund { p, q, alpha } => lz_ln_fundamental(*p, *q, *alpha, u),
        }
    }

    /// `φ_X⁻¹(s)` for `s` in the range of `φ_X` on `(0, 1]`.
    pub fn fundamental_inverse(&self, s: f64) -> Result<f64> {
        if self.is_l_infinity() {
            return Err(Error::InvalidParameter(format!("{self} has no invertible fundamental function")));
        }
        let top = self.fundamental(1.0);
        if !(s > 0.0) || s > top * (1.0 + 1e-12) {
            return Err(Error::OutOfRange { value: s });
        }
        let s = s.min(top);
        match self {
            RiSpace::Lp(p) => Ok(s.powf(*p)),
            RiSpace::Orlicz(a) => Ok(1.0 / a.eval(1.0 / s)),
            RiSpace::Marcinkiewicz(x) | RiSpace::Lambda(x) => x.fundamental_inverse(s),
            _ => {
                // ln φ(e^{-u}) is nonincreasing in u; bracket then bisect.
                let target = s.ln();
                let f = |u: f64| -self.ln_fundamental_neg_exp(u);
                let mut hi = 1.0;
                while f(hi) < -target {
                    hi *= 2.0;
                    if hi > 1e300 {
                        return Err(Error::OutOfRange { value: s });
                    }
                }
                let u = bisect_increasing(f, -target, 0.0, hi);
                Ok((-u).exp())
            }
        }
    }
}

/// Lebesgue norm of a step function, scaled by its maximum for stability.
fn lp_norm(u: &StepFunction, p: f64) -> f64 {
    let top = u.values()[0];
    if top == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return top;
    }
    let sum: f64 = u.pieces().map(|(a, b, v)| (v / top).powf(p) * (b - a)).sum();
    top * sum.powf(1.0 / p)
}

/// `∫_{u1}^{u2} e^{-c u} (1 + u)^β du` with `0 ≤ u1 < u2 ≤ ∞`, returned as a
/// natural logarithm so that deep tails never underflow.
fn ln_log_weight_integral(c: f64, beta: f64, u1: f64, u2: f64) -> f64 {
    let lead = -c * u1 + beta * u1.ln_1p();
    let s = 1.0 + u1;
    // remaining integrand after factoring out the value at u1
    let g = move |v: f64| (-c * v).exp() * (1.0 + v / s).powf(beta);
    let rest = if u2.is_infinite() {
        if c == 0.0 {
            // β < -1 is guaranteed by admissibility
            s / (-beta - 1.0)
        } else {
            let scale = 1.0 / c;
            integrate_to_infinity(g, 0.0, 1e-14 * scale)
        }
    } else {
        let width = u2 - u1;
        let scale = width * g(0.0).max(g(width)).max(1e-300);
        integrate(g, 0.0, width, 1e-14 * scale)
    };
    lead + rest.ln()
}

/// `∫_a^b t^{c-1} (1 + ln⁺(1/t))^β dt` for `0 ≤ a < b`.
fn lz_weight_integral(c: f64, beta: f64, a: f64, b: f64) -> f64 {
    let mut total = 0.0;
    if a < 1.0 {
        let hi = b.min(1.0);
        let u1 = -hi.ln();
        let u2 = if a == 0.0 { f64::INFINITY } else { -a.ln() };
        if beta == 0.0 && c > 0.0 {
            total += (hi.powf(c) - a.powf(c)) / c;
        } else {
            total += ln_log_weight_integral(c, beta, u1.max(0.0), u2).exp();
        }
    }
    if b > 1.0 {
        let lo = a.max(1.0);
        total += if c == 0.0 { (b / lo).ln() } else { (b.powf(c) - lo.powf(c)) / c };
    }
    total
}

/// `sup` of `t^{1/p} (1 + ln⁺(1/t))^α` over `(a, b)`.
fn lz_sup_weight(p: f64, alpha: f64, a: f64, b: f64) -> f64 {
    let inv_p = 1.0 / p;
    let w = |t: f64| {
        if t <= 0.0 {
            if inv_p > 0.0 || alpha < 0.0 {
                0.0
            } else {
                1.0
            }
        } else {
            let lp = if t < 1.0 { 1.0 - t.ln() } else { 1.0 };
            t.powf(inv_p) * lp.powf(alpha)
        }
    };
    let mut best = w(a).max(w(b));
    if inv_p > 0.0 && alpha > 0.0 {
        let star = (1.0 - alpha * p).exp();
        if star > a && star < b && star < 1.0 {
            best = best.max(w(star));
        }
    }
    best
}

fn lz_norm(u: &StepFunction, p: f64, q: f64, alpha: f64) -> f64 {
    let top = u.values()[0];
    if top == 0.0 {
        return 0.0;
    }
    if q.is_infinite() {
        return u.pieces().map(|(a, b, v)| v * lz_sup_weight(p, alpha, a, b)).fold(0.0, f64::max);
    }
    let c = q / p;
    let beta = alpha * q;
    let sum: f64 = u
        .pieces()
        .map(|(a, b, v)| (v / top).powf(q) * lz_weight_integral(c, beta, a, b))
        .sum();
    top * sum.powf(1.0 / q)
}

fn lz_fundamental(p: f64, q: f64, alpha: f64, t: f64) -> f64 {
    if q.is_infinite() {
        if p.is_infinite() && alpha == 0.0 {
            return 1.0;
        }
        return lz_sup_weight(p, alpha, 0.0, t);
    }
    if alpha == 0.0 && p.is_finite() {
        return (p / q).powf(1.0 / q) * t.powf(1.0 / p);
    }
    lz_weight_integral(q / p, alpha * q, 0.0, t).powf(1.0 / q)
}

fn lz_ln_fundamental(p: f64, q: f64, alpha: f64, u: f64) -> f64 {
    if u < 0.0 {
        return lz_fundamental(p, q, alpha, (-u).exp()).ln();
    }
    if q.is_infinite() {
        if p.is_infinite() && alpha == 0.0 {
            return 0.0;
        }
        if alpha <= 0.0 || p.is_infinite() {
            return -u / p + alpha * u.ln_1p();
        }
        // w increases up to s* = e^{1 - αp}, i.e. u* = αp - 1
        let u_star = alpha * p - 1.0;
        let uu = u.max(u_star);
        return -uu / p + alpha * uu.ln_1p();
    }
    if alpha == 0.0 && p.is_finite() {
        return (p / q).ln() / q - u / p;
    }
    ln_log_weight_integral(q / p, alpha * q, u, f64::INFINITY) / q
}

/// Grid-refined Marcinkiewicz supremum `sup_t (1/t) ∫_0^t u · φ(t)`.
fn marcinkiewicz_norm<F: Fn(f64) -> f64>(u: &StepFunction, phi: F) -> f64 {
    let f = |t: f64| u.integral_to(t) / t * phi(t);
    let mut best = 0.0f64;
    let mut segments: Vec<(f64, f64)> = u.pieces().map(|(a, b, _)| (a, b)).collect();
    if u.domain_end() > u.support_end() {
        segments.push((u.support_end(), u.domain_end()));
    }
    for (a, b) in segments {
        let mut arg = b;
        let mut local = f(b);
        for k in 1..MARCINKIEWICZ_REFINE {
            let t = a + (b - a) * k as f64 / MARCINKIEWICZ_REFINE as f64;
            let v = f(t);
            if v > local {
                local = v;
                arg = t;
            }
        }
        // golden-section polish around the best sample
        let h = (b - a) / MARCINKIEWICZ_REFINE as f64;
        let (mut lo, mut hi) = ((arg - h).max(a), (arg + h).min(b));
        if lo <= 0.0 {
            lo = f64::MIN_POSITIVE.max(a);
        }
        let ratio = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let m1 = hi - ratio * (hi - lo);
            let m2 = lo + ratio * (hi - lo);
            if f(m1) < f(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        local = local.max(f(0.5 * (lo + hi)));
        best = best.max(local);
    }
    best
}

/// `inf{λ > 0 : Σ weights[i] A(|values[i]| / λ) ≤ 1}`.
pub fn luxemburg(a: &YoungFunction, values: &[f64], weights: &[f64]) -> Result<f64> {
    let mut top = 0.0f64;
    let mut top_weight = 0.0;
    let mut total = 0.0;
    for (&v, &w) in values.iter().zip(weights) {
        if w <= 0.0 {
            continue;
        }
        total += w;
        let v = v.abs();
        if v > top {
            top = v;
            top_weight = w;
        } else if v == top {
            top_weight += w;
        }
    }
    if top == 0.0 {
        return Ok(0.0);
    }
    let modular = |lambda: f64| -> f64 {
        values
            .iter()
            .zip(weights)
            .map(|(&v, &w)| if w > 0.0 { w * a.eval(v.abs() / lambda) } else { 0.0 })
            .sum()
    };
    // the largest value alone already gives modular ≥ 1 below `lo`;
    // the total mass bounds the modular above `hi`.
    let mut lo = top / a.inverse(1.0 / top_weight);
    let mut hi = top / a.inverse(1.0 / total);
    if !(lo > 0.0 && hi.is_finite() && lo <= hi) {
        return Err(Error::BracketFailure(format!("{a}: bracket [{lo}, {hi}]")));
    }
    lo *= 1.0 - 1e-12;
    hi *= 1.0 + 1e-12;
    if modular(hi) > 1.0 {
        return Err(Error::BracketFailure(format!("{a}: modular exceeds 1 at the upper bracket")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || (hi - lo) <= 1e-15 * hi {
            break;
        }
        if modular(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Luxemburg norm of `f` over the optional index set, with point masses
/// divided by `normalization` when given.
pub fn luxemburg_norm(
    a: &YoungFunction,
    space: &MetricMeasureSpace,
    f: &[f64],
    restrict_to: Option<&[usize]>,
    normalization: Option<f64>,
) -> Result<f64> {
    if f.len() != space.len() {
        return Err(Error::InvalidParameter("function length does not match space".into()));
    }
    let scale = match normalization {
        Some(m) if !(m > 0.0) => return Err(Error::InvalidParameter(format!("normalization must be positive, got {m}"))),
        Some(m) => 1.0 / m,
        None => 1.0,
    };
    let w = space.weights();
    let (vals, weights): (Vec<f64>, Vec<f64>) = match restrict_to {
        None => f.iter().zip(w).map(|(&v, &m)| (v, m * scale)).unzip(),
        Some(set) => {
            let mut out = (Vec::with_capacity(set.len()), Vec::with_capacity(set.len()));
            for &i in set {
                space.check_index(i)?;
                out.0.push(f[i]);
                out.1.push(w[i] * scale);
            }
            out
        }
    };
    luxemburg(a, &vals, &weights)
}

/// `‖f‖_{X(B, μ_B)}`: the norm of `s ↦ (f χ_B)*(s μ(B))` on `(0, 1)`.
pub fn local_norm(space: &MetricMeasureSpace, f: &[f64], ball: &Ball, spec: &RiSpace) -> Result<f64> {
    let u = localized_rearrangement(space, f, ball)?;
    spec.norm(&u)
}

/// Direct Luxemburg norm on `B` with respect to `μ(B)⁻¹ μ`.
pub fn luxemburg_on_ball(a: &YoungFunction, space: &MetricMeasureSpace, f: &[f64], ball: &Ball) -> Result<f64> {
    let members = space.ball_members(ball)?;
    let mass = space.measure_of_set(&members)?;
    luxemburg_norm(a, space, f, Some(&members), Some(mass))
}
