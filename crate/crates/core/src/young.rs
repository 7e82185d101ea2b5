//! Young functions: convex, nondecreasing `A` with `A(0) = 0`.

use std::fmt;

use crate::error::{Error, Result};
use crate::quad::bisect_increasing;

/// The Young-function registry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum YoungFunction {
    /// `t^p`, `p ≥ 1`.
    Power(f64),
    /// `e^t - 1`.
    ExpMinusOne,
    /// `t (1 + ln⁺ t)^α`, `α ≥ 0`.
    TLogAlpha(f64),
    /// `t^p (1 + ln⁺ t)^α`, `p ≥ 1`, `α ≥ 0`.
    PowerLog { p: f64, alpha: f64 },
}

impl fmt::Display for YoungFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            YoungFunction::Power(p) => write!(f, "power({p})"),
            YoungFunction::ExpMinusOne => write!(f, "exp_minus_one"),
            YoungFunction::TLogAlpha(a) => write!(f, "t_log_alpha({a})"),
            YoungFunction::PowerLog { p, alpha } => write!(f, "power_log({p},{alpha})"),
        }
    }
}

impl YoungFunction {
    pub fn power(p: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!("power Young function needs 1 <= p < inf, got {p}")));
        }
        Ok(YoungFunction::Power(p))
    }

    pub fn t_log_alpha(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("t_log_alpha needs alpha >= 0, got {alpha}")));
        }
        Ok(YoungFunction::TLogAlpha(alpha))
    }

    pub fn power_log(p: f64, alpha: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() || !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("power_log needs p >= 1 and alpha >= 0, got ({p}, {alpha})")));
        }
        Ok(YoungFunction::PowerLog { p, alpha })
    }

    /// `(p, α)` for the power-log shaped members.
    fn power_log_params(&self) -> Option<(f64, f64)> {
        match *self {
            YoungFunction::Power(p) => Some((p, 0.0)),
            YoungFunction::TLogAlpha(a) => Some((1.0, a)),
            YoungFunction::PowerLog { p, alpha } => Some((p, alpha)),
            YoungFunction::ExpMinusOne => None,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match *self {
            YoungFunction::Power(p) => t.powf(p),
            YoungFunction::ExpMinusOne => t.exp_m1(),
            _ => {
                let (p, a) = self.power_log_params().unwrap();
                let lp = if t > 1.0 { 1.0 + t.ln() } else { 1.0 };
                t.powf(p) * lp.powf(a)
            }
        }
    }

    /// `ln A(e^x)`, finite for every finite `x`.
    pub fn ln_eval_exp(&self, x: f64) -> f64 {
        match *self {
            YoungFunction::ExpMinusOne => {
                let t = x.exp();
                if t > 30.0 {
                    t + (-(-t).exp()).ln_1p()
                } else {
                    t.exp_m1().ln()
                }
            }
            _ => {
                let (p, a) = self.power_log_params().unwrap();
                p * x + if x > 0.0 { a * x.ln_1p() } else { 0.0 }
            }
        }
    }

    /// `A⁻¹(u) = sup{t : A(t) ≤ u}`.
    pub fn inverse(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u.is_infinite() {
            return f64::INFINITY;
        }
        match *self {
            YoungFunction::Power(p) => u.powf(1.0 / p),
            YoungFunction::ExpMinusOne => u.ln_1p(),
            _ => {
                let (p, _) = self.power_log_params().unwrap();
                if u <= 1.0 {
                    // A(t) = t^p on [0, 1]
                    u.powf(1.0 / p)
                } else {
                    self.ln_inverse_exp(u.ln()).exp()
                }
            }
        }
    }

    /// `ln A⁻¹(e^s)`, solved in the log domain so that `s` may be huge.
    pub fn ln_inverse_exp(&self, s: f64) -> f64 {
        match *self {
            YoungFunction::Power(p) => s / p,
            YoungFunction::ExpMinusOne => {
                // A⁻¹(e^s) = ln(1 + e^s)
                let softplus = if s > 0.0 { s + (-s).exp().ln_1p() } else { s.exp().ln_1p() };
                softplus.ln()
            }
            _ => {
                let (p, a) = self.power_log_params().unwrap();
                if s <= 0.0 {
                    return s / p;
                }
                // p x + a ln(1 + x) = s on x ∈ [0, s / p]
                let hi = s / p;
                if hi == 0.0 {
                    return 0.0;
                }
                bisect_increasing(|x| p * x + a * x.ln_1p(), s, 0.0, hi)
            }
        }
    }

    /// Checks `A(0) = 0`, monotonicity and midpoint convexity on a log grid.
    pub fn validate(&self) -> Result<()> {
        if self.eval(0.0) != 0.0 {
            return Err(Error::InvalidParameter(format!("{self}: A(0) != 0")));
        }
        let grid: Vec<f64> = (0..=200).map(|i| 10f64.powf(-4.0 + 8.0 * i as f64 / 200.0)).collect();
        for w in grid.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (self.eval(a), self.eval(b));
            if fb < fa {
                return Err(Error::InvalidParameter(format!("{self}: not nondecreasing near {a}")));
            }
            let mid = self.eval(0.5 * (a + b));
            if mid > 0.5 * (fa + fb) * (1.0 + 1e-12) {
                return Err(Error::InvalidParameter(format!("{self}: midpoint convexity fails on [{a}, {b}]")));
            }
        }
        Ok(())
    }
}
