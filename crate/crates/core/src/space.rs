//! Finite metric measure spaces, balls and doubling constants.
//!
//! A [`MetricMeasureSpace`] is a finite point set carrying a symmetric
//! distance matrix and strictly positive point masses. Balls follow the open
//! convention `d(x, y) < r` unless built with [`Closure::Closed`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack allowed in the triangle-inequality check.
const TRIANGLE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Closure {
    #[default]
    Open,
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
    #[serde(default)]
    pub closure: Closure,
}

impl Ball {
    pub fn open(center: usize, radius: f64) -> Self {
        Ball { center, radius, closure: Closure::Open }
    }

    pub fn closed(center: usize, radius: f64) -> Self {
        Ball { center, radius, closure: Closure::Closed }
    }

    /// `σB`: same center and closure, radius scaled by `sigma ≥ 1`.
    pub fn dilate(&self, sigma: f64) -> Result<Ball> {
        if !(sigma >= 1.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("dilation factor must be >= 1, got {sigma}")));
        }
        Ok(Ball { radius: self.radius * sigma, ..*self })
    }

    #[inline]
    pub fn contains_distance(&self, d: f64) -> bool {
        match self.closure {
            Closure::Open => d < self.radius,
            Closure::Closed => d <= self.radius,
        }
    }
}

/// A finite metric space `(Ω, d)` with a point-mass measure `μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricMeasureSpace {
    n: usize,
    dist: Vec<f64>,
    weight: Vec<f64>,
    /// Optional 1-D coordinates for generated grids (used only for weight
    /// expressions and reporting).
    coords: Option<Vec<f64>>,
}

impl MetricMeasureSpace {
    /// Builds a space from a full distance matrix, validating every metric
    /// axiom including the triangle inequality (O(n³)).
    pub fn new(dist: Vec<Vec<f64>>, weight: Vec<f64>) -> Result<Self> {
        let n = weight.len();
        if n == 0 {
            return Err(Error::InvalidSpace("space has no points".into()));
        }
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidSpace(format!("distance matrix must be {n}x{n}")));
        }
        let flat: Vec<f64> = dist.into_iter().flatten().collect();
        let space = MetricMeasureSpace { n, dist: flat, weight, coords: None };
        space.check_weights()?;
        space.check_metric()?;
        Ok(space)
    }

    /// Euclidean distances between points in `R^k`; validated like [`Self::new`].
    pub fn from_points(points: &[Vec<f64>], weight: Vec<f64>) -> Result<Self> {
        let n = points.len();
        let mut dist = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = points[i]
                    .iter()
                    .zip(&points[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                dist[i][j] = d;
                dist[j][i] = d;
            }
        }
        Self::new(dist, weight)
    }

    /// Equally spaced points on `[start, end]` with `|x - y|` as distance.
    ///
    /// The metric axioms hold by construction, so the cubic check is skipped.
    pub fn line_grid(start: f64, end: f64, count: usize, weight: &WeightExpr) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidSpace("line grid needs at least one point".into()));
        }
        if !(start.is_finite() && end.is_finite()) || (count > 1 && !(end > start)) {
            return Err(Error::InvalidSpace(format!("invalid grid endpoints [{start}, {end}]")));
        }
        let step = if count == 1 { 0.0 } else { (end - start) / (count - 1) as f64 };
        let xs: Vec<f64> = (0..count).map(|i| start + step * i as f64).collect();
        // |i - j| h rather than |x_i - x_j|: keeps d(x, z) = 2 d(x, y) exact
        // whenever the index gaps double, so ball counts have no rounding ties
        let mut dist = vec![0.0; count * count];
        for i in 0..count {
            for j in 0..count {
                dist[i * count + j] = i.abs_diff(j) as f64 * step;
            }
        }
        let weight: Vec<f64> = xs.iter().map(|&x| weight.eval(x)).collect();
        let space = MetricMeasureSpace { n: count, dist, weight, coords: Some(xs) };
        space.check_weights()?;
        Ok(space)
    }

    fn check_weights(&self) -> Result<()> {
        for (i, &w) in self.weight.iter().enumerate() {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidSpace(format!("weight[{i}] = {w} is not positive and finite")));
            }
        }
        Ok(())
    }

    fn check_metric(&self) -> Result<()> {
        let n = self.n;
        let mut scale = 0.0f64;
        for i in 0..n {
            if self.d(i, i) != 0.0 {
                return Err(Error::InvalidSpace(format!("dist[{i}][{i}] must be 0")));
            }
            for j in 0..n {
                let d = self.d(i, j);
                if !(d >= 0.0) || !d.is_finite() {
                    return Err(Error::InvalidSpace(format!("dist[{i}][{j}] = {d} is not a nonnegative real")));
                }
                if d != self.d(j, i) {
                    return Err(Error::InvalidSpace(format!("distance matrix not symmetric at ({i}, {j})")));
                }
                if i != j && d == 0.0 {
                    return Err(Error::InvalidSpace(format!("distinct points {i} and {j} at distance 0")));
                }
                scale = scale.max(d);
            }
        }
        let slack = TRIANGLE_SLACK * scale;
        for i in 0..n {
            for j in 0..n {
                let dij = self.d(i, j);
                for k in 0..n {
                    if self.d(i, k) > dij + self.d(j, k) + slack {
                        return Err(Error::InvalidSpace(format!("triangle inequality fails for ({i}, {j}, {k})")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    pub fn coords(&self) -> Option<&[f64]> {
        self.coords.as_deref()
    }

    pub fn total_mass(&self) -> f64 {
        self.weight.iter().sum()
    }

    /// Returns a copy with weights scaled to total mass 1.
    pub fn normalized(&self) -> Self {
        let total = self.total_mass();
        MetricMeasureSpace {
            weight: self.weight.iter().map(|w| w / total).collect(),
            ..self.clone()
        }
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.n {
            Err(Error::IndexOutOfRange { index, n: self.n })
        } else {
            Ok(())
        }
    }

    fn check_ball(&self, ball: &Ball) -> Result<()> {
        self.check_index(ball.center)?;
        if !(ball.radius > 0.0) {
            return Err(Error::InvalidParameter(format!("ball radius must be positive, got {}", ball.radius)));
        }
        Ok(())
    }

    /// Indices of the points inside `ball`, in increasing order.
    pub fn ball_members(&self, ball: &Ball) -> Result<Vec<usize>> {
        self.check_ball(ball)?;
        Ok((0..self.n).filter(|&y| ball.contains_distance(self.d(ball.center, y))).collect())
    }

    /// Membership mask for `ball`.
    pub fn ball_mask(&self, ball: &Ball) -> Result<Vec<bool>> {
        self.check_ball(ball)?;
        Ok((0..self.n).map(|y| ball.contains_distance(self.d(ball.center, y))).collect())
    }

    pub fn measure_of(&self, ball: &Ball) -> Result<f64> {
        Ok(self.ball_members(ball)?.into_iter().map(|i| self.weight[i]).sum())
    }

    /// Measure of an arbitrary index set.
    pub fn measure_of_set(&self, set: &[usize]) -> Result<f64> {
        let mut total = 0.0;
        for &i in set {
            self.check_index(i)?;
            total += self.weight[i];
        }
        Ok(total)
    }

    /// All distinct positive distances, their halves, midpoints between
    /// consecutive values, and one radius beyond the diameter.
    ///
    /// Open-ball measures `μ(B(x, r))` and `μ(B(x, 2r))` are constant on each
    /// interval between consecutive critical values, so this set realises
    /// every value of the doubling ratio.
    pub fn canonical_radii(&self) -> Vec<f64> {
        let mut crit: Vec<f64> = Vec::with_capacity(self.n * self.n);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let d = self.d(i, j);
                crit.push(d);
                crit.push(0.5 * d);
            }
        }
        crit.sort_by(|a, b| a.total_cmp(b));
        crit.dedup();
        let mut radii = Vec::with_capacity(2 * crit.len() + 2);
        let mut prev = 0.0;
        for &c in &crit {
            radii.push(0.5 * (prev + c));
            radii.push(c);
            prev = c;
        }
        radii.push(if prev > 0.0 { 2.0 * prev } else { 1.0 });
        radii.dedup();
        radii.retain(|&r| r > 0.0);
        radii
    }

    /// `sup μ(B(x, 2r)) / μ(B(x, r))` over all centers and the given radii,
    /// open balls.
    pub fn doubling_constant(&self, radii: &[f64]) -> Result<f64> {
        Ok(self.doubling_sweep(radii)?.iter().map(|c| c.ratio).fold(1.0, f64::max))
    }

    /// Doubling constant over [`Self::canonical_radii`].
    pub fn doubling_constant_exhaustive(&self) -> f64 {
        // canonical radii are never empty
        self.doubling_constant(&self.canonical_radii()).unwrap_or(1.0)
    }

    /// Per-center maximum of the doubling ratio and the radius attaining it.
    pub fn doubling_sweep(&self, radii: &[f64]) -> Result<Vec<CenterDoubling>> {
        if radii.is_empty() {
            return Err(Error::EmptyRadii);
        }
        if let Some(&r) = radii.iter().find(|&&r| !(r > 0.0)) {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
        }
        Ok((0..self.n)
            .into_par_iter()
            .map(|x| {
                let profile = self.radial_profile(x);
                let mut best = CenterDoubling { center: x, radius: radii[0], ratio: 1.0 };
                for &r in radii {
                    let inner = profile.open_mass(r);
                    let outer = profile.open_mass(2.0 * r);
                    let ratio = outer / inner;
                    if ratio > best.ratio {
                        best = CenterDoubling { center: x, radius: r, ratio };
                    }
                }
                best
            })
            .collect())
    }

    /// Sorted distances from `center` with cumulative masses.
    pub fn radial_profile(&self, center: usize) -> RadialProfile {
        let mut pts: Vec<(f64, f64)> = (0..self.n).map(|y| (self.d(center, y), self.weight[y])).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut cum = Vec::with_capacity(self.n);
        let mut acc = 0.0;
        for &(_, w) in &pts {
            acc += w;
            cum.push(acc);
        }
        RadialProfile { dists: pts.into_iter().map(|p| p.0).collect(), cum }
    }
}

/// Ball measures around a fixed center as functions of the radius.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    dists: Vec<f64>,
    cum: Vec<f64>,
}

impl RadialProfile {
    /// `μ{y : d(x, y) < r}`.
    pub fn open_mass(&self, r: f64) -> f64 {
        let k = self.dists.partition_point(|&d| d < r);
        if k == 0 {
            0.0
        } else {
            self.cum[k - 1]
        }
    }

    /// `μ{y : d(x, y) ≤ r}`.
    pub fn closed_mass(&self, r: f64) -> f64 {
        let k = self.dists.partition_point(|&d| d <= r);
        if k == 0 {
            0.0
        } else {
            self.cum[k - 1]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CenterDoubling {
    pub center: usize,
    pub radius: f64,
    pub ratio: f64,
}

/// Whitelisted point-weight expressions for generated grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WeightExpr {
    Uniform,
    Exp,
    Pow(f64),
}

impl WeightExpr {
    /// Parses `uniform`, `exp(x)` or `pow(x,a)`.
    pub fn parse(text: &str) -> Result<Self> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        match compact.as_str() {
            "uniform" => Ok(WeightExpr::Uniform),
            "exp(x)" => Ok(WeightExpr::Exp),
            s if s.starts_with("pow(x,") && s.ends_with(')') => {
                let a = &s["pow(x,".len()..s.len() - 1];
                a.parse::<f64>()
                    .map(WeightExpr::Pow)
                    .map_err(|_| Error::InvalidParameter(format!("bad exponent in weight expression `{text}`")))
            }
            _ => Err(Error::UnknownIdentifier(text.to_string())),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            WeightExpr::Uniform => 1.0,
            WeightExpr::Exp => x.exp(),
            WeightExpr::Pow(a) => x.powf(a),
        }
    }
}
