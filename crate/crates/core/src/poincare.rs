//! Discrete upper gradients on a connectivity graph, the `(X, Y)`-Poincaré
//! ratio, and empirical lower bounds for the Poincaré constant.
//!
//! On a graph every curve is an edge path. The max-slope gradient
//! `g(x) = max_{y ~ x} |f(x) − f(y)| / d(x, y)` satisfies
//! `|f(x) − f(y)| ≤ Σ max(g(a), g(b)) d(a, b)` along any path, which is the
//! discrete stand-in for the upper-gradient inequality.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::norms::{local_norm, RiSpace};
use crate::space::{Ball, MetricMeasureSpace};

/// Edges between points at distance at most `radius`.
#[derive(Debug, Clone)]
pub struct GraphStructure {
    radius: f64,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl GraphStructure {
    /// Builds the graph and rejects it unless it is connected.
    pub fn from_space(space: &MetricMeasureSpace, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!("connectivity radius must be positive, got {radius}")));
        }
        let n = space.len();
        let mut adjacency = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                let d = space.d(i, j);
                if i != j && d <= radius {
                    adjacency[i].push((j, d));
                }
            }
        }
        let graph = GraphStructure { radius, adjacency };
        let components = graph.components();
        if components > 1 {
            return Err(Error::Disconnected { components });
        }
        Ok(graph)
    }

    /// The smallest radius giving a connected graph (the longest edge of a
    /// minimum spanning tree).
    pub fn minimal_connected(space: &MetricMeasureSpace) -> Result<Self> {
        let n = space.len();
        if n == 0 {
            return Err(Error::InvalidSpace("empty space".into()));
        }
        if n == 1 {
            return Ok(GraphStructure { radius: 0.0, adjacency: vec![vec![]] });
        }
        let mut in_tree = vec![false; n];
        let mut best = vec![f64::INFINITY; n];
        best[0] = 0.0;
        let mut longest = 0.0f64;
        for _ in 0..n {
            let next = (0..n).filter(|&i| !in_tree[i]).min_by(|&a, &b| best[a].total_cmp(&best[b])).unwrap();
            in_tree[next] = true;
            longest = longest.max(best[next]);
            for j in 0..n {
                if !in_tree[j] {
                    best[j] = best[j].min(space.d(next, j));
                }
            }
        }
        Self::from_space(space, longest)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    fn components(&self) -> usize {
        let n = self.adjacency.len();
        let mut seen = vec![false; n];
        let mut count = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(i) = queue.pop_front() {
                for &(j, _) in &self.adjacency[i] {
                    if !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        count
    }
}

/// `g(x) = max_{y ~ x} |f(x) − f(y)| / d(x, y)`.
pub fn discrete_upper_gradient(graph: &GraphStructure, f: &[f64]) -> Result<Vec<f64>> {
    if f.len() != graph.len() {
        return Err(Error::InvalidParameter("function length does not match graph".into()));
    }
    Ok((0..graph.len())
        .map(|i| graph.neighbors(i).iter().map(|&(j, d)| (f[i] - f[j]).abs() / d).fold(0.0, f64::max))
        .collect())
}

/// Largest edge violation of `|f(x) − f(y)| ≤ max(g(x), g(y)) d(x, y)`;
/// nonpositive when `g` is a discrete upper gradient of `f`. Path
/// inequalities follow edge by edge.
pub fn upper_gradient_defect(graph: &GraphStructure, f: &[f64], g: &[f64]) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for i in 0..graph.len() {
        for &(j, d) in graph.neighbors(i) {
            worst = worst.max((f[i] - f[j]).abs() - g[i].max(g[j]) * d);
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoincareSpec {
    pub x: RiSpace,
    pub y: RiSpace,
    pub sigma: f64,
    pub constant: Option<f64>,
}

impl PoincareSpec {
    pub fn new(x: RiSpace, y: RiSpace, sigma: f64) -> Result<Self> {
        if !(sigma >= 1.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("dilation sigma must be >= 1, got {sigma}")));
        }
        Ok(PoincareSpec { x, y, sigma, constant: None })
    }

    pub fn with_constant(mut self, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("Poincaré constant must be positive, got {c}")));
        }
        self.constant = Some(c);
        Ok(self)
    }
}

/// `‖f − f_B‖_{X(B, μ_B)} / (r ‖g‖_{Y(σB, μ_{σB})})`, `0` when the numerator
/// vanishes and `+∞` when only the denominator does.
pub fn poincare_ratio(
    space: &MetricMeasureSpace,
    graph: &GraphStructure,
    f: &[f64],
    ball: &Ball,
    spec: &PoincareSpec,
) -> Result<f64> {
    let g = discrete_upper_gradient(graph, f)?;
    ratio_with_gradient(space, f, &g, ball, spec)
}

fn ratio_with_gradient(space: &MetricMeasureSpace, f: &[f64], g: &[f64], ball: &Ball, spec: &PoincareSpec) -> Result<f64> {
    if !(ball.radius > 0.0) {
        return Err(Error::InvalidParameter(format!("ball radius must be positive, got {}", ball.radius)));
    }
    let centered = subtract_mean(space, f, ball)?;
    let num = local_norm(space, &centered, ball, &spec.x)?;
    if num == 0.0 {
        return Ok(0.0);
    }
    let wide = ball.dilate(spec.sigma)?;
    let den = ball.radius * local_norm(space, g, &wide, &spec.y)?;
    Ok(if den == 0.0 { f64::INFINITY } else { num / den })
}

/// `f − f_B` with `f_B = μ(B)⁻¹ Σ_{x ∈ B} f(x) μ(x)`.
pub fn subtract_mean(space: &MetricMeasureSpace, f: &[f64], ball: &Ball) -> Result<Vec<f64>> {
    if f.len() != space.len() {
        return Err(Error::InvalidParameter("function length does not match space".into()));
    }
    let members = space.ball_members(ball)?;
    let w = space.weights();
    let mass: f64 = members.iter().map(|&i| w[i]).sum();
    if !(mass > 0.0) {
        return Err(Error::InvalidParameter("ball has zero measure".into()));
    }
    let mean = members.iter().map(|&i| f[i] * w[i]).sum::<f64>() / mass;
    Ok(f.iter().map(|&v| v - mean).collect())
}

/// Members of the test-function registry.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Constants,
    /// Ramps equal to 1 inside `inner · r` and 0 beyond `outer · r`.
    Cutoffs(Vec<(f64, f64)>),
    /// `d(x₀, ·)` for every `stride`-th point `x₀`.
    Distance { stride: usize },
    /// Random values clipped edge by edge to slope at most 1.
    RandomLipschitz { count: usize },
    /// Indicator of `B(c, r/2)` smoothed over widths `w · r`.
    IndicatorSmoothing(Vec<f64>),
}

impl FamilyKind {
    pub fn default_cutoffs() -> Self {
        let levels = [1.0, 0.75, 0.5, 0.25];
        let mut pairs = Vec::new();
        for (i, &outer) in levels.iter().enumerate() {
            for &inner in &levels[i + 1..] {
                pairs.push((outer, inner));
            }
        }
        FamilyKind::Cutoffs(pairs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestFamily {
    pub kinds: Vec<FamilyKind>,
    /// Multiply every member by the tent `max(0, 1 − d(c, ·)/r)`.
    pub zero_boundary: bool,
    pub seed: u64,
}

impl TestFamily {
    pub fn standard(seed: u64) -> Self {
        TestFamily {
            kinds: vec![
                FamilyKind::default_cutoffs(),
                FamilyKind::Distance { stride: 1 },
                FamilyKind::RandomLipschitz { count: 16 },
                FamilyKind::IndicatorSmoothing(vec![0.05, 0.1, 0.25, 0.5]),
            ],
            zero_boundary: false,
            seed,
        }
    }

    /// Test functions attached to `ball`. Random members depend only on the
    /// seed, never on the ball or on scheduling.
    pub fn generate(&self, space: &MetricMeasureSpace, graph: &GraphStructure, ball: &Ball) -> Vec<Vec<f64>> {
        let n = space.len();
        let dc: Vec<f64> = (0..n).map(|i| space.d(ball.center, i)).collect();
        let r = ball.radius;
        let mut out = Vec::new();
        for kind in &self.kinds {
            match kind {
                FamilyKind::Constants => out.push(vec![1.0; n]),
                FamilyKind::Cutoffs(pairs) => {
                    for &(outer, inner) in pairs {
                        out.push(ramp(&dc, inner * r, outer * r));
                    }
                }
                FamilyKind::Distance { stride } => {
                    for x0 in (0..n).step_by((*stride).max(1)) {
                        out.push((0..n).map(|i| space.d(x0, i)).collect());
                    }
                }
                FamilyKind::RandomLipschitz { count } => {
                    let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                    let scale = (0..n).map(|i| dc[i]).fold(0.0, f64::max).max(r);
                    for _ in 0..*count {
                        let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * scale).collect();
                        out.push(slope_clip(graph, raw, 1.0));
                    }
                }
                FamilyKind::IndicatorSmoothing(widths) => {
                    for &w in widths {
                        out.push(ramp(&dc, 0.5 * r, 0.5 * r + w * r));
                    }
                }
            }
        }
        if self.zero_boundary {
            for f in &mut out {
                for (v, &d) in f.iter_mut().zip(&dc) {
                    *v *= (1.0 - d / r).max(0.0);
                }
            }
        }
        out
    }
}

/// 1 on `d ≤ inner`, 0 on `d > outer`, linear in between.
fn ramp(dc: &[f64], inner: f64, outer: f64) -> Vec<f64> {
    dc.iter()
        .map(|&d| {
            if d <= inner {
                1.0
            } else if d > outer {
                0.0
            } else {
                (outer - d) / (outer - inner)
            }
        })
        .collect()
}

/// Lowers values until every edge slope is at most `lip`
/// (`f(x) ← min(f(x), f(y) + lip·d(x, y))` to a fixed point).
pub fn slope_clip(graph: &GraphStructure, mut f: Vec<f64>, lip: f64) -> Vec<f64> {
    loop {
        let mut changed = false;
        for i in 0..graph.len() {
            for &(j, d) in graph.neighbors(i) {
                let cap = f[j] + lip * d;
                if f[i] > cap {
                    f[i] = cap;
                    changed = true;
                }
            }
        }
        if !changed {
            return f;
        }
    }
}

/// Balls `B(c, ρ)` for every `stride`-th center and every radius.
pub fn ball_sweep(space: &MetricMeasureSpace, stride: usize, radii: &[f64]) -> Vec<Ball> {
    let mut balls = Vec::new();
    for c in (0..space.len()).step_by(stride.max(1)) {
        for &r in radii {
            if r > 0.0 {
                balls.push(Ball::open(c, r));
            }
        }
    }
    balls
}

#[derive(Debug, Clone, Serialize)]
pub struct PoincareEstimate {
    /// Empirical sup of the ratio; a lower bound for the true constant.
    pub constant: f64,
    pub ball_index: Option<usize>,
    pub function_index: Option<usize>,
    pub evaluations: usize,
    /// Per-ball maxima in sweep order.
    pub per_ball: Vec<f64>,
}

/// Sup of [`poincare_ratio`] over `family × balls`, computed in parallel and
/// reduced deterministically (largest value, ties to the lowest index).
pub fn estimate_poincare_constant(
    space: &MetricMeasureSpace,
    graph: &GraphStructure,
    spec: &PoincareSpec,
    family: &TestFamily,
    balls: &[Ball],
) -> Result<PoincareEstimate> {
    let per_ball: Vec<(f64, Option<usize>, usize)> = balls
        .par_iter()
        .map(|ball| -> Result<(f64, Option<usize>, usize)> {
            let fs = family.generate(space, graph, ball);
            let mut best = (0.0, None);
            for (k, f) in fs.iter().enumerate() {
                let v = poincare_ratio(space, graph, f, ball, spec)?;
                if v > best.0 {
                    best = (v, Some(k));
                }
            }
            Ok((best.0, best.1, fs.len()))
        })
        .collect::<Result<_>>()?;
    let mut constant = 0.0;
    let mut ball_index = None;
    let mut function_index = None;
    for (b, &(v, k, _)) in per_ball.iter().enumerate() {
        if v > constant {
            constant = v;
            ball_index = Some(b);
            function_index = k;
        }
    }
    Ok(PoincareEstimate {
        constant,
        ball_index,
        function_index,
        evaluations: per_ball.iter().map(|p| p.2).sum(),
        per_ball: per_ball.iter().map(|p| p.0).collect(),
    })
}

/// `‖f − f_B‖` in `L^q(B, μ_B)` computed through the localized
/// rearrangement and directly as `(μ(B)⁻¹ Σ_B |f − f_B|^q μ)^{1/q}`.
pub fn classical_equivalence_check(space: &MetricMeasureSpace, f: &[f64], ball: &Ball, q: f64) -> Result<(f64, f64)> {
    let x = RiSpace::lp(q)?;
    let centered = subtract_mean(space, f, ball)?;
    let rearranged = local_norm(space, &centered, ball, &x)?;
    let members = space.ball_members(ball)?;
    let w = space.weights();
    let mass: f64 = members.iter().map(|&i| w[i]).sum();
    let direct = if q.is_infinite() {
        members.iter().map(|&i| centered[i].abs()).fold(0.0, f64::max)
    } else {
        (members.iter().map(|&i| centered[i].abs().powf(q) * w[i]).sum::<f64>() / mass).powf(1.0 / q)
    };
    Ok((rearranged, direct))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::WeightExpr;

    fn path(n: usize) -> (MetricMeasureSpace, GraphStructure) {
        let s = MetricMeasureSpace::line_grid(0.0, 1.0, n, &WeightExpr::Uniform).unwrap();
        let g = GraphStructure::minimal_connected(&s).unwrap();
        (s, g)
    }

    #[test]
    fn minimal_graph_is_a_path() {
        let (_, g) = path(11);
        assert!((g.radius() - 0.1).abs() < 1e-12);
        assert_eq!(g.edge_count(), 10);
    }

    #[test]
    fn disconnected_graph_is_rejected() {
        let s = MetricMeasureSpace::from_points(&[vec![0.0], vec![1.0], vec![5.0]], vec![1.0; 3]).unwrap();
        assert_eq!(GraphStructure::from_space(&s, 1.5).unwrap_err(), Error::Disconnected { components: 2 });
    }

    #[test]
    fn gradient_of_constant_and_distance() {
        let (s, g) = path(21);
        assert!(discrete_upper_gradient(&g, &[3.0; 21]).unwrap().iter().all(|&v| v == 0.0));
        let f: Vec<f64> = (0..21).map(|i| s.d(4, i)).collect();
        let grad = discrete_upper_gradient(&g, &f).unwrap();
        assert!(grad.iter().all(|&v| v <= 1.0 + 1e-12));
        assert!(upper_gradient_defect(&g, &f, &grad) <= 1e-15);
    }

    #[test]
    fn ratio_matches_hand_computation() {
        let (s, g) = path(11);
        let f: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
        let ball = Ball::open(5, 0.6);
        let spec = PoincareSpec::new(RiSpace::Lp(1.0), RiSpace::Lp(1.0), 1.0).unwrap();
        // B is every point; mean 1/2, mean |f − 1/2| = 0.3 / 1.1 · ... computed by hand
        let dev: f64 = (0..11).map(|i| (i as f64 / 10.0 - 0.5).abs()).sum::<f64>() / 11.0;
        let grad = 1.0; // every point has a neighbor at slope 1
        let oracle = dev / (0.6 * grad);
        let v = poincare_ratio(&s, &g, &f, &ball, &spec).unwrap();
        assert!((v - oracle).abs() < 1e-14, "{v} vs {oracle}");
        let scaled: Vec<f64> = f.iter().map(|x| -3.0 * x + 7.0).collect();
        assert!((poincare_ratio(&s, &g, &scaled, &ball, &spec).unwrap() - v).abs() < 1e-13);
        assert_eq!(poincare_ratio(&s, &g, &[2.0; 11], &ball, &spec).unwrap(), 0.0);
    }

    #[test]
    fn zero_denominator_is_infinite() {
        // two clusters joined by one long edge; f jumps across it
        let pts: Vec<Vec<f64>> = vec![vec![0.0], vec![0.1], vec![1.0], vec![1.1]];
        let s = MetricMeasureSpace::from_points(&pts, vec![1.0; 4]).unwrap();
        let g = GraphStructure::minimal_connected(&s).unwrap();
        let f = vec![0.0, 0.0, 1.0, 1.0];
        let grad = discrete_upper_gradient(&g, &f).unwrap();
        assert!(grad[1] > 0.0 && grad[0] == 0.0);
        let spec = PoincareSpec::new(RiSpace::Lp(1.0), RiSpace::Lp(1.0), 1.0).unwrap();
        // gradient is supported on points 1 and 2 only; a ball that misses them sees no gradient
        let v = ratio_with_gradient(&s, &f, &[0.0, 0.0, 0.0, 0.0], &Ball::open(0, 2.0), &spec).unwrap();
        assert!(v.is_infinite());
    }

    #[test]
    fn sigma_must_be_at_least_one() {
        assert!(PoincareSpec::new(RiSpace::Lp(1.0), RiSpace::Lp(1.0), 0.5).is_err());
        assert!(PoincareSpec::new(RiSpace::Lp(1.0), RiSpace::Lp(1.0), 1.0).unwrap().with_constant(0.0).is_err());
    }

    #[test]
    fn slope_clip_is_lipschitz() {
        let (s, g) = path(30);
        let fam = TestFamily { kinds: vec![FamilyKind::RandomLipschitz { count: 5 }], zero_boundary: false, seed: 9 };
        for f in fam.generate(&s, &g, &Ball::open(0, 0.5)) {
            let grad = discrete_upper_gradient(&g, &f).unwrap();
            assert!(grad.iter().all(|&v| v <= 1.0 + 1e-12));
        }
    }

    #[test]
    fn zero_boundary_vanishes_outside() {
        let (s, g) = path(21);
        let mut fam = TestFamily::standard(1);
        fam.zero_boundary = true;
        let ball = Ball::open(10, 0.3);
        for f in fam.generate(&s, &g, &ball) {
            for i in 0..21 {
                if s.d(10, i) >= 0.3 {
                    assert_eq!(f[i], 0.0);
                }
            }
        }
    }
}
