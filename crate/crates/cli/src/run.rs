//! Subcommand pipelines.

use std::path::PathBuf;

use ripd_core::certificate::{certificate_sweep, CertificateConfig};
use ripd_core::gain::{ermakoff_test, index_gap_doubling_criterion, zippin_indices, GainFunction, ZippinResolution, ERMAKOFF_K_MAX};
use ripd_core::poincare::{ball_sweep, estimate_poincare_constant, GraphStructure, PoincareSpec, TestFamily};
use ripd_core::{decreasing_rearrangement, local_norm, localized_rearrangement, Ball, MetricMeasureSpace};
use serde_json::{json, Value};

use crate::config::{key_err, RunConfig};
use crate::output::{emit_csv, emit_json, Cell};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Subcommand {
    Norm,
    Rearrange,
    Indices,
    Ermakoff,
    Doubling,
    Poincare,
    Certify,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Norm => "norm",
            Subcommand::Rearrange => "rearrange",
            Subcommand::Indices => "indices",
            Subcommand::Ermakoff => "ermakoff",
            Subcommand::Doubling => "doubling",
            Subcommand::Poincare => "poincare",
            Subcommand::Certify => "certify",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub grid_scale: usize,
}

/// Result of one subcommand before it is written out.
pub struct Artifacts {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Value,
}

pub fn run(sub: Subcommand, cfg: &RunConfig, opts: &RunOptions) -> Result<Artifacts, CliError> {
    let seed = opts.seed.or(cfg.seed).unwrap_or(0);
    let scale = opts.grid_scale.max(1);
    let mut art = match sub {
        Subcommand::Norm => norm(cfg)?,
        Subcommand::Rearrange => rearrange(cfg)?,
        Subcommand::Indices => indices(cfg, scale)?,
        Subcommand::Ermakoff => ermakoff(cfg)?,
        Subcommand::Doubling => doubling(cfg)?,
        Subcommand::Poincare => poincare(cfg, seed)?,
        Subcommand::Certify => certify(cfg, seed)?,
    };
    if let Value::Object(map) = &mut art.summary {
        map.insert("subcommand".into(), json!(sub.name()));
        map.insert("seed".into(), json!(seed));
        map.insert("grid_scale".into(), json!(scale));
    }
    Ok(art)
}

/// Runs and writes `<out>/<sub>.csv` and `<out>/<sub>_summary.json`.
pub fn run_to_dir(sub: Subcommand, cfg: &RunConfig, opts: &RunOptions) -> Result<(PathBuf, PathBuf), CliError> {
    let art = run(sub, cfg, opts)?;
    std::fs::create_dir_all(&opts.out).map_err(|e| CliError::Io(format!("{}: {e}", opts.out.display())))?;
    let csv = opts.out.join(format!("{}.csv", sub.name()));
    let js = opts.out.join(format!("{}_summary.json", sub.name()));
    emit_csv(&csv, &art.header, &art.rows)?;
    emit_json(&js, &art.summary)?;
    Ok((csv, js))
}

fn core(key: &str) -> impl Fn(ripd_core::Error) -> CliError + '_ {
    move |e| key_err(key, e)
}

fn norm(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let space = cfg.build_space()?;
    let x = cfg.x_space()?;
    let f = cfg.function(space.len())?;
    let ball = cfg.ball();
    let value = match &ball {
        Some(b) => local_norm(&space, &f, b, &x).map_err(core("ball"))?,
        None => x.norm(&decreasing_rearrangement(&space, &f, None).map_err(core("f"))?).map_err(core("x"))?,
    };
    Ok(Artifacts {
        header: vec!["spec", "norm"],
        rows: vec![vec![x.to_string().into(), value.into()]],
        summary: json!({
            "spec": x.to_string(),
            "norm": value,
            "ball": ball.map(|b| json!({"center": b.center, "radius": b.radius})),
            "points": space.len(),
        }),
    })
}

fn rearrange(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let space = cfg.build_space()?;
    let f = cfg.function(space.len())?;
    let u = match cfg.ball() {
        Some(b) => localized_rearrangement(&space, &f, &b).map_err(core("ball"))?,
        None => decreasing_rearrangement(&space, &f, None).map_err(core("f"))?,
    };
    let rows = u.csv_rows().iter().map(|r| vec![r[0].into(), r[1].into()]).collect();
    Ok(Artifacts {
        header: vec!["s", "value"],
        rows,
        summary: json!({
            "domain_end": u.domain_end(),
            "support_end": u.support_end(),
            "integral": u.integral(),
            "steps": u.values().len(),
            "localized": cfg.ball.is_some(),
        }),
    })
}

fn resolution(cfg: &RunConfig, scale: usize) -> ZippinResolution {
    let d = ZippinResolution::default();
    let r = ZippinResolution {
        depth: cfg.indices.depth.unwrap_or(d.depth),
        points: cfg.indices.points.unwrap_or(d.points),
        s_count: cfg.indices.s_count.unwrap_or(d.s_count),
        slack: cfg.indices.slack.unwrap_or(d.slack),
    };
    r.scaled(scale)
}

fn indices(cfg: &RunConfig, scale: usize) -> Result<Artifacts, CliError> {
    let x = cfg.x_space()?;
    let res = resolution(cfg, scale);
    if !(res.depth > 0.0) || res.points < 2 || res.s_count < 2 {
        return Err(CliError::Config("key `indices`: depth > 0, points >= 2 and s_count >= 2 required".into()));
    }
    let z = zippin_indices(&x, &res).map_err(core("x"))?;
    let rows = z.dilations.iter().map(|&(s, m)| vec![s.into(), m.into()]).collect();
    let mut summary = json!({
        "spec": x.to_string(),
        "lower": z.lower,
        "upper": z.upper,
        "ordered": z.ordered,
        "sandwich": z.sandwich,
        "resolution": res,
    });
    if cfg.y.is_some() {
        let y = cfg.y_space()?;
        let gap = index_gap_doubling_criterion(&x, &y, &res).map_err(core("y"))?;
        summary["index_gap"] = serde_json::to_value(&gap).map_err(|e| CliError::Internal(e.to_string()))?;
    }
    Ok(Artifacts { header: vec!["s", "M_s"], rows, summary })
}

fn ermakoff(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let g = cfg.gain_function()?;
    let k = cfg.ermakoff.k_max.unwrap_or(ERMAKOFF_K_MAX);
    let r = ermakoff_test(&g, k).map_err(core("gain"))?;
    let rows = r.trace.iter().map(|&(t, rho)| vec![t.into(), rho.into()]).collect();
    Ok(Artifacts {
        header: vec!["t", "ratio"],
        rows,
        summary: json!({
            "gain": r.gain,
            "verdict": r.verdict,
            "estimated_limit": r.estimated_limit,
            "grid": {"t": "2^k", "k_min": 0, "k_max": r.k_max},
            "pass_threshold": r.pass_threshold,
            "fail_threshold": r.fail_threshold,
        }),
    })
}

fn doubling(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let space = cfg.build_space()?;
    let radii = cfg.radii(&space)?;
    let sweep = space.doubling_sweep(&radii).map_err(core("sweep.radii"))?;
    let constant = sweep.iter().map(|c| c.ratio).fold(1.0, f64::max);
    let rows = sweep.iter().map(|c| vec![c.center.into(), c.radius.into(), c.ratio.into()]).collect();
    Ok(Artifacts {
        header: vec!["center", "radius", "ratio"],
        rows,
        summary: json!({
            "doubling_constant": constant,
            "points": space.len(),
            "radii": radii.len(),
            "radii_source": if cfg.sweep.radii.is_some() { "config" } else { "canonical" },
        }),
    })
}

fn balls(cfg: &RunConfig, space: &MetricMeasureSpace) -> Result<Vec<Ball>, CliError> {
    if let Some(b) = cfg.ball() {
        return Ok(vec![b]);
    }
    let radii = cfg.radii(space)?;
    Ok(ball_sweep(space, cfg.sweep.center_stride.unwrap_or(1), &radii))
}

struct PoincareRun {
    spec: PoincareSpec,
    estimate: ripd_core::poincare::PoincareEstimate,
    family: TestFamily,
    graph_radius: f64,
}

fn estimate(cfg: &RunConfig, space: &MetricMeasureSpace, sweep: &[Ball], seed: u64) -> Result<PoincareRun, CliError> {
    let graph = GraphStructure::minimal_connected(space).map_err(core("space"))?;
    let spec = PoincareSpec::new(cfg.x_space()?, cfg.y_space()?, cfg.poincare.sigma.unwrap_or(1.0))
        .map_err(core("poincare.sigma"))?;
    let family = TestFamily { kinds: cfg.family_kinds()?, zero_boundary: cfg.poincare.zero_boundary, seed };
    let estimate = estimate_poincare_constant(space, &graph, &spec, &family, sweep).map_err(core("poincare"))?;
    Ok(PoincareRun { spec, estimate, family, graph_radius: graph.radius() })
}

fn poincare(cfg: &RunConfig, seed: u64) -> Result<Artifacts, CliError> {
    let space = cfg.build_space()?;
    let sweep = balls(cfg, &space)?;
    let p = estimate(cfg, &space, &sweep, seed)?;
    let rows = sweep
        .iter()
        .zip(&p.estimate.per_ball)
        .map(|(b, &v)| vec![b.center.into(), b.radius.into(), v.into()])
        .collect();
    Ok(Artifacts {
        header: vec!["center", "radius", "max_ratio"],
        rows,
        summary: json!({
            "x": p.spec.x.to_string(),
            "y": p.spec.y.to_string(),
            "sigma": p.spec.sigma,
            "constant_lower_bound": p.estimate.constant,
            "argmax_ball": p.estimate.ball_index.map(|i| json!({"center": sweep[i].center, "radius": sweep[i].radius})),
            "argmax_function": p.estimate.function_index,
            "evaluations": p.estimate.evaluations,
            "balls": sweep.len(),
            "family": p.family,
            "graph_radius": p.graph_radius,
        }),
    })
}

fn certify(cfg: &RunConfig, seed: u64) -> Result<Artifacts, CliError> {
    let space = cfg.build_space()?;
    let x = cfg.x_space()?;
    let y = cfg.y_space()?;
    let sweep = balls(cfg, &space)?;
    let gain = match &cfg.gain {
        Some(_) => cfg.gain_function()?,
        None => GainFunction::psi_of(x.clone(), y.clone()).map_err(core("gain"))?,
    };
    let safety = cfg.certify.safety.unwrap_or(2.0);
    let (c, source) = match cfg.certify.constant {
        Some(c) => (c, json!("config")),
        None => {
            let p = estimate(cfg, &space, &sweep, seed)?;
            (p.estimate.constant * safety, json!({"estimated": p.estimate.constant, "safety": safety}))
        }
    };
    let j_max = cfg.certify.j_max.unwrap_or(20);
    let ccfg = CertificateConfig::new(gain.clone(), c, j_max).map_err(core("certify"))?;
    let report = certificate_sweep(&space, &x, &y, &ccfg, &sweep).map_err(core("certify"))?;
    let rows = report
        .balls
        .iter()
        .flat_map(|b| b.csv_rows())
        .map(|r| vec![(r[0] as usize).into(), r[1].into(), (r[2] as usize).into(), r[3].into(), r[4].into(), r[5].into(), r[6].into()])
        .collect();
    let mut verdicts = std::collections::BTreeMap::<String, usize>::new();
    for b in &report.balls {
        *verdicts.entry(b.verdict.to_string()).or_default() += 1;
    }
    Ok(Artifacts {
        header: vec!["center", "r", "j", "r_j", "mu_Bj", "P_j", "slack"],
        rows,
        summary: json!({
            "x": x.to_string(),
            "y": y.to_string(),
            "gain": gain.name(),
            "c": c,
            "c_source": source,
            "c1": report.c1,
            "C": report.big_c,
            "ln_D": report.ln_d,
            "j_max": j_max,
            "key_inequality_violations": report.violations(),
            "ball_verdicts": verdicts,
            "doubling": report.doubling,
        }),
    })
}

