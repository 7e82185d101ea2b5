//! TOML run configuration.

use std::path::Path;

use ripd_core::gain::GainFunction;
use ripd_core::poincare::FamilyKind;
use ripd_core::syntax::{parse_gain, parse_space};
use ripd_core::{Ball, MetricMeasureSpace, RiSpace, WeightExpr};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub space: Option<SpaceStanza>,
    pub x: Option<String>,
    pub y: Option<String>,
    pub gain: Option<String>,
    /// Point values of the function for `norm` and `rearrange`.
    pub f: Option<Vec<f64>>,
    pub ball: Option<BallStanza>,
    #[serde(default)]
    pub sweep: SweepStanza,
    #[serde(default)]
    pub indices: IndicesStanza,
    #[serde(default)]
    pub ermakoff: ErmakoffStanza,
    #[serde(default)]
    pub poincare: PoincareStanza,
    #[serde(default)]
    pub certify: CertifyStanza,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceStanza {
    pub dist: Option<Vec<Vec<f64>>>,
    pub points: Option<Vec<Vec<f64>>>,
    pub weight: Option<Vec<f64>>,
    pub line_grid: Option<LineGrid>,
    #[serde(default)]
    pub normalize: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineGrid {
    pub start: f64,
    pub end: f64,
    pub count: usize,
    #[serde(default = "uniform")]
    pub weight: String,
}

fn uniform() -> String {
    "uniform".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallStanza {
    pub center: usize,
    pub radius: f64,
    #[serde(default)]
    pub closed: bool,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepStanza {
    /// Radii for ball sweeps; canonical radii of the space when absent.
    pub radii: Option<Vec<f64>>,
    pub center_stride: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndicesStanza {
    pub depth: Option<f64>,
    pub points: Option<usize>,
    pub s_count: Option<usize>,
    pub slack: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErmakoffStanza {
    pub k_max: Option<u32>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoincareStanza {
    pub sigma: Option<f64>,
    /// Names from `cutoffs`, `distance`, `random_lipschitz`,
    /// `indicator_smoothing`, `constants`.
    pub family: Option<Vec<String>>,
    pub random_count: Option<usize>,
    #[serde(default)]
    pub zero_boundary: bool,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyStanza {
    /// Poincaré constant hypothesis; estimated when absent.
    pub constant: Option<f64>,
    pub safety: Option<f64>,
    pub j_max: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string().trim_end().to_string()))
    }

    pub fn build_space(&self) -> Result<MetricMeasureSpace, CliError> {
        let s = self.space.as_ref().ok_or_else(|| missing("space"))?;
        let space = match (&s.line_grid, &s.dist, &s.points) {
            (Some(g), None, None) => {
                let w = WeightExpr::parse(&g.weight).map_err(|e| key_err("space.line_grid.weight", e))?;
                MetricMeasureSpace::line_grid(g.start, g.end, g.count, &w).map_err(|e| key_err("space.line_grid", e))?
            }
            (None, Some(d), None) => {
                let w = s.weight.clone().ok_or_else(|| missing("space.weight"))?;
                MetricMeasureSpace::new(d.clone(), w).map_err(|e| key_err("space.dist", e))?
            }
            (None, None, Some(p)) => {
                let w = s.weight.clone().unwrap_or_else(|| vec![1.0; p.len()]);
                MetricMeasureSpace::from_points(p, w).map_err(|e| key_err("space.points", e))?
            }
            _ => {
                return Err(CliError::Config(
                    "key `space`: give exactly one of `line_grid`, `dist`, `points`".into(),
                ))
            }
        };
        Ok(if s.normalize { space.normalized() } else { space })
    }

    pub fn x_space(&self) -> Result<RiSpace, CliError> {
        spec("x", self.x.as_deref())
    }

    pub fn y_space(&self) -> Result<RiSpace, CliError> {
        spec("y", self.y.as_deref())
    }

    pub fn gain_function(&self) -> Result<GainFunction, CliError> {
        let text = self.gain.as_deref().ok_or_else(|| missing("gain"))?;
        parse_gain(text).map_err(|e| key_err("gain", e))
    }

    pub fn function(&self, n: usize) -> Result<Vec<f64>, CliError> {
        let f = self.f.clone().ok_or_else(|| missing("f"))?;
        if f.len() != n {
            return Err(CliError::Config(format!("key `f`: expected {n} values, got {}", f.len())));
        }
        Ok(f)
    }

    pub fn ball(&self) -> Option<Ball> {
        self.ball.as_ref().map(|b| if b.closed { Ball::closed(b.center, b.radius) } else { Ball::open(b.center, b.radius) })
    }

    pub fn radii(&self, space: &MetricMeasureSpace) -> Result<Vec<f64>, CliError> {
        match &self.sweep.radii {
            Some(r) if r.is_empty() => Err(CliError::Config("key `sweep.radii`: empty list".into())),
            Some(r) if r.iter().any(|&v| !(v > 0.0)) => {
                Err(CliError::Config("key `sweep.radii`: radii must be positive".into()))
            }
            Some(r) => Ok(r.clone()),
            None => Ok(space.canonical_radii()),
        }
    }

    pub fn family_kinds(&self) -> Result<Vec<FamilyKind>, CliError> {
        let names = self.poincare.family.clone().unwrap_or_else(|| {
            ["cutoffs", "distance", "random_lipschitz", "indicator_smoothing"].iter().map(|s| s.to_string()).collect()
        });
        names
            .iter()
            .map(|n| match n.as_str() {
                "constants" => Ok(FamilyKind::Constants),
                "cutoffs" => Ok(FamilyKind::default_cutoffs()),
                "distance" => Ok(FamilyKind::Distance { stride: 1 }),
                "random_lipschitz" => Ok(FamilyKind::RandomLipschitz { count: self.poincare.random_count.unwrap_or(16) }),
                "indicator_smoothing" => Ok(FamilyKind::IndicatorSmoothing(vec![0.05, 0.1, 0.25, 0.5])),
                other => Err(CliError::Config(format!("key `poincare.family`: unknown identifier `{other}`"))),
            })
            .collect()
    }
}

fn spec(key: &str, text: Option<&str>) -> Result<RiSpace, CliError> {
    let text = text.ok_or_else(|| missing(key))?;
    parse_space(text).map_err(|e| key_err(key, e))
}

pub fn missing(key: &str) -> CliError {
    CliError::Config(format!("missing key `{key}`"))
}

pub fn key_err(key: &str, e: ripd_core::Error) -> CliError {
    CliError::Config(format!("key `{key}`: {e}"))
}
