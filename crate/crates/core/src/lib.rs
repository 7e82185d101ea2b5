//! Numerical toolkit for rearrangement-invariant norms on finite metric
//! measure spaces, and an experiment harness for deciding when an
//! `(X, Y)`-Poincaré inequality forces the measure to be doubling.
//!
//! Module map:
//!
//! * [`space`]: finite metric measure spaces, balls, doubling constants.
//! * [`rearrangement`]: distribution functions and decreasing rearrangements.
//! * [`young`] and [`norms`]: Young functions, r.i. norms, fundamental functions.
//! * [`gain`]: gain functions, Ermakoff's test, Zippin indices.
//! * [`poincare`]: discrete upper gradients and Poincaré ratios.
//! * [`certificate`]: the iterative doubling certificate.
//! * [`syntax`]: the textual registry syntax (`Lp(2)`, `log_alpha(2)`, ...).

pub mod certificate;
pub mod error;
pub mod gain;
pub mod norms;
pub mod poincare;
pub mod quad;
pub mod rearrangement;
pub mod space;
pub mod syntax;
pub mod young;

pub use error::{Error, Result};
pub use gain::{GainFunction, SlowlyVarying, Verdict};
pub use norms::{local_norm, luxemburg, luxemburg_norm, RiSpace};
pub use rearrangement::{decreasing_rearrangement, distribution, layer_cake, localized_rearrangement, StepFunction};
pub use space::{Ball, Closure, MetricMeasureSpace, WeightExpr};
pub use young::YoungFunction;
