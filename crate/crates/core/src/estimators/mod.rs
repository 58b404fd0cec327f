//! Estimators that turn observed data into kernel-triple components and
//! friction proxies.
//!
//! Each estimator family takes a tagged input enum so that run configs can
//! select the mode by name.

mod alignment;
mod entropy;
mod proxy;
mod stake;
pub mod table;

pub use alignment::{estimate_alignment, AlignmentInput, PreferenceVector};
pub use entropy::{estimate_entropy, mutual_information, shannon_entropy, DiscreteJoint, EntropyInput};
pub use proxy::{estimate_friction_proxy, ProxyInput, ReturnSeries, VolatilityInput};
pub use stake::{estimate_stake, PoliticalWeights, StakeInput};
pub use table::Table;

use crate::error::{Error, Result};

pub(crate) fn nonempty<'a>(what: &str, xs: &'a [f64]) -> Result<&'a [f64]> {
    if xs.is_empty() {
        return Err(Error::Degenerate(format!("{what} is empty")));
    }
    if let Some(bad) = xs.iter().find(|x| !x.is_finite()) {
        return Err(Error::Degenerate(format!("{what} contains non-finite value {bad}")));
    }
    Ok(xs)
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}
