//! Closed-form dimension predictions for the lift `mu = (Id, W)_* nu_p`.

use serde::Serialize;

use crate::measure::BernoulliMeasure;
use crate::real::Real;
use crate::system::SystemSpec;

/// Which candidate attains the minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `h >= -int log lambda`: `dim = 1 + (h + int log lambda) / int log tau'`
    AtLeastOne,
    /// `h < -int log lambda`: `dim = h / (-int log lambda)`
    BelowOne,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimPrediction<T> {
    pub entropy: T,
    pub log_tau_prime: T,
    pub log_lambda: T,
    /// `1 + (h + int log lambda) / int log tau'`
    pub candidate_high: T,
    /// `h / (-int log lambda)`
    pub candidate_low: T,
    pub dim_mu: T,
    pub regime: Regime,
}

pub fn formula_dims<T: Real>(measure: &BernoulliMeasure<T>, spec: &SystemSpec<T>) -> DimPrediction<T> {
    let e = measure.integrals(spec);
    let candidate_high = T::one() + (e.entropy + e.log_lambda) / e.log_tau_prime;
    let candidate_low = e.entropy / (-e.log_lambda);
    let regime = if e.entropy >= -e.log_lambda { Regime::AtLeastOne } else { Regime::BelowOne };
    DimPrediction {
        entropy: e.entropy,
        log_tau_prime: e.log_tau_prime,
        log_lambda: e.log_lambda,
        candidate_high,
        candidate_low,
        dim_mu: candidate_high.min(candidate_low),
        regime,
    }
}
