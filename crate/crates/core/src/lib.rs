//! Numerical laboratory for Weierstrass-type functions
//! `W(x) = sum_n lambda^n(x) g(tau^n x)` over piecewise expanding full-branch maps.
//!
//! The math kernels are generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which is what the estimators and the CLI use.

pub mod dimension;
pub mod error;
pub mod fibres;
pub mod measure;
pub mod real;
pub mod rng;
pub mod symbolic;
pub mod system;
pub mod transversality;
pub mod twin;
pub mod weierstrass;

pub use error::{Error, Result};
pub use fibres::{FibreCurve, ThetaField};
pub use measure::{BernoulliMeasure, EntropyIntegrals};
pub use real::Real;
pub use symbolic::{Cylinder, SymbolWord};
pub use system::{BranchKind, DisplacementKind, LambdaKind, SystemSpec, Violation};
pub use twin::Twin;
pub use weierstrass::{GraphSample, TruncationPlan};

pub type System = SystemSpec<f64>;
pub type Measure = BernoulliMeasure<f64>;
pub type Plan = TruncationPlan<f64>;
pub type Graph = GraphSample<f64>;
