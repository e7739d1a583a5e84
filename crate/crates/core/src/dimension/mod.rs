//! Bowen equation, closed-form dimension predictions and empirical estimators.

pub mod boxcount;
pub mod corrdim;
pub mod fit;
pub mod pointwise;
pub mod pressure;
pub mod predict;

pub use boxcount::{box_count_graph, BoxCountResult};
pub use corrdim::{correlation_dim, CorrDimEstimate};
pub use pointwise::{pointwise_dim_mu, PointwiseDimResult};
pub use predict::{formula_dims, DimPrediction, Regime};
pub use pressure::{bowen_solve, pressure_eval, BowenSolution};
