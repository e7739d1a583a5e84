//! Piecewise expanding full-branch systems `(tau, lambda, g)`.
//!
//! Every branch of `tau` is the increasing affine bijection of
//! `I_i = [a_i, a_{i+1})` onto `[0, 1)`. The weight `lambda` and the
//! displacement `g` are given per interval or in closed form, so the whole
//! system is determined by a handful of numbers.

use std::fmt;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::twin::Twin;

/// Shape of the branches of `tau`. Only affine-onto branches are supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchKind {
    #[default]
    AffineOnto,
}

/// Contraction weight `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaKind<T> {
    /// `lambda = values[i]` on `I_i`.
    ConstantPerInterval(Vec<T>),
    /// `lambda = (tau')^(-theta)`, i.e. `|I_i|^theta` on `I_i`.
    TauPower { theta: T },
}

/// Displacement function `g`.
#[derive(Debug, Clone, PartialEq)]
pub enum DisplacementKind<T> {
    /// `g(x) = cos(2 pi x)`.
    Cosine,
    /// `g(x) = dist(x, Z)`.
    Sawtooth,
    /// `g(x) = slopes[i] * x + intercepts[i]` on `I_i`.
    PiecewiseLinear { slopes: Vec<T>, intercepts: Vec<T> },
}

/// A single failed hypothesis reported by [`SystemSpec::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    TooFewIntervals { len: usize },
    PartitionNotIncreasing { index: usize },
    PartitionEndpoints,
    NotFinite,
    LengthMismatch { what: &'static str, expected: usize, got: usize },
    LambdaOutOfRange { intervals: Vec<usize> },
    NotExpanding { intervals: Vec<usize> },
    ThetaOutOfRange,
    NonPositiveScale,
}

fn subscripts(idx: &[usize]) -> String {
    idx.iter().map(|i| format!("I{i}")).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewIntervals { len } => {
                write!(f, "partition needs at least 2 intervals, got {len}")
            }
            Violation::PartitionNotIncreasing { index } => {
                write!(f, "partition not strictly increasing at breakpoint {index}")
            }
            Violation::PartitionEndpoints => write!(f, "partition must start at 0 and end at 1"),
            Violation::NotFinite => write!(f, "non-finite parameter"),
            Violation::LengthMismatch { what, expected, got } => {
                write!(f, "{what}: expected {expected} values, got {got}")
            }
            Violation::LambdaOutOfRange { intervals } => {
                write!(f, "lambda outside (0,1) on {}", subscripts(intervals))
            }
            Violation::NotExpanding { intervals } => {
                write!(f, "tau-prime-times-lambda <= 1 on {}", subscripts(intervals))
            }
            Violation::ThetaOutOfRange => write!(f, "theta outside (0,1)"),
            Violation::NonPositiveScale => write!(f, "scale_t must be positive"),
        }
    }
}

/// The triple `(tau, lambda, g)` together with an optional global weight scale `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec<T> {
    partition: Vec<T>,
    branch: BranchKind,
    lambda: LambdaKind<T>,
    g: DisplacementKind<T>,
    scale_t: Option<T>,
    /// `1 / |I_i|` in double-word precision, for orbit computations
    inv_widths: Vec<Twin<T>>,
}

impl<T: Real> SystemSpec<T> {
    /// Builds a system without checking it; see [`SystemSpec::validate`].
    pub fn new(partition: Vec<T>, lambda: LambdaKind<T>, g: DisplacementKind<T>) -> Self {
        let inv_widths = partition
            .windows(2)
            .map(|w| Twin::diff(w[1], w[0]).recip())
            .collect();
        Self { partition, branch: BranchKind::AffineOnto, lambda, g, scale_t: None, inv_widths }
    }

    /// Builds a system and rejects it unless every hypothesis holds.
    pub fn checked(partition: Vec<T>, lambda: LambdaKind<T>, g: DisplacementKind<T>) -> Result<Self> {
        Self::new(partition, lambda, g).into_valid()
    }

    /// `count` intervals of equal length.
    pub fn equal_partition(count: usize) -> Vec<T> {
        let n = T::from_usize_lossy(count);
        (0..=count).map(|k| T::from_usize_lossy(k) / n).collect()
    }

    pub fn with_scale(mut self, t: T) -> Self {
        self.scale_t = Some(t);
        self
    }

    pub fn into_valid(self) -> Result<Self> {
        let v = self.validate();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidSystem(v))
        }
    }

    pub fn partition(&self) -> &[T] {
        &self.partition
    }

    pub fn branch_kind(&self) -> BranchKind {
        self.branch
    }

    pub fn lambda_kind(&self) -> &LambdaKind<T> {
        &self.lambda
    }

    pub fn displacement(&self) -> &DisplacementKind<T> {
        &self.g
    }

    pub fn scale_t(&self) -> Option<T> {
        self.scale_t
    }

    /// Number of branches `l`.
    pub fn branches(&self) -> usize {
        self.partition.len().saturating_sub(1)
    }

    pub fn left(&self, i: usize) -> T {
        self.partition[i]
    }

    /// `|I_i|`.
    pub fn width(&self, i: usize) -> T {
        self.partition[i + 1] - self.partition[i]
    }

    pub fn widths(&self) -> Vec<T> {
        (0..self.branches()).map(|i| self.width(i)).collect()
    }

    /// Every violated hypothesis; empty for a valid system.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let p = &self.partition;
        if p.iter().any(|a| !a.is_finite()) {
            out.push(Violation::NotFinite);
            return out;
        }
        if p.len() < 3 {
            out.push(Violation::TooFewIntervals { len: self.branches() });
        }
        if let (Some(first), Some(last)) = (p.first(), p.last()) {
            if *first != T::zero() || *last != T::one() {
                out.push(Violation::PartitionEndpoints);
            }
        }
        let mut monotone = true;
        for k in 1..p.len() {
            if p[k] <= p[k - 1] {
                out.push(Violation::PartitionNotIncreasing { index: k });
                monotone = false;
            }
        }
        let l = self.branches();
        match &self.lambda {
            LambdaKind::ConstantPerInterval(v) => {
                if v.len() != l {
                    out.push(Violation::LengthMismatch { what: "lambda values", expected: l, got: v.len() });
                    return out;
                }
                if v.iter().any(|x| !x.is_finite()) {
                    out.push(Violation::NotFinite);
                    return out;
                }
            }
            LambdaKind::TauPower { theta } => {
                if !(*theta > T::zero() && *theta < T::one()) {
                    out.push(Violation::ThetaOutOfRange);
                }
            }
        }
        if let DisplacementKind::PiecewiseLinear { slopes, intercepts } = &self.g {
            if slopes.len() != l {
                out.push(Violation::LengthMismatch { what: "g slopes", expected: l, got: slopes.len() });
            }
            if intercepts.len() != l {
                out.push(Violation::LengthMismatch {
                    what: "g intercepts",
                    expected: l,
                    got: intercepts.len(),
                });
            }
        }
        if let Some(t) = self.scale_t {
            if !(t > T::zero()) || !t.is_finite() {
                out.push(Violation::NonPositiveScale);
                return out;
            }
        }
        if !monotone || l < 2 {
            return out;
        }
        let mut bad_range = Vec::new();
        let mut bad_expansion = Vec::new();
        for i in 0..l {
            let lam = self.lambda_symbol(i);
            if !(lam > T::zero() && lam < T::one()) {
                bad_range.push(i);
            }
            if !(self.tau_prime_symbol(i) * lam > T::one()) {
                bad_expansion.push(i);
            }
        }
        if !bad_range.is_empty() {
            out.push(Violation::LambdaOutOfRange { intervals: bad_range });
        }
        if !bad_expansion.is_empty() {
            out.push(Violation::NotExpanding { intervals: bad_expansion });
        }
        out
    }

    /// Symbol `k(x)`; intervals are half-open and `x = 1` belongs to the last one.
    pub fn symbol_of(&self, x: T) -> usize {
        let l = self.branches();
        let idx = self.partition[1..l].partition_point(|a| *a <= x);
        idx.min(l - 1)
    }

    /// `tau(x)`.
    pub fn tau(&self, x: T) -> T {
        let i = self.symbol_of(x);
        (x - self.partition[i]) / self.width(i)
    }

    /// `rho_i(x) = a_i + |I_i| x`, the inverse branch onto the closure of `I_i`.
    #[inline]
    pub fn inverse_branch(&self, i: usize, x: T) -> T {
        self.partition[i] + self.width(i) * x
    }

    /// `rho_{(w_1,...,w_n)} = rho_{w_n} o ... o rho_{w_1}`: `rho_{w_1}` is applied first.
    pub fn inverse_word(&self, word: &[usize], x: T) -> T {
        word.iter().fold(x, |z, &i| self.inverse_branch(i, z))
    }

    /// `k(x)` for a double-word point.
    pub fn symbol_of_twin(&self, x: Twin<T>) -> usize {
        let l = self.branches();
        let idx = self.partition[1..l].partition_point(|a| !x.lt_scalar(*a));
        idx.min(l - 1)
    }

    /// `|I_i|` as an exact double-word difference.
    #[inline]
    pub fn width_twin(&self, i: usize) -> Twin<T> {
        Twin::diff(self.partition[i + 1], self.partition[i])
    }

    /// `tau` on `I_i` in double-word arithmetic.
    #[inline]
    pub fn tau_branch_twin(&self, i: usize, x: Twin<T>) -> Twin<T> {
        x.sub_scalar(self.partition[i]).mul(self.inv_widths[i])
    }

    pub fn tau_twin(&self, x: Twin<T>) -> Twin<T> {
        self.tau_branch_twin(self.symbol_of_twin(x), x)
    }

    #[inline]
    pub fn inverse_branch_twin(&self, i: usize, x: Twin<T>) -> Twin<T> {
        self.width_twin(i).mul(x).add_scalar(self.partition[i])
    }

    /// `tau'` on `I_i`.
    #[inline]
    pub fn tau_prime_symbol(&self, i: usize) -> T {
        T::one() / self.width(i)
    }

    pub fn tau_prime(&self, x: T) -> T {
        self.tau_prime_symbol(self.symbol_of(x))
    }

    /// `lambda` on `I_i` with the scale `t` folded in.
    pub fn lambda_symbol(&self, i: usize) -> T {
        let base = match &self.lambda {
            LambdaKind::ConstantPerInterval(v) => v[i],
            LambdaKind::TauPower { theta } => self.width(i).powf(*theta),
        };
        base * self.scale_t.unwrap_or_else(T::one)
    }

    pub fn lambda(&self, x: T) -> T {
        self.lambda_symbol(self.symbol_of(x))
    }

    /// `lambda'`; identically zero since every supported weight is piecewise constant.
    pub fn lambda_derivative(&self, _x: T) -> T {
        T::zero()
    }

    /// True when `lambda' == 0` away from partition points.
    pub fn lambda_is_locally_constant(&self) -> bool {
        matches!(self.lambda, LambdaKind::ConstantPerInterval(_) | LambdaKind::TauPower { .. })
    }

    /// `gamma = 1 / (tau' lambda)` on `I_i`.
    pub fn gamma_symbol(&self, i: usize) -> T {
        self.width(i) / self.lambda_symbol(i)
    }

    pub fn gamma(&self, x: T) -> T {
        self.gamma_symbol(self.symbol_of(x))
    }

    fn fold_symbols(&self, f: impl Fn(usize) -> T, max: bool) -> T {
        let it = (0..self.branches()).map(f);
        if max {
            it.fold(T::neg_infinity(), T::max)
        } else {
            it.fold(T::infinity(), T::min)
        }
    }

    pub fn lambda_max(&self) -> T {
        self.fold_symbols(|i| self.lambda_symbol(i), true)
    }

    pub fn lambda_min(&self) -> T {
        self.fold_symbols(|i| self.lambda_symbol(i), false)
    }

    pub fn gamma_max(&self) -> T {
        self.fold_symbols(|i| self.gamma_symbol(i), true)
    }

    pub fn gamma_min(&self) -> T {
        self.fold_symbols(|i| self.gamma_symbol(i), false)
    }

    /// `g(x)`.
    pub fn g(&self, x: T) -> T {
        match &self.g {
            DisplacementKind::Cosine => (T::two_pi() * x).cos(),
            DisplacementKind::Sawtooth => {
                let f = x - x.floor();
                f.min(T::one() - f)
            }
            DisplacementKind::PiecewiseLinear { slopes, intercepts } => {
                let i = self.symbol_of(x);
                slopes[i] * x + intercepts[i]
            }
        }
    }

    /// `g'(x)`, one-sided from the right at kinks.
    pub fn g_prime(&self, x: T) -> T {
        match &self.g {
            DisplacementKind::Cosine => -T::two_pi() * (T::two_pi() * x).sin(),
            DisplacementKind::Sawtooth => {
                let f = x - x.floor();
                if f < T::lit(0.5) {
                    T::one()
                } else {
                    -T::one()
                }
            }
            DisplacementKind::PiecewiseLinear { slopes, .. } => slopes[self.symbol_of(x)],
        }
    }

    /// `g''(x)`; `None` where `g'` jumps.
    pub fn g_second(&self, x: T) -> Option<T> {
        match &self.g {
            DisplacementKind::Cosine => {
                let tp = T::two_pi();
                Some(-tp * tp * (tp * x).cos())
            }
            _ => {
                if self.g_kinks().iter().any(|k| *k == x) {
                    None
                } else {
                    Some(T::zero())
                }
            }
        }
    }

    /// `g''(x)`, one-sided from the right at kinks.
    pub fn g_second_right(&self, x: T) -> T {
        match &self.g {
            DisplacementKind::Cosine => {
                let tp = T::two_pi();
                -tp * tp * (tp * x).cos()
            }
            _ => T::zero(),
        }
    }

    /// Points in `[0, 1]` where `g'` may jump.
    pub fn g_kinks(&self) -> Vec<T> {
        match &self.g {
            DisplacementKind::Cosine => Vec::new(),
            DisplacementKind::Sawtooth => vec![T::zero(), T::lit(0.5), T::one()],
            DisplacementKind::PiecewiseLinear { .. } => self.partition.clone(),
        }
    }

    /// `||g||_inf` over `[0, 1]`.
    pub fn g_sup_norm(&self) -> T {
        match &self.g {
            DisplacementKind::Cosine => T::one(),
            DisplacementKind::Sawtooth => T::lit(0.5),
            DisplacementKind::PiecewiseLinear { slopes, intercepts } => (0..self.branches())
                .flat_map(|i| {
                    let (a, b) = (self.partition[i], self.partition[i + 1]);
                    [(slopes[i] * a + intercepts[i]).abs(), (slopes[i] * b + intercepts[i]).abs()]
                })
                .fold(T::zero(), T::max),
        }
    }

    /// `||g'||_inf` over `[0, 1]`.
    pub fn g_prime_sup_norm(&self) -> T {
        match &self.g {
            DisplacementKind::Cosine => T::two_pi(),
            DisplacementKind::Sawtooth => T::one(),
            DisplacementKind::PiecewiseLinear { slopes, .. } => {
                slopes.iter().fold(T::zero(), |m, s| m.max(s.abs()))
            }
        }
    }

    /// `||g''||_inf` away from kinks.
    pub fn g_second_sup_norm(&self) -> T {
        match &self.g {
            DisplacementKind::Cosine => T::two_pi() * T::two_pi(),
            _ => T::zero(),
        }
    }

    /// True when `g' == 0` everywhere, so that the slope field vanishes.
    pub fn g_is_piecewise_constant(&self) -> bool {
        match &self.g {
            DisplacementKind::PiecewiseLinear { slopes, .. } => slopes.iter().all(|s| *s == T::zero()),
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equal3(lam: f64) -> SystemSpec<f64> {
        SystemSpec::new(
            SystemSpec::equal_partition(3),
            LambdaKind::ConstantPerInterval(vec![lam; 3]),
            DisplacementKind::Cosine,
        )
    }

    #[test]
    fn validate_accepts_expanding_system() {
        assert!(equal3(0.6).validate().is_empty());
    }

    #[test]
    fn validate_reports_weak_weights_on_every_interval() {
        let v = equal3(0.3).validate();
        assert_eq!(v, vec![Violation::NotExpanding { intervals: vec![0, 1, 2] }]);
        assert_eq!(v[0].to_string(), "tau-prime-times-lambda <= 1 on I0, I1, I2");
    }

    #[test]
    fn validate_reports_malformed_partition() {
        let s = SystemSpec::new(
            vec![0.0, 0.5, 0.4, 1.0],
            LambdaKind::ConstantPerInterval(vec![0.9; 3]),
            DisplacementKind::Cosine,
        );
        let v = s.validate();
        assert!(v.contains(&Violation::PartitionNotIncreasing { index: 2 }));
        let s = SystemSpec::new(vec![0.0, 1.0], LambdaKind::TauPower { theta: 0.5 }, DisplacementKind::Cosine);
        assert!(s.validate().contains(&Violation::TooFewIntervals { len: 1 }));
        let s = SystemSpec::new(vec![0.1, 0.5, 1.2], LambdaKind::TauPower { theta: 0.5 }, DisplacementKind::Cosine);
        assert!(s.validate().contains(&Violation::PartitionEndpoints));
    }

    #[test]
    fn validate_with_scale() {
        let s = equal3(0.6).with_scale(2.0);
        assert_eq!(s.validate(), vec![Violation::LambdaOutOfRange { intervals: vec![0, 1, 2] }]);
        let s = equal3(0.6).with_scale(0.5);
        assert_eq!(s.validate(), vec![Violation::NotExpanding { intervals: vec![0, 1, 2] }]);
    }

    #[test]
    fn tau_examples() {
        let s = equal3(0.6);
        assert!((s.tau(0.5) - 0.5).abs() < 1e-15);
        assert!((s.tau(0.1) - 0.3).abs() < 1e-15);
        assert_eq!(s.tau(1.0), 1.0);
        assert_eq!(s.symbol_of(1.0 / 3.0), 1);
        assert_eq!(s.symbol_of(0.0), 0);
    }

    #[test]
    fn inverse_branch_examples() {
        let s = equal3(0.6);
        assert!((s.inverse_branch(1, 0.5) - 0.5).abs() < 1e-15);
        assert!((s.inverse_branch(2, 0.0) - 2.0 / 3.0).abs() < 1e-15);
        let x = 0.37;
        assert_eq!(s.inverse_word(&[0, 2], x), s.inverse_branch(2, s.inverse_branch(0, x)));
    }

    #[test]
    fn tau_power_weights() {
        let s = SystemSpec::new(
            vec![0.0, 0.4, 1.0],
            LambdaKind::TauPower { theta: 0.3 },
            DisplacementKind::Cosine,
        );
        assert!(s.validate().is_empty());
        assert!((s.gamma_symbol(0) - 0.4f64.powf(0.7)).abs() < 1e-15);
        assert!((s.lambda_symbol(1) - 0.6f64.powf(0.3)).abs() < 1e-15);
    }

    #[test]
    fn sawtooth_and_piecewise_linear() {
        let s = SystemSpec::new(
            SystemSpec::equal_partition(2),
            LambdaKind::ConstantPerInterval(vec![0.7, 0.7]),
            DisplacementKind::Sawtooth,
        );
        assert_eq!(s.g(0.25), 0.25);
        assert_eq!(s.g(0.75), 0.25);
        assert_eq!(s.g_prime(0.25), 1.0);
        assert_eq!(s.g_prime(0.75), -1.0);
        assert_eq!(s.g_second(0.5), None);
        let s = SystemSpec::new(
            SystemSpec::equal_partition(2),
            LambdaKind::ConstantPerInterval(vec![0.7, 0.7]),
            DisplacementKind::PiecewiseLinear { slopes: vec![2.0, -1.0], intercepts: vec![0.0, 3.0] },
        );
        assert_eq!(s.g(0.25), 0.5);
        assert_eq!(s.g(0.75), 2.25);
        assert_eq!(s.g_sup_norm(), 2.5);
        assert_eq!(s.g_prime_sup_norm(), 2.0);
    }

    #[test]
    fn single_precision_instantiation() {
        let s: SystemSpec<f32> = SystemSpec::new(
            SystemSpec::equal_partition(3),
            LambdaKind::ConstantPerInterval(vec![0.6; 3]),
            DisplacementKind::Cosine,
        );
        assert!(s.validate().is_empty());
        assert!((s.tau(0.1f32) - 0.3).abs() < 1e-6);
    }
}
