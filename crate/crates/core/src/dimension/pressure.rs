//! Topological pressure of `(1 - s) log tau' + log lambda` and the Bowen root.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::system::SystemSpec;

/// `P(s) = log sum_i |I_i|^s / gamma_i` for first-symbol potentials.
pub fn pressure_eval<T: Real>(spec: &SystemSpec<T>, s: T) -> T {
    (0..spec.branches())
        .map(|i| spec.width(i).powf(s) / spec.gamma_symbol(i))
        .fold(T::zero(), |a, b| a + b)
        .ln()
}

/// `dP/ds = sum_i w_i log |I_i|` with `w_i` the normalized summands.
pub fn pressure_derivative<T: Real>(spec: &SystemSpec<T>, s: T) -> T {
    let terms: Vec<T> = (0..spec.branches()).map(|i| spec.width(i).powf(s) / spec.gamma_symbol(i)).collect();
    let total = terms.iter().fold(T::zero(), |a, b| a + *b);
    terms
        .iter()
        .enumerate()
        .fold(T::zero(), |acc, (i, t)| acc + *t / total * spec.width(i).ln())
}

/// `(1/N) log sum_{|w| = N} exp(sup_{I_w} phi_N)` by enumerating all words.
/// Exact for affine branches; kept as a check on [`pressure_eval`].
pub fn pressure_cylinders<T: Real>(spec: &SystemSpec<T>, s: T, depth: usize) -> T {
    let l = spec.branches();
    let phi: Vec<T> = (0..l)
        .map(|i| (T::one() - s) * spec.tau_prime_symbol(i).ln() + spec.lambda_symbol(i).ln())
        .collect();
    let mut sums = vec![T::zero()];
    for _ in 0..depth {
        sums = sums.iter().flat_map(|acc| phi.iter().map(move |p| *acc + *p)).collect();
    }
    // log-sum-exp
    let m = sums.iter().fold(T::neg_infinity(), |a, b| a.max(*b));
    let total = sums.iter().fold(T::zero(), |a, b| a + (*b - m).exp());
    (m + total.ln()) / T::from_usize_lossy(depth.max(1))
}

/// Root of the Bowen equation and the equilibrium Bernoulli vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BowenSolution<T> {
    pub s_star: T,
    pub residual: T,
    pub bracket: (T, T),
    pub iterations: usize,
    /// `p*_i = |I_i|^{s*} / gamma_i`
    pub p_star: Vec<T>,
}

/// Safeguarded Newton iteration on `[1, 2]`, falling back to bisection.
pub fn bowen_solve<T: Real>(spec: &SystemSpec<T>) -> Result<BowenSolution<T>> {
    let (mut lo, mut hi) = (T::one(), T::lit(2.0));
    let p_lo = pressure_eval(spec, lo);
    if !(p_lo >= T::zero()) {
        return Err(Error::BracketFailure { at: 1.0, value: p_lo.as_f64() });
    }
    let p_hi = pressure_eval(spec, hi);
    if !(p_hi <= T::zero()) {
        return Err(Error::BracketFailure { at: 2.0, value: p_hi.as_f64() });
    }
    let bracket = (lo, hi);
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(16.0));
    let mut s = (lo + hi) * T::lit(0.5);
    let mut iterations = 0;
    for _ in 0..200 {
        iterations += 1;
        let p = pressure_eval(spec, s);
        if p.abs() < tol * T::lit(1e-2) {
            break;
        }
        if p > T::zero() {
            lo = s;
        } else {
            hi = s;
        }
        let newton = s - p / pressure_derivative(spec, s);
        s = if newton > lo && newton < hi { newton } else { (lo + hi) * T::lit(0.5) };
        if hi - lo < T::epsilon() * T::lit(4.0) {
            break;
        }
    }
    let residual = pressure_eval(spec, s).abs();
    let p_star = (0..spec.branches()).map(|i| spec.width(i).powf(s) / spec.gamma_symbol(i)).collect();
    Ok(BowenSolution { s_star: s, residual, bracket, iterations, p_star })
}
