//! Closed-form sufficient conditions: `G(s, t)`, `delta_0`, the two conditions
//! for cosine displacement with `lambda = tau'^{-theta}`, the cosine lemma and
//! the constants `alpha` and `beta`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::system::{DisplacementKind, LambdaKind, SystemSpec};

/// `G(s, t) = (s^{-1} (t^2 / (1 - t) + (t - s) / 2))^2` for `0 < s <= t < 1`.
pub fn g_eval<T: Real>(s: T, t: T) -> Result<T> {
    if !(t < T::one()) {
        return Err(Error::Domain(format!("G(s, t) needs t < 1, got t = {t}")));
    }
    if !(s > T::zero()) || s > t {
        return Err(Error::Domain(format!("G(s, t) needs 0 < s <= t, got s = {s}, t = {t}")));
    }
    let half = T::lit(0.5);
    let inner = (t * t / (T::one() - t) + (t - s) * half) / s;
    Ok(inner * inner)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Delta0<T> {
    pub value: T,
    pub i: usize,
    pub j: usize,
    pub x: T,
    /// minimum over the grid `k / grid_n`, kept as a cross-check
    pub grid_value: T,
}

fn sin2_gap<T: Real>(spec: &SystemSpec<T>, i: usize, j: usize, x: T) -> T {
    let d = spec.inverse_branch(i, x) - spec.inverse_branch(j, x);
    let s = (T::PI() * d).sin();
    s * s
}

/// `inf_{i != j} inf_x sin^2(pi (rho_i(x) - rho_j(x)))`.
///
/// The gap is affine with values in `(0, 1)`, where `sin^2(pi .)` is unimodal,
/// so the infimum sits at `x = 0` or `x = 1`.
pub fn delta0_compute<T: Real>(spec: &SystemSpec<T>, grid_n: usize) -> Delta0<T> {
    let l = spec.branches();
    let mut best = Delta0 { value: T::infinity(), i: 0, j: 1, x: T::zero(), grid_value: T::infinity() };
    let n = grid_n.max(1);
    for i in 0..l {
        for j in (i + 1)..l {
            for x in [T::zero(), T::one()] {
                let v = sin2_gap(spec, j, i, x);
                if v < best.value {
                    best.value = v;
                    best.i = j;
                    best.j = i;
                    best.x = x;
                }
            }
            for k in 0..=n {
                let x = T::from_usize_lossy(k) / T::from_usize_lossy(n);
                best.grid_value = best.grid_value.min(sin2_gap(spec, j, i, x));
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairMargin<T> {
    pub i: usize,
    pub j: usize,
    /// `|I_i| / |I_j|`
    pub lhs: T,
    /// `|I_j|^{-theta / (2 - theta)}`
    pub rhs: T,
    pub margin: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example2Check<T> {
    pub theta: T,
    pub cond1: Vec<PairMargin<T>>,
    pub cond1_ok: bool,
    /// `G(min |I|^{1-theta}, max |I|^{1-theta})`
    pub g_first: T,
    /// `G(min |I|^{2-theta}, max |I|^{2-theta})`
    pub g_second: T,
    pub cond2_sum: T,
    pub delta0: Delta0<T>,
    pub cond2_margin: T,
    pub cond2_ok: bool,
    pub certified: bool,
    /// `2 - theta` when both conditions hold
    pub claimed_dim: Option<T>,
}

fn require_cosine<T: Real>(spec: &SystemSpec<T>) -> Result<()> {
    if !matches!(spec.displacement(), DisplacementKind::Cosine) {
        return Err(Error::Unsupported("condition needs g(x) = cos(2 pi x)".into()));
    }
    Ok(())
}

fn tau_power_theta<T: Real>(spec: &SystemSpec<T>) -> Result<T> {
    match (spec.lambda_kind(), spec.scale_t()) {
        (LambdaKind::TauPower { theta }, None) => Ok(*theta),
        (LambdaKind::TauPower { theta }, Some(t)) if t == T::one() => Ok(*theta),
        _ => Err(Error::Unsupported("condition needs lambda = tau'^{-theta} without extra scale".into())),
    }
}

fn min_max<T: Real>(v: impl Iterator<Item = T>) -> (T, T) {
    v.fold((T::infinity(), T::neg_infinity()), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

/// Conditions for `g = cos(2 pi x)` and `lambda = tau'^{-theta}`.
pub fn thm_example2_check<T: Real>(spec: &SystemSpec<T>) -> Result<Example2Check<T>> {
    require_cosine(spec)?;
    let theta = tau_power_theta(spec)?;
    let two = T::lit(2.0);
    let l = spec.branches();
    let mut cond1 = Vec::with_capacity(l * (l - 1));
    for i in 0..l {
        for j in 0..l {
            if i == j {
                continue;
            }
            let lhs = spec.width(i) / spec.width(j);
            let rhs = spec.width(j).powf(-theta / (two - theta));
            cond1.push(PairMargin { i, j, lhs, rhs, margin: rhs - lhs });
        }
    }
    let cond1_ok = cond1.iter().all(|m| m.margin > T::zero());
    let (wmin, wmax) = min_max(spec.widths().into_iter());
    let g_first = g_eval(wmin.powf(T::one() - theta), wmax.powf(T::one() - theta))?;
    let g_second = g_eval(wmin.powf(two - theta), wmax.powf(two - theta))?;
    let cond2_sum = g_first + g_second;
    let delta0 = delta0_compute(spec, 1024);
    let cond2_margin = delta0.value - cond2_sum;
    let cond2_ok = cond2_margin > T::zero();
    let certified = cond1_ok && cond2_ok;
    Ok(Example2Check {
        theta,
        cond1,
        cond1_ok,
        g_first,
        g_second,
        cond2_sum,
        delta0,
        cond2_margin,
        cond2_ok,
        certified,
        claimed_dim: certified.then(|| two - theta),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CosineLemma<T> {
    /// `G(min gamma, max gamma)`
    pub g_gamma: T,
    /// `G(min gamma / tau', max gamma / tau')`
    pub g_gamma_tau: T,
    pub sum: T,
    pub delta0: T,
    pub holds: bool,
}

/// `G(min gamma, max gamma) + G(min gamma/tau', max gamma/tau') < delta_0` for
/// cosine displacement and a locally constant weight.
pub fn cosine_lemma_check<T: Real>(spec: &SystemSpec<T>) -> Result<CosineLemma<T>> {
    require_cosine(spec)?;
    if !spec.lambda_is_locally_constant() {
        return Err(Error::Unsupported("cosine lemma needs lambda' == 0".into()));
    }
    let l = spec.branches();
    let (gmin, gmax) = min_max((0..l).map(|i| spec.gamma_symbol(i)));
    let (hmin, hmax) = min_max((0..l).map(|i| spec.gamma_symbol(i) * spec.width(i)));
    let g_gamma = g_eval(gmin, gmax)?;
    let g_gamma_tau = g_eval(hmin, hmax)?;
    let sum = g_gamma + g_gamma_tau;
    let delta0 = delta0_compute(spec, 1024).value;
    Ok(CosineLemma { g_gamma, g_gamma_tau, sum, delta0, holds: sum < delta0 })
}

/// `beta = max_i (|I_i|^2 / lambda_i) / (min gamma)^2`.
pub fn beta_constant<T: Real>(spec: &SystemSpec<T>) -> T {
    let l = spec.branches();
    let num = (0..l).map(|i| spec.width(i) * spec.width(i) / spec.lambda_symbol(i)).fold(T::neg_infinity(), T::max);
    let gmin = spec.gamma_min();
    num / (gmin * gmin)
}

/// Series bound `||g''|| q / (1 - q)` on `|dTheta/dx|`, `q = max gamma / tau'`.
pub fn alpha_bound<T: Real>(spec: &SystemSpec<T>) -> T {
    let q = (0..spec.branches()).map(|i| spec.gamma_symbol(i) * spec.width(i)).fold(T::neg_infinity(), T::max);
    spec.g_second_sup_norm() * q / (T::one() - q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tau_power(l: usize, theta: f64) -> SystemSpec<f64> {
        SystemSpec::new(SystemSpec::equal_partition(l), LambdaKind::TauPower { theta }, DisplacementKind::Cosine)
    }

    #[test]
    fn g_values() {
        assert!((g_eval(0.5f64, 0.5).unwrap() - 1.0).abs() < 1e-15);
        let a = 3f64.powf(-0.8);
        // equal arguments reduce to (t / (1 - t))^2 = 1 / (t^{-1} - 1)^2
        assert!((g_eval(a, a).unwrap() - 1.0 / (3f64.powf(0.8) - 1.0).powi(2)).abs() < 1e-14);
        assert!((g_eval(a, a).unwrap() - 0.504_261_828_285_677_4).abs() < 1e-14);
        assert!(g_eval(0.5, 1.0).is_err());
        assert!(g_eval(0.6, 0.5).is_err());
        assert!(g_eval(0.0, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn g_equal_arguments(t in 0.01f64..0.99) {
            let g = g_eval(t, t).unwrap();
            prop_assert!((g - (t / (1.0 - t)).powi(2)).abs() <= 1e-12 * g.max(1.0));
        }

        #[test]
        fn cond2_reduces_to_closed_form(l in 2usize..8, theta in 0.01f64..0.99) {
            let c = thm_example2_check(&tau_power(l, theta)).unwrap();
            let lf = l as f64;
            let closed = 1.0 / (lf.powf(1.0 - theta) - 1.0).powi(2) + 1.0 / (lf.powf(2.0 - theta) - 1.0).powi(2);
            prop_assert!((c.cond2_sum - closed).abs() <= 1e-10 * closed);
            let s = (std::f64::consts::PI / lf).sin().powi(2);
            prop_assert!((c.delta0.value - s).abs() < 1e-12);
            prop_assert_eq!(c.cond2_ok, closed < s);
            prop_assert!(c.cond1_ok);
        }

        #[test]
        fn cosine_lemma_matches_cond2_on_equal_partitions(l in 2usize..8, theta in 0.01f64..0.99) {
            let s = tau_power(l, theta);
            let c = thm_example2_check(&s).unwrap();
            let k = cosine_lemma_check(&s).unwrap();
            prop_assert!((c.cond2_sum - k.sum).abs() <= 1e-12 * k.sum);
            prop_assert_eq!(c.cond2_ok, k.holds);
        }

        #[test]
        fn delta0_grid_agrees_with_endpoints(cuts in proptest::collection::vec(0.05f64..1.0, 1..5)) {
            let mut p = vec![0.0];
            let total: f64 = cuts.iter().sum::<f64>() + 0.1;
            let mut acc = 0.0;
            for c in &cuts {
                acc += c / total;
                p.push(acc);
            }
            p.push(1.0);
            let l = p.len() - 1;
            let s = SystemSpec::new(p, LambdaKind::ConstantPerInterval(vec![0.99; l]), DisplacementKind::Cosine);
            let d = delta0_compute(&s, 4096);
            prop_assert!((d.value - d.grid_value).abs() < 1e-12);
        }

        #[test]
        fn beta_decreases_in_theta(l in 2usize..6, a in 0.01f64..0.98, b in 0.01f64..0.98) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-6);
            let blo = beta_constant(&tau_power(l, lo));
            let bhi = beta_constant(&tau_power(l, hi));
            // beta = l^{-theta} on equal partitions
            prop_assert!((blo - (l as f64).powf(-lo)).abs() < 1e-12);
            prop_assert!(bhi < blo);
        }
    }

    #[test]
    fn delta0_examples() {
        let s3 = tau_power(3, 0.2);
        assert!((delta0_compute(&s3, 64).value - 0.75).abs() < 1e-15);
        assert!((delta0_compute(&tau_power(2, 0.2), 64).value - 1.0).abs() < 1e-15);
        let s: SystemSpec<f64> = SystemSpec::new(vec![0.0, 0.4, 1.0], LambdaKind::TauPower { theta: 0.3 }, DisplacementKind::Cosine);
        let d = delta0_compute(&s, 64);
        assert!((d.value - 0.904_508_497_187_473_6).abs() < 1e-14);
        assert_eq!((d.i, d.j, d.x), (1, 0, 0.0));
    }

    #[test]
    fn example2_system_b() {
        let c = thm_example2_check(&tau_power(3, 0.2)).unwrap();
        assert!(c.cond1_ok && c.cond2_ok && c.certified);
        for m in &c.cond1 {
            assert!((m.rhs - 1.129_830_963_909_753).abs() < 1e-12);
        }
        assert!((c.g_second - 0.025_808_738_033_000_39).abs() < 1e-14);
        assert!((c.cond2_sum - 0.530_070_566_318_677_9).abs() < 1e-13);
        assert_eq!(c.claimed_dim, Some(1.8));
        let c = thm_example2_check(&tau_power(3, 0.5)).unwrap();
        assert!(c.g_first > 1.86 && !c.certified && c.claimed_dim.is_none());
        let c = thm_example2_check(&tau_power(2, 0.7)).unwrap();
        assert!(c.cond1_ok);
    }

    #[test]
    fn example2_rejects_other_families() {
        let a = SystemSpec::new(SystemSpec::equal_partition(3), LambdaKind::ConstantPerInterval(vec![0.6; 3]), DisplacementKind::Cosine);
        assert!(matches!(thm_example2_check(&a), Err(Error::Unsupported(_))));
        let t = SystemSpec::new(SystemSpec::equal_partition(3), LambdaKind::TauPower { theta: 0.2 }, DisplacementKind::Sawtooth);
        assert!(matches!(thm_example2_check(&t), Err(Error::Unsupported(_))));
        assert!(matches!(cosine_lemma_check(&t), Err(Error::Unsupported(_))));
        assert!(cosine_lemma_check(&a).is_ok());
    }

    #[test]
    fn cosine_lemma_limits() {
        let k = cosine_lemma_check(&tau_power(3, 0.2)).unwrap();
        assert!(k.holds && (k.sum - 0.530_070_566_318_677_9).abs() < 1e-13);
        // gamma = 3^{theta - 1} -> 1/3 and gamma / tau' -> 1/9 as theta -> 0
        let k: CosineLemma<f64> = cosine_lemma_check(&tau_power(3, 1e-9)).unwrap();
        assert!((k.sum - (0.25 + 1.0 / 64.0)).abs() < 1e-7 && k.holds);
        // and gamma -> 1 as theta -> 1, where G blows up
        let k: CosineLemma<f64> = cosine_lemma_check(&tau_power(3, 0.99)).unwrap();
        assert!(!k.holds);
    }

    #[test]
    fn beta_and_alpha_system_b() {
        let s = tau_power(3, 0.2);
        assert!((beta_constant(&s) - 3f64.powf(-0.2)).abs() < 1e-12);
        assert!((beta_constant(&s) - 0.802_741_561_760_230_7).abs() < 1e-12);
        let q = 3f64.powf(-1.8);
        let a = alpha_bound(&s);
        assert!((a - 4.0 * std::f64::consts::PI.powi(2) * q / (1.0 - q)).abs() < 1e-12);
        assert!((a - 6.342_246_557_842_742).abs() < 1e-12, "{a}");
    }
}
