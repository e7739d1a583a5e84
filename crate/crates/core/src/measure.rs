//! Bernoulli measures `nu_p` on the coding space, their entropy and Birkhoff integrals.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::rng::stream_rng;
use crate::symbolic::SymbolWord;
use crate::system::SystemSpec;

/// Probability vector `p`; the mass of a cylinder is the product of its symbol weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliMeasure<T> {
    p: Vec<T>,
    cumulative: Vec<T>,
}

/// Closed-form integrals of a Bernoulli measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyIntegrals<T> {
    pub entropy: T,
    pub log_tau_prime: T,
    pub log_lambda: T,
    pub log_gamma: T,
}

impl<T: Real> BernoulliMeasure<T> {
    pub fn new(p: Vec<T>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidMeasure("empty probability vector".into()));
        }
        if p.iter().any(|x| !x.is_finite() || *x < T::zero()) {
            return Err(Error::InvalidMeasure("entries must be finite and non-negative".into()));
        }
        let total = p.iter().fold(T::zero(), |a, b| a + *b);
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(64.0));
        if (total - T::one()).abs() > tol {
            return Err(Error::InvalidMeasure(format!("entries sum to {total}, not 1")));
        }
        let mut acc = T::zero();
        let cumulative = p
            .iter()
            .map(|x| {
                acc = acc + *x;
                acc
            })
            .collect();
        Ok(Self { p, cumulative })
    }

    pub fn uniform(l: usize) -> Self {
        let w = T::one() / T::from_usize_lossy(l);
        Self::new(vec![w; l]).expect("uniform vector is a probability vector")
    }

    /// Point mass on the fixed point of branch `i`.
    pub fn dirac(l: usize, i: usize) -> Self {
        let mut p = vec![T::zero(); l];
        p[i] = T::one();
        Self::new(p).expect("dirac vector is a probability vector")
    }

    /// `p_c = (|I_0|, ..., |I_{l-1}|)`, i.e. Lebesgue measure.
    pub fn critical(spec: &SystemSpec<T>) -> Self {
        Self::new(spec.widths()).expect("widths of a valid partition sum to one")
    }

    pub fn probabilities(&self) -> &[T] {
        &self.p
    }

    pub fn alphabet(&self) -> usize {
        self.p.len()
    }

    /// `nu_p(I_w) = prod p_{w_k}`; the empty word has mass 1.
    pub fn mass(&self, word: &SymbolWord) -> T {
        word.symbols().iter().fold(T::one(), |acc, &i| acc * self.p[i])
    }

    /// `-log nu_p(I_w)`, accumulated term by term so deep words do not underflow.
    pub fn neg_log_mass(&self, word: &[usize]) -> T {
        word.iter().fold(T::zero(), |acc, &i| acc - self.p[i].ln())
    }

    /// `h = -sum p_i log p_i` with `0 log 0 = 0`.
    pub fn entropy(&self) -> T {
        self.p
            .iter()
            .filter(|p| **p > T::zero())
            .fold(T::zero(), |acc, p| acc - *p * p.ln())
    }

    pub fn integrals(&self, spec: &SystemSpec<T>) -> EntropyIntegrals<T> {
        let mut log_tau_prime = T::zero();
        let mut log_lambda = T::zero();
        for (i, p) in self.p.iter().enumerate() {
            if *p > T::zero() {
                log_tau_prime = log_tau_prime - *p * spec.width(i).ln();
                log_lambda = log_lambda + *p * spec.lambda_symbol(i).ln();
            }
        }
        EntropyIntegrals {
            entropy: self.entropy(),
            log_tau_prime,
            log_lambda,
            log_gamma: -log_tau_prime - log_lambda,
        }
    }

    pub fn draw_symbol<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = T::lit(rng.gen::<f64>());
        let idx = self.cumulative.partition_point(|c| *c <= u);
        // rounding in the cumulative sums can push u past the last entry
        let idx = idx.min(self.p.len() - 1);
        if self.p[idx] > T::zero() {
            idx
        } else {
            self.p.iter().rposition(|p| *p > T::zero()).expect("some positive entry")
        }
    }

    pub fn draw_word<R: Rng + ?Sized>(&self, depth: usize, rng: &mut R) -> Vec<usize> {
        (0..depth).map(|_| self.draw_symbol(rng)).collect()
    }

    /// One point with law close to `nu_p`: `depth` symbols, then a uniform
    /// position inside the resulting cylinder.
    pub fn draw_point<R: Rng + ?Sized>(&self, spec: &SystemSpec<T>, depth: usize, rng: &mut R) -> T {
        let word = self.draw_word(depth, rng);
        let u = T::lit(rng.gen::<f64>());
        spec.point_in_cylinder(&word, u)
    }

    /// Deterministic single sample for `seed`.
    pub fn sample_point(&self, spec: &SystemSpec<T>, depth: usize, seed: u64) -> T {
        self.draw_point(spec, depth, &mut stream_rng(seed, 0))
    }

    /// `n` samples; sample `k` uses stream `k` of `seed`.
    pub fn sample_points(&self, spec: &SystemSpec<T>, depth: usize, n: usize, seed: u64) -> Vec<T> {
        (0..n)
            .into_par_iter()
            .map(|k| self.draw_point(spec, depth, &mut stream_rng(seed, k as u64)))
            .collect()
    }

    /// `-log nu_p(I_N) / N` for a point given by its coding word. Deep words
    /// (beyond what a double can resolve) must be handled symbolically.
    pub fn smb_word(&self, word: &[usize]) -> T {
        self.neg_log_mass(word) / T::from_usize_lossy(word.len().max(1))
    }

    /// `-log nu_p(I_N(x)) / N`; infinite when the cylinder has zero mass.
    pub fn smb_empirical(&self, spec: &SystemSpec<T>, x: T, depth: usize) -> T {
        let word = spec.coding_word(x, depth);
        let nlm = self.neg_log_mass(word.symbols());
        if !nlm.is_finite() {
            return T::infinity();
        }
        nlm / T::from_usize_lossy(depth.max(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{DisplacementKind, LambdaKind};

    fn system_a() -> SystemSpec<f64> {
        SystemSpec::new(
            SystemSpec::equal_partition(3),
            LambdaKind::ConstantPerInterval(vec![0.6; 3]),
            DisplacementKind::Cosine,
        )
    }

    #[test]
    fn rejects_bad_vectors() {
        assert!(BernoulliMeasure::new(vec![0.5, 0.6]).is_err());
        assert!(BernoulliMeasure::new(vec![1.2, -0.2]).is_err());
        assert!(BernoulliMeasure::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn mass_examples() {
        let u = BernoulliMeasure::<f64>::uniform(3);
        let w = SymbolWord::new(vec![0, 1, 2, 2, 1], 3).unwrap();
        assert!((u.mass(&w) - 4.1152263374485597e-3).abs() < 1e-15);
        let p = BernoulliMeasure::<f64>::new(vec![0.5, 0.3, 0.2]).unwrap();
        assert!((p.mass(&SymbolWord::new(vec![0, 2], 3).unwrap()) - 0.1).abs() < 1e-15);
        assert_eq!(p.mass(&SymbolWord::empty()), 1.0);
    }

    #[test]
    fn entropy_examples() {
        let s = system_a();
        let e = BernoulliMeasure::uniform(3).integrals(&s);
        assert!((e.entropy - 3f64.ln()).abs() < 1e-15);
        assert!((e.log_lambda - 0.6f64.ln()).abs() < 1e-15);
        assert!((e.log_tau_prime - 3f64.ln()).abs() < 1e-15);
        assert!((e.log_gamma + 3f64.ln() + 0.6f64.ln()).abs() < 1e-15);
        let p = BernoulliMeasure::<f64>::new(vec![0.98, 0.01, 0.01]).unwrap();
        assert!((p.entropy() - 0.11190205689093088).abs() < 1e-12);
        assert_eq!(BernoulliMeasure::<f64>::dirac(3, 0).entropy(), 0.0);
    }

    #[test]
    fn critical_vector_is_lebesgue_case() {
        let s = SystemSpec::new(vec![0.0, 0.25, 0.7, 1.0], LambdaKind::TauPower { theta: 0.3 }, DisplacementKind::Cosine);
        let e: EntropyIntegrals<f64> = BernoulliMeasure::critical(&s).integrals(&s);
        assert!((e.entropy - e.log_tau_prime).abs() < 1e-14);
    }

    #[test]
    fn sampling_is_deterministic_and_unbiased() {
        let s = system_a();
        let u = BernoulliMeasure::uniform(3);
        let a = u.sample_points(&s, 30, 1000, 9);
        let b = u.sample_points(&s, 30, 1000, 9);
        assert_eq!(a, b);
        assert_eq!(u.sample_point(&s, 30, 5), u.sample_point(&s, 30, 5));
        let xs = u.sample_points(&s, 30, 100_000, 11);
        let freq = xs.iter().filter(|&&x| s.symbol_of(x) == 0).count() as f64 / xs.len() as f64;
        assert!((freq - 1.0 / 3.0).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn dirac_samples_collapse_to_fixed_point() {
        let s = system_a();
        let d = BernoulliMeasure::dirac(3, 0);
        for depth in [5, 10, 20] {
            let x = d.sample_point(&s, depth, 3);
            assert!(x < 3f64.powi(-(depth as i32)) + 1e-300);
        }
        assert_eq!(d.smb_empirical(&s, 0.0, 50), 0.0);
    }

    #[test]
    fn smb_examples() {
        let s = system_a();
        let u = BernoulliMeasure::uniform(3);
        for (x, n) in [(0.123, 7), (0.77, 40)] {
            assert!((u.smb_empirical(&s, x, n) - 3f64.ln()).abs() < 1e-12);
        }
        let p = BernoulliMeasure::<f64>::new(vec![0.5, 0.3, 0.2]).unwrap();
        let h = p.entropy();
        assert!((h - 1.0296530140645737).abs() < 1e-12);
        // sample through the word directly so depth 1000 is not limited by
        // double precision of the point
        let mut rng = stream_rng(17, 0);
        let w = p.draw_word(1000, &mut rng);
        let est = p.smb_word(&w);
        assert!((est - h).abs() < 0.05, "estimate {est}");
        let zero = BernoulliMeasure::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert!(zero.smb_empirical(&s, 0.5, 3).is_infinite());
    }
}
