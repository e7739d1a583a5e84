//! Double-word arithmetic (`hi + lo`) for orbit computations.
//!
//! `tau` multiplies rounding errors by `tau'` at every step, and `W` is only
//! Hölder continuous, so an orbit carried in plain floating point evaluates
//! `W` at a slightly wrong point with an error of order `eps^alpha`. Orbits
//! are therefore carried with twice the working precision.

use crate::real::Real;

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Twin<T> {
    pub hi: T,
    pub lo: T,
}

#[inline]
fn two_sum<T: Real>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum<T: Real>(a: T, b: T) -> (T, T) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod<T: Real>(a: T, b: T) -> (T, T) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl<T: Real> Twin<T> {
    #[inline]
    pub fn new(hi: T) -> Self {
        Self { hi, lo: T::zero() }
    }

    #[inline]
    pub fn value(self) -> T {
        self.hi + self.lo
    }

    /// Exact difference of two working-precision numbers.
    #[inline]
    pub fn diff(a: T, b: T) -> Self {
        let (s, e) = two_sum(a, -b);
        Self { hi: s, lo: e }
    }

    #[inline]
    pub fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Self { hi, lo }
    }

    #[inline]
    pub fn sub(self, o: Self) -> Self {
        self.add(Self { hi: -o.hi, lo: -o.lo })
    }

    #[inline]
    pub fn sub_scalar(self, a: T) -> Self {
        let (s, e) = two_sum(self.hi, -a);
        let (hi, lo) = quick_two_sum(s, e + self.lo);
        Self { hi, lo }
    }

    #[inline]
    pub fn add_scalar(self, a: T) -> Self {
        self.sub_scalar(-a)
    }

    #[inline]
    pub fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }

    /// `1 / self` by one Newton step from the working-precision reciprocal.
    pub fn recip(self) -> Self {
        let r = Self::new(T::one() / self.hi);
        let residual = Self::new(T::one()).sub(self.mul(r));
        r.add(r.mul(residual))
    }

    /// Order by value; ties on `hi` are broken by `lo`.
    #[inline]
    pub fn lt_scalar(self, a: T) -> bool {
        self.hi < a || (self.hi == a && self.lo < T::zero())
    }
}
