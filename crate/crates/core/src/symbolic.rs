//! Coding words `[x]_N` and the cylinders `I_N(x)` they determine.

use std::fmt;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::system::SystemSpec;

/// A finite word over the alphabet `{0, ..., l-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SymbolWord {
    symbols: Vec<usize>,
}

impl SymbolWord {
    pub fn new(symbols: Vec<usize>, alphabet: usize) -> Result<Self> {
        if let Some(&s) = symbols.iter().find(|&&s| s >= alphabet) {
            return Err(Error::SymbolOutOfRange { symbol: s, alphabet });
        }
        Ok(Self { symbols })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub(crate) fn from_vec_unchecked(symbols: Vec<usize>) -> Self {
        Self { symbols }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    /// `w * j`.
    pub fn extended(&self, j: usize) -> Self {
        let mut symbols = self.symbols.clone();
        symbols.push(j);
        Self { symbols }
    }

    /// The word `(w_n, ..., w_1)`.
    pub fn reversed(&self) -> Self {
        Self { symbols: self.symbols.iter().rev().copied().collect() }
    }

    /// Drops the first symbol, i.e. applies the shift.
    pub fn shifted(&self) -> Self {
        Self { symbols: self.symbols.get(1..).unwrap_or(&[]).to_vec() }
    }
}

impl fmt::Display for SymbolWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, s) in self.symbols.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ")")
    }
}

/// `I_w = I_{w_1} ∩ tau^{-1} I_{w_2} ∩ ...`, stored as `[left, right)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cylinder<T> {
    pub word: SymbolWord,
    pub left: T,
    pub right: T,
}

impl<T: Real> Cylinder<T> {
    pub fn width(&self) -> T {
        self.right - self.left
    }

    pub fn contains(&self, x: T) -> bool {
        x >= self.left && x < self.right
    }
}

impl<T: Real> SystemSpec<T> {
    /// `[x]_N = (k(x), k(tau x), ..., k(tau^{N-1} x))`.
    pub fn coding_word(&self, x: T, depth: usize) -> SymbolWord {
        let mut z = x;
        let mut symbols = Vec::with_capacity(depth);
        for _ in 0..depth {
            let i = self.symbol_of(z);
            symbols.push(i);
            z = (z - self.left(i)) / self.width(i);
        }
        SymbolWord::from_vec_unchecked(symbols)
    }

    /// The cylinder of points whose coding starts with `word`.
    pub fn cylinder_of(&self, word: &SymbolWord) -> Cylinder<T> {
        let (left, right) = word.symbols().iter().rev().fold((T::zero(), T::one()), |(l, r), &i| {
            (self.inverse_branch(i, l), self.inverse_branch(i, r))
        });
        Cylinder { word: word.clone(), left, right }
    }

    /// `I_N(x)`.
    pub fn cylinder_at(&self, x: T, depth: usize) -> Cylinder<T> {
        self.cylinder_of(&self.coding_word(x, depth))
    }

    /// Point of the cylinder of `word` with relative position `u` in `[0, 1]`.
    pub fn point_in_cylinder(&self, word: &[usize], u: T) -> T {
        word.iter().rev().fold(u, |z, &i| self.inverse_branch(i, z))
    }

    /// `lambda^n(x)` along the coding word, i.e. `prod lambda_{w_k}`.
    pub fn lambda_power_word(&self, word: &[usize]) -> T {
        word.iter().fold(T::one(), |acc, &i| acc * self.lambda_symbol(i))
    }
}
