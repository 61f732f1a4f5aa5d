//! Finite-range matrix cocycles over an SFT.
//!
//! The generator `𝒜(x)` reads the forward window `x_0 … x_k`, so the product
//! `𝒜^n(x) = 𝒜(σ^{n−1}x) ⋯ 𝒜(x)` is determined by the word `x_0 … x_{n+k−1}`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
pub use crate::linalg::{log_phi_s, phi_s};
use crate::linalg::{Matrix, MAX_DIM};
use crate::point::PointSpec;
use crate::sft::{Sft, Symbol, Word};

#[derive(Debug, Clone, Serialize)]
pub struct FiniteRangeCocycle {
    #[serde(skip)]
    sft: Sft,
    d: usize,
    k: usize,
    alpha: f64,
    table: BTreeMap<Word, Matrix>,
}

impl FiniteRangeCocycle {
    /// Validates that every admissible `(k+1)`-word has an invertible
    /// `d × d` entry and that no other windows are present.
    pub fn new(sft: Sft, d: usize, k: usize, alpha: f64, table: BTreeMap<Word, Matrix>) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(Error::DimensionTooLarge(d));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::BadAlpha(alpha));
        }
        for (w, m) in &table {
            if w.len() != k + 1 || !sft.is_admissible(w) {
                return Err(Error::BadWindow(w.clone()));
            }
            if m.dim() != d {
                return Err(Error::Dimension { expected: d, got: m.dim() });
            }
            if !m.is_finite() {
                return Err(Error::NonFinite);
            }
            if !m.is_invertible() {
                return Err(Error::Singular { det: m.det() });
            }
        }
        for w in sft.enumerate_words(k + 1)? {
            if !table.contains_key(&w) {
                return Err(Error::MissingWindow(w));
            }
        }
        Ok(Self { sft, d, k, alpha, table })
    }

    /// Locally constant cocycle: one generator per symbol.
    pub fn locally_constant(sft: Sft, alpha: f64, generators: Vec<Matrix>) -> Result<Self> {
        let d = generators.first().map(Matrix::dim).unwrap_or(0);
        if generators.len() != sft.q() {
            return Err(Error::InvalidParameter(format!(
                "{} generators for an alphabet of {} symbols",
                generators.len(),
                sft.q()
            )));
        }
        let table = generators.into_iter().enumerate().map(|(s, m)| (Word(vec![s as Symbol]), m)).collect();
        Self::new(sft, d, 0, alpha, table)
    }

    /// The same matrix on every symbol.
    pub fn constant(sft: Sft, alpha: f64, generator: Matrix) -> Result<Self> {
        let q = sft.q();
        Self::locally_constant(sft, alpha, vec![generator; q])
    }

    pub fn identity(sft: Sft, d: usize) -> Result<Self> {
        Self::constant(sft, 1.0, Matrix::identity(d))
    }

    pub fn sft(&self) -> &Sft {
        &self.sft
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Window radius `k`; the generator depends on `k + 1` symbols.
    pub fn radius(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_locally_constant(&self) -> bool {
        self.k == 0
    }

    pub fn table(&self) -> &BTreeMap<Word, Matrix> {
        &self.table
    }

    pub fn generator(&self, window: &[Symbol]) -> Result<&Matrix> {
        self.table.get(window).ok_or_else(|| Error::MissingWindow(Word::from(window)))
    }

    /// `𝒜^n` along `w` with `n = |w| − k`, later factors on the left.
    pub fn word_product(&self, w: &[Symbol]) -> Result<Matrix> {
        if w.len() < self.k + 1 {
            return Err(Error::WordTooShort { k: self.k, min: self.k + 1, len: w.len() });
        }
        self.sft.check_admissible(w)?;
        self.product_unchecked(w)
    }

    pub(crate) fn product_unchecked(&self, w: &[Symbol]) -> Result<Matrix> {
        let mut acc = Matrix::identity(self.d);
        for win in w.windows(self.k + 1) {
            acc = self.generator(win)? * &acc;
        }
        Ok(acc)
    }

    /// Generator at a point: `𝒜(x)` from `x_0 … x_k`.
    pub fn at_point(&self, x: &PointSpec) -> Result<&Matrix> {
        self.generator(&x.window(0, self.k + 1))
    }

    /// `𝒜^n(x) = 𝒜(σ^{n−1}x) ⋯ 𝒜(x)` for an eventually periodic point.
    pub fn point_product(&self, x: &PointSpec, n: usize) -> Result<Matrix> {
        self.product_unchecked(&x.window(0, n + self.k))
    }

    /// `𝒜^{−n}(x) = 𝒜^n(σ^{−n}x)^{−1}`, the inverse cocycle over `σ^{−1}`.
    pub fn inverse_point_product(&self, x: &PointSpec, n: usize) -> Result<Matrix> {
        let mut acc = Matrix::identity(self.d);
        // Invert factor by factor so no ill-conditioned product is inverted.
        for win in x.window(-(n as i64), n + self.k).windows(self.k + 1) {
            acc = &acc * &self.generator(win)?.inverse()?;
        }
        Ok(acc)
    }

    /// Product around the periodic point `… w w w …` for one period,
    /// `𝒜^{|w|}(p)`, with windows read cyclically.
    pub fn periodic_product(&self, w: &[Symbol]) -> Result<Matrix> {
        if !self.sft.is_cyclically_admissible(w) {
            return Err(Error::Inadmissible(Word::from(w)));
        }
        let mut ext = w.to_vec();
        for i in 0..self.k {
            ext.push(w[i % w.len()]);
        }
        self.product_unchecked(&ext)
    }

    /// Cocycle of `t`-th compound matrices, dimension `binom(d, t)`.
    pub fn exterior_power(&self, t: usize) -> Result<Self> {
        if t == 0 || t > self.d {
            return Err(Error::ExteriorDegree { t, d: self.d });
        }
        let table = self
            .table
            .iter()
            .map(|(w, m)| Ok((w.clone(), m.compound(t)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        let d = table.values().next().map(Matrix::dim).unwrap_or(1);
        Ok(Self { sft: self.sft.clone(), d, k: self.k, alpha: self.alpha, table })
    }
}
