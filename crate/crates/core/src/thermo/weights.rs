//! Probability weights on the cylinders of one level.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::sft::{Sft, Symbol, Word};

/// Tolerance on the total mass of a weight table.
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightSource {
    Gibbs,
    Bernoulli,
    Markov,
    Parry,
    Periodic,
    Custom,
}

impl fmt::Display for WeightSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            WeightSource::Gibbs => "gibbs",
            WeightSource::Bernoulli => "bernoulli",
            WeightSource::Markov => "markov",
            WeightSource::Parry => "parry",
            WeightSource::Periodic => "periodic",
            WeightSource::Custom => "custom",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConsistencyDefects {
    /// `max_I |w(I) − Σ_j w(Ij)|`.
    pub refinement: f64,
    /// `max_I |w(I) − Σ_i w(iI)|`.
    pub shift: f64,
}

/// Level-`n` cylinder weights. Words absent from the table have weight 0.
#[derive(Debug, Clone, Serialize)]
pub struct CylinderWeights {
    level: usize,
    source: WeightSource,
    weights: BTreeMap<Word, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    defects: Option<ConsistencyDefects>,
}

impl CylinderWeights {
    /// Validates lengths, signs and total mass.
    pub fn new(level: usize, source: WeightSource, weights: BTreeMap<Word, f64>) -> Result<Self> {
        if level == 0 {
            return Err(Error::ZeroLength);
        }
        let mut total = 0.0;
        for (w, &v) in &weights {
            if w.len() != level {
                return Err(Error::WordLength { word: w.clone(), len: w.len(), expected: level });
            }
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::BadWeight { word: w.clone(), value: v });
            }
            total += v;
        }
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized(total));
        }
        Ok(Self { level, source, weights, defects: None })
    }

    /// Divides by the total mass first.
    pub fn normalized(level: usize, source: WeightSource, mut weights: BTreeMap<Word, f64>) -> Result<Self> {
        let total: f64 = weights.values().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::NotNormalized(total));
        }
        for v in weights.values_mut() {
            *v /= total;
        }
        Self::new(level, source, weights)
    }

    /// Product weights `p_{w_0} ⋯ p_{w_{n−1}}` on the full shift over `p.len()` symbols.
    pub fn bernoulli(p: &[f64], n: usize) -> Result<Self> {
        check_distribution(p)?;
        let sft = Sft::full_shift(p.len())?;
        let weights = sft
            .enumerate_words(n)?
            .into_iter()
            .map(|w| {
                let v = w.iter().map(|&s| p[s as usize]).product();
                (w, v)
            })
            .filter(|(_, v)| *v > 0.0)
            .collect();
        Self::normalized(n, WeightSource::Bernoulli, weights)
    }

    /// Stationary Markov chain with row-stochastic `transition`.
    pub fn markov(transition: &Matrix, n: usize) -> Result<Self> {
        let q = transition.dim();
        for i in 0..q {
            check_distribution(&transition.rows()[i])?;
        }
        let pi = stationary_distribution(transition)?;
        let support: Vec<Vec<i64>> =
            (0..q).map(|i| (0..q).map(|j| i64::from(transition.get(i, j) > 0.0)).collect()).collect();
        let sft = Sft::new(&support)?;
        let weights = sft
            .enumerate_words(n)?
            .into_iter()
            .map(|w| {
                let mut v = pi[w[0] as usize];
                for p in w.windows(2) {
                    v *= transition.get(p[0] as usize, p[1] as usize);
                }
                (w, v)
            })
            .filter(|(_, v)| *v > 0.0)
            .collect();
        Self::normalized(n, WeightSource::Markov, weights)
    }

    /// Measure of maximal entropy: `μ[w] = u_{w_0} v_{w_{n−1}} / λ^{n−1}`.
    pub fn parry(sft: &Sft, n: usize) -> Result<Self> {
        let data = PerronData::of(sft)?;
        let weights = sft
            .enumerate_words(n)?
            .into_iter()
            .map(|w| {
                let v = data.left[w[0] as usize] * data.right[w[n - 1] as usize] / data.lambda.powi(n as i32 - 1);
                (w, v)
            })
            .collect();
        Self::normalized(n, WeightSource::Parry, weights)
    }

    /// Uniform mass on the orbit of the periodic point `… w w w …`.
    pub fn periodic_orbit(w: &Word, n: usize) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::ZeroLength);
        }
        let p = w.len();
        let mut weights = BTreeMap::new();
        for shift in 0..p {
            let win = Word((0..n).map(|j| w[(shift + j) % p]).collect());
            *weights.entry(win).or_insert(0.0) += 1.0 / p as f64;
        }
        Self::normalized(n, WeightSource::Periodic, weights)
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn source(&self) -> WeightSource {
        self.source
    }

    pub fn with_source(mut self, source: WeightSource) -> Self {
        self.source = source;
        self
    }

    pub fn get(&self, w: &[Symbol]) -> f64 {
        self.weights.get(w).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, f64)> {
        self.weights.iter().map(|(w, &v)| (w, v))
    }

    pub fn total(&self) -> f64 {
        self.weights.values().sum()
    }

    pub fn defects(&self) -> Option<ConsistencyDefects> {
        self.defects
    }

    /// Distribution of the symbols on positions `[offset, offset + len)`.
    pub fn marginal(&self, offset: usize, len: usize) -> Result<CylinderWeights> {
        if offset + len > self.level {
            return Err(Error::LevelTooSmall { have: self.level, need: offset + len });
        }
        if len == 0 {
            return Err(Error::ZeroLength);
        }
        let mut out: BTreeMap<Word, f64> = BTreeMap::new();
        for (w, &v) in &self.weights {
            *out.entry(w.slice(offset, offset + len)).or_insert(0.0) += v;
        }
        Ok(CylinderWeights { level: len, source: self.source, weights: out, defects: None })
    }

    /// Refinement and shift defects against the next level.
    pub fn consistency_defects(&self, next: &CylinderWeights) -> Result<ConsistencyDefects> {
        if next.level != self.level + 1 {
            return Err(Error::LevelTooSmall { have: next.level, need: self.level + 1 });
        }
        let refined = next.marginal(0, self.level)?;
        let shifted = next.marginal(1, self.level)?;
        Ok(ConsistencyDefects { refinement: max_gap(self, &refined), shift: max_gap(self, &shifted) })
    }

    pub fn with_defects(mut self, next: &CylinderWeights) -> Result<Self> {
        self.defects = Some(self.consistency_defects(next)?);
        Ok(self)
    }
}

fn max_gap(a: &CylinderWeights, b: &CylinderWeights) -> f64 {
    let left = a.iter().map(|(w, v)| (v - b.get(w)).abs());
    let right = b.iter().map(|(w, v)| (v - a.get(w)).abs());
    left.chain(right).fold(0.0, f64::max)
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::EmptyAlphabet);
    }
    if let Some(&bad) = p.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::InvalidParameter(format!("probability {bad} out of range")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized(total));
    }
    Ok(())
}

/// Solves `π P = π`, `Σ π = 1` by replacing one balance equation.
fn stationary_distribution(p: &Matrix) -> Result<Vec<f64>> {
    let q = p.dim();
    let mut a = &p.transpose() - &Matrix::identity(q);
    for j in 0..q {
        a.set(q - 1, j, 1.0);
    }
    let inv = a.inverse()?;
    let mut rhs = vec![0.0; q];
    rhs[q - 1] = 1.0;
    Ok(inv.apply(&rhs))
}

/// Perron root and positive eigenvectors of `T`, scaled so `u · v = 1`.
#[derive(Debug, Clone, Serialize)]
pub struct PerronData {
    pub lambda: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl PerronData {
    pub fn of(sft: &Sft) -> Result<Self> {
        let t = Matrix::from_fn(sft.q(), |i, j| f64::from(sft.adjacency()[i][j]));
        let lambda = t.spectral_radius()?;
        let right: Vec<f64> = t.eigenvector(lambda).into_iter().map(f64::abs).collect();
        let mut left: Vec<f64> = t.transpose().eigenvector(lambda).into_iter().map(f64::abs).collect();
        let s: f64 = left.iter().zip(&right).map(|(a, b)| a * b).sum();
        for x in &mut left {
            *x /= s;
        }
        Ok(Self { lambda, left, right })
    }

    /// Gibbs constant of the Parry measure against `λ^{−n}`:
    /// `max_{a,b} max(λ u_a v_b, 1/(λ u_a v_b))` over all end symbols.
    pub fn parry_gibbs_constant(&self) -> f64 {
        let mut c: f64 = 1.0;
        for &u in &self.left {
            for &v in &self.right {
                let r = self.lambda * u * v;
                c = c.max(r).max(1.0 / r);
            }
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn bernoulli_products() {
        let b = CylinderWeights::bernoulli(&[1.0 / 3.0, 2.0 / 3.0], 3).unwrap();
        assert!((b.get(&w("011")) - 4.0 / 27.0).abs() < 1e-15);
        assert!((b.total() - 1.0).abs() < 1e-12);
        let m = b.marginal(1, 1).unwrap();
        assert!((m.get(&w("1")) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn markov_is_stationary() {
        let p = Matrix::from_rows(&[[0.9, 0.1], [0.3, 0.7]]).unwrap();
        let m = CylinderWeights::markov(&p, 4).unwrap();
        let first = m.marginal(0, 1).unwrap();
        let last = m.marginal(3, 1).unwrap();
        assert!((first.get(&w("0")) - 0.75).abs() < 1e-12);
        assert!((last.get(&w("0")) - 0.75).abs() < 1e-12);
        let next = CylinderWeights::markov(&p, 5).unwrap();
        let d = m.consistency_defects(&next).unwrap();
        assert!(d.refinement < 1e-15 && d.shift < 1e-15);
    }

    #[test]
    fn parry_golden_mean() {
        let sft = Sft::golden_mean();
        let data = PerronData::of(&sft).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((data.lambda - phi).abs() < 1e-12);
        assert!((data.parry_gibbs_constant() - 5f64.sqrt()).abs() < 1e-10);
        let p = CylinderWeights::parry(&sft, 4).unwrap();
        assert_eq!(p.len(), 8);
        let next = CylinderWeights::parry(&sft, 5).unwrap();
        let d = p.consistency_defects(&next).unwrap();
        assert!(d.refinement < 1e-14 && d.shift < 1e-14);
    }

    #[test]
    fn periodic_orbit_masses() {
        let p = CylinderWeights::periodic_orbit(&w("01"), 3).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.get(&w("010")), 0.5);
        assert_eq!(p.get(&w("101")), 0.5);
    }

    #[test]
    fn validation() {
        let bad = BTreeMap::from([(w("0"), 0.5)]);
        assert!(matches!(CylinderWeights::new(1, WeightSource::Custom, bad), Err(Error::NotNormalized(_))));
        let neg = BTreeMap::from([(w("0"), 1.5), (w("1"), -0.5)]);
        assert!(matches!(CylinderWeights::new(1, WeightSource::Custom, neg), Err(Error::BadWeight { .. })));
        let len = BTreeMap::from([(w("01"), 1.0)]);
        assert!(matches!(CylinderWeights::new(1, WeightSource::Custom, len), Err(Error::WordLength { .. })));
    }
}
