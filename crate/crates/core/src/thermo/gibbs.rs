//! Gibbs cylinder weights `w(I) ∝ e^{−nP} φ(I)`.

use std::collections::BTreeMap;

use serde::Serialize;

use super::log_sum_exp;
use super::weights::{CylinderWeights, WeightSource};
use crate::error::{Error, Result};
use crate::potential::WordPotential;

#[derive(Debug, Clone, Serialize)]
pub struct GibbsResult {
    pub n: usize,
    pub pressure: f64,
    /// `log Σ_I e^{−nP} φ(I)`.
    pub log_normalizer: f64,
    /// `max_I max(r, 1/r)` with `r = w(I) / (e^{−nP} φ(I))`.
    pub gibbs_constant: f64,
    pub weights: CylinderWeights,
}

/// Builds level-`n` weights; with `with_defects` also builds level `n + 1`
/// and stores both consistency defects.
pub fn gibbs_weights(pot: &WordPotential, n: usize, pressure: f64, with_defects: bool) -> Result<GibbsResult> {
    if !pressure.is_finite() {
        return Err(Error::InvalidParameter(format!("pressure {pressure} is not finite")));
    }
    let (weights, log_normalizer) = level_weights(pot, n, pressure)?;
    let weights = if with_defects {
        let (next, _) = level_weights(pot, n + 1, pressure)?;
        weights.with_defects(&next)?
    } else {
        weights
    };
    let gibbs_constant = gibbs_constant(&weights, pot, pressure)?;
    Ok(GibbsResult { n, pressure, log_normalizer, gibbs_constant, weights })
}

fn level_weights(pot: &WordPotential, n: usize, pressure: f64) -> Result<(CylinderWeights, f64)> {
    let logs = pot.log_values(n)?;
    let scaled: Vec<f64> = logs.iter().map(|(_, v)| v - n as f64 * pressure).collect();
    let log_norm = log_sum_exp(&scaled);
    let map: BTreeMap<_, _> = logs.into_iter().zip(&scaled).map(|((w, _), s)| (w, (s - log_norm).exp())).collect();
    Ok((CylinderWeights::normalized(n, WeightSource::Gibbs, map)?, log_norm))
}

/// Empirical Gibbs constant of arbitrary level-`n` weights against `e^{−nP} φ`.
pub fn gibbs_constant(weights: &CylinderWeights, pot: &WordPotential, pressure: f64) -> Result<f64> {
    let n = weights.level() as f64;
    let mut worst: f64 = 0.0;
    for (w, v) in weights.iter() {
        if v == 0.0 {
            return Err(Error::BadWeight { word: w.clone(), value: v });
        }
        let log_r = v.ln() - (pot.log_value(w)? - n * pressure);
        worst = worst.max(log_r.abs());
    }
    Ok(worst.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::FiniteRangeCocycle;
    use crate::linalg::Matrix;
    use crate::potential::PotentialKind;
    use crate::sft::{Sft, Word};

    #[test]
    fn scalar_gibbs_is_bernoulli() {
        let c = FiniteRangeCocycle::locally_constant(Sft::full_shift(2).unwrap(), 1.0, vec![Matrix::scalar(1.0), Matrix::scalar(2.0)])
            .unwrap();
        let pot = WordPotential::from_cocycle(c, PotentialKind::Norm).unwrap();
        let g = gibbs_weights(&pot, 6, 3f64.ln(), true).unwrap();
        let b = CylinderWeights::bernoulli(&[1.0 / 3.0, 2.0 / 3.0], 6).unwrap();
        for (w, v) in b.iter() {
            assert!((g.weights.get(w) - v).abs() < 1e-15);
        }
        assert!((g.gibbs_constant - 1.0).abs() < 1e-12);
        let d = g.weights.defects().unwrap();
        assert!(d.refinement < 1e-12 && d.shift < 1e-12);
    }

    #[test]
    fn identity_gives_uniform() {
        let c = FiniteRangeCocycle::identity(Sft::full_shift(2).unwrap(), 2).unwrap();
        let pot = WordPotential::from_cocycle(c, PotentialKind::Norm).unwrap();
        let g = gibbs_weights(&pot, 4, 2f64.ln(), false).unwrap();
        let w: Word = "0110".parse().unwrap();
        assert!((g.weights.get(&w) - 1.0 / 16.0).abs() < 1e-15);
        assert!((g.gibbs_constant - 1.0).abs() < 1e-12);
    }
}
