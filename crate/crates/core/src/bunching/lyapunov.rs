//! Lyapunov exponents averaged exactly over a weight table.

use rayon::prelude::*;
use serde::Serialize;

use crate::cocycle::FiniteRangeCocycle;
use crate::error::{Error, Result};
use crate::thermo::CylinderWeights;

#[derive(Debug, Clone, Serialize)]
pub struct LyapunovReport {
    pub n: usize,
    pub level: usize,
    /// `λ̂_1 ≥ … ≥ λ̂_d`.
    pub exponents: Vec<f64>,
    /// `(1/n) Σ w log|det|`.
    pub log_det_mean: f64,
    /// `|Σ λ̂_i − log_det_mean|`.
    pub determinant_defect: f64,
}

/// `λ̂_i = (1/n) Σ_I w(I) log σ_i(𝒜^n along I)` with weights marginalized to level `n + k`.
pub fn lyapunov_spectrum(coc: &FiniteRangeCocycle, weights: &CylinderWeights, n: usize) -> Result<LyapunovReport> {
    if n == 0 {
        return Err(Error::ZeroLength);
    }
    let level = n + coc.radius();
    if weights.level() < level {
        return Err(Error::LevelTooSmall { have: weights.level(), need: level });
    }
    let marg = weights.marginal(0, level)?;
    let entries: Vec<_> = marg.iter().filter(|(_, v)| *v > 0.0).collect();
    let per_word = entries
        .par_iter()
        .map(|(w, v)| {
            let a = coc.word_product(w)?;
            let logs: Vec<f64> = a.singular_values().iter().map(|s| v * s.ln()).collect();
            let log_det = v * a.det().abs().ln();
            Ok((logs, log_det))
        })
        .collect::<Result<Vec<_>>>()?;
    let d = coc.dim();
    let mut sums = vec![0.0; d];
    let mut det_sum = 0.0;
    for (logs, log_det) in per_word {
        for (s, l) in sums.iter_mut().zip(logs) {
            *s += l;
        }
        det_sum += log_det;
    }
    let exponents: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
    let log_det_mean = det_sum / n as f64;
    let determinant_defect = (exponents.iter().sum::<f64>() - log_det_mean).abs();
    Ok(LyapunovReport { n, level, exponents, log_det_mean, determinant_defect })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::sft::Sft;

    #[test]
    fn constant_hyperbolic() {
        let c = FiniteRangeCocycle::constant(Sft::full_shift(2).unwrap(), 1.0, Matrix::diag(&[2.0, 0.5])).unwrap();
        let w = CylinderWeights::bernoulli(&[0.3, 0.7], 8).unwrap();
        for n in 1..=8 {
            let r = lyapunov_spectrum(&c, &w, n).unwrap();
            assert!((r.exponents[0] - 2f64.ln()).abs() < 1e-14);
            assert!((r.exponents[1] + 2f64.ln()).abs() < 1e-14);
            assert!(r.determinant_defect < 1e-12);
        }
    }

    #[test]
    fn scalar_bernoulli() {
        let c = FiniteRangeCocycle::locally_constant(Sft::full_shift(2).unwrap(), 1.0, vec![Matrix::scalar(1.0), Matrix::scalar(2.0)])
            .unwrap();
        let w = CylinderWeights::bernoulli(&[1.0 / 3.0, 2.0 / 3.0], 6).unwrap();
        let r = lyapunov_spectrum(&c, &w, 6).unwrap();
        assert!((r.exponents[0] - 2.0 / 3.0 * 2f64.ln()).abs() < 1e-14);
        assert!(lyapunov_spectrum(&c, &w, 7).is_err());
    }
}
