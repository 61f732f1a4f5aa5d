//! Pressure from partition sums `Z_n = Σ_{I ∈ 𝓛(n)} φ(I)`.

use rayon::prelude::*;
use serde::Serialize;

use super::log_sum_exp;
use crate::error::{Error, Result};
use crate::linalg::log_phi_s_from_sigma;
use crate::potential::{PotentialKind, WordPotential};
use crate::sft::Word;

/// Periodic orbits longer than this are not used for the lower bound.
const MAX_LOWER_BOUND_PERIOD: usize = 6;

#[derive(Debug, Clone, Serialize)]
pub struct PressureReport {
    pub n_max: usize,
    /// `log Z_n` for `n = 1 … n_max`.
    pub log_z: Vec<f64>,
    /// `P_n = (1/n) log Z_n`.
    pub estimates: Vec<f64>,
    /// `min_n P_n`.
    pub upper_bound: f64,
    pub upper_bound_n: usize,
    /// Best periodic-orbit value; absent for word-table potentials.
    pub lower_bound: Option<f64>,
    pub lower_bound_word: Option<Word>,
    /// Aitken Δ² on the increments `log Z_n − log Z_{n−1}`, clamped to the bounds.
    pub extrapolated: f64,
    /// `max_{m+n ≤ n_max} (log Z_{m+n} − log Z_m − log Z_n)`; nonpositive when `log Z` is subadditive.
    pub fekete_defect: f64,
}

pub fn pressure_estimate(pot: &WordPotential, n_max: usize) -> Result<PressureReport> {
    if n_max < 2 {
        return Err(Error::InvalidParameter(format!("n_max = {n_max} must be at least 2")));
    }
    let log_z = (1..=n_max)
        .map(|n| {
            let logs: Vec<f64> = pot.log_values(n)?.into_iter().map(|(_, v)| v).collect();
            Ok(log_sum_exp(&logs))
        })
        .collect::<Result<Vec<f64>>>()?;
    let estimates: Vec<f64> = log_z.iter().enumerate().map(|(i, z)| z / (i + 1) as f64).collect();
    let (upper_idx, upper_bound) = estimates
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, p)| if p < best.1 { (i, p) } else { best });

    let (lower_bound, lower_bound_word) = match periodic_lower_bound(pot, n_max.min(MAX_LOWER_BOUND_PERIOD))? {
        Some((v, w)) => (Some(v), Some(w)),
        None => (None, None),
    };

    let mut increments = Vec::with_capacity(n_max);
    let mut prev = 0.0;
    for &z in &log_z {
        increments.push(z - prev);
        prev = z;
    }
    let mut extrapolated = aitken_last(&increments);
    extrapolated = extrapolated.min(upper_bound);
    if let Some(lo) = lower_bound {
        extrapolated = extrapolated.max(lo);
    }

    let mut fekete_defect = f64::NEG_INFINITY;
    for m in 1..n_max {
        for n in 1..=(n_max - m) {
            let gap = log_z[m + n - 1] - log_z[m - 1] - log_z[n - 1];
            fekete_defect = fekete_defect.max(gap);
        }
    }

    Ok(PressureReport {
        n_max,
        log_z,
        estimates,
        upper_bound,
        upper_bound_n: upper_idx + 1,
        lower_bound,
        lower_bound_word,
        extrapolated,
        fekete_defect,
    })
}

/// Aitken Δ² on the last three terms; falls back to the last term.
fn aitken_last(seq: &[f64]) -> f64 {
    let n = seq.len();
    let last = seq[n - 1];
    if n < 3 {
        return last;
    }
    let (a, b, c) = (seq[n - 3], seq[n - 2], last);
    let denom = c - 2.0 * b + a;
    if denom == 0.0 || !denom.is_finite() {
        return last;
    }
    let acc = c - (c - b) * (c - b) / denom;
    if acc.is_finite() {
        acc
    } else {
        last
    }
}

/// `max_w (1/p) log φ^s(moduli of eigenvalues of 𝒜^p(w))` over periodic words of period ≤ `p_max`.
fn periodic_lower_bound(pot: &WordPotential, p_max: usize) -> Result<Option<(f64, Word)>> {
    let (Some(coc), Some(kind)) = (pot.cocycle(), pot.kind()) else {
        return Ok(None);
    };
    let s = match kind {
        PotentialKind::Norm => 1.0,
        PotentialKind::SingularValue(s) => s,
    };
    let mut best: Option<(f64, Word)> = None;
    for p in 1..=p_max {
        let words = pot.sft().periodic_words(p)?;
        let values = words
            .par_iter()
            .map(|w| {
                let moduli: Vec<f64> =
                    coc.periodic_product(w)?.eigenvalues()?.iter().map(|(re, im)| re.hypot(*im)).collect();
                Ok(log_phi_s_from_sigma(&moduli, s) / p as f64)
            })
            .collect::<Result<Vec<f64>>>()?;
        for (w, v) in words.into_iter().zip(values) {
            if best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((v, w));
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::FiniteRangeCocycle;
    use crate::linalg::Matrix;
    use crate::sft::Sft;

    #[test]
    fn scalar_pressure_is_log3() {
        let c = FiniteRangeCocycle::locally_constant(Sft::full_shift(2).unwrap(), 1.0, vec![Matrix::scalar(1.0), Matrix::scalar(2.0)])
            .unwrap();
        let pot = WordPotential::from_cocycle(c, PotentialKind::Norm).unwrap();
        let r = pressure_estimate(&pot, 8).unwrap();
        for p in &r.estimates {
            assert!((p - 3f64.ln()).abs() < 1e-12);
        }
        assert!((r.extrapolated - 3f64.ln()).abs() < 1e-12);
        // The best periodic orbit is the fixed point at 1.
        assert!((r.lower_bound.unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!(r.fekete_defect < 1e-12);
    }

    #[test]
    fn golden_mean_identity() {
        let c = FiniteRangeCocycle::identity(Sft::golden_mean(), 2).unwrap();
        let pot = WordPotential::from_cocycle(c, PotentialKind::Norm).unwrap();
        let r = pressure_estimate(&pot, 14).unwrap();
        let target = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        assert!(r.upper_bound >= target);
        assert!((r.extrapolated - target).abs() < 1e-6);
        assert_eq!(r.lower_bound, Some(0.0));
    }

    #[test]
    fn aitken_on_geometric_sequence() {
        let seq: Vec<f64> = (0..6).map(|n| 1.0 + 0.5f64.powi(n)).collect();
        assert!((aitken_last(&seq) - 1.0).abs() < 1e-14);
        assert_eq!(aitken_last(&[2.0, 2.0, 2.0]), 2.0);
    }
}
