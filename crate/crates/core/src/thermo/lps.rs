//! Comparison of level-`2n` weights with the product of their half marginals.

use serde::Serialize;

use super::weights::CylinderWeights;
use crate::error::{Error, Result};
use crate::sft::Word;

/// Normalization slack on the `C²` bound.
pub const LPS_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct LpsReport {
    pub n: usize,
    pub pairs: usize,
    /// `w₂(JI) / (w⁻(J) w⁺(I))` extremes.
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub argmax: (Word, Word),
    pub argmin: (Word, Word),
    /// Same table with the two marginals swapped: `w₂(JI) / (w⁺(J) w⁻(I))`.
    pub transposed_max_ratio: f64,
    pub transposed_min_ratio: f64,
    pub gibbs_constant: f64,
    pub bound: f64,
    pub passed: bool,
}

/// `w⁻` is the marginal of the left half of each `2n`-word and `w⁺` the
/// marginal of the right half; either may be supplied.
pub fn lps_check(
    weights2: &CylinderWeights,
    plus: Option<&CylinderWeights>,
    minus: Option<&CylinderWeights>,
    gibbs_constant: f64,
) -> Result<LpsReport> {
    let level = weights2.level();
    if level % 2 != 0 {
        return Err(Error::InvalidParameter(format!("level {level} is not even")));
    }
    let n = level / 2;
    let own_plus;
    let plus = match plus {
        Some(p) => p,
        None => {
            own_plus = weights2.marginal(n, n)?;
            &own_plus
        }
    };
    let own_minus;
    let minus = match minus {
        Some(m) => m,
        None => {
            own_minus = weights2.marginal(0, n)?;
            &own_minus
        }
    };
    for m in [plus, minus] {
        if m.level() != n {
            return Err(Error::WordLength { word: Word::empty(), len: m.level(), expected: n });
        }
    }

    let empty = (Word::empty(), Word::empty());
    let mut report = LpsReport {
        n,
        pairs: 0,
        max_ratio: f64::NEG_INFINITY,
        min_ratio: f64::INFINITY,
        argmax: empty.clone(),
        argmin: empty,
        transposed_max_ratio: f64::NEG_INFINITY,
        transposed_min_ratio: f64::INFINITY,
        gibbs_constant,
        bound: gibbs_constant * gibbs_constant * (1.0 + LPS_SLACK),
        passed: false,
    };
    for (w, v) in weights2.iter() {
        let j = w.slice(0, n);
        let i = w.slice(n, 2 * n);
        let (wm_j, wp_i) = (minus.get(&j), plus.get(&i));
        let (wp_j, wm_i) = (plus.get(&j), minus.get(&i));
        for (word, m) in [(&j, wm_j), (&i, wp_i), (&j, wp_j), (&i, wm_i)] {
            if m == 0.0 {
                return Err(Error::ZeroMarginal(word.clone()));
            }
        }
        let r = v / (wm_j * wp_i);
        let t = v / (wp_j * wm_i);
        report.pairs += 1;
        if r > report.max_ratio {
            report.max_ratio = r;
            report.argmax = (j.clone(), i.clone());
        }
        if r < report.min_ratio {
            report.min_ratio = r;
            report.argmin = (j, i);
        }
        report.transposed_max_ratio = report.transposed_max_ratio.max(t);
        report.transposed_min_ratio = report.transposed_min_ratio.min(t);
    }
    report.passed = report.pairs > 0 && report.max_ratio <= report.bound;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sft::Sft;
    use crate::thermo::PerronData;

    #[test]
    fn product_measure_ratios_are_one() {
        let b = CylinderWeights::bernoulli(&[0.25, 0.75], 6).unwrap();
        let r = lps_check(&b, None, None, 1.0).unwrap();
        assert!((r.max_ratio - 1.0).abs() < 1e-12 && (r.min_ratio - 1.0).abs() < 1e-12);
        assert!(r.passed);
    }

    #[test]
    fn parry_band() {
        let sft = Sft::golden_mean();
        let c = PerronData::of(&sft).unwrap().parry_gibbs_constant();
        let p = CylinderWeights::parry(&sft, 8).unwrap();
        let r = lps_check(&p, None, None, c).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        // r = 1 / (λ v_b u_a) with b the last symbol of J and a the first of I.
        assert!((r.min_ratio - (phi * phi + 1.0) / phi.powi(3)).abs() < 1e-12);
        assert!((r.max_ratio - (phi * phi + 1.0) / (phi * phi)).abs() < 1e-12);
        assert!(r.passed && r.min_ratio >= 1.0 / (c * c));
    }

    #[test]
    fn odd_level_rejected() {
        let b = CylinderWeights::bernoulli(&[0.5, 0.5], 3).unwrap();
        assert!(lps_check(&b, None, None, 1.0).is_err());
    }
}
