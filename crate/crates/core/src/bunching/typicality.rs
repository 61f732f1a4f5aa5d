//! Pinching and twisting at a periodic point and one homoclinic loop.

use rayon::prelude::*;
use serde::Serialize;

use super::holonomy::{holonomy, Side};
use crate::cocycle::FiniteRangeCocycle;
use crate::error::{Error, Result};
use crate::linalg::{orthonormal_basis, Matrix};
use crate::point::PointSpec;
use crate::sft::Word;

/// Minimum relative gap between consecutive eigenvalue moduli.
pub const PINCHING_GAP_TOL: f64 = 1e-8;
/// Minimum sine of the smallest principal angle.
pub const GENERAL_POSITION_TOL: f64 = 1e-9;
/// Largest exterior-power dimension for the subset enumeration.
const MAX_TWIST_DIM: usize = 12;

#[derive(Debug, Clone, Serialize)]
pub struct TypicalityLevel {
    pub t: usize,
    /// Eigenvalues `(re, im)` of the `t`-th compound of the period matrix.
    pub eigenvalues: Vec<(f64, f64)>,
    pub min_relative_gap: f64,
    pub eigenvector_condition: Option<f64>,
    pub pinching: bool,
    /// Smallest `sin θ` over index sets `I, J` with `|I| + |J| ≤ dim`.
    pub margin: Option<f64>,
    pub worst_sets: Option<(Vec<usize>, Vec<usize>)>,
    pub twisting: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TypicalityReport {
    pub periodic_word: Word,
    pub bridge: Word,
    pub homoclinic: PointSpec,
    pub period_matrix: Matrix,
    pub psi: Matrix,
    pub holonomy_error: f64,
    pub levels: Vec<TypicalityLevel>,
    pub pinching: bool,
    pub twisting: bool,
    pub typical: bool,
}

/// `ψ = H^s_{z,p} H^u_{p,z}` for `z` reading `bridge` on `[0, |bridge|)`
/// and the periodic point `p` elsewhere; verdicts for every `1 ≤ t ≤ d − 1`.
pub fn typicality_report(coc: &FiniteRangeCocycle, p: &Word, bridge: &Word, n_max: usize) -> Result<TypicalityReport> {
    let sft = coc.sft();
    if !sft.is_cyclically_admissible(p) {
        return Err(Error::Inadmissible(p.clone()));
    }
    let point = PointSpec::periodic(p)?;
    let z = PointSpec::homoclinic(p, bridge)?;
    z.check_admissible(sft)?;
    let period_matrix = coc.periodic_product(p)?;

    // Enough steps for every differing window to be passed.
    let depth = n_max.max(bridge.len() + coc.radius() + 2);
    let hs = holonomy(coc, &z, &point, Side::Stable, depth)?;
    let hu = holonomy(coc, &point, &z, Side::Unstable, depth)?;
    let psi = &hs.estimate * &hu.estimate;
    let holonomy_error = hs.error_estimate + hu.error_estimate;

    let d = coc.dim();
    let levels = (1..d)
        .into_par_iter()
        .map(|t| level_report(&period_matrix.compound(t)?, &psi.compound(t)?, t))
        .collect::<Result<Vec<_>>>()?;
    let pinching = levels.iter().all(|l| l.pinching);
    let twisting = levels.iter().all(|l| l.twisting);
    Ok(TypicalityReport {
        periodic_word: p.clone(),
        bridge: bridge.clone(),
        homoclinic: z,
        period_matrix,
        psi,
        holonomy_error,
        levels,
        pinching,
        twisting,
        typical: pinching && twisting,
    })
}

fn level_report(pm: &Matrix, psi: &Matrix, t: usize) -> Result<TypicalityLevel> {
    let eigenvalues = pm.eigenvalues()?;
    let moduli: Vec<f64> = eigenvalues.iter().map(|(re, im)| re.hypot(*im)).collect();
    let min_relative_gap = moduli.windows(2).map(|w| (w[0] - w[1]) / w[0]).fold(f64::INFINITY, f64::min);
    let pinching = min_relative_gap >= PINCHING_GAP_TOL;
    let mut level = TypicalityLevel {
        t,
        eigenvalues: eigenvalues.clone(),
        min_relative_gap,
        eigenvector_condition: None,
        pinching,
        margin: None,
        worst_sets: None,
        twisting: false,
    };
    if !pinching {
        return Ok(level);
    }
    let dim = pm.dim();
    if dim > MAX_TWIST_DIM {
        return Err(Error::DimensionTooLarge(dim));
    }
    // Distinct moduli force real eigenvalues.
    let vectors: Vec<Vec<f64>> = eigenvalues.iter().map(|(re, _)| pm.eigenvector(*re)).collect();
    let vmat = Matrix::from_fn(dim, |i, j| vectors[j][i]);
    let sv = vmat.singular_values();
    level.eigenvector_condition = Some(sv[0] / sv[dim - 1]);
    let images: Vec<Vec<f64>> = vectors.iter().map(|v| psi.apply(v)).collect();

    let mut worst = (f64::INFINITY, Vec::new(), Vec::new());
    for mask_i in 1u32..(1 << dim) {
        let size_i = mask_i.count_ones() as usize;
        for mask_j in 1u32..(1 << dim) {
            if size_i + mask_j.count_ones() as usize > dim {
                continue;
            }
            let (set_i, set_j) = (bits(mask_i, dim), bits(mask_j, dim));
            let a: Vec<Vec<f64>> = set_i.iter().map(|&i| images[i].clone()).collect();
            let b: Vec<Vec<f64>> = set_j.iter().map(|&j| vectors[j].clone()).collect();
            let s = min_principal_sine(&a, &b, dim);
            if s < worst.0 {
                worst = (s, set_i, set_j);
            }
        }
    }
    if dim == 1 {
        // No pair of nonempty sets fits; the condition is vacuous.
        worst.0 = 1.0;
    }
    level.twisting = worst.0 > GENERAL_POSITION_TOL;
    level.margin = Some(worst.0);
    if !worst.1.is_empty() {
        level.worst_sets = Some((worst.1, worst.2));
    }
    Ok(level)
}

fn bits(mask: u32, dim: usize) -> Vec<usize> {
    (0..dim).filter(|i| mask & (1 << i) != 0).collect()
}

/// `sin` of the smallest principal angle between `span a` and `span b`:
/// the smallest singular value of `(I − Q_b Q_bᵀ) Q_a`.
fn min_principal_sine(a: &[Vec<f64>], b: &[Vec<f64>], dim: usize) -> f64 {
    let qa = orthonormal_basis(a, 1e-14);
    let qb = orthonormal_basis(b, 1e-14);
    if qa.len() < a.len() {
        // ψ maps independent vectors to dependent ones only if singular.
        return 0.0;
    }
    let residual: Vec<Vec<f64>> = qa
        .iter()
        .map(|v| {
            let mut r = v.clone();
            for u in &qb {
                let c: f64 = r.iter().zip(u).map(|(x, y)| x * y).sum();
                for (ri, ui) in r.iter_mut().zip(u) {
                    *ri -= c * ui;
                }
            }
            r
        })
        .collect();
    // Zero-padded square matrix; padding only adds zero singular values.
    let m = Matrix::from_fn(dim, |i, j| if j < residual.len() { residual[j][i] } else { 0.0 });
    m.singular_values()[residual.len() - 1]
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::sft::Sft;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn constant_diagonal_pinches_but_does_not_twist() {
        let c = FiniteRangeCocycle::constant(Sft::full_shift(2).unwrap(), 1.0, Matrix::diag(&[2.0, 1.0])).unwrap();
        let r = typicality_report(&c, &w("0"), &w("1"), 20).unwrap();
        assert!(r.pinching);
        assert!(r.psi.is_identity());
        assert!(!r.twisting);
        assert!(r.levels[0].margin.unwrap() < 1e-12);
    }

    #[test]
    fn rotation_fails_pinching() {
        let c = FiniteRangeCocycle::constant(Sft::full_shift(2).unwrap(), 1.0, Matrix::rotation(std::f64::consts::FRAC_PI_2))
            .unwrap();
        let r = typicality_report(&c, &w("0"), &w("1"), 20).unwrap();
        assert!(!r.pinching && !r.typical);
    }

    #[test]
    fn locally_constant_loop_is_bridge_product() {
        let a0 = Matrix::diag(&[2.0, 1.0]);
        let a1 = Matrix::rotation(0.3);
        let c = FiniteRangeCocycle::locally_constant(Sft::full_shift(2).unwrap(), 1.0, vec![a0.clone(), a1.clone()])
            .unwrap();
        let r = typicality_report(&c, &w("0"), &w("1"), 20).unwrap();
        let expected = &a0.inverse().unwrap() * &a1;
        assert!(r.psi.dist(&expected) < 1e-12);
        assert!(r.typical);
    }

    #[test]
    fn radius_one_twisting() {
        let sft = Sft::full_shift(2).unwrap();
        let table: BTreeMap<Word, Matrix> = sft
            .enumerate_words(2)
            .unwrap()
            .into_iter()
            .map(|word| {
                let m = if word == w("00") { Matrix::diag(&[1.2, 1.0]) } else { Matrix::rotation(0.2 * f64::from(word[0] + 2 * word[1])) };
                (word, m)
            })
            .collect();
        let c = FiniteRangeCocycle::new(sft, 2, 1, 1.0, table).unwrap();
        let r = typicality_report(&c, &w("0"), &w("1"), 30).unwrap();
        assert!(r.pinching && r.twisting, "{r:?}");
    }

    #[test]
    fn principal_sines() {
        let e1 = vec![1.0, 0.0, 0.0];
        let e2 = vec![0.0, 1.0, 0.0];
        let diag = vec![1.0, 1.0, 0.0];
        assert!(min_principal_sine(&[e1.clone()], &[e1.clone()], 3) < 1e-15);
        assert!((min_principal_sine(&[e1.clone()], &[e2.clone()], 3) - 1.0).abs() < 1e-15);
        assert!((min_principal_sine(&[diag], &[e1], 3) - 0.5f64.sqrt()).abs() < 1e-15);
    }
}
