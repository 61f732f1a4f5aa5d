//! Markov-inequality filter: if `μ(B) ≥ 1 − ε` then the atoms meeting `B` in
//! less than a `(1 − δ)` share of their mass carry total mass at most `ε/δ`.

use serde::Serialize;

use crate::error::{Error, Result};

const MASS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct FilterReport {
    pub eps: f64,
    pub delta: f64,
    /// Indices of atoms with `μ(A ∩ B) < (1 − δ) μ(A)`.
    pub bad_atoms: Vec<usize>,
    pub bad_mass: f64,
    pub bound: f64,
    pub violated: bool,
}

/// `atoms[i] = μ(A_i)`, `intersections[i] = μ(A_i ∩ B)`, `b_mass = μ(B)`.
pub fn eps_ae_filter(atoms: &[f64], intersections: &[f64], b_mass: f64, delta: f64) -> Result<FilterReport> {
    if atoms.len() != intersections.len() {
        return Err(Error::InconsistentMasses(format!(
            "{} atoms but {} intersections",
            atoms.len(),
            intersections.len()
        )));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} outside (0, 1]")));
    }
    let total: f64 = atoms.iter().sum();
    if (total - 1.0).abs() > MASS_TOL {
        return Err(Error::InconsistentMasses(format!("atom masses sum to {total}")));
    }
    let inter_total: f64 = intersections.iter().sum();
    if (inter_total - b_mass).abs() > MASS_TOL || !(0.0..=1.0 + MASS_TOL).contains(&b_mass) {
        return Err(Error::InconsistentMasses(format!("intersections sum to {inter_total}, mu(B) = {b_mass}")));
    }
    for (i, (&a, &x)) in atoms.iter().zip(intersections).enumerate() {
        if a < 0.0 || x < 0.0 || x > a + MASS_TOL {
            return Err(Error::InconsistentMasses(format!("atom {i}: mass {a}, intersection {x}")));
        }
    }
    let eps = (1.0 - b_mass).max(0.0);
    let bad_atoms: Vec<usize> = (0..atoms.len()).filter(|&i| intersections[i] < (1.0 - delta) * atoms[i]).collect();
    let bad_mass: f64 = bad_atoms.iter().map(|&i| atoms[i]).sum();
    let bound = eps / delta;
    let violated = bad_mass > bound + MASS_TOL;
    debug_assert!(!violated, "filter bound violated: {bad_mass} > {bound}");
    Ok(FilterReport { eps, delta, bad_atoms, bad_mass, bound, violated })
}
