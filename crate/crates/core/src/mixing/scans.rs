//! Finite-depth scans for the K-property and very weak Bernoullicity.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::dbar::{dbar, LabelDistribution};
use super::partition::{joined_labels, joined_window, Frame, Label, Partition, TestSet, MASS_FLOOR};
use crate::error::{Error, Result};
use crate::thermo::CylinderWeights;

#[derive(Debug, Clone, Serialize)]
pub struct KAtomRecord {
    pub labels: Vec<Label>,
    pub mass: f64,
    /// `max_E |μ(E | A) − μ(E)|` over the test sets.
    pub worst_deviation: f64,
    pub worst_test: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct KScanReport {
    pub m1: i64,
    pub m2: i64,
    pub eps: f64,
    pub test_masses: Vec<f64>,
    pub atoms: Vec<KAtomRecord>,
    pub failing_mass: f64,
    pub worst_deviation: f64,
    pub passed: bool,
}

fn check_scan_args(m1: i64, m2: i64, eps: f64) -> Result<()> {
    if m1 < 1 || m2 < m1 {
        return Err(Error::InvalidParameter(format!("need 1 <= m1 <= m2, got m1 = {m1}, m2 = {m2}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} outside (0, 1)")));
    }
    Ok(())
}

/// Atoms `A` of `⋁_{i=m1}^{m2} σ^i ξ` on which some test set deviates from
/// independence by more than `eps`; passes when their total mass is at most `eps`.
pub fn k_scan(model: &CylinderWeights, xi: &Partition, tests: &[TestSet], m1: i64, m2: i64, eps: f64) -> Result<KScanReport> {
    check_scan_args(m1, m2, eps)?;
    if tests.is_empty() {
        return Err(Error::InvalidParameter("no test sets".into()));
    }
    let mut windows = vec![joined_window(xi, m1, m2)];
    windows.extend(tests.iter().map(|t| (t.a, t.b)));
    let frame = Frame::covering(&windows, model.level())?;
    let weights = frame.weights(model)?;

    let mut test_masses = vec![0.0; tests.len()];
    // Per atom: total mass and mass inside each test set.
    let mut joint: BTreeMap<Vec<Label>, (f64, Vec<f64>)> = BTreeMap::new();
    for (w, v) in weights.iter() {
        let labels = joined_labels(xi, &frame, w, m1, m2)?;
        let entry = joint.entry(labels).or_insert_with(|| (0.0, vec![0.0; tests.len()]));
        entry.0 += v;
        for (t, test) in tests.iter().enumerate() {
            if test.words.contains(frame.read(w, test.a, test.b)) {
                entry.1[t] += v;
                test_masses[t] += v;
            }
        }
    }

    let mut atoms = Vec::new();
    let mut failing_mass = 0.0;
    let mut worst_deviation: f64 = 0.0;
    for (labels, (mass, inside)) in joint {
        if mass < MASS_FLOOR {
            continue;
        }
        let (worst_test, dev) = inside
            .iter()
            .zip(&test_masses)
            .map(|(e, m)| (e / mass - m).abs())
            .enumerate()
            .fold((0, 0.0), |acc, (t, d)| if d > acc.1 { (t, d) } else { acc });
        if dev > eps {
            failing_mass += mass;
        }
        worst_deviation = worst_deviation.max(dev);
        atoms.push(KAtomRecord { labels, mass, worst_deviation: dev, worst_test });
    }
    Ok(KScanReport {
        m1,
        m2,
        eps,
        test_masses,
        atoms,
        failing_mass,
        worst_deviation,
        passed: failing_mass <= eps,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VwbAtomRecord {
    pub labels: Vec<Label>,
    pub mass: f64,
    pub dbar: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VwbScanReport {
    /// Length of the future label sequences.
    pub n: usize,
    pub m1: i64,
    pub m2: i64,
    pub eps: f64,
    pub atoms: Vec<VwbAtomRecord>,
    pub bad_mass: f64,
    pub worst_dbar: f64,
    pub passed: bool,
    /// Always true: only one `n` and one past window are examined.
    pub finite_depth: bool,
}

/// Compares the law of the future labels `ξ(σ^i x)`, `1 ≤ i ≤ n`, given each
/// past atom of `⋁_{i=m1}^{m2} σ^i ξ`, with the unconditional law in d-bar.
pub fn vwb_scan(model: &CylinderWeights, xi: &Partition, n: usize, m1: i64, m2: i64, eps: f64) -> Result<VwbScanReport> {
    check_scan_args(m1, m2, eps)?;
    if n == 0 {
        return Err(Error::ZeroLength);
    }
    let future = (xi.a + 1, xi.b + n as i64);
    let frame = Frame::covering(&[joined_window(xi, m1, m2), future], model.level())?;
    let weights = frame.weights(model)?;

    let mut unconditional: BTreeMap<Vec<Label>, f64> = BTreeMap::new();
    let mut conditional: BTreeMap<Vec<Label>, (f64, BTreeMap<Vec<Label>, f64>)> = BTreeMap::new();
    for (w, v) in weights.iter() {
        let past = joined_labels(xi, &frame, w, m1, m2)?;
        let fut: Vec<Label> =
            (1..=n as i64).map(|i| xi.label(frame.read(w, xi.a + i, xi.b + i))).collect::<Result<_>>()?;
        *unconditional.entry(fut.clone()).or_insert(0.0) += v;
        let entry = conditional.entry(past).or_default();
        entry.0 += v;
        *entry.1.entry(fut).or_insert(0.0) += v;
    }
    let target = LabelDistribution::normalized(n, unconditional)?;

    let atoms = conditional
        .into_par_iter()
        .filter(|(_, (mass, _))| *mass >= MASS_FLOOR)
        .map(|(labels, (mass, dist))| {
            let cond = LabelDistribution::normalized(n, dist)?;
            Ok(VwbAtomRecord { labels, mass, dbar: dbar(&cond, &target)?.value })
        })
        .collect::<Result<Vec<_>>>()?;
    let bad_mass: f64 = atoms.iter().filter(|a| a.dbar > eps).map(|a| a.mass).sum();
    let worst_dbar = atoms.iter().map(|a| a.dbar).fold(0.0, f64::max);
    Ok(VwbScanReport {
        n,
        m1,
        m2,
        eps,
        atoms,
        bad_mass,
        worst_dbar,
        passed: bad_mass <= eps,
        finite_depth: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::sft::Sft;

    #[test]
    fn bernoulli_is_independent() {
        let sft = Sft::full_shift(2).unwrap();
        let xi = Partition::zero_coordinate(&sft).unwrap();
        let model = CylinderWeights::bernoulli(&[0.3, 0.7], 8).unwrap();
        let tests = TestSet::all_atoms(&xi);
        let k = k_scan(&model, &xi, &tests, 1, 3, 0.01).unwrap();
        assert!(k.passed && k.worst_deviation < 1e-12);
        let v = vwb_scan(&model, &xi, 3, 1, 3, 0.01).unwrap();
        assert!(v.passed && v.worst_dbar < 1e-12);
        assert!(v.finite_depth);
    }

    #[test]
    fn periodic_orbit_fails() {
        let sft = Sft::full_shift(2).unwrap();
        let xi = Partition::zero_coordinate(&sft).unwrap();
        let model = CylinderWeights::periodic_orbit(&"01".parse().unwrap(), 8).unwrap();
        let k = k_scan(&model, &xi, &TestSet::all_atoms(&xi), 1, 2, 0.1).unwrap();
        assert!(!k.passed);
        assert!((k.worst_deviation - 0.5).abs() < 1e-12);
        let v = vwb_scan(&model, &xi, 4, 1, 2, 0.1).unwrap();
        assert!(!v.passed);
        assert!((v.worst_dbar - 0.5).abs() < 1e-12);
    }

    #[test]
    fn markov_dependence_decays() {
        let sft = Sft::full_shift(2).unwrap();
        let xi = Partition::zero_coordinate(&sft).unwrap();
        let t = Matrix::from_rows(&[vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let model = CylinderWeights::markov(&t, 12).unwrap();
        let near = vwb_scan(&model, &xi, 3, 1, 2, 0.01).unwrap();
        let far = vwb_scan(&model, &xi, 3, 6, 7, 0.01).unwrap();
        assert!(far.worst_dbar < near.worst_dbar);
        assert!(!near.passed);
    }

    #[test]
    fn bad_arguments() {
        let sft = Sft::full_shift(2).unwrap();
        let xi = Partition::zero_coordinate(&sft).unwrap();
        let model = CylinderWeights::bernoulli(&[0.5, 0.5], 4).unwrap();
        assert!(k_scan(&model, &xi, &[], 1, 2, 0.1).is_err());
        assert!(vwb_scan(&model, &xi, 2, 0, 2, 0.1).is_err());
        assert!(vwb_scan(&model, &xi, 2, 1, 2, 1.5).is_err());
        assert!(matches!(vwb_scan(&model, &xi, 4, 1, 2, 0.1), Err(Error::WindowOverflow { .. })));
    }
}
