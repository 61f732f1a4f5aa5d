//! Quasi-multiplicativity: `φ(IKJ) ≥ c φ(I) φ(J)` with `|K| ≤ k`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::WordPotential;
use crate::sft::Word;

/// Constants below this are reported as a failure at the audited depth.
pub const QM_FAILURE_THRESHOLD: f64 = 1e-12;

/// Best connector for one ordered pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QmRecord {
    pub left: Word,
    pub right: Word,
    pub connector: Word,
    /// `φ(IKJ) / (φ(I) φ(J))`.
    pub ratio: f64,
    /// `min(ratio, 1)`, the quantity maximized over connectors.
    pub capped: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct QmCertificate {
    pub n: usize,
    pub k_max: usize,
    pub c: f64,
    /// Longest connector chosen over all pairs.
    pub k: usize,
    pub worst: QmRecord,
    pub failed: bool,
    pub records: Vec<QmRecord>,
}

impl QmCertificate {
    /// Re-checks every record against the returned constant.
    pub fn revalidate(&self, pot: &WordPotential) -> Result<bool> {
        for r in &self.records {
            let joined = r.left.concat(&r.connector).concat(&r.right);
            let lhs = pot.log_value(&joined)?;
            let rhs = self.c.ln() + pot.log_value(&r.left)? + pot.log_value(&r.right)?;
            if lhs < rhs - 1e-12 || r.connector.len() > self.k {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// For every ordered pair of `n`-words, maximizes `min(ratio, 1)` over
/// connectors of length `0 ..= k_max`; shorter connectors win ties, so a
/// pair already multiplicative keeps the empty connector.
pub fn qm_search(pot: &WordPotential, n: usize, k_max: usize) -> Result<QmCertificate> {
    let words: Vec<(Word, f64)> = pot.log_values(n)?;
    let sft = pot.sft();
    // Connectors grouped by (first symbol after I's last symbol, length); computed once per symbol.
    let mut connectors: HashMap<u8, Vec<Vec<Word>>> = HashMap::new();
    for (w, _) in &words {
        let last = w[n - 1];
        if let std::collections::hash_map::Entry::Vacant(e) = connectors.entry(last) {
            let lists = (0..=k_max).map(|len| sft.extensions(&[last], len)).collect::<Result<Vec<_>>>()?;
            e.insert(lists);
        }
    }

    let records = words
        .par_iter()
        .flat_map_iter(|(left, log_l)| words.iter().map(move |(right, log_r)| (left, *log_l, right, *log_r)))
        .map(|(left, log_l, right, log_r)| {
            let lists = &connectors[&left[n - 1]];
            let mut best: Option<(f64, &Word)> = None;
            for list in lists {
                for k in list {
                    let tail = k.last().copied().unwrap_or(left[n - 1]);
                    if !sft.allowed(tail, right[0]) {
                        continue;
                    }
                    let joined = left.concat(k).concat(right);
                    let lr = pot.log_value(&joined)? - log_l - log_r;
                    if best.is_none_or(|(b, _)| lr.min(0.0) > b.min(0.0) + 1e-12) {
                        best = Some((lr, k));
                    }
                }
            }
            let (lr, k) =
                best.ok_or_else(|| Error::NoConnector { left: left.clone(), right: right.clone(), k_max })?;
            Ok(QmRecord { left: left.clone(), right: right.clone(), connector: k.clone(), ratio: lr.exp(), capped: lr.min(0.0).exp() })
        })
        .collect::<Result<Vec<QmRecord>>>()?;

    let worst = records
        .iter()
        .fold(None::<&QmRecord>, |acc, r| match acc {
            Some(a) if a.capped <= r.capped => Some(a),
            _ => Some(r),
        })
        .cloned()
        .ok_or(Error::ZeroLength)?;
    let k = records.iter().map(|r| r.connector.len()).max().unwrap_or(0);
    let c = worst.capped;
    Ok(QmCertificate { n, k_max, c, k, failed: c < QM_FAILURE_THRESHOLD, worst, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::FiniteRangeCocycle;
    use crate::linalg::Matrix;
    use crate::potential::PotentialKind;
    use crate::sft::Sft;

    #[test]
    fn golden_identity() {
        let c = FiniteRangeCocycle::identity(Sft::golden_mean(), 2).unwrap();
        let pot = WordPotential::from_cocycle(c, PotentialKind::Norm).unwrap();
        for n in [2, 3] {
            let cert = qm_search(&pot, n, 2).unwrap();
            assert_eq!((cert.c, cert.k), (1.0, 1));
            assert!(cert.revalidate(&pot).unwrap());
        }
    }

    #[test]
    fn scalar_full_shift_is_multiplicative() {
        let c = FiniteRangeCocycle::locally_constant(Sft::full_shift(2).unwrap(), 1.0, vec![Matrix::scalar(1.0), Matrix::scalar(2.0)])
            .unwrap();
        let pot = WordPotential::from_cocycle(c, PotentialKind::Norm).unwrap();
        let cert = qm_search(&pot, 2, 1).unwrap();
        assert!((cert.c - 1.0).abs() < 1e-12);
        assert_eq!(cert.k, 0);
    }

    #[test]
    fn missing_connector() {
        let c = FiniteRangeCocycle::identity(Sft::golden_mean(), 1).unwrap();
        let pot = WordPotential::from_cocycle(c, PotentialKind::Norm).unwrap();
        assert!(matches!(qm_search(&pot, 1, 0), Err(Error::NoConnector { .. })));
    }
}
