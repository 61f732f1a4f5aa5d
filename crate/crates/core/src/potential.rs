//! Submultiplicative potentials viewed as functions on admissible words.
//!
//! For a cocycle of radius `k`, `φ_n(x)` depends on `x_0 … x_{n+k−1}`, so the
//! supremum over a cylinder `[I]` is a maximum over the `k`-symbol right
//! extensions of `I`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cocycle::FiniteRangeCocycle;
use crate::error::{Error, Result};
use crate::linalg::{log_phi_s, Matrix};
use crate::sft::{Sft, Symbol, Word};

/// Relative slack allowed before a submultiplicativity violation is reported.
pub const SUBMULT_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialKind {
    Norm,
    SingularValue(f64),
}

impl PotentialKind {
    fn exponent(&self) -> f64 {
        match self {
            PotentialKind::Norm => 1.0,
            PotentialKind::SingularValue(s) => *s,
        }
    }
}

impl fmt::Display for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialKind::Norm => write!(f, "norm"),
            PotentialKind::SingularValue(s) => write!(f, "sv:{s}"),
        }
    }
}

/// Parses `norm` or `sv:S`.
impl FromStr for PotentialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "norm" {
            return Ok(PotentialKind::Norm);
        }
        let exp = s
            .strip_prefix("sv:")
            .and_then(|v| v.parse::<f64>().ok())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown potential kind {s:?}")))?;
        if !(exp.is_finite() && exp >= 0.0) {
            return Err(Error::BadExponent(exp));
        }
        Ok(PotentialKind::SingularValue(exp))
    }
}

impl Serialize for PotentialKind {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PotentialKind {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

type CustomFn = Arc<dyn Fn(&[Symbol]) -> Option<f64> + Send + Sync>;

#[derive(Clone)]
enum Source {
    Cocycle { coc: Arc<FiniteRangeCocycle>, kind: PotentialKind },
    Custom { name: String, f: CustomFn },
}

/// A positive function on admissible words.
#[derive(Clone)]
pub struct WordPotential {
    sft: Sft,
    source: Source,
}

impl fmt::Debug for WordPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WordPotential({})", self.describe())
    }
}

impl WordPotential {
    pub fn from_cocycle(coc: FiniteRangeCocycle, kind: PotentialKind) -> Result<Self> {
        if let PotentialKind::SingularValue(s) = kind {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::BadExponent(s));
            }
        }
        Ok(Self { sft: coc.sft().clone(), source: Source::Cocycle { coc: Arc::new(coc), kind } })
    }

    /// A potential given by a closure; `None` means the value is missing.
    pub fn custom<F>(sft: Sft, name: impl Into<String>, f: F) -> Self
    where
        F: Fn(&[Symbol]) -> Option<f64> + Send + Sync + 'static,
    {
        Self { sft, source: Source::Custom { name: name.into(), f: Arc::new(f) } }
    }

    pub fn from_table(sft: Sft, table: HashMap<Word, f64>) -> Self {
        Self::custom(sft, "table", move |w| table.get(w).copied())
    }

    pub fn sft(&self) -> &Sft {
        &self.sft
    }

    pub fn cocycle(&self) -> Option<&FiniteRangeCocycle> {
        match &self.source {
            Source::Cocycle { coc, .. } => Some(coc),
            Source::Custom { .. } => None,
        }
    }

    pub fn kind(&self) -> Option<PotentialKind> {
        match &self.source {
            Source::Cocycle { kind, .. } => Some(*kind),
            Source::Custom { .. } => None,
        }
    }

    pub fn describe(&self) -> String {
        match &self.source {
            Source::Cocycle { kind, .. } => kind.to_string(),
            Source::Custom { name, .. } => format!("custom:{name}"),
        }
    }

    /// Extension radius `k` (0 for word tables).
    pub fn radius(&self) -> usize {
        self.cocycle().map_or(0, FiniteRangeCocycle::radius)
    }

    /// `log` of the matrix functional used by this potential.
    pub fn log_matrix_value(&self, m: &Matrix) -> Result<f64> {
        match &self.source {
            Source::Cocycle { kind, .. } => log_phi_s(m, kind.exponent()),
            Source::Custom { .. } => Err(Error::InvalidParameter("custom potentials have no matrix form".into())),
        }
    }

    /// `log φ_n(x)` for `x ∈ [w]` where `w` has length `n + k`.
    pub fn log_pointwise(&self, w: &[Symbol]) -> Result<f64> {
        match &self.source {
            Source::Cocycle { coc, kind } => log_phi_s(&coc.word_product(w)?, kind.exponent()),
            Source::Custom { .. } => self.log_value(w),
        }
    }

    /// `log φ(I)`.
    pub fn log_value(&self, w: &[Symbol]) -> Result<f64> {
        if w.is_empty() {
            return Err(Error::ZeroLength);
        }
        self.sft.check_admissible(w)?;
        match &self.source {
            Source::Cocycle { coc, kind } => {
                let s = kind.exponent();
                let k = coc.radius();
                if k == 0 {
                    return log_phi_s(&coc.product_unchecked(w)?, s);
                }
                let mut best = f64::NEG_INFINITY;
                let mut full = w.to_vec();
                for ext in self.sft.extensions(w, k)? {
                    full.truncate(w.len());
                    full.extend_from_slice(&ext);
                    best = best.max(log_phi_s(&coc.product_unchecked(&full)?, s)?);
                }
                Ok(best)
            }
            Source::Custom { f, .. } => {
                let v = f(w).ok_or_else(|| Error::MissingPotentialValue(Word::from(w)))?;
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::NonPositivePotential { word: Word::from(w), value: v });
                }
                Ok(v.ln())
            }
        }
    }

    pub fn value(&self, w: &[Symbol]) -> Result<f64> {
        self.log_value(w).map(f64::exp)
    }

    /// `(I, log φ(I))` for every admissible `n`-word, in lexicographic order.
    pub fn log_values(&self, n: usize) -> Result<Vec<(Word, f64)>> {
        let words = self.sft.enumerate_words(n)?;
        words
            .into_par_iter()
            .map(|w| {
                let v = self.log_value(&w)?;
                Ok((w, v))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubmultViolation {
    pub left: Word,
    pub right: Word,
    /// `φ(IJ) / (φ(I)φ(J))`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubmultiplicativityAudit {
    pub n_max: usize,
    pub pairs_checked: usize,
    pub worst_ratio: f64,
    pub worst_pair: Option<(Word, Word)>,
    pub violation_count: usize,
    /// The first violations found, capped at [`SubmultiplicativityAudit::LISTED`].
    pub violations: Vec<SubmultViolation>,
}

impl SubmultiplicativityAudit {
    pub const LISTED: usize = 64;

    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

/// Checks `φ(IJ) ≤ φ(I)φ(J)` for every admissible `IJ` with `|I| + |J| ≤ n_max`.
pub fn check_submultiplicativity(pot: &WordPotential, n_max: usize) -> Result<SubmultiplicativityAudit> {
    let mut logs: HashMap<Word, f64> = HashMap::new();
    for n in 1..=n_max {
        logs.extend(pot.log_values(n)?);
    }
    let slack = SUBMULT_SLACK.ln_1p();
    let mut words: Vec<&Word> = logs.keys().filter(|w| w.len() >= 2).collect();
    words.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));

    let mut audit = SubmultiplicativityAudit {
        n_max,
        pairs_checked: 0,
        worst_ratio: 1.0,
        worst_pair: None,
        violation_count: 0,
        violations: Vec::new(),
    };
    let mut worst_log = f64::NEG_INFINITY;
    for w in words {
        for cut in 1..w.len() {
            let (left, right) = w.split_at(cut);
            let log_ratio = logs[&w[..]] - logs[left] - logs[right];
            audit.pairs_checked += 1;
            if log_ratio > worst_log {
                worst_log = log_ratio;
                audit.worst_ratio = log_ratio.exp();
                audit.worst_pair = Some((Word::from(left), Word::from(right)));
            }
            if log_ratio > slack {
                audit.violation_count += 1;
                if audit.violations.len() < SubmultiplicativityAudit::LISTED {
                    audit.violations.push(SubmultViolation {
                        left: Word::from(left),
                        right: Word::from(right),
                        ratio: log_ratio.exp(),
                    });
                }
            }
        }
    }
    Ok(audit)
}

/// `max_I max_{E,E'} φ_n(IE)/φ_n(IE')` over admissible `k`-extensions; 1 when `k = 0`.
pub fn distortion_constant(pot: &WordPotential, n: usize) -> Result<f64> {
    let k = pot.radius();
    if n == 0 {
        return Err(Error::ZeroLength);
    }
    if k == 0 {
        return Ok(1.0);
    }
    let words = pot.sft().enumerate_words(n)?;
    let spreads = words
        .par_iter()
        .map(|w| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for ext in pot.sft().extensions(w, k)? {
                let v = pot.log_pointwise(&w.concat(&ext))?;
                lo = lo.min(v);
                hi = hi.max(v);
            }
            Ok(hi - lo)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(spreads.into_iter().fold(0.0, f64::max).exp())
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn scalar12() -> FiniteRangeCocycle {
        FiniteRangeCocycle::locally_constant(Sft::full_shift(2).unwrap(), 1.0, vec![Matrix::scalar(1.0), Matrix::scalar(2.0)])
            .unwrap()
    }

    fn k1_scalar() -> FiniteRangeCocycle {
        let table: BTreeMap<Word, Matrix> =
            [("00", 2.0), ("01", 3.0), ("10", 1.0), ("11", 1.0)].into_iter().map(|(k, v)| (w(k), Matrix::scalar(v))).collect();
        FiniteRangeCocycle::new(Sft::full_shift(2).unwrap(), 1, 1, 1.0, table).unwrap()
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("norm".parse::<PotentialKind>().unwrap(), PotentialKind::Norm);
        assert_eq!("sv:1.5".parse::<PotentialKind>().unwrap(), PotentialKind::SingularValue(1.5));
        assert!("sv:-1".parse::<PotentialKind>().is_err());
        assert!("det".parse::<PotentialKind>().is_err());
    }

    #[test]
    fn scalar_norm_value() {
        let p = WordPotential::from_cocycle(scalar12(), PotentialKind::Norm).unwrap();
        assert!((p.value(&w("011")).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn extension_maximum() {
        let p = WordPotential::from_cocycle(k1_scalar(), PotentialKind::Norm).unwrap();
        assert!((p.value(&w("0")).unwrap() - 3.0).abs() < 1e-12);
        assert!((p.value(&w("1")).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distortion_values() {
        let p = WordPotential::from_cocycle(k1_scalar(), PotentialKind::Norm).unwrap();
        // On [0] the two extensions give 2 and 3.
        assert!((distortion_constant(&p, 1).unwrap() - 1.5).abs() < 1e-12);
        let q = WordPotential::from_cocycle(scalar12(), PotentialKind::Norm).unwrap();
        assert_eq!(distortion_constant(&q, 5).unwrap(), 1.0);
    }

    #[test]
    fn sv1_matches_norm() {
        let a0 = Matrix::from_rows(&[[2.0, 1.0], [0.5, 1.0]]).unwrap();
        let a1 = Matrix::from_rows(&[[1.0, -1.0], [0.3, 2.0]]).unwrap();
        let c = FiniteRangeCocycle::locally_constant(Sft::full_shift(2).unwrap(), 1.0, vec![a0, a1]).unwrap();
        let norm = WordPotential::from_cocycle(c.clone(), PotentialKind::Norm).unwrap();
        let sv1 = WordPotential::from_cocycle(c, PotentialKind::SingularValue(1.0)).unwrap();
        for word in Sft::full_shift(2).unwrap().enumerate_words(4).unwrap() {
            assert!((norm.log_value(&word).unwrap() - sv1.log_value(&word).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn adversarial_table_violates() {
        let p = WordPotential::custom(Sft::full_shift(2).unwrap(), "square", |w| Some(2f64.powi((w.len() * w.len()) as i32)));
        let audit = check_submultiplicativity(&p, 2).unwrap();
        assert!(!audit.passed());
        assert_eq!(audit.violations[0].left.len(), 1);
        assert!((audit.violations[0].ratio - 4.0).abs() < 1e-12);
    }

    #[test]
    fn norm_audit_passes() {
        let p = WordPotential::from_cocycle(k1_scalar(), PotentialKind::Norm).unwrap();
        let audit = check_submultiplicativity(&p, 5).unwrap();
        assert!(audit.passed(), "{audit:?}");
    }

    #[test]
    fn missing_and_nonpositive_values() {
        let sft = Sft::full_shift(2).unwrap();
        let p = WordPotential::from_table(sft.clone(), HashMap::from([(w("0"), 1.0)]));
        assert!(matches!(p.log_value(&w("1")), Err(Error::MissingPotentialValue(_))));
        let z = WordPotential::custom(sft, "zero", |_| Some(0.0));
        assert!(matches!(z.log_value(&w("1")), Err(Error::NonPositivePotential { .. })));
    }
}
