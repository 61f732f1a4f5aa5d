//! Cylinder partitions on a coordinate window and their joins.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sft::{Sft, Word};
use crate::thermo::CylinderWeights;

/// Atoms lighter than this are dropped from joins and conditionals.
pub const MASS_FLOOR: f64 = 1e-15;

pub type Label = u32;

/// A partition labelling each admissible word on coordinates `[a, b)`.
/// Atoms are finite unions of cylinders, hence clopen with empty boundary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    pub a: i64,
    pub b: i64,
    labels: BTreeMap<Word, Label>,
    alphabet: usize,
}

impl Partition {
    /// Every admissible window-word must carry a label.
    pub fn new(sft: &Sft, a: i64, b: i64, labels: BTreeMap<Word, Label>) -> Result<Self> {
        if b <= a {
            return Err(Error::ZeroLength);
        }
        for w in sft.enumerate_words((b - a) as usize)? {
            if !labels.contains_key(&w) {
                return Err(Error::UnlabeledWord(w));
            }
        }
        let alphabet = labels.values().collect::<BTreeSet<_>>().len();
        Ok(Self { a, b, labels, alphabet })
    }

    /// One atom per admissible window-word, labelled by lexicographic rank.
    pub fn cylinders(sft: &Sft, a: i64, b: i64) -> Result<Self> {
        if b <= a {
            return Err(Error::ZeroLength);
        }
        let labels = sft.enumerate_words((b - a) as usize)?.into_iter().zip(0..).collect();
        Self::new(sft, a, b, labels)
    }

    /// The partition by the symbol at coordinate 0.
    pub fn zero_coordinate(sft: &Sft) -> Result<Self> {
        Self::cylinders(sft, 0, 1)
    }

    pub fn width(&self) -> usize {
        (self.b - self.a) as usize
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn label(&self, w: &[u8]) -> Result<Label> {
        self.labels.get(w).copied().ok_or_else(|| Error::UnlabeledWord(Word::from(w)))
    }

    /// Cylinders making up each atom.
    pub fn atoms(&self) -> BTreeMap<Label, Vec<Word>> {
        let mut out: BTreeMap<Label, Vec<Word>> = BTreeMap::new();
        for (w, &l) in &self.labels {
            out.entry(l).or_default().push(w.clone());
        }
        out
    }

    /// Mass of an `r`-neighbourhood of the atom boundaries. Cylinder atoms
    /// are clopen, so the boundary is empty and the mass is 0 for every `r`.
    pub fn boundary_mass(&self, _r: f64) -> f64 {
        0.0
    }
}

/// A union of atoms of a partition, used as a test set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestSet {
    pub a: i64,
    pub b: i64,
    pub words: BTreeSet<Word>,
}

impl TestSet {
    pub fn from_atoms(partition: &Partition, labels: &[Label]) -> Self {
        let words = partition
            .labels
            .iter()
            .filter(|(_, l)| labels.contains(l))
            .map(|(w, _)| w.clone())
            .collect();
        Self { a: partition.a, b: partition.b, words }
    }

    /// Every atom of `partition` as its own test set.
    pub fn all_atoms(partition: &Partition) -> Vec<Self> {
        partition.atoms().keys().map(|&l| Self::from_atoms(partition, &[l])).collect()
    }
}

/// Coordinates `[lo, hi)` read from position 0 of every model word.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Frame {
    pub lo: i64,
    pub hi: i64,
}

impl Frame {
    pub fn covering(windows: &[(i64, i64)], level: usize) -> Result<Self> {
        let lo = windows.iter().map(|w| w.0).min().expect("nonempty");
        let hi = windows.iter().map(|w| w.1).max().expect("nonempty");
        let need = (hi - lo) as usize;
        if need > level {
            return Err(Error::WindowOverflow { need, have: level });
        }
        Ok(Self { lo, hi })
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo) as usize
    }

    pub fn read<'w>(&self, w: &'w [u8], a: i64, b: i64) -> &'w [u8] {
        &w[(a - self.lo) as usize..(b - self.lo) as usize]
    }

    /// Model weights marginalized to the frame.
    pub fn weights(&self, model: &CylinderWeights) -> Result<CylinderWeights> {
        model.marginal(0, self.len())
    }
}

/// Labels of `⋁_{i=m1}^{m2} σ^i ξ` at `x`: `ξ` read on `[a − i, b − i)`.
pub(crate) fn joined_labels(xi: &Partition, frame: &Frame, w: &[u8], m1: i64, m2: i64) -> Result<Vec<Label>> {
    (m1..=m2).map(|i| xi.label(frame.read(w, xi.a - i, xi.b - i))).collect()
}

pub(crate) fn joined_window(xi: &Partition, m1: i64, m2: i64) -> (i64, i64) {
    (xi.a - m2, xi.b - m1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Atom {
    pub labels: Vec<Label>,
    pub mass: f64,
}

/// Atoms of `⋁_{i=m1}^{m2} σ^i ξ` with their masses, lightest dropped.
pub fn join_partitions(model: &CylinderWeights, xi: &Partition, m1: i64, m2: i64) -> Result<Vec<Atom>> {
    if m2 < m1 {
        return Err(Error::InvalidParameter(format!("m2 = {m2} is below m1 = {m1}")));
    }
    let frame = Frame::covering(&[joined_window(xi, m1, m2)], model.level())?;
    let weights = frame.weights(model)?;
    let mut masses: BTreeMap<Vec<Label>, f64> = BTreeMap::new();
    for (w, v) in weights.iter() {
        *masses.entry(joined_labels(xi, &frame, w, m1, m2)?).or_insert(0.0) += v;
    }
    let before = masses.len();
    let atoms: Vec<Atom> =
        masses.into_iter().filter(|(_, m)| *m >= MASS_FLOOR).map(|(labels, mass)| Atom { labels, mass }).collect();
    if atoms.len() < before {
        log::debug!("dropped {} atoms below {MASS_FLOOR}", before - atoms.len());
    }
    Ok(atoms)
}
