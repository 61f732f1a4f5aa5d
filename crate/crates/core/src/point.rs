//! Finite descriptions of eventually periodic two-sided sequences.
//!
//! A point is `… past past | core | future future …` where `core[0]` sits at
//! coordinate `origin`, the past block repeats to the left (its last symbol at
//! `origin − 1`) and the future block repeats to the right.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sft::{MetricConstants, Sft, Symbol, Word};

#[derive(Clone, PartialEq, Eq)]
pub struct PointSpec {
    past: Word,
    core: Word,
    future: Word,
    origin: i64,
}

impl PointSpec {
    pub fn new(past: Word, core: Word, future: Word, origin: i64) -> Result<Self> {
        if past.is_empty() || future.is_empty() {
            return Err(Error::BadPoint("past and future blocks must be nonempty".into()));
        }
        Ok(Self { past, core, future, origin })
    }

    /// The periodic point `… w w w …` with `w[0]` at coordinate 0.
    pub fn periodic(w: &Word) -> Result<Self> {
        Self::new(w.clone(), Word::empty(), w.clone(), 0)
    }

    /// The homoclinic point agreeing with the periodic point of `w` outside
    /// `[0, |bridge|)` and reading `bridge` there.
    pub fn homoclinic(w: &Word, bridge: &Word) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::BadPoint("empty periodic word".into()));
        }
        let len = w.len();
        let shift = bridge.len() % len;
        let future = Word((0..len).map(|j| w[(shift + j) % len]).collect());
        Self::new(w.clone(), bridge.clone(), future, 0)
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn core(&self) -> &Word {
        &self.core
    }

    /// Symbol at coordinate `i`.
    pub fn at(&self, i: i64) -> Symbol {
        let end = self.origin + self.core.len() as i64;
        if i < self.origin {
            let p = self.past.len() as i64;
            self.past[(i - self.origin).rem_euclid(p) as usize]
        } else if i < end {
            self.core[(i - self.origin) as usize]
        } else {
            self.future[((i - end) % self.future.len() as i64) as usize]
        }
    }

    /// Symbols on coordinates `[start, start + len)`.
    pub fn window(&self, start: i64, len: usize) -> Word {
        Word((0..len as i64).map(|j| self.at(start + j)).collect())
    }

    /// `σ^m` applied to the point (`m` may be negative).
    pub fn shift(&self, m: i64) -> PointSpec {
        // (σ^m x)_i = x_{i+m}; block phases are relative to the core so only the origin moves.
        Self {
            past: self.past.clone(),
            core: self.core.clone(),
            future: self.future.clone(),
            origin: self.origin - m,
        }
    }

    /// Coordinates beyond which both ends are purely periodic.
    fn span(&self) -> (i64, i64) {
        (self.origin, self.origin + self.core.len() as i64)
    }

    /// A range of coordinates containing one full common period on each side
    /// of the non-periodic parts of both points.
    fn check_range(&self, other: &PointSpec) -> (i64, i64) {
        let (a0, a1) = self.span();
        let (b0, b1) = other.span();
        let left_period = (self.past.len() * other.past.len()) as i64;
        let right_period = (self.future.len() * other.future.len()) as i64;
        (a0.min(b0) - left_period - 1, a1.max(b1) + right_period + 1)
    }

    pub fn check_admissible(&self, sft: &Sft) -> Result<()> {
        let (lo, hi) = self.check_range(self);
        let w = self.window(lo, (hi - lo) as usize);
        if !sft.is_cyclically_admissible(&self.past) || !sft.is_cyclically_admissible(&self.future) {
            return Err(Error::BadPoint(format!("{self} has a non-periodic end")));
        }
        sft.check_admissible(&w).map_err(|_| Error::BadPoint(format!("{self} is not admissible")))
    }

    /// Whether the points agree on every coordinate `i ≥ from`.
    pub fn agrees_from(&self, other: &PointSpec, from: i64) -> bool {
        let (_, hi) = self.check_range(other);
        let tail_start = self.span().1.max(other.span().1);
        let end = hi + (from - tail_start).max(0);
        (from..end).all(|i| self.at(i) == other.at(i))
    }

    /// Whether the points agree on every coordinate `i ≤ to`.
    pub fn agrees_until(&self, other: &PointSpec, to: i64) -> bool {
        let (lo, _) = self.check_range(other);
        let head_end = self.span().0.min(other.span().0) - 1;
        let start = lo - (head_end - to).max(0);
        (start..=to).all(|i| self.at(i) == other.at(i))
    }

    /// Smallest `m` with agreement on every `i ≥ m`, if the right tails match.
    pub fn stable_agreement_start(&self, other: &PointSpec) -> Option<i64> {
        let (lo, hi) = self.check_range(other);
        if !self.agrees_from(other, hi) {
            return None;
        }
        let mut m = hi;
        while m > lo && self.at(m - 1) == other.at(m - 1) {
            m -= 1;
        }
        Some(if m == lo && self.agrees_until(other, lo) { i64::MIN } else { m })
    }

    /// Largest `m` with agreement on every `i ≤ m`, if the left tails match.
    pub fn unstable_agreement_end(&self, other: &PointSpec) -> Option<i64> {
        let (lo, hi) = self.check_range(other);
        if !self.agrees_until(other, lo) {
            return None;
        }
        let mut m = lo;
        while m < hi && self.at(m + 1) == other.at(m + 1) {
            m += 1;
        }
        Some(if m == hi && self.agrees_from(other, hi) { i64::MAX } else { m })
    }

    /// `d(x, y) = 2^{−k}` with `k` maximal such that `x_i = y_i` for `|i| < k`.
    pub fn distance(&self, other: &PointSpec, metric: &MetricConstants) -> f64 {
        let (lo, hi) = self.check_range(other);
        let bound = lo.unsigned_abs().max(hi.unsigned_abs()) as i64 + 1;
        for k in 0..=bound {
            if self.at(k) != other.at(k) || self.at(-k) != other.at(-k) {
                return metric.distance(k as usize);
            }
        }
        0.0
    }
}

impl fmt::Display for PointSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.past, self.core, self.future)?;
        if self.origin != 0 {
            write!(f, "@{}", self.origin)?;
        }
        Ok(())
    }
}

impl fmt::Debug for PointSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PointSpec({self})")
    }
}

/// Parses `PAST/CORE/FUTURE[@ORIGIN]`, e.g. `0/1/0` or `01//1@-2`.
impl FromStr for PointSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (body, origin) = match s.split_once('@') {
            Some((b, o)) => (b, o.trim().parse::<i64>().map_err(|_| Error::BadPoint(s.into()))?),
            None => (s, 0),
        };
        let parts: Vec<&str> = body.split('/').collect();
        if parts.len() != 3 {
            return Err(Error::BadPoint(format!("expected PAST/CORE/FUTURE, got {s:?}")));
        }
        PointSpec::new(parts[0].parse()?, parts[1].parse()?, parts[2].parse()?, origin)
    }
}

impl Serialize for PointSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PointSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinates() {
        let x: PointSpec = "01/2/3".parse().unwrap();
        assert_eq!(x.window(-4, 7).0, vec![0, 1, 0, 1, 2, 3, 3]);
        let y = x.shift(1);
        assert_eq!(y.at(-1), 2);
        assert_eq!(y.at(0), 3);
        assert_eq!(x.shift(-2).at(2), 2);
    }

    #[test]
    fn homoclinic_matches_periodic_outside_bridge() {
        let w: Word = "01".parse().unwrap();
        let p = PointSpec::periodic(&w).unwrap();
        let z = PointSpec::homoclinic(&w, &"111".parse().unwrap()).unwrap();
        assert!(z.agrees_until(&p, -1));
        assert!(z.agrees_from(&p, 3));
        assert!(!z.agrees_from(&p, 2));
    }

    #[test]
    fn distance_of_stable_pair() {
        let x: PointSpec = "0/1/1".parse().unwrap();
        let y: PointSpec = "1/0/1@-2".parse().unwrap();
        // x_{-1} = 0 and y_{-1} = 1 differ; agreement holds on |i| < 1.
        assert!(x.agrees_from(&y, 0));
        assert_eq!(x.distance(&y, &MetricConstants::default()), 0.5);
        assert_eq!(x.distance(&x, &MetricConstants::default()), 0.0);
    }
}
