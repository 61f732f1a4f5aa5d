//! Subshifts of finite type: adjacency validation, primitivity, word
//! enumeration, periodic and bridging words.

use std::collections::VecDeque;
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default memory guard for word enumeration.
pub const DEFAULT_ENUMERATION_CAP: usize = 1 << 22;

pub type Symbol = u8;

/// A finite word over `{0, …, q−1}`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(pub Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Self(symbols)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn concat(&self, other: &[Symbol]) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(other);
        Word(v)
    }

    pub fn slice(&self, start: usize, end: usize) -> Word {
        Word(self.0[start..end].to_vec())
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }
}

impl Deref for Word {
    type Target = [Symbol];

    fn deref(&self) -> &[Symbol] {
        &self.0
    }
}

impl std::borrow::Borrow<[Symbol]> for Word {
    fn borrow(&self) -> &[Symbol] {
        &self.0
    }
}

impl From<Vec<Symbol>> for Word {
    fn from(v: Vec<Symbol>) -> Self {
        Word(v)
    }
}

impl From<&[Symbol]> for Word {
    fn from(v: &[Symbol]) -> Self {
        Word(v.to_vec())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&s| s < 10) {
            for s in &self.0 {
                write!(f, "{s}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
            write!(f, "{}", parts.join(","))
        }
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word(\"{self}\")")
    }
}

/// Parses either a run of decimal digits (`"0110"`) or comma-separated
/// symbols (`"0,12,3"`). The empty string is the empty word.
impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Word::empty());
        }
        let parsed: Option<Vec<Symbol>> = if s.contains(',') {
            s.split(',').map(|t| t.trim().parse::<Symbol>().ok()).collect()
        } else {
            s.chars().map(|c| c.to_digit(10).map(|d| d as Symbol)).collect()
        };
        parsed.map(Word).ok_or_else(|| Error::ParseWord(s.to_string()))
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Metric data of `Σ_T` with `d(x, y) = 2^{−k}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricConstants {
    /// Contraction of local stable sets under one shift.
    pub contraction: f64,
    pub base: f64,
}

impl Default for MetricConstants {
    fn default() -> Self {
        Self { contraction: 0.5, base: 2.0 }
    }
}

impl MetricConstants {
    /// Distance for a first disagreement at `|i| = k` (agreement on `|i| < k`).
    pub fn distance(&self, k: usize) -> f64 {
        self.base.powi(-(k as i32))
    }
}

/// A primitive subshift of finite type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Sft {
    q: usize,
    adjacency: Vec<Vec<u8>>,
    primitivity_power: usize,
    #[serde(skip)]
    enumeration_cap: usize,
}

impl Sft {
    /// Validates `T` and computes its primitivity power by successive Boolean
    /// products up to `q²` (Wielandt's bound lies below it).
    pub fn new<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        let q = rows.len();
        if q == 0 {
            return Err(Error::EmptyAlphabet);
        }
        if q > 256 {
            return Err(Error::AlphabetTooLarge(q));
        }
        let mut adjacency = Vec::with_capacity(q);
        for (row, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != q {
                return Err(Error::NotSquare { row, len: r.len(), expected: q });
            }
            let mut out = Vec::with_capacity(q);
            for (col, &value) in r.iter().enumerate() {
                match value {
                    0 | 1 => out.push(value as u8),
                    _ => return Err(Error::NonBinary { row, col, value }),
                }
            }
            adjacency.push(out);
        }
        for s in 0..q {
            if adjacency[s].iter().all(|&v| v == 0) {
                return Err(Error::DeadSymbol { symbol: s, direction: "outgoing" });
            }
            if (0..q).all(|r| adjacency[r][s] == 0) {
                return Err(Error::DeadSymbol { symbol: s, direction: "incoming" });
            }
        }
        let primitivity_power = primitivity_power(&adjacency)?;
        Ok(Self { q, adjacency, primitivity_power, enumeration_cap: DEFAULT_ENUMERATION_CAP })
    }

    pub fn full_shift(q: usize) -> Result<Self> {
        Self::new(&vec![vec![1i64; q]; q])
    }

    /// The golden-mean shift (forbidden word `11`).
    pub fn golden_mean() -> Self {
        Self::new(&[[1, 1], [1, 0]]).expect("golden mean shift is primitive")
    }

    pub fn with_enumeration_cap(mut self, cap: usize) -> Self {
        self.enumeration_cap = cap;
        self
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn adjacency(&self) -> &[Vec<u8>] {
        &self.adjacency
    }

    pub fn allowed(&self, a: Symbol, b: Symbol) -> bool {
        self.adjacency[a as usize][b as usize] == 1
    }

    pub fn primitivity_power(&self) -> usize {
        self.primitivity_power
    }

    pub fn enumeration_cap(&self) -> usize {
        self.enumeration_cap
    }

    pub fn is_full_shift(&self) -> bool {
        self.adjacency.iter().all(|r| r.iter().all(|&v| v == 1))
    }

    pub fn check_symbol(&self, s: usize) -> Result<Symbol> {
        if s < self.q {
            Ok(s as Symbol)
        } else {
            Err(Error::BadSymbol { symbol: s, q: self.q })
        }
    }

    pub fn is_admissible(&self, w: &[Symbol]) -> bool {
        w.iter().all(|&s| (s as usize) < self.q) && w.windows(2).all(|p| self.allowed(p[0], p[1]))
    }

    pub fn check_admissible(&self, w: &[Symbol]) -> Result<()> {
        if let Some(&s) = w.iter().find(|&&s| s as usize >= self.q) {
            return Err(Error::BadSymbol { symbol: s as usize, q: self.q });
        }
        if self.is_admissible(w) {
            Ok(())
        } else {
            Err(Error::Inadmissible(Word::from(w)))
        }
    }

    /// Whether `w` read cyclically is admissible (encodes a periodic point).
    pub fn is_cyclically_admissible(&self, w: &[Symbol]) -> bool {
        !w.is_empty() && self.is_admissible(w) && self.allowed(w[w.len() - 1], w[0])
    }

    /// `|𝓛(n)| = Σ_{ij} (T^{n−1})_{ij}`, as a float to survive large `n`.
    pub fn word_count(&self, n: usize) -> f64 {
        if n == 0 {
            return 1.0;
        }
        let mut v = vec![1.0f64; self.q];
        for _ in 1..n {
            v = (0..self.q)
                .map(|i| (0..self.q).map(|j| self.adjacency[i][j] as f64 * v[j]).sum())
                .collect();
        }
        v.iter().sum()
    }

    /// `trace(T^p)`, the number of points of period `p`.
    pub fn periodic_count(&self, p: usize) -> f64 {
        let mut m: Vec<Vec<f64>> =
            (0..self.q).map(|i| (0..self.q).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        for _ in 0..p {
            m = (0..self.q)
                .map(|i| {
                    (0..self.q)
                        .map(|j| (0..self.q).map(|k| m[i][k] * self.adjacency[k][j] as f64).sum())
                        .collect()
                })
                .collect();
        }
        (0..self.q).map(|i| m[i][i]).sum()
    }

    fn check_cap(&self, n: usize) -> Result<()> {
        let count = self.word_count(n);
        if count > self.enumeration_cap as f64 {
            return Err(Error::EnumerationCap { n, count, cap: self.enumeration_cap });
        }
        Ok(())
    }

    /// All admissible words of length `n`, in lexicographic order.
    pub fn enumerate_words(&self, n: usize) -> Result<Vec<Word>> {
        if n == 0 {
            return Err(Error::ZeroLength);
        }
        self.check_cap(n)?;
        let mut out = Vec::with_capacity(self.word_count(n) as usize);
        let mut cur = Vec::with_capacity(n);
        for s in 0..self.q as Symbol {
            cur.push(s);
            self.extend_words(&mut cur, n, &mut out);
            cur.pop();
        }
        Ok(out)
    }

    fn extend_words(&self, cur: &mut Vec<Symbol>, n: usize, out: &mut Vec<Word>) {
        if cur.len() == n {
            out.push(Word(cur.clone()));
            return;
        }
        let last = *cur.last().expect("nonempty prefix");
        for s in 0..self.q as Symbol {
            if self.allowed(last, s) {
                cur.push(s);
                self.extend_words(cur, n, out);
                cur.pop();
            }
        }
    }

    /// All admissible words of length `len` that may follow `prefix`
    /// (lexicographic). `len = 0` yields the single empty word.
    pub fn extensions(&self, prefix: &[Symbol], len: usize) -> Result<Vec<Word>> {
        if len == 0 {
            return Ok(vec![Word::empty()]);
        }
        self.check_cap(len)?;
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(len);
        for s in 0..self.q as Symbol {
            if prefix.last().is_none_or(|&l| self.allowed(l, s)) {
                cur.push(s);
                self.extend_words(&mut cur, len, &mut out);
                cur.pop();
            }
        }
        Ok(out)
    }

    /// Length-`p` words that close up cyclically; each encodes one point of
    /// period `p` and there are `trace(T^p)` of them.
    pub fn periodic_words(&self, p: usize) -> Result<Vec<Word>> {
        if p == 0 {
            return Err(Error::ZeroLength);
        }
        Ok(self
            .enumerate_words(p)?
            .into_iter()
            .filter(|w| self.allowed(w[p - 1], w[0]))
            .collect())
    }

    /// Shortest (then lexicographically least) word `K` with `aKb`
    /// admissible, found by breadth-first search over the transition graph.
    pub fn bridge_word(&self, a: Symbol, b: Symbol, max_len: usize) -> Result<Word> {
        self.check_symbol(a as usize)?;
        self.check_symbol(b as usize)?;
        if self.allowed(a, b) {
            return Ok(Word::empty());
        }
        // parent[s] = predecessor on a shortest path from `a`.
        let mut parent: Vec<Option<Symbol>> = vec![None; self.q];
        let mut depth = vec![usize::MAX; self.q];
        let mut queue = VecDeque::new();
        for s in 0..self.q as Symbol {
            if self.allowed(a, s) {
                depth[s as usize] = 1;
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            let d = depth[s as usize];
            if d > max_len {
                break;
            }
            if self.allowed(s, b) {
                let mut path = vec![s];
                let mut cur = s;
                while let Some(p) = parent[cur as usize] {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                return Ok(Word(path));
            }
            for t in 0..self.q as Symbol {
                if self.allowed(s, t) && depth[t as usize] == usize::MAX {
                    depth[t as usize] = d + 1;
                    parent[t as usize] = Some(s);
                    queue.push_back(t);
                }
            }
        }
        Err(Error::NoBridge { a, b, max_len })
    }
}

fn bool_mul(a: &[Vec<bool>], b: &[Vec<u8>]) -> Vec<Vec<bool>> {
    let q = a.len();
    (0..q)
        .map(|i| (0..q).map(|j| (0..q).any(|k| a[i][k] && b[k][j] == 1)).collect())
        .collect()
}

fn primitivity_power(t: &[Vec<u8>]) -> Result<usize> {
    let q = t.len();
    let cap = q * q;
    let mut power: Vec<Vec<bool>> = t.iter().map(|r| r.iter().map(|&v| v == 1).collect()).collect();
    for n in 1..=cap {
        if power.iter().all(|r| r.iter().all(|&v| v)) {
            return Ok(n);
        }
        if n < cap {
            power = bool_mul(&power, t);
        }
    }
    let (row, col) = (0..q)
        .flat_map(|i| (0..q).map(move |j| (i, j)))
        .find(|&(i, j)| !power[i][j])
        .expect("non-primitive matrix has a zero entry");
    Err(Error::NotPrimitive { row, col, power: cap })
}
