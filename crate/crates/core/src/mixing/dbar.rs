//! Exact d-bar distance between distributions of label sequences, solved as
//! a transportation problem by the u-v (MODI) simplex method.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use super::partition::{Label, MASS_FLOOR};
use crate::error::{Error, Result};

/// Largest support accepted on either side.
pub const MAX_SUPPORT: usize = 4096;
/// Tolerance on the total mass of an input distribution.
pub const MASS_TOL: f64 = 1e-9;
/// Reduced costs above `−PIVOT_TOL` count as optimal.
const PIVOT_TOL: f64 = 1e-12;

/// A finitely supported distribution over length-`n` label sequences.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelDistribution {
    pub n: usize,
    masses: BTreeMap<Vec<Label>, f64>,
}

impl LabelDistribution {
    pub fn new(n: usize, masses: BTreeMap<Vec<Label>, f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroLength);
        }
        let mut total = 0.0;
        for (seq, &m) in &masses {
            if seq.len() != n {
                return Err(Error::SequenceLength { expected: n, got: seq.len() });
            }
            if !(m.is_finite() && m >= 0.0) {
                return Err(Error::InvalidParameter(format!("mass {m} out of range")));
            }
            total += m;
        }
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::MarginalNotNormalized(total));
        }
        let before = masses.len();
        let masses: BTreeMap<_, _> = masses.into_iter().filter(|(_, m)| *m >= MASS_FLOOR).collect();
        if masses.len() < before {
            log::debug!("dropped {} sequences below {MASS_FLOOR}", before - masses.len());
        }
        Ok(Self { n, masses })
    }

    /// Divides by the total first.
    pub fn normalized(n: usize, mut masses: BTreeMap<Vec<Label>, f64>) -> Result<Self> {
        let total: f64 = masses.values().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::MarginalNotNormalized(total));
        }
        for m in masses.values_mut() {
            *m /= total;
        }
        Self::new(n, masses)
    }

    pub fn support(&self) -> usize {
        self.masses.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<Label>, f64)> {
        self.masses.iter().map(|(s, &m)| (s, m))
    }

    pub fn get(&self, seq: &[Label]) -> f64 {
        self.masses.get(seq).copied().unwrap_or(0.0)
    }
}

/// `h(x, y) = (1/n) #{i : x_i ≠ y_i}`.
pub fn hamming(x: &[Label], y: &[Label]) -> f64 {
    x.iter().zip(y).filter(|(a, b)| a != b).count() as f64 / x.len() as f64
}

/// A joining of two label distributions, stored sparsely.
#[derive(Debug, Clone, Serialize)]
pub struct Coupling {
    pub left: Vec<Vec<Label>>,
    pub right: Vec<Vec<Label>>,
    /// `(row, column, mass)` with positive mass.
    pub entries: Vec<(usize, usize, f64)>,
    pub left_marginal: Vec<f64>,
    pub right_marginal: Vec<f64>,
}

impl Coupling {
    /// Largest deviation of row and column sums from the marginals.
    pub fn marginal_error(&self) -> f64 {
        let mut rows = vec![0.0; self.left.len()];
        let mut cols = vec![0.0; self.right.len()];
        for &(i, j, m) in &self.entries {
            rows[i] += m;
            cols[j] += m;
        }
        let r = rows.iter().zip(&self.left_marginal).map(|(a, b)| (a - b).abs());
        let c = cols.iter().zip(&self.right_marginal).map(|(a, b)| (a - b).abs());
        r.chain(c).fold(0.0, f64::max)
    }

    pub fn cost(&self) -> f64 {
        self.entries.iter().map(|&(i, j, m)| m * hamming(&self.left[i], &self.right[j])).sum()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverStats {
    pub pivots: usize,
    pub degenerate_pivots: usize,
    pub fast_path: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DbarResult {
    pub value: f64,
    pub coupling: Coupling,
    /// Transportation potentials with `u_i + v_j ≤ h(i, j)`.
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub dual_value: f64,
    pub gap: f64,
    /// `max(0, max_{ij} u_i + v_j − h(i, j))`.
    pub dual_infeasibility: f64,
    pub stats: SolverStats,
}

pub fn dbar(left: &LabelDistribution, right: &LabelDistribution) -> Result<DbarResult> {
    if left.n != right.n {
        return Err(Error::SequenceLength { expected: left.n, got: right.n });
    }
    for d in [left, right] {
        if d.support() > MAX_SUPPORT {
            return Err(Error::SupportOverflow { size: d.support(), limit: MAX_SUPPORT });
        }
    }
    let ls: Vec<Vec<Label>> = left.masses.keys().cloned().collect();
    let rs: Vec<Vec<Label>> = right.masses.keys().cloned().collect();
    let a: Vec<f64> = left.masses.values().copied().collect();
    let b: Vec<f64> = right.masses.values().copied().collect();

    if ls == rs && a == b {
        let entries = (0..a.len()).map(|i| (i, i, a[i])).collect();
        let coupling = Coupling { left: ls, right: rs, entries, left_marginal: a.clone(), right_marginal: b };
        return Ok(DbarResult {
            value: 0.0,
            coupling,
            u: vec![0.0; a.len()],
            v: vec![0.0; a.len()],
            dual_value: 0.0,
            gap: 0.0,
            dual_infeasibility: 0.0,
            stats: SolverStats { pivots: 0, degenerate_pivots: 0, fast_path: true },
        });
    }

    let cost = |i: usize, j: usize| hamming(&ls[i], &rs[j]);
    let mut solver = Transport::northwest(&a, &b);
    let stats = solver.optimize(&cost)?;
    let (u, v) = solver.potentials(&cost);

    let mut entries: Vec<(usize, usize, f64)> = solver.basis.iter().copied().filter(|c| c.2 > 0.0).collect();
    entries.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    let dual_value: f64 =
        a.iter().zip(&u).map(|(x, y)| x * y).sum::<f64>() + b.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>();
    let mut dual_infeasibility: f64 = 0.0;
    for (i, ui) in u.iter().enumerate() {
        for (j, vj) in v.iter().enumerate() {
            dual_infeasibility = dual_infeasibility.max(ui + vj - cost(i, j));
        }
    }
    let coupling = Coupling { left: ls, right: rs, entries, left_marginal: a, right_marginal: b };
    let primal = coupling.cost();
    Ok(DbarResult {
        value: primal.clamp(0.0, 1.0),
        coupling,
        u,
        v,
        dual_value,
        gap: (primal - dual_value).abs(),
        dual_infeasibility,
        stats,
    })
}

/// Basic feasible solution of a balanced transportation problem: exactly
/// `m + n − 1` basic cells forming a spanning tree of rows and columns.
struct Transport {
    m: usize,
    n: usize,
    basis: Vec<(usize, usize, f64)>,
}

impl Transport {
    fn northwest(a: &[f64], b: &[f64]) -> Self {
        let (m, n) = (a.len(), b.len());
        let mut a = a.to_vec();
        let mut b = b.to_vec();
        let mut basis = Vec::with_capacity(m + n - 1);
        let (mut i, mut j) = (0, 0);
        loop {
            let x = a[i].min(b[j]);
            basis.push((i, j, x));
            a[i] -= x;
            b[j] -= x;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if j == n - 1 || (i < m - 1 && a[i] <= b[j]) {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self { m, n, basis }
    }

    /// Node ids: rows `0..m`, columns `m..m+n`; returns basic-cell indices per node.
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.m + self.n];
        for (k, &(i, j, _)) in self.basis.iter().enumerate() {
            adj[i].push(k);
            adj[self.m + j].push(k);
        }
        adj
    }

    fn potentials(&self, cost: &impl Fn(usize, usize) -> f64) -> (Vec<f64>, Vec<f64>) {
        let adj = self.adjacency();
        let mut pot = vec![f64::NAN; self.m + self.n];
        pot[0] = 0.0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(node) = queue.pop_front() {
            for &k in &adj[node] {
                let (i, j, _) = self.basis[k];
                let (row, col) = (i, self.m + j);
                let other = if node == row { col } else { row };
                if pot[other].is_nan() {
                    pot[other] = cost(i, j) - pot[node];
                    queue.push_back(other);
                }
            }
        }
        let v = pot.split_off(self.m);
        (pot, v)
    }

    /// Basic cells on the tree path from row `i` to column `j`, in order.
    fn path(&self, adj: &[Vec<usize>], i: usize, j: usize) -> Vec<usize> {
        let target = self.m + j;
        let mut via: Vec<Option<usize>> = vec![None; self.m + self.n];
        let mut seen = vec![false; self.m + self.n];
        seen[i] = true;
        let mut queue = VecDeque::from([i]);
        while let Some(node) = queue.pop_front() {
            if node == target {
                break;
            }
            for &k in &adj[node] {
                let (r, c, _) = self.basis[k];
                let other = if node == r { self.m + c } else { r };
                if !seen[other] {
                    seen[other] = true;
                    via[other] = Some(k);
                    queue.push_back(other);
                }
            }
        }
        let mut cells = Vec::new();
        let mut node = target;
        while node != i {
            let k = via[node].expect("basis is a spanning tree");
            cells.push(k);
            let (r, c, _) = self.basis[k];
            node = if node == r { self.m + c } else { r };
        }
        cells.reverse();
        cells
    }

    fn optimize(&mut self, cost: &impl Fn(usize, usize) -> f64) -> Result<SolverStats> {
        let limit = 50 * (self.m + self.n) * (self.m + self.n) + 1000;
        let mut stats = SolverStats { pivots: 0, degenerate_pivots: 0, fast_path: false };
        loop {
            let (u, v) = self.potentials(cost);
            let mut entering = None;
            let mut best = -PIVOT_TOL;
            for (i, ui) in u.iter().enumerate() {
                for (j, vj) in v.iter().enumerate() {
                    let r = cost(i, j) - ui - vj;
                    if r < best {
                        best = r;
                        entering = Some((i, j));
                    }
                }
            }
            let Some((i, j)) = entering else {
                return Ok(stats);
            };
            if stats.pivots >= limit {
                return Err(Error::SolverStalled(stats.pivots));
            }
            let adj = self.adjacency();
            let cycle = self.path(&adj, i, j);
            // Cells alternate −, +, −, … starting next to row i.
            let (theta, leave) = cycle
                .iter()
                .step_by(2)
                .map(|&k| (self.basis[k].2, k))
                .fold((f64::INFINITY, usize::MAX), |acc, c| if c.0 < acc.0 { c } else { acc });
            for (pos, &k) in cycle.iter().enumerate() {
                if pos % 2 == 0 {
                    self.basis[k].2 -= theta;
                } else {
                    self.basis[k].2 += theta;
                }
            }
            self.basis[leave] = (i, j, theta);
            // The leaving cell is exactly zero; clamp rounding noise on the others.
            for c in &mut self.basis {
                if c.2 < 0.0 {
                    c.2 = 0.0;
                }
            }
            stats.pivots += 1;
            if theta == 0.0 {
                stats.degenerate_pivots += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point(p: f64) -> LabelDistribution {
        LabelDistribution::new(1, BTreeMap::from([(vec![0], p), (vec![1], 1.0 - p)])).unwrap()
    }

    #[test]
    fn total_variation_for_single_labels() {
        for (p, q) in [(0.1, 0.7), (0.5, 0.5), (0.9, 0.2), (0.0, 1.0)] {
            let r = dbar(&two_point(p), &two_point(q)).unwrap();
            assert!((r.value - (p - q).abs()).abs() < 1e-12, "{p} {q} {}", r.value);
            assert!(r.gap < 1e-12 && r.dual_infeasibility < 1e-12);
            assert!(r.coupling.marginal_error() < 1e-12);
        }
    }

    #[test]
    fn identical_inputs_use_fast_path() {
        let d = two_point(0.3);
        let r = dbar(&d, &d).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.stats.fast_path);
    }

    #[test]
    fn two_step_sequences() {
        let l = LabelDistribution::new(2, BTreeMap::from([(vec![0, 0], 0.5), (vec![1, 1], 0.5)])).unwrap();
        let r = LabelDistribution::new(2, BTreeMap::from([(vec![0, 1], 0.5), (vec![1, 0], 0.5)])).unwrap();
        let res = dbar(&l, &r).unwrap();
        assert!((res.value - 0.5).abs() < 1e-12);
        assert!(res.gap < 1e-12);
    }

    #[test]
    fn validation() {
        let bad = LabelDistribution::new(1, BTreeMap::from([(vec![0], 0.5)]));
        assert!(matches!(bad, Err(Error::MarginalNotNormalized(_))));
        let len = LabelDistribution::new(2, BTreeMap::from([(vec![0], 1.0)]));
        assert!(matches!(len, Err(Error::SequenceLength { .. })));
        let a = two_point(0.5);
        let b = LabelDistribution::new(2, BTreeMap::from([(vec![0, 0], 1.0)])).unwrap();
        assert!(dbar(&a, &b).is_err());
    }
}
