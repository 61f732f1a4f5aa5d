//! Burnside test: the generated algebra is all of `M_d` iff the family has no
//! common invariant subspace over ℂ.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};

/// Relative residual below which a product counts as already spanned.
const SPAN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct IrreducibilityReport {
    pub d: usize,
    /// Real dimension of the span of all products (identity included).
    pub algebra_dimension: usize,
    pub irreducible_over_c: bool,
    pub verdict: String,
}

/// Grows the span of `{id}` under left multiplication by the generators
/// until it stabilizes.
pub fn burnside_irreducibility(mats: &[Matrix]) -> Result<IrreducibilityReport> {
    let first = mats.first().ok_or(Error::InvalidParameter("no generators".into()))?;
    let d = first.dim();
    for m in mats {
        if m.dim() != d {
            return Err(Error::Dimension { expected: d, got: m.dim() });
        }
    }
    let full = d * d;
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut frontier = Vec::new();
    let id = Matrix::identity(d);
    if let Some(v) = add_to_span(&mut basis, &id) {
        frontier.push(v);
    }
    while !frontier.is_empty() && basis.len() < full {
        let mut next = Vec::new();
        for b in &frontier {
            for a in mats {
                let c = a * b;
                if let Some(v) = add_to_span(&mut basis, &c) {
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    let algebra_dimension = basis.len();
    let irreducible_over_c = algebra_dimension == full;
    let verdict = if irreducible_over_c {
        "irreducible over C (hence over R)".to_string()
    } else {
        "reducible over C; real reducibility requires inspection".to_string()
    };
    Ok(IrreducibilityReport { d, algebra_dimension, irreducible_over_c, verdict })
}

/// Adds `m` (normalized) if it leaves the current span; returns it for the frontier.
fn add_to_span(basis: &mut Vec<Vec<f64>>, m: &Matrix) -> Option<Matrix> {
    let d = m.dim();
    let scale = m.frobenius_norm();
    if scale == 0.0 {
        return None;
    }
    let flat: Vec<f64> = m.rows().concat().into_iter().map(|x| x / scale).collect();
    let mut r = flat.clone();
    for _ in 0..2 {
        for b in basis.iter() {
            let c = dot(&r, b);
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri -= c * bi;
            }
        }
    }
    let n = dot(&r, &r).sqrt();
    if n <= SPAN_TOL {
        return None;
    }
    basis.push(r.iter().map(|x| x / n).collect());
    Some(Matrix::from_fn(d, |i, j| flat[i * d + j]))
}
