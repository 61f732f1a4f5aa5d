//! Canonical holonomy approximants.
//!
//! Stable: `h_n = 𝒜^n(y)^{−1} 𝒜^n(x)` for `y` with the same right tail as `x`.
//! Unstable: `h_n = 𝒜^n(σ^{−n}y) 𝒜^n(σ^{−n}x)^{−1}` for the same left tail.
//! Each step adds `Y(D − I)X` where `D` compares the two generators used at
//! that step; `D` is exactly the identity when their windows coincide, so
//! increments of a finite-range cocycle vanish exactly once the windows agree.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::margin::{bunching_margin, BunchingMode};
use crate::cocycle::FiniteRangeCocycle;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::point::PointSpec;

/// Increments used for the geometric fit.
const FIT_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[serde(alias = "s")]
    Stable,
    #[serde(alias = "u")]
    Unstable,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Stable => "s",
            Side::Unstable => "u",
        })
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s" | "stable" => Ok(Side::Stable),
            "u" | "unstable" => Ok(Side::Unstable),
            _ => Err(Error::InvalidParameter(format!("unknown side {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HolonomyApprox {
    pub side: Side,
    pub x: PointSpec,
    pub y: PointSpec,
    pub n_max: usize,
    /// First coordinate of agreement (stable) or last one (unstable).
    pub agreement: i64,
    /// `‖h_m − h_{m−1}‖` for `m = 1 … n_max`, with `h_0 = id`.
    pub increments: Vec<f64>,
    pub fitted_ratio: f64,
    pub fit_residual: f64,
    pub estimate: Matrix,
    pub error_estimate: f64,
    #[serde(skip)]
    pub approximants: Vec<Matrix>,
}

fn check_relation(x: &PointSpec, y: &PointSpec, side: Side) -> Result<i64> {
    match side {
        Side::Stable => x.stable_agreement_start(y).ok_or(Error::NotRelated("points have different right tails")),
        Side::Unstable => x.unstable_agreement_end(y).ok_or(Error::NotRelated("points have different left tails")),
    }
}

/// `h_1 … h_n` without preconditions beyond the tail relation.
fn approximants(coc: &FiniteRangeCocycle, x: &PointSpec, y: &PointSpec, side: Side, n: usize) -> Result<Vec<Matrix>> {
    let d = coc.dim();
    let k = coc.radius();
    let id = Matrix::identity(d);
    let mut h = id.clone();
    // Stable: left = 𝒜^m(y)^{−1}, right = 𝒜^m(x). Unstable: left = 𝒜^m(σ^{−m}y), right = 𝒜^m(σ^{−m}x)^{−1}.
    let mut left = id.clone();
    let mut right = id.clone();
    let mut out = Vec::with_capacity(n);
    for m in 1..=n {
        let start = match side {
            Side::Stable => m as i64 - 1,
            Side::Unstable => -(m as i64),
        };
        let wx = x.window(start, k + 1);
        let wy = y.window(start, k + 1);
        let ax = coc.generator(&wx)?;
        match side {
            Side::Stable => {
                if wx == wy {
                    left = &left * &ax.inverse()?;
                } else {
                    let ay_inv = coc.generator(&wy)?.inverse()?;
                    let step = &(&ay_inv * ax) - &id;
                    h = &h + &(&(&left * &step) * &right);
                    left = &left * &ay_inv;
                }
                right = ax * &right;
            }
            Side::Unstable => {
                let ax_inv = ax.inverse()?;
                if wx == wy {
                    left = &left * ax;
                } else {
                    let ay = coc.generator(&wy)?;
                    let step = &(ay * &ax_inv) - &id;
                    h = &h + &(&(&left * &step) * &right);
                    left = &left * ay;
                }
                right = &ax_inv * &right;
            }
        }
        if !h.is_finite() {
            return Err(Error::NonFinite);
        }
        out.push(h.clone());
    }
    Ok(out)
}

/// The single approximant `h_n(x, y)`.
pub fn holonomy_approximant(coc: &FiniteRangeCocycle, x: &PointSpec, y: &PointSpec, side: Side, n: usize) -> Result<Matrix> {
    check_relation(x, y, side)?;
    if n == 0 {
        return Ok(Matrix::identity(coc.dim()));
    }
    Ok(approximants(coc, x, y, side, n)?.pop().expect("n ≥ 1"))
}

/// Approximant sequence with a geometric fit of its increments.
pub fn holonomy(coc: &FiniteRangeCocycle, x: &PointSpec, y: &PointSpec, side: Side, n_max: usize) -> Result<HolonomyApprox> {
    if n_max == 0 {
        return Err(Error::ZeroLength);
    }
    x.check_admissible(coc.sft())?;
    y.check_admissible(coc.sft())?;
    let agreement = check_relation(x, y, side)?;
    // A radius-0 cocycle has trivial local holonomies whatever its bunching.
    if coc.radius() > 0 {
        let b = bunching_margin(coc, BunchingMode::Fiber);
        if !b.passed {
            return Err(Error::NotBunched { worst: b.worst, threshold: b.threshold });
        }
    }
    let hs = approximants(coc, x, y, side, n_max)?;
    let mut increments = Vec::with_capacity(n_max);
    let mut prev = Matrix::identity(coc.dim());
    for h in &hs {
        increments.push(h.dist(&prev));
        prev = h.clone();
    }
    let (fitted_ratio, fit_residual) = fit_ratio(&increments);
    if fitted_ratio >= 1.0 {
        return Err(Error::Divergent(fitted_ratio));
    }
    let last = *increments.last().expect("n_max ≥ 1");
    let error_estimate = if last == 0.0 { 0.0 } else { last / (1.0 - fitted_ratio) };
    Ok(HolonomyApprox {
        side,
        x: x.clone(),
        y: y.clone(),
        n_max,
        agreement,
        increments,
        fitted_ratio,
        fit_residual,
        estimate: prev,
        error_estimate,
        approximants: hs,
    })
}

/// Least-squares slope of `log e_m` over the trailing positive increments;
/// 0 when the sequence ends in an exact zero.
fn fit_ratio(increments: &[f64]) -> (f64, f64) {
    if increments.last().is_none_or(|&e| e == 0.0) {
        return (0.0, 0.0);
    }
    let tail: Vec<(f64, f64)> = increments
        .iter()
        .enumerate()
        .rev()
        .take_while(|(_, &e)| e > 0.0)
        .take(FIT_WINDOW)
        .map(|(i, &e)| (i as f64, e.ln()))
        .collect();
    if tail.len() < 2 {
        // One isolated nonzero step: no evidence of decay.
        return (1.0, 0.0);
    }
    let m = tail.len() as f64;
    let mx = tail.iter().map(|p| p.0).sum::<f64>() / m;
    let my = tail.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = tail.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let residual = (tail.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum::<f64>() / m).sqrt();
    (slope.exp(), residual)
}

/// `‖𝒜(y) h_n(x, y) − h'(σx, σy) 𝒜(x)‖` with `h' = h_{n−1}` (stable) or
/// `h_{n+1}` (unstable), the finite-level form of equivariance.
pub fn equivariance_defect(coc: &FiniteRangeCocycle, x: &PointSpec, y: &PointSpec, side: Side, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::ZeroLength);
    }
    let h = holonomy_approximant(coc, x, y, side, n)?;
    let shifted_n = match side {
        Side::Stable => n - 1,
        Side::Unstable => n + 1,
    };
    let hs = holonomy_approximant(coc, &x.shift(1), &y.shift(1), side, shifted_n)?;
    let lhs = coc.at_point(y)? * &h;
    let rhs = &hs * coc.at_point(x)?;
    Ok(lhs.dist(&rhs))
}
