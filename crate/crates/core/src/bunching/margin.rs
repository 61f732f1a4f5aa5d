use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cocycle::FiniteRangeCocycle;
use crate::error::{Error, Result};
use crate::sft::Word;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BunchingMode {
    Fiber,
    Strong,
}

impl fmt::Display for BunchingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BunchingMode::Fiber => "fiber",
            BunchingMode::Strong => "strong",
        })
    }
}

impl FromStr for BunchingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fiber" => Ok(BunchingMode::Fiber),
            "strong" => Ok(BunchingMode::Strong),
            _ => Err(Error::InvalidParameter(format!("unknown bunching mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BunchingReport {
    pub mode: BunchingMode,
    pub alpha: f64,
    pub d: usize,
    /// `max ‖A‖·‖A^{−1}‖` over the table.
    pub worst: f64,
    pub worst_window: Word,
    pub threshold: f64,
    pub margin: f64,
    pub passed: bool,
}

/// Threshold `2^α`, or `2^{α/3}` in strong mode when `d ≥ 3`.
pub fn bunching_margin(coc: &FiniteRangeCocycle, mode: BunchingMode) -> BunchingReport {
    let alpha = coc.alpha();
    let d = coc.dim();
    let threshold = match mode {
        BunchingMode::Strong if d >= 3 => 2f64.powf(alpha / 3.0),
        _ => 2f64.powf(alpha),
    };
    let (worst_window, worst) = coc
        .table()
        .iter()
        .map(|(w, m)| {
            let s = m.singular_values();
            (w, s[0] / s[d - 1])
        })
        .fold((Word::empty(), f64::NEG_INFINITY), |best, (w, v)| if v > best.1 { (w.clone(), v) } else { best });
    let margin = threshold - worst;
    BunchingReport { mode, alpha, d, worst, worst_window, threshold, margin, passed: margin > 0.0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::sft::Sft;

    #[test]
    fn examples() {
        let id = FiniteRangeCocycle::identity(Sft::full_shift(2).unwrap(), 2).unwrap();
        let r = bunching_margin(&id, BunchingMode::Fiber);
        assert_eq!((r.worst, r.margin, r.passed), (1.0, 1.0, true));

        let hyp = FiniteRangeCocycle::constant(Sft::full_shift(2).unwrap(), 1.0, Matrix::diag(&[2.0, 0.5])).unwrap();
        let r = bunching_margin(&hyp, BunchingMode::Fiber);
        assert_eq!(r.worst, 4.0);
        assert!(!r.passed);

        let near = FiniteRangeCocycle::constant(Sft::full_shift(2).unwrap(), 1.0, Matrix::diag(&[1.1, 1.0, 1.0])).unwrap();
        let r = bunching_margin(&near, BunchingMode::Strong);
        assert!((r.threshold - 2f64.powf(1.0 / 3.0)).abs() < 1e-15);
        assert!(r.passed);
    }

    #[test]
    fn scaling_invariance() {
        let a = Matrix::from_rows(&[[1.2, 0.3], [0.1, 0.9]]).unwrap();
        let sft = Sft::full_shift(2).unwrap();
        let c1 = FiniteRangeCocycle::constant(sft.clone(), 0.5, a.clone()).unwrap();
        let c2 = FiniteRangeCocycle::constant(sft, 0.5, a.scale(7.0)).unwrap();
        let (r1, r2) = (bunching_margin(&c1, BunchingMode::Fiber), bunching_margin(&c2, BunchingMode::Fiber));
        assert!((r1.worst - r2.worst).abs() < 1e-12);
        assert_eq!(r1.passed, r2.passed);
    }
}
