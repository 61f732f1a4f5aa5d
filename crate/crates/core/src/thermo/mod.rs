//! Pressure, Gibbs weights, quasi-multiplicativity and local product structure.

mod gibbs;
mod lps;
mod pressure;
mod qm;
mod weights;

pub use gibbs::{gibbs_constant, gibbs_weights, GibbsResult};
pub use lps::{lps_check, LpsReport, LPS_SLACK};
pub use pressure::{pressure_estimate, PressureReport};
pub use qm::{qm_search, QmCertificate, QmRecord, QM_FAILURE_THRESHOLD};
pub use weights::{ConsistencyDefects, CylinderWeights, PerronData, WeightSource, NORMALIZATION_TOL};

/// `log Σ exp(x_i)`, summed in the given order.
pub(crate) fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}
