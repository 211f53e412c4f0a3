//! Certification drivers: LP builders, the grid of token boxes, threshold
//! searches and parameter sweeps.

mod builders;
mod grid;
mod sweep;
mod threshold;

pub use builders::{
    dephasing_lp, joint_index, noiseless_lp, noisy_lp, ptc_token_model, tvd_lp, x1_valid, PTC_TOL,
};
pub use grid::{
    certify_noiseless, grid_certify, grid_certify_with_honest, honest_point_feasible, tvd_grid_certify,
};
pub use sweep::{sweep, Axis, AxisParam, SweepRow, SweepSpec, SweepTask};
pub use threshold::{
    bisect_threshold, dephasing_threshold, noise_threshold, tbsm_dephasing, tvd_radius,
    DephasingResult, Probe, ThresholdReport,
};

use serde::{Deserialize, Serialize};

use crate::lp::SolverConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    /// Subintervals per source.
    pub m: usize,
    /// Also solve the LP at the honest token probabilities.
    pub honest_check: bool,
    /// Cells whose LP is feasible are split into 2×2×2 subcells up to this
    /// depth before the grid counts as not certified. 0 is the plain grid.
    pub refine_depth: usize,
    pub solver: SolverConfig,
    /// Re-check every infeasibility certificate in exact arithmetic.
    pub exact_recheck: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { m: 10, honest_check: false, refine_depth: 0, solver: SolverConfig::default(), exact_recheck: true }
    }
}

impl GridConfig {
    pub fn with_m(m: usize) -> Self {
        Self { m, ..Self::default() }
    }

    pub fn validate(&self) -> crate::Result<()> {
        if self.m == 0 {
            return Err(crate::Error::InvalidParam { name: "grid.m", detail: "must be at least 1".into() });
        }
        self.solver.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    CertifiedNonlocal,
    NotCertified,
    Aborted(String),
}

impl Verdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, Verdict::CertifiedNonlocal)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::CertifiedNonlocal => "CertifiedNonlocal",
            Verdict::NotCertified => "NotCertified",
            Verdict::Aborted(_) => "Aborted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub verdict: Verdict,
    /// LPs that decided the verdict, counted in canonical cell order.
    pub lp_count: usize,
    pub all_certificates_verified: bool,
    /// Outcome of the exact re-check when it ran.
    pub exact_verified: Option<bool>,
    pub epsilon: Option<f64>,
    pub grid_m: Option<usize>,
    pub threshold: Option<f64>,
    pub honest_feasible: Option<bool>,
    /// Token box of the first cell that was not refuted.
    pub open_cell: Option<[[f64; 2]; 3]>,
    pub runtime_ms: u128,
}

impl CertificationReport {
    pub(crate) fn aborted(reason: impl Into<String>) -> Self {
        Self {
            verdict: Verdict::Aborted(reason.into()),
            lp_count: 0,
            all_certificates_verified: false,
            exact_verified: None,
            epsilon: None,
            grid_m: None,
            threshold: None,
            honest_feasible: None,
            open_cell: None,
            runtime_ms: 0,
        }
    }
}
