use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{certify_noiseless, grid_certify_with_honest};
use super::threshold::{noise_threshold, tbsm_dephasing, tvd_radius};
use super::{CertificationReport, GridConfig, Verdict};
use crate::dist::{parity_fail, TokenModel};
use crate::error::{Error, Result};
use crate::qmodel::{tbsm_distribution, NoiseKind, NoiseSpec, TbsmParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisParam {
    PhiU,
    PhiW,
    Lambda0Sq,
    /// White noise at the sources.
    OmegaState,
    /// White noise at the measurements.
    OmegaMeas,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub param: AxisParam,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        (0..self.steps)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (self.steps - 1) as f64)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 || !(self.min <= self.max) || !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::InvalidParam {
                name: "sweep_axes",
                detail: format!("axis {:?} needs min <= max and steps >= 1", self.param),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepTask {
    /// Noiseless LP verdict.
    Noiseless,
    /// Dephasing threshold d*.
    Dephasing,
    /// Noise threshold for the given kind.
    NoiseThreshold(NoiseKind),
    /// Certified TVD radius.
    TvdRadius,
    /// Grid certification at the point's noise.
    Certify,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: TbsmParams,
    /// Noise applied at every point; ω axes add to it.
    pub noise: Vec<NoiseSpec>,
    pub axes: [Axis; 2],
    pub task: SweepTask,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub y: f64,
    pub params: TbsmParams,
    pub noise: Vec<NoiseSpec>,
    pub report: std::result::Result<CertificationReport, String>,
}

fn point(spec: &SweepSpec, x: f64, y: f64) -> (TbsmParams, Vec<NoiseSpec>) {
    let mut p = spec.base;
    let mut noise = spec.noise.clone();
    for (axis, v) in spec.axes.iter().zip([x, y]) {
        match axis.param {
            AxisParam::PhiU => p.phi_u = v,
            AxisParam::PhiW => p.phi_w = v,
            AxisParam::Lambda0Sq => p.lambda0_sq = v,
            AxisParam::OmegaState => noise.push(NoiseSpec { kind: NoiseKind::WhiteState, param: v }),
            AxisParam::OmegaMeas => noise.push(NoiseSpec { kind: NoiseKind::WhiteMeas, param: v }),
        }
    }
    (p, noise)
}

fn evaluate(task: &SweepTask, p: &TbsmParams, noise: &[NoiseSpec], g: &GridConfig) -> Result<CertificationReport> {
    match task {
        SweepTask::Noiseless => {
            let d = tbsm_distribution(p, noise)?;
            Ok(certify_noiseless(&d, g))
        }
        SweepTask::Certify => {
            let d = tbsm_distribution(p, noise)?;
            let eps = parity_fail(&d);
            let honest = TokenModel::new([p.lambda0_sq; 3])?;
            Ok(grid_certify_with_honest(&d, eps, g, Some(&honest)))
        }
        SweepTask::Dephasing => {
            let r = tbsm_dephasing(p, g)?;
            let mut rep = CertificationReport::aborted("");
            rep.verdict = if r.certified_below.is_some() { Verdict::CertifiedNonlocal } else { Verdict::NotCertified };
            rep.all_certificates_verified = true;
            rep.threshold = Some(r.d_star);
            rep.lp_count = r.lp_count;
            Ok(rep)
        }
        SweepTask::NoiseThreshold(kind) => threshold_row(noise_threshold(p, *kind, g)?),
        SweepTask::TvdRadius => {
            let d = tbsm_distribution(p, noise)?;
            threshold_row(tvd_radius(&d, g)?)
        }
    }
}

fn threshold_row(t: super::ThresholdReport) -> Result<CertificationReport> {
    let mut rep = CertificationReport::aborted("");
    rep.verdict = if t.threshold > 0.0 { Verdict::CertifiedNonlocal } else { Verdict::NotCertified };
    rep.all_certificates_verified = t.all_certificates_verified;
    rep.threshold = Some(t.threshold);
    rep.lp_count = t.lp_count;
    rep.runtime_ms = t.runtime_ms;
    Ok(rep)
}

/// Evaluates `spec.task` on the grid of axis values, x-major. Rows reach
/// `sink` in index order as soon as each block finishes; errors stay in
/// their row.
pub fn sweep(spec: &SweepSpec, g: &GridConfig, sink: &mut dyn FnMut(&SweepRow)) -> Result<Vec<SweepRow>> {
    spec.base.validate()?;
    for a in &spec.axes {
        a.validate()?;
    }
    g.validate()?;
    let xs = spec.axes[0].values();
    let ys = spec.axes[1].values();
    let cells: Vec<(usize, usize)> = (0..xs.len()).flat_map(|i| (0..ys.len()).map(move |j| (i, j))).collect();
    let block = rayon::current_num_threads().max(1);
    let mut rows = Vec::with_capacity(cells.len());
    for chunk in cells.chunks(block) {
        let done: Vec<SweepRow> = chunk
            .par_iter()
            .map(|&(i, j)| {
                let (params, noise) = point(spec, xs[i], ys[j]);
                let report = evaluate(&spec.task, &params, &noise, g).map_err(|e| e.to_string());
                SweepRow { i, j, x: xs[i], y: ys[j], params, noise, report }
            })
            .collect();
        for r in done {
            sink(&r);
            rows.push(r);
        }
    }
    Ok(rows)
}
