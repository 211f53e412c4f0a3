use std::time::Instant;

use rayon::prelude::*;

use super::builders::{noiseless_lp, noisy_lp, ptc_token_model, tvd_lp};
use super::{CertificationReport, GridConfig, Verdict};
use crate::dist::{
    correlators, token_interval, token_orientation, CorrelatorVariant, Interval, TokenModel,
    TokenOrientation, TriangleDistribution,
};
use crate::error::Result;
use crate::lp::{check_farkas_exact, solve, LinearProgram, LpOutcome};

type Builder<'a> = dyn Fn(&[Interval; 3]) -> Result<LinearProgram> + Sync + 'a;

enum Cell {
    Refuted { lps: usize },
    Open { lps: usize, bx: [Interval; 3] },
    Failed { lps: usize, reason: String },
}

fn split(bx: &[Interval; 3]) -> Vec<[Interval; 3]> {
    let mut out = Vec::with_capacity(8);
    for i in 0..8 {
        out.push(std::array::from_fn(|s| bx[s].sub((i >> (2 - s)) & 1, 2)));
    }
    out
}

/// Tries to show that no token probabilities in `bx` admit a solution.
fn refute(bx: &[Interval; 3], orient: &TokenOrientation, depth: usize, g: &GridConfig, build: &Builder) -> Cell {
    let lp = match build(&orient.apply_box(bx)) {
        Ok(lp) => lp,
        Err(e) => return Cell::Failed { lps: 0, reason: e.to_string() },
    };
    match solve(&lp, &g.solver) {
        Ok(LpOutcome::Infeasible(cert)) => {
            if g.exact_recheck && !check_farkas_exact(&lp, &cert) {
                Cell::Failed { lps: 1, reason: "certificate fails exact re-verification".into() }
            } else {
                Cell::Refuted { lps: 1 }
            }
        }
        Ok(LpOutcome::Feasible { .. }) | Ok(LpOutcome::Optimal { .. }) => {
            if depth >= g.refine_depth {
                return Cell::Open { lps: 1, bx: *bx };
            }
            let mut lps = 1;
            for sub in split(bx) {
                match refute(&sub, orient, depth + 1, g, build) {
                    Cell::Refuted { lps: k } => lps += k,
                    Cell::Open { lps: k, bx } => return Cell::Open { lps: lps + k, bx },
                    Cell::Failed { lps: k, reason } => return Cell::Failed { lps: lps + k, reason },
                }
            }
            Cell::Refuted { lps }
        }
        Ok(LpOutcome::NumericalFailure(why)) => Cell::Failed { lps: 1, reason: why },
        Ok(other) => Cell::Failed { lps: 1, reason: format!("LP status {}", other.status_name()) },
        Err(e) => Cell::Failed { lps: 1, reason: e.to_string() },
    }
}

/// Cells of an m×m×m grid, nearest to the box centre first.
fn cell_order(m: usize) -> Vec<[usize; 3]> {
    let mut cells: Vec<[usize; 3]> = (0..m * m * m).map(|i| [i / (m * m), (i / m) % m, i % m]).collect();
    let c = (m as f64 - 1.0) / 2.0;
    let key = |x: &[usize; 3]| x.iter().map(|&k| (k as f64 - c).powi(2)).sum::<f64>();
    cells.sort_by(|a, b| key(a).total_cmp(&key(b)).then(a.cmp(b)));
    cells
}

fn run_grid(full: [Interval; 3], orient: TokenOrientation, g: &GridConfig, build: &Builder) -> CertificationReport {
    let m = if full.iter().all(|iv| iv.width() == 0.0) { 1 } else { g.m };
    let cells = cell_order(m);
    let chunk = rayon::current_num_threads().max(1);
    let mut report = CertificationReport::aborted("");
    report.grid_m = Some(m);
    for block in cells.chunks(chunk) {
        let results: Vec<Cell> = block
            .par_iter()
            .map(|c| {
                let bx: [Interval; 3] = std::array::from_fn(|s| full[s].sub(c[s], m));
                refute(&bx, &orient, 0, g, build)
            })
            .collect();
        for r in results {
            match r {
                Cell::Refuted { lps } => report.lp_count += lps,
                Cell::Open { lps, bx } => {
                    report.lp_count += lps;
                    report.verdict = Verdict::NotCertified;
                    report.open_cell = Some(bx.map(|iv| [iv.lo, iv.hi]));
                    report.all_certificates_verified = true;
                    return report;
                }
                Cell::Failed { lps, reason } => {
                    report.lp_count += lps;
                    report.verdict = Verdict::Aborted(reason);
                    return report;
                }
            }
        }
    }
    report.verdict = Verdict::CertifiedNonlocal;
    report.all_certificates_verified = true;
    report.exact_verified = g.exact_recheck.then_some(true);
    report
}

/// Grid-of-LPs certification of a distribution with parity failure at most ε.
pub fn grid_certify(p: &TriangleDistribution, eps: f64, g: &GridConfig) -> CertificationReport {
    grid_certify_with_honest(p, eps, g, None)
}

/// As [`grid_certify`], additionally solving the LP at `honest` token
/// probabilities when `g.honest_check` is set.
pub fn grid_certify_with_honest(
    p: &TriangleDistribution,
    eps: f64,
    g: &GridConfig,
    honest: Option<&TokenModel>,
) -> CertificationReport {
    let start = Instant::now();
    let mut report = match grid_certify_inner(p, eps, g) {
        Ok(r) => r,
        Err(e) => CertificationReport::aborted(e.to_string()),
    };
    report.epsilon = Some(eps);
    if g.honest_check {
        if let Some(h) = honest {
            report.honest_feasible = honest_point_feasible(p, eps, h, g).ok();
            report.lp_count += 1;
        }
    }
    report.runtime_ms = start.elapsed().as_millis();
    report
}

fn grid_certify_inner(p: &TriangleDistribution, eps: f64, g: &GridConfig) -> Result<CertificationReport> {
    g.validate()?;
    let e = correlators(p, CorrelatorVariant::Lambda);
    let full = token_interval(&e, eps, 3.0)?;
    let orient = token_orientation(&e)?;
    Ok(run_grid(full, orient, g, &|bx| noisy_lp(p, eps, bx)))
}

/// Whether the noisy LP is feasible with the token probabilities pinned to `q`.
pub fn honest_point_feasible(p: &TriangleDistribution, eps: f64, q: &TokenModel, g: &GridConfig) -> Result<bool> {
    let bx = q.q.map(Interval::point);
    let lp = noisy_lp(p, eps, &bx)?;
    Ok(!solve(&lp, &g.solver)?.is_infeasible())
}

/// Certifies every distribution within total-variation distance ε of the
/// exactly-PTC distribution `pbar`.
pub fn tvd_grid_certify(pbar: &TriangleDistribution, eps: f64, g: &GridConfig) -> CertificationReport {
    let start = Instant::now();
    let inner = || -> Result<CertificationReport> {
        g.validate()?;
        let e = correlators(pbar, CorrelatorVariant::Plain);
        let full = token_interval(&e, eps, 6.0)?;
        let orient = token_orientation(&e)?;
        Ok(run_grid(full, orient, g, &|bx| tvd_lp(pbar, eps, bx)))
    };
    let mut report = inner().unwrap_or_else(|e| CertificationReport::aborted(e.to_string()));
    report.epsilon = Some(eps);
    report.runtime_ms = start.elapsed().as_millis();
    report
}

/// Noiseless certification with the token probabilities fixed by the
/// first-bit correlators.
pub fn certify_noiseless(p: &TriangleDistribution, g: &GridConfig) -> CertificationReport {
    let start = Instant::now();
    let inner = || -> Result<CertificationReport> {
        let t = ptc_token_model(p)?;
        let lp = noiseless_lp(p, &t)?;
        let mut r = CertificationReport::aborted("");
        r.lp_count = 1;
        r.epsilon = Some(0.0);
        match solve(&lp, &g.solver)? {
            LpOutcome::Infeasible(cert) => {
                let exact = !g.exact_recheck || check_farkas_exact(&lp, &cert);
                r.exact_verified = g.exact_recheck.then_some(exact);
                if exact {
                    r.verdict = Verdict::CertifiedNonlocal;
                    r.all_certificates_verified = true;
                } else {
                    r.verdict = Verdict::Aborted("certificate fails exact re-verification".into());
                }
            }
            LpOutcome::Feasible { .. } | LpOutcome::Optimal { .. } => {
                r.verdict = Verdict::NotCertified;
                r.all_certificates_verified = true;
            }
            other => r.verdict = Verdict::Aborted(format!("LP status {}", other.status_name())),
        }
        Ok(r)
    };
    let mut report = inner().unwrap_or_else(|e| CertificationReport::aborted(e.to_string()));
    report.runtime_ms = start.elapsed().as_millis();
    report
}
