//! Dense two-phase primal simplex with bounded variables.
//!
//! Variables are shifted to x̄ = x − lower ∈ [0, upper − lower]. Each row gets
//! a slack (inequalities) and, when the slack cannot start basic, an
//! artificial; rows are sign-normalized so the starting basis is the identity
//! and its tableau columns hold B⁻¹ throughout. Phase one minimizes the sum
//! of artificials; when it stays positive the row duals give the Farkas
//! multipliers directly.

use nalgebra::{DMatrix, DVector};

use super::verify::{check_point, farkas_gap};
use super::{FarkasCertificate, LinearProgram, LpBackend, LpOutcome, Sense, SolverConfig};

const PRICE_TOL: f64 = 1e-10;
const TINY: f64 = 1e-13;
const HARRIS_TOL: f64 = 1e-11;
const REFACTOR_EVERY: usize = 50;
const DEGENERATE_STEP: f64 = 1e-12;
const BLAND_AFTER: usize = 10_000;
const NONE: usize = usize::MAX;

/// The built-in backend.
#[derive(Debug, Clone, Copy, Default)]
pub struct BoundedSimplex;

impl LpBackend for BoundedSimplex {
    fn name(&self) -> &str {
        "builtin-simplex"
    }

    fn solve_unchecked(&self, lp: &LinearProgram, cfg: &SolverConfig) -> LpOutcome {
        Tableau::new(lp).solve(lp, cfg)
    }
}

enum PhaseEnd {
    Optimal,
    Unbounded,
    PivotLimit,
}

struct Tableau {
    m: usize,
    n: usize,
    nc: usize,
    t: Vec<f64>,
    /// Sign-normalized constraint matrix before any pivot.
    a0: Vec<f64>,
    b0: Vec<f64>,
    xb: Vec<f64>,
    basis: Vec<usize>,
    row_of: Vec<usize>,
    at_upper: Vec<bool>,
    ub: Vec<f64>,
    d: Vec<f64>,
    init_col: Vec<usize>,
    sigma: Vec<f64>,
    is_art: Vec<bool>,
    lower: Vec<f64>,
    pivots: usize,
}

impl Tableau {
    fn new(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let m = lp.num_constraints();
        let lower: Vec<f64> = lp.variables().iter().map(|v| v.lower).collect();
        let n_slack = lp.constraints().iter().filter(|c| c.sense != Sense::Eq).count();

        let mut rhs = Vec::with_capacity(m);
        let mut sigma = Vec::with_capacity(m);
        let mut needs_art = Vec::with_capacity(m);
        for c in lp.constraints() {
            let shifted = c.rhs - c.terms.iter().map(|&(j, a)| a * lower[j]).sum::<f64>();
            let s = if shifted < 0.0 { -1.0 } else { 1.0 };
            let slack_sign = match c.sense {
                Sense::Le => 1.0,
                Sense::Ge => -1.0,
                Sense::Eq => 0.0,
            };
            rhs.push(s * shifted);
            sigma.push(s);
            needs_art.push(s * slack_sign <= 0.0);
        }
        let n_art = needs_art.iter().filter(|&&x| x).count();
        let nc = n + n_slack + n_art;

        let mut t = vec![0.0; m * nc];
        let mut ub = vec![f64::INFINITY; nc];
        for (j, v) in lp.variables().iter().enumerate() {
            ub[j] = v.upper - v.lower;
        }
        let mut is_art = vec![false; nc];
        let mut basis = vec![NONE; m];
        let mut slack_col = n;
        let mut art_col = n + n_slack;
        for (i, c) in lp.constraints().iter().enumerate() {
            let row = &mut t[i * nc..(i + 1) * nc];
            for &(j, a) in &c.terms {
                row[j] = sigma[i] * a;
            }
            if c.sense != Sense::Eq {
                let k = if c.sense == Sense::Le { 1.0 } else { -1.0 };
                row[slack_col] = sigma[i] * k;
                if !needs_art[i] {
                    basis[i] = slack_col;
                }
                slack_col += 1;
            }
            if needs_art[i] {
                row[art_col] = 1.0;
                is_art[art_col] = true;
                basis[i] = art_col;
                art_col += 1;
            }
        }
        let mut row_of = vec![NONE; nc];
        for (i, &b) in basis.iter().enumerate() {
            row_of[b] = i;
        }
        Self {
            m,
            n,
            nc,
            a0: t.clone(),
            t,
            b0: rhs.clone(),
            xb: rhs,
            init_col: basis.clone(),
            basis,
            row_of,
            at_upper: vec![false; nc],
            ub,
            d: vec![0.0; nc],
            sigma,
            is_art,
            lower,
            pivots: 0,
        }
    }

    fn price(&mut self, cost: &[f64]) {
        self.d.copy_from_slice(cost);
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * self.nc..(i + 1) * self.nc];
                for (dk, &tk) in self.d.iter_mut().zip(row) {
                    *dk -= cb * tk;
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let nc = self.nc;
        let inv = 1.0 / self.t[r * nc + j];
        let mut nz: Vec<(usize, f64)> = Vec::with_capacity(nc);
        for k in 0..nc {
            let v = self.t[r * nc + k];
            if v != 0.0 {
                let s = v * inv;
                self.t[r * nc + k] = s;
                nz.push((k, s));
            }
        }
        self.t[r * nc + j] = 1.0;
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * nc + j];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * nc..(i + 1) * nc];
            for &(k, s) in &nz {
                row[k] -= f * s;
            }
            row[j] = 0.0;
        }
        let f = self.d[j];
        if f != 0.0 {
            for &(k, s) in &nz {
                self.d[k] -= f * s;
            }
            self.d[j] = 0.0;
        }
        let leaving = self.basis[r];
        self.row_of[leaving] = NONE;
        self.basis[r] = j;
        self.row_of[j] = r;
    }

    fn run(&mut self, max_pivots: usize) -> PhaseEnd {
        let nc = self.nc;
        let mut degenerate = 0usize;
        let mut bland = false;
        loop {
            if self.pivots >= max_pivots {
                return PhaseEnd::PivotLimit;
            }
            let mut enter = NONE;
            let mut best = 0.0;
            for j in 0..nc {
                if self.row_of[j] != NONE || self.ub[j] <= 0.0 {
                    continue;
                }
                let dj = self.d[j];
                let score = if !self.at_upper[j] && dj < -PRICE_TOL {
                    -dj
                } else if self.at_upper[j] && dj > PRICE_TOL {
                    dj
                } else {
                    continue;
                };
                if bland {
                    enter = j;
                    break;
                }
                if score > best {
                    best = score;
                    enter = j;
                }
            }
            if enter == NONE {
                return PhaseEnd::Optimal;
            }
            let j = enter;
            let dir = if self.at_upper[j] { -1.0 } else { 1.0 };

            // Harris two-pass ratio test: bound the step with every row relaxed
            // by the feasibility tolerance, then pick the largest pivot among
            // rows that block within that bound.
            let delta_of = |r: usize| -dir * self.t[r * nc + j];
            let limit = |r: usize, relax: f64| -> Option<f64> {
                let delta = delta_of(r);
                if delta.abs() <= TINY {
                    return None;
                }
                if delta < 0.0 {
                    Some((self.xb[r].max(0.0) + relax) / -delta)
                } else {
                    let u = self.ub[self.basis[r]];
                    if u.is_infinite() {
                        return None;
                    }
                    Some(((u - self.xb[r]).max(0.0) + relax) / delta)
                }
            };
            let mut bound = self.ub[j];
            for r in 0..self.m {
                if let Some(l) = limit(r, HARRIS_TOL) {
                    bound = bound.min(l);
                }
            }
            let mut theta = self.ub[j];
            let mut leave = NONE;
            let mut leave_piv = 0.0f64;
            if bound < self.ub[j] {
                for r in 0..self.m {
                    let Some(l) = limit(r, 0.0) else { continue };
                    if l > bound {
                        continue;
                    }
                    let a = delta_of(r).abs();
                    let better = leave == NONE
                        || if bland { self.basis[r] < self.basis[leave] } else { a > leave_piv };
                    if better {
                        leave = r;
                        leave_piv = a;
                        theta = l;
                    }
                }
            }
            if theta.is_infinite() {
                return PhaseEnd::Unbounded;
            }
            for r in 0..self.m {
                let a = self.t[r * nc + j];
                if a != 0.0 {
                    self.xb[r] -= theta * dir * a;
                }
            }
            if leave == NONE {
                self.at_upper[j] = !self.at_upper[j];
                continue;
            }
            let r = leave;
            let l = self.basis[r];
            let went_up = -dir * self.t[r * nc + j] > 0.0;
            self.at_upper[l] = went_up;
            self.xb[r] = if dir > 0.0 { theta } else { self.ub[j] - theta };
            self.at_upper[j] = false;
            self.pivot(r, j);
            self.pivots += 1;
            if self.pivots % REFACTOR_EVERY == 0 {
                self.refactor_values();
            }
            if theta <= DEGENERATE_STEP {
                degenerate += 1;
                if degenerate > BLAND_AFTER {
                    bland = true;
                }
            }
        }
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        if self.at_upper[j] {
            self.ub[j]
        } else {
            0.0
        }
    }

    fn point(&self) -> Vec<f64> {
        (0..self.n)
            .map(|j| {
                let xbar = match self.row_of[j] {
                    NONE => self.nonbasic_value(j),
                    r => self.xb[r],
                };
                self.lower[j] + xbar.clamp(0.0, self.ub[j])
            })
            .collect()
    }

    fn basis_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.m, self.m, |i, r| self.a0[i * self.nc + self.basis[r]])
    }

    /// Recomputes the basic values from the original data.
    fn refactor_values(&mut self) -> bool {
        let mut rhs = DVector::from_column_slice(&self.b0);
        for j in 0..self.nc {
            if self.row_of[j] == NONE && self.at_upper[j] {
                for i in 0..self.m {
                    rhs[i] -= self.ub[j] * self.a0[i * self.nc + j];
                }
            }
        }
        match self.basis_matrix().lu().solve(&rhs) {
            Some(x) => {
                self.xb.copy_from_slice(x.as_slice());
                true
            }
            None => false,
        }
    }

    /// Row duals of the normalized system, from the tableau or refactored.
    fn duals(&self, cost: &[f64], refactor: bool) -> Option<Vec<f64>> {
        if !refactor {
            return Some((0..self.m).map(|k| cost[self.init_col[k]] - self.d[self.init_col[k]]).collect());
        }
        let cb = DVector::from_fn(self.m, |r, _| cost[self.basis[r]]);
        self.basis_matrix().transpose().lu().solve(&cb).map(|y| y.as_slice().to_vec())
    }

    fn certificate(&self, lp: &LinearProgram, ynorm: &[f64]) -> FarkasCertificate {
        let mut y: Vec<f64> = ynorm.iter().zip(&self.sigma).map(|(v, s)| -s * v).collect();
        let scale = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if scale > 0.0 {
            for v in y.iter_mut() {
                *v /= scale;
            }
        }
        for (v, c) in y.iter_mut().zip(lp.constraints()) {
            let wrong = match c.sense {
                Sense::Le => *v < 0.0,
                Sense::Ge => *v > 0.0,
                Sense::Eq => false,
            };
            if wrong && v.abs() < 1e-9 {
                *v = 0.0;
            }
            if v.abs() < 1e-15 {
                *v = 0.0;
            }
        }
        FarkasCertificate { y }
    }

    fn solve(mut self, lp: &LinearProgram, cfg: &SolverConfig) -> LpOutcome {
        let cost1: Vec<f64> = self.is_art.iter().map(|&a| if a { 1.0 } else { 0.0 }).collect();
        if self.is_art.iter().any(|&a| a) {
            self.price(&cost1);
            match self.run(cfg.max_pivots) {
                PhaseEnd::Optimal => {}
                PhaseEnd::Unbounded => {
                    return LpOutcome::NumericalFailure("phase one reported unbounded".into())
                }
                PhaseEnd::PivotLimit => {
                    return LpOutcome::NumericalFailure(format!("pivot limit {} reached", cfg.max_pivots))
                }
            }
            self.refactor_values();
            let w: f64 = (0..self.m).filter(|&r| self.is_art[self.basis[r]]).map(|r| self.xb[r]).sum();
            if w > cfg.tol_feas {
                let cert = self.certificate(lp, &self.duals(&cost1, false).unwrap_or_default());
                if farkas_gap(lp, &cert) > cfg.tol_farkas {
                    return LpOutcome::Infeasible(cert);
                }
                if let Some(y) = self.duals(&cost1, true) {
                    let cert = self.certificate(lp, &y);
                    if farkas_gap(lp, &cert) > cfg.tol_farkas {
                        return LpOutcome::Infeasible(cert);
                    }
                    return LpOutcome::NumericalFailure(format!(
                        "phase one optimum {w:e} without a verifiable certificate (gap {:e})",
                        farkas_gap(lp, &cert)
                    ));
                }
                return LpOutcome::NumericalFailure("singular basis in phase one".into());
            }
            for j in 0..self.nc {
                if self.is_art[j] {
                    self.ub[j] = 0.0;
                }
            }
        }

        let value_of = |x: &[f64]| -> Option<f64> {
            lp.objective().map(|o| o.iter().map(|&(j, c)| c * x[j]).sum())
        };
        if let Some(obj) = lp.objective() {
            let mut cost2 = vec![0.0; self.nc];
            for &(j, c) in obj {
                cost2[j] = c;
            }
            self.price(&cost2);
            match self.run(cfg.max_pivots) {
                PhaseEnd::Optimal => {}
                PhaseEnd::Unbounded => return LpOutcome::Unbounded,
                PhaseEnd::PivotLimit => {
                    return LpOutcome::NumericalFailure(format!("pivot limit {} reached", cfg.max_pivots))
                }
            }
        }
        let mut x = self.point();
        if !check_point(lp, &x, cfg.tol_feas) && self.refactor_values() {
            x = self.point();
        }
        match value_of(&x) {
            Some(value) => LpOutcome::Optimal { value, point: x },
            None => LpOutcome::Feasible { point: x },
        }
    }
}
