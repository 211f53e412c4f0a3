//! Linear programs, a bounded-variable simplex solver, and verification of
//! its answers.
//!
//! Every `Feasible`/`Optimal` point returned by [`solve`] has passed
//! [`check_point`] and every `Infeasible` certificate has passed
//! [`check_farkas`]; anything else comes back as `NumericalFailure`.

mod exact;
mod export;
mod simplex;
mod verify;

pub use exact::check_farkas_exact;
pub use export::to_lp_format;
pub use simplex::BoundedSimplex;
pub use verify::{check_farkas, check_point, farkas_gap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

/// Sparse row `Σ coeff·x[var] (sense) rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    /// Minimized when present.
    objective: Option<Vec<(usize, f64)>>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> usize {
        self.variables.push(Variable { name: name.into(), lower, upper });
        self.variables.len() - 1
    }

    /// Adds a constraint; repeated variable indices are merged and exact zeros dropped.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> usize {
        let terms = merge_terms(terms);
        self.constraints.push(Constraint { name: name.into(), terms, sense, rhs });
        self.constraints.len() - 1
    }

    pub fn set_objective(&mut self, terms: impl IntoIterator<Item = (usize, f64)>) {
        self.objective = Some(merge_terms(terms));
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> Option<&[(usize, f64)]> {
        self.objective.as_deref()
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Multiplies constraint `i` (row and rhs) by `s`, flipping the sense when `s < 0`.
    pub fn scale_constraint(&mut self, i: usize, s: f64) {
        let c = &mut self.constraints[i];
        for t in c.terms.iter_mut() {
            t.1 *= s;
        }
        c.rhs *= s;
        if s < 0.0 {
            c.sense = match c.sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.variables.len();
        let mut used = vec![false; n];
        for v in &self.variables {
            if !v.lower.is_finite() || v.upper.is_nan() || v.upper == f64::NEG_INFINITY {
                return Err(Error::InvalidLp(format!("variable {} needs a finite lower bound", v.name)));
            }
            if v.lower > v.upper {
                return Err(Error::InvalidLp(format!("variable {} has empty bounds", v.name)));
            }
        }
        let rows = self.constraints.iter().map(|c| (&c.name, &c.terms, Some(c.rhs)));
        let obj = self.objective.iter().map(|o| (&EMPTY_NAME, o, None));
        for (name, terms, rhs) in rows.chain(obj) {
            if rhs.is_some_and(|r| !r.is_finite()) {
                return Err(Error::InvalidLp(format!("row {name} has a non-finite rhs")));
            }
            for &(j, a) in terms {
                if j >= n {
                    return Err(Error::InvalidLp(format!("row {name} references variable {j}")));
                }
                if !a.is_finite() {
                    return Err(Error::InvalidLp(format!("row {name} has a non-finite coefficient")));
                }
                used[j] = true;
            }
        }
        if let Some(j) = used.iter().position(|u| !u) {
            return Err(Error::InvalidLp(format!("variable {} is unused", self.variables[j].name)));
        }
        Ok(())
    }
}

static EMPTY_NAME: String = String::new();

fn merge_terms(terms: impl IntoIterator<Item = (usize, f64)>) -> Vec<(usize, f64)> {
    let mut v: Vec<(usize, f64)> = terms.into_iter().collect();
    v.sort_by_key(|t| t.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(v.len());
    for (j, a) in v {
        match out.last_mut() {
            Some(last) if last.0 == j => last.1 += a,
            _ => out.push((j, a)),
        }
    }
    out.retain(|t| t.1 != 0.0);
    out
}

/// Multipliers `y` (one per constraint) such that Σ yᵢ·rowᵢ ≤ Σ yᵢ·rhsᵢ is
/// implied by the constraints, yet unattainable within the variable bounds.
/// Sign convention: yᵢ ≥ 0 on `≤` rows, yᵢ ≤ 0 on `≥` rows, free on equalities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarkasCertificate {
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LpOutcome {
    Feasible { point: Vec<f64> },
    Optimal { value: f64, point: Vec<f64> },
    Infeasible(FarkasCertificate),
    Unbounded,
    NumericalFailure(String),
}

impl LpOutcome {
    pub fn is_infeasible(&self) -> bool {
        matches!(self, LpOutcome::Infeasible(_))
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, LpOutcome::Feasible { .. } | LpOutcome::Optimal { .. })
    }

    pub fn status_name(&self) -> &'static str {
        match self {
            LpOutcome::Feasible { .. } => "feasible",
            LpOutcome::Optimal { .. } => "optimal",
            LpOutcome::Infeasible(_) => "infeasible",
            LpOutcome::Unbounded => "unbounded",
            LpOutcome::NumericalFailure(_) => "numerical_failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Builtin,
    External(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub tol_feas: f64,
    pub tol_farkas: f64,
    pub max_pivots: usize,
    pub backend: Backend,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol_feas: 1e-9, tol_farkas: 1e-9, max_pivots: 1_000_000, backend: Backend::Builtin }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_feas > 0.0 && self.tol_farkas > 0.0) {
            return Err(Error::InvalidParam { name: "solver", detail: "tolerances must be positive".into() });
        }
        Ok(())
    }
}

/// A solver that maps an LP to an unverified outcome. [`solve_with`] applies
/// the verification gates to whatever it returns.
pub trait LpBackend: Send + Sync {
    fn name(&self) -> &str;
    fn solve_unchecked(&self, lp: &LinearProgram, cfg: &SolverConfig) -> LpOutcome;
}

pub fn solve(lp: &LinearProgram, cfg: &SolverConfig) -> Result<LpOutcome> {
    match &cfg.backend {
        Backend::Builtin => solve_with(lp, cfg, &BoundedSimplex),
        Backend::External(name) => Err(Error::InvalidParam {
            name: "backend",
            detail: format!("no external backend `{name}` is registered; use solve_with"),
        }),
    }
}

pub fn solve_with(lp: &LinearProgram, cfg: &SolverConfig, backend: &dyn LpBackend) -> Result<LpOutcome> {
    lp.validate()?;
    cfg.validate()?;
    let out = backend.solve_unchecked(lp, cfg);
    Ok(gate(lp, cfg, out, backend.name()))
}

fn gate(lp: &LinearProgram, cfg: &SolverConfig, out: LpOutcome, who: &str) -> LpOutcome {
    match out {
        LpOutcome::Feasible { ref point } | LpOutcome::Optimal { ref point, .. } => {
            if check_point(lp, point, cfg.tol_feas) {
                out
            } else {
                LpOutcome::NumericalFailure(format!("{who}: returned point fails verification"))
            }
        }
        LpOutcome::Infeasible(ref cert) => {
            if check_farkas(lp, cert, cfg.tol_farkas) {
                out
            } else {
                LpOutcome::NumericalFailure(format!(
                    "{who}: infeasibility certificate fails verification (gap {:e})",
                    farkas_gap(lp, cert)
                ))
            }
        }
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merges_duplicate_terms() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", 0.0, 1.0);
        lp.add_constraint("r", [(x, 1.0), (x, 2.0)], Sense::Le, 1.0);
        assert_eq!(lp.constraints()[0].terms, vec![(0, 3.0)]);
    }

    #[test]
    fn rejects_unused_variables() {
        let mut lp = LinearProgram::new();
        lp.add_var("x", 0.0, 1.0);
        assert!(matches!(lp.validate(), Err(Error::InvalidLp(_))));
    }
}
