//! The LP relaxations of the PTC-local set.
//!
//! Indexing: x₁ and x₂ are the triples of first and second output bits,
//! packed as `4a + 2b + c`; token tuples are `t = 4t_α + 2t_β + t_γ`. The
//! PTC response `ptc_response(t)` gives the x₁ produced by t.

use crate::dist::{
    correlators, parity_fail, ptc_response, token_orientation, token_probs, CorrelatorVariant,
    Interval, TokenModel, TriangleDistribution,
};
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Sense};

/// Parity failure tolerated for a distribution to count as exactly PTC.
pub const PTC_TOL: f64 = 1e-10;

/// Index into a four-outcome table from packed first and second bits.
pub fn joint_index(x1: usize, x2: usize) -> usize {
    let o = |s: usize| 2 * ((x1 >> (2 - s)) & 1) + ((x2 >> (2 - s)) & 1);
    16 * o(0) + 4 * o(1) + o(2)
}

pub fn x1_valid(x1: usize) -> bool {
    (x1.count_ones() & 1) == 1
}

fn bit(x: usize, s: usize) -> usize {
    (x >> (2 - s)) & 1
}

fn with_bit(x: usize, s: usize, b: usize) -> usize {
    (x & !(1 << (2 - s))) | (b << (2 - s))
}

fn tstr(x: usize) -> String {
    format!("{}{}{}", bit(x, 0), bit(x, 1), bit(x, 2))
}

fn require_four(p: &TriangleDistribution) -> Result<()> {
    if p.arity() != 4 {
        return Err(Error::ArityMismatch(p.arity(), 4));
    }
    Ok(())
}

/// Token model of an exactly-PTC distribution, labelled consistently with the
/// signs of its correlators.
pub fn ptc_token_model(p: &TriangleDistribution) -> Result<TokenModel> {
    let eps = parity_fail(p);
    if eps > PTC_TOL {
        return Err(Error::NotPtc(eps));
    }
    let e = correlators(p, CorrelatorVariant::Plain);
    let q = token_probs(&e)?;
    Ok(token_orientation(&e)?.apply(&q))
}

/// Adds the constraints that party s's second-bit marginal does not depend on
/// the token it does not receive: for each pair of other tokens and output o,
/// Σ_{x₂: x₂ₛ=o} (J[x₂, t|tₛ=0] − J[x₂, t|tₛ=1]) = 0 when `bx` is None, or the
/// interval form (1−l)X₀ − lX₁ ≥ 0 and (1−u)X₀ − uX₁ ≤ 0 for the box `bx`.
fn add_marginal_rows(lp: &mut LinearProgram, var: &dyn Fn(usize, usize) -> usize, bx: Option<&[Interval; 3]>) {
    for s in 0..3 {
        for t in 0..8 {
            if bit(t, s) != 0 {
                continue;
            }
            let t1 = with_bit(t, s, 1);
            for o in 0..2 {
                let x2s: Vec<usize> = (0..8).filter(|&x2| bit(x2, s) == o).collect();
                let name = format!("marg_s{s}_t{}_o{o}", tstr(t));
                match bx {
                    None => {
                        let terms = x2s.iter().flat_map(|&x2| [(var(x2, t), 1.0), (var(x2, t1), -1.0)]);
                        lp.add_constraint(name, terms.collect::<Vec<_>>(), Sense::Eq, 0.0);
                    }
                    Some(b) => {
                        let (l, u) = (b[s].lo, b[s].hi);
                        let lo_terms = x2s.iter().flat_map(|&x2| [(var(x2, t), 1.0 - l), (var(x2, t1), -l)]);
                        lp.add_constraint(format!("{name}_lo"), lo_terms.collect::<Vec<_>>(), Sense::Ge, 0.0);
                        let hi_terms = x2s.iter().flat_map(|&x2| [(var(x2, t), 1.0 - u), (var(x2, t1), -u)]);
                        lp.add_constraint(format!("{name}_hi"), hi_terms.collect::<Vec<_>>(), Sense::Le, 0.0);
                    }
                }
            }
        }
    }
}

fn add_simplex(lp: &mut LinearProgram, name: &str, vars: impl IntoIterator<Item = usize>) {
    lp.add_constraint(name, vars.into_iter().map(|v| (v, 1.0)).collect::<Vec<_>>(), Sense::Eq, 1.0);
}

/// Conditional variables P(x₂|t), 64 of them, indexed `8·t + x₂`.
fn conditional_vars(lp: &mut LinearProgram, prefix: &str) -> usize {
    let base = lp.num_vars();
    for t in 0..8 {
        for x2 in 0..8 {
            lp.add_var(format!("{prefix}_x2_{}_t_{}", tstr(x2), tstr(t)), 0.0, 1.0);
        }
    }
    base
}

/// Feasibility LP for an exactly-PTC four-outcome distribution with token
/// probabilities `t`: P(x₁,x₂) = Σ_{t∈τ(x₁)} p(t) P(x₂|t) on parity-valid x₁,
/// one distribution P(·|t) per token tuple, and marginal independence.
pub fn noiseless_lp(p: &TriangleDistribution, t: &TokenModel) -> Result<LinearProgram> {
    require_four(p)?;
    let eps = parity_fail(p);
    if eps > PTC_TOL {
        return Err(Error::NotPtc(eps));
    }
    let mut lp = LinearProgram::new();
    let base = conditional_vars(&mut lp, "c");
    let var = |x2: usize, t: usize| base + 8 * t + x2;
    add_decomposition_rows(&mut lp, p, t, &var, None);
    for tt in 0..8 {
        add_simplex(&mut lp, &format!("norm_t{}", tstr(tt)), (0..8).map(|x2| var(x2, tt)));
    }
    add_marginal_rows(&mut lp, &var, None);
    Ok(lp)
}

/// Σ_{t∈τ(x₁)} p(t) v[x₂,t] (+ coef·e) = P_Q(x₁,x₂) over parity-valid x₁.
fn add_decomposition_rows(
    lp: &mut LinearProgram,
    p: &TriangleDistribution,
    t: &TokenModel,
    var: &dyn Fn(usize, usize) -> usize,
    noise: Option<(usize, &TriangleDistribution)>,
) {
    for x1 in (0..8).filter(|&x| x1_valid(x)) {
        for x2 in 0..8 {
            let mut terms: Vec<(usize, f64)> =
                (0..8).filter(|&tt| ptc_response(tt) == x1).map(|tt| (var(x2, tt), t.tuple_prob(tt))).collect();
            let pq = p.table()[joint_index(x1, x2)];
            if let Some((e, pc)) = noise {
                terms.push((e, pq - pc.table()[joint_index(x1, x2)]));
            }
            lp.add_constraint(format!("dec_x1_{}_x2_{}", tstr(x1), tstr(x2)), terms, Sense::Eq, pq);
        }
    }
}

/// Minimization LP min e subject to P_Q = Σ p(t)P_PTC P(x₂|t) + (P_Q − P_C)e.
/// The variable `e` is the last one.
pub fn dephasing_lp(pq: &TriangleDistribution, pc: &TriangleDistribution, t: &TokenModel) -> Result<LinearProgram> {
    require_four(pq)?;
    require_four(pc)?;
    for p in [pq, pc] {
        let eps = parity_fail(p);
        if eps > PTC_TOL {
            return Err(Error::NotPtc(eps));
        }
    }
    let mut lp = LinearProgram::new();
    let base = conditional_vars(&mut lp, "c");
    let e = lp.add_var("e", 0.0, 1.0);
    let var = |x2: usize, t: usize| base + 8 * t + x2;
    add_decomposition_rows(&mut lp, pq, t, &var, Some((e, pc)));
    for tt in 0..8 {
        add_simplex(&mut lp, &format!("norm_t{}", tstr(tt)), (0..8).map(|x2| var(x2, tt)));
    }
    add_marginal_rows(&mut lp, &var, None);
    lp.set_objective([(e, 1.0)]);
    Ok(lp)
}

/// Relaxation for a distribution with parity failure at most ε and token
/// probabilities p_ξ(0) in `bx`:
///
/// P(x₁,x₂) = Σ_t P_PTC(x₁|t) J(x₂,t) − 2ε P̃'(x₁,x₂) + 2ε P'(x₁,x₂),
/// Σ_{x₁} P̃'(x₁,·) = Σ_{x₁} P'(x₁,·), with J, P̃', P' distributions, P̃'
/// supported on parity-valid x₁, and the interval marginal constraints on J.
pub fn noisy_lp(p: &TriangleDistribution, eps: f64, bx: &[Interval; 3]) -> Result<LinearProgram> {
    require_four(p)?;
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParam { name: "eps", detail: format!("{eps}") });
    }
    let pf = parity_fail(p);
    if pf > eps + 1e-12 {
        return Err(Error::InvalidParam {
            name: "eps",
            detail: format!("{eps} is below the parity failure {pf}"),
        });
    }
    let mut lp = LinearProgram::new();
    let jbase = conditional_vars(&mut lp, "j");
    let jv = |x2: usize, t: usize| jbase + 8 * t + x2;
    let mut ptil = [[usize::MAX; 8]; 8];
    for x1 in (0..8).filter(|&x| x1_valid(x)) {
        for x2 in 0..8 {
            ptil[x1][x2] = lp.add_var(format!("pt_x1_{}_x2_{}", tstr(x1), tstr(x2)), 0.0, 1.0);
        }
    }
    let mut pprime = [[0usize; 8]; 8];
    for x1 in 0..8 {
        for x2 in 0..8 {
            pprime[x1][x2] = lp.add_var(format!("pp_x1_{}_x2_{}", tstr(x1), tstr(x2)), 0.0, 1.0);
        }
    }
    let two_eps = 2.0 * eps;
    for x1 in 0..8 {
        for x2 in 0..8 {
            let mut terms: Vec<(usize, f64)> =
                (0..8).filter(|&tt| ptc_response(tt) == x1).map(|tt| (jv(x2, tt), 1.0)).collect();
            if x1_valid(x1) {
                terms.push((ptil[x1][x2], -two_eps));
            }
            terms.push((pprime[x1][x2], two_eps));
            lp.add_constraint(
                format!("dec_x1_{}_x2_{}", tstr(x1), tstr(x2)),
                terms,
                Sense::Eq,
                p.table()[joint_index(x1, x2)],
            );
        }
    }
    for x2 in 0..8 {
        let mut terms: Vec<(usize, f64)> =
            (0..8).filter(|&x| x1_valid(x)).map(|x1| (ptil[x1][x2], 1.0)).collect();
        terms.extend((0..8).map(|x1| (pprime[x1][x2], -1.0)));
        lp.add_constraint(format!("x2marg_{}", tstr(x2)), terms, Sense::Eq, 0.0);
    }
    add_simplex(&mut lp, "norm_j", (0..64).map(|k| jbase + k));
    add_simplex(&mut lp, "norm_pt", ptil.iter().flatten().copied().filter(|&v| v != usize::MAX));
    add_simplex(&mut lp, "norm_pp", pprime.iter().flatten().copied());
    add_marginal_rows(&mut lp, &jv, Some(bx));
    Ok(lp)
}

/// Relaxation of the ball of radius ε around the exactly-PTC distribution P̄:
///
/// P̄ = Σ_t P_PTC J − 3ε P̄' + 3ε P̃', Σ_{x₁}P̃' − Σ_{x₁}P̄' + ⅓P̃'' − ⅓P̄'' = 0,
/// all of J, P̄', P̃', P̃'', P̄'' distributions, and interval marginal
/// constraints on J with the box `bx`.
pub fn tvd_lp(pbar: &TriangleDistribution, eps: f64, bx: &[Interval; 3]) -> Result<LinearProgram> {
    require_four(pbar)?;
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParam { name: "eps", detail: format!("{eps}") });
    }
    let pf = parity_fail(pbar);
    if pf > PTC_TOL {
        return Err(Error::NotPtc(pf));
    }
    let mut lp = LinearProgram::new();
    let jbase = conditional_vars(&mut lp, "j");
    let jv = |x2: usize, t: usize| jbase + 8 * t + x2;
    let mut bar = [[0usize; 8]; 8];
    let mut til = [[0usize; 8]; 8];
    for x1 in 0..8 {
        for x2 in 0..8 {
            bar[x1][x2] = lp.add_var(format!("pb_x1_{}_x2_{}", tstr(x1), tstr(x2)), 0.0, 1.0);
        }
    }
    for x1 in 0..8 {
        for x2 in 0..8 {
            til[x1][x2] = lp.add_var(format!("pt_x1_{}_x2_{}", tstr(x1), tstr(x2)), 0.0, 1.0);
        }
    }
    let til2: Vec<usize> = (0..8).map(|x2| lp.add_var(format!("pt2_x2_{}", tstr(x2)), 0.0, 1.0)).collect();
    let bar2: Vec<usize> = (0..8).map(|x2| lp.add_var(format!("pb2_x2_{}", tstr(x2)), 0.0, 1.0)).collect();
    let three_eps = 3.0 * eps;
    for x1 in 0..8 {
        for x2 in 0..8 {
            let mut terms: Vec<(usize, f64)> =
                (0..8).filter(|&tt| ptc_response(tt) == x1).map(|tt| (jv(x2, tt), 1.0)).collect();
            terms.push((bar[x1][x2], -three_eps));
            terms.push((til[x1][x2], three_eps));
            lp.add_constraint(
                format!("tv1_x1_{}_x2_{}", tstr(x1), tstr(x2)),
                terms,
                Sense::Eq,
                pbar.table()[joint_index(x1, x2)],
            );
        }
    }
    for x2 in 0..8 {
        let mut terms: Vec<(usize, f64)> = Vec::new();
        for x1 in 0..8 {
            terms.push((til[x1][x2], 1.0));
            terms.push((bar[x1][x2], -1.0));
        }
        terms.push((til2[x2], 1.0 / 3.0));
        terms.push((bar2[x2], -1.0 / 3.0));
        lp.add_constraint(format!("tv2_x2_{}", tstr(x2)), terms, Sense::Eq, 0.0);
    }
    add_simplex(&mut lp, "norm_j", (0..64).map(|k| jbase + k));
    add_simplex(&mut lp, "norm_pb", bar.iter().flatten().copied());
    add_simplex(&mut lp, "norm_pt", til.iter().flatten().copied());
    add_simplex(&mut lp, "norm_pt2", til2.iter().copied());
    add_simplex(&mut lp, "norm_pb2", bar2.iter().copied());
    add_marginal_rows(&mut lp, &jv, Some(bx));
    Ok(lp)
}
