use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tricert::lp::*;

/// Random LP built around a known point, so it is feasible by construction.
fn feasible_lp(rng: &mut ChaCha8Rng, n: usize, m: usize) -> (LinearProgram, Vec<f64>) {
    let mut lp = LinearProgram::new();
    let mut x0 = Vec::with_capacity(n);
    for j in 0..n {
        let lo = rng.gen_range(-1.0..0.5);
        let hi = lo + rng.gen_range(0.0..2.0);
        lp.add_var(format!("x{j}"), lo, hi);
        x0.push(rng.gen_range(lo..=hi));
    }
    let mut rows = 0;
    while rows < m {
        let mut terms: Vec<(usize, f64)> = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.6) {
                terms.push((j, rng.gen_range(-2.0..2.0)));
            }
        }
        if terms.is_empty() {
            continue;
        }
        let ax: f64 = terms.iter().map(|&(j, a)| a * x0[j]).sum();
        let (sense, rhs) = match rng.gen_range(0..3) {
            0 => (Sense::Eq, ax),
            1 => (Sense::Le, ax + rng.gen_range(0.0..0.5)),
            _ => (Sense::Ge, ax - rng.gen_range(0.0..0.5)),
        };
        lp.add_constraint(format!("r{rows}"), terms, sense, rhs);
        rows += 1;
    }
    for j in 0..n {
        lp.add_constraint(format!("use{j}"), [(j, 1.0)], Sense::Ge, lp.variables()[j].lower);
    }
    (lp, x0)
}

/// Adds a row that no point of the box can satisfy.
fn make_infeasible(lp: &mut LinearProgram, rng: &mut ChaCha8Rng) {
    let n = lp.num_vars();
    let terms: Vec<(usize, f64)> = (0..n).map(|j| (j, rng.gen_range(0.1..1.0))).collect();
    let max: f64 = terms.iter().map(|&(j, a)| a * lp.variables()[j].upper).sum();
    lp.add_constraint("impossible", terms, Sense::Ge, max + rng.gen_range(0.01..1.0));
}

#[test]
fn check_point_example() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", 0.0, 1.0);
    let y = lp.add_var("y", 0.0, 1.0);
    lp.add_constraint("s", [(x, 1.0), (y, 1.0)], Sense::Eq, 1.0);
    assert!(check_point(&lp, &[0.3, 0.7], 1e-9));
    assert!(!check_point(&lp, &[0.3, 0.8], 1e-9));
    assert!(!check_point(&lp, &[-0.1, 1.1], 1e-9));
}

#[test]
fn check_farkas_example() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", 0.0, 1.0);
    let y = lp.add_var("y", 0.0, 1.0);
    lp.add_constraint("s", [(x, 1.0), (y, 1.0)], Sense::Ge, 3.0);
    // Multiplier −1 on the ≥ row: min over the box of −(x + y) + 3 is 1.
    assert!(check_farkas(&lp, &FarkasCertificate { y: vec![-1.0] }, 1e-9));
    assert!((farkas_gap(&lp, &FarkasCertificate { y: vec![-1.0] }) - 1.0).abs() < 1e-15);
    assert!(!check_farkas(&lp, &FarkasCertificate { y: vec![1.0] }, 1e-9));
    assert!(!check_farkas(&lp, &FarkasCertificate { y: vec![-1.0, 0.0] }, 1e-9));
    assert!(check_farkas_exact(&lp, &FarkasCertificate { y: vec![-1.0] }));
}

#[test]
fn validation_rejects_malformed_programs() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", f64::NEG_INFINITY, 1.0);
    lp.add_constraint("r", [(x, 1.0)], Sense::Le, 1.0);
    assert!(solve(&lp, &SolverConfig::default()).is_err());

    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", 0.0, 1.0);
    lp.add_constraint("r", [(x, f64::NAN)], Sense::Le, 1.0);
    assert!(solve(&lp, &SolverConfig::default()).is_err());

    let cfg = SolverConfig { tol_feas: 0.0, ..SolverConfig::default() };
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", 0.0, 1.0);
    lp.add_constraint("r", [(x, 1.0)], Sense::Le, 1.0);
    assert!(solve(&lp, &cfg).is_err());
}

#[test]
fn optimum_of_small_program() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", 0.0, 10.0);
    let y = lp.add_var("y", 0.0, 10.0);
    lp.add_constraint("a", [(x, 1.0), (y, 2.0)], Sense::Ge, 4.0);
    lp.add_constraint("b", [(x, 3.0), (y, 1.0)], Sense::Ge, 6.0);
    lp.set_objective([(x, 1.0), (y, 1.0)]);
    match solve(&lp, &SolverConfig::default()).unwrap() {
        LpOutcome::Optimal { value, point } => {
            assert!((value - 2.8).abs() < 1e-9, "{value}");
            assert!((point[0] - 1.6).abs() < 1e-9 && (point[1] - 1.2).abs() < 1e-9);
        }
        o => panic!("{o:?}"),
    }
}

#[test]
fn unbounded_objective_is_reported() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", 0.0, f64::INFINITY);
    lp.add_constraint("r", [(x, 1.0)], Sense::Ge, 1.0);
    lp.set_objective([(x, -1.0)]);
    assert_eq!(solve(&lp, &SolverConfig::default()).unwrap(), LpOutcome::Unbounded);
}

#[test]
fn soundness_fuzz() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let cfg = SolverConfig::default();
    for _ in 0..300 {
        let n = rng.gen_range(1..15);
        let m = rng.gen_range(1..20);
        let (lp, x0) = feasible_lp(&mut rng, n, m);
        assert!(check_point(&lp, &x0, 1e-9));
        match solve(&lp, &cfg).unwrap() {
            LpOutcome::Feasible { point } => assert!(check_point(&lp, &point, cfg.tol_feas)),
            o => panic!("feasible program reported {}", o.status_name()),
        }
    }
}

#[test]
fn infeasible_fuzz_yields_verified_certificates() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let cfg = SolverConfig::default();
    for _ in 0..300 {
        let n = rng.gen_range(1..15);
        let m = rng.gen_range(1..20);
        let (mut lp, _) = feasible_lp(&mut rng, n, m);
        make_infeasible(&mut lp, &mut rng);
        match solve(&lp, &cfg).unwrap() {
            LpOutcome::Infeasible(cert) => {
                assert!(check_farkas(&lp, &cert, cfg.tol_farkas));
                assert!(check_farkas_exact(&lp, &cert));
            }
            o => panic!("infeasible program reported {}", o.status_name()),
        }
    }
}

#[test]
fn status_is_invariant_under_row_scaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let cfg = SolverConfig::default();
    for k in 0..100 {
        let (n, m) = (rng.gen_range(2..10), rng.gen_range(2..12));
        let (mut lp, _) = feasible_lp(&mut rng, n, m);
        if k % 2 == 0 {
            make_infeasible(&mut lp, &mut rng);
        }
        let before = solve(&lp, &cfg).unwrap().is_infeasible();
        let mut scaled = lp.clone();
        for i in 0..scaled.num_constraints() {
            scaled.scale_constraint(i, 10f64.powf(rng.gen_range(-3.0..3.0)));
        }
        assert_eq!(solve(&scaled, &cfg).unwrap().is_infeasible(), before);
        assert_eq!(before, k % 2 == 0);
    }
}

#[test]
fn export_names_every_row() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let (lp, _) = feasible_lp(&mut rng, 3, 3);
    let text = to_lp_format(&lp);
    for c in lp.constraints() {
        assert!(text.contains(&c.name));
    }
    assert!(text.contains("Bounds") && text.trim_end().ends_with("End"));
}

struct Liar;

impl LpBackend for Liar {
    fn name(&self) -> &str {
        "liar"
    }

    fn solve_unchecked(&self, lp: &LinearProgram, _cfg: &SolverConfig) -> LpOutcome {
        LpOutcome::Infeasible(FarkasCertificate { y: vec![0.0; lp.num_constraints()] })
    }
}

#[test]
fn unverified_backend_answers_become_failures() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", 0.0, 1.0);
    lp.add_constraint("r", [(x, 1.0)], Sense::Le, 1.0);
    let out = solve_with(&lp, &SolverConfig::default(), &Liar).unwrap();
    assert!(matches!(out, LpOutcome::NumericalFailure(_)));
}

proptest! {
    #[test]
    fn exact_check_agrees_with_float_check_on_clear_margins(
        a in proptest::collection::vec(0.1f64..2.0, 1..6),
        extra in 0.01f64..1.0,
    ) {
        let mut lp = LinearProgram::new();
        let vars: Vec<usize> = (0..a.len()).map(|j| lp.add_var(format!("x{j}"), 0.0, 1.0)).collect();
        let sum: f64 = a.iter().sum();
        lp.add_constraint("r", vars.iter().zip(&a).map(|(&v, &c)| (v, c)).collect::<Vec<_>>(), Sense::Ge, sum + extra);
        let cert = FarkasCertificate { y: vec![-1.0] };
        prop_assert!(check_farkas(&lp, &cert, 1e-9));
        prop_assert!(check_farkas_exact(&lp, &cert));
        let weak = FarkasCertificate { y: vec![1.0] };
        prop_assert!(!check_farkas_exact(&lp, &weak));
    }
}
