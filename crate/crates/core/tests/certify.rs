mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tricert::certify::*;
use tricert::dist::*;
use tricert::lp::{solve, LpOutcome, SolverConfig};
use tricert::qmodel::*;

fn rgb4() -> TbsmParams {
    TbsmParams::new(0.225, 0.424, 0.0).unwrap()
}

fn status(lp: &tricert::lp::LinearProgram) -> bool {
    match solve(lp, &SolverConfig::default()).unwrap() {
        LpOutcome::Infeasible(_) => false,
        LpOutcome::Feasible { .. } | LpOutcome::Optimal { .. } => true,
        o => panic!("unexpected LP status {}", o.status_name()),
    }
}

#[test]
fn joint_index_matches_distribution_layout() {
    let d = TriangleDistribution::uniform(4).unwrap();
    for x1 in 0..8 {
        for x2 in 0..8 {
            let o = |s: usize| 2 * ((x1 >> (2 - s)) & 1) + ((x2 >> (2 - s)) & 1);
            assert_eq!(joint_index(x1, x2), d.index(o(0), o(1), o(2)));
        }
    }
}

#[test]
fn noiseless_rgb4_is_infeasible_with_exact_certificate() {
    let p = tbsm_distribution(&rgb4(), &[]).unwrap();
    let r = certify_noiseless(&p, &GridConfig::default());
    assert_eq!(r.verdict, Verdict::CertifiedNonlocal);
    assert_eq!(r.exact_verified, Some(true));
    assert_eq!(r.lp_count, 1);
}

#[test]
fn noiseless_lp_rejects_noisy_input() {
    let p = tbsm_distribution(&rgb4(), &[NoiseSpec { kind: NoiseKind::WhiteState, param: 0.01 }]).unwrap();
    let t = TokenModel::new([0.8; 3]).unwrap();
    assert!(matches!(noiseless_lp(&p, &t), Err(tricert::Error::NotPtc(_))));
}

#[test]
fn exact_local_instances_are_feasible() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..60 {
        let p = common::exact_ptc_local(&mut rng);
        let t = ptc_token_model(&p).unwrap();
        assert!(status(&noiseless_lp(&p, &t).unwrap()));
        assert!(!certify_noiseless(&p, &GridConfig::default()).verdict.is_certified());
    }
}

#[test]
fn noisy_local_instances_are_never_certified() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let g = GridConfig::with_m(4);
    let mut tried = 0;
    while tried < 40 {
        let p = common::noisy_local(&mut rng);
        let eps = parity_fail(&p);
        let r = grid_certify(&p, eps, &g);
        if matches!(r.verdict, Verdict::Aborted(_)) {
            // Correlators too weak for the token intervals; not a soundness question.
            continue;
        }
        tried += 1;
        assert_eq!(r.verdict, Verdict::NotCertified, "eps = {eps}");
    }
}

#[test]
fn global_flip_preserves_feasibility() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut seen = [0usize; 2];
    for k in 0..50 {
        let p = if k % 2 == 0 {
            common::exact_ptc_local(&mut rng)
        } else {
            let params = TbsmParams::new(rng.gen_range(0.1..0.4), rng.gen_range(0.2..1.2), rng.gen_range(-0.3..0.3)).unwrap();
            tbsm_distribution(&params, &[]).unwrap()
        };
        let Ok(t) = ptc_token_model(&p) else { continue };
        let a = status(&noiseless_lp(&p, &t).unwrap());
        let b = status(&noiseless_lp(&p, &t.flipped()).unwrap());
        assert_eq!(a, b);
        seen[usize::from(a)] += 1;

        let eps = 0.002;
        let noisy = tbsm_distribution(&rgb4(), &[NoiseSpec { kind: NoiseKind::WhiteState, param: 0.001 }]).unwrap();
        let c: f64 = rng.gen_range(0.6..0.9);
        let w: f64 = rng.gen_range(0.0..0.05);
        let bx = [Interval { lo: c, hi: c + w }, Interval { lo: c - w, hi: c }, Interval { lo: c, hi: c + 2.0 * w }];
        let flipped = bx.map(|iv| Interval { lo: 1.0 - iv.hi, hi: 1.0 - iv.lo });
        assert_eq!(status(&noisy_lp(&noisy, eps, &bx).unwrap()), status(&noisy_lp(&noisy, eps, &flipped).unwrap()));
    }
    assert!(seen[0] > 0 && seen[1] > 0, "{seen:?}");
}

#[test]
fn noisy_lp_dimensions() {
    let p = tbsm_distribution(&rgb4(), &[NoiseSpec { kind: NoiseKind::WhiteState, param: 0.001 }]).unwrap();
    let bx = [Interval { lo: 0.7, hi: 0.75 }; 3];
    let lp = noisy_lp(&p, parity_fail(&p), &bx).unwrap();
    assert_eq!(lp.num_vars(), 64 + 32 + 64);
    assert_eq!(lp.num_constraints(), 64 + 8 + 3 + 48);
    assert!(noisy_lp(&p, parity_fail(&p) * 0.5, &bx).is_err());
}

#[test]
fn noisy_lp_with_zero_noise_agrees_with_noiseless_lp() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for k in 0..10 {
        let p = if k % 2 == 0 {
            common::exact_ptc_local(&mut rng)
        } else {
            tbsm_distribution(&TbsmParams::new(0.225, rng.gen_range(0.3..0.6), 0.0).unwrap(), &[]).unwrap()
        };
        let t = ptc_token_model(&p).unwrap();
        let bx = t.q.map(Interval::point);
        assert_eq!(status(&noisy_lp(&p, 0.0, &bx).unwrap()), status(&noiseless_lp(&p, &t).unwrap()));
    }
}

#[test]
fn white_noise_certification_at_small_noise() {
    let p = tbsm_distribution(&rgb4(), &[NoiseSpec { kind: NoiseKind::WhiteState, param: 0.002 }]).unwrap();
    let g = GridConfig { honest_check: true, ..GridConfig::with_m(4) };
    let honest = TokenModel::new([0.225; 3]).unwrap();
    let r = grid_certify_with_honest(&p, parity_fail(&p), &g, Some(&honest));
    assert_eq!(r.verdict, Verdict::CertifiedNonlocal);
    assert!(r.all_certificates_verified);
    assert_eq!(r.exact_verified, Some(true));
    assert_eq!(r.lp_count, 64 + 1);
}

#[test]
fn verdict_and_lp_count_do_not_depend_on_threads() {
    let p = tbsm_distribution(&rgb4(), &[NoiseSpec { kind: NoiseKind::WhiteState, param: 0.0058 }]).unwrap();
    let eps = parity_fail(&p);
    let g = GridConfig::with_m(5);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| grid_certify(&p, eps, &g))
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a.verdict, b.verdict);
    assert_eq!(a.lp_count, b.lp_count);
    assert_eq!(a.open_cell, b.open_cell);
}

#[test]
fn refinement_never_loses_a_certificate() {
    let p = tbsm_distribution(&rgb4(), &[NoiseSpec { kind: NoiseKind::WhiteState, param: 0.004 }]).unwrap();
    let eps = parity_fail(&p);
    let plain = grid_certify(&p, eps, &GridConfig::with_m(3));
    let refined = grid_certify(&p, eps, &GridConfig { refine_depth: 1, ..GridConfig::with_m(3) });
    assert!(!plain.verdict.is_certified() || refined.verdict.is_certified());
    assert!(refined.lp_count >= plain.lp_count.min(27));
}

#[test]
fn tvd_ball_small_radius_is_certified() {
    let p = tbsm_distribution(&rgb4(), &[]).unwrap();
    let r = tvd_grid_certify(&p, 0.0005, &GridConfig::with_m(3));
    assert_eq!(r.verdict, Verdict::CertifiedNonlocal);
    let too_big = tvd_grid_certify(&p, 0.2, &GridConfig::with_m(3));
    assert!(matches!(too_big.verdict, Verdict::Aborted(_)));
}

#[test]
fn bisection_finds_step_location() {
    let x = bisect_threshold(0.0, 1.0, 1e-6, |x| x < 0.3141);
    assert!((x - 0.3141).abs() < 1e-6 && x < 0.3141);
}

#[test]
fn dephasing_threshold_at_rgb4() {
    let r = tbsm_dephasing(&rgb4(), &GridConfig::default()).unwrap();
    assert!(r.d_star > 0.0 && r.d_star < 1.0);
    assert!((r.e_star - (1.0 - (1.0 - r.d_star).powi(3))).abs() < 1e-12);
    assert!(r.certified_below.is_some());
    // Just below e*, the admixed distribution is still certified by the noiseless LP.
    let d = 1.0 - (1.0 - r.certified_below.unwrap()).cbrt();
    let pd = tbsm_distribution(&rgb4(), &[NoiseSpec { kind: NoiseKind::Dephasing, param: d * 0.999 }]).unwrap();
    assert!(certify_noiseless(&pd, &GridConfig::default()).verdict.is_certified());
    let past = tbsm_distribution(&rgb4(), &[NoiseSpec { kind: NoiseKind::Dephasing, param: (r.d_star * 1.01).min(1.0) }]).unwrap();
    assert!(!certify_noiseless(&past, &GridConfig::default()).verdict.is_certified());
}

#[test]
fn sweep_emits_rows_in_order() {
    let spec = SweepSpec {
        base: rgb4(),
        noise: vec![],
        axes: [
            Axis { param: AxisParam::PhiU, min: 0.3, max: 0.5, steps: 3 },
            Axis { param: AxisParam::PhiW, min: 0.0, max: 0.2, steps: 2 },
        ],
        task: SweepTask::Noiseless,
    };
    let mut seen = Vec::new();
    let rows = sweep(&spec, &GridConfig::default(), &mut |r| seen.push((r.i, r.j))).unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!(seen, vec![(0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1)]);
    assert!(rows.iter().all(|r| r.report.is_ok()));
}

#[test]
fn grid_config_validation() {
    assert!(GridConfig { m: 0, ..GridConfig::default() }.validate().is_err());
    let p = tbsm_distribution(&rgb4(), &[NoiseSpec { kind: NoiseKind::WhiteState, param: 0.001 }]).unwrap();
    let r = grid_certify(&p, parity_fail(&p), &GridConfig { m: 0, ..GridConfig::default() });
    assert!(matches!(r.verdict, Verdict::Aborted(_)));
}
