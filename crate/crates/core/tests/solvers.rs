use netclear::experiments::{error_rate_study, ErrorRateConfig, Execution};
use netclear::generators::{generate, SystemParams};
use netclear::solvers::{
    oracle_enumerate, sandwich, sandwich_modified, trial_error, AlgorithmId, Direction, MethodKind, SolveOptions,
    Variant,
};
use netclear::{ClearingState, FinancialSystem, SquareMatrix, Vector};

fn two_firm_ring(a: [f64; 2], nu: f64) -> FinancialSystem {
    let md = SquareMatrix::from_rows(&[vec![0.0, nu], vec![nu, 0.0]]).unwrap();
    FinancialSystem::new(Vector::from(a), Vector::from([1.0, 1.0]), md, SquareMatrix::zeros(2)).unwrap()
}

/// Firm 0 receives exactly its liability at the clearing vector, and the
/// increasing iterates only approach that value from below.
fn stalling_borderline() -> FinancialSystem {
    two_firm_ring([0.58, 0.1], 0.6)
}

#[test]
fn every_variant_solves_the_two_firm_example() {
    let f = two_firm_ring([1.0, 0.0], 0.5);
    let want = ClearingState::new(Vector::from([1.0, 0.5]), Vector::from([0.25, 0.0]));
    for v in Variant::all() {
        let report = v.run(&f, &SolveOptions::with_eps(1e-12)).unwrap();
        assert!(report.converged, "{}", v.label());
        assert!(report.solution.l1_distance(&want) < 1e-10, "{}: {:?}", v.label(), report.solution);
        assert_eq!(report.label(), v.label());
    }
}

#[test]
fn sandwich_stalls_on_a_borderline_firm() {
    let f = stalling_borderline();
    let oracle = oracle_enumerate(&f).unwrap();
    assert_eq!(oracle.borderline, vec![0]);
    let report = sandwich(&f, MethodKind::Picard).unwrap();
    assert!(!report.converged);
    assert!(report.diagnostic.as_deref().unwrap().contains("stalled"));
}

#[test]
fn modified_sandwich_resolves_the_borderline_firm() {
    let f = stalling_borderline();
    let oracle = oracle_enumerate(&f).unwrap();
    for m in MethodKind::ALL {
        let report = sandwich_modified(&f, m, 5).unwrap();
        assert!(report.converged, "{m:?}");
        assert!(f.is_fixed_point(&report.solution, f.report_tol()));
        assert!(report.solution.l1_distance(&oracle.solution) < 1e-12);
    }
}

#[test]
fn trial_error_is_exact_in_both_directions() {
    for seed in 0..40 {
        let f = generate(&SystemParams {
            n: 6,
            d_base: 2.0,
            nu_d: 0.7,
            nu_s: 0.3,
            lambda: 0.5,
            seed,
        })
        .unwrap();
        let oracle = oracle_enumerate(&f).unwrap();
        for m in MethodKind::ALL {
            for dir in [Direction::Decreasing, Direction::Increasing] {
                let report = trial_error(&f, m, dir, m.default_lag()).unwrap();
                assert!(f.is_fixed_point(&report.solution, f.report_tol()), "seed {seed} {m:?} {dir}");
                assert!(report.solution.l1_distance(&oracle.solution) < 1e-9);
            }
        }
    }
}

#[test]
fn closed_full_mass_debt_ring_is_rejected() {
    let md = SquareMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let f = FinancialSystem::new(Vector::from([0.5, 0.5]), Vector::from([1.0, 1.0]), md, SquareMatrix::zeros(2));
    assert!(f.is_err());
}

#[test]
fn variant_labels_round_trip() {
    for v in Variant::all() {
        assert_eq!(Variant::from_label(&v.label()).unwrap(), v);
    }
    let te = Variant::new(AlgorithmId::TrialError(MethodKind::Picard), Direction::Decreasing);
    assert_eq!(te.label(), "DTP");
}

#[test]
fn per_system_errors_do_not_increase_with_lag() {
    let cfg = ErrorRateConfig::standard_grid(vec![5, 10], 20, 77);
    let out = error_rate_study(&cfg, Execution::Parallel).unwrap();
    let lags = &cfg.lag_list;
    for chunk in out.records.chunks(lags.len()) {
        for w in chunk.windows(2) {
            assert_eq!((w[0].task, w[0].method), (w[1].task, w[1].method));
            assert!(w[1].lag > w[0].lag);
            assert!(!w[1].error || w[0].error, "task {} {:?}: wrong at lag {} but right at lag {}", w[0].task, w[0].method, w[1].lag, w[0].lag);
        }
    }
}

#[test]
fn iterative_variants_converge_to_eps() {
    let f = generate(&SystemParams {
        n: 25,
        d_base: 1.5,
        nu_d: 0.9,
        nu_s: 0.45,
        lambda: 0.0,
        seed: 3,
    })
    .unwrap();
    let exact = Variant::from_label("DTH").unwrap().run(&f, &SolveOptions::default()).unwrap();
    for label in ["DP", "IP", "DE", "IE", "DH", "IH"] {
        let report = Variant::from_label(label).unwrap().run(&f, &SolveOptions::with_eps(1e-8)).unwrap();
        assert!(report.converged);
        assert!(report.iterations > 0);
        assert!(report.solution.l1_distance(&exact.solution) < 1e-6, "{label}");
    }
}
