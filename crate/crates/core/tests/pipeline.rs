#![allow(clippy::field_reassign_with_default)]

mod common;

use mpmg::cycles::{make_recursive_coarse, rho_star, CoarseSolver, Smoother};
use mpmg::harness::{
    csv_string, draw_rhs, run_experiment, structural_constants, validate_csv, CoarseConfig,
    Experiment, ExperimentConfig, PrecisionPlan,
};
use mpmg::hierarchy::{build_multilevel, read_hierarchy, write_hierarchy, Problem};

fn config(problem: Problem, coarse: CoarseConfig, levels: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    c.problem = problem;
    c.coarse = coarse;
    c.levels = levels;
    c.precision = PrecisionPlan::bits(vec![10, 16]);
    c.run.trials = 10;
    c
}

#[test]
fn trials_leave_operators_untouched() {
    let exp = Experiment::prepare(&config(
        Problem::Poisson1d { n: 31 },
        CoarseConfig::Exact,
        2,
    ))
    .unwrap();
    let before = exp.fingerprint();
    let a = exp.run().unwrap();
    assert_eq!(exp.fingerprint(), before);
    assert_eq!(exp.run().unwrap(), a);
}

#[test]
fn every_coarse_variant_passes_and_validates() {
    let cases = [
        config(
            Problem::Poisson1d { n: 31 },
            CoarseConfig::Perturbed {
                sigma: 0.5,
                seed: 3,
            },
            2,
        ),
        config(
            Problem::Poisson1d { n: 31 },
            CoarseConfig::Recursive { mu: 1, nu: 1 },
            3,
        ),
        config(Problem::Poisson2d { k: 7 }, CoarseConfig::Exact, 2),
        config(
            Problem::Poisson2d { k: 7 },
            CoarseConfig::Recursive { mu: 1, nu: 1 },
            3,
        ),
    ];
    for c in cases {
        let recs = run_experiment(&c).unwrap();
        assert!(recs.iter().all(|r| r.pass), "{}", c.echo());
        assert!(recs.iter().all(|r| r.bc_deviation < 1.0));
        assert!(validate_csv(csv_string(&recs).unwrap().as_bytes())
            .unwrap()
            .ok());
    }
}

#[test]
fn richardson_smoother_passes() {
    let mut c = config(Problem::Poisson1d { n: 15 }, CoarseConfig::Exact, 2);
    c.smoother = Smoother::Richardson { omega: 0.5 };
    assert!(run_experiment(&c).unwrap().iter().all(|r| r.pass));
}

#[test]
fn recursive_coarse_rate_matches_three_level_cycle() {
    let levels = build_multilevel(Problem::Poisson1d { n: 31 }, 3).unwrap();
    let sm = Smoother::Jacobi { omega: 2.0 / 3.0 };
    let solver = make_recursive_coarse(levels[1..].to_vec(), sm, 1, 1).unwrap();
    let m = mpmg::cycles::make_jacobi(
        &levels[0].a,
        2.0 / 3.0,
        mpmg::precision::PrecisionFormat::carrier(),
    )
    .unwrap();
    let exact = rho_star(&levels[0], &m, &m, &CoarseSolver::exact()).unwrap();
    let rec = rho_star(&levels[0], &m, &m, &solver).unwrap();
    assert!(exact <= rec && rec < 1.0);
}

#[test]
fn structural_constants_describe_the_level() {
    let levels = build_multilevel(Problem::Poisson1d { n: 31 }, 2).unwrap();
    let m = mpmg::cycles::make_jacobi(
        &levels[0].a,
        2.0 / 3.0,
        mpmg::precision::PrecisionFormat::carrier(),
    )
    .unwrap();
    let sc = structural_constants(&levels[0], &m, &m).unwrap();
    assert_eq!((sc.m_a, sc.m_p), (3, 3));
    assert!(sc.kappa_c < sc.kappa);
    // |A| has the spectrum of A shifted onto the same extreme eigenvalue
    assert!((sc.eta_a - 1.0).abs() < 1e-12);
    // constant diagonal: M is a multiple of I, so its energy and Euclidean norms agree
    assert!((sc.eta_n - sc.eta_m).abs() < 1e-12);
    assert_eq!(sc.alpha_m_base, sc.eta_m);
}

#[test]
fn hierarchy_files_round_trip_into_identical_runs() {
    let dir = tempfile::tempdir().unwrap();
    let levels = build_multilevel(Problem::Poisson2d { k: 7 }, 2).unwrap();
    write_hierarchy(dir.path(), &levels).unwrap();
    let (_, back) = read_hierarchy(dir.path()).unwrap();
    assert_eq!(back.len(), 2);
    for (a, b) in levels.iter().zip(&back) {
        assert_eq!(a.fingerprint(), b.fingerprint());
    }
    let r = draw_rhs(levels[0].n(), 1);
    let f = mpmg::precision::PrecisionFormat::new(12).unwrap();
    let m = mpmg::cycles::make_jacobi(&levels[0].a, 0.8, f).unwrap();
    let mb = mpmg::cycles::make_jacobi(&back[0].a, 0.8, f).unwrap();
    let (y, _) = mpmg::cycles::tg_cycle(&levels[0], &r, &m, &m, &CoarseSolver::exact(), f).unwrap();
    let (yb, _) =
        mpmg::cycles::tg_cycle(&back[0], &r, &mb, &mb, &CoarseSolver::exact(), f).unwrap();
    assert_eq!(y, yb);
}
