use rapidplace::device::bundled_device;
use rapidplace::flow::select_repeating_rectangle;
use rapidplace::objective::check_constraints;
use rapidplace::optimizers::{
    run, run_seeded, Algorithm, CoolingSchedule, OptimizerConfig, Problem,
};
use rapidplace::{
    builtin_conv_unit, evaluate, replicate_netlist, scalarize, Decoder, DesignSpec, Device, Region,
};

const ALL: [Algorithm; 5] = [
    Algorithm::Nsga2,
    Algorithm::Nsga2Reduced,
    Algorithm::Cmaes,
    Algorithm::Sa,
    Algorithm::Ga,
];

fn rect(name: &str) -> (Device, DesignSpec, Region) {
    let dev = bundled_device(name).unwrap();
    let unit = builtin_conv_unit();
    let plan = select_repeating_rectangle(&dev, &unit).unwrap();
    let design = replicate_netlist(&unit, plan.units_per_rect).unwrap();
    (dev, design, plan.region())
}

#[test]
fn hot_annealing_accepts_nearly_every_move() {
    let (dev, design, region) = rect("vu3p-like");
    let mut cfg = OptimizerConfig::new(Algorithm::Sa, 1001, 11);
    cfg.schedule = CoolingSchedule::Hyperbolic;
    cfg.t0 = Some(1e30);
    cfg.beta = Some(0.0);
    let r = run(&dev, &design, region, &cfg).unwrap();
    let rate = r.accepted_moves.unwrap() as f64 / 1000.0;
    assert!(rate >= 0.98, "acceptance {rate}");
}

#[test]
fn frozen_annealing_never_goes_uphill() {
    // at zero temperature only non-worsening moves are accepted
    let (dev, design, region) = rect("vu3p-like");
    let mut cfg = OptimizerConfig::new(Algorithm::Sa, 600, 2);
    cfg.t0 = Some(0.0);
    let r = run(&dev, &design, region, &cfg).unwrap();
    assert!(r.accepted_moves.unwrap() < 600);
    assert!(r.trace.is_monotone());
}

#[test]
fn every_algorithm_returns_a_legal_scored_best() {
    for name in ["tiny4", "vu3p-like"] {
        let (dev, design, region) = rect(name);
        let decoder = Decoder::new(&dev, &design, region).unwrap();
        for algo in ALL {
            let cfg = OptimizerConfig::new(algo, 800, 3);
            let r = run(&dev, &design, region, &cfg).unwrap();
            assert!(r.evaluations <= 800, "{algo} used {}", r.evaluations);
            assert!(r.trace.is_monotone(), "{algo}");
            let p = decoder.decode(&r.best).unwrap();
            assert!(
                check_constraints(&p, &design, &dev, region).is_ok(),
                "{name} {algo}"
            );
            let v = evaluate(&p, &design).unwrap();
            assert_eq!(v, r.best_values, "{name} {algo}");
            assert_eq!(scalarize(&v), r.best_scalar);
            assert_eq!(r.trace.best_scalar(), Some(r.best_scalar));
        }
    }
}

#[test]
fn same_seed_same_run() {
    let (dev, design, region) = rect("vu3p-like");
    for algo in ALL {
        let cfg = OptimizerConfig::new(algo, 600, 21);
        let a = run(&dev, &design, region, &cfg).unwrap();
        let b = run(&dev, &design, region, &cfg).unwrap();
        assert_eq!(a.best, b.best, "{algo}");
        assert_eq!(a.evaluations, b.evaluations);
        let key = |r: &rapidplace::optimizers::RunResult| -> Vec<(u64, f64)> {
            r.trace
                .records
                .iter()
                .map(|t| (t.evals, t.scalar))
                .collect()
        };
        assert_eq!(key(&a), key(&b), "{algo}");
    }
}

#[test]
fn front_is_non_dominated_and_holds_the_best() {
    let (dev, design, region) = rect("vu3p-like");
    let r = run(
        &dev,
        &design,
        region,
        &OptimizerConfig::new(Algorithm::Nsga2, 2000, 5),
    )
    .unwrap();
    let front = r.front.unwrap();
    assert!(!front.is_empty());
    assert!(front.is_mutually_non_dominated());
    let best = front
        .members
        .iter()
        .map(|m| scalarize(&m.objectives))
        .fold(f64::INFINITY, f64::min);
    assert!(best >= r.best_scalar);
}

#[test]
fn seeds_bound_the_first_record() {
    let (dev, design, region) = rect("vu3p-like");
    let decoder = Decoder::new(&dev, &design, region).unwrap();
    let first = run(
        &dev,
        &design,
        region,
        &OptimizerConfig::new(Algorithm::Sa, 3000, 0),
    )
    .unwrap();
    let problem = Problem {
        decoder: &decoder,
        design: &design,
        device: &dev,
    };
    // the reduced variant keeps only the seed's mapping, so it is left out
    for algo in ALL.into_iter().filter(|&a| a != Algorithm::Nsga2Reduced) {
        let cfg = OptimizerConfig::new(algo, 200, 9);
        let r = run_seeded(&problem, &cfg, std::slice::from_ref(&first.best)).unwrap();
        assert!(r.trace.records[0].scalar <= first.best_scalar, "{algo}");
    }
}

#[test]
fn reaching_the_target_stops_the_run() {
    let (dev, design, region) = rect("vu3p-like");
    let mut cfg = OptimizerConfig::new(Algorithm::Ga, 5000, 1);
    cfg.target = Some(f64::INFINITY);
    let r = run(&dev, &design, region, &cfg).unwrap();
    assert_eq!(r.evaluations_to_target, Some(1));
    assert!(r.evaluations <= cfg.population as u64);
}

#[test]
fn bad_settings_are_rejected() {
    let (dev, design, region) = rect("tiny4");
    let mut cfg = OptimizerConfig::new(Algorithm::Sa, 100, 0);
    cfg.initial_acceptance = 1.0;
    assert!(run(&dev, &design, region, &cfg).is_err());
    let mut cfg = OptimizerConfig::new(Algorithm::Nsga2, 100, 0);
    cfg.population = 0;
    assert!(run(&dev, &design, region, &cfg).is_err());
}
