//! Search over genotypes: NSGA-II on (wl2, max_bbox), and CMA-ES, simulated
//! annealing and a GA on the scalarized objective.
//!
//! Every run is deterministic per seed. Candidates of one generation are
//! evaluated in parallel and committed in index order, so thread count never
//! changes a result.

mod cmaes;
mod ga;
mod nsga2;
mod operators;
mod sa;
mod tracker;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::design::DesignSpec;
use crate::device::{Device, Region};
use crate::error::{Error, Result};
use crate::genotype::{Decoder, Genotype};
use crate::objective::{scalarize, ObjectiveValues};

pub use cmaes::{minimize, Cmaes, CmaesParams};
pub use nsga2::{crowding_distance, dominates, fast_non_dominated_sort};
pub use operators::{order_crossover, Variation};
pub use tracker::{EvolutionTrace, TraceRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Nsga2,
    Nsga2Reduced,
    Cmaes,
    Sa,
    Ga,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Nsga2,
        Algorithm::Nsga2Reduced,
        Algorithm::Cmaes,
        Algorithm::Sa,
        Algorithm::Ga,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Nsga2 => "nsga2",
            Algorithm::Nsga2Reduced => "nsga2-reduced",
            Algorithm::Cmaes => "cmaes",
            Algorithm::Sa => "sa",
            Algorithm::Ga => "ga",
        }
    }

    /// Whether `population` sizes the search (CMA-ES sizes itself).
    pub fn uses_population(self) -> bool {
        matches!(
            self,
            Algorithm::Nsga2 | Algorithm::Nsga2Reduced | Algorithm::Ga
        )
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nsga2" => Ok(Algorithm::Nsga2),
            "nsga2-reduced" | "nsga2_reduced" => Ok(Algorithm::Nsga2Reduced),
            "cmaes" => Ok(Algorithm::Cmaes),
            "sa" => Ok(Algorithm::Sa),
            "ga" => Ok(Algorithm::Ga),
            other => Err(Error::Config(format!(
                "unknown algorithm `{other}` (expected nsga2, nsga2-reduced, cmaes, sa or ga)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoolingSchedule {
    /// `T0 / (1 + beta t)`
    Hyperbolic,
    /// `T0 alpha^t`
    Exponential,
    /// `T0 (1 - t / tmax)`
    Linear,
}

impl FromStr for CoolingSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hyperbolic" => Ok(CoolingSchedule::Hyperbolic),
            "exponential" => Ok(CoolingSchedule::Exponential),
            "linear" => Ok(CoolingSchedule::Linear),
            other => Err(Error::Config(format!(
                "unknown cooling schedule `{other}` (expected hyperbolic, exponential or linear)"
            ))),
        }
    }
}

/// How single-objective methods collapse (wl2, max_bbox) into one number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Scalarization {
    Product,
    WeightedSum { wl2: f64, bbox: f64 },
}

impl Scalarization {
    pub fn apply(&self, v: &ObjectiveValues) -> f64 {
        match *self {
            Scalarization::Product => scalarize(v),
            Scalarization::WeightedSum { wl2, bbox } => wl2 * v.wl2 + bbox * v.max_bbox as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    pub population: usize,
    pub max_evaluations: u64,
    pub rng_seed: u64,
    pub crossover_rate: f64,
    /// Per-gene mutation probability; `None` means `1 / genes`.
    pub mutation_rate: Option<f64>,
    pub creep_sigma: f64,
    pub tournament_size: usize,
    pub schedule: CoolingSchedule,
    /// Initial temperature. `None` falls back to `t0_factor`, then to
    /// probing random moves so that an average uphill move is accepted
    /// with probability `initial_acceptance`.
    pub t0: Option<f64>,
    /// `T0` as a multiple of the initial scalar.
    pub t0_factor: Option<f64>,
    pub initial_acceptance: f64,
    /// Hyperbolic rate; `None` derives it from `final_temperature_ratio`.
    pub beta: Option<f64>,
    /// Exponential factor; `None` derives it from `final_temperature_ratio`.
    pub alpha: Option<f64>,
    /// Last-step temperature over `T0` for the derived `beta` and `alpha`.
    pub final_temperature_ratio: f64,
    /// Creep width of a single annealing move.
    pub sa_step_sigma: f64,
    pub cmaes_sigma0: f64,
    /// Offspring per CMA-ES generation; `None` means `4 + floor(3 ln n)`.
    pub cmaes_lambda: Option<usize>,
    /// Dimensions above which CMA-ES keeps a diagonal covariance.
    pub cmaes_diagonal_above: usize,
    pub scalarization: Scalarization,
    /// Stop as soon as a candidate's scalar reaches this value.
    pub target: Option<f64>,
    /// Run the constraint checker on every decoded candidate.
    pub check_legality: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            algorithm: Algorithm::Nsga2,
            population: 40,
            max_evaluations: 10_000,
            rng_seed: 0,
            crossover_rate: 0.9,
            mutation_rate: None,
            creep_sigma: 0.1,
            tournament_size: 2,
            schedule: CoolingSchedule::Hyperbolic,
            t0: None,
            t0_factor: None,
            initial_acceptance: 0.5,
            beta: None,
            alpha: None,
            final_temperature_ratio: 0.03,
            sa_step_sigma: 0.3,
            cmaes_sigma0: 0.2,
            cmaes_lambda: None,
            cmaes_diagonal_above: 1000,
            scalarization: Scalarization::Product,
            target: None,
            check_legality: false,
        }
    }
}

impl OptimizerConfig {
    pub fn new(algorithm: Algorithm, max_evaluations: u64, rng_seed: u64) -> Self {
        OptimizerConfig {
            algorithm,
            max_evaluations,
            rng_seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.algorithm.uses_population() {
            if self.population < 2 {
                return bad(format!(
                    "population must be at least 2, got {}",
                    self.population
                ));
            }
            if self.max_evaluations < self.population as u64 {
                return bad(format!(
                    "max_evaluations ({}) must be at least the population ({})",
                    self.max_evaluations, self.population
                ));
            }
        }
        if self.max_evaluations == 0 {
            return bad("max_evaluations must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return bad(format!(
                "crossover_rate {} outside [0, 1]",
                self.crossover_rate
            ));
        }
        if let Some(m) = self.mutation_rate {
            if !(0.0..=1.0).contains(&m) {
                return bad(format!("mutation_rate {m} outside [0, 1]"));
            }
        }
        if !(self.creep_sigma > 0.0 && self.creep_sigma.is_finite()) {
            return bad(format!(
                "creep_sigma must be positive, got {}",
                self.creep_sigma
            ));
        }
        if self.tournament_size < 1 {
            return bad("tournament_size must be at least 1".into());
        }
        if !(self.cmaes_sigma0 > 0.0 && self.cmaes_sigma0.is_finite()) {
            return bad(format!(
                "cmaes_sigma0 must be positive, got {}",
                self.cmaes_sigma0
            ));
        }
        if let Some(l) = self.cmaes_lambda {
            if l < 2 {
                return bad(format!("cmaes_lambda must be at least 2, got {l}"));
            }
        }
        for (name, v) in [("t0", self.t0), ("beta", self.beta)] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return bad(format!("{name} must be finite and non-negative, got {v}"));
                }
            }
        }
        if !(self.sa_step_sigma > 0.0 && self.sa_step_sigma.is_finite()) {
            return bad(format!(
                "sa_step_sigma must be positive, got {}",
                self.sa_step_sigma
            ));
        }
        if let Some(f) = self.t0_factor {
            if !(f >= 0.0 && f.is_finite()) {
                return bad(format!(
                    "t0_factor must be finite and non-negative, got {f}"
                ));
            }
        }
        if !(self.initial_acceptance > 0.0 && self.initial_acceptance < 1.0) {
            return bad(format!(
                "initial_acceptance must be in (0, 1), got {}",
                self.initial_acceptance
            ));
        }
        if !(self.final_temperature_ratio > 0.0 && self.final_temperature_ratio <= 1.0) {
            return bad(format!(
                "final_temperature_ratio must be in (0, 1], got {}",
                self.final_temperature_ratio
            ));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a <= 1.0) {
                return bad(format!("alpha must be in (0, 1], got {a}"));
            }
        }
        Ok(())
    }

    pub(crate) fn variation(&self, decoder: &Decoder) -> Variation {
        Variation {
            crossover_rate: self.crossover_rate,
            mutation_rate: self.mutation_rate,
            creep_sigma: self.creep_sigma,
            mutate_reals: self.algorithm != Algorithm::Nsga2Reduced,
            swap_classes: decoder.mapping_classes(),
        }
    }
}

/// Mutually non-dominated (genotype, objectives) pairs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    pub members: Vec<FrontMember>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontMember {
    pub objectives: ObjectiveValues,
    pub genotype: Genotype,
}

impl ParetoFront {
    /// Keeps the non-dominated candidates, one per distinct objective pair,
    /// ordered by wl2.
    pub fn from_candidates(candidates: Vec<(Genotype, ObjectiveValues)>) -> Self {
        let points: Vec<[f64; 2]> = candidates.iter().map(|(_, v)| v.pair()).collect();
        let mut members: Vec<FrontMember> = candidates
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !points.iter().any(|p| dominates(p, &points[*i])))
            .map(|(_, (genotype, objectives))| FrontMember {
                objectives,
                genotype,
            })
            .collect();
        members.sort_by(|a, b| {
            let (pa, pb) = (a.objectives.pair(), b.objectives.pair());
            pa[0].total_cmp(&pb[0]).then(pa[1].total_cmp(&pb[1]))
        });
        members.dedup_by(|a, b| a.objectives.pair() == b.objectives.pair());
        ParetoFront { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_mutually_non_dominated(&self) -> bool {
        self.members.iter().all(|a| {
            self.members
                .iter()
                .all(|b| !dominates(&a.objectives.pair(), &b.objectives.pair()))
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.members).expect("front serializes")
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub algorithm: Algorithm,
    /// Best candidate by scalar. Reduced runs report full genes that decode
    /// to the same placement.
    pub best: Genotype,
    pub best_values: ObjectiveValues,
    pub best_scalar: f64,
    /// Final non-dominated set (NSGA-II variants only).
    pub front: Option<ParetoFront>,
    pub trace: EvolutionTrace,
    pub evaluations: u64,
    /// Evaluation index of the first candidate meeting `config.target`.
    pub evaluations_to_target: Option<u64>,
    /// Accepted moves of an annealing run.
    pub accepted_moves: Option<u64>,
}

/// Runs `config.algorithm` on `design` inside `region` of `device`.
pub fn run(
    device: &Device,
    design: &DesignSpec,
    region: Region,
    config: &OptimizerConfig,
) -> Result<RunResult> {
    config.validate()?;
    let decoder = Decoder::new(device, design, region)?;
    let problem = Problem {
        decoder: &decoder,
        design,
        device,
    };
    run_seeded(&problem, config, &[])
}

/// What an optimizer needs to evaluate a genotype.
#[derive(Clone, Copy)]
pub struct Problem<'a> {
    pub decoder: &'a Decoder,
    pub design: &'a DesignSpec,
    pub device: &'a Device,
}

/// Runs with `seeds` placed first in the initial population (or as the
/// starting point of single-state methods).
pub fn run_seeded(
    problem: &Problem<'_>,
    config: &OptimizerConfig,
    seeds: &[Genotype],
) -> Result<RunResult> {
    config.validate()?;
    for s in seeds {
        problem.decoder.check_shape(s)?;
    }
    log::info!(
        "{} on {} blocks, {} evaluations, seed {}",
        config.algorithm,
        problem.decoder.block_count(),
        config.max_evaluations,
        config.rng_seed
    );
    match config.algorithm {
        Algorithm::Nsga2 | Algorithm::Nsga2Reduced => nsga2::run(problem, config, seeds),
        Algorithm::Cmaes => cmaes::run(problem, config, seeds),
        Algorithm::Sa => sa::run(problem, config, seeds),
        Algorithm::Ga => ga::run(problem, config, seeds),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!(matches!("foo".parse::<Algorithm>(), Err(Error::Config(_))));
    }

    #[test]
    fn population_of_one_is_rejected() {
        let cfg = OptimizerConfig {
            population: 1,
            ..Default::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn budget_below_population_is_rejected() {
        let cfg = OptimizerConfig {
            population: 50,
            max_evaluations: 10,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let sa = OptimizerConfig {
            algorithm: Algorithm::Sa,
            ..cfg
        };
        assert!(sa.validate().is_ok());
    }

    #[test]
    fn config_json_uses_defaults_for_missing_fields() {
        let cfg: OptimizerConfig =
            serde_json::from_str(r#"{"algorithm": "nsga2_reduced", "schedule": "linear"}"#)
                .unwrap();
        assert_eq!(cfg.algorithm, Algorithm::Nsga2Reduced);
        assert_eq!(cfg.schedule, CoolingSchedule::Linear);
        assert_eq!(cfg.population, OptimizerConfig::default().population);
        assert!(serde_json::from_str::<OptimizerConfig>(r#"{"popsize": 3}"#).is_err());
    }

    #[test]
    fn weighted_sum_scalarization() {
        let v = ObjectiveValues::new(100.0, 5);
        assert_eq!(Scalarization::Product.apply(&v), 500.0);
        let w = Scalarization::WeightedSum {
            wl2: 1.0,
            bbox: 10.0,
        };
        assert_eq!(w.apply(&v), 150.0);
    }

    #[test]
    fn front_drops_dominated_and_duplicate_points() {
        let g = Genotype {
            distribution: vec![],
            location: vec![],
            mapping: vec![],
        };
        let cands = vec![
            (g.clone(), ObjectiveValues::new(1.0, 2)),
            (g.clone(), ObjectiveValues::new(2.0, 1)),
            (g.clone(), ObjectiveValues::new(2.0, 2)),
            (g.clone(), ObjectiveValues::new(1.0, 2)),
        ];
        let front = ParetoFront::from_candidates(cands);
        assert_eq!(front.len(), 2);
        assert!(front.is_mutually_non_dominated());
    }
}
