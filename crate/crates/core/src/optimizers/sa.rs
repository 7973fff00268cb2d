use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::genotype::Genotype;

use super::operators::{creep_one, swap_within_class};
use super::tracker::Tracker;
use super::{CoolingSchedule, OptimizerConfig, Problem, RunResult};

/// Temperature probing spends one evaluation in this many, up to
/// `MAX_PROBES`.
const PROBE_SHARE: u64 = 50;
const MAX_PROBES: u64 = 200;

#[derive(Clone, Copy, Debug)]
enum Move {
    Distribution,
    Location,
    Swap,
}

#[derive(Clone, Copy, Debug)]
struct Cooling {
    schedule: CoolingSchedule,
    t0: f64,
    beta: f64,
    alpha: f64,
    tmax: f64,
}

impl Cooling {
    fn temperature(&self, t: u64) -> f64 {
        let t = t as f64;
        match self.schedule {
            CoolingSchedule::Hyperbolic => self.t0 / (1.0 + self.beta * t),
            CoolingSchedule::Exponential => self.t0 * self.alpha.powf(t),
            CoolingSchedule::Linear => self.t0 * (1.0 - t / self.tmax).max(0.0),
        }
    }
}

/// What a move may touch.
struct MoveSpace {
    live_distribution: Vec<usize>,
    classes: Vec<Vec<u32>>,
}

fn perturb<R: Rng + ?Sized>(
    g: &mut Genotype,
    kind: Move,
    sigma: f64,
    space: &MoveSpace,
    rng: &mut R,
) {
    let classes = &space.classes;
    match kind {
        Move::Distribution => {
            let live = &space.live_distribution;
            let i = live[rng.random_range(0..live.len())];
            creep_one(&mut g.distribution[i], sigma, rng);
        }
        Move::Location => {
            let i = rng.random_range(0..g.location.len());
            creep_one(&mut g.location[i], sigma, rng);
        }
        Move::Swap => {
            // an entry with a same-class partner, so the swap moves something
            let candidates: Vec<(usize, usize)> = (0..g.mapping.len())
                .flat_map(|t| {
                    let sizes = class_sizes(&classes[t]);
                    (0..g.mapping[t].len())
                        .filter(move |&i| sizes[classes[t][i] as usize] >= 2)
                        .map(move |i| (t, i))
                })
                .collect();
            let (t, i) = candidates[rng.random_range(0..candidates.len())];
            let pos = g.mapping[t]
                .iter()
                .position(|&e| e as usize == i)
                .expect("permutation");
            swap_within_class(&mut g.mapping[t], pos, Some(&classes[t]), rng);
        }
    }
}

/// Accepts every non-worsening move and a worsening one with probability
/// `exp(-delta / temperature)`, given a uniform draw `u` in `[0, 1)`.
fn metropolis(delta: f64, temperature: f64, u: f64) -> bool {
    delta <= 0.0 || (temperature > 0.0 && u < (-delta / temperature).exp())
}

fn class_sizes(classes: &[u32]) -> Vec<usize> {
    let mut sizes = vec![0; classes.iter().max().map_or(0, |&m| m as usize + 1)];
    for &c in classes {
        sizes[c as usize] += 1;
    }
    sizes
}

pub(crate) fn run(
    problem: &Problem<'_>,
    config: &OptimizerConfig,
    seeds: &[Genotype],
) -> Result<RunResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut tracker = Tracker::new(problem, config);
    let mut current = match seeds.first() {
        Some(g) => g.clone(),
        None => problem.decoder.random_genotype(&mut rng),
    };
    let (_, mut energy) = tracker.single(&current)?;
    let space = MoveSpace {
        live_distribution: problem.decoder.live_distribution_genes(),
        classes: problem.decoder.mapping_classes(),
    };

    let moves: Vec<Move> = [
        (!space.live_distribution.is_empty()).then_some(Move::Distribution),
        (!current.location.is_empty()).then_some(Move::Location),
        space
            .classes
            .iter()
            .any(|c| class_sizes(c).iter().any(|&n| n >= 2))
            .then_some(Move::Swap),
    ]
    .into_iter()
    .flatten()
    .collect();
    let t0 = match (config.t0, config.t0_factor) {
        (Some(t0), _) => t0,
        (None, Some(f)) => f * energy,
        (None, None) if moves.is_empty() => 0.0,
        (None, None) => {
            let probes = (config.max_evaluations / PROBE_SHARE).clamp(1, MAX_PROBES);
            let mut uphill = Vec::new();
            for _ in 0..probes {
                if tracker.stopped() {
                    break;
                }
                let mut candidate = current.clone();
                let kind = moves[rng.random_range(0..moves.len())];
                perturb(&mut candidate, kind, config.sa_step_sigma, &space, &mut rng);
                let (_, e) = tracker.single(&candidate)?;
                if e > energy {
                    uphill.push(e - energy);
                }
            }
            if uphill.is_empty() {
                0.0
            } else {
                uphill.sort_by(f64::total_cmp);
                let median = uphill[uphill.len() / 2];
                -median / config.initial_acceptance.ln()
            }
        }
    };
    let tmax = (tracker.remaining().saturating_sub(1)).max(1) as f64;
    let cooling = Cooling {
        schedule: config.schedule,
        t0,
        beta: config
            .beta
            .unwrap_or((1.0 / config.final_temperature_ratio - 1.0) / tmax),
        alpha: config
            .alpha
            .unwrap_or(config.final_temperature_ratio.powf(1.0 / tmax)),
        tmax,
    };
    log::debug!("sa: {cooling:?}");

    let mut accepted = 0u64;
    let mut step = 0u64;
    while !tracker.stopped() && !moves.is_empty() {
        let temperature = cooling.temperature(step);
        let mut candidate = current.clone();
        let kind = moves[rng.random_range(0..moves.len())];
        perturb(&mut candidate, kind, config.sa_step_sigma, &space, &mut rng);
        let (_, e) = tracker.single(&candidate)?;
        if metropolis(e - energy, temperature, rng.random()) {
            current = candidate;
            energy = e;
            accepted += 1;
        }
        step += 1;
    }
    tracker.finish(None, Some(accepted))
}
