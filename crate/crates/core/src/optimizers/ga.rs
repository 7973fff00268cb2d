use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::genotype::Genotype;

use super::nsga2::initial_population;
use super::tracker::Tracker;
use super::{OptimizerConfig, Problem, RunResult};

fn tournament<R: Rng + ?Sized>(scores: &[f64], size: usize, rng: &mut R) -> usize {
    let mut best = rng.random_range(0..scores.len());
    for _ in 1..size {
        let c = rng.random_range(0..scores.len());
        if scores[c] < scores[best] {
            best = c;
        }
    }
    best
}

fn argmin(scores: &[f64]) -> usize {
    (0..scores.len())
        .min_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)))
        .expect("non-empty population")
}

/// Generational GA on the scalarized objective, keeping the best individual.
pub(crate) fn run(
    problem: &Problem<'_>,
    config: &OptimizerConfig,
    seeds: &[Genotype],
) -> Result<RunResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let variation = config.variation(problem.decoder);
    let size = config.population;
    let mut tracker = Tracker::new(problem, config);

    let mut pop = initial_population(problem, config, seeds, size, &mut rng);
    let mut scores: Vec<f64> = tracker.batch(&pop)?.into_iter().map(|(_, s)| s).collect();

    while !tracker.stopped() {
        let elite = argmin(&scores);
        let want = ((size - 1) as u64).min(tracker.remaining()) as usize;
        let mut children = Vec::with_capacity(want + 1);
        while children.len() < want {
            let a = tournament(&scores, config.tournament_size, &mut rng);
            let b = tournament(&scores, config.tournament_size, &mut rng);
            let (c, d) = variation.offspring(&pop[a], &pop[b], &mut rng);
            children.push(c);
            children.push(d);
        }
        children.truncate(want);
        let child_scores = tracker.batch(&children)?;

        let mut next = Vec::with_capacity(size);
        let mut next_scores = Vec::with_capacity(size);
        next.push(pop[elite].clone());
        next_scores.push(scores[elite]);
        next.extend(children);
        next_scores.extend(child_scores.into_iter().map(|(_, s)| s));
        // a budget-truncated last generation keeps the previous population
        // filling the gaps
        let mut k = 0;
        while next.len() < size {
            if k != elite {
                next.push(pop[k].clone());
                next_scores.push(scores[k]);
            }
            k += 1;
        }
        pop = next;
        scores = next_scores;
    }
    tracker.finish(None, None)
}
