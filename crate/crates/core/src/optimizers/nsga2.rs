use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::genotype::Genotype;
use crate::objective::ObjectiveValues;

use super::tracker::Tracker;
use super::{Algorithm, OptimizerConfig, ParetoFront, Problem, RunResult};

/// `a` is no worse than `b` everywhere and strictly better somewhere.
pub fn dominates(a: &[f64; 2], b: &[f64; 2]) -> bool {
    a[0] <= b[0] && a[1] <= b[1] && (a[0] < b[0] || a[1] < b[1])
}

/// Successive non-dominated fronts, each listing point indices in ascending
/// order.
pub fn fast_non_dominated_sort(points: &[[f64; 2]]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    let mut fronts = vec![Vec::new()];
    for p in 0..n {
        for q in 0..n {
            if dominates(&points[p], &points[q]) {
                dominated_by[p].push(q);
            } else if dominates(&points[q], &points[p]) {
                domination_count[p] += 1;
            }
        }
        if domination_count[p] == 0 {
            fronts[0].push(p);
        }
    }
    let mut i = 0;
    while !fronts[i].is_empty() {
        let mut next = Vec::new();
        for &p in &fronts[i] {
            for &q in &dominated_by[p] {
                domination_count[q] -= 1;
                if domination_count[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        fronts.push(next);
        i += 1;
    }
    fronts.pop();
    fronts
}

/// Crowding distance of every point of one front. Extremes of each
/// objective are infinite; an objective with zero range adds nothing.
#[allow(clippy::needless_range_loop)]
pub fn crowding_distance(front: &[[f64; 2]]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let mut dist = vec![0.0; n];
    for m in 0..2 {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| front[a][m].total_cmp(&front[b][m]).then(a.cmp(&b)));
        let lo = front[order[0]][m];
        let hi = front[order[n - 1]][m];
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        for k in 1..n - 1 {
            dist[order[k]] += (front[order[k + 1]][m] - front[order[k - 1]][m]) / range;
        }
    }
    dist
}

/// Front rank and crowding distance of every point.
fn rank_and_crowding(points: &[[f64; 2]]) -> (Vec<usize>, Vec<f64>, Vec<Vec<usize>>) {
    let fronts = fast_non_dominated_sort(points);
    let mut rank = vec![0; points.len()];
    let mut crowd = vec![0.0; points.len()];
    for (r, front) in fronts.iter().enumerate() {
        let pts: Vec<[f64; 2]> = front.iter().map(|&i| points[i]).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&pts)) {
            rank[i] = r;
            crowd[i] = d;
        }
    }
    (rank, crowd, fronts)
}

fn tournament<R: Rng + ?Sized>(rank: &[usize], crowd: &[f64], size: usize, rng: &mut R) -> usize {
    let mut best = rng.random_range(0..rank.len());
    for _ in 1..size {
        let c = rng.random_range(0..rank.len());
        if rank[c] < rank[best] || (rank[c] == rank[best] && crowd[c] > crowd[best]) {
            best = c;
        }
    }
    best
}

pub(crate) fn initial_population<R: Rng + ?Sized>(
    problem: &Problem<'_>,
    config: &OptimizerConfig,
    seeds: &[Genotype],
    size: usize,
    rng: &mut R,
) -> Vec<Genotype> {
    let decoder = problem.decoder;
    let reduced = config.algorithm == Algorithm::Nsga2Reduced;
    let mut pop: Vec<Genotype> = seeds.iter().take(size).cloned().collect();
    while pop.len() < size {
        pop.push(decoder.random_genotype(rng));
    }
    if reduced {
        for g in &mut pop {
            *g = decoder.reduced_genes(&g.mapping);
        }
    }
    pop
}

pub(crate) fn run(
    problem: &Problem<'_>,
    config: &OptimizerConfig,
    seeds: &[Genotype],
) -> Result<RunResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let variation = config.variation(problem.decoder);
    let mu = config.population;
    let mut tracker = Tracker::new(problem, config);

    let mut pop = initial_population(problem, config, seeds, mu, &mut rng);
    let mut values: Vec<ObjectiveValues> =
        tracker.batch(&pop)?.into_iter().map(|(v, _)| v).collect();

    while !tracker.stopped() {
        let points: Vec<[f64; 2]> = values.iter().map(|v| v.pair()).collect();
        let (rank, crowd, _) = rank_and_crowding(&points);
        let lambda = (mu as u64).min(tracker.remaining()) as usize;
        let mut children = Vec::with_capacity(lambda + 1);
        while children.len() < lambda {
            let a = tournament(&rank, &crowd, config.tournament_size, &mut rng);
            let b = tournament(&rank, &crowd, config.tournament_size, &mut rng);
            let (c, d) = variation.offspring(&pop[a], &pop[b], &mut rng);
            children.push(c);
            children.push(d);
        }
        children.truncate(lambda);
        let child_values = tracker.batch(&children)?;

        pop.extend(children);
        values.extend(child_values.into_iter().map(|(v, _)| v));
        let points: Vec<[f64; 2]> = values.iter().map(|v| v.pair()).collect();
        let (_, crowd, fronts) = rank_and_crowding(&points);
        let mut survivors = Vec::with_capacity(mu);
        for front in fronts {
            if survivors.len() + front.len() <= mu {
                survivors.extend(front);
            } else {
                let mut rest = front;
                rest.sort_by(|&a, &b| crowd[b].total_cmp(&crowd[a]).then(a.cmp(&b)));
                survivors.extend(rest.into_iter().take(mu - survivors.len()));
            }
            if survivors.len() == mu {
                break;
            }
        }
        pop = survivors.iter().map(|&i| pop[i].clone()).collect();
        values = survivors.iter().map(|&i| values[i]).collect();
    }

    let points: Vec<[f64; 2]> = values.iter().map(|v| v.pair()).collect();
    let first = fast_non_dominated_sort(&points).swap_remove(0);
    let front = ParetoFront::from_candidates(
        first
            .into_iter()
            .map(|i| {
                let g = if config.algorithm == Algorithm::Nsga2Reduced {
                    problem.decoder.reduced_genes(&pop[i].mapping)
                } else {
                    pop[i].clone()
                };
                (g, values[i])
            })
            .collect(),
    );
    tracker.finish(Some(front), None)
}
