use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::genotype::Genotype;

use super::tracker::Tracker;
use super::{OptimizerConfig, Problem, RunResult};

#[derive(Clone, Copy, Debug, Default)]
pub struct CmaesParams {
    /// Offspring per generation; `None` means `4 + floor(3 ln n)`.
    pub lambda: Option<usize>,
    /// Keep only the covariance diagonal (separable mode).
    pub diagonal: bool,
}

#[derive(Clone, Debug)]
enum Covariance {
    Full {
        c: DMatrix<f64>,
        /// Eigenvectors of `c`.
        b: DMatrix<f64>,
        /// Square roots of the eigenvalues.
        d: DVector<f64>,
        updated_at: usize,
    },
    Diagonal(DVector<f64>),
}

/// (mu/mu_w, lambda) CMA-ES minimizer with an ask/tell interface.
#[derive(Clone, Debug)]
pub struct Cmaes {
    n: usize,
    lambda: usize,
    weights: Vec<f64>,
    mueff: f64,
    cc: f64,
    cs: f64,
    c1: f64,
    cmu: f64,
    damps: f64,
    chi_n: f64,
    mean: DVector<f64>,
    sigma: f64,
    pc: DVector<f64>,
    ps: DVector<f64>,
    cov: Covariance,
    generation: usize,
}

impl Cmaes {
    pub fn new(mean: Vec<f64>, sigma: f64, params: CmaesParams) -> Self {
        let n = mean.len().max(1);
        let nf = n as f64;
        let lambda = params
            .lambda
            .unwrap_or(4 + (3.0 * nf.ln()).floor() as usize)
            .max(2);
        let mu = lambda / 2;
        let raw: Vec<f64> = (0..mu)
            .map(|i| (mu as f64 + 0.5).ln() - ((i + 1) as f64).ln())
            .collect();
        let sum: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / sum).collect();
        let mueff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();

        let cc = (4.0 + mueff / nf) / (nf + 4.0 + 2.0 * mueff / nf);
        let cs = (mueff + 2.0) / (nf + mueff + 5.0);
        let mut c1 = 2.0 / ((nf + 1.3).powi(2) + mueff);
        let mut cmu =
            (2.0 * (mueff - 2.0 + 1.0 / mueff) / ((nf + 2.0).powi(2) + mueff)).min(1.0 - c1);
        if params.diagonal {
            // separable learning rates
            let f = (nf + 2.0) / 3.0;
            c1 = (c1 * f).min(1.0);
            cmu = (cmu * f).min(1.0 - c1);
        }
        let damps = 1.0 + 2.0 * (((mueff - 1.0) / (nf + 1.0)).sqrt() - 1.0).max(0.0) + cs;
        let chi_n = nf.sqrt() * (1.0 - 1.0 / (4.0 * nf) + 1.0 / (21.0 * nf * nf));
        let cov = if params.diagonal {
            Covariance::Diagonal(DVector::from_element(n, 1.0))
        } else {
            Covariance::Full {
                c: DMatrix::identity(n, n),
                b: DMatrix::identity(n, n),
                d: DVector::from_element(n, 1.0),
                updated_at: 0,
            }
        };
        Cmaes {
            n,
            lambda,
            weights,
            mueff,
            cc,
            cs,
            c1,
            cmu,
            damps,
            chi_n,
            mean: DVector::from_vec(if mean.is_empty() { vec![0.0] } else { mean }),
            sigma,
            pc: DVector::zeros(n),
            ps: DVector::zeros(n),
            cov,
            generation: 0,
        }
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mean(&self) -> &[f64] {
        self.mean.as_slice()
    }

    /// Draws one generation of `lambda` candidates.
    pub fn ask<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Vec<f64>> {
        (0..self.lambda)
            .map(|_| {
                let z = DVector::from_fn(self.n, |_, _| rng.sample::<f64, _>(StandardNormal));
                let y = match &self.cov {
                    Covariance::Full { b, d, .. } => b * z.component_mul(d),
                    Covariance::Diagonal(c) => z.component_mul(&c.map(f64::sqrt)),
                };
                (&self.mean + y * self.sigma).as_slice().to_vec()
            })
            .collect()
    }

    /// Updates the distribution from evaluated candidates (possibly repaired
    /// versions of what [`Cmaes::ask`] returned). Lower fitness is better.
    pub fn tell(&mut self, xs: &[Vec<f64>], fitness: &[f64]) {
        assert_eq!(xs.len(), fitness.len());
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]).then(a.cmp(&b)));
        let ys: Vec<DVector<f64>> = order
            .iter()
            .take(self.weights.len())
            .map(|&i| (DVector::from_column_slice(&xs[i]) - &self.mean) / self.sigma)
            .collect();
        let mut yw = DVector::zeros(self.n);
        for (w, y) in self.weights.iter().zip(&ys) {
            yw += y * *w;
        }
        self.mean += &yw * self.sigma;
        self.generation += 1;

        let inv_sqrt_yw = match &self.cov {
            Covariance::Full { b, d, .. } => b * (b.transpose() * &yw).component_div(d),
            Covariance::Diagonal(c) => yw.component_div(&c.map(f64::sqrt)),
        };
        self.ps = &self.ps * (1.0 - self.cs)
            + inv_sqrt_yw * (self.cs * (2.0 - self.cs) * self.mueff).sqrt();
        let ps_norm = self.ps.norm();
        let decay = 1.0 - (1.0 - self.cs).powi(2 * self.generation as i32);
        let hsig = ps_norm / decay.sqrt() / self.chi_n < 1.4 + 2.0 / (self.n as f64 + 1.0);
        let hsig_f = if hsig { 1.0 } else { 0.0 };
        self.pc = &self.pc * (1.0 - self.cc)
            + &yw * (hsig_f * (self.cc * (2.0 - self.cc) * self.mueff).sqrt());

        let (c1, cmu) = (self.c1, self.cmu);
        let keep = 1.0 - c1 - cmu + (1.0 - hsig_f) * c1 * self.cc * (2.0 - self.cc);
        match &mut self.cov {
            Covariance::Full { c, .. } => {
                let mut rank_mu = DMatrix::zeros(self.n, self.n);
                for (w, y) in self.weights.iter().zip(&ys) {
                    rank_mu.ger(*w, y, y, 1.0);
                }
                *c *= keep;
                c.ger(c1, &self.pc, &self.pc, 1.0);
                *c += rank_mu * cmu;
            }
            Covariance::Diagonal(c) => {
                let mut rank_mu = DVector::zeros(self.n);
                for (w, y) in self.weights.iter().zip(&ys) {
                    rank_mu += y.component_mul(y) * *w;
                }
                *c = &*c * keep + self.pc.component_mul(&self.pc) * c1 + rank_mu * cmu;
            }
        }
        self.sigma *= ((self.cs / self.damps) * (ps_norm / self.chi_n - 1.0)).exp();
        self.refresh_eigensystem();
    }

    fn refresh_eigensystem(&mut self) {
        let gap = (self.lambda as f64 / ((self.c1 + self.cmu) * self.n as f64 * 10.0)).max(1.0);
        let generation = self.generation;
        if let Covariance::Full {
            c,
            b,
            d,
            updated_at,
        } = &mut self.cov
        {
            if ((generation - *updated_at) as f64) < gap {
                return;
            }
            *updated_at = generation;
            let sym = (&*c + c.transpose()) * 0.5;
            *c = sym.clone();
            let eig = SymmetricEigen::new(sym);
            *b = eig.eigenvectors;
            *d = eig.eigenvalues.map(|v| v.max(1e-20).sqrt());
        }
    }
}

/// Minimizes `f` from `x0` for at most `max_evaluations` calls. Returns the
/// best point, its value and the evaluations used.
pub fn minimize<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: Vec<f64>,
    sigma0: f64,
    max_evaluations: u64,
    seed: u64,
    params: CmaesParams,
) -> (Vec<f64>, f64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut es = Cmaes::new(x0.clone(), sigma0, params);
    let mut best = (x0, f64::INFINITY);
    let mut evals = 0;
    while evals + es.lambda() as u64 <= max_evaluations {
        let xs = es.ask(&mut rng);
        let fit: Vec<f64> = xs.iter().map(|x| f(x)).collect();
        evals += xs.len() as u64;
        for (x, &v) in xs.iter().zip(&fit) {
            if v < best.1 {
                best = (x.clone(), v);
            }
        }
        es.tell(&xs, &fit);
    }
    (best.0, best.1, evals)
}

pub(crate) fn run(
    problem: &Problem<'_>,
    config: &OptimizerConfig,
    seeds: &[Genotype],
) -> Result<RunResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut tracker = Tracker::new(problem, config);
    let template = match seeds.first() {
        Some(g) => g.clone(),
        None => problem.decoder.random_genotype(&mut rng),
    };
    if !seeds.is_empty() {
        let take = (seeds.len() as u64).min(tracker.remaining()) as usize;
        tracker.batch(&seeds[..take])?;
    }
    let flat = template.to_flat();
    let n = flat.len();
    let reals = template.real_len();
    let mut es = Cmaes::new(
        flat,
        config.cmaes_sigma0,
        CmaesParams {
            lambda: config.cmaes_lambda,
            diagonal: n > config.cmaes_diagonal_above,
        },
    );
    log::debug!("cmaes: n = {n}, lambda = {}", es.lambda());

    while !tracker.stopped() {
        let mut xs = es.ask(&mut rng);
        let take = (xs.len() as u64).min(tracker.remaining()) as usize;
        xs.truncate(take);
        for x in &mut xs {
            for v in &mut x[..reals] {
                *v = v.clamp(0.0, 1.0);
            }
        }
        let genotypes: Vec<Genotype> = xs
            .iter()
            .map(|x| Genotype::from_flat(&template, x))
            .collect();
        let scored = tracker.batch(&genotypes)?;
        if take < es.lambda() {
            break;
        }
        let fitness: Vec<f64> = scored.iter().map(|&(_, s)| s).collect();
        es.tell(&xs, &fitness);
    }
    tracker.finish(None, None)
}
