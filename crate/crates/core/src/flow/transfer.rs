use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::design::DesignSpec;
use crate::device::{Device, Region};
use crate::error::Result;
use crate::genotype::{migrate_with, Decoder, Genotype};
use crate::optimizers::{run_seeded, OptimizerConfig, Problem, RunResult};

/// A solved placement problem whose best genotype seeds another.
#[derive(Clone, Copy)]
pub struct SeedSource<'a> {
    pub genotype: &'a Genotype,
    pub device: &'a Device,
    pub design: &'a DesignSpec,
    pub region: Region,
}

/// The migrated elite followed by mutated copies of it, enough to fill a
/// population (or just the elite for single-state methods).
pub fn seeded_population(
    elite: &Genotype,
    decoder: &Decoder,
    config: &OptimizerConfig,
) -> Vec<Genotype> {
    let size = if config.algorithm.uses_population() {
        config.population
    } else {
        1
    };
    // offset so the copies do not replay the optimizer's own stream
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed ^ 0x5eed_c0de);
    let variation = config.variation(decoder);
    let mut out = Vec::with_capacity(size);
    out.push(elite.clone());
    while out.len() < size {
        let mut g = elite.clone();
        variation.mutate(&mut g, &mut rng);
        out.push(g);
    }
    out
}

/// Migrates `seed` onto `(device, design, region)` and optimizes from it.
/// With `config.target` set the run stops once the target is reached and
/// reports how many evaluations that took.
pub fn transfer_place(
    seed: SeedSource<'_>,
    device: &Device,
    design: &DesignSpec,
    region: Region,
    config: &OptimizerConfig,
) -> Result<RunResult> {
    config.validate()?;
    let src = Decoder::new(seed.device, seed.design, seed.region)?;
    let dst = Decoder::new(device, design, region)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let elite = migrate_with(seed.genotype, &src, &dst, &mut rng)?;
    let problem = Problem {
        decoder: &dst,
        design,
        device,
    };
    let seeds = seeded_population(&elite, &dst, config);
    run_seeded(&problem, config, &seeds)
}
