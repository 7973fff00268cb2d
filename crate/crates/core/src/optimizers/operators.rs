use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::genotype::Genotype;

/// Crossover and mutation shared by NSGA-II and the GA.
///
/// Real tiers use uniform crossover and Gaussian creep; mapping tiers use
/// order crossover and swap mutation.
#[derive(Clone, Debug)]
pub struct Variation {
    pub crossover_rate: f64,
    /// Per-gene probability; `None` means `1 / genes` per tier.
    pub mutation_rate: Option<f64>,
    pub creep_sigma: f64,
    /// Off for mapping-only searches.
    pub mutate_reals: bool,
    /// Class of every mapping entry per type; swaps stay inside a class.
    /// Empty means one class per type.
    pub swap_classes: Vec<Vec<u32>>,
}

impl Variation {
    pub fn offspring<R: Rng + ?Sized>(
        &self,
        a: &Genotype,
        b: &Genotype,
        rng: &mut R,
    ) -> (Genotype, Genotype) {
        let (mut c, mut d) = (a.clone(), b.clone());
        if rng.random::<f64>() < self.crossover_rate {
            if self.mutate_reals {
                for i in 0..c.real_len() {
                    if rng.random::<bool>() {
                        std::mem::swap(c.real_gene_mut(i), d.real_gene_mut(i));
                    }
                }
            }
            for t in 0..c.mapping.len() {
                let (x, y) = (&a.mapping[t], &b.mapping[t]);
                if x.len() < 2 {
                    continue;
                }
                let (i, j) = cut_points(x.len(), rng);
                c.mapping[t] = order_crossover(x, y, i, j);
                d.mapping[t] = order_crossover(y, x, i, j);
            }
        }
        self.mutate(&mut c, rng);
        self.mutate(&mut d, rng);
        (c, d)
    }

    pub fn mutate<R: Rng + ?Sized>(&self, g: &mut Genotype, rng: &mut R) {
        if self.mutate_reals && g.real_len() > 0 {
            let rate = self.mutation_rate.unwrap_or(1.0 / g.real_len() as f64);
            creep(g, rate, self.creep_sigma, rng);
        }
        for (t, perm) in g.mapping.iter_mut().enumerate() {
            if perm.len() < 2 {
                continue;
            }
            let classes = self.swap_classes.get(t).map(Vec::as_slice);
            let rate = self.mutation_rate.unwrap_or(1.0 / perm.len() as f64);
            for i in 0..perm.len() {
                if rng.random::<f64>() < rate {
                    swap_within_class(perm, i, classes, rng);
                }
            }
        }
    }
}

/// Swaps position `i` with a random other position holding an entry of the
/// same class. Does nothing when `i` is alone in its class.
pub(crate) fn swap_within_class<R: Rng + ?Sized>(
    perm: &mut [u32],
    i: usize,
    classes: Option<&[u32]>,
    rng: &mut R,
) {
    let class = |p: usize| classes.map_or(0, |c| c[perm[p] as usize]);
    let mates: Vec<usize> = (0..perm.len())
        .filter(|&p| p != i && class(p) == class(i))
        .collect();
    if !mates.is_empty() {
        let j = mates[rng.random_range(0..mates.len())];
        perm.swap(i, j);
    }
}

/// Adds `N(0, sigma)` to each real gene with probability `rate`, clamping
/// to `[0, 1]`.
pub(crate) fn creep<R: Rng + ?Sized>(g: &mut Genotype, rate: f64, sigma: f64, rng: &mut R) {
    let normal = Normal::new(0.0, sigma).expect("sigma validated positive");
    for i in 0..g.real_len() {
        if rng.random::<f64>() < rate {
            let v = g.real_gene_mut(i);
            *v = (*v + normal.sample(rng)).clamp(0.0, 1.0);
        }
    }
}

pub(crate) fn creep_one<R: Rng + ?Sized>(v: &mut f64, sigma: f64, rng: &mut R) {
    let normal = Normal::new(0.0, sigma).expect("sigma validated positive");
    *v = (*v + normal.sample(rng)).clamp(0.0, 1.0);
}

fn cut_points<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let a = rng.random_range(0..n);
    let b = rng.random_range(0..n);
    (a.min(b), a.max(b))
}

/// Order crossover: the child keeps `first[i..=j]` in place and fills the
/// remaining positions, starting after `j` and wrapping, with the missing
/// items in the order they appear in `second` from position `j + 1`.
pub fn order_crossover(first: &[u32], second: &[u32], i: usize, j: usize) -> Vec<u32> {
    let n = first.len();
    let mut child = vec![u32::MAX; n];
    let mut taken = vec![false; n];
    for k in i..=j {
        child[k] = first[k];
        taken[first[k] as usize] = true;
    }
    let mut pos = (j + 1) % n;
    for k in 0..n {
        let item = second[(j + 1 + k) % n];
        if taken[item as usize] {
            continue;
        }
        while child[pos] != u32::MAX {
            pos = (pos + 1) % n;
        }
        child[pos] = item;
        taken[item as usize] = true;
    }
    child
}
