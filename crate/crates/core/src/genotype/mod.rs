//! The three-tier placement chromosome and its decoder.
//!
//! * distribution: one gene in `[0, 1]` per (block type, column) of the
//!   region, the share of that type's groups the column receives;
//! * location: one gene in `[0, 1]` per physical group slot, the relative
//!   height of the group inside its cascade run;
//! * mapping: one permutation per block type, deciding which logical group
//!   (and so which unit) each physical slot holds.
//!
//! Chains are placed as atomic groups (anchor + stride), so every decoded
//! placement satisfies the region, exclusivity and cascade constraints.

mod decoder;
mod legalize;
mod migrate;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::design::DesignSpec;
use crate::device::{Device, Region};
use crate::error::Result;
use crate::placement::Placement;

pub use decoder::{Decoder, TypeShape};
pub use legalize::legalize_distribution;
pub use migrate::migrate_with;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Genotype {
    pub distribution: Vec<f64>,
    pub location: Vec<f64>,
    /// One permutation per block type used by the design, in
    /// [`crate::device::BlockType`] order.
    pub mapping: Vec<Vec<u32>>,
}

impl Genotype {
    /// Number of real-valued genes (distribution + location).
    pub fn real_len(&self) -> usize {
        self.distribution.len() + self.location.len()
    }

    pub fn real_gene(&self, i: usize) -> f64 {
        let d = self.distribution.len();
        if i < d {
            self.distribution[i]
        } else {
            self.location[i - d]
        }
    }

    pub fn real_gene_mut(&mut self, i: usize) -> &mut f64 {
        let d = self.distribution.len();
        if i < d {
            &mut self.distribution[i]
        } else {
            &mut self.location[i - d]
        }
    }

    /// Flat real vector: distribution, location, then random keys whose
    /// ascending order reproduces each mapping permutation.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.flat_len());
        v.extend_from_slice(&self.distribution);
        v.extend_from_slice(&self.location);
        for perm in &self.mapping {
            let n = perm.len() as f64;
            let mut keys = vec![0.0; perm.len()];
            for (pos, &item) in perm.iter().enumerate() {
                keys[item as usize] = (pos as f64 + 0.5) / n;
            }
            v.extend(keys);
        }
        v
    }

    pub fn flat_len(&self) -> usize {
        self.real_len() + self.mapping.iter().map(Vec::len).sum::<usize>()
    }

    /// Inverse of [`Genotype::to_flat`] for the shape of `template`. Real
    /// genes are clamped to `[0, 1]`; keys are ranked with ties broken by
    /// index.
    pub fn from_flat(template: &Genotype, flat: &[f64]) -> Genotype {
        let d = template.distribution.len();
        let l = template.location.len();
        let clamp = |x: f64| if x.is_nan() { 0.5 } else { x.clamp(0.0, 1.0) };
        let mut offset = d + l;
        let mapping = template
            .mapping
            .iter()
            .map(|perm| {
                let keys = &flat[offset..offset + perm.len()];
                offset += perm.len();
                random_key_order(keys)
            })
            .collect();
        Genotype {
            distribution: flat[..d].iter().map(|&x| clamp(x)).collect(),
            location: flat[d..d + l].iter().map(|&x| clamp(x)).collect(),
            mapping,
        }
    }
}

/// Indices sorted by key, ties by index.
pub fn random_key_order(keys: &[f64]) -> Vec<u32> {
    let mut idx: Vec<u32> = (0..keys.len() as u32).collect();
    idx.sort_by(|&a, &b| {
        keys[a as usize]
            .total_cmp(&keys[b as usize])
            .then(a.cmp(&b))
    });
    idx
}

pub fn is_permutation(perm: &[u32]) -> bool {
    let mut seen = vec![false; perm.len()];
    perm.iter().all(|&p| {
        let i = p as usize;
        i < seen.len() && !std::mem::replace(&mut seen[i], true)
    })
}

impl Decoder {
    pub fn random_genotype<R: Rng + ?Sized>(&self, rng: &mut R) -> Genotype {
        let distribution = (0..self.distribution_len()).map(|_| rng.random()).collect();
        let location = (0..self.location_len()).map(|_| rng.random()).collect();
        let mapping = self
            .shapes()
            .iter()
            .map(|s| {
                let mut p: Vec<u32> = (0..s.groups as u32).collect();
                p.shuffle(rng);
                p
            })
            .collect();
        Genotype {
            distribution,
            location,
            mapping,
        }
    }
}

/// Seeded random genotype for `design` on `region` of `device`.
pub fn random_genotype(
    device: &Device,
    design: &DesignSpec,
    region: Region,
    seed: u64,
) -> Result<Genotype> {
    let decoder = Decoder::new(device, design, region)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(decoder.random_genotype(&mut rng))
}

pub fn decode(
    genotype: &Genotype,
    device: &Device,
    design: &DesignSpec,
    region: Region,
) -> Result<Placement> {
    Decoder::new(device, design, region)?.decode(genotype)
}

/// Decodes a mapping-only genotype: even distribution, bottom-up stacking.
pub fn decode_reduced(
    mapping: &[Vec<u32>],
    device: &Device,
    design: &DesignSpec,
    region: Region,
) -> Result<Placement> {
    Decoder::new(device, design, region)?.decode_reduced(mapping)
}

/// Re-shapes a genotype found on `src_device` for `dst_device`.
#[allow(clippy::too_many_arguments)]
pub fn migrate(
    genotype: &Genotype,
    src_device: &Device,
    dst_device: &Device,
    design_src: &DesignSpec,
    design_dst: &DesignSpec,
    region_src: Region,
    region_dst: Region,
    seed: u64,
) -> Result<Genotype> {
    let src = Decoder::new(src_device, design_src, region_src)?;
    let dst = Decoder::new(dst_device, design_dst, region_dst)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    migrate_with(genotype, &src, &dst, &mut rng)
}
