use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;

use super::{Decoder, Genotype};

/// Source index whose relative column position is nearest to `i` of `dst`
/// columns, rounding halves up.
fn nearest_source(i: usize, src: usize, dst: usize) -> usize {
    if dst <= 1 || src <= 1 {
        return 0;
    }
    let (i, src, dst) = (i as u64, src as u64, dst as u64);
    ((2 * i * (src - 1) + (dst - 1)) / (2 * (dst - 1))) as usize
}

/// Re-shapes `g` (shaped for `src`) for `dst`.
///
/// Distribution genes are resampled by relative column position, location
/// genes are truncated or extended with random values and each mapping keeps
/// its surviving entries in order with missing indices appended shuffled.
/// Types the source lacks get fresh random genes.
pub fn migrate_with<R: Rng + ?Sized>(
    g: &Genotype,
    src: &Decoder,
    dst: &Decoder,
    rng: &mut R,
) -> Result<Genotype> {
    src.check_shape(g)?;
    let src_shapes = src.shapes();
    let dst_shapes = dst.shapes();
    if src_shapes == dst_shapes {
        return Ok(g.clone());
    }

    let mut out = Genotype {
        distribution: Vec::with_capacity(dst.distribution_len()),
        location: Vec::with_capacity(dst.location_len()),
        mapping: Vec::with_capacity(dst_shapes.len()),
    };
    let mut dist_off = vec![0; src_shapes.len()];
    let mut loc_off = vec![0; src_shapes.len()];
    for i in 1..src_shapes.len() {
        dist_off[i] = dist_off[i - 1] + src_shapes[i - 1].columns;
        loc_off[i] = loc_off[i - 1] + src_shapes[i - 1].groups;
    }

    for shape in &dst_shapes {
        let from = src_shapes
            .iter()
            .position(|s| s.block_type == shape.block_type);
        match from {
            Some(k) if src_shapes[k].columns > 0 => {
                let s = &src_shapes[k];
                let genes = &g.distribution[dist_off[k]..dist_off[k] + s.columns];
                out.distribution.extend(
                    (0..shape.columns).map(|i| genes[nearest_source(i, s.columns, shape.columns)]),
                );
            }
            _ => out
                .distribution
                .extend((0..shape.columns).map(|_| rng.random::<f64>())),
        }
    }
    for shape in &dst_shapes {
        let from = src_shapes
            .iter()
            .position(|s| s.block_type == shape.block_type);
        let kept = match from {
            Some(k) => {
                let genes = &g.location[loc_off[k]..loc_off[k] + src_shapes[k].groups];
                let n = genes.len().min(shape.groups);
                out.location.extend_from_slice(&genes[..n]);
                n
            }
            None => 0,
        };
        out.location
            .extend((kept..shape.groups).map(|_| rng.random::<f64>()));
    }
    for shape in &dst_shapes {
        let n = shape.groups as u32;
        let mut perm: Vec<u32> = match src_shapes
            .iter()
            .position(|s| s.block_type == shape.block_type)
        {
            Some(k) => g.mapping[k].iter().copied().filter(|&p| p < n).collect(),
            None => Vec::new(),
        };
        let start = perm.len() as u32;
        let mut missing: Vec<u32> = (start..n).collect();
        missing.shuffle(rng);
        perm.extend(missing);
        out.mapping.push(perm);
    }
    Ok(out)
}
