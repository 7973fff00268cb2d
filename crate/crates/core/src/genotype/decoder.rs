use crate::design::{DesignSpec, Group};
use crate::device::{BlockType, ColumnRuns, Device, Region, Site};
use crate::error::{Deficit, Error, Result};
use crate::placement::Placement;

use super::{is_permutation, legalize_distribution, Genotype};

/// Gene counts of one block type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeShape {
    pub block_type: BlockType,
    /// Columns of the type, one distribution gene each.
    pub columns: usize,
    /// Groups of the type, one location gene and one mapping entry each.
    pub groups: usize,
}

/// Groups of one chain length.
#[derive(Clone, Debug)]
struct LengthClass {
    len: u32,
    /// Type-local group indices, in design order.
    members: Vec<u32>,
}

#[derive(Clone, Debug)]
struct TypeLayout {
    block_type: BlockType,
    stride: u32,
    columns: Vec<ColumnRuns>,
    /// Longest first.
    classes: Vec<LengthClass>,
    /// Design group index of every type-local group.
    groups: Vec<usize>,
    class_of: Vec<usize>,
    dist_offset: usize,
    loc_offset: usize,
}

/// A physical group position before it receives a logical group.
#[derive(Clone, Copy, Debug)]
struct Slot {
    column: usize,
    run: usize,
    class: usize,
    len: u32,
}

/// A slot after location decoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Anchor {
    x: u32,
    y: u32,
    class: usize,
}

#[derive(Clone, Copy)]
enum Split<'a> {
    Genes(&'a [f64]),
    Even,
    ColumnOrder,
}

/// Decodes genotypes of one design on one region of one device.
///
/// Construction checks capacity once; a decoder exists only for designs that
/// pack, so decoding never fails on a well-shaped genotype.
#[derive(Clone, Debug)]
pub struct Decoder {
    region: Region,
    groups: Vec<Group>,
    num_blocks: usize,
    types: Vec<TypeLayout>,
    distribution_len: usize,
    location_len: usize,
    /// Anchors of the reduced (even split, stacked) layout.
    reduced: Vec<Vec<Anchor>>,
}

impl Decoder {
    pub fn new(device: &Device, design: &DesignSpec, region: Region) -> Result<Self> {
        let groups = design.groups();
        let mut types = Vec::new();
        let mut dist_offset = 0;
        let mut loc_offset = 0;
        for t in design.block_types() {
            let type_groups: Vec<usize> = groups
                .iter()
                .enumerate()
                .filter(|(_, g)| g.block_type == t)
                .map(|(i, _)| i)
                .collect();
            let mut lens: Vec<u32> = type_groups.iter().map(|&i| groups[i].len()).collect();
            lens.sort_unstable_by(|a, b| b.cmp(a));
            lens.dedup();
            let classes: Vec<LengthClass> = lens
                .iter()
                .map(|&len| LengthClass {
                    len,
                    members: type_groups
                        .iter()
                        .enumerate()
                        .filter(|(_, &g)| groups[g].len() == len)
                        .map(|(local, _)| local as u32)
                        .collect(),
                })
                .collect();
            let mut class_of = vec![0; type_groups.len()];
            for (k, c) in classes.iter().enumerate() {
                for &m in &c.members {
                    class_of[m as usize] = k;
                }
            }
            let columns = device.cascade_runs(t, region);
            let layout = TypeLayout {
                block_type: t,
                stride: t.cascade_stride(),
                dist_offset,
                loc_offset,
                columns,
                classes,
                class_of,
                groups: type_groups,
            };
            dist_offset += layout.columns.len();
            loc_offset += layout.groups.len();
            types.push(layout);
        }

        let mut deficits = Vec::new();
        let mut reduced = Vec::new();
        for layout in &types {
            match layout
                .slots(Split::Even)
                .or_else(|_| layout.slots(Split::ColumnOrder))
            {
                Ok(slots) => reduced.push(layout.anchors(&slots, None)),
                Err(placed) => deficits.push(Deficit {
                    block_type: layout.block_type,
                    required: layout.groups.len(),
                    placed,
                }),
            }
        }
        if !deficits.is_empty() {
            return Err(Error::Infeasible(deficits));
        }
        Ok(Decoder {
            region,
            groups,
            num_blocks: design.blocks().len(),
            types,
            distribution_len: dist_offset,
            location_len: loc_offset,
            reduced,
        })
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn distribution_len(&self) -> usize {
        self.distribution_len
    }

    pub fn location_len(&self) -> usize {
        self.location_len
    }

    pub fn block_count(&self) -> usize {
        self.num_blocks
    }

    pub fn shapes(&self) -> Vec<TypeShape> {
        self.types
            .iter()
            .map(|t| TypeShape {
                block_type: t.block_type,
                columns: t.columns.len(),
                groups: t.groups.len(),
            })
            .collect()
    }

    /// Errors unless `g` has exactly this decoder's gene counts.
    pub fn check_shape(&self, g: &Genotype) -> Result<()> {
        let bad = |msg: String| {
            Err(Error::Validation {
                field: "genotype".into(),
                msg,
            })
        };
        if g.distribution.len() != self.distribution_len {
            return bad(format!(
                "{} distribution genes, expected {}",
                g.distribution.len(),
                self.distribution_len
            ));
        }
        if g.location.len() != self.location_len {
            return bad(format!(
                "{} location genes, expected {}",
                g.location.len(),
                self.location_len
            ));
        }
        self.check_mapping(&g.mapping)
    }

    fn check_mapping(&self, mapping: &[Vec<u32>]) -> Result<()> {
        let bad = |msg: String| {
            Err(Error::Validation {
                field: "genotype.mapping".into(),
                msg,
            })
        };
        if mapping.len() != self.types.len() {
            return bad(format!(
                "{} permutations, expected {}",
                mapping.len(),
                self.types.len()
            ));
        }
        for (perm, t) in mapping.iter().zip(&self.types) {
            if perm.len() != t.groups.len() || !is_permutation(perm) {
                return bad(format!(
                    "{} mapping is not a permutation of 0..{}",
                    t.block_type,
                    t.groups.len()
                ));
            }
        }
        Ok(())
    }

    pub fn decode(&self, g: &Genotype) -> Result<Placement> {
        self.check_shape(g)?;
        let mut placement = Placement::with_capacity(self.num_blocks);
        for (t, perm) in self.types.iter().zip(&g.mapping) {
            let dist = &g.distribution[t.dist_offset..t.dist_offset + t.columns.len()];
            let loc = &g.location[t.loc_offset..t.loc_offset + t.groups.len()];
            let slots = t
                .slots(Split::Genes(dist))
                .or_else(|_| t.slots(Split::Even))
                .or_else(|_| t.slots(Split::ColumnOrder))
                .expect("decoder construction proved a packing exists");
            let anchors = t.anchors(&slots, Some(loc));
            self.assign(&mut placement, t, &anchors, perm);
        }
        Ok(placement)
    }

    /// Decodes the mapping tier alone on the cached even, stacked layout.
    pub fn decode_reduced(&self, mapping: &[Vec<u32>]) -> Result<Placement> {
        self.check_mapping(mapping)?;
        let mut placement = Placement::with_capacity(self.num_blocks);
        for ((t, perm), anchors) in self.types.iter().zip(mapping).zip(&self.reduced) {
            self.assign(&mut placement, t, anchors, perm);
        }
        Ok(placement)
    }

    /// Distribution and location genes that make [`Decoder::decode`] produce
    /// the reduced layout.
    pub fn reduced_genes(&self, mapping: &[Vec<u32>]) -> Genotype {
        Genotype {
            distribution: vec![0.5; self.distribution_len],
            location: vec![0.0; self.location_len],
            mapping: mapping.to_vec(),
        }
    }

    /// Distribution genes that can change a decoded placement. A type with a
    /// single column, or with one chain length that exactly fills its
    /// columns, has its per-column counts forced.
    pub fn live_distribution_genes(&self) -> Vec<usize> {
        let mut live = Vec::new();
        for t in &self.types {
            let forced = t.columns.len() <= 1
                || (t.classes.len() == 1 && {
                    let len = t.classes[0].len;
                    let cap: u32 = t
                        .columns
                        .iter()
                        .flat_map(|c| &c.runs)
                        .map(|r| r.len / len)
                        .sum();
                    cap as usize == t.groups.len()
                });
            if !forced {
                live.extend(t.dist_offset..t.dist_offset + t.columns.len());
            }
        }
        live
    }

    /// Chain-length class of every mapping entry, per type. Swapping two
    /// entries of different classes never changes the placement.
    pub fn mapping_classes(&self) -> Vec<Vec<u32>> {
        self.types
            .iter()
            .map(|t| t.class_of.iter().map(|&k| k as u32).collect())
            .collect()
    }

    pub fn identity_mapping(&self) -> Vec<Vec<u32>> {
        self.types
            .iter()
            .map(|t| (0..t.groups.len() as u32).collect())
            .collect()
    }

    fn assign(&self, placement: &mut Placement, t: &TypeLayout, anchors: &[Anchor], perm: &[u32]) {
        // the k-th slot of a class takes the k-th group of that class in
        // permutation order
        let mut queues: Vec<Vec<u32>> = vec![Vec::new(); t.classes.len()];
        for &local in perm {
            queues[t.class_of[local as usize]].push(local);
        }
        let mut next = vec![0usize; t.classes.len()];
        for a in anchors {
            let local = queues[a.class][next[a.class]];
            next[a.class] += 1;
            let group = &self.groups[t.groups[local as usize]];
            for (j, &block) in group.members.iter().enumerate() {
                placement.assign(
                    block,
                    Site {
                        block_type: t.block_type,
                        x: a.x,
                        y: a.y + j as u32 * t.stride,
                    },
                );
            }
        }
    }
}

impl TypeLayout {
    /// Column and run of every group slot, classes in order. `Err` carries
    /// how many groups did fit.
    fn slots(&self, split: Split<'_>) -> Result<Vec<Slot>, usize> {
        let mut free: Vec<Vec<u32>> = self
            .columns
            .iter()
            .map(|c| c.runs.iter().map(|r| r.len).collect())
            .collect();
        let mut slots = Vec::with_capacity(self.groups.len());
        for (k, class) in self.classes.iter().enumerate() {
            let need = class.members.len() as u32;
            let caps: Vec<u32> = free
                .iter()
                .map(|runs| runs.iter().map(|f| f / class.len).sum())
                .collect();
            let total: u32 = caps.iter().sum();
            if total < need {
                return Err(slots.len() + total as usize);
            }
            let counts = match split {
                Split::Genes(genes) => legalize_distribution(genes, need, &caps),
                Split::Even => legalize_distribution(&vec![1.0; caps.len()], need, &caps),
                Split::ColumnOrder => {
                    let mut left = need;
                    caps.iter()
                        .map(|&c| {
                            let take = c.min(left);
                            left -= take;
                            take
                        })
                        .collect()
                }
            };
            for (c, &count) in counts.iter().enumerate() {
                let runs = &self.columns[c].runs;
                for _ in 0..count {
                    // lowest free anchor, ties to the earlier run
                    let r = (0..runs.len())
                        .filter(|&r| free[c][r] >= class.len)
                        .min_by_key(|&r| {
                            (runs[r].start + (runs[r].len - free[c][r]) * self.stride, r)
                        })
                        .expect("count within column capacity");
                    free[c][r] -= class.len;
                    slots.push(Slot {
                        column: c,
                        run: r,
                        class: k,
                        len: class.len,
                    });
                }
            }
        }
        Ok(slots)
    }

    /// Places the slots of every run: order by location gene (ties by slot
    /// index), then lift each slot into the run's slack by its gene.
    fn anchors(&self, slots: &[Slot], genes: Option<&[f64]>) -> Vec<Anchor> {
        let gene = |i: usize| match genes {
            Some(g) if g[i].is_finite() => g[i].clamp(0.0, 1.0),
            _ => 0.0,
        };
        let mut out = vec![
            Anchor {
                x: 0,
                y: 0,
                class: 0
            };
            slots.len()
        ];
        let mut by_run: Vec<Vec<Vec<usize>>> = self
            .columns
            .iter()
            .map(|c| vec![Vec::new(); c.runs.len()])
            .collect();
        for (i, s) in slots.iter().enumerate() {
            by_run[s.column][s.run].push(i);
        }
        for (c, runs) in by_run.iter_mut().enumerate() {
            let column = &self.columns[c];
            for (r, members) in runs.iter_mut().enumerate() {
                if members.is_empty() {
                    continue;
                }
                let run = column.runs[r];
                members.sort_by(|&a, &b| gene(a).total_cmp(&gene(b)).then(a.cmp(&b)));
                let used: u32 = members.iter().map(|&i| slots[i].len).sum();
                let slack = run.len - used;
                let mut prefix = 0;
                for &i in members.iter() {
                    let lift = ((gene(i) * (slack + 1) as f64).floor() as u32).min(slack);
                    out[i] = Anchor {
                        x: column.x,
                        y: run.start + (prefix + lift) * self.stride,
                        class: slots[i].class,
                    };
                    prefix += slots[i].len;
                }
            }
        }
        out
    }
}
