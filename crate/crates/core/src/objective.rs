//! Placement objectives and the legality checker.
//!
//! Two objectives are minimized: the squared weighted Manhattan wirelength
//! summed over connections, and the largest unit bounding box measured as
//! width + height. Single-objective optimizers minimize their product.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::design::DesignSpec;
use crate::device::{Device, Region, Site};
use crate::error::{Error, Result};
use crate::placement::Placement;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValues {
    pub wl2: f64,
    pub max_bbox: u32,
    /// Always `wl2 * max_bbox`.
    pub scalar: f64,
}

impl ObjectiveValues {
    pub fn new(wl2: f64, max_bbox: u32) -> Self {
        ObjectiveValues {
            wl2,
            max_bbox,
            scalar: wl2 * max_bbox as f64,
        }
    }

    /// Pair used for dominance comparisons.
    pub fn pair(&self) -> [f64; 2] {
        [self.wl2, self.max_bbox as f64]
    }
}

/// Single-objective value. A zero bounding box (every unit on one site)
/// would zero the product regardless of wirelength, so it falls back to wl2.
pub fn scalarize(values: &ObjectiveValues) -> f64 {
    if values.max_bbox == 0 {
        values.wl2
    } else {
        values.wl2 * values.max_bbox as f64
    }
}

fn manhattan(a: Site, b: Site) -> u64 {
    (a.x.abs_diff(b.x) + a.y.abs_diff(b.y)) as u64
}

pub fn wirelength_squared(placement: &Placement, design: &DesignSpec) -> Result<f64> {
    let mut total: u64 = 0;
    for c in design.connections() {
        let a = placement
            .site(c.src)
            .ok_or(Error::MissingAssignment(c.src))?;
        let b = placement
            .site(c.dst)
            .ok_or(Error::MissingAssignment(c.dst))?;
        let len = manhattan(a, b) * c.weight as u64;
        total += len * len;
    }
    Ok(total as f64)
}

pub fn max_bbox(placement: &Placement, design: &DesignSpec) -> Result<u32> {
    let n = design.num_units() as usize;
    // (min_x, max_x, min_y, max_y) per unit
    let mut boxes = vec![(u32::MAX, 0u32, u32::MAX, 0u32); n];
    for b in design.blocks() {
        let s = placement.site(b.id).ok_or(Error::MissingAssignment(b.id))?;
        let bx = &mut boxes[b.unit as usize];
        bx.0 = bx.0.min(s.x);
        bx.1 = bx.1.max(s.x);
        bx.2 = bx.2.min(s.y);
        bx.3 = bx.3.max(s.y);
    }
    Ok(boxes
        .iter()
        .filter(|b| b.0 != u32::MAX)
        .map(|b| (b.1 - b.0) + (b.3 - b.2))
        .max()
        .unwrap_or(0))
}

pub fn evaluate(placement: &Placement, design: &DesignSpec) -> Result<ObjectiveValues> {
    Ok(ObjectiveValues::new(
        wirelength_squared(placement, design)?,
        max_bbox(placement, design)?,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationClass {
    Region,
    Exclusivity,
    Cascade,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub class: ViolationClass,
    pub blocks: Vec<u32>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} {:?}: {}", self.class, self.blocks, self.detail)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub violations: Vec<Violation>,
}

impl ConstraintReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, class: ViolationClass) -> usize {
        self.violations.iter().filter(|v| v.class == class).count()
    }
}

/// Checks region, exclusivity and cascade constraints, reporting every
/// violation found.
pub fn check_constraints(
    placement: &Placement,
    design: &DesignSpec,
    device: &Device,
    region: Region,
) -> ConstraintReport {
    let mut violations = Vec::new();
    let mut by_site: HashMap<(u32, u32), Vec<u32>> = HashMap::new();

    for b in design.blocks() {
        let Some(s) = placement.site(b.id) else {
            violations.push(Violation {
                class: ViolationClass::Region,
                blocks: vec![b.id],
                detail: "block is unassigned".into(),
            });
            continue;
        };
        if s.block_type != b.block_type {
            violations.push(Violation {
                class: ViolationClass::Region,
                blocks: vec![b.id],
                detail: format!("{} block on a {} site", b.block_type, s.block_type),
            });
        } else if !device.is_site(s.block_type, s.x, s.y) {
            violations.push(Violation {
                class: ViolationClass::Region,
                blocks: vec![b.id],
                detail: format!("({},{}) is not a {} site", s.x, s.y, s.block_type),
            });
        } else if !region.contains_row(s.y) {
            violations.push(Violation {
                class: ViolationClass::Region,
                blocks: vec![b.id],
                detail: format!(
                    "row {} outside region rows [{}, {})",
                    s.y,
                    region.start,
                    region.end()
                ),
            });
        }
        by_site.entry((s.x, s.y)).or_default().push(b.id);
    }

    let mut shared: Vec<_> = by_site.into_iter().filter(|(_, v)| v.len() > 1).collect();
    shared.sort();
    for ((x, y), blocks) in shared {
        violations.push(Violation {
            class: ViolationClass::Exclusivity,
            blocks,
            detail: format!("site ({x},{y}) holds more than one block"),
        });
    }

    for ch in design.chains() {
        let stride = ch.block_type.cascade_stride();
        for w in ch.members.windows(2) {
            let (Some(prev), Some(next)) = (placement.site(w[0]), placement.site(w[1])) else {
                continue;
            };
            if next.x != prev.x || next.y != prev.y + stride {
                violations.push(Violation {
                    class: ViolationClass::Cascade,
                    blocks: vec![w[0], w[1]],
                    detail: format!(
                        "{} at ({},{}) must sit at ({},{})",
                        w[1],
                        next.x,
                        next.y,
                        prev.x,
                        prev.y + stride
                    ),
                });
            }
        }
    }

    ConstraintReport { violations }
}
