use serde::{Deserialize, Serialize};

use crate::design::{replicate_netlist, UnitSpec};
use crate::device::{BlockType, Device, Region};
use crate::error::{Error, Result};
use crate::genotype::Decoder;

/// How much of one block type a rectangle uses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeUtilization {
    pub block_type: BlockType,
    pub used: u32,
    pub available: u32,
}

impl TypeUtilization {
    pub fn fraction(&self) -> f64 {
        self.used as f64 / self.available as f64
    }
}

/// A row slice of one SLR that is optimized once and copied over the chip.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectanglePlan {
    pub region_height: u32,
    pub units_per_rect: u32,
    /// One entry per block type the unit uses, in [`BlockType::ALL`] order.
    pub utilization: Vec<TypeUtilization>,
}

impl RectanglePlan {
    pub fn region(&self) -> Region {
        Region::new(0, self.region_height)
    }

    pub fn utilization_of(&self, block_type: BlockType) -> Option<f64> {
        self.utilization
            .iter()
            .find(|u| u.block_type == block_type)
            .map(TypeUtilization::fraction)
    }

    pub fn min_utilization(&self) -> f64 {
        self.utilization
            .iter()
            .map(TypeUtilization::fraction)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn rects_per_slr(&self, device: &Device) -> u32 {
        device.slr_height() / self.region_height
    }

    /// Rectangles on the whole chip.
    pub fn replicas(&self, device: &Device) -> u32 {
        self.rects_per_slr(device) * device.slr_count
    }
}

/// Units of `unit` that legally pack into rows `region`, or 0.
fn units_fitting(device: &Device, unit: &UnitSpec, region: Region) -> Result<u32> {
    let need = unit.composition();
    let mut bound = u32::MAX;
    for t in BlockType::ALL {
        if need[t.index()] > 0 {
            let have = device.sites_in_rows(t, region).len() as u32;
            bound = bound.min(have / need[t.index()]);
        }
    }
    // site counts ignore cascade packing, so confirm with the decoder
    let mut units = bound;
    while units > 0 {
        let design = replicate_netlist(unit, units)?;
        match Decoder::new(device, &design, region) {
            Ok(_) => break,
            Err(Error::Infeasible(_)) => units -= 1,
            Err(e) => return Err(e),
        }
    }
    Ok(units)
}

/// Every site in rows `0..height` reappears in each copy over the chip, so a
/// rectangle placement stays legal wherever it is copied.
fn tiles_chip(device: &Device, unit: &UnitSpec, height: u32) -> bool {
    let need = unit.composition();
    let copies = device.ymax / height;
    BlockType::ALL
        .into_iter()
        .filter(|t| need[t.index()] > 0)
        .flat_map(|t| device.columns_of(t).map(move |c| (t, c.x)))
        .all(|(t, x)| {
            (0..height)
                .filter(|&y| device.is_site(t, x, y))
                .all(|y| (1..copies).all(|k| device.is_site(t, x, y + k * height)))
        })
}

fn plan_for(device: &Device, unit: &UnitSpec, height: u32, units: u32) -> RectanglePlan {
    let need = unit.composition();
    let region = Region::new(0, height);
    let utilization = BlockType::ALL
        .into_iter()
        .filter(|t| need[t.index()] > 0)
        .map(|t| TypeUtilization {
            block_type: t,
            used: units * need[t.index()],
            available: device.sites_in_rows(t, region).len() as u32,
        })
        .collect();
    RectanglePlan {
        region_height: height,
        units_per_rect: units,
        utilization,
    }
}

/// Halves the SLR until a slice no longer hosts a unit and keeps the slice
/// whose scarcest block type is best used. Ties go to the shorter slice.
pub fn select_repeating_rectangle(device: &Device, unit: &UnitSpec) -> Result<RectanglePlan> {
    let slr = device.slr_height();
    let mut best: Option<RectanglePlan> = None;
    let mut height = slr;
    while height > 0 {
        if !tiles_chip(device, unit, height) {
            log::debug!("rectangle h {height}: site pattern does not repeat");
            if !height.is_multiple_of(2) {
                break;
            }
            height /= 2;
            continue;
        }
        let units = units_fitting(device, unit, Region::new(0, height))?;
        if units == 0 {
            break;
        }
        let plan = plan_for(device, unit, height, units);
        log::debug!(
            "rectangle h {height}: {units} units, min utilization {:.3}",
            plan.min_utilization()
        );
        if best
            .as_ref()
            .is_none_or(|b| plan.min_utilization() >= b.min_utilization())
        {
            best = Some(plan);
        }
        if !height.is_multiple_of(2) {
            break;
        }
        height /= 2;
    }
    best.ok_or_else(|| {
        Error::NoFit(format!(
            "one SLR of {} ({} rows) cannot host a single unit",
            device.name, slr
        ))
    })
}
