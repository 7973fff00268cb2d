use crate::device::{Device, Site};
use crate::error::{Error, Result};
use crate::placement::Placement;

use super::RectanglePlan;

fn copies(rect: &Placement, plan: &RectanglePlan, device: &Device, slrs: u32) -> Result<Placement> {
    let h = plan.region_height;
    let slr = device.slr_height();
    if h == 0 || !slr.is_multiple_of(h) || !device.ymax.is_multiple_of(device.slr_count) {
        return Err(Error::Overflow(format!(
            "{} rows per SLR is not a multiple of the {h}-row rectangle",
            slr
        )));
    }
    if let Some((id, s)) = rect.iter().find(|(_, s)| s.y >= h) {
        return Err(Error::validation(
            "placement",
            format!(
                "block {id} at row {} lies outside the {h}-row rectangle",
                s.y
            ),
        ));
    }
    let stride = rect.len() as u32;
    let per_slr = slr / h;
    let mut out = Placement::with_capacity((stride * per_slr * slrs) as usize);
    for k in 0..per_slr * slrs {
        let dy = (k / per_slr) * slr + (k % per_slr) * h;
        for (id, s) in rect.iter() {
            let site = Site { y: s.y + dy, ..s };
            if !device.is_site(site.block_type, site.x, site.y) {
                return Err(Error::Overflow(format!(
                    "copy {k} of block {id} lands on ({}, {}), which is not a {} site",
                    site.x, site.y, site.block_type
                )));
            }
            out.assign(k * stride + id, site);
        }
    }
    Ok(out)
}

/// Copies a rectangle placement over every rectangle of the first SLR.
pub fn replicate_to_slr(
    rect: &Placement,
    plan: &RectanglePlan,
    device: &Device,
) -> Result<Placement> {
    copies(rect, plan, device, 1)
}

/// Copies a rectangle placement over the whole chip. Copy `k` sits `k`
/// rectangles up (SLR by SLR) and its block ids are shifted by `k` times
/// the rectangle's block count, matching a replicated netlist.
pub fn replicate_placement(
    rect: &Placement,
    plan: &RectanglePlan,
    device: &Device,
) -> Result<Placement> {
    copies(rect, plan, device, device.slr_count)
}
