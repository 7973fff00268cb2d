use serde::{Deserialize, Serialize};

use crate::design::DesignSpec;
use crate::error::{Error, Result};
use crate::placement::Placement;

/// Constants of the frequency proxy `f_base / (1 + slope * span)`, where
/// `span` is the longest wire segment left between pipeline registers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Grid units one register stage covers.
    pub reach: u32,
    pub f_base_mhz: f64,
    pub slope: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            reach: 16,
            f_base_mhz: 800.0,
            slope: 0.01,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reach == 0 {
            return Err(Error::Config("pipeline reach must be positive".into()));
        }
        if !(self.f_base_mhz > 0.0 && self.f_base_mhz.is_finite()) {
            return Err(Error::Config(format!(
                "f_base_mhz must be positive, got {}",
                self.f_base_mhz
            )));
        }
        if !(self.slope >= 0.0 && self.slope.is_finite()) {
            return Err(Error::Config(format!(
                "slope must be non-negative, got {}",
                self.slope
            )));
        }
        Ok(())
    }

    pub fn frequency(&self, span: f64) -> f64 {
        self.f_base_mhz / (1.0 + self.slope * span)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetStages {
    pub src: u32,
    pub dst: u32,
    pub length: u32,
    pub weight: u32,
    pub stages: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub depth: u32,
    pub reach: u32,
    pub registers: u64,
    /// Longest register-to-register segment, in grid units.
    pub worst_span: f64,
    pub proxy_mhz: f64,
    /// Non-cascade connections in design order.
    pub nets: Vec<NetStages>,
}

/// Registers long non-cascade wires: a net of length `L` gets
/// `min(depth, ceil(L / reach))` stages. Cascades are dedicated wires and
/// stay unregistered.
pub fn pipeline_nets(
    placement: &Placement,
    design: &DesignSpec,
    depth: u32,
    config: &PipelineConfig,
) -> Result<PipelineReport> {
    config.validate()?;
    let mut nets = Vec::new();
    let mut registers = 0u64;
    let mut worst_span = 0.0f64;
    for c in design.connections() {
        if design.is_cascade(c) {
            continue;
        }
        let a = placement
            .site(c.src)
            .ok_or(Error::MissingAssignment(c.src))?;
        let b = placement
            .site(c.dst)
            .ok_or(Error::MissingAssignment(c.dst))?;
        let length = a.x.abs_diff(b.x) + a.y.abs_diff(b.y);
        let stages = depth.min(length.div_ceil(config.reach));
        registers += stages as u64 * c.weight as u64;
        worst_span = worst_span.max(length as f64 / (stages + 1) as f64);
        nets.push(NetStages {
            src: c.src,
            dst: c.dst,
            length,
            weight: c.weight,
            stages,
        });
    }
    Ok(PipelineReport {
        depth,
        reach: config.reach,
        registers,
        worst_span,
        proxy_mhz: config.frequency(worst_span),
        nets,
    })
}
