//! End-to-end flow: pick a repeating rectangle, optimize it, copy it over
//! the chip and register the long wires.

mod pipeline;
mod rectangle;
mod replicate;
mod transfer;

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::design::{replicate_netlist, DesignSpec, UnitSpec};
use crate::device::{Device, Region};
use crate::error::{Error, Result};
use crate::genotype::{Decoder, Genotype};
use crate::objective::{check_constraints, evaluate, ObjectiveValues};
use crate::optimizers::{run_seeded, OptimizerConfig, Problem, RunResult};
use crate::placement::{placement_to_json, Placement};
use crate::svg::floorplan_svg;

pub use pipeline::{pipeline_nets, NetStages, PipelineConfig, PipelineReport};
pub use rectangle::{select_repeating_rectangle, RectanglePlan, TypeUtilization};
pub use replicate::{replicate_placement, replicate_to_slr};
pub use transfer::{seeded_population, transfer_place, SeedSource};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub optimizer: OptimizerConfig,
    pub pipeline: PipelineConfig,
    /// Pipeline reports cover depths `0..=max_depth`.
    pub max_depth: u32,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            optimizer: OptimizerConfig::default(),
            pipeline: PipelineConfig::default(),
            max_depth: 4,
        }
    }
}

/// Everything one flow run produces.
#[derive(Clone, Debug)]
pub struct FlowBundle {
    pub device: Device,
    pub unit: UnitSpec,
    pub plan: RectanglePlan,
    pub rect_design: DesignSpec,
    pub result: RunResult,
    pub rect_placement: Placement,
    pub chip_design: DesignSpec,
    pub chip_placement: Placement,
    pub chip_values: ObjectiveValues,
    pub pipeline_config: PipelineConfig,
    /// Reports for the first SLR, one per depth.
    pub pipeline: Vec<PipelineReport>,
    pub log: Vec<String>,
}

/// Summary written next to the placement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSummary {
    pub device: String,
    pub algorithm: String,
    pub plan: RectanglePlan,
    pub replicas: u32,
    pub evaluations: u64,
    pub evaluations_to_target: Option<u64>,
    pub rect_values: ObjectiveValues,
    pub chip_values: ObjectiveValues,
}

pub fn optimize_rectangle(
    device: &Device,
    design: &DesignSpec,
    region: Region,
    config: &OptimizerConfig,
    seeds: &[Genotype],
) -> Result<(RunResult, Placement)> {
    let decoder = Decoder::new(device, design, region)?;
    let problem = Problem {
        decoder: &decoder,
        design,
        device,
    };
    let result = run_seeded(&problem, config, seeds)?;
    let placement = decoder.decode(&result.best)?;
    Ok((result, placement))
}

pub fn run_flow(device: &Device, unit: &UnitSpec, config: &FlowConfig) -> Result<FlowBundle> {
    run_flow_seeded(device, unit, config, &[])
}

/// [`run_flow`] with the rectangle search started from `seeds`.
pub fn run_flow_seeded(
    device: &Device,
    unit: &UnitSpec,
    config: &FlowConfig,
    seeds: &[Genotype],
) -> Result<FlowBundle> {
    let mut log = Vec::new();
    device.validate().map_err(|e| e.in_step("load"))?;
    config
        .pipeline
        .validate()
        .map_err(|e| e.in_step("pipeline"))?;
    config
        .optimizer
        .validate()
        .map_err(|e| e.in_step("optimize"))?;

    let plan =
        select_repeating_rectangle(device, unit).map_err(|e| e.in_step("select_rectangle"))?;
    let mut line = format!(
        "select_rectangle: height {} rows, {} units per rectangle, utilization",
        plan.region_height, plan.units_per_rect
    );
    for u in &plan.utilization {
        write!(line, " {} {:.3}", u.block_type, u.fraction()).unwrap();
    }
    log.push(line);

    let rect_design =
        replicate_netlist(unit, plan.units_per_rect).map_err(|e| e.in_step("replicate_netlist"))?;
    log.push(format!(
        "replicate_netlist: {} blocks, {} connections",
        rect_design.blocks().len(),
        rect_design.connections().len()
    ));

    let (result, rect_placement) = optimize_rectangle(
        device,
        &rect_design,
        plan.region(),
        &config.optimizer,
        seeds,
    )
    .map_err(|e| e.in_step("optimize"))?;
    log.push(format!(
        "optimize: {} seed {}, {} evaluations, wl2 {} bbox {} scalar {}",
        result.algorithm,
        config.optimizer.rng_seed,
        result.evaluations,
        result.best_values.wl2,
        result.best_values.max_bbox,
        result.best_scalar
    ));

    let per_slr = plan.rects_per_slr(device);
    let slr_design = replicate_netlist(unit, plan.units_per_rect * per_slr)
        .map_err(|e| e.in_step("replicate_slr"))?;
    let slr_placement =
        replicate_to_slr(&rect_placement, &plan, device).map_err(|e| e.in_step("replicate_slr"))?;
    log.push(format!("replicate_slr: {per_slr} rectangles"));

    let mut reports = Vec::new();
    for depth in 0..=config.max_depth {
        let r = pipeline_nets(&slr_placement, &slr_design, depth, &config.pipeline)
            .map_err(|e| e.in_step("pipeline"))?;
        log.push(format!(
            "pipeline: depth {depth}, {} registers, {:.1} proxy-MHz",
            r.registers, r.proxy_mhz
        ));
        reports.push(r);
    }

    let replicas = plan.replicas(device);
    let chip_design = replicate_netlist(unit, plan.units_per_rect * replicas)
        .map_err(|e| e.in_step("replicate_chip"))?;
    let chip_placement = replicate_placement(&rect_placement, &plan, device)
        .map_err(|e| e.in_step("replicate_chip"))?;
    let report = check_constraints(
        &chip_placement,
        &chip_design,
        device,
        Region::new(0, device.ymax),
    );
    if let Some(v) = report.violations.first() {
        return Err(
            Error::Overflow(format!("replicated placement is illegal: {v}"))
                .in_step("replicate_chip"),
        );
    }
    let chip_values =
        evaluate(&chip_placement, &chip_design).map_err(|e| e.in_step("replicate_chip"))?;
    log.push(format!(
        "replicate_chip: {replicas} rectangles, {} blocks, wl2 {} bbox {}",
        chip_design.blocks().len(),
        chip_values.wl2,
        chip_values.max_bbox
    ));

    Ok(FlowBundle {
        device: device.clone(),
        unit: unit.clone(),
        plan,
        rect_design,
        result,
        rect_placement,
        chip_design,
        chip_placement,
        chip_values,
        pipeline_config: config.pipeline,
        pipeline: reports,
        log,
    })
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

impl FlowBundle {
    pub fn summary(&self) -> FlowSummary {
        FlowSummary {
            device: self.device.name.clone(),
            algorithm: self.result.algorithm.to_string(),
            plan: self.plan.clone(),
            replicas: self.plan.replicas(&self.device),
            evaluations: self.result.evaluations,
            evaluations_to_target: self.result.evaluations_to_target,
            rect_values: self.result.best_values,
            chip_values: self.chip_values,
        }
    }

    /// Writes the bundle files into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_file(
            dir,
            "placement.json",
            &placement_to_json(&self.chip_placement, Some(&self.chip_design)),
        )?;
        write_file(
            dir,
            "rect_placement.json",
            &placement_to_json(&self.rect_placement, Some(&self.rect_design)),
        )?;
        write_file(dir, "trace.csv", &self.result.trace.to_csv())?;
        write_file(
            dir,
            "pipeline.json",
            &to_json(&serde_json::json!({
                "frequency_unit": "proxy-MHz",
                "config": self.pipeline_config,
                "reports": self.pipeline,
            })),
        )?;
        let records = self.chip_placement.records(Some(&self.chip_design));
        write_file(
            dir,
            "floorplan.svg",
            &floorplan_svg(&self.device, &records, None),
        )?;
        write_file(dir, "flow.log", &(self.log.join("\n") + "\n"))?;
        write_file(dir, "genotype.json", &to_json(&self.result.best))?;
        write_file(dir, "device.json", &self.device.to_json())?;
        write_file(dir, "unit.json", &self.unit.design().to_json())?;
        write_file(dir, "summary.json", &to_json(&self.summary()))?;
        if let Some(front) = &self.result.front {
            write_file(dir, "front.json", &front.to_json())?;
        }
        Ok(())
    }
}
