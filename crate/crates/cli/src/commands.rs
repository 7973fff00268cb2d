use std::path::{Path, PathBuf};

use clap::Args;
use rapidplace::design::replicate_netlist;
use rapidplace::device::{bundled_device, synth_device, Device, Region, SynthParams};
use rapidplace::error::{Error, Result};
use rapidplace::flow::{
    optimize_rectangle, run_flow, select_repeating_rectangle, transfer_place, FlowConfig,
    FlowSummary, SeedSource,
};
use rapidplace::genotype::Genotype;
use rapidplace::objective::{check_constraints, evaluate as score, scalarize};
use rapidplace::optimizers::{OptimizerConfig, RunResult};
use rapidplace::placement::{load_placement_records, Placement};
use rapidplace::svg::floorplan_svg;
use serde::Serialize;

use crate::inputs::{load_device, load_text, load_unit, parse_json, write_text, BUILTIN_CONV};
use crate::manifest::{InputHash, RunManifest};
use crate::OptimizerArgs;

impl OptimizerArgs {
    /// Defaults, then the config file, then flags.
    pub fn effective(&self, inputs: &mut Vec<InputHash>) -> Result<OptimizerConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let (text, hash) = load_text(path, "config")?;
                inputs.push(hash);
                parse_json(&text, path)?
            }
            None => OptimizerConfig::default(),
        };
        if let Some(a) = self.algo {
            cfg.algorithm = a;
        }
        if let Some(s) = self.seed {
            cfg.rng_seed = s;
        }
        if let Some(n) = self.evals {
            cfg.max_evaluations = n;
        }
        if let Some(n) = self.population {
            cfg.population = n;
        }
        if let Some(s) = self.schedule {
            cfg.schedule = s;
        }
        if self.t0.is_some() {
            cfg.t0 = self.t0;
        }
        if self.beta.is_some() {
            cfg.beta = self.beta;
        }
        if let Some(s) = self.sigma0 {
            cfg.cmaes_sigma0 = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

#[derive(Args, Debug)]
pub struct PlaceArgs {
    /// Device descriptor file or bundled device name.
    #[arg(long)]
    device: String,
    /// Unit design file, or `builtin:conv`.
    #[arg(long, default_value = BUILTIN_CONV)]
    design: String,
    #[command(flatten)]
    opt: OptimizerArgs,
    /// Stop once the scalar objective reaches this value.
    #[arg(long)]
    target: Option<f64>,
    /// Grid units covered by one pipeline stage.
    #[arg(long)]
    reach: Option<u32>,
    /// Deepest pipeline level reported.
    #[arg(long)]
    max_depth: Option<u32>,
    /// Bundle directory.
    #[arg(long)]
    out: PathBuf,
}

pub fn place(args: &PlaceArgs) -> Result<()> {
    let mut inputs = Vec::new();
    let (device, h) = load_device(&args.device, "device")?;
    inputs.push(h);
    let (unit, h) = load_unit(&args.design, "design")?;
    inputs.push(h);
    let mut config = FlowConfig {
        optimizer: args.opt.effective(&mut inputs)?,
        ..FlowConfig::default()
    };
    if args.target.is_some() {
        config.optimizer.target = args.target;
    }
    if let Some(r) = args.reach {
        config.pipeline.reach = r;
    }
    if let Some(d) = args.max_depth {
        config.max_depth = d;
    }

    let bundle = run_flow(&device, &unit, &config)?;
    bundle.write(&args.out)?;
    let manifest = RunManifest::new(
        "place",
        serde_json::to_value(&config).expect("config serializes"),
        vec![config.optimizer.rng_seed],
        inputs,
    );
    write_text(&args.out.join("manifest.json"), &manifest.to_json())?;

    let s = bundle.summary();
    println!(
        "{} on {}: rectangle {} rows x {} units, replicated {}x",
        s.algorithm, s.device, s.plan.region_height, s.plan.units_per_rect, s.replicas
    );
    println!(
        "rectangle wl2 {} bbox {} scalar {} after {} evaluations",
        s.rect_values.wl2, s.rect_values.max_bbox, s.rect_values.scalar, s.evaluations
    );
    for r in &bundle.pipeline {
        println!(
            "depth {}: {} registers, {:.1} proxy-MHz",
            r.depth, r.registers, r.proxy_mhz
        );
    }
    println!("bundle written to {}", args.out.display());
    Ok(())
}

#[derive(Args, Debug)]
pub struct SvgArgs {
    #[arg(long)]
    placement: PathBuf,
    #[arg(long)]
    device: String,
    #[arg(long)]
    out: PathBuf,
    /// Unit whose outline is highlighted.
    #[arg(long)]
    highlight: Option<u32>,
}

pub fn svg(args: &SvgArgs) -> Result<()> {
    let (device, _) = load_device(&args.device, "device")?;
    let records = load_placement_records(&args.placement)?;
    for r in &records {
        if !device.is_site(r.block_type, r.x, r.y) {
            return Err(Error::Validation {
                field: "placement".into(),
                msg: format!(
                    "block {} at ({}, {}) is not a {} site of {}",
                    r.block_id, r.x, r.y, r.block_type, device.name
                ),
            });
        }
    }
    write_text(&args.out, &floorplan_svg(&device, &records, args.highlight))
}

#[derive(Args, Debug)]
pub struct TransferArgs {
    /// Bundle written by `place`.
    #[arg(long)]
    seed_bundle: PathBuf,
    /// Destination device file or bundled name.
    #[arg(long)]
    device: String,
    /// Scalar to reach, or `auto`: the baseline's final scalar with
    /// `--baseline`, otherwise the seed bundle's own scalar.
    #[arg(long, default_value = "auto")]
    target: String,
    /// Also run from scratch and report both evaluation counts.
    #[arg(long)]
    baseline: bool,
    #[command(flatten)]
    opt: OptimizerArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Serialize)]
struct Leg {
    evaluations: u64,
    evaluations_to_target: Option<u64>,
    best_scalar: f64,
}

impl Leg {
    fn of(r: &RunResult, target: f64) -> Self {
        Leg {
            evaluations: r.evaluations,
            evaluations_to_target: r
                .evaluations_to_target
                .or_else(|| r.trace.evaluations_to(target)),
            best_scalar: r.best_scalar,
        }
    }
}

#[derive(Debug, Serialize)]
struct TransferRecord {
    src_device: String,
    dst_device: String,
    algorithm: String,
    target: f64,
    seeded: Leg,
    scratch: Option<Leg>,
    /// Scratch over seeded evaluations-to-target.
    speedup: Option<f64>,
}

fn bundle_file<T: serde::de::DeserializeOwned>(
    dir: &Path,
    name: &str,
    inputs: &mut Vec<InputHash>,
) -> Result<T> {
    let path = dir.join(name);
    let (text, hash) = load_text(&path, name)?;
    inputs.push(hash);
    parse_json(&text, &path)
}

pub fn transfer(args: &TransferArgs) -> Result<()> {
    let mut inputs = Vec::new();
    let dir = &args.seed_bundle;
    let genotype: Genotype = bundle_file(dir, "genotype.json", &mut inputs)?;
    let summary: FlowSummary = bundle_file(dir, "summary.json", &mut inputs)?;
    let src_device = {
        let path = dir.join("device.json");
        let (text, hash) = load_text(&path, "seed device")?;
        inputs.push(hash);
        Device::from_json_str(&text, &path.display().to_string())?
    };
    let (unit, h) = load_unit(&dir.join("unit.json").display().to_string(), "unit")?;
    inputs.push(h);
    let (dst_device, h) = load_device(&args.device, "device")?;
    inputs.push(h);
    let mut config = args.opt.effective(&mut inputs)?;

    let src_design = replicate_netlist(&unit, summary.plan.units_per_rect)?;
    let plan = select_repeating_rectangle(&dst_device, &unit)?;
    let dst_design = replicate_netlist(&unit, plan.units_per_rect)?;

    let scratch = if args.baseline {
        let mut cfg = config.clone();
        cfg.target = args.target.parse().ok();
        Some(optimize_rectangle(&dst_device, &dst_design, plan.region(), &cfg, &[])?.0)
    } else {
        None
    };
    let target = match args.target.as_str() {
        "auto" => scratch
            .as_ref()
            .map_or(summary.rect_values.scalar, |r| r.best_scalar),
        t => t.parse().map_err(|_| {
            Error::Config(format!("--target must be a number or `auto`, got `{t}`"))
        })?,
    };
    config.target = Some(target);

    let seed = SeedSource {
        genotype: &genotype,
        device: &src_device,
        design: &src_design,
        region: Region::new(0, summary.plan.region_height),
    };
    let seeded = transfer_place(seed, &dst_device, &dst_design, plan.region(), &config)?;

    let seeded_leg = Leg::of(&seeded, target);
    let scratch_leg = scratch.as_ref().map(|r| Leg::of(r, target));
    let speedup = match (&scratch_leg, seeded_leg.evaluations_to_target) {
        (Some(s), Some(e)) => s.evaluations_to_target.map(|x| x as f64 / e as f64),
        _ => None,
    };
    let record = TransferRecord {
        src_device: src_device.name.clone(),
        dst_device: dst_device.name.clone(),
        algorithm: config.algorithm.to_string(),
        target,
        seeded: seeded_leg,
        scratch: scratch_leg,
        speedup,
    };

    write_text(&args.out.join("transfer.json"), &to_json(&record))?;
    write_text(&args.out.join("trace.csv"), &seeded.trace.to_csv())?;
    write_text(&args.out.join("genotype.json"), &to_json(&seeded.best))?;
    let manifest = RunManifest::new(
        "transfer",
        serde_json::to_value(&config).expect("config serializes"),
        vec![config.rng_seed],
        inputs,
    );
    write_text(&args.out.join("manifest.json"), &manifest.to_json())?;

    println!(
        "{} -> {}: target {}, seeded run reached it after {}",
        record.src_device,
        record.dst_device,
        target,
        record
            .seeded
            .evaluations_to_target
            .map_or("never".to_string(), |e| format!("{e} evaluations"))
    );
    if let Some(s) = &record.scratch {
        println!(
            "scratch run: {}",
            s.evaluations_to_target
                .map_or("never".to_string(), |e| format!("{e} evaluations"))
        );
    }
    if let Some(x) = record.speedup {
        println!("speedup {x:.2}x");
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long)]
    placement: PathBuf,
    #[arg(long)]
    device: String,
    #[arg(long, default_value = BUILTIN_CONV)]
    design: String,
    /// Units in the placed netlist; inferred from the block count if omitted.
    #[arg(long)]
    units: Option<u32>,
    /// First row of the allowed region (default: whole device).
    #[arg(long, default_value_t = 0)]
    region_start: u32,
    #[arg(long)]
    region_rows: Option<u32>,
}

#[derive(Debug, Serialize)]
struct Evaluation {
    wl2: f64,
    max_bbox: u32,
    scalar: f64,
    legal: bool,
    violations: Vec<String>,
}

pub fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let (device, _) = load_device(&args.device, "device")?;
    let (unit, _) = load_unit(&args.design, "design")?;
    let records = load_placement_records(&args.placement)?;
    let placement = Placement::from_records(&records);
    let per_unit = unit.block_count();
    let units = match args.units {
        Some(n) => n,
        None if placement.len().is_multiple_of(per_unit) && !placement.is_empty() => {
            (placement.len() / per_unit) as u32
        }
        None => {
            return Err(Error::Validation {
                field: "units".into(),
                msg: format!(
                "{} placed blocks is not a whole number of {per_unit}-block units; pass --units",
                placement.len()
            ),
            })
        }
    };
    let design = replicate_netlist(&unit, units)?;
    let region = Region::new(
        args.region_start,
        args.region_rows
            .unwrap_or(device.ymax.saturating_sub(args.region_start)),
    );
    let values = score(&placement, &design)?;
    let report = check_constraints(&placement, &design, &device, region);
    let out = Evaluation {
        wl2: values.wl2,
        max_bbox: values.max_bbox,
        scalar: scalarize(&values),
        legal: report.is_ok(),
        violations: report.violations.iter().map(ToString::to_string).collect(),
    };
    print!("{}", to_json(&out));
    Ok(())
}

#[derive(Args, Debug)]
pub struct DeviceGenArgs {
    /// Copy a bundled descriptor instead of synthesizing one.
    #[arg(long)]
    bundled: Option<String>,
    #[arg(long)]
    name: Option<String>,
    #[arg(long, default_value_t = 4)]
    dsp_cols: u32,
    #[arg(long, default_value_t = 2)]
    bram_cols: u32,
    #[arg(long, default_value_t = 1)]
    uram_cols: u32,
    #[arg(long, default_value_t = 96)]
    dsp_sites: u32,
    #[arg(long, default_value_t = 48)]
    bram_sites: u32,
    #[arg(long, default_value_t = 64)]
    uram_sites: u32,
    #[arg(long, default_value_t = 24)]
    region_height: u32,
    #[arg(long, default_value_t = 1)]
    slr_count: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

pub fn device_gen(args: &DeviceGenArgs) -> Result<()> {
    let mut device = match &args.bundled {
        Some(name) => bundled_device(name)?,
        None => {
            let mut sites = [0; 3];
            sites[rapidplace::BlockType::Dsp.index()] = args.dsp_sites;
            sites[rapidplace::BlockType::Bram.index()] = args.bram_sites;
            sites[rapidplace::BlockType::Uram.index()] = args.uram_sites;
            synth_device(&SynthParams {
                dsp_cols: args.dsp_cols,
                bram_cols: args.bram_cols,
                uram_cols: args.uram_cols,
                sites_per_col: sites,
                region_height: args.region_height,
                slr_count: args.slr_count,
                seed: args.seed,
            })?
        }
    };
    if let Some(n) = &args.name {
        device.name = n.clone();
    }
    device.validate()?;
    write_text(&args.out, &device.to_json())?;
    println!(
        "{}: {} columns, {} rows, {} SLR(s)",
        device.name,
        device.columns.len(),
        device.ymax,
        device.slr_count
    );
    Ok(())
}
