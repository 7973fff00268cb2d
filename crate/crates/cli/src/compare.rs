use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use rapidplace::error::{Error, Result};
use rapidplace::flow::{optimize_rectangle, select_repeating_rectangle};
use rapidplace::optimizers::Algorithm;
use rapidplace::replicate_netlist;
use serde::Serialize;

use crate::inputs::{load_device, load_unit, write_text, BUILTIN_CONV};
use crate::manifest::RunManifest;
use crate::OptimizerArgs;

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(long)]
    device: String,
    #[arg(long, default_value = BUILTIN_CONV)]
    design: String,
    /// Comma-separated algorithms.
    #[arg(long, value_delimiter = ',', default_value = "nsga2,sa,cmaes")]
    algos: Vec<Algorithm>,
    /// Seeds per algorithm, counting up from `--seed`.
    #[arg(long, default_value_t = 5)]
    runs: u64,
    /// Summarize only the best `k` runs of each algorithm by scalar.
    #[arg(long)]
    top: Option<usize>,
    #[command(flatten)]
    opt: OptimizerArgs,
    /// Directory for runs.csv, compare.csv and compare.txt.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRow {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub wl2: f64,
    pub bbox: u32,
    pub scalar: f64,
    pub evaluations: u64,
    pub millis: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub algorithm: Algorithm,
    pub runs: usize,
    pub mean_wl2: f64,
    pub min_wl2: f64,
    pub mean_bbox: f64,
    pub min_bbox: u32,
    pub mean_scalar: f64,
    pub min_scalar: f64,
    pub mean_evaluations: f64,
    pub mean_millis: f64,
}

/// Per-algorithm statistics over the best `top` rows (all when `None`).
/// Rows come out ordered by algorithm, as given.
pub fn summarize(rows: &[RunRow], algos: &[Algorithm], top: Option<usize>) -> Vec<Summary> {
    algos
        .iter()
        .filter_map(|&a| {
            let mut mine: Vec<&RunRow> = rows.iter().filter(|r| r.algorithm == a).collect();
            mine.sort_by(|x, y| x.scalar.total_cmp(&y.scalar).then(x.seed.cmp(&y.seed)));
            mine.truncate(top.unwrap_or(mine.len()));
            if mine.is_empty() {
                return None;
            }
            let n = mine.len() as f64;
            let mean = |f: &dyn Fn(&RunRow) -> f64| mine.iter().map(|r| f(r)).sum::<f64>() / n;
            Some(Summary {
                algorithm: a,
                runs: mine.len(),
                mean_wl2: mean(&|r| r.wl2),
                min_wl2: mine.iter().map(|r| r.wl2).fold(f64::INFINITY, f64::min),
                mean_bbox: mean(&|r| r.bbox as f64),
                min_bbox: mine.iter().map(|r| r.bbox).min().unwrap_or(0),
                mean_scalar: mean(&|r| r.scalar),
                min_scalar: mine.iter().map(|r| r.scalar).fold(f64::INFINITY, f64::min),
                mean_evaluations: mean(&|r| r.evaluations as f64),
                mean_millis: mean(&|r| r.millis as f64),
            })
        })
        .collect()
}

pub fn runs_csv(rows: &[RunRow]) -> String {
    let mut out = String::from("algorithm,seed,wl2,bbox,scalar,evaluations,millis\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.algorithm, r.seed, r.wl2, r.bbox, r.scalar, r.evaluations, r.millis
        )
        .unwrap();
    }
    out
}

pub fn summary_csv(rows: &[Summary]) -> String {
    let mut out = String::from(
        "algorithm,runs,mean_wl2,min_wl2,mean_bbox,min_bbox,mean_scalar,min_scalar,mean_evaluations,mean_millis\n",
    );
    for s in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            s.algorithm,
            s.runs,
            s.mean_wl2,
            s.min_wl2,
            s.mean_bbox,
            s.min_bbox,
            s.mean_scalar,
            s.min_scalar,
            s.mean_evaluations,
            s.mean_millis
        )
        .unwrap();
    }
    out
}

pub fn summary_text(rows: &[Summary]) -> String {
    let header = [
        "algorithm",
        "runs",
        "mean wl2",
        "min wl2",
        "mean bbox",
        "min bbox",
        "mean scalar",
        "min scalar",
        "mean evals",
        "mean ms",
    ];
    let cells: Vec<[String; 10]> = rows
        .iter()
        .map(|s| {
            [
                s.algorithm.to_string(),
                s.runs.to_string(),
                format!("{:.4e}", s.mean_wl2),
                format!("{:.4e}", s.min_wl2),
                format!("{:.1}", s.mean_bbox),
                s.min_bbox.to_string(),
                format!("{:.4e}", s.mean_scalar),
                format!("{:.4e}", s.min_scalar),
                format!("{:.0}", s.mean_evaluations),
                format!("{:.0}", s.mean_millis),
            ]
        })
        .collect();
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &cells {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, row: &[&str]| {
        let mut parts = Vec::with_capacity(row.len());
        for (i, c) in row.iter().enumerate() {
            if i == 0 {
                parts.push(format!("{c:<w$}", w = width[i]));
            } else {
                parts.push(format!("{c:>w$}", w = width[i]));
            }
        }
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(&mut out, &header);
    for row in &cells {
        let refs: Vec<&str> = row.iter().map(String::as_str).collect();
        line(&mut out, &refs);
    }
    out
}

pub fn compare(args: &CompareArgs) -> Result<()> {
    if args.runs == 0 {
        return Err(Error::Config("--runs must be at least 1".into()));
    }
    if args.top == Some(0) {
        return Err(Error::Config("--top must be at least 1".into()));
    }
    let mut inputs = Vec::new();
    let (device, h) = load_device(&args.device, "device")?;
    inputs.push(h);
    let (unit, h) = load_unit(&args.design, "design")?;
    inputs.push(h);
    let base = args.opt.effective(&mut inputs)?;
    let plan = select_repeating_rectangle(&device, &unit)?;
    let design = replicate_netlist(&unit, plan.units_per_rect)?;

    let mut algos = args.algos.clone();
    algos.sort_by_key(|a| a.name());
    algos.dedup();
    let seeds: Vec<u64> = (0..args.runs).map(|i| base.rng_seed + i).collect();
    let mut rows = Vec::new();
    for &algorithm in &algos {
        for &seed in &seeds {
            let mut cfg = base.clone();
            cfg.algorithm = algorithm;
            cfg.rng_seed = seed;
            let start = Instant::now();
            let (r, _) = optimize_rectangle(&device, &design, plan.region(), &cfg, &[])?;
            rows.push(RunRow {
                algorithm,
                seed,
                wl2: r.best_values.wl2,
                bbox: r.best_values.max_bbox,
                scalar: r.best_scalar,
                evaluations: r.evaluations,
                millis: start.elapsed().as_millis() as u64,
            });
        }
    }

    let summary = summarize(&rows, &algos, args.top);
    let text = summary_text(&summary);
    print!("{text}");
    if let Some(dir) = &args.out {
        write_text(&dir.join("runs.csv"), &runs_csv(&rows))?;
        write_text(&dir.join("compare.csv"), &summary_csv(&summary))?;
        write_text(&dir.join("compare.txt"), &text)?;
        let manifest = RunManifest::new(
            "compare",
            serde_json::json!({ "optimizer": base, "algorithms": algos, "top": args.top }),
            seeds,
            inputs,
        );
        write_text(&dir.join("manifest.json"), &manifest.to_json())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(algorithm: Algorithm, seed: u64, scalar: f64) -> RunRow {
        RunRow {
            algorithm,
            seed,
            wl2: scalar,
            bbox: 1,
            scalar,
            evaluations: 10,
            millis: 0,
        }
    }

    #[test]
    fn top_k_keeps_the_best_runs() {
        let rows: Vec<RunRow> = [5.0, 1.0, 4.0, 2.0, 3.0]
            .iter()
            .enumerate()
            .map(|(i, &s)| row(Algorithm::Sa, i as u64, s))
            .collect();
        let all = summarize(&rows, &[Algorithm::Sa], None);
        assert_eq!(all[0].runs, 5);
        assert_eq!(all[0].mean_scalar, 3.0);
        let top = summarize(&rows, &[Algorithm::Sa], Some(3));
        assert_eq!(top[0].runs, 3);
        assert_eq!(top[0].mean_scalar, 2.0);
        assert_eq!(top[0].min_scalar, 1.0);
    }

    #[test]
    fn text_table_has_header_and_one_line_per_algorithm() {
        let rows = vec![row(Algorithm::Cmaes, 0, 2.0), row(Algorithm::Sa, 0, 1.0)];
        let t = summary_text(&summarize(&rows, &[Algorithm::Cmaes, Algorithm::Sa], None));
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("algorithm"));
        assert!(lines[1].starts_with("cmaes"));
    }
}
