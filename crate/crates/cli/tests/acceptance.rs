//! End-to-end acceptance suite. Runs every criterion in order, prints one
//! PASS/FAIL line each and exits non-zero if any fails. Pass criterion
//! numbers as arguments to run a subset.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rapidplace::device::{bundled_device, BUNDLED_DEVICES};
use rapidplace::flow::{
    optimize_rectangle, replicate_placement, run_flow, select_repeating_rectangle, transfer_place,
    FlowConfig, RectanglePlan, SeedSource,
};
use rapidplace::objective::check_constraints;
use rapidplace::optimizers::{
    fast_non_dominated_sort, minimize, run, Algorithm, CmaesParams, CoolingSchedule,
    OptimizerConfig, RunResult,
};
use rapidplace::{
    builtin_conv_unit, evaluate, replicate_netlist, BlockType, Decoder, DesignSpec, Device,
    Placement, Region, Site,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

struct Rect {
    device: Device,
    plan: RectanglePlan,
    design: DesignSpec,
}

fn rect(name: &str) -> Rect {
    let device = bundled_device(name).unwrap();
    let unit = builtin_conv_unit();
    let plan = select_repeating_rectangle(&device, &unit).unwrap();
    let design = replicate_netlist(&unit, plan.units_per_rect).unwrap();
    Rect {
        device,
        plan,
        design,
    }
}

/// Median of a sample; infinities stand for runs that never got there.
fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn evals_to(r: &RunResult, target: f64) -> f64 {
    r.trace
        .evaluations_to(target)
        .map_or(f64::INFINITY, |e| e as f64)
}

/// Brute-force scoring kept apart from the library: every net's weighted
/// Manhattan length squared, and per unit the widest x and y spread over
/// all block pairs.
fn brute_objectives(p: &Placement, design: &DesignSpec) -> (f64, u32) {
    let at = |id: u32| p.site(id).expect("total placement");
    let mut wl2 = 0.0;
    for c in design.connections() {
        let (a, b) = (at(c.src), at(c.dst));
        let len = (a.x as f64 - b.x as f64).abs() + (a.y as f64 - b.y as f64).abs();
        wl2 += (len * c.weight as f64).powi(2);
    }
    let mut units: BTreeMap<u32, Vec<Site>> = BTreeMap::new();
    for b in design.blocks() {
        units.entry(b.unit).or_default().push(at(b.id));
    }
    let mut worst = 0;
    for sites in units.values() {
        let (mut w, mut h) = (0, 0);
        for a in sites {
            for b in sites {
                w = w.max(a.x.abs_diff(b.x));
                h = h.max(a.y.abs_diff(b.y));
            }
        }
        worst = worst.max(w + h);
    }
    (wl2, worst)
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut bad = 0;
    let mut checked = 0;
    for name in ["tiny4", "vu11p-like"] {
        let r = rect(name);
        let dec = Decoder::new(&r.device, &r.design, r.plan.region()).unwrap();
        for _ in 0..1000 {
            let p = dec.decode(&dec.random_genotype(&mut rng)).unwrap();
            let report = check_constraints(&p, &r.design, &r.device, r.plan.region());
            if !p.is_total_for(&r.design) || !report.is_ok() {
                bad += 1;
            }
            checked += 1;
        }
    }
    outcome(
        bad == 0,
        format!("{checked} decodes, {bad} with violations"),
    )
}

fn criterion_2() -> Outcome {
    let device = bundled_device("tiny4").unwrap();
    let design = replicate_netlist(&builtin_conv_unit(), 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let sites: HashMap<BlockType, Vec<Site>> = BlockType::ALL
        .iter()
        .map(|&t| (t, device.sites_of_type(t)))
        .collect();
    let dec = Decoder::new(&device, &design, Region::new(0, device.ymax)).unwrap();
    let mut mismatches = 0;
    for i in 0..100 {
        // half decoded legal placements, half arbitrary site picks
        let p = if i % 2 == 0 {
            dec.decode(&dec.random_genotype(&mut rng)).unwrap()
        } else {
            let mut p = Placement::with_capacity(design.blocks().len());
            for b in design.blocks() {
                let pool = &sites[&b.block_type];
                p.assign(b.id, pool[rng.random_range(0..pool.len())]);
            }
            p
        };
        let v = evaluate(&p, &design).unwrap();
        if (v.wl2, v.max_bbox) != brute_objectives(&p, &design) {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0,
        format!("100 placements, {mismatches} mismatches"),
    )
}

fn brute_fronts(points: &[[f64; 2]]) -> Vec<Vec<usize>> {
    let beats = |a: [f64; 2], b: [f64; 2]| a[0] <= b[0] && a[1] <= b[1] && a != b;
    let mut left: Vec<usize> = (0..points.len()).collect();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let front: Vec<usize> = left
            .iter()
            .copied()
            .filter(|&i| !left.iter().any(|&j| beats(points[j], points[i])))
            .collect();
        left.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut mismatches = 0;
    for set in 0..500 {
        let n = rng.random_range(1..=200);
        // small integer grids force ties and duplicates
        let span = if set % 2 == 0 { 10.0 } else { 1000.0 };
        let points: Vec<[f64; 2]> = (0..n)
            .map(|_| {
                [
                    (rng.random::<f64>() * span).floor(),
                    (rng.random::<f64>() * span).floor(),
                ]
            })
            .collect();
        let mut fast = fast_non_dominated_sort(&points);
        for f in &mut fast {
            f.sort_unstable();
        }
        if fast != brute_fronts(&points) {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0,
        format!("500 sets, {mismatches} mismatches"),
    )
}

/// Sites of `t` in `region` split into cascade ladders: maximal runs of
/// rows `y, y + s, ...` within one column.
fn ladders(device: &Device, t: BlockType, region: Region) -> Vec<(u32, Vec<u32>)> {
    let stride = if t == BlockType::Bram { 2 } else { 1 };
    let mut cols: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for s in device.sites_in_rows(t, region) {
        cols.entry(s.x).or_default().push(s.y);
    }
    let mut out = Vec::new();
    for (x, rows) in cols {
        let mut starts: Vec<u32> = rows
            .iter()
            .copied()
            .filter(|&y| y < stride || !rows.contains(&(y - stride)))
            .collect();
        starts.sort_unstable();
        for y0 in starts {
            let run: Vec<u32> = (0..)
                .map(|k| y0 + k * stride)
                .take_while(|y| rows.contains(y))
                .collect();
            out.push((x, run));
        }
    }
    out
}

/// Orderings of chain lengths (drawn from `counts`) that fill each ladder
/// exactly, as (length, x, rows) slots.
fn tight_layouts(
    ladders: &[(u32, Vec<u32>)],
    counts: &mut BTreeMap<usize, usize>,
) -> Vec<Vec<(usize, u32, Vec<u32>)>> {
    fn fill(
        ladders: &[(u32, Vec<u32>)],
        at: usize,
        offset: usize,
        counts: &mut BTreeMap<usize, usize>,
        slots: &mut Vec<(usize, u32, Vec<u32>)>,
        out: &mut Vec<Vec<(usize, u32, Vec<u32>)>>,
    ) {
        if at == ladders.len() {
            if counts.values().all(|&c| c == 0) {
                out.push(slots.clone());
            }
            return;
        }
        let (x, rows) = &ladders[at];
        if offset == rows.len() {
            fill(ladders, at + 1, 0, counts, slots, out);
            return;
        }
        let lens: Vec<usize> = counts
            .iter()
            .filter(|(_, &c)| c > 0)
            .map(|(&l, _)| l)
            .collect();
        for len in lens {
            if offset + len <= rows.len() {
                *counts.get_mut(&len).unwrap() -= 1;
                slots.push((len, *x, rows[offset..offset + len].to_vec()));
                fill(ladders, at, offset + len, counts, slots, out);
                slots.pop();
                *counts.get_mut(&len).unwrap() += 1;
            }
        }
    }
    let mut out = Vec::new();
    fill(ladders, 0, 0, counts, &mut Vec::new(), &mut out);
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Best scalar over every legal placement, for designs whose chains use
/// every site of their types so that legal packings have no gaps.
fn exhaustive_optimum(device: &Device, design: &DesignSpec, region: Region) -> (f64, usize) {
    let groups = design.groups();
    // per type: every complete (block, site) assignment
    let mut per_type: Vec<Vec<Vec<(u32, Site)>>> = Vec::new();
    for t in design.block_types() {
        let ladders = ladders(device, t, region);
        let mine: Vec<usize> = (0..groups.len())
            .filter(|&g| groups[g].block_type == t)
            .collect();
        let need: usize = mine.iter().map(|&g| groups[g].members.len()).sum();
        let have: usize = ladders.iter().map(|(_, r)| r.len()).sum();
        assert_eq!(need, have, "{t:?} does not fill its sites exactly");
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for &g in &mine {
            *counts.entry(groups[g].members.len()).or_default() += 1;
        }
        let mut options = Vec::new();
        for layout in tight_layouts(&ladders, &mut counts) {
            // groups of one length may trade slots of that length freely
            let mut by_len: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
            for &g in &mine {
                by_len.entry(groups[g].members.len()).or_default().0.push(g);
            }
            for (i, s) in layout.iter().enumerate() {
                by_len.get_mut(&s.0).unwrap().1.push(i);
            }
            let mut partial: Vec<Vec<(u32, Site)>> = vec![Vec::new()];
            for (gs, slot_ids) in by_len.values() {
                let mut next = Vec::new();
                for perm in permutations(gs.len()) {
                    for base in &partial {
                        let mut a = base.clone();
                        for (k, &pi) in perm.iter().enumerate() {
                            let (_, x, rows) = &layout[slot_ids[pi]];
                            for (m, &b) in groups[gs[k]].members.iter().enumerate() {
                                a.push((
                                    b,
                                    Site {
                                        block_type: t,
                                        x: *x,
                                        y: rows[m],
                                    },
                                ));
                            }
                        }
                        next.push(a);
                    }
                }
                partial = next;
            }
            options.extend(partial);
        }
        per_type.push(options);
    }
    let mut best = f64::INFINITY;
    let mut states = 0;
    let mut index = vec![0usize; per_type.len()];
    'outer: loop {
        let mut p = Placement::with_capacity(design.blocks().len());
        for (t, &i) in index.iter().enumerate() {
            for &(b, s) in &per_type[t][i] {
                p.assign(b, s);
            }
        }
        let (wl2, bbox) = brute_objectives(&p, design);
        best = best.min(if bbox == 0 { wl2 } else { wl2 * bbox as f64 });
        states += 1;
        for t in 0..index.len() {
            index[t] += 1;
            if index[t] < per_type[t].len() {
                continue 'outer;
            }
            index[t] = 0;
        }
        break;
    }
    (best, states)
}

fn criterion_4() -> Outcome {
    let r = rect("tiny4");
    let region = r.plan.region();
    let (optimum, states) = exhaustive_optimum(&r.device, &r.design, region);
    let mut hits = Vec::new();
    for algo in [Algorithm::Nsga2, Algorithm::Sa] {
        let mut n = 0;
        for seed in 0..10 {
            let mut cfg = OptimizerConfig::new(algo, 5000, seed);
            cfg.schedule = CoolingSchedule::Hyperbolic;
            if run(&r.device, &r.design, region, &cfg).unwrap().best_scalar <= optimum {
                n += 1;
            }
        }
        hits.push((algo, n));
    }
    let pass = states <= 100_000 && hits.iter().all(|&(_, n)| n >= 8);
    let detail = hits
        .iter()
        .map(|(a, n)| format!("{a} {n}/10"))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(
        pass,
        format!("optimum {optimum} over {states} legal states; {detail}"),
    )
}

fn criterion_5() -> Outcome {
    let sphere = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
    let mut worst: f64 = 0.0;
    let mut max_evals = 0;
    for seed in 0..10 {
        let (_, f, evals) = minimize(
            sphere,
            vec![5.0; 10],
            1.0,
            5000,
            seed,
            CmaesParams::default(),
        );
        worst = worst.max(f);
        max_evals = max_evals.max(evals);
    }
    outcome(
        worst < 1e-9,
        format!("worst best {worst:.2e}, at most {max_evals} evaluations"),
    )
}

struct TimedRun {
    result: RunResult,
    wall: Duration,
}

fn big_runs(algo: Algorithm) -> &'static [TimedRun] {
    static CACHE: OnceLock<std::sync::Mutex<HashMap<Algorithm, &'static [TimedRun]>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(runs) = cache.lock().unwrap().get(&algo) {
        return runs;
    }
    let r = rect("vu11p-like");
    let runs: Vec<TimedRun> = (0..10)
        .map(|seed| {
            let start = Instant::now();
            let result = run(
                &r.device,
                &r.design,
                r.plan.region(),
                &OptimizerConfig::new(algo, 20_000, seed),
            )
            .unwrap();
            TimedRun {
                result,
                wall: start.elapsed(),
            }
        })
        .collect();
    let runs: &'static [TimedRun] = Box::leak(runs.into_boxed_slice());
    cache.lock().unwrap().insert(algo, runs);
    runs
}

fn criterion_6() -> Outcome {
    let scalars = |a| median(big_runs(a).iter().map(|t| t.result.best_scalar).collect());
    let (nsga, sa, cma) = (
        scalars(Algorithm::Nsga2),
        scalars(Algorithm::Sa),
        scalars(Algorithm::Cmaes),
    );
    // paired by seed: CMA-ES evaluations to 1.5x of SA's final scalar against
    // SA's evaluations to that final scalar
    let sa_runs = big_runs(Algorithm::Sa);
    let cma_runs = big_runs(Algorithm::Cmaes);
    let sa_evals = median(
        sa_runs
            .iter()
            .map(|t| evals_to(&t.result, t.result.best_scalar))
            .collect(),
    );
    let cma_evals = median(
        sa_runs
            .iter()
            .zip(cma_runs)
            .map(|(s, c)| evals_to(&c.result, 1.5 * s.result.best_scalar))
            .collect(),
    );
    let ratio = cma_evals / sa_evals;
    outcome(
        nsga <= sa && ratio <= 0.2,
        format!(
            "median scalar nsga2 {nsga:.3e}, sa {sa:.3e}, cmaes {cma:.3e}; cmaes evals to 1.5x sa {cma_evals} vs sa {sa_evals} (ratio {ratio:.2})"
        ),
    )
}

fn criterion_7() -> Outcome {
    let per_eval = |a| {
        median(
            big_runs(a)
                .iter()
                .map(|t| t.wall.as_secs_f64() / t.result.evaluations as f64)
                .collect(),
        )
    };
    let scalar = |a| median(big_runs(a).iter().map(|t| t.result.best_scalar).collect());
    let time_ratio = per_eval(Algorithm::Nsga2Reduced) / per_eval(Algorithm::Nsga2);
    let qor_ratio = scalar(Algorithm::Nsga2Reduced) / scalar(Algorithm::Nsga2);
    outcome(
        time_ratio <= 0.7 && qor_ratio <= 1.4,
        format!("per-evaluation time ratio {time_ratio:.2}, scalar ratio {qor_ratio:.2}"),
    )
}

fn criterion_8() -> Outcome {
    let src = rect("vu3p-like");
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["vu5p-like", "vu7p-like", "vu9p-like"] {
        let dst = rect(name);
        let (mut scratch, mut seeded) = (Vec::new(), Vec::new());
        for seed in 0..10 {
            let cfg = OptimizerConfig::new(Algorithm::Nsga2, 10_000, seed);
            let (from, _) =
                optimize_rectangle(&src.device, &src.design, src.plan.region(), &cfg, &[]).unwrap();
            let (base, _) =
                optimize_rectangle(&dst.device, &dst.design, dst.plan.region(), &cfg, &[]).unwrap();
            let target = base.best_scalar;
            scratch.push(evals_to(&base, target));
            let mut warm = cfg.clone();
            warm.target = Some(target);
            let seed_source = SeedSource {
                genotype: &from.best,
                device: &src.device,
                design: &src.design,
                region: src.plan.region(),
            };
            let t = transfer_place(
                seed_source,
                &dst.device,
                &dst.design,
                dst.plan.region(),
                &warm,
            )
            .unwrap();
            seeded.push(t.evaluations_to_target.map_or(f64::INFINITY, |e| e as f64));
        }
        let (s, w) = (median(scratch), median(seeded));
        pass &= w <= s / 3.0;
        parts.push(format!("{name} {w} vs {s} ({:.2})", w / s));
    }
    outcome(
        pass,
        format!(
            "median evaluations to target, seeded vs scratch: {}",
            parts.join(", ")
        ),
    )
}

fn criterion_9() -> Outcome {
    let device = bundled_device("vu3p-like").unwrap();
    let unit = builtin_conv_unit();
    let mut bad = Vec::new();
    for algo in [
        Algorithm::Nsga2,
        Algorithm::Nsga2Reduced,
        Algorithm::Cmaes,
        Algorithm::Sa,
        Algorithm::Ga,
    ] {
        let cfg = FlowConfig {
            optimizer: OptimizerConfig::new(algo, 3000, 0),
            ..FlowConfig::default()
        };
        let b = run_flow(&device, &unit, &cfg).unwrap();
        let depths: Vec<u32> = b.pipeline.iter().map(|r| r.depth).collect();
        let monotone = b
            .pipeline
            .windows(2)
            .all(|w| w[1].proxy_mhz >= w[0].proxy_mhz);
        if depths != [0, 1, 2, 3, 4] || b.pipeline[0].registers != 0 || !monotone {
            bad.push(algo.to_string());
        }
    }
    outcome(
        bad.is_empty(),
        format!("5 algorithms, depths 0..=4, offenders {bad:?}"),
    )
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let unit = builtin_conv_unit();
    let mut bad = 0;
    for k in 0..50 {
        let r = rect(BUNDLED_DEVICES[k % BUNDLED_DEVICES.len()]);
        let replicas = r.plan.replicas(&r.device);
        let chip = replicate_netlist(&unit, r.plan.units_per_rect * replicas).unwrap();
        let dec = Decoder::new(&r.device, &r.design, r.plan.region()).unwrap();
        let p = dec.decode(&dec.random_genotype(&mut rng)).unwrap();
        let full = replicate_placement(&p, &r.plan, &r.device).unwrap();
        let a = evaluate(&p, &r.design).unwrap();
        let b = evaluate(&full, &chip).unwrap();
        if b.wl2 != replicas as f64 * a.wl2 || b.max_bbox != a.max_bbox {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("50 rectangles, {bad} mismatches"))
}

fn criterion_11() -> Outcome {
    let r = rect("vu11p-like");
    // three decimals, truncated
    let milli = |t| {
        let u = r
            .plan
            .utilization
            .iter()
            .find(|u| u.block_type == t)
            .unwrap();
        u.used as u64 * 1000 / u.available as u64
    };
    let got = (
        milli(BlockType::Uram),
        milli(BlockType::Dsp),
        milli(BlockType::Bram),
    );
    outcome(
        got == (1000, 937, 952),
        format!(
            "URAM {:.3}, DSP {:.3}, BRAM {:.3}",
            got.0 as f64 / 1e3,
            got.1 as f64 / 1e3,
            got.2 as f64 / 1e3
        ),
    )
}

fn rapidplace_cmd(args: &[&str], threads: u32) -> bool {
    Command::new(env!("CARGO_BIN_EXE_rapidplace"))
        .args(args)
        .env("RAPIDPLACE_THREADS", threads.to_string())
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

/// File contents with the trailing wall-clock column of traces removed.
fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let mut bytes = std::fs::read(&path).unwrap();
        if name == "trace.csv" {
            let text = String::from_utf8(bytes).unwrap();
            bytes = text
                .lines()
                .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
                .collect::<Vec<_>>()
                .join("\n")
                .into_bytes();
        }
        out.insert(name, bytes);
    }
    out
}

fn criterion_12() -> Outcome {
    let work = tempfile::tempdir().unwrap();
    let src = work.path().join("src");
    let dst = work.path().join("dst");
    let (src_s, dst_s) = (src.to_str().unwrap(), dst.to_str().unwrap());
    let commands: [(&str, Vec<&str>, &Path); 2] = [
        (
            "place",
            vec![
                "place",
                "--device",
                "vu3p-like",
                "--algo",
                "nsga2",
                "--seed",
                "7",
                "--evals",
                "3000",
                "--out",
                src_s,
            ],
            &src,
        ),
        (
            "transfer",
            vec![
                "transfer",
                "--seed-bundle",
                src_s,
                "--device",
                "vu9p-like",
                "--algo",
                "ga",
                "--seed",
                "7",
                "--evals",
                "2000",
                "--baseline",
                "--out",
                dst_s,
            ],
            &dst,
        ),
    ];
    let mut differing = Vec::new();
    let mut snapshots = Vec::new();
    for threads in [1, 4] {
        for (_, args, _) in &commands {
            if !rapidplace_cmd(args, threads) {
                return outcome(
                    false,
                    format!("`{}` failed with {threads} threads", args[0]),
                );
            }
        }
        snapshots.push(
            commands
                .iter()
                .map(|(_, _, dir)| snapshot(dir))
                .collect::<Vec<_>>(),
        );
        for (_, _, dir) in &commands {
            std::fs::remove_dir_all(dir).unwrap();
        }
    }
    let mut files = 0;
    for (i, (name, _, _)) in commands.iter().enumerate() {
        let (a, b) = (&snapshots[0][i], &snapshots[1][i]);
        files += a.len();
        if a.keys().ne(b.keys()) {
            differing.push(format!("{name}: file sets"));
        }
        for (f, bytes) in a {
            if b.get(f) != Some(bytes) {
                differing.push(format!("{name}/{f}"));
            }
        }
    }
    outcome(
        differing.is_empty(),
        format!("{files} files per run under 1 and 4 threads, differing {differing:?}"),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        (1, "legality fuzzing", criterion_1),
        (2, "objective oracle", criterion_2),
        (3, "dominance sort oracle", criterion_3),
        (4, "small-instance optimality", criterion_4),
        (5, "CMA-ES sphere", criterion_5),
        (6, "relative quality direction", criterion_6),
        (7, "reduced genotype", criterion_7),
        (8, "transfer speedup", criterion_8),
        (9, "pipelining monotonicity", criterion_9),
        (10, "replication identity", criterion_10),
        (11, "utilization", criterion_11),
        (12, "determinism", criterion_12),
    ];
    let limits: HashMap<u32, f64> = [
        (1, 60.0),
        (2, 5.0),
        (3, 10.0),
        (4, 120.0),
        (5, 10.0),
        (6, 1800.0),
        (8, 1800.0),
        (9, 60.0),
    ]
    .into_iter()
    .collect();
    let wanted: Vec<u32> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = Vec::new();
    for (n, name, check) in criteria {
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let mut o = check();
        let secs = start.elapsed().as_secs_f64();
        if let Some(&limit) = limits.get(&n) {
            if secs >= limit {
                o.pass = false;
                o.detail.push_str(&format!("; over the {limit} s limit"));
            }
        }
        println!(
            "criterion {n:>2} {}: {name}: {} [{secs:.1} s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
