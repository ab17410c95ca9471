use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

use sds_core::analysis::{
    pool_proxy_severity, select, tail_report, HillConfig, ProxyWeighting, SelectionRule, TailRow, TAIL_CSV_HEADER,
};
use sds_core::fragility::SensitivityGrid;
use sds_core::grid::GridCase;
use sds_core::ingest::{
    grid_from_json, load_grid, load_plan, load_pool, load_selection, load_track, make_toy_case,
    plan_from_json, pool_from_jsonl, save_plan, save_pool, save_selection, selection_from_json, track_from_csv,
    BundleConfig, PlanFile, SelectionFile, SCHEMA_VERSION,
};
use sds_core::sampler::{sample_pool, SamplerConfig, SamplerKind, ScenarioOutage};
use sds_core::ucmodel::{build_suc, evaluate_plan, solve_suc, BackendKind, SolveOptions, COST_CSV_HEADER};
use sds_core::windfield::{linearity_mesh, HollandParams, ParamUncertainty};

use crate::error::{io_error, CliError, CliResult};
use crate::manifest::{manifest_path_for, strip_workers, FileHash, RunManifest};
use crate::{
    AnalyzeArgs, Backend, Cli, Command, EvaluateArgs, LindevArgs, Method, PlanArgs, ReplayArgs, ReportArgs, Rule,
    SampleArgs, SelectArgs, SensitivityArgs, SolverArgs, ToyArgs, ValidateArgs, Weighting, DEFAULT_SEED,
};

/// What a command read and wrote.
struct Outcome {
    config: serde_json::Value,
    seeds: BTreeMap<String, u64>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    /// Artifact the manifest is written next to; `None` for read-only commands.
    primary: Option<PathBuf>,
}

struct Ctx<'a> {
    cli: &'a Cli,
}

impl Ctx<'_> {
    fn seed(&self) -> u64 {
        self.cli.seed.unwrap_or(DEFAULT_SEED)
    }

    /// Output path under `--out-dir`, with parent directories created.
    fn out(&self, p: &Path) -> CliResult<PathBuf> {
        let path = match &self.cli.out_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        };
        if let Some(parent) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
        }
        Ok(path)
    }
}

pub fn execute(cli: &Cli, args: &[String]) -> CliResult<()> {
    if let Command::Replay(r) = &cli.command {
        return replay(cli, r);
    }
    let start = Instant::now();
    let outcome = dispatch(cli)?;
    let Some(primary) = &outcome.primary else {
        return Ok(());
    };
    let cwd = std::env::current_dir().map_err(|e| CliError::Internal(e.to_string()))?;
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        tool: env!("CARGO_PKG_NAME").to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        subcommand: cli.command.name().to_string(),
        argv: strip_workers(args),
        cwd: cwd.display().to_string(),
        config: outcome.config.clone(),
        seeds: outcome.seeds.clone(),
        inputs: outcome.inputs.iter().map(|p| FileHash::of(p)).collect::<CliResult<_>>()?,
        outputs: outcome.outputs.iter().map(|p| FileHash::of(p)).collect::<CliResult<_>>()?,
        workers: rayon::current_num_threads(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    manifest.save(&manifest_path_for(primary))
}

fn dispatch(cli: &Cli) -> CliResult<Outcome> {
    let ctx = Ctx { cli };
    match &cli.command {
        Command::Toy(a) => toy(&ctx, a),
        Command::Sample(a) => sample(&ctx, a),
        Command::Analyze(a) => analyze(&ctx, a),
        Command::Select(a) => select_cmd(&ctx, a),
        Command::Plan(a) => plan(&ctx, a),
        Command::Evaluate(a) => evaluate(&ctx, a),
        Command::Report(a) => report(&ctx, a),
        Command::Validate(a) => validate(a),
        Command::Sensitivity(a) => sensitivity(&ctx, a),
        Command::Lindev(a) => lindev(&ctx, a),
        Command::Replay(_) => Err(CliError::Usage("replay cannot be nested".into())),
    }
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

fn file_hash(path: &Path) -> CliResult<String> {
    Ok(FileHash::of(path)?.sha256)
}

fn toy(ctx: &Ctx, a: &ToyArgs) -> CliResult<Outcome> {
    let bundle = make_toy_case(&a.name)?;
    let dir = ctx.out(&a.out)?;
    bundle.save(&dir)?;
    Ok(Outcome {
        config: json!({ "name": a.name }),
        seeds: BTreeMap::new(),
        inputs: vec![],
        outputs: ["grid.json", "track.csv", "config.json"].iter().map(|f| dir.join(f)).collect(),
        primary: Some(dir),
    })
}

fn sample(ctx: &Ctx, a: &SampleArgs) -> CliResult<Outcome> {
    let grid = load_grid(&a.grid)?;
    let track = load_track(&a.track)?;
    let cfg = SamplerConfig {
        p_threshold: a.p_threshold,
        min_wind: a.min_wind,
    };
    let kind = match a.method {
        Method::Sds => SamplerKind::Relevance,
        Method::Smc => SamplerKind::Normal,
    };
    let seed = ctx.seed();
    let pool = sample_pool(&grid, &track, a.n, seed, &cfg, kind)?;
    log::info!("sampled {} scenarios, {} failure events", pool.n_scenarios, pool.events.len());
    let out = ctx.out(&a.out)?;
    save_pool(&out, &pool)?;
    Ok(Outcome {
        config: json!({
            "method": kind,
            "n": a.n,
            "p_threshold": a.p_threshold,
            "min_wind": a.min_wind,
        }),
        seeds: BTreeMap::from([("sampler".to_string(), seed)]),
        inputs: vec![a.grid.clone(), a.track.clone()],
        outputs: vec![out.clone()],
        primary: Some(out),
    })
}

fn hill_config(k_frac: f64, shift: f64, min_exceedances: usize) -> CliResult<HillConfig> {
    if !(k_frac > 0.0 && k_frac < 1.0) {
        return Err(CliError::Usage(format!("--k-frac must lie in (0, 1), got {k_frac}")));
    }
    if !(shift > 0.0) {
        return Err(CliError::Usage(format!("--shift must be positive, got {shift}")));
    }
    Ok(HillConfig {
        k_frac,
        shift,
        min_exceedances,
    })
}

fn tail_csv(rows: &[TailRow], label: Option<&str>) -> String {
    let mut s = String::new();
    for r in rows {
        if let Some(l) = label {
            s.push_str(l);
            s.push(',');
        }
        s.push_str(&r.csv());
        s.push('\n');
    }
    s
}

fn analyze(ctx: &Ctx, a: &AnalyzeArgs) -> CliResult<Outcome> {
    let cfg = hill_config(a.k_frac, a.shift, a.min_exceedances)?;
    let pool = load_pool(&a.pool)?;
    let rows = tail_report(&pool, &cfg);
    let out = ctx.out(&a.out)?;
    write(&out, &format!("{TAIL_CSV_HEADER}\n{}", tail_csv(&rows, None)))?;
    Ok(Outcome {
        config: json!({ "hill": cfg }),
        seeds: BTreeMap::new(),
        inputs: vec![a.pool.clone()],
        outputs: vec![out.clone()],
        primary: Some(out),
    })
}

fn select_cmd(ctx: &Ctx, a: &SelectArgs) -> CliResult<Outcome> {
    let pool = load_pool(&a.pool)?;
    let mut inputs = vec![a.pool.clone()];
    let grid = match &a.grid {
        Some(p) => {
            inputs.push(p.clone());
            Some(load_grid(p)?)
        }
        None => None,
    };
    let weighting = match a.weighting {
        Weighting::Count => ProxyWeighting::Count,
        Weighting::FlowLimit => {
            let g = grid
                .as_ref()
                .ok_or_else(|| CliError::Usage("--weighting flow-limit needs --grid".into()))?;
            if g.lines.iter().map(|l| &l.id).ne(pool.line_ids.iter()) {
                return Err(CliError::Data("grid lines do not match the pool".into()));
            }
            ProxyWeighting::FlowLimit
        }
    };
    let rule = match a.rule {
        Rule::Random => SelectionRule::Random,
        Rule::Stratified => SelectionRule::Stratified,
        Rule::Worst => SelectionRule::Worst,
    };
    let seed = ctx.seed();
    let qhat = pool_proxy_severity(&pool, grid.as_ref(), weighting);
    let sel = select(&qhat, rule, a.n, seed)?;
    let file = SelectionFile::new(&sel, &pool, file_hash(&a.pool)?);
    let out = ctx.out(&a.out)?;
    save_selection(&out, &file)?;
    Ok(Outcome {
        config: json!({ "rule": rule, "n": a.n, "weighting": weighting }),
        seeds: BTreeMap::from([("selection".to_string(), seed)]),
        inputs,
        outputs: vec![out.clone()],
        primary: Some(out),
    })
}

fn solve_options(s: &SolverArgs, reserve: f64) -> CliResult<SolveOptions> {
    if !(s.gap >= 0.0) {
        return Err(CliError::Usage(format!("--gap must be >= 0, got {}", s.gap)));
    }
    if let Some(tl) = s.time_limit {
        if !(tl > 0.0) {
            return Err(CliError::Usage(format!("--time-limit must be positive, got {tl}")));
        }
    }
    if !(reserve >= 0.0) {
        return Err(CliError::Usage(format!("--reserve must be >= 0, got {reserve}")));
    }
    Ok(SolveOptions {
        backend: match s.backend {
            Backend::Highs => BackendKind::Highs,
            Backend::Exhaustive => BackendKind::Exhaustive,
        },
        mip_rel_gap: s.gap,
        time_limit: s.time_limit,
        reserve_fraction: reserve,
    })
}

fn check_lines(grid: &GridCase, lines: &[String], what: &str) -> CliResult<()> {
    if grid.lines.iter().map(|l| &l.id).ne(lines.iter()) {
        return Err(CliError::Data(format!("{what} line ids do not match the grid")));
    }
    Ok(())
}

fn plan(ctx: &Ctx, a: &PlanArgs) -> CliResult<Outcome> {
    let opts = solve_options(&a.solver, a.reserve)?;
    let grid = load_grid(&a.grid)?;
    let sel = load_selection(&a.selection)?;
    check_lines(&grid, &sel.lines, "selection")?;
    let scenarios = sel.outages();
    let weights = sel.weights();
    let mut outputs = Vec::new();
    if let Some(mps) = &a.mps {
        let (model, _) = build_suc(&grid, &scenarios, &weights, opts.reserve_fraction, None)?;
        let path = ctx.out(mps)?;
        write(&path, &model.to_mps())?;
        outputs.push(path);
    }
    let sol = solve_suc(&grid, &scenarios, &weights, &opts)?;
    log::info!("objective {} gap {}", sol.objective, sol.mip_gap);
    let file = PlanFile {
        schema_version: SCHEMA_VERSION,
        grid_hash: file_hash(&a.grid)?,
        selection_hash: file_hash(&a.selection)?,
        objective: sol.objective,
        mip_gap: sol.mip_gap,
        status: sol.status,
        expected_cost: sol.expected_cost(),
        plan: sol.plan,
    };
    let out = ctx.out(&a.out)?;
    save_plan(&out, &file)?;
    outputs.insert(0, out.clone());
    Ok(Outcome {
        config: json!({ "solver": opts }),
        seeds: BTreeMap::new(),
        inputs: vec![a.grid.clone(), a.selection.clone()],
        outputs,
        primary: Some(out),
    })
}

/// Test scenarios and weights from a selection file or a whole pool.
fn load_test_set(path: &Path) -> CliResult<(Vec<String>, Vec<ScenarioOutage>, Vec<f64>)> {
    if path.extension().is_some_and(|e| e == "jsonl") {
        let pool = load_pool(path)?;
        let w = pool.weight();
        let outages = pool.outages();
        let weights = vec![w; outages.len()];
        Ok((pool.line_ids, outages, weights))
    } else {
        let sel = load_selection(path)?;
        let (o, w) = (sel.outages(), sel.weights());
        Ok((sel.lines, o, w))
    }
}

fn evaluate(ctx: &Ctx, a: &EvaluateArgs) -> CliResult<Outcome> {
    let opts = solve_options(&a.solver, 0.0)?;
    let grid = load_grid(&a.grid)?;
    let plan = load_plan(&a.plan)?;
    if plan.grid_hash != file_hash(&a.grid)? {
        log::warn!("plan was built for a different grid file");
    }
    plan.plan.check(&grid)?;
    let (lines, scenarios, weights) = load_test_set(&a.test_pool)?;
    check_lines(&grid, &lines, "test set")?;
    let table = evaluate_plan(&grid, &plan.plan, &scenarios, &weights, &opts)?;
    let out = ctx.out(&a.out)?;
    write(&out, &table.to_csv())?;
    Ok(Outcome {
        config: json!({ "solver": opts }),
        seeds: BTreeMap::new(),
        inputs: vec![a.grid.clone(), a.plan.clone(), a.test_pool.clone()],
        outputs: vec![out.clone()],
        primary: Some(out),
    })
}

fn pool_label(kind: SamplerKind) -> &'static str {
    match kind {
        SamplerKind::Relevance => "sds",
        SamplerKind::Normal => "smc",
    }
}

fn report(ctx: &Ctx, a: &ReportArgs) -> CliResult<Outcome> {
    let cfg = hill_config(a.k_frac, a.shift, a.min_exceedances)?;
    let mut csv = format!("sampler,{TAIL_CSV_HEADER}\n");
    let mut labels = Vec::new();
    for (i, path) in a.compare.iter().enumerate() {
        let pool = load_pool(path)?;
        let mut label = pool_label(pool.kind).to_string();
        if labels.contains(&label) {
            label = format!("{label}{}", i + 1);
        }
        csv.push_str(&tail_csv(&tail_report(&pool, &cfg), Some(&label)));
        labels.push(label);
    }
    let out = ctx.out(&a.out)?;
    write(&out, &csv)?;
    let mut outputs = vec![out.clone()];
    if let Some(g) = &a.gnuplot {
        let path = ctx.out(g)?;
        write(&path, &gnuplot_script(&out, &labels))?;
        outputs.push(path);
    }
    Ok(Outcome {
        config: json!({ "hill": cfg, "labels": labels }),
        seeds: BTreeMap::new(),
        inputs: a.compare.clone(),
        outputs,
        primary: Some(out),
    })
}

fn gnuplot_script(table: &Path, labels: &[String]) -> String {
    let data = table.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set datafile missing 'NA'");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set multiplot layout 2,2");
    for (col, title) in [(3, "mean faulted lines"), (6, "Hill alpha"), (7, "excess kurtosis"), (8, "mean/median")] {
        let _ = writeln!(s, "set title '{title}'");
        let _ = writeln!(s, "set xlabel 't'");
        let plots: Vec<String> = labels
            .iter()
            .map(|l| format!("'{data}' using 2:(strcol(1) eq '{l}' ? ${col} : 1/0) with linespoints title '{l}'"))
            .collect();
        let _ = writeln!(s, "plot {}", plots.join(", "));
    }
    let _ = writeln!(s, "unset multiplot");
    s
}

/// Detect the file kind from its extension and content, then load it.
fn validate(a: &ValidateArgs) -> CliResult<Outcome> {
    let path = &a.file;
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let summary = match ext {
        "jsonl" => {
            let p = pool_from_jsonl(&text)?;
            format!("scenario pool: {} scenarios, {} events", p.n_scenarios, p.events.len())
        }
        "csv" => {
            let first = text.lines().next().unwrap_or("");
            if first.starts_with("# schema_version") {
                let t = track_from_csv(&text)?;
                format!("track: {} intervals", t.horizon())
            } else if first == TAIL_CSV_HEADER || first == format!("sampler,{TAIL_CSV_HEADER}") {
                check_table(&text, first.split(',').count())?;
                "tail report".to_string()
            } else if first == COST_CSV_HEADER {
                check_table(&text, first.split(',').count())?;
                "cost table".to_string()
            } else {
                return Err(CliError::Data(format!("{}: unrecognized CSV header '{first}'", path.display())));
            }
        }
        _ => {
            let v: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            let has = |k: &str| v.get(k).is_some();
            if has("buses") {
                let g = grid_from_json(&text)?;
                format!(
                    "grid: {} buses, {} lines, {} generators",
                    g.buses.len(),
                    g.lines.len(),
                    g.generators.len()
                )
            } else if has("rule") {
                let s = selection_from_json(&text)?;
                format!("selection: {} scenarios", s.scenarios.len())
            } else if has("plan") {
                let p = plan_from_json(&text)?;
                format!("plan: {} generators", p.plan.generators.len())
            } else if has("segment_km") {
                let c: BundleConfig =
                    serde_json::from_value(v).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
                if c.schema_version != SCHEMA_VERSION {
                    return Err(CliError::Data(format!("unsupported schema_version {}", c.schema_version)));
                }
                "case config".to_string()
            } else if has("subcommand") {
                RunManifest::load(path)?;
                "run manifest".to_string()
            } else {
                return Err(CliError::Data(format!("{}: unrecognized file", path.display())));
            }
        }
    };
    println!("ok: {summary}");
    Ok(Outcome {
        config: serde_json::Value::Null,
        seeds: BTreeMap::new(),
        inputs: vec![],
        outputs: vec![],
        primary: None,
    })
}

fn check_table(text: &str, width: usize) -> CliResult<()> {
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.split(',').count() != width {
            return Err(CliError::Data(format!("row {}: expected {width} fields", i + 1)));
        }
    }
    Ok(())
}

fn sensitivity(ctx: &Ctx, a: &SensitivityArgs) -> CliResult<Outcome> {
    let grid = SensitivityGrid {
        n: a.n,
        seed: ctx.seed(),
        ..SensitivityGrid::default()
    };
    let rows = grid.run()?;
    let mut csv = String::from("mean_i,mean_j,sd_i,sd_j,rho,corr,n,seed\n");
    for r in &rows {
        let corr = r.corr.value().map_or("NA".to_string(), |c| c.to_string());
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{corr},{},{}",
            r.mean_i, r.mean_j, r.sd_i, r.sd_j, r.rho, r.n, r.seed
        );
    }
    let out = ctx.out(&a.out)?;
    write(&out, &csv)?;
    Ok(Outcome {
        config: serde_json::to_value(&grid).expect("grid serializes"),
        seeds: BTreeMap::from([("sensitivity".to_string(), grid.seed)]),
        inputs: vec![],
        outputs: vec![out.clone()],
        primary: Some(out),
    })
}

fn lindev(ctx: &Ctx, a: &LindevArgs) -> CliResult<Outcome> {
    if a.cells == 0 || !(a.half_width > 0.0) {
        return Err(CliError::Usage("--cells and --half-width must be positive".into()));
    }
    let p = HollandParams::reference_hurricane();
    let sigma = ParamUncertainty::reference();
    let mesh = linearity_mesh(&p, &sigma, a.half_width, a.cells, &a.multipliers);
    let mut csv = String::from("east_km,north_km,param,multiplier,deviation\n");
    for r in &mesh.records {
        let d = r.deviation.map_or("NA".to_string(), |d| d.to_string());
        let _ = writeln!(csv, "{},{},{},{},{d}", r.east_km, r.north_km, r.param.name(), r.multiplier);
    }
    let out = ctx.out(&a.out)?;
    write(&out, &csv)?;
    println!(
        "fraction below {}: {:.4}",
        a.threshold,
        mesh.fraction_below(a.threshold, &a.multipliers)
    );
    Ok(Outcome {
        config: json!({
            "params": p,
            "sigma": sigma.sigma,
            "cells": a.cells,
            "half_width_km": a.half_width,
            "multipliers": a.multipliers,
        }),
        seeds: BTreeMap::new(),
        inputs: vec![],
        outputs: vec![out.clone()],
        primary: Some(out),
    })
}

fn replay(cli: &Cli, r: &ReplayArgs) -> CliResult<()> {
    use clap::Parser;

    let m = RunManifest::load(&r.manifest)?;
    std::env::set_current_dir(&m.cwd).map_err(|e| CliError::Data(format!("{}: {e}", m.cwd)))?;
    for input in &m.inputs {
        let now = FileHash::of(Path::new(&input.path))?;
        if now.sha256 != input.sha256 {
            return Err(CliError::Data(format!("input {} changed since the recorded run", input.path)));
        }
    }
    let argv = std::iter::once("sds".to_string()).chain(m.argv.iter().cloned());
    let mut recorded = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    if matches!(recorded.command, Command::Replay(_)) {
        return Err(CliError::Usage("replay cannot be nested".into()));
    }
    recorded.workers = cli.workers;
    dispatch(&recorded)?;
    let mut mismatched = Vec::new();
    for out in &m.outputs {
        let now = FileHash::of(Path::new(&out.path))?;
        if now.sha256 != out.sha256 {
            mismatched.push(out.path.clone());
        }
    }
    if !mismatched.is_empty() {
        return Err(CliError::Internal(format!(
            "replay produced different bytes for: {}",
            mismatched.join(", ")
        )));
    }
    println!("replay ok: {} outputs identical", m.outputs.len());
    Ok(())
}
