//! Acceptance suite: one pass/fail line per criterion.
//!
//! Exits nonzero only for failures not listed in `KNOWN_FAILURES`.

#[path = "../../core/tests/common/uc_cases.rs"]
mod uc_cases;
#[path = "../../core/tests/common/uc_oracle.rs"]
mod uc_oracle;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sds_core::analysis::*;
use sds_core::correlation::{build_covariance, cholesky_rank1, SensitivityVector};
use sds_core::fragility::SensitivityGrid;
use sds_core::ingest::{make_toy_case, CaseBundle};
use sds_core::sampler::{sample_pool_sds, sample_pool_smc, SamplerConfig, ScenarioOutage, ScenarioPool};
use sds_core::ucmodel::*;
use sds_core::windfield::*;

/// Criteria whose miss is analysed in the decision notes.
const KNOWN_FAILURES: &[usize] = &[1];

const CANONICAL_SEED: u64 = 20_170_825;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, budget_s: f64) -> bool {
    elapsed.as_secs_f64() < budget_s
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst_vg: f64 = 0.0;
    for (pc, b, rho, rmax) in [(975.0, 1.3, 1.15, 50.0), (930.0, 1.0, 1.2, 25.0), (990.0, 2.2, 1.1, 80.0)] {
        let p = HollandParams {
            pc,
            b,
            rho,
            rmax,
            ..HollandParams::reference_hurricane()
        };
        let v = gradient_wind_speed(&p, rmax, 0.0).unwrap();
        let expect = (b * (p.pn - pc) * 100.0 / (rho * std::f64::consts::E)).sqrt();
        worst_vg = worst_vg.max(rel_err(v, expect));
    }
    let mut limits_exact = true;
    let base = HollandParams::reference_hurricane();
    let no_deficit = HollandParams { pc: base.pn, ..base };
    let stationary = HollandParams { speed: 0.0, ..base };
    for (e, n) in [(10.0, 0.0), (-120.0, 45.0), (60.0, -240.0)] {
        let target = base.center.offset_km(e, n);
        limits_exact &= (total_wind_speed(&no_deficit, target).unwrap() - base.speed).abs() <= 1e-12;
        let r = haversine_distance(base.center, target);
        let vg = gradient_wind_speed(&stationary, r, target.phi).unwrap();
        limits_exact &= (total_wind_speed(&stationary, target).unwrap() - vg).abs() <= 1e-12 * vg;
    }
    let mesh = linearity_mesh(&base, &ParamUncertainty::reference(), 250.0, 100, &[-1.0, 1.0]);
    let frac = mesh.fraction_below(0.1, &[-1.0, 1.0]);
    let per_param: Vec<String> = HollandParam::ALL
        .iter()
        .map(|&param| {
            let sel: Vec<_> = mesh.records.iter().filter(|r| r.param == param).collect();
            let ok = sel.iter().filter(|r| matches!(r.deviation, Some(d) if d < 0.1)).count();
            format!("{}={:.3}", param.name(), ok as f64 / sel.len() as f64)
        })
        .collect();
    let elapsed = start.elapsed();
    outcome(
        worst_vg < 1e-9 && limits_exact && frac >= 0.9 && within(elapsed, 10.0),
        format!(
            "Vg rel err {worst_vg:.1e} (tol 1e-9); limits exact: {limits_exact}; mesh fraction below 0.1: {frac:.4} \
             (need >= 0.9; {}); {:.1}s (< 10s)",
            per_param.join(" "),
            elapsed.as_secs_f64()
        ),
    )
}

fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let rank = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            for k in i..=j {
                r[idx[k]] = (i + j) as f64 / 2.0;
            }
            i = j + 1;
        }
        r
    };
    let (rx, ry) = (rank(x), rank(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let grid = SensitivityGrid::default();
    let rows = grid.run().unwrap();
    let corr = |r: &sds_core::fragility::SensitivityRow| r.corr.value().unwrap_or(0.0);
    let zero_rho_max = rows
        .iter()
        .filter(|r| r.rho == 0.0)
        .map(|r| corr(r).abs())
        .fold(0.0, f64::max);
    let is_ten = |s: f64| (s - 10.0).abs() < 1e-9;
    let mut spearman_min: f64 = 1.0;
    let mut surface_gap: f64 = 0.0;
    let key = |r: &sds_core::fragility::SensitivityRow| (r.sd_i.to_bits(), r.sd_j.to_bits(), r.rho.to_bits());
    let reference: std::collections::HashMap<_, f64> = rows
        .iter()
        .filter(|r| r.mean_i == 0.0 && r.mean_j == 0.0)
        .map(|r| (key(r), corr(r)))
        .collect();
    for &mi in &grid.means {
        for &mj in &grid.means {
            let pair: Vec<_> = rows.iter().filter(|r| r.mean_i == mi && r.mean_j == mj).collect();
            let at_ten: Vec<_> = pair.iter().filter(|r| is_ten(r.sd_i) && is_ten(r.sd_j)).collect();
            let rhos: Vec<f64> = at_ten.iter().map(|r| r.rho).collect();
            let cs: Vec<f64> = at_ten.iter().map(|r| corr(r)).collect();
            spearman_min = spearman_min.min(spearman(&rhos, &cs));
            for r in &pair {
                surface_gap = surface_gap.max((corr(r) - reference[&key(r)]).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        zero_rho_max < 0.08 && spearman_min == 1.0 && surface_gap < 0.15 && within(elapsed, 60.0),
        format!(
            "max |corr| at rho=0: {zero_rho_max:.4} (< 0.08); min Spearman at sd 10: {spearman_min} (= 1); \
             max surface gap to (0,0): {surface_gap:.4} (< 0.15); {:.1}s (< 60s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn random_factors(n: usize, k: usize, rng: &mut ChaCha8Rng) -> (Vec<SensitivityVector>, ParamUncertainty) {
    let sens = (0..k)
        .map(|param| SensitivityVector {
            entries: (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
            param,
            timestep: 0,
        })
        .collect();
    let sigma = ParamUncertainty::new((0..k).map(|_| rng.random_range(0.05..2.0)).collect()).unwrap();
    (sens, sigma)
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(CANONICAL_SEED);
    let (mut worst_elem, mut worst_eig): (f64, f64) = (0.0, f64::INFINITY);
    for _ in 0..100 {
        let n = rng.random_range(1..=60);
        let k = rng.random_range(1..=8);
        let (sens, sigma) = random_factors(n, k, &mut rng);
        let f = build_covariance(&sens, &sigma).unwrap();
        let l = cholesky_rank1(&f).unwrap();
        let mut c = DMatrix::<f64>::zeros(n, n);
        for (v, s) in sens.iter().zip(&sigma.sigma) {
            let col = nalgebra::DVector::from_column_slice(&v.entries) * *s;
            c += &col * col.transpose();
        }
        let trace = c.trace();
        let ridged = &c + DMatrix::<f64>::identity(n, n) * l.eps;
        let oracle = ridged.cholesky().expect("ridged covariance is positive definite").l();
        for i in 0..n {
            for j in 0..n {
                worst_elem = worst_elem.max((l.get(i, j) - oracle[(i, j)]).abs());
            }
        }
        let dense = f.densify();
        let m = DMatrix::from_row_slice(n, n, &dense.data);
        let min_eig = m.symmetric_eigenvalues().min();
        worst_eig = worst_eig.min(min_eig / trace.max(f64::MIN_POSITIVE));
    }
    let time_at = |n: usize, rng: &mut ChaCha8Rng| {
        let (sens, sigma) = random_factors(n, 8, rng);
        let f = build_covariance(&sens, &sigma).unwrap();
        let mut times: Vec<f64> = (0..7)
            .map(|_| {
                let t = Instant::now();
                std::hint::black_box(cholesky_rank1(std::hint::black_box(&f)).unwrap());
                t.elapsed().as_secs_f64()
            })
            .collect();
        times.sort_by(f64::total_cmp);
        times[times.len() / 2]
    };
    let sizes = [200, 400, 800, 1600];
    let times: Vec<f64> = sizes.iter().map(|&n| time_at(n, &mut rng)).collect();
    let mut slopes: Vec<f64> = times.windows(2).map(|w| (w[1] / w[0]).log2()).collect();
    slopes.sort_by(f64::total_cmp);
    let exponent = slopes[slopes.len() / 2];
    let elapsed = start.elapsed();
    outcome(
        worst_elem < 1e-8 && worst_eig >= -1e-10 && (1.6..=2.6).contains(&exponent) && within(elapsed, 120.0),
        format!(
            "max |L - L_dense| {worst_elem:.1e} (< 1e-8); min eigenvalue / trace {worst_eig:.1e} (>= -1e-10); \
             median doubling exponent {exponent:.2} (in [1.6, 2.6]); {:.1}s (< 120s)",
            elapsed.as_secs_f64()
        ),
    )
}

struct Pools {
    bundle: CaseBundle,
    sds: ScenarioPool,
    smc: ScenarioPool,
}

fn criterion_4(p: &Pools) -> Outcome {
    let start = Instant::now();
    let n = p.sds.n_scenarios as f64;
    let (fs, fm) = (p.sds.line_failure_frequency(), p.smc.line_failure_frequency());
    let (mut agree, mut cells) = (0usize, 0usize);
    for (rs, rm) in fs.iter().zip(&fm) {
        for (&a, &b) in rs.iter().zip(rm) {
            cells += 1;
            let se = (a * (1.0 - a) / n + b * (1.0 - b) / n).sqrt();
            if (a - b).abs() <= 3.0 * se {
                agree += 1;
            }
        }
    }
    let frac = agree as f64 / cells as f64;
    let elapsed = start.elapsed();
    outcome(
        frac >= 0.99 && within(elapsed, 300.0),
        format!(
            "{agree}/{cells} line-time cells within 3 SE of the difference ({:.2}%, need >= 99%); {:.1}s (< 300s)",
            100.0 * frac,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_5(p: &Pools) -> Outcome {
    let t = peak_intensity_timestep(&p.bundle.grid, &p.bundle.track);
    let cfg = HillConfig::default();
    let rs = &tail_report(&p.sds, &cfg)[t];
    let rm = &tail_report(&p.smc, &cfg)[t];
    let fmt = |e: Estimate| e.value().map_or("NA".to_string(), |v| format!("{v:.3}"));
    let hill = matches!((rs.hill_alpha.value(), rm.hill_alpha.value()), (Some(a), Some(b)) if a < b);
    let kurt = matches!((rs.excess_kurtosis.value(), rm.excess_kurtosis.value()), (Some(a), Some(b)) if a >= b + 0.5);
    let mmr = matches!((rs.mmr.value(), rm.mmr.value()), (Some(a), Some(b)) if a > b);
    let held = [hill, kurt, mmr].iter().filter(|&&b| b).count();
    let max_ok = rs.max >= rm.max;
    outcome(
        held >= 2 && max_ok,
        format!(
            "peak t={t}: alpha {} vs {} ({hill}); kurtosis {} vs {} ({kurt}); MMR {} vs {} ({mmr}); \
             {held}/3 hold (need 2); max count {} vs {} ({max_ok})",
            fmt(rs.hill_alpha),
            fmt(rm.hill_alpha),
            fmt(rs.excess_kurtosis),
            fmt(rm.excess_kurtosis),
            fmt(rs.mmr),
            fmt(rm.mmr),
            rs.max,
            rm.max
        ),
    )
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut worst_rel: f64 = 0.0;
    let mut worst_residual: f64 = 0.0;
    let mut invariants = true;
    let mut notes = Vec::new();
    for case in uc_cases::all() {
        let binaries = case.grid.generators.len() * case.grid.horizon();
        let (oracle, _) = uc_oracle::brute_force(&case.grid, &case.scenarios, &case.weights);
        let exhaustive = SolveOptions {
            backend: BackendKind::Exhaustive,
            ..SolveOptions::default()
        };
        for opts in [SolveOptions::default(), exhaustive] {
            let sol = solve_suc(&case.grid, &case.scenarios, &case.weights, &opts).unwrap();
            worst_rel = worst_rel.max(rel_err(sol.objective, oracle));
            invariants &= sol.plan.check(&case.grid).is_ok();
            for d in &sol.dispatch {
                worst_residual = worst_residual.max(d.max_balance_residual(&case.grid));
            }
        }
        notes.push(format!("{} ({binaries} binaries)", case.name));
    }
    let elapsed = start.elapsed();
    outcome(
        worst_rel <= 1e-6 && invariants && worst_residual <= 1e-6 && within(elapsed, 60.0),
        format!(
            "{}: objective rel err {worst_rel:.1e} (<= 1e-6); plan invariants hold: {invariants}; \
             balance residual {worst_residual:.1e} MW (<= 1e-6); {:.1}s (< 60s)",
            notes.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_7(p: &Pools) -> Outcome {
    let q = pool_proxy_severity(&p.sds, None, ProxyWeighting::Count);
    let pool_mean = mean(&q);
    let stats = |rule: SelectionRule| {
        let v: Vec<f64> = (0..200u64)
            .map(|seed| select(&q, rule, 10, seed).unwrap().set_severity(&q))
            .collect();
        let m = mean(&v);
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        (m, var)
    };
    let (rand_mean, rand_var) = stats(SelectionRule::Random);
    let (strat_mean, strat_var) = stats(SelectionRule::Stratified);
    let rel = |m: f64| (m - pool_mean).abs() / pool_mean;
    let mut sorted = q.clone();
    sorted.sort_by(f64::total_cmp);
    let p95 = sorted[((0.95 * sorted.len() as f64).ceil() as usize).min(sorted.len()) - 1];
    let worst: Vec<f64> = (5..=10)
        .rev()
        .map(|n| select(&q, SelectionRule::Worst, n, 0).unwrap().set_severity(&q))
        .collect();
    let worst_ok = worst[0] >= p95 && worst.windows(2).all(|w| w[1] >= w[0]);
    outcome(
        rel(rand_mean) <= 0.02 && rel(strat_mean) <= 0.02 && strat_var < rand_var && worst_ok,
        format!(
            "pool mean {pool_mean:.4}; random mean off by {:.2}%, stratified by {:.2}% (<= 2%); \
             variance stratified {strat_var:.4} vs random {rand_var:.4}; worst N=10..5 {:?} vs p95 {p95}",
            100.0 * rel(rand_mean),
            100.0 * rel(strat_mean),
            worst
        ),
    )
}

fn criterion_8(p: &Pools) -> Outcome {
    let start = Instant::now();
    let grid = &p.bundle.grid;
    let seed = p.bundle.config.seed;
    let n = p.bundle.config.selection_n;
    let opts = SolveOptions {
        mip_rel_gap: p.bundle.config.mip_rel_gap,
        ..SolveOptions::default()
    };
    let qs = pool_proxy_severity(&p.sds, None, ProxyWeighting::Count);
    let qm = pool_proxy_severity(&p.smc, None, ProxyWeighting::Count);
    let (os, om) = (p.sds.outages(), p.smc.outages());
    let pick = |sel: &WeightedSelection, o: &[ScenarioOutage]| -> Vec<ScenarioOutage> {
        sel.scenarios.iter().map(|&i| o[i].clone()).collect()
    };
    let w_sds = select(&qs, SelectionRule::Worst, n, seed).unwrap();
    let w_smc = select(&qm, SelectionRule::Worst, n, seed).unwrap();
    let r_sds = select(&qs, SelectionRule::Random, n, seed).unwrap();
    let test = select(&qs, SelectionRule::Stratified, p.bundle.config.test_n, seed ^ 0x7e57).unwrap();
    let test_o = pick(&test, &os);
    let exact: Vec<f64> = test_o.iter().map(|o| severity(grid, o, &opts).unwrap()).collect();
    let mut order: Vec<usize> = (0..test_o.len()).collect();
    order.sort_by(|&a, &b| exact[b].total_cmp(&exact[a]).then(a.cmp(&b)));
    let cost = |sel: &WeightedSelection, o: &[ScenarioOutage]| {
        let sol = solve_suc(grid, &pick(sel, o), &sel.weights, &opts).unwrap();
        evaluate_plan(grid, &sol.plan, &test_o, &test.weights, &opts).unwrap()
    };
    let (cw, cm, cr) = (cost(&w_sds, &os), cost(&w_smc, &om), cost(&r_sds, &os));
    let c = |t: &CostTable, i: usize| t.rows[i].cost.total;
    let le = |a: f64, b: f64| a <= b * (1.0 + 1e-6);
    let top = &order[..2];
    let bottom = &order[order.len() - 2..];
    let top_ok = top.iter().all(|&i| le(c(&cw, i), c(&cr, i)));
    let bottom_ok = bottom.iter().all(|&i| le(c(&cr, i), c(&cw, i)));
    let smc_fails = top.iter().any(|&i| !le(c(&cm, i), c(&cw, i)));
    let show = |idx: &[usize]| {
        idx.iter()
            .map(|&i| format!("[{:.0} {:.0} {:.0}]", c(&cw, i), c(&cr, i), c(&cm, i)))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let elapsed = start.elapsed();
    outcome(
        top_ok && bottom_ok && smc_fails && within(elapsed, 1800.0),
        format!(
            "costs [worst-SDS random worst-SMC] top-2 {} bottom-2 {}; worst-SDS <= random on top-2: {top_ok}; \
             >= on bottom-2: {bottom_ok}; worst-SMC loses on top-2: {smc_fails}; {:.1}s (< 1800s)",
            show(top),
            show(bottom),
            elapsed.as_secs_f64()
        ),
    )
}

fn sds(dir: &Path, workers: usize, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_sds"))
        .current_dir(dir)
        .arg("--workers")
        .arg(workers.to_string())
        .args(args)
        .output()
        .expect("run sds")
}

const PIPELINE: &[&[&str]] = &[
    &["toy", "coastal12", "--out", "case"],
    &["sample", "--grid", "case/grid.json", "--track", "case/track.csv", "--method", "sds", "--n", "2000", "--out", "sds.jsonl"],
    &["sample", "--grid", "case/grid.json", "--track", "case/track.csv", "--method", "smc", "--n", "2000", "--out", "smc.jsonl"],
    &["analyze", "--pool", "sds.jsonl", "--out", "tail.csv"],
    &["select", "--pool", "sds.jsonl", "--rule", "worst", "--n", "5", "--out", "worst.json"],
    &["select", "--pool", "sds.jsonl", "--rule", "stratified", "--n", "5", "--out", "test.json"],
    &["plan", "--grid", "case/grid.json", "--selection", "worst.json", "--out", "plan.json", "--mps", "plan.mps"],
    &["evaluate", "--grid", "case/grid.json", "--plan", "plan.json", "--test-pool", "test.json", "--out", "costs.csv"],
    &["report", "--compare", "sds.jsonl", "smc.jsonl", "--out", "report.csv", "--gnuplot", "report.gp"],
    &["sensitivity", "--n", "300", "--out", "sensitivity.csv"],
    &["lindev", "--cells", "12", "--out", "lindev.csv"],
];

const ARTIFACTS: &[&str] = &[
    "case/grid.json",
    "case/track.csv",
    "case/config.json",
    "sds.jsonl",
    "smc.jsonl",
    "tail.csv",
    "worst.json",
    "test.json",
    "plan.json",
    "plan.mps",
    "costs.csv",
    "report.csv",
    "report.gp",
    "sensitivity.csv",
    "lindev.csv",
];

const MANIFESTS: &[&str] = &[
    "case/manifest.json",
    "sds.jsonl.manifest.json",
    "smc.jsonl.manifest.json",
    "tail.csv.manifest.json",
    "worst.json.manifest.json",
    "test.json.manifest.json",
    "plan.json.manifest.json",
    "costs.csv.manifest.json",
    "report.csv.manifest.json",
    "sensitivity.csv.manifest.json",
    "lindev.csv.manifest.json",
];

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut failures = Vec::new();
    for (dir, workers) in [(a.path(), 1), (b.path(), 4)] {
        for args in PIPELINE {
            let out = sds(dir, workers, args);
            if !out.status.success() {
                failures.push(format!("{} ({workers} workers): {}", args[0], String::from_utf8_lossy(&out.stderr)));
            }
        }
    }
    let differing: Vec<&str> = ARTIFACTS
        .iter()
        .copied()
        .filter(|f| std::fs::read(a.path().join(f)).ok() != std::fs::read(b.path().join(f)).ok())
        .collect();
    let mut replayed = 0;
    for m in MANIFESTS {
        let out = sds(a.path(), 3, &["replay", "--manifest", m]);
        if out.status.success() {
            replayed += 1;
        } else {
            failures.push(format!("replay {m}: {}", String::from_utf8_lossy(&out.stderr).trim()));
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures.is_empty() && differing.is_empty(),
        format!(
            "{} artifacts byte-identical across 1 and 4 workers (differing: {differing:?}); \
             {replayed}/{} manifests replayed byte-identically with 3 workers; {:.1}s{}",
            ARTIFACTS.len() - differing.len(),
            MANIFESTS.len(),
            elapsed.as_secs_f64(),
            if failures.is_empty() { String::new() } else { format!("; errors: {failures:?}") }
        ),
    )
}

fn main() {
    let bundle = make_toy_case("coastal12").unwrap();
    let cfg = SamplerConfig {
        p_threshold: bundle.config.p_threshold,
        min_wind: bundle.config.min_wind,
    };
    let n = bundle.config.pool_size;
    let seed = bundle.config.seed;
    assert_eq!(seed, CANONICAL_SEED);
    let pools = Pools {
        sds: sample_pool_sds(&bundle.grid, &bundle.track, n, seed, &cfg).unwrap(),
        smc: sample_pool_smc(&bundle.grid, &bundle.track, n, seed, &cfg).unwrap(),
        bundle,
    };
    let results: Vec<(usize, Outcome)> = vec![
        (1, criterion_1()),
        (2, criterion_2()),
        (3, criterion_3()),
        (4, criterion_4(&pools)),
        (5, criterion_5(&pools)),
        (6, criterion_6()),
        (7, criterion_7(&pools)),
        (8, criterion_8(&pools)),
        (9, criterion_9()),
    ];
    let mut unexpected = Vec::new();
    for (k, r) in &results {
        let verdict = if r.pass { "PASS" } else { "FAIL" };
        let known = if !r.pass && KNOWN_FAILURES.contains(k) { " [known]" } else { "" };
        println!("criterion {k}: {verdict}{known} {}", r.detail);
        if !r.pass && !KNOWN_FAILURES.contains(k) {
            unexpected.push(*k);
        }
        if r.pass && KNOWN_FAILURES.contains(k) {
            println!("criterion {k}: listed as known failure but passed");
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
