//! Brute-force commitment oracle for small radial grids.
//!
//! Enumerates every admissible on/off schedule unit by unit and prices each
//! with its own transport-model dispatch LP, independent of the library's
//! model builder.

#![allow(dead_code)]

use highs::{HighsModelStatus, RowProblem, Sense};
use sds_core::grid::{Generator, GridCase};
use sds_core::sampler::ScenarioOutage;

/// Schedules of one unit that respect minimum up/down times, counting the
/// run already in progress before the horizon.
pub fn unit_schedules(gen: &Generator, horizon: usize) -> Vec<Vec<bool>> {
    (0u32..1 << horizon)
        .map(|mask| (0..horizon).map(|t| mask >> t & 1 == 1).collect::<Vec<bool>>())
        .filter(|u| {
            let mut state = gen.initial.on;
            let mut run = gen.initial.periods_in_state;
            for &on in u {
                if on == state {
                    run += 1;
                    continue;
                }
                let need = if state { gen.min_up } else { gen.min_down };
                if run < need {
                    return false;
                }
                state = on;
                run = 1;
            }
            true
        })
        .collect()
}

fn transition_cost(gen: &Generator, u: &[bool]) -> f64 {
    let mut prev = gen.initial.on;
    let mut c = 0.0;
    for &on in u {
        if on && !prev {
            c += gen.startup_cost;
        }
        if !on && prev {
            c += gen.shutdown_cost;
        }
        prev = on;
    }
    c
}

/// Least-cost dispatch of one scenario under fixed schedules, or `None` if
/// infeasible. Flows are free within their limits, which equals DC power
/// flow on a forest whose angle limits cannot bind.
pub fn dispatch_cost(grid: &GridCase, u: &[Vec<bool>], scen: &ScenarioOutage) -> Option<f64> {
    let h = grid.horizon();
    let bus = |id: &str| grid.buses.iter().position(|b| b.id == id).unwrap();
    let mut pb = RowProblem::default();
    let mut gen_at = vec![vec![Vec::new(); h]; grid.buses.len()];
    for (g, gen) in grid.generators.iter().enumerate() {
        let mut prev = None;
        for t in 0..h {
            let on = u[g][t] as u8 as f64;
            let p = pb.add_column(gen.cost, 0.0..=on * gen.p_max);
            let og = pb.add_column(gen.over_gen_cost, 0.0..=gen.p_min);
            pb.add_row(on * gen.p_min.., &[(p, 1.0), (og, 1.0)]);
            match prev {
                Some(q) => pb.add_row(-gen.ramp_down..=gen.ramp_up, &[(p, 1.0), (q, -1.0)]),
                None if gen.initial.ramp_from_initial => pb.add_row(
                    gen.initial.output - gen.ramp_down..=gen.initial.output + gen.ramp_up,
                    &[(p, 1.0)],
                ),
                None => {}
            }
            prev = Some(p);
            gen_at[bus(&gen.bus)][t].push(p);
        }
    }
    let mut net = vec![vec![Vec::new(); h]; grid.buses.len()];
    for (l, line) in grid.lines.iter().enumerate() {
        for t in 0..h {
            if scen.in_service(l, t) {
                let f = pb.add_column(0.0, -line.flow_limit..=line.flow_limit);
                net[bus(&line.from)][t].push((f, -1.0));
                net[bus(&line.to)][t].push((f, 1.0));
            }
        }
    }
    for (n, b) in grid.buses.iter().enumerate() {
        for t in 0..h {
            let shed = pb.add_column(b.curtailment_cost, 0.0..=b.demand[t]);
            let mut row: Vec<_> = gen_at[n][t].iter().map(|&p| (p, 1.0)).collect();
            row.extend(net[n][t].iter().copied());
            row.push((shed, 1.0));
            pb.add_row(b.demand[t]..=b.demand[t], &row);
        }
    }
    let mut model = pb.optimise(Sense::Minimise);
    model.make_quiet();
    let solved = model.solve();
    match solved.status() {
        HighsModelStatus::Optimal => Some(solved.objective_value()),
        HighsModelStatus::ModelEmpty => Some(0.0),
        _ => None,
    }
}

/// Checks the preconditions under which [`dispatch_cost`] is exact.
pub fn assert_radial(grid: &GridCase) {
    assert!(grid.lines.len() < grid.buses.len(), "oracle needs a forest");
    let reach: f64 = grid.lines.iter().map(|l| l.flow_limit * l.reactance).sum();
    let slack = grid.slack_index();
    for (n, b) in grid.buses.iter().enumerate() {
        if n != slack {
            assert!(reach < -b.angle_min && reach < b.angle_max, "angle limits may bind");
        }
    }
}

/// Optimal expected cost over every admissible joint schedule.
pub fn brute_force(grid: &GridCase, scenarios: &[ScenarioOutage], weights: &[f64]) -> (f64, Vec<Vec<bool>>) {
    assert_radial(grid);
    let h = grid.horizon();
    let per_unit: Vec<Vec<Vec<bool>>> = grid.generators.iter().map(|g| unit_schedules(g, h)).collect();
    let mut best = (f64::INFINITY, Vec::new());
    let mut pick = vec![0usize; per_unit.len()];
    loop {
        let u: Vec<Vec<bool>> = pick.iter().zip(&per_unit).map(|(&i, s)| s[i].clone()).collect();
        let fixed: f64 = grid.generators.iter().zip(&u).map(|(g, s)| transition_cost(g, s)).sum();
        let mut total = fixed;
        for (scen, w) in scenarios.iter().zip(weights) {
            match dispatch_cost(grid, &u, scen) {
                Some(c) => total += w * c,
                None => {
                    total = f64::INFINITY;
                    break;
                }
            }
        }
        if total < best.0 {
            best = (total, u);
        }
        let mut k = 0;
        loop {
            if k == pick.len() {
                return best;
            }
            pick[k] += 1;
            if pick[k] < per_unit[k].len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
    }
}
