//! Small commitment instances with at most twelve commitment binaries.

#![allow(dead_code)]

use sds_core::grid::{Generator, GridCase, InitialState};
use sds_core::ingest::make_toy_case;
use sds_core::sampler::ScenarioOutage;

pub struct UcCase {
    pub name: &'static str,
    pub grid: GridCase,
    pub scenarios: Vec<ScenarioOutage>,
    pub weights: Vec<f64>,
}

fn outage(id: usize, line_fail: Vec<Option<usize>>) -> ScenarioOutage {
    ScenarioOutage { id, line_fail }
}

pub fn micro2() -> UcCase {
    UcCase {
        name: "micro2",
        grid: make_toy_case("micro2").unwrap().grid,
        scenarios: vec![outage(0, vec![None]), outage(1, vec![Some(1)])],
        weights: vec![0.6, 0.4],
    }
}

/// Tight tie, longer minimum up time and ramping from the initial output.
pub fn micro2_tight() -> UcCase {
    let mut grid = make_toy_case("micro2").unwrap().grid;
    grid.name = "micro2_tight".into();
    grid.lines[0].flow_limit = 25.0;
    grid.generators[0].ramp_up = 40.0;
    grid.generators[0].ramp_down = 40.0;
    grid.generators[0].initial.ramp_from_initial = true;
    grid.generators[1].min_up = 3;
    UcCase {
        name: "micro2_tight",
        grid,
        scenarios: vec![outage(0, vec![None]), outage(1, vec![Some(2)]), outage(2, vec![Some(0)])],
        weights: vec![0.5, 0.3, 0.2],
    }
}

/// Third, expensive peaker that has only just been switched on.
pub fn micro2_peaker() -> UcCase {
    let mut grid = make_toy_case("micro2").unwrap().grid;
    grid.name = "micro2_peaker".into();
    for d in grid.buses[1].demand.iter_mut() {
        *d += 15.0;
    }
    grid.generators.push(Generator {
        id: "G3".into(),
        bus: "B".into(),
        cost: 90.0,
        startup_cost: 50.0,
        shutdown_cost: 20.0,
        p_max: 30.0,
        p_min: 5.0,
        ramp_up: 30.0,
        ramp_down: 30.0,
        min_up: 2,
        min_down: 1,
        over_gen_cost: 180.0,
        initial: InitialState {
            on: true,
            output: 10.0,
            periods_in_state: 1,
            ramp_from_initial: false,
        },
    });
    UcCase {
        name: "micro2_peaker",
        grid,
        scenarios: vec![outage(0, vec![None]), outage(1, vec![Some(1)])],
        weights: vec![0.75, 0.25],
    }
}

pub fn all() -> Vec<UcCase> {
    vec![micro2(), micro2_tight(), micro2_peaker()]
}
