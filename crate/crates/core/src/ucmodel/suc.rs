//! Extensive-form stochastic unit commitment.

use serde::{Deserialize, Serialize};

use crate::grid::GridCase;
use crate::sampler::ScenarioOutage;

use super::backend::{diagnose_infeasibility, BackendKind, BackendOptions, SolveStatus};
use super::milp::{ConstraintClass as C, MilpModel, Sense, VarKind};
use super::UcError;

/// First-stage decisions, indexed `[generator][t]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitmentPlan {
    pub generators: Vec<String>,
    pub u: Vec<Vec<bool>>,
    pub y: Vec<Vec<bool>>,
    pub z: Vec<Vec<bool>>,
}

impl CommitmentPlan {
    pub fn horizon(&self) -> usize {
        self.u.first().map_or(0, Vec::len)
    }

    /// Every unit online for the whole horizon.
    pub fn all_on(grid: &GridCase) -> Self {
        let t = grid.horizon();
        let mut plan = Self {
            generators: grid.generators.iter().map(|g| g.id.clone()).collect(),
            u: vec![vec![true; t]; grid.generators.len()],
            y: vec![vec![false; t]; grid.generators.len()],
            z: vec![vec![false; t]; grid.generators.len()],
        };
        plan.derive_transitions(grid);
        plan
    }

    /// Set start-ups and shut-downs from the on/off schedule.
    pub fn derive_transitions(&mut self, grid: &GridCase) {
        for (g, gen) in grid.generators.iter().enumerate() {
            let mut prev = gen.initial.on;
            for t in 0..self.u[g].len() {
                let cur = self.u[g][t];
                self.y[g][t] = cur && !prev;
                self.z[g][t] = !cur && prev;
                prev = cur;
            }
        }
    }

    pub fn startup_shutdown_cost(&self, grid: &GridCase) -> f64 {
        grid.generators
            .iter()
            .enumerate()
            .map(|(g, gen)| {
                (0..self.horizon())
                    .map(|t| gen.startup_cost * self.y[g][t] as u8 as f64 + gen.shutdown_cost * self.z[g][t] as u8 as f64)
                    .sum::<f64>()
            })
            .sum()
    }

    /// Start/stop linking, exclusivity, minimum up/down times and forced
    /// initial states, checked exactly.
    pub fn check(&self, grid: &GridCase) -> Result<(), UcError> {
        let horizon = grid.horizon();
        let err = |m: String| Err(UcError::PlanInvariant(m));
        if self.u.len() != grid.generators.len() || self.y.len() != self.u.len() || self.z.len() != self.u.len() {
            return err("plan does not cover every generator".into());
        }
        for (g, gen) in grid.generators.iter().enumerate() {
            let (u, y, z) = (&self.u[g], &self.y[g], &self.z[g]);
            if u.len() != horizon || y.len() != horizon || z.len() != horizon {
                return err(format!("generator '{}' does not cover the horizon", gen.id));
            }
            let mut prev = gen.initial.on;
            for t in 0..horizon {
                let lhs = u[t] as i8 - prev as i8;
                if lhs != y[t] as i8 - z[t] as i8 {
                    return err(format!("start/stop identity fails for '{}' at t={t}", gen.id));
                }
                if y[t] && z[t] {
                    return err(format!("'{}' starts and stops at t={t}", gen.id));
                }
                let ups = (t.saturating_sub(gen.min_up - 1)..=t).filter(|&r| y[r]).count();
                if ups > u[t] as usize {
                    return err(format!("minimum up time violated for '{}' at t={t}", gen.id));
                }
                let downs = (t.saturating_sub(gen.min_down - 1)..=t).filter(|&r| z[r]).count();
                if downs > 1 - u[t] as usize {
                    return err(format!("minimum down time violated for '{}' at t={t}", gen.id));
                }
                prev = u[t];
            }
            for (t, forced) in forced_states(gen, horizon).into_iter().enumerate() {
                if forced.is_some_and(|f| f != u[t]) {
                    return err(format!("initial-state carry-over violated for '{}' at t={t}", gen.id));
                }
            }
        }
        Ok(())
    }
}

/// States implied by the unit's history before the horizon.
fn forced_states(gen: &crate::grid::Generator, horizon: usize) -> Vec<Option<bool>> {
    let init = &gen.initial;
    let need = if init.on { gen.min_up } else { gen.min_down };
    let remaining = need.saturating_sub(init.periods_in_state);
    (0..horizon).map(|t| (t < remaining).then_some(init.on)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    /// Load curtailment.
    pub lc: f64,
    /// Start-up and shut-down.
    pub susd: f64,
    /// Generation.
    pub op: f64,
    /// Over-generation.
    pub og: f64,
    pub total: f64,
}

impl CostBreakdown {
    fn finish(mut self) -> Self {
        self.total = self.lc + self.susd + self.op + self.og;
        self
    }
}

/// Second-stage results of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchResult {
    pub scenario: usize,
    /// `[g][t]`
    pub p_gen: Vec<Vec<f64>>,
    pub p_over: Vec<Vec<f64>>,
    /// `[n][t]`
    pub p_demand: Vec<Vec<f64>>,
    pub curtailment: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
    /// `[l][t]`, `None` while the line is out.
    pub flow: Vec<Vec<Option<f64>>>,
    pub cost: CostBreakdown,
}

impl DispatchResult {
    /// Largest bus power-balance residual (MW).
    pub fn max_balance_residual(&self, grid: &GridCase) -> f64 {
        let idx = grid.bus_index();
        let mut worst: f64 = 0.0;
        for t in 0..grid.horizon() {
            let mut net = vec![0.0; grid.buses.len()];
            for (g, gen) in grid.generators.iter().enumerate() {
                net[idx[gen.bus.as_str()]] += self.p_gen[g][t];
            }
            for (l, line) in grid.lines.iter().enumerate() {
                if let Some(f) = self.flow[l][t] {
                    net[idx[line.from.as_str()]] -= f;
                    net[idx[line.to.as_str()]] += f;
                }
            }
            for (n, v) in net.iter().enumerate() {
                worst = worst.max((v - self.p_demand[n][t]).abs());
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub backend: BackendKind,
    pub mip_rel_gap: f64,
    pub time_limit: Option<f64>,
    /// System reserve margin as a fraction of demand (0 disables).
    pub reserve_fraction: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            backend: BackendKind::Highs,
            mip_rel_gap: 1e-9,
            time_limit: None,
            reserve_fraction: 0.0,
        }
    }
}

impl SolveOptions {
    fn backend_options(&self) -> BackendOptions {
        BackendOptions {
            mip_rel_gap: self.mip_rel_gap,
            time_limit: self.time_limit,
        }
    }
}

/// Column indices of the emitted model.
#[derive(Debug, Clone, PartialEq)]
pub struct SucLayout {
    pub n_gen: usize,
    pub n_bus: usize,
    pub n_line: usize,
    pub horizon: usize,
    pub n_scen: usize,
    u: Vec<usize>,
    y: Vec<usize>,
    z: Vec<usize>,
    pg: Vec<usize>,
    pog: Vec<usize>,
    pd: Vec<usize>,
    dpd: Vec<usize>,
    th: Vec<usize>,
    pl: Vec<Option<usize>>,
}

impl SucLayout {
    fn gt(&self, g: usize, t: usize) -> usize {
        g * self.horizon + t
    }
    fn sgt(&self, s: usize, g: usize, t: usize) -> usize {
        (s * self.n_gen + g) * self.horizon + t
    }
    fn snt(&self, s: usize, n: usize, t: usize) -> usize {
        (s * self.n_bus + n) * self.horizon + t
    }
    fn slt(&self, s: usize, l: usize, t: usize) -> usize {
        (s * self.n_line + l) * self.horizon + t
    }

    pub fn u(&self, g: usize, t: usize) -> usize {
        self.u[self.gt(g, t)]
    }

    /// Flow column of an in-service line, `None` while it is out.
    pub fn flow(&self, s: usize, l: usize, t: usize) -> Option<usize> {
        self.pl[self.slt(s, l, t)]
    }
}

fn check_instance(grid: &GridCase, scenarios: &[ScenarioOutage], weights: &[f64]) -> Result<(), UcError> {
    grid.validate()?;
    if scenarios.is_empty() {
        return Err(UcError::Instance("at least one scenario is required".into()));
    }
    if weights.len() != scenarios.len() {
        return Err(UcError::Instance(format!(
            "{} weights for {} scenarios",
            weights.len(),
            scenarios.len()
        )));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(UcError::Instance("weights must be nonnegative and sum to 1".into()));
    }
    for s in scenarios {
        if s.line_fail.len() != grid.lines.len() {
            return Err(UcError::Instance(format!(
                "scenario {} has {} line states, grid has {} lines",
                s.id,
                s.line_fail.len(),
                grid.lines.len()
            )));
        }
    }
    for (i, g) in grid.generators.iter().enumerate() {
        if g.initial.ramp_from_initial && g.initial.output > g.ramp_down {
            return Err(UcError::Instance(format!(
                "generators[{i}]: initial output above ramp-down limit makes shutdown infeasible"
            )));
        }
    }
    Ok(())
}

/// Emit the extensive-form model. With `fixed`, the commitment variables
/// are pinned to the plan, leaving the second-stage dispatch.
pub fn build_suc(
    grid: &GridCase,
    scenarios: &[ScenarioOutage],
    weights: &[f64],
    reserve_fraction: f64,
    fixed: Option<&CommitmentPlan>,
) -> Result<(MilpModel, SucLayout), UcError> {
    check_instance(grid, scenarios, weights)?;
    let horizon = grid.horizon();
    if let Some(p) = fixed {
        if p.u.len() != grid.generators.len() || p.horizon() != horizon {
            return Err(UcError::Instance("plan does not match the grid".into()));
        }
    }
    let bus = grid.bus_index();
    let slack = grid.slack_index();
    let (ng, nb, nl, ns) = (grid.generators.len(), grid.buses.len(), grid.lines.len(), scenarios.len());
    let mut m = MilpModel::new(format!("suc_{}", grid.name));
    let mut lay = SucLayout {
        n_gen: ng,
        n_bus: nb,
        n_line: nl,
        horizon,
        n_scen: ns,
        u: Vec::new(),
        y: Vec::new(),
        z: Vec::new(),
        pg: Vec::new(),
        pog: Vec::new(),
        pd: Vec::new(),
        dpd: Vec::new(),
        th: Vec::new(),
        pl: Vec::new(),
    };

    for (g, gen) in grid.generators.iter().enumerate() {
        let forced = forced_states(gen, horizon);
        for t in 0..horizon {
            let (mut lo, mut hi) = match forced[t] {
                Some(true) => (1.0, 1.0),
                Some(false) => (0.0, 0.0),
                None => (0.0, 1.0),
            };
            let (mut ylo, mut yhi, mut zlo, mut zhi) = (0.0, 1.0, 0.0, 1.0);
            if let Some(p) = fixed {
                lo = p.u[g][t] as u8 as f64;
                hi = lo;
                ylo = p.y[g][t] as u8 as f64;
                yhi = ylo;
                zlo = p.z[g][t] as u8 as f64;
                zhi = zlo;
            }
            let u = m.add_var(format!("uG[{g},{t}]"), lo, hi, 0.0, VarKind::Binary);
            lay.u.push(u);
            m.primary.push(u);
            lay.y.push(m.add_var(format!("yG[{g},{t}]"), ylo, yhi, gen.startup_cost, VarKind::Binary));
            lay.z.push(m.add_var(format!("zG[{g},{t}]"), zlo, zhi, gen.shutdown_cost, VarKind::Binary));
        }
    }
    for (s, scen) in scenarios.iter().enumerate() {
        let w = weights[s];
        for (g, gen) in grid.generators.iter().enumerate() {
            for t in 0..horizon {
                lay.pg
                    .push(m.add_var(format!("pG[{s},{g},{t}]"), 0.0, gen.p_max, w * gen.cost, VarKind::Continuous));
                lay.pog.push(m.add_var(
                    format!("pOG[{s},{g},{t}]"),
                    0.0,
                    gen.p_min,
                    w * gen.over_gen_cost,
                    VarKind::Continuous,
                ));
            }
        }
        for (n, b) in grid.buses.iter().enumerate() {
            for t in 0..horizon {
                let d = b.demand[t];
                lay.pd
                    .push(m.add_var(format!("pD[{s},{n},{t}]"), 0.0, d, 0.0, VarKind::Continuous));
                lay.dpd.push(m.add_var(
                    format!("dpD[{s},{n},{t}]"),
                    0.0,
                    d,
                    w * b.curtailment_cost,
                    VarKind::Continuous,
                ));
                let (lo, hi) = if n == slack { (0.0, 0.0) } else { (b.angle_min, b.angle_max) };
                lay.th
                    .push(m.add_var(format!("th[{s},{n},{t}]"), lo, hi, 0.0, VarKind::Continuous));
            }
        }
        for (l, line) in grid.lines.iter().enumerate() {
            for t in 0..horizon {
                lay.pl.push(scen.in_service(l, t).then(|| {
                    m.add_var(
                        format!("pL[{s},{l},{t}]"),
                        -line.flow_limit,
                        line.flow_limit,
                        0.0,
                        VarKind::Continuous,
                    )
                }));
            }
        }
    }

    for (g, gen) in grid.generators.iter().enumerate() {
        for t in 0..horizon {
            let (u, y, z) = (lay.u[lay.gt(g, t)], lay.y[lay.gt(g, t)], lay.z[lay.gt(g, t)]);
            let mut coeffs = vec![(u, 1.0), (y, -1.0), (z, 1.0)];
            let rhs = if t == 0 {
                gen.initial.on as u8 as f64
            } else {
                coeffs.push((lay.u[lay.gt(g, t - 1)], -1.0));
                0.0
            };
            m.add_con(C::StartStop, format!("link[{g},{t}]"), coeffs, Sense::Eq, rhs);
            m.add_con(C::StartStopExclusive, format!("excl[{g},{t}]"), vec![(y, 1.0), (z, 1.0)], Sense::Le, 1.0);
            let lo_up = t.saturating_sub(gen.min_up - 1);
            let mut up: Vec<_> = (lo_up..=t).map(|r| (lay.y[lay.gt(g, r)], 1.0)).collect();
            up.push((u, -1.0));
            m.add_con(C::MinUp, format!("minup[{g},{t}]"), up, Sense::Le, 0.0);
            let lo_dn = t.saturating_sub(gen.min_down - 1);
            let mut dn: Vec<_> = (lo_dn..=t).map(|r| (lay.z[lay.gt(g, r)], 1.0)).collect();
            dn.push((u, 1.0));
            m.add_con(C::MinDown, format!("mindn[{g},{t}]"), dn, Sense::Le, 1.0);
        }
    }
    if reserve_fraction > 0.0 {
        for t in 0..horizon {
            let coeffs = grid
                .generators
                .iter()
                .enumerate()
                .map(|(g, gen)| (lay.u[lay.gt(g, t)], gen.p_max))
                .collect();
            let need = (1.0 + reserve_fraction) * grid.total_demand(t);
            m.add_con(C::Reserve, format!("resv[{t}]"), coeffs, Sense::Ge, need);
        }
    }
    for s in 0..ns {
        for (g, gen) in grid.generators.iter().enumerate() {
            for t in 0..horizon {
                let u = lay.u[lay.gt(g, t)];
                let pg = lay.pg[lay.sgt(s, g, t)];
                let pog = lay.pog[lay.sgt(s, g, t)];
                m.add_con(
                    C::OutputUpper,
                    format!("pmax[{s},{g},{t}]"),
                    vec![(pg, 1.0), (u, -gen.p_max)],
                    Sense::Le,
                    0.0,
                );
                m.add_con(
                    C::OutputLower,
                    format!("pmin[{s},{g},{t}]"),
                    vec![(pg, 1.0), (pog, 1.0), (u, -gen.p_min)],
                    Sense::Ge,
                    0.0,
                );
                if t > 0 {
                    let prev = lay.pg[lay.sgt(s, g, t - 1)];
                    m.add_con(
                        C::RampUp,
                        format!("rampu[{s},{g},{t}]"),
                        vec![(pg, 1.0), (prev, -1.0)],
                        Sense::Le,
                        gen.ramp_up,
                    );
                    m.add_con(
                        C::RampDown,
                        format!("rampd[{s},{g},{t}]"),
                        vec![(pg, 1.0), (prev, -1.0)],
                        Sense::Ge,
                        -gen.ramp_down,
                    );
                } else if gen.initial.ramp_from_initial {
                    let p0 = gen.initial.output;
                    m.add_con(
                        C::RampUp,
                        format!("rampu[{s},{g},{t}]"),
                        vec![(pg, 1.0)],
                        Sense::Le,
                        p0 + gen.ramp_up,
                    );
                    m.add_con(
                        C::RampDown,
                        format!("rampd[{s},{g},{t}]"),
                        vec![(pg, 1.0)],
                        Sense::Ge,
                        p0 - gen.ramp_down,
                    );
                }
            }
        }
        for (n, b) in grid.buses.iter().enumerate() {
            for t in 0..horizon {
                m.add_con(
                    C::DemandSplit,
                    format!("dsplit[{s},{n},{t}]"),
                    vec![(lay.pd[lay.snt(s, n, t)], 1.0), (lay.dpd[lay.snt(s, n, t)], 1.0)],
                    Sense::Eq,
                    b.demand[t],
                );
            }
        }
        for (l, line) in grid.lines.iter().enumerate() {
            let (f, to) = (bus[line.from.as_str()], bus[line.to.as_str()]);
            for t in 0..horizon {
                if let Some(pl) = lay.pl[lay.slt(s, l, t)] {
                    let k = 1.0 / line.reactance;
                    m.add_con(
                        C::Flow,
                        format!("flow[{s},{l},{t}]"),
                        vec![(pl, 1.0), (lay.th[lay.snt(s, f, t)], -k), (lay.th[lay.snt(s, to, t)], k)],
                        Sense::Eq,
                        0.0,
                    );
                }
            }
        }
        for n in 0..nb {
            for t in 0..horizon {
                let mut coeffs = Vec::new();
                for (g, gen) in grid.generators.iter().enumerate() {
                    if bus[gen.bus.as_str()] == n {
                        coeffs.push((lay.pg[lay.sgt(s, g, t)], 1.0));
                    }
                }
                for (l, line) in grid.lines.iter().enumerate() {
                    if let Some(pl) = lay.pl[lay.slt(s, l, t)] {
                        if bus[line.from.as_str()] == n {
                            coeffs.push((pl, -1.0));
                        }
                        if bus[line.to.as_str()] == n {
                            coeffs.push((pl, 1.0));
                        }
                    }
                }
                coeffs.push((lay.pd[lay.snt(s, n, t)], -1.0));
                m.add_con(C::Balance, format!("bal[{s},{n},{t}]"), coeffs, Sense::Eq, 0.0);
            }
        }
    }
    Ok((m, lay))
}

/// Solution of the extensive form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SucSolution {
    pub plan: CommitmentPlan,
    pub dispatch: Vec<DispatchResult>,
    pub weights: Vec<f64>,
    pub objective: f64,
    pub mip_gap: f64,
    pub status: SolveStatus,
}

impl SucSolution {
    /// Weighted mean of the per-scenario cost breakdowns.
    pub fn expected_cost(&self) -> CostBreakdown {
        let mut exp = CostBreakdown::default();
        for (d, &w) in self.dispatch.iter().zip(&self.weights) {
            exp.lc += w * d.cost.lc;
            exp.susd += w * d.cost.susd;
            exp.op += w * d.cost.op;
            exp.og += w * d.cost.og;
        }
        exp.finish()
    }
}

fn extract(
    grid: &GridCase,
    lay: &SucLayout,
    x: &[f64],
    scenarios: &[ScenarioOutage],
) -> (CommitmentPlan, Vec<DispatchResult>) {
    let (ng, nb, nl, h) = (lay.n_gen, lay.n_bus, lay.n_line, lay.horizon);
    let bin = |col: usize| x[col] > 0.5;
    let plan = CommitmentPlan {
        generators: grid.generators.iter().map(|g| g.id.clone()).collect(),
        u: (0..ng).map(|g| (0..h).map(|t| bin(lay.u[lay.gt(g, t)])).collect()).collect(),
        y: (0..ng).map(|g| (0..h).map(|t| bin(lay.y[lay.gt(g, t)])).collect()).collect(),
        z: (0..ng).map(|g| (0..h).map(|t| bin(lay.z[lay.gt(g, t)])).collect()).collect(),
    };
    let susd = plan.startup_shutdown_cost(grid);
    let dispatch = scenarios
        .iter()
        .enumerate()
        .map(|(s, scen)| {
            let gt = |v: &Vec<usize>| -> Vec<Vec<f64>> {
                (0..ng).map(|g| (0..h).map(|t| x[v[lay.sgt(s, g, t)]]).collect()).collect()
            };
            let nt = |v: &Vec<usize>| -> Vec<Vec<f64>> {
                (0..nb).map(|n| (0..h).map(|t| x[v[lay.snt(s, n, t)]]).collect()).collect()
            };
            let p_gen = gt(&lay.pg);
            let p_over = gt(&lay.pog);
            let curtailment = nt(&lay.dpd);
            let mut cost = CostBreakdown {
                susd,
                ..Default::default()
            };
            for (g, gen) in grid.generators.iter().enumerate() {
                for t in 0..h {
                    cost.op += gen.cost * p_gen[g][t];
                    cost.og += gen.over_gen_cost * p_over[g][t];
                }
            }
            for (n, b) in grid.buses.iter().enumerate() {
                cost.lc += b.curtailment_cost * curtailment[n].iter().sum::<f64>();
            }
            DispatchResult {
                scenario: scen.id,
                p_gen,
                p_over,
                p_demand: nt(&lay.pd),
                curtailment,
                theta: nt(&lay.th),
                flow: (0..nl)
                    .map(|l| (0..h).map(|t| lay.pl[lay.slt(s, l, t)].map(|c| x[c])).collect())
                    .collect(),
                cost: cost.finish(),
            }
        })
        .collect();
    (plan, dispatch)
}

fn run(
    grid: &GridCase,
    scenarios: &[ScenarioOutage],
    weights: &[f64],
    opts: &SolveOptions,
    fixed: Option<&CommitmentPlan>,
) -> Result<SucSolution, UcError> {
    let (model, lay) = build_suc(grid, scenarios, weights, opts.reserve_fraction, fixed)?;
    let backend = opts.backend.instance();
    let bopts = opts.backend_options();
    let sol = match backend.solve(&model, &bopts) {
        Err(UcError::Infeasible { .. }) => return Err(diagnose_infeasibility(backend.as_ref(), &model, &bopts)),
        other => other?,
    };
    let (plan, dispatch) = extract(grid, &lay, &sol.values, scenarios);
    Ok(SucSolution {
        plan,
        dispatch,
        weights: weights.to_vec(),
        objective: sol.objective,
        mip_gap: sol.mip_gap,
        status: sol.status,
    })
}

/// Solve the two-stage model over weighted scenarios.
pub fn solve_suc(
    grid: &GridCase,
    scenarios: &[ScenarioOutage],
    weights: &[f64],
    opts: &SolveOptions,
) -> Result<SucSolution, UcError> {
    let sol = run(grid, scenarios, weights, opts, None)?;
    sol.plan.check(grid)?;
    Ok(sol)
}

/// Economic dispatch of one realized scenario under a fixed commitment.
pub fn dispatch_fixed(
    grid: &GridCase,
    plan: &CommitmentPlan,
    scenario: &ScenarioOutage,
    opts: &SolveOptions,
) -> Result<DispatchResult, UcError> {
    let opts = SolveOptions {
        reserve_fraction: 0.0,
        ..*opts
    };
    match run(grid, std::slice::from_ref(scenario), &[1.0], &opts, Some(plan)) {
        Ok(mut sol) => Ok(sol.dispatch.remove(0)),
        Err(UcError::Infeasible { class }) => Err(UcError::Internal(format!(
            "fixed-commitment dispatch infeasible for scenario {} ({class:?})",
            scenario.id
        ))),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub scenario: usize,
    pub weight: f64,
    pub cost: CostBreakdown,
}

/// Per-scenario costs of a plan and their weighted means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostTable {
    pub rows: Vec<CostRow>,
    pub expected: CostBreakdown,
}

pub const COST_CSV_HEADER: &str = "scenario,weight,lc,susd,op,og,total";

impl CostTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(COST_CSV_HEADER);
        s.push('\n');
        let line = |id: &str, w: f64, c: &CostBreakdown| format!("{id},{w},{},{},{},{},{}\n", c.lc, c.susd, c.op, c.og, c.total);
        for r in &self.rows {
            s.push_str(&line(&r.scenario.to_string(), r.weight, &r.cost));
        }
        s.push_str(&line("expected", 1.0, &self.expected));
        s
    }
}

/// Redispatch every test scenario under `plan`.
pub fn evaluate_plan(
    grid: &GridCase,
    plan: &CommitmentPlan,
    scenarios: &[ScenarioOutage],
    weights: &[f64],
    opts: &SolveOptions,
) -> Result<CostTable, UcError> {
    check_instance(grid, scenarios, weights)?;
    let mut rows = Vec::with_capacity(scenarios.len());
    let mut exp = CostBreakdown::default();
    for (scen, &w) in scenarios.iter().zip(weights) {
        let d = dispatch_fixed(grid, plan, scen, opts)?;
        exp.lc += w * d.cost.lc;
        exp.susd += w * d.cost.susd;
        exp.op += w * d.cost.op;
        exp.og += w * d.cost.og;
        rows.push(CostRow {
            scenario: scen.id,
            weight: w,
            cost: d.cost,
        });
    }
    Ok(CostTable {
        rows,
        expected: exp.finish(),
    })
}
