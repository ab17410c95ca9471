use std::collections::HashMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::analysis::{SelectionRule, WeightedSelection};
use crate::fragility::FragilityParams;
use crate::grid::{Bus, GridCase, Line, Segment};
use crate::sampler::{FailureEvent, SamplerKind, ScenarioOutage, ScenarioPool};
use crate::ucmodel::{CommitmentPlan, CostBreakdown, SolveStatus};
use crate::windfield::{GeoPoint, HurricaneTrack, TrackStep, N_PARAMS};

use super::{read_text, schema, write_text, IngestError, SCHEMA_VERSION};

/// Degrees with nine decimals, so a load/save cycle reproduces the file.
fn deg_out(rad: f64) -> f64 {
    format!("{:.9}", rad.to_degrees()).parse().expect("formatted float")
}

fn check_version(found: u32) -> Result<(), IngestError> {
    if found == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(IngestError::Version {
            found,
            expected: SCHEMA_VERSION,
        })
    }
}

/// Parse JSON, check the version first, then deserialize with field paths.
fn parse_versioned<T: DeserializeOwned>(text: &str, what: &str) -> Result<T, IngestError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| schema(what, e.to_string()))?;
    let version = value
        .get("schema_version")
        .ok_or_else(|| schema(format!("{what}.schema_version"), "missing"))?
        .as_u64()
        .ok_or_else(|| schema(format!("{what}.schema_version"), "not an unsigned integer"))?;
    check_version(version as u32)?;
    serde_path_to_error::deserialize(value).map_err(|e| {
        let p = e.path().to_string();
        schema(format!("{what}.{p}"), e.into_inner().to_string())
    })
}

/// Units every grid file must declare.
pub const GRID_UNITS: [(&str, &str); 4] = [("power", "MW"), ("angle", "deg"), ("cost", "$/MWh"), ("wind_speed", "m/s")];

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    schema_version: u32,
    units: std::collections::BTreeMap<String, String>,
    name: String,
    slack_bus: String,
    buses: Vec<BusRecord>,
    generators: Vec<crate::grid::Generator>,
    lines: Vec<LineRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BusRecord {
    id: String,
    angle_min_deg: f64,
    angle_max_deg: f64,
    demand_mw: Vec<f64>,
    curtailment_cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lat_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lon_deg: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineRecord {
    id: String,
    from: String,
    to: String,
    reactance: f64,
    flow_limit_mw: f64,
    segments: Vec<SegmentRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentRecord {
    id: String,
    lat_deg: f64,
    lon_deg: f64,
    beta: f64,
    w0_ms: f64,
}

pub fn grid_to_json(grid: &GridCase) -> String {
    let file = GridFile {
        schema_version: SCHEMA_VERSION,
        units: GRID_UNITS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        name: grid.name.clone(),
        slack_bus: grid.slack_bus.clone(),
        buses: grid
            .buses
            .iter()
            .map(|b| BusRecord {
                id: b.id.clone(),
                angle_min_deg: deg_out(b.angle_min),
                angle_max_deg: deg_out(b.angle_max),
                demand_mw: b.demand.clone(),
                curtailment_cost: b.curtailment_cost,
                lat_deg: b.location.map(|p| deg_out(p.phi)),
                lon_deg: b.location.map(|p| deg_out(p.lambda)),
            })
            .collect(),
        generators: grid.generators.clone(),
        lines: grid
            .lines
            .iter()
            .map(|l| LineRecord {
                id: l.id.clone(),
                from: l.from.clone(),
                to: l.to.clone(),
                reactance: l.reactance,
                flow_limit_mw: l.flow_limit,
                segments: l
                    .segments
                    .iter()
                    .map(|s| SegmentRecord {
                        id: s.id.clone(),
                        lat_deg: deg_out(s.location.phi),
                        lon_deg: deg_out(s.location.lambda),
                        beta: s.fragility.beta,
                        w0_ms: s.fragility.w0,
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("grid serializes");
    s.push('\n');
    s
}

pub fn grid_from_json(text: &str) -> Result<GridCase, IngestError> {
    let file: GridFile = parse_versioned(text, "grid")?;
    for (key, expected) in GRID_UNITS {
        match file.units.get(key) {
            Some(found) if found == expected => {}
            Some(found) => {
                return Err(IngestError::Unit {
                    field: format!("grid.units.{key}"),
                    found: found.clone(),
                    expected: expected.into(),
                })
            }
            None => return Err(schema(format!("grid.units.{key}"), format!("missing (expected '{expected}')"))),
        }
    }
    let mut buses = Vec::with_capacity(file.buses.len());
    for (i, b) in file.buses.into_iter().enumerate() {
        let location = match (b.lat_deg, b.lon_deg) {
            (Some(lat), Some(lon)) => Some(GeoPoint::from_degrees(lat, lon)),
            (None, None) => None,
            _ => return Err(schema(format!("grid.buses[{i}]"), "lat_deg and lon_deg must be given together")),
        };
        buses.push(Bus {
            id: b.id,
            angle_min: b.angle_min_deg.to_radians(),
            angle_max: b.angle_max_deg.to_radians(),
            demand: b.demand_mw,
            curtailment_cost: b.curtailment_cost,
            location,
        });
    }
    let lines = file
        .lines
        .into_iter()
        .map(|l| Line {
            id: l.id,
            from: l.from,
            to: l.to,
            reactance: l.reactance,
            flow_limit: l.flow_limit_mw,
            segments: l
                .segments
                .into_iter()
                .map(|s| Segment {
                    id: s.id,
                    location: GeoPoint::from_degrees(s.lat_deg, s.lon_deg),
                    fragility: FragilityParams { beta: s.beta, w0: s.w0_ms },
                })
                .collect(),
        })
        .collect();
    let grid = GridCase {
        name: file.name,
        slack_bus: file.slack_bus,
        buses,
        generators: file.generators,
        lines,
    };
    grid.validate().map_err(|e| schema("grid", e.to_string()))?;
    Ok(grid)
}

pub fn load_grid(path: &Path) -> Result<GridCase, IngestError> {
    grid_from_json(&read_text(path)?)
}

pub fn save_grid(path: &Path, grid: &GridCase) -> Result<(), IngestError> {
    write_text(path, &grid_to_json(grid))
}

/// Column order of the track file.
pub const TRACK_COLUMNS: [&str; 15] = [
    "t",
    "pc_hpa",
    "rmax_km",
    "b",
    "lat_deg",
    "lon_deg",
    "speed_ms",
    "heading_deg",
    "sd_pc_hpa",
    "sd_rmax_km",
    "sd_b",
    "sd_lat_deg",
    "sd_lon_deg",
    "sd_speed_ms",
    "sd_heading_deg",
];

/// Parameters stored in degrees in files.
const ANGULAR: [bool; N_PARAMS] = [false, false, false, true, true, false, true];

pub fn track_to_csv(track: &HurricaneTrack) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(TRACK_COLUMNS).expect("in-memory write");
    for (t, step) in track.steps.iter().enumerate() {
        let mut row = vec![t.to_string()];
        for part in [&step.mean, &step.sigma] {
            for (k, v) in part.iter().enumerate() {
                let v = if ANGULAR[k] { deg_out(*v) } else { *v };
                row.push(v.to_string());
            }
        }
        w.write_record(&row).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("flush")).expect("utf-8");
    format!(
        "# schema_version={SCHEMA_VERSION}\n# pn_hpa={}\n# rho_kg_m3={}\n{body}",
        track.pn, track.rho
    )
}

pub fn track_from_csv(text: &str) -> Result<HurricaneTrack, IngestError> {
    let mut meta = HashMap::new();
    let mut body = String::new();
    for (i, line) in text.lines().enumerate() {
        if let Some(rest) = line.strip_prefix('#') {
            let (k, v) = rest
                .trim()
                .split_once('=')
                .ok_or_else(|| schema(format!("track:{}", i + 1), "header lines must be '# key=value'"))?;
            meta.insert(k.trim().to_string(), v.trim().to_string());
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    let num = |key: &str| -> Result<f64, IngestError> {
        meta.get(key)
            .ok_or_else(|| schema(format!("track.{key}"), "missing header"))?
            .parse()
            .map_err(|_| schema(format!("track.{key}"), "not a number"))
    };
    let version: u32 = meta
        .get("schema_version")
        .ok_or_else(|| schema("track.schema_version", "missing header"))?
        .parse()
        .map_err(|_| schema("track.schema_version", "not an integer"))?;
    check_version(version)?;
    let (pn, rho) = (num("pn_hpa")?, num("rho_kg_m3")?);
    let mut r = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    let headers = r.headers().map_err(|e| schema("track.header", e.to_string()))?.clone();
    if headers.iter().ne(TRACK_COLUMNS) {
        return Err(schema(
            "track.header",
            format!("expected columns {}", TRACK_COLUMNS.join(",")),
        ));
    }
    let mut steps = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| schema(format!("track.rows[{row}]"), e.to_string()))?;
        let mut vals = [0.0; 15];
        for (c, field) in rec.iter().enumerate() {
            vals[c] = field
                .trim()
                .parse()
                .map_err(|_| schema(format!("track.rows[{row}].{}", TRACK_COLUMNS[c]), format!("bad number '{field}'")))?;
        }
        if vals[0] != row as f64 {
            return Err(schema(format!("track.rows[{row}].t"), format!("expected t = {row}")));
        }
        let mut mean = [0.0; N_PARAMS];
        let mut sigma = [0.0; N_PARAMS];
        for k in 0..N_PARAMS {
            let conv = |v: f64| if ANGULAR[k] { v.to_radians() } else { v };
            mean[k] = conv(vals[1 + k]);
            sigma[k] = conv(vals[1 + N_PARAMS + k]);
        }
        steps.push(TrackStep { mean, sigma });
    }
    if steps.is_empty() {
        return Err(schema("track.rows", "no timesteps"));
    }
    let track = HurricaneTrack { pn, rho, steps };
    track.validate().map_err(|e| schema("track", e.to_string()))?;
    Ok(track)
}

pub fn load_track(path: &Path) -> Result<HurricaneTrack, IngestError> {
    track_from_csv(&read_text(path)?)
}

pub fn save_track(path: &Path, track: &HurricaneTrack) -> Result<(), IngestError> {
    write_text(path, &track_to_csv(track))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoolHeader {
    schema_version: u32,
    kind: String,
    sampler_kind: SamplerKind,
    seed: u64,
    n: usize,
    horizon: usize,
    track_hash: String,
    lines: Vec<String>,
    segments: Vec<PoolSegment>,
    relevance: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoolSegment {
    id: String,
    line: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoolRecord {
    scenario: usize,
    segment: String,
    line: String,
    t_fail: usize,
}

const POOL_KIND: &str = "scenario_pool";

/// Header line followed by one failure record per line.
pub fn pool_to_jsonl(pool: &ScenarioPool) -> String {
    let header = PoolHeader {
        schema_version: SCHEMA_VERSION,
        kind: POOL_KIND.into(),
        sampler_kind: pool.kind,
        seed: pool.seed,
        n: pool.n_scenarios,
        horizon: pool.horizon,
        track_hash: pool.track_hash.clone(),
        lines: pool.line_ids.clone(),
        segments: pool
            .segment_ids
            .iter()
            .zip(&pool.segment_line)
            .map(|(id, &line)| PoolSegment { id: id.clone(), line })
            .collect(),
        relevance: pool.relevance.clone(),
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for e in &pool.events {
        let rec = PoolRecord {
            scenario: e.scenario,
            segment: pool.segment_ids[e.segment].clone(),
            line: pool.line_ids[pool.segment_line[e.segment]].clone(),
            t_fail: e.t_fail,
        };
        out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn pool_from_jsonl(text: &str) -> Result<ScenarioPool, IngestError> {
    let mut lines = text.lines();
    let head = lines.next().ok_or_else(|| schema("pool", "empty file"))?;
    let h: PoolHeader = parse_versioned(head, "pool.header")?;
    if h.kind != POOL_KIND {
        return Err(schema("pool.header.kind", format!("expected '{POOL_KIND}'")));
    }
    if h.n == 0 {
        return Err(schema("pool.header.n", "must be >= 1"));
    }
    if h.relevance.len() != h.horizon {
        return Err(schema("pool.header.relevance", "one entry per timestep required"));
    }
    let seg_index: HashMap<&str, usize> = h.segments.iter().enumerate().map(|(i, s)| (s.id.as_str(), i)).collect();
    if seg_index.len() != h.segments.len() {
        return Err(schema("pool.header.segments", "duplicate segment id"));
    }
    if let Some(i) = h.segments.iter().position(|s| s.line >= h.lines.len()) {
        return Err(schema(format!("pool.header.segments[{i}].line"), "line index out of range"));
    }
    let mut events: Vec<FailureEvent> = Vec::new();
    for (i, raw) in lines.enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let path = format!("pool.records[{i}]");
        let mut de = serde_json::Deserializer::from_str(raw);
        let rec: PoolRecord = serde_path_to_error::deserialize(&mut de)
            .map_err(|e| schema(format!("{path}.{}", e.path()), e.into_inner().to_string()))?;
        let &seg = seg_index
            .get(rec.segment.as_str())
            .ok_or_else(|| schema(format!("{path}.segment"), format!("unknown segment '{}'", rec.segment)))?;
        if h.lines[h.segments[seg].line] != rec.line {
            return Err(schema(format!("{path}.line"), "does not own the segment"));
        }
        if rec.scenario >= h.n || rec.t_fail >= h.horizon {
            return Err(schema(path, "scenario or t_fail out of range"));
        }
        let ev = FailureEvent {
            scenario: rec.scenario,
            segment: seg,
            t_fail: rec.t_fail,
        };
        if events.last().is_some_and(|p| (p.scenario, p.segment) >= (ev.scenario, ev.segment)) {
            return Err(schema(path, "records must be sorted by (scenario, segment) without repeats"));
        }
        events.push(ev);
    }
    Ok(ScenarioPool {
        kind: h.sampler_kind,
        seed: h.seed,
        n_scenarios: h.n,
        horizon: h.horizon,
        track_hash: h.track_hash,
        line_ids: h.lines,
        segment_line: h.segments.iter().map(|s| s.line).collect(),
        segment_ids: h.segments.into_iter().map(|s| s.id).collect(),
        relevance: h.relevance,
        events,
    })
}

pub fn load_pool(path: &Path) -> Result<ScenarioPool, IngestError> {
    pool_from_jsonl(&read_text(path)?)
}

pub fn save_pool(path: &Path, pool: &ScenarioPool) -> Result<(), IngestError> {
    write_text(path, &pool_to_jsonl(pool))
}

/// Selected scenario with its line outage times embedded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectedScenario {
    pub id: usize,
    pub weight: f64,
    pub line_fail: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionFile {
    pub schema_version: u32,
    pub rule: SelectionRule,
    pub requested: usize,
    pub seed: u64,
    pub pool_hash: String,
    pub sampler_kind: SamplerKind,
    pub horizon: usize,
    pub lines: Vec<String>,
    pub scenarios: Vec<SelectedScenario>,
}

impl SelectionFile {
    pub fn new(sel: &WeightedSelection, pool: &ScenarioPool, pool_hash: String) -> Self {
        let outages = pool.outages();
        Self {
            schema_version: SCHEMA_VERSION,
            rule: sel.rule,
            requested: sel.requested,
            seed: sel.seed,
            pool_hash,
            sampler_kind: pool.kind,
            horizon: pool.horizon,
            lines: pool.line_ids.clone(),
            scenarios: sel
                .scenarios
                .iter()
                .zip(&sel.weights)
                .map(|(&s, &w)| SelectedScenario {
                    id: s,
                    weight: w,
                    line_fail: outages[s].line_fail.clone(),
                })
                .collect(),
        }
    }

    pub fn outages(&self) -> Vec<ScenarioOutage> {
        self.scenarios
            .iter()
            .map(|s| ScenarioOutage {
                id: s.id,
                line_fail: s.line_fail.clone(),
            })
            .collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.scenarios.iter().map(|s| s.weight).collect()
    }

    pub fn selection(&self) -> WeightedSelection {
        WeightedSelection {
            rule: self.rule,
            requested: self.requested,
            seed: self.seed,
            scenarios: self.scenarios.iter().map(|s| s.id).collect(),
            weights: self.weights(),
        }
    }
}

pub fn selection_to_json(sel: &SelectionFile) -> String {
    let mut s = serde_json::to_string_pretty(sel).expect("selection serializes");
    s.push('\n');
    s
}

pub fn selection_from_json(text: &str) -> Result<SelectionFile, IngestError> {
    let sel: SelectionFile = parse_versioned(text, "selection")?;
    if sel.scenarios.is_empty() {
        return Err(schema("selection.scenarios", "empty selection"));
    }
    for (i, s) in sel.scenarios.iter().enumerate() {
        if s.line_fail.len() != sel.lines.len() {
            return Err(schema(format!("selection.scenarios[{i}].line_fail"), "one entry per line required"));
        }
        if s.line_fail.iter().flatten().any(|&t| t >= sel.horizon) {
            return Err(schema(format!("selection.scenarios[{i}].line_fail"), "failure time beyond horizon"));
        }
        if !(s.weight >= 0.0) {
            return Err(schema(format!("selection.scenarios[{i}].weight"), "must be >= 0"));
        }
    }
    let total: f64 = sel.weights().iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(schema("selection.scenarios", format!("weights sum to {total}, expected 1")));
    }
    Ok(sel)
}

pub fn load_selection(path: &Path) -> Result<SelectionFile, IngestError> {
    selection_from_json(&read_text(path)?)
}

pub fn save_selection(path: &Path, sel: &SelectionFile) -> Result<(), IngestError> {
    write_text(path, &selection_to_json(sel))
}

/// Commitment plan with the provenance of its inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    pub schema_version: u32,
    pub grid_hash: String,
    pub selection_hash: String,
    pub objective: f64,
    pub mip_gap: f64,
    pub status: SolveStatus,
    pub expected_cost: CostBreakdown,
    pub plan: CommitmentPlan,
}

pub fn plan_to_json(plan: &PlanFile) -> String {
    let mut s = serde_json::to_string_pretty(plan).expect("plan serializes");
    s.push('\n');
    s
}

pub fn plan_from_json(text: &str) -> Result<PlanFile, IngestError> {
    let p: PlanFile = parse_versioned(text, "plan")?;
    let h = p.plan.horizon();
    let n = p.plan.generators.len();
    for (name, m) in [("u", &p.plan.u), ("y", &p.plan.y), ("z", &p.plan.z)] {
        if m.len() != n || m.iter().any(|row| row.len() != h) {
            return Err(schema(format!("plan.plan.{name}"), "shape must be generators x horizon"));
        }
    }
    Ok(p)
}

pub fn load_plan(path: &Path) -> Result<PlanFile, IngestError> {
    plan_from_json(&read_text(path)?)
}

pub fn save_plan(path: &Path, plan: &PlanFile) -> Result<(), IngestError> {
    write_text(path, &plan_to_json(plan))
}
