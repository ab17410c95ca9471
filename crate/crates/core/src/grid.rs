//! Transmission grid case: buses, generators and geolocated line segments.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fragility::FragilityParams;
use crate::windfield::{haversine_distance, GeoPoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("duplicate {kind} id '{id}'")]
    DuplicateId { kind: &'static str, id: String },
    #[error("{path}: unknown {kind} '{id}'")]
    UnknownReference {
        path: String,
        kind: &'static str,
        id: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("grid is not connected: bus '{0}' unreachable from the slack bus")]
    Disconnected(String),
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> GridError {
    GridError::Invalid {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: String,
    /// Phase-angle bounds (rad).
    pub angle_min: f64,
    pub angle_max: f64,
    /// Demand per timestep (MW).
    pub demand: Vec<f64>,
    /// Load-curtailment penalty ($/MWh).
    pub curtailment_cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<GeoPoint>,
}

/// Unit state before the first interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialState {
    pub on: bool,
    /// Output in the interval before the horizon (MW).
    pub output: f64,
    /// Consecutive intervals already spent in the current on/off state.
    pub periods_in_state: usize,
    /// Apply the ramp limits between the initial output and the first interval.
    pub ramp_from_initial: bool,
}

impl Default for InitialState {
    fn default() -> Self {
        Self {
            on: false,
            output: 0.0,
            periods_in_state: 1000,
            ramp_from_initial: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub id: String,
    pub bus: String,
    /// Linear generation cost ($/MWh).
    pub cost: f64,
    pub startup_cost: f64,
    pub shutdown_cost: f64,
    pub p_max: f64,
    pub p_min: f64,
    /// Ramp limits as positive magnitudes (MW per interval).
    pub ramp_up: f64,
    pub ramp_down: f64,
    /// Minimum up/down time (intervals).
    pub min_up: usize,
    pub min_down: usize,
    /// Penalty on operation below `p_min` while committed ($/MWh).
    pub over_gen_cost: f64,
    #[serde(default)]
    pub initial: InitialState,
}

/// Fragile piece of a line with its own location and fragility curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub id: String,
    pub location: GeoPoint,
    pub fragility: FragilityParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub id: String,
    pub from: String,
    pub to: String,
    /// Series reactance (p.u. on the MW base, flow = Δθ / x).
    pub reactance: f64,
    /// Thermal limit (MW).
    pub flow_limit: f64,
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCase {
    pub name: String,
    pub slack_bus: String,
    pub buses: Vec<Bus>,
    pub generators: Vec<Generator>,
    pub lines: Vec<Line>,
}

/// Flat segment reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentRef<'a> {
    pub index: usize,
    pub line: usize,
    pub segment: &'a Segment,
}

impl GridCase {
    pub fn horizon(&self) -> usize {
        self.buses.first().map_or(0, |b| b.demand.len())
    }

    pub fn bus_index(&self) -> HashMap<&str, usize> {
        self.buses.iter().enumerate().map(|(i, b)| (b.id.as_str(), i)).collect()
    }

    pub fn slack_index(&self) -> usize {
        self.buses.iter().position(|b| b.id == self.slack_bus).unwrap_or(0)
    }

    /// Every segment with its global index and owning line.
    pub fn segments(&self) -> impl Iterator<Item = SegmentRef<'_>> {
        self.lines
            .iter()
            .enumerate()
            .flat_map(|(l, line)| line.segments.iter().map(move |s| (l, s)))
            .enumerate()
            .map(|(index, (line, segment))| SegmentRef { index, line, segment })
    }

    pub fn segment_count(&self) -> usize {
        self.lines.iter().map(|l| l.segments.len()).sum()
    }

    /// Owning line of each global segment index.
    pub fn segment_lines(&self) -> Vec<usize> {
        self.segments().map(|s| s.line).collect()
    }

    pub fn segment_ids(&self) -> Vec<String> {
        self.segments().map(|s| s.segment.id.clone()).collect()
    }

    /// End points of the stretch of line each segment covers, assuming the
    /// segments split the straight bus-to-bus span evenly. `None` where a
    /// terminal bus has no location.
    pub fn segment_spans(&self) -> Vec<Option<(GeoPoint, GeoPoint)>> {
        let idx = self.bus_index();
        let loc = |id: &str| idx.get(id).and_then(|&i| self.buses[i].location);
        let mut out = Vec::with_capacity(self.segment_count());
        for line in &self.lines {
            let ends = loc(&line.from).zip(loc(&line.to));
            let n = line.segments.len() as f64;
            for k in 0..line.segments.len() {
                out.push(ends.map(|(a, b)| {
                    let at = |f: f64| GeoPoint {
                        phi: a.phi + f * (b.phi - a.phi),
                        lambda: a.lambda + f * (b.lambda - a.lambda),
                    };
                    (at(k as f64 / n), at((k + 1) as f64 / n))
                }));
            }
        }
        out
    }

    pub fn total_demand(&self, t: usize) -> f64 {
        self.buses.iter().map(|b| b.demand[t]).sum()
    }

    pub fn total_capacity(&self) -> f64 {
        self.generators.iter().map(|g| g.p_max).sum()
    }

    /// Buses reachable from the slack bus when the given lines are out.
    pub fn reachable_without(&self, out: &[usize]) -> Vec<bool> {
        let idx = self.bus_index();
        let out: HashSet<usize> = out.iter().copied().collect();
        let mut adj = vec![Vec::new(); self.buses.len()];
        for (l, line) in self.lines.iter().enumerate() {
            if out.contains(&l) {
                continue;
            }
            if let (Some(&a), Some(&b)) = (idx.get(line.from.as_str()), idx.get(line.to.as_str())) {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        let mut seen = vec![false; self.buses.len()];
        if self.buses.is_empty() {
            return seen;
        }
        let start = self.slack_index();
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(b) = queue.pop_front() {
            for &n in &adj[b] {
                if !seen[n] {
                    seen[n] = true;
                    queue.push_back(n);
                }
            }
        }
        seen
    }

    pub fn is_connected_without(&self, out: &[usize]) -> bool {
        self.reachable_without(out).iter().all(|&r| r)
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if self.buses.is_empty() {
            return Err(invalid("buses", "at least one bus is required"));
        }
        let horizon = self.horizon();
        if horizon == 0 {
            return Err(invalid("buses[0].demand", "empty demand profile"));
        }
        let mut seen = HashSet::new();
        for (i, b) in self.buses.iter().enumerate() {
            if !seen.insert(b.id.as_str()) {
                return Err(GridError::DuplicateId { kind: "bus", id: b.id.clone() });
            }
            let path = format!("buses[{i}]");
            if b.demand.len() != horizon {
                return Err(invalid(
                    format!("{path}.demand"),
                    format!("length {} differs from horizon {horizon}", b.demand.len()),
                ));
            }
            if b.demand.iter().any(|d| !(*d >= 0.0) || !d.is_finite()) {
                return Err(invalid(format!("{path}.demand"), "demand must be finite and >= 0"));
            }
            if !(b.angle_min < b.angle_max) || !(b.angle_min <= 0.0 && b.angle_max >= 0.0) {
                return Err(invalid(format!("{path}.angle"), "need angle_min < 0 < angle_max"));
            }
            if !(b.curtailment_cost > 0.0) {
                return Err(invalid(format!("{path}.curtailment_cost"), "must be > 0"));
            }
            if let Some(p) = b.location {
                p.validate().map_err(|e| invalid(format!("{path}.location"), e.to_string()))?;
            }
        }
        let buses = self.bus_index();
        if !buses.contains_key(self.slack_bus.as_str()) {
            return Err(GridError::UnknownReference {
                path: "slack_bus".into(),
                kind: "bus",
                id: self.slack_bus.clone(),
            });
        }
        let mut gen_ids = HashSet::new();
        for (i, g) in self.generators.iter().enumerate() {
            if !gen_ids.insert(g.id.as_str()) {
                return Err(GridError::DuplicateId { kind: "generator", id: g.id.clone() });
            }
            let path = format!("generators[{i}]");
            if !buses.contains_key(g.bus.as_str()) {
                return Err(GridError::UnknownReference {
                    path: format!("{path}.bus"),
                    kind: "bus",
                    id: g.bus.clone(),
                });
            }
            if !(g.p_max > 0.0) || !(g.p_min >= 0.0) || g.p_min > g.p_max {
                return Err(invalid(format!("{path}.p_min/p_max"), "need 0 <= p_min <= p_max, p_max > 0"));
            }
            if !(g.ramp_up > 0.0 && g.ramp_down > 0.0) {
                return Err(invalid(format!("{path}.ramp"), "ramp limits must be positive magnitudes"));
            }
            if g.min_up == 0 || g.min_down == 0 {
                return Err(invalid(format!("{path}.min_up/min_down"), "must be >= 1"));
            }
            for (name, v) in [
                ("cost", g.cost),
                ("startup_cost", g.startup_cost),
                ("shutdown_cost", g.shutdown_cost),
                ("over_gen_cost", g.over_gen_cost),
            ] {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(invalid(format!("{path}.{name}"), "must be finite and >= 0"));
                }
            }
            if !(g.initial.output >= 0.0) || (!g.initial.on && g.initial.output != 0.0) {
                return Err(invalid(format!("{path}.initial.output"), "offline units have zero output"));
            }
        }
        let mut line_ids = HashSet::new();
        let mut seg_ids = HashSet::new();
        for (i, l) in self.lines.iter().enumerate() {
            if !line_ids.insert(l.id.as_str()) {
                return Err(GridError::DuplicateId { kind: "line", id: l.id.clone() });
            }
            let path = format!("lines[{i}]");
            for (end, id) in [("from", &l.from), ("to", &l.to)] {
                if !buses.contains_key(id.as_str()) {
                    return Err(GridError::UnknownReference {
                        path: format!("{path}.{end}"),
                        kind: "bus",
                        id: id.clone(),
                    });
                }
            }
            if l.from == l.to {
                return Err(invalid(format!("{path}"), "from and to buses must differ"));
            }
            if !(l.reactance > 0.0) || !(l.flow_limit > 0.0) {
                return Err(invalid(format!("{path}"), "reactance and flow_limit must be > 0"));
            }
            if l.segments.is_empty() {
                return Err(invalid(format!("{path}.segments"), "at least one segment is required"));
            }
            for (j, s) in l.segments.iter().enumerate() {
                if !seg_ids.insert(s.id.as_str()) {
                    return Err(GridError::DuplicateId { kind: "segment", id: s.id.clone() });
                }
                let spath = format!("{path}.segments[{j}]");
                s.location
                    .validate()
                    .map_err(|e| invalid(format!("{spath}.location"), e.to_string()))?;
                s.fragility
                    .validate()
                    .map_err(|e| invalid(format!("{spath}.fragility"), e.to_string()))?;
            }
        }
        let reach = self.reachable_without(&[]);
        if let Some(i) = reach.iter().position(|r| !r) {
            return Err(GridError::Disconnected(self.buses[i].id.clone()));
        }
        Ok(())
    }
}

/// Split the straight span `from → to` into equal segments no longer than
/// `max_km`, each located at its midpoint.
pub fn split_span(
    line_id: &str,
    from: GeoPoint,
    to: GeoPoint,
    max_km: f64,
    fragility: FragilityParams,
) -> Vec<Segment> {
    let length = haversine_distance(from, to);
    let count = ((length / max_km).ceil() as usize).max(1);
    (0..count)
        .map(|k| {
            let f = (k as f64 + 0.5) / count as f64;
            Segment {
                id: format!("{line_id}/s{k}"),
                location: GeoPoint {
                    phi: from.phi + f * (to.phi - from.phi),
                    lambda: from.lambda + f * (to.lambda - from.lambda),
                },
                fragility,
            }
        })
        .collect()
}

/// Shortest distance (km) from `p` to the straight span `a`–`b`, found by
/// dense sampling along the span.
pub fn span_distance(p: GeoPoint, a: GeoPoint, b: GeoPoint) -> f64 {
    const STEPS: usize = 256;
    (0..=STEPS)
        .map(|k| {
            let f = k as f64 / STEPS as f64;
            let q = GeoPoint {
                phi: a.phi + f * (b.phi - a.phi),
                lambda: a.lambda + f * (b.lambda - a.lambda),
            };
            haversine_distance(p, q)
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_split_respects_length() {
        let a = GeoPoint::from_degrees(29.0, -95.0);
        let b = GeoPoint::from_degrees(29.0, -94.0);
        let fp = FragilityParams::new(0.2, 50.0).unwrap();
        let segs = split_span("L1", a, b, 20.0, fp);
        let total = haversine_distance(a, b);
        assert_eq!(segs.len(), (total / 20.0).ceil() as usize);
        assert_eq!(segs[0].id, "L1/s0");
        assert_eq!(split_span("L2", a, a, 20.0, fp).len(), 1);
    }

    #[test]
    fn span_distance_hits_interior_and_ends() {
        let a = GeoPoint::from_degrees(0.0, 0.0);
        let b = GeoPoint::from_degrees(0.0, 1.0);
        let mid_north = GeoPoint::from_degrees(0.1, 0.5);
        let expect = haversine_distance(mid_north, GeoPoint::from_degrees(0.0, 0.5));
        assert!((span_distance(mid_north, a, b) - expect).abs() < 1e-6);
        let west = GeoPoint::from_degrees(0.0, -0.2);
        assert!((span_distance(west, a, b) - haversine_distance(west, a)).abs() < 1e-9);
    }
}
