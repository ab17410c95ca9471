//! Canned desk-scale cases.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::fragility::FragilityParams;
use crate::analysis::peak_intensity_timestep;
use crate::grid::{span_distance, split_span, Bus, Generator, GridCase, InitialState, Line};
use crate::windfield::{GeoPoint, HurricaneTrack, TrackStep, N_PARAMS};

use super::files::{grid_from_json, grid_to_json, track_from_csv, track_to_csv};
use super::{read_text, schema, write_text, IngestError, SCHEMA_VERSION};

pub const TOY_CASES: [&str; 3] = ["micro2", "ring6", "coastal12"];

/// Experiment settings shipped with a case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleConfig {
    pub schema_version: u32,
    /// Maximum segment length used when the lines were split (km).
    pub segment_km: f64,
    /// Relevance threshold on the predicted per-interval failure probability.
    pub p_threshold: f64,
    /// Predicted wind below this is calm (m/s).
    pub min_wind: f64,
    pub pool_size: usize,
    pub seed: u64,
    /// Scenarios per selection.
    pub selection_n: usize,
    /// Test scenarios drawn across severity deciles.
    pub test_n: usize,
    pub mip_rel_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseBundle {
    pub grid: GridCase,
    pub track: HurricaneTrack,
    pub config: BundleConfig,
}

impl CaseBundle {
    pub fn save(&self, dir: &Path) -> Result<(), IngestError> {
        std::fs::create_dir_all(dir).map_err(|source| IngestError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        write_text(&dir.join("grid.json"), &grid_to_json(&self.grid))?;
        write_text(&dir.join("track.csv"), &track_to_csv(&self.track))?;
        let mut cfg = serde_json::to_string_pretty(&self.config).expect("config serializes");
        cfg.push('\n');
        write_text(&dir.join("config.json"), &cfg)
    }

    pub fn load(dir: &Path) -> Result<Self, IngestError> {
        let grid = grid_from_json(&read_text(&dir.join("grid.json"))?)?;
        let track = track_from_csv(&read_text(&dir.join("track.csv"))?)?;
        let config: BundleConfig = serde_json::from_str(&read_text(&dir.join("config.json"))?)
            .map_err(|e| schema("config", e.to_string()))?;
        if config.schema_version != SCHEMA_VERSION {
            return Err(IngestError::Version {
                found: config.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        if grid.horizon() > track.horizon() {
            return Err(schema("track", "track shorter than the grid horizon"));
        }
        Ok(Self { grid, track, config })
    }
}

pub fn make_toy_case(name: &str) -> Result<CaseBundle, IngestError> {
    match name {
        "micro2" => Ok(micro2()),
        "ring6" => Ok(ring6()),
        "coastal12" => Ok(coastal12()),
        other => Err(IngestError::UnknownCase(other.to_string())),
    }
}

/// Segments whose span passes within the radius of maximum wind of the
/// storm center at the peak-intensity interval.
pub fn segments_within_rmax_at_peak(bundle: &CaseBundle) -> usize {
    let t = peak_intensity_timestep(&bundle.grid, &bundle.track);
    let Ok(p) = bundle.track.params_at(t) else {
        return 0;
    };
    bundle
        .grid
        .segment_spans()
        .into_iter()
        .flatten()
        .filter(|&(a, b)| span_distance(p.center, a, b) <= p.rmax)
        .count()
}

fn config(segment_km: f64) -> BundleConfig {
    BundleConfig {
        schema_version: SCHEMA_VERSION,
        segment_km,
        p_threshold: 1e-4,
        min_wind: 0.1,
        pool_size: 10_000,
        seed: 20_170_825,
        selection_n: 10,
        test_n: 10,
        mip_rel_gap: 1e-3,
    }
}

struct BusSpec {
    id: &'static str,
    lat: f64,
    lon: f64,
    demand: Vec<f64>,
}

fn bus(spec: &BusSpec, curtailment_cost: f64) -> Bus {
    Bus {
        id: spec.id.into(),
        angle_min: -std::f64::consts::FRAC_PI_2,
        angle_max: std::f64::consts::FRAC_PI_2,
        demand: spec.demand.clone(),
        curtailment_cost,
        location: Some(GeoPoint::from_degrees(spec.lat, spec.lon)),
    }
}

#[allow(clippy::too_many_arguments)]
fn unit(
    id: &str,
    bus: &str,
    cost: f64,
    startup: f64,
    p_min: f64,
    p_max: f64,
    ramp: f64,
    min_up: usize,
    min_down: usize,
    initial: InitialState,
) -> Generator {
    Generator {
        id: id.into(),
        bus: bus.into(),
        cost,
        startup_cost: startup,
        shutdown_cost: 0.1 * startup,
        p_max,
        p_min,
        ramp_up: ramp,
        ramp_down: ramp,
        min_up,
        min_down,
        over_gen_cost: 2.0 * cost,
        initial,
    }
}

fn on_since_long(output: f64) -> InitialState {
    InitialState {
        on: true,
        output,
        periods_in_state: 1000,
        ramp_from_initial: false,
    }
}

fn lines_between(
    buses: &[BusSpec],
    spans: &[(&str, &str, &str, f64, f64)],
    segment_km: f64,
    fragility: impl Fn(&str) -> FragilityParams,
) -> Vec<Line> {
    let at = |id: &str| {
        let b = buses.iter().find(|b| b.id == id).expect("known bus");
        GeoPoint::from_degrees(b.lat, b.lon)
    };
    spans
        .iter()
        .map(|&(id, from, to, reactance, limit)| Line {
            id: id.into(),
            from: from.into(),
            to: to.into(),
            reactance,
            flow_limit: limit,
            segments: split_span(id, at(from), at(to), segment_km, fragility(id)),
        })
        .collect()
}

/// Track moving along `heading_deg` at constant speed, starting at `start`.
/// Constant-heading track; Rmax (km) and B are held fixed.
fn straight_track(
    start: (f64, f64),
    heading_deg: f64,
    speed: f64,
    rmax: f64,
    pc: &[f64],
    sd: [f64; N_PARAMS],
) -> HurricaneTrack {
    let dt_s = 10_800.0;
    let step_km = speed * dt_s / 1000.0;
    let mut pos = GeoPoint::from_degrees(start.0, start.1);
    let h = heading_deg.to_radians();
    let steps = pc
        .iter()
        .map(|&p| {
            let c = GeoPoint::from_degrees(
                (pos.lat_deg() * 1e4).round() / 1e4,
                (pos.lon_deg() * 1e4).round() / 1e4,
            );
            pos = pos.offset_km(step_km * h.sin(), step_km * h.cos());
            TrackStep {
                mean: [p, rmax, 1.3, c.phi, c.lambda, speed, h],
                sigma: sd,
            }
        })
        .collect();
    HurricaneTrack {
        pn: 1013.0,
        rho: 1.15,
        steps,
    }
}

fn micro2() -> CaseBundle {
    let buses = [
        BusSpec {
            id: "A",
            lat: 29.6,
            lon: -95.4,
            demand: vec![10.0, 10.0, 10.0, 10.0],
        },
        BusSpec {
            id: "B",
            lat: 29.2,
            lon: -95.1,
            demand: vec![40.0, 70.0, 90.0, 50.0],
        },
    ];
    let fp = FragilityParams { beta: 0.15, w0: 45.0 };
    let lines = lines_between(&buses, &[("AB", "A", "B", 0.002, 60.0)], 20.0, |_| fp);
    let grid = GridCase {
        name: "micro2".into(),
        slack_bus: "A".into(),
        buses: buses.iter().map(|b| bus(b, 500.0)).collect(),
        generators: vec![
            unit("G1", "A", 20.0, 300.0, 20.0, 100.0, 60.0, 2, 2, on_since_long(30.0)),
            unit("G2", "B", 60.0, 150.0, 10.0, 50.0, 50.0, 2, 2, InitialState::default()),
        ],
        lines,
    };
    let sd = [8.0, 3.0, 0.05, 0.05f64.to_radians(), 0.05f64.to_radians(), 0.5, 3f64.to_radians()];
    let track = straight_track((28.2, -94.7), -20.0, 5.0, 40.0, &[965.0, 962.0, 965.0, 975.0], sd);
    CaseBundle {
        grid,
        track,
        config: config(20.0),
    }
}

/// Ring lines whose joint loss islands bus R4.
pub const RING6_CUT: [&str; 2] = ["R34", "R45"];

fn ring6() -> CaseBundle {
    let d = |base: f64| vec![base, 1.2 * base, 1.3 * base, 1.1 * base];
    let buses = [
        BusSpec { id: "R1", lat: 29.8, lon: -95.6, demand: d(30.0) },
        BusSpec { id: "R2", lat: 29.8, lon: -95.0, demand: d(40.0) },
        BusSpec { id: "R3", lat: 29.4, lon: -94.8, demand: d(35.0) },
        BusSpec { id: "R4", lat: 29.0, lon: -95.0, demand: d(50.0) },
        BusSpec { id: "R5", lat: 29.0, lon: -95.6, demand: d(30.0) },
        BusSpec { id: "R6", lat: 29.4, lon: -95.8, demand: d(25.0) },
    ];
    let spans = [
        ("R12", "R1", "R2", 0.002, 120.0),
        ("R23", "R2", "R3", 0.002, 120.0),
        ("R34", "R3", "R4", 0.002, 120.0),
        ("R45", "R4", "R5", 0.002, 120.0),
        ("R56", "R5", "R6", 0.002, 120.0),
        ("R61", "R6", "R1", 0.002, 120.0),
    ];
    let fp = FragilityParams { beta: 0.15, w0: 48.0 };
    let grid = GridCase {
        name: "ring6".into(),
        slack_bus: "R1".into(),
        buses: buses.iter().map(|b| bus(b, 1000.0)).collect(),
        generators: vec![
            unit("G1", "R1", 20.0, 500.0, 50.0, 200.0, 100.0, 2, 2, on_since_long(120.0)),
            unit("G2", "R2", 30.0, 300.0, 20.0, 100.0, 60.0, 2, 2, InitialState::default()),
            unit("G4", "R4", 70.0, 200.0, 10.0, 60.0, 60.0, 2, 1, InitialState::default()),
        ],
        lines: lines_between(&buses, &spans, 20.0, |_| fp),
    };
    let sd = [10.0, 3.0, 0.05, 0.05f64.to_radians(), 0.05f64.to_radians(), 0.5, 3f64.to_radians()];
    let track = straight_track((28.3, -94.6), -25.0, 5.0, 40.0, &[962.0, 960.0, 963.0, 972.0], sd);
    CaseBundle {
        grid,
        track,
        config: config(20.0),
    }
}

fn coastal12() -> CaseBundle {
    let profile = [0.85, 0.9, 0.95, 1.0, 1.0, 0.95, 0.9, 0.85];
    let d = |base: f64| profile.iter().map(|f| base * f).collect::<Vec<_>>();
    let buses = [
        BusSpec { id: "C1", lat: 28.65, lon: -96.90, demand: d(50.0) },
        BusSpec { id: "C2", lat: 28.70, lon: -96.55, demand: d(55.0) },
        BusSpec { id: "C3", lat: 28.80, lon: -96.20, demand: d(60.0) },
        BusSpec { id: "C4", lat: 28.90, lon: -95.85, demand: d(60.0) },
        BusSpec { id: "C5", lat: 29.00, lon: -95.50, demand: d(45.0) },
        BusSpec { id: "C6", lat: 29.10, lon: -95.15, demand: d(40.0) },
        BusSpec { id: "I1", lat: 29.25, lon: -97.05, demand: d(90.0) },
        BusSpec { id: "I2", lat: 29.30, lon: -96.65, demand: d(100.0) },
        BusSpec { id: "I3", lat: 29.40, lon: -96.25, demand: d(110.0) },
        BusSpec { id: "I4", lat: 29.50, lon: -95.85, demand: d(110.0) },
        BusSpec { id: "I5", lat: 29.60, lon: -95.45, demand: d(100.0) },
        BusSpec { id: "I6", lat: 29.70, lon: -95.05, demand: d(90.0) },
    ];
    let spans = [
        ("C1C2", "C1", "C2", 0.002, 120.0),
        ("C2C3", "C2", "C3", 0.002, 120.0),
        ("C3C4", "C3", "C4", 0.002, 120.0),
        ("C4C5", "C4", "C5", 0.002, 120.0),
        ("C5C6", "C5", "C6", 0.002, 120.0),
        ("T1", "I1", "C1", 0.002, 100.0),
        ("T2", "I2", "C2", 0.002, 100.0),
        ("T3", "I3", "C3", 0.002, 100.0),
        ("T4", "I4", "C4", 0.002, 100.0),
        ("T6", "I6", "C6", 0.002, 100.0),
        ("I1I2", "I1", "I2", 0.001, 400.0),
        ("I2I3", "I2", "I3", 0.001, 400.0),
        ("I3I4", "I3", "I4", 0.001, 400.0),
        ("I4I5", "I4", "I5", 0.001, 400.0),
        ("I5I6", "I5", "I6", 0.001, 400.0),
        ("I2I5", "I2", "I5", 0.001, 400.0),
    ];
    // Ties are the weakest links, inland lines the sturdiest.
    let fragility = |id: &str| {
        let w0 = match id.as_bytes()[0] {
            b'T' => 51.0,
            b'C' => 59.0,
            _ => 66.0,
        };
        FragilityParams { beta: 0.1, w0 }
    };
    let grid = GridCase {
        name: "coastal12".into(),
        slack_bus: "I3".into(),
        buses: buses.iter().map(|b| bus(b, 2000.0)).collect(),
        generators: vec![
            unit("GI2", "I2", 20.0, 5000.0, 150.0, 500.0, 250.0, 4, 4, on_since_long(300.0)),
            unit("GI5", "I5", 22.0, 5000.0, 150.0, 500.0, 250.0, 4, 4, on_since_long(300.0)),
            unit("GC2", "C2", 70.0, 1500.0, 30.0, 80.0, 80.0, 3, 2, InitialState::default()),
            unit("GC3", "C3", 75.0, 1500.0, 30.0, 80.0, 80.0, 3, 2, InitialState::default()),
            unit("GC4", "C4", 80.0, 1500.0, 30.0, 80.0, 80.0, 3, 2, InitialState::default()),
        ],
        lines: lines_between(&buses, &spans, 100.0, fragility),
    };
    let sd = [12.0, 3.0, 0.05, 0.05f64.to_radians(), 0.05f64.to_radians(), 0.5, 3f64.to_radians()];
    let pc = [962.0, 958.0, 955.0, 955.0, 960.0, 970.0, 982.0, 995.0];
    let track = straight_track((27.3, -95.3), -30.0, 5.0, 45.0, &pc, sd);
    let bundle = CaseBundle {
        grid,
        track,
        config: config(100.0),
    };
    debug_assert!(segments_within_rmax_at_peak(&bundle) >= 4);
    bundle
}
