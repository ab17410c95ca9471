//! Holland parametric wind field.
//!
//! All angles are radians internally, pressures are hPa, distances km and
//! speeds m/s. The parameter vector used for sensitivities has a fixed order,
//! see [`HollandParam`].

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mean Earth radius used by the haversine distance.
pub const EARTH_RADIUS_KM: f64 = 6371.0;
/// Earth rotation rate (rad/s).
pub const EARTH_ROTATION: f64 = 7.292e-5;
/// Number of uncertain Holland parameters.
pub const N_PARAMS: usize = 7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WindError {
    #[error("target coincides with the storm center")]
    DegenerateGeometry,
    #[error("distance must be positive, got {0} km")]
    NonPositiveDistance(f64),
    #[error("wind speed at target is {0} m/s, sensitivities are undefined")]
    ZeroWind(f64),
    #[error("linear predictor is zero, linearity deviation is undefined")]
    ZeroLinearPredictor,
    #[error("invalid Holland parameters: {0}")]
    InvalidParams(String),
    #[error("invalid geographic point: {0}")]
    InvalidPoint(String),
    #[error("track has {len} timesteps, requested t={t}")]
    TimestepOutOfRange { t: usize, len: usize },
}

/// Latitude/longitude in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub phi: f64,
    pub lambda: f64,
}

impl GeoPoint {
    pub fn new(phi: f64, lambda: f64) -> Result<Self, WindError> {
        let p = Self { phi, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn from_degrees(lat: f64, lon: f64) -> Self {
        Self {
            phi: lat.to_radians(),
            lambda: lon.to_radians(),
        }
    }

    pub fn lat_deg(&self) -> f64 {
        self.phi.to_degrees()
    }

    pub fn lon_deg(&self) -> f64 {
        self.lambda.to_degrees()
    }

    pub fn validate(&self) -> Result<(), WindError> {
        if !self.phi.is_finite() || self.phi.abs() > FRAC_PI_2 {
            return Err(WindError::InvalidPoint(format!("latitude {} rad", self.phi)));
        }
        if !self.lambda.is_finite() || self.lambda.abs() > PI {
            return Err(WindError::InvalidPoint(format!("longitude {} rad", self.lambda)));
        }
        Ok(())
    }

    /// Point displaced by local east/north offsets (km) on a flat tangent plane.
    pub fn offset_km(&self, east_km: f64, north_km: f64) -> Self {
        Self {
            phi: self.phi + north_km / EARTH_RADIUS_KM,
            lambda: self.lambda + east_km / (EARTH_RADIUS_KM * self.phi.cos()),
        }
    }
}

/// Index of each uncertain parameter in the sensitivity vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HollandParam {
    CentralPressure,
    RadiusMaxWind,
    Shape,
    CenterLat,
    CenterLon,
    TranslationSpeed,
    Heading,
}

impl HollandParam {
    pub const ALL: [HollandParam; N_PARAMS] = [
        HollandParam::CentralPressure,
        HollandParam::RadiusMaxWind,
        HollandParam::Shape,
        HollandParam::CenterLat,
        HollandParam::CenterLon,
        HollandParam::TranslationSpeed,
        HollandParam::Heading,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            HollandParam::CentralPressure => "pc",
            HollandParam::RadiusMaxWind => "rmax",
            HollandParam::Shape => "b",
            HollandParam::CenterLat => "lat",
            HollandParam::CenterLon => "lon",
            HollandParam::TranslationSpeed => "speed",
            HollandParam::Heading => "heading",
        }
    }

    /// Absolute floor on the finite-difference step, in internal units.
    fn step_floor(self) -> f64 {
        match self {
            HollandParam::CentralPressure => 0.01,
            HollandParam::RadiusMaxWind => 0.01,
            HollandParam::Shape => 1e-4,
            HollandParam::CenterLat => 1e-6,
            HollandParam::CenterLon => 1e-6,
            HollandParam::TranslationSpeed => 1e-3,
            HollandParam::Heading => 1e-4,
        }
    }
}

/// Holland model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HollandParams {
    /// Central pressure (hPa).
    pub pc: f64,
    /// Radius of maximum wind (km).
    pub rmax: f64,
    /// Holland shape parameter.
    pub b: f64,
    pub center: GeoPoint,
    /// Translation speed (m/s).
    pub speed: f64,
    /// Heading, clockwise from north (rad).
    pub heading: f64,
    /// Environmental pressure (hPa).
    pub pn: f64,
    /// Air density (kg/m³).
    pub rho: f64,
}

impl HollandParams {
    /// Intense Gulf hurricane used for the linearization diagnostic.
    ///
    /// `pn` and `rho` are not part of the uncertain vector; 1020 hPa and
    /// 1.15 kg/m³ put the peak surface wind on a 500 km mesh near 47 m/s.
    pub fn reference_hurricane() -> Self {
        Self {
            pc: 975.0,
            rmax: 50.0,
            b: 1.3,
            center: GeoPoint::from_degrees(22.3, -96.0),
            speed: 5.0,
            heading: (-30.0f64).to_radians(),
            pn: 1020.0,
            rho: 1.15,
        }
    }

    pub fn validate(&self) -> Result<(), WindError> {
        let bad = |m: String| Err(WindError::InvalidParams(m));
        if !(self.pn >= self.pc) {
            return bad(format!("pn {} must be >= pc {}", self.pn, self.pc));
        }
        if !(self.rmax > 0.0) {
            return bad(format!("rmax {} must be > 0", self.rmax));
        }
        if !(self.b > 0.0) {
            return bad(format!("b {} must be > 0", self.b));
        }
        if !(self.rho > 0.0) {
            return bad(format!("rho {} must be > 0", self.rho));
        }
        if !(self.speed >= 0.0) || !self.heading.is_finite() {
            return bad(format!("translation ({}, {})", self.speed, self.heading));
        }
        self.center.validate()
    }

    pub fn vector(&self) -> [f64; N_PARAMS] {
        [
            self.pc,
            self.rmax,
            self.b,
            self.center.phi,
            self.center.lambda,
            self.speed,
            self.heading,
        ]
    }

    pub fn with_vector(&self, v: &[f64; N_PARAMS]) -> Self {
        Self {
            pc: v[0],
            rmax: v[1],
            b: v[2],
            center: GeoPoint {
                phi: v[3],
                lambda: v[4],
            },
            speed: v[5],
            heading: v[6],
            pn: self.pn,
            rho: self.rho,
        }
    }

    fn perturbed(&self, k: usize, delta: f64) -> Self {
        let mut v = self.vector();
        v[k] += delta;
        self.with_vector(&v)
    }
}

/// Standard errors of the uncertain parameters, in [`HollandParam`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamUncertainty {
    pub sigma: Vec<f64>,
}

impl ParamUncertainty {
    pub fn new(sigma: Vec<f64>) -> Result<Self, WindError> {
        if sigma.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(WindError::InvalidParams(format!(
                "standard errors must be finite and >= 0: {sigma:?}"
            )));
        }
        Ok(Self { sigma })
    }

    pub fn zeros(k: usize) -> Self {
        Self { sigma: vec![0.0; k] }
    }

    /// Forecast errors paired with [`HollandParams::reference_hurricane`].
    pub fn reference() -> Self {
        Self {
            sigma: vec![
                10.0,
                5.0,
                0.05,
                0.1f64.to_radians(),
                0.1f64.to_radians(),
                0.5,
                5.0f64.to_radians(),
            ],
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            sigma: self.sigma.iter().map(|s| s * c).collect(),
        }
    }
}

/// One forecast interval: parameter means and standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackStep {
    pub mean: [f64; N_PARAMS],
    pub sigma: [f64; N_PARAMS],
}

/// Per-timestep Holland forecast with fixed environmental pressure and density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurricaneTrack {
    pub pn: f64,
    pub rho: f64,
    pub steps: Vec<TrackStep>,
}

impl HurricaneTrack {
    pub fn horizon(&self) -> usize {
        self.steps.len()
    }

    pub fn params_at(&self, t: usize) -> Result<HollandParams, WindError> {
        let step = self.step(t)?;
        let base = HollandParams {
            pc: 0.0,
            rmax: 0.0,
            b: 0.0,
            center: GeoPoint { phi: 0.0, lambda: 0.0 },
            speed: 0.0,
            heading: 0.0,
            pn: self.pn,
            rho: self.rho,
        };
        Ok(base.with_vector(&step.mean))
    }

    pub fn sigma_at(&self, t: usize) -> Result<ParamUncertainty, WindError> {
        Ok(ParamUncertainty {
            sigma: self.step(t)?.sigma.to_vec(),
        })
    }

    fn step(&self, t: usize) -> Result<&TrackStep, WindError> {
        self.steps.get(t).ok_or(WindError::TimestepOutOfRange {
            t,
            len: self.steps.len(),
        })
    }

    pub fn validate(&self) -> Result<(), WindError> {
        for t in 0..self.horizon() {
            self.params_at(t)?.validate()?;
            ParamUncertainty::new(self.steps[t].sigma.to_vec())?;
        }
        Ok(())
    }
}

/// Great-circle distance (km).
pub fn haversine_distance(a: GeoPoint, b: GeoPoint) -> f64 {
    let dphi = b.phi - a.phi;
    let dlambda = b.lambda - a.lambda;
    let h = (dphi / 2.0).sin().powi(2) + a.phi.cos() * b.phi.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.clamp(0.0, 1.0).sqrt().asin()
}

/// Bearing of `target` seen from `center`, clockwise from north, in (−π, π].
pub fn azimuth(center: GeoPoint, target: GeoPoint) -> Result<f64, WindError> {
    if center == target {
        return Err(WindError::DegenerateGeometry);
    }
    Ok(bearing(center, target))
}

fn bearing(center: GeoPoint, target: GeoPoint) -> f64 {
    let dlambda = target.lambda - center.lambda;
    let y = dlambda.sin() * target.phi.cos();
    let x = center.phi.cos() * target.phi.sin() - center.phi.sin() * target.phi.cos() * dlambda.cos();
    let theta = y.atan2(x);
    if theta == -PI {
        PI
    } else {
        theta
    }
}

/// Coriolis parameter at latitude `phi`.
pub fn coriolis(phi: f64) -> f64 {
    2.0 * EARTH_ROTATION * phi.sin()
}

/// Holland gradient wind speed (m/s) at range `r_km` with Coriolis taken at `phi_local`.
pub fn gradient_wind_speed(p: &HollandParams, r_km: f64, phi_local: f64) -> Result<f64, WindError> {
    if !(r_km > 0.0) {
        return Err(WindError::NonPositiveDistance(r_km));
    }
    Ok(gradient_unchecked(p, r_km, phi_local))
}

fn gradient_unchecked(p: &HollandParams, r_km: f64, phi_local: f64) -> f64 {
    // A negative deficit only shows up under finite-difference probes at pc == pn.
    let deficit_pa = ((p.pn - p.pc) * 100.0).max(0.0);
    let r = r_km * 1000.0;
    let x = (p.rmax * 1000.0 / r).powf(p.b);
    let pressure_term = p.b * deficit_pa / p.rho * (-x).exp() * x;
    let half = r * coriolis(phi_local).abs() / 2.0;
    if pressure_term <= 0.0 {
        return 0.0;
    }
    // sqrt(a + h²) − h rewritten to avoid cancellation far from the eye.
    let v = pressure_term / ((pressure_term + half * half).sqrt() + half);
    v.max(0.0)
}

/// Surface wind speed (m/s): tangential gradient wind plus storm translation.
pub fn total_wind_speed(p: &HollandParams, target: GeoPoint) -> Result<f64, WindError> {
    if p.center == target {
        return Err(WindError::DegenerateGeometry);
    }
    Ok(total_unchecked(p, target))
}

fn total_unchecked(p: &HollandParams, target: GeoPoint) -> f64 {
    let r = haversine_distance(p.center, target);
    let vg = if r > 0.0 {
        gradient_unchecked(p, r, target.phi)
    } else {
        0.0
    };
    // Bearing is clockwise from north; convert to a math angle and rotate a
    // quarter turn in the cyclonic sense for the hemisphere.
    let position = FRAC_PI_2 - bearing(p.center, target);
    let cyclonic = if p.center.phi >= 0.0 { FRAC_PI_2 } else { -FRAC_PI_2 };
    let dir = position + cyclonic;
    let u = vg * dir.cos() + p.speed * p.heading.sin();
    let v = vg * dir.sin() + p.speed * p.heading.cos();
    u.hypot(v)
}

/// Finite-difference step for each parameter at `p`.
pub fn fd_steps(p: &HollandParams) -> [f64; N_PARAMS] {
    let v = p.vector();
    let mut h = [0.0; N_PARAMS];
    for param in HollandParam::ALL {
        let k = param.index();
        h[k] = (1e-4 * v[k].abs()).max(param.step_floor());
    }
    h
}

/// Central finite-difference gradient of the surface wind speed with respect
/// to each uncertain parameter, in [`HollandParam`] order.
pub fn param_sensitivities(p: &HollandParams, target: GeoPoint) -> Result<[f64; N_PARAMS], WindError> {
    let v0 = total_wind_speed(p, target)?;
    if !(v0 > 0.0) {
        return Err(WindError::ZeroWind(v0));
    }
    let h = fd_steps(p);
    let mut grad = [0.0; N_PARAMS];
    for k in 0..N_PARAMS {
        let up = total_unchecked(&p.perturbed(k, h[k]), target);
        let down = total_unchecked(&p.perturbed(k, -h[k]), target);
        grad[k] = (up - down) / (2.0 * h[k]);
    }
    Ok(grad)
}

/// Relative mismatch between the true wind change under `delta` and its
/// first-order prediction.
pub fn linearity_deviation(p: &HollandParams, target: GeoPoint, delta: &[f64; N_PARAMS]) -> Result<f64, WindError> {
    let grad = param_sensitivities(p, target)?;
    deviation_with_gradient(p, target, delta, &grad)
}

fn deviation_with_gradient(
    p: &HollandParams,
    target: GeoPoint,
    delta: &[f64; N_PARAMS],
    grad: &[f64; N_PARAMS],
) -> Result<f64, WindError> {
    let linear: f64 = delta.iter().zip(grad).map(|(d, g)| d * g).sum();
    if linear == 0.0 || !linear.is_finite() {
        return Err(WindError::ZeroLinearPredictor);
    }
    let base = total_unchecked(p, target);
    let mut moved = p.vector();
    for (m, d) in moved.iter_mut().zip(delta) {
        *m += d;
    }
    let actual = total_unchecked(&p.with_vector(&moved), target) - base;
    Ok(((actual - linear) / linear).abs())
}

/// One (cell, parameter, multiplier) evaluation of the linearity diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearityRecord {
    pub east_km: f64,
    pub north_km: f64,
    pub param: HollandParam,
    pub multiplier: f64,
    /// `None` where the deviation is undefined (zero wind or zero predictor).
    pub deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearityMesh {
    pub half_width_km: f64,
    pub cells_per_side: usize,
    pub records: Vec<LinearityRecord>,
}

impl LinearityMesh {
    /// Fraction of records with a defined deviation strictly below `threshold`,
    /// restricted to the given multipliers. Undefined records count as misses.
    pub fn fraction_below(&self, threshold: f64, multipliers: &[f64]) -> f64 {
        let selected: Vec<_> = self
            .records
            .iter()
            .filter(|r| multipliers.contains(&r.multiplier))
            .collect();
        if selected.is_empty() {
            return 0.0;
        }
        let hits = selected
            .iter()
            .filter(|r| matches!(r.deviation, Some(d) if d < threshold))
            .count();
        hits as f64 / selected.len() as f64
    }
}

/// Perturb each parameter by `multiplier · σ` one at a time over a square
/// mesh centered on the storm and record the linearity deviation.
pub fn linearity_mesh(
    p: &HollandParams,
    sigma: &ParamUncertainty,
    half_width_km: f64,
    cells_per_side: usize,
    multipliers: &[f64],
) -> LinearityMesh {
    let spacing = 2.0 * half_width_km / cells_per_side as f64;
    let cells: Vec<(f64, f64)> = (0..cells_per_side)
        .flat_map(|i| (0..cells_per_side).map(move |j| (i, j)))
        .map(|(i, j)| {
            (
                -half_width_km + (i as f64 + 0.5) * spacing,
                -half_width_km + (j as f64 + 0.5) * spacing,
            )
        })
        .collect();
    let records = cells
        .par_iter()
        .flat_map_iter(|&(east, north)| {
            let target = p.center.offset_km(east, north);
            let grad = param_sensitivities(p, target).ok();
            let mut out = Vec::with_capacity(N_PARAMS * multipliers.len());
            for param in HollandParam::ALL {
                for &m in multipliers {
                    let mut delta = [0.0; N_PARAMS];
                    delta[param.index()] = m * sigma.sigma[param.index()];
                    let deviation = grad
                        .as_ref()
                        .and_then(|g| deviation_with_gradient(p, target, &delta, g).ok());
                    out.push(LinearityRecord {
                        east_km: east,
                        north_km: north,
                        param,
                        multiplier: m,
                        deviation,
                    });
                }
            }
            out
        })
        .collect();
    LinearityMesh {
        half_width_km,
        cells_per_side,
        records,
    }
}

/// Maximum surface wind over a square mesh around the storm center.
pub fn mesh_max_wind(p: &HollandParams, half_width_km: f64, cells_per_side: usize) -> f64 {
    let spacing = 2.0 * half_width_km / cells_per_side as f64;
    let mut best: f64 = 0.0;
    for i in 0..cells_per_side {
        for j in 0..cells_per_side {
            let east = -half_width_km + (i as f64 + 0.5) * spacing;
            let north = -half_width_km + (j as f64 + 0.5) * spacing;
            best = best.max(total_unchecked(p, p.center.offset_km(east, north)));
        }
    }
    best
}
