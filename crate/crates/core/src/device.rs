//! Physical description of the double-cavity device.
//!
//! The vertical cavity runs M4 – BS1 – BS2 – M2 (segments L5, L1, L4); the
//! horizontal cavity runs M3 – BS2 – M1 (segments L2, L3). BS1 couples the
//! vertical cavity to the outside ports `a`/`b`, BS2 couples the two cavities.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::constants::C;
use crate::error::{Error, Result};
use crate::xpm::EitMediumParams;

const PARTITION_TOL: f64 = 1e-12;

/// Power coefficients of a lossy beam splitter with transfer matrix `(t, ir; ir, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitterSpec {
    /// R = r².
    pub reflectivity: f64,
    /// T = t².
    pub transmissivity: f64,
    /// A = 1 − R − T.
    pub absorption: f64,
}

impl BeamSplitterSpec {
    pub fn new(reflectivity: f64, transmissivity: f64, absorption: f64) -> Self {
        Self {
            reflectivity,
            transmissivity,
            absorption,
        }
    }

    /// Non-absorbing splitter with power reflectivity `reflectivity`.
    pub fn lossless(reflectivity: f64) -> Self {
        Self::new(reflectivity, 1.0 - reflectivity, 0.0)
    }

    /// Splitter with given R and A; T takes up the rest.
    pub fn with_absorption(reflectivity: f64, absorption: f64) -> Self {
        Self::new(reflectivity, 1.0 - reflectivity - absorption, absorption)
    }

    /// Amplitude reflection coefficient r = √R.
    pub fn r(&self) -> f64 {
        self.reflectivity.max(0.0).sqrt()
    }

    /// Amplitude transmission coefficient t = √T.
    pub fn t(&self) -> f64 {
        self.transmissivity.max(0.0).sqrt()
    }
}

/// End mirror with power absorption A_M; reflectivity is 1 − A_M.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MirrorSpec {
    pub absorption: f64,
}

impl MirrorSpec {
    pub fn new(absorption: f64) -> Self {
        Self { absorption }
    }

    pub fn perfect() -> Self {
        Self::new(0.0)
    }

    pub fn reflectivity(&self) -> f64 {
        1.0 - self.absorption
    }

    /// Amplitude reflection magnitude √(1 − A_M).
    pub fn amplitude(&self) -> f64 {
        self.reflectivity().max(0.0).sqrt()
    }
}

/// Segment lengths (m) and the reference wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometrySpec {
    pub wavelength: f64,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
    pub l5: f64,
}

impl GeometrySpec {
    /// Builds lengths from integer half-wave counts, L_i = n_i·λ0/2, so that every
    /// segment is resonant at k0 without rounding drift.
    pub fn from_half_waves(wavelength: f64, half_waves: [u32; 5]) -> Self {
        let h = wavelength / 2.0;
        Self {
            wavelength,
            l1: half_waves[0] as f64 * h,
            l2: half_waves[1] as f64 * h,
            l3: half_waves[2] as f64 * h,
            l4: half_waves[3] as f64 * h,
            l5: half_waves[4] as f64 * h,
        }
    }

    /// L_V = L1 + L4 + L5.
    pub fn vertical_length(&self) -> f64 {
        self.l1 + self.l4 + self.l5
    }

    /// L_H = L2 + L3.
    pub fn horizontal_length(&self) -> f64 {
        self.l2 + self.l3
    }

    /// k0 = 2π/λ0.
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// ω0 = c·k0.
    pub fn omega0(&self) -> f64 {
        C * self.k0()
    }

    pub fn lengths(&self) -> [(&'static str, f64); 5] {
        [
            ("L1", self.l1),
            ("L2", self.l2),
            ("L3", self.l3),
            ("L4", self.l4),
            ("L5", self.l5),
        ]
    }

    /// Mode numbers (n_V, n_H) with k0·L = n·π, if both cavities are resonant at k0
    /// to within `rel_tol`.
    pub fn resonant_mode_numbers(&self, rel_tol: f64) -> Option<(u64, u64)> {
        let mode = |len: f64| {
            let n = self.k0() * len / PI;
            let rounded = n.round();
            ((n - rounded).abs() <= rel_tol * n.max(1.0) && rounded >= 1.0).then_some(rounded as u64)
        };
        Some((mode(self.vertical_length())?, mode(self.horizontal_length())?))
    }
}

/// Complete description of the double-cavity system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    pub bs1: BeamSplitterSpec,
    pub bs2: BeamSplitterSpec,
    /// Mirrors M1..M4 (index 0 is M1).
    pub mirrors: [MirrorSpec; 4],
    pub geometry: GeometrySpec,
}

impl DeviceParams {
    pub fn m1(&self) -> &MirrorSpec {
        &self.mirrors[0]
    }
    pub fn m2(&self) -> &MirrorSpec {
        &self.mirrors[1]
    }
    pub fn m3(&self) -> &MirrorSpec {
        &self.mirrors[2]
    }
    pub fn m4(&self) -> &MirrorSpec {
        &self.mirrors[3]
    }

    /// Same device with every absorption coefficient set to zero.
    pub fn lossless(&self) -> Self {
        let mut p = *self;
        p.bs1 = BeamSplitterSpec::lossless(self.bs1.reflectivity);
        p.bs2 = BeamSplitterSpec::lossless(self.bs2.reflectivity);
        p.mirrors = [MirrorSpec::perfect(); 4];
        p
    }

    pub fn is_lossless(&self) -> bool {
        self.bs1.absorption == 0.0
            && self.bs2.absorption == 0.0
            && self.mirrors.iter().all(|m| m.absorption == 0.0)
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    /// Returns `self` if valid, otherwise the validation error.
    pub fn validated(self) -> Result<Self> {
        let report = validate(&self);
        if report.is_ok() {
            Ok(self)
        } else {
            Err(Error::Validation(report))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
    pub value: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} (value {:e})", self.field, self.message, self.value)
    }
}

/// Result of [`validate`]: empty means the parameters are consistent.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, field: impl Into<String>, message: &str, value: f64) {
        self.violations.push(Violation {
            field: field.into(),
            message: message.to_string(),
            value,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "pass");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

fn check_unit(report: &mut ValidationReport, field: String, value: f64) {
    if !value.is_finite() || !(0.0..=1.0).contains(&value) {
        report.push(field, "must lie in [0, 1]", value);
    }
}

/// Checks every parameter invariant and lists the violated ones.
pub fn validate(params: &DeviceParams) -> ValidationReport {
    let mut report = ValidationReport::default();
    for (name, bs) in [("bs1", &params.bs1), ("bs2", &params.bs2)] {
        check_unit(&mut report, format!("{name}.R"), bs.reflectivity);
        check_unit(&mut report, format!("{name}.T"), bs.transmissivity);
        check_unit(&mut report, format!("{name}.A"), bs.absorption);
        let sum = bs.reflectivity + bs.transmissivity + bs.absorption;
        if (sum - 1.0).abs() > PARTITION_TOL {
            report.push(name, "R+T+A=1 violated", sum);
        }
    }
    for (i, m) in params.mirrors.iter().enumerate() {
        check_unit(&mut report, format!("mirror{}.A", i + 1), m.absorption);
    }
    let g = &params.geometry;
    if !(g.wavelength.is_finite() && g.wavelength > 0.0) {
        report.push("geometry.wavelength_m", "lengths > 0", g.wavelength);
    }
    for (name, len) in g.lengths() {
        if !(len.is_finite() && len > 0.0) {
            report.push(format!("geometry.{name}_m"), "lengths > 0", len);
        }
    }
    report
}

/// Checks that both cavities share the resonance k0 = n_V π/L_V = n_H π/L_H.
pub fn validate_resonant(params: &DeviceParams) -> ValidationReport {
    let mut report = validate(params);
    if report.is_ok() && params.geometry.resonant_mode_numbers(1e-9).is_none() {
        report.push(
            "geometry",
            "k0·L_V and k0·L_H must be integer multiples of π",
            params.geometry.k0() * params.geometry.vertical_length() / PI,
        );
    }
    report
}

/// Stable preset identifiers.
pub const PRESET_NAMES: [&str; 5] = ["fig2a", "fig2b", "fig3", "fig4", "rubidium-xpm"];

/// A named parameter set; the rubidium preset also carries the EIT medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Preset {
    pub device: DeviceParams,
    pub medium: Option<EitMediumParams>,
}

pub const REFERENCE_WAVELENGTH: f64 = 795e-9;

/// L_V = 120 λ0 (n_V = 240) split 40/40/40 λ0 over L1, L4, L5;
/// L_H = 30 λ0 (n_H = 60) split 15/15 λ0 over L2, L3.
pub fn reference_geometry() -> GeometrySpec {
    GeometrySpec::from_half_waves(REFERENCE_WAVELENGTH, [80, 30, 30, 80, 80])
}

fn reference_device(r2: f64, mirror_absorption: f64) -> DeviceParams {
    DeviceParams {
        bs1: BeamSplitterSpec::lossless(0.1),
        bs2: BeamSplitterSpec::lossless(r2),
        mirrors: [MirrorSpec::new(mirror_absorption); 4],
        geometry: reference_geometry(),
    }
}

pub fn preset(name: &str) -> Result<Preset> {
    let device = match name {
        "fig2a" => reference_device(1e-6, 1e-6),
        "fig2b" => reference_device(1e-5, 1e-6),
        // The phase-shift estimates assume absorption-free cavities.
        "fig3" | "fig4" | "rubidium-xpm" => reference_device(1e-6, 0.0),
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    let medium = (name == "rubidium-xpm").then(|| EitMediumParams::rubidium(&device));
    Ok(Preset { device, medium })
}

/// Device of a named preset.
pub fn preset_device(name: &str) -> Result<DeviceParams> {
    preset(name).map(|p| p.device)
}

/// Reflectivity of a thin dielectric plate of index `n` and thickness `d` in
/// vacuum at wavenumber `k`: R ≈ [(n² − 1)/√2 · k·d]².
///
/// Only valid for k·d ≪ 1; see [`thin_plate_in_regime`].
pub fn thin_plate_reflectivity(n: f64, d: f64, k: f64) -> f64 {
    let amplitude = (n * n - 1.0) / std::f64::consts::SQRT_2 * k * d;
    amplitude * amplitude
}

/// False once k·d exceeds 0.1, where the thin-plate estimate is unreliable.
pub fn thin_plate_in_regime(d: f64, k: f64) -> bool {
    k * d <= 0.1
}

/// Default plate index when none is given.
pub const DEFAULT_PLATE_INDEX: f64 = 1.5;
