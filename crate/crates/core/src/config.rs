//! Plain-text `key = value` parameter files.
//!
//! ```text
//! # lengths in metres
//! geometry.wavelength_m = 7.95e-7
//! geometry.L1_m = 3.18e-5
//! bs1.R = 0.1
//! mirror1.A = 1e-6
//! ```
//!
//! Device keys are all required. `medium.*` keys are optional but must be
//! given together.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::device::{BeamSplitterSpec, DeviceParams, GeometrySpec, MirrorSpec, Preset};
use crate::error::{Error, Result};
use crate::xpm::EitMediumParams;

const DEVICE_KEYS: [&str; 16] = [
    "geometry.wavelength_m",
    "geometry.L1_m",
    "geometry.L2_m",
    "geometry.L3_m",
    "geometry.L4_m",
    "geometry.L5_m",
    "bs1.R",
    "bs1.T",
    "bs1.A",
    "bs2.R",
    "bs2.T",
    "bs2.A",
    "mirror1.A",
    "mirror2.A",
    "mirror3.A",
    "mirror4.A",
];

const MEDIUM_KEYS: [&str; 12] = [
    "medium.density_m3",
    "medium.mu13_Cm",
    "medium.mu24_Cm",
    "medium.gamma3_per_s",
    "medium.gamma4_per_s",
    "medium.rabi_per_s",
    "medium.signal_detuning_per_s",
    "medium.probe_detuning_per_s",
    "medium.wavelength_m",
    "medium.length_m",
    "medium.area_m2",
    "medium.probe_duration_s",
];

fn parse(text: &str) -> Result<BTreeMap<String, (usize, f64)>> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("expected `key = value`, found `{line}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        if !DEVICE_KEYS.into_iter().chain(MEDIUM_KEYS).any(|k| k == key) {
            return Err(Error::UnknownKey(key.to_string()));
        }
        let number: f64 = value.parse().map_err(|_| Error::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
        })?;
        if !number.is_finite() {
            return Err(Error::InvalidValue {
                key: key.to_string(),
                value: value.to_string(),
            });
        }
        if map.insert(key.to_string(), (line_no, number)).is_some() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate key `{key}`"),
            });
        }
    }
    Ok(map)
}

fn get(map: &BTreeMap<String, (usize, f64)>, key: &str) -> Result<f64> {
    map.get(key)
        .map(|&(_, v)| v)
        .ok_or_else(|| Error::MissingKey(key.to_string()))
}

/// Parses a scenario (device plus optional medium) from text and validates it.
pub fn parse_scenario(text: &str) -> Result<Preset> {
    let map = parse(text)?;
    let g = |k: &str| get(&map, k);
    let device = DeviceParams {
        bs1: BeamSplitterSpec::new(g("bs1.R")?, g("bs1.T")?, g("bs1.A")?),
        bs2: BeamSplitterSpec::new(g("bs2.R")?, g("bs2.T")?, g("bs2.A")?),
        mirrors: [
            MirrorSpec::new(g("mirror1.A")?),
            MirrorSpec::new(g("mirror2.A")?),
            MirrorSpec::new(g("mirror3.A")?),
            MirrorSpec::new(g("mirror4.A")?),
        ],
        geometry: GeometrySpec {
            wavelength: g("geometry.wavelength_m")?,
            l1: g("geometry.L1_m")?,
            l2: g("geometry.L2_m")?,
            l3: g("geometry.L3_m")?,
            l4: g("geometry.L4_m")?,
            l5: g("geometry.L5_m")?,
        },
    }
    .validated()?;

    let present = MEDIUM_KEYS.iter().filter(|k| map.contains_key(**k)).count();
    let medium = match present {
        0 => None,
        _ => Some(
            EitMediumParams {
                density: g("medium.density_m3")?,
                mu13: g("medium.mu13_Cm")?,
                mu24: g("medium.mu24_Cm")?,
                gamma3: g("medium.gamma3_per_s")?,
                gamma4: g("medium.gamma4_per_s")?,
                rabi: g("medium.rabi_per_s")?,
                signal_detuning: g("medium.signal_detuning_per_s")?,
                probe_detuning: g("medium.probe_detuning_per_s")?,
                wavelength: g("medium.wavelength_m")?,
                length: g("medium.length_m")?,
                area: g("medium.area_m2")?,
                probe_duration: g("medium.probe_duration_s")?,
            }
            .validated()?,
        ),
    };
    Ok(Preset { device, medium })
}

/// Renders a scenario; values use the shortest representation that parses
/// back to the identical f64.
pub fn render_scenario(scenario: &Preset) -> String {
    let d = &scenario.device;
    let mut out = String::from("# double-cavity parameters (SI units)\n");
    let mut put = |k: &str, v: f64| {
        let _ = writeln!(out, "{k} = {v:e}");
    };
    put("geometry.wavelength_m", d.geometry.wavelength);
    put("geometry.L1_m", d.geometry.l1);
    put("geometry.L2_m", d.geometry.l2);
    put("geometry.L3_m", d.geometry.l3);
    put("geometry.L4_m", d.geometry.l4);
    put("geometry.L5_m", d.geometry.l5);
    for (name, bs) in [("bs1", &d.bs1), ("bs2", &d.bs2)] {
        put(&format!("{name}.R"), bs.reflectivity);
        put(&format!("{name}.T"), bs.transmissivity);
        put(&format!("{name}.A"), bs.absorption);
    }
    for (i, m) in d.mirrors.iter().enumerate() {
        put(&format!("mirror{}.A", i + 1), m.absorption);
    }
    if let Some(m) = &scenario.medium {
        let values = [
            m.density,
            m.mu13,
            m.mu24,
            m.gamma3,
            m.gamma4,
            m.rabi,
            m.signal_detuning,
            m.probe_detuning,
            m.wavelength,
            m.length,
            m.area,
            m.probe_duration,
        ];
        for (k, v) in MEDIUM_KEYS.iter().zip(values) {
            put(k, v);
        }
    }
    out
}

pub fn load_scenario(path: &Path) -> Result<Preset> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text)
}

pub fn save_scenario(scenario: &Preset, path: &Path) -> Result<()> {
    fs::write(path, render_scenario(scenario)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_config(path: &Path) -> Result<DeviceParams> {
    load_scenario(path).map(|s| s.device)
}

pub fn save_config(params: &DeviceParams, path: &Path) -> Result<()> {
    save_scenario(
        &Preset {
            device: *params,
            medium: None,
        },
        path,
    )
}
