#![allow(dead_code)]

use eitcav_core::device::{BeamSplitterSpec, DeviceParams, GeometrySpec, MirrorSpec};
use rand::Rng;

pub const WAVELENGTH: f64 = 795e-9;

/// Arbitrary (not necessarily resonant) geometry with arms of 5–60 λ.
pub fn random_geometry<R: Rng>(rng: &mut R) -> GeometrySpec {
    let mut arm = || WAVELENGTH * rng.gen_range(5.0..60.0);
    GeometrySpec {
        wavelength: WAVELENGTH,
        l1: arm(),
        l2: arm(),
        l3: arm(),
        l4: arm(),
        l5: arm(),
    }
}

/// Device with moderate finesse so the round-trip iteration converges fast.
pub fn random_device<R: Rng>(rng: &mut R, lossy: bool) -> DeviceParams {
    let mut absorption = |max: f64| if lossy { rng.gen_range(0.0..max) } else { 0.0 };
    let (a1, a2) = (absorption(0.05), absorption(0.05));
    let mirrors = [(); 4].map(|_| MirrorSpec::new(absorption(0.3)));
    DeviceParams {
        bs1: BeamSplitterSpec::with_absorption(rng.gen_range(0.05..0.9), a1),
        bs2: BeamSplitterSpec::with_absorption(rng.gen_range(0.01..0.9), a2),
        mirrors,
        geometry: random_geometry(rng),
    }
}

/// Device spanning the whole physical range, including extreme splitters.
pub fn wide_device<R: Rng>(rng: &mut R, lossy: bool) -> DeviceParams {
    let mut reflectivity = || 10f64.powf(rng.gen_range(-6.0..-0.01));
    let (r1, r2) = (reflectivity(), reflectivity());
    let mut absorption = |r: f64| if lossy { rng.gen_range(0.0..(1.0 - r)) } else { 0.0 };
    let (a1, a2) = (absorption(r1), absorption(r2));
    let mirrors = [(); 4].map(|_| MirrorSpec::new(absorption(0.0)));
    DeviceParams {
        bs1: BeamSplitterSpec::with_absorption(r1, a1),
        bs2: BeamSplitterSpec::with_absorption(r2, a2),
        mirrors,
        geometry: random_geometry(rng),
    }
}

/// A wavenumber within a few free spectral ranges of k0.
pub fn random_k<R: Rng>(rng: &mut R, p: &DeviceParams) -> f64 {
    p.geometry.k0() * (1.0 + rng.gen_range(-0.05..0.05))
}

/// RMS difference of the transmitted envelopes from time stepping and from
/// spectral synthesis.
pub fn time_stepping_vs_spectral(p: &DeviceParams, tau_s: f64) -> f64 {
    let pulse = eitcav_core::pulse::PulseSpec::resonant(p, tau_s);
    eitcav_core::oracle::check_against_synthesis(p, &pulse).unwrap().rms
}
