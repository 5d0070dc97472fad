//! Time-domain propagation of pulses by spectral synthesis.
//!
//! Fields are slowly varying envelopes around a carrier k_c: the physical field
//! is A(t)·e^{−iω_c t}. Each envelope is sampled on a periodic grid, transformed,
//! multiplied by the exact response at k_c + δω/c and transformed back.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::constants::C;
use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::intracavity::{segment_amplitudes, Segment};
use crate::spectral::{cis, delay_time, g_matrix};

/// Gaussian input envelope amplitude·exp(−t²/4τ_s²) on carrier `carrier_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulseSpec {
    pub carrier_k: f64,
    /// Amplitude half-width τ_s, s.
    pub tau_s: f64,
    pub amplitude: f64,
}

impl PulseSpec {
    pub fn gaussian(carrier_k: f64, tau_s: f64) -> Self {
        Self {
            carrier_k,
            tau_s,
            amplitude: 1.0,
        }
    }

    /// Unit pulse on the device's resonance k0.
    pub fn resonant(params: &DeviceParams, tau_s: f64) -> Self {
        Self::gaussian(params.geometry.k0(), tau_s)
    }

    pub fn envelope(&self, t: f64) -> Complex64 {
        Complex64::new(self.amplitude * (-t * t / (4.0 * self.tau_s * self.tau_s)).exp(), 0.0)
    }

    /// ∫|A(t)|²dt = amplitude²·√(2π)·τ_s.
    pub fn energy(&self) -> f64 {
        self.amplitude * self.amplitude * (2.0 * PI).sqrt() * self.tau_s
    }

    fn check(&self) -> Result<()> {
        if !(self.tau_s > 0.0) || !self.tau_s.is_finite() {
            return Err(Error::InvalidInput(format!(
                "pulse half-width must be positive (got {})",
                self.tau_s
            )));
        }
        Ok(())
    }
}

/// Periodic sampling grid: `samples` points t_i = start + i·dt, dt = (stop − start)/samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub samples: usize,
}

pub const DEFAULT_SAMPLES: usize = 1 << 16;

impl TimeGrid {
    pub fn new(start: f64, stop: f64, samples: usize) -> Self {
        Self {
            start,
            stop,
            samples,
        }
    }

    /// [−8, +24]·max(τ_s, τ_D) around the input peak with 2¹⁶ samples.
    pub fn default_for(params: &DeviceParams, pulse: &PulseSpec) -> Result<Self> {
        let scale = characteristic_time(params, pulse);
        Ok(Self::new(-8.0 * scale, 24.0 * scale, DEFAULT_SAMPLES))
    }

    pub fn dt(&self) -> f64 {
        (self.stop - self.start) / self.samples as f64
    }

    pub fn t(&self, i: usize) -> f64 {
        self.start + i as f64 * self.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.samples).map(|i| self.t(i)).collect()
    }

    /// Checks sample count, span and bandwidth against the pulse and device.
    pub fn check(&self, params: &DeviceParams, pulse: &PulseSpec) -> Result<()> {
        pulse.check()?;
        if !self.samples.is_power_of_two() || self.samples < 4 {
            return Err(Error::InvalidInput(format!(
                "time grid needs a power-of-two sample count (got {})",
                self.samples
            )));
        }
        let span = self.stop - self.start;
        let scale = characteristic_time(params, pulse);
        if !(span >= 8.0 * scale) {
            return Err(Error::InvalidInput(format!(
                "time grid span {span:.3e} s is shorter than 8·max(τ_s, τ_D) = {:.3e} s",
                8.0 * scale
            )));
        }
        if 1.0 / self.dt() < 20.0 / pulse.tau_s {
            return Err(Error::InvalidInput(format!(
                "time step {:.3e} s too coarse: need 1/dt ≥ 20/τ_s",
                self.dt()
            )));
        }
        Ok(())
    }
}

fn characteristic_time(params: &DeviceParams, pulse: &PulseSpec) -> f64 {
    match delay_time(params) {
        Ok(tau_d) => pulse.tau_s.max(tau_d),
        Err(_) => pulse.tau_s,
    }
}

/// Sampled envelopes and stored energies. Energies share the unit of
/// ∫|A|²dt (squared amplitude × seconds).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldRecord {
    pub t: Vec<f64>,
    pub dt: f64,
    /// Incident envelope at BS1.
    pub input: Vec<Complex64>,
    /// Transmitted output a′.
    pub out_a: Vec<Complex64>,
    /// Reflected output b′.
    pub out_b: Vec<Complex64>,
    /// Horizontal-cavity field (the wave returning from M1).
    pub horizontal: Vec<Complex64>,
    /// Energy stored in the horizontal cavity.
    pub energy_h: Vec<f64>,
    /// Energy stored in the vertical cavity.
    pub energy_v: Vec<f64>,
    /// Instantaneous absorbed power.
    pub absorbed_power: Vec<f64>,
}

impl FieldRecord {
    fn integral(&self, f: impl Fn(usize) -> f64) -> f64 {
        (0..self.t.len()).map(f).sum::<f64>() * self.dt
    }

    pub fn input_energy(&self) -> f64 {
        self.integral(|i| self.input[i].norm_sqr())
    }

    pub fn transmitted_energy(&self) -> f64 {
        self.integral(|i| self.out_a[i].norm_sqr())
    }

    pub fn reflected_energy(&self) -> f64 {
        self.integral(|i| self.out_b[i].norm_sqr())
    }

    pub fn absorbed_energy(&self) -> f64 {
        self.integral(|i| self.absorbed_power[i])
    }
}

/// Number of response channels per frequency: a′, b′ and the ten internal paths.
const CHANNELS: usize = 12;

fn transfers(params: &DeviceParams, carrier_k: f64, dt: f64, n: usize) -> Result<Vec<[Complex64; CHANNELS]>> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    (0..n)
        .into_par_iter()
        .map(|m| {
            let signed = if m < n / 2 { m as f64 } else { m as f64 - n as f64 };
            let domega = -2.0 * PI * signed / (n as f64 * dt);
            let k = carrier_k + domega / C;
            let g = g_matrix(params, k)?;
            let seg = segment_amplitudes(params, k, one, zero)?;
            let mut row = [zero; CHANNELS];
            row[0] = g.g11;
            row[1] = g.g21;
            for s in Segment::ALL {
                // Shift each path amplitude to the middle of its segment.
                let half = 0.5 * k * s.length(params);
                let shift = if s.referenced_at_departure() { cis(half) } else { cis(-half) };
                row[2 + s.index()] = seg.get(s) * shift;
            }
            Ok(row)
        })
        .collect()
}

/// Transmitted, reflected and internal envelopes for a Gaussian input.
pub fn propagate_pulse(params: &DeviceParams, pulse: &PulseSpec, grid: &TimeGrid) -> Result<FieldRecord> {
    grid.check(params, pulse)?;
    let n = grid.samples;
    let dt = grid.dt();
    let t = grid.times();
    let input: Vec<Complex64> = t.iter().map(|&ti| pulse.envelope(ti)).collect();

    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut spectrum = input.clone();
    forward.process(&mut spectrum);

    let h = transfers(params, pulse.carrier_k, dt, n)?;
    let scale = 1.0 / n as f64;
    let channels: Vec<Vec<Complex64>> = (0..CHANNELS)
        .map(|c| {
            let mut buf: Vec<Complex64> = (0..n).map(|m| spectrum[m] * h[m][c] * scale).collect();
            inverse.process(&mut buf);
            buf
        })
        .collect();

    let out_a = channels[0].clone();
    let out_b = channels[1].clone();
    let seg = |s: Segment| &channels[2 + s.index()];

    let mut energy_h = vec![0.0; n];
    let mut energy_v = vec![0.0; n];
    for s in Segment::ALL {
        let dwell = s.length(params) / C;
        let target = if s.is_horizontal() { &mut energy_h } else { &mut energy_v };
        for (e, z) in target.iter_mut().zip(seg(s)) {
            *e += z.norm_sqr() * dwell;
        }
    }

    let a1 = params.bs1.absorption;
    let a2 = params.bs2.absorption;
    let am = params.mirrors.map(|m| m.absorption);
    let absorbed_power: Vec<f64> = (0..n)
        .map(|i| {
            let p = |s: Segment| seg(s)[i].norm_sqr();
            a1 * (input[i].norm_sqr() + p(Segment::Bs2ToBs1) + p(Segment::M4ToBs1))
                + a2 * (p(Segment::Bs1ToBs2)
                    + p(Segment::M1ToBs2)
                    + p(Segment::M2ToBs2)
                    + p(Segment::M3ToBs2))
                + am[0] * p(Segment::Bs2ToM1)
                + am[1] * p(Segment::Bs2ToM2)
                + am[2] * p(Segment::Bs2ToM3)
                + am[3] * p(Segment::Bs1ToM4)
        })
        .collect();

    let record = FieldRecord {
        horizontal: seg(Segment::M1ToBs2).clone(),
        t,
        dt,
        input,
        out_a,
        out_b,
        energy_h,
        energy_v,
        absorbed_power,
    };
    check_aliasing(&record)?;
    Ok(record)
}

fn check_aliasing(record: &FieldRecord) -> Result<()> {
    let n = record.t.len();
    let edge = (n / 64).max(1);
    let power = |i: usize| record.out_a[i].norm_sqr() + record.out_b[i].norm_sqr();
    let total: f64 = (0..n).map(power).sum();
    if total == 0.0 {
        return Ok(());
    }
    let at_edges: f64 = (0..edge).chain(n - edge..n).map(power).sum();
    let fraction = at_edges / total;
    if fraction > 1e-4 {
        return Err(Error::Aliasing { fraction });
    }
    Ok(())
}

/// Gaussian delay kernel exp[−(τ − τ_D)²/2τ_D²]/(√(2π)·τ_D).
pub fn gaussian_response_approx(tau: f64, params: &DeviceParams) -> Result<f64> {
    let tau_d = delay_time(params)?;
    let x = (tau - tau_d) / tau_d;
    Ok((-0.5 * x * x).exp() / ((2.0 * PI).sqrt() * tau_d))
}

/// Time series of where the pulse energy is, normalised by the input energy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyFractions {
    pub t: Vec<f64>,
    /// Incident energy not yet arrived plus energy reflected so far.
    pub front: Vec<f64>,
    pub horizontal: Vec<f64>,
    pub vertical: Vec<f64>,
    /// Energy transmitted so far.
    pub behind: Vec<f64>,
    /// Energy absorbed so far.
    pub absorbed: Vec<f64>,
    /// |input|² relative to the input peak intensity.
    pub intensity_in: Vec<f64>,
    /// |a′|² relative to the input peak intensity.
    pub intensity_out_a: Vec<f64>,
    /// |b′|² relative to the input peak intensity.
    pub intensity_out_b: Vec<f64>,
}

impl EnergyFractions {
    /// Sum of all fractions at sample `i`; 1 when energy is conserved.
    pub fn total(&self, i: usize) -> f64 {
        self.front[i] + self.horizontal[i] + self.vertical[i] + self.behind[i] + self.absorbed[i]
    }
}

fn cumulative_trapezoid(values: impl Iterator<Item = f64>, dt: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut acc = 0.0;
    let mut prev: Option<f64> = None;
    for v in values {
        if let Some(p) = prev {
            acc += 0.5 * (p + v) * dt;
        }
        out.push(acc);
        prev = Some(v);
    }
    out
}

impl FieldRecord {
    pub fn fractions(&self) -> EnergyFractions {
        let dt = self.dt;
        let cum_in = cumulative_trapezoid(self.input.iter().map(|z| z.norm_sqr()), dt);
        let cum_a = cumulative_trapezoid(self.out_a.iter().map(|z| z.norm_sqr()), dt);
        let cum_b = cumulative_trapezoid(self.out_b.iter().map(|z| z.norm_sqr()), dt);
        let cum_abs = cumulative_trapezoid(self.absorbed_power.iter().copied(), dt);
        let total = *cum_in.last().unwrap_or(&0.0);
        let norm = if total > 0.0 { 1.0 / total } else { 0.0 };
        let peak = self.input.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        let rel = if peak > 0.0 { 1.0 / peak } else { 0.0 };
        let n = self.t.len();
        EnergyFractions {
            t: self.t.clone(),
            front: (0..n).map(|i| (total - cum_in[i] + cum_b[i]) * norm).collect(),
            horizontal: self.energy_h.iter().map(|e| e * norm).collect(),
            vertical: self.energy_v.iter().map(|e| e * norm).collect(),
            behind: cum_a.iter().map(|e| e * norm).collect(),
            absorbed: cum_abs.iter().map(|e| e * norm).collect(),
            intensity_in: self.input.iter().map(|z| z.norm_sqr() * rel).collect(),
            intensity_out_a: self.out_a.iter().map(|z| z.norm_sqr() * rel).collect(),
            intensity_out_b: self.out_b.iter().map(|z| z.norm_sqr() * rel).collect(),
        }
    }
}

pub fn energy_fractions(params: &DeviceParams, pulse: &PulseSpec, grid: &TimeGrid) -> Result<EnergyFractions> {
    Ok(propagate_pulse(params, pulse, grid)?.fractions())
}

fn moments(t: &[f64], w: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for (ti, wi) in t.iter().zip(w) {
        s0 += wi;
        s1 += wi * ti;
        s2 += wi * ti * ti;
    }
    if s0 == 0.0 {
        return (0.0, 0.0);
    }
    let mean = s1 / s0;
    (mean, s2 / s0 - mean * mean)
}

/// Centroid of |a′|² minus centroid of |input|².
pub fn output_centroid_delay(record: &FieldRecord) -> f64 {
    let (out, _) = moments(&record.t, record.out_a.iter().map(|z| z.norm_sqr()));
    let (inp, _) = moments(&record.t, record.input.iter().map(|z| z.norm_sqr()));
    out - inp
}

/// Growth of the second central moment of the amplitude envelope |A(t)|.
/// For a Gaussian kernel of width τ_D this equals τ_D².
pub fn envelope_broadening(record: &FieldRecord) -> f64 {
    let (_, out) = moments(&record.t, record.out_a.iter().map(|z| z.norm()));
    let (_, inp) = moments(&record.t, record.input.iter().map(|z| z.norm()));
    out - inp
}

/// Growth of the second central moment of the intensity |A(t)|²; τ_D²/2 for a
/// Gaussian kernel.
pub fn intensity_broadening(record: &FieldRecord) -> f64 {
    let (_, out) = moments(&record.t, record.out_a.iter().map(|z| z.norm_sqr()));
    let (_, inp) = moments(&record.t, record.input.iter().map(|z| z.norm_sqr()));
    out - inp
}

/// ∫ Σ_H |A_s(t)|²·L_s/L_H dt over the horizontal paths: the time integral
/// of the length-averaged standing-wave intensity.
pub fn horizontal_intensity_integral(params: &DeviceParams, pulse: &PulseSpec, grid: &TimeGrid) -> Result<f64> {
    let record = propagate_pulse(params, pulse, grid)?;
    let lh = params.geometry.horizontal_length();
    Ok(record.energy_h.iter().sum::<f64>() * record.dt * C / lh)
}
