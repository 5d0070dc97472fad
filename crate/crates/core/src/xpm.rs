//! Four-level EIT medium and the conditional phase shift it imprints on a
//! probe when the signal is stored in the horizontal cavity.
//!
//! Signal-side quantities (E0, the intracavity field integral) use the device
//! wavelength λ0; probe-side quantities (v_g, α1, α2) use the medium wavelength.

use std::f64::consts::PI;

use serde::Serialize;

use crate::constants::{C, EPSILON_0, HBAR};
use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::optimize::simpson;
use crate::pulse::{horizontal_intensity_integral, PulseSpec, TimeGrid};
use crate::spectral::{delay_time, g_matrix, Estimate};

/// Constants of the four-level medium, SI units throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EitMediumParams {
    /// Atomic density N, m⁻³.
    pub density: f64,
    /// Dipole moment of |1⟩ ↔ |3⟩, C·m.
    pub mu13: f64,
    /// Dipole moment of |2⟩ ↔ |4⟩, C·m.
    pub mu24: f64,
    /// Decay rate of |3⟩, s⁻¹.
    pub gamma3: f64,
    /// Decay rate of |4⟩, s⁻¹.
    pub gamma4: f64,
    /// Drive Rabi frequency |Ω|, s⁻¹.
    pub rabi: f64,
    /// Signal detuning Δ from |2⟩ ↔ |4⟩, s⁻¹.
    pub signal_detuning: f64,
    /// Probe detuning δ from |1⟩ ↔ |3⟩, s⁻¹.
    pub probe_detuning: f64,
    /// Probe wavelength, m.
    pub wavelength: f64,
    /// Medium length L, m.
    pub length: f64,
    /// Beam cross-section S, m².
    pub area: f64,
    /// Probe duration τ_p, s.
    pub probe_duration: f64,
}

impl EitMediumParams {
    /// Cold rubidium gas at 795 nm with N = 10¹⁴ cm⁻³; the medium fills the
    /// horizontal cavity of `device`.
    pub fn rubidium(device: &DeviceParams) -> Self {
        Self {
            density: 1e20,
            mu13: 1e-29,
            mu24: 1e-29,
            gamma3: 1e6,
            gamma4: 1e6,
            rabi: 1e9,
            signal_detuning: 1e8,
            probe_detuning: 1e9,
            wavelength: 795e-9,
            length: device.geometry.horizontal_length(),
            area: 1e-10,
            probe_duration: 1e-9,
        }
    }

    /// Names of fields that are not strictly positive.
    pub fn non_positive_fields(&self) -> Vec<&'static str> {
        [
            ("density", self.density),
            ("mu13", self.mu13),
            ("mu24", self.mu24),
            ("gamma3", self.gamma3),
            ("gamma4", self.gamma4),
            ("rabi", self.rabi),
            ("signal_detuning", self.signal_detuning),
            ("probe_detuning", self.probe_detuning),
            ("wavelength", self.wavelength),
            ("length", self.length),
            ("area", self.area),
            ("probe_duration", self.probe_duration),
        ]
        .into_iter()
        .filter(|(_, v)| !(*v > 0.0))
        .map(|(n, _)| n)
        .collect()
    }

    pub fn validated(self) -> Result<Self> {
        let bad = self.non_positive_fields();
        if bad.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidInput(format!(
                "medium parameters must be positive: {}",
                bad.join(", ")
            )))
        }
    }
}

/// Kerr index n_K = N·μ13²·μ24²·|E_s|² / (8·ε0·ħ³·|Ω|²·Δ).
pub fn kerr_index(m: &EitMediumParams, es2: f64) -> f64 {
    m.density * m.mu13.powi(2) * m.mu24.powi(2) * es2
        / (8.0 * EPSILON_0 * HBAR.powi(3) * m.rabi.powi(2) * m.signal_detuning)
}

/// Probe group velocity v_g ≈ ε0·ħ·λ·|Ω|² / (4π·N·μ13²).
pub fn group_velocity(m: &EitMediumParams) -> f64 {
    EPSILON_0 * HBAR * m.wavelength * m.rabi.powi(2) / (4.0 * PI * m.density * m.mu13.powi(2))
}

/// Single-photon probe absorption coefficient, m⁻¹.
pub fn alpha1(m: &EitMediumParams) -> f64 {
    32.0 * PI * PI * m.density * m.mu13.powi(2) * m.gamma3 * m.probe_detuning.powi(2)
        / (EPSILON_0 * HBAR * m.wavelength * m.rabi.powi(4))
}

/// Two-photon (probe + signal) absorption coefficient, m⁻¹.
pub fn alpha2(m: &EitMediumParams, es2: f64) -> f64 {
    PI * PI * m.density * m.mu13.powi(2) * m.mu24.powi(2) * m.gamma4 * es2
        / (2.0 * EPSILON_0 * HBAR.powi(3) * m.wavelength * m.rabi.powi(2) * m.signal_detuning.powi(2))
}

/// (1 + τ_D²/2τ_s²)^{−1/2}.
pub fn broadening_factor(tau_d: f64, tau_s: f64) -> f64 {
    (1.0 + tau_d * tau_d / (2.0 * tau_s * tau_s)).powf(-0.5)
}

/// Pulse half-width τ_s at which the broadening factor equals `factor`.
pub fn tau_s_for_broadening(tau_d: f64, factor: f64) -> f64 {
    tau_d / (2.0 * (factor.powi(-2) - 1.0)).sqrt()
}

/// Squared peak field E0² = √(2/π)·ħω0 / (c·ε0·S·τ_s) of a single-photon
/// Gaussian signal.
pub fn single_photon_field_squared(omega0: f64, area: f64, tau_s: f64) -> f64 {
    (2.0 / PI).sqrt() * HBAR * omega0 / (C * EPSILON_0 * area * tau_s)
}

/// ∫|E_s(t)|² dt = (R1/R2)·2πħ/(ε0·λ0·S)·(1 + τ_D²/2τ_s²)^{−1/2}.
pub fn signal_energy_integral(device: &DeviceParams, tau_s: f64, medium: &EitMediumParams) -> Result<f64> {
    let tau_d = delay_time(device)?;
    let ratio = device.bs1.reflectivity / device.bs2.reflectivity;
    Ok(ratio * 2.0 * PI * HBAR / (EPSILON_0 * device.geometry.wavelength * medium.area)
        * broadening_factor(tau_d, tau_s))
}

/// Quadrature of the standing-wave intensity 2|E_{s,H}(t)|² built from the
/// delayed, broadened Gaussian intracavity envelope, over ±10(τ_s + τ_D).
pub fn signal_energy_integral_quadrature(
    device: &DeviceParams,
    tau_s: f64,
    medium: &EitMediumParams,
) -> Result<f64> {
    let tau_d = delay_time(device)?;
    let f = broadening_factor(tau_d, tau_s);
    let e0_sq = single_photon_field_squared(device.geometry.omega0(), medium.area, tau_s);
    let ratio = device.bs1.reflectivity / device.bs2.reflectivity;
    let peak = 2.0 * e0_sq / 4.0 * ratio * f * f;
    let width = 4.0 * tau_s * tau_s / (f * f);
    let half = 10.0 * (tau_s + tau_d);
    Ok(simpson(
        |t| {
            let x = t - tau_d;
            peak * (-2.0 * x * x / width).exp()
        },
        tau_d - half,
        tau_d + half,
        20_000,
    ))
}

/// Transit-time condition L/v_g ≳ 4·√(τ_s² + τ_D²/2).
fn transit_condition(device: &DeviceParams, medium: &EitMediumParams, tau_s: f64) -> Result<Condition> {
    let tau_d = delay_time(device)?;
    let lhs = medium.length / group_velocity(medium);
    let rhs = 4.0 * (tau_s * tau_s + tau_d * tau_d / 2.0).sqrt();
    Ok(Condition::new(
        "transit_time",
        "probe transit time L/v_g ≳ signal dwell 4√(τ_s² + τ_D²/2)",
        Relation::GreaterOrComparable,
        lhs,
        rhs,
    ))
}

/// Conditional phase shift from the closed-form field integral.
pub fn phase_shift(device: &DeviceParams, medium: &EitMediumParams, tau_s: f64) -> Result<Estimate<f64>> {
    let tau_d = delay_time(device)?;
    let ratio = device.bs1.reflectivity / device.bs2.reflectivity;
    let value = PI / 8.0 * ratio * medium.mu24.powi(2)
        / (EPSILON_0 * HBAR * device.geometry.wavelength * medium.area * medium.signal_detuning)
        * broadening_factor(tau_d, tau_s);
    let cond = transit_condition(device, medium, tau_s)?;
    let warning = (cond.status != Status::Satisfied).then(|| {
        format!(
            "time duration of the signal in the cavity exceeds the probe transit time (ratio {:.3})",
            cond.ratio
        )
    });
    Ok(Estimate { value, warning })
}

/// Phase shift from μ24²/(16ħ²Δ)·∫|E_s|²dt with the intracavity intensity
/// taken from the exact spectral synthesis of the horizontal-cavity fields.
pub fn phase_shift_numeric(
    device: &DeviceParams,
    medium: &EitMediumParams,
    pulse: &PulseSpec,
) -> Result<f64> {
    let grid = TimeGrid::default_for(device, pulse)?;
    phase_shift_numeric_on(device, medium, pulse, &grid)
}

/// As [`phase_shift_numeric`] on an explicit grid.
pub fn phase_shift_numeric_on(
    device: &DeviceParams,
    medium: &EitMediumParams,
    pulse: &PulseSpec,
    grid: &TimeGrid,
) -> Result<f64> {
    if pulse.amplitude == 0.0 {
        return Ok(0.0);
    }
    // Field integral for a unit-peak envelope, rescaled to one photon.
    let unit = horizontal_intensity_integral(device, pulse, grid)? / pulse.amplitude.powi(2);
    let e0_sq = single_photon_field_squared(device.geometry.omega0(), medium.area, pulse.tau_s);
    Ok(medium.mu24.powi(2) / (16.0 * HBAR * HBAR * medium.signal_detuning) * e0_sq * unit)
}

/// Two-photon absorption probability of the probe.
pub fn two_photon_probability(device: &DeviceParams, medium: &EitMediumParams, tau_s: f64) -> Result<f64> {
    let tau_d = delay_time(device)?;
    let ratio = device.bs1.reflectivity / device.bs2.reflectivity;
    Ok(PI * PI / 4.0 * medium.mu24.powi(2) * medium.gamma4
        / (EPSILON_0 * HBAR * medium.area * device.geometry.wavelength * medium.signal_detuning.powi(2))
        * ratio
        * broadening_factor(tau_d, tau_s))
}

/// Kind of inequality a condition expresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    /// lhs ≪ rhs
    MuchLess,
    /// lhs ≫ rhs
    MuchGreater,
    /// lhs ≲ rhs
    LessOrComparable,
    /// lhs ≳ rhs
    GreaterOrComparable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Satisfied,
    Marginal,
    Violated,
}

impl Status {
    /// "≪" classification: ratio < 0.1 satisfied, below 1 marginal, else violated.
    pub fn much(ratio: f64) -> Self {
        if ratio < 0.1 {
            Status::Satisfied
        } else if ratio < 1.0 {
            Status::Marginal
        } else {
            Status::Violated
        }
    }

    /// "≲" classification: ratio ≤ 1 satisfied.
    pub fn comparable(ratio: f64) -> Self {
        if ratio <= 1.0 {
            Status::Satisfied
        } else {
            Status::Violated
        }
    }
}

/// Ratio of the side that must be small to the side that must be large;
/// 0/0 counts as 0.
pub(crate) fn small_over_large(small: f64, large: f64) -> f64 {
    if small == 0.0 {
        0.0
    } else if large == 0.0 {
        f64::INFINITY
    } else {
        small / large
    }
}

/// One inequality evaluated numerically.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub key: &'static str,
    pub description: &'static str,
    pub relation: Relation,
    pub lhs: f64,
    pub rhs: f64,
    /// Small side over large side; below 1 means the inequality holds.
    pub ratio: f64,
    pub status: Status,
}

impl Condition {
    pub fn new(key: &'static str, description: &'static str, relation: Relation, lhs: f64, rhs: f64) -> Self {
        let (ratio, status) = match relation {
            Relation::MuchLess => {
                let r = small_over_large(lhs, rhs);
                (r, Status::much(r))
            }
            Relation::MuchGreater => {
                let r = small_over_large(rhs, lhs);
                (r, Status::much(r))
            }
            Relation::LessOrComparable => {
                let r = small_over_large(lhs, rhs);
                (r, Status::comparable(r))
            }
            Relation::GreaterOrComparable => {
                let r = small_over_large(rhs, lhs);
                (r, Status::comparable(r))
            }
        };
        Self {
            key,
            description,
            relation,
            lhs,
            rhs,
            ratio,
            status,
        }
    }
}

/// Resonant reflection cost of the chosen R1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InputCouplingNote {
    /// 1 − R1²/8.
    pub g11_approx: f64,
    /// R1/2.
    pub g21_approx: f64,
    /// R1²/4.
    pub reflection_probability: f64,
    pub g11_exact: f64,
    pub g21_exact: f64,
}

/// The free-medium alternative for the same medium and a co-propagating beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreeMediumComparison {
    /// Beam diameter l_D, m.
    pub beam_diameter: f64,
    /// Pulse linewidth Δω, s⁻¹.
    pub linewidth: f64,
    /// Single-photon |E|² for S = l_D² and τ_s = 1/Δω, V²/m².
    pub field_squared: f64,
    pub kerr_index: f64,
    /// Length for a phase shift of π, λ/(2 n_K), m.
    pub pi_length: f64,
    /// l_0 / v_g, s.
    pub switching_time: f64,
    /// Rayleigh length l_D²/λ, m.
    pub rayleigh_length: f64,
    /// Coupled-cavity switching time L/v_g, s.
    pub cavity_switching_time: f64,
}

pub fn free_medium_comparison(
    device: &DeviceParams,
    medium: &EitMediumParams,
    beam_diameter: f64,
    linewidth: f64,
) -> FreeMediumComparison {
    let area = beam_diameter * beam_diameter;
    let field_squared = single_photon_field_squared(device.geometry.omega0(), area, 1.0 / linewidth);
    let n_k = kerr_index(medium, field_squared);
    let v_g = group_velocity(medium);
    let pi_length = medium.wavelength / (2.0 * n_k);
    FreeMediumComparison {
        beam_diameter,
        linewidth,
        field_squared,
        kerr_index: n_k,
        pi_length,
        switching_time: pi_length / v_g,
        rayleigh_length: beam_diameter * beam_diameter / medium.wavelength,
        cavity_switching_time: medium.length / v_g,
    }
}

/// Everything needed to judge an XPM design point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XpmReport {
    pub tau_s: f64,
    pub tau_d: f64,
    pub broadening_factor: f64,
    pub delta_phi: f64,
    /// Factor by which Δφ falls short of π.
    pub factor_to_pi: f64,
    pub group_velocity: f64,
    pub alpha1: f64,
    pub alpha1_l: f64,
    pub p2: f64,
    pub p2_over_delta_phi: f64,
    pub energy_integral: f64,
    pub conditions: Vec<Condition>,
    pub input_coupling: InputCouplingNote,
    pub free_medium: FreeMediumComparison,
}

impl XpmReport {
    pub fn condition(&self, key: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.key == key)
    }
}

pub fn feasibility_report(device: &DeviceParams, medium: &EitMediumParams, tau_s: f64) -> Result<XpmReport> {
    if !(tau_s > 0.0) {
        return Err(Error::InvalidInput(format!("τ_s must be positive (got {tau_s})")));
    }
    let tau_d = delay_time(device)?;
    let ratio = device.bs1.reflectivity / device.bs2.reflectivity;
    let lambda = medium.wavelength;
    let v_g = group_velocity(medium);
    let a1 = alpha1(medium);
    let dphi = phase_shift(device, medium, tau_s)?.value;
    let p2 = two_photon_probability(device, medium, tau_s)?;
    let mu13_sq = medium.mu13.powi(2);

    let conditions = vec![
        transit_condition(device, medium, tau_s)?,
        Condition::new(
            "group_velocity",
            "v_g ≲ (√6/8)(R2/R1)c",
            Relation::LessOrComparable,
            v_g,
            6f64.sqrt() / 8.0 / ratio * C,
        ),
        Condition::new(
            "rabi_frequency",
            "|Ω|² ≲ (√6π/2)(R2/R1)(cμ13²/ε0ħλ)N",
            Relation::LessOrComparable,
            medium.rabi.powi(2),
            6f64.sqrt() * PI / 2.0 / ratio * C * mu13_sq / (EPSILON_0 * HBAR * lambda) * medium.density,
        ),
        Condition::new("two_photon_absorption", "P2 ≪ 1", Relation::MuchLess, p2, 1.0),
        Condition::new(
            "two_photon_to_phase",
            "P2/Δφ ≈ 2πγ4/Δ ≪ 1",
            Relation::MuchLess,
            p2 / dphi,
            1.0,
        ),
        Condition::new("probe_absorption", "α1·L ≪ 1", Relation::MuchLess, a1 * medium.length, 1.0),
        Condition::new(
            "probe_duration",
            "1/δ ≪ L/v_g",
            Relation::MuchLess,
            1.0 / medium.probe_detuning,
            medium.length / v_g,
        ),
        Condition::new(
            "atomic_density",
            "N ≫ 2ε0ħλγ3/(μ13²L)",
            Relation::MuchGreater,
            medium.density,
            2.0 * EPSILON_0 * HBAR * lambda * medium.gamma3 / (mu13_sq * medium.length),
        ),
        Condition::new(
            "probe_linewidth",
            "δ ≪ |Ω|²/(8πγ3)",
            Relation::MuchLess,
            medium.probe_detuning,
            medium.rabi.powi(2) / (8.0 * PI * medium.gamma3),
        ),
    ];

    let g = g_matrix(device, device.geometry.k0())?;
    let r1 = device.bs1.reflectivity;
    let input_coupling = InputCouplingNote {
        g11_approx: 1.0 - r1 * r1 / 8.0,
        g21_approx: r1 / 2.0,
        reflection_probability: r1 * r1 / 4.0,
        g11_exact: g.g11.norm(),
        g21_exact: g.g21.norm(),
    };

    Ok(XpmReport {
        tau_s,
        tau_d,
        broadening_factor: broadening_factor(tau_d, tau_s),
        delta_phi: dphi,
        factor_to_pi: PI / dphi,
        group_velocity: v_g,
        alpha1: a1,
        alpha1_l: a1 * medium.length,
        p2,
        p2_over_delta_phi: p2 / dphi,
        energy_integral: signal_energy_integral(device, tau_s, medium)?,
        conditions,
        input_coupling,
        free_medium: free_medium_comparison(device, medium, 10e-6, 1e6),
    })
}
