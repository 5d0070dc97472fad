//! Frequency-domain scattering of the double cavity.
//!
//! Fields are monochromatic with time dependence e^{−iωt}; a path of length L
//! contributes e^{ikL}. The 2×2 matrix G maps the inputs (a, b) on both sides
//! of BS1 to the outputs (a′, b′).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{C, SINGULAR_EPS};
use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::optimize::{bisect, golden_section_min};

/// e^{iφ}.
#[inline]
pub(crate) fn cis(phi: f64) -> Complex64 {
    Complex64::from_polar(1.0, phi)
}

/// One-way phasors e^{ikL} of the five arms and their squares.
///
/// Phases of composite paths are formed as products of these, so rounding of
/// kL acts like a tiny length error rather than an inconsistency between
/// paths. The high-finesse horizontal cavity would otherwise amplify that
/// inconsistency into visible violations of energy conservation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ArmPhases {
    pub one_way: [Complex64; 5],
    pub round_trip: [Complex64; 5],
}

impl ArmPhases {
    pub fn new(params: &DeviceParams, k: f64) -> Self {
        let g = &params.geometry;
        let one_way = [g.l1, g.l2, g.l3, g.l4, g.l5].map(|l| cis(k * l));
        Self {
            one_way,
            round_trip: one_way.map(|e| e * e),
        }
    }
}

/// The coupling factor 𝓑 = (𝓑₁ + 𝓑₂ + 𝓑₃)/𝓑₄ together with its parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BFactors {
    pub b: Complex64,
    pub b1: Complex64,
    pub b2: Complex64,
    pub b3: Complex64,
    pub b4: Complex64,
    /// Set when |𝓑₄| fell below the singularity threshold and `b` was taken
    /// from the analytic limit instead of the quotient.
    pub limit: bool,
}

/// Complex 2×2 response; `g22` always equals `g11`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GMatrix {
    pub g11: Complex64,
    pub g12: Complex64,
    pub g21: Complex64,
    pub g22: Complex64,
    /// Propagated from [`BFactors::limit`].
    pub limit: bool,
}

impl GMatrix {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self {
            g11: one,
            g12: zero,
            g21: zero,
            g22: one,
            limit: false,
        }
    }

    /// (a′, b′) for inputs (a, b).
    pub fn apply(&self, a: Complex64, b: Complex64) -> (Complex64, Complex64) {
        (self.g11 * a + self.g12 * b, self.g21 * a + self.g22 * b)
    }

    /// Power leaving the device for unit power entering at `a` alone.
    pub fn column_a_power(&self) -> f64 {
        self.g11.norm_sqr() + self.g21.norm_sqr()
    }

    /// Power leaving the device for unit power entering at `b` alone.
    pub fn column_b_power(&self) -> f64 {
        self.g12.norm_sqr() + self.g22.norm_sqr()
    }
}

/// 𝓑 and its parts at wavenumber `k`.
///
/// For R2 = 0 the shared factor of numerator and 𝓑₄ is cancelled analytically,
/// giving 𝓑 = −(1−A2)·√(1−A_M2)·e^{i2k(L1+L4)}. For R2 > 0 with |𝓑₄| below
/// the singular threshold the numerator vanishes as well and the ratio of
/// k-derivatives is used. `limit` is set whenever |𝓑₄| is below threshold.
pub fn b_factors(params: &DeviceParams, k: f64) -> Result<BFactors> {
    let g = &params.geometry;
    let bs2 = &params.bs2;
    let (m1, m2, m3) = (
        params.m1().amplitude(),
        params.m2().amplitude(),
        params.m3().amplitude(),
    );
    let (r2p, t2p, a2) = (bs2.reflectivity, bs2.transmissivity, bs2.absorption);
    let lh = g.horizontal_length();
    let [e1, e2, e3, e4, _] = ArmPhases::new(params, k).round_trip;

    let x1 = g.l1 + g.l4 + lh;
    let x2 = g.l1 + g.l4;
    let x3 = g.l1 + g.l2;
    let x4h = lh;
    let x4v = g.l3 + g.l4;
    let (p1, p2, p3, p4h, p4v) = (e1 * e4 * e2 * e3, e1 * e4, e1 * e2, e2 * e3, e3 * e4);

    let b1 = (1.0 - a2).powi(2) * (m1 * m2 * m3) * p1;
    let b2 = -t2p * m2 * p2;
    let b3 = r2p * m3 * p3;
    let bracket = t2p * m3 * p4h - r2p * m2 * p4v;
    let b4 = 1.0 - m1 * bracket;
    let num = b1 + b2 + b3;

    // Near a removable zero both numerator and 𝓑₄ carry absolute noise of
    // order ε·2kL, so the quotient is only trusted well above that level.
    let threshold = SINGULAR_EPS.max(4.0 * f64::EPSILON * 2.0 * k.abs() * x1);
    let singular = b4.norm() < threshold;

    // With R2 = 0 the numerator is −(1−A2)·√(1−A_M2)·e^{i2k(L1+L4)}·𝓑₄, so the
    // quotient reduces to that prefactor for every k.
    if r2p == 0.0 {
        return Ok(BFactors {
            b: -(1.0 - a2) * m2 * p2,
            b1,
            b2,
            b3,
            b4,
            limit: singular,
        });
    }
    if !singular {
        return Ok(BFactors {
            b: num / b4,
            b1,
            b2,
            b3,
            b4,
            limit: false,
        });
    }

    let i2 = Complex64::new(0.0, 2.0);
    let dnum = i2 * (x1 * b1 + x2 * b2 + x3 * b3);
    let db4 = -m1 * (t2p * m3 * i2 * x4h * p4h - r2p * m2 * i2 * x4v * p4v);
    if db4.norm() < SINGULAR_EPS * x1.max(1.0) {
        return Err(Error::Singular {
            k,
            what: "B4 and its derivative vanish",
        });
    }
    let b = dnum / db4;
    Ok(BFactors {
        b,
        b1,
        b2,
        b3,
        b4,
        limit: true,
    })
}

/// Full response matrix at wavenumber `k`.
pub fn g_matrix(params: &DeviceParams, k: f64) -> Result<GMatrix> {
    let bs1 = &params.bs1;
    if bs1.reflectivity == 0.0 {
        let zero = Complex64::new(0.0, 0.0);
        let t1 = Complex64::new(bs1.t(), 0.0);
        return Ok(GMatrix {
            g11: t1,
            g12: zero,
            g21: zero,
            g22: t1,
            limit: false,
        });
    }
    let bf = b_factors(params, k)?;
    let e = params.m4().amplitude() * ArmPhases::new(params, k).round_trip[4];
    let den = 1.0 + bs1.transmissivity * e * bf.b;
    if den.norm() < SINGULAR_EPS {
        return Err(Error::Singular {
            k,
            what: "BS1 round-trip denominator vanishes",
        });
    }
    let g11 = bs1.t() * (1.0 + (1.0 - bs1.absorption) * e * bf.b) / den;
    let g12 = -bs1.reflectivity * bf.b / den;
    let g21 = bs1.reflectivity * e / den;
    Ok(GMatrix {
        g11,
        g12,
        g21,
        g22: g11,
        limit: bf.limit,
    })
}

/// Evenly spaced wavenumber grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralGrid {
    pub k_min: f64,
    pub k_max: f64,
    pub points: usize,
}

impl SpectralGrid {
    /// A single point is allowed only when `k_min == k_max`.
    pub fn new(k_min: f64, k_max: f64, points: usize) -> Result<Self> {
        let ok = (points >= 2 && k_max > k_min) || (points == 1 && k_max == k_min);
        if !ok || !k_min.is_finite() || !k_max.is_finite() {
            return Err(Error::InvalidInput(format!(
                "spectral grid needs k_min < k_max and at least 2 points (got {k_min}..{k_max}, {points})"
            )));
        }
        Ok(Self {
            k_min,
            k_max,
            points,
        })
    }

    pub fn single(k: f64) -> Self {
        Self {
            k_min: k,
            k_max: k,
            points: 1,
        }
    }

    /// k0·(1 − rel) … k0·(1 + rel).
    pub fn around(k0: f64, rel: f64, points: usize) -> Result<Self> {
        Self::new(k0 * (1.0 - rel), k0 * (1.0 + rel), points)
    }

    pub fn k(&self, i: usize) -> f64 {
        if self.points == 1 {
            return self.k_min;
        }
        let f = i as f64 / (self.points - 1) as f64;
        self.k_min + f * (self.k_max - self.k_min)
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(move |i| self.k(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResponseRow {
    pub k: f64,
    pub g: GMatrix,
    /// 1 − |G11|² − |G12|².
    pub p_absorb_a: f64,
}

/// Response at every grid point, in grid order.
pub fn response_sweep(params: &DeviceParams, grid: &SpectralGrid) -> Result<Vec<ResponseRow>> {
    (0..grid.points)
        .into_par_iter()
        .map(|i| {
            let k = grid.k(i);
            let g = g_matrix(params, k)?;
            let p_absorb_a = 1.0 - g.g11.norm_sqr() - g.g12.norm_sqr();
            Ok(ResponseRow { k, g, p_absorb_a })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Splitting {
    pub delta_k: f64,
    /// True for R2 = 0, where there is no splitting.
    pub degenerate: bool,
}

/// Quasi-Rabi splitting Δk ≈ √(R2/(L_H·L_V)).
pub fn splitting_estimate(params: &DeviceParams) -> Splitting {
    let r2 = params.bs2.reflectivity;
    let g = &params.geometry;
    if r2 <= 0.0 {
        return Splitting {
            delta_k: 0.0,
            degenerate: true,
        };
    }
    Splitting {
        delta_k: (r2 / (g.horizontal_length() * g.vertical_length())).sqrt(),
        degenerate: false,
    }
}

const ZERO_SCAN_POINTS: usize = 10_000;

/// The minima of |G11| nearest below and above k0, refined by golden section.
pub fn find_transmission_zeros(params: &DeviceParams) -> Result<(f64, f64)> {
    let est = splitting_estimate(params);
    if est.degenerate || params.bs1.reflectivity == 0.0 {
        return Err(Error::NoSplitResonance);
    }
    let k0 = params.geometry.k0();
    let lo = k0 - 5.0 * est.delta_k;
    let hi = k0 + 5.0 * est.delta_k;
    let step = (hi - lo) / (ZERO_SCAN_POINTS - 1) as f64;
    let ks: Vec<f64> = (0..ZERO_SCAN_POINTS).map(|i| lo + i as f64 * step).collect();
    let mags: Vec<f64> = ks
        .par_iter()
        .map(|&k| g_matrix(params, k).map(|g| g.g11.norm()))
        .collect::<Result<_>>()?;

    let mut below = None;
    let mut above = None;
    for i in 1..ZERO_SCAN_POINTS - 1 {
        if mags[i] < mags[i - 1] && mags[i] < mags[i + 1] {
            if ks[i] < k0 {
                below = Some(i);
            } else if above.is_none() {
                above = Some(i);
            }
        }
    }
    let (Some(ib), Some(ia)) = (below, above) else {
        return Err(Error::NoSplitResonance);
    };
    let refine = |i: usize| {
        let f = |k: f64| g_matrix(params, k).map(|g| g.g11.norm()).unwrap_or(f64::INFINITY);
        golden_section_min(f, ks[i - 1], ks[i + 1], 1e-12 * k0).0
    };
    Ok((refine(ib), refine(ia)))
}

/// L_D = R1·L_H/(2R2).
pub fn delay_length(params: &DeviceParams) -> Result<f64> {
    let r2 = params.bs2.reflectivity;
    if r2 <= 0.0 {
        return Err(Error::InfiniteDelay);
    }
    Ok(params.bs1.reflectivity * params.geometry.horizontal_length() / (2.0 * r2))
}

/// τ_D = L_D/c.
pub fn delay_time(params: &DeviceParams) -> Result<f64> {
    delay_length(params).map(|l| l / C)
}

/// A value with an optional out-of-regime warning.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate<T> {
    pub value: T,
    pub warning: Option<String>,
}

/// exp(i·L_D·δk − ½·L_D²·δk²), the narrowband form of G11 near k0.
pub fn g11_quadratic_approx(params: &DeviceParams, delta_k: f64) -> Result<Estimate<Complex64>> {
    let ld = delay_length(params)?;
    let x = ld * delta_k;
    let value = Complex64::new(-0.5 * x * x, x).exp();
    Ok(Estimate {
        value,
        warning: validity_warning(x),
    })
}

pub(crate) fn validity_warning(x: f64) -> Option<String> {
    (x.abs() >= 1.0).then(|| {
        format!("|δk|·L_D = {:.3} is outside the expansion regime (needs ≪ 1)", x.abs())
    })
}

/// Response of a single two-mirror cavity with mirror matrix (it, −r; −r, it).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingleCavityResponse {
    /// Reflected amplitude at the entrance mirror.
    pub q: Complex64,
    /// Transmitted amplitude at the far mirror.
    pub p: Complex64,
    /// Resonant transmission T²/(T+A)².
    pub transmission_resonant: f64,
    /// Resonant reflection A²R/(T+A)².
    pub reflection_resonant: f64,
    /// Lorentzian half-width (T+A)/(2√R·L).
    pub linewidth: f64,
}

impl SingleCavityResponse {
    /// Lorentzian transmission at detuning k − k0.
    pub fn transmission_lorentzian(&self, detuning: f64) -> f64 {
        let x = detuning / self.linewidth;
        self.transmission_resonant / (1.0 + x * x)
    }

    /// Two-term Lorentzian reflection at detuning k − k0 for mirror absorption `a`.
    pub fn reflection_lorentzian(&self, detuning: f64, a: f64) -> f64 {
        let x2 = (detuning / self.linewidth).powi(2);
        (self.reflection_resonant + (1.0 - a) * x2) / (1.0 + x2)
    }
}

pub fn single_cavity_response(r: f64, t: f64, a: f64, length: f64, k: f64) -> SingleCavityResponse {
    let amp_r = r.max(0.0).sqrt();
    let round = cis(2.0 * k * length);
    let den = 1.0 - r * round;
    let q = amp_r * ((1.0 - a) * round - 1.0) / den;
    let p = -t * cis(k * length) / den;
    let loss = t + a;
    SingleCavityResponse {
        q,
        p,
        transmission_resonant: t * t / (loss * loss),
        reflection_resonant: a * a * r / (loss * loss),
        linewidth: loss / (2.0 * amp_r * length),
    }
}

/// Half-width at half maximum of the exact |p|² resonance nearest `k_res`,
/// found by bisection on the upper flank.
pub fn single_cavity_half_width(r: f64, t: f64, a: f64, length: f64, k_res: f64) -> Option<f64> {
    let peak = single_cavity_response(r, t, a, length, k_res).p.norm_sqr();
    let half = 0.5 * peak;
    // Free spectral range is π/L; the half-width point lies well inside a quarter of it.
    let span = std::f64::consts::FRAC_PI_2 / length;
    let f = |dk: f64| single_cavity_response(r, t, a, length, k_res + dk).p.norm_sqr() - half;
    bisect(f, 0.0, span, 1e-15 * span.max(1.0)).map(f64::abs)
}

/// Phase shift ω0·τ_D·v/c of a device moving at speed `v` along the beam.
pub fn moving_phase_shift(params: &DeviceParams, v: f64) -> Result<f64> {
    Ok(params.geometry.omega0() * delay_time(params)? * v / C)
}
