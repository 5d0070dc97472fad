//! Field amplitudes on the internal paths of the double cavity.
//!
//! Each amplitude is referenced at the face of the element it leaves
//! (`a12`, `a1m4`, `a2m1`, `a2m2`, `a2m3`) or the element it arrives at
//! (`a21`, `am41`, `am12`, `am22`, `am32`).

use num_complex::Complex64;
use serde::Serialize;

use crate::constants::SINGULAR_EPS;
use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::spectral::{b_factors, delay_length, validity_warning, ArmPhases, Estimate};

/// Directed internal path, one per propagation direction of each segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Segment {
    Bs1ToM4,
    M4ToBs1,
    Bs1ToBs2,
    Bs2ToBs1,
    Bs2ToM1,
    M1ToBs2,
    Bs2ToM2,
    M2ToBs2,
    Bs2ToM3,
    M3ToBs2,
}

impl Segment {
    pub const ALL: [Segment; 10] = [
        Segment::Bs1ToM4,
        Segment::M4ToBs1,
        Segment::Bs1ToBs2,
        Segment::Bs2ToBs1,
        Segment::Bs2ToM1,
        Segment::M1ToBs2,
        Segment::Bs2ToM2,
        Segment::M2ToBs2,
        Segment::Bs2ToM3,
        Segment::M3ToBs2,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Amplitude name used in reports.
    pub fn name(self) -> &'static str {
        match self {
            Segment::Bs1ToM4 => "a1M4",
            Segment::M4ToBs1 => "aM41",
            Segment::Bs1ToBs2 => "a12",
            Segment::Bs2ToBs1 => "a21",
            Segment::Bs2ToM1 => "a2M1",
            Segment::M1ToBs2 => "aM12",
            Segment::Bs2ToM2 => "a2M2",
            Segment::M2ToBs2 => "aM22",
            Segment::Bs2ToM3 => "a2M3",
            Segment::M3ToBs2 => "aM32",
        }
    }

    pub fn length(self, params: &DeviceParams) -> f64 {
        let g = &params.geometry;
        match self {
            Segment::Bs1ToM4 | Segment::M4ToBs1 => g.l5,
            Segment::Bs1ToBs2 | Segment::Bs2ToBs1 => g.l1,
            Segment::Bs2ToM1 | Segment::M1ToBs2 => g.l3,
            Segment::Bs2ToM2 | Segment::M2ToBs2 => g.l4,
            Segment::Bs2ToM3 | Segment::M3ToBs2 => g.l2,
        }
    }

    /// True for paths inside the horizontal cavity (BS2 – M1 and BS2 – M3).
    pub fn is_horizontal(self) -> bool {
        matches!(
            self,
            Segment::Bs2ToM1 | Segment::M1ToBs2 | Segment::Bs2ToM3 | Segment::M3ToBs2
        )
    }

    /// True when the reference point is the departure face.
    pub fn referenced_at_departure(self) -> bool {
        self.index().is_multiple_of(2)
    }
}

/// Amplitudes on all internal paths for given inputs (a, b).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentAmplitudes {
    pub a12: Complex64,
    pub a21: Complex64,
    pub a1m4: Complex64,
    pub am41: Complex64,
    pub a2m1: Complex64,
    pub am12: Complex64,
    pub a2m2: Complex64,
    pub am22: Complex64,
    pub a2m3: Complex64,
    pub am32: Complex64,
    pub b5: Complex64,
}

impl SegmentAmplitudes {
    pub fn get(&self, segment: Segment) -> Complex64 {
        match segment {
            Segment::Bs1ToM4 => self.a1m4,
            Segment::M4ToBs1 => self.am41,
            Segment::Bs1ToBs2 => self.a12,
            Segment::Bs2ToBs1 => self.a21,
            Segment::Bs2ToM1 => self.a2m1,
            Segment::M1ToBs2 => self.am12,
            Segment::Bs2ToM2 => self.a2m2,
            Segment::M2ToBs2 => self.am22,
            Segment::Bs2ToM3 => self.a2m3,
            Segment::M3ToBs2 => self.am32,
        }
    }

    /// Amplitudes in [`Segment::ALL`] order.
    pub fn to_array(&self) -> [Complex64; 10] {
        Segment::ALL.map(|s| self.get(s))
    }

    /// Outputs (a′, b′) reconstructed from the fields returning to BS1.
    pub fn outputs(&self, params: &DeviceParams, a: Complex64, b: Complex64) -> (Complex64, Complex64) {
        let (r1, t1) = (params.bs1.r(), params.bs1.t());
        let i = Complex64::i();
        (t1 * a + i * r1 * self.a21, t1 * b + i * r1 * self.am41)
    }
}

pub fn segment_amplitudes(
    params: &DeviceParams,
    k: f64,
    a: Complex64,
    b: Complex64,
) -> Result<SegmentAmplitudes> {
    let zero = Complex64::new(0.0, 0.0);
    let (m1, m2, m3, m4) = (
        params.m1().amplitude(),
        params.m2().amplitude(),
        params.m3().amplitude(),
        params.m4().amplitude(),
    );
    let (r2p, t2p, a2) = (
        params.bs2.reflectivity,
        params.bs2.transmissivity,
        params.bs2.absorption,
    );
    let ph = ArmPhases::new(params, k);
    let [_, e2, e3, e4, e5] = ph.round_trip;
    let b5 = 1.0 - m1 * e3 * (t2p * m3 * e2 - r2p * m2 * e4);

    if params.bs1.reflectivity == 0.0 {
        return Ok(SegmentAmplitudes {
            a12: zero,
            a21: zero,
            a1m4: zero,
            am41: zero,
            a2m1: zero,
            am12: zero,
            a2m2: zero,
            am22: zero,
            a2m3: zero,
            am32: zero,
            b5,
        });
    }

    let i = Complex64::i();
    let (r1, t1, big_t1) = (params.bs1.r(), params.bs1.t(), params.bs1.transmissivity);
    let bb = b_factors(params, k)?.b;
    let e = m4 * e5;
    let den = 1.0 + big_t1 * e * bb;
    if den.norm() < SINGULAR_EPS {
        return Err(Error::Singular {
            k,
            what: "BS1 round-trip denominator vanishes",
        });
    }
    if b5.norm() < SINGULAR_EPS {
        return Err(Error::Singular {
            k,
            what: "B5 vanishes",
        });
    }

    let a12 = i * r1 * (-t1 * e * a + b) / den;
    let a21 = bb * a12;
    let a1m4 = i * r1 * (a + t1 * bb * b) / den;
    let am41 = -e * a1m4;

    let (r2, t2) = (params.bs2.r(), params.bs2.t());
    let pre = ph.one_way[0] * a12 / b5;
    let a2m1 = -i * r2 * t2 * (m3 * e2 + m2 * e4) * pre;
    let am12 = -m1 * e3 * a2m1;
    let a2m2 = t2 * (1.0 - m1 * m3 * (1.0 - a2) * e2 * e3) * pre;
    let am22 = -m2 * e4 * a2m2;
    // Sign follows from the splitter rule (t, ir; ir, t) at BS2.
    let a2m3 = i * r2 * (1.0 + m1 * m2 * (1.0 - a2) * e3 * e4) * pre;
    let am32 = -m3 * e2 * a2m3;

    Ok(SegmentAmplitudes {
        a12,
        a21,
        a1m4,
        am41,
        a2m1,
        am12,
        a2m2,
        am22,
        a2m3,
        am32,
        b5,
    })
}

/// Horizontal-cavity field ½√(R1/R2)·(1 + iδk·L_D − δk²·L_D²)·a near k0.
pub fn horizontal_field_approx(
    params: &DeviceParams,
    delta_k: f64,
    a: Complex64,
) -> Result<Estimate<Complex64>> {
    let ld = delay_length(params)?;
    let x = delta_k * ld;
    let scale = 0.5 * (params.bs1.reflectivity / params.bs2.reflectivity).sqrt();
    Ok(Estimate {
        value: scale * Complex64::new(1.0 - x * x, x) * a,
        warning: validity_warning(x),
    })
}

/// Leading vertical-cavity amplitude i·√R1/2·a at resonance.
pub fn vertical_field_approx(params: &DeviceParams, a: Complex64) -> Complex64 {
    Complex64::i() * params.bs1.r() / 2.0 * a
}

/// Resonant intensity enhancement R1/(4R2) of the horizontal cavity.
pub fn enhancement_factor(params: &DeviceParams) -> Result<f64> {
    let r2 = params.bs2.reflectivity;
    if r2 <= 0.0 {
        return Err(Error::InvalidInput(
            "R2 = 0: horizontal cavity is decoupled, enhancement is unbounded".into(),
        ));
    }
    Ok(params.bs1.reflectivity / (4.0 * r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{preset_device, BeamSplitterSpec};
    use crate::spectral::{cis, g_matrix};

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn no_input_coupling_leaves_cavities_empty() {
        let mut p = preset_device("fig2a").unwrap();
        p.bs1 = BeamSplitterSpec::lossless(0.0);
        let s = segment_amplitudes(&p, p.geometry.k0(), one(), one()).unwrap();
        assert!(s.to_array().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn mirror_and_return_relations() {
        let p = preset_device("fig2a").unwrap();
        let k = p.geometry.k0() + 13.0;
        let s = segment_amplitudes(&p, k, one(), Complex64::new(0.3, -0.2)).unwrap();
        let g = &p.geometry;
        let bb = b_factors(&p, k).unwrap().b;
        assert!((s.a21 - bb * s.a12).norm() < 1e-12);
        let m = |i: usize| p.mirrors[i].amplitude();
        assert!(((s.am41 + m(3) * cis(2.0 * k * g.l5) * s.a1m4) / s.am41).norm() < 1e-8);
        assert!(((s.am12 + m(0) * cis(2.0 * k * g.l3) * s.a2m1) / s.am12).norm() < 1e-8);
        assert!(((s.am22 + m(1) * cis(2.0 * k * g.l4) * s.a2m2) / s.am22).norm() < 1e-8);
        assert!(((s.am32 + m(2) * cis(2.0 * k * g.l2) * s.a2m3) / s.am32).norm() < 1e-8);
    }

    #[test]
    fn outputs_match_g_matrix() {
        let p = preset_device("fig2b").unwrap();
        let k = p.geometry.k0() - 40.0;
        let (a, b) = (Complex64::new(0.7, 0.1), Complex64::new(-0.2, 0.5));
        let s = segment_amplitudes(&p, k, a, b).unwrap();
        let (ap, bp) = s.outputs(&p, a, b);
        let (ga, gb) = g_matrix(&p, k).unwrap().apply(a, b);
        assert!((ap - ga).norm() < 1e-12);
        assert!((bp - gb).norm() < 1e-12);
    }

    #[test]
    fn resonant_enhancement_fig2a() {
        let p = preset_device("fig2a").unwrap().lossless();
        let s = segment_amplitudes(&p, p.geometry.k0(), one(), Complex64::new(0.0, 0.0)).unwrap();
        let ratio = s.am12.norm_sqr();
        assert!((ratio / 25_000.0 - 1.0).abs() < 0.02, "{ratio}");
        // R1·T1/(2 − R1)² exactly for the lossless resonant device.
        assert!((s.a12.norm_sqr() - 0.09 / 3.61).abs() < 1e-9);
        // Dark arm, up to the rounding of k0 amplified by the cavity finesse.
        assert!(s.a2m2.norm() < 1e-7);
    }

    #[test]
    fn horizontal_approx_tracks_exact_field() {
        let p = preset_device("fig2a").unwrap().lossless();
        let ld = delay_length(&p).unwrap();
        let at0 = horizontal_field_approx(&p, 0.0, one()).unwrap();
        assert!((at0.value.norm() - 0.5 * 1e5f64.sqrt()).abs() < 1e-9);
        let dk = 0.05 / ld;
        let approx = horizontal_field_approx(&p, dk, one()).unwrap().value;
        let exact = segment_amplitudes(&p, p.geometry.k0() + dk, one(), Complex64::new(0.0, 0.0))
            .unwrap()
            .am12;
        assert!((approx.norm() / exact.norm() - 1.0).abs() < 0.01);
    }

    #[test]
    fn vertical_approx_and_enhancement() {
        let p = preset_device("fig2a").unwrap();
        let av = vertical_field_approx(&p, one());
        assert!((av.norm_sqr() - 0.025).abs() < 1e-15);
        assert!((av.arg() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((enhancement_factor(&p).unwrap() - 25_000.0).abs() < 1e-9);
        let fig2b = preset_device("fig2b").unwrap();
        assert!((enhancement_factor(&fig2b).unwrap() - 2_500.0).abs() < 1e-9);
        let mut q = p;
        q.bs2 = BeamSplitterSpec::lossless(q.bs1.reflectivity);
        assert!((enhancement_factor(&q).unwrap() - 0.25).abs() < 1e-15);
        q.bs2 = BeamSplitterSpec::lossless(0.0);
        assert!(enhancement_factor(&q).is_err());
    }
}
