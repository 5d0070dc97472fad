//! Brute-force round-trip propagation through the network, used to check the
//! closed-form response.
//!
//! Nothing here uses the closed forms: every beam splitter applies
//! (t, ir; ir, t), every mirror reflects with −√(1 − A_M) and every segment
//! multiplies by e^{ikL} (steady state) or delays by its length (time domain).

use num_complex::Complex64;
use serde::Serialize;

use crate::constants::C;
use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::intracavity::{Segment, SegmentAmplitudes};
use crate::pulse::{propagate_pulse, PulseSpec, TimeGrid};
use crate::spectral::cis;

/// Local scattering coefficients of the network.
struct Nodes {
    r1: f64,
    t1: f64,
    r2: f64,
    t2: f64,
    /// −√(1 − A_M) for M1..M4.
    mirror: [f64; 4],
}

impl Nodes {
    fn new(p: &DeviceParams) -> Self {
        Self {
            r1: p.bs1.r(),
            t1: p.bs1.t(),
            r2: p.bs2.r(),
            t2: p.bs2.t(),
            mirror: p.mirrors.map(|m| -m.amplitude()),
        }
    }

    /// New departures from the arrivals at every element, plus outputs (a′, b′).
    /// `arr[s]` is the field at the far end of directed segment `s`.
    fn scatter(
        &self,
        arr: &[Complex64; 10],
        a: Complex64,
        b: Complex64,
    ) -> ([Complex64; 10], Complex64, Complex64) {
        use Segment::*;
        let i = Complex64::i();
        let at = |s: Segment| arr[s.index()];
        let mut dep = [Complex64::new(0.0, 0.0); 10];

        let from_m4 = at(M4ToBs1);
        let from_bs2 = at(Bs2ToBs1);
        dep[Bs1ToM4.index()] = i * self.r1 * a + self.t1 * from_bs2;
        dep[Bs1ToBs2.index()] = i * self.r1 * b + self.t1 * from_m4;
        let a_out = self.t1 * a + i * self.r1 * from_bs2;
        let b_out = self.t1 * b + i * self.r1 * from_m4;

        let u = at(Bs1ToBs2);
        let i1 = at(M1ToBs2);
        let i2 = at(M2ToBs2);
        let i3 = at(M3ToBs2);
        dep[Bs2ToM2.index()] = self.t2 * u + i * self.r2 * i1;
        dep[Bs2ToM3.index()] = i * self.r2 * u + self.t2 * i1;
        dep[Bs2ToBs1.index()] = self.t2 * i2 + i * self.r2 * i3;
        dep[Bs2ToM1.index()] = i * self.r2 * i2 + self.t2 * i3;

        dep[M4ToBs1.index()] = self.mirror[3] * at(Bs1ToM4);
        dep[M1ToBs2.index()] = self.mirror[0] * at(Bs2ToM1);
        dep[M2ToBs2.index()] = self.mirror[1] * at(Bs2ToM2);
        dep[M3ToBs2.index()] = self.mirror[2] * at(Bs2ToM3);
        (dep, a_out, b_out)
    }
}

/// Delay-line network: every directed segment holds its field for a whole
/// number of steps and applies a fixed phase on arrival.
struct DelayLines {
    nodes: Nodes,
    phase: [Complex64; 10],
    lines: [Vec<Complex64>; 10],
    heads: [usize; 10],
}

impl DelayLines {
    fn new(params: &DeviceParams, phase: [Complex64; 10], delays: [usize; 10]) -> Self {
        Self {
            nodes: Nodes::new(params),
            phase,
            lines: delays.map(|d| vec![Complex64::new(0.0, 0.0); d]),
            heads: [0; 10],
        }
    }

    /// Advances one step with inputs (a, b); returns new departures and outputs.
    fn step(&mut self, a: Complex64, b: Complex64) -> ([Complex64; 10], Complex64, Complex64) {
        let arr = std::array::from_fn(|s| self.lines[s][self.heads[s]] * self.phase[s]);
        let (dep, a_out, b_out) = self.nodes.scatter(&arr, a, b);
        for ((line, head), value) in self.lines.iter_mut().zip(&mut self.heads).zip(dep) {
            line[*head] = value;
            *head = (*head + 1) % line.len();
        }
        (dep, a_out, b_out)
    }
}

/// Converged monochromatic state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyState {
    pub a_out: Complex64,
    pub b_out: Complex64,
    /// Field at the departure face of every directed segment.
    pub departures: [Complex64; 10],
    /// Vertical-cavity round trips until convergence.
    pub iterations: usize,
}

impl SteadyState {
    /// Amplitudes in the reference convention of [`SegmentAmplitudes`]
    /// (departure face for outgoing paths, arrival face for returning ones).
    /// `b5` is left at zero.
    pub fn segment_amplitudes(&self, params: &DeviceParams, k: f64) -> SegmentAmplitudes {
        let v = |s: Segment| {
            let d = self.departures[s.index()];
            if s.referenced_at_departure() {
                d
            } else {
                d * cis(k * s.length(params))
            }
        };
        SegmentAmplitudes {
            a12: v(Segment::Bs1ToBs2),
            a21: v(Segment::Bs2ToBs1),
            a1m4: v(Segment::Bs1ToM4),
            am41: v(Segment::M4ToBs1),
            a2m1: v(Segment::Bs2ToM1),
            am12: v(Segment::M1ToBs2),
            a2m2: v(Segment::Bs2ToM2),
            am22: v(Segment::M2ToBs2),
            a2m3: v(Segment::Bs2ToM3),
            am32: v(Segment::M3ToBs2),
            b5: Complex64::new(0.0, 0.0),
        }
    }
}

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 10_000_000;

/// Fraction of the freshly scattered field taken at each hop. Plain hops
/// (weight 1) leave some modes of the closed network on the unit circle, so
/// they oscillate forever; any weight below 1 damps them and leaves the fixed
/// point unchanged.
const RELAXATION: f64 = 0.9;

/// Segment traversals in one vertical round trip BS1→M4→BS1→BS2→M2→BS2→BS1.
const HOPS_PER_ROUND_TRIP: usize = 6;

/// Drives the network with constant inputs (a, b) until no output or
/// departing field changes by more than `tol`·(|a| + |b|) over one iteration.
///
/// Each hop carries every departing field across its segment (phase e^{ikL})
/// and rescatters it at the far element; an iteration is one vertical round
/// trip worth of hops, so the count grows with the photon lifetime.
pub fn steady_state(
    params: &DeviceParams,
    k: f64,
    a: Complex64,
    b: Complex64,
    tol: f64,
    max_iter: usize,
) -> Result<SteadyState> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive (got {tol})")));
    }
    let nodes = Nodes::new(params);
    let phase = Segment::ALL.map(|s| cis(k * s.length(params)));
    let scale = (a.norm() + b.norm()).max(f64::MIN_POSITIVE);
    let zero = Complex64::new(0.0, 0.0);

    let mut prev = ([zero; 10], zero, zero);
    let mut change = f64::INFINITY;
    for iter in 1..=max_iter {
        let mut state = prev;
        for _ in 0..HOPS_PER_ROUND_TRIP {
            let arr = std::array::from_fn(|s| state.0[s] * phase[s]);
            let (fresh, a_out, b_out) = nodes.scatter(&arr, a, b);
            let dep = std::array::from_fn(|s| state.0[s] + RELAXATION * (fresh[s] - state.0[s]));
            state = (dep, a_out, b_out);
        }
        let (dep, a_out, b_out) = state;
        change = (a_out - prev.1).norm().max((b_out - prev.2).norm());
        for (new, old) in dep.iter().zip(&prev.0) {
            change = change.max((new - old).norm());
        }
        prev = state;
        // Nothing entered the cavities: the first pass is already the answer.
        let empty = iter == 1 && dep.iter().all(|z| z.norm() == 0.0);
        if empty || (iter > 1 && change < tol * scale) {
            return Ok(SteadyState {
                a_out,
                b_out,
                departures: dep,
                iterations: if empty { 1 } else { iter - 1 },
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        last_change: change / scale,
    })
}

/// First column (a = 1, b = 0) and second column (a = 0, b = 1) of the
/// response, from two steady-state runs.
pub fn oracle_g_columns(
    params: &DeviceParams,
    k: f64,
    tol: f64,
    max_iter: usize,
) -> Result<([Complex64; 2], [Complex64; 2])> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let col_a = steady_state(params, k, one, zero, tol, max_iter)?;
    let col_b = steady_state(params, k, zero, one, tol, max_iter)?;
    Ok(([col_a.a_out, col_a.b_out], [col_b.a_out, col_b.b_out]))
}

/// Output of an explicit delay-line simulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSteppingRecord {
    pub t: Vec<f64>,
    pub out_a: Vec<Complex64>,
    pub out_b: Vec<Complex64>,
    /// Steps per segment in [`Segment::ALL`] order.
    pub delays: [usize; 10],
}

/// Number of steps per segment for time step `dt`, or an error when a segment
/// would change length by more than 1e-3 relative.
pub fn lattice_delays(params: &DeviceParams, dt: f64) -> Result<[usize; 10]> {
    let mut out = [0usize; 10];
    for s in Segment::ALL {
        let len = s.length(params);
        let steps = (len / (C * dt)).round();
        let relative = ((steps * C * dt - len) / len).abs();
        if steps < 1.0 || relative > 1e-3 {
            return Err(Error::LatticeSnap {
                segment: s.name(),
                relative: if steps < 1.0 { 1.0 } else { relative },
            });
        }
        out[s.index()] = steps as usize;
    }
    Ok(out)
}

/// Delay-line simulation of the envelopes: the input enters BS1 at times
/// `t0 + n·dt`, every segment holds its envelope for its snapped number of steps
/// and applies the carrier phase of its true length. Every `record_every`-th
/// step is recorded.
pub fn time_stepping(
    params: &DeviceParams,
    pulse: &PulseSpec,
    dt: f64,
    t0: f64,
    duration: f64,
    record_every: usize,
) -> Result<TimeSteppingRecord> {
    if !(dt > 0.0) || !(duration > 0.0) || record_every == 0 {
        return Err(Error::InvalidInput(
            "time stepping needs positive dt, duration and stride".into(),
        ));
    }
    let delays = lattice_delays(params, dt)?;
    let phase = Segment::ALL.map(|s| cis(pulse.carrier_k * s.length(params)));
    let mut net = DelayLines::new(params, phase, delays);
    let zero = Complex64::new(0.0, 0.0);

    let steps = (duration / dt).round() as usize;
    let mut t = Vec::with_capacity(steps / record_every + 1);
    let mut out_a = Vec::with_capacity(t.capacity());
    let mut out_b = Vec::with_capacity(t.capacity());
    for n in 0..steps {
        let time = t0 + n as f64 * dt;
        let (_, a_out, b_out) = net.step(pulse.envelope(time), zero);
        if n % record_every == 0 {
            t.push(time);
            out_a.push(a_out);
            out_b.push(b_out);
        }
    }
    Ok(TimeSteppingRecord {
        t,
        out_a,
        out_b,
        delays,
    })
}

/// Largest time step on which every segment is a whole number of steps,
/// found from the segment lengths in half-wavelengths.
pub fn half_wave_lattice_step(params: &DeviceParams) -> Result<f64> {
    let half = 0.5 * params.geometry.wavelength;
    let mut common = 0u64;
    for s in Segment::ALL {
        let x = s.length(params) / half;
        let n = x.round();
        let relative = ((n - x) / x).abs();
        if n < 1.0 || relative > 1e-6 {
            return Err(Error::LatticeSnap {
                segment: s.name(),
                relative: if n < 1.0 { 1.0 } else { relative },
            });
        }
        common = gcd(common, n as u64);
    }
    Ok(common as f64 * half / C)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Time stepping against spectral synthesis on a shared grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SynthesisCheck {
    /// RMS of |a′_spectral − a′_stepped| over the grid.
    pub rms: f64,
    pub max: f64,
    /// Delay-line step, s.
    pub step: f64,
    /// Delay-line steps per grid sample.
    pub stride: usize,
    pub grid: TimeGrid,
}

/// Runs both propagators for `pulse`. The grid keeps the default start and
/// sample count; its spacing is rounded up to a whole number of lattice steps.
pub fn check_against_synthesis(params: &DeviceParams, pulse: &PulseSpec) -> Result<SynthesisCheck> {
    let step = half_wave_lattice_step(params)?;
    let base = TimeGrid::default_for(params, pulse)?;
    let stride = (base.dt() / step).ceil().max(1.0) as usize;
    let dt = stride as f64 * step;
    let grid = TimeGrid::new(base.start, base.start + dt * base.samples as f64, base.samples);
    let spectral = propagate_pulse(params, pulse, &grid)?;
    let stepped = time_stepping(params, pulse, step, grid.start, grid.stop - grid.start, stride)?;
    let n = spectral.out_a.len().min(stepped.out_a.len());
    let mut sum = 0.0;
    let mut max = 0.0f64;
    for i in 0..n {
        let d = (spectral.out_a[i] - stepped.out_a[i]).norm();
        sum += d * d;
        max = max.max(d);
    }
    Ok(SynthesisCheck {
        rms: (sum / n as f64).sqrt(),
        max,
        step,
        stride,
        grid,
    })
}
