mod common;

use common::{random_device, random_k, time_stepping_vs_spectral};
use eitcav_core::device::{preset_device, BeamSplitterSpec};
use eitcav_core::oracle::{oracle_g_columns, steady_state, time_stepping, DEFAULT_MAX_ITER, DEFAULT_TOL};
use eitcav_core::pulse::PulseSpec;
use eitcav_core::spectral::{delay_length, delay_time, g_matrix};
use eitcav_core::Complex64;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn worst_column_deviation(p: &eitcav_core::DeviceParams, k: f64) -> f64 {
    let g = g_matrix(p, k).unwrap();
    let (col_a, col_b) = oracle_g_columns(p, k, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    [col_a[0] - g.g11, col_a[1] - g.g21, col_b[0] - g.g12, col_b[1] - g.g22]
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

#[test]
fn random_devices_match_closed_form_at_random_wavenumbers() {
    let mut rng = StdRng::seed_from_u64(11);
    for i in 0..25 {
        let p = random_device(&mut rng, i % 2 == 1);
        for _ in 0..25 {
            let k = random_k(&mut rng, &p);
            let dev = worst_column_deviation(&p, k);
            assert!(dev < 1e-9, "device {i} at k = {k}: deviation {dev:e}");
        }
    }
}

#[test]
fn high_finesse_preset_matches_at_resonance() {
    let p = preset_device("fig2a").unwrap();
    assert!(worst_column_deviation(&p, p.geometry.k0()) < 1e-9);
}

#[test]
fn iteration_count_tracks_delay_length() {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let count = |name: &str| {
        let p = preset_device(name).unwrap();
        let s = steady_state(&p, p.geometry.k0(), one, zero, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        (s.iterations as f64, delay_length(&p).unwrap())
    };
    let (n_a, ld_a) = count("fig2a");
    let (n_b, ld_b) = count("fig2b");
    let ratio = (n_a / n_b) / (ld_a / ld_b);
    assert!((1.0 / 3.0..3.0).contains(&ratio), "iteration ratio {:.2} vs delay ratio {:.2}", n_a / n_b, ld_a / ld_b);
}

#[test]
fn time_stepping_matches_spectral_synthesis() {
    let p = preset_device("fig3").unwrap();
    let rms = time_stepping_vs_spectral(&p, 4.0 * delay_time(&p).unwrap());
    assert!(rms < 1e-6, "rms {rms:e}");
}

#[test]
fn lossless_time_stepping_conserves_energy() {
    let mut p = preset_device("fig3").unwrap();
    p.bs1 = BeamSplitterSpec::lossless(0.3);
    p.bs2 = BeamSplitterSpec::lossless(0.1);
    let tau_d = delay_time(&p).unwrap();
    let pulse = PulseSpec::resonant(&p, 4.0 * tau_d);
    let step = 5.0 * p.geometry.wavelength / eitcav_core::constants::C;
    let start = -40.0 * tau_d;
    let rec = time_stepping(&p, &pulse, step, start, 400.0 * tau_d, 1).unwrap();
    let input: f64 = rec.t.iter().map(|&t| pulse.envelope(t).norm_sqr()).sum();
    let output: f64 = rec.out_a.iter().chain(&rec.out_b).map(|z| z.norm_sqr()).sum();
    assert!((output / input - 1.0).abs() < 1e-8, "balance {:e}", output / input - 1.0);
}
