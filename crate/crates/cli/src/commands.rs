use std::path::PathBuf;

use eitcav_core::config::load_scenario;
use eitcav_core::device::{preset, MirrorSpec};
use eitcav_core::intracavity::{segment_amplitudes, Segment};
use eitcav_core::loss::{absorption_sweep, ifm_fractions, log_space, MirrorSet};
use eitcav_core::oracle::{check_against_synthesis, steady_state};
use eitcav_core::pulse::{propagate_pulse, PulseSpec, TimeGrid};
use eitcav_core::spectral::{delay_time, g_matrix, response_sweep, SpectralGrid};
use eitcav_core::xpm::{
    feasibility_report, phase_shift, phase_shift_numeric, tau_s_for_broadening, EitMediumParams, XpmReport,
};
use eitcav_core::{Complex64, DeviceParams, Preset};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::output::{
    emit, number, pretty, write_manifest, Cell, CliError, CliResult, RunManifest, Table, DETERMINISM_NOTE,
};
use crate::{
    CommonArgs, Format, IfmArgs, IntracavityArgs, LossArgs, OracleArgs, PulseArgs, PulseWidth, ResponseArgs, Source, Sweep,
    XpmArgs,
};

/// Oracle agreement demanded by the cross-check flags.
const ORACLE_LIMIT: f64 = 1e-9;
/// RMS agreement demanded of time stepping against spectral synthesis.
const SYNTHESIS_LIMIT: f64 = 1e-6;

struct Loaded {
    scenario: Preset,
    preset: Option<String>,
    config: Option<PathBuf>,
}

fn load(source: &Source) -> CliResult<Loaded> {
    let scenario = match (&source.preset, &source.config) {
        (Some(name), _) => preset(name)?,
        (None, Some(path)) => load_scenario(path)?,
        (None, None) => return Err(CliError::Usage("give --preset or --config".into())),
    };
    Ok(Loaded {
        scenario,
        preset: source.preset.clone(),
        config: source.config.clone(),
    })
}

/// Writes the data and, when it went to a file, the manifest beside it.
fn finish(
    command: &'static str,
    loaded: &Loaded,
    out: Option<&PathBuf>,
    text: &str,
    options: Value,
    checks: Option<Value>,
    medium: Option<EitMediumParams>,
) -> CliResult<()> {
    emit(out.map(PathBuf::as_path), text)?;
    if let Some(path) = out {
        write_manifest(&RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            preset: loaded.preset.clone(),
            config: loaded.config.clone(),
            device: loaded.scenario.device,
            medium: medium.or(loaded.scenario.medium),
            options,
            outputs: vec![path.clone()],
            determinism: DETERMINISM_NOTE,
            checks,
        })?;
    }
    Ok(())
}

fn table_format(common: &CommonArgs) -> CliResult<Format> {
    match common.format {
        Format::Text => Err(CliError::Usage("this command writes csv or json".into())),
        f => Ok(f),
    }
}

/// τ_s from `--tau-s`, `--tau-s-rel`·τ_D, or `default_rel`·τ_D.
fn resolve_tau_s(device: &DeviceParams, width: &PulseWidth, default_rel: f64) -> CliResult<f64> {
    let tau_s = match (width.tau_s, width.tau_s_rel) {
        (Some(t), _) => t,
        (None, rel) => rel.unwrap_or(default_rel) * delay_time(device)?,
    };
    if tau_s.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || !tau_s.is_finite() {
        return Err(CliError::Usage(format!("pulse half-width must be positive (got {tau_s})")));
    }
    Ok(tau_s)
}

fn guard(what: &'static str, deviation: f64, limit: f64) -> CliResult<()> {
    if deviation <= limit {
        Ok(())
    } else {
        Err(CliError::OracleMismatch { what, deviation, limit })
    }
}

fn default_span(device: &DeviceParams) -> (f64, f64) {
    let k0 = device.geometry.k0();
    (k0 * (1.0 - 1e-4), k0 * (1.0 + 1e-4))
}

/// Worst element-wise difference between the closed form and the oracle at `k`.
fn oracle_deviation(device: &DeviceParams, k: f64, tol: f64, max_iter: usize) -> CliResult<(f64, usize)> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let g = g_matrix(device, k)?;
    let col_a = steady_state(device, k, one, zero, tol, max_iter)?;
    let col_b = steady_state(device, k, zero, one, tol, max_iter)?;
    let worst = [
        col_a.a_out - g.g11,
        col_a.b_out - g.g21,
        col_b.a_out - g.g12,
        col_b.b_out - g.g22,
    ]
    .iter()
    .map(|z| z.norm())
    .fold(0.0, f64::max);
    Ok((worst, col_a.iterations.max(col_b.iterations)))
}

pub fn response(args: ResponseArgs) -> CliResult<()> {
    let loaded = load(&args.common.source)?;
    let format = table_format(&args.common)?;
    let device = &loaded.scenario.device;
    let (lo, hi) = default_span(device);
    let grid = SpectralGrid::new(args.kmin.unwrap_or(lo), args.kmax.unwrap_or(hi), args.points)?;
    let k0 = device.geometry.k0();
    let rows = response_sweep(device, &grid)?;

    let mut table = Table::new(&[
        "k_rad_per_m",
        "delta_k_over_k0",
        "re_g11",
        "im_g11",
        "abs_g11",
        "abs_g12",
        "abs_g21",
        "p_absorb_a",
    ]);
    for r in &rows {
        table.push(vec![
            Cell::Num(r.k),
            Cell::Num((r.k - k0) / k0),
            Cell::Num(r.g.g11.re),
            Cell::Num(r.g.g11.im),
            Cell::Num(r.g.g11.norm()),
            Cell::Num(r.g.g12.norm()),
            Cell::Num(r.g.g21.norm()),
            Cell::Num(r.p_absorb_a),
        ]);
    }

    let checks = if args.oracle {
        let deviations = rows
            .par_iter()
            .map(|r| oracle_deviation(device, r.k, eitcav_core::oracle::DEFAULT_TOL, eitcav_core::oracle::DEFAULT_MAX_ITER))
            .collect::<CliResult<Vec<_>>>()?;
        let worst = deviations.iter().map(|d| d.0).fold(0.0, f64::max);
        guard("closed-form response", worst, ORACLE_LIMIT)?;
        Some(json!({ "oracle_max_deviation": number(worst), "limit": ORACLE_LIMIT }))
    } else {
        None
    };

    let options = json!({
        "kmin": number(grid.k_min),
        "kmax": number(grid.k_max),
        "points": grid.points,
        "format": format,
        "oracle": args.oracle,
    });
    finish("response", &loaded, args.common.out.as_ref(), &table.render(format)?, options, checks, None)
}

pub fn pulse(args: PulseArgs) -> CliResult<()> {
    let loaded = load(&args.common.source)?;
    let format = table_format(&args.common)?;
    let device = &loaded.scenario.device;
    let tau_s = resolve_tau_s(device, &args.width, 1.0)?;
    let input = PulseSpec::resonant(device, tau_s);

    let (grid, checks) = if args.oracle {
        let check = check_against_synthesis(device, &input)?;
        guard("time stepping against spectral synthesis (RMS)", check.rms, SYNTHESIS_LIMIT)?;
        let checks = json!({
            "time_stepping_rms": number(check.rms),
            "time_stepping_max": number(check.max),
            "step_s": number(check.step),
            "stride": check.stride,
            "limit": SYNTHESIS_LIMIT,
        });
        (check.grid, Some(checks))
    } else {
        (TimeGrid::default_for(device, &input)?, None)
    };
    let fractions = propagate_pulse(device, &input, &grid)?.fractions();

    let mut table = Table::new(&[
        "t_s",
        "abs2_in",
        "abs2_out_a",
        "abs2_out_b",
        "frac_front",
        "frac_H",
        "frac_V",
        "frac_behind",
    ]);
    for i in 0..fractions.t.len() {
        table.push(vec![
            Cell::Num(fractions.t[i]),
            Cell::Num(fractions.intensity_in[i]),
            Cell::Num(fractions.intensity_out_a[i]),
            Cell::Num(fractions.intensity_out_b[i]),
            Cell::Num(fractions.front[i]),
            Cell::Num(fractions.horizontal[i]),
            Cell::Num(fractions.vertical[i]),
            Cell::Num(fractions.behind[i]),
        ]);
    }
    let options = json!({
        "tau_s": number(tau_s),
        "grid": { "start": number(grid.start), "stop": number(grid.stop), "samples": grid.samples },
        "intensity_normalisation": "input peak intensity",
        "format": format,
        "oracle": args.oracle,
    });
    finish("pulse", &loaded, args.common.out.as_ref(), &table.render(format)?, options, checks, None)
}

pub fn intracavity(args: IntracavityArgs) -> CliResult<()> {
    let loaded = load(&args.common.source)?;
    let format = table_format(&args.common)?;
    let device = &loaded.scenario.device;
    let k = device.geometry.k0() + args.delta_k;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let amplitudes = segment_amplitudes(device, k, one, zero)?;

    let mut table = Table::new(&["segment", "re", "im", "abs2_ratio_to_input"]);
    for s in Segment::ALL {
        let z = amplitudes.get(s);
        table.push(vec![
            Cell::Text(s.name().to_string()),
            Cell::Num(z.re),
            Cell::Num(z.im),
            Cell::Num(z.norm_sqr()),
        ]);
    }

    let checks = if args.oracle {
        let state = steady_state(
            device,
            k,
            one,
            zero,
            eitcav_core::oracle::DEFAULT_TOL,
            eitcav_core::oracle::DEFAULT_MAX_ITER,
        )?;
        let brute = state.segment_amplitudes(device, k);
        let peak = Segment::ALL.iter().map(|&s| amplitudes.get(s).norm()).fold(1.0, f64::max);
        let worst = Segment::ALL
            .iter()
            .map(|&s| (brute.get(s) - amplitudes.get(s)).norm() / peak)
            .fold(0.0, f64::max);
        guard("segment amplitudes (relative to the largest)", worst, ORACLE_LIMIT)?;
        Some(json!({ "oracle_max_relative_deviation": number(worst), "iterations": state.iterations }))
    } else {
        None
    };
    let options = json!({ "k": number(k), "delta_k": number(args.delta_k), "input": "a = 1, b = 0", "format": format });
    finish("intracavity", &loaded, args.common.out.as_ref(), &table.render(format)?, options, checks, None)
}

pub fn loss(args: LossArgs) -> CliResult<()> {
    let loaded = load(&args.common.source)?;
    let format = table_format(&args.common)?;
    let device = &loaded.scenario.device;
    if !(args.amin > 0.0 && args.amax <= 1.0 && args.amin <= args.amax) || args.points == 0 {
        return Err(CliError::Usage(format!(
            "absorption range must satisfy 0 < amin ≤ amax ≤ 1 with at least one point (got {}..{}, {} points)",
            args.amin, args.amax, args.points
        )));
    }
    let tau_s = resolve_tau_s(device, &args.width, 1.0)?;
    let input = PulseSpec::resonant(device, tau_s);
    let values = log_space(args.amin, args.amax, args.points);
    let sets: &[MirrorSet] = match args.sweep {
        Sweep::H => &[MirrorSet::Horizontal],
        Sweep::V => &[MirrorSet::Vertical],
        Sweep::Both => &[MirrorSet::Horizontal, MirrorSet::Vertical],
    };

    let mut table = Table::new(&["A_value", "which_mirrors", "P_bar"]);
    for &set in sets {
        for point in absorption_sweep(device, &input, set, &values)? {
            table.push(vec![
                Cell::Num(point.absorption),
                Cell::Text(set.label().to_string()),
                Cell::Num(point.p_bar),
            ]);
        }
    }
    let options = json!({
        "tau_s": number(tau_s),
        "amin": number(args.amin),
        "amax": number(args.amax),
        "points": args.points,
        "sweep": sets.iter().map(|s| s.label()).collect::<Vec<_>>(),
        "format": format,
    });
    finish("loss", &loaded, args.common.out.as_ref(), &table.render(format)?, options, None, None)
}

pub fn ifm(args: IfmArgs) -> CliResult<()> {
    let mut loaded = load(&args.common.source)?;
    let format = table_format(&args.common)?;
    if args.absorber >= 0.0 {
        loaded.scenario.device.mirrors[0] = MirrorSpec::new(args.absorber);
        loaded.scenario.device = loaded.scenario.device.validated()?;
    }
    let f = ifm_fractions(&loaded.scenario.device)?;
    let mut table = Table::new(&["quantity", "closed_form", "exact"]);
    for (name, closed, exact) in [
        ("transmitted", f.closed_form.transmitted, f.exact.transmitted),
        ("reflected", f.closed_form.reflected, f.exact.reflected),
        ("lost", f.closed_form.lost, f.exact.lost),
    ] {
        table.push(vec![Cell::Text(name.to_string()), Cell::Num(closed), Cell::Num(exact)]);
    }
    let options = json!({ "k": "k0", "absorber_m1": number(args.absorber), "format": format });
    finish("ifm", &loaded, args.common.out.as_ref(), &table.render(format)?, options, None, None)
}

fn report_lines(report: &XpmReport, numeric: f64, warning: Option<&str>, full: bool) -> String {
    let mut lines = vec![
        format!("tau_s_s = {:e}", report.tau_s),
        format!("tau_d_s = {:e}", report.tau_d),
        format!("broadening_factor = {:e}", report.broadening_factor),
        format!("delta_phi_rad = {:e}", report.delta_phi),
        format!("delta_phi_numeric_rad = {numeric:e}"),
        format!("factor_to_pi = {:e}", report.factor_to_pi),
        format!("p2 = {:e}", report.p2),
        format!("p2_over_delta_phi = {:e}", report.p2_over_delta_phi),
        format!("group_velocity_m_per_s = {:e}", report.group_velocity),
        format!("alpha1_per_m = {:e}", report.alpha1),
        format!("alpha1_l = {:e}", report.alpha1_l),
        format!("energy_integral_v2_s_per_m2 = {:e}", report.energy_integral),
    ];
    if full {
        for c in &report.conditions {
            lines.push(format!(
                "condition.{} = {:?}: lhs {:e}, rhs {:e}, ratio {:e} ({})",
                c.key, c.status, c.lhs, c.rhs, c.ratio, c.description
            ));
        }
        let ic = &report.input_coupling;
        lines.push(format!("input_coupling.g11_approx = {:e}", ic.g11_approx));
        lines.push(format!("input_coupling.g21_approx = {:e}", ic.g21_approx));
        lines.push(format!("input_coupling.reflection_probability = {:e}", ic.reflection_probability));
        lines.push(format!("input_coupling.g11_exact = {:e}", ic.g11_exact));
        lines.push(format!("input_coupling.g21_exact = {:e}", ic.g21_exact));
        let fm = &report.free_medium;
        lines.push(format!("free_medium.beam_diameter_m = {:e}", fm.beam_diameter));
        lines.push(format!("free_medium.linewidth_per_s = {:e}", fm.linewidth));
        lines.push(format!("free_medium.field_squared_v2_per_m2 = {:e}", fm.field_squared));
        lines.push(format!("free_medium.kerr_index = {:e}", fm.kerr_index));
        lines.push(format!("free_medium.pi_length_m = {:e}", fm.pi_length));
        lines.push(format!("free_medium.switching_time_s = {:e}", fm.switching_time));
        lines.push(format!("free_medium.rayleigh_length_m = {:e}", fm.rayleigh_length));
        lines.push(format!("free_medium.cavity_switching_time_s = {:e}", fm.cavity_switching_time));
    }
    if let Some(w) = warning {
        lines.push(format!("warning = {w}"));
    }
    let mut text = lines.join("\n");
    text.push('\n');
    text
}

pub fn xpm(args: XpmArgs, full: bool) -> CliResult<()> {
    let loaded = load(&args.source)?;
    let device = &loaded.scenario.device;
    let medium = loaded
        .scenario
        .medium
        .unwrap_or_else(|| EitMediumParams::rubidium(device));
    // Default width halves the signal intensity through broadening.
    let tau_s = match (args.width.tau_s, args.width.tau_s_rel) {
        (None, None) => tau_s_for_broadening(delay_time(device)?, 0.5),
        _ => resolve_tau_s(device, &args.width, 1.0)?,
    };
    let report = feasibility_report(device, &medium, tau_s)?;
    let closed = phase_shift(device, &medium, tau_s)?;
    let numeric = phase_shift_numeric(device, &medium, &PulseSpec::resonant(device, tau_s))?;

    let text = match args.format {
        Format::Text => report_lines(&report, numeric, closed.warning.as_deref(), full),
        Format::Json if full => pretty(&json!({
            "report": report,
            "delta_phi_numeric_rad": number(numeric),
            "warning": closed.warning,
        })),
        Format::Json => pretty(&json!({
            "tau_s_s": number(report.tau_s),
            "tau_d_s": number(report.tau_d),
            "broadening_factor": number(report.broadening_factor),
            "delta_phi_rad": number(report.delta_phi),
            "delta_phi_numeric_rad": number(numeric),
            "factor_to_pi": number(report.factor_to_pi),
            "p2": number(report.p2),
            "p2_over_delta_phi": number(report.p2_over_delta_phi),
            "group_velocity_m_per_s": number(report.group_velocity),
            "alpha1_per_m": number(report.alpha1),
            "alpha1_l": number(report.alpha1_l),
            "energy_integral_v2_s_per_m2": number(report.energy_integral),
            "warning": closed.warning,
        })),
        Format::Csv => return Err(CliError::Usage("reports are written as text or json".into())),
    };
    let options = json!({ "tau_s": number(tau_s), "format": args.format });
    let command = if full { "feasibility" } else { "xpm" };
    finish(command, &loaded, args.out.as_ref(), &text, options, None, Some(medium))
}

pub fn oracle_check(args: OracleArgs) -> CliResult<()> {
    let loaded = load(&args.common.source)?;
    let format = table_format(&args.common)?;
    let device = &loaded.scenario.device;
    if args.points == 0 {
        return Err(CliError::Usage("need at least one point".into()));
    }
    let (lo, hi) = default_span(device);
    let grid = if args.points == 1 {
        SpectralGrid::single(device.geometry.k0())
    } else {
        SpectralGrid::new(lo, hi, args.points)?
    };
    let ks: Vec<f64> = grid.iter().collect();
    let results = ks
        .par_iter()
        .map(|&k| oracle_deviation(device, k, args.tol, args.max_iter))
        .collect::<CliResult<Vec<_>>>()?;

    let mut table = Table::new(&["k_rad_per_m", "max_deviation", "iterations"]);
    for (&k, &(dev, iters)) in ks.iter().zip(&results) {
        table.push(vec![Cell::Num(k), Cell::Num(dev), Cell::Int(iters)]);
    }
    let worst = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let options = json!({
        "points": args.points,
        "tol": number(args.tol),
        "max_iter": args.max_iter,
        "format": format,
    });
    let checks = json!({ "oracle_max_deviation": number(worst), "limit": ORACLE_LIMIT });
    finish("oracle-check", &loaded, args.common.out.as_ref(), &table.render(format)?, options, Some(checks), None)?;
    guard("closed-form response", worst, ORACLE_LIMIT)
}
