//! The grid-simulation subcommands.

use std::path::{Path, PathBuf};

use invar_fieldsim::{
    action_stationarity, canonical_pair, gauge_compare, gauge_sector_pair, load_extended,
    mixed_pair, run_with_records, save_extended, write_csv, ExtendedState, GaugeChoice, GridSpec,
    InitialCondition, MaxwellState, Propagator, ScalarGrid, SpectralOps, TrackedPair,
};
use serde_json::json;

use crate::{CliError, SCHEMA_VERSION};

fn build_grid(n: usize, dt: f64, box_len: Option<f64>) -> Result<GridSpec, CliError> {
    GridSpec::new(n, box_len.unwrap_or(GridSpec::DEFAULT_BOX), dt)
        .map_err(|e| CliError::input(e.to_string()))
}

fn build_gauge(spec: &str, grid: &GridSpec) -> Result<GaugeChoice, CliError> {
    GaugeChoice::parse(spec, grid).map_err(|e| CliError::input(e.to_string()))
}

/// Builds the extended state from an initial-condition specifier; `file:`
/// loads a snapshot, everything else goes through the Gauss projection.
fn build_extended(
    init: &str,
    grid: &GridSpec,
    ops: &SpectralOps,
) -> Result<ExtendedState, CliError> {
    let ic: InitialCondition = init.parse().map_err(|e: invar_fieldsim::FieldError| {
        CliError::input(e.to_string())
    })?;
    match ic {
        InitialCondition::File(path) => {
            load_extended(Path::new(&path), grid).map_err(|e| CliError::input(e.to_string()))
        }
        other => {
            let (a, e) = other.build(grid).map_err(|e| CliError::input(e.to_string()))?;
            Ok(ExtendedState::from_parts(ops, &a, &e, ScalarGrid::zeros(grid.n)))
        }
    }
}

fn build_maxwell(init: &str, grid: &GridSpec, ops: &SpectralOps) -> Result<MaxwellState, CliError> {
    let ext = build_extended(init, grid, ops)?;
    Ok(MaxwellState {
        a: ext.reconstruct_a(ops),
        e: ext.e.clone(),
    })
}

/// Seed of the default pairing tracked by `sim run`.
const RUN_PAIR_SEED: u64 = 0xCA11;

#[allow(clippy::too_many_arguments)]
pub fn run(
    n: usize,
    dt: f64,
    box_len: Option<f64>,
    steps: usize,
    every: usize,
    gauge_spec: &str,
    init: &str,
    out: &str,
    dump: Option<PathBuf>,
    json_summary: bool,
) -> Result<(), CliError> {
    let grid = build_grid(n, dt, box_len)?;
    let gauge = build_gauge(gauge_spec, &grid)?;
    let prop = Propagator::new(grid, gauge);
    let mut state = build_extended(init, &grid, &prop.ops)?;
    let cutoff = (grid.n / 8).clamp(1, 2) as u32;
    let pair = canonical_pair(&grid, &prop.ops, RUN_PAIR_SEED, cutoff);
    let records = run_with_records(&prop, &mut state, &pair, steps, every);

    if out == "-" {
        write_csv(std::io::stdout().lock(), &records).map_err(CliError::from_io)?;
    } else {
        let f = std::fs::File::create(out).map_err(|e| CliError::input(format!("{out}: {e}")))?;
        write_csv(std::io::BufWriter::new(f), &records).map_err(CliError::from_io)?;
    }
    if let Some(dump_path) = &dump {
        save_extended(dump_path, &grid, &state)
            .map_err(|e| CliError::input(format!("{}: {e}", dump_path.display())))?;
    }

    let first = records.first().expect("records include step 0");
    let last = records.last().expect("records include the final step");
    let max_gauss = records.iter().map(|r| r.gauss_residual).fold(0.0, f64::max);
    let max_drift = records.iter().map(|r| r.sympl_drift).fold(0.0, f64::max);
    let energy_rel_drift = if first.energy != 0.0 {
        (last.energy - first.energy).abs() / first.energy.abs()
    } else {
        0.0
    };
    if json_summary {
        let summary = json!({
            "command": "sim run",
            "schema_version": SCHEMA_VERSION,
            "n": grid.n,
            "dt": grid.dt,
            "box_len": grid.box_len,
            "steps": steps,
            "every": every,
            "gauge": gauge_spec,
            "init": init,
            "pair_seed": RUN_PAIR_SEED,
            "energy_initial": first.energy,
            "energy_final": last.energy,
            "energy_rel_drift": energy_rel_drift,
            "max_gauss_residual": max_gauss,
            "max_sympl_drift": max_drift,
            "out": out,
        });
        println!("{summary}");
    } else if out != "-" {
        println!(
            "ran {} steps on n = {} (dt = {}): energy {} -> {} (rel drift {:.3e}), \
             max gauss residual {:.3e}, max pairing drift {:.3e}",
            steps, grid.n, grid.dt, first.energy, last.energy, energy_rel_drift, max_gauss, max_drift
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn gauge_compare_cmd(
    n: usize,
    dt: f64,
    box_len: Option<f64>,
    steps: usize,
    init: &str,
    gauge1: &str,
    gauge2: &str,
    json_out: bool,
) -> Result<(), CliError> {
    let grid = build_grid(n, dt, box_len)?;
    let ops = SpectralOps::new(&grid);
    let s0 = build_maxwell(init, &grid, &ops)?;
    let g1 = build_gauge(gauge1, &grid)?;
    let g2 = build_gauge(gauge2, &grid)?;
    let report = gauge_compare(grid, &s0, g1, g2, steps);
    if json_out {
        let out = json!({
            "command": "sim gauge-compare",
            "schema_version": SCHEMA_VERSION,
            "n": grid.n,
            "dt": grid.dt,
            "steps": steps,
            "init": init,
            "gauge1": gauge1,
            "gauge2": gauge2,
            "e_scale": report.e_scale,
            "e_diff": report.e_diff,
            "b_diff": report.b_diff,
            "a_diff": report.a_diff,
            "a_diff_divfree": report.a_diff_divfree,
        });
        println!("{out}");
    } else {
        println!(
            "after {} steps: |ΔE| = {:.3e}, |Δcurl A| = {:.3e} (field scale {:.3e})",
            steps, report.e_diff, report.b_diff, report.e_scale
        );
        println!(
            "A difference maxnorm {:.3e}, divergence-free part {:.3e} (pure gradient to roundoff)",
            report.a_diff, report.a_diff_divfree
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn embed_check(
    pairs: usize,
    steps: usize,
    n: usize,
    dt: f64,
    box_len: Option<f64>,
    gauge_spec: &str,
    init: &str,
    seed: u64,
    json_out: bool,
) -> Result<(), CliError> {
    let grid = build_grid(n, dt, box_len)?;
    let gauge = build_gauge(gauge_spec, &grid)?;
    let prop = Propagator::new(grid, gauge);
    let mut state = build_extended(init, &grid, &prop.ops)?;
    let cutoff = (grid.n / 8).clamp(1, 2) as u32;
    let tracked: Vec<TrackedPair> = (0..pairs.max(1))
        .map(|i| {
            let s = seed.wrapping_add(1000 * i as u64);
            match i % 3 {
                0 => canonical_pair(&grid, &prop.ops, s, cutoff),
                1 => gauge_sector_pair(&grid, s, cutoff),
                _ => mixed_pair(&grid, &prop.ops, s, cutoff),
            }
        })
        .collect();
    let every = (steps / 10).max(1);
    let drifts = invar_fieldsim::flow_preserves_form(&prop, &mut state, &tracked, steps, every);
    if json_out {
        let out = json!({
            "command": "sim embed-check",
            "schema_version": SCHEMA_VERSION,
            "n": grid.n,
            "dt": grid.dt,
            "steps": steps,
            "gauge": gauge_spec,
            "init": init,
            "seed": seed,
            "pairs": drifts.iter().map(|d| json!({
                "label": d.label,
                "initial": d.initial,
                "final": d.final_value,
                "max_rel_drift": d.max_rel_drift,
            })).collect::<Vec<_>>(),
        });
        println!("{out}");
    } else {
        for d in &drifts {
            println!(
                "pair {:>12}: pairing {} -> {} (max relative drift {:.3e})",
                d.label, d.initial, d.final_value, d.max_rel_drift
            );
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn action_check(
    dt_halvings: usize,
    n: usize,
    dt0: f64,
    box_len: Option<f64>,
    t_end: f64,
    gauge_spec: &str,
    init: &str,
    json_out: bool,
) -> Result<(), CliError> {
    let mut rows = Vec::new();
    let mut previous_max: Option<f64> = None;
    for level in 0..=dt_halvings {
        let dt = dt0 / (1 << level) as f64;
        let grid = build_grid(n, dt, box_len)?;
        let gauge = build_gauge(gauge_spec, &grid)?;
        let prop = Propagator::new(grid, gauge.clone());
        let state = build_extended(init, &grid, &prop.ops)?;
        let steps = (t_end / dt).round().max(2.0) as usize;
        let traj = prop.trajectory(&state, steps);
        let report = action_stationarity(&prop.ops, &grid, &traj, &gauge)
            .map_err(|e| CliError::input(e.to_string()))?;
        let action = invar_fieldsim::discrete_action(&prop.ops, &grid, &traj, &gauge)
            .map_err(|e| CliError::input(e.to_string()))?;
        let ratio = previous_max.map(|p| p / report.max_residual());
        previous_max = Some(report.max_residual());
        rows.push((dt, steps, action, report, ratio));
    }
    if json_out {
        let out = json!({
            "command": "sim action-check",
            "schema_version": SCHEMA_VERSION,
            "n": n,
            "t_end": t_end,
            "gauge": gauge_spec,
            "init": init,
            "levels": rows.iter().map(|(dt, steps, action, r, ratio)| json!({
                "dt": dt,
                "steps": steps,
                "action": action,
                "residual_e": r.residual_e,
                "residual_a": r.residual_a,
                "residual_psi": r.residual_psi,
                "residual_mu": r.residual_mu,
                "max_residual": r.max_residual(),
                "ratio_to_previous": ratio,
            })).collect::<Vec<_>>(),
        });
        println!("{out}");
    } else {
        for (dt, steps, action, r, ratio) in &rows {
            let ratio_text = ratio
                .map(|v| format!("{v:.2}"))
                .unwrap_or_else(|| "-".into());
            println!(
                "dt = {dt:>10}: steps = {steps}, action = {action:.6}, max residual = {:.3e} \
                 (E {:.3e}, A {:.3e}, psi {:.3e}, mu {:.3e}), ratio vs previous = {ratio_text}",
                r.max_residual(),
                r.residual_e,
                r.residual_a,
                r.residual_psi,
                r.residual_mu
            );
        }
    }
    Ok(())
}

impl CliError {
    pub fn from_io(e: std::io::Error) -> CliError {
        CliError::Input(e.to_string())
    }
}
