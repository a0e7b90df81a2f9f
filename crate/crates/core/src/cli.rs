//! Batch front end: commands, output files and run manifests.
//!
//! Each command writes its data file(s) and a `<command>.manifest.json` into
//! the output directory. CSV files start with a `#` line naming the units.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::classical_oracle::{biot_savart, retarded_vector_potential};
use crate::coherent_state::{loop_photon_number, phase, photon_density, summarize, PhaseResult};
use crate::config::{load_config, RunConfig};
use crate::constants::PhysicalConstants;
use crate::current_model::{CurrentSource, Geometry};
use crate::error::{Error, Result};
use crate::field_reconstruction::reconstruct_fields;
use crate::quadrature::{build_kgrid, KGrid};
use crate::validate::{amplitude_for, run_suite, Check};
use crate::vector::{add, norm, scale, sub, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    PhotonDensity,
    Summary,
    FieldMap,
    Amplitude,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::PhotonDensity => "photon-density",
            Command::Summary => "summary",
            Command::FieldMap => "field-map",
            Command::Amplitude => "amplitude",
            Command::Validate => "validate",
        }
    }
}

/// Photon content and coherent-state fields of classical current sources.
#[derive(Debug, Parser)]
#[command(name = "photon-ledger", version)]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Add classical reference values to `field-map` rows.
    #[arg(long)]
    pub oracle: bool,
    /// Worker threads; defaults to all cores.
    #[arg(long, env = "PHOTON_LEDGER_THREADS")]
    pub threads: Option<usize>,
}

/// What a run produced.
#[derive(Debug)]
pub struct RunOutcome {
    pub outputs: Vec<PathBuf>,
    pub manifest: PathBuf,
    /// `false` only when `validate` found failing checks.
    pub success: bool,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config_path: String,
    config: &'a Value,
    constants: PhysicalConstants,
    grid: Value,
    field_grid: Option<Value>,
    threads: usize,
    oracle: bool,
    outputs: Vec<String>,
    checks: Option<&'a [Check]>,
    passed: Option<bool>,
    wall_clock_seconds: f64,
}

fn grid_json(grid: &KGrid) -> Value {
    json!({"spec": grid.spec(), "metadata": grid.metadata(), "cutoffs": grid.cutoffs()})
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

fn write_csv(path: &Path, units: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut buffer = format!("# units: {units}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buffer);
        let to_io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(header).map_err(to_io)?;
        for r in rows {
            w.write_record(r).map_err(to_io)?;
        }
        w.flush()?;
    }
    fs::write(path, buffer)?;
    Ok(())
}

/// Loads the configuration and runs `args.command`.
pub fn execute(args: &Args) -> Result<RunOutcome> {
    let config = load_config(&args.config)?;
    run(args.command, &config, &args.config, &args.out, args.oracle)
}

/// Runs one command on a validated configuration.
pub fn run(command: Command, config: &RunConfig, config_path: &Path, out: &Path, oracle: bool) -> Result<RunOutcome> {
    let started = Instant::now();
    fs::create_dir_all(out)?;
    let grid = Arc::new(build_kgrid(config.grid)?);
    let mut outputs = Vec::new();
    let mut report = None;
    let mut field_grid = None;
    match command {
        Command::PhotonDensity => outputs.push(photon_density_csv(config, &grid, out)?),
        Command::Summary => outputs.push(summary_json(config, &grid, out)?),
        Command::Amplitude => outputs.push(amplitude_csv(config, &grid, out)?),
        Command::FieldMap => {
            let (path, g) = field_map_csv(config, out, oracle)?;
            field_grid = Some(grid_json(&g));
            outputs.push(path);
        }
        Command::Validate => {
            let r = run_suite(config)?;
            let path = out.join("validation.json");
            fs::write(&path, serde_json::to_string_pretty(&r)? + "\n")?;
            outputs.push(path);
            report = Some(r);
        }
    }
    let manifest = Manifest {
        tool: "photon-ledger",
        version: env!("CARGO_PKG_VERSION"),
        command: command.name(),
        config_path: config_path.display().to_string(),
        config: &config.document,
        constants: PhysicalConstants::CODATA_2018,
        grid: grid_json(&grid),
        field_grid,
        threads: rayon::current_num_threads(),
        oracle,
        outputs: outputs
            .iter()
            .map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default())
            .collect(),
        checks: report.as_ref().map(|r| r.checks.as_slice()),
        passed: report.as_ref().map(|r| r.passed),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    let manifest_path = out.join(format!("{}.manifest.json", command.name()));
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(RunOutcome {
        outputs,
        manifest: manifest_path,
        success: report.is_none_or(|r| r.passed),
    })
}

fn photon_density_csv(config: &RunConfig, grid: &Arc<KGrid>, out: &Path) -> Result<PathBuf> {
    let xi = amplitude_for(&config.source, grid, config.time, config.eps)?;
    let n = photon_density(&xi);
    let rows = (0..grid.len())
        .map(|i| {
            let node = grid.node(i);
            vec![fmt(node.k), fmt(node.cos_theta), fmt(node.phi), fmt(n[i]), fmt(node.weight)]
        })
        .collect::<Vec<_>>();
    let path = out.join("photon_density.csv");
    write_csv(
        &path,
        &format!(
            "k rad/m, cos_theta 1, phi rad, n m^3, weight (rad/m)^3; t = {} s, eps = {} 1/s",
            fmt(config.time),
            fmt(config.eps)
        ),
        &["k", "cos_theta", "phi", "n", "weight"],
        &rows,
    )?;
    Ok(path)
}

fn summary_json(config: &RunConfig, grid: &Arc<KGrid>, out: &Path) -> Result<PathBuf> {
    let xi = amplitude_for(&config.source, grid, config.time, config.eps)?;
    let summary = summarize(&xi)?;
    let mut doc = serde_json::to_value(&summary)?;
    let obj = doc.as_object_mut().expect("summary is an object");
    obj.insert("source".into(), Value::String(config.source.describe()));
    obj.insert(
        "energy_label".into(),
        Value::String(format!(
            "cutoff-regulated: H_gamma, V, E and phase_slope depend on k_min = {} rad/m and k_max = {} rad/m",
            fmt(grid.spec().k_min),
            fmt(grid.spec().k_max)
        )),
    );
    if let Geometry::CircularLoop { current, radius, wire_radius, .. } = config.source.geometry {
        if wire_radius == 0.0 {
            obj.insert(
                "N_thin_loop_closed_form".into(),
                json!(loop_photon_number(current, radius)),
            );
        }
    }
    if let Some(t) = config.phase.t {
        let p: PhaseResult = phase(&config.source, t, grid, config.eps, config.phase.t_start)?;
        obj.insert("phase".into(), serde_json::to_value(p)?);
    }
    let path = out.join("summary.json");
    fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n")?;
    Ok(path)
}

fn amplitude_csv(config: &RunConfig, grid: &Arc<KGrid>, out: &Path) -> Result<PathBuf> {
    let xi = amplitude_for(&config.source, grid, config.time, config.eps)?;
    let rows = (0..grid.len())
        .map(|i| {
            let node = grid.node(i);
            let v = xi.at(i);
            let mut row = vec![fmt(node.k), fmt(node.cos_theta), fmt(node.phi)];
            for c in v {
                row.push(fmt(c.re));
                row.push(fmt(c.im));
            }
            row
        })
        .collect::<Vec<_>>();
    let path = out.join("amplitude.csv");
    write_csv(
        &path,
        &format!(
            "k rad/m, cos_theta 1, phi rad, xi m^(3/2); t = {} s, eps = {} 1/s",
            fmt(config.time),
            fmt(config.eps)
        ),
        &["k", "cos_theta", "phi", "re_xi_x", "im_xi_x", "re_xi_y", "im_xi_y", "re_xi_z", "im_xi_z"],
        &rows,
    )?;
    Ok(path)
}

/// Deviation of `a` from `b`, relative to `|b|` floored at the combined error
/// budget so that fields vanishing by symmetry do not report rounding as O(1).
fn relative(a: &Vec3, b: &Vec3, budget: f64) -> f64 {
    let m = norm(b).max(budget);
    if m == 0.0 {
        norm(a)
    } else {
        norm(&sub(a, b)) / m
    }
}

/// Classical `(A, B)` at `(x, t)`; `B` of a time-dependent source is the
/// central-difference curl of the retarded potential.
fn oracle_fields(source: &CurrentSource, x: &Vec3, t: f64) -> Result<(Vec3, Vec3)> {
    let a = retarded_vector_potential(source, x, t)?.value;
    if source.profile.is_static() {
        return Ok((a, biot_savart(source, x)?.value));
    }
    let h = 1e-4 * source.length_scale();
    let mut grad = [[0.0; 3]; 3];
    for i in 0..3 {
        let mut d = [0.0; 3];
        d[i] = h;
        let p = retarded_vector_potential(source, &add(x, &d), t)?.value;
        let m = retarded_vector_potential(source, &add(x, &scale(&d, -1.0)), t)?.value;
        for j in 0..3 {
            grad[i][j] = (p[j] - m[j]) / (2.0 * h);
        }
    }
    Ok((a, [grad[1][2] - grad[2][1], grad[2][0] - grad[0][2], grad[0][1] - grad[1][0]]))
}

fn field_map_csv(config: &RunConfig, out: &Path, oracle: bool) -> Result<(PathBuf, KGrid)> {
    let field = config
        .field
        .as_ref()
        .ok_or_else(|| Error::Config(vec!["field: required for field-map".into()]))?;
    let grid = Arc::new(build_kgrid(field.grid)?);
    let mut header = vec![
        "x", "y", "z", "t", "A_x", "A_y", "A_z", "B_x", "B_y", "B_z", "E_x", "E_y", "E_z", "imaginary_residue",
    ];
    if oracle {
        header.extend([
            "oracle_A_x", "oracle_A_y", "oracle_A_z", "A_rel_dev", "oracle_B_x", "oracle_B_y", "oracle_B_z", "B_rel_dev",
        ]);
    }
    let mut rows = Vec::new();
    for &t in &field.times {
        let xi = amplitude_for(&config.source, &grid, t, config.eps)?;
        for x in &field.points {
            let s = reconstruct_fields(&xi, x, t)?;
            let mut row: Vec<String> = x.iter().chain([&t]).map(|v| fmt(*v)).collect();
            row.extend(s.a.iter().chain(&s.b).chain(&s.e_perp).map(|v| fmt(*v)));
            row.push(fmt(s.imaginary_residue));
            if oracle {
                let (a, b) = oracle_fields(&config.source, x, t)?;
                row.extend(a.iter().map(|v| fmt(*v)));
                row.push(fmt(relative(&s.a, &a, s.estimated_error[0])));
                row.extend(b.iter().map(|v| fmt(*v)));
                row.push(fmt(relative(&s.b, &b, s.estimated_error[1])));
            }
            rows.push(row);
        }
    }
    let path = out.join("field_map.csv");
    let units = if oracle {
        "x y z m, t s, A V s/m, B T, E V/m, imaginary_residue 1, oracle columns as their fields, rel_dev 1 (floored at the error estimate)"
    } else {
        "x y z m, t s, A V s/m, B T, E V/m, imaginary_residue 1"
    };
    write_csv(&path, units, &header, &rows)?;
    Ok((path, Arc::try_unwrap(grid).unwrap_or_else(|g| (*g).clone())))
}

/// Machine-readable error document for standard error.
pub fn error_json(e: &Error) -> String {
    let mut doc = json!({"error": {"kind": e.kind(), "message": e.to_string()}});
    if let Error::Config(list) = e {
        doc["error"]["violations"] = json!(list);
    }
    doc.to_string()
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Validation(_) => 2,
        _ => 1,
    }
}
