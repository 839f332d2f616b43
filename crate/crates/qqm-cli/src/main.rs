//! `qqm` — verify closed-form quaternionic Schrödinger solutions and emit
//! tables.
//!
//! Subcommands read a JSON parameter document (`--input`) and either verify
//! residual tolerances (exit 0 on pass, 1 on an assertion failure, 2 on a
//! usage or document error) or write CSV artifacts (`--output`). Set
//! `QQM_LOG=info` (or `debug`) for progress logging.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use qqm_core::scattering::{self, StepProblem, WaveParams};
use qqm_core::stationary::{
    self, ScalarFields, StationaryFamily, StationaryFamilyParams,
};
use qqm_core::time_evolution::LambdaFamily;
use qqm_core::verifier::{self, Grid};
use qqm_core::Units;

#[derive(Parser)]
#[command(name = "qqm", version, about = "Quaternionic Schrödinger solution verifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// JSON parameter document.
    #[arg(long)]
    input: PathBuf,
    /// Output artifact (CSV table or JSON report).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Residual tolerance override.
    #[arg(long)]
    tol: Option<f64>,
    /// Grid points per active axis.
    #[arg(long, default_value_t = 33)]
    grid_n: usize,
    /// Grid spacing.
    #[arg(long, default_value_t = 0.015)]
    grid_h: f64,
    /// Seed for randomized property draws.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the unitary time families listed in the document.
    VerifyTime(CommonOpts),
    /// Verify stationary families: construction, grid residuals, diagnostics.
    VerifyStationary(CommonOpts),
    /// Sample a stationary family and its probability current to CSV.
    FreeParticle(CommonOpts),
    /// Sweep the step height and write the scattering table.
    ScatterSweep(CommonOpts),
}

/// Failure classes mapped to process exit codes.
enum AppError {
    /// Tolerance assertion failed (exit 1).
    Assertion(String),
    /// Bad usage, unreadable or invalid document (exit 2).
    Input(String),
}

type AppResult<T> = Result<T, AppError>;

fn input_err(msg: impl Into<String>) -> AppError {
    AppError::Input(msg.into())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("QQM_LOG")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::VerifyTime(opts) => verify_time(&opts),
        Command::VerifyStationary(opts) => verify_stationary(&opts),
        Command::FreeParticle(opts) => free_particle(&opts),
        Command::ScatterSweep(opts) => scatter_sweep(&opts),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Assertion(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(AppError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn check_opts(opts: &CommonOpts) -> AppResult<()> {
    if let Some(tol) = opts.tol {
        if !(tol > 0.0) {
            return Err(input_err(format!("--tol must be > 0, got {tol}")));
        }
    }
    if !(opts.grid_h > 0.0) {
        return Err(input_err(format!("--grid-h must be > 0, got {}", opts.grid_h)));
    }
    if opts.grid_n < 7 {
        return Err(input_err(format!("--grid-n must be at least 7, got {}", opts.grid_n)));
    }
    Ok(())
}

/// Parse a document, reporting the JSON path of the offending field.
fn load_document<T: for<'de> Deserialize<'de>>(path: &Path) -> AppResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| input_err(format!("cannot read {}: {e}", path.display())))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        input_err(format!(
            "cannot parse {}: at /{}: {}",
            path.display(),
            e.path().to_string().replace('.', "/"),
            e.inner()
        ))
    })
}

fn write_output(path: &Path, bytes: &[u8]) -> AppResult<()> {
    fs::write(path, bytes)
        .map_err(|e| input_err(format!("cannot write {}: {e}", path.display())))
}

#[derive(Deserialize)]
struct TimeDocument {
    families: Vec<LambdaFamily>,
}

#[derive(Serialize)]
struct TimeReport {
    seed: u64,
    tolerance: f64,
    separation_residuals: Vec<f64>,
    max_unitarity_deviation: f64,
}

fn verify_time(opts: &CommonOpts) -> AppResult<()> {
    check_opts(opts)?;
    let doc: TimeDocument = load_document(&opts.input)?;
    let tol = opts.tol.unwrap_or(1e-8);
    if doc.families.is_empty() {
        eprintln!("warning: nothing verified (empty family list)");
        return Ok(());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let times: Vec<f64> = (0..50).map(|n| -2.0 + 0.08 * n as f64).collect();
    let mut residuals = Vec::new();
    let mut worst_unitarity = 0.0_f64;
    for (index, fam) in doc.families.iter().enumerate() {
        fam.validate()
            .map_err(|e| input_err(format!("family {index}: {e}")))?;
        let residual = fam.verify_separation(&times, 1e-5);
        log::info!("family {index}: separation residual {residual:.3e}");
        for _ in 0..100 {
            let t = rng.gen_range(-10.0..10.0);
            worst_unitarity = worst_unitarity.max((fam.evaluate(t).norm() - 1.0).abs());
        }
        residuals.push(residual);
        if residual > tol {
            return Err(AppError::Assertion(format!(
                "family {index}: separation residual {residual:.3e} exceeds tolerance {tol:.1e}"
            )));
        }
    }
    if worst_unitarity > 1e-12 {
        return Err(AppError::Assertion(format!(
            "unitarity deviation {worst_unitarity:.3e} exceeds 1e-12"
        )));
    }
    if let Some(out) = &opts.output {
        let report = TimeReport {
            seed: opts.seed,
            tolerance: tol,
            separation_residuals: residuals,
            max_unitarity_deviation: worst_unitarity,
        };
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        write_output(out, json.as_bytes())?;
    }
    println!(
        "verified {} time families (max unitarity deviation {worst_unitarity:.3e})",
        doc.families.len()
    );
    Ok(())
}

#[derive(Deserialize)]
struct StationaryDocument {
    families: Vec<StationaryFamilyParams>,
}

#[derive(Serialize)]
struct StationaryReport {
    seed: u64,
    tolerance: f64,
    tise_residuals: Vec<f64>,
    tdse_residuals: Vec<f64>,
    diagnostic_residuals: Vec<Option<f64>>,
}

/// Grid with `n` points along each axis the family varies on.
fn family_grid(fam: &StationaryFamily, n: usize, h: f64) -> AppResult<Grid> {
    let p = fam.params();
    let mut shape = [1usize; 3];
    for axis in 0..3 {
        let active = p.k_vec[axis] != 0.0
            || p.gamma_vec[axis] != 0.0
            || p.omega_vec[axis] != 0.0
            || p.alpha_vec[axis] != 0.0;
        if active {
            shape[axis] = n;
        }
    }
    Grid::centered([0.0; 3], h, shape).map_err(|e| input_err(format!("grid: {e}")))
}

fn verify_stationary(opts: &CommonOpts) -> AppResult<()> {
    check_opts(opts)?;
    let doc: StationaryDocument = load_document(&opts.input)?;
    let tol = opts.tol.unwrap_or(1e-7);
    if doc.families.is_empty() {
        eprintln!("warning: nothing verified (empty family list)");
        return Ok(());
    }
    let times = [0.0, 0.4, 1.3, -0.8];
    let mut tise = Vec::new();
    let mut tdse = Vec::new();
    let mut diags = Vec::new();
    for (index, params) in doc.families.iter().enumerate() {
        let fam = StationaryFamily::new(*params)
            .map_err(|e| input_err(format!("family {index}: {e}")))?;
        let units = fam.units();
        let grid = family_grid(&fam, opts.grid_n, opts.grid_h)?;
        let field = verifier::sample(&grid, &fam.wave_function())
            .map_err(|e| input_err(format!("family {index}: {e}")))?;
        let rep = verifier::residual_tise(&field, &fam.kappa(), units, None)
            .map_err(|e| input_err(format!("family {index}: {e}")))?;
        let lambda = fam.matching_lambda();
        let tdse_resid = verifier::residual_tdse(&field, &lambda, units, &times, 1e-5)
            .map_err(|e| input_err(format!("family {index}: {e}")))?;

        let phi = fam.phi();
        let theta = fam.params().theta;
        let rho = |x: [f64; 3]| fam.rho_at(x);
        let theta_f = move |_: [f64; 3]| theta;
        let gamma = |x: [f64; 3]| fam.gamma_at(x);
        let omega = |x: [f64; 3]| fam.omega_at(x);
        let phi_f = move |x: [f64; 3]| phi.evaluate(x);
        let fields = ScalarFields {
            rho: &rho,
            theta: &theta_f,
            gamma: &gamma,
            omega: &omega,
            phi: &phi_f,
        };
        let diag = stationary::separation_diagnostics(
            &fields,
            &fam.kappa(),
            units,
            [0.11, 0.07, -0.05],
            stationary::default_spacing(norm3(fam.params().gamma_vec)),
        );
        let diag_max = diag.max_residual();

        log::info!(
            "family {index}: tise {:.3e}, tdse {tdse_resid:.3e}, diagnostics {diag_max:?}",
            rep.residual
        );
        tise.push(rep.residual);
        tdse.push(tdse_resid);
        diags.push(diag_max);
        for (name, value) in [
            ("stationary residual", rep.residual),
            ("time-dependent residual", tdse_resid),
            ("separation diagnostic", diag_max.unwrap_or(0.0)),
        ] {
            if value > tol {
                return Err(AppError::Assertion(format!(
                    "family {index}: {name} {value:.3e} exceeds tolerance {tol:.1e}"
                )));
            }
        }
    }
    if let Some(out) = &opts.output {
        let report = StationaryReport {
            seed: opts.seed,
            tolerance: tol,
            tise_residuals: tise,
            tdse_residuals: tdse,
            diagnostic_residuals: diags,
        };
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        write_output(out, json.as_bytes())?;
    }
    println!("verified {} stationary families", doc.families.len());
    Ok(())
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn free_particle(opts: &CommonOpts) -> AppResult<()> {
    check_opts(opts)?;
    let params: StationaryFamilyParams = load_document(&opts.input)?;
    let out = opts
        .output
        .as_ref()
        .ok_or_else(|| input_err("free-particle requires --output"))?;
    let fam = StationaryFamily::new(params).map_err(|e| input_err(e.to_string()))?;
    let grid = family_grid(&fam, opts.grid_n, opts.grid_h)?;
    let field = verifier::sample(&grid, &fam.wave_function())
        .map_err(|e| input_err(e.to_string()))?;
    let current = verifier::probability_current(&field, fam.units())
        .map_err(|e| input_err(e.to_string()))?;

    let mut field_csv = Vec::new();
    verifier::write_field_csv(&mut field_csv, &field).expect("in-memory write");
    write_output(out, &field_csv)?;

    let current_path = sibling_with_suffix(out, "current");
    let mut current_csv = Vec::new();
    verifier::write_current_csv(&mut current_csv, &current).expect("in-memory write");
    write_output(&current_path, &current_csv)?;

    println!(
        "wrote {} field samples to {} and {} current samples to {}",
        field.values().len(),
        out.display(),
        current.values().len(),
        current_path.display()
    );
    Ok(())
}

/// `table.csv` -> `table.current.csv`.
fn sibling_with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}.{suffix}.{ext}"))
}

fn default_ratios() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 0.75]
}

#[derive(Deserialize)]
struct SweepDocument {
    incident: WaveParams,
    #[serde(default)]
    units: Units,
    /// Step heights as fractions of the quaternionic energy.
    #[serde(default = "default_ratios")]
    ratios: Vec<f64>,
}

fn scatter_sweep(opts: &CommonOpts) -> AppResult<()> {
    check_opts(opts)?;
    let doc: SweepDocument = load_document(&opts.input)?;
    let out = opts
        .output
        .as_ref()
        .ok_or_else(|| input_err("scatter-sweep requires --output"))?;
    // Construct once to surface constraint violations as document errors.
    StepProblem::new(0.0, doc.incident, doc.units).map_err(|e| input_err(e.to_string()))?;
    let rows = scattering::sweep(doc.incident, doc.units, &doc.ratios)
        .map_err(|e| input_err(e.to_string()))?;
    let mut csv = Vec::new();
    writeln!(csv, "v0_over_energy,p_sq_over_k_sq,r_sq,t_sq,flux_defect").expect("in-memory write");
    for row in &rows {
        writeln!(
            csv,
            "{},{},{},{},{}",
            row.v0_over_energy, row.p_sq_over_k_sq, row.r_sq, row.t_sq, row.flux_defect
        )
        .expect("in-memory write");
    }
    write_output(out, &csv)?;
    println!("wrote {} sweep rows to {}", rows.len(), out.display());
    Ok(())
}
