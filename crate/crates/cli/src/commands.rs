//! The five subcommands. Each writes its data files plus the resolved
//! configuration and a manifest into one output directory.

use std::path::Path;

use microcavity_core::{build_jsa, metrics, schmidt_decompose_with, JsaMatrix, SchmidtSpectrum};
use serde::Serialize;
use serde_json::value::RawValue;

use crate::config::{self, Arm, ScenarioConfig};
use crate::error::CliError;
use crate::output::{self, json_num, num, FileRecord, OutputDir};

pub const DBR_SPECTRUM_CSV: &str = "dbr_spectrum.csv";
pub const CAVITY_SPECTRUM_CSV: &str = "cavity_spectrum.csv";
pub const JSA_BIN: &str = "jsa.bin";
pub const JSA_JSON: &str = "jsa.json";
pub const JSA_ABS_CSV: &str = "jsa_abs.csv";
pub const LAMBDAS_CSV: &str = "schmidt_lambdas.csv";
pub const METRICS_JSON: &str = "schmidt_metrics.json";
pub const SWEEP_CSV: &str = "sweep.csv";

pub fn mode_csv(j: usize) -> String {
    format!("schmidt_mode_{j}.csv")
}

/// Runtime options that do not belong to the physical scenario.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub workers: Option<usize>,
}

pub struct Outcome {
    pub files: Vec<FileRecord>,
    /// One-line human-readable result.
    pub summary: String,
}

pub fn dbr_spectrum(cfg: &ScenarioConfig, out: &Path) -> Result<Outcome, CliError> {
    let rows = spectrum_rows(cfg)?;
    let table: Vec<[f64; 3]> = rows
        .iter()
        .map(|r| [r.k, r.dbr_reflectivity, r.dbr_transmissivity])
        .collect();
    let peak = table.iter().map(|r| r[1]).fold(0.0, f64::max);
    let mut dir = OutputDir::create(out)?;
    dir.write_csv(DBR_SPECTRUM_CSV, &["k", "abs_r2", "abs_t2"], &table)?;
    Ok(Outcome {
        files: dir.finish("dbr-spectrum", &cfg.to_toml())?,
        summary: format!("{} points, max |r|^2 = {}", table.len(), num(peak)),
    })
}

pub fn cavity_spectrum(cfg: &ScenarioConfig, out: &Path) -> Result<Outcome, CliError> {
    let rows = spectrum_rows(cfg)?;
    let table: Vec<[f64; 3]> = rows
        .iter()
        .map(|r| [r.k, r.cavity_reflectivity, r.intracavity])
        .collect();
    let (peak_k, peak) =
        table
            .iter()
            .map(|r| (r[0], r[2]))
            .fold(
                (f64::NAN, f64::NEG_INFINITY),
                |a, b| if b.1 > a.1 { b } else { a },
            );
    let mut dir = OutputDir::create(out)?;
    dir.write_csv(CAVITY_SPECTRUM_CSV, &["k", "abs_R2", "abs_A2_2"], &table)?;
    Ok(Outcome {
        files: dir.finish("cavity-spectrum", &cfg.to_toml())?,
        summary: format!(
            "{} points, max |A2|^2 = {} at k = {}",
            table.len(),
            num(peak),
            num(peak_k)
        ),
    })
}

fn spectrum_rows(cfg: &ScenarioConfig) -> Result<Vec<microcavity_core::SpectrumRow>, CliError> {
    let dispersion = cfg.dispersion_model()?;
    let assembly = cfg.assembly(&dispersion, cfg.scan.arm)?;
    Ok(assembly.reflectivity_spectrum(&cfg.scan_grid()?)?)
}

/// Builds the two-photon amplitude on the configured grid.
pub fn compute_jsa(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<JsaMatrix, CliError> {
    let dispersion = cfg.dispersion_model()?;
    let signal = cfg.assembly(&dispersion, Arm::Signal)?;
    let idler = cfg.assembly(&dispersion, Arm::Idler)?;
    let grid = cfg.grid()?;
    Ok(build_jsa(
        &signal,
        &idler,
        &cfg.pump_spectrum(&dispersion)?,
        &cfg.pump_mode(&dispersion),
        &grid,
        &grid,
        &cfg.jsa_settings(opts.workers),
    )?)
}

#[derive(Serialize)]
struct GridMeta {
    omega_min: Box<RawValue>,
    omega_max: Box<RawValue>,
    points: usize,
}

#[derive(Serialize)]
struct JsaSidecar {
    format: &'static str,
    byte_order: &'static str,
    layout: &'static str,
    shape: [usize; 2],
    frequency_units: &'static str,
    signal_grid: GridMeta,
    idler_grid: GridMeta,
    max_abs: Box<RawValue>,
    argmax: [usize; 2],
}

pub fn jsa(cfg: &ScenarioConfig, opts: &RunOptions, out: &Path) -> Result<Outcome, CliError> {
    let b = compute_jsa(cfg, opts)?;
    let (m, n) = b.argmax_abs();
    let meta = |g: &microcavity_core::FrequencyGrid| GridMeta {
        omega_min: json_num(g.omega_min),
        omega_max: json_num(g.omega_max),
        points: g.n_points,
    };
    let sidecar = JsaSidecar {
        format: "microcavity JSA v1: 8-byte magic, u64 signal points, u64 idler points, \
                 f64 signal band edges, f64 idler band edges, then (re, im) f64 pairs",
        byte_order: "little-endian",
        layout: "row-major, signal index slowest",
        shape: [b.n_signal(), b.n_idler()],
        frequency_units: "rad/s",
        signal_grid: meta(&b.grid_s),
        idler_grid: meta(&b.grid_i),
        max_abs: json_num(b.get(m, n).norm()),
        argmax: [m + 1, n + 1],
    };
    let mut dir = OutputDir::create(out)?;
    dir.write(JSA_BIN, &output::encode_jsa(&b))?;
    dir.write_json(JSA_JSON, &sidecar)?;
    let cap = cfg.output.abs_csv_max_points;
    let (rs, ri) = (
        output::decimate(b.n_signal(), cap),
        output::decimate(b.n_idler(), cap),
    );
    let mut rows = Vec::with_capacity(rs.len() * ri.len());
    for &i in &rs {
        for &j in &ri {
            rows.push([b.grid_s.value(i), b.grid_i.value(j), b.get(i, j).norm()]);
        }
    }
    dir.write_csv(JSA_ABS_CSV, &["omega_s", "omega_i", "abs_B"], &rows)?;
    Ok(Outcome {
        files: dir.finish("jsa", &cfg.to_toml())?,
        summary: format!(
            "{}x{} matrix, max |B| at grid point ({}, {})",
            b.n_signal(),
            b.n_idler(),
            m + 1,
            n + 1
        ),
    })
}

#[derive(Serialize)]
struct MetricsJson {
    lambda: Vec<Box<RawValue>>,
    retained_modes: usize,
    discarded_weight: Box<RawValue>,
    threshold: Box<RawValue>,
    entropy_bits: Box<RawValue>,
    purity: Box<RawValue>,
    cooperativity: Box<RawValue>,
}

pub fn schmidt(
    cfg: &ScenarioConfig,
    opts: &RunOptions,
    matrix: Option<&Path>,
    out: &Path,
) -> Result<Outcome, CliError> {
    let b = match matrix {
        Some(path) => output::decode_jsa(
            &std::fs::read(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
        )?,
        None => compute_jsa(cfg, opts)?,
    };
    let sp = schmidt_decompose_with(&b, cfg.schmidt.threshold)?;
    let mut dir = OutputDir::create(out)?;
    write_schmidt(&mut dir, &sp, cfg)?;
    let m = metrics(&sp);
    Ok(Outcome {
        files: dir.finish("schmidt", &cfg.to_toml())?,
        summary: format!(
            "lambda_1 = {:.6}, K = {:.6}, S = {:.6} bits, {} modes",
            sp.lambdas[0],
            m.cooperativity,
            m.entropy,
            sp.len()
        ),
    })
}

fn write_schmidt(
    dir: &mut OutputDir,
    sp: &SchmidtSpectrum,
    cfg: &ScenarioConfig,
) -> Result<(), CliError> {
    let mut text = String::from("j,lambda\n");
    for (j, l) in sp.lambdas.iter().enumerate() {
        text.push_str(&format!("{},{}\n", j + 1, num(*l)));
    }
    dir.write(LAMBDAS_CSV, text.as_bytes())?;
    let m = metrics(sp);
    dir.write_json(
        METRICS_JSON,
        &MetricsJson {
            lambda: sp.lambdas.iter().take(10).map(|&l| json_num(l)).collect(),
            retained_modes: sp.len(),
            discarded_weight: json_num(sp.discarded_weight),
            threshold: json_num(cfg.schmidt.threshold),
            entropy_bits: json_num(m.entropy),
            purity: json_num(m.purity),
            cooperativity: json_num(m.cooperativity),
        },
    )?;
    for j in 0..cfg.schmidt.modes_to_export.min(sp.len()) {
        let rows: Vec<[f64; 4]> = sp.psi[j]
            .iter()
            .enumerate()
            .map(|(i, z)| [sp.grid_s.value(i), z.re, z.im, z.norm_sqr()])
            .collect();
        dir.write_csv(
            &mode_csv(j + 1),
            &["omega", "re_psi", "im_psi", "abs_psi2"],
            &rows,
        )?;
    }
    Ok(())
}

/// Short names accepted by `sweep --param` besides full dotted keys.
pub fn sweep_key(param: &str) -> &str {
    match param {
        "rho2" => "mirror.rho2",
        "kappa" => "grating.kappa",
        "length" => "grating.length",
        "gap" => "cavity.gap",
        "sigma" => "pump.sigma",
        "points" => "grid.points",
        other => other,
    }
}

/// The resolved numeric value of a dotted key, in SI units.
pub fn lookup(cfg: &ScenarioConfig, key: &str) -> Result<f64, CliError> {
    let tree = toml::Value::try_from(cfg).expect("configuration serializes");
    let mut node = &tree;
    for part in key.split('.') {
        node = node.get(part).ok_or_else(|| {
            CliError::Config(format!(
                "sweep parameter {key:?} is not a configuration key"
            ))
        })?;
    }
    match node {
        toml::Value::Float(x) => Ok(*x),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(CliError::Config(format!(
            "sweep parameter {key:?} is not numeric"
        ))),
    }
}

pub fn sweep(
    cfg: &ScenarioConfig,
    opts: &RunOptions,
    param: &str,
    values: &[String],
    out: &Path,
) -> Result<Outcome, CliError> {
    let key = sweep_key(param);
    lookup(cfg, key)?;
    let base = cfg.to_toml();
    // Validate every point before the first expensive build.
    let points = values
        .iter()
        .map(|v| {
            let c = config::load(&base, &[format!("{key}={v}")])?;
            Ok((lookup(&c, key)?, c))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut rows = Vec::with_capacity(points.len());
    for (value, c) in &points {
        let sp = schmidt_decompose_with(&compute_jsa(c, opts)?, c.schmidt.threshold)?;
        let m = metrics(&sp);
        rows.push([*value, sp.lambdas[0], m.entropy, m.cooperativity]);
    }
    let mut dir = OutputDir::create(out)?;
    dir.write_csv(
        SWEEP_CSV,
        &["value", "lambda_1", "entropy_bits", "cooperativity"],
        &rows,
    )?;
    Ok(Outcome {
        files: dir.finish("sweep", &base)?,
        summary: format!("{} sweep points over {key}", rows.len()),
    })
}
